from __future__ import annotations as _annotations

import logging
import os
import sys
from dataclasses import asdict, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import pydantic
from dotenv import load_dotenv

from . import __version__
from .adiabatic import (
    Contour,
    FilterSymbol,
    OperatorFamily,
    check_intertwining,
    check_projector_identity,
    growth_report,
    projector_expansion,
    projector_norms,
)
from .config import EngineConfig
from .errors import DegenerateProbe, GevreyError, InsufficientData, ValidationError
from .gevrey import (
    SampleSet,
    bk_norm,
    certificate_from_symbol,
    check_certificate,
    fit_growth,
    growth_table,
    rho_norm,
    symbol_constants,
)
from .jets import jet_difference
from .models import ReportModel, from_model, parse_document, to_model
from .params import as_fraction
from .rings import Backend, format_scalar
from .selftest import format_matrix, run_selftest
from .symbols import (
    FormalSymbol,
    Method,
    Side,
    parametrix,
    resum,
    resummation_cutoff,
    resummation_decay,
    sharp,
)
from .utils import dump_json, load_json, write_csv

load_dotenv(override=True)

logger = logging.getLogger(__name__)

COMMANDS: dict[str, Callable[[EngineConfig, Path], dict[str, Any]]] = {}


def command(name: str):
    def register(fn):
        COMMANDS[name] = fn
        return fn
    return register


def _load(path: str) -> Any:
    if not Path(path).is_file():
        raise ValidationError(f"input file {path} does not exist")
    try:
        document = load_json(path)
    except (OSError, ValueError) as e:
        raise ValidationError(f"cannot read {path}: {e}") from e
    return from_model(parse_document(document))


def _inputs(config: EngineConfig, *kinds: type) -> list[Any]:
    if len(config.input) != len(kinds):
        raise ValidationError(f"{config.command} takes {len(kinds)} input file(s), got {len(config.input)}")
    objs = [_load(p) for p in config.input]
    for path, obj, kind in zip(config.input, objs, kinds):
        if not isinstance(obj, kind):
            raise ValidationError(f"{path} holds a {type(obj).__name__}, {config.command} needs a {kind.__name__}")
    if config.jet_order > 0:
        objs = [_cap_depth(o, config.jet_order) for o in objs]
    if Backend(config.backend) is Backend.FLOAT:
        objs = [o.to_float() if isinstance(o, FormalSymbol) else o for o in objs]
    return objs


def _cap_depth(obj: Any, depth: int) -> Any:
    if isinstance(obj, FormalSymbol):
        return obj.map(lambda j: j.truncate(depth))
    if isinstance(obj, OperatorFamily):
        return replace(obj, t_jet=obj.t_jet.truncate(depth))
    return obj


def _sample_set(n_vars: int, config: EngineConfig) -> SampleSet:
    if config.samples <= 1:
        return SampleSet.base_only(n_vars)
    return SampleSet.grid(n_vars, config.sample_radius, config.samples)


def _dump(model: pydantic.BaseModel) -> Any:
    return model.model_dump(mode="json")


def _write(out: Path, name: str, model: pydantic.BaseModel) -> str:
    path = out / name
    dump_json(path, _dump(model))
    return str(path)


@command("sharp")
def run_sharp(config: EngineConfig, out: Path) -> dict[str, Any]:
    p, q = _inputs(config, FormalSymbol, FormalSymbol)
    N = min(config.order, p.N, q.N)
    result = sharp(p, q, N)
    return {"N": N, "per_order_valid": result.per_order_valid,
            "artifact": _write(out, "r.json", to_model(result.symbol))}


@command("parametrix")
def run_parametrix(config: EngineConfig, out: Path) -> dict[str, Any]:
    (p,) = _inputs(config, FormalSymbol)
    N = min(config.order, p.N)
    q = parametrix(p, N, side=config.side, method=config.method, tol=config.tol,
                   inverse_tol=config.inverse_residual)
    r = sharp(p, q, N).symbol
    one = FormalSymbol.identity_like(r)
    residual = [jet_difference(r[k], one[k]) for k in range(N + 1)]
    logger.info(f"parametrix residual per order {residual}")
    return {"N": N, "per_order_valid": q.per_order_valid, "residual": residual,
            "artifact": _write(out, "q.json", to_model(q))}


@command("resum")
def run_resum(config: EngineConfig, out: Path) -> dict[str, Any]:
    (p,) = _inputs(config, FormalSymbol)
    h = as_fraction(config.hbar)
    values = {}
    for label, R in (("R1", config.R1), ("R2", config.R2)):
        values[label] = {"R": str(R), "cutoff": resummation_cutoff(h, R, p.params),
                         "value": format_scalar(resum(p, h, R))}
    results: dict[str, Any] = {"h": str(h), "representatives": values}
    R_small = min(as_fraction(config.R1), as_fraction(config.R2))
    hs = [h / 2 ** j for j in range(7) if resummation_cutoff(h / 2 ** j, R_small, p.params) <= p.N]
    if len(hs) >= 3:
        try:
            fit = resummation_decay(p, config.R1, config.R2, hs)
        except DegenerateProbe as e:
            logger.warning(f"decay probe skipped: {e}")
        else:
            results["decay"] = _dump(to_model(fit))
            if config.report:
                write_csv(config.report, ["h", "x", "log_diff"], zip(fit.hs, fit.xs, fit.log_diffs))
    else:
        logger.warning(f"symbol order {p.N} leaves fewer than three h values for the decay probe")
    return results


@command("fit")
def run_fit(config: EngineConfig, out: Path) -> dict[str, Any]:
    (p,) = _inputs(config, FormalSymbol)
    K = _sample_set(p[0].n_vars, config)
    norms = [bk_norm(p[k], K, config.norm_T, p.params) for k in range(p.N + 1)]
    fit = fit_growth(norms, p.params)
    if config.report:
        write_csv(config.report, ["k", "norm", "envelope", "ratio"], growth_table(norms, fit))
    return {"norms": [float(v) for v in norms], "fit": _dump(to_model(fit))}


@command("certify")
def run_certify(config: EngineConfig, out: Path) -> dict[str, Any]:
    (p,) = _inputs(config, FormalSymbol)
    K = _sample_set(p[0].n_vars, config)
    C, R = symbol_constants(p, K)
    cert = certificate_from_symbol(p, K, config.T0, C, R)
    T = min(as_fraction(config.norm_T), Fraction(1, 2) / as_fraction(R))
    check = check_certificate(p, cert, K, T, slack=config.inequality_slack)
    if config.report:
        write_csv(config.report, ["k", "norm", "envelope", "ratio"],
                  [(k, norm, env, norm / env) for k, norm, env in check.rows])
    results: dict[str, Any] = {
        "certificate": _dump(to_model(cert)),
        "check": {"T": str(T), "holds": check.holds, "rows": [list(r) for r in check.rows]},
        "artifact": _write(out, "certificate.json", to_model(cert)),
    }
    if config.rho:
        results["rho_norm"] = str(rho_norm(cert, config.rho))
    return results


@command("adiabatic")
def run_adiabatic(config: EngineConfig, out: Path) -> dict[str, Any]:
    (P,) = _inputs(config, OperatorFamily)
    if config.tolerances() != P.tolerances:
        P = OperatorFamily(P.t_jet, P.gap, P.s, P.name, config.tolerances())
    filt = None
    if config.filter:
        filt = _load(config.filter)
        if not isinstance(filt, FilterSymbol):
            raise ValidationError(f"{config.filter} does not hold a filter")
    expansion = projector_expansion(P, config.order, Contour.through(P.gap, config.nodes), filt,
                                    method=config.method, max_doublings=config.max_doublings)
    identity = check_projector_identity(expansion)
    intertwining = check_intertwining(expansion, P, filt)
    expansion = expansion.with_residuals(projector_identity=identity.max_residual,
                                         intertwining=intertwining.max_residual)
    norms = projector_norms(expansion)
    fit = None
    try:
        fit = growth_report(expansion, P.s, filt.sigma if filt else None)
    except InsufficientData as e:
        logger.warning(f"growth report skipped: {e}")
    if config.report:
        if fit is not None:
            write_csv(config.report, ["j", "norm", "envelope", "ratio"], growth_table(norms, fit))
        else:
            write_csv(config.report, ["j", "norm"], enumerate(norms))
    return {
        "nodes": expansion.nodes,
        "norms": norms,
        "projector_identity": _dump(to_model(identity)),
        "intertwining": _dump(to_model(intertwining)),
        "fit": _dump(to_model(fit)) if fit is not None else None,
        "artifact": _write(out, "expansion.json", to_model(expansion)),
    }


@command("selftest")
def run_selftest_command(config: EngineConfig, out: Path) -> dict[str, Any]:
    results = run_selftest(config.seed)
    print(format_matrix(results))
    return {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
            "passed": all(r.passed for r in results)}


def _check_choices(config: EngineConfig) -> None:
    if config.command not in COMMANDS:
        raise ValidationError(f"unknown command {config.command!r}; choose from {sorted(COMMANDS)}")
    for enum, value in ((Backend, config.backend), (Side, config.side), (Method, config.method)):
        try:
            enum(value)
        except ValueError:
            choices = [m.value for m in enum]
            raise ValidationError(f"{value!r} is not a valid {enum.__name__.lower()}; choose from {choices}")


def run(config: EngineConfig) -> int:
    """Execute one job; returns the process exit status."""
    out = Path(config.output)
    try:
        _check_choices(config)
        results = COMMANDS[config.command](config, out)
        report = ReportModel(version=__version__, command=config.command, config=asdict(config),
                             results=results)
        dump_json(out / f"{config.command}.json", _dump(report))
    except pydantic.ValidationError as e:
        logger.error(f"input failed schema validation: {e}", exc_info=config.debug)
        return ValidationError.exit_code
    except GevreyError as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=config.debug)
        return e.exit_code
    except OSError as e:
        logger.error(f"cannot write results under {out}: {e}", exc_info=config.debug)
        return ValidationError.exit_code
    if config.command == "selftest" and not results["passed"]:
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    import simple_parsing

    parser = simple_parsing.ArgumentParser(
        add_option_string_dash_variants=simple_parsing.DashVariant.DASH
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_arguments(EngineConfig, dest="config")
    args = parser.parse_args(argv)
    config: EngineConfig = replace(args.config, command=args.command)

    if config.debug:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig(level=os.getenv("GEVREY_LOG_LEVEL", "INFO").upper())

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
