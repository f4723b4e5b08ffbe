"""JSON schemas for every document the engine reads or writes.

Ring elements travel as ``"p/q+r/s*i"`` strings (decimal reals on the float
backend); matrices as nested lists of such strings. Jet coefficients are
``[multi-index, value]`` pairs. An input document may carry a ``kind`` tag;
without one its kind is read off the fields it has.
"""

from functools import singledispatch
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Discriminator, Field, Tag, TypeAdapter

from .adiabatic import FilterSymbol, OperatorFamily, ProjectorExpansion, ResidualReport
from .errors import ValidationError
from .gevrey import GevreyCertificate, GrowthFit
from .jets import Jet
from .params import GevreyParams, as_fraction
from .rings import Backend, Ring, SquareMatrix, format_scalar, parse_scalar
from .symbols import DecayFit, FormalSymbol

SCHEMA_VERSION = "1"

Value = Union[str, list[list[str]]]


class Schema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GevreyModel(Schema):
    s: str = "1"
    sigma: str = "1"


# [multi-index, ring element]
Coefficient = tuple[list[int], Value]


class JetModel(Schema):
    kind: Literal["jet"] = "jet"
    backend: Backend = Backend.EXACT
    dim: int | None = None
    n_x: int
    n_xi: int
    base_point: list[str]
    order: int
    valid_order: int | None = None
    coeffs: list[Coefficient] = Field(default_factory=list)


class FormalSymbolModel(Schema):
    kind: Literal["symbol"] = "symbol"
    gevrey: GevreyModel = Field(default_factory=GevreyModel)
    N: int | None = None
    coeffs: list[JetModel]


class OperatorFamilyModel(Schema):
    kind: Literal["family"] = "family"
    name: str = ""
    backend: Backend = Backend.EXACT
    dim: int
    t0: str = "0"
    gap: tuple[float, float]
    s: str = "1"
    # Taylor coefficient matrices P^{(k)}(t0)/k!, k = 0..order
    t_jet: list[list[list[str]]]


class FilterModel(Schema):
    kind: Literal["filter"] = "filter"
    name: str = ""
    backend: Backend = Backend.EXACT
    sigma: str = "1"
    tau0: str = "0"
    coeffs: list[str]


class CertificateModel(Schema):
    kind: Literal["certificate"] = "certificate"
    C: float
    R: float
    T0: float
    s: str = "1"
    sigma: str = "1"
    f_seq: list[float]
    exponent: str | None = None
    residual: float | None = None  # growth-fit residual when (C, R) came from a fit
    C1: float | None = None
    n: int = 1
    exponential: bool = False
    radius: float | None = None


class GrowthFitModel(Schema):
    fitted_C: float
    fitted_R: float
    fitted_exponent: float
    residual: float
    expected_exponent: float | None = None
    data: list[tuple[int, float]]


class DecayFitModel(Schema):
    hs: list[float]
    xs: list[float]
    log_diffs: list[float]
    slope: float
    intercept: float
    r_squared: float


class ResidualModel(Schema):
    name: str
    per_order: list[float]
    max_residual: float


class ExpansionModel(Schema):
    order: int
    nodes: int
    filtered: bool
    tau0: str
    tau_eval: str
    projectors: list[JetModel]
    residuals: dict[str, float] = Field(default_factory=dict)


class ReportModel(Schema):
    version: str
    schema_version: str = SCHEMA_VERSION
    command: str
    config: dict[str, Any]
    results: dict[str, Any] = Field(default_factory=dict)


def _document_kind(payload: Any) -> str | None:
    if isinstance(payload, BaseModel):
        return getattr(payload, "kind", None)
    if not isinstance(payload, dict):
        return None
    if "kind" in payload:
        return payload["kind"]
    if "t_jet" in payload:
        return "family"
    if "f_seq" in payload:
        return "certificate"
    if "n_x" in payload:
        return "jet"
    coeffs = payload.get("coeffs")
    if "gevrey" in payload or "N" in payload or (
            isinstance(coeffs, list) and coeffs and all(isinstance(c, dict) for c in coeffs)):
        return "symbol"
    if isinstance(coeffs, list):
        return "filter"
    return None


InputDocument = Annotated[
    Union[
        Annotated[JetModel, Tag("jet")],
        Annotated[FormalSymbolModel, Tag("symbol")],
        Annotated[OperatorFamilyModel, Tag("family")],
        Annotated[FilterModel, Tag("filter")],
        Annotated[CertificateModel, Tag("certificate")],
    ],
    Discriminator(_document_kind),
]
_documents = TypeAdapter(InputDocument)


def parse_document(payload: Any) -> Schema:
    """Validate a decoded JSON payload against the schema named by (or inferred as) its ``kind``."""
    return _documents.validate_python(payload)


def _format_value(value: Any) -> Value:
    if isinstance(value, SquareMatrix):
        return [[format_scalar(v) for v in row] for row in value.entries]
    return format_scalar(value)


def _parse_value(value: Value, ring: Ring) -> Any:
    if isinstance(value, str):
        return ring.element(parse_scalar(value, ring.backend))
    rows = [[parse_scalar(v, ring.backend) for v in row] for row in value]
    return ring.element(rows)


@singledispatch
def to_model(obj: Any) -> Schema:
    raise ValidationError(f"no schema for {type(obj).__name__}")


@to_model.register
def _(jet: Jet) -> JetModel:
    return JetModel(
        backend=jet.ring.backend,
        dim=jet.ring.dim,
        n_x=jet.n_x,
        n_xi=jet.n_xi,
        base_point=[format_scalar(c) for c in jet.base_point],
        order=jet.order,
        valid_order=jet.valid_order,
        coeffs=[(list(idx), _format_value(v)) for idx, v in jet.items()],
    )


@to_model.register
def _(p: FormalSymbol) -> FormalSymbolModel:
    return FormalSymbolModel(
        gevrey=GevreyModel(**p.params.to_dict()),
        N=p.N,
        coeffs=[to_model(c) for c in p.coeffs],
    )


@to_model.register
def _(P: OperatorFamily) -> OperatorFamilyModel:
    mats = [_format_value(P.t_jet.coefficient((k,))) for k in range(P.order + 1)]
    return OperatorFamilyModel(
        name=P.name, backend=P.t_jet.ring.backend, dim=P.dim, t0=format_scalar(P.t0),
        gap=P.gap, s=str(P.s), t_jet=mats,
    )


@to_model.register
def _(f: FilterSymbol) -> FilterModel:
    jet = f.tau_jet
    return FilterModel(
        name=f.name, backend=jet.ring.backend, sigma=str(f.sigma), tau0=format_scalar(f.tau0),
        coeffs=[format_scalar(jet.coefficient((k,))) for k in range(jet.valid_order + 1)],
    )


@to_model.register
def _(cert: GevreyCertificate) -> CertificateModel:
    return CertificateModel(
        C=cert.C, R=cert.R, T0=cert.T0, **cert.params.to_dict(), f_seq=list(cert.f_seq),
        exponent=str(cert.params.exponent), residual=cert.residual, C1=cert.C1, n=cert.n,
        exponential=cert.exponential, radius=cert.radius,
    )


@to_model.register
def _(fit: GrowthFit) -> GrowthFitModel:
    return GrowthFitModel(
        fitted_C=fit.fitted_C, fitted_R=fit.fitted_R, fitted_exponent=fit.fitted_exponent,
        residual=fit.residual, expected_exponent=fit.expected_exponent, data=list(fit.data),
    )


@to_model.register
def _(fit: DecayFit) -> DecayFitModel:
    return DecayFitModel(hs=fit.hs, xs=fit.xs, log_diffs=fit.log_diffs, slope=fit.slope,
                         intercept=fit.intercept, r_squared=fit.r_squared)


@to_model.register
def _(report: ResidualReport) -> ResidualModel:
    return ResidualModel(name=report.name, per_order=list(report.per_order),
                         max_residual=report.max_residual)


@to_model.register
def _(expansion: ProjectorExpansion) -> ExpansionModel:
    return ExpansionModel(
        order=expansion.order, nodes=expansion.nodes, filtered=expansion.filtered,
        tau0=format_scalar(expansion.tau0), tau_eval=format_scalar(expansion.tau_eval),
        projectors=[to_model(j) for j in expansion.pi_jets], residuals=dict(expansion.residuals),
    )


@singledispatch
def from_model(model: Any) -> Any:
    raise ValidationError(f"cannot build an engine object from {type(model).__name__}")


@from_model.register
def _(m: JetModel) -> Jet:
    ring = Ring(m.backend, m.dim)
    n = m.n_x + m.n_xi
    coeffs = {}
    for index, value in m.coeffs:
        if len(index) != n:
            raise ValidationError(f"coefficient index {index} does not fit {m.n_x}+{m.n_xi} variables")
        coeffs[tuple(index)] = _parse_value(value, ring)
    base = [parse_scalar(b, m.backend) for b in m.base_point]
    return Jet(ring, m.n_x, m.n_xi, base, m.order, coeffs, m.valid_order)


@from_model.register
def _(m: FormalSymbolModel) -> FormalSymbol:
    if m.N is not None and m.N != len(m.coeffs) - 1:
        raise ValidationError(f"symbol declares N={m.N} but carries {len(m.coeffs)} coefficients")
    jets = tuple(from_model(c) for c in m.coeffs)
    return FormalSymbol(jets, GevreyParams(m.gevrey.s, m.gevrey.sigma))


@from_model.register
def _(m: OperatorFamilyModel) -> OperatorFamily:
    if not m.t_jet:
        raise ValidationError("an operator family needs at least P(t0)")
    ring = Ring(m.backend, m.dim)
    coeffs = {(k,): _parse_value(mat, ring) for k, mat in enumerate(m.t_jet)}
    jet = Jet(ring, 1, 0, [parse_scalar(m.t0, m.backend)], len(m.t_jet) - 1, coeffs)
    return OperatorFamily(jet, m.gap, s=m.s, name=m.name)


@from_model.register
def _(m: FilterModel) -> FilterSymbol:
    if not m.coeffs:
        raise ValidationError("a filter needs at least a(τ0)")
    ring = Ring(m.backend)
    coeffs = {(k,): parse_scalar(c, m.backend) for k, c in enumerate(m.coeffs)}
    jet = Jet(ring, 0, 1, [parse_scalar(m.tau0, m.backend)], len(m.coeffs) - 1, coeffs)
    return FilterSymbol(jet, m.sigma, name=m.name)


@from_model.register
def _(m: CertificateModel) -> GevreyCertificate:
    params = GevreyParams(m.s, m.sigma)
    if m.exponent is not None and as_fraction(m.exponent) != params.exponent:
        raise ValidationError(f"exponent {m.exponent} does not match s + σ − 1 = {params.exponent}")
    C1 = m.C1
    if C1 is None:
        # smallest C1 >= 1 with f_m <= C1^{1+m}
        C1 = max([1.0] + [f ** (1.0 / (1 + k)) for k, f in enumerate(m.f_seq) if f > 0])
    return GevreyCertificate(m.C, m.R, m.T0, params, tuple(m.f_seq), C1, m.n, residual=m.residual)
