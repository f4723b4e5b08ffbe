"""Small-scale run of the invariant suite behind ``gevrey-calculus selftest``."""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .adiabatic import (
    check_intertwining,
    check_projector_identity,
    projector_expansion,
    spectral_projector,
)
from .errors import GevreyError
from .fixtures import (
    EXACT,
    random_elliptic_symbol,
    random_gaussian,
    random_jet,
    rotating_two_level,
    x_symbol,
    xi_symbol,
)
from .gevrey import (
    GevreyCertificate,
    ak_sup,
    check_product_inequality,
    neumann_certificate,
    neumann_radius,
)
from .jets import Jet, jet_add, jet_derive, jet_equal, jet_mul
from .params import GevreyParams
from .rings import GaussianRational, nu
from .symbols import FormalSymbol, op_apply, parametrix, sharp

logger = logging.getLogger(__name__)

Check = Callable[[random.Random], tuple[bool, str]]
CHECKS: dict[str, Check] = {}


def check(name: str) -> Callable[[Check], Check]:
    def register(fn: Check) -> Check:
        CHECKS[name] = fn
        return fn
    return register


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@check("ring-axioms")
def _ring_axioms(rng: random.Random) -> tuple[bool, str]:
    for _ in range(50):
        a, b, c = (random_gaussian(rng) for _ in range(3))
        if (a * b) * c != a * (b * c) or a * (b + c) != a * b + a * c:
            return False, f"associativity or distributivity fails on {a}, {b}, {c}"
        if nu(a * b) > nu(a) * nu(b) or nu(a + b) > nu(a) + nu(b):
            return False, f"ν is not a submultiplicative seminorm on {a}, {b}"
    return True, "50 random triples"


@check("jet-leibniz")
def _jet_leibniz(rng: random.Random) -> tuple[bool, str]:
    for _ in range(10):
        a = random_jet(rng, EXACT, 1, 1, 4)
        b = random_jet(rng, EXACT, 1, 1, 4)
        for k in range(2):
            unit = tuple(int(i == k) for i in range(2))
            lhs = jet_derive(jet_mul(a, b), unit)
            rhs = jet_add(jet_mul(jet_derive(a, unit), b), jet_mul(a, jet_derive(b, unit)))
            if not jet_equal(lhs, rhs):
                return False, f"Leibniz rule fails in variable {k}"
    return True, "10 random pairs"


@check("xi-sharp-x")
def _xi_sharp_x(rng: random.Random) -> tuple[bool, str]:
    r = sharp(xi_symbol(), x_symbol()).symbol
    xi_x = jet_mul(xi_symbol()[0], x_symbol()[0])
    ok = jet_equal(r[0], xi_x) and r[1].coefficient((0, 0)) == GaussianRational(0, -1)
    return ok, f"(ξ♯x)_1 = {r[1].coefficient((0, 0))}"


@check("op-apply-recovery")
def _op_apply(rng: random.Random) -> tuple[bool, str]:
    p = random_elliptic_symbol(rng, n=1, N=3, depth=6)
    one = Jet.constant(EXACT, 1, 1, 1, p.base_point, 6)
    for m in range(p.N + 1):
        if not jet_equal(op_apply(p, m, one), p[m]):
            return False, f"A_{m}(1) differs from p_{m}"
    return True, "A_m(1) = p_m for m ≤ 3"


@check("parametrix-identity")
def _parametrix_identity(rng: random.Random) -> tuple[bool, str]:
    for _ in range(3):
        p = random_elliptic_symbol(rng, n=1, N=3, depth=8)
        q = parametrix(p, side="two-sided")
        r = sharp(p, q).symbol
        one = FormalSymbol.identity_like(r)
        for k in range(r.N + 1):
            if not jet_equal(r[k], one[k]):
                return False, f"p♯q differs from 1 at order {k}"
    return True, "3 random elliptic symbols, left = right"


@check("product-inequality")
def _product_inequality(rng: random.Random) -> tuple[bool, str]:
    params = GevreyParams(1, 1)
    for _ in range(10):
        a = random_jet(rng, EXACT, 1, 1, 5)
        b = random_jet(rng, EXACT, 1, 1, 5)
        check_product_inequality(a, b, Fraction(1, 4), params)
    return True, "10 random pairs at T = 1/4"


@check("ak-sup-bound")
def _ak_sup(rng: random.Random) -> tuple[bool, str]:
    for s in (1, 2, 3):
        for theta in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            for b in range(11):
                res = ak_sup(b, theta, s)
                if not res.within_bound:
                    return False, f"b={b} θ={theta} s={s}: {float(res.value)} > {res.bound}"
    return True, "b ≤ 10, θ ∈ {1/4, 1/2, 3/4}, s ∈ {1, 2, 3}"


@check("neumann-bound")
def _neumann(rng: random.Random) -> tuple[bool, str]:
    f_seq = (0.0,) + tuple(float(Fraction(rng.randint(1, 4), 2 ** m)) for m in range(1, 6))
    cert = GevreyCertificate(1.0, 1.0, 0.25, GevreyParams(), f_seq, 4.0, 1)
    rho = neumann_radius(cert)
    result = neumann_certificate(cert, rho)
    return result.bounded_by_two, f"ρ={rho} ‖r‖={float(result.r_norm):.4g} ‖Σ‖={float(result.series_norm):.4g}"


@check("adiabatic-identities")
def _adiabatic(rng: random.Random) -> tuple[bool, str]:
    P = rotating_two_level(order=5)
    expansion = projector_expansion(P, 2)
    identity = check_projector_identity(expansion).max_residual
    intertwining = check_intertwining(expansion, P).max_residual
    pi0 = expansion.pi_jets[0].coefficient((0,)) - spectral_projector(P)
    eig = float(nu(pi0))
    ok = identity < 1e-8 and intertwining < 1e-8 and eig < 1e-9
    return ok, f"identity {identity:.2g}, intertwining {intertwining:.2g}, Π_0 {eig:.2g}"


def run_selftest(seed: int = 0, names: list[str] | None = None) -> list[CheckResult]:
    results = []
    for name in names or list(CHECKS):
        rng = random.Random(f"{seed}:{name}")
        try:
            passed, detail = CHECKS[name](rng)
        except GevreyError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, f"selftest {name}: {'pass' if passed else 'FAIL'} ({detail})")
        results.append(CheckResult(name, passed, detail))
    return results


def format_matrix(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    return "\n".join(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results)
