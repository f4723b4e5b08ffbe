"""Built-in families, filters and random generators used by the CLI and the test suite."""

import math
import random
from fractions import Fraction
from typing import Any, Sequence

from .adiabatic import FilterSymbol, OperatorFamily
from .jets import Jet
from .params import GevreyParams, as_fraction
from .rings import Backend, GaussianRational, Ring, SquareMatrix
from .symbols import FormalSymbol
from .utils import indices_up_to

EXACT = Ring(Backend.EXACT)
FLOAT = Ring(Backend.FLOAT)


def gevrey_coefficients(index: Any, order: int) -> list[Any]:
    """Taylor coefficients 0, 1, 2!^{index-1}, 3!^{index-1}, ... (exact for integral index)."""
    index = as_fraction(index)
    out: list[Any] = [0]
    for k in range(1, order + 1):
        if index.denominator == 1:
            out.append(math.factorial(k) ** (int(index) - 1))
        else:
            out.append(math.exp(float(index - 1) * math.lgamma(k + 1)))
    return out


def _matrix_jet(mats: Sequence[Sequence[Sequence[Any]]], backend: Backend, t0: Any = 0) -> Jet:
    dim = len(mats[0])
    ring = Ring(backend, dim)
    order = len(mats) - 1
    coeffs = {(k,): SquareMatrix(m, backend) for k, m in enumerate(mats)}
    return Jet(ring, 1, 0, [t0], order, coeffs)


def constant_diagonal(values: Sequence[Any] = (1, -1), order: int = 6,
                      gap: Sequence[float] = (0.2, 1.8)) -> OperatorFamily:
    dim = len(values)
    base = [[values[i] if i == j else 0 for j in range(dim)] for i in range(dim)]
    zero = [[0] * dim for _ in range(dim)]
    return OperatorFamily(_matrix_jet([base] + [zero] * order, Backend.EXACT), tuple(gap),
                          name="constant-diagonal")


def drifting_diagonal(order: int = 6, gap: Sequence[float] = (0.2, 1.8)) -> OperatorFamily:
    """diag(1 + t/4 + t²/8, −1 − t/4): t-dependent with a persistent gap."""
    mats = [[[1, 0], [0, -1]], [[Fraction(1, 4), 0], [0, Fraction(-1, 4)]],
            [[Fraction(1, 8), 0], [0, 0]]]
    mats += [[[0, 0], [0, 0]]] * max(0, order - 2)
    return OperatorFamily(_matrix_jet(mats[: order + 1], Backend.EXACT), tuple(gap),
                          name="drifting-diagonal")


def rotating_two_level(omega: Any = 1, order: int = 8,
                       gap: Sequence[float] = (0.2, 1.8)) -> OperatorFamily:
    """R(ωt) diag(1, −1) R(ωt)ᵀ = [[cos 2ωt, sin 2ωt], [sin 2ωt, −cos 2ωt]] at t0 = 0."""
    w = 2 * as_fraction(omega)
    mats = []
    for k in range(order + 1):
        c = s = Fraction(0)
        if k % 2 == 0:
            c = Fraction((-1) ** (k // 2)) * w ** k / math.factorial(k)
        else:
            s = Fraction((-1) ** (k // 2)) * w ** k / math.factorial(k)
        mats.append([[c, s], [s, -c]])
    return OperatorFamily(_matrix_jet(mats, Backend.EXACT), tuple(gap), name="rotating-two-level")


def avoided_crossing(coupling: Any = 1, order: int = 12, s: Any = 1,
                     gap: Sequence[float] = (0.2, 1.8)) -> OperatorFamily:
    """[[f(t), g], [g, −f(t)]] at t0 = 0; f(t) = t for s = 1, Gevrey-s Taylor data otherwise."""
    g = as_fraction(coupling)
    f = gevrey_coefficients(s, order)
    backend = Backend.EXACT if as_fraction(s).denominator == 1 else Backend.FLOAT
    mats = []
    for k in range(order + 1):
        fk = f[k] if as_fraction(s) != 1 else (1 if k == 1 else 0)
        off = g if k == 0 else 0
        mats.append([[fk, off], [off, -fk]])
    return OperatorFamily(_matrix_jet(mats, backend), tuple(gap), s=s, name="avoided-crossing")


def identity_filter(order: int = 12) -> FilterSymbol:
    jet = Jet(EXACT, 0, 1, [0], order, {(1,): 1})
    return FilterSymbol(jet, 1, name="identity")


def gevrey_filter(sigma: Any = 2, order: int = 12) -> FilterSymbol:
    """a(τ) with a_0 = 0, a_1 = 1 and a_k = k!^{σ−1}."""
    sigma = as_fraction(sigma)
    coeffs = gevrey_coefficients(sigma, order)
    ring = EXACT if sigma.denominator == 1 else FLOAT
    jet = Jet(ring, 0, 1, [0], order, {(k,): c for k, c in enumerate(coeffs)})
    return FilterSymbol(jet, sigma, name=f"gevrey-{sigma}")


def xi_symbol(order: int = 2, N: int = 1) -> FormalSymbol:
    p0 = Jet.variable(EXACT, 1, 1, 1, None, order)
    zeros = [Jet.zero(EXACT, 1, 1, None, order) for _ in range(N)]
    return FormalSymbol(tuple([p0, *zeros]))


def x_symbol(order: int = 2, N: int = 1) -> FormalSymbol:
    p0 = Jet.variable(EXACT, 0, 1, 1, None, order)
    zeros = [Jet.zero(EXACT, 1, 1, None, order) for _ in range(N)]
    return FormalSymbol(tuple([p0, *zeros]))


def elliptic_fixture(s: Any = 1, N: int = 20, depth: int | None = None, xi0: Any = Fraction(1, 2),
                     backend: Backend = Backend.FLOAT) -> FormalSymbol:
    """p = 1 + ξ f(x) at (0, ξ0), f Taylor coefficients 0, 1, 2!^{s−1}, ...; no h-corrections.

    s = 1 gives the analytic f(x) = x/(1 − x); the parametrix then grows like k!^s.
    """
    depth = N + 6 if depth is None else depth
    ring = Ring(backend)
    f = gevrey_coefficients(s, depth)
    xi0 = as_fraction(xi0)
    coeffs: dict[tuple[int, int], Any] = {(0, 0): 1}
    for k in range(1, depth + 1):
        coeffs[(k, 0)] = xi0 * f[k] if backend is Backend.EXACT else float(xi0) * f[k]
        if k + 1 <= depth:
            coeffs[(k, 1)] = f[k]
    p0 = Jet(ring, 1, 1, [0, xi0], depth, coeffs)
    zeros = [Jet.zero(ring, 1, 1, p0.base_point, depth) for _ in range(N)]
    return FormalSymbol(tuple([p0, *zeros]), GevreyParams(s, 1))


def factorial_symbol(N: int = 1024) -> FormalSymbol:
    """p_k = k! as constant jets in one (x, ξ) pair; the resummation decay fixture."""
    coeffs = tuple(Jet.constant(EXACT, math.factorial(k), 1, 1) for k in range(N + 1))
    return FormalSymbol(coeffs, GevreyParams(1, 1))


def random_gaussian(rng: random.Random, bound: int = 3, den: int = 3) -> GaussianRational:
    return GaussianRational(Fraction(rng.randint(-bound, bound), rng.randint(1, den)),
                            Fraction(rng.randint(-bound, bound), rng.randint(1, den)))


def random_element(rng: random.Random, ring: Ring, bound: int = 3) -> Any:
    if ring.is_matrix:
        rows = [[random_gaussian(rng, bound) for _ in range(ring.dim)] for _ in range(ring.dim)]
        m = SquareMatrix(rows, Backend.EXACT)
        return m if ring.exact else m.to_float()
    g = random_gaussian(rng, bound)
    return g if ring.exact else complex(g)


def random_jet(rng: random.Random, ring: Ring, n_x: int, n_xi: int, order: int,
               base_point: Sequence[Any] | None = None, density: float = 0.6,
               bound: int = 3) -> Jet:
    n = n_x + n_xi
    base = base_point if base_point is not None else [0] * n
    coeffs = {idx: random_element(rng, ring, bound)
              for idx in indices_up_to(n, order) if rng.random() < density}
    return Jet(ring, n_x, n_xi, base, order, coeffs)


def random_elliptic_symbol(rng: random.Random, n: int = 1, N: int = 3, depth: int = 6,
                           ring: Ring = EXACT, params: GevreyParams | None = None) -> FormalSymbol:
    """Random symbol whose p_0 has a safely invertible constant term."""
    jets = []
    zero = (0,) * (2 * n)
    for k in range(N + 1):
        jet = random_jet(rng, ring, n, n, depth, bound=2)
        if k == 0:
            coeffs = dict(jet.coeffs)
            coeffs[zero] = ring.element(4) + random_element(rng, ring, 1) * Fraction(1, 4)
            jet = Jet(ring, n, n, jet.base_point, depth, coeffs)
        jets.append(jet)
    return FormalSymbol(tuple(jets), params or GevreyParams())
