"""Formal symbols ``p = Σ h^k p_k`` and their calculus.

Composition follows

    (p ♯ q)_k = Σ_{a+b+|α|=k} (1/α!) i^{-|α|} ∂_ξ^α p_a · ∂_x^α q_b,

that is ``D_x = -i ∂_x`` folded into the ``i^{-|α|}`` factor, so ``ξ ♯ x = xξ − ih``.
Matrix-valued factors keep the written order (left factor from ``p``).

Float reductions run in a fixed order: ascending ``a``, then ``b``, then α in
lexicographic order (first component descending).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .errors import (
    DegenerateProbe,
    InequalityViolated,
    OrderExhausted,
    TruncationExceedsData,
    ValidationError,
)
from .jets import Jet, check_compatible, jet_add, jet_derive, jet_equal, jet_eval, jet_mul, jet_reciprocal
from .params import GevreyParams, as_fraction
from .rings import INVERSE_RESIDUAL_TOL, Ring, nu
from .utils import index_factorial, indices_of_degree

logger = logging.getLogger(__name__)


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    TWO_SIDED = "two-sided"


class Method(str, Enum):
    NEUMANN = "neumann"
    RECURSIVE = "recursive"


@dataclass(frozen=True)
class FormalSymbol:
    """Truncated formal series ``p_0 + h p_1 + ... + h^N p_N``."""

    coeffs: tuple[Jet, ...]
    params: GevreyParams = field(default_factory=GevreyParams)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValidationError("a formal symbol needs at least p_0")
        first = self.coeffs[0]
        for jet in self.coeffs[1:]:
            check_compatible(first, jet)

    @classmethod
    def constant(cls, ring: Ring, value: Any, n_x: int, n_xi: int, order: int, N: int = 0,
                 base_point: Sequence[Any] | None = None,
                 params: GevreyParams | None = None) -> "FormalSymbol":
        """``value`` at order 0 and zero jets (of the same depth) up to ``N``."""
        p0 = Jet.constant(ring, value, n_x, n_xi, base_point, order)
        rest = [Jet.zero(ring, n_x, n_xi, p0.base_point, order) for _ in range(N)]
        return cls(tuple([p0, *rest]), params or GevreyParams())

    @classmethod
    def identity_like(cls, p: "FormalSymbol", order: int | None = None, N: int | None = None) -> "FormalSymbol":
        depth = p.min_valid_order if order is None else order
        return cls.constant(p.ring, p.ring.one(), p.n_x, p.n_xi, depth,
                            p.N if N is None else N, p.base_point, p.params)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    @property
    def ring(self) -> Ring:
        return self.coeffs[0].ring

    @property
    def n_x(self) -> int:
        return self.coeffs[0].n_x

    @property
    def n_xi(self) -> int:
        return self.coeffs[0].n_xi

    @property
    def base_point(self) -> tuple:
        return self.coeffs[0].base_point

    @property
    def per_order_valid(self) -> list[int]:
        return [c.valid_order for c in self.coeffs]

    @property
    def min_valid_order(self) -> int:
        return min(self.per_order_valid)

    def __getitem__(self, k: int) -> Jet:
        return self.coeffs[k]

    def __len__(self) -> int:
        return len(self.coeffs)

    def truncate(self, N: int) -> "FormalSymbol":
        if N > self.N:
            raise OrderExhausted(f"symbol carries orders up to {self.N}, {N} requested")
        return FormalSymbol(self.coeffs[: N + 1], self.params)

    def to_float(self) -> "FormalSymbol":
        return FormalSymbol(tuple(c.to_float() for c in self.coeffs), self.params)

    def map(self, fn: Callable[[Jet], Jet]) -> "FormalSymbol":
        return FormalSymbol(tuple(fn(c) for c in self.coeffs), self.params)

    def __add__(self, other: "FormalSymbol") -> "FormalSymbol":
        return symbol_add(self, other)

    def __sub__(self, other: "FormalSymbol") -> "FormalSymbol":
        return symbol_add(self, other.map(lambda j: -j))


@dataclass(frozen=True)
class SharpResult:
    symbol: FormalSymbol
    per_order_valid: list[int]


def symbol_add(p: FormalSymbol, q: FormalSymbol) -> FormalSymbol:
    N = min(p.N, q.N)
    return FormalSymbol(tuple(jet_add(p[k], q[k]) for k in range(N + 1)), p.params.join(q.params))


def symbol_equal(p: FormalSymbol, q: FormalSymbol, tol: float = 0.0) -> bool:
    """Coefficientwise masked equality over the shared h-orders."""
    N = min(p.N, q.N)
    return all(jet_equal(p[k], q[k], tol) for k in range(N + 1))


def _check_square(p: FormalSymbol) -> int:
    if p.n_x != p.n_xi:
        raise ValidationError(
            f"composition needs as many ξ-variables as x-variables, got ({p.n_x},{p.n_xi})"
        )
    return p.n_x


class _DerivativeCache:
    """Memoised ∂_ξ^α / ∂_x^α of the coefficients of one symbol."""

    def __init__(self, symbol: FormalSymbol, kind: str) -> None:
        self.symbol = symbol
        self._n = symbol.n_x
        self._kind = kind
        self._cache: dict[tuple[int, tuple[int, ...]], Jet] = {}

    def get(self, k: int, alpha: tuple[int, ...]) -> Jet:
        key = (k, alpha)
        jet = self._cache.get(key)
        if jet is None:
            zeros = (0,) * self._n
            gamma = zeros + alpha if self._kind == "xi" else alpha + zeros
            jet = jet_derive(self.symbol[k], gamma)
            self._cache[key] = jet
        return jet


def _alpha_factor(ring: Ring, alpha: tuple[int, ...]) -> Any:
    return ring.i_power(-sum(alpha)) * ring.scalar(Fraction(1, index_factorial(alpha)))


def _sharp_order(pd: _DerivativeCache, qd: _DerivativeCache, ring: Ring, n: int, k: int,
                 skip: tuple[int, int, int] | None = None) -> Jet | None:
    """(p ♯ q)_k, optionally leaving out one (a, b, |α|=0) term."""
    total: Jet | None = None
    for a in range(k + 1):
        for b in range(k - a + 1):
            d = k - a - b
            if skip is not None and (a, b, d) == skip:
                continue
            for alpha in indices_of_degree(n, d):
                left = pd.get(a, alpha)
                right = qd.get(b, alpha)
                term = jet_mul(left, right)
                if d:
                    term = term.scale(_alpha_factor(ring, alpha))
                total = term if total is None else jet_add(total, term)
    return total


def sharp(p: FormalSymbol, q: FormalSymbol, N: int | None = None) -> SharpResult:
    """The composed symbol ``p ♯ q`` up to h-order N."""
    _check_square(p)
    check_compatible(p[0], q[0])
    top = min(p.N, q.N)
    N = top if N is None else N
    if N > top:
        raise OrderExhausted(f"composition to order {N} needs both symbols to carry it (have {top})")
    symbol = _compose(_DerivativeCache(p, "xi"), _DerivativeCache(q, "x"), N)
    return SharpResult(symbol, symbol.per_order_valid)


def _compose(pd: _DerivativeCache, qd: _DerivativeCache, N: int) -> FormalSymbol:
    p, q = pd.symbol, qd.symbol
    out = []
    for k in range(N + 1):
        r_k = _sharp_order(pd, qd, p.ring, p.n_x, k)
        out.append(r_k)
        logger.debug(f"sharp order {k} valid order {r_k.valid_order}")
    return FormalSymbol(tuple(out), p.params.join(q.params))


def op_apply(p: FormalSymbol, m: int, b: Jet) -> Jet:
    """``A_m b = Σ_{k+|α|=m} (1/α!) ∂_ξ^α p_k · i^{-|α|} ∂_x^α b``; ``A_m(1) = p_m``."""
    n = _check_square(p)
    check_compatible(p[0], b)
    if m > p.N:
        raise OrderExhausted(f"A_{m} needs p_{m}, symbol stops at order {p.N}")
    if b.valid_order < m:
        raise OrderExhausted(f"A_{m} differentiates up to order {m}, probe is valid to {b.valid_order}")
    zeros = (0,) * n
    total: Jet | None = None
    for k in range(m + 1):
        d = m - k
        for alpha in indices_of_degree(n, d):
            left = jet_derive(p[k], zeros + alpha)
            right = jet_derive(b, alpha + zeros)
            term = jet_mul(left, right)
            if d:
                term = term.scale(_alpha_factor(p.ring, alpha))
            total = term if total is None else jet_add(total, term)
    return total


def required_jet_depth(N: int, target_valid: int) -> int:
    """Input depth for a parametrix to order N whose coefficients stay valid to ``target_valid``.

    q_k is valid to at least ``min_a V(p_a) − k``.
    """
    return target_valid + N


def _zero_tail(q0: Jet, N: int, params: GevreyParams) -> FormalSymbol:
    zeros = [Jet.zero(q0.ring, q0.n_x, q0.n_xi, q0.base_point, q0.valid_order) for _ in range(N)]
    return FormalSymbol(tuple([q0, *zeros]), params)


def _neumann(p: FormalSymbol, q0: Jet, N: int, side: Side) -> FormalSymbol:
    Q0 = _zero_tail(q0, N, p.params)
    one = FormalSymbol.identity_like(p, order=q0.valid_order, N=N)
    if side is Side.RIGHT:
        r = one - sharp(p, Q0, N).symbol
    else:
        r = one - sharp(Q0, p, N).symbol
    rd = _DerivativeCache(r, "x")
    series = one
    power = one
    for m in range(1, N + 1):
        power = _compose(_DerivativeCache(power, "xi"), rd, N)
        series = series + power
        logger.debug(f"neumann power {m} valid orders {power.per_order_valid}")
    if side is Side.RIGHT:
        return sharp(Q0, series, N).symbol
    return sharp(series, Q0, N).symbol


def _recursive(p: FormalSymbol, q0: Jet, N: int, side: Side) -> FormalSymbol:
    n = p.n_x
    pd_xi, pd_x = _DerivativeCache(p, "xi"), _DerivativeCache(p, "x")
    q: list[Jet] = [q0]
    for k in range(1, N + 1):
        partial = FormalSymbol(tuple(q + [Jet.zero(q0.ring, q0.n_x, q0.n_xi, q0.base_point, q0.valid_order)]),
                               p.params)
        if side is Side.RIGHT:
            rest = _sharp_order(pd_xi, _DerivativeCache(partial, "x"),
                                p.ring, n, k, skip=(0, k, 0))
            q_k = -jet_mul(q0, rest)
        else:
            rest = _sharp_order(_DerivativeCache(partial, "xi"), pd_x,
                                p.ring, n, k, skip=(k, 0, 0))
            q_k = -jet_mul(rest, q0)
        q.append(q_k)
        logger.debug(f"recursive parametrix order {k} valid order {q_k.valid_order}")
    return FormalSymbol(tuple(q), p.params)


def _solve(p: FormalSymbol, q0: Jet, N: int, side: Side, method: Method) -> FormalSymbol:
    if method is Method.NEUMANN:
        return _neumann(p, q0, N, side)
    return _recursive(p, q0, N, side)


def parametrix(
    p: FormalSymbol,
    N: int | None = None,
    side: Side | str = Side.TWO_SIDED,
    method: Method | str = Method.RECURSIVE,
    target_valid: int | None = None,
    tol: float = 1e-10,
    inverse_tol: float = INVERSE_RESIDUAL_TOL,
) -> FormalSymbol:
    """Formal inverse of an elliptic symbol up to h-order N.

    Raises NonInvertible when p_0 is not invertible at the base point and
    OrderExhausted when the input jets are too shallow for ``target_valid``.
    """
    side, method = Side(side), Method(method)
    _check_square(p)
    N = p.N if N is None else N
    if N > p.N:
        raise OrderExhausted(f"parametrix to order {N} needs p_0..p_{N}, symbol stops at {p.N}")
    if target_valid is not None:
        need = required_jet_depth(N, target_valid)
        have = min(p[k].valid_order for k in range(N + 1))
        if have < need:
            raise OrderExhausted(
                f"valid order {target_valid} at h-order {N} needs jets of depth {need}, got {have}"
            )
    p = p.truncate(N)
    q0 = jet_reciprocal(p[0], inverse_tol)
    logger.info(f"parametrix N={N} side={side.value} method={method.value} depth={p.min_valid_order}")
    if side is Side.TWO_SIDED:
        right = _solve(p, q0, N, Side.RIGHT, method)
        left = _solve(p, q0, N, Side.LEFT, method)
        check_tol = 0.0 if p.ring.exact else tol * max(1.0, max(c.max_abs() for c in right.coeffs))
        if not symbol_equal(right, left, check_tol):
            raise InequalityViolated("left and right parametrices disagree within shared valid orders")
        q = right
    else:
        q = _solve(p, q0, N, side, method)
    if target_valid is not None and min(q.per_order_valid) < target_valid:
        raise OrderExhausted(
            f"parametrix valid orders {q.per_order_valid} fall short of {target_valid}"
        )
    return q


def resummation_cutoff(h: Any, R: Any, params: GevreyParams) -> int:
    """K(h) = ⌊(R h)^{-1/(s+σ-1)}⌋; exact whenever s+σ-1 = 1."""
    h, R = as_fraction(h), as_fraction(R)
    if h <= 0 or R <= 0:
        raise ValidationError("h and R must be positive")
    e = params.exponent
    if e == 1:
        return math.floor(1 / (R * h))
    return math.floor(float(R * h) ** (-1.0 / float(e)) + 1e-12)


def resum(p: FormalSymbol, h: Any, R: Any, eval_offset: Sequence[Any] | None = None) -> Any:
    """Σ_{k ≤ K(h)} h^k p_k(base + offset)."""
    K = resummation_cutoff(h, R, p.params)
    if K > p.N:
        raise TruncationExceedsData(f"cutoff K(h)={K} exceeds the symbol order {p.N}")
    hs = p.ring.scalar(as_fraction(h) if p.ring.exact else float(as_fraction(h)))
    total = p.ring.zero()
    weight = p.ring.scalar(1)
    for k in range(K + 1):
        total = total + jet_eval(p[k], eval_offset) * weight
        weight = weight * hs
    return total


def _log_magnitude(value: Any) -> float:
    mag = nu(value)
    if isinstance(mag, Fraction):
        if mag == 0:
            return -math.inf
        return math.log(mag.numerator) - math.log(mag.denominator)
    return math.log(mag) if mag > 0 else -math.inf


@dataclass(frozen=True)
class DecayFit:
    """log|resum_{R1} − resum_{R2}| ≈ intercept + slope · h^{-1/(s+σ-1)}."""

    hs: list[float]
    xs: list[float]
    log_diffs: list[float]
    slope: float
    intercept: float
    r_squared: float


def resummation_decay(p: FormalSymbol, R1: Any, R2: Any, hs: Sequence[Any],
                      eval_offset: Sequence[Any] | None = None) -> DecayFit:
    if len(hs) < 3:
        raise ValidationError("the decay probe needs at least three values of h")
    e = float(p.params.exponent)
    xs, ys = [], []
    for h in hs:
        diff = resum(p, h, R1, eval_offset) - resum(p, h, R2, eval_offset)
        y = _log_magnitude(diff)
        if y == -math.inf:
            raise DegenerateProbe(f"representatives agree exactly at h={h}; nothing to fit")
        xs.append(float(as_fraction(h)) ** (-1.0 / e))
        ys.append(y)
    A = np.column_stack([np.ones(len(xs)), np.array(xs)])
    coef, *_ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((np.array(ys) - pred) ** 2))
    ss_tot = float(np.sum((np.array(ys) - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    logger.info(f"resummation decay slope={coef[1]:.6g} intercept={coef[0]:.6g} R^2={r2:.6f}")
    return DecayFit([float(as_fraction(h)) for h in hs], xs, ys, float(coef[1]), float(coef[0]), r2)
