"""Gevrey resummation pseudonorms, certificate arithmetic and growth fits.

``N(a, T) = Σ_{α,β} nu(∂_x^α ∂_ξ^β a) T^{|α|+|β|} / (|α|!^s |β|!^σ)``

is a finite sum on jets. It is an exact rational whenever the jet is exact,
``T`` is rational and both Gevrey indices are integers; otherwise it is a float.

Compacts are finite :class:`SampleSet` s of offsets from the base point, so a
supremum over K becomes a max over samples.

A certificate carries an upper envelope ``f_m`` of the operator norms of the
``A_m`` between ``B(K, T_1)`` and ``B(K, T)``. The exact ``f_m`` is a sup over an
infinite-dimensional ball and is not computed; :func:`fm_probe` gives lower
estimates from probe jets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from scipy.special import gammaln

from .config import Tolerances
from .errors import (
    DegenerateProbe,
    IncompatibleCertificates,
    InequalityViolated,
    InsufficientData,
    MissingGrowthData,
    OrderExhausted,
    ValidationError,
)
from .jets import Jet, MultiIndex, jet_derive, jet_mul, jet_shift
from .params import GevreyParams, as_fraction
from .rings import nu
from .symbols import FormalSymbol, op_apply
from .utils import index_factorial, indices_of_degree, power_pow0

logger = logging.getLogger(__name__)

INEQUALITY_SLACK = Tolerances().inequality_slack


@dataclass(frozen=True)
class SampleSet:
    """Finite stand-in for a compact K: offsets from the base point."""

    points: tuple[tuple[Any, ...], ...]

    def __post_init__(self) -> None:
        pts = tuple(tuple(p) for p in self.points)
        if not pts:
            raise ValidationError("a sample set needs at least one point")
        if len({len(p) for p in pts}) != 1:
            raise ValidationError("sample points must share one dimension")
        object.__setattr__(self, "points", pts)

    @classmethod
    def base_only(cls, n_vars: int) -> "SampleSet":
        return cls(((0,) * n_vars,))

    @classmethod
    def grid(cls, n_vars: int, radius: Any = Fraction(1, 10), per_axis: int = 3) -> "SampleSet":
        """Axis-aligned grid of rational offsets in ``[-radius, radius]^n``."""
        r = as_fraction(radius)
        if per_axis < 1:
            raise ValidationError("per_axis must be positive")
        ticks = [Fraction(0)] if per_axis == 1 else [
            -r + 2 * r * Fraction(i, per_axis - 1) for i in range(per_axis)
        ]
        points: list[tuple[Fraction, ...]] = [()]
        for _ in range(n_vars):
            points = [p + (t,) for p in points for t in ticks]
        return cls(tuple(points))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class InequalityReport:
    lhs: Any
    rhs: Any
    holds: bool
    detail: str = ""

    @property
    def slack(self) -> float:
        return float(self.rhs) - float(self.lhs)


def _is_exact(a: Jet, params: GevreyParams) -> bool:
    return a.ring.exact and params.integral


def _weight(alpha_deg: int, beta_deg: int, params: GevreyParams, exact: bool) -> Any:
    """|α|!^s |β|!^σ (exact for integral indices)."""
    fa, fb = math.factorial(alpha_deg), math.factorial(beta_deg)
    if exact:
        return fa ** int(params.s) * fb ** int(params.sigma)
    return math.exp(float(params.s) * gammaln(alpha_deg + 1) + float(params.sigma) * gammaln(beta_deg + 1))


def pseudonorm(a: Jet, T: Any, params: GevreyParams, at: Sequence[Any] | None = None) -> Any:
    """Resummation pseudonorm of the jet at base + ``at``."""
    T = as_fraction(T)
    if T < 0:
        raise ValidationError("T must be nonnegative")
    if at is not None and any(at):
        a = jet_shift(a, at)
    exact = _is_exact(a, params)
    total: Any = Fraction(0) if exact else 0.0
    Tf = T if exact else float(T)
    for idx, c in a.items():
        ax, bx = sum(idx[: a.n_x]), sum(idx[a.n_x:])
        deriv = nu(c) * index_factorial(idx)
        w = _weight(ax, bx, params, exact)
        if exact:
            total += Fraction(deriv) * Tf ** (ax + bx) / w
        else:
            total += float(deriv) * Tf ** (ax + bx) / w
    return total


def bk_norm(a: Jet, K: SampleSet, T: Any, params: GevreyParams) -> Any:
    """‖a‖_{K,T}: max of the pseudonorm over the sample points."""
    if K.dim != a.n_vars:
        raise ValidationError(f"sample points have dimension {K.dim}, jet has {a.n_vars} variables")
    return max(pseudonorm(a, T, params, at=p) for p in K.points)


def _compare(lhs: Any, rhs: Any, slack: float) -> bool:
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        return lhs <= rhs
    return float(lhs) <= float(rhs) * (1 + slack)


def check_product_inequality(a: Jet, b: Jet, T: Any, params: GevreyParams,
                             at: Sequence[Any] | None = None,
                             slack: float = INEQUALITY_SLACK) -> InequalityReport:
    """N(ab, T) ≤ N(a, T)·N(b, T), all three truncated to the common valid order."""
    v = min(a.valid_order, b.valid_order)
    a, b = a.truncate(v), b.truncate(v)
    lhs = pseudonorm(jet_mul(a, b), T, params, at)
    rhs = pseudonorm(a, T, params, at) * pseudonorm(b, T, params, at)
    holds = _compare(lhs, rhs, slack)
    if not holds:
        raise InequalityViolated(f"product inequality fails: {lhs} > {rhs}")
    return InequalityReport(lhs, rhs, holds, f"valid order {v}")


def derivative_constant(T: float, T1: float, index: float, order: int) -> float:
    """(e^s (T1^{1/s} − T^{1/s})^{-s})^{|γ|} |γ|!^s with s the index of the derived variables."""
    gap = T1 ** (1.0 / index) - T ** (1.0 / index)
    log_c = order * (index - index * math.log(gap)) + index * gammaln(order + 1)
    return math.exp(log_c)


def check_derivative_inequality(a: Jet, gamma: Sequence[int] | MultiIndex, T: Any, T1: Any,
                                params: GevreyParams, at: Sequence[Any] | None = None,
                                slack: float = INEQUALITY_SLACK) -> InequalityReport:
    """N(∂^γ a, T) ≤ (e^s (T1^{1/s}−T^{1/s})^{-s})^{|γ|} |γ|!^s N(a, T1).

    γ derives either x-type variables only (index s) or ξ-type only (index σ).
    """
    g = gamma.components if isinstance(gamma, MultiIndex) else tuple(int(c) for c in gamma)
    if len(g) != a.n_vars:
        raise ValidationError(f"derivative index {g} does not fit {a.n_vars} variables")
    gx, gxi = g[: a.n_x], g[a.n_x:]
    if any(gx) and any(gxi):
        raise ValidationError("derive x-type or ξ-type variables, not both at once")
    T, T1 = as_fraction(T), as_fraction(T1)
    if not 0 <= T < T1:
        raise ValidationError(f"need 0 <= T < T1, got T={T}, T1={T1}")
    index = params.sigma if any(gxi) else params.s
    order = sum(g)
    if order > a.valid_order:
        raise OrderExhausted(f"derivative order {order} exceeds valid order {a.valid_order}")
    lhs = float(pseudonorm(jet_derive(a, g), T, params, at))
    rhs = derivative_constant(float(T), float(T1), float(index), order) * float(pseudonorm(a, T1, params, at))
    holds = _compare(lhs, rhs, slack)
    if not holds:
        raise InequalityViolated(f"derivative inequality fails for γ={g}: {lhs} > {rhs}")
    return InequalityReport(lhs, rhs, holds, f"γ={g}")


@dataclass(frozen=True)
class AkSup:
    """max_k binom(b+k, b)^s θ^{b+k}: brute-force value, its argmax and the closed-form bound."""

    value: Any
    argmax: int
    ratio_argmax: int
    bound: float
    window: int

    @property
    def within_bound(self) -> bool:
        return float(self.value) <= self.bound * (1 + 1e-12)


def ak_sup(b: int, theta: Any, s: Any, margin: int = 100) -> AkSup:
    theta, s = as_fraction(theta), as_fraction(s)
    if not 0 < theta < 1:
        raise ValidationError("θ must lie in (0, 1)")
    if b < 0:
        raise ValidationError("b must be nonnegative")
    q = float(theta) ** (-1.0 / float(s)) - 1.0
    ratio_argmax = math.floor(b / q)
    window = ratio_argmax + margin
    exact = s.denominator == 1
    best, arg = None, 0
    for k in range(window + 1):
        if exact:
            val = Fraction(math.comb(b + k, b)) ** int(s) * theta ** (b + k)
        else:
            val = math.exp(float(s) * math.log(math.comb(b + k, b)) + (b + k) * math.log(float(theta)))
        if best is None or val > best:
            best, arg = val, k
    bound = math.exp(b * float(s) - b * float(s) * math.log(q))
    return AkSup(best, arg, ratio_argmax, bound, window)


def fm_scale(m: int, T: float, T1: float, params: GevreyParams) -> float:
    """(m^m)^{s+σ−1} ((T1^{1/s} − T^{1/s})^s)^{-m}, the normalisation in the definition of f_m."""
    s, e = float(params.s), float(params.exponent)
    gap = T1 ** (1.0 / s) - T ** (1.0 / s)
    return float(power_pow0(m, m)) ** e * gap ** (-s * m)


def fm_probe(p: FormalSymbol, m: int, K: SampleSet, T: Any, T1: Any,
             probes: Sequence[Jet]) -> float:
    """Lower estimate of f_m^K from the probe ratios ‖A_m b‖_{K,T} / ‖b‖_{K,T1}."""
    if not probes:
        raise ValidationError("fm_probe needs at least one probe jet")
    Tf, T1f = float(as_fraction(T)), float(as_fraction(T1))
    if not 0 <= Tf < T1f:
        raise ValidationError("need 0 <= T < T1")
    best = 0.0
    for b in probes:
        denom = float(bk_norm(b, K, T1, p.params))
        if denom == 0:
            raise DegenerateProbe("probe jet has zero B(K,T1) norm")
        ratio = float(bk_norm(op_apply(p, m, b), K, T, p.params)) / denom
        best = max(best, ratio)
    return best / fm_scale(m, Tf, T1f, p.params)


@dataclass(frozen=True)
class GevreyCertificate:
    """Constants of a formal Gevrey symbol and the f_m envelope of its operator."""

    C: float
    R: float
    T0: float
    params: GevreyParams
    f_seq: tuple[float, ...]
    C1: float
    n: int
    samples: tuple[tuple[Any, ...], ...] = ()
    residual: float | None = None
    exponential: bool = field(default=False)

    def __post_init__(self) -> None:
        if any(not math.isfinite(f) or f < 0 for f in self.f_seq):
            raise ValidationError("certificate envelopes must be finite and nonnegative")
        log_c1 = math.log(self.C1) if self.C1 > 0 else -math.inf
        flag = all(f == 0 or math.log(f) <= (1 + m) * log_c1 + 1e-12 for m, f in enumerate(self.f_seq))
        object.__setattr__(self, "exponential", flag)

    @property
    def radius(self) -> float:
        """ρ below which Σ ρ^m C1^{1+m} converges."""
        return 1.0 / self.C1


def symbol_constants(p: FormalSymbol, K: SampleSet) -> tuple[float, float]:
    """(C, R) with |∂_x^α∂_ξ^β p_k| ≤ C R^{k+|α|+|β|} k!^{s+σ−1} α!^s β!^σ on K.

    C is the largest |p_0| on K (at least 1); R comes from a root test over every
    derivative the jets carry.
    """
    s, sig, e = float(p.params.s), float(p.params.sigma), float(p.params.exponent)
    shifted = [[jet_shift(c, pt) if any(pt) else c for pt in K.points] for c in p.coeffs]
    C = 1.0
    zero = (0,) * p[0].n_vars
    for jet in shifted[0]:
        C = max(C, float(nu(jet.coefficient(zero))))
    log_R = 0.0
    for k, jets in enumerate(shifted):
        for jet in jets:
            for idx, c in jet.items():
                order = k + sum(idx)
                if order == 0:
                    continue
                ax, bx = idx[: jet.n_x], idx[jet.n_x:]
                mag = float(nu(c)) * index_factorial(idx)
                if mag == 0:
                    continue
                log_scale = (e * gammaln(k + 1) + s * sum(gammaln(a + 1) for a in ax)
                             + sig * sum(gammaln(b + 1) for b in bx))
                log_R = max(log_R, (math.log(mag) - math.log(C) - log_scale) / order)
    return C, math.exp(log_R)


def _envelope_term(k: int, alpha_deg: int, alpha_fact: int, m: int, C: float, R: float,
                   T0: float, n: int, params: GevreyParams) -> float:
    s, sig, e = float(params.s), float(params.sigma), float(params.exponent)
    log_kappa = max(0.0, sig * math.log(2) + s + s * math.log(max(n, 1)))
    log_t = max(0.0, math.log(T0))
    log_term = (2 * n * math.log(2) + math.log(C) + alpha_deg * log_kappa + k * log_t
                + m * math.log(R)
                + e * (gammaln(k + 1) + math.log(alpha_fact))
                - e * (m * math.log(m) if m else 0.0))
    return math.exp(log_term)


def certificate_from_symbol(p: FormalSymbol, K: SampleSet, T0: Any, C: Any = None,
                            R: Any = None, growth: "GrowthFit | None" = None) -> GevreyCertificate:
    """Constructive certificate: f_m envelopes and C1 with f_m ≤ C1^{1+m}.

    Each non-vanishing term (1/α!) ∂_ξ^α p_k D_x^α of A_m contributes
    2^{2n} C (2^σ e^s n^s)^{|α|} R^{k+|α|} (k! α!)^{s+σ−1} T0^k / (m^m)^{s+σ−1};
    T0 is clipped below 2^{-max(s,σ)-1}/R so the (1 − 2^σ R T)^{-2n} factor stays ≤ 2^{2n}.
    """
    if C is None or R is None:
        if growth is None:
            raise MissingGrowthData("certificate needs (C, R) or a growth fit")
        C = growth.fitted_C if C is None else C
        R = growth.fitted_R if R is None else R
    C, R, T0 = float(C), float(R), float(as_fraction(T0))
    if C <= 0 or R <= 0 or T0 <= 0:
        raise ValidationError("C, R and T0 must be positive")
    n = p.n_x
    params = p.params
    T0 = min(T0, 2.0 ** (-max(float(params.s), float(params.sigma)) - 1) / R)
    zeros = (0,) * n
    f_seq = []
    for m in range(p.N + 1):
        total = 0.0
        for k in range(m + 1):
            d = m - k
            for alpha in indices_of_degree(n, d):
                if d > p[k].valid_order:
                    continue
                if jet_derive(p[k], zeros + alpha).is_zero():
                    continue
                total += _envelope_term(k, d, index_factorial(alpha), m, C, R, T0, n, params)
        f_seq.append(total)
    kappa = max(1.0, 2 ** float(params.sigma) * math.e ** float(params.s) * n ** float(params.s)) * max(1.0, T0)
    C1 = max(2 ** (2 * n) * C, 2 ** n * kappa * R, 1.0)
    residual = growth.residual if growth is not None else None
    cert = GevreyCertificate(C, R, T0, params, tuple(f_seq), C1, n, K.points, residual)
    logger.info(f"certificate C={C:.6g} R={R:.6g} T0={T0:.6g} C1={C1:.6g} exponential={cert.exponential}")
    return cert


@dataclass(frozen=True)
class CertificateCheck:
    rows: tuple[tuple[int, float, float], ...]
    holds: bool


def pseudonorm_envelope(C: Any, R: Any, T: Any, n: int) -> Any:
    """C / (1 − R T)^{2n}, exact for rational inputs."""
    C, R, T = as_fraction(C), as_fraction(R), as_fraction(T)
    if R * T >= 1:
        raise ValidationError("the envelope needs T < 1/R")
    return C / (1 - R * T) ** (2 * n)


def check_pseudonorm_envelope(a: Jet, C: Any, R: Any, T: Any, params: GevreyParams,
                              K: SampleSet | None = None,
                              slack: float = INEQUALITY_SLACK) -> InequalityReport:
    """bk_norm(a) against C/(1−RT)^{2n} for a jet with derivative bounds C R^{|γ|} α!^s β!^σ."""
    K = K or SampleSet.base_only(a.n_vars)
    lhs = bk_norm(a, K, T, params)
    rhs = pseudonorm_envelope(C, R, T, a.n_x)
    return InequalityReport(lhs, rhs, _compare(lhs, rhs, slack), "pseudonorm envelope")


def derivative_bounds_from_pseudonorm(a: Jet, T: Any, params: GevreyParams,
                                      at: Sequence[Any] | None = None,
                                      slack: float = INEQUALITY_SLACK) -> InequalityReport:
    """From N(a,T) ≤ C: |∂_x^α∂_ξ^β a| ≤ C T^{-|α|-|β|} |α|!^s |β|!^σ; reports the worst ratio."""
    T = as_fraction(T)
    if T <= 0:
        raise ValidationError("T must be positive")
    C = float(pseudonorm(a, T, params, at))
    jet = jet_shift(a, at) if at is not None and any(at) else a
    worst = 0.0
    for idx, c in jet.items():
        ax, bx = sum(idx[: a.n_x]), sum(idx[a.n_x:])
        bound = C * float(T) ** (-(ax + bx)) * _weight(ax, bx, params, False)
        if bound > 0:
            worst = max(worst, float(nu(c)) * index_factorial(idx) / bound)
    return InequalityReport(worst, 1.0, worst <= 1 + slack, "max derivative / bound")


def check_certificate(p: FormalSymbol, cert: GevreyCertificate, K: SampleSet, T: Any,
                      slack: float = INEQUALITY_SLACK) -> CertificateCheck:
    """bk_norm(p_k, K, T) ≤ C R^k k!^{s+σ−1} (1 − RT)^{-2n} for every k."""
    Tf = float(as_fraction(T))
    if cert.R * Tf >= 1:
        raise ValidationError("certificate check needs T < 1/R")
    e = float(cert.params.exponent)
    rows, ok = [], True
    for k, jet in enumerate(p.coeffs):
        norm = float(bk_norm(jet, K, T, p.params))
        env = math.exp(math.log(cert.C) + k * math.log(cert.R) + e * gammaln(k + 1)
                       - 2 * p.n_x * math.log1p(-cert.R * Tf))
        rows.append((k, norm, env))
        ok = ok and norm <= env * (1 + slack)
    return CertificateCheck(tuple(rows), ok)


def _fractions(seq: Sequence[float]) -> list[Fraction]:
    return [Fraction(f) for f in seq]


def rho_norm(cert: GevreyCertificate, rho: Any) -> Fraction:
    """‖A‖_{K,ρ} = Σ ρ^m f_m over the carried envelope, in exact arithmetic."""
    rho = as_fraction(rho)
    if rho <= 0:
        raise ValidationError("ρ must be positive")
    total, weight = Fraction(0), Fraction(1)
    for f in _fractions(cert.f_seq):
        total += weight * f
        weight *= rho
    return total


def _convolve(fa: Sequence[Fraction], fb: Sequence[Fraction], length: int) -> list[Fraction]:
    return [sum((fa[m] * fb[k - m] for m in range(k + 1)), Fraction(0)) for k in range(length)]


def _derived(template: GevreyCertificate, f_seq: Sequence[Fraction], C1: float, C: float,
             R: float, T0: float | None = None) -> GevreyCertificate:
    T0 = template.T0 if T0 is None else T0
    return GevreyCertificate(C, R, T0, template.params, tuple(float(f) for f in f_seq),
                             C1, template.n, template.samples)


def certificate_compose(cA: GevreyCertificate, cB: GevreyCertificate, rho: Any) -> GevreyCertificate:
    """Envelope of the composed operator: f_k(C) ≤ Σ_{m+l=k} f_m(A) f_l(B).

    Only ``f_seq`` and ``C1`` carry over as certified data; ``C`` and ``R`` are
    the product and the larger of the inputs. An envelope certified up to T0
    holds for every smaller T0, so the result carries the smaller of the two.
    """
    if cA.params != cB.params or cA.n != cB.n:
        raise IncompatibleCertificates("certificates use different Gevrey indices or dimensions")
    if cA.samples and cB.samples and cA.samples != cB.samples:
        raise IncompatibleCertificates("certificates were built on different sample sets")
    rho = as_fraction(rho)
    if not 0 < rho <= Fraction(min(cA.radius, cB.radius)):
        raise IncompatibleCertificates(f"ρ={rho} lies outside the radius of one of the certificates")
    length = min(len(cA.f_seq), len(cB.f_seq))
    f_seq = _convolve(_fractions(cA.f_seq), _fractions(cB.f_seq), length)
    C1 = max(cA.C1 * cB.C1, 2 * max(cA.C1, cB.C1))
    out = _derived(cA, f_seq, C1, cA.C * cB.C, max(cA.R, cB.R), min(cA.T0, cB.T0))
    lhs = sum((rho ** k * f for k, f in enumerate(f_seq)), Fraction(0))
    if lhs > rho_norm(cA, rho) * rho_norm(cB, rho):
        raise InequalityViolated("composed ρ-norm exceeds the product of the factors")
    return out


@dataclass(frozen=True)
class NeumannCertificate:
    """Envelope of 1 + r + r♯r + ⋯ and the ρ-norms involved."""

    certificate: GevreyCertificate
    r_norm: Fraction
    series_norm: Fraction
    rho: Fraction

    @property
    def bounded_by_two(self) -> bool:
        return self.r_norm < Fraction(1, 2) and self.series_norm <= 2


def neumann_certificate(c_r: GevreyCertificate, rho: Any) -> NeumannCertificate:
    """Envelope of Σ_m r^{♯m}; its ρ-norm is at most 2 whenever ‖r‖_{K,ρ} < 1/2."""
    rho = as_fraction(rho)
    f_r = _fractions(c_r.f_seq)
    if f_r and f_r[0] != 0:
        raise ValidationError("the Neumann series needs r_0 = 0 (f_0 = 0)")
    length = len(f_r)
    series = [Fraction(1)] + [Fraction(0)] * (length - 1)
    power = list(series)
    for _ in range(1, length):
        power = _convolve(power, f_r, length)
        series = [s + p for s, p in zip(series, power)]
    C1 = 2 * max(c_r.C1, 1.0) ** 2
    cert = _derived(c_r, series, C1, 1.0, c_r.R)
    r_norm = rho_norm(c_r, rho)
    series_norm = rho_norm(cert, rho)
    if r_norm < Fraction(1, 2) and series_norm > 2:
        raise InequalityViolated(f"Neumann series norm {float(series_norm)} exceeds 2")
    return NeumannCertificate(cert, r_norm, series_norm, rho)


def neumann_radius(c_r: GevreyCertificate, rho0: Any = 1, max_halvings: int = 256) -> Fraction:
    """Halve ρ from ``rho0`` until ‖r‖_{K,ρ} < 1/2."""
    rho = as_fraction(rho0)
    f_r = _fractions(c_r.f_seq)
    if f_r and f_r[0] != 0:
        raise ValidationError("the Neumann series needs r_0 = 0 (f_0 = 0)")
    for _ in range(max_halvings):
        if rho_norm(c_r, rho) < Fraction(1, 2):
            logger.info(f"neumann radius ρ={rho}")
            return rho
        rho /= 2
    raise InsufficientData(f"no ρ ≥ {rho} brings ‖r‖ below 1/2")


@dataclass(frozen=True)
class GrowthFit:
    """log m_k ≈ log C + k log R + exponent · log k!, fitted over k ≥ 2."""

    fitted_C: float
    fitted_R: float
    fitted_exponent: float
    residual: float
    data: tuple[tuple[int, float], ...]
    expected_exponent: float | None = None


def fit_growth(norms: Sequence[Any], params: GevreyParams | None = None,
               expected_exponent: Any = None, min_points: int = 5) -> GrowthFit:
    """Least-squares fit of C R^k k!^exponent to ``norms[k]``; zero entries are skipped."""
    data = []
    for k, v in enumerate(norms):
        if k < 2:
            continue
        value = float(v)
        if value <= 0:
            logger.warning(f"skipping zero norm at k={k} in growth fit")
            continue
        data.append((k, value))
    if len(data) < min_points:
        raise InsufficientData(f"growth fit needs {min_points} positive entries with k >= 2, got {len(data)}")
    ks = np.array([k for k, _ in data], dtype=float)
    ys = np.log(np.array([v for _, v in data]))
    A = np.column_stack([np.ones_like(ks), ks, gammaln(ks + 1)])
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    residual = float(np.sum((A @ coef - ys) ** 2))
    if expected_exponent is None and params is not None:
        expected_exponent = params.exponent
    fit = GrowthFit(float(np.exp(coef[0])), float(np.exp(coef[1])), float(coef[2]), residual,
                    tuple(data), None if expected_exponent is None else float(expected_exponent))
    logger.info(f"growth fit C={fit.fitted_C:.4g} R={fit.fitted_R:.4g} exponent={fit.fitted_exponent:.4f} residual={residual:.3g}")
    return fit


def growth_table(norms: Sequence[Any], fit: GrowthFit) -> list[tuple[int, float, float, float]]:
    """Rows (k, norm, envelope C R^k k!^exponent, norm / envelope)."""
    rows = []
    for k, v in enumerate(norms):
        env = math.exp(math.log(fit.fitted_C) + k * math.log(fit.fitted_R)
                       + fit.fitted_exponent * gammaln(k + 1))
        rows.append((k, float(v), env, float(v) / env if env > 0 else math.inf))
    return rows
