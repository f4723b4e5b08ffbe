"""Adiabatic projector expansions for finite-dimensional families P(t).

The resolvent symbol ``z − τ − P(t)`` (or ``z − a(τ) − P(t)`` with a frequency
filter) is a matrix-valued order-0 symbol in ``(t, τ)``. Its parametrix
``S = Σ h^j S_j`` integrated over a circle through the gap endpoints gives

    Π_j(t) = (1/2πi) ∮ S_j(t, τ = 0; z) dz,

computed with the trapezoidal rule. Nodes are independent parametrix runs and
are evaluated on a thread pool; contributions are accumulated in node order so
the result does not depend on the worker count.

Contour work is float only.
"""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .config import Tolerances, num_threads
from .errors import InsufficientData, OnSpectrum, OrderExhausted, QuadratureNotConverged, ValidationError
from .gevrey import GrowthFit, fit_growth
from .jets import Jet, jet_add, jet_derive, jet_difference, jet_lift, jet_mul, jet_restrict, jet_shift
from .params import GevreyParams, as_fraction
from .rings import Backend, Ring, SquareMatrix
from .symbols import FormalSymbol, Method, Side, parametrix, sharp

logger = logging.getLogger(__name__)

DEFAULT_NODES = 64
DEFAULT_DOUBLINGS = 4
P_ZERO = 1e-14


def _as_float_jet(jet: Jet) -> Jet:
    return jet if not jet.ring.exact else jet.to_float()


@dataclass(frozen=True)
class OperatorFamily:
    """Matrix family P(t) as a t-jet at t0 with a spectral gap window (γ1, γ2)."""

    t_jet: Jet
    gap: tuple[float, float]
    s: Fraction = Fraction(1)
    name: str = ""
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self) -> None:
        jet = _as_float_jet(self.t_jet)
        object.__setattr__(self, "t_jet", jet)
        object.__setattr__(self, "s", as_fraction(self.s))
        object.__setattr__(self, "gap", (float(self.gap[0]), float(self.gap[1])))
        if not jet.ring.is_matrix or (jet.n_x, jet.n_xi) != (1, 0):
            raise ValidationError("an operator family is a matrix-valued jet in the single variable t")
        if self.s < 1:
            raise ValidationError("the Gevrey index of a family must be >= 1")
        g1, g2 = self.gap
        if not g1 < g2:
            raise ValidationError(f"gap window needs γ1 < γ2, got ({g1}, {g2})")
        p0 = self.base_value().to_array()
        skew = float(np.max(np.abs(p0 - p0.conj().T)))
        if skew > self.tolerances.hermitian:
            raise ValidationError(f"P(t0) is not Hermitian (max |P − P*| = {skew:.3g})")
        if skew > 0:
            logger.warning(f"P(t0) is Hermitian only up to {skew:.3g}")
        dist = min(abs(lam - g) for lam in self.eigenvalues() for g in self.gap)
        if dist <= self.tolerances.on_spectrum:
            raise OnSpectrum(f"gap endpoint within {dist:.3g} of the spectrum of P(t0)")
        if not self.window_count():
            logger.warning(f"gap window {self.gap} encloses no eigenvalue of P(t0)")

    @property
    def dim(self) -> int:
        return self.t_jet.ring.dim

    @property
    def t0(self) -> complex:
        return self.t_jet.base_point[0]

    @property
    def order(self) -> int:
        return self.t_jet.valid_order

    def base_value(self) -> SquareMatrix:
        return self.t_jet.coefficient((0,))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.base_value().to_array())

    def window_count(self) -> int:
        g1, g2 = self.gap
        return int(sum(1 for lam in self.eigenvalues() if g1 < lam < g2))

    def params(self, filter: "FilterSymbol | None" = None) -> GevreyParams:
        return GevreyParams(self.s, filter.sigma if filter is not None else 1)


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.nodes < 2:
            raise ValidationError("a contour needs a positive radius and at least two nodes")

    @classmethod
    def through(cls, gap: Sequence[float], nodes: int = DEFAULT_NODES) -> "Contour":
        """Circle symmetric about the real axis through both gap endpoints."""
        g1, g2 = float(gap[0]), float(gap[1])
        return cls(complex((g1 + g2) / 2, 0.0), (g2 - g1) / 2, nodes)

    def node(self, i: int, n: int) -> tuple[complex, complex]:
        """Node ``i`` of the n-point rule and its weight, with 1/(2πi) folded in."""
        e = cmath.exp(2j * math.pi * i / n)
        return self.center + self.radius * e, self.radius * e / n


@dataclass(frozen=True)
class FilterSymbol:
    """Frequency filter a(τ) as a scalar τ-jet at τ0."""

    tau_jet: Jet
    sigma: Fraction = Fraction(1)
    name: str = ""

    def __post_init__(self) -> None:
        jet = _as_float_jet(self.tau_jet)
        object.__setattr__(self, "tau_jet", jet)
        object.__setattr__(self, "sigma", as_fraction(self.sigma))
        if jet.ring.is_matrix or (jet.n_x, jet.n_xi) != (0, 1):
            raise ValidationError("a filter is a scalar jet in the single variable τ")
        if self.sigma < 1:
            raise ValidationError("the Gevrey index of a filter must be >= 1")
        if abs(complex(jet.coefficient((0,))).imag) > 1e-12:
            raise ValidationError("a(τ0) must be real")

    @property
    def tau0(self) -> complex:
        return self.tau_jet.base_point[0]

    def at(self, tau: complex) -> Jet:
        """The filter re-expanded at τ."""
        offset = tau - self.tau0
        return self.tau_jet if offset == 0 else jet_shift(self.tau_jet, [offset])


@dataclass(frozen=True)
class ProjectorExpansion:
    """Π_0..Π_N as t-jets, the (t, τ) symbol they were read from, and diagnostics."""

    order: int
    pi_jets: tuple[Jet, ...]
    symbol: FormalSymbol
    nodes: int
    filtered: bool
    tau0: complex = 0j
    tau_eval: complex = 0j
    residuals: dict[str, float] = field(default_factory=dict)

    def with_residuals(self, **values: float) -> "ProjectorExpansion":
        return replace(self, residuals={**self.residuals, **values})


@dataclass(frozen=True)
class ResidualReport:
    name: str
    per_order: tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max(self.per_order, default=0.0)


def _scalar_to_matrix(jet: Jet, ring: Ring) -> Jet:
    one = ring.one()
    coeffs = {k: one * c for k, c in jet.items()}
    return Jet._raw(Jet.zero(ring, jet.n_x, jet.n_xi, jet.base_point, jet.order), jet.order,
                    jet.valid_order, coeffs)


def resolvent_symbol(P: OperatorFamily, z: complex, filter: FilterSymbol | None = None,
                     tau0: complex = 0j, N: int = 0) -> FormalSymbol:
    """``z − τ − P(t)`` (or ``z − a(τ) − P(t)``) as a (t, τ) symbol at base (t0, τ0).

    Higher h-coefficients are zero jets of the same depth.
    """
    ring = P.t_jet.ring
    depth = P.order
    base = (P.t0, complex(tau0))
    p_lift = jet_lift(P.t_jet, 1, 1, [0], base)
    if filter is None:
        tau = Jet.variable(Ring(Backend.FLOAT), 1, 1, 1, base, depth)
        a0 = complex(tau0)
    else:
        a_jet = filter.at(complex(tau0))
        tau = jet_lift(a_jet, 1, 1, [1], base)
        a0 = complex(a_jet.coefficient((0,)))
    shift = z - a0
    dist = min(abs(shift - lam) for lam in P.eigenvalues())
    if dist <= P.tolerances.on_spectrum:
        raise OnSpectrum(f"z={z} lies within {dist:.3g} of the spectrum of a(τ0) + P(t0)")
    zI = Jet.constant(ring, ring.one() * complex(z), 1, 1, base, depth)
    p0 = jet_add(jet_add(zI, -_scalar_to_matrix(tau, ring)), -p_lift).truncate(depth)
    zeros = [Jet.zero(ring, 1, 1, base, depth) for _ in range(N)]
    return FormalSymbol(tuple([p0, *zeros]), P.params(filter))


def _node_symbols(P: OperatorFamily, N: int, z: complex, filter: FilterSymbol | None,
                  tau0: complex, method: Method) -> FormalSymbol:
    p = resolvent_symbol(P, z, filter, tau0, N)
    return parametrix(p, N, side=Side.RIGHT, method=method, inverse_tol=P.tolerances.inverse_residual)


def _accumulate(acc: list[Jet] | None, S: FormalSymbol, weight: complex) -> list[Jet]:
    scaled = [S[j].scale(weight) for j in range(S.N + 1)]
    if acc is None:
        return scaled
    return [jet_add(a, b) for a, b in zip(acc, scaled)]


def _evaluate_nodes(P, N, contour, filter, tau0, method, indices, n, workers):
    zs = [contour.node(i, n) for i in indices]

    def run(zw):
        return _node_symbols(P, N, zw[0], filter, tau0, method)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, zs))
    else:
        results = [run(zw) for zw in zs]
    return [(w, S) for (_, w), S in zip(zs, results)]


def _restrict_all(symbol_jets: Sequence[Jet], tau_offset: complex) -> list[Jet]:
    return [jet_restrict(j, [tau_offset]) for j in symbol_jets]


def _max_change(a: Sequence[Jet], b: Sequence[Jet]) -> float:
    return max(jet_difference(x, y) for x, y in zip(a, b))


def _idempotency(pi0: Jet) -> float:
    value = pi0.coefficient((0,))
    return float(np.max(np.abs((value * value - value).to_array())))


def projector_expansion(
    P: OperatorFamily,
    N: int,
    contour: Contour | None = None,
    filter: FilterSymbol | None = None,
    tau0: Any = 0,
    tau_eval: Any = 0,
    method: Method | str = Method.RECURSIVE,
    max_doublings: int = DEFAULT_DOUBLINGS,
    workers: int | None = None,
) -> ProjectorExpansion:
    """Contour-integrate the resolvent parametrix into Π_0..Π_N.

    The n-node rule is compared with its own n/2-node subrule; nodes double until
    every Π_j changes by less than the quadrature tolerance (relative to its size)
    and Π_0(t0) is idempotent within the identity tolerance.
    """
    method = Method(method)
    tol = P.tolerances
    contour = contour or Contour.through(P.gap)
    if N > P.order:
        raise OrderExhausted(f"Π_{N} needs {N} t-derivatives of P, the family carries {P.order}")
    tau0, tau_eval = complex(tau0), complex(tau_eval)
    workers = workers or num_threads()
    n = contour.nodes
    if n % 2:
        raise ValidationError("the node count must be even")
    contributions = _evaluate_nodes(P, N, contour, filter, tau0, method, range(n), n, workers)
    for doubling in range(max_doublings + 1):
        full: list[Jet] | None = None
        half: list[Jet] | None = None
        for i, (w, S) in enumerate(contributions):
            full = _accumulate(full, S, w)
            if i % 2 == 0:
                half = _accumulate(half, S, 2 * w)
        pis = _restrict_all(full, tau_eval - tau0)
        coarse = _restrict_all(half, tau_eval - tau0)
        scale = max(1.0, max(j.max_abs() for j in pis))
        change = _max_change(pis, coarse)
        idem = _idempotency(pis[0])
        logger.info(f"quadrature n={n} change={change:.3g} idempotency={idem:.3g}")
        if change <= tol.quadrature * scale and idem <= tol.identity:
            symbol = FormalSymbol(tuple(full), P.params(filter))
            return ProjectorExpansion(N, tuple(pis), symbol, n, filter is not None, tau0, tau_eval,
                                      {"quadrature_change": change, "idempotency": idem})
        if doubling == max_doublings:
            break
        # the old nodes are the even nodes of the doubled rule
        new = _evaluate_nodes(P, N, contour, filter, tau0, method, range(1, 2 * n, 2), 2 * n, workers)
        merged = []
        for i in range(n):
            w, S = contributions[i]
            merged.append((w / 2, S))
            merged.append(new[i])
        contributions = merged
        n *= 2
    raise QuadratureNotConverged(
        f"projectors still moved by {change:.3g} (idempotency {idem:.3g}) after {n} nodes"
    )


def check_projector_identity(expansion: ProjectorExpansion) -> ResidualReport:
    """Σ_{a+b=j} Π_a Π_b − Π_j per order (♯ on the (t, τ) symbol for filtered expansions)."""
    pis = expansion.pi_jets
    out = []
    if expansion.filtered:
        square = sharp(expansion.symbol, expansion.symbol).symbol
        for j in range(expansion.order + 1):
            out.append(jet_difference(square[j], expansion.symbol[j]))
    else:
        for j in range(expansion.order + 1):
            total = None
            for a in range(j + 1):
                term = jet_mul(pis[a], pis[j - a])
                total = term if total is None else jet_add(total, term)
            out.append(jet_difference(total, pis[j]))
    report = ResidualReport("projector_identity", tuple(out))
    logger.info(f"projector identity residual {report.max_residual:.3g}")
    return report


def check_intertwining(expansion: ProjectorExpansion, P: OperatorFamily,
                       filter: FilterSymbol | None = None) -> ResidualReport:
    """Order-by-order commutator of hD_t + P (or a(hD_t) + P) with Π."""
    pis = expansion.pi_jets
    out = []
    if filter is None and not expansion.filtered:
        for j in range(expansion.order + 1):
            comm = jet_add(jet_mul(P.t_jet, pis[j]), -jet_mul(pis[j], P.t_jet))
            if j:
                if pis[j - 1].valid_order < 1:
                    raise OrderExhausted(f"Π_{j - 1} has no valid t-derivative")
                # (1/i) Π'_{j-1}
                comm = jet_add(comm, jet_derive(pis[j - 1], (1,)).scale(-1j))
            out.append(comm.max_abs())
    else:
        if filter is None:
            raise ValidationError("a filtered expansion needs its filter to check intertwining")
        base = expansion.symbol.base_point
        ring = P.t_jet.ring
        depth = expansion.symbol.min_valid_order
        a_jet = jet_lift(filter.at(expansion.tau0), 1, 1, [1], base)
        gen = jet_add(_scalar_to_matrix(a_jet, ring), jet_lift(P.t_jet, 1, 1, [0], base)).truncate(depth)
        zeros = [Jet.zero(ring, 1, 1, base, depth) for _ in range(expansion.order)]
        A = FormalSymbol(tuple([gen, *zeros]), expansion.symbol.params)
        left = sharp(A, expansion.symbol).symbol
        right = sharp(expansion.symbol, A).symbol
        for j in range(expansion.order + 1):
            out.append(jet_difference(left[j], right[j]))
    report = ResidualReport("intertwining", tuple(out))
    logger.info(f"intertwining residual {report.max_residual:.3g}")
    return report


@dataclass(frozen=True)
class TauIndependenceReport:
    offsets: tuple[float, ...]
    residuals: tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def tau_independence_check(P: OperatorFamily, N: int, contour: Contour | None,
                           tau_offsets: Sequence[Any], filter: FilterSymbol | None = None,
                           method: Method | str = Method.RECURSIVE) -> TauIndependenceReport:
    """Rebuild the expansion with the symbol based (and read) at τ = δ and compare to δ = 0."""
    baseline = projector_expansion(P, N, contour, filter, method=method)
    residuals = []
    for delta in tau_offsets:
        d = float(as_fraction(delta))
        if d == 0:
            residuals.append(0.0)
            continue
        shifted = projector_expansion(P, N, contour, filter, tau0=d, tau_eval=d, method=method)
        residuals.append(_max_change(shifted.pi_jets, baseline.pi_jets))
    report = TauIndependenceReport(tuple(float(as_fraction(d)) for d in tau_offsets), tuple(residuals))
    logger.info(f"τ-independence residual {report.max_residual:.3g}")
    return report


def spectral_projector(P: OperatorFamily) -> SquareMatrix:
    """Π_0(t0) from the eigendecomposition of P(t0), restricted to the window."""
    vals, vecs = np.linalg.eigh(P.base_value().to_array())
    g1, g2 = P.gap
    cols = [i for i, lam in enumerate(vals) if g1 < lam < g2]
    V = vecs[:, cols]
    return SquareMatrix(V @ V.conj().T, Backend.FLOAT)


def projector_norms(expansion: ProjectorExpansion) -> list[float]:
    """Spectral norm of Π_j(t0) for every j."""
    return [float(np.linalg.norm(j.coefficient((0,)).to_array(), 2)) for j in expansion.pi_jets]


def recursion_oracle(P: OperatorFamily, N: int) -> list[Jet]:
    """Π_0..Π_N by the order-by-order solve of

        [P, Π_j] + (1/i) Π'_{j−1} = 0,    Σ_{a+b=j} Π_a Π_b = Π_j,

    in the eigenbasis of P(t0), one Taylor order in t at a time. Π_j is known to
    Taylor order K − j when P carries K orders. No contour and no parametrix.
    """
    K = P.order
    if N > K:
        raise OrderExhausted(f"the recursion needs {N} Taylor orders of P, the family carries {K}")
    vals, U = np.linalg.eigh(P.base_value().to_array())
    Uh = U.conj().T
    g1, g2 = P.gap
    eps = np.array([1.0 if g1 < lam < g2 else 0.0 for lam in vals])
    dim = P.dim
    Pt = [Uh @ P.t_jet.coefficient((i,)).to_array() @ U for i in range(K + 1)]
    gaps = vals[:, None] - vals[None, :]
    distinct = np.abs(gaps) > P.tolerances.on_spectrum
    denom_idem = eps[:, None] + eps[None, :] - 1.0
    denom_idem = np.where(denom_idem == 0, 1.0, denom_idem)
    pi: list[list[np.ndarray]] = []
    for j in range(N + 1):
        row: list[np.ndarray] = []
        for k in range(K - j + 1):
            if j == 0 and k == 0:
                row.append(np.diag(eps).astype(np.complex128))
                continue
            Y = np.zeros((dim, dim), dtype=np.complex128)
            for i in range(1, k + 1):
                Y -= Pt[i] @ row[k - i] - row[k - i] @ Pt[i]
            if j:
                Y += 1j * (k + 1) * pi[j - 1][k + 1]
            G = np.zeros((dim, dim), dtype=np.complex128)
            for a in range(j + 1):
                b = j - a
                for i in range(k + 1):
                    l = k - i
                    if (a, i) == (0, 0) and (b, l) == (j, k):
                        continue
                    if (a, i) == (j, k) and (b, l) == (0, 0):
                        continue
                    left = row[i] if a == j else pi[a][i]
                    right = row[l] if b == j else pi[b][l]
                    G -= left @ right
            X = np.where(distinct, Y / np.where(distinct, gaps, 1.0), G / denom_idem)
            row.append(X)
        pi.append(row)
    ring = P.t_jet.ring
    jets = []
    for j, row in enumerate(pi):
        coeffs = {(k,): SquareMatrix(U @ X @ Uh, Backend.FLOAT) for k, X in enumerate(row)}
        jets.append(Jet(ring, 1, 0, [P.t0], K - j, coeffs))
    return jets


def growth_report(expansion: ProjectorExpansion, s: Any, sigma: Any = None) -> GrowthFit | None:
    """Fit ‖Π_j(t0)‖ against C^{j+1} j!^exponent; None (with a warning) when nothing grows."""
    if expansion.order < 6:
        raise InsufficientData(f"growth report needs N >= 6, got {expansion.order}")
    s = as_fraction(s)
    expected = s if sigma is None else s + as_fraction(sigma) - 1
    norms = projector_norms(expansion)
    try:
        return fit_growth(norms, expected_exponent=expected)
    except InsufficientData:
        if all(v <= P_ZERO for v in norms[1:]):
            logger.warning("projector corrections vanish; growth fit skipped")
            return None
        raise

