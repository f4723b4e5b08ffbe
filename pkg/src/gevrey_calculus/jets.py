"""Truncated multivariate Taylor jets with valid-order tracking.

A :class:`Jet` stores Taylor coefficients ``∂^γ a / γ!`` at a base point for
every multi-index with ``|γ| <= valid_order``. Indices are tuples laid out as
``(x_1..x_{n_x}, ξ_1..ξ_{n_ξ})``. Coefficients above the valid order are
unknown: they are never stored, never compared, and no operation produces a
result with a larger valid order than its inputs.

Missing keys below the valid order are exact zeros.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from .errors import BasePointMismatch, OrderExhausted, ValidationError
from .rings import INVERSE_RESIDUAL_TOL, Backend, GaussianRational, Ring, SquareMatrix, ring_inverse
from .utils import (
    Index,
    add_index,
    degree,
    falling_factor,
    index_factorial,
    indices_up_to,
    sub_index,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index split into its x-type and ξ-type components."""

    x: tuple[int, ...] = ()
    xi: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.x + self.xi):
            raise ValidationError(f"negative multi-index component in {self}")

    @classmethod
    def of(cls, components: Sequence[int], n_x: int) -> "MultiIndex":
        comps = tuple(int(c) for c in components)
        return cls(comps[:n_x], comps[n_x:])

    @classmethod
    def unit(cls, n_x: int, n_xi: int, k: int) -> "MultiIndex":
        comps = [0] * (n_x + n_xi)
        comps[k] = 1
        return cls.of(comps, n_x)

    @property
    def components(self) -> Index:
        return self.x + self.xi

    @property
    def split(self) -> tuple[int, int]:
        return (len(self.x), len(self.xi))

    @property
    def degree(self) -> int:
        return sum(self.components)

    @property
    def factorial(self) -> int:
        return index_factorial(self.components)


def _canonical_key(idx: Index) -> tuple:
    return (sum(idx), tuple(-c for c in idx))


class Jet:
    """Immutable truncated Taylor polynomial at ``base_point``."""

    __slots__ = ("ring", "n_x", "n_xi", "base_point", "order", "valid_order", "_coeffs", "_forms")

    def __init__(
        self,
        ring: Ring,
        n_x: int,
        n_xi: int,
        base_point: Sequence[Any],
        order: int,
        coeffs: Mapping[Sequence[int], Any] | None = None,
        valid_order: int | None = None,
    ) -> None:
        if n_x < 0 or n_xi < 0:
            raise ValidationError("variable counts must be nonnegative")
        if len(base_point) != n_x + n_xi:
            raise ValidationError(
                f"base point has {len(base_point)} entries, expected {n_x + n_xi}"
            )
        if valid_order is None:
            valid_order = order
        if order < 0 or not 0 <= valid_order <= order:
            raise ValidationError(f"need 0 <= valid_order ({valid_order}) <= order ({order})")
        self.ring = ring
        self.n_x = n_x
        self.n_xi = n_xi
        self.base_point = tuple(ring.scalar(c) for c in base_point)
        self.order = order
        self.valid_order = valid_order
        n = n_x + n_xi
        stored: dict[Index, Any] = {}
        for key in sorted((coeffs or {}).keys(), key=lambda k: _canonical_key(tuple(k))):
            idx = tuple(int(c) for c in key)
            if len(idx) != n or any(c < 0 for c in idx):
                raise ValidationError(f"multi-index {key} does not fit {n_x}+{n_xi} variables")
            if sum(idx) > valid_order:
                continue
            value = ring.element(coeffs[key])
            if not ring.is_zero(value):
                stored[idx] = value
        self._coeffs = stored
        self._forms: dict[int, tuple] = {}

    @classmethod
    def _raw(cls, template: "Jet", order: int, valid_order: int,
             coeffs: dict[Index, Any], base_point: tuple | None = None,
             n_x: int | None = None, n_xi: int | None = None) -> "Jet":
        """Build from already-canonical coefficients (no coercion)."""
        jet = cls.__new__(cls)
        jet.ring = template.ring
        jet.n_x = template.n_x if n_x is None else n_x
        jet.n_xi = template.n_xi if n_xi is None else n_xi
        jet.base_point = template.base_point if base_point is None else base_point
        jet.order = order
        jet.valid_order = valid_order
        jet._coeffs = {k: v for k, v in coeffs.items() if not template.ring.is_zero(v)}
        jet._forms = {}
        return jet

    # -- constructors ---------------------------------------------------------------

    @classmethod
    def constant(cls, ring: Ring, value: Any, n_x: int, n_xi: int,
                 base_point: Sequence[Any] | None = None, order: int = 0) -> "Jet":
        n = n_x + n_xi
        base = base_point if base_point is not None else [0] * n
        return cls(ring, n_x, n_xi, base, order, {(0,) * n: value})

    @classmethod
    def zero(cls, ring: Ring, n_x: int, n_xi: int,
             base_point: Sequence[Any] | None = None, order: int = 0) -> "Jet":
        n = n_x + n_xi
        base = base_point if base_point is not None else [0] * n
        return cls(ring, n_x, n_xi, base, order, {})

    @classmethod
    def variable(cls, ring: Ring, k: int, n_x: int, n_xi: int,
                 base_point: Sequence[Any] | None = None, order: int = 1) -> "Jet":
        """The coordinate function of variable ``k`` (x-type first, then ξ-type)."""
        n = n_x + n_xi
        base = list(base_point) if base_point is not None else [0] * n
        unit = tuple(int(i == k) for i in range(n))
        coeffs: dict[Index, Any] = {(0,) * n: base[k]}
        if order >= 1:
            coeffs[unit] = 1
        return cls(ring, n_x, n_xi, base, order, coeffs)

    # -- accessors ------------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return self.n_x + self.n_xi

    @property
    def coeffs(self) -> Mapping[Index, Any]:
        return dict(self._coeffs)

    def coefficient(self, idx: Sequence[int] | MultiIndex) -> Any:
        key = idx.components if isinstance(idx, MultiIndex) else tuple(idx)
        if sum(key) > self.valid_order:
            raise OrderExhausted(
                f"coefficient {key} lies above the valid order {self.valid_order}"
            )
        return self._coeffs.get(key, self.ring.zero())

    def items(self) -> Iterator[tuple[Index, Any]]:
        """Stored (nonzero) coefficients in canonical graded order."""
        return iter(self._coeffs.items())

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_constant(self) -> bool:
        zero = (0,) * self.n_vars
        return all(k == zero for k in self._coeffs)

    def max_abs(self) -> float:
        return max((self.ring.max_abs(v) for v in self._coeffs.values()), default=0.0)

    def __repr__(self) -> str:
        return (
            f"Jet(n_x={self.n_x}, n_xi={self.n_xi}, order={self.order}, "
            f"valid_order={self.valid_order}, nonzero={len(self._coeffs)})"
        )

    # -- operators --------------------------------------------------------------------

    def __add__(self, other: "Jet") -> "Jet":
        if not isinstance(other, Jet):
            return NotImplemented
        return jet_add(self, other)

    def __sub__(self, other: "Jet") -> "Jet":
        if not isinstance(other, Jet):
            return NotImplemented
        return jet_add(self, -other)

    def __neg__(self) -> "Jet":
        return Jet._raw(self, self.order, self.valid_order,
                        {k: -v for k, v in self._coeffs.items()})

    def __mul__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other: Any) -> "Jet":
        if isinstance(other, Jet):
            return NotImplemented
        return self.scale(other, left=True)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Jet):
            return NotImplemented
        return jet_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def scale(self, factor: Any, left: bool = False) -> "Jet":
        """Multiply every coefficient by a ring scalar or a constant matrix."""
        f = factor if not isinstance(factor, (int, float, complex, str)) else self.ring.scalar(factor)
        if left:
            coeffs = {k: f * v for k, v in self._coeffs.items()}
        else:
            coeffs = {k: v * f for k, v in self._coeffs.items()}
        return Jet._raw(self, self.order, self.valid_order, coeffs)

    def truncate(self, valid_order: int) -> "Jet":
        v = min(valid_order, self.valid_order)
        return Jet._raw(self, min(self.order, max(v, 0)) if v >= 0 else 0, max(v, 0),
                        {k: c for k, c in self._coeffs.items() if sum(k) <= v})

    def map(self, fn) -> "Jet":
        """Apply ``fn`` to every coefficient (e.g. conjugate transpose)."""
        return Jet._raw(self, self.order, self.valid_order,
                        {k: fn(v) for k, v in self._coeffs.items()})

    def to_float(self) -> "Jet":
        ring = self.ring.to_float()
        jet = Jet.__new__(Jet)
        jet.ring = ring
        jet.n_x, jet.n_xi = self.n_x, self.n_xi
        jet.base_point = tuple(complex(c) for c in self.base_point)
        jet.order, jet.valid_order = self.order, self.valid_order
        jet._coeffs = {k: ring.convert(v) for k, v in self._coeffs.items()}
        jet._forms = {}
        return jet

    def derive(self, gamma: Sequence[int] | MultiIndex) -> "Jet":
        return jet_derive(self, gamma)

    def reciprocal(self) -> "Jet":
        return jet_reciprocal(self)

    def eval(self, offset: Sequence[Any] | None = None) -> Any:
        return jet_eval(self, offset)


def check_compatible(a: Jet, b: Jet) -> None:
    if a.ring != b.ring:
        raise BasePointMismatch(f"ring mismatch: {a.ring} vs {b.ring}")
    if (a.n_x, a.n_xi) != (b.n_x, b.n_xi):
        raise BasePointMismatch(
            f"variable split mismatch: ({a.n_x},{a.n_xi}) vs ({b.n_x},{b.n_xi})"
        )
    if a.base_point != b.base_point:
        raise BasePointMismatch(f"base point mismatch: {a.base_point} vs {b.base_point}")


def jet_add(a: Jet, b: Jet) -> Jet:
    check_compatible(a, b)
    v = min(a.valid_order, b.valid_order)
    out: dict[Index, Any] = {}
    for k, c in a.items():
        if sum(k) <= v:
            out[k] = c
    for k, c in b.items():
        if sum(k) <= v:
            out[k] = out[k] + c if k in out else c
    out = dict(sorted(out.items(), key=lambda kv: _canonical_key(kv[0])))
    return Jet._raw(a, min(a.order, b.order), v, out)


def _by_degree(a: Jet, top: int) -> list[list[tuple[Index, Any]]]:
    buckets: list[list[tuple[Index, Any]]] = [[] for _ in range(top + 1)]
    for k, c in a.items():
        d = sum(k)
        if d <= top:
            buckets[d].append((k, c))
    return buckets


_DENSE_LIMIT = 200_000


def _dense_mul(a: Jet, b: Jet, v: int) -> dict[Index, Any]:
    """Float Cauchy product on a dense (v+1)^n grid, accumulated in a's canonical order."""
    n = a.n_vars
    dim = a.ring.dim
    tail = (dim, dim) if dim else ()
    dense_b = np.zeros((v + 1,) * n + tail, dtype=np.complex128)
    for k, c in b.items():
        if sum(k) <= v:
            dense_b[k] = c.entries if dim else c
    out = np.zeros_like(dense_b)
    for ka, ca in a.items():
        if sum(ka) > v:
            continue
        src = tuple(slice(0, v + 1 - i) for i in ka)
        dst = tuple(slice(i, v + 1) for i in ka)
        if dim:
            out[dst] += np.matmul(ca.entries, dense_b[src])
        else:
            out[dst] += ca * dense_b[src]
    coeffs: dict[Index, Any] = {}
    for idx in indices_up_to(n, v):
        value = out[idx]
        if dim:
            if np.any(value):
                coeffs[idx] = SquareMatrix._wrap(np.array(value), Backend.FLOAT)
        elif value:
            coeffs[idx] = complex(value)
    return coeffs


_EXACT_PAIR_LIMIT = 2_000_000


@lru_cache(maxsize=32)
def _pair_table(n: int, v: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positions (i, j) with |γ_i| + |γ_j| <= v, sorted by the position of γ_i + γ_j.

    Returns the left and right positions and the start of each target run.
    """
    idx = indices_up_to(n, v)
    exps = np.array(idx, dtype=np.int64).reshape(len(idx), n)
    deg = exps.sum(axis=1)
    radix = (v + 1) ** np.arange(n, dtype=np.int64)
    lookup = np.full((v + 1) ** n, -1, dtype=np.int64)
    lookup[exps @ radix] = np.arange(len(idx))
    counts = np.searchsorted(deg, v - deg, side="right")
    left = np.repeat(np.arange(len(idx)), counts)
    right = np.concatenate([np.arange(c) for c in counts])
    target = lookup[(exps[left] + exps[right]) @ radix]
    order = np.argsort(target, kind="stable")
    left, right, target = left[order], right[order], target[order]
    starts = np.flatnonzero(np.r_[True, target[1:] != target[:-1]])
    return left, right, starts


def _integer_form(a: Jet, v: int) -> tuple[int, np.ndarray, np.ndarray]:
    """Common denominator and Gaussian-integer numerators of the coefficients up to degree v."""
    form = a._forms.get(v)
    if form is not None:
        return form
    idx = indices_up_to(a.n_vars, v)
    values = [a._coeffs.get(k) for k in idx]
    den = math.lcm(*(part.denominator for c in values if c is not None for part in (c.re, c.im)))
    re = np.zeros(len(idx), dtype=object)
    im = np.zeros(len(idx), dtype=object)
    for i, c in enumerate(values):
        if c is not None:
            re[i] = c.re.numerator * (den // c.re.denominator)
            im[i] = c.im.numerator * (den // c.im.denominator)
    form = (den, re, im)
    a._forms[v] = form
    return form


def _exact_dense_mul(a: Jet, b: Jet, v: int) -> dict[Index, Any]:
    """Gaussian-rational Cauchy product as one vectorised pass over Python integers."""
    left, right, starts = _pair_table(a.n_vars, v)
    da, ar, ai = _integer_form(a, v)
    db, br, bi = _integer_form(b, v)
    xr, xi, yr, yi = ar[left], ai[left], br[right], bi[right]
    re = np.add.reduceat(xr * yr - xi * yi, starts)
    im = np.add.reduceat(xr * yi + xi * yr, starts)
    den = da * db
    coeffs: dict[Index, Any] = {}
    for k, r, m in zip(indices_up_to(a.n_vars, v), re.tolist(), im.tolist()):
        if r or m:
            coeffs[k] = GaussianRational(Fraction(r, den), Fraction(m, den))
    return coeffs


def _exact_scalar_fast(a: Jet, v: int) -> bool:
    n = a.n_vars
    return (a.ring.exact and a.ring.dim is None and n > 0
            and math.comb(v + 2 * n, 2 * n) <= _EXACT_PAIR_LIMIT)


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product truncated at min(V_a, V_b); the left factor stays on the left."""
    check_compatible(a, b)
    v = min(a.valid_order, b.valid_order)
    order = min(a.order, b.order)
    zero_idx = (0,) * a.n_vars
    if a.is_constant():
        c = a._coeffs.get(zero_idx)
        if c is None:
            return Jet._raw(a, order, v, {})
        return Jet._raw(a, order, v, {k: c * cb for k, cb in b.items() if sum(k) <= v})
    if b.is_constant():
        c = b._coeffs.get(zero_idx)
        if c is None:
            return Jet._raw(a, order, v, {})
        return Jet._raw(a, order, v, {k: ca * c for k, ca in a.items() if sum(k) <= v})
    if not a.ring.exact and a.n_vars and (v + 1) ** a.n_vars <= _DENSE_LIMIT:
        return Jet._raw(a, order, v, _dense_mul(a, b, v))
    if _exact_scalar_fast(a, v):
        return Jet._raw(a, order, v, _exact_dense_mul(a, b, v))
    b_buckets = _by_degree(b, v)
    acc: dict[Index, Any] = {}
    for ka, ca in a.items():
        da = sum(ka)
        if da > v:
            continue
        for db in range(v - da + 1):
            for kb, cb in b_buckets[db]:
                key = add_index(ka, kb)
                prod = ca * cb
                acc[key] = acc[key] + prod if key in acc else prod
    acc = dict(sorted(acc.items(), key=lambda kv: _canonical_key(kv[0])))
    return Jet._raw(a, order, v, acc)


def jet_derive(a: Jet, gamma: Sequence[int] | MultiIndex) -> Jet:
    g = gamma.components if isinstance(gamma, MultiIndex) else tuple(int(c) for c in gamma)
    if len(g) != a.n_vars:
        raise ValidationError(f"derivative index {g} does not fit {a.n_vars} variables")
    dg = degree(g)
    if dg > a.valid_order:
        raise OrderExhausted(
            f"derivative of order {dg} exceeds the valid order {a.valid_order}"
        )
    if dg == 0:
        return a
    out: dict[Index, Any] = {}
    for k, c in a.items():
        rest = sub_index(k, g)
        if rest is None:
            continue
        out[rest] = c * a.ring.scalar(falling_factor(rest, g))
    out = dict(sorted(out.items(), key=lambda kv: _canonical_key(kv[0])))
    return Jet._raw(a, a.order - dg, a.valid_order - dg, out)


def raw_derivative(a: Jet, gamma: Sequence[int] | MultiIndex) -> Any:
    """∂^γ a at the base point, i.e. γ! times the Taylor coefficient."""
    g = gamma.components if isinstance(gamma, MultiIndex) else tuple(gamma)
    return a.coefficient(g) * a.ring.scalar(index_factorial(g))


def jet_reciprocal(a: Jet, tol: float = INVERSE_RESIDUAL_TOL) -> Jet:
    """Inverse in the jet ring; for matrix jets the order-by-order right inverse,
    which coincides with the left inverse once the constant term is invertible."""
    zero_idx = (0,) * a.n_vars
    inv0 = ring_inverse(a.coefficient(zero_idx), tol)
    v = a.valid_order
    if _exact_scalar_fast(a, v):
        return _newton_reciprocal(a, inv0)
    higher = [(k, c) for k, c in a.items() if k != zero_idx]
    out: dict[Index, Any] = {zero_idx: inv0}
    for idx in indices_up_to(a.n_vars, v)[1:]:
        total = None
        for kb, cb in higher:
            rest = sub_index(idx, kb)
            if rest is None:
                continue
            prev = out.get(rest)
            if prev is None:
                continue
            term = cb * prev
            total = term if total is None else total + term
        if total is not None:
            out[idx] = -(inv0 * total)
    return Jet._raw(a, a.order, v, out)


def _newton_reciprocal(a: Jet, inv0: Any) -> Jet:
    """y ← y + y(1 − a·y); each step doubles the degree through which y is exact."""
    zero_idx = (0,) * a.n_vars
    one = a.ring.one()
    y = Jet._raw(a, a.order, 0, {zero_idx: inv0})
    d = 0
    while d < a.valid_order:
        d = min(2 * d + 1, a.valid_order)
        y = Jet._raw(a, a.order, d, y._coeffs)
        residual = jet_add(Jet._raw(a, a.order, d, {zero_idx: one}), -jet_mul(a.truncate(d), y))
        y = jet_add(y, jet_mul(y, residual))
    return y


def _offset(a: Jet, offset: Sequence[Any] | None, n: int) -> list[Any]:
    if offset is None:
        return [a.ring.scalar(0)] * n
    if len(offset) != n:
        raise ValidationError(f"offset has {len(offset)} entries, expected {n}")
    return [a.ring.scalar(c) for c in offset]


def _powers(values: Sequence[Any], top: int, one: Any) -> list[list[Any]]:
    table = []
    for v in values:
        row = [one]
        for _ in range(top):
            row.append(row[-1] * v)
        table.append(row)
    return table


def jet_eval(a: Jet, offset: Sequence[Any] | None = None) -> Any:
    """Value of the truncated Taylor polynomial at base_point + offset."""
    n = a.n_vars
    off = _offset(a, offset, n)
    one = a.ring.scalar(1)
    pw = _powers(off, a.valid_order, one)
    total = a.ring.zero()
    for k, c in a.items():
        m = one
        for var, e in enumerate(k):
            if e:
                m = m * pw[var][e]
        total = total + c * m
    return total


def jet_shift(a: Jet, offset: Sequence[Any]) -> Jet:
    """Re-expand the Taylor polynomial at base_point + offset (valid order kept)."""
    n = a.n_vars
    off = _offset(a, offset, n)
    one = a.ring.scalar(1)
    pw = _powers(off, a.valid_order, one)
    out: dict[Index, Any] = dict(a.items())
    # one variable at a time: c'_j = Σ_{i >= j} binom(i, j) d^{i-j} c_i
    for var in range(n):
        if not off[var]:
            continue
        shifted: dict[Index, Any] = {}
        for k, c in out.items():
            top = k[var]
            for j in range(top + 1):
                key = k[:var] + (j,) + k[var + 1:]
                term = c * (pw[var][top - j] * a.ring.scalar(math.comb(top, j)))
                shifted[key] = shifted[key] + term if key in shifted else term
        out = shifted
    out = dict(sorted(out.items(), key=lambda kv: _canonical_key(kv[0])))
    base = tuple(b + o for b, o in zip(a.base_point, off))
    return Jet._raw(a, a.order, a.valid_order, out, base_point=base)


def jet_restrict(a: Jet, xi_offset: Sequence[Any] | None = None) -> Jet:
    """Fix the ξ-type variables at base + ``xi_offset``; keep a jet in x only.

    Exact at zero offset; otherwise the ξ-dependence is read as its Taylor polynomial.
    """
    off = _offset(a, xi_offset, a.n_xi)
    one = a.ring.scalar(1)
    pw = _powers(off, a.valid_order, one)
    out: dict[Index, Any] = {}
    for k, c in a.items():
        kx, kxi = k[: a.n_x], k[a.n_x:]
        m = one
        for var, e in enumerate(kxi):
            if e:
                m = m * pw[var][e]
        if any(kxi) and not m:
            continue
        term = c * m
        out[kx] = out[kx] + term if kx in out else term
    out = dict(sorted(out.items(), key=lambda kv: _canonical_key(kv[0])))
    base = a.base_point[: a.n_x]
    return Jet._raw(a, a.order, a.valid_order, out, base_point=base, n_x=a.n_x, n_xi=0)


def jet_lift(a: Jet, n_x: int, n_xi: int, positions: Sequence[int],
             base_point: Sequence[Any]) -> Jet:
    """Embed ``a`` into ``n_x + n_xi`` variables; old variable k becomes ``positions[k]``.

    The lifted jet does not depend on the new variables, so no validity is lost.
    """
    if len(positions) != a.n_vars:
        raise ValidationError("one target position per source variable is required")
    n = n_x + n_xi
    base = tuple(a.ring.scalar(c) for c in base_point)
    for k, p in enumerate(positions):
        if base[p] != a.base_point[k]:
            raise BasePointMismatch(
                f"variable {k} sits at {a.base_point[k]} but the target base has {base[p]}"
            )
    out: dict[Index, Any] = {}
    for k, c in a.items():
        idx = [0] * n
        for var, e in enumerate(k):
            idx[positions[var]] = e
        out[tuple(idx)] = c
    out = dict(sorted(out.items(), key=lambda kv: _canonical_key(kv[0])))
    return Jet._raw(a, a.order, a.valid_order, out, base_point=base, n_x=n_x, n_xi=n_xi)


def jet_difference(a: Jet, b: Jet) -> float:
    """Largest entry modulus of a − b over the shared valid order (float measure)."""
    check_compatible(a, b)
    v = min(a.valid_order, b.valid_order)
    worst = 0.0
    for idx in set(a._coeffs) | set(b._coeffs):
        if sum(idx) > v:
            continue
        d = a.coefficient(idx) - b.coefficient(idx)
        worst = max(worst, a.ring.max_abs(d))
    return worst


def jet_equal(a: Jet, b: Jet, tol: float = 0.0) -> bool:
    """Masked comparison up to the smaller valid order (exact unless ``tol`` > 0)."""
    try:
        check_compatible(a, b)
    except BasePointMismatch:
        return False
    v = min(a.valid_order, b.valid_order)
    for idx in set(a._coeffs) | set(b._coeffs):
        if sum(idx) > v:
            continue
        d = a.coefficient(idx) - b.coefficient(idx)
        if tol > 0:
            if a.ring.max_abs(d) > tol:
                return False
        elif not a.ring.is_zero(d):
            return False
    return True
