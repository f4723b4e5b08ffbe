"""Coefficient rings carried by jets.

Two backends share one API:

* exact: :class:`GaussianRational` scalars and :class:`SquareMatrix` over them
  (numpy object arrays), no rounding anywhere;
* float: Python ``complex`` scalars and :class:`SquareMatrix` over complex128.

``nu`` is the modulus used by the pseudonorms. In exact mode it is the
surrogate ``|Re z| + |Im z|`` (still subadditive and submultiplicative, and
exactly comparable); matrices use the induced max-column-sum norm over it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import singledispatch
from numbers import Rational
from typing import Any, Union

import numpy as np

from .config import Tolerances
from .errors import NonInvertible, ValidationError

logger = logging.getLogger(__name__)

INVERSE_RESIDUAL_TOL = Tolerances().inverse_residual


class Backend(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


class GaussianRational:
    """Immutable ``re + im*i`` with ``Fraction`` parts (always in lowest terms)."""

    __slots__ = ("_re", "_im")

    def __init__(self, re: Any = 0, im: Any = 0) -> None:
        self._re = Fraction(re)
        self._im = Fraction(im)

    @property
    def re(self) -> Fraction:
        return self._re

    @property
    def im(self) -> Fraction:
        return self._im

    @classmethod
    def coerce(cls, value: Any) -> "GaussianRational | None":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Rational)):
            return cls(value)
        return None

    @classmethod
    def from_complex(cls, value: complex) -> "GaussianRational":
        return cls(Fraction(value.real), Fraction(value.imag))

    def __repr__(self) -> str:
        return f"GaussianRational({str(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)

    def __complex__(self) -> complex:
        return complex(float(self._re), float(self._im))

    def __bool__(self) -> bool:
        return bool(self._re) or bool(self._im)

    def __hash__(self) -> int:
        if not self._im:
            return hash(self._re)
        return hash((self._re, self._im))

    def __eq__(self, other: object) -> bool:
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return self._re == o._re and self._im == o._im

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self._re, -self._im)

    def __pos__(self) -> "GaussianRational":
        return self

    def __add__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self._re + o._re, self._im + o._im)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self._re - o._re, self._im - o._im)

    def __rsub__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self._re, self._im, o._re, o._im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: Any) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, exponent: int) -> "GaussianRational":
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        result = GaussianRational(1)
        e = abs(exponent)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self._re, -self._im)

    def abs2(self) -> Fraction:
        return self._re * self._re + self._im * self._im

    def inverse(self) -> "GaussianRational":
        n = self.abs2()
        if n == 0:
            raise NonInvertible("zero has no inverse in the Gaussian rationals")
        return GaussianRational(self._re / n, -self._im / n)


Scalar = Union[GaussianRational, complex]


def _parse_real(text: str, backend: Backend) -> Fraction | float:
    if backend is Backend.EXACT:
        return Fraction(text)
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_scalar(text: str, backend: Backend = Backend.EXACT) -> Scalar:
    """Parse ``"p/q+r/s*i"`` (also ``"3"``, ``"-i"``, ``"0.5-2.5*i"``)."""
    s = str(text).replace(" ", "")
    if not s:
        raise ValidationError("empty scalar string")
    re_part, im_part = s, ""
    if s[-1] in "ij":
        body = s[:-1]
        if body.endswith("*"):
            body = body[:-1]
        split = 0
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                split = pos
                break
        re_part, im_part = body[:split], body[split:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
    try:
        re_val = _parse_real(re_part, backend) if re_part else 0
        im_val = _parse_real(im_part, backend) if im_part else 0
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"cannot parse ring element {text!r}: {e}") from e
    if backend is Backend.EXACT:
        return GaussianRational(re_val, im_val)
    return complex(re_val, im_val)


def format_scalar(value: Any) -> str:
    if isinstance(value, GaussianRational):
        re, im = value.re, value.im
        if not im:
            return str(re)
        sign = "+" if im > 0 else "-"
        return f"{re}{sign}{abs(im)}*i"
    z = complex(value)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag > 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}*i"


class SquareMatrix:
    """dim×dim matrix over Gaussian rationals (object array) or complex floats."""

    __slots__ = ("_entries", "_backend")

    def __init__(self, entries: Any, backend: Backend | None = None) -> None:
        if backend is None:
            backend = _infer_backend(entries)
        if backend is Backend.EXACT:
            arr = np.empty(np.shape(entries), dtype=object)
            for idx, v in np.ndenumerate(np.asarray(entries, dtype=object)):
                arr[idx] = _exact_scalar(v)
        else:
            arr = np.array(
                [[_float_scalar(v) for v in row] for row in np.asarray(entries, dtype=object)],
                dtype=np.complex128,
            )
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValidationError(f"expected a nonempty square matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        self._entries = arr
        self._backend = backend

    @classmethod
    def _wrap(cls, arr: np.ndarray, backend: Backend) -> "SquareMatrix":
        m = cls.__new__(cls)
        arr.setflags(write=False)
        m._entries = arr
        m._backend = backend
        return m

    @classmethod
    def identity(cls, dim: int, backend: Backend = Backend.EXACT) -> "SquareMatrix":
        if backend is Backend.EXACT:
            arr = np.empty((dim, dim), dtype=object)
            for i in range(dim):
                for j in range(dim):
                    arr[i, j] = GaussianRational(1 if i == j else 0)
            return cls._wrap(arr, backend)
        return cls._wrap(np.eye(dim, dtype=np.complex128), backend)

    @classmethod
    def zero(cls, dim: int, backend: Backend = Backend.EXACT) -> "SquareMatrix":
        if backend is Backend.EXACT:
            arr = np.empty((dim, dim), dtype=object)
            arr[...] = GaussianRational(0)
            return cls._wrap(arr, backend)
        return cls._wrap(np.zeros((dim, dim), dtype=np.complex128), backend)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def backend(self) -> Backend:
        return self._backend

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def __repr__(self) -> str:
        rows = [[format_scalar(v) for v in row] for row in self._entries]
        return f"SquareMatrix({rows})"

    def _check(self, other: "SquareMatrix") -> None:
        if other.dim != self.dim or other.backend is not self.backend:
            raise ValidationError(
                f"matrix mismatch: {self.dim}/{self.backend.value} vs {other.dim}/{other.backend.value}"
            )

    def _scalar(self, value: Any) -> Any:
        if self._backend is Backend.FLOAT:
            return complex(value)
        return _exact_scalar(value)

    def __add__(self, other: Any) -> "SquareMatrix":
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        self._check(other)
        return SquareMatrix._wrap(self._entries + other._entries, self._backend)

    def __sub__(self, other: Any) -> "SquareMatrix":
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        self._check(other)
        return SquareMatrix._wrap(self._entries - other._entries, self._backend)

    def __neg__(self) -> "SquareMatrix":
        return SquareMatrix._wrap(-self._entries, self._backend)

    def __mul__(self, other: Any) -> "SquareMatrix":
        if isinstance(other, SquareMatrix):
            self._check(other)
            return SquareMatrix._wrap(self._entries @ other._entries, self._backend)
        try:
            s = self._scalar(other)
        except (TypeError, ValueError):
            return NotImplemented
        return SquareMatrix._wrap(self._entries * s, self._backend)

    def __rmul__(self, other: Any) -> "SquareMatrix":
        if isinstance(other, SquareMatrix):
            return NotImplemented
        # scalars commute with every entry
        return self.__mul__(other)

    __matmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        if other.dim != self.dim:
            return False
        return bool(np.all(self._entries == other._entries))

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        if self._backend is Backend.FLOAT:
            return not np.any(self._entries)
        return all(not v for v in self._entries.flat)

    def conj_t(self) -> "SquareMatrix":
        if self._backend is Backend.FLOAT:
            return SquareMatrix._wrap(self._entries.conj().T.copy(), self._backend)
        arr = np.empty_like(self._entries)
        for (i, j), v in np.ndenumerate(self._entries):
            arr[j, i] = v.conjugate()
        return SquareMatrix._wrap(arr, self._backend)

    def trace(self) -> Scalar:
        total = self._scalar(0)
        for i in range(self.dim):
            total = total + self._entries[i, i]
        return total

    def to_float(self) -> "SquareMatrix":
        if self._backend is Backend.FLOAT:
            return self
        arr = np.array([[complex(v) for v in row] for row in self._entries], dtype=np.complex128)
        return SquareMatrix._wrap(arr, Backend.FLOAT)

    def to_array(self) -> np.ndarray:
        """complex128 copy of the entries (float view of either backend)."""
        return np.array(self.to_float().entries, dtype=np.complex128)

    def inverse(self, tol: float = INVERSE_RESIDUAL_TOL) -> "SquareMatrix":
        if self._backend is Backend.EXACT:
            return _exact_inverse(self)
        return _float_inverse(self, tol)


def _exact_scalar(value: Any) -> GaussianRational:
    g = GaussianRational.coerce(value)
    if g is not None:
        return g
    if isinstance(value, str):
        return parse_scalar(value, Backend.EXACT)  # type: ignore[return-value]
    if isinstance(value, (complex, float)):
        return GaussianRational.from_complex(complex(value))
    raise TypeError(f"cannot use {type(value).__name__} as an exact ring element")


def _float_scalar(value: Any) -> complex:
    if isinstance(value, str):
        return parse_scalar(value, Backend.FLOAT)  # type: ignore[return-value]
    return complex(value)


def _infer_backend(entries: Any) -> Backend:
    arr = np.asarray(entries, dtype=object)
    if all(isinstance(v, (int, Rational, GaussianRational, str)) for v in arr.flat):
        return Backend.EXACT
    return Backend.FLOAT


def _exact_inverse(m: SquareMatrix) -> SquareMatrix:
    n = m.dim
    a = [[m.entries[i, j] for j in range(n)] + [GaussianRational(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise NonInvertible(f"singular {n}x{n} matrix (no pivot in column {col})")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col].inverse()
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    arr = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            arr[i, j] = a[i][n + j]
    return SquareMatrix._wrap(arr, Backend.EXACT)


def _float_inverse(m: SquareMatrix, tol: float = INVERSE_RESIDUAL_TOL) -> SquareMatrix:
    a = m.entries
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as e:
        raise NonInvertible(f"singular {m.dim}x{m.dim} matrix: {e}") from e
    residual = np.linalg.norm(a @ inv - np.eye(m.dim), 1)
    scale = np.linalg.norm(a, 1) * np.linalg.norm(inv, 1)
    if not np.isfinite(residual) or residual > tol * max(scale, 1.0):
        raise NonInvertible(
            f"matrix inverse residual {residual:.3e} exceeds {tol:.1e} (condition ~ {scale:.3e})"
        )
    return SquareMatrix._wrap(inv, Backend.FLOAT)


@singledispatch
def ring_inverse(a: Any, tol: float = INVERSE_RESIDUAL_TOL) -> Any:
    """Inverse in the ring; float matrices must reproduce the identity to ``tol``."""
    raise TypeError(f"no ring inverse for {type(a).__name__}")


@ring_inverse.register
def _(a: GaussianRational, tol: float = INVERSE_RESIDUAL_TOL) -> GaussianRational:
    return a.inverse()


@ring_inverse.register(int)
@ring_inverse.register(Fraction)
def _(a: Rational, tol: float = INVERSE_RESIDUAL_TOL) -> GaussianRational:
    return GaussianRational(a).inverse()


@ring_inverse.register(complex)
@ring_inverse.register(float)
def _(a: complex, tol: float = INVERSE_RESIDUAL_TOL) -> complex:
    if a == 0 or not np.isfinite(abs(a)):
        raise NonInvertible(f"{a!r} has no inverse")
    return 1 / complex(a)


@ring_inverse.register
def _(a: SquareMatrix, tol: float = INVERSE_RESIDUAL_TOL) -> SquareMatrix:
    return a.inverse(tol)


@singledispatch
def nu(a: Any) -> Any:
    raise TypeError(f"no modulus for {type(a).__name__}")


@nu.register
def _(a: GaussianRational) -> Fraction:
    return abs(a.re) + abs(a.im)


@nu.register(int)
@nu.register(Fraction)
def _(a: Rational) -> Fraction:
    return abs(Fraction(a))


@nu.register(complex)
@nu.register(float)
def _(a: complex) -> float:
    return abs(a)


@nu.register
def _(a: SquareMatrix) -> Fraction | float:
    if a.backend is Backend.FLOAT:
        return float(np.linalg.norm(a.entries, 1))
    return max(sum((nu(v) for v in a.entries[:, j]), Fraction(0)) for j in range(a.dim))


_I_POWERS = ((1, 0), (0, 1), (-1, 0), (0, -1))


@dataclass(frozen=True)
class Ring:
    """Coefficient ring of a jet: backend plus matrix dimension (None = scalar)."""

    backend: Backend = Backend.EXACT
    dim: int | None = None

    @property
    def is_matrix(self) -> bool:
        return self.dim is not None

    @property
    def exact(self) -> bool:
        return self.backend is Backend.EXACT

    def scalar(self, value: Any) -> Scalar:
        if self.backend is Backend.EXACT:
            return _exact_scalar(value)
        return _float_scalar(value)

    def i_power(self, k: int) -> Scalar:
        re, im = _I_POWERS[k % 4]
        if self.backend is Backend.EXACT:
            return GaussianRational(re, im)
        return complex(re, im)

    def zero(self) -> Any:
        if self.dim is None:
            return self.scalar(0)
        return SquareMatrix.zero(self.dim, self.backend)

    def one(self) -> Any:
        if self.dim is None:
            return self.scalar(1)
        return SquareMatrix.identity(self.dim, self.backend)

    def element(self, value: Any) -> Any:
        """Coerce ``value`` (scalar, string, nested list or matrix) into this ring."""
        if isinstance(value, SquareMatrix):
            if self.dim != value.dim:
                raise ValidationError(f"matrix of dim {value.dim} in ring of dim {self.dim}")
            return value if value.backend is self.backend else (
                value.to_float() if self.backend is Backend.FLOAT
                else SquareMatrix(value.entries, Backend.EXACT))
        if isinstance(value, (list, tuple, np.ndarray)):
            if self.dim is None:
                raise ValidationError("matrix value supplied to a scalar ring")
            m = SquareMatrix(value, self.backend)
            if m.dim != self.dim:
                raise ValidationError(f"matrix of dim {m.dim} in ring of dim {self.dim}")
            return m
        s = self.scalar(value)
        if self.dim is None:
            return s
        return s * self.one()

    def is_zero(self, value: Any) -> bool:
        if isinstance(value, SquareMatrix):
            return value.is_zero()
        return not value

    def to_float(self) -> "Ring":
        return Ring(Backend.FLOAT, self.dim)

    def convert(self, value: Any) -> Any:
        """Convert an element of the exact twin ring into this ring."""
        if self.backend is Backend.EXACT:
            return value
        if isinstance(value, SquareMatrix):
            return value.to_float()
        return complex(value)

    def max_abs(self, value: Any) -> float:
        """Largest entry modulus, the float measure used by residual reports."""
        if isinstance(value, SquareMatrix):
            return float(np.max(np.abs(value.to_array()))) if value.dim else 0.0
        return abs(complex(value))
