"""Multi-index combinatorics and the small I/O helpers shared by the pipelines."""

import csv
import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, Sequence

Index = tuple[int, ...]


@lru_cache(maxsize=None)
def indices_of_degree(n: int, d: int) -> tuple[Index, ...]:
    """All multi-indices of length ``n`` and total degree ``d``, in lexicographic order.

    This ordering is the canonical summation order for every float reduction.
    """
    if n == 0:
        return ((),) if d == 0 else ()
    if n == 1:
        return ((d,),)
    out: list[Index] = []
    for first in range(d, -1, -1):
        for rest in indices_of_degree(n - 1, d - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def indices_up_to(n: int, d: int) -> tuple[Index, ...]:
    """Graded enumeration: degree 0 first, then 1, ... up to ``d``."""
    out: list[Index] = []
    for k in range(d + 1):
        out.extend(indices_of_degree(n, k))
    return tuple(out)


def degree(idx: Index) -> int:
    return sum(idx)


@lru_cache(maxsize=None)
def index_factorial(idx: Index) -> int:
    out = 1
    for c in idx:
        out *= math.factorial(c)
    return out


def add_index(a: Index, b: Index) -> Index:
    return tuple(x + y for x, y in zip(a, b))


def sub_index(a: Index, b: Index) -> Index | None:
    """``a - b`` or None when some component would go negative."""
    out = tuple(x - y for x, y in zip(a, b))
    if any(c < 0 for c in out):
        return None
    return out


@lru_cache(maxsize=None)
def falling_factor(idx: Index, gamma: Index) -> int:
    """(idx + gamma)! / idx!, the scale applied when differentiating a Taylor coefficient."""
    out = 1
    for i, g in zip(idx, gamma):
        for k in range(i + 1, i + g + 1):
            out *= k
    return out


def power_pow0(base: Any, exponent: int) -> Any:
    """``base**exponent`` with the convention 0**0 == 1."""
    if exponent == 0:
        return 1
    return base ** exponent


def dump_json(path: str | Path, payload: Any) -> None:
    """Write JSON with sorted keys so reruns are byte identical."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])


def _csv_cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value
