"""Vector times: per-thread counters with pointwise order and join.

A vector time maps dense thread indices to non-negative counters.  Widths
grow as threads appear, so every operation treats absent components as 0
(the bottom element extends silently).  Equality is defined modulo
trailing zeros for the same reason.

The engines keep their clocks as plain lists of ints and use the
sequence-level helpers below on the hot path; :class:`VectorTime` wraps
the same operations as an immutable value for public APIs and tests.
"""

from __future__ import annotations

from typing import Iterable, Sequence

BOTTOM: tuple[int, ...] = ()


def leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """Pointwise <= over the union of widths."""
    la, lb = len(a), len(b)
    if la <= lb:
        for i in range(la):
            if a[i] > b[i]:
                return False
        return True
    for i in range(lb):
        if a[i] > b[i]:
            return False
    for i in range(lb, la):
        if a[i]:
            return False
    return True


def join(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Pointwise max, as a new tuple."""
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i in range(len(b)):
        v = b[i]
        if v > out[i]:
            out[i] = v
    return tuple(out)


def join_into(dst: list[int], src: Sequence[int]) -> None:
    """In-place pointwise max; dst grows if src is wider."""
    n = len(dst)
    m = len(src)
    if m > n:
        dst.extend(src[n:])
        m = n
    for i in range(m):
        v = src[i]
        if v > dst[i]:
            dst[i] = v


def with_component(v: Sequence[int], u: int, n: int) -> tuple[int, ...]:
    """Copy of v with component u set to n (widened with zeros if needed)."""
    if n < 0:
        raise ValueError("vector time components must be non-negative")
    out = list(v)
    if u >= len(out):
        out.extend([0] * (u + 1 - len(out)))
    out[u] = n
    return tuple(out)


def get(v: Sequence[int], u: int) -> int:
    return v[u] if 0 <= u < len(v) else 0


def trim(v: Sequence[int]) -> tuple[int, ...]:
    """Canonical form: trailing zeros dropped."""
    n = len(v)
    while n and not v[n - 1]:
        n -= 1
    return tuple(v[:n])


def render(v: Sequence[int]) -> str:
    """Debug rendering used in reports and dumps: ``[n0,n1,...]``."""
    return "[" + ",".join(str(x) for x in v) + "]"


class VectorTime:
    """Immutable vector time; (VectorTime, join, bottom) is a join-semilattice."""

    __slots__ = ("_v",)

    def __init__(self, components: Iterable[int] = ()):
        v = tuple(components)
        if any(x < 0 for x in v):
            raise ValueError("vector time components must be non-negative")
        self._v = v

    @classmethod
    def bottom(cls) -> "VectorTime":
        return cls()

    @property
    def components(self) -> tuple[int, ...]:
        return self._v

    def get(self, u: int) -> int:
        return get(self._v, u)

    def leq(self, other: "VectorTime") -> bool:
        return leq(self._v, other._v)

    def join(self, other: "VectorTime") -> "VectorTime":
        return VectorTime(join(self._v, other._v))

    def with_component(self, u: int, n: int) -> "VectorTime":
        return VectorTime(with_component(self._v, u, n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorTime):
            return NotImplemented
        return trim(self._v) == trim(other._v)

    def __hash__(self) -> int:
        return hash(trim(self._v))

    def __repr__(self) -> str:
        return render(self._v)
