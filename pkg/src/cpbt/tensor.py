"""Compressed coordinates of symmetric binary tensors.

A symmetric tensor ``A`` of order ``d`` in dimension two is determined by the
``d + 1`` numbers ``a_k = A[i_1, ..., i_d]`` with ``k = i_1 + ... + i_d - d``
(indices counted from one). :class:`AVector` holds those numbers, and
:class:`TmsVector` holds the truncated moment sequence obtained after the
change of basis ``(x1, x2) -> (x1 + x2, x2)``.

Coordinates are stored as exact rationals. Floats convert to ``Fraction``
without rounding, so both transforms below are exact bijections and round
trips never lose bits. The ``exact`` flag records whether the *source* data
was rational (ints, ``Fraction`` or ``"p/q"`` strings); downstream decisions
(rank, PSD-ness, uniqueness) run in rational arithmetic only when it is set.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "D_MAX",
    "AVector",
    "TmsVector",
    "CpDecomposition",
    "binomial_row",
    "binomial_transform",
    "inverse_binomial_transform",
    "weighted_norm",
    "reconstruct",
]

#: Largest order supported by the cached Pascal table.
D_MAX = 64

ATOM_TOL = 1e-9


@lru_cache(maxsize=None)
def _pascal(n_max: int) -> tuple[tuple[int, ...], ...]:
    rows = [(1,)]
    for n in range(1, n_max + 1):
        prev = rows[-1]
        rows.append((1,) + tuple(prev[i] + prev[i + 1] for i in range(n - 1)) + (1,))
    return tuple(rows)


def binomial_row(n: int, d_max: int = D_MAX) -> tuple[int, ...]:
    """Exact binomial coefficients ``C(n, 0), ..., C(n, n)``."""
    if n < 0 or n > d_max:
        raise ValueError(f"order {n} outside supported range 0..{d_max}")
    return _pascal(d_max)[n]


def _coerce(value) -> tuple[Fraction, bool]:
    """Convert one coordinate to ``Fraction``; report whether it was rational."""
    if isinstance(value, bool):
        raise TypeError("booleans are not valid coordinates")
    if isinstance(value, Fraction):
        return value, True
    if isinstance(value, numbers.Integral):
        return Fraction(int(value)), True
    if isinstance(value, str):
        return Fraction(value.strip()), True
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator), True
    if isinstance(value, numbers.Real):
        f = float(value)
        if not math.isfinite(f):
            raise ValueError(f"non-finite coordinate {value!r}")
        return Fraction(f), False
    raise TypeError(f"cannot use {type(value).__name__} as a coordinate")


class _Coordinates:
    """Shared storage for the two length ``d + 1`` coordinate vectors."""

    __slots__ = ("_values", "_exact")

    def __init__(self, values: Iterable, exact: bool | None = None):
        converted = [_coerce(v) for v in values]
        if len(converted) < 2:
            raise ValueError("need at least two coordinates (order d >= 1)")
        if len(converted) - 1 > D_MAX:
            raise ValueError(f"order {len(converted) - 1} exceeds D_MAX={D_MAX}")
        self._values = tuple(v for v, _ in converted)
        self._exact = all(e for _, e in converted) if exact is None else bool(exact)

    @property
    def d(self) -> int:
        return len(self._values) - 1

    @property
    def values(self) -> tuple[Fraction, ...]:
        return self._values

    @property
    def exact(self) -> bool:
        return self._exact

    def to_numpy(self) -> np.ndarray:
        return np.array([float(v) for v in self._values])

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def __getitem__(self, k):
        return self._values[k]

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._values == other._values

    def __hash__(self):
        return hash((type(self).__name__, self._values))

    def _binop(self, other, op):
        if type(other) is not type(self):
            return NotImplemented
        if other.d != self.d:
            raise ValueError(f"order mismatch: {self.d} vs {other.d}")
        vals = [op(x, y) for x, y in zip(self._values, other._values)]
        return type(self)(vals, exact=self._exact and other._exact)

    def __add__(self, other):
        return self._binop(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binop(other, lambda x, y: x - y)

    def __repr__(self):
        if self._exact:
            body = ", ".join(str(v) for v in self._values)
        else:
            body = ", ".join(repr(float(v)) for v in self._values)
        return f"{type(self).__name__}(d={self.d}, [{body}])"


class AVector(_Coordinates):
    """Compressed coordinates ``a_0..a_d`` of a symmetric binary tensor."""

    __slots__ = ()

    @classmethod
    def zeros(cls, d: int) -> "AVector":
        return cls([0] * (d + 1))


class TmsVector(_Coordinates):
    """Truncated moment sequence ``y_0..y_d`` of a binary tensor."""

    __slots__ = ()


def binomial_transform(a: AVector) -> TmsVector:
    """Map tensor coordinates to the moment sequence.

    ``y_k = sum_{j >= k} C(d - k, j - k) a_j``. This is the substitution
    ``T = [[1, 1], [0, 1]]`` acting on every mode, written in compressed
    coordinates. Computed exactly.
    """
    d = a.d
    vals = a.values
    y = []
    for k in range(d + 1):
        row = binomial_row(d - k)
        y.append(sum((row[j - k] * vals[j] for j in range(k, d + 1)), Fraction(0)))
    return TmsVector(y, exact=a.exact)


def inverse_binomial_transform(y: TmsVector) -> AVector:
    """Inverse of :func:`binomial_transform` (alternating binomial sums)."""
    d = y.d
    vals = y.values
    a = []
    for k in range(d + 1):
        row = binomial_row(d - k)
        total = Fraction(0)
        for j in range(k, d + 1):
            c = row[j - k]
            total += c * vals[j] if (j - k) % 2 == 0 else -c * vals[j]
        a.append(total)
    return AVector(a, exact=y.exact)


def weighted_norm(a: AVector) -> float:
    """Entrywise (Hilbert-Schmidt) norm of the full tensor.

    Each ``a_k`` appears ``C(d, k)`` times among the ``2**d`` entries.
    """
    row = binomial_row(a.d)
    total = sum((c * v * v for c, v in zip(row, a.values)), Fraction(0))
    return _fraction_sqrt(total)


def _fraction_sqrt(x: Fraction) -> float:
    # float(Fraction) is correctly rounded, so this is within an ulp or two
    return math.sqrt(float(x))


@dataclass(frozen=True)
class CpDecomposition:
    """Nonnegative atoms ``(a_i, b_i)`` with ``sum (a_i, b_i)^{(x)d} = A``.

    Coordinates in ``(-tol, 0)`` are clamped to zero; anything more negative,
    or an atom with ``a_i + b_i <= 0``, raises ``ValueError``.
    """

    d: int
    atoms: tuple[tuple, ...] = ()
    tol: float = field(default=ATOM_TOL, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("order must be >= 1")
        clean = []
        for atom in self.atoms:
            if len(atom) != 2:
                raise ValueError(f"atom {atom!r} is not a pair")
            pair = []
            for v in atom:
                if v < 0:
                    if v < -self.tol:
                        raise ValueError(f"negative atom coordinate {v!r}")
                    v = 0.0
                pair.append(v)
            if pair[0] + pair[1] <= 0:
                raise ValueError(f"atom {atom!r} has a_i + b_i <= 0")
            clean.append(tuple(pair))
        object.__setattr__(self, "atoms", tuple(clean))

    @property
    def rank(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> tuple:
        """``lambda_i = (a_i + b_i) ** d``."""
        return tuple((p + q) ** self.d for p, q in self.atoms)

    @property
    def points(self) -> tuple:
        """``x_i = b_i / (a_i + b_i)``, the support points in ``[0, 1]``."""
        return tuple(q / (p + q) for p, q in self.atoms)

    @classmethod
    def from_measure(cls, d: int, weights: Sequence, points: Sequence) -> "CpDecomposition":
        """Atoms ``lambda^{1/d} (1 - t, t)`` for an atomic measure on ``[0, 1]``."""
        atoms = []
        for lam, t in zip(weights, points, strict=True):
            scale = float(lam) ** (1.0 / d)
            atoms.append((scale * (1.0 - float(t)), scale * float(t)))
        return cls(d, tuple(atoms))

    def __or__(self, other: "CpDecomposition") -> "CpDecomposition":
        if other.d != self.d:
            raise ValueError("order mismatch")
        return CpDecomposition(self.d, self.atoms + other.atoms)


def reconstruct(dec: CpDecomposition) -> AVector:
    """Coordinates of ``sum_i (a_i, b_i)^{(x)d}``: ``a_k = sum_i a_i^{d-k} b_i^k``."""
    d = dec.d
    total = [Fraction(0)] * (d + 1)
    exact = True
    for p, q in dec.atoms:
        (fp, ep), (fq, eq) = _coerce(p), _coerce(q)
        exact = exact and ep and eq
        pw_p = [Fraction(1)] * (d + 1)
        pw_q = [Fraction(1)] * (d + 1)
        for k in range(1, d + 1):
            pw_p[k] = pw_p[k - 1] * fp
            pw_q[k] = pw_q[k - 1] * fq
        for k in range(d + 1):
            total[k] += pw_p[d - k] * pw_q[k]
    return AVector(total, exact=exact)
