"""Hankel matrices of a moment sequence and their PSD / rank tests.

For ``d = 2s`` the pair ``(H1, H2)`` is tested, for ``d = 2s + 1`` the pair
``(H3, H4)``. A sequence ``y`` is the moment sequence of a nonnegative measure
on ``[0, 1]`` exactly when its pair is positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rational
from .tensor import TmsVector

__all__ = [
    "HankelKind",
    "HankelMatrix",
    "PsdVerdict",
    "hankel_from_sequence",
    "build_hankel",
    "psd_pair",
    "psd_check",
    "psd_check_exact",
    "numerical_rank",
    "exact_rank",
    "PSD_TOL",
    "RANK_TOL",
]

PSD_TOL = 1e-8
#: Suggested rank threshold for data carrying its own noise (solver output,
#: measurements). The default for exact-as-given float data is machine level.
RANK_TOL = 1e-7


class HankelKind(str, Enum):
    H1 = "H1"
    H2 = "H2"
    H3 = "H3"
    H4 = "H4"


@dataclass(frozen=True)
class HankelMatrix:
    """Square Hankel matrix ``M[i][j] = g[i + j]`` built from ``generator``.

    ``generator`` keeps the exact entries; :attr:`entries` is the float view.
    """

    generator: tuple
    kind: HankelKind
    s: int

    def __post_init__(self):
        if len(self.generator) % 2 == 0:
            raise ValueError("a square Hankel matrix needs an odd-length generator")

    @property
    def size(self) -> int:
        return (len(self.generator) + 1) // 2

    @property
    def entries(self) -> np.ndarray:
        g = np.array([float(v) for v in self.generator])
        n = self.size
        idx = np.arange(n)
        return g[idx[:, None] + idx[None, :]]

    def exact_entries(self) -> list[list[Fraction]]:
        n = self.size
        return [[Fraction(self.generator[i + j]) for j in range(n)] for i in range(n)]


def hankel_from_sequence(seq: Sequence, kind: HankelKind | str = HankelKind.H1) -> HankelMatrix:
    """Apply the ``kind`` construction to an arbitrary sequence.

    The H1 and H2 rules need an odd-length (even-degree) sequence, H3 and H4
    an even-length one. Used internally on truncated or extended sequences.
    """
    kind = HankelKind(kind)
    seq = tuple(seq)
    deg = len(seq) - 1
    even_kind = kind in (HankelKind.H1, HankelKind.H2)
    if (deg % 2 == 0) != even_kind:
        raise ValueError(
            f"wrong parity: {kind.value} needs {'even' if even_kind else 'odd'} degree, got d={deg}"
        )
    s = deg // 2
    if kind is HankelKind.H1:
        gen = seq
    elif kind is HankelKind.H2:
        gen = tuple(seq[k] - seq[k + 1] for k in range(1, deg))
    elif kind is HankelKind.H3:
        gen = seq[1:]
    else:
        gen = tuple(seq[k] - seq[k + 1] for k in range(deg))
    if not gen:
        raise ValueError(f"{kind.value} is empty for d={deg}")
    return HankelMatrix(gen, kind, s)


def build_hankel(y: TmsVector, kind: HankelKind | str) -> HankelMatrix:
    """The Hankel matrix of the given kind for a moment sequence."""
    return hankel_from_sequence(y.values, kind)


def psd_pair(d: int) -> tuple[HankelKind, HankelKind]:
    """The two matrices whose joint PSD-ness certifies complete positivity."""
    return (HankelKind.H1, HankelKind.H2) if d % 2 == 0 else (HankelKind.H3, HankelKind.H4)


@dataclass(frozen=True)
class PsdVerdict:
    """Outcome of a PSD test.

    ``certificate_vector`` is the eigenvector of the smallest eigenvalue
    (or, in exact mode, a rational vector from the LDL^T elimination);
    ``certificate_value`` is ``v^T M v`` for that vector.
    """

    is_psd: bool
    min_eigenvalue: float
    certificate_vector: tuple
    certificate_value: float
    exact: bool = False


def psd_check(M: HankelMatrix, tol: float = PSD_TOL) -> PsdVerdict:
    """PSD within ``tol`` relative to the spectral norm.

    ``is_psd`` iff ``lambda_min >= -tol * ||M||_2``; the zero matrix is PSD.
    The relative threshold makes the verdict invariant under positive scaling.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    H = M.entries
    w, V = np.linalg.eigh(H)
    lam_min = float(w[0])
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    v = V[:, 0]
    return PsdVerdict(
        is_psd=lam_min >= -tol * norm,
        min_eigenvalue=lam_min,
        certificate_vector=tuple(float(t) for t in v),
        certificate_value=float(v @ H @ v),
    )


def psd_check_exact(M: HankelMatrix) -> PsdVerdict:
    """Exact PSD decision by rational LDL^T.

    When the matrix is not PSD the certificate is an exact rational vector
    with ``v^T M v < 0``; the reported eigenvalue is the float one.
    """
    ok, v, value = rational.ldl_psd(M.exact_entries())
    lam_min = float(np.linalg.eigvalsh(M.entries)[0])
    if ok:
        return PsdVerdict(True, lam_min, (), 0.0, exact=True)
    return PsdVerdict(False, lam_min, tuple(v), float(value), exact=True)


def numerical_rank(M: HankelMatrix | np.ndarray, rel_tol: float | None = None) -> int:
    """Number of singular values above ``rel_tol * sigma_max``.

    ``rel_tol=None`` uses the machine-precision threshold ``n * eps``.
    """
    H = M.entries if isinstance(M, HankelMatrix) else np.asarray(M, dtype=float)
    if H.size == 0:
        return 0
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    if rel_tol is None:
        rel_tol = max(H.shape) * np.finfo(float).eps
    return int(np.sum(sv > rel_tol * sv[0]))


def exact_rank(M: HankelMatrix) -> int:
    return rational.rank(M.exact_entries())
