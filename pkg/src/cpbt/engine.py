"""Complete-positivity test, cp-rank and cp-rank decomposition.

The tensor is CP exactly when its moment sequence ``y`` has a representing
measure on ``[0, 1]``; the atoms of an ``r``-atomic measure
``y = sum_i lambda_i [x_i]_d`` give the decomposition
``a_i = lambda_i^{1/d} (1 - x_i)``, ``b_i = lambda_i^{1/d} x_i``.

The pipeline is: PSD test of the parity pair, ``r = rank H1``, solve a
Hankel system for the coefficients ``g`` of
``g(x) = g_0 + ... + g_{r-1} x^{r-1} - x^r``, take its roots as support
points, solve a Vandermonde system for the weights. For even order with
``r = s + 1`` the sequence is first extended by one moment, and the width of
the admissible interval ``[l, u]`` for that moment decides uniqueness.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rational
from .errors import InconsistentCertificate
from .hankel import (
    PSD_TOL,
    HankelKind,
    PsdVerdict,
    build_hankel,
    exact_rank,
    hankel_from_sequence,
    numerical_rank,
    psd_check,
    psd_check_exact,
    psd_pair,
)
from .tensor import (
    AVector,
    CpDecomposition,
    TmsVector,
    binomial_transform,
    reconstruct,
    weighted_norm,
)

__all__ = [
    "Tolerances",
    "Verdict",
    "Uniqueness",
    "CpAnalysis",
    "analyze",
    "solve_hankel_system_odd",
    "solve_hankel_system_even",
    "extension_value",
    "companion_roots",
    "vandermonde_weights",
    "uniqueness_bounds",
    "assemble_decomposition",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds; the defaults are the documented ones."""

    psd: float = PSD_TOL
    rank: float | None = None
    residual: float = 1e-6
    clamp: float = 1e-8
    imag: float = 1e-7
    separation: float = 1e-6
    weight: float = 1e-9
    uniqueness: float = 1e-8
    vandermonde_cond: float = 1e12
    zero: float = 0.0

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DEFAULT_TOLERANCES = Tolerances()


class Verdict(str, Enum):
    ZERO = "zero"
    NOT_CP = "not_cp"
    CP = "cp"


class Uniqueness(str, Enum):
    UNIQUE = "unique"
    NOT_UNIQUE = "not_unique"


@dataclass(frozen=True)
class CpAnalysis:
    a: AVector
    y: TmsVector
    verdict: Verdict
    exact: bool
    checks: dict = field(default_factory=dict)
    failing: HankelKind | None = None
    rank: int | None = None
    decomposition: CpDecomposition | None = None
    uniqueness: Uniqueness | None = None
    l: Fraction | float | None = None
    u: Fraction | float | None = None
    h1_rank: int | None = None
    borderline_rank: bool = False
    residual: float | None = None
    roots: tuple = ()
    weights: tuple = ()

    @property
    def certificate(self) -> PsdVerdict | None:
        return self.checks[self.failing] if self.failing is not None else None

    @property
    def is_cp(self) -> bool:
        return self.verdict is not Verdict.NOT_CP


# -- linear systems ---------------------------------------------------------


def _hankel_rect(seq: Sequence, nrows: int, ncols: int):
    return [[seq[i + j] for j in range(ncols)] for i in range(nrows)]


def _solve(M, rhs, exact: bool, tol: Tolerances, what: str):
    if exact:
        g = rational.solve(M, rhs)
        if g is None:
            raise InconsistentCertificate(what, "Hankel system has no exact solution")
        return tuple(g)
    # Float data is dyadic-rational, so the least-squares solution is formed
    # exactly through the normal equations and rounded once. This removes the
    # solver's own error on these badly conditioned Hankel systems.
    Mt = rational.transpose(M)
    normal = rational.matmul(Mt, M)
    proj = [sum((m * b for m, b in zip(col, rhs)), Fraction(0)) for col in Mt]
    g_exact = rational.solve(normal, proj)
    if g_exact is None:
        raise InconsistentCertificate(what, "singular normal equations")
    A = np.array([[float(v) for v in row] for row in M])
    b = np.array([float(v) for v in rhs])
    g = np.array([float(v) for v in g_exact])
    res = float(np.linalg.norm(A @ g - b))
    scale = float(np.linalg.norm(b))
    if res > tol.residual * scale and res > 0.0:
        raise InconsistentCertificate(what, f"residual {res:.3e} exceeds {tol.residual:g} * {scale:.3e}")
    return tuple(float(v) for v in g)


def solve_hankel_system_odd(
    y: TmsVector, r: int, tol: Tolerances = DEFAULT_TOLERANCES, exact: bool = False
) -> tuple:
    """Coefficients ``g`` for odd ``d = 2s + 1``.

    Rows ``i = 0..2s+1-r`` of ``sum_j g_j y_{i+j} = y_{i+r}``.
    """
    d = y.d
    if d % 2 == 0:
        raise ValueError("wrong parity: odd-order system needs odd d")
    s = (d - 1) // 2
    if not 1 <= r <= s + 1:
        raise ValueError(f"rank {r} outside 1..{s + 1}")
    seq = y.values
    nrows = 2 * s + 2 - r
    M = _hankel_rect(seq, nrows, r)
    rhs = [seq[i + r] for i in range(nrows)]
    return _solve(M, rhs, exact, tol, "odd Hankel system")


def extension_value(y: TmsVector, exact: bool = False):
    """The moment ``y_{2s+1} = z^T M^+ z`` appended for even order.

    ``z = (y_{s+1}, ..., y_{2s})`` and ``M`` is the ``s x s`` Hankel matrix of
    ``(y_1, ..., y_{2s-1})``. It is the smallest admissible extension.
    """
    d = y.d
    s = d // 2
    seq = y.values
    z = list(seq[s + 1 : 2 * s + 1])
    M = _hankel_rect(seq[1:], s, s)
    value = rational.pinv_form(M, z)
    return value if exact else float(value)


def solve_hankel_system_even(
    y: TmsVector, r: int, tol: Tolerances = DEFAULT_TOLERANCES, exact: bool = False
) -> tuple:
    """Coefficients ``g`` for even ``d = 2s``.

    For ``r <= s``: rows ``i = 0..2s-r`` of ``sum_j g_j y_{i+j} = y_{i+r}``.
    For ``r = s + 1``: append ``y_{2s+1}`` from :func:`extension_value`, then
    solve the square system ``H1(y) g = (y_{s+1}, ..., y_{2s+1})``.
    """
    d = y.d
    if d % 2 == 1:
        raise ValueError("wrong parity: even-order system needs even d")
    s = d // 2
    if not 1 <= r <= s + 1:
        raise ValueError(f"rank {r} outside 1..{s + 1}")
    seq = list(y.values)
    if r <= s:
        nrows = 2 * s - r + 1
        M = _hankel_rect(seq, nrows, r)
        rhs = [seq[i + r] for i in range(nrows)]
        return _solve(M, rhs, exact, tol, "even Hankel system")
    seq.append(extension_value(y, exact=True))
    M = _hankel_rect(seq, s + 1, s + 1)
    rhs = seq[s + 1 : 2 * s + 2]
    return _solve(M, rhs, exact, tol, "extended Hankel system")


# -- roots and weights ------------------------------------------------------


def _poly_eval(g: np.ndarray, x: float) -> tuple[float, float]:
    """``g(x) = sum g_j x^j - x^r`` and its derivative, by Horner."""
    r = len(g)
    p, dp = -1.0, 0.0
    for j in range(r - 1, -1, -1):
        dp = dp * x + p
        p = p * x + g[j]
    return p, dp


def companion_roots(g: Sequence, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, ...]:
    """Roots of ``g(x) = g_0 + ... + g_{r-1} x^{r-1} - x^r``.

    Eigenvalues of the companion matrix (ones on the subdiagonal, ``g`` in the
    last column), one Newton polish step per root, then imaginary parts and
    near-boundary excursions are cleaned up within tolerance.
    """
    gf = np.array([float(v) for v in g])
    r = gf.size
    if r == 0:
        raise ValueError("empty coefficient vector")
    C = np.zeros((r, r))
    C[1:, :-1] = np.eye(r - 1)
    C[:, -1] = gf
    eig = np.linalg.eigvals(C)
    roots = []
    for z in eig:
        if abs(z.imag) > tol.imag:
            raise InconsistentCertificate("roots", f"complex root {z:.6g}")
        x = float(z.real)
        p, dp = _poly_eval(gf, x)
        if dp != 0.0:
            x_new = x - p / dp
            if abs(_poly_eval(gf, x_new)[0]) < abs(p):
                x = x_new
        if x < 0.0:
            if x < -tol.clamp:
                raise InconsistentCertificate("roots", f"root {x:.6g} below 0")
            x = 0.0
        elif x > 1.0:
            if x > 1.0 + tol.clamp:
                raise InconsistentCertificate("roots", f"root {x:.6g} above 1")
            x = 1.0
        roots.append(x)
    return tuple(sorted(roots, reverse=True))


def vandermonde_weights(
    y: TmsVector, roots: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[float, ...]:
    """Weights with ``y = sum_i lambda_i [x_i]_d``.

    Uses the leading square block when it is well conditioned, otherwise all
    ``d + 1`` rows in least squares.
    """
    x = np.asarray(roots, dtype=float)
    r = x.size
    if r > 1:
        sep = np.min(np.diff(np.sort(x)))
        if sep <= tol.separation:
            raise InconsistentCertificate("weights", f"roots closer than {tol.separation:g}")
    yf = y.to_numpy()
    V = np.vander(x, y.d + 1, increasing=True).T
    square = V[:r]
    if np.linalg.cond(square) <= tol.vandermonde_cond:
        lam = np.linalg.solve(square, yf[:r])
    else:
        lam, *_ = np.linalg.lstsq(V, yf, rcond=None)
    floor = tol.weight * max(abs(yf[0]), np.finfo(float).tiny)
    out = []
    for w in lam:
        if w <= -floor:
            raise InconsistentCertificate("weights", f"negative weight {w:.6g}")
        if w <= 0.0:
            warnings.warn(f"weight {w:.3g} clamped to the smallest positive float", RuntimeWarning)
            w = np.finfo(float).tiny
        out.append(float(w))
    return tuple(out)


def assemble_decomposition(
    roots: Sequence[float], weights: Sequence[float], d: int
) -> CpDecomposition:
    """Atoms ``lambda^{1/d} (1 - x, x)``, ordered by descending ``x``."""
    pairs = sorted(zip(roots, weights), key=lambda p: -p[0])
    return CpDecomposition.from_measure(d, [w for _, w in pairs], [x for x, _ in pairs])


def uniqueness_bounds(y: TmsVector, exact: bool = False, tol: Tolerances = DEFAULT_TOLERANCES):
    """Interval ``[l, u]`` of admissible extension moments ``y_{2s+1}``.

    ``l`` is the smallest value keeping ``H3`` of the extended sequence PSD,
    ``u`` the largest keeping ``H4`` PSD (both via Schur complements). The
    even-order decomposition with ``r = s + 1`` is unique iff ``l = u``.
    """
    d = y.d
    if d % 2 == 1:
        raise ValueError("wrong parity: bounds are defined for even d")
    s = d // 2
    seq = y.values
    lo = extension_value(y, exact=exact)
    w = [seq[k] - seq[k + 1] for k in range(s, 2 * s)]
    diffs = [seq[k] - seq[k + 1] for k in range(2 * s - 1)]
    H = _hankel_rect(diffs, s, s)
    hi = seq[2 * s] - rational.pinv_form(H, w)
    if not exact:
        lo, hi = float(lo), float(hi)
    scale = max(abs(float(lo)), abs(float(hi)), np.finfo(float).tiny)
    if float(lo - hi) > tol.residual * scale:
        raise InconsistentCertificate("bounds", f"l={float(lo):.6g} exceeds u={float(hi):.6g}")
    return lo, hi


# -- driver -----------------------------------------------------------------


def _psd(M, exact: bool, tol: Tolerances) -> PsdVerdict:
    return psd_check_exact(M) if exact else psd_check(M, tol.psd)


def _attempt(a: AVector, y: TmsVector, r: int, exact: bool, tol: Tolerances):
    """Run the decomposition for a fixed rank; return the pieces and a cleanliness flag."""
    d = y.d
    if d % 2:
        g = solve_hankel_system_odd(y, r, tol, exact)
    else:
        g = solve_hankel_system_even(y, r, tol, exact)
    roots = companion_roots(g, tol)
    lam = vandermonde_weights(y, roots, tol)
    dec = assemble_decomposition(roots, lam, d)
    anorm = weighted_norm(a)
    residual = weighted_norm(reconstruct(dec) - a)
    if residual > tol.residual * anorm:
        raise InconsistentCertificate(
            "reconstruction", f"residual {residual:.3e} exceeds {tol.residual:g} * {anorm:.3e}"
        )
    tiny = min(lam) <= tol.weight * float(y[0])
    return dec, roots, lam, residual, not tiny


def analyze(
    a: AVector | Sequence,
    tol: Tolerances | None = None,
    exact: bool | None = None,
) -> CpAnalysis:
    """Decide complete positivity and, when CP, compute a cp-rank decomposition.

    ``exact`` defaults to ``a.exact``: rational inputs get exact PSD tests,
    rank, Hankel solves and uniqueness bounds; support points are always
    extracted in floating point.

    Raises :class:`InconsistentCertificate` if no rank near the numerical
    rank of ``H1`` yields a decomposition satisfying every postcondition.
    """
    if not isinstance(a, AVector):
        a = AVector(a)
    tol = tol or DEFAULT_TOLERANCES
    exact = a.exact if exact is None else exact
    y = binomial_transform(a)
    d = y.d
    base = dict(a=a, y=y, exact=exact)

    checks = {}
    for kind in psd_pair(d):
        checks[kind] = _psd(build_hankel(y, kind), exact, tol)
    failing = next((k for k, v in checks.items() if not v.is_psd), None)
    if failing is not None:
        return CpAnalysis(verdict=Verdict.NOT_CP, checks=checks, failing=failing, **base)
    if y[0] <= tol.zero:
        return CpAnalysis(verdict=Verdict.ZERO, checks=checks, **base)

    s = d // 2
    h1 = hankel_from_sequence(y.values[: 2 * s + 1], HankelKind.H1)
    r0 = exact_rank(h1) if exact else numerical_rank(h1, tol.rank)
    r0 = max(1, min(r0, s + 1))

    if exact:
        candidates = [r0]
    else:
        candidates = list(range(r0, 0, -1)) + list(range(r0 + 1, s + 2))
    first_error = None
    fallback = None
    chosen = None
    for r in candidates:
        try:
            dec, roots, lam, residual, clean = _attempt(a, y, r, exact, tol)
        except InconsistentCertificate as err:
            log.debug("rank %d rejected: %s", r, err)
            first_error = first_error or err
            continue
        if clean:
            chosen = (r, dec, roots, lam, residual)
            break
        fallback = fallback or (r, dec, roots, lam, residual)
    if chosen is None:
        chosen = fallback
    if chosen is None:
        raise first_error
    r, dec, roots, lam, residual = chosen

    lo = hi = None
    if d % 2 == 1 or r <= s:
        uniq = Uniqueness.UNIQUE
    else:
        lo, hi = uniqueness_bounds(y, exact=exact, tol=tol)
        if exact:
            same = lo == hi
        else:
            scale = max(abs(lo), abs(hi), np.finfo(float).tiny)
            same = hi - lo <= tol.uniqueness * scale
        uniq = Uniqueness.UNIQUE if same else Uniqueness.NOT_UNIQUE

    return CpAnalysis(
        verdict=Verdict.CP,
        checks=checks,
        rank=r,
        decomposition=dec,
        uniqueness=uniq,
        l=lo,
        u=hi,
        h1_rank=r0,
        borderline_rank=r != r0,
        residual=residual,
        roots=tuple(roots),
        weights=tuple(lam),
        **base,
    )
