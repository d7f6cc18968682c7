"""Nearest completely positive binary tensor in the Hilbert-Schmidt norm.

The CP tensors form a convex cone described by two Hankel LMIs on the moment
sequence ``y``. With ``a(y)`` the inverse binomial transform, the problem

    minimize  || a(y) - a ||_w   s.t.  both parity-appropriate Hankel(y) >= 0

is a small conic program: a norm epigraph (as an arrow-matrix block) plus two
PSD blocks. ``||.||_w`` weights ``a_k`` by ``C(d, k)``, which makes it the
entrywise norm of the full tensor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import CpAnalysis, Tolerances, Verdict, analyze
from .errors import CpbtError, SolverError
from .hankel import RANK_TOL, HankelKind, hankel_from_sequence, psd_check, psd_pair
from .sdp import BlockSDP, solve_sdp
from .tensor import (
    AVector,
    CpDecomposition,
    TmsVector,
    binomial_row,
    binomial_transform,
    inverse_binomial_transform,
    weighted_norm,
)

__all__ = [
    "ConicProblem",
    "ConicSolution",
    "solve_conic",
    "NearestCpResult",
    "nearest_cp",
    "project_feasibility_check",
    "admm_nearest",
    "polish_projection",
]

log = logging.getLogger(__name__)

EIG_FLOOR = 1e-10
POLISH_TOL = 1e-12
MERGE_TOL = 1e-7
STALL_ACCEPT = 1e-5


def hankel_basis(d: int, kind: HankelKind | str) -> np.ndarray:
    """Matrices ``B_k`` with ``H(y) = sum_k y_k B_k``, shape ``(d+1, n, n)``."""
    mats = []
    for k in range(d + 1):
        e = [0] * (d + 1)
        e[k] = 1
        mats.append(hankel_from_sequence(e, kind).entries)
    return np.array(mats)


@dataclass(frozen=True)
class ConicProblem:
    """Distance-to-CP program for one target tensor.

    ``constraints`` defaults to the parity pair; passing a single kind gives
    the relaxation with one LMI dropped.
    """

    a_target: AVector
    constraints: tuple[HankelKind, ...] = ()

    def __post_init__(self):
        kinds = tuple(HankelKind(k) for k in (self.constraints or psd_pair(self.d)))
        object.__setattr__(self, "constraints", kinds)

    @property
    def d(self) -> int:
        return self.a_target.d

    @property
    def weights(self) -> np.ndarray:
        return np.sqrt(np.array(binomial_row(self.d), dtype=float))

    @property
    def inverse_matrix(self) -> np.ndarray:
        """Matrix of the inverse binomial transform ``a = T^-1 y``."""
        d = self.d
        Ti = np.zeros((d + 1, d + 1))
        for k in range(d + 1):
            row = binomial_row(d - k)
            for j in range(k, d + 1):
                Ti[k, j] = (-1) ** (j - k) * row[j - k]
        return Ti

    def objective(self, y) -> float:
        """``||a(y) - a||`` in the weighted norm."""
        y = np.asarray(y, dtype=float)
        r = self.weights * (self.inverse_matrix @ y - self.a_target.to_numpy())
        return float(np.linalg.norm(r))

    def to_sdp(self, scale: float = 1.0) -> BlockSDP:
        """Block SDP in variables ``(t, y_0..y_d)``, maximizing ``-t``.

        The target is divided by ``scale`` so the solver sees unit-size data.
        """
        d = self.d
        R = self.weights[:, None] * self.inverse_matrix
        w = self.weights * self.a_target.to_numpy() / scale
        m = d + 2
        n0 = d + 2
        C0 = np.zeros((n0, n0))
        C0[0, 1:] = C0[1:, 0] = -w
        A0 = np.zeros((m, n0, n0))
        A0[0] = -np.eye(n0)
        for k in range(d + 1):
            A0[k + 1, 0, 1:] = A0[k + 1, 1:, 0] = -R[:, k]
        C, A = [C0], [A0]
        for kind in self.constraints:
            B = hankel_basis(d, kind)
            nk = B.shape[1]
            Ak = np.zeros((m, nk, nk))
            Ak[1:] = -B
            C.append(np.zeros((nk, nk)))
            A.append(Ak)
        b = np.zeros(m)
        b[0] = -1.0
        return BlockSDP(C, A, b)


@dataclass(frozen=True)
class NearestCpResult:
    x_star: AVector
    distance: float
    decomposition: CpDecomposition | None
    analysis: CpAnalysis | None
    y_star: np.ndarray
    iterations: int = 0
    gap: float = 0.0
    primal_infeasibility: float = 0.0
    dual_infeasibility: float = 0.0
    method: str = "ipm"
    already_cp: bool = False
    floored: bool = False
    diagnostics: dict = field(default_factory=dict)


def project_feasibility_check(
    y: TmsVector | np.ndarray, tol: float = 1e-8, constraints=None
) -> bool:
    """True iff the parity-appropriate Hankel pair of ``y`` is PSD within ``tol``."""
    seq = y.values if isinstance(y, TmsVector) else tuple(float(v) for v in y)
    d = len(seq) - 1
    kinds = constraints or psd_pair(d)
    for kind in kinds:
        H = hankel_from_sequence(seq, kind)
        if tol == 0.0:
            if np.linalg.eigvalsh(H.entries)[0] < 0.0:
                return False
        elif not psd_check(H, tol).is_psd:
            return False
    return True


def admm_nearest(
    problem: ConicProblem,
    rho: float = 1.0,
    max_iters: int = 20000,
    tol: float = 1e-9,
) -> tuple[np.ndarray, int]:
    """Alternating-direction splitting for the squared-distance program.

    ``y`` is shared by the Hankel blocks ``Z_j = H_j(y)``; each ``Z_j`` is
    projected onto the PSD cone by eigenvalue clipping. Slow but simple, kept
    as an independent cross-check of the interior-point solver.
    """
    d = problem.d
    scale = weighted_norm(problem.a_target) or 1.0
    R = problem.weights[:, None] * problem.inverse_matrix
    w = problem.weights * problem.a_target.to_numpy() / scale
    bases = [hankel_basis(d, k) for k in problem.constraints]
    ops = [B.reshape(d + 1, -1).T for B in bases]  # vec(H(y)) = op @ y
    lhs = R.T @ R + rho * sum(op.T @ op for op in ops)
    lhs_inv = np.linalg.inv(lhs)
    y = np.zeros(d + 1)
    Z = [np.zeros(op.shape[0]) for op in ops]
    U = [np.zeros(op.shape[0]) for op in ops]
    for it in range(1, max_iters + 1):
        rhs = R.T @ w + rho * sum(op.T @ (z - u) for op, z, u in zip(ops, Z, U))
        y = lhs_inv @ rhs
        r_pri = 0.0
        r_dual = 0.0
        for j, (op, B) in enumerate(zip(ops, bases)):
            Hy = op @ y
            n = B.shape[1]
            V = (Hy + U[j]).reshape(n, n)
            lam, Q = np.linalg.eigh(0.5 * (V + V.T))
            z_new = (Q * np.maximum(lam, 0.0)) @ Q.T
            z_new = z_new.ravel()
            r_dual = max(r_dual, rho * np.linalg.norm(z_new - Z[j]))
            Z[j] = z_new
            U[j] = U[j] + Hy - z_new
            r_pri = max(r_pri, np.linalg.norm(Hy - z_new))
        if r_pri <= tol and r_dual <= tol:
            break
    return y * scale, it


def _moments(xs: np.ndarray, d: int) -> np.ndarray:
    """Columns ``(1, x, ..., x^d)``: the moment vectors of unit point masses."""
    return np.asarray(xs, dtype=float)[None, :] ** np.arange(d + 1)[:, None]


def _dmoments(xs: np.ndarray, d: int) -> np.ndarray:
    k = np.arange(d + 1)[:, None]
    xs = np.asarray(xs, dtype=float)[None, :]
    return k * np.where(k > 0, xs ** np.maximum(k - 1, 0), 0.0)


def _polar_maximum(g: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Maximize ``p(x) = sum_k g_k x^k`` over ``[0, 1]``.

    Returns the maximum, its location and every critical point (endpoints
    included), which are the candidate support points of a projection.
    """
    dp = np.polynomial.polynomial.polyder(g)
    crit = [0.0, 1.0]
    if np.any(dp):
        for z in np.polynomial.polynomial.polyroots(np.trim_zeros(dp, "b")):
            if abs(z.imag) < 1e-7 and 0.0 < z.real < 1.0:
                crit.append(float(z.real))
    crit = np.array(sorted(set(crit)))
    vals = np.polynomial.polynomial.polyval(crit, g)
    i = int(np.argmax(vals))
    return float(vals[i]), float(crit[i]), crit


def _refine(xs, lam, R, w, d):
    """Jointly fit atom locations and weights by bounded least squares."""
    from scipy.optimize import least_squares

    r = xs.size

    def resid(p):
        return R @ (_moments(p[:r], d) @ p[r:]) - w

    def jac(p):
        return np.hstack([R @ (_dmoments(p[:r], d) * p[r:]), R @ _moments(p[:r], d)])

    lo = np.zeros(2 * r)
    hi = np.concatenate([np.ones(r), np.full(r, np.inf)])
    p0 = np.clip(np.concatenate([xs, lam]), lo, hi)
    sol = least_squares(resid, p0, jac=jac, bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=200, method="trf")
    return sol.x[:r], sol.x[r:]


def _prune(xs, lam, floor):
    """Drop negligible atoms and merge coincident ones (mass-weighted)."""
    order = np.argsort(xs)
    xs, lam = xs[order], lam[order]
    keep_x, keep_l = [], []
    for x, l in zip(xs, lam):
        if l <= floor:
            continue
        if keep_x and abs(x - keep_x[-1]) <= MERGE_TOL:
            tot = keep_l[-1] + l
            keep_x[-1] = (keep_x[-1] * keep_l[-1] + x * l) / tot
            keep_l[-1] = tot
        else:
            keep_x.append(x)
            keep_l.append(l)
    return np.array(keep_x), np.array(keep_l)


def polish_projection(
    problem: ConicProblem, y0: np.ndarray, scale: float = 1.0, max_rounds: int = 30
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Sharpen an approximate projection onto the moment cone.

    Works on the atomic form ``y = sum_i lam_i m(x_i)``. Each round fits the
    atoms by least squares, then looks for a point ``x`` whose moment vector
    still makes an acute angle with the residual gradient; such a point is
    added as a new atom. At a projection that angle is never acute, so the
    final violation (returned last) is an optimality certificate.

    ``y0`` and the returned ``y`` are in units of ``scale``.
    """
    from scipy.optimize import nnls

    d = problem.d
    R = problem.weights[:, None] * problem.inverse_matrix
    w = problem.weights * problem.a_target.to_numpy() / scale
    y = np.asarray(y0, dtype=float) / scale
    _, _, cand = _polar_maximum(R.T @ (w - R @ y))
    xs = cand
    lam, _ = nnls(R @ _moments(xs, d), w)
    xs, lam = _prune(xs, lam, 0.0)
    violation = np.inf
    for _ in range(max_rounds):
        if xs.size:
            xs, lam = _refine(xs, lam, R, w, d)
            xs, lam = _prune(xs, lam, 1e-14 * max(lam.max(), 1.0))
        y = _moments(xs, d) @ lam if xs.size else np.zeros(d + 1)
        g = R.T @ (w - R @ y)
        violation, xnew, _ = _polar_maximum(g)
        if violation <= POLISH_TOL:
            break
        xs_try = np.append(xs, xnew)
        lam_try, _ = nnls(R @ _moments(xs_try, d), w)
        xs, lam = _prune(xs_try, lam_try, 0.0)
    return y * scale, xs, lam * scale, max(violation, 0.0)


def _decompose(x_star: AVector, tol: Tolerances) -> tuple[CpAnalysis | None, bool]:
    """Analyze a solver output; tolerate interior-point boundary noise."""
    loose = tol.with_overrides(rank=tol.rank if tol.rank is not None else RANK_TOL)
    try:
        res = analyze(x_star, loose)
        if res.verdict is Verdict.CP or res.verdict is Verdict.ZERO:
            return res, False
    except CpbtError as err:
        log.debug("decomposition of solver output failed: %s", err)
    # Push the moment sequence off the PSD boundary: add a multiple of the
    # moments of Lebesgue measure on [0, 1], whose Hankel matrices are all
    # positive definite, then retry.
    y = binomial_transform(x_star).to_numpy()
    d = x_star.d
    bump = EIG_FLOOR * max(abs(y[0]), 1.0) * np.array([1.0 / (k + 1) for k in range(d + 1)])
    nudged = inverse_binomial_transform(TmsVector(y + bump))
    try:
        res = analyze(nudged, loose)
        if res.verdict is Verdict.CP:
            return res, True
    except CpbtError as err:
        log.debug("decomposition after eigenvalue floor failed: %s", err)
    return None, True


@dataclass(frozen=True)
class ConicSolution:
    """Minimizer of a :class:`ConicProblem` in moment coordinates.

    ``points``/``weights`` hold the atomic form of ``y`` when the polish ran.
    """

    y: np.ndarray
    objective: float
    points: np.ndarray
    weights: np.ndarray
    iterations: int = 0
    gap: float = 0.0
    primal_infeasibility: float = 0.0
    dual_infeasibility: float = 0.0
    diagnostics: dict = field(default_factory=dict)


def solve_conic(
    problem: ConicProblem,
    method: str = "ipm",
    opt_tol: float = 1e-8,
    max_iters: int = 200,
    polish: bool | None = None,
) -> ConicSolution:
    """Solve the distance program; no shortcut for feasible targets.

    ``polish`` defaults to on for the full CP cone. It is not valid for a
    relaxation with a constraint dropped, where it is always off.
    """
    full = set(problem.constraints) == set(psd_pair(problem.d))
    polish = full if polish is None else polish and full
    scale = weighted_norm(problem.a_target) or 1.0
    diag = {}
    if method == "ipm":
        try:
            sol = solve_sdp(problem.to_sdp(scale), opt_tol=opt_tol, max_iters=max_iters)
            y_raw = sol.y[1:] * scale
            info = dict(
                iterations=sol.iterations,
                gap=sol.gap,
                primal_infeasibility=sol.primal_infeasibility,
                dual_infeasibility=sol.dual_infeasibility,
            )
        except SolverError as err:
            # The dual iterate stays strictly feasible; accept a stalled run
            # that got close and let the polish finish the job.
            res = err.residuals
            if not polish or err.best_iterate is None or max(res.values(), default=np.inf) > STALL_ACCEPT:
                raise
            log.info("interior point stalled, polishing best iterate: %s", err)
            y_raw = np.asarray(err.best_iterate)[1:] * scale
            info = dict(
                iterations=err.iterations,
                gap=res["gap"],
                primal_infeasibility=res["pinf"],
                dual_infeasibility=res["dinf"],
            )
            diag["stalled"] = str(err)
    elif method == "admm":
        y_raw, its = admm_nearest(problem, max_iters=max(max_iters, 20000))
        info = dict(iterations=its)
    else:
        raise ValueError(f"unknown method {method!r}")

    f_raw = problem.objective(y_raw)
    y_star, xs, lam, violation, polished = y_raw, np.array([]), np.array([]), None, False
    if polish:
        y_pol, xs_pol, lam_pol, violation = polish_projection(problem, y_raw, scale)
        raw_feasible = project_feasibility_check(y_raw, tol=0.0)
        if not raw_feasible or problem.objective(y_pol) <= f_raw + 1e-12 * scale:
            y_star, xs, lam, polished = y_pol, xs_pol, lam_pol, True
        else:
            log.info("polish rejected (%.3g vs %.3g)", problem.objective(y_pol), f_raw)
            violation = None
    diag.update(polished=polished, polar_violation=violation, objective_before_polish=f_raw)
    return ConicSolution(
        y=np.asarray(y_star, dtype=float),
        objective=problem.objective(y_star),
        points=xs,
        weights=lam,
        diagnostics=diag,
        **info,
    )


def nearest_cp(
    a: AVector,
    method: str = "ipm",
    opt_tol: float = 1e-8,
    max_iters: int = 200,
    tol: Tolerances | None = None,
) -> NearestCpResult:
    """Closest CP tensor to ``a`` in the entrywise norm.

    A CP input is returned unchanged with distance 0. Otherwise the conic
    program is solved (``method="ipm"`` by default, ``"admm"`` for the
    splitting cross-check), the minimizer ``x_star`` is decomposed with
    :func:`analyze`, and solver diagnostics are attached.
    """
    if not isinstance(a, AVector):
        a = AVector(a)
    tol = tol or Tolerances()
    try:
        pre = analyze(a, tol)
    except CpbtError:
        pre = None
    if pre is not None and pre.verdict is not Verdict.NOT_CP:
        return NearestCpResult(
            x_star=a,
            distance=0.0,
            decomposition=pre.decomposition,
            analysis=pre,
            y_star=pre.y.to_numpy(),
            method="none",
            already_cp=True,
        )

    sol = solve_conic(ConicProblem(a), method=method, opt_tol=opt_tol, max_iters=max_iters)
    y_star, xs, lam = sol.y, sol.points, sol.weights
    diag = dict(sol.diagnostics)
    info = dict(
        iterations=sol.iterations,
        gap=sol.gap,
        primal_infeasibility=sol.primal_infeasibility,
        dual_infeasibility=sol.dual_infeasibility,
    )
    polished = diag["polished"]

    x_star = inverse_binomial_transform(TmsVector([float(v) for v in y_star]))
    x_star = AVector([float(v) for v in x_star], exact=False)
    distance = weighted_norm(x_star - a)
    analysis, floored = _decompose(x_star, tol)
    decomposition = analysis.decomposition if analysis else None
    if decomposition is None and polished:
        decomposition = CpDecomposition.from_measure(a.d, lam, xs)
    diag["objective"] = sol.objective
    if not math.isclose(distance, diag["objective"], rel_tol=1e-8, abs_tol=1e-12):
        log.warning("distance %.12g disagrees with objective %.12g", distance, diag["objective"])
    return NearestCpResult(
        x_star=x_star,
        distance=distance,
        decomposition=decomposition,
        analysis=analysis,
        y_star=np.asarray(y_star, dtype=float),
        method=method,
        floored=floored,
        diagnostics=diag,
        **info,
    )
