"""Small dense semidefinite programs by a primal-dual interior-point method.

Solves the pair

    primal:  minimize  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
    dual:    maximize  b^T y    s.t.  S = C - sum_i y_i A_i >= 0

over a block-diagonal cone. Search directions are HKM
(Helmberg-Kojima-Monteiro) with a Mehrotra predictor-corrector step; the
iterates need not be feasible. Everything is dense: the intended problems have
a few dozen variables and blocks of size at most ~25.

A second-order cone constraint ``||r|| <= t`` is handled through its arrow
matrix ``[[t, r^T], [r, t I]] >= 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SolverError

log = logging.getLogger(__name__)

__all__ = ["BlockSDP", "SDPResult", "solve_sdp"]


@dataclass
class BlockSDP:
    """Problem data. ``A[k]`` has shape ``(m, n_k, n_k)`` for block ``k``."""

    C: list[np.ndarray]
    A: list[np.ndarray]
    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        m = self.b.size
        for Ck, Ak in zip(self.C, self.A, strict=True):
            n = Ck.shape[0]
            if Ck.shape != (n, n) or Ak.shape != (m, n, n):
                raise ValueError("inconsistent block shapes")

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def n(self) -> int:
        return sum(Ck.shape[0] for Ck in self.C)

    def op(self, X: list[np.ndarray]) -> np.ndarray:
        """``(<A_i, X>)_i``."""
        return sum(np.einsum("ijk,jk->i", Ak, Xk) for Ak, Xk in zip(self.A, X))

    def adj(self, y: np.ndarray) -> list[np.ndarray]:
        """``sum_i y_i A_i``."""
        return [np.einsum("i,ijk->jk", y, Ak) for Ak in self.A]


@dataclass
class SDPResult:
    X: list[np.ndarray]
    y: np.ndarray
    S: list[np.ndarray]
    primal_objective: float
    dual_objective: float
    iterations: int
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    history: list = field(default_factory=list, repr=False)

    @property
    def kkt_residual(self) -> float:
        return max(self.gap, self.primal_infeasibility, self.dual_infeasibility)


def _inner(U: list[np.ndarray], V: list[np.ndarray]) -> float:
    return float(sum(np.vdot(u, v) for u, v in zip(U, V)))


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _max_step(X: list[np.ndarray], dX: list[np.ndarray]) -> float:
    """Largest ``alpha`` with ``X + alpha dX`` PSD (``inf`` if unbounded)."""
    alpha = np.inf
    for Xk, dk in zip(X, dX):
        L = np.linalg.cholesky(Xk)
        Li = np.linalg.solve(L, np.eye(L.shape[0]))
        lam = np.linalg.eigvalsh(_sym(Li @ dk @ Li.T))[0]
        if lam < 0:
            alpha = min(alpha, -1.0 / lam)
    return alpha


def solve_sdp(
    prob: BlockSDP,
    opt_tol: float = 1e-8,
    feas_tol: float = 1e-8,
    max_iters: int = 200,
    step_fraction: float = 0.98,
) -> SDPResult:
    """Run the interior-point method until the relative gap and both
    infeasibilities are below tolerance.

    Raises :class:`SolverError` (with the best iterate attached) when
    ``max_iters`` is exhausted or the Schur complement breaks down.
    """
    m, n = prob.m, prob.n
    normC = np.sqrt(_inner(prob.C, prob.C))
    normA = max(np.linalg.norm(Ak.reshape(m, -1), axis=1).max() for Ak in prob.A)
    xi = max(10.0, np.sqrt(n), n * np.max(np.abs(prob.b)) / (1.0 + normA))
    eta = max(10.0, np.sqrt(n), normC, normA)
    X = [xi * np.eye(Ck.shape[0]) for Ck in prob.C]
    S = [eta * np.eye(Ck.shape[0]) for Ck in prob.C]
    y = np.zeros(m)
    normb = np.linalg.norm(prob.b)
    best = None
    history = []

    for it in range(max_iters + 1):
        rp = prob.b - prob.op(X)
        Rd = [Ck - Sk - Ak for Ck, Sk, Ak in zip(prob.C, S, prob.adj(y))]
        pobj = _inner(prob.C, X)
        dobj = float(prob.b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / (1.0 + normb)
        dinf = np.sqrt(_inner(Rd, Rd)) / (1.0 + normC)
        mu = _inner(X, S) / n
        history.append((it, pobj, dobj, gap, pinf, dinf))
        log.debug("it %3d pobj %.10e dobj %.10e gap %.2e pinf %.2e dinf %.2e", it, pobj, dobj, gap, pinf, dinf)
        score = max(gap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, [x.copy() for x in X], y.copy(), [s.copy() for s in S], gap, pinf, dinf)
        if gap <= opt_tol and pinf <= feas_tol and dinf <= feas_tol:
            return SDPResult(X, y, S, pobj, dobj, it, gap, pinf, dinf, history)
        if it == max_iters:
            break

        try:
            Sinv = []
            cols = []
            for Ak, Xk, Sk in zip(prob.A, X, S):
                Lx = np.linalg.cholesky(Xk)
                Ls = np.linalg.cholesky(Sk)
                Lsi = np.linalg.solve(Ls, np.eye(Ls.shape[0]))
                Sinv.append(Lsi.T @ Lsi)
                # M_ij = tr(A_i X A_j S^-1) = <G_i, G_j> with G_i = Ls^-1 A_i Lx
                G = np.einsum("ab,ibc,cd->iad", Lsi, Ak, Lx)
                cols.append(G.reshape(m, -1))
            # Factor M = R^T R through a QR of G^T instead of forming G G^T
            R = np.linalg.qr(np.hstack(cols).T, mode="r")
            if np.min(np.abs(np.diag(R))) <= 1e-14 * np.max(np.abs(np.diag(R))):
                raise np.linalg.LinAlgError("rank-deficient Schur complement")
        except np.linalg.LinAlgError as err:
            raise SolverError(f"Schur complement breakdown at iteration {it}: {err}",
                              best_iterate=best[2], residuals=dict(gap=best[4], pinf=best[5], dinf=best[6]),
                              iterations=it)

        def direction(K):
            # Delta X = (K - X Delta S) S^-1, Delta S = Rd - A^*(Delta y)
            G = [(Kk - Xk @ Rk) @ Sik for Kk, Xk, Rk, Sik in zip(K, X, Rd, Sinv)]
            rhs = rp - prob.op(G)
            dy = solve_triangular(R, solve_triangular(R, rhs, trans="T"))
            dS = [Rk - Ak for Rk, Ak in zip(Rd, prob.adj(dy))]
            dX = [_sym((Kk - Xk @ dSk) @ Sik) for Kk, Xk, dSk, Sik in zip(K, X, dS, Sinv)]
            return dX, dy, dS

        XS = [Xk @ Sk for Xk, Sk in zip(X, S)]
        dXa, dya, dSa = direction([-P for P in XS])
        ap = min(1.0, _max_step(X, dXa))
        ad = min(1.0, _max_step(S, dSa))
        mu_aff = _inner([Xk + ap * d for Xk, d in zip(X, dXa)], [Sk + ad * d for Sk, d in zip(S, dSa)]) / n
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        K = [sigma * mu * np.eye(P.shape[0]) - P - a @ b_ for P, a, b_ in zip(XS, dXa, dSa)]
        dX, dy, dS = direction(K)
        ap = min(1.0, step_fraction * _max_step(X, dX))
        ad = min(1.0, step_fraction * _max_step(S, dS))
        X = [Xk + ap * d for Xk, d in zip(X, dX)]
        y = y + ad * dy
        S = [Sk + ad * d for Sk, d in zip(S, dS)]

    _, Xb, yb, Sb, g, p, d_ = best
    raise SolverError(
        f"no convergence in {max_iters} iterations (gap {g:.2e}, pinf {p:.2e}, dinf {d_:.2e})",
        best_iterate=yb,
        residuals=dict(gap=g, pinf=p, dinf=d_),
        iterations=max_iters,
    )
