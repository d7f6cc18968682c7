"""Independent reference computations used only by the tests.

Nothing here imports the package: the dense tensor oracle works on all 2^d
entries, the exact oracle uses sympy, and the conic oracle uses cvxpy.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np


def dense_tensor(a) -> np.ndarray:
    """Full symmetric tensor with entry ``a[#ones in index]``; indices are 0/1."""
    d = len(a) - 1
    A = np.empty((2,) * d)
    for idx in itertools.product((0, 1), repeat=d):
        A[idx] = float(a[sum(idx)])
    return A


def rank_one(p: float, q: float, d: int) -> np.ndarray:
    v = np.array([p, q], dtype=float)
    out = v
    for _ in range(d - 1):
        out = np.multiply.outer(out, v)
    return out


def apply_each_mode(A: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Multilinear product ``A x_1 T x_2 T ... x_d T``."""
    out = A
    for mode in range(A.ndim):
        out = np.moveaxis(np.tensordot(T, out, axes=([1], [mode])), 0, mode)
    return out


def compress(A: np.ndarray) -> np.ndarray:
    """Read a symmetric binary tensor back into ``d + 1`` coordinates."""
    d = A.ndim
    return np.array([A[(0,) * (d - k) + (1,) * k] for k in range(d + 1)])


def brute_norm(a) -> float:
    return float(np.sqrt(np.sum(dense_tensor(a) ** 2)))


def moments(points, weights, d: int) -> np.ndarray:
    """``sum_i w_i (1, x_i, ..., x_i^d)``."""
    pts = np.asarray(points, dtype=float)
    return np.array([np.sum(np.asarray(weights) * pts**k) for k in range(d + 1)])


def transform_matrix(d: int) -> np.ndarray:
    return np.array([[comb(d - k, j - k) if j >= k else 0 for j in range(d + 1)] for k in range(d + 1)], float)


def sympy_lu(y, d: int):
    """Exact ``(l, u)`` for even ``d`` from sympy's pseudo-inverse."""
    import sympy as sp

    s = d // 2
    y = [sp.Rational(v) for v in y]
    z = sp.Matrix([y[s + 1 + i] for i in range(s)])
    M = sp.Matrix(s, s, lambda i, j: y[1 + i + j])
    l = (z.T * M.pinv() * z)[0]
    diff = [y[k] - y[k + 1] for k in range(d)]
    w = sp.Matrix([diff[s + i] for i in range(s)])
    H = sp.Matrix(s, s, lambda i, j: diff[i + j])
    u = y[2 * s] - (w.T * H.pinv() * w)[0]
    return sp.nsimplify(l), sp.nsimplify(u)


def cvxpy_nearest(a, kinds=None):
    """Reference nearest-CP distance via cvxpy; returns ``(distance, x_star)``."""
    import cvxpy as cp

    a = np.asarray(a, dtype=float)
    d = a.size - 1
    Ti = np.linalg.inv(transform_matrix(d))
    w = np.sqrt([comb(d, k) for k in range(d + 1)])
    y = cp.Variable(d + 1)

    def hank(seq, n):
        return cp.bmat([[seq[i + j] for j in range(n)] for i in range(n)])

    s = d // 2
    diff = [y[k] - y[k + 1] for k in range(d)]
    blocks = {
        "H1": lambda: hank([y[k] for k in range(2 * s + 1)], s + 1),
        "H2": lambda: hank(diff[1 : 2 * s], s),
        "H3": lambda: hank([y[k] for k in range(1, d + 1)], s + 1),
        "H4": lambda: hank(diff, s + 1),
    }
    if kinds is None:
        kinds = ("H1", "H2") if d % 2 == 0 else ("H3", "H4")
    cons = []
    for k in kinds:
        H = blocks[k]()
        cons.append(0.5 * (H + H.T) >> 0)
    prob = cp.Problem(cp.Minimize(cp.norm(cp.multiply(w, Ti @ y - a))), cons)
    prob.solve(solver="CLARABEL")
    return float(prob.value), Ti @ y.value
