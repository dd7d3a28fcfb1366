"""Laplacian spectra, the averaging matrix, and the entropy-weight solve.

The dense eigensolver is a cyclic Jacobi method with round-robin (parallel)
ordering: every round rotates n/2 disjoint index pairs at once, so a sweep is
n - 1 vectorized rounds.  LAPACK (``numpy.linalg.eigh``) is available as an
alternative backend and is used by default above ``JACOBI_MAX_N`` nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, node_levels

LOG2 = math.log(2.0)
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
JACOBI_MAX_N = 256
CG_TOL = 1e-10


class EigenError(RuntimeError):
    pass


def laplacian(g: Graph) -> np.ndarray:
    """Dense combinatorial Laplacian ``D - A``."""
    L = np.zeros((g.n, g.n))
    np.add.at(L, (g.ei, g.ej), -1.0)
    np.add.at(L, (g.ej, g.ei), -1.0)
    L[np.diag_indices(g.n)] = g.degrees
    return L


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.int64), np.array(q, dtype=np.int64)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Converged when the off-diagonal Frobenius norm is at most
    ``tol * ||m||_F``.  Returns ``(eigenvalues, eigenvectors)`` unsorted.
    """
    A = np.array(m, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        # direct sum: subtracting the diagonal from the full norm cancels badly
        off = math.sqrt(np.sum(A * A, where=~np.eye(n, dtype=bool)))
        if off <= tol * scale:
            return A.diagonal().copy(), V
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            at = np.abs(theta)
            # for huge |theta| use t ~ 1/(2 theta) to avoid overflowing theta**2
            root = np.where(at < 1e150, np.sqrt(np.minimum(at, 1e150) ** 2 + 1.0), at)
            t = np.where(theta >= 0, 1.0, -1.0) / (at + root)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            colP, colQ = A[:, P], A[:, Q]
            A[:, P] = c * colP - s * colQ
            A[:, Q] = s * colP + c * colQ
            rowP, rowQ = A[P, :], A[Q, :]
            A[P, :] = c[:, None] * rowP - s[:, None] * rowQ
            A[Q, :] = s[:, None] * rowP + c[:, None] * rowQ
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vP, vQ = V[:, P], V[:, Q]
            V[:, P] = c * vP - s * vQ
            V[:, Q] = s * vP + c * vQ
    raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps")


def eigen_symmetric(m: np.ndarray, method: str = "jacobi"):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    ``method`` is ``"jacobi"`` or ``"lapack"``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    if method == "jacobi":
        w, V = jacobi_eigh(0.5 * (m + m.T))
    elif method == "lapack":
        w, V = np.linalg.eigh(0.5 * (m + m.T))
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def averaging_matrix(g: Graph) -> np.ndarray:
    """One-step expectation operator ``I - L / (2|E|)``."""
    return np.eye(g.n) - laplacian(g) / (2.0 * g.m)


def expected_state(g: Graph, v0, t: int) -> np.ndarray:
    """``M^t v0`` by repeated multiplication."""
    if t < 0:
        raise ValueError("t must be non-negative")
    v = np.array(getattr(v0, "values", v0), dtype=np.float64, copy=True)
    if t == 0:
        return v
    M = averaging_matrix(g)
    for _ in range(t):
        v = M @ v
    return v


def delocalization(v) -> float:
    """``||v||_1 / (sqrt(n) ||v||_2)``, in (0, 1]."""
    v = np.asarray(v, dtype=np.float64)
    l2 = np.linalg.norm(v)
    if l2 == 0.0:
        raise ValueError("delocalization of the zero vector is undefined")
    return float(np.sum(np.abs(v)) / (math.sqrt(v.size) * l2))


def _orient(u: np.ndarray) -> np.ndarray:
    big = np.abs(u) > 1e-10 * np.max(np.abs(u))
    first = int(np.argmax(big))
    return -u if u[first] < 0 else u


def beta_rhs(g: Graph) -> np.ndarray:
    d = g.degrees.astype(np.float64)
    return 2.0 * LOG2 * (d - d.mean())


def _cg_zero_mean(L: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    n = len(b)
    x = np.zeros(n)
    r = b - b.mean()
    target = tol * max(1.0, np.max(np.abs(b)))
    p = r.copy()
    rs = r @ r
    for _ in range(20 * n + 100):
        if np.max(np.abs(r)) <= target:
            break
        Ap = L @ p
        alpha = rs / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        r -= r.mean()
        rs_new = r @ r
        p = r + (rs_new / rs) * p
        rs = rs_new
    x -= x.mean()
    resid = np.max(np.abs(L @ x - b))
    if resid > target * 100:
        raise EigenError(f"conjugate gradient stalled at residual {resid:.3e}")
    return x


def solve_beta(g: Graph, method: str = "cg", eig=None) -> np.ndarray:
    """Entropy-weight vector: solves ``L beta = 2 ln 2 (d - mean(d))``.

    The solution is taken in the zero-mean subspace and then shifted so its
    minimum entry is exactly 0.  ``method`` is ``"cg"`` (conjugate gradient
    restricted to the complement of the constant vector) or ``"pinv"``
    (pseudo-inverse from an eigen-decomposition; pass ``eig=(w, V)`` to reuse
    one).
    """
    L = laplacian(g)
    b = beta_rhs(g)
    if not np.any(b):
        return np.zeros(g.n)
    if method == "cg":
        x = _cg_zero_mean(L, b, CG_TOL)
    elif method == "pinv":
        w, V = eig if eig is not None else eigen_symmetric(L, _default_method(g.n))
        coef = V[:, 1:].T @ b / w[1:]
        x = V[:, 1:] @ coef
        # one step of iterative refinement
        r = b - L @ x
        x += V[:, 1:] @ ((V[:, 1:].T @ r) / w[1:])
    else:
        raise ValueError(f"unknown beta method {method!r}")
    return x - x.min()


def _default_method(n: int) -> str:
    return "jacobi" if n <= JACOBI_MAX_N else "lapack"


def closed_form_lambda2(g: Graph) -> float | None:
    """Known second Laplacian eigenvalue for named families, else None."""
    fam = g.family
    n = g.n
    if fam == "complete":
        return float(n)
    if fam == "cycle":
        return 2.0 - 2.0 * math.cos(2.0 * math.pi / n)
    if fam == "path":
        return 2.0 - 2.0 * math.cos(math.pi / n)
    if fam == "star":
        return 1.0 if n >= 3 else 2.0
    if fam == "bipartite":
        a, b = (int(x) for x in g.name.split(":")[1].split(","))
        return float(min(a, b)) if a + b > 2 else 2.0
    return None


@dataclass
class SpectralSummary:
    n: int
    m: int
    eigenvalues: np.ndarray
    lambda2: float
    gamma: float
    fiedler: np.ndarray
    delta: float
    beta: np.ndarray
    C: float
    beta_residual: float
    lambda2_closed_form: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": self.m,
            "lambda2": self.lambda2,
            "gamma": self.gamma,
            "delta": self.delta,
            "beta_max": float(self.beta.max()),
            "beta_residual": self.beta_residual,
        }


def spectral_summary(g: Graph, method: str | None = None) -> SpectralSummary:
    """λ₂, γ = |E|/λ₂, Fiedler vector, its delocalization and the entropy weights."""
    L = laplacian(g)
    w, V = eigen_symmetric(L, method or _default_method(g.n))
    lam2 = float(w[1])
    if lam2 <= 1e-10:
        raise EigenError("graph Laplacian has a repeated zero eigenvalue")
    u = V[:, 1] - V[:, 1].mean()
    u = _orient(u / np.linalg.norm(u))
    beta = solve_beta(g, "pinv", eig=(w, V))
    resid = float(np.max(np.abs(L @ beta - beta_rhs(g))))
    return SpectralSummary(
        n=g.n,
        m=g.m,
        eigenvalues=w,
        lambda2=lam2,
        gamma=g.m / lam2,
        fiedler=u,
        delta=delocalization(u),
        beta=beta,
        C=LOG2,
        beta_residual=resid,
        lambda2_closed_form=closed_form_lambda2(g),
    )


def btree_level_expectations(n: int, t: int) -> np.ndarray:
    """Expected value per depth of the left subtree of ``btree:n`` started
    from the signed split ``(0, +1.., -1..)/sqrt(n-1)``.

    Row ``s`` of the result holds depths ``1..k-1`` at step ``s``.  The
    root stays at 0 by antisymmetry; a node moves half of its gap to the
    chosen neighbor, and each edge is picked with probability ``1/(n-1)``.
    """
    k = int(round(math.log2(n + 1)))
    if 2 ** k - 1 != n or k < 2:
        raise ValueError("n must be 2**k - 1 with k >= 2")
    m = n - 1
    depth = k - 1
    lv = np.full(depth, 1.0 / math.sqrt(m))
    out = np.empty((t + 1, depth))
    out[0] = lv
    up, down = 1.0 / (2 * m), 1.0 / m
    for s in range(1, t + 1):
        parent = np.concatenate(([0.0], lv[:-1]))
        child = np.concatenate((lv[1:], [0.0]))
        nxt = up * parent + down * child + (1.0 - 3.0 * up) * lv
        nxt[-1] = up * parent[-1] + (1.0 - up) * lv[-1]
        lv = nxt
        out[s] = lv
    return out


def btree_left_depths(g: Graph) -> np.ndarray:
    """Depths of left-subtree nodes ``1..(n-1)/2`` of a ``btree`` graph."""
    return node_levels(g)[1 : (g.n - 1) // 2 + 1]
