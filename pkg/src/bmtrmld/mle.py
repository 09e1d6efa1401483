"""Reciprocal maximum likelihood estimation for Brownian motion tree models.

Maximises ``log det(Sigma) - trace(S^{-1} Sigma)`` over positive-definite
matrices with ``sigma_ij = t_{lca(i,j)}``.  The objective is strictly concave
in the parameters ``t`` (one per non-root vertex), so damped Newton with a
PD-preserving backtracking line search converges to the unique maximiser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import build_design_A, covariance_pattern, p_coords
from .trees import RootedTree


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@dataclass
class SampleCovariance:
    s: np.ndarray
    s_inv: np.ndarray

    @classmethod
    def from_array(cls, s) -> "SampleCovariance":
        s = np.asarray(s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError("sample covariance must be a square matrix")
        scale = max(np.abs(s).max(), 1.0)
        if np.abs(s - s.T).max() > 1e-12 * scale:
            raise ValueError("sample covariance is not symmetric")
        s = (s + s.T) / 2
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("sample covariance is not positive definite") from exc
        return cls(s, np.linalg.inv(s))

    @property
    def n(self) -> int:
        return self.s.shape[0]


def read_covariance_csv(path) -> SampleCovariance:
    """Load an n x n covariance from CSV; a non-numeric first row is treated as a header."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    rows = [ln.split(",") for ln in lines]
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    return SampleCovariance.from_array([[float(x) for x in r] for r in rows])


def indicator_matrices(t: RootedTree):
    """Symmetric 0/1 matrices ``E_v`` marking the entries with ``lca(i, j) = v``, in parameter order."""
    pattern = covariance_pattern(t)
    index = {v: k for k, v in enumerate(t.nonroot_vertices)}
    e = np.zeros((len(index), t.n, t.n))
    for (i, j), v in pattern.items():
        e[index[v], i - 1, j - 1] = e[index[v], j - 1, i - 1] = 1.0
    return e


def sigma_of(t: RootedTree, params) -> np.ndarray:
    return np.tensordot(np.asarray(params, dtype=float), indicator_matrices(t), axes=1)


def project(t: RootedTree, s: np.ndarray) -> np.ndarray:
    """Average ``s`` over each lca class; this is the Euclidean projection onto the model space."""
    e = indicator_matrices(t)
    return np.einsum("kij,ij->k", e, s) / e.sum(axis=(1, 2))


def _chol_logdet(sigma):
    try:
        c = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("Sigma(t) is not positive definite") from exc
    return 2.0 * np.log(np.diag(c)).sum()


def rloglik(t: RootedTree, params, s: SampleCovariance, _e=None) -> float:
    e = indicator_matrices(t) if _e is None else _e
    sigma = np.tensordot(np.asarray(params, dtype=float), e, axes=1)
    return _chol_logdet(sigma) - np.trace(s.s_inv @ sigma)


def rloglik_and_grad(t: RootedTree, params, s: SampleCovariance, _e=None):
    """Value and gradient; ``grad_v = trace((Sigma^{-1} - S^{-1}) E_v)``."""
    e = indicator_matrices(t) if _e is None else _e
    sigma = np.tensordot(np.asarray(params, dtype=float), e, axes=1)
    value = _chol_logdet(sigma) - np.trace(s.s_inv @ sigma)
    k = np.linalg.inv(sigma)
    grad = np.einsum("kij,ij->k", e, k - s.s_inv)
    return value, grad


def rloglik_hessian(t: RootedTree, params, _e=None) -> np.ndarray:
    """``H_uv = -trace(K E_u K E_v)``; negative definite on the PD cone."""
    e = indicator_matrices(t) if _e is None else _e
    sigma = np.tensordot(np.asarray(params, dtype=float), e, axes=1)
    k = np.linalg.inv(sigma)
    ke = np.einsum("ij,kjl->kil", k, e)
    return -np.einsum("aij,bji->ab", ke, ke)


@dataclass
class ModelFit:
    tree: RootedTree
    t: dict
    sigma: np.ndarray
    k: np.ndarray
    objective: float
    residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.t[v] for v in self.tree.nonroot_vertices])

    def to_dict(self) -> dict:
        return {
            "tree": self.tree.newick(),
            "t": {str(v): x for v, x in self.t.items()},
            "sigma": self.sigma.tolist(),
            "objective": self.objective,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _is_pd(sigma) -> bool:
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        return False
    return True


def initial_params(t: RootedTree, s: SampleCovariance) -> np.ndarray:
    """Class-average projection of S, falling back to its diagonal and then to a scaled identity."""
    e = indicator_matrices(t)
    x = project(t, s.s)
    if _is_pd(np.tensordot(x, e, axes=1)):
        return x
    leaves = set(range(1, t.n + 1))
    x = np.array([s.s[v - 1, v - 1] if v in leaves else 0.0 for v in t.nonroot_vertices])
    if _is_pd(np.tensordot(x, e, axes=1)):
        return x
    scale = np.trace(s.s) / t.n
    return np.array([scale if v in leaves else 0.0 for v in t.nonroot_vertices])


def newton_fit(
    t: RootedTree,
    s: SampleCovariance,
    tol: float = 1e-10,
    max_iter: int = 100,
    init=None,
) -> ModelFit:
    """Maximise the reciprocal log-likelihood by damped Newton.

    Stops when the gradient's infinity norm is at most ``tol``.  On
    non-convergence the best iterate is returned with ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if s.n != t.n:
        raise ValueError(f"covariance is {s.n} x {s.n} but the tree has {t.n} non-root leaves")
    e = indicator_matrices(t)
    x = initial_params(t, s) if init is None else np.asarray(init, dtype=float).copy()
    if not _is_pd(np.tensordot(x, e, axes=1)):
        raise NotPositiveDefiniteError("initial parameters give a non-PD Sigma")
    value, grad = rloglik_and_grad(t, x, s, e)
    history = [value]
    it = 0
    converged = np.abs(grad).max() <= tol
    while not converged and it < max_iter:
        it += 1
        h = rloglik_hessian(t, x, e)
        step = np.linalg.solve(-h, grad)
        slope = grad @ step
        alpha = 1.0
        accepted = False
        while alpha > 1e-12:
            cand = x + alpha * step
            sigma = np.tensordot(cand, e, axes=1)
            if _is_pd(sigma):
                v_new, g_new = rloglik_and_grad(t, cand, s, e)
                if v_new >= value + 1e-4 * alpha * slope:
                    accepted = True
                    break
                # increase below rounding level: accept if the gradient still shrinks
                if slope < 1e-12 * (1 + abs(value)) and v_new >= value - 1e-13 * (1 + abs(value)) and np.abs(g_new).max() < np.abs(grad).max():
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            break
        x, value, grad = cand, v_new, g_new
        history.append(value)
        converged = np.abs(grad).max() <= tol
    sigma = np.tensordot(x, e, axes=1)
    k = np.linalg.inv(sigma)
    fit = ModelFit(
        tree=t,
        t={v: float(xv) for v, xv in zip(t.nonroot_vertices, x)},
        sigma=sigma,
        k=k,
        objective=float(rloglik(t, x, s, e)),
        residual=float(np.abs(grad).max()),
        iterations=it,
        converged=bool(converged),
        history=history,
    )
    fit.residual = stationarity_residual(fit, s)
    return fit


def stationarity_residuals(fit: ModelFit, s: SampleCovariance):
    """Stationarity residual computed two ways.

    ``trace_form = max_v |trace((K - S^{-1}) E_v)|``.  ``pair_form`` evaluates
    the same conditions as ``A_T p(K) - A_T p(S^{-1})``; in pair coordinates
    each off-diagonal pair is counted once, while the trace pairing counts it
    twice, so rows of internal vertices are doubled before taking the norm.
    """
    t = fit.tree
    e = indicator_matrices(t)
    trace_form = float(np.abs(np.einsum("kij,ij->k", e, fit.k - s.s_inv)).max())
    a = np.array([[float(x) for x in row] for row in build_design_A(t).entries])
    diff = p_coords((fit.k - s.s_inv).tolist())
    pvec = np.array(diff.vector())
    weights = np.array([1.0 if t.is_leaf(v) else 2.0 for v in t.nonroot_vertices])
    pair_form = float(np.abs(weights * (a @ pvec)).max())
    return trace_form, pair_form


def stationarity_residual(fit: ModelFit, s: SampleCovariance, atol: float = 1e-9) -> float:
    trace_form, pair_form = stationarity_residuals(fit, s)
    if abs(trace_form - pair_form) > atol * max(1.0, trace_form):
        raise AssertionError(f"residual forms disagree: {trace_form} vs {pair_form}")
    return trace_form


def fit_at(t: RootedTree, params, s: SampleCovariance) -> ModelFit:
    """Wrap arbitrary PD parameters as a :class:`ModelFit` (no optimisation)."""
    x = np.asarray(params, dtype=float)
    sigma = sigma_of(t, x)
    fit = ModelFit(t, {v: float(xv) for v, xv in zip(t.nonroot_vertices, x)}, sigma, np.linalg.inv(sigma), float(rloglik(t, x, s)), float("nan"), 0, False)
    fit.residual = stationarity_residual(fit, s)
    return fit


def random_model_params(t: RootedTree, rng) -> np.ndarray:
    """Parameters of a PD model covariance: ``t_v`` is the root distance of ``v`` for random positive edge lengths."""
    lengths = {v: rng.uniform(0.2, 2.0) for v in t.nonroot_vertices}
    out = []
    for v in t.nonroot_vertices:
        total = 0.0
        u = v
        while u != 0:
            total += lengths[u]
            u = t.parent[u]
        out.append(total)
    return np.array(out)


def random_covariance(n: int, rng, dof=None) -> SampleCovariance:
    dof = 2 * n if dof is None else dof
    x = rng.normal(size=(n, dof))
    return SampleCovariance.from_array(x @ x.T / dof)
