"""Numerical kernels shared by the location, weight and scatter modules."""
from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, ValidationError

_TINY = 1e-300


def sym(a):
    return 0.5 * (a + a.T)


def tyler_fixed_point(d, tol=1e-10, max_iter=500, weights2=None, init=None, trace=None):
    """Iterate ``S <- p * mean(w2 * d d^T / d^T S^{-1} d) / mean(w2)``.

    ``d`` holds centered rows.  With ``weights2=None`` this is Tyler's shape
    iteration.  Each sweep is rescaled to trace ``p``; the map is homogeneous
    of degree one, so the rescaling leaves its fixed-point ray unchanged.
    Rows with zero norm are dropped.  Returns ``(S, iterations, residual)``
    where ``residual`` is the relative Frobenius change of the last sweep.
    If ``trace`` is a list, the per-sweep changes are appended to it.
    """
    n, p = d.shape
    keep = np.einsum("ij,ij->i", d, d) > _TINY
    d = d[keep]
    w2 = np.ones(d.shape[0]) if weights2 is None else np.asarray(weights2, float)[keep]
    if d.shape[0] <= p or np.sum(w2 > 0) <= p:
        raise ValidationError(
            f"need more than p={p} usable rows for a shape fixed point, got {int(np.sum(w2 > 0))}"
        )
    norm = p / np.mean(w2)
    s = np.eye(p) if init is None else np.array(init, dtype=float)
    s *= p / np.trace(s)
    resid = np.inf
    for it in range(1, max_iter + 1):
        try:
            chol = np.linalg.cholesky(s)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("shape iterate lost positive definiteness (degenerate data?)") from exc
        y = np.linalg.solve(chol, d.T)
        q = np.einsum("ij,ij->j", y, y)
        c = (w2 / q)[:, None] * d
        new = norm * (c.T @ d) / d.shape[0]
        new = sym(new)
        new *= p / np.trace(new)
        resid = np.linalg.norm(new - s) / np.linalg.norm(s)
        s = new
        if trace is not None:
            trace.append(resid)
        if resid <= tol:
            return s, it, resid
    raise ConvergenceError(
        f"shape fixed point did not converge in {max_iter} iterations (residual {resid:.3g})",
        best=s,
        residual=resid,
        iterations=max_iter,
    )


def weighted_objective(x, w, q):
    return float(np.sum(w * np.linalg.norm(x - q, axis=1)))


def _anchor_gradient(x, w, k):
    """Norm of the pull on data point ``k`` from all other points, minus ``w_k``."""
    diff = x - x[k]
    dist = np.linalg.norm(diff, axis=1)
    mask = dist > 0
    r = ((w[mask] / dist[mask])[:, None] * diff[mask]).sum(axis=0)
    return float(np.linalg.norm(r)) - float(w[~mask].sum())


def _line_median(x, w):
    """Exact weighted spatial median of collinear rows via a weighted median.

    An exact half-weight tie (flat minimum) resolves to the midpoint of the
    flat segment.  Returns ``None`` unless the rows are collinear.
    """
    keep = w > 0
    xk, wk = x[keep], w[keep]
    center = xk.mean(axis=0)
    _, sv, vt = np.linalg.svd(xk - center, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return center
    if sv.size > 1 and sv[1] > 1e-12 * sv[0]:
        return None
    v = vt[0]
    t = (xk - center) @ v
    order = np.argsort(t, kind="stable")
    t, wk = t[order], wk[order]
    cum = np.cumsum(wk)
    half = 0.5 * cum[-1]
    k = int(np.searchsorted(cum, half * (1 - 1e-12)))
    if abs(cum[k] - half) <= 1e-12 * cum[-1] and k + 1 < t.size:
        m = 0.5 * (t[k] + t[k + 1])
    else:
        m = t[k]
    return center + m * v


def weiszfeld(x, w, init=None, tol=1e-9, max_iter=500, trace=None):
    """Weighted spatial median by the Vardi-Zhang modified Weiszfeld update.

    Minimizes ``sum_i w_i |x_i - q|`` for nonnegative weights ``w``.  Stops
    when the subgradient norm drops below ``tol * sum(w)``.  The data point
    nearest each iterate is tested once for the zero-subgradient condition
    ``|sum_{i != k} w_i S(x_i; x_k)| <= w_k`` and returned if it holds.  If
    ``trace`` is a list, objective values are appended.

    Collinear data (including ``p = 1``) are solved exactly by a weighted
    median, where Weiszfeld steps can stall on near-flat segments.

    Returns ``(q, iterations, gradient_norm)``.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    n, p = x.shape
    wsum = w.sum()
    if wsum <= 0:
        raise ValidationError("all weights are zero")
    scale = max(float(np.max(np.abs(x - np.median(x, axis=0)))), 1e-300)
    q = _line_median(x, w)
    if q is not None:
        if trace is not None:
            trace.append(weighted_objective(x, w, q))
        return q, 1, 0.0
    q = np.average(x, axis=0, weights=w) if init is None else np.array(init, dtype=float)
    gnorm = np.inf
    best, best_obj = q.copy(), np.inf
    tested = set()
    for it in range(1, max_iter + 1):
        diff = x - q
        dist = np.linalg.norm(diff, axis=1)
        k = int(np.argmin(dist))
        # optimality of a data point does not depend on the iterate: test each once
        if k not in tested:
            tested.add(k)
            if _anchor_gradient(x, w, k) <= tol * wsum:
                q = x[k].copy()
                diff = x - q
                dist = np.linalg.norm(diff, axis=1)
        at = dist <= 1e-10 * scale
        active = ~at & (w > 0)
        inv = np.zeros(n)
        inv[active] = w[active] / dist[active]
        r = inv @ diff
        eta = float(w[at].sum())
        rnorm = float(np.linalg.norm(r))
        gnorm = max(rnorm - eta, 0.0)
        obj = float(w @ dist)
        if trace is not None:
            trace.append(obj)
        if obj < best_obj:
            best, best_obj = q.copy(), obj
        if gnorm <= tol * wsum or inv.sum() == 0:
            return q, it, gnorm
        t = inv @ x / inv.sum()
        if eta > 0:
            lam = min(1.0, eta / rnorm)
            q = (1.0 - lam) * t + lam * q
        else:
            q = t
    raise ConvergenceError(
        f"weighted spatial median did not converge in {max_iter} iterations "
        f"(gradient norm {gnorm:.3g})",
        best=best,
        residual=gnorm,
        iterations=max_iter,
    )
