"""Geometric primitives: simplex-constrained projection onto a point set's
convex hull, pairwise distances, diameters, and an exact 2D hull oracle.

The central operation is :func:`hull_distance`: the minimum Euclidean
distance from a query vector to any convex combination of a candidate set,
solved as a quadratic program over the probability simplex. The solver is a
conditional-gradient method with away steps and exact line search; its
per-iteration cost is independent of the ambient dimension beyond one
matrix-vector product, and it returns a certified optimality gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PointSet",
    "SimplexWeights",
    "ProjectionResult",
    "SolverConfig",
    "BatchProjection",
    "ConvergenceError",
    "hull_distance",
    "project_many",
    "is_inside",
    "inside_mask",
    "pairwise_distance",
    "exact_extremes_2d",
    "diameter",
    "union_diameter",
]

_TINY = 1e-300


class ConvergenceError(RuntimeError):
    """Raised when the projection solver exhausts its iteration budget.

    Carries the best-so-far result(s) in ``.result`` so callers can decide
    whether the partial answer is usable.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


def _as_matrix(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D point matrix, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PointSet:
    """An immutable n x d matrix of points, the universe a hull is built over."""

    points: np.ndarray

    def __post_init__(self):
        arr = _as_matrix(self.points)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"point set must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point set contains non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class SimplexWeights:
    """Nonnegative weights summing to one (tolerance 1e-9 absolute)."""

    alpha: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.alpha, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ValueError("weight vector is empty")
        if np.any(arr < 0):
            raise ValueError("weights must be nonnegative")
        if abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {arr.sum()!r}, expected 1 within 1e-9")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)


@dataclass(frozen=True)
class ProjectionResult:
    """Output of one hull-distance solve.

    ``solver_gap`` is the certified relative optimality gap
    ``(distance - lower_bound) / scale`` where ``scale`` is the largest
    query-to-candidate distance; at most ``gap_tol`` on successful return.
    """

    weights: SimplexWeights
    nearest_point: np.ndarray
    distance: float
    solver_gap: float
    iterations: int


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs for the simplex projection solver.

    gap_tol: relative optimality-gap tolerance for termination.
    zero_tol: distance-is-zero threshold, as a fraction of dataset diameter.
    max_iters: iteration cap; None means 10*m + 1000 for m candidates.
    """

    gap_tol: float = 1e-8
    zero_tol: float = 1e-7
    max_iters: int | None = None

    def __post_init__(self):
        if not (0 < self.gap_tol < 1):
            raise ValueError(f"gap_tol must be in (0, 1), got {self.gap_tol}")
        if self.zero_tol <= 0:
            raise ValueError(f"zero_tol must be positive, got {self.zero_tol}")
        if self.max_iters is not None and self.max_iters <= 0:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")

    def iteration_cap(self, m: int) -> int:
        return self.max_iters if self.max_iters is not None else 10 * m + 1000


@dataclass
class BatchProjection:
    """Vectorized projection of many queries onto one candidate hull."""

    alpha: np.ndarray        # (q, m) simplex weights per query
    nearest: np.ndarray      # (q, d)
    distance: np.ndarray     # (q,)
    gap: np.ndarray          # (q,) relative certified gap
    converged: np.ndarray    # (q,) bool
    iterations: int = 0
    solve_count: int = 0

    def result(self, i: int = 0) -> ProjectionResult:
        return ProjectionResult(
            weights=SimplexWeights(self.alpha[i]),
            nearest_point=self.nearest[i].copy(),
            distance=float(self.distance[i]),
            solver_gap=float(self.gap[i]),
            iterations=self.iterations,
        )


def _check_dims(v_dim: int, x_dim: int):
    if v_dim != x_dim:
        raise ValueError(f"dimension mismatch: query has d={v_dim}, candidates have d={x_dim}")


def _affine_min(Zs):
    """Weights of the min-norm point in the affine hull of the rows of Zs."""
    k = Zs.shape[0]
    K = np.empty((k + 1, k + 1))
    K[:k, :k] = Zs @ Zs.T
    K[k, :k] = 1.0
    K[:k, k] = 1.0
    K[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        beta = np.linalg.solve(K, rhs)[:k]
    except np.linalg.LinAlgError:
        beta = None
    if beta is None or not np.all(np.isfinite(beta)):
        beta = np.linalg.lstsq(K, rhs, rcond=None)[0][:k]
    return beta


def _mnp_polish(Z, alpha, gap_tol, scale, forbid, max_cycles):
    """Wolfe-style minimum-norm-point refinement for one query.

    ``Z`` holds candidates centered at the query, so the target is the
    minimum-norm point of conv(Z). Finite-terminating active-set endgame for
    queries the conditional-gradient sweep leaves zigzagging near the
    tolerance. Returns (alpha, cycles, converged).
    """
    m = Z.shape[0]
    support = np.flatnonzero(alpha > 0)
    a = alpha[support].copy()
    a /= a.sum()

    def minor(support, a):
        # Shrink to a corral: a support whose affine minimizer is feasible.
        while True:
            beta = _affine_min(Z[support])
            if beta.min() >= -1e-12:
                a = np.maximum(beta, 0.0)
                a /= a.sum()
                return support, a, True
            neg = beta <= 1e-14
            theta = float(np.min(a[neg] / np.maximum(a[neg] - beta[neg], _TINY)))
            if not np.isfinite(theta) or theta <= 1e-15:
                return support, a, False
            a = (1.0 - theta) * a + theta * beta
            keep = a > 1e-14
            if np.all(keep):
                keep[int(np.argmin(a))] = False
            support, a = support[keep], a[keep]
            a /= a.sum()

    support, a, _ = minor(support, a)
    p = a @ Z[support]
    cycles = 0
    converged = False
    for _ in range(max_cycles):
        cycles += 1
        g = Z @ p
        if forbid >= 0:
            g[forbid] = np.inf
        j = int(np.argmin(g))
        pp = float(p @ p)
        gap = pp - float(g[j])
        dist = np.sqrt(max(pp, 0.0))
        lower = np.sqrt(max(pp - 2.0 * gap, 0.0))
        if dist - lower <= gap_tol * scale:
            converged = True
            break
        pos = np.flatnonzero(support == j)
        if pos.size == 0:
            support = np.append(support, j)
            a = np.append(a, 0.0)
            pos_j = a.shape[0] - 1
        else:
            pos_j = int(pos[0])
        support2, a2, ok = minor(support, a)
        if ok:
            support, a = support2, a2
        else:
            # Degenerate solve: fall back to an exact-line-search step
            # toward the improving vertex, which always decreases f.
            zj = Z[j]
            dvec = zj - p
            denom = float(dvec @ dvec)
            gamma = min(max(-float(p @ dvec) / max(denom, _TINY), 0.0), 1.0)
            a = a * (1.0 - gamma)
            a[pos_j] += gamma
            keep = a > 1e-15
            support, a = support[keep], a[keep]
            a /= a.sum()
        p = a @ Z[support]
    out = np.zeros(m)
    out[support] = a
    return out, cycles, converged


def project_many(
    queries,
    candidates,
    cfg: SolverConfig | None = None,
    *,
    forbidden: np.ndarray | None = None,
    warm_alpha: np.ndarray | None = None,
    raise_on_fail: bool = True,
) -> BatchProjection:
    """Project each query row onto the convex hull of the candidate rows.

    All queries share the candidate set, so the whole batch advances in lock
    step with matrix operations. ``forbidden[i] = j`` excludes candidate j
    from query i's combination (-1 for no exclusion), which is how
    leave-one-out and self-exclusion audits avoid rebuilding candidate sets.
    ``warm_alpha`` seeds the iteration with a previous weight matrix.

    Raises ConvergenceError when some query misses ``gap_tol`` within the
    iteration cap (unless ``raise_on_fail`` is False, in which case the
    per-query ``converged`` flags report the failures).
    """
    cfg = cfg or SolverConfig()
    X = candidates.points if isinstance(candidates, PointSet) else _as_matrix(candidates)
    V = _as_matrix(queries)
    _check_dims(V.shape[1], X.shape[1])
    if not np.all(np.isfinite(V)):
        raise ValueError("query contains non-finite entries")
    q, d = V.shape
    m = X.shape[0]

    if forbidden is not None:
        forbidden = np.asarray(forbidden, dtype=np.int64).reshape(-1)
        if forbidden.shape[0] != q:
            raise ValueError("forbidden must have one entry per query")
        if m == 1 and np.any(forbidden == 0):
            raise ValueError("cannot forbid the only candidate")

    # Center on the candidate mean: all arithmetic then happens at the
    # candidate cloud's own scale, which keeps the achievable distance floor
    # near machine precision even when the data sits far from the origin.
    mu = X.mean(axis=0)
    Xc = X - mu
    Vc = V - mu

    rows = np.arange(q)
    d2 = (
        np.einsum("ij,ij->i", Vc, Vc)[:, None]
        - 2.0 * (Vc @ Xc.T)
        + np.einsum("ij,ij->i", Xc, Xc)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    if forbidden is not None:
        live = forbidden >= 0
        d2[rows[live], forbidden[live]] = np.inf
    finite_d2 = np.where(np.isfinite(d2), d2, 0.0)
    scale = np.sqrt(finite_d2.max(axis=1))
    scale = np.maximum(scale, _TINY)

    if warm_alpha is not None:
        alpha = np.array(warm_alpha, dtype=np.float64)
        if alpha.shape != (q, m):
            raise ValueError(f"warm_alpha must have shape {(q, m)}, got {alpha.shape}")
        np.maximum(alpha, 0.0, out=alpha)
        if forbidden is not None:
            alpha[rows[live], forbidden[live]] = 0.0
        sums = alpha.sum(axis=1)
        dead = sums <= 0
        alpha[~dead] /= sums[~dead, None]
        if np.any(dead):
            j0 = np.argmin(d2[dead], axis=1)
            alpha[dead] = 0.0
            alpha[rows[dead], j0] = 1.0
    else:
        alpha = np.zeros((q, m))
        alpha[rows, np.argmin(d2, axis=1)] = 1.0

    if m == 1:
        nearest = np.broadcast_to(X[0], V.shape).copy()
        dist = np.linalg.norm(V - nearest, axis=1)
        return BatchProjection(
            alpha=np.ones((q, 1)),
            nearest=nearest,
            distance=dist,
            gap=np.zeros(q),
            converged=np.ones(q, dtype=bool),
            iterations=0,
            solve_count=q,
        )

    xhat = alpha @ Xc
    max_iters = cfg.iteration_cap(m)
    converged = np.zeros(q, dtype=bool)
    neg_inf = -np.inf
    iters_done = 0
    use_sweep = q > 4  # tiny batches go straight to the active-set solver

    def _polish(ids, alphas, forb):
        """Hand stubborn queries to the finite active-set endgame."""
        cycles = 0
        for pos, qi in enumerate(ids):
            fb = -1 if forb is None else int(forb[pos])
            Zq = Xc - Vc[qi]
            new_alpha, used, _ = _mnp_polish(
                Zq, alphas[pos], cfg.gap_tol, scale[qi], fb, max_cycles=4 * m + 64
            )
            alpha[qi] = new_alpha
            cycles = max(cycles, used)
        return cycles

    # Active-subset compaction: all per-query state lives in arrays indexed
    # by `act`; converged queries are dropped from the working set at
    # checkpoints, and a dwindling tail is peeled off to the exact
    # active-set endgame so stragglers cannot stall the whole batch.
    act = np.arange(q)
    a_alpha, a_xhat, a_V = alpha, xhat, Vc
    a_scale = scale
    a_forb = forbidden
    peel_threshold = max(4, q // 8)
    # Small candidate sets are the active-set endgame's best case, so hand
    # over early; big ones amortize better in the vectorized sweep.
    peel_all_at = int(min(512, max(64, 4 * m)))

    if not use_sweep:
        iters_done = _polish(act, alpha, forbidden)
        act = act[:0]
        max_iters = 0

    for it in range(max_iters):
        iters_done = it + 1
        r = a_xhat - a_V
        f = 0.5 * np.einsum("ij,ij->i", r, r)
        G = r @ Xc.T
        if a_forb is not None:
            sel = a_forb >= 0
            G[np.arange(G.shape[0])[sel], a_forb[sel]] = np.inf

        ar = np.arange(G.shape[0])
        i_fw = np.argmin(G, axis=1)
        g_dot_a = np.einsum("ij,ij->i", np.where(np.isfinite(G), G, 0.0), a_alpha)
        gap_fw = g_dot_a - G[ar, i_fw]

        dist = np.sqrt(2.0 * f)
        lower = np.sqrt(2.0 * np.maximum(f - gap_fw, 0.0))
        # Slightly tighter than gap_tol so the exact recompute at the end
        # cannot push a converged query back over the line.
        ok = (dist - lower) <= 0.9 * cfg.gap_tol * a_scale

        if np.any(ok):
            done_ids = act[ok]
            alpha[done_ids] = a_alpha[ok]
            xhat[done_ids] = a_xhat[ok]
            converged[done_ids] = True
            keep = ~ok
            if not np.any(keep):
                break
            act = act[keep]
            a_alpha = a_alpha[keep]
            a_xhat = a_xhat[keep]
            a_V = a_V[keep]
            a_scale = a_scale[keep]
            if a_forb is not None:
                a_forb = a_forb[keep]
            r, G = r[keep], G[keep]
            ar = np.arange(G.shape[0])
            i_fw, gap_fw = i_fw[keep], gap_fw[keep]

        G_act = np.where(a_alpha > 0, G, neg_inf)
        j_aw = np.argmax(G_act, axis=1)
        gap_aw = G_act[ar, j_aw] - np.einsum(
            "ij,ij->i", np.where(np.isfinite(G), G, 0.0), a_alpha
        )
        use_fw = gap_fw >= gap_aw

        idx = np.where(use_fw, i_fw, j_aw)
        z = np.where(use_fw[:, None], Xc[i_fw] - a_xhat, a_xhat - Xc[j_aw])
        aj = a_alpha[ar, j_aw]
        gamma_max = np.where(use_fw, 1.0, aj / np.maximum(1.0 - aj, _TINY))

        denom = np.einsum("ij,ij->i", z, z)
        numer = -np.einsum("ij,ij->i", r, z)
        gamma = np.clip(numer / np.maximum(denom, _TINY), 0.0, gamma_max)

        c1 = np.where(use_fw, 1.0 - gamma, 1.0 + gamma)
        c2 = np.where(use_fw, gamma, -gamma)
        a_alpha *= c1[:, None]
        a_alpha[ar, idx] += c2
        drop = (~use_fw) & (gamma >= gamma_max)
        a_alpha[ar[drop], idx[drop]] = 0.0
        np.maximum(a_alpha, 0.0, out=a_alpha)
        a_xhat += gamma[:, None] * z

        if (it + 1) % 32 == 0:
            # Kill float drift: renormalize weights and rebuild the image.
            sums = a_alpha.sum(axis=1)
            a_alpha /= np.maximum(sums, _TINY)[:, None]
            a_xhat = a_alpha @ Xc
            # Near-zero distances mean an interior optimum, the sweep's
            # worst regime and the endgame's best; small tails likewise.
            if act.shape[0] <= peel_threshold or it + 1 >= peel_all_at:
                iters_done += _polish(act, a_alpha, a_forb)
                act = act[:0]
                break
            cur = np.linalg.norm(a_xhat - a_V, axis=1)
            interior = cur <= 2e-3 * a_scale
            if np.any(interior):
                ids = act[interior]
                iters_done += _polish(ids, a_alpha[interior], None if a_forb is None else a_forb[interior])
                converged[ids] = True
                keep = ~interior
                act = act[keep]
                a_alpha = a_alpha[keep]
                a_xhat = a_xhat[keep]
                a_V = a_V[keep]
                a_scale = a_scale[keep]
                if a_forb is not None:
                    a_forb = a_forb[keep]
                if act.shape[0] == 0:
                    break
    else:
        # budget exhausted on the sweep: give the stragglers the exact
        # endgame before judging convergence
        if act.shape[0]:
            iters_done += _polish(act, a_alpha, a_forb)
            act = act[:0]

    # Final exact recompute from the weights so the reported distance, point
    # and certificate are mutually consistent.
    sums = alpha.sum(axis=1)
    alpha /= np.maximum(sums, _TINY)[:, None]
    xhat = alpha @ Xc
    r = xhat - Vc
    f = 0.5 * np.einsum("ij,ij->i", r, r)
    G = r @ Xc.T
    if forbidden is not None:
        sel = forbidden >= 0
        G[rows[sel], forbidden[sel]] = np.inf
    gap_fw = np.einsum("ij,ij->i", np.where(np.isfinite(G), G, 0.0), alpha) - G.min(axis=1)
    dist = np.sqrt(2.0 * f)
    lower = np.sqrt(2.0 * np.maximum(f - gap_fw, 0.0))
    rel_gap = (dist - lower) / scale
    converged = rel_gap <= cfg.gap_tol

    out = BatchProjection(
        alpha=alpha,
        nearest=xhat + mu,
        distance=dist,
        gap=np.maximum(rel_gap, 0.0),
        converged=converged,
        iterations=iters_done,
        solve_count=q,
    )
    if raise_on_fail and not np.all(converged):
        bad = int(np.flatnonzero(~converged)[0])
        raise ConvergenceError(
            f"projection failed to reach gap_tol={cfg.gap_tol} within "
            f"{max_iters} iterations for {int((~converged).sum())} of {q} queries "
            f"(first failing query {bad}, gap {out.gap[bad]:.3e})",
            result=out,
        )
    return out


def hull_distance(v, candidates, cfg: SolverConfig | None = None,
                  warm: SimplexWeights | None = None) -> ProjectionResult:
    """Distance from ``v`` to the convex hull of ``candidates``.

    Solves min_alpha ||v - sum_i alpha_i x_i||_2 subject to alpha >= 0,
    sum alpha = 1, and returns the optimal weights, the nearest hull point,
    the distance, and a certified relative optimality gap.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    warm_alpha = None
    if warm is not None:
        X = candidates.points if isinstance(candidates, PointSet) else _as_matrix(candidates)
        if warm.alpha.shape[0] == X.shape[0]:
            warm_alpha = warm.alpha.reshape(1, -1)
    batch = project_many(v.reshape(1, -1), candidates, cfg, warm_alpha=warm_alpha)
    return batch.result(0)


def union_diameter(candidates, v=None) -> float:
    """Diameter of candidates plus an optional extra point.

    Exploits max-over-pairs structure: the diameter of the union is the
    candidate diameter or the farthest candidate from ``v``.
    """
    X = candidates.points if isinstance(candidates, PointSet) else _as_matrix(candidates)
    dia = diameter(X)
    if v is None:
        return dia
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    _check_dims(v.shape[0], X.shape[1])
    return max(dia, float(np.sqrt(np.max(np.sum((X - v) ** 2, axis=1)))))


def is_inside(v, candidates, cfg: SolverConfig | None = None) -> bool:
    """Whether ``v`` lies in the hull of ``candidates``, up to the zero threshold.

    True iff hull_distance(v, candidates) <= zero_tol * diameter(candidates + {v});
    this same thresholded test realizes every exact "distance == 0" check in
    the hull-construction loops.
    """
    cfg = cfg or SolverConfig()
    X = candidates.points if isinstance(candidates, PointSet) else _as_matrix(candidates)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    _check_dims(v.shape[0], X.shape[1])
    thresh = cfg.zero_tol * union_diameter(X, v)
    # Membership shortcut: distance to the hull never exceeds the distance
    # to the nearest candidate.
    nearest = float(np.sqrt(np.min(np.sum((X - v) ** 2, axis=1))))
    if nearest <= thresh:
        return True
    return hull_distance(v, X, cfg).distance <= thresh


def inside_mask(queries, candidates, cfg: SolverConfig | None = None,
                *, forbidden: np.ndarray | None = None,
                raise_on_fail: bool = True) -> tuple[np.ndarray, BatchProjection]:
    """Vectorized is_inside for many queries against one candidate set.

    Returns (mask, batch); mask[i] uses the per-query union diameter so the
    threshold matches what one-at-a-time is_inside calls would use.
    """
    cfg = cfg or SolverConfig()
    X = candidates.points if isinstance(candidates, PointSet) else _as_matrix(candidates)
    V = _as_matrix(queries)
    batch = project_many(V, X, cfg, forbidden=forbidden, raise_on_fail=raise_on_fail)
    dia = diameter(X)
    far = np.sqrt(
        np.maximum(
            np.einsum("ij,ij->i", V, V)[:, None]
            - 2.0 * (V @ X.T)
            + np.einsum("ij,ij->i", X, X)[None, :],
            0.0,
        ).max(axis=1)
    )
    thresh = cfg.zero_tol * np.maximum(dia, far)
    return batch.distance <= thresh, batch


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two equal-dimension vectors."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    _check_dims(a.shape[0], b.shape[0])
    return float(np.linalg.norm(a - b))


_EXACT_DIAMETER_LIMIT = 2000


def diameter(points) -> float:
    """Max pairwise distance; exact up to 2000 points.

    Above 2000 points a two-sweep farthest-point pass is used, which is a
    lower bound on the true diameter (within a factor of sqrt(3) in theory,
    nearly exact on real data); the crossover is documented here because the
    value feeds relative tolerances rather than reported geometry.
    """
    X = points.points if isinstance(points, PointSet) else _as_matrix(points)
    n = X.shape[0]
    if n == 1:
        return 0.0
    if n <= _EXACT_DIAMETER_LIMIT:
        sq = np.einsum("ij,ij->i", X, X)
        d2 = sq[:, None] - 2.0 * (X @ X.T) + sq[None, :]
        return float(np.sqrt(max(d2.max(), 0.0)))
    a = int(np.argmax(np.sum((X - X[0]) ** 2, axis=1)))
    b = int(np.argmax(np.sum((X - X[a]) ** 2, axis=1)))
    return float(np.linalg.norm(X[a] - X[b]))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def exact_extremes_2d(points) -> set[int]:
    """Indices of the strictly extreme points of a 2D set.

    Monotone-chain scan with strict turns: collinear boundary points are
    excluded, and a point duplicated elsewhere in the set is never extreme
    (it lies in the hull of its twin). Testing oracle; d must be 2.
    """
    X = points.points if isinstance(points, PointSet) else _as_matrix(points)
    if X.shape[1] != 2:
        raise ValueError(f"exact 2D hull requires d=2, got d={X.shape[1]}")
    n = X.shape[0]
    if n == 1:
        return {0}

    uniq, first_idx, counts = np.unique(
        X, axis=0, return_index=True, return_counts=True
    )
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    pts = uniq[order]
    u = pts.shape[0]
    if u == 1:
        return {int(first_idx[0])} if counts[0] == 1 else set()

    def chain(seq):
        out: list[int] = []
        for k in seq:
            p = pts[k]
            while len(out) > 1 and _cross(pts[out[-2]], pts[out[-1]], p) >= 0.0:
                out.pop()
            out.append(k)
        return out

    upper = chain(range(u))
    lower = chain(range(u - 1, -1, -1))
    hull_local = set(upper[:-1]) | set(lower[:-1])

    result = set()
    for k in hull_local:
        orig = order[k]
        if counts[orig] == 1:
            result.add(int(first_idx[orig]))
    return result
