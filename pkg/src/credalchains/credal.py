"""Exact credal inference on chains under complete independence.

The credal set of a coherent interval is the polytope
{x : lower <= x <= upper, sum x = 1}.  Optimizing a linear functional over
it is a continuous knapsack: to minimize, states are filled to their upper
bounds in ascending coefficient order until the unit budget pins one pivot
coordinate, with the rest at their lower bounds.

Marginal bounds along a chain follow from a backward recursion: every
intermediate coefficient vector is componentwise nonnegative and each local
model enters the multilinear objective linearly, so minimizing columnwise
over each conditional credal set (rows are independent under complete
independence) and finally over the prior is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .errors import DomainError, StructuralError
from .intervals import ProbabilityInterval, require_coherent


@dataclass(frozen=True)
class CredalLinearInstance:
    """A linear objective over the credal set of a coherent interval."""

    coeffs: np.ndarray
    interval: ProbabilityInterval

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.interval.frame.size,):
            raise StructuralError("coefficient length does not match the frame")
        object.__setattr__(self, "coeffs", c)


def _greedy(c, lower, upper, sense):
    n = len(c)
    key = c if sense == "min" else -c
    order = np.lexsort((np.arange(n), key))
    x = lower.astype(float).copy()
    budget = 1.0 - float(lower.sum())
    if budget < -1e-9:
        raise DomainError("lower bounds sum beyond 1")
    for i in order:
        give = min(float(upper[i] - lower[i]), budget)
        if give > 0.0:
            x[i] += give
            budget -= give
        if budget <= 0.0:
            break
    return float(c @ x), x


def greedy_linear_min(inst: CredalLinearInstance) -> tuple[float, np.ndarray]:
    """Exact minimum of ``coeffs . x`` over the credal set, with its argmin.

    Ties between equal coefficients are broken by ascending state index, so
    the argmin is deterministic (the value never depends on the tie rule).
    """
    require_coherent(inst.interval)
    return _greedy(inst.coeffs, inst.interval.lower, inst.interval.upper, "min")


def greedy_linear_max(inst: CredalLinearInstance) -> tuple[float, np.ndarray]:
    """Exact maximum of ``coeffs . x`` over the credal set, with its argmax."""
    require_coherent(inst.interval)
    return _greedy(inst.coeffs, inst.interval.lower, inst.interval.upper, "max")


def _batched_greedy(cmat: np.ndarray, lower: np.ndarray, upper: np.ndarray, sense: str):
    """Greedy optimum of every row of ``cmat`` over one credal set."""
    key = cmat if sense == "min" else -cmat
    idx = np.argsort(key, axis=1, kind="stable")
    c_sorted = np.take_along_axis(cmat, idx, axis=1)
    w = (upper - lower)[idx]
    budget = 1.0 - lower.sum()
    prev = np.cumsum(w, axis=1) - w
    extra = np.clip(budget - prev, 0.0, w)
    return cmat @ lower + (c_sorted * extra).sum(axis=1)


def _link_matrices(chain, link_index):
    ivs = chain.links[link_index]
    lo = np.stack([iv.lower for iv in ivs])
    hi = np.stack([iv.upper for iv in ivs])
    return lo, hi


def credal_chain_bounds(chain) -> list[tuple[np.ndarray, np.ndarray]]:
    """Exact marginal bounds at every node 2..k of a chain model.

    For a target node and state, the recursion starts from the conditional
    bound column of the last link and repeatedly replaces the coefficient
    vector c by d[j] = opt over the credal set of parent state j of c.x,
    finishing with the same optimization over the prior.
    """
    chain.validate()
    out = []
    for node in range(2, chain.length + 1):
        bounds = []
        for sense in ("min", "max"):
            lo, hi = _link_matrices(chain, node - 2)
            cmat = (lo if sense == "min" else hi).T  # (targets, parents)
            for li in range(node - 3, -1, -1):
                lo, hi = _link_matrices(chain, li)
                nxt = np.empty((cmat.shape[0], lo.shape[0]))
                for j in range(lo.shape[0]):
                    nxt[:, j] = _batched_greedy(cmat, lo[j], hi[j], sense)
                cmat = nxt
            bounds.append(
                _batched_greedy(cmat, chain.prior.lower, chain.prior.upper, sense)
            )
        out.append((bounds[0], bounds[1]))
    return out


def credal_vertices(interval: ProbabilityInterval) -> np.ndarray:
    """All extreme points of an interval credal set, by permutation greedy.

    Every vertex has at most one coordinate strictly between its bounds, so
    filling upper bounds along each of the n! state orders and deduplicating
    reaches all of them.  Intended for small frames.
    """
    require_coherent(interval)
    lower, upper = interval.lower, interval.upper
    n = interval.frame.size
    seen = {}
    for perm in permutations(range(n)):
        x = lower.astype(float).copy()
        budget = 1.0 - float(lower.sum())
        for i in perm:
            give = min(float(upper[i] - lower[i]), budget)
            x[i] += give
            budget -= give
            if budget <= 0.0:
                break
        seen[tuple(np.round(x, 12))] = x
    return np.array(list(seen.values()))


def _hull_prune(points: np.ndarray) -> np.ndarray:
    """Vertices of the convex hull of marginal points (n = 2 or 3 states).

    Points live on the simplex, so two coordinates suffice.  Monotone-chain
    in 2d; for n = 2 the extremes of the first coordinate are enough.
    """
    if len(points) <= 3:
        return points
    n = points.shape[1]
    if n == 2:
        return points[[int(points[:, 0].argmin()), int(points[:, 0].argmax())]]
    pts2 = points[:, :2]
    order = np.lexsort((pts2[:, 1], pts2[:, 0]))
    pts = points[order]

    def half(iterable):
        chain_pts = []
        for p in iterable:
            while len(chain_pts) >= 2:
                o, a = chain_pts[-2], chain_pts[-1]
                cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
                if cross <= 1e-15:
                    chain_pts.pop()
                else:
                    break
            chain_pts.append(p)
        return chain_pts

    hull = half(pts)[:-1] + half(pts[::-1])[:-1]
    return np.array(hull) if len(hull) >= 2 else pts


def brute_force_bounds(chain) -> list[tuple[np.ndarray, np.ndarray]]:
    """Oracle marginal bounds by enumerating local extreme points.

    Every combination of one extreme point per local model is a Bayesian
    network; the multilinear marginal attains its bounds on such
    combinations.  Marginal point sets are propagated forward through all
    conditional row-vertex combinations, recording elementwise bounds at
    each node; convex-hull pruning between links is lossless here because
    the downstream maps are linear in the marginal.  Guarded to n <= 3,
    k <= 4.
    """
    chain.validate()
    if chain.length > 4 or any(f.size > 3 for f in chain.frames):
        raise DomainError("brute force is limited to n <= 3, k <= 4")
    points = credal_vertices(chain.prior)
    out = []
    for link in chain.links:
        row_vertices = [credal_vertices(iv) for iv in link]
        combos = []
        for choice in product(*[range(len(rv)) for rv in row_vertices]):
            combos.append(np.stack([rv[c] for rv, c in zip(row_vertices, choice)]))
        tmats = np.stack(combos)  # (C, parents, children)
        new_points = np.einsum("pi,cij->pcj", points, tmats).reshape(-1, tmats.shape[2])
        out.append((new_points.min(axis=0), new_points.max(axis=0)))
        points = _hull_prune(np.unique(np.round(new_points, 12), axis=0))
    return out
