"""Closed-form single-step inference and chain propagation strategies.

One step of belief inference combines a parent mass function with per-parent
conditional interval bounds, without ever materializing the product frame:

  lower[j] = sum over focal V of m(V) * prod_{i in V} cond_lower[i, j]
  upper[j] = 1 - sum over focal V of m(V) * prod_{i in V} (1 - cond_upper[i, j])

Chain propagation repeats this node by node.  The strategies differ in how
the running interval is turned back into a mass function:

* ``SGM_UNIFORM_FIX``   - repair a bad interval proportionally to slack,
  then use its canonical (standard good) mass.
* ``SGM_ADHOC_FIX``     - repair separately per target state and side with
  the cheapest enlargement for that bound, then assemble the 2m results.
* ``ADHOC_MASS``        - per target state and side, pick the admissible
  mass function optimizing the bound by linear programming; subsets whose
  bound product exceeds the second-smallest column entry are excluded, which
  is what keeps the result conservative with respect to the credal bounds.
* ``FULL_MASS``         - never revert to an interval: propagate the full
  marginal mass with the local-computation step and read off singleton
  belief/plausibility at each node.  No conservativity guarantee.

Conditional intervals are used as given even when bad; enlarging conditional
uppers cannot change the lower formula, and for each target state some
fixing leaves that column's uppers untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import lp as lpmod
from .embedding import mass_step
from .errors import DomainError, StructuralError
from .intervals import (
    Frame,
    ProbabilityInterval,
    adhoc_fix_amounts,
    coherent_envelope,
    fix_uniform,
    goodness,
    require_coherent,
)
from .mass import (
    MassFunction,
    admissible_masks,
    interval_from_mass,
    mass_match_lp,
    representability_repair,
    sgm_from_interval,
)


class Strategy(Enum):
    SGM_UNIFORM_FIX = "sgm-uniform"
    SGM_ADHOC_FIX = "sgm-adhoc"
    ADHOC_MASS = "adhoc-mass"
    FULL_MASS = "full-mass"


@dataclass
class OpCounter:
    """Tally of multiply-accumulate work done by closed-form steps."""

    ops: int = 0

    def add(self, k: int) -> None:
        self.ops += k


@dataclass(frozen=True)
class ChainModel:
    """Prior interval plus one conditional interval per parent state per link."""

    frames: tuple[Frame, ...]
    prior: ProbabilityInterval
    links: tuple[tuple[ProbabilityInterval, ...], ...]

    @property
    def length(self) -> int:
        return len(self.frames)

    def validate(self) -> None:
        if len(self.frames) < 1:
            raise StructuralError("chain needs at least one node")
        if self.prior.frame != self.frames[0]:
            raise StructuralError("prior lives on the wrong frame")
        if len(self.links) != len(self.frames) - 1:
            raise StructuralError("links count does not match the number of nodes")
        require_coherent(self.prior)
        for li, link in enumerate(self.links):
            parent, child = self.frames[li], self.frames[li + 1]
            if len(link) != parent.size:
                raise StructuralError(f"link {li + 2}: need one interval per parent state")
            for iv in link:
                if iv.frame != child:
                    raise StructuralError(f"link {li + 2}: interval on the wrong frame")
                require_coherent(iv)

    def link_matrices(self, link_index: int) -> tuple[np.ndarray, np.ndarray]:
        ivs = self.links[link_index]
        return np.stack([iv.lower for iv in ivs]), np.stack([iv.upper for iv in ivs])


@dataclass(frozen=True)
class StepDiagnostics:
    delta: float | None = None
    epsilon: float = 0.0
    t_uniform: np.ndarray | None = None
    t_lower: np.ndarray | None = None
    t_upper: np.ndarray | None = None


@dataclass(frozen=True)
class InferenceResult:
    node: int
    lower: np.ndarray
    upper: np.ndarray
    method: str
    diagnostics: StepDiagnostics = field(default_factory=StepDiagnostics)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower


def theorem1_step(
    m_parent: MassFunction,
    cond_lower: np.ndarray,
    cond_upper: np.ndarray,
    counter: OpCounter | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Singleton bounds on the child node from a parent mass and bound matrices."""
    cl = np.asarray(cond_lower, dtype=float)
    cu = np.asarray(cond_upper, dtype=float)
    n = m_parent.frame.size
    if cl.ndim != 2 or cl.shape != cu.shape or cl.shape[0] != n:
        raise StructuralError(
            f"conditional matrices must be ({n}, m); got {cl.shape} and {cu.shape}"
        )
    m = cl.shape[1]
    lower = np.zeros(m)
    upper_acc = np.zeros(m)
    ops = 0
    for v, w in m_parent.items():
        idx = [i for i in range(n) if v >> i & 1]
        lower += w * np.prod(cl[idx, :], axis=0)
        upper_acc += w * np.prod(1.0 - cu[idx, :], axis=0)
        ops += (len(idx) + 1) * m * 2
    if counter is not None:
        counter.add(ops)
    return lower, 1.0 - upper_acc


def _t1_lower_column(m_parent, col, counter=None):
    acc = 0.0
    ops = 0
    for v, w in m_parent.items():
        p = w
        vv, i = v, 0
        while vv:
            if vv & 1:
                p *= col[i]
            vv >>= 1
            i += 1
        acc += p
        ops += v.bit_count() + 1
    if counter is not None:
        counter.add(ops)
    return acc


def _column_products(col: np.ndarray) -> np.ndarray:
    """coeffs[i] = product of col over all other indices."""
    n = len(col)
    return np.array([np.prod(np.delete(col, i)) for i in range(n)])


def forbidden_sets(col: np.ndarray, tol: float = 1e-12) -> frozenset:
    """Subsets (|V| >= 2) whose bound product exceeds the second-smallest entry.

    Masses on these sets would break the conservativity argument, so the
    ad-hoc mass programs force them to zero.  Ties are allowed through: the
    argument only needs the product to stay <= the second-smallest value.
    """
    col = np.asarray(col, dtype=float)
    n = len(col)
    second = float(np.partition(col, 1)[1])
    out = []
    for v in range(1, 1 << n):
        if v.bit_count() < 2:
            continue
        p = 1.0
        vv, i = v, 0
        while vv:
            if vv & 1:
                p *= col[i]
            vv >>= 1
            i += 1
        if p > second + tol:
            out.append(v)
    return frozenset(out)


def _mask_products(masks: np.ndarray, col: np.ndarray) -> np.ndarray:
    out = np.ones(len(masks))
    for i in range(len(col)):
        out = np.where((masks >> i) & 1 == 1, out * col[i], out)
    return out


@dataclass
class AdhocMassInfo:
    epsilons: dict
    masses: dict


def _ensure_representable(interval, forbidden, cache):
    if forbidden not in cache:
        cache[forbidden] = representability_repair(interval, forbidden)
    return cache[forbidden]


def adhoc_mass_step(
    prior_interval: ProbabilityInterval,
    cond_lower: np.ndarray,
    cond_upper: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, AdhocMassInfo]:
    """Optimal conservative bounds on the child via one LP per target and side.

    Each program maximizes the closed-form bound over masses that match the
    prior interval on singletons, sum to one and avoid the forbidden sets of
    its column.  When a program is infeasible the prior is first widened by
    the smallest representability repair for those forbidden sets (repairs
    are cached per forbidden-set so identical columns share one repair).
    """
    require_coherent(prior_interval)
    cl = np.asarray(cond_lower, dtype=float)
    cu = np.asarray(cond_upper, dtype=float)
    n = prior_interval.frame.size
    if cl.shape != cu.shape or cl.shape[0] != n:
        raise StructuralError("conditional matrix shape mismatch")
    m = cl.shape[1]
    lower = np.empty(m)
    upper = np.empty(m)
    info = AdhocMassInfo(epsilons={}, masses={})
    cache: dict[frozenset, tuple[ProbabilityInterval, float]] = {}
    for j in range(m):
        for side in ("lower", "upper"):
            col = cl[:, j] if side == "lower" else 1.0 - cu[:, j]
            banned = forbidden_sets(col)
            iv_use, eps = _ensure_representable(prior_interval, banned, cache)
            masks = admissible_masks(n, banned)
            program, _ = mass_match_lp(
                iv_use.lower, iv_use.upper, banned, objective=_mask_products(masks, col)
            )
            sol = lpmod.solve(program)
            if sol.status != "optimal":
                raise DomainError(
                    f"ad-hoc mass LP unsolvable (target {j}, side {side}, "
                    f"eps {eps}): status={sol.status}, "
                    f"lower={iv_use.lower.tolist()}, upper={iv_use.upper.tolist()}, "
                    f"forbidden={sorted(banned)}"
                )
            if side == "lower":
                lower[j] = sol.objective
            else:
                upper[j] = 1.0 - sol.objective
            info.epsilons[(j, side)] = eps
            # the LP meets its equalities only within its feasibility
            # tolerance; renormalize before building a strict mass function
            x = np.clip(sol.x, 0.0, None)
            x /= x.sum()
            info.masses[(j, side)] = MassFunction(
                prior_interval.frame, dict(zip((int(v) for v in masks), x))
            )
    return lower, upper, info


def _sgm_step(interval, cl, cu, child, counter, adhoc: bool):
    """One SGM-based step: fix if bad (uniform or per-target), then Theorem 1."""
    report = goodness(interval)
    diag_kwargs = {"delta": report.delta}
    if report.is_good:
        lo, hi = theorem1_step(sgm_from_interval(interval), cl, cu, counter)
        return ProbabilityInterval(child, lo, hi), StepDiagnostics(**diag_kwargs)
    if not adhoc:
        fixed = fix_uniform(interval)
        lo, hi = theorem1_step(sgm_from_interval(fixed), cl, cu, counter)
        diag_kwargs["t_uniform"] = fixed.upper - interval.upper
        return ProbabilityInterval(child, lo, hi), StepDiagnostics(**diag_kwargs)
    m = cl.shape[1]
    n = interval.frame.size
    lo = np.empty(m)
    hi = np.empty(m)
    t_lo = np.empty((m, n))
    t_hi = np.empty((m, n))
    for j in range(m):
        t = adhoc_fix_amounts(interval, _column_products(cl[:, j]))
        fixed = ProbabilityInterval(interval.frame, interval.lower, interval.upper + t)
        lo[j] = _t1_lower_column(sgm_from_interval(fixed), cl[:, j], counter)
        t_lo[j] = t
        t = adhoc_fix_amounts(interval, _column_products(1.0 - cu[:, j]))
        fixed = ProbabilityInterval(interval.frame, interval.lower, interval.upper + t)
        hi[j] = 1.0 - _t1_lower_column(sgm_from_interval(fixed), 1.0 - cu[:, j], counter)
        t_hi[j] = t
    # per-target bounds come from different masses; tighten to the reachable
    # envelope so the result is a coherent interval again
    iv = coherent_envelope(child, lo, hi)
    return iv, StepDiagnostics(t_lower=t_lo, t_upper=t_hi, **diag_kwargs)


def _mass_for_link(link_intervals):
    out = []
    for iv in link_intervals:
        rep = goodness(iv)
        out.append(sgm_from_interval(iv if rep.is_good else fix_uniform(iv)))
    return out


def propagate_chain(
    chain: ChainModel,
    strategy: Strategy,
    prior_mass: MassFunction | None = None,
    counter: OpCounter | None = None,
) -> list[InferenceResult]:
    """Run one strategy along the chain; one result per node 2..k.

    ``prior_mass`` replaces the interval-to-mass conversion at the first
    step for the mass-based strategies (the prior interval is then ignored).
    """
    chain.validate()
    strategy = Strategy(strategy)
    results: list[InferenceResult] = []

    if strategy is Strategy.FULL_MASS:
        if prior_mass is not None:
            current = prior_mass
        else:
            rep = goodness(chain.prior)
            current = sgm_from_interval(
                chain.prior if rep.is_good else fix_uniform(chain.prior)
            )
        for li in range(len(chain.links)):
            current = mass_step(current, _mass_for_link(chain.links[li]))
            iv = interval_from_mass(current)
            results.append(
                InferenceResult(
                    li + 2,
                    iv.lower,
                    iv.upper,
                    strategy.value,
                    StepDiagnostics(delta=goodness(iv).delta),
                )
            )
        return results

    if strategy is Strategy.ADHOC_MASS and prior_mass is not None:
        raise DomainError("adhoc-mass starts from an interval, not a mass")

    current_iv = chain.prior
    start_mass = prior_mass
    for li in range(len(chain.links)):
        child = chain.frames[li + 1]
        cl, cu = chain.link_matrices(li)
        if strategy is Strategy.ADHOC_MASS:
            lo, hi, info = adhoc_mass_step(current_iv, cl, cu)
            new_iv = coherent_envelope(child, lo, hi)
            eps = max(info.epsilons.values(), default=0.0)
            diag = StepDiagnostics(delta=goodness(current_iv).delta, epsilon=eps)
        elif start_mass is not None:
            lo, hi = theorem1_step(start_mass, cl, cu, counter)
            new_iv = ProbabilityInterval(child, lo, hi)
            diag = StepDiagnostics()
        else:
            new_iv, diag = _sgm_step(
                current_iv, cl, cu, child, counter, adhoc=strategy is Strategy.SGM_ADHOC_FIX
            )
        require_coherent(new_iv)
        results.append(InferenceResult(li + 2, new_iv.lower, new_iv.upper, strategy.value, diag))
        current_iv = new_iv
        start_mass = None
    return results
