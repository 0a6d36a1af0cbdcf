"""Finite frames and coherent probability intervals.

A probability interval assigns each state of a finite frame a lower and an
upper probability bound.  Coherence of the bounds is characterised by three
conditions:

  [Coh1]  sum(lower) <= 1 <= sum(upper)
  [Coh2]  lower[i] >= 1 - sum(upper[h], h != i)   (lower bounds reachable)
  [Coh3]  upper[i] <= 1 - sum(lower[h], h != i)   (upper bounds reachable)

A coherent interval is *good* when

  delta = sum(upper) + (n - 2) * sum(lower) - (n - 1) >= 0,

which is exactly the condition under which a canonical mass function with at
most 2n + 1 focal sets matches the interval on singletons (see
``mass.sgm_from_interval``).  Bad intervals can be repaired by enlarging the
upper bounds; the total enlargement needed is -delta and state i can absorb
at most the slack r[i] = 1 - sum(lower) - (upper[i] - lower[i]) before
breaking [Coh3].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleError, StructuralError

# Absolute tolerance for validating externally supplied numbers.
TOL_INPUT = 1e-9
# Absolute tolerance for quantities constructed by our own arithmetic.
TOL_INTERNAL = 1e-12


@dataclass(frozen=True)
class Frame:
    """Finite state space; subsets are n-bit masks with bit i <-> state i."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise StructuralError("a frame needs at least two states")
        if len(set(self.labels)) != len(self.labels):
            raise StructuralError("frame labels must be distinct")
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @classmethod
    def of_size(cls, n: int, prefix: str = "s") -> "Frame":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def singleton(self, i: int) -> int:
        if not 0 <= i < self.size:
            raise StructuralError(f"state index {i} out of range")
        return 1 << i

    def complement(self, mask: int) -> int:
        return self.full_mask & ~mask

    def states(self, mask: int) -> list[int]:
        """Indices of the states contained in ``mask``."""
        return [i for i in range(self.size) if mask >> i & 1]

    def mask_of(self, indices) -> int:
        mask = 0
        for i in indices:
            mask |= self.singleton(i)
        return mask

    def subsets(self, nonempty: bool = True):
        """All subset masks, ascending; by default without the empty set."""
        return range(1 if nonempty else 0, self.full_mask + 1)


def _as_prob_vector(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise StructuralError(f"{name} must have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{name} contains non-finite entries")
    if np.any(arr < -TOL_INPUT) or np.any(arr > 1.0 + TOL_INPUT):
        raise StructuralError(f"{name} entries must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class ProbabilityInterval:
    """Per-state lower/upper probability bounds on a frame."""

    frame: Frame
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = self.frame.size
        lo = _as_prob_vector(self.lower, n, "lower")
        hi = _as_prob_vector(self.upper, n, "upper")
        if np.any(lo > hi + TOL_INPUT):
            raise StructuralError("lower bound exceeds upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def allclose(self, other: "ProbabilityInterval", tol: float = TOL_INTERNAL) -> bool:
        return (
            self.frame.size == other.frame.size
            and np.allclose(self.lower, other.lower, atol=tol, rtol=0.0)
            and np.allclose(self.upper, other.upper, atol=tol, rtol=0.0)
        )

    def __repr__(self):
        lo = ", ".join(f"{v:.4g}" for v in self.lower)
        hi = ", ".join(f"{v:.4g}" for v in self.upper)
        return f"ProbabilityInterval(lower=[{lo}], upper=[{hi}])"


@dataclass(frozen=True)
class CoherenceVerdict:
    """Outcome of a coherence check; ``violations`` holds (condition, index)."""

    coherent: bool
    violations: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class GoodnessReport:
    """Sums, delta and per-state slack of a coherent interval."""

    sum_lower: float
    sum_upper: float
    delta: float
    slack: np.ndarray

    @property
    def is_good(self) -> bool:
        return self.delta >= -TOL_INTERNAL


def validate_coherence(interval: ProbabilityInterval, tol: float = TOL_INPUT) -> CoherenceVerdict:
    """Check conditions [Coh1]-[Coh3] within ``tol``."""
    lo, hi = interval.lower, interval.upper
    sl, su = float(lo.sum()), float(hi.sum())
    bad: list[tuple[str, int]] = []
    if sl > 1.0 + tol:
        bad.append(("Coh1-lower", -1))
    if su < 1.0 - tol:
        bad.append(("Coh1-upper", -1))
    # lower[i] >= 1 - (su - hi[i]) and upper[i] <= 1 - (sl - lo[i])
    for i in np.nonzero(lo < 1.0 - (su - hi) - tol)[0]:
        bad.append(("Coh2", int(i)))
    for i in np.nonzero(hi > 1.0 - (sl - lo) + tol)[0]:
        bad.append(("Coh3", int(i)))
    return CoherenceVerdict(not bad, tuple(bad))


def require_coherent(interval: ProbabilityInterval, tol: float = TOL_INPUT) -> None:
    verdict = validate_coherence(interval, tol)
    if not verdict.coherent:
        raise DomainError(f"interval is not coherent: {verdict.violations}")


def goodness(interval: ProbabilityInterval) -> GoodnessReport:
    """Delta and slack of a coherent interval; raises on incoherent input."""
    require_coherent(interval)
    n = interval.frame.size
    sl = float(interval.lower.sum())
    su = float(interval.upper.sum())
    delta = su + (n - 2) * sl - (n - 1)
    slack = 1.0 - sl - (interval.upper - interval.lower)
    slack.flags.writeable = False
    return GoodnessReport(sl, su, delta, slack)


def natural_extension(interval: ProbabilityInterval, subset: int) -> tuple[float, float]:
    """Tightest (bel, pl) bounds on ``subset`` implied by a coherent interval.

    bel(V) = max(sum_{i in V} lower[i], 1 - sum_{i not in V} upper[i])
    pl(V)  = min(sum_{i in V} upper[i], 1 - sum_{i not in V} lower[i])
    """
    require_coherent(interval)
    full = interval.frame.full_mask
    if subset <= 0 or subset > full:
        raise DomainError("subset must be a nonempty subset of the frame")
    sel = np.array([(subset >> i) & 1 for i in range(interval.frame.size)], dtype=bool)
    lo_in = float(interval.lower[sel].sum())
    hi_in = float(interval.upper[sel].sum())
    lo_out = float(interval.lower[~sel].sum())
    hi_out = float(interval.upper[~sel].sum())
    bel = max(lo_in, 1.0 - hi_out)
    pl = min(hi_in, 1.0 - lo_out)
    return bel, pl


def coherent_envelope(frame: Frame, lower, upper) -> ProbabilityInterval:
    """Tighten per-state bounds to the envelope of {lower <= x <= upper, sum x = 1}.

    Requires the credal set to be nonempty (sum lower <= 1 <= sum upper).
    The result is always coherent.
    """
    lo = _as_prob_vector(lower, frame.size, "lower")
    hi = _as_prob_vector(upper, frame.size, "upper")
    if np.any(lo > hi + TOL_INPUT):
        raise StructuralError("lower bound exceeds upper bound")
    if lo.sum() > 1.0 + TOL_INPUT or hi.sum() < 1.0 - TOL_INPUT:
        raise DomainError("bounds admit no probability distribution")
    new_lo = np.maximum(lo, 1.0 - (hi.sum() - hi))
    new_hi = np.minimum(hi, 1.0 - (lo.sum() - lo))
    out = ProbabilityInterval(frame, np.clip(new_lo, 0.0, 1.0), np.clip(new_hi, 0.0, 1.0))
    require_coherent(out)
    return out


def adhoc_fix_amounts(interval: ProbabilityInterval, coeffs) -> np.ndarray:
    """Cheapest distribution of -delta over the upper bounds.

    Solves  min sum_i t[i] * coeffs[i]  subject to  0 <= t[i] <= slack[i]
    and  sum t = -delta,  by filling states in ascending coefficient order
    (ties broken by ascending index) up to their slack caps.  The minimum is
    exact: the problem is a continuous knapsack.
    """
    n = interval.frame.size
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (n,):
        raise StructuralError(f"coeffs must have length {n}")
    if np.any(c < -TOL_INPUT):
        raise DomainError("coefficients must be nonnegative")
    report = goodness(interval)
    t = np.zeros(n)
    need = -report.delta
    if need <= TOL_INTERNAL:
        return t
    if need > report.slack.sum() + TOL_INTERNAL:
        raise InfeasibleError("total slack is smaller than -delta")
    order = np.lexsort((np.arange(n), c))
    for i in order:
        give = min(float(report.slack[i]), need)
        t[i] = give
        need -= give
        if need <= TOL_INTERNAL:
            break
    return t


def fix_adhoc(interval: ProbabilityInterval, coeffs) -> ProbabilityInterval:
    """Repair a bad interval by the cheapest upper-bound enlargement."""
    t = adhoc_fix_amounts(interval, coeffs)
    if not t.any():
        return interval
    out = ProbabilityInterval(interval.frame, interval.lower, interval.upper + t)
    _check_fixed(out)
    return out


def fix_uniform(interval: ProbabilityInterval) -> ProbabilityInterval:
    """Repair a bad interval by enlarging uppers proportionally to slack.

    Good intervals are returned unchanged.  The proportional rule never hits
    the slack caps because -delta <= sum(slack), so the result satisfies
    [Coh3] with room to spare and has delta = 0.
    """
    report = goodness(interval)
    if report.is_good:
        return interval
    total = float(report.slack.sum())
    if total < -report.delta - TOL_INTERNAL:
        raise InfeasibleError("total slack is smaller than -delta")
    t = (-report.delta) * report.slack / total
    out = ProbabilityInterval(interval.frame, interval.lower, interval.upper + t)
    _check_fixed(out)
    return out


def _check_fixed(out: ProbabilityInterval) -> None:
    require_coherent(out)
    if goodness(out).delta < -TOL_INTERNAL:
        raise DomainError("interval repair failed to reach delta >= 0")
