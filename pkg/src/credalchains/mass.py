"""Mass functions on frames and product frames.

A mass function assigns nonnegative weight to nonempty subsets of a frame,
with weights summing to one.  Belief and plausibility of a subset W are

  bel(W) = sum of m(V) over V contained in W
  pl(W)  = sum of m(V) over V intersecting W

Subsets are bit masks (arbitrary-precision ints), so product frames with up
to a few hundred joint states work unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Callable, Mapping, Union

import numpy as np

from . import lp as lpmod
from .errors import DomainError, InfeasibleError, StructuralError, TotalConflictError
from .intervals import (
    TOL_INPUT,
    TOL_INTERNAL,
    Frame,
    ProbabilityInterval,
    coherent_envelope,
    goodness,
    require_coherent,
)

# Möbius coefficients below this are treated as genuinely negative rather
# than rounding noise.
NEGATIVE_MASS_TOL = 1e-9


@dataclass(frozen=True)
class ProductFrame:
    """Cartesian product of frames; joint states are numbered factor-0-major.

    The joint index of coordinates (c0, c1, ..., cL) is
    ((c0 * n1 + c1) * n2 + c2) * ... , i.e. the first factor varies slowest.
    This layout is frozen; golden tests depend on it.
    """

    factors: tuple[Frame, ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise StructuralError("a product frame needs at least two factors")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def size(self) -> int:
        return prod(f.size for f in self.factors)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def coords(self, state: int) -> tuple[int, ...]:
        out = []
        for f in reversed(self.factors):
            state, c = divmod(state, f.size)
            out.append(c)
        return tuple(reversed(out))

    def index(self, coords) -> int:
        state = 0
        for f, c in zip(self.factors, coords):
            if not 0 <= c < f.size:
                raise StructuralError("coordinate out of range")
            state = state * f.size + c
        return state

    def states(self, mask: int) -> list[int]:
        return [s for s in range(self.size) if mask >> s & 1]

    def sub_index_map(self, positions: tuple[int, ...]) -> np.ndarray:
        """For every joint state, the state index in the sub-product at
        ``positions`` (a projected frame, ordered as given)."""
        sizes = [self.factors[p].size for p in positions]
        out = np.empty(self.size, dtype=np.int64)
        for s in range(self.size):
            c = self.coords(s)
            idx = 0
            for p, n in zip(positions, sizes):
                idx = idx * n + c[p]
            out[s] = idx
        return out

    def subframe(self, positions: tuple[int, ...]):
        if len(positions) == 1:
            return self.factors[positions[0]]
        return ProductFrame(tuple(self.factors[p] for p in positions))


FrameLike = Union[Frame, ProductFrame]


class MassFunction:
    """Sparse map from nonempty subset masks to positive weights, sum 1."""

    __slots__ = ("frame", "_masses")

    def __init__(self, frame: FrameLike, masses: Mapping[int, float]):
        full = frame.full_mask
        cleaned: dict[int, float] = {}
        total = 0.0
        for mask in sorted(masses):
            value = float(masses[mask])
            if mask <= 0 or mask > full:
                raise StructuralError(f"focal mask {mask} outside the frame")
            if value < -TOL_INTERNAL:
                raise StructuralError(f"negative mass {value} on mask {mask}")
            if value <= 0.0:
                continue
            cleaned[mask] = value
            total += value
        if abs(total - 1.0) > TOL_INPUT:
            raise StructuralError(f"masses sum to {total}, expected 1")
        self.frame = frame
        self._masses = cleaned

    def items(self):
        """(mask, mass) pairs in ascending mask order."""
        return self._masses.items()

    def focal_sets(self) -> tuple[int, ...]:
        return tuple(self._masses)

    def get(self, mask: int) -> float:
        return self._masses.get(mask, 0.0)

    def __len__(self):
        return len(self._masses)

    def bel(self, subset: int) -> float:
        if subset <= 0 or subset > self.frame.full_mask:
            raise DomainError("bel requires a nonempty subset of the frame")
        return sum(w for v, w in self._masses.items() if v & ~subset == 0)

    def pl(self, subset: int) -> float:
        if subset <= 0 or subset > self.frame.full_mask:
            raise DomainError("pl requires a nonempty subset of the frame")
        return sum(w for v, w in self._masses.items() if v & subset)

    @property
    def is_vacuous(self) -> bool:
        return self.focal_sets() == (self.frame.full_mask,)

    @property
    def is_deterministic(self) -> bool:
        focal = self.focal_sets()
        return len(focal) == 1 and focal[0] != self.frame.full_mask

    @property
    def is_bayesian(self) -> bool:
        return all(v & (v - 1) == 0 for v in self._masses)

    def allclose(self, other: "MassFunction", tol: float = TOL_INTERNAL) -> bool:
        keys = set(self._masses) | set(other._masses)
        return all(abs(self.get(k) - other.get(k)) <= tol for k in keys)

    def debug_dump(self) -> str:
        """``mask_as_binary<TAB>mass`` lines, ascending mask; frozen format."""
        n = self.frame.size
        return "\n".join(f"{mask:0{n}b}\t{w:.12g}" for mask, w in self._masses.items())

    def __repr__(self):
        body = ", ".join(f"{m:b}: {w:.4g}" for m, w in self._masses.items())
        return f"MassFunction({{{body}}})"


def vacuous(frame: FrameLike) -> MassFunction:
    return MassFunction(frame, {frame.full_mask: 1.0})


def bel(m: MassFunction, subset: int) -> float:
    return m.bel(subset)


def pl(m: MassFunction, subset: int) -> float:
    return m.pl(subset)


def _extension_positions(source: FrameLike, target: ProductFrame) -> tuple[int, ...]:
    factors = source.factors if isinstance(source, ProductFrame) else (source,)
    positions = []
    for f in factors:
        hits = [i for i, g in enumerate(target.factors) if g == f]
        if len(hits) != 1:
            raise StructuralError(
                "cannot place source frame in the target product unambiguously; "
                "pass positions explicitly"
            )
        positions.append(hits[0])
    return tuple(positions)


def vacuous_extend(
    m: MassFunction, target: ProductFrame, positions: tuple[int, ...] | None = None
) -> MassFunction:
    """Lift a mass function to a product frame, leaving other factors vacuous.

    Each focal set V maps to the cylinder of joint states whose projection
    onto the source factors lies in V.
    """
    if positions is None:
        positions = _extension_positions(m.frame, target)
    sub_idx = target.sub_index_map(tuple(positions))
    source_size = m.frame.size
    if any(i >= source_size for i in sub_idx):
        raise StructuralError("source frame does not match the target positions")
    powers = [1 << s for s in range(target.size)]
    out: dict[int, float] = {}
    for v, w in m.items():
        mask = 0
        for s in range(target.size):
            if v >> sub_idx[s] & 1:
                mask |= powers[s]
        out[mask] = out.get(mask, 0.0) + w
    return MassFunction(target, out)


def marginalize_to(m: MassFunction, positions: tuple[int, ...]) -> MassFunction:
    """Project a mass function on a product frame onto some of its factors."""
    if not isinstance(m.frame, ProductFrame):
        raise StructuralError("marginalization needs a product frame")
    k = len(m.frame.factors)
    if not positions or any(not 0 <= p < k for p in positions):
        raise StructuralError(f"factor positions {positions} out of range")
    sub_idx = m.frame.sub_index_map(tuple(positions))
    out: dict[int, float] = {}
    for v, w in m.items():
        proj = 0
        s = 0
        vv = v
        while vv:
            if vv & 1:
                proj |= 1 << int(sub_idx[s])
            vv >>= 1
            s += 1
        out[proj] = out.get(proj, 0.0) + w
    return MassFunction(m.frame.subframe(tuple(positions)), out)


def marginalize(m: MassFunction, factor: int) -> MassFunction:
    return marginalize_to(m, (factor,))


def _align_frames(m1: MassFunction, m2: MassFunction):
    if m1.frame == m2.frame:
        return m1, m2
    if isinstance(m1.frame, ProductFrame) and not isinstance(m2.frame, ProductFrame):
        return m1, vacuous_extend(m2, m1.frame)
    if isinstance(m2.frame, ProductFrame) and not isinstance(m1.frame, ProductFrame):
        return vacuous_extend(m1, m2.frame), m2
    raise StructuralError("mass functions live on incompatible frames")


def combine_dempster(m1: MassFunction, m2: MassFunction) -> tuple[MassFunction, float]:
    """Dempster's rule; returns the normalized combination and the conflict k.

    Operands on different frames are aligned by vacuous extension when one
    frame is a factor of the other's product frame.
    """
    a, b = _align_frames(m1, m2)
    acc: dict[int, float] = {}
    conflict = 0.0
    for v1, w1 in a.items():
        for v2, w2 in b.items():
            inter = v1 & v2
            w = w1 * w2
            if inter:
                acc[inter] = acc.get(inter, 0.0) + w
            else:
                conflict += w
    if conflict >= 1.0 - TOL_INTERNAL:
        raise TotalConflictError("total conflict: the masses cannot be combined")
    scale = 1.0 / (1.0 - conflict)
    return MassFunction(a.frame, {v: w * scale for v, w in acc.items()}), conflict


@dataclass(frozen=True)
class NotABelief:
    """Möbius inverse produced a genuinely negative coefficient."""

    coefficients: dict
    min_mass: float
    offenders: tuple[int, ...]


def mobius_inverse(
    bel_values: Callable[[int], float] | Mapping[int, float], frame: FrameLike
) -> MassFunction | NotABelief:
    """Recover a mass function from a set function via the Möbius inverse.

    m(V) = sum over W subset of V of (-1)^{|V minus W|} bel(W).  Returns
    ``NotABelief`` when some coefficient is below -1e-9, i.e. the input is
    not a belief function.
    """
    full = frame.full_mask
    if callable(bel_values):
        table = {v: float(bel_values(v)) for v in range(full + 1)}
    else:
        table = {v: float(bel_values[v]) for v in range(full + 1)}
    if abs(table[0]) > TOL_INPUT:
        raise DomainError("bel(empty set) must be 0")
    if abs(table[full] - 1.0) > TOL_INPUT:
        raise DomainError("bel(full frame) must be 1")
    coeffs: dict[int, float] = {}
    for v in range(1, full + 1):
        acc = 0.0
        size_v = v.bit_count()
        w = v
        while True:
            acc += table[w] if (size_v - w.bit_count()) % 2 == 0 else -table[w]
            if w == 0:
                break
            w = (w - 1) & v
        coeffs[v] = acc
    min_mass = min(coeffs.values())
    if min_mass < -NEGATIVE_MASS_TOL:
        offenders = tuple(v for v, c in coeffs.items() if c < -NEGATIVE_MASS_TOL)
        return NotABelief(coeffs, min_mass, offenders)
    return MassFunction(frame, {v: max(c, 0.0) for v, c in coeffs.items()})


def sgm_from_interval(interval: ProbabilityInterval) -> MassFunction:
    """Canonical mass function of a good coherent interval.

    Singletons carry the lower bounds, the complement of each singleton
    carries that state's slack, and the full frame carries delta.  Belief and
    plausibility of singletons then reproduce the interval.
    """
    report = goodness(interval)
    if not report.is_good:
        raise DomainError("interval has delta < 0; repair it before converting")
    frame = interval.frame
    full = frame.full_mask
    acc: dict[int, float] = {}

    def add(mask, value):
        if value < -TOL_INPUT:
            raise DomainError(f"construction produced negative mass {value}")
        if value > 0.0:
            acc[mask] = acc.get(mask, 0.0) + value

    for i in range(frame.size):
        add(1 << i, float(interval.lower[i]))
        add(full & ~(1 << i), float(report.slack[i]))
    add(full, max(report.delta, 0.0))
    return MassFunction(frame, acc)


def interval_from_mass(m: MassFunction) -> ProbabilityInterval:
    """Singleton belief/plausibility bounds of a mass function (always coherent)."""
    if not isinstance(m.frame, Frame):
        raise StructuralError("marginalize to a single frame first")
    n = m.frame.size
    lo = np.array([m.get(1 << i) for i in range(n)])
    hi = np.array([m.pl(1 << i) for i in range(n)])
    out = ProbabilityInterval(m.frame, lo, hi)
    require_coherent(out)
    return out


def admissible_masks(n: int, forbidden: frozenset | set = frozenset()) -> np.ndarray:
    """Nonempty subset masks of an n-state frame, minus the forbidden ones.

    Only subsets of two or more states can be forbidden; smaller masks in
    ``forbidden`` are ignored.
    """
    skip = {f for f in forbidden if f.bit_count() >= 2}
    return np.array([v for v in range(1, 1 << n) if v not in skip], dtype=np.int64)


def mass_match_lp(
    lower: np.ndarray,
    upper: np.ndarray,
    forbidden: frozenset | set = frozenset(),
    objective: np.ndarray | None = None,
) -> tuple[lpmod.LinearProgram, np.ndarray]:
    """LP over all admissible focal masses matching an interval on singletons.

    Variables are the masses of nonempty, non-forbidden subsets.  Equalities:
    each singleton mass equals its lower bound, each state's plausibility
    equals its upper bound, and the masses sum to one.  ``objective`` gives
    the per-variable coefficients to maximize (zeros when only feasibility is
    asked).  Returns the program and the subset mask of each variable.
    """
    n = len(lower)
    masks = admissible_masks(n, forbidden)
    nv = len(masks)
    incidence = ((masks[None, :] >> np.arange(n)[:, None]) & 1).astype(float)
    bel_rows = (masks[None, :] == (1 << np.arange(n))[:, None]).astype(float)
    a = np.vstack([bel_rows, incidence, np.ones((1, nv))])
    b = np.concatenate([np.asarray(lower, float), np.asarray(upper, float), [1.0]])
    c = np.zeros(nv) if objective is None else np.asarray(objective, float)
    return lpmod.LinearProgram(objective=c, eq_matrix=a, eq_rhs=b, upper_bounds=None), masks


def _is_representable(interval: ProbabilityInterval, forbidden) -> bool:
    program, _ = mass_match_lp(interval.lower, interval.upper, forbidden)
    return lpmod.solve(program).status == "optimal"


def _widen(interval: ProbabilityInterval, eps: float) -> ProbabilityInterval:
    hi = np.clip(interval.upper + eps, 0.0, 1.0)
    return coherent_envelope(interval.frame, interval.lower, hi)


def representability_repair(
    interval: ProbabilityInterval, forbidden: frozenset | set = frozenset()
) -> tuple[ProbabilityInterval, float]:
    """Smallest uniform upper-bound enlargement making the interval
    mass-representable.

    Adds eps to every upper bound (capped by coherence; lower bounds are
    kept, mirroring how interval fixing works) and bisects eps down to 1e-6
    against LP feasibility of ``mass_match_lp`` under the given forbidden
    sets.  eps = 1 always succeeds: uppers then sit at their coherence caps,
    where delta = 1 - sum(lower) >= 0 and the canonical good mass is an
    admissible witness.  eps = 0 is returned untouched when the interval is
    already representable.
    """
    require_coherent(interval)
    if _is_representable(interval, forbidden):
        return interval, 0.0
    lo_eps, hi_eps = 0.0, 1.0
    if not _is_representable(_widen(interval, hi_eps), forbidden):
        raise InfeasibleError("no widening up to eps = 1 is representable")
    while hi_eps - lo_eps > 1e-6:
        mid = 0.5 * (lo_eps + hi_eps)
        if _is_representable(_widen(interval, mid), forbidden):
            hi_eps = mid
        else:
            lo_eps = mid
    return _widen(interval, hi_eps), hi_eps
