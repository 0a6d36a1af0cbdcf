"""Uniform sampling of coherent probability intervals and random chains.

The coherent pairs (lower, upper) of an n-state frame form a convex polytope
in 2n dimensions, cut out by the box bounds, lower <= upper, the coherence
conditions and an optional per-state width cap.  Samples are drawn by
hit-and-run: from an interior point, pick an isotropic random direction,
intersect the line with the polytope and jump to a uniform point of the
feasible segment.  The chain targets the Lebesgue-uniform distribution on
the polytope (the measure is our choice; nothing canonical is prescribed).

For n = 2 coherence forces lower[0] + upper[1] = 1 and lower[1] + upper[0] = 1,
so the polytope is degenerate in 4 dimensions; the walk then runs in the
equivalent triangle {0 <= l <= u <= 1} over (lower[0], upper[0]).

The generator is numpy's default PCG64, fully determined by the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructuralError
from .inference import ChainModel
from .intervals import Frame, ProbabilityInterval, validate_coherence

RNG_ALGORITHM = "numpy-PCG64"


@dataclass(frozen=True)
class SamplerConfig:
    n: int
    epsilon: float | None = None
    burn_in: int = 1000
    thinning: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise StructuralError("frames need at least two states")
        if self.epsilon is not None and not 0.0 < self.epsilon <= 1.0:
            raise StructuralError("epsilon must lie in (0, 1]")
        if self.burn_in < 0 or self.thinning < 1:
            raise StructuralError("burn_in must be >= 0 and thinning >= 1")


def _polytope(cfg: SamplerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Rows (a, b) with a.z <= b over z = (lower, upper) for n >= 3."""
    n = cfg.n
    eye = np.eye(n)
    rows = [
        np.hstack([-eye, np.zeros((n, n))]),  # lower >= 0
        np.hstack([np.zeros((n, n)), eye]),  # upper <= 1
        np.hstack([eye, -eye]),  # lower <= upper
        np.hstack([np.ones(n), np.zeros(n)])[None, :],  # Coh1 lower
        np.hstack([np.zeros(n), -np.ones(n)])[None, :],  # Coh1 upper
        np.hstack([-eye, -(1 - eye)]),  # Coh2
        np.hstack([(1 - eye), eye]),  # Coh3
    ]
    rhs = [np.zeros(n), np.ones(n), np.zeros(n), [1.0], [-1.0], -np.ones(n), np.ones(n)]
    if cfg.epsilon is not None:
        rows.append(np.hstack([-eye, eye]))  # widths <= eps
        rhs.append(np.full(n, cfg.epsilon))
    return np.vstack(rows), np.concatenate([np.atleast_1d(r) for r in rhs])


def _triangle(cfg: SamplerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Constraints over (l, u) for the binary case."""
    rows = [[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]]
    rhs = [0.0, 0.0, 1.0]
    if cfg.epsilon is not None:
        rows.append([-1.0, 1.0])
        rhs.append(cfg.epsilon)
    return np.array(rows), np.array(rhs)


class IntervalSampler:
    """Hit-and-run walker emitting coherent intervals; one Markov chain."""

    def __init__(self, cfg: SamplerConfig, frame: Frame | None = None):
        self.cfg = cfg
        self.frame = frame if frame is not None else Frame.of_size(cfg.n)
        if self.frame.size != cfg.n:
            raise StructuralError("frame size does not match the config")
        self.rng = np.random.default_rng(cfg.seed)
        delta = min(cfg.epsilon if cfg.epsilon is not None else 1.0, 1.0 / cfg.n) / 2.0
        if cfg.n == 2:
            self._amat, self._brhs = _triangle(cfg)
            self._z = np.array([0.5 - delta, 0.5 + delta])
        else:
            self._amat, self._brhs = _polytope(cfg)
            self._z = np.concatenate(
                [np.full(cfg.n, 1.0 / cfg.n - delta), np.full(cfg.n, 1.0 / cfg.n + delta)]
            )
        self._slack = self._brhs - self._amat @ self._z
        if np.any(self._slack < -1e-12):
            raise DomainError("start point is outside the polytope")
        self._steps(cfg.burn_in)

    def _steps(self, count: int) -> None:
        if count <= 0:
            return
        amat, slack, z = self._amat, self._slack, self._z
        # randomness is drawn in one block per call; the chain itself is
        # still sequential because the feasible segment depends on z
        dirs = self.rng.standard_normal((count, len(z)))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        jumps = self.rng.random(count)
        ad_all = dirs @ amat.T
        for i in range(count):
            ad = ad_all[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = slack / ad
            t_hi = ratios[ad > 1e-14].min(initial=np.inf)
            t_lo = ratios[ad < -1e-14].max(initial=-np.inf)
            if not np.isfinite(t_hi) or not np.isfinite(t_lo) or t_hi < t_lo:
                continue  # numerically pinched direction; try another
            t = t_lo + jumps[i] * (t_hi - t_lo)
            z += t * dirs[i]
            slack -= t * ad
            np.maximum(slack, 0.0, out=slack)

    def _emit(self) -> ProbabilityInterval:
        if self.cfg.n == 2:
            l0, u0 = self._z
            iv = ProbabilityInterval(
                self.frame,
                np.array([l0, 1.0 - u0]),
                np.array([u0, 1.0 - l0]),
            )
        else:
            n = self.cfg.n
            iv = ProbabilityInterval(self.frame, self._z[:n].copy(), self._z[n:].copy())
        verdict = validate_coherence(iv)
        if not verdict.coherent:  # pragma: no cover - walk stays feasible
            raise DomainError(f"sampler emitted an incoherent interval: {verdict.violations}")
        return iv

    def draw(self, frame: Frame | None = None) -> ProbabilityInterval:
        self._steps(self.cfg.thinning)
        iv = self._emit()
        if frame is not None and frame != self.frame:
            if frame.size != self.cfg.n:
                raise StructuralError("frame size mismatch")
            return ProbabilityInterval(frame, iv.lower, iv.upper)
        return iv


def sample_intervals(cfg: SamplerConfig, count: int) -> list[ProbabilityInterval]:
    """Draw ``count`` coherent intervals from one hit-and-run chain."""
    sampler = IntervalSampler(cfg)
    return [sampler.draw() for _ in range(count)]


def sample_chain(cfg: SamplerConfig, k: int) -> ChainModel:
    """Draw a random chain model: one prior plus n*(k-1) conditional intervals.

    All intervals come from a single walk seeded by the config, in the fixed
    order prior, then link by link with parent states ascending; the result
    is bitwise reproducible for a given seed.
    """
    if k < 2:
        raise StructuralError("a chain needs at least two nodes")
    frames = tuple(Frame.of_size(cfg.n, prefix=f"x{l + 1}s") for l in range(k))
    sampler = IntervalSampler(cfg)
    prior = sampler.draw(frames[0])
    links = tuple(
        tuple(sampler.draw(frames[li + 1]) for _ in range(cfg.n))
        for li in range(k - 1)
    )
    return ChainModel(frames=frames, prior=prior, links=links)
