import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from credalchains import (
    ChainModel,
    Frame,
    MassFunction,
    ProbabilityInterval,
    coherent_envelope,
    fix_uniform,
    goodness,
)


def random_distribution(rng, n):
    p = rng.random(n) + 1e-3
    return p / p.sum()


def random_coherent(rng, frame: Frame) -> ProbabilityInterval:
    """Coherent interval bracketing two random distributions.

    Lower bounds shrink and upper bounds stretch by independent random
    factors before the coherence envelope, which keeps the credal set
    nonempty while producing a healthy mix of good and bad intervals.
    """
    n = frame.size
    p, q = random_distribution(rng, n), random_distribution(rng, n)
    lo = np.minimum(p, q) * rng.uniform(0.0, 1.0, size=n)
    hi = np.maximum(p, q)
    hi = hi + (1.0 - hi) * rng.uniform(0.0, 1.0, size=n)
    return coherent_envelope(frame, lo, hi)


def random_good(rng, frame: Frame) -> ProbabilityInterval:
    iv = random_coherent(rng, frame)
    return iv if goodness(iv).is_good else fix_uniform(iv)


def random_mass(rng, frame: Frame, max_focal=None, dyadic=False) -> MassFunction:
    full = frame.full_mask
    count = int(rng.integers(1, max_focal or min(full, 6) + 1))
    masks = rng.choice(np.arange(1, full + 1), size=min(count, full), replace=False)
    if dyadic:
        weights = rng.multinomial(64, np.ones(len(masks)) / len(masks)) / 64.0
    else:
        weights = rng.random(len(masks)) + 1e-3
        weights = weights / weights.sum()
    acc = {}
    for mask, w in zip(masks, weights):
        if w > 0:
            acc[int(mask)] = acc.get(int(mask), 0.0) + float(w)
    if not acc:
        acc[full] = 1.0
    return MassFunction(frame, acc)


def random_chain(rng, n, k) -> ChainModel:
    frames = tuple(Frame.of_size(n, prefix=f"x{l + 1}s") for l in range(k))
    prior = random_coherent(rng, frames[0])
    links = tuple(
        tuple(random_coherent(rng, frames[li + 1]) for _ in range(n))
        for li in range(k - 1)
    )
    return ChainModel(frames=frames, prior=prior, links=links)


@pytest.fixture
def urn_frame():
    return Frame(("R", "G", "B", "Y"))


@pytest.fixture
def urn_interval(urn_frame):
    return ProbabilityInterval(
        urn_frame, [0.06, 0.10, 0.15, 0.25], [0.33, 0.42, 0.32, 0.58]
    )


@pytest.fixture
def coin_frame():
    return Frame(("H", "T"))


@pytest.fixture
def urn_chain(urn_frame, urn_interval, coin_frame):
    links = (
        (
            ProbabilityInterval(coin_frame, [0.8, 0.1], [0.9, 0.2]),
            ProbabilityInterval(coin_frame, [0.6, 0.3], [0.7, 0.4]),
            ProbabilityInterval(coin_frame, [0.4, 0.5], [0.5, 0.6]),
            ProbabilityInterval(coin_frame, [0.2, 0.7], [0.3, 0.8]),
        ),
    )
    return ChainModel(frames=(urn_frame, coin_frame), prior=urn_interval, links=links)


@pytest.fixture
def four_frame():
    return Frame(("a1", "a2", "a3", "a4"))


@pytest.fixture
def example1_mass(four_frame):
    """Singletons 0.2 each, {a1,a2} and {a3,a4} 0.1 each."""
    return MassFunction(
        four_frame,
        {0b0001: 0.2, 0b0010: 0.2, 0b0100: 0.2, 0b1000: 0.2, 0b0011: 0.1, 0b1100: 0.1},
    )


@pytest.fixture
def example1_interval(four_frame):
    return ProbabilityInterval(four_frame, [0.2] * 4, [0.3] * 4)


EXAMPLE1_LOWERS = np.array([0.2, 0.4, 0.8, 0.9])


@pytest.fixture
def example1_chain(four_frame, coin_frame):
    """Prior 0.2..0.3 per state, precise binary conditionals (0.2,0.4,0.8,0.9)."""
    links = (
        tuple(
            ProbabilityInterval(coin_frame, [p, 1 - p], [p, 1 - p])
            for p in EXAMPLE1_LOWERS
        ),
    )
    return ChainModel(
        frames=(four_frame, coin_frame),
        prior=ProbabilityInterval(four_frame, [0.2] * 4, [0.3] * 4),
        links=links,
    )
