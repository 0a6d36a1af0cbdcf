import numpy as np
import pytest

from credalchains import (
    ChainModel,
    CredalLinearInstance,
    DomainError,
    Frame,
    ProbabilityInterval,
    brute_force_bounds,
    coherent_envelope,
    credal_chain_bounds,
    credal_vertices,
    greedy_linear_max,
    greedy_linear_min,
)
from conftest import random_chain, random_coherent


class TestGreedy:
    def test_symmetric_band_example(self, example1_interval):
        value, arg = greedy_linear_min(
            CredalLinearInstance([0.2, 0.4, 0.8, 0.9], example1_interval)
        )
        assert value == pytest.approx(0.52, abs=1e-12)
        np.testing.assert_allclose(arg, [0.3, 0.3, 0.2, 0.2], atol=1e-12)

    def test_urn_example(self, urn_interval):
        value, arg = greedy_linear_min(
            CredalLinearInstance([0.8, 0.6, 0.4, 0.2], urn_interval)
        )
        assert value == pytest.approx(0.328, abs=1e-12)
        np.testing.assert_allclose(arg, [0.06, 0.10, 0.26, 0.58], atol=1e-12)

    def test_precise_interval_is_fixed_point(self):
        frame = Frame.of_size(3)
        p = np.array([0.2, 0.5, 0.3])
        interval = ProbabilityInterval(frame, p, p)
        c = np.array([1.0, -2.0, 0.5])
        vmin, _ = greedy_linear_min(CredalLinearInstance(c, interval))
        vmax, _ = greedy_linear_max(CredalLinearInstance(c, interval))
        assert vmin == pytest.approx(float(c @ p), abs=1e-12)
        assert vmax == pytest.approx(float(c @ p), abs=1e-12)

    def test_min_max_duality(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            interval = random_coherent(rng, Frame.of_size(n))
            c = rng.normal(size=n)
            vmin, _ = greedy_linear_min(CredalLinearInstance(c, interval))
            vmax, _ = greedy_linear_max(CredalLinearInstance(-c, interval))
            assert vmin == pytest.approx(-vmax, abs=1e-12)

    def test_argmin_is_feasible(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            interval = random_coherent(rng, Frame.of_size(n))
            _, x = greedy_linear_min(CredalLinearInstance(rng.normal(size=n), interval))
            assert np.all(x >= interval.lower - 1e-12)
            assert np.all(x <= interval.upper + 1e-12)
            assert x.sum() == pytest.approx(1.0, abs=1e-12)

    def test_incoherent_rejected(self):
        frame = Frame.of_size(2)
        bad = ProbabilityInterval(frame, [0.6, 0.6], [0.7, 0.7])
        with pytest.raises(DomainError):
            greedy_linear_min(CredalLinearInstance([1.0, 0.0], bad))


class TestVertices:
    def test_binary_credal_set_is_a_segment(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            interval = random_coherent(rng, Frame.of_size(2))
            assert len(credal_vertices(interval)) <= 2

    def test_vertices_are_feasible_and_cover_greedy(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            interval = random_coherent(rng, Frame.of_size(3))
            verts = credal_vertices(interval)
            assert np.all(verts >= interval.lower - 1e-9)
            assert np.all(verts <= interval.upper + 1e-9)
            np.testing.assert_allclose(verts.sum(axis=1), 1.0, atol=1e-9)
            c = rng.normal(size=3)
            vmin, _ = greedy_linear_min(CredalLinearInstance(c, interval))
            assert min(float(c @ v) for v in verts) == pytest.approx(vmin, abs=1e-9)


class TestChainBounds:
    def test_two_node_chain_reduces_to_greedy(self, urn_chain, urn_interval):
        (lo, hi), = credal_chain_bounds(urn_chain)
        vh, _ = greedy_linear_min(
            CredalLinearInstance([0.8, 0.6, 0.4, 0.2], urn_interval)
        )
        assert lo[0] == pytest.approx(vh, abs=1e-12)
        assert lo[0] == pytest.approx(0.328, abs=1e-12)

    def test_precise_chain_is_matrix_product(self):
        rng = np.random.default_rng(4)
        n, k = 3, 4
        frames = tuple(Frame.of_size(n, f"x{l}") for l in range(k))
        dists = [rng.dirichlet(np.ones(n)) for _ in range(1 + n * (k - 1))]
        prior = ProbabilityInterval(frames[0], dists[0], dists[0])
        links, used = [], 1
        mats = []
        for li in range(k - 1):
            rows = [dists[used + j] for j in range(n)]
            used += n
            mats.append(np.stack(rows))
            links.append(
                tuple(ProbabilityInterval(frames[li + 1], r, r) for r in rows)
            )
        chain = ChainModel(frames=frames, prior=prior, links=tuple(links))
        bounds = credal_chain_bounds(chain)
        marginal = dists[0]
        for li, (lo, hi) in enumerate(bounds):
            marginal = marginal @ mats[li]
            np.testing.assert_allclose(lo, marginal, atol=1e-12)
            np.testing.assert_allclose(hi, marginal, atol=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(2, 4))
            k = int(rng.integers(2, 5))
            chain = random_chain(rng, n, k)
            dp = credal_chain_bounds(chain)
            bf = brute_force_bounds(chain)
            for (lo1, hi1), (lo2, hi2) in zip(dp, bf):
                np.testing.assert_allclose(lo1, lo2, atol=1e-9)
                np.testing.assert_allclose(hi1, hi2, atol=1e-9)

    def test_monotone_under_widening(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            n, k = 3, 3
            chain = random_chain(rng, n, k)
            base = credal_chain_bounds(chain)
            li = int(rng.integers(0, k - 1))
            si = int(rng.integers(0, n))
            iv = chain.links[li][si]
            widened = coherent_envelope(
                iv.frame,
                np.clip(iv.lower - 0.05, 0.0, 1.0),
                np.clip(iv.upper + 0.05, 0.0, 1.0),
            )
            new_link = tuple(
                widened if j == si else chain.links[li][j] for j in range(n)
            )
            new_links = tuple(
                new_link if l == li else chain.links[l] for l in range(k - 1)
            )
            wide_chain = ChainModel(chain.frames, chain.prior, new_links)
            wide = credal_chain_bounds(wide_chain)
            for (lo1, hi1), (lo2, hi2) in zip(base, wide):
                assert np.all(lo2 <= lo1 + 1e-9)
                assert np.all(hi2 >= hi1 - 1e-9)

    def test_brute_force_size_guard(self):
        rng = np.random.default_rng(7)
        with pytest.raises(DomainError):
            brute_force_bounds(random_chain(rng, 4, 2))
