import numpy as np
import pytest

from credalchains import (
    SamplerConfig,
    StructuralError,
    goodness,
    sample_chain,
    sample_intervals,
    validate_coherence,
)


class TestSampleIntervals:
    def test_all_emitted_are_coherent(self):
        for n in (2, 3, 5, 8):
            for iv in sample_intervals(SamplerConfig(n=n, seed=n), 50):
                assert validate_coherence(iv).coherent

    def test_width_cap_respected(self):
        for iv in sample_intervals(SamplerConfig(n=4, epsilon=0.1, seed=3), 100):
            assert iv.widths.max() <= 0.1 + 1e-12

    def test_deterministic_given_seed(self):
        cfg = SamplerConfig(n=3, seed=99)
        first = sample_intervals(cfg, 10)
        second = sample_intervals(cfg, 10)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.lower, b.lower)
            np.testing.assert_array_equal(a.upper, b.upper)

    def test_binary_symmetry_and_rejection_agreement(self):
        # the binary coherent polytope maps to the triangle 0 <= l <= u <= 1;
        # under the uniform measure E[l + u] = 1 by the (l, u) -> (1-u, 1-l)
        # reflection, and the mean width must match plain rejection sampling
        samples = sample_intervals(SamplerConfig(n=2, seed=12345), 10000)
        sums = np.array([iv.lower[0] + iv.upper[0] for iv in samples])
        widths = np.array([iv.widths[0] for iv in samples])
        assert abs(sums.mean() - 1.0) < 0.02
        rng = np.random.default_rng(7)
        pts = rng.random((400000, 2))
        acc = pts[pts[:, 0] <= pts[:, 1]]
        assert abs(widths.mean() - (acc[:, 1] - acc[:, 0]).mean()) < 0.02

    def test_bad_config_rejected(self):
        with pytest.raises(StructuralError):
            SamplerConfig(n=1, seed=0)
        with pytest.raises(StructuralError):
            SamplerConfig(n=3, epsilon=0.0, seed=0)
        with pytest.raises(StructuralError):
            SamplerConfig(n=3, thinning=0, seed=0)

    def test_small_epsilon_has_interior(self):
        # the width-capped polytope keeps a neighborhood of the uniform
        # distribution for any positive epsilon
        for iv in sample_intervals(SamplerConfig(n=6, epsilon=0.01, seed=5), 20):
            assert validate_coherence(iv).coherent
            assert iv.widths.max() <= 0.01 + 1e-12


class TestSampleChain:
    def test_structure(self):
        chain = sample_chain(SamplerConfig(n=3, seed=1), 2)
        assert chain.length == 2
        assert len(chain.links) == 1
        assert len(chain.links[0]) == 3  # n(k-1) + 1 = 4 intervals drawn
        chain.validate()

    def test_bitwise_reproducible(self):
        a = sample_chain(SamplerConfig(n=4, seed=77), 4)
        b = sample_chain(SamplerConfig(n=4, seed=77), 4)
        np.testing.assert_array_equal(a.prior.lower, b.prior.lower)
        for la, lb in zip(a.links, b.links):
            for iva, ivb in zip(la, lb):
                np.testing.assert_array_equal(iva.lower, ivb.lower)
                np.testing.assert_array_equal(iva.upper, ivb.upper)

    def test_epsilon_restricted_chain(self):
        chain = sample_chain(SamplerConfig(n=3, epsilon=0.05, seed=2), 3)
        for link in chain.links:
            for iv in link:
                assert iv.widths.max() <= 0.05 + 1e-12

    def test_chain_needs_two_nodes(self):
        with pytest.raises(StructuralError):
            sample_chain(SamplerConfig(n=3, seed=0), 1)

    def test_good_and_bad_intervals_both_occur(self):
        # the walk explores the polytope; at n = 4 both kinds show up
        ivs = sample_intervals(SamplerConfig(n=4, seed=21), 200)
        kinds = {goodness(iv).is_good for iv in ivs}
        assert kinds == {True, False}
