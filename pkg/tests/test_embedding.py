import numpy as np
import pytest

from credalchains import (
    ConditionalMassTable,
    Frame,
    MassFunction,
    ProductFrame,
    combine_dempster,
    embed_conditional,
    full_chain_joint,
    joint,
    marginalize,
    mass_step,
    sgm_from_interval,
    vacuous,
    vacuous_extend,
)
from conftest import random_mass


def random_table(rng, n_parent, n_child, prefix=""):
    parent = Frame.of_size(n_parent, prefix + "a")
    child = Frame.of_size(n_child, prefix + "b")
    masses = tuple(random_mass(rng, child) for _ in range(n_parent))
    return ConditionalMassTable(parent, child, masses)


class TestEmbeddingBullets:
    def test_conditioning_recovers_each_conditional(self):
        # combining with a deterministic parent mass and projecting to the
        # child must give back the original conditional, for every state
        rng = np.random.default_rng(0)
        for _ in range(10):
            table = random_table(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
            embedded = embed_conditional(table)
            for i in range(table.parent.size):
                det = MassFunction(table.parent, {1 << i: 1.0})
                lifted = vacuous_extend(det, embedded.frame, positions=(0,))
                combined, _ = combine_dempster(embedded, lifted)
                recovered = marginalize(combined, 1)
                assert recovered.allclose(table.masses[i], tol=1e-12)

    def test_parent_marginal_is_vacuous(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            table = random_table(rng, 3, 2)
            embedded = embed_conditional(table)
            assert marginalize(embedded, 0).is_vacuous

    def test_pairwise_no_conflict(self):
        rng = np.random.default_rng(2)
        from credalchains.embedding import _embedded_single

        table = random_table(rng, 3, 3)
        product = ProductFrame((table.parent, table.child))
        singles = [_embedded_single(table, i, product) for i in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                _, k = combine_dempster(singles[i], singles[j])
                assert k == 0.0

    def test_all_vacuous_conditionals_embed_to_vacuous(self):
        parent, child = Frame.of_size(3, "a"), Frame.of_size(2, "b")
        table = ConditionalMassTable(parent, child, tuple(vacuous(child) for _ in range(3)))
        assert embed_conditional(table).is_vacuous


class TestJoint:
    def test_focal_product_formula(self):
        # joint mass of U_{i in V} ({a_i} x T_i) is m_A(V) * prod m_i(T_i)
        rng = np.random.default_rng(3)
        for _ in range(10):
            n, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            table = random_table(rng, n, m)
            m_a = random_mass(rng, table.parent)
            jm = joint(m_a, embed_conditional(table))
            for v, w in m_a.items():
                states = [i for i in range(n) if v >> i & 1]
                choices = [list(table.masses[i].items()) for i in states]

                def walk(level, mask, prob):
                    if level == len(states):
                        assert jm.get(mask) == pytest.approx(w * prob, abs=1e-12)
                        return
                    i = states[level]
                    for t, q in choices[level]:
                        walk(level + 1, mask | (t << (i * m)), prob * q)

                walk(0, 0, 1.0)

    def test_bayesian_joint_is_product_distribution(self):
        parent, child = Frame.of_size(2, "a"), Frame.of_size(2, "b")
        pa = np.array([0.3, 0.7])
        cond = np.array([[0.2, 0.8], [0.6, 0.4]])
        m_a = MassFunction(parent, {1: pa[0], 2: pa[1]})
        table = ConditionalMassTable(
            parent,
            child,
            tuple(
                MassFunction(child, {1: cond[i, 0], 2: cond[i, 1]}) for i in range(2)
            ),
        )
        jm = joint(m_a, embed_conditional(table))
        assert jm.is_bayesian
        for i in range(2):
            for j in range(2):
                state = i * 2 + j
                assert jm.get(1 << state) == pytest.approx(pa[i] * cond[i, j], abs=1e-12)

    def test_example_marginal_lower(self, example1_mass, four_frame):
        # explicit joint route to the closed-form value 0.54
        child = Frame.of_size(2, "b")
        lowers = [0.2, 0.4, 0.8, 0.9]
        masses = tuple(
            MassFunction(child, {0b01: p, 0b10: 1.0 - p}) for p in lowers
        )
        table = ConditionalMassTable(four_frame, child, masses)
        jm = joint(example1_mass, embed_conditional(table))
        marginal = marginalize(jm, 1)
        assert marginal.bel(0b01) == pytest.approx(0.54, abs=1e-12)

    def test_vacuous_prior_gives_product_form(self):
        rng = np.random.default_rng(4)
        table = random_table(rng, 3, 2)
        jm = joint(vacuous(table.parent), embed_conditional(table))
        marginal = marginalize(jm, 1)
        lo = np.array([table.masses[i].bel(0b01) for i in range(3)])
        assert marginal.bel(0b01) == pytest.approx(np.prod(lo), abs=1e-12)


class TestChainJoint:
    def test_two_nodes_equals_joint_marginal(self):
        rng = np.random.default_rng(5)
        table = random_table(rng, 3, 3)
        m_a = random_mass(rng, table.parent)
        via_chain = full_chain_joint(m_a, [list(table.masses)])
        via_joint = marginalize(joint(m_a, embed_conditional(table)), 1)
        assert via_chain.allclose(via_joint, tol=1e-12)

    def test_vacuous_links_stay_vacuous(self):
        frames = [Frame.of_size(2, f"x{i}") for i in range(3)]
        prior = vacuous(frames[0])
        links = [[vacuous(frames[1])] * 2, [vacuous(frames[2])] * 2]
        assert full_chain_joint(prior, links).is_vacuous

    def test_stepwise_equals_full_joint(self):
        # the equality is asserted inside full_chain_joint; exercise it on
        # random small chains of mixed sizes
        rng = np.random.default_rng(6)
        for sizes in ((2, 2, 2, 2), (2, 3, 2), (3, 3, 3), (4, 2)):
            frames = [Frame.of_size(s, f"y{i}") for i, s in enumerate(sizes)]
            prior = random_mass(rng, frames[0])
            links = [
                [random_mass(rng, frames[i + 1]) for _ in range(sizes[i])]
                for i in range(len(sizes) - 1)
            ]
            marginal = full_chain_joint(prior, links)
            stepwise = prior
            for link in links:
                stepwise = mass_step(stepwise, link)
            assert marginal.allclose(stepwise, tol=1e-12)

    def test_size_guard(self):
        frames = [Frame.of_size(5, f"z{i}") for i in range(2)]
        prior = vacuous(frames[0])
        links = [[vacuous(frames[1])] * 5]
        with pytest.raises(Exception):
            full_chain_joint(prior, links)


class TestMassStep:
    def test_matches_sgm_closed_form(self, urn_interval, coin_frame):
        from credalchains import fix_uniform, theorem1_step

        fixed = fix_uniform(urn_interval)
        prior = sgm_from_interval(fixed)
        cond = [
            MassFunction(coin_frame, {0b01: lo, 0b10: 1.0 - hi, 0b11: hi - lo})
            for lo, hi in [(0.8, 0.9), (0.6, 0.7), (0.4, 0.5), (0.2, 0.3)]
        ]
        stepped = mass_step(prior, cond)
        cl = np.array([[m.bel(1), m.bel(2)] for m in cond])
        cu = np.array([[m.pl(1), m.pl(2)] for m in cond])
        lo, hi = theorem1_step(prior, cl, cu)
        np.testing.assert_allclose(
            [stepped.bel(1), stepped.bel(2)], lo, atol=1e-12
        )
        np.testing.assert_allclose([stepped.pl(1), stepped.pl(2)], hi, atol=1e-12)
