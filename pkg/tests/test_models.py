import numpy as np
import pytest

from markagg import FirstOrderChain, lump_cost, map_predictor, optimal_aggregation, project_joint
from markagg.exceptions import AbsorbingState, DimensionMismatch, EmptyText, InvalidRates
from markagg.models import (
    TABLE1_PRED2_GROUPS,
    TOY_LUMP_PARTITION,
    TOY_PRED_PARTITION,
    MaintenanceRates,
    RateMatrix,
    bigram_train,
    block_stochastic_matrix,
    embed_jump_chain,
    gen_block_stochastic,
    gen_maintenance,
    gen_quasi_periodic,
    gen_toy,
    maintenance_state_names,
    perturb,
    preprocess_text,
    random_stochastic,
    sample_path,
    table1_reference_partition,
    toy_matrix,
)
from oracles import random_chain


class TestBlockStochastic:
    def test_single_block(self, rng):
        B = random_chain(rng, 4)
        np.testing.assert_array_equal(block_stochastic_matrix([4], [[1.0]], [[B]]), B)

    def test_layout(self, rng):
        A = random_chain(rng, 2)
        blocks = [[random_stochastic(2, 2, rng), random_stochastic(2, 3, rng)],
                  [random_stochastic(3, 2, rng), random_stochastic(3, 3, rng)]]
        P = block_stochastic_matrix([2, 3], A, blocks)
        np.testing.assert_allclose(P[:2, 2:], A[0, 1] * blocks[0][1])
        np.testing.assert_allclose(P[2:, :2], A[1, 0] * blocks[1][0])
        np.testing.assert_allclose(P.sum(axis=1), 1.0)

    def test_dimension_errors(self, rng):
        with pytest.raises(DimensionMismatch):
            block_stochastic_matrix([2, 2], np.eye(3))
        with pytest.raises(DimensionMismatch):
            block_stochastic_matrix([2, 2], np.eye(2), [[np.eye(3), None], [None, None]])

    def test_lumpable(self, rng):
        for _ in range(10):
            sizes = rng.integers(1, 4, size=3)
            c, g = gen_block_stochastic(sizes, random_chain(rng, 3), seed=int(rng.integers(1000)))
            assert lump_cost(c, g, 1) < 1e-10

    def test_permutation_predictable(self):
        c, g = gen_block_stochastic([3, 2, 4], np.eye(3)[[2, 0, 1]], seed=1)
        assert map_predictor(optimal_aggregation(c, g, 1)).error == 0.0


class TestPerturb:
    def test_endpoints(self, rng):
        P, E = random_chain(rng, 4), random_chain(rng, 4)
        np.testing.assert_allclose(perturb(P, 0.0, E).matrix, P, atol=1e-15)
        np.testing.assert_allclose(perturb(P, 1.0, E).matrix, E, atol=1e-15)

    def test_random_E_reproducible(self, rng):
        P = random_chain(rng, 4)
        a = perturb(P, 0.3, seed=1).matrix
        b = perturb(P, 0.3, seed=1).matrix
        np.testing.assert_array_equal(a, b)
        assert a.min() > 0

    def test_random_stochastic_footnote(self):
        E = random_stochastic(5, rng=0)
        raw = np.random.default_rng(0).random((5, 5))
        np.testing.assert_allclose(E, raw / raw.sum(axis=1, keepdims=True))

    def test_bad_epsilon(self, rng):
        with pytest.raises(ValueError):
            perturb(random_chain(rng, 3), 1.5)


class TestQuasiPeriodic:
    def test_structure(self):
        P, g = gen_quasi_periodic(10, seed=0)
        assert P.shape == (20, 20)
        assert np.all(P[:10, :10] == 0) and np.all(P[10:, 10:] == 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0)
        np.testing.assert_array_equal(g.labels, [0] * 10 + [1] * 10)

    def test_deterministic_alternation(self):
        P, g = gen_quasi_periodic(10, seed=0)
        J = project_joint(FirstOrderChain(P), g, 2).probs
        np.testing.assert_allclose(J, [[0, 0.5], [0.5, 0]], atol=1e-12)
        assert map_predictor(optimal_aggregation(FirstOrderChain(P), g, 1)).error == 0.0

    def test_eps_grid(self):
        P, g = gen_quasi_periodic(10, seed=0)
        E = random_stochastic(20, rng=1)
        for eps in np.arange(1, 10) / 10:
            assert perturb(P, eps, E).matrix.min() > 0


class TestToy:
    def test_row_five(self):
        for p in (0.5, 0.3):
            np.testing.assert_allclose(toy_matrix(p)[4], [p, 1 - p, 0, 0, 0, 0])

    def test_predictability_improves(self):
        errs = [map_predictor(optimal_aggregation(gen_toy(0.5, e, seed=0), TOY_PRED_PARTITION, 2)).error
                for e in (0.1, 0.01, 0.001)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.002

    def test_quasi_lumpable(self):
        costs = [lump_cost(gen_toy(0.3, e, seed=0), TOY_LUMP_PARTITION, 1) for e in (0.1, 0.01, 0.001)]
        assert costs[0] > costs[1] > costs[2]
        assert costs[2] < 0.01


class TestMaintenance:
    def test_dimensions(self):
        R, g = gen_maintenance(4)
        assert R.n_states == 12 and g.n_groups == 7
        assert R.names == maintenance_state_names(4)

    def test_rows_sum_to_zero(self):
        for k in range(1, 8):
            R, _ = gen_maintenance(k)
            np.testing.assert_allclose(R.matrix.sum(axis=1), 0.0, atol=1e-14)

    def test_reference_partition(self):
        R, g = gen_maintenance(3)
        idx = {n: i for i, n in enumerate(R.names)}
        groups = {frozenset(R.names[i] for i in grp) for grp in g.groups()}
        assert groups == {frozenset(s) for s in
                          (["W"], ["D1", "M1"], ["D2", "M2"], ["D3", "M3"], ["F1", "M4"], ["F0"])}
        assert g.labels[idx["W"]] == 0

    def test_wiring(self):
        rates = MaintenanceRates(lambda_0=0.1, lambda_1=1.0, lambda_m=0.3, mu_0=0.5, mu_1=0.7, mu_m=2.0)
        R, _ = gen_maintenance(4, rates)
        Q = R.matrix
        i = {n: j for j, n in enumerate(R.names)}
        assert Q[i["D2"], i["D3"]] == 1.0 and Q[i["D2"], i["F0"]] == 0.1 and Q[i["D2"], i["M3"]] == 0.3
        assert Q[i["D4"], i["F1"]] == 1.0 and Q[i["D4"], i["M5"]] == 0.3
        assert Q[i["M1"], i["W"]] == 2.0 and Q[i["M2"], i["W"]] == 2.0
        assert Q[i["M3"], i["D1"]] == 2.0 and Q[i["M5"], i["D3"]] == 2.0
        assert Q[i["F0"], i["W"]] == 0.5 and Q[i["F1"], i["W"]] == 0.7

    def test_two_step_predictability(self):
        # entering D_{l+1}'s group and then maintenance returns to group l with high probability
        R, g = gen_maintenance(4)
        chain = embed_jump_chain(R)
        q = optimal_aggregation(chain, g, 2)
        for l in range(1, 4):
            assert np.argmax(q.transitions[l + 1, l - 1]) == l

    def test_invalid_rates(self):
        with pytest.raises(InvalidRates):
            gen_maintenance(3, MaintenanceRates(lambda_m=0.0))
        with pytest.raises(InvalidRates):
            gen_maintenance(0)
        with pytest.raises(InvalidRates):
            RateMatrix([[0.0, -1.0], [1.0, 0.0]])


class TestJumpChain:
    def test_two_state(self):
        np.testing.assert_array_equal(embed_jump_chain(RateMatrix([[-3.0, 3.0], [0.5, -0.5]])).matrix,
                                      [[0, 1], [1, 0]])

    def test_maintenance_w_row(self):
        rates = MaintenanceRates()
        R, _ = gen_maintenance(3, rates)
        P = embed_jump_chain(R).matrix
        i = {n: j for j, n in enumerate(R.names)}
        total = rates.lambda_m + rates.lambda_1 + rates.lambda_0
        assert P[i["W"], i["M1"]] == pytest.approx(rates.lambda_m / total)
        assert P[i["W"], i["D1"]] == pytest.approx(rates.lambda_1 / total)
        assert P[i["W"], i["F0"]] == pytest.approx(rates.lambda_0 / total)
        assert np.all(np.diag(P) == 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0)

    def test_absorbing(self):
        with pytest.raises(AbsorbingState):
            embed_jump_chain(RateMatrix([[0.0, 0.0], [1.0, -1.0]]))


class TestBigram:
    def test_alternator(self):
        m = bigram_train("ab" * 50, smoothing=1e-12)
        assert m.alphabet == ["a", "b"]
        np.testing.assert_allclose(m.chain.matrix, [[0, 1], [1, 0]], atol=1e-9)

    def test_aab_unsmoothed(self):
        m = bigram_train("aab", smoothing=0.0)
        np.testing.assert_allclose(m.chain.matrix[0], [0.5, 0.5])
        np.testing.assert_array_equal(m.counts, [[1, 1], [0, 0]])

    def test_unsmoothed_reducible_warns(self):
        with pytest.warns(UserWarning, match="reducible"):
            bigram_train("abbb", smoothing=0.0)

    def test_smoothing_formula(self):
        m = bigram_train("abca", smoothing=0.5)
        # row 'a': counts [0, 1, 0], N = 3
        np.testing.assert_allclose(m.chain.matrix[0], [0.5 / 2.5, 1.5 / 2.5, 0.5 / 2.5])
        assert m.chain.matrix.min() > 0

    def test_first_appearance_order(self):
        assert bigram_train("cabbage").alphabet == ["c", "a", "b", "g", "e"]

    def test_empty(self):
        with pytest.raises(EmptyText):
            bigram_train("")

    def test_preprocess(self):
        text = "Chapter I\n\nIt was, he said.\nAnother line!\n\nII\nEnd."
        assert preprocess_text(text) == "It was, he said. Another line! End."
        assert "\n" in preprocess_text(text, strip_linebreaks=False)
        assert preprocess_text("I\nam", heading_pattern=None) == "I am"

    def test_encode_round_trip(self):
        m = bigram_train("hello world")
        seq = m.encode("hello")
        assert "".join(m.alphabet[i] for i in seq) == "hello"


def test_table1_reference():
    alphabet = list("ae bt\"~")
    g = table1_reference_partition(alphabet)
    assert g.labels.tolist() == [2, 2, 0, 1, 1, 3, 3]
    assert sum(len(s) for s in TABLE1_PRED2_GROUPS) == len(set("".join(TABLE1_PRED2_GROUPS)))


def test_sample_path_frequencies():
    c = FirstOrderChain([[0.9, 0.1], [0.2, 0.8]])
    path = sample_path(c, 200_000, rng=0)
    assert abs(np.mean(path == 0) - 2 / 3) < 0.01
