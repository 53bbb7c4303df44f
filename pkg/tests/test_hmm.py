import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftparse.hmm import (
    OOV_TOKEN,
    FitConfig,
    Hmm,
    TriggerNotFoundError,
    baum_welch_fit,
    build_hmm,
    extend_alphabet,
    find_trigger_state,
    sequence_loglikelihood,
    state_occupancy,
    viterbi_decode,
)
from driftparse.mining import PatternCluster
from driftparse.preprocess import TokenSequence


def make_hmm(ps, pt, pe, states=None, emissions=None):
    ps = np.asarray(ps, dtype=float)
    pt = np.asarray(pt, dtype=float)
    pe = np.asarray(pe, dtype=float)
    n, m = pe.shape
    states = tuple(states or (f"s{i}" for i in range(n)))
    emissions = tuple(emissions or [f"e{k}" for k in range(m - 1)] + [OOV_TOKEN])
    model = Hmm(states, emissions, ps, pt, pe)
    model.validate()
    return model


def brute_force_loglik(model, observations):
    """Sum P(path, obs) over every state path by explicit enumeration."""
    obs = model.encode(observations)
    n = len(model.states)
    total = 0.0
    for path in itertools.product(range(n), repeat=len(obs)):
        p = model.ps[path[0]] * model.pe[path[0], obs[0]]
        for t in range(1, len(obs)):
            p *= model.pt[path[t - 1], path[t]] * model.pe[path[t], obs[t]]
        total += p
    return math.log(total)


def brute_force_viterbi(model, observations):
    """Best path by enumeration; ties broken toward the lexicographically
    smallest index tuple, matching first-argmax backtracking."""
    obs = model.encode(observations)
    n = len(model.states)
    best_path, best_logp = None, -math.inf
    for path in itertools.product(range(n), repeat=len(obs)):
        p = model.ps[path[0]] * model.pe[path[0], obs[0]]
        for t in range(1, len(obs)):
            p *= model.pt[path[t - 1], path[t]] * model.pe[path[t], obs[t]]
        logp = math.log(p) if p > 0 else -math.inf
        if logp > best_logp + 1e-12:
            best_path, best_logp = list(path), logp
    return best_path, best_logp


random_model = st.integers(min_value=2, max_value=3).flatmap(
    lambda n: st.integers(min_value=2, max_value=3).flatmap(
        lambda m: st.tuples(
            st.lists(
                st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=n, max_size=n),
                min_size=1,
                max_size=1,
            ),
            st.lists(
                st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=n, max_size=n),
                min_size=n,
                max_size=n,
            ),
            st.lists(
                st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=m + 1, max_size=m + 1),
                min_size=n,
                max_size=n,
            ),
        )
    )
).map(
    lambda raw: make_hmm(
        np.array(raw[0][0]) / np.sum(raw[0][0]),
        np.array(raw[1]) / np.sum(raw[1], axis=1, keepdims=True),
        np.array(raw[2]) / np.sum(raw[2], axis=1, keepdims=True),
    )
)


def obs_for(model, draw_len):
    symbols = list(model.emissions[:-1])
    return st.lists(st.sampled_from(symbols), min_size=1, max_size=draw_len)


class TestValidate:
    def test_good_model_passes(self):
        make_hmm([1.0], [[1.0]], [[0.5, 0.5]])

    def test_bad_row_sum_rejected(self):
        with pytest.raises(ValueError, match="does not sum to 1"):
            Hmm(("a",), ("x", OOV_TOKEN), np.array([1.0]), np.array([[1.0]]),
                np.array([[0.7, 0.7]])).validate()

    def test_negative_probability_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            Hmm(("a",), ("x", OOV_TOKEN), np.array([1.0]), np.array([[1.0]]),
                np.array([[1.5, -0.5]])).validate()

    def test_duplicate_state_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            Hmm(("a", "a"), ("x", OOV_TOKEN), np.array([0.5, 0.5]),
                np.full((2, 2), 0.5), np.full((2, 2), 0.5)).validate()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shapes"):
            Hmm(("a",), ("x", OOV_TOKEN), np.array([1.0]),
                np.full((2, 2), 0.5), np.array([[0.5, 0.5]])).validate()


class TestEncode:
    def test_known_and_unknown_symbols(self):
        model = make_hmm([1.0], [[1.0]], [[0.3, 0.3, 0.4]], emissions=("x", "y", OOV_TOKEN))
        assert list(model.encode(["y", "never-seen", "x"])) == [1, 2, 0]


class TestForward:
    def test_single_symbol_by_hand(self):
        model = make_hmm(
            [0.6, 0.4],
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.4, 0.1], [0.1, 0.8, 0.1]],
        )
        expected = math.log(0.6 * 0.5 + 0.4 * 0.1)
        assert sequence_loglikelihood(model, ["e0"]) == pytest.approx(expected)

    @given(random_model.flatmap(lambda m: st.tuples(st.just(m), obs_for(m, 5))))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_enumeration(self, model_obs):
        model, obs = model_obs
        assert sequence_loglikelihood(model, obs) == pytest.approx(
            brute_force_loglik(model, obs), rel=1e-9
        )

    def test_long_sequence_stays_finite(self):
        model = make_hmm(
            [0.5, 0.5],
            [[0.9, 0.1], [0.1, 0.9]],
            [[0.5, 0.4, 0.1], [0.2, 0.7, 0.1]],
        )
        obs = ["e0", "e1"] * 5000
        ll = sequence_loglikelihood(model, obs)
        assert math.isfinite(ll)
        assert ll < -0.3 * len(obs)  # every step multiplies in a probability < 0.7

    def test_empty_sequence_rejected(self):
        model = make_hmm([1.0], [[1.0]], [[0.5, 0.5]])
        with pytest.raises(ValueError):
            sequence_loglikelihood(model, [])


class TestViterbi:
    @given(random_model.flatmap(lambda m: st.tuples(st.just(m), obs_for(m, 5))))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_best_path_score(self, model_obs):
        model, obs = model_obs
        path, logp = viterbi_decode(model, obs)
        oracle_path, oracle_logp = brute_force_viterbi(model, obs)
        assert logp == pytest.approx(oracle_logp, rel=1e-9)
        # recompute the returned path's own score; it must equal the optimum
        enc = model.encode(obs)
        p = math.log(model.ps[path[0]]) + math.log(model.pe[path[0], enc[0]])
        for t in range(1, len(enc)):
            p += math.log(model.pt[path[t - 1], path[t]])
            p += math.log(model.pe[path[t], enc[t]])
        assert p == pytest.approx(oracle_logp, rel=1e-9)

    def test_tie_breaks_to_lowest_index(self):
        model = make_hmm(
            [0.5, 0.5],
            [[0.5, 0.5], [0.5, 0.5]],
            [[0.5, 0.5], [0.5, 0.5]],
            emissions=("x", OOV_TOKEN),
        )
        path, _ = viterbi_decode(model, ["x", "x", "x"])
        assert path == [0, 0, 0]

    def test_forward_upper_bounds_viterbi(self):
        model = make_hmm(
            [0.6, 0.4],
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.4, 0.1], [0.1, 0.8, 0.1]],
        )
        obs = ["e0", "e1", "e1", "e0"]
        _, best = viterbi_decode(model, obs)
        assert sequence_loglikelihood(model, obs) >= best


class TestBuildHmm:
    def lines(self, *token_lists):
        return [TokenSequence(f"e{i}", tuple(t)) for i, t in enumerate(token_lists)]

    def test_counts_by_hand(self):
        # two lines over states {a, b}: transitions a->b twice, b->a once
        corpus = self.lines(["a", "x", "b", "a"], ["a", "b", "y"])
        model = build_hmm(corpus, PatternCluster(frozenset({"a", "b"}), 2), smoothing_epsilon=1e-9)
        assert model.states == ("a", "b")
        assert model.emissions == ("x", "y", OOV_TOKEN)
        # start counts: a appears 3 times, b twice
        assert model.ps[0] == pytest.approx(3 / 5, abs=1e-6)
        ai, bi = 0, 1
        assert model.pt[ai, bi] == pytest.approx(1.0, abs=1e-6)  # a always followed by b
        assert model.pt[bi, ai] == pytest.approx(1.0, abs=1e-6)
        xi = model.emissions.index("x")
        yi = model.emissions.index("y")
        assert model.pe[ai, xi] == pytest.approx(1.0, abs=1e-6)  # a emits only x
        assert model.pe[bi, yi] == pytest.approx(1.0, abs=1e-6)

    def test_strict_adjacency_drops_skipping_bigram(self):
        corpus = self.lines(["a", "x", "b"])
        loose = build_hmm(corpus, PatternCluster(frozenset({"a", "b"}), 1), smoothing_epsilon=1e-9)
        strict = build_hmm(
            corpus, PatternCluster(frozenset({"a", "b"}), 1),
            smoothing_epsilon=1e-9, strict_adjacency=True,
        )
        assert loose.pt[0, 1] == pytest.approx(1.0, abs=1e-6)
        assert strict.pt[0, 1] == pytest.approx(0.5, abs=1e-6)  # uniform, no counts

    def test_oov_column_is_last_and_small(self):
        corpus = self.lines(["a", "x"])
        model = build_hmm(corpus, PatternCluster(frozenset({"a"}), 1))
        assert model.emissions[-1] == OOV_TOKEN
        assert model.pe[0, -1] < 1e-5

    def test_rows_are_stochastic(self, bundle_a):
        bundle_a.hmm.validate()

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            build_hmm([], PatternCluster(frozenset({"a"}), 1))
        with pytest.raises(ValueError):
            build_hmm(self.lines(["a"]), PatternCluster(frozenset(), 0))


class TestBaumWelch:
    def test_loglik_trace_nondecreasing(self):
        model = make_hmm(
            [0.6, 0.4],
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.4, 0.1], [0.1, 0.8, 0.1]],
        )
        seqs = [["e0", "e1", "e0"], ["e1", "e1"], ["e0"], ["e0", "e1", "e0"]]
        _, trace = baum_welch_fit(model, seqs, FitConfig(max_iterations=20, loglik_tolerance=1e-12))
        assert len(trace) >= 2
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_fixed_point_on_own_distribution(self):
        # a near-deterministic model trained on its own typical output
        # should barely move
        model = make_hmm(
            [0.99, 0.01],
            [[0.01, 0.99], [0.99, 0.01]],
            [[0.98, 0.01, 0.01], [0.01, 0.98, 0.01]],
        )
        seqs = [["e0", "e1", "e0", "e1"]] * 20
        fitted, _ = baum_welch_fit(model, seqs, FitConfig(max_iterations=5))
        assert fitted.pe[0, 0] > 0.95
        assert fitted.pe[1, 1] > 0.95
        assert fitted.pt[0, 1] > 0.95

    def test_recovers_planted_emissions(self):
        # start from a vague model; data generated by a two-state alternator
        # where state 0 always emits e0 and state 1 always emits e1
        vague = make_hmm(
            [0.5, 0.5],
            [[0.4, 0.6], [0.6, 0.4]],
            [[0.6, 0.3, 0.1], [0.3, 0.6, 0.1]],
        )
        seqs = [["e0", "e1"] * 6] * 30
        fitted, trace = baum_welch_fit(
            vague, seqs, FitConfig(max_iterations=50, loglik_tolerance=1e-9)
        )
        assert trace[-1] > trace[0]
        assert fitted.pe[0, 0] > 0.9
        assert fitted.pe[1, 1] > 0.9

    def test_alphabet_extension_covers_new_symbols(self):
        model = make_hmm([1.0], [[1.0]], [[0.9, 0.1]], emissions=("x", OOV_TOKEN))
        fitted, _ = baum_welch_fit(model, [["x", "z", "x"]], FitConfig(max_iterations=2))
        assert "z" in fitted.emissions
        assert fitted.emissions[-1] == OOV_TOKEN

    def test_extend_alphabet_noop_for_known(self):
        model = make_hmm([1.0], [[1.0]], [[0.9, 0.1]], emissions=("x", OOV_TOKEN))
        assert extend_alphabet(model, ["x"], 1e-6) is model

    def test_all_empty_sequences_rejected(self):
        model = make_hmm([1.0], [[1.0]], [[0.5, 0.5]])
        with pytest.raises(ValueError):
            baum_welch_fit(model, [[], []])

    def test_result_validates(self):
        model = make_hmm(
            [0.6, 0.4],
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.4, 0.1], [0.1, 0.8, 0.1]],
        )
        fitted, _ = baum_welch_fit(model, [["e0", "e1"]], FitConfig(max_iterations=3))
        fitted.validate()


class TestOccupancy:
    def test_sums_to_total_observations(self):
        model = make_hmm(
            [0.6, 0.4],
            [[0.7, 0.3], [0.2, 0.8]],
            [[0.5, 0.4, 0.1], [0.1, 0.8, 0.1]],
        )
        seqs = [["e0", "e1", "e0"], ["e1"]]
        occ = state_occupancy(model, seqs)
        assert occ.sum() == pytest.approx(4.0)
        assert np.all(occ >= 0)

    def test_empty_input_gives_zeros(self):
        model = make_hmm([1.0], [[1.0]], [[0.5, 0.5]])
        assert state_occupancy(model, []).tolist() == [0.0]


class TestTrigger:
    def lines(self, *token_lists):
        return [TokenSequence(f"e{i}", tuple(t)) for i, t in enumerate(token_lists)]

    def fixed_model(self, states):
        n = len(states)
        return make_hmm(
            np.full(n, 1 / n),
            np.full((n, n), 1 / n),
            np.full((n, 2), 0.5),
            states=states,
            emissions=("x", OOV_TOKEN),
        )

    def test_picks_most_frequent_numeric_follower(self):
        model = self.fixed_model(("ctdi", "kv"))
        corpus = self.lines(
            ["kv", "120.00", "ctdi", "16.66"],
            ["ctdi", "3.20"],
        )
        assert model.states[find_trigger_state(model, corpus)] == "ctdi"

    def test_tie_breaks_lexicographically(self):
        model = self.fixed_model(("beta", "alpha"))
        corpus = self.lines(["beta", "1.00", "alpha", "2.00"])
        assert model.states[find_trigger_state(model, corpus)] == "alpha"

    def test_counts_lines_not_occurrences(self):
        model = self.fixed_model(("a", "b"))
        corpus = self.lines(
            ["a", "1.00", "a", "2.00", "a", "3.00"],
            ["b", "1.00"],
            ["b", "2.00"],
        )
        assert model.states[find_trigger_state(model, corpus)] == "b"

    def test_no_numeric_follower_raises(self):
        model = self.fixed_model(("a",))
        with pytest.raises(TriggerNotFoundError):
            find_trigger_state(model, self.lines(["a", "word"]))

    def test_trained_model_trigger_is_kpi_token(self, bundle_a):
        assert bundle_a.pattern.trigger == "ctdi"
