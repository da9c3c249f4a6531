import math

import numpy as np
import pytest

from cslscert.automaton import full_shift, golden_mean, iter_words, walk_probability
from cslscert.exceptions import DimensionMismatch, NormError, ParseError
from cslscert.products import enumerate_products
from cslscert.sampling import (
    ObservationSet,
    SamplingConfig,
    ingest,
    normalize_pairs,
    observation_rng,
    sample_sphere,
    sample_walk,
    synthesize,
    write_csv,
)
from cslscert.system import SystemSpec


def test_sphere_one_dimensional_signs():
    rng = np.random.default_rng(0)
    draws = np.array([sample_sphere(1, rng)[0] for _ in range(4000)])
    assert set(np.unique(draws)) == {-1.0, 1.0}
    assert abs(np.mean(draws > 0) - 0.5) < 4 * 0.5 / math.sqrt(4000)


def test_sphere_mean_and_norm():
    rng = np.random.default_rng(1)
    X = np.array([sample_sphere(3, rng) for _ in range(100_000)])
    assert np.all(np.abs(np.linalg.norm(X, axis=1) - 1) <= 1e-12)
    # each coordinate has variance 1/3; 4 sigma of the mean is about 0.0073
    assert np.all(np.abs(X.mean(axis=0)) < 0.02)


def test_walk_label_frequencies():
    rng = np.random.default_rng(2)
    labels = [sample_walk(full_shift(2), 1, rng)[0] for _ in range(100_000)]
    assert abs(np.mean(np.array(labels) == 1) - 0.5) < 0.01
    labels = [sample_walk(golden_mean(), 1, rng)[0] for _ in range(100_000)]
    assert abs(np.mean(np.array(labels) == 2) - 0.25) < 0.01


def test_walks_are_accepted(corpus_automaton):
    rng = np.random.default_rng(3)
    for _ in range(300):
        assert corpus_automaton.accepts(sample_walk(corpus_automaton, 7, rng))


def test_word_frequencies_match_walk_probability():
    g = golden_mean()
    rng = np.random.default_rng(4)
    n_walks = 100_000
    for length in (1, 2, 3):
        counts = {}
        for _ in range(n_walks):
            w = sample_walk(g, length, rng)
            counts[w] = counts.get(w, 0) + 1
        for word, p in iter_words(g, length):
            se = math.sqrt(p * (1 - p) / n_walks)
            assert abs(counts.get(word, 0) / n_walks - p) <= 3 * se + 1e-12
        assert set(counts) <= {w for w, _ in iter_words(g, length)}


def test_synthesize_half_identity(half_identity):
    obs = synthesize(half_identity, SamplingConfig(50, 2, seed=7))
    assert np.allclose(obs.xl, 0.25 * obs.x0)
    assert np.allclose(np.linalg.norm(obs.x0, axis=1), 1, atol=1e-12)


def test_synthesize_is_deterministic(half_identity):
    a = synthesize(half_identity, SamplingConfig(20, 3, seed=11))
    b = synthesize(half_identity, SamplingConfig(20, 3, seed=11))
    assert a.x0.tobytes() == b.x0.tobytes() and a.xl.tobytes() == b.xl.tobytes()
    c = synthesize(half_identity, SamplingConfig(20, 3, seed=12))
    assert c.x0.tobytes() != a.x0.tobytes()


def test_streams_are_per_index():
    system = SystemSpec(np.random.default_rng(0).standard_normal((2, 2, 2)), golden_mean())
    full = synthesize(system, SamplingConfig(30, 4, seed=5))
    head = synthesize(system, SamplingConfig(10, 4, seed=5))
    assert np.array_equal(full.x0[:10], head.x0)
    assert np.array_equal(full.xl[:10], head.xl)
    # index i is reproducible from its own stream alone
    x = sample_sphere(2, observation_rng(5, 17))
    assert np.array_equal(x, full.x0[17])


def test_hand_product_direction():
    system = SystemSpec(np.array([np.diag([2.0, 0.0]), np.diag([0.0, 2.0])]), full_shift(2))
    x = np.array([1.0, 0.0])
    for lab in (1, 1):
        x = system.matrices[lab - 1] @ x
    assert np.allclose(x, [4.0, 0.0])


def test_synthesized_endpoints_come_from_products():
    rng = np.random.default_rng(6)
    system = SystemSpec(rng.standard_normal((2, 2, 2)), golden_mean())
    products = enumerate_products(system, 3)
    obs = synthesize(system, SamplingConfig(200, 3, seed=1))
    for x0, xl, word in obs:
        errs = [np.linalg.norm(e.matrix @ x0 - xl) for e in products.entries]
        assert min(errs) <= 1e-9
        assert np.allclose(system.product(word) @ x0, xl)
        assert walk_probability(system.automaton, word) > 0


def test_strip_drops_words(half_identity):
    obs = synthesize(half_identity, SamplingConfig(5, 1))
    assert obs.words is not None and obs.strip().words is None


def test_csv_round_trip(tmp_path, half_identity):
    obs = synthesize(half_identity, SamplingConfig(10, 3, seed=2))
    path = tmp_path / "traj.csv"
    write_csv(obs, path)
    header = path.read_text().splitlines()[0]
    assert header == "id,x0_1,x0_2,xl_1,xl_2"
    back = ingest(path)
    assert np.array_equal(back.xl, obs.xl)
    assert np.array_equal(back.x0, obs.x0)


def test_ingest_two_rows(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("id,x0_1,x0_2,xl_1,xl_2\n0,1,0,0.5,0\n1,0,1,0,0.5\n")
    assert len(ingest(path)) == 2


def test_ingest_rejects_off_sphere(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("id,x0_1,x0_2,xl_1,xl_2\n0,1,0,0.5,0\nrow7,0.9,0,0,0.5\n")
    with pytest.raises(NormError, match="row7"):
        ingest(path)


def test_ingest_renormalises_near_unit(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("id,x0_1,x0_2,xl_1,xl_2\n0,1.0000005,0,0.5,0\n")
    obs = ingest(path)
    assert np.linalg.norm(obs.x0[0]) == pytest.approx(1.0, abs=1e-15)


def test_ingest_dimension_and_parse_errors(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("id,x0_1,x0_2,xl_1,xl_2\n0,1,0,0.5,0\n1,1,0,0.5\n")
    with pytest.raises(DimensionMismatch) as info:
        ingest(path)
    assert info.value.line == 3
    path.write_text("id,x0_1,x0_2,xl_1,xl_2\n0,1,zero,0.5,0\n")
    with pytest.raises(ParseError):
        ingest(path)
    path.write_text("id,x0_1,xl_1,x0_2\n")
    with pytest.raises(ParseError):
        ingest(path)


def test_normalize_pairs_scales_jointly():
    x0 = np.array([[3.0, 4.0]])
    xl = np.array([[1.0, 2.0]])
    obs = normalize_pairs(x0, xl)
    assert np.allclose(obs.x0, [[0.6, 0.8]])
    assert np.allclose(obs.xl, [[0.2, 0.4]])


def test_observation_set_shape_check():
    with pytest.raises(DimensionMismatch):
        ObservationSet(np.zeros((2, 2)), np.zeros((2, 3)))
