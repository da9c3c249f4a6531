import math

import numpy as np
import pytest

from cslscert.automaton import Automaton, full_shift, golden_mean
from cslscert.baseline import closed_walk_words, cjsr_bracket, cjsr_lower, gamma_model
from cslscert.exceptions import TooManyWords
from cslscert.numerics import spectral_radius
from cslscert.products import enumerate_products
from cslscert.sampling import sample_sphere, sample_walk
from cslscert.system import SystemSpec
from conftest import corpus_automata, random_stable_system, rotation
from oracles import lmi_rate_2d


def test_gamma_model_half_identity():
    for automaton in (full_shift(1), golden_mean()):
        system = SystemSpec(np.array([0.5 * np.eye(2)] * automaton.alphabet_size), automaton)
        gamma, P = gamma_model(system, 1)
        assert gamma == pytest.approx(0.5, abs=1e-6)
        assert np.allclose(P, np.eye(2), atol=1e-5)


def test_gamma_model_against_grid():
    system = SystemSpec(np.array([np.diag([0.9, 0.2]), 0.8 * rotation(np.pi / 2)]), full_shift(2))
    gamma, _ = gamma_model(system, 1)
    assert gamma == pytest.approx(lmi_rate_2d(system.matrices, 1, 1e6), abs=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_gamma_model_against_grid_random(seed):
    rng = np.random.default_rng(seed)
    system = random_stable_system(rng, golden_mean())
    for length in (1, 2):
        gamma, _ = gamma_model(system, length)
        products = enumerate_products(system, length).matrices
        assert gamma == pytest.approx(lmi_rate_2d(products, length, 1e6), abs=1e-3)


def test_gamma_model_dominates_product_radii():
    rng = np.random.default_rng(4)
    system = SystemSpec(rng.standard_normal((2, 2, 2)), golden_mean())
    for length in (1, 3):
        gamma, P = gamma_model(system, length)
        for A in enumerate_products(system, length).matrices:
            assert spectral_radius(A) <= gamma ** length * (1 + 1e-9)
            M = A.T @ P @ A - (gamma + 1e-6) ** (2 * length) * P
            assert np.linalg.eigvalsh(M)[-1] <= 1e-6 * np.linalg.norm(P)


def test_cjsr_lower_examples():
    system = SystemSpec(np.array([0.7 * np.eye(2), 0.7 * np.eye(2)]), golden_mean())
    assert cjsr_lower(system, 4)[0] == pytest.approx(0.7)
    A = np.array([[0.3, 1.0], [-0.2, 0.5]])
    system = SystemSpec(A[None], full_shift(1))
    assert cjsr_lower(system, 1)[0] == pytest.approx(spectral_radius(A))


def test_cjsr_lower_shear_pair():
    # A1 A2 = [[1 + a^2, a], [a, 1]] has eigenvalues mu, 1/mu with mu + 1/mu = 2 + a^2
    a = math.sqrt(1.44 + 1 / 1.44 - 2)
    A1 = np.array([[1.0, a], [0.0, 1.0]])
    A2 = np.array([[1.0, 0.0], [a, 1.0]])
    assert spectral_radius(A1 @ A2) == pytest.approx(1.44)
    lower, witness = cjsr_lower(SystemSpec(np.array([A1, A2]), full_shift(2)), 2)
    assert lower >= 1.2 - 1e-12
    assert sorted(witness) == [1, 2]


def test_closed_walks_deduplicate_rotations():
    words = closed_walk_words(full_shift(2), 4)
    # binary necklaces of length 4
    assert len(words) == 6
    assert set(closed_walk_words(golden_mean(), 2)) == {(1, 1), (1, 2)}


def test_cjsr_lower_budget():
    system = SystemSpec(np.array([np.eye(2)] * 3), full_shift(3))
    with pytest.raises(TooManyWords):
        cjsr_lower(system, 12, max_words=500)
    with pytest.raises(ValueError):
        cjsr_lower(system, 0)


def test_bracket_collapses_for_scalar():
    system = SystemSpec(np.array([0.6 * np.eye(2), 0.6 * np.eye(2)]), full_shift(2))
    bracket = cjsr_bracket(system, 1)
    assert bracket.lower == pytest.approx(0.6, abs=1e-3)
    assert bracket.upper == pytest.approx(0.6, abs=1e-3)
    assert bracket.upper_l == 1


def test_bracket_tightens_with_lifting():
    rng = np.random.default_rng(5)
    system = random_stable_system(rng, full_shift(2))
    w1 = cjsr_bracket(system, 1, max_cycle_len=6)
    w6 = cjsr_bracket(system, 6, max_cycle_len=6)
    assert w6.width <= w1.width + 1e-6
    assert w6.lower <= w6.upper + 1e-6


@pytest.mark.parametrize("name", sorted(corpus_automata()))
def test_ordering_and_lifting_on_corpus(name):
    automaton = corpus_automata()[name]
    rng = np.random.default_rng(sorted(corpus_automata()).index(name))
    system = SystemSpec(rng.standard_normal((automaton.alphabet_size, 2, 2)), automaton)
    lower, _ = cjsr_lower(system, 4)
    g1, _ = gamma_model(system, 1)
    g2, _ = gamma_model(system, 2)
    assert lower <= g1 + 1e-6 and lower <= g2 + 1e-6
    assert g2 <= g1 + 1e-4


@pytest.mark.parametrize("c", [2.0, 0.5])
def test_scaling_equivariance(c):
    rng = np.random.default_rng(6)
    system = random_stable_system(rng, golden_mean())
    base = cjsr_bracket(system, 2)
    scaled = cjsr_bracket(system.scaled(c), 2)
    assert scaled.lower == pytest.approx(c * base.lower, rel=1e-6)
    assert scaled.upper == pytest.approx(c * base.upper, rel=1e-6)


def test_contraction_below_unit_upper_bound():
    rng = np.random.default_rng(7)
    system = random_stable_system(rng, golden_mean(), target=0.8)
    bracket = cjsr_bracket(system, 2)
    if bracket.upper >= 0.95:
        system = system.scaled(0.9 / bracket.upper)
        bracket = cjsr_bracket(system, 2)
    assert bracket.upper < 1
    for _ in range(100):
        x0 = sample_sphere(2, rng)
        x = x0.copy()
        for lab in sample_walk(system.automaton, 200, rng):
            x = system.matrices[lab - 1] @ x
        assert np.linalg.norm(x) <= 1e-3 * np.linalg.norm(x0)


def test_mixed_label_automaton():
    automaton = Automaton(2, ((0, 1, 1), (1, 0, 2), (1, 1, 1)), 2)
    system = SystemSpec(np.array([np.diag([0.5, 0.3]), np.diag([0.4, 0.9])]), automaton)
    lower, witness = cjsr_lower(system, 3)
    g, _ = gamma_model(system, 2)
    assert lower <= g + 1e-6
    assert system.automaton.accepts(witness * 2)
