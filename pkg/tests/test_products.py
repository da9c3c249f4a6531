import math

import numpy as np
import pytest

from cslscert.automaton import count_words, full_shift, golden_mean
from cslscert.exceptions import TooManyWords
from cslscert.products import barabanov_flag, enumerate_products, is_barabanov_like, p_min
from cslscert.system import SystemSpec
from conftest import rotation


def test_single_matrix_cubed():
    A = np.array([[0.5, 0.2], [0.1, 0.3]])
    ps = enumerate_products(SystemSpec(A[None], full_shift(1)), 3)
    assert ps.distinct_count == 1
    assert np.allclose(ps.entries[0].matrix, A @ A @ A)
    assert ps.entries[0].probability == pytest.approx(1.0)


def test_commuting_products_merge():
    system = SystemSpec(np.array([np.eye(2), 2 * np.eye(2)]), full_shift(2))
    ps = enumerate_products(system, 2)
    scales = [e.matrix[0, 0] for e in ps.entries]
    assert scales == [1.0, 2.0, 4.0]
    assert [e.probability for e in ps.entries] == pytest.approx([0.25, 0.5, 0.25])
    # the merged entry keeps the lexicographically smallest word
    assert ps.entries[1].word == (1, 2) and ps.entries[1].n_words == 2
    assert ps.word_count == 4
    assert p_min(ps) == pytest.approx(0.25)


def test_golden_mean_rejects_22():
    rng = np.random.default_rng(1)
    ps = enumerate_products(SystemSpec(rng.standard_normal((2, 2, 2)), golden_mean()), 2)
    assert sorted(e.word for e in ps.entries) == [(1, 1), (1, 2), (2, 1)]


def test_word_order_multiplies_left():
    A1 = np.array([[0.0, 1.0], [0.0, 0.0]])
    A2 = np.array([[0.0, 0.0], [1.0, 0.0]])
    system = SystemSpec(np.array([A1, A2]), full_shift(2))
    assert np.allclose(system.product((1, 2)), A2 @ A1)
    assert not np.allclose(A2 @ A1, A1 @ A2)
    ps = enumerate_products(system, 2)
    entry = next(e for e in ps.entries if e.word == (1, 2))
    assert np.allclose(entry.matrix, A2 @ A1)


def test_p_min_examples():
    rng = np.random.default_rng(2)
    ps = enumerate_products(SystemSpec(rng.standard_normal((2, 2, 2)), full_shift(2)), 3)
    assert ps.p_min == pytest.approx(1 / 8)
    ps = enumerate_products(SystemSpec(rng.standard_normal((2, 2, 2)), golden_mean()), 1)
    assert ps.p_min == pytest.approx(0.25)
    assert p_min(ps, "word") <= p_min(ps, "matrix")


def test_probabilities_sum_to_one(corpus_automaton):
    rng = np.random.default_rng(3)
    system = SystemSpec(rng.standard_normal((corpus_automaton.alphabet_size, 2, 2)), corpus_automaton)
    for length in (1, 2, 4):
        ps = enumerate_products(system, length)
        assert math.fsum(e.probability for e in ps.entries) == pytest.approx(1.0, abs=1e-9)
        assert ps.p_min > 0
        assert ps.distinct_count <= count_words(corpus_automaton, length)


@pytest.mark.parametrize("length", [1, 2, 3, 4, 5, 6])
def test_generic_matrices_never_merge(corpus_automaton, length):
    rng = np.random.default_rng(10 + length)
    system = SystemSpec(rng.standard_normal((corpus_automaton.alphabet_size, 3, 3)), corpus_automaton)
    ps = enumerate_products(system, length)
    assert ps.distinct_count == count_words(corpus_automaton, length)


def test_word_budget():
    system = SystemSpec(np.array([np.eye(2), np.eye(2)]), full_shift(2))
    with pytest.raises(TooManyWords):
        enumerate_products(system, 12, max_words=1000)


def test_barabanov_examples():
    assert is_barabanov_like(0.9 * rotation(0.4))
    assert not is_barabanov_like(np.diag([0.5, 0.9]))
    assert not is_barabanov_like(np.array([[0.9, 1.0], [0.0, 0.9]]))


def test_jordan_block_admits_no_invariant_quadratic():
    # A^T P A = g P for A = [[a,1],[0,a]]: the (1,1) entry forces g = a^2, then the
    # (1,2) entry forces p11 = 0, contradicting P > 0.
    a = 0.9
    A = np.array([[a, 1.0], [0.0, a]])
    g = a * a
    # unknowns (p11, p12, p22); rows are the three independent entries of A^T P A - g P
    basis = [np.array([[1.0, 0], [0, 0]]), np.array([[0, 1.0], [1.0, 0]]), np.array([[0, 0], [0, 1.0]])]
    cols = [(A.T @ B @ A - g * B) for B in basis]
    M = np.array([[c[0, 0], c[0, 1], c[1, 1]] for c in cols]).T
    null = np.linalg.svd(M)[2][-1]
    residual = np.linalg.svd(M)[1][-1]
    assert residual < 1e-12
    # the only solutions have p11 = p12 = 0, which is not positive definite
    assert abs(null[0]) < 1e-12 and abs(null[1]) < 1e-12


def test_barabanov_flag_on_set():
    system = SystemSpec(np.array([0.9 * rotation(0.3), np.diag([0.5, 0.2])]), full_shift(2))
    flagged = [e.word for e in barabanov_flag(enumerate_products(system, 1))]
    assert flagged == [(1,)]
