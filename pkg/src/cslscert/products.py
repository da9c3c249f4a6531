"""Admissible products of a given length and the sampling mass they carry."""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .automaton import iter_words
from .numerics import eigvals_moduli

MERGE_RTOL = 1e-9
BARABANOV_MODULI_RTOL = 1e-6
BARABANOV_EIGVEC_COND = 1e8


@dataclass(frozen=True)
class ProductEntry:
    matrix: np.ndarray = field(repr=False)
    word: tuple
    probability: float
    n_words: int = 1


@dataclass(frozen=True)
class ProductSet:
    length: int
    entries: tuple
    word_count: int
    word_p_min: float

    @property
    def distinct_count(self):
        return len(self.entries)

    @property
    def p_min(self):
        return min(e.probability for e in self.entries)

    @property
    def matrices(self):
        return np.array([e.matrix for e in self.entries])


def _merge_groups(mats, rtol):
    # Union-find over pairs whose Frobenius distance is within rtol of the larger norm.
    K = len(mats)
    flat = mats.reshape(K, -1)
    norms = np.linalg.norm(flat, axis=1)
    parent = list(range(K))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    radius = rtol * float(norms.max()) if K else 0.0
    if radius > 0:
        tree = cKDTree(flat)
        for i, j in sorted(tree.query_pairs(radius)):
            if np.linalg.norm(flat[i] - flat[j]) <= rtol * max(norms[i], norms[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    # exact zeros never pair up through a zero radius
    zeros = np.flatnonzero(norms == 0)
    for k in zeros[1:]:
        parent[find(k)] = find(zeros[0])
    return [find(i) for i in range(K)]


def enumerate_products(system, length, max_words=10**6, rtol=MERGE_RTOL):
    """Enumerate the admissible products of ``length`` factors with their probabilities.

    Products that agree up to ``rtol`` (relative, Frobenius) are merged; the
    merged entry keeps the lexicographically smallest word and the summed
    probability.
    """
    words, probs, mats = [], [], []
    for word, prob in iter_words(system.automaton, length, max_words=max_words):
        words.append(word)
        probs.append(prob)
        mats.append(system.product(word))
    mats = np.array(mats)
    roots = _merge_groups(mats, rtol)

    groups = {}
    for idx, root in enumerate(roots):
        groups.setdefault(root, []).append(idx)
    entries = []
    # words arrive in lexicographic order, so the first index of a group is its smallest word
    for members in sorted(groups.values(), key=lambda g: g[0]):
        first = members[0]
        entries.append(ProductEntry(
            matrix=mats[first],
            word=words[first],
            probability=float(sum(probs[i] for i in members)),
            n_words=len(members),
        ))
    return ProductSet(length, tuple(entries), len(words), float(min(probs)))


def p_min(products, level="matrix"):
    """Smallest sampling probability over ``products``.

    ``level="word"`` gives the minimum over individual words, which is never
    larger and therefore yields a more conservative bound.
    """
    if level == "matrix":
        return products.p_min
    if level == "word":
        return products.word_p_min
    raise ValueError(f"level must be 'matrix' or 'word', got {level!r}")


def is_barabanov_like(A, moduli_rtol=BARABANOV_MODULI_RTOL, cond_max=BARABANOV_EIGVEC_COND):
    """Heuristic test for similarity to a scaled orthogonal matrix."""
    A = np.asarray(A, dtype=float)
    moduli = eigvals_moduli(A)
    top = moduli[-1]
    if top == 0.0:
        return not A.any()
    if moduli[0] < top * (1.0 - moduli_rtol):
        return False
    _, vecs = np.linalg.eig(A)
    cond = np.linalg.cond(vecs)
    return bool(np.isfinite(cond) and cond < cond_max)


def barabanov_flag(products):
    """Entries of ``products`` that may be Barabanov matrices."""
    return [e for e in products.entries if is_barabanov_like(e.matrix)]
