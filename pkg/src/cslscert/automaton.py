"""Labelled digraphs constraining the switching signal, and their analytics."""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import (
    BadLabel,
    ConvergenceFailure,
    DanglingNode,
    DuplicateEdge,
    NotStronglyConnected,
    ParseError,
    TooManyWords,
)

logger = logging.getLogger(__name__)

#: Perron roots of graphs up to this size come from a dense eigensolve.
DENSE_EIGEN_MAX_NODES = 32
EIGEN_CLUSTER_TOL = 1e-4


@dataclass(frozen=True)
class Automaton:
    """Strongly connected digraph whose edges carry labels in ``1..alphabet_size``.

    Edges are ``(source, target, label)`` triples with 0-based nodes. Two edges
    between the same pair of nodes may carry different labels; repeating the
    same triple is rejected.
    """

    n_nodes: int
    edges: tuple
    alphabet_size: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(int(v) for v in e) for e in self.edges))
        validate(self)

    @classmethod
    def from_dict(cls, data, alphabet_size=None):
        """Build from the ``{"nodes": int, "edges": [[src, dst, label], ...]}`` layout."""
        try:
            n_nodes = int(data["nodes"])
            edges = [tuple(e) for e in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed automaton section: {exc}") from None
        if any(len(e) != 3 for e in edges):
            raise ParseError("automaton edges must be [src, dst, label] triples")
        if alphabet_size is None:
            alphabet_size = max((e[2] for e in edges), default=1)
        return cls(n_nodes, tuple(edges), int(alphabet_size))

    def to_dict(self):
        return {"nodes": self.n_nodes, "edges": [list(e) for e in self.edges]}

    @cached_property
    def out_edges(self):
        """Per node, the list of ``(target, label)`` pairs leaving it."""
        out = [[] for _ in range(self.n_nodes)]
        for src, dst, lab in self.edges:
            out[src].append((dst, lab))
        return tuple(tuple(o) for o in out)

    @cached_property
    def out_degree(self):
        return np.array([len(o) for o in self.out_edges], dtype=float)

    @cached_property
    def adjacency(self):
        """Edge-count matrix; parallel edges with distinct labels each count once."""
        A = np.zeros((self.n_nodes, self.n_nodes))
        for src, dst, _ in self.edges:
            A[src, dst] += 1.0
        return A

    @cached_property
    def label_transitions(self):
        """Per label, the sub-stochastic matrix T[u, v] = P(step u -> v with that label)."""
        mats = np.zeros((self.alphabet_size, self.n_nodes, self.n_nodes))
        for src, dst, lab in self.edges:
            mats[lab - 1, src, dst] += 1.0 / self.out_degree[src]
        return mats

    @cached_property
    def label_successors(self):
        """Per label and node, the frozenset of nodes reachable by one such edge."""
        succ = [[set() for _ in range(self.n_nodes)] for _ in range(self.alphabet_size)]
        for src, dst, lab in self.edges:
            succ[lab - 1][src].add(dst)
        return tuple(tuple(frozenset(s) for s in row) for row in succ)

    @property
    def is_deterministic(self):
        """True when no node has two outgoing edges with the same label."""
        return all(
            len({lab for _, lab in outs}) == len(outs) for outs in self.out_edges
        )

    def accepts(self, word):
        """Whether some path carries ``word`` (labels are 1-based)."""
        current = frozenset(range(self.n_nodes))
        for lab in word:
            if not 1 <= lab <= self.alphabet_size:
                return False
            current = frozenset().union(*(self.label_successors[lab - 1][u] for u in current))
            if not current:
                return False
        return True


def _reachable(n_nodes, succ, start=0):
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def validate(automaton):
    """Check node references, labels, out-degrees and strong connectivity."""
    n, m = automaton.n_nodes, automaton.alphabet_size
    if n < 1:
        raise NotStronglyConnected("automaton has no nodes")
    if m < 1:
        raise BadLabel(f"alphabet size must be positive, got {m}")
    fwd = [set() for _ in range(n)]
    bwd = [set() for _ in range(n)]
    seen = set()
    for edge in automaton.edges:
        src, dst, lab = edge
        if not (0 <= src < n and 0 <= dst < n):
            raise NotStronglyConnected(f"edge {edge} references a node outside 0..{n - 1}")
        if not 1 <= lab <= m:
            raise BadLabel(f"edge {edge} has label outside 1..{m}")
        if edge in seen:
            raise DuplicateEdge(f"edge {edge} appears twice")
        seen.add(edge)
        fwd[src].add(dst)
        bwd[dst].add(src)
    dangling = [u for u in range(n) if not fwd[u]]
    if dangling:
        raise DanglingNode(f"nodes {dangling} have no outgoing edge")
    if len(_reachable(n, fwd)) != n or len(_reachable(n, bwd)) != n:
        raise NotStronglyConnected("automaton graph is not strongly connected")


def count_words(automaton, length):
    """Exact number of distinct words of the given length accepted by the automaton.

    Words are expanded breadth-first; all words that reach the same set of end
    nodes are merged, so each distinct word is counted once however many paths
    carry it.
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    frontier = {frozenset(range(automaton.n_nodes)): 1}
    succ = automaton.label_successors
    for _ in range(length):
        nxt = {}
        for nodes, count in frontier.items():
            for lab_succ in succ:
                reached = frozenset().union(*(lab_succ[u] for u in nodes))
                if reached:
                    nxt[reached] = nxt.get(reached, 0) + count
        frontier = nxt
    return sum(frontier.values())


def iter_words(automaton, length, max_words=10**6):
    """Yield ``(word, probability)`` for every accepted word, in lexicographic order.

    The probability is the one of :func:`walk_probability`. Raises
    :class:`TooManyWords` up front if the language slice exceeds ``max_words``.
    """
    total = count_words(automaton, length)
    if total > max_words:
        raise TooManyWords(f"{total} words of length {length} exceed the limit {max_words}")
    T = automaton.label_transitions
    start = np.full(automaton.n_nodes, 1.0 / automaton.n_nodes)

    stack = [((), start)]
    while stack:
        word, dist = stack.pop()
        if len(word) == length:
            yield word, float(dist.sum())
            continue
        # pushed in reverse so that pops come out in increasing label order
        for lab in range(automaton.alphabet_size, 0, -1):
            nxt = dist @ T[lab - 1]
            if nxt.any():
                stack.append((word + (lab,), nxt))


def walk_probability(automaton, word):
    """Probability that the uniform random walk emits ``word`` as its label sequence.

    The walk starts at a uniformly random node and at every step follows an
    outgoing edge chosen uniformly at random.
    """
    if len(word) < 1:
        raise ValueError("word must have length >= 1")
    dist = np.full(automaton.n_nodes, 1.0 / automaton.n_nodes)
    for lab in word:
        if not 1 <= lab <= automaton.alphabet_size:
            return 0.0
        dist = dist @ automaton.label_transitions[lab - 1]
    return float(dist.sum())


@dataclass(frozen=True)
class AutomatonStats:
    node_count: int
    entropy: float
    perron: float
    adjacency_moduli: np.ndarray = field(repr=False)
    diagonalizable: bool
    eigvec_cond: float

    def eigen_mass(self, length):
        """|V| * lambda_max**length, the word-count bound for diagonalizable graphs."""
        return self.node_count * self.perron ** length


def _perron_power(A, tol=1e-12, max_iter=10**6):
    # A + I is primitive for irreducible A, so power iteration converges.
    B = A + np.eye(A.shape[0])
    v = np.full(A.shape[0], 1.0 / A.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        lam_new = w.sum()
        w /= lam_new
        if abs(lam_new - lam) <= tol * lam_new and np.abs(w - v).max() <= tol:
            return lam_new - 1.0
        v, lam = w, lam_new
    raise ConvergenceFailure(f"power iteration did not converge in {max_iter} steps")


def is_diagonalizable(A, cluster_tol=EIGEN_CLUSTER_TOL):
    """Whether the product of (A - mu I) over distinct eigenvalues mu vanishes.

    Eigenvalues closer than ``cluster_tol`` (relative) are treated as one, so a
    numerically split defective eigenvalue is still seen as repeated.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    distinct = []
    for lam in np.linalg.eigvals(A):
        if all(abs(lam - mu) > cluster_tol * max(1.0, abs(mu)) for mu in distinct):
            distinct.append(lam)
    M = np.eye(n, dtype=complex)
    scale = 1.0
    norm = np.linalg.norm(A, 2)
    for mu in distinct:
        M = M @ (A - mu * np.eye(n))
        scale *= norm + abs(mu)
    return bool(np.linalg.norm(M) <= 1e-7 * scale)


def entropy(automaton):
    """Entropy log2(lambda_max) of the automaton from its adjacency Perron root.

    This is the growth rate of the accepted language when the labelling is
    deterministic; for other labellings it is the path-count growth rate,
    which can only be larger.
    """
    A = automaton.adjacency
    n = automaton.n_nodes
    eigvals, eigvecs = np.linalg.eig(A)
    moduli = np.sort(np.abs(eigvals))
    if n <= DENSE_EIGEN_MAX_NODES:
        perron = float(moduli[-1])
    else:
        perron = float(_perron_power(A))
    cond = float(np.linalg.cond(eigvecs))
    if not math.isfinite(cond):
        cond = math.inf
    if not automaton.is_deterministic:
        logger.warning("automaton labelling is not deterministic; entropy over-estimates word growth")
    return AutomatonStats(
        node_count=n,
        entropy=max(0.0, math.log2(perron)),
        perron=perron,
        adjacency_moduli=moduli,
        diagonalizable=is_diagonalizable(A),
        eigvec_cond=cond,
    )


# A few automata that show up in examples and tests.

def full_shift(m):
    """One node with ``m`` self-loops: arbitrary switching among m modes."""
    return Automaton(1, tuple((0, 0, s) for s in range(1, m + 1)), m)


def golden_mean():
    """Two nodes forbidding two consecutive occurrences of label 2."""
    return Automaton(2, ((0, 0, 1), (0, 1, 2), (1, 0, 1)), 2)
