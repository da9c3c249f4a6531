"""Model-based reference values: exact-LMI CQLF rate and CJSR brackets."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import TooManyWords
from .numerics import project_spectral_box, rank_one_svec, smat, spectral_radius, svec
from .products import enumerate_products
from .scenario import ScenarioConfig, _start, bisect_rate, box_cut, tie_break
from .ellipsoid import find_feasible


class _LmiOracle:
    """Separation oracle for A^T P A <= g P over a stack of products, plus the spectral box."""

    def __init__(self, mats, g, C):
        self.mats = mats
        self.g = g
        self.n = mats.shape[1]
        self.C = C

    def __call__(self, p):
        best = box_cut(p, self.n, self.C)
        P = smat(p, self.n)
        M = np.einsum("kji,jl,klm->kim", self.mats, P, self.mats) - self.g * P
        w, V = np.linalg.eigh(M)
        top = w[:, -1]
        if np.any(top > 0):
            v = V[:, :, -1]
            Av = np.einsum("kij,kj->ki", self.mats, v)
            a = rank_one_svec(Av) - self.g * rank_one_svec(v)
            norms = np.linalg.norm(a, axis=1)
            viol = np.where(norms > 0, top / np.where(norms > 0, norms, 1.0), 0.0)
            k = int(np.argmax(viol))
            if viol[k] > 0 and (best is None or viol[k] > best[0]):
                return a[k] / norms[k], 0.0
        if best is None:
            return None
        return best[1], best[2]


def gamma_model(system, length, config=ScenarioConfig(), max_words=10**6, random_state=None):
    """Smallest rate gamma with a common quadratic P: A^T P A <= gamma^(2l) P for all A in Pi_l.

    Returns ``(gamma, P)`` with the same tolerance semantics and Frobenius
    tie-break as the sampled solver.
    """
    rng = None if random_state is None else np.random.default_rng(random_state)
    mats = enumerate_products(system, length, max_words=max_words).matrices
    n = system.n
    norms = np.array([np.linalg.norm(A, 2) for A in mats])
    hi = float(norms.max()) ** (1.0 / length)
    if hi == 0.0:
        return 0.0, np.eye(n)
    radii = np.array([spectral_radius(A) for A in mats])
    lo = float(radii.max()) ** (1.0 / length) * (1.0 - 1e-12)
    hi *= 1.0 + 1e-12

    def decide(gamma):
        oracle = _LmiOracle(mats, gamma ** (2 * length), config.C)
        center, radius = _start(n, config, rng)
        return find_feasible(oracle, center, radius, config.feas_tol, config.max_oracle_iters).point

    lo, hi, p_hi, _ = bisect_rate(decide, lo, hi, svec(np.eye(n)), config.gamma_tol)
    oracle = _LmiOracle(mats, hi ** (2 * length), config.C)
    p_star, _ = tie_break(oracle, n, config, rng, p_hi)
    return hi, project_spectral_box(smat(p_star, n), 1.0, config.C)


def closed_walk_words(automaton, length):
    """Label words of closed walks of exactly ``length`` steps, one per rotation class."""
    seen = set()
    out = []
    for start in range(automaton.n_nodes):
        stack = [(start, ())]
        while stack:
            node, word = stack.pop()
            if len(word) == length:
                if node == start:
                    key = min(word[i:] + word[:i] for i in range(length))
                    if key not in seen:
                        seen.add(key)
                        out.append(key)
                continue
            for dst, lab in automaton.out_edges[node]:
                stack.append((dst, word + (lab,)))
    return out


def cjsr_lower(system, max_cycle_len, max_words=10**6):
    """Largest rho(cycle product)^(1/len) over closed walks up to ``max_cycle_len`` steps.

    Returns ``(bound, witness_word)``.
    """
    if max_cycle_len < 1:
        raise ValueError("max_cycle_len must be >= 1")
    best, witness = 0.0, ()
    budget = 0
    for k in range(1, max_cycle_len + 1):
        words = closed_walk_words(system.automaton, k)
        budget += len(words)
        if budget > max_words:
            raise TooManyWords(f"more than {max_words} cycles up to length {k}")
        for word in words:
            rho = spectral_radius(system.product(word)) ** (1.0 / k)
            if rho > best:
                best, witness = rho, word
    return best, witness


@dataclass(frozen=True)
class CjsrBracket:
    lower: float
    upper: float
    lower_witness: tuple
    upper_l: int
    upper_P: np.ndarray = field(repr=False, default=None)

    @property
    def width(self):
        return self.upper - self.lower


def cjsr_bracket(system, length, max_cycle_len=None, config=ScenarioConfig()):
    """Interval [cycle lower bound, lifted CQLF rate] containing the CJSR."""
    if max_cycle_len is None:
        max_cycle_len = max(length, 6)
    lower, word = cjsr_lower(system, max_cycle_len)
    upper, P = gamma_model(system, length, config)
    return CjsrBracket(lower, upper, word, length, P)
