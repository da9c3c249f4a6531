"""Sampled quadratic-Lyapunov program.

Given endpoint pairs ``(x0_i, xl_i)`` of trajectories of ``l`` steps, find the
smallest rate ``gamma`` and a symmetric ``P`` with ``I <= P <= C I`` such that

    xl_i^T P xl_i <= gamma^(2 l) * x0_i^T P x0_i    for every i,

breaking ties between optimal ``P`` by the smallest Frobenius norm. For fixed
``gamma`` the constraints are linear in ``P``, so ``gamma`` is bisected and
each trial is decided by the ellipsoid method in ``svec`` coordinates.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .ellipsoid import find_feasible, minimize
from .exceptions import EmptyObservations, IterationLimit
from .numerics import project_spectral_box, rank_one_svec, smat, svec, sym_dim


@dataclass(frozen=True)
class ScenarioConfig:
    C: float = 1e6
    gamma_tol: float = 1e-6
    feas_tol: float = 1e-8
    max_oracle_iters: int = None
    tiebreak_ftol: float = 1e-12

    def __post_init__(self):
        if not self.C > 1:
            raise ValueError(f"C must exceed 1, got {self.C}")
        if not (self.gamma_tol > 0 and self.feas_tol > 0 and self.tiebreak_ftol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class ScenarioSolution:
    gamma_star: float
    P_star: np.ndarray = field(repr=False)
    active_margin: float
    oracle_stats: dict = field(default_factory=dict)

    @property
    def cost(self):
        return (self.gamma_star, float(np.sum(self.P_star ** 2)))


def box_cut(P_vec, n, C):
    """Most violated spectral-box cut at ``P_vec``, as ``(violation, a, b)``, or None."""
    w, V = np.linalg.eigh(smat(P_vec, n))
    low, high = 1.0 - w[0], w[-1] - C
    if low <= 0 and high <= 0:
        return None
    if low >= high:
        v = V[:, 0]
        return low, -rank_one_svec(v), -1.0
    v = V[:, -1]
    return high, rank_one_svec(v), C


def search_ball(n, C):
    """Ball in svec coordinates centred on ((C+1)/2) I that covers the spectral box."""
    center = svec(0.5 * (C + 1.0) * np.eye(n))
    radius = 0.5 * (C - 1.0) * math.sqrt(n) * (1.0 + 1e-9) + 1e-9
    return center, radius


class _ObservationOracle:
    """Separation oracle for the sampled constraints at a fixed rate ``g = gamma^(2l)``."""

    def __init__(self, U, W, g, n, C):
        A = U - g * W
        norms = np.linalg.norm(A, axis=1)
        keep = norms > 0
        self.A = A[keep] / norms[keep, None]
        self.n = n
        self.C = C

    def __call__(self, p):
        best = box_cut(p, self.n, self.C)
        if self.A.shape[0]:
            viol = self.A @ p
            k = int(np.argmax(viol))
            if viol[k] > 0 and (best is None or viol[k] > best[0]):
                return self.A[k], 0.0
        if best is None:
            return None
        return best[1], best[2]

    def margin(self, p):
        w = np.linalg.eigvalsh(smat(p, self.n))
        slacks = [w[0] - 1.0, self.C - w[-1]]
        if self.A.shape[0]:
            slacks.append(float(np.min(-(self.A @ p))))
        return float(min(slacks))


def _prepare(observations):
    if len(observations) == 0:
        raise EmptyObservations("at least one observation is required")
    x0, xl = observations.x0, observations.xl
    return rank_one_svec(xl), rank_one_svec(x0)


def _start(n, config, rng):
    center, radius = search_ball(n, config.C)
    if rng is not None:
        offset = rng.standard_normal(center.shape)
        offset *= 1e-3 * radius / max(np.linalg.norm(offset), 1e-300)
        center = center + offset
        radius *= 1.001
    return center, radius


def _max_iter(config):
    return config.max_oracle_iters


def feasible(gamma, observations, length, config=ScenarioConfig(), rng=None):
    """A ``P`` (as a matrix) satisfying every sampled constraint at rate ``gamma``, or None.

    None means no ``P`` satisfies the constraints with slack ``config.feas_tol``.
    """
    U, W = _prepare(observations)
    n = observations.n
    oracle = _ObservationOracle(U, W, gamma ** (2 * length), n, config.C)
    center, radius = _start(n, config, rng)
    res = find_feasible(oracle, center, radius, config.feas_tol, _max_iter(config))
    return None if res.point is None else smat(res.point, n)


def _rate_upper(observations, length):
    ratios = np.linalg.norm(observations.xl, axis=1) / np.linalg.norm(observations.x0, axis=1)
    return float(np.max(ratios)) ** (1.0 / length)


def _rate_lower(observations, length, C):
    # x^T P x lies in [|x|^2, C |x|^2] for P in the box.
    ratios = np.linalg.norm(observations.xl, axis=1) / np.linalg.norm(observations.x0, axis=1)
    return (float(np.max(ratios)) ** 2 / C) ** (1.0 / (2 * length))


def bisect_rate(decide, lo, hi, P_hi, gamma_tol):
    """Shrink ``[lo, hi]`` until narrower than ``gamma_tol``; ``decide(g)`` returns a witness or None."""
    steps = 0
    while hi - lo > gamma_tol:
        mid = 0.5 * (lo + hi)
        witness = decide(mid)
        steps += 1
        if witness is None:
            lo = mid
        else:
            hi, P_hi = mid, witness
    return lo, hi, P_hi, steps


def tie_break(oracle, n, config, rng, fallback):
    """Minimum-Frobenius-norm point of the oracle's feasible set."""
    center, radius = _start(n, config, rng)

    def objective(p):
        return float(p @ p), 2.0 * p

    res = minimize(objective, oracle, center, radius, config.tiebreak_ftol,
                   config.feas_tol, _max_iter(config) and 4 * _max_iter(config))
    if res.point is None or float(res.point @ res.point) > float(fallback @ fallback):
        return fallback, res
    return res.point, res


def solve(observations, length, config=ScenarioConfig(), random_state=None):
    """Solve the sampled program; returns a :class:`ScenarioSolution`.

    ``random_state`` (int or Generator) jitters the starting ellipsoid, which
    must not change the answer beyond the tolerances.
    """
    rng = None if random_state is None else np.random.default_rng(random_state)
    U, W = _prepare(observations)
    n = observations.n
    hi = _rate_upper(observations, length)
    stats = {"bisection_steps": 0, "feasibility_iters": 0}
    if hi == 0.0:
        P = np.eye(n)
        return ScenarioSolution(0.0, P, 0.0, stats)
    lo = _rate_lower(observations, length, config.C)
    hi *= 1.0 + 1e-12

    def decide(gamma):
        oracle = _ObservationOracle(U, W, gamma ** (2 * length), n, config.C)
        center, radius = _start(n, config, rng)
        res = find_feasible(oracle, center, radius, config.feas_tol, _max_iter(config))
        stats["feasibility_iters"] += res.iterations
        return res.point

    lo, hi, p_hi, steps = bisect_rate(decide, lo, hi, svec(np.eye(n)), config.gamma_tol)
    stats["bisection_steps"] = steps
    stats["gamma_lower"] = lo

    oracle = _ObservationOracle(U, W, hi ** (2 * length), n, config.C)
    p_star, res = tie_break(oracle, n, config, rng, p_hi)
    stats.update(tiebreak_iters=res.iterations, tiebreak_gap=res.value - res.lower_bound,
                 tiebreak_converged=res.converged)
    P = project_spectral_box(smat(p_star, n), 1.0, config.C)
    return ScenarioSolution(hi, P, oracle.margin(svec(P)), stats)


__all__ = [
    "ScenarioConfig",
    "ScenarioSolution",
    "feasible",
    "solve",
    "IterationLimit",
]
