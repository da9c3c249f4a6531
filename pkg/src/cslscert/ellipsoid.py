"""Deep-cut ellipsoid method for small convex feasibility and minimisation problems.

The ellipsoid ``{c + L u : |u| <= 1}`` is kept in square-root form so that the
shape matrix ``L L^T`` never has to be formed, which keeps long runs on thin
feasible sets numerically sane.

An *oracle* maps a point ``p`` to ``None`` when ``p`` is feasible, or to a pair
``(a, b)`` describing a halfspace ``a @ x <= b`` that contains the feasible set
but not ``p``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import IterationLimit


class Ellipsoid:
    def __init__(self, center, L):
        self.center = np.array(center, dtype=float)
        self.L = np.array(L, dtype=float)
        self.dim = self.center.shape[0]
        self.log_det = float(np.linalg.slogdet(self.L)[1])

    @classmethod
    def ball(cls, center, radius):
        center = np.asarray(center, dtype=float)
        return cls(center, radius * np.eye(center.shape[0]))

    def width(self, a):
        """Half-width of the ellipsoid along direction ``a`` (scaled by |a|)."""
        return float(np.linalg.norm(self.L.T @ a))

    def cut(self, a, b):
        """Replace the ellipsoid by the smallest one containing its intersection with ``a @ x <= b``.

        Returns False when the intersection is empty.
        """
        g = self.L.T @ a
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            return float(a @ self.center) <= b
        alpha = (float(a @ self.center) - b) / gn
        if alpha >= 1.0:
            return False
        d = self.dim
        if d == 1:
            return self._cut_interval(a, b)
        if alpha <= -1.0 / d:
            # too shallow: the current ellipsoid is already the minimal one
            return True
        gh = g / gn
        Lg = self.L @ gh
        tau = (1.0 + d * alpha) / (d + 1.0)
        sigma = d * d * (1.0 - alpha * alpha) / (d * d - 1.0)
        shrink = 2.0 * (1.0 + d * alpha) / ((d + 1.0) * (1.0 + alpha))
        root = math.sqrt(max(1.0 - shrink, 0.0))
        self.center = self.center - tau * Lg
        self.L = math.sqrt(sigma) * (self.L - (1.0 - root) * np.outer(Lg, gh))
        self.log_det += 0.5 * d * math.log(sigma) + (math.log(root) if root > 0 else -math.inf)
        return True

    def _cut_interval(self, a, b):
        a0 = float(a[0])
        c, r = float(self.center[0]), abs(float(self.L[0, 0]))
        lo, hi = c - r, c + r
        if a0 > 0:
            hi = min(hi, b / a0)
        else:
            lo = max(lo, b / a0)
        if hi < lo:
            return False
        self.center = np.array([0.5 * (lo + hi)])
        half = 0.5 * (hi - lo)
        self.L = np.array([[half]])
        self.log_det = math.log(half) if half > 0 else -math.inf
        return True


def default_max_iter(dim, radius, tol):
    """Iteration budget covering the worst-case volume decrease from ``radius`` to ``tol``."""
    ratio = max(math.log(radius / tol), 1.0)
    if dim == 1:
        return int(4 * ratio) + 100
    return int(3 * (dim + 1) * dim * ratio) + 200


@dataclass
class FeasibilityResult:
    point: object
    iterations: int
    certified_empty: bool


def find_feasible(oracle, center, radius, tol, max_iter=None):
    """Search ``ball(center, radius)`` for a point accepted by ``oracle``.

    Returns a :class:`FeasibilityResult` whose ``point`` is None when the
    feasible set cannot contain a ball of radius ``tol``. Raises
    :class:`IterationLimit` if the budget runs out first.
    """
    E = Ellipsoid.ball(center, radius)
    floor = E.dim * math.log(tol)
    if max_iter is None:
        max_iter = default_max_iter(E.dim, radius, tol)
    for it in range(1, max_iter + 1):
        cut = oracle(E.center)
        if cut is None:
            return FeasibilityResult(E.center.copy(), it, False)
        if not E.cut(*cut) or E.log_det < floor:
            return FeasibilityResult(None, it, True)
    raise IterationLimit(f"ellipsoid feasibility undecided after {max_iter} iterations")


@dataclass
class MinimizeResult:
    point: object
    value: float
    lower_bound: float
    iterations: int
    converged: bool


def minimize(objective, oracle, center, radius, ftol, tol, max_iter=None):
    """Minimise a convex ``objective`` (returning value and gradient) over the oracle's set.

    Stops when the best feasible value is within ``ftol`` of the certified lower
    bound, or when the ellipsoid shrinks below a ball of radius ``tol``.
    """
    E = Ellipsoid.ball(center, radius)
    floor = E.dim * math.log(tol)
    if max_iter is None:
        max_iter = 2 * default_max_iter(E.dim, radius, tol)
    best, fbest, lower = None, math.inf, -math.inf
    for it in range(1, max_iter + 1):
        c = E.center
        cut = oracle(c)
        if cut is None:
            f, grad = objective(c)
            if f < fbest:
                best, fbest = c.copy(), f
            lower = max(lower, f - E.width(grad))
            if fbest - lower <= ftol:
                return MinimizeResult(best, fbest, lower, it, True)
            cut = (grad, float(grad @ c) + fbest - f)
        if not E.cut(*cut) or E.log_det < floor:
            return MinimizeResult(best, fbest, lower, it, best is not None)
    return MinimizeResult(best, fbest, lower, max_iter, False)
