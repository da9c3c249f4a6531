"""Probabilistic CJSR upper bounds from a solved sampled program.

The bound is ``gamma* / delta^(1/l)`` where

    delta = sqrt(1 - Phi^-1(q, (n-1)/2, 1/2)),    q = eps(beta, N) * kappa(P*) * mass,

``eps(beta, N) = 1 - Phi(1 - beta, d+1, N-d)`` with ``d = n(n+1)/2``, and
``mass`` depends on what is known about the switching distribution:

* ``exact``:   1 / p_min, the least likely admissible product;
* ``uniform``: |Pi_l|, the number of distinct products (uniform sampling);
* ``entropy``: 2^(l h(G)), an entropy stand-in for |Pi_l| (approximate);
* ``eigen``:   |V| lambda_max^l, valid for diagonalizable adjacency matrices.

When ``q >= 1`` the certificate is non-informative (the bound is infinite).
"""

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DomainError, TooFewSamples
from .numerics import log_kappa, reg_inc_beta, reg_inc_beta_inv, sym_dim


class BoundVariant(str, enum.Enum):
    EXACT = "exact"
    UNIFORM = "uniform"
    ENTROPY = "entropy"
    EIGEN = "eigen"


def _check_beta(beta):
    if not 0.0 < beta < 1.0:
        raise DomainError(f"confidence beta must lie strictly between 0 and 1, got {beta}")


def epsilon(beta, N, d):
    """Scenario level 1 - Phi(1 - beta, d + 1, N - d); needs N >= d + 1."""
    _check_beta(beta)
    if N <= d:
        raise TooFewSamples(
            f"N = {N} samples but N >= d := n(n+1)/2 with N > d is needed (d = {d})"
        )
    # 1 - I_{1-beta}(d+1, N-d) == I_beta(N-d, d+1), without the cancellation
    return reg_inc_beta(beta, N - d, d + 1)


def delta_from_q(q, n):
    """``(delta, informative)`` for the first Phi^-1 argument ``q``."""
    if not q < 1.0:
        return 0.0, False
    if q <= 0.0 or n == 1:
        return 1.0, True
    a = 0.5 * (n - 1)
    if q <= 0.5:
        x = reg_inc_beta_inv(q, a, 0.5)
        return math.sqrt(max(1.0 - x, 0.0)), True
    # 1 - Phi^-1(q, a, b) == Phi^-1(1 - q, b, a) keeps delta accurate when q -> 1
    return math.sqrt(reg_inc_beta_inv(1.0 - q, 0.5, a)), True


def log_mass(variant, *, p_min=None, product_count=None, entropy=None, nodes=None,
             lambda_max=None, length=None):
    """Natural log of the variant's mass term."""
    variant = BoundVariant(variant)
    if variant is BoundVariant.EXACT:
        if not p_min or p_min <= 0:
            raise DomainError("exact variant needs a positive p_min")
        return -math.log(p_min)
    if variant is BoundVariant.UNIFORM:
        if not product_count or product_count < 1:
            raise DomainError("uniform variant needs the number of distinct products")
        return math.log(product_count)
    if length is None:
        raise DomainError(f"{variant.value} variant needs the trajectory length")
    if variant is BoundVariant.ENTROPY:
        if entropy is None or entropy < 0:
            raise DomainError("entropy variant needs a non-negative entropy")
        return length * entropy * math.log(2.0)
    if not nodes or lambda_max is None or lambda_max <= 0:
        raise DomainError("eigen variant needs the node count and the Perron eigenvalue")
    return math.log(nodes) + length * math.log(lambda_max)


def delta(variant, beta, P_star, N, length, **context):
    """``(delta, informative, q)`` for a solution's ``P_star`` under ``variant``."""
    n = P_star.shape[0]
    eps = epsilon(beta, N, sym_dim(n))
    if eps == 0.0:
        return 1.0, True, 0.0
    log_q = math.log(eps) + log_kappa(P_star) + log_mass(variant, length=length, **context)
    q = math.exp(min(log_q, 700.0))
    d, informative = delta_from_q(q, n)
    return d, informative, q


@dataclass
class Certificate:
    beta: float
    N: int
    l: int
    n: int
    d: int
    gamma_star: float
    P_star: np.ndarray
    epsilon: float
    kappa: float
    mass_term: float
    variant: str
    q: float
    delta: float
    bound: float
    informative: bool
    approximate: bool = False
    warnings: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    model_fields: list = field(default_factory=list)

    @property
    def factor(self):
        """1 / delta^(1/l); infinite when non-informative."""
        if not self.informative:
            return math.inf
        return math.exp(-math.log(self.delta) / self.l)

    @property
    def certifies_stability(self):
        return self.informative and self.bound < 1.0

    def to_dict(self):
        out = asdict(self)
        out["P_star"] = np.asarray(self.P_star).tolist()
        if not self.informative:
            out["bound"] = None
        return out


def certify(solution, variant, beta, N, length, barabanov=None, model_fields=(), config=None, **context):
    """Assemble a :class:`Certificate` from a sampled-program solution.

    ``barabanov`` is the list of suspicious products when the model is
    available, or None in the purely data-driven setting, where the
    no-Barabanov assumption is recorded as unverified.
    """
    variant = BoundVariant(variant)
    P = np.asarray(solution.P_star)
    n = P.shape[0]
    d = sym_dim(n)
    eps = epsilon(beta, N, d)
    dlt, informative, q = delta(variant, beta, P, N, length, **context)
    if informative:
        # 1/delta^(1/l) in log space; delta may be tiny for large l
        bound = solution.gamma_star * math.exp(-math.log(dlt) / length) if dlt > 0 else math.inf
    else:
        bound = math.inf
    warnings = []
    if barabanov is None:
        warnings.append("no-Barabanov assumption unverified (model not available)")
    elif barabanov:
        words = ", ".join("".join(map(str, w)) for w in barabanov)
        warnings.append(f"possible Barabanov products in Pi_l for words: {words}")
    if variant is BoundVariant.ENTROPY:
        warnings.append("entropy variant substitutes 2^(l h) for |Pi_l|; approximate at finite l")
    if variant is BoundVariant.UNIFORM and "product_count" not in model_fields:
        warnings.append("uniform variant assumes uniformly distributed products (unverified)")
    if not informative:
        warnings.append(f"non-informative: Phi^-1 argument q = {q:.6g} >= 1")
    tol = {}
    if config is not None:
        tol = {"C": config.C, "gamma_tol": config.gamma_tol, "feas_tol": config.feas_tol}
    mass = math.exp(min(log_mass(variant, length=length, **context), 700.0))
    return Certificate(
        beta=beta, N=N, l=length, n=n, d=d,
        gamma_star=float(solution.gamma_star), P_star=P,
        epsilon=eps, kappa=math.exp(log_kappa(P)), mass_term=mass,
        variant=variant.value, q=q, delta=dlt, bound=bound, informative=informative,
        approximate=variant is BoundVariant.ENTROPY, warnings=warnings,
        tolerances=tol, model_fields=list(model_fields),
    )
