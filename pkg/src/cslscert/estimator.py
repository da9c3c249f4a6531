"""scikit-learn style front end.

``ScenarioLyapunov`` fits the sampled program on ``(X, y) = (x0, xl)`` pairs;
after fitting, ``transform`` evaluates the learned quadratic Lyapunov
function and ``certify`` turns the fit into a probabilistic CJSR bound.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .automaton import entropy as automaton_entropy
from .bounds import BoundVariant, certify
from .exceptions import DomainError, NormError
from .products import barabanov_flag, enumerate_products
from .sampling import ObservationSet
from .scenario import ScenarioConfig, solve

UNIT_NORM_TOL = 1e-6


def model_context(system, length, variant, max_words=10**6):
    """Variant context, the names of model-derived fields, and Barabanov flags for ``system``."""
    variant = BoundVariant(variant)
    context, fields = {}, []
    barabanov = None
    if variant in (BoundVariant.EXACT, BoundVariant.UNIFORM):
        products = enumerate_products(system, length, max_words=max_words)
        barabanov = [e.word for e in barabanov_flag(products)]
        if variant is BoundVariant.EXACT:
            context["p_min"] = products.p_min
            fields.append("p_min")
        else:
            context["product_count"] = products.distinct_count
            fields.append("product_count")
    else:
        stats = automaton_entropy(system.automaton)
        if variant is BoundVariant.ENTROPY:
            context["entropy"] = stats.entropy
            fields.append("entropy")
        else:
            if not stats.diagonalizable:
                raise DomainError("eigen variant needs a diagonalizable adjacency matrix")
            context.update(nodes=stats.node_count, lambda_max=stats.perron)
            fields.extend(["nodes", "lambda_max"])
    return context, fields, barabanov


class ScenarioLyapunov(TransformerMixin, BaseEstimator):
    """Data-driven quadratic Lyapunov function for a constrained switching system.

    Parameters
    ----------
    length : int
        Number of switching steps separating ``x0`` and ``xl`` in every sample.
    C : float
        Upper end of the spectral box ``I <= P <= C I``.
    gamma_tol, feas_tol : float
        Bisection width on the rate and the slack below which a trial rate is
        declared infeasible.
    max_oracle_iters : int or None
        Ellipsoid iteration cap per feasibility problem; None picks one from
        the problem size.
    random_state : int, Generator or None
        Jitters the starting ellipsoid; results agree within tolerances.

    Attributes
    ----------
    gamma_ : float
        Optimal rate of the sampled program.
    P_ : ndarray of shape (n_features, n_features)
        Tie-broken optimal quadratic form.
    solution_ : ScenarioSolution
    n_samples_fit_ : int
    """

    def __init__(self, length=1, C=1e6, gamma_tol=1e-6, feas_tol=1e-8,
                 max_oracle_iters=None, random_state=None):
        self.length = length
        self.C = C
        self.gamma_tol = gamma_tol
        self.feas_tol = feas_tol
        self.max_oracle_iters = max_oracle_iters
        self.random_state = random_state

    def _config(self):
        return ScenarioConfig(C=self.C, gamma_tol=self.gamma_tol, feas_tol=self.feas_tol,
                              max_oracle_iters=self.max_oracle_iters)

    def fit(self, X, y):
        """Fit on initial states ``X`` (unit rows) and end states ``y``."""
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        y = np.atleast_2d(y)
        if y.shape != X.shape:
            raise ValueError(f"y must have the same shape as X, got {y.shape} and {X.shape}")
        norms = np.linalg.norm(X, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise NormError("rows of X must lie on the unit sphere; see sampling.normalize_pairs")
        if int(self.length) < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")
        obs = ObservationSet(X / norms[:, None], y / norms[:, None])
        self.solution_ = solve(obs, int(self.length), self._config(), self.random_state)
        self.gamma_ = self.solution_.gamma_star
        self.P_ = self.solution_.P_star
        self.n_features_in_ = X.shape[1]
        self.n_samples_fit_ = X.shape[0]
        return self

    def fit_observations(self, observations):
        return self.fit(observations.x0, observations.xl)

    def transform(self, X):
        """Lyapunov function value sqrt(x^T P x) for every row of ``X``."""
        check_is_fitted(self, "P_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.sqrt(np.einsum("ij,jk,ik->i", X, self.P_, X))[:, None]

    def decrease_ratio(self, X, y):
        """Per-sample rate (|y|_P / |x|_P)^(1/length) under the fitted P."""
        vx = self.transform(X)[:, 0]
        vy = self.transform(y)[:, 0]
        return (vy / vx) ** (1.0 / self.length)

    def certify(self, beta, variant="uniform", system=None, **context):
        """Probabilistic CJSR bound at confidence ``beta``.

        Either pass ``system`` (only its automaton and, for exact/uniform,
        its product set are used) or give the variant context directly:
        ``p_min``, ``product_count``, ``entropy``, or ``nodes`` + ``lambda_max``.
        """
        check_is_fitted(self, "solution_")
        barabanov, fields = None, []
        if system is not None:
            ctx, fields, barabanov = model_context(system, int(self.length), variant)
            context = {**ctx, **context}
        return certify(self.solution_, variant, beta, self.n_samples_fit_, int(self.length),
                       barabanov=barabanov, model_fields=fields, config=self._config(), **context)
