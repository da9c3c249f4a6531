"""Dense linear algebra and special functions used throughout the package.

Symmetric matrices are handed to the ellipsoid solver through the isometric
``svec`` map: diagonal entries as-is, off-diagonal entries scaled by sqrt(2),
so that ``svec(A) @ svec(B) == trace(A @ B)`` and the Euclidean norm of the
vector equals the Frobenius norm of the matrix.
"""

import math

import numpy as np
from scipy.special import betaln

from .exceptions import ConvergenceFailure, DomainError, NotPositiveDefinite

_SQRT2 = math.sqrt(2.0)
_FPMIN = 1e-300
_CF_EPS = 1e-16
_CF_MAXIT = 100_000


def sym_dim(n):
    """Number of free entries of an n x n symmetric matrix."""
    return n * (n + 1) // 2


def _triu(n):
    return np.triu_indices(n)


def svec(M):
    """Isometric vectorisation of a symmetric matrix (or a stack of them)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    i, j = _triu(n)
    scale = np.where(i == j, 1.0, _SQRT2)
    return M[..., i, j] * scale


def smat(v, n=None):
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    if n is None:
        n = int(round((math.sqrt(8 * v.shape[-1] + 1) - 1) / 2))
    i, j = _triu(n)
    scale = np.where(i == j, 1.0, 1.0 / _SQRT2)
    M = np.zeros(v.shape[:-1] + (n, n))
    M[..., i, j] = v * scale
    M[..., j, i] = v * scale
    return M


def rank_one_svec(X):
    """svec(x x^T) for every row x of ``X``, without forming the outer products."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    i, j = _triu(n)
    scale = np.where(i == j, 1.0, _SQRT2)
    return X[..., i] * X[..., j] * scale


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def sym_eig(M):
    """Eigen-decomposition of a real symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ascending and orthonormal eigenvectors in
    the columns of ``V``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConvergenceFailure("matrix has non-finite entries")
    M = symmetrize(M)
    w, V = np.linalg.eigh(M)
    resid = np.linalg.norm(M @ V - V * w, axis=0)
    if np.any(resid > 1e-10 * max(np.linalg.norm(M), 1.0)):
        raise ConvergenceFailure("symmetric eigensolver residual too large")
    return w, V


def eigvals_moduli(M):
    """Eigenvalue moduli of a general square matrix, ascending."""
    return np.sort(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float))))


def spectral_radius(M):
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(M, dtype=float)))))


def log_kappa(P):
    """Natural log of :func:`kappa`, stable for badly conditioned P."""
    w, _ = sym_eig(P)
    if w[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3g} is not positive")
    return 0.5 * float(np.sum(np.log(w) - math.log(w[0])))


def kappa(P):
    """Eccentricity sqrt(det(P) / lambda_min(P)^n) of the ellipsoid {x : x^T P x <= 1}."""
    return math.exp(log_kappa(P))


def project_spectral_box(M, lo, hi):
    """Frobenius-nearest symmetric matrix with spectrum inside ``[lo, hi]``."""
    if lo > hi:
        raise DomainError(f"empty spectral box [{lo}, {hi}]")
    w, V = sym_eig(M)
    return (V * np.clip(w, lo, hi)) @ V.T


# ---------------------------------------------------------------------------
# Regularized incomplete beta function
# ---------------------------------------------------------------------------

def _betacf(x, a, b):
    # Modified Lentz evaluation of the continued fraction for I_x(a, b).
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceFailure(f"incomplete beta continued fraction stalled at x={x}, a={a}, b={b}")


def _check_beta_params(a, b):
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"beta parameters must be positive and finite, got a={a}, b={b}")


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b).

    ``x`` is the upper integration limit, so this is the CDF of a Beta(a, b)
    variable evaluated at ``x``.
    """
    _check_beta_params(a, b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - float(betaln(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, math.exp(log_front) * _betacf(x, a, b) / a)
    return max(0.0, 1.0 - math.exp(log_front) * _betacf(1.0 - x, b, a) / b)


def reg_inc_beta_inv(p, a, b):
    """Inverse of :func:`reg_inc_beta` in its first argument, by bisection.

    Bisection runs until the bracket is at floating-point resolution relative
    to the smaller endpoint, so small roots keep their relative accuracy.
    """
    _check_beta_params(a, b)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        val = reg_inc_beta(mid, a, b)
        if val == p:
            return mid
        if val < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * lo:
            break
    return 0.5 * (lo + hi)
