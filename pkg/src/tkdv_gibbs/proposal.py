"""Anisotropic Gaussian proposal for the TKdV Gibbs measure.

Mode k (both its cosine and sine slot) is drawn with variance
``1 / (1 + alpha* beta' k^2 / K^3)`` and the Gaussian vector is projected
onto the sphere.  ``alpha*`` is the root of the self-consistency function
:func:`F`.  Densities are only ever handled as logs, up to additive
constants.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalError
from .hamiltonian import beta_hamiltonian_from, h2, h3
from .spectral import SpherePoint, coords_to_modes

ROOT_TOL = 1e-12
_MAX_BRACKET = 2.0**64


def F(alpha, K, beta_prime):
    """Self-consistency function ``1 - (alpha/K) sum_k 1/(1 + alpha beta' k^2/K^3)``."""
    k = np.arange(1, K + 1)
    return 1.0 - (alpha / K) * np.sum(1.0 / (1.0 + alpha * beta_prime * k**2 / K**3))


def F_limit(K, beta_prime):
    """Limit of F as alpha grows without bound, ``1 - (K^2/beta') sum_k 1/k^2``.

    F is strictly decreasing, so a root exists only when this is negative.
    For small K this fails at moderate beta' (K = 2 needs beta' < 5).
    """
    if beta_prime == 0:
        return -np.inf
    k = np.arange(1, K + 1)
    return 1.0 - K**2 / beta_prime * np.sum(1.0 / k**2)


def solve_alpha_star(K, beta_prime, tol=ROOT_TOL, maxiter=500):
    """Root of :func:`F` by bracketed bisection with secant acceleration.

    F decreases strictly from F(0) = 1, so the bracket is grown by
    doubling from alpha = 1 until F turns negative.

    Raises
    ------
    NumericalError
        If F stays positive for every alpha (see :func:`F_limit`) or the
        bracket passes 2**64.
    """
    if beta_prime < 0:
        raise ValueError("beta_prime must be >= 0")
    if K < 1:
        raise ValueError("K must be >= 1")
    if beta_prime == 0:
        return 1.0

    if F_limit(K, beta_prime) >= 0:
        raise NumericalError(
            f"F has no root for K={K}, beta'={beta_prime}: it decreases only to "
            f"{F_limit(K, beta_prime):.6g}; pass an explicit alpha instead")

    def f(a):
        return F(a, K, beta_prime)

    lo, f_lo = 0.0, 1.0
    hi = 1.0
    f_hi = f(hi)
    while f_hi > 0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        if hi > _MAX_BRACKET:
            raise NumericalError(f"no sign change of F below alpha = 2**64 (K={K}, beta'={beta_prime})")
        f_hi = f(hi)
    if f_hi == 0.0:
        return float(hi)

    # previous two iterates drive the secant step
    x0, f0 = lo, f_lo
    x1, f1 = hi, f_hi
    for _ in range(maxiter):
        x = x1 - f1 * (x1 - x0) / (f1 - f0) if f1 != f0 else np.nan
        width = hi - lo
        if not (lo < x < hi) or (x - lo) < 1e-3 * width or (hi - x) < 1e-3 * width:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= tol:
            return float(x)
        if fx > 0:
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        x0, f0, x1, f1 = x1, f1, x, fx
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    best = lo if abs(f_lo) < abs(f_hi) else hi
    if abs(f(best)) <= tol:
        return float(best)
    raise NumericalError(f"root finder stalled at alpha={best!r}, F={f(best)!r}")


@dataclass(frozen=True, eq=False)
class ProposalParams:
    """alpha* and the per-mode standard deviations of the proposal."""

    alpha_star: float
    sigmas: np.ndarray
    K: int
    beta_prime: float

    def __post_init__(self):
        s = np.array(self.sigmas, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "sigmas", s)

    @classmethod
    def build(cls, K, beta_prime, alpha=None):
        """Proposal for cutoff ``K``; ``alpha`` defaults to the root of F.

        Any positive ``alpha`` gives a valid proposal for rejection
        sampling; the root is only the efficient choice.
        """
        if beta_prime < 0:
            raise ValueError("beta_prime must be >= 0")
        if alpha is None:
            alpha = solve_alpha_star(K, beta_prime)
        elif not alpha > 0:
            raise ValueError("alpha must be > 0")
        k = np.arange(1, K + 1)
        sig2 = 1.0 / (1.0 + alpha * beta_prime * k**2 / K**3)
        return cls(float(alpha), np.sqrt(sig2), int(K), float(beta_prime))

    @property
    def coupling(self):
        """``alpha* beta' / K^3``, the prefactor inside the log-density."""
        return self.alpha_star * self.beta_prime / self.K**3

    @property
    def full_sigmas(self):
        """Standard deviations for all 2K coordinates."""
        return np.concatenate([self.sigmas, self.sigmas])


def build_proposal(p, alpha=None):
    """Proposal parameters for the model ``p``."""
    return ProposalParams.build(p.K, p.beta_prime, alpha)


def weighted_square_sum(X):
    """``sum_k k^2 (x_k^2 + x_{K+k}^2)`` over the last axis."""
    X = np.asarray(X, dtype=float)
    K = X.shape[-1] // 2
    k2 = np.arange(1, K + 1) ** 2
    return np.sum(k2 * (X[..., :K] ** 2 + X[..., K:] ** 2), axis=-1)


def draw_proposals(pp, rng, n):
    """Draw ``n`` projected proposal points as an ``(n, 2K)`` array.

    Rows whose Gaussian draw is exactly zero are redrawn.
    """
    sig = pp.full_sigmas
    X = rng.standard_normal((n, 2 * pp.K)) * sig
    nrm = np.sqrt(np.einsum("ij,ij->i", X, X))
    bad = nrm == 0.0
    while bad.any():
        X[bad] = rng.standard_normal((int(bad.sum()), 2 * pp.K)) * sig
        nrm[bad] = np.sqrt(np.einsum("ij,ij->i", X[bad], X[bad]))
        bad = nrm == 0.0
    return X / nrm[:, None]


def sample_proposal(pp, rng):
    """One draw from the proposal density on the sphere."""
    for _ in range(1000):
        x = rng.standard_normal(2 * pp.K) * pp.full_sigmas
        nrm = np.linalg.norm(x)
        if nrm > 0:
            return SpherePoint(x / nrm)
    raise DegenerateInputError("random stream keeps producing zero vectors")


def _coords(x):
    return x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)


def log_g(x, pp):
    """Log proposal density up to a constant: ``-K log(1 + c S(x))``."""
    S = weighted_square_sum(_coords(x))
    return -pp.K * np.log1p(pp.coupling * S)


def log_f(x, p):
    """Log Gibbs density up to a constant: ``-beta H_K``."""
    modes = coords_to_modes(_coords(x), p.E0)
    v3 = h3(modes) if p.nonlin_ratio != 0.0 and p.beta_prime != 0.0 else 0.0
    return -beta_hamiltonian_from(h2(modes), v3, p)


def log_ratio_f_over_g(x, p, pp):
    """``log(f/g)`` up to a constant; vectorized over leading axes of ``x``."""
    X = _coords(x)
    return log_f(X, p) - log_g(X, pp)
