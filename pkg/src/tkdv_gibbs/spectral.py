"""Spectral state of the truncated KdV system.

A microstate is a unit vector ``x`` on the sphere S^{2K-1}.  The first K
coordinates hold the real parts and the last K hold (minus) the imaginary
parts of the Fourier modes 1..K, scaled so that the energy equals E0.
Negative modes are conjugates and mode 0 vanishes, so neither is stored.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidStateError, ResolutionError

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Control parameters of the target Gibbs measure.

    Attributes
    ----------
    K : int
        Cutoff wavenumber.
    E0 : float
        Total energy.
    beta_prime : float
        Normalized inverse temperature, ``E0 * C2 * K**2 * beta``.
    nonlin_ratio : float
        Nonlinearity-to-dispersion ratio ``C3 / C2``.
    """

    K: int
    E0: float = 1.0
    beta_prime: float = 0.0
    nonlin_ratio: float = 0.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")
        if not self.E0 > 0:
            raise ValueError(f"E0 must be positive, got {self.E0!r}")
        if not self.beta_prime >= 0:
            raise ValueError(f"beta_prime must be >= 0, got {self.beta_prime!r}")
        if not self.nonlin_ratio >= 0:
            raise ValueError(f"nonlin_ratio must be >= 0, got {self.nonlin_ratio!r}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "E0", float(self.E0))
        object.__setattr__(self, "beta_prime", float(self.beta_prime))
        object.__setattr__(self, "nonlin_ratio", float(self.nonlin_ratio))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """Unit vector of length 2K.

    Inputs within ``RENORM_TOL`` of unit norm are silently renormalized;
    anything further off raises :class:`InvalidStateError`.
    """

    coords: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.coords, dtype=float)
        if x.ndim != 1 or x.size == 0 or x.size % 2:
            raise InvalidStateError(f"coords must be a 1-D vector of even length, got shape {x.shape}")
        nrm = np.linalg.norm(x)
        if abs(nrm - 1.0) > RENORM_TOL:
            raise InvalidStateError(f"coords not on the unit sphere (|x| = {nrm!r})")
        if abs(nrm - 1.0) > UNIT_TOL:
            x = x / nrm
        object.__setattr__(self, "coords", _frozen(x, float))

    @property
    def K(self):
        return self.coords.size // 2

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return np.array_equal(self.coords, other.coords)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex Fourier modes 1..K of a real wave field."""

    modes: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.modes, dtype=complex)
        if m.ndim != 1 or m.size == 0:
            raise InvalidStateError(f"modes must be a non-empty 1-D vector, got shape {m.shape}")
        object.__setattr__(self, "modes", _frozen(m, complex))

    @property
    def K(self):
        return self.modes.size

    @property
    def a(self):
        """Cosine coefficients ``a_k = 2 Re u_k``."""
        return 2.0 * self.modes.real

    @property
    def b(self):
        """Sine coefficients ``b_k = -2 Im u_k``."""
        return -2.0 * self.modes.imag

    def __neg__(self):
        return Spectrum(-self.modes)

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return np.array_equal(self.modes, other.modes)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class WaveField:
    """Surface displacement ``u`` sampled on a uniform grid ``xi`` over [-pi, pi)."""

    xi: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        u = np.asarray(self.u, dtype=float)
        if xi.shape != u.shape or xi.ndim != 1:
            raise ValueError("xi and u must be 1-D arrays of equal length")
        object.__setattr__(self, "xi", _frozen(xi, float))
        object.__setattr__(self, "u", _frozen(u, float))

    @property
    def max_u(self):
        return float(self.u.max())


def coords_to_modes(X, E0):
    """Map sphere coordinates ``(..., 2K)`` to complex modes ``(..., K)``.

    No norm check; this is the vectorized kernel behind
    :func:`sphere_to_spectrum`.
    """
    X = np.asarray(X, dtype=float)
    K = X.shape[-1] // 2
    return np.sqrt(E0 / (2.0 * np.pi)) * (X[..., :K] - 1j * X[..., K:])


def modes_to_coords(modes, E0):
    """Inverse of :func:`coords_to_modes`."""
    modes = np.asarray(modes, dtype=complex)
    scale = np.sqrt(2.0 * np.pi / E0)
    return scale * np.concatenate([modes.real, -modes.imag], axis=-1)


def sphere_to_spectrum(x, E0):
    """Microstate spectrum of the sphere point ``x`` at energy ``E0``."""
    if not isinstance(x, SpherePoint):
        x = SpherePoint(x)
    return Spectrum(coords_to_modes(x.coords, E0))


def energy(s):
    """``2 pi * sum |u_k|^2`` over the stored modes."""
    m = s.modes if isinstance(s, Spectrum) else np.asarray(s)
    return 2.0 * np.pi * np.sum(np.abs(m) ** 2, axis=-1)


def uniform_grid(n_grid):
    return -np.pi + 2.0 * np.pi * np.arange(n_grid) / n_grid


def modes_to_displacement(modes, n_grid):
    """Evaluate the real field of ``modes`` (shape ``(..., K)``) on the grid.

    Returns an array of shape ``(..., n_grid)``.
    """
    modes = np.asarray(modes, dtype=complex)
    K = modes.shape[-1]
    xi = uniform_grid(n_grid)
    k = np.arange(1, K + 1)
    phase = np.exp(1j * np.outer(k, xi))  # (K, n_grid)
    return 2.0 * (modes @ phase).real


def spectrum_to_field(s, n_grid=None):
    """Physical-space wave field of ``s`` on ``n_grid`` uniform points.

    Defaults to ``2K`` points, the fewest that resolve mode K.
    """
    K = s.K
    if n_grid is None:
        n_grid = 2 * K
    if n_grid < 2 * K:
        raise ResolutionError(f"n_grid={n_grid} cannot resolve K={K} (need >= {2 * K})")
    return WaveField(uniform_grid(n_grid), modes_to_displacement(s.modes, n_grid))


def project_to_sphere(x):
    """Radial projection ``x / |x|``."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0 or not np.isfinite(nrm):
        raise DegenerateInputError("cannot project a zero (or non-finite) vector onto the sphere")
    return SpherePoint(x / nrm)


def dirichlet_kernel(K, E0=1.0):
    """Zero-mean Dirichlet kernel centred at xi = 0, as a sphere point.

    Every mode equals ``sqrt(E0 / (2 pi K))``, so the energy is ``E0`` for
    any K.  ``E0`` does not change the sphere point and is accepted only
    for symmetry with :func:`sphere_to_spectrum`.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not E0 > 0:
        raise ValueError("E0 must be positive")
    x = np.zeros(2 * K)
    x[:K] = 1.0 / np.sqrt(K)
    return SpherePoint(x)


def dirichlet_peak(K, E0=1.0):
    """Peak displacement of the Dirichlet kernel, ``sqrt(2 E0 K / pi)``."""
    return float(np.sqrt(2.0 * E0 * K / np.pi))
