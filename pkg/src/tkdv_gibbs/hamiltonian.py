"""Quadratic and cubic Hamiltonian components of truncated KdV.

All evaluators accept a :class:`~tkdv_gibbs.spectral.Spectrum` or a raw
complex array of modes with shape ``(..., K)``; the batched form is what
the sampler uses.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import Spectrum

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class HamiltonianValue:
    h2: float
    h3: float
    beta_h: float


def _modes(s):
    return s.modes if isinstance(s, Spectrum) else np.asarray(s, dtype=complex)


def h2(s):
    """Dispersive part ``2 pi * sum k^2 |u_k|^2``."""
    m = _modes(s)
    k = np.arange(1, m.shape[-1] + 1)
    return TWO_PI * np.sum(k**2 * (m.real**2 + m.imag**2), axis=-1)


def h3(s):
    """Cubic part via the O(K^2) triad double sum.

    For each n the inner convolution ``sum_{k<n} u_k u_{n-k}`` is
    accumulated in index order with no reordering, so repeated runs give
    bit-identical results.
    """
    m = _modes(s)
    K = m.shape[-1]
    # mode-major layout keeps each mode contiguous across the batch
    m = np.ascontiguousarray(np.moveaxis(m, -1, 0))
    total = np.zeros(m.shape[1:])
    for n in range(2, K + 1):
        conv = m[0] * m[n - 2]
        for k in range(2, n):
            conv += m[k - 1] * m[n - k - 1]
        un = m[n - 1]
        total += un.real * conv.real + un.imag * conv.imag
    return TWO_PI * total


def beta_hamiltonian_from(h2_val, h3_val, p):
    """Combine precomputed components into ``beta * H_K``."""
    if p.beta_prime == 0.0:
        return np.zeros_like(np.asarray(h2_val, dtype=float))
    scale = p.beta_prime / (p.E0 * p.K**2)
    return scale * (h2_val - p.nonlin_ratio * h3_val)


def beta_hamiltonian(p, s):
    """``beta * H_K = beta' / (E0 K^2) * (H2 - (C3/C2) H3)``."""
    if p.nonlin_ratio == 0.0:
        return beta_hamiltonian_from(h2(s), 0.0, p)
    return beta_hamiltonian_from(h2(s), h3(s), p)


def evaluate(p, s):
    v2, v3 = float(h2(s)), float(h3(s))
    return HamiltonianValue(v2, v3, float(beta_hamiltonian_from(v2, v3, p)))


def _two_mode_moduli(phi, E0):
    r = np.sqrt(E0 / TWO_PI)
    return r * np.cos(phi), r * np.sin(phi)


def two_mode_spectrum(theta1, theta2, phi, E0):
    """Spectrum with ``u_1 = R1 e^{i theta1}``, ``u_2 = R2 e^{i theta2}``."""
    R1, R2 = _two_mode_moduli(phi, E0)
    return Spectrum([R1 * np.exp(1j * theta1), R2 * np.exp(1j * theta2)])


def h2_exact_2mode(theta1, theta2, phi, E0):
    """Closed form of H2 for K = 2: ``2 pi (R1^2 + 4 R2^2)``."""
    R1, R2 = _two_mode_moduli(phi, E0)
    return TWO_PI * (R1**2 + 4.0 * R2**2)


def h3_exact_2mode(theta1, theta2, phi, E0):
    """Closed form of H3 for K = 2: ``2 pi R2 R1^2 cos(2 theta1 - theta2)``."""
    R1, R2 = _two_mode_moduli(phi, E0)
    return TWO_PI * R2 * R1**2 * np.cos(2.0 * theta1 - theta2)
