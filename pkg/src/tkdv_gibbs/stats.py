"""Ensemble post-processing of accepted wave fields."""

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import InsufficientDataError
from .spectral import (WaveField, coords_to_modes, dirichlet_peak,
                       modes_to_displacement, uniform_grid)

DEFAULT_BINS = 81


def sigma_ref(E0):
    """Reference displacement standard deviation ``sqrt(E0 / pi)``."""
    return float(np.sqrt(E0 / np.pi))


def skewness(values):
    """Population skewness ``m3 / m2**1.5``."""
    return float(sps.skew(np.ravel(values), bias=True))


def excess_kurtosis(values):
    return float(sps.kurtosis(np.ravel(values), fisher=True, bias=True))


def histogram_edges(K, E0, bins=DEFAULT_BINS):
    lim = dirichlet_peak(K, E0) + 0.5
    return np.linspace(-lim, lim, bins + 1)


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    skewness: float
    excess_kurtosis: float
    bin_edges: np.ndarray
    counts: np.ndarray
    mean_power: np.ndarray
    n_samples: int
    n_grid: int
    sigma_ref: float
    four_sigma: float
    skewness_per_field: float = float("nan")

    @property
    def histogram(self):
        return self.bin_edges, self.counts


def displacements(batch, p, n_grid=None):
    """Grid displacements of every accepted field, shape ``(n, n_grid)``."""
    n_grid = 2 * p.K if n_grid is None else n_grid
    modes = coords_to_modes(batch.accepted, p.E0)
    return modes_to_displacement(modes, n_grid)


def ensemble_stats(batch, p, n_grid=None, bins=DEFAULT_BINS, per_field=False):
    """Pooled displacement statistics and mean power spectrum.

    Skewness and kurtosis are taken over all grid values of all fields
    pooled together.  With ``per_field=True`` the mean of the per-field
    skewnesses is also reported in ``skewness_per_field``.
    """
    if batch.n_accepted < 2:
        raise InsufficientDataError(f"need at least 2 accepted samples, have {batch.n_accepted}")
    n_grid = 2 * p.K if n_grid is None else n_grid
    modes = coords_to_modes(batch.accepted, p.E0)
    U = modes_to_displacement(modes, n_grid)
    edges = histogram_edges(p.K, p.E0, bins)
    counts, _ = np.histogram(U, bins=edges)
    sig = sigma_ref(p.E0)
    per = float(np.mean(sps.skew(U, axis=1, bias=True))) if per_field else float("nan")
    return EnsembleStats(
        skewness=skewness(U),
        excess_kurtosis=excess_kurtosis(U),
        bin_edges=edges,
        counts=counts,
        mean_power=np.mean(np.abs(modes) ** 2, axis=0),
        n_samples=batch.n_accepted,
        n_grid=n_grid,
        sigma_ref=sig,
        four_sigma=4.0 * sig,
        skewness_per_field=per,
    )


@dataclass(frozen=True, eq=False)
class ExtremeEvent:
    field: WaveField
    max_u: float
    exceeds_4sigma: bool
    threshold: float
    index: int

    @property
    def excess_percent(self):
        return 100.0 * (self.max_u / self.threshold - 1.0)


def extreme_event(batch, p, n_grid=None):
    """The accepted field with the largest positive grid displacement."""
    if batch.n_accepted < 1:
        raise InsufficientDataError("no accepted samples")
    n_grid = 2 * p.K if n_grid is None else n_grid
    U = displacements(batch, p, n_grid)
    peaks = U.max(axis=1)
    i = int(np.argmax(peaks))
    thr = 4.0 * sigma_ref(p.E0)
    max_u = float(peaks[i])
    return ExtremeEvent(WaveField(uniform_grid(n_grid), U[i]), max_u, max_u > thr, thr, i)
