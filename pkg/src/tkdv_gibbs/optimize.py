"""Downhill simplex (Nelder-Mead) minimizer."""

from dataclasses import dataclass

import numpy as np

from .errors import OptimizationError


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool


def initial_simplex(x0, step):
    """``x0`` plus one vertex per coordinate, offset by ``step`` along that axis."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    sim = np.tile(x0, (n + 1, 1))
    sim[1:] += step * np.eye(n)
    return sim


def nelder_mead(func, x0, step=0.05, ftol=1e-10, maxiter=None,
                alpha=1.0, gamma=2.0, rho=0.5, sigma=0.5):
    """Minimize ``func`` starting from an axis-aligned simplex around ``x0``.

    Stops when the spread of function values over the simplex drops below
    ``ftol`` or after ``maxiter`` iterations (default ``200 * len(x0)``).
    ``alpha, gamma, rho, sigma`` are the reflection, expansion,
    contraction and shrink coefficients.
    """
    sim = initial_simplex(x0, step)
    n = sim.shape[1]
    if maxiter is None:
        maxiter = 200 * n
    fsim = np.array([func(v) for v in sim])
    nfev = n + 1

    nit = 0
    converged = False
    while True:
        order = np.argsort(fsim, kind="stable")
        sim, fsim = sim[order], fsim[order]
        if fsim[-1] - fsim[0] < ftol:
            converged = True
            break
        if nit >= maxiter:
            break
        nit += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        nfev += 1

        if fr < fsim[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fsim[-1] = xe, fe
            else:
                sim[-1], fsim[-1] = xr, fr
            continue
        if fr < fsim[-2]:
            sim[-1], fsim[-1] = xr, fr
            continue

        if fr < fsim[-1]:
            # outside contraction
            xc = centroid + rho * (xr - centroid)
            fc = func(xc)
            nfev += 1
            if fc <= fr:
                sim[-1], fsim[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = func(xc)
            nfev += 1
            if fc < fsim[-1]:
                sim[-1], fsim[-1] = xc, fc
                continue

        sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
        fsim[1:] = [func(v) for v in sim[1:]]
        nfev += n

    return SimplexResult(sim[0].copy(), float(fsim[0]), nit, nfev, converged)


def maximize(func, x0, step=0.05, ftol=1e-10, maxiter=None, restarts=1, max_restarts=20):
    """Maximize ``func`` with Nelder-Mead, restarting from the best point.

    At least ``restarts`` restarts are made; further ones follow while the
    previous run either failed to converge or still improved the optimum
    by more than ``ftol``, up to ``max_restarts``.  Raises
    :class:`OptimizationError` if the final run has not converged.
    """
    def neg(v):
        return -func(v)

    res = nelder_mead(neg, x0, step, ftol, maxiter)
    total_it = res.nit
    for i in range(max_restarts):
        prev = res.fun
        res = nelder_mead(neg, res.x, step, ftol, maxiter)
        total_it += res.nit
        if i + 1 >= restarts and res.converged and prev - res.fun <= ftol:
            break
    if not res.converged:
        raise OptimizationError(
            f"simplex did not converge after {total_it} iterations",
            best_x=res.x, best_value=-res.fun)
    res.fun = -res.fun
    res.nit = total_it
    return res
