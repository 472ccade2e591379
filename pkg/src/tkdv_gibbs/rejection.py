"""Rejection sampling of the TKdV Gibbs measure.

The rejection constant is found once by a simplex search seeded at the
Dirichlet kernel; the sampling loop then needs no communication, so
workers run independent streams and their batches are concatenated.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantViolationError, OptimizationError
from .optimize import maximize
from .proposal import (ProposalParams, build_proposal, draw_proposals,
                       log_f, log_ratio_f_over_g)
from .spectral import SpherePoint, dirichlet_kernel

log = logging.getLogger(__name__)

IMPROVED = "improved"
NAIVE = "naive"
MODES = (IMPROVED, NAIVE)

LOG_M_MARGIN = 1e-12
VIOLATION_TOL = 1e-9
CHUNK = 4096


def uniform_proposal(K):
    """The spectrally uniform measure, expressed as a flat proposal."""
    return ProposalParams(1.0, np.ones(K), int(K), 0.0)


@dataclass(frozen=True, eq=False)
class RejectionSetup:
    """Everything a worker needs; computed once and shared read-only."""

    params: object
    proposal: ProposalParams
    log_M: float
    argmax: SpherePoint
    mode: str = IMPROVED
    n_iter: int = 0

    def log_ratio(self, X):
        if self.mode == NAIVE:
            return log_f(X, self.params)
        return log_ratio_f_over_g(X, self.params, self.proposal)

    def draw(self, rng, n):
        return draw_proposals(self.proposal, rng, n)


def single_mode(K):
    """Sphere point with all energy in mode 1 (a pure cosine)."""
    x = np.zeros(2 * K)
    x[0] = 1.0
    return SpherePoint(x)


def find_rejection_constant(p, pp=None, mode=IMPROVED, step=0.05, ftol=1e-10, restarts=1,
                            seeds=None):
    """Maximize log(f/g) over the sphere to get the rejection constant.

    The search runs on unconstrained 2K-vectors with the radial projection
    applied inside the objective.  It is started from the Dirichlet kernel
    and from the pure mode-1 state (or from ``seeds``), keeping the best.
    The returned ``log_M`` includes a small safety margin except when
    beta' = 0, where the ratio is identically 1 and ``log_M`` is exactly 0.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == NAIVE:
        pp = uniform_proposal(p.K)
    elif pp is None:
        pp = build_proposal(p)

    x0 = dirichlet_kernel(p.K, p.E0)
    if p.beta_prime == 0.0:
        return RejectionSetup(p, pp, 0.0, x0, mode, 0)
    if seeds is None:
        seeds = [x0, single_mode(p.K)] if p.K > 1 else [x0]

    probe = RejectionSetup(p, pp, 0.0, x0, mode)

    def objective(v):
        nrm = np.sqrt(v @ v)
        if nrm == 0.0:
            return -np.inf
        return float(probe.log_ratio(v / nrm))

    best = None
    failure = None
    n_iter = 0
    for seed_pt in seeds:
        coords = seed_pt.coords if isinstance(seed_pt, SpherePoint) else np.asarray(seed_pt)
        try:
            res = maximize(objective, coords, step=step, ftol=ftol, restarts=restarts)
        except OptimizationError as e:
            log.debug("seed did not converge: %s", e)
            if failure is None or e.best_value > failure.best_value:
                failure = e
            continue
        n_iter += res.nit
        if best is None or res.fun > best.fun:
            best = res
    # an unconverged run only matters if it beat every converged one
    if best is None or (failure is not None and failure.best_value > best.fun + ftol):
        raise failure
    argmax = SpherePoint(best.x / np.linalg.norm(best.x))
    log_M = float(probe.log_ratio(argmax.coords)) + LOG_M_MARGIN
    log.debug("log_M=%.15g after %d simplex iterations (%s)", log_M, n_iter, mode)
    return RejectionSetup(p, pp, log_M, argmax, mode, n_iter)


@dataclass(eq=False)
class SampleBatch:
    """Accepted points from one or more rejection loops.

    ``accepted`` is an ``(n_accepted, 2K)`` array of sphere coordinates.
    """

    accepted: np.ndarray
    n_proposed: int
    seed: int
    worker_id: int
    max_excess: float = -np.inf
    per_worker: list = field(default_factory=list)

    @property
    def n_accepted(self):
        return int(self.accepted.shape[0])

    @property
    def acceptance_rate(self):
        return self.n_accepted / self.n_proposed if self.n_proposed else 0.0

    def points(self):
        return [SpherePoint(x) for x in self.accepted]


def worker_rng(seed, worker_id):
    """Independent counter-based stream for ``(seed, worker_id)``."""
    ss = np.random.SeedSequence([int(seed), int(worker_id)])
    return np.random.Generator(np.random.Philox(ss))


def run_sampler(setup, n_accept=None, max_proposals=None, seed=0, worker_id=0, chunk=CHUNK):
    """Rejection loop until ``n_accept`` accepts or ``max_proposals`` draws.

    With both limits given, whichever is reached first stops the loop.
    Raises :class:`ConstantViolationError` if any proposal has a log-ratio
    above ``log_M + 1e-9``.
    """
    if n_accept is None and max_proposals is None:
        raise ValueError("need n_accept and/or max_proposals")
    if n_accept is not None and n_accept < 0 or max_proposals is not None and max_proposals < 0:
        raise ValueError("stop limits must be non-negative")
    rng = worker_rng(seed, worker_id)
    K = setup.params.K
    kept = []
    n_kept = 0
    n_prop = 0
    max_excess = -np.inf
    while True:
        if n_accept is not None and n_kept >= n_accept:
            break
        if max_proposals is not None and n_prop >= max_proposals:
            break
        n = chunk if max_proposals is None else min(chunk, max_proposals - n_prop)
        X = setup.draw(rng, n)
        excess = setup.log_ratio(X) - setup.log_M
        u = rng.random(n)
        worst = int(np.argmax(excess))
        max_excess = max(max_excess, float(excess[worst]))
        if excess[worst] > VIOLATION_TOL:
            raise ConstantViolationError(
                f"log f/g exceeds log_M by {excess[worst]:.3e}; re-optimize from the reported point",
                point=X[worst].copy(), log_ratio=float(excess[worst] + setup.log_M),
                log_M=setup.log_M)
        idx = np.flatnonzero(u < np.exp(excess))
        if n_accept is not None and n_kept + idx.size >= n_accept:
            idx = idx[: n_accept - n_kept]
            n_prop += int(idx[-1]) + 1 if idx.size else n
        else:
            n_prop += n
        kept.append(X[idx])
        n_kept += idx.size
    acc = np.concatenate(kept) if kept else np.empty((0, 2 * K))
    return SampleBatch(acc, n_prop, int(seed), int(worker_id), max_excess)


def _split(total, workers):
    if total is None:
        return [None] * workers
    base, extra = divmod(int(total), workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _run_worker(args):
    setup, n_acc, n_prop, seed, wid = args
    return run_sampler(setup, n_acc, n_prop, seed, wid)


def merge_batches(batches):
    """Concatenate worker batches in worker-id order."""
    batches = sorted(batches, key=lambda b: b.worker_id)
    if len(batches) == 1:
        return batches[0]
    acc = np.concatenate([b.accepted for b in batches])
    return SampleBatch(
        acc, sum(b.n_proposed for b in batches), batches[0].seed, -1,
        max(b.max_excess for b in batches), per_worker=batches)


def run_parallel(setup, n_accept=None, max_proposals=None, seed=0, workers=1):
    """Run ``workers`` independent rejection loops in separate processes.

    Stop limits are split evenly across workers.  With one worker this is
    exactly :func:`run_sampler` with ``worker_id = 0``.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if n_accept is None and max_proposals is None:
        raise ValueError("need n_accept and/or max_proposals")
    jobs = list(zip([setup] * workers, _split(n_accept, workers),
                    _split(max_proposals, workers), [seed] * workers, range(workers)))
    if workers == 1:
        return _run_worker(jobs[0])
    with ProcessPoolExecutor(max_workers=workers) as ex:
        batches = list(ex.map(_run_worker, jobs))
    return merge_batches(batches)


@dataclass(frozen=True)
class Improvement:
    factor: float
    improved_rate: float
    naive_rate: float
    improved_accepts: int
    improved_proposed: int
    naive_accepts: int
    naive_proposed: int
    censored: bool
    improved_batch: SampleBatch = field(default=None, repr=False, compare=False)


def measure_improvement(p, budget, naive_budget=None, seed=0, workers=1, min_naive=100,
                        n_accept=None):
    """Ratio of improved to naive acceptance rates under the same model.

    The improved sampler draws ``budget`` proposals (stopping early at
    ``n_accept`` accepts if given) and the naive one ``naive_budget``.
    Fewer than ``min_naive`` naive accepts flags the result as censored;
    with none at all the naive rate is replaced by ``1 / naive_budget``,
    so the factor becomes a lower bound.
    """
    naive_budget = budget if naive_budget is None else naive_budget
    improved = find_rejection_constant(p, mode=IMPROVED)
    naive = find_rejection_constant(p, mode=NAIVE)
    b_imp = run_parallel(improved, n_accept=n_accept, max_proposals=budget, seed=seed,
                         workers=workers)
    b_nai = run_parallel(naive, max_proposals=naive_budget, seed=seed + 1, workers=workers)
    r_imp, r_nai = b_imp.acceptance_rate, b_nai.acceptance_rate
    denom = r_nai if b_nai.n_accepted > 0 else 1.0 / b_nai.n_proposed
    return Improvement(r_imp / denom, r_imp, r_nai, b_imp.n_accepted, b_imp.n_proposed,
                       b_nai.n_accepted, b_nai.n_proposed, b_nai.n_accepted < min_naive, b_imp)
