import dataclasses

import numpy as np
import pytest

from tkdv_gibbs.errors import ConstantViolationError
from tkdv_gibbs.proposal import build_proposal, log_f
from tkdv_gibbs.rejection import (IMPROVED, NAIVE, find_rejection_constant, measure_improvement,
                                  merge_batches, run_parallel, run_sampler, worker_rng)
from tkdv_gibbs.spectral import ModelParams

from oracles import two_mode_log_f, two_mode_log_g


def grid_log_M(beta_prime, ratio, alpha=None, n=1000):
    """Exhaustive grid of log(f/g) over (phi, psi = 2 t1 - t2).

    At K = 2 the ratio depends on the angles only through phi and psi, so a
    1000 x 1000 grid covers the sphere as densely as 10^6 points allow.
    """
    phi = np.linspace(0, np.pi / 2, n)[:, None]
    psi = np.linspace(0, 2 * np.pi, n, endpoint=False)[None, :]
    lr = two_mode_log_f(phi, psi, 0.0, beta_prime, ratio)
    if alpha is not None:
        lr = lr - two_mode_log_g(phi, alpha, beta_prime)
    return float(lr.max())


@pytest.mark.parametrize("K", [2, 8, 16])
@pytest.mark.parametrize("mode", [IMPROVED, NAIVE])
def test_beta_zero_accepts_everything(K, mode):
    p = ModelParams(K, 1.0, 0.0, 80.0)
    s = find_rejection_constant(p, mode=mode)
    assert s.log_M == 0.0
    b = run_sampler(s, max_proposals=5000, seed=3)
    assert b.acceptance_rate == 1.0
    assert b.n_accepted == b.n_proposed == 5000


def test_naive_linear_constant_is_exact():
    # f alone peaks at pure mode 1, where beta H = beta'/K^2
    for K, bp in ((4, 20.0), (16, 20.0), (16, 40.0)):
        s = find_rejection_constant(ModelParams(K, 1.0, bp, 0.0), mode=NAIVE)
        assert s.log_M == pytest.approx(-bp / K**2, abs=1e-9)


@pytest.mark.parametrize("beta_prime,ratio,alpha", [
    (4.0, 0.0, "root"), (4.0, 30.0, "root"), (20.0, 60.0, 1.0), (20.0, 0.0, 1.0),
    (20.0, 60.0, None), (20.0, 0.0, None)])
def test_two_mode_constant_matches_grid(beta_prime, ratio, alpha):
    p = ModelParams(2, 1.0, beta_prime, ratio)
    if alpha is None:
        s = find_rejection_constant(p, mode=NAIVE)
        ref = grid_log_M(beta_prime, ratio)
    else:
        pp = build_proposal(p) if alpha == "root" else build_proposal(p, alpha)
        s = find_rejection_constant(p, pp, mode=IMPROVED)
        ref = grid_log_M(beta_prime, ratio, pp.alpha_star)
    assert ref <= s.log_M
    assert s.log_M - ref < 1e-3


@pytest.mark.parametrize("beta_prime,ratio", [(20.0, 0.0), (40.0, 60.0)])
def test_ratio_never_exceeds_constant(beta_prime, ratio):
    p = ModelParams(16, 1.0, beta_prime, ratio)
    s = find_rejection_constant(p)
    X = s.draw(worker_rng(11, 0), 50_000)
    assert np.max(s.log_ratio(X)) <= s.log_M + 1e-9
    assert s.log_ratio(s.argmax.coords) == pytest.approx(s.log_M, abs=1e-11)


def test_linear_improved_rate_table_value():
    s = find_rejection_constant(ModelParams(16, 1.0, 20.0, 0.0))
    b = run_sampler(s, max_proposals=100_000, seed=0)
    assert b.acceptance_rate == pytest.approx(0.95, abs=0.02)


def test_violation_is_reported():
    s = find_rejection_constant(ModelParams(8, 1.0, 20.0, 10.0))
    bad = dataclasses.replace(s, log_M=s.log_M - 5.0)
    with pytest.raises(ConstantViolationError) as ei:
        run_sampler(bad, max_proposals=10_000, seed=0)
    e = ei.value
    assert e.point.shape == (16,)
    assert e.log_ratio > e.log_M + 1e-9
    assert s.log_ratio(e.point) == pytest.approx(e.log_ratio)


def test_stop_by_accept_count_truncates_exactly():
    s = find_rejection_constant(ModelParams(8, 1.0, 20.0, 0.0))
    b = run_sampler(s, n_accept=777, seed=2, chunk=100)
    assert b.n_accepted == 777
    short = run_sampler(s, n_accept=500, seed=2, chunk=100)
    np.testing.assert_array_equal(short.accepted, b.accepted[:500])
    assert short.n_proposed < b.n_proposed


def test_stop_argument_validation():
    s = find_rejection_constant(ModelParams(4, 1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        run_sampler(s)
    with pytest.raises(ValueError):
        run_sampler(s, max_proposals=-1)
    with pytest.raises(ValueError):
        run_parallel(s, max_proposals=10, workers=0)


def test_unknown_mode():
    with pytest.raises(ValueError):
        find_rejection_constant(ModelParams(4, 1.0, 1.0, 0.0), mode="fast")


def test_determinism():
    s = find_rejection_constant(ModelParams(16, 1.0, 40.0, 30.0))
    a = run_sampler(s, max_proposals=20_000, seed=42)
    b = run_sampler(s, max_proposals=20_000, seed=42)
    c = run_sampler(s, max_proposals=20_000, seed=43)
    np.testing.assert_array_equal(a.accepted, b.accepted)
    assert a.n_proposed == b.n_proposed
    assert not np.array_equal(a.accepted[:5], c.accepted[:5])


def test_single_worker_parallel_is_run_sampler():
    s = find_rejection_constant(ModelParams(16, 1.0, 20.0, 0.0))
    a = run_parallel(s, max_proposals=10_000, seed=5, workers=1)
    b = run_sampler(s, max_proposals=10_000, seed=5)
    np.testing.assert_array_equal(a.accepted, b.accepted)
    assert a.n_proposed == b.n_proposed


def test_eight_workers_counts_add_up():
    s = find_rejection_constant(ModelParams(8, 1.0, 20.0, 0.0))
    m = run_parallel(s, max_proposals=8000, seed=1, workers=8)
    assert len(m.per_worker) == 8
    assert m.n_proposed == 8000
    assert m.n_accepted == sum(b.n_accepted for b in m.per_worker)
    # worker streams are disjoint: no accepted point repeats
    assert np.unique(m.accepted, axis=0).shape[0] == m.n_accepted
    again = run_parallel(s, max_proposals=8000, seed=1, workers=8)
    np.testing.assert_array_equal(m.accepted, again.accepted)


def test_merge_order_independent():
    s = find_rejection_constant(ModelParams(8, 1.0, 20.0, 0.0))
    parts = [run_sampler(s, max_proposals=500, seed=9, worker_id=w) for w in range(3)]
    a = merge_batches(parts)
    b = merge_batches(parts[::-1])
    np.testing.assert_array_equal(a.accepted, b.accepted)
    assert a.acceptance_rate == b.acceptance_rate


def test_improvement_beta_zero_is_one():
    imp = measure_improvement(ModelParams(8, 1.0, 0.0, 0.0), 2000)
    assert imp.factor == 1.0
    assert not imp.censored


def test_improvement_censored_flag():
    imp = measure_improvement(ModelParams(16, 1.0, 40.0, 120.0), 2000, naive_budget=2000)
    assert imp.censored
    assert imp.naive_accepts < 100
    if imp.naive_accepts == 0:
        assert imp.factor == pytest.approx(imp.improved_rate * 2000)


def test_naive_and_improved_agree_at_beta_zero():
    p = ModelParams(8, 1.0, 0.0, 0.0)
    a = run_sampler(find_rejection_constant(p, mode=IMPROVED), max_proposals=40_000, seed=1)
    b = run_sampler(find_rejection_constant(p, mode=NAIVE), max_proposals=40_000, seed=2)
    for fa, fb in ((a.accepted ** 2, b.accepted ** 2), (a.accepted, b.accepted)):
        diff = fa.mean(axis=0) - fb.mean(axis=0)
        se = np.sqrt(fa.var(axis=0) / len(fa) + fb.var(axis=0) / len(fb))
        assert np.all(np.abs(diff) < 5 * se)


def test_naive_mode_uses_f_alone():
    p = ModelParams(8, 1.0, 20.0, 40.0)
    s = find_rejection_constant(p, mode=NAIVE)
    X = s.draw(worker_rng(0, 0), 10)
    np.testing.assert_array_equal(s.log_ratio(X), log_f(X, p))
    assert np.all(s.proposal.sigmas == 1.0)
