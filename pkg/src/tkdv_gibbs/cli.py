"""Command-line driver.

Subcommands: ``sample``, ``bench``, ``speedup``, ``validate``, ``extreme``.
Every subcommand writes plain CSV/JSON files into ``--output`` (default:
``$TKDV_OUTPUT_DIR`` or ``./tkdv_out``).

Exit status: 0 success, 2 usage, 3 numerical failure, 4 insufficient data.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import report
from .errors import ConstantViolationError, InsufficientDataError, NumericalError
from .hamiltonian import h2, h2_exact_2mode, h3, h3_exact_2mode
from .proposal import build_proposal
from .rejection import (IMPROVED, MODES, find_rejection_constant, measure_improvement,
                        run_parallel)
from .spectral import ModelParams, coords_to_modes, dirichlet_peak
from .stats import ensemble_stats, extreme_event

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_NO_DATA = 4

VALIDATE_TOL = 1e-12

log = logging.getLogger("tkdv_gibbs")


class UsageError(Exception):
    pass


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _float_list(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _int_list(s):
    return [_positive_int(v) for v in s.split(",") if v.strip()]


def _add_model(p, beta_default=0.0):
    p.add_argument("--K", type=_positive_int, default=16, help="cutoff wavenumber")
    p.add_argument("--energy", type=float, default=1.0, help="total energy E0")
    p.add_argument("--beta-prime", type=float, default=beta_default,
                   help="normalized inverse temperature")
    p.add_argument("--nonlin-ratio", type=float, default=0.0, help="C3/C2")


def _add_run(p, samples=None):
    p.add_argument("--samples", type=_positive_int, default=samples,
                   help="stop after this many accepted samples")
    p.add_argument("--max-proposals", type=_positive_int, default=None,
                   help="stop after this many proposals")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--mode", choices=MODES, default=IMPROVED)
    p.add_argument("--alpha", type=float, default=None,
                   help="proposal alpha (default: root of F; needed when F has no root)")


def _add_output(p):
    p.add_argument("--output", type=Path, default=None,
                   help=f"output directory (default ${report.OUTPUT_ENV} or ./tkdv_out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    ap = argparse.ArgumentParser(prog="tkdv-gibbs", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw an ensemble and write its statistics")
    _add_model(p)
    _add_run(p, samples=1000)
    p.add_argument("--n-grid", type=_positive_int, default=None)
    p.add_argument("--bins", type=_positive_int, default=81)
    p.add_argument("--dump-spectra", action="store_true",
                   help="also write every accepted spectrum")
    _add_output(p)

    p = sub.add_parser("bench", help="improved vs naive acceptance over a parameter grid")
    p.add_argument("--K", type=_positive_int, default=16)
    p.add_argument("--energy", type=float, default=1.0)
    p.add_argument("--beta-prime", type=_float_list, default=[20.0])
    p.add_argument("--nonlin-ratio", type=_float_list, default=[0.0])
    p.add_argument("--max-proposals", type=_positive_int, default=100_000,
                   help="proposal budget for the improved sampler")
    p.add_argument("--naive-proposals", type=_positive_int, default=None,
                   help="proposal budget for the naive sampler (default: same)")
    p.add_argument("--samples", type=_positive_int, default=None,
                   help="cap on improved accepts used for skewness")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    _add_output(p)

    p = sub.add_parser("speedup", help="wall time versus worker count")
    _add_model(p, beta_default=20.0)
    p.set_defaults(K=128)
    p.add_argument("--workers", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--proposals-per-worker", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("validate", help="two-mode exact Hamiltonian check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive_int, default=10_000)
    p.add_argument("--energy", type=float, default=1.0)
    _add_output(p)

    p = sub.add_parser("extreme", help="largest-displacement field of an ensemble")
    _add_model(p, beta_default=40.0)
    _add_run(p, samples=500)
    p.add_argument("--n-grid", type=_positive_int, default=None)
    _add_output(p)
    return ap


def _params(args):
    try:
        return ModelParams(args.K, args.energy, args.beta_prime, args.nonlin_ratio)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _outdir(args):
    out = args.output if args.output is not None else report.default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stop(args):
    if args.samples is None and args.max_proposals is None:
        raise UsageError("give --samples and/or --max-proposals")
    return dict(n_accept=args.samples, max_proposals=args.max_proposals)


def _model_meta(p):
    return {"K": p.K, "E0": p.E0, "beta_prime": p.beta_prime, "nonlin_ratio": p.nonlin_ratio}


def _sample(args, p):
    stop = _stop(args)
    t0 = time.perf_counter()
    if args.alpha is not None and not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    pp = build_proposal(p, args.alpha) if args.mode == IMPROVED else None
    setup = find_rejection_constant(p, pp, mode=args.mode)
    t1 = time.perf_counter()
    batch = run_parallel(setup, seed=args.seed, workers=args.workers, **stop)
    t2 = time.perf_counter()
    meta = {
        "params": _model_meta(p),
        "mode": args.mode,
        "alpha_star": setup.proposal.alpha_star,
        "log_M": setup.log_M,
        "argmax": setup.argmax.coords,
        "n_accepted": batch.n_accepted,
        "n_proposed": batch.n_proposed,
        "acceptance_rate": batch.acceptance_rate,
        "seed": args.seed,
        "workers": args.workers,
    }
    timing = {"setup_s": t1 - t0, "sampling_s": t2 - t1, "wall_time_s": t2 - t0}
    return setup, batch, meta, timing


def cmd_sample(args):
    p = _params(args)
    out = _outdir(args)
    setup, batch, meta, timing = _sample(args, p)
    report.write_json(out / "metadata.json", meta)
    report.write_json(out / "timing.json", timing)
    st = ensemble_stats(batch, p, n_grid=args.n_grid, bins=args.bins, per_field=True)
    report.write_json(out / "stats.json", {
        "skewness": st.skewness,
        "skewness_per_field": st.skewness_per_field,
        "excess_kurtosis": st.excess_kurtosis,
        "n_samples": st.n_samples,
        "n_grid": st.n_grid,
        "sigma_ref": st.sigma_ref,
        "four_sigma": st.four_sigma,
        "mean_power": st.mean_power,
    })
    ext = args.format
    report.write_table(out / f"histogram.{ext}", ["bin_left", "bin_right", "count"],
                       report.histogram_rows(st.bin_edges, st.counts), ext)
    report.write_table(out / f"spectrum.{ext}", ["k", "power"],
                       report.power_rows(st.mean_power), ext)
    if args.dump_spectra:
        report.write_table(out / f"spectra.{ext}", ["sample_id", "k", "re", "im"],
                           list(report.spectra_rows(coords_to_modes(batch.accepted, p.E0))), ext)
    print(f"accepted {batch.n_accepted}/{batch.n_proposed} "
          f"(rate {batch.acceptance_rate:.4g}), skewness {st.skewness:.4f} -> {out}")
    return EXIT_OK


BENCH_HEADER = ["beta_prime", "nonlin_ratio", "skewness", "improved_rate", "naive_rate",
                "improvement", "censored", "improved_accepted", "improved_proposed",
                "naive_accepted", "naive_proposed"]


def bench_row(p, budget, naive_budget, seed=0, workers=1, samples=None):
    imp = measure_improvement(p, budget, naive_budget, seed=seed, workers=workers,
                              n_accept=samples)
    b = imp.improved_batch
    skew = ensemble_stats(b, p).skewness if b.n_accepted >= 2 else float("nan")
    return [p.beta_prime, p.nonlin_ratio, skew, imp.improved_rate, imp.naive_rate,
            imp.factor, imp.censored, imp.improved_accepts, imp.improved_proposed,
            imp.naive_accepts, imp.naive_proposed]


def cmd_bench(args):
    out = _outdir(args)
    naive_budget = args.naive_proposals or args.max_proposals
    rows = []
    for bp in args.beta_prime:
        for r in args.nonlin_ratio:
            try:
                p = ModelParams(args.K, args.energy, bp, r)
            except ValueError as e:
                raise UsageError(str(e)) from e
            row = bench_row(p, args.max_proposals, naive_budget, args.seed, args.workers,
                            args.samples)
            log.info("beta'=%g C3/C2=%g: %s", bp, r, row[2:7])
            rows.append(row)
    path = report.write_table(out / f"bench.{args.format}", BENCH_HEADER, rows, args.format)
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_speedup(args):
    p = _params(args)
    out = _outdir(args)
    setup = find_rejection_constant(p)
    n = args.proposals_per_worker

    def timed(w):
        t0 = time.perf_counter()
        run_parallel(setup, max_proposals=w * n, seed=args.seed, workers=w)
        return time.perf_counter() - t0

    # fixed load per worker, so ideal scaling keeps wall time flat
    t_one = timed(1)
    rows = []
    for w in args.workers:
        dt = t_one if w == 1 else timed(w)
        rows.append([w, dt, w * t_one / dt])
    path = report.write_table(out / f"speedup.{args.format}", ["workers", "wall_time", "speedup"],
                              rows, args.format)
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def two_mode_errors(trials, seed=0, E0=1.0):
    """Largest deviation of the general H2/H3 from the two-mode closed forms."""
    rng = np.random.default_rng(seed)
    ang = rng.uniform(0.0, 2.0 * np.pi, size=(trials, 3))
    t1, t2, phi = ang.T
    R = np.sqrt(E0 / (2.0 * np.pi))
    modes = np.stack([R * np.cos(phi) * np.exp(1j * t1), R * np.sin(phi) * np.exp(1j * t2)], axis=1)
    e2 = np.abs(h2(modes) - h2_exact_2mode(t1, t2, phi, E0))
    e3 = np.abs(h3(modes) - h3_exact_2mode(t1, t2, phi, E0))
    return float(e2.max()), float(e3.max())


def cmd_validate(args):
    out = _outdir(args)
    e2, e3 = two_mode_errors(args.trials, args.seed, args.energy)
    ok = max(e2, e3) <= VALIDATE_TOL
    report.write_json(out / "validate.json", {
        "trials": args.trials, "seed": args.seed, "E0": args.energy,
        "max_abs_error_h2": e2, "max_abs_error_h3": e3, "tolerance": VALIDATE_TOL, "passed": ok,
    })
    print(f"two-mode check over {args.trials} trials: max|dH2|={e2:.3e} max|dH3|={e3:.3e} "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_extreme(args):
    p = _params(args)
    out = _outdir(args)
    setup, batch, meta, timing = _sample(args, p)
    ev = extreme_event(batch, p, n_grid=args.n_grid)
    report.write_table(out / f"extreme_field.{args.format}", ["xi", "u"],
                       list(zip(ev.field.xi, ev.field.u)), args.format)
    meta.update({
        "max_u": ev.max_u,
        "four_sigma": ev.threshold,
        "exceeds_4sigma": ev.exceeds_4sigma,
        "exceedance_percent": ev.excess_percent,
        "sample_index": ev.index,
        "dirichlet_cap": dirichlet_peak(p.K, p.E0),
    })
    report.write_json(out / "extreme.json", meta)
    report.write_json(out / "timing.json", timing)
    print(f"max u = {ev.max_u:.4f} vs 4 sigma = {ev.threshold:.4f} "
          f"({ev.excess_percent:+.1f}%) from {batch.n_accepted} samples -> {out}")
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "bench": cmd_bench,
    "speedup": cmd_speedup,
    "validate": cmd_validate,
    "extreme": cmd_extreme,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConstantViolationError as e:
        out = args.output if args.output is not None else report.default_output_dir()
        path = report.write_json(Path(out) / "violation.json", {
            "message": str(e), "point": e.point, "log_ratio": e.log_ratio, "log_M": e.log_M,
        })
        print(f"error: {e} (point written to {path})", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InsufficientDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_DATA


if __name__ == "__main__":
    sys.exit(main())
