"""Command line entry points: ``simulate``, ``verify``, ``converge`` and ``spectrum``.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import modelio
from .convergence import coupled_refinement_run, space_study, time_study
from .discretization import assemble
from .errors import ConfigurationError, ModelValidationError, NumericalError, SimulationBlowUp
from .semigroup import factorize
from .solver import BLOWUP_QUOTA, moment_stats, simulate_paths
from .verify import run_suite

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("netspde")


def _load(args):
    bundle = modelio.read_model(args.model)
    overrides = {k: getattr(args, k) for k in ("paths", "seed") if getattr(args, k, None) is not None}
    if overrides:
        bundle.config = bundle.config.replace(**overrides)
    return bundle


def cmd_simulate(args):
    b = _load(args)
    cfg, model = b.config, b.model
    op = assemble(model, cfg.N)
    trajs = simulate_paths(cfg, model, op, U0=b.initial)
    files = []
    for tr in trajs:
        path = modelio.trajectory_path(args.out, tr.path)
        modelio.write_trajectory(path, tr, op.layout)
        files.append(path)
    sups = np.array([np.abs(tr.states).max() if tr.states.size else np.nan for tr in trajs])
    blows = np.array([np.nan if tr.completed else tr.blowup_time for tr in trajs])
    stats = moment_stats(sups, blows, cfg.q)
    summary = {
        "model": str(args.model),
        "scheme": cfg.scheme,
        "T": cfg.T,
        "dt": cfg.dt,
        "N": cfg.N,
        "seed": cfg.seed,
        "moments": {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in stats.to_dict().items()},
        "blowup_times": [float(b) for b in blows if np.isfinite(b)],
        "files": files,
    }
    modelio.write_summary(summary_path(args.out), summary)
    print(f"wrote {len(files)} trajectory file(s); E sup|X|^{cfg.q:g} = {stats.estimate:.6g} "
          f"(stderr {stats.stderr:.3g}, blow-ups {stats.blowups}/{stats.paths})")
    if stats.blowups == stats.paths or (stats.paths > 1 and stats.blowup_fraction > BLOWUP_QUOTA):
        log.error("blow-up fraction %.3g exceeds the %.0f%% quota", stats.blowup_fraction, 100 * BLOWUP_QUOTA)
        return EXIT_NUMERICAL
    return EXIT_OK


def summary_path(out):
    stem, dot, ext = str(out).rpartition(".")
    return f"{stem}_summary.yaml" if dot and "/" not in ext else f"{out}_summary.yaml"


def cmd_verify(args):
    b = _load(args)
    N = b.config.N if np.isscalar(b.config.N) else max(b.config.N)
    rep = run_suite(b.model, N=int(N))
    for line in rep.lines():
        print(line)
    print("verify: all checks passed" if rep.ok else "verify: FAILED")
    if args.report:
        modelio.write_summary(args.report, rep.to_dict())
    return EXIT_OK if rep.ok else EXIT_VALIDATION


def cmd_converge(args):
    b = _load(args)
    cfg, model, L = b.config, b.model, args.levels
    if L < 3:
        raise ConfigurationError("--levels must be at least 3")
    if args.mode == "space":
        N0 = int(cfg.N if np.isscalar(cfg.N) else min(cfg.N))
        res = space_study(model, b.initial, cfg.T, [N0 * 2**l for l in range(L)], N0 * 2 ** (L + 1), cfg.dt)
    elif args.mode == "time":
        dts = [cfg.dt / 2**l for l in range(L)]
        res = time_study(model, b.initial, cfg.T, dts, cfg.dt / 2 ** (L + 3), cfg.N)
    else:
        res = coupled_refinement_run(cfg, model, L, U0=b.initial)
    label = "h" if args.mode == "space" else "dt"
    print(f"level,{label},error")
    for i, (s, e) in enumerate(zip(res.sizes, res.errors)):
        print(f"{i},{s:.17g},{e:.17g}")
    print(f"fitted order: {res.order:.6g}")
    if args.out:
        modelio.write_summary(args.out, res.to_dict())
    return EXIT_OK


def cmd_spectrum(args):
    b = _load(args)
    fact = factorize(assemble(b.model, b.config.N))
    text = "".join(f"{v:.17g}\n" for v in fact.eigenvalues)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="netspde", description="Stochastic reaction-diffusion on metric graphs.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate paths and write trajectory files")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True, help="trajectory base path; files get a _p<id> suffix")
    s.add_argument("--paths", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--model", required=True)
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("converge", help="convergence study")
    c.add_argument("--model", required=True)
    c.add_argument("--mode", choices=("space", "time", "strong"), required=True)
    c.add_argument("--levels", type=int, default=4)
    c.add_argument("--out")
    c.set_defaults(func=cmd_converge)

    e = sub.add_parser("spectrum", help="pencil eigenvalues, ascending, one per line")
    e.add_argument("--model", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_spectrum)
    return p


def run_cli(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="netspde: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except modelio.ModelFileError as exc:
        for loc, msg in exc.errors:
            log.error("%s: %s", loc or "model", msg)
        return EXIT_VALIDATION
    except (ModelValidationError, ConfigurationError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (NumericalError, SimulationBlowUp) as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL


def main():
    sys.exit(run_cli())
