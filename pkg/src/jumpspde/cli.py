"""Command-line entry point: ``jumpspde SUBCOMMAND [--config PATH] [--seed N] [--threads N]``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 invariant violation.  Every failure also prints one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import levy
from .config import RunConfig, parse_config
from .ensemble import convergence_sweep, sigma_projection_sweep
from .errors import (
    BlowUpThreshold,
    ConfigError,
    InvariantViolation,
    JumpBudgetExceeded,
    NonFinite,
    SmallJumpMassAbsent,
)
from .generator import generator_gap_sweep, sample_ball
from .integrator import Brownian, SmallJump, simulate_path
from .invariants import run_suite
from .streams import MASK64, path_stream

log = logging.getLogger("jumpspde")

SUBCOMMANDS = ("alpha", "simulate", "converge", "generator-check", "invariants", "sigma-sweep")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 1, 2, 3


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _warn_ratio(measure, eps_list) -> None:
    grid = sorted(set(eps_list), reverse=True)
    if len(grid) >= 4:
        verdict = levy.ratio_verdict(measure, grid)
        if verdict.verdict != "vanishing":
            log.warning("eps/alpha(eps) is %s on this grid (slope %.3g); "
                        "the jump noise need not approach the Brownian limit",
                        verdict.verdict, verdict.slope)


def cmd_alpha(cfg: RunConfig, out: Path, threads: int) -> int:
    measure = cfg.measure.build()
    eps_list = list(cfg.ensemble.eps_list)
    rows = []
    for eps in eps_list:
        a = levy.alpha(measure, eps)
        rows.append((eps, a, eps / a if a > 0 else math.nan))
    grid = sorted(set(eps_list), reverse=True)
    if len(grid) >= 4:
        v = levy.ratio_verdict(measure, grid)
        verdict = f"{v.verdict} (slope {v.slope:.7g})"
    else:
        verdict = "undecided (needs at least 4 eps values)"
    print(f"{'eps':>14} {'alpha':>14} {'ratio':>14}")
    for eps, a, r in rows:
        print(f"{eps:>14.7g} {a:>14.7g} {r:>14.7g}")
    print(f"verdict: {verdict}")
    write_csv(out / "alpha.csv", ("eps", "alpha", "ratio"), rows)
    return EXIT_OK


def _driver(cfg: RunConfig, eps):
    if eps is None:
        return Brownian()
    return SmallJump.build(cfg.measure.build(), eps, cfg.ensemble.neglect_tol, cfg.ensemble.jump_budget)


def cmd_simulate(cfg: RunConfig, out: Path, threads: int) -> int:
    model = cfg.model.build()
    sample = simulate_path(model, _driver(cfg, cfg.ensemble.eps), cfg.grid.build(),
                           path_stream(cfg.ensemble.seed, 0))
    if sample.blowup:
        raise NonFinite("simulated path blew up")
    columns = ["t"] + [f"a_{k}" for k in range(1, model.basis.N + 1)]
    write_csv(out / "path.csv", columns,
              ([t, *state] for t, state in zip(sample.times, sample.states)))
    print(f"max_jump {fmt(sample.max_jump)}")
    print(f"jump_count {sample.jump_count}")
    return EXIT_OK


def cmd_converge(cfg: RunConfig, out: Path, threads: int) -> int:
    measure = cfg.measure.build()
    ens = cfg.ensemble
    _warn_ratio(measure, ens.eps_list)
    rows, _ = convergence_sweep(cfg.model.build(), measure, ens.eps_list, cfg.grid.build(),
                                ens.paths, ens.seed, ens.K, ens.neglect_tol, ens.jump_budget,
                                threads)
    write_csv(out / "converge.csv", rows[0].CSV_COLUMNS, (r.csv_values() for r in rows))
    return EXIT_OK


def cmd_sigma_sweep(cfg: RunConfig, out: Path, threads: int) -> int:
    ens = cfg.ensemble
    if ens.eps is None:
        raise ConfigError("sigma-sweep needs ensemble.eps")
    rows = sigma_projection_sweep(cfg.model.build(), _driver(cfg, ens.eps), ens.n_list,
                                  cfg.grid.build(), ens.paths, ens.seed, ens.delta_threshold,
                                  threads)
    write_csv(out / "sigma_sweep.csv", rows[0].CSV_COLUMNS, (r.csv_values() for r in rows))
    return EXIT_OK


def cmd_generator_check(cfg: RunConfig, out: Path, threads: int) -> int:
    gen = cfg.generator
    model = cfg.model.build()
    measure = (gen.measure or cfg.measure).build()
    z = sample_ball(model.basis.N, gen.ball_radius, gen.z_samples, path_stream(cfg.ensemble.seed, 0))
    sweep = generator_gap_sweep(model, measure, gen.build(), gen.ball_radius, z, gen.eps_list)
    write_csv(out / "generator.csv", sweep.rows[0].CSV_COLUMNS, (r.csv_values() for r in sweep.rows))
    slope = "exact (all gaps vanish)" if sweep.exact else f"{sweep.slope:.7g}"
    print(f"gap slope: {slope}")
    return EXIT_OK


def cmd_invariants(cfg: RunConfig, out: Path, threads: int) -> int:
    checks = run_suite(cfg.model.build(), cfg.measure.build(), cfg.ensemble.seed)
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.ok]
    if failed:
        raise InvariantViolation(f"{len(failed)} invariant(s) violated: {', '.join(failed)}")
    return EXIT_OK


COMMANDS = {
    "alpha": cmd_alpha,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "generator-check": cmd_generator_check,
    "invariants": cmd_invariants,
    "sigma-sweep": cmd_sigma_sweep,
}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit": code}), file=sys.stderr)
    return code


def load_config(path, seed) -> RunConfig:
    cfg = parse_config(Path(path).read_text(encoding="utf-8")) if path else RunConfig()
    if seed is not None:
        if not 0 <= seed <= MASK64:
            raise ConfigError(f"--seed must be a 64-bit unsigned integer, got {seed}")
        cfg = cfg.model_copy(update={"ensemble": cfg.ensemble.model_copy(update={"seed": seed})})
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="jumpspde", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="JSON run configuration (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, help="override ensemble.seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")

    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {args.threads}")
        cfg = load_config(args.config, args.seed)
        out = Path(cfg.output.directory)
        code = COMMANDS[args.subcommand](cfg, out, args.threads)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(cfg.dump(), encoding="utf-8")
        return code
    except (ConfigError, JumpBudgetExceeded, SmallJumpMassAbsent) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_CONFIG)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_CONFIG)
    except (BlowUpThreshold, NonFinite) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC)
    except InvariantViolation as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INVARIANT)


if __name__ == "__main__":
    sys.exit(main())
