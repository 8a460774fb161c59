"""Command line entry point: count, bounds, asymptotics, verify.

Exit codes: 0 success, 1 violation found, 2 usage or config error,
3 capacity, certification or checkpoint error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .asymptotics import envelope_csv, evaluate
from .bounds import D_MAX, D_MIN, compute_N, reports_csv, reports_json
from .config import Config, load_config
from .constants import constant_bundle
from .errors import (
    CapacityError, CertificationFailure, CheckpointError, ConfigError, DomainError,
    HypothesisViolation, MethodFailure, PartineqError, RootBracketError,
)
from .exact import FamilyConfig, Kind, count_series
from .seriesio import csv_text, save
from .verify import DEFAULT_CHECKPOINT_EVERY, Mode, SweepJob, run_sweep, run_sweeps

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2, 3
DESK_N_CAP = 200_000


def _d_list(text: str) -> list[int]:
    """'8', '4-10' or '6,8,10'."""
    out = []
    try:
        for chunk in text.split(","):
            if "-" in chunk:
                lo, hi = chunk.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(chunk))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad d list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty d list")
    return out


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _version_text() -> str:
    cfg = Config()
    return (f"partineq {__version__} "
            f"params-even={cfg.params_for(4).fingerprint()} "
            f"params-odd={cfg.params_for(5).fingerprint()}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partineq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=_version_text())
    p.add_argument("--config", help="INI file with run settings and parameters")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="exact counts as CSV")
    c.add_argument("--d", type=_positive, required=True)
    c.add_argument("--a", type=_positive, default=2)
    c.add_argument("--minus", action="store_true", help="drop the part d+3-a")
    c.add_argument("--kind", choices=[k.value for k in Kind], default=Kind.CONGRUENCE.value)
    c.add_argument("--n-max", type=_nonnegative, required=True)
    c.add_argument("--out", help="CSV path (default stdout)")
    c.add_argument("--cache", help="also write the binary cache file")

    b = sub.add_parser("bounds", help="thresholds N_1..N_8 and N(d)")
    b.add_argument("--d", type=_d_list, required=True, help="d, a range 4-61, or a list")
    b.add_argument("--out", help="JSON path (default stdout)")
    b.add_argument("--csv", help="also write the CSV table here")

    a = sub.add_parser("asymptotics", help="main terms and error summands as CSV")
    a.add_argument("--d", type=_d_list, required=True)
    a.add_argument("--n", type=_d_list, required=True, help="n values, list or range")
    a.add_argument("--b", type=int, choices=(1, 2), help="congruence family (default by parity)")
    a.add_argument("--digits", type=_positive, default=30)
    a.add_argument("--out", help="CSV path (default stdout)")

    v = sub.add_parser("verify", help="sign sweep of q - Q up to n_cap")
    v.add_argument("--d", type=_d_list, required=True)
    v.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DELTA_MINUS.value)
    v.add_argument("--n-cap", type=_positive, required=True)
    v.add_argument("--checkpoint-every", type=_positive, default=DEFAULT_CHECKPOINT_EVERY)
    v.add_argument("--checkpoint", help="checkpoint file to write (single d only)")
    v.add_argument("--resume", help="checkpoint file to resume from (single d only)")
    v.add_argument("--stop-after", type=_positive,
                   help="stop after this many checkpoints (for staged runs)")
    v.add_argument("--operator", action="store_true",
                   help=f"allow n_cap above {DESK_N_CAP} (long runs)")
    v.add_argument("--workers", type=_positive, help="parallel jobs across d")
    v.add_argument("--out", help="JSON report path (default stdout)")
    v.add_argument("--negatives-csv", help="CSV of negative indices")
    return p


def _write(path, text: str, started: float | None = None, argv=None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.write_text(text)
    if started is not None:
        meta = {
            "finished_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time_seconds": round(time.perf_counter() - started, 3),
            "argv": list(argv or []),
            "version": __version__,
        }
        path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _cmd_count(args, cfg: Config, argv, started) -> int:
    family = FamilyConfig(args.d, args.a, args.minus, Kind(args.kind))
    series = count_series(family, args.n_max, cfg.memory_budget_bytes)
    _write(args.out, csv_text(series), started, argv)
    if args.cache:
        save(series, args.cache)
    return EXIT_OK


def _cmd_bounds(args, cfg: Config, argv, started) -> int:
    for d in args.d:
        if not D_MIN <= d <= D_MAX:
            raise DomainError(f"--d: thresholds are defined for {D_MIN} <= d <= {D_MAX}, got {d}")
    reports = [compute_N(d, cfg.params_for(d)) for d in args.d]
    _write(args.out, reports_json(reports), started, argv)
    if args.csv:
        Path(args.csv).write_text(reports_csv(reports))
    return EXIT_OK


def _cmd_asymptotics(args, cfg: Config, argv, started) -> int:
    rows = []
    for d in args.d:
        if d < 4:
            raise DomainError(f"--d: the asymptotic formulas need d >= 4, got {d}")
        params = cfg.params_for(d)
        bundle = constant_bundle(d, params)
        for n in args.n:
            if n < 1:
                raise DomainError("--n: values must be >= 1")
            rows.append(evaluate(d, n, params, bundle, args.b))
    _write(args.out, envelope_csv(rows, args.digits), started, argv)
    return EXIT_OK


def _cmd_verify(args, cfg: Config, argv, started) -> int:
    if args.n_cap > DESK_N_CAP and not args.operator:
        raise DomainError(f"--n-cap: values above {DESK_N_CAP} need --operator")
    if (args.checkpoint or args.resume) and len(args.d) != 1:
        raise DomainError("--checkpoint/--resume take a single --d")
    jobs = [SweepJob(d, Mode(args.mode), args.n_cap, args.checkpoint_every, args.resume)
            for d in args.d]
    kwargs = {"memory_budget": cfg.memory_budget_bytes}
    if len(jobs) == 1:
        reports = [run_sweep(jobs[0], checkpoint_path=args.checkpoint,
                             stop_after=args.stop_after, **kwargs)]
    else:
        reports = run_sweeps(jobs, workers=args.workers or cfg.worker_count, **kwargs)
    payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n", started, argv)
    if args.negatives_csv:
        text = reports[0].negatives_csv()
        for r in reports[1:]:
            text += "".join(r.negatives_csv().splitlines(True)[1:])
        Path(args.negatives_csv).write_text(text)
    return EXIT_OK if all(r.matches_prediction() for r in reports) else EXIT_VIOLATION


COMMANDS = {
    "count": _cmd_count,
    "bounds": _cmd_bounds,
    "asymptotics": _cmd_asymptotics,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else Config()
        return COMMANDS[args.command](args, cfg, argv, started)
    except (ConfigError, DomainError) as exc:
        print(f"partineq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, CertificationFailure, CheckpointError, HypothesisViolation,
            MethodFailure, RootBracketError) as exc:
        print(f"partineq: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except PartineqError as exc:
        print(f"partineq: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
