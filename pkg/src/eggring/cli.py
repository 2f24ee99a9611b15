"""Command line entry point: ``metrics sweep | certify | point``.

Exit codes: 0 success, 2 invalid configuration, 3 invariant violation,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .caratheodory import METRICS
from .errors import ConfigError, MetricsError, NotApplicableError
from .geometry import NORMAL, BasePoint, EggRingDomain, TangentVector2
from .kobayashi import DEFAULT_BUDGET

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("eggring")


def parse_direction(text: str) -> TangentVector2:
    parts = [s for s in text.replace(" ", "").split(",") if s]
    if len(parts) != 4:
        raise ConfigError(f"direction needs four numbers re,im,re,im, got {text!r}")
    try:
        zr, zi, wr, wi = (float(s) for s in parts)
    except ValueError:
        raise ConfigError(f"bad direction {text!r}") from None
    return TangentVector2(complex(zr, zi), complex(wr, wi))


def read_config_file(path: str) -> dict[str, str]:
    """Flat key=value file; keys mirror the long flag names."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metrics", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key=value file mirroring the flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="bounds over a log-spaced delta grid")
    sw.add_argument("--m", type=int, default=2)
    sw.add_argument("--delta-min", type=float, default=1e-5)
    sw.add_argument("--delta-max", type=float, default=1e-2)
    sw.add_argument("--steps", type=int, default=16)
    sw.add_argument("--metrics", default="all")
    sw.add_argument("--direction", action="append", help="re,im,re,im (repeatable)")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--out", help="output file (default stdout)")
    sw.add_argument("--plot", help="also write a log-log figure to this image path")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--budget", type=int, default=DEFAULT_BUDGET)

    ce = sub.add_parser("certify", help="certify the witness admissible function")
    ce.add_argument("--m", type=int, default=2)
    ce.add_argument("--delta", type=float, default=1e-2)
    ce.add_argument("--samples", type=int, default=10_000)
    ce.add_argument("--seed", type=int, default=0)

    pt = sub.add_parser("point", help="every bound at one delta")
    pt.add_argument("--m", type=int, default=2)
    pt.add_argument("--delta", type=float, default=1e-2)
    pt.add_argument("--direction", default="1,0,0,0")
    pt.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    return parser


def _parse(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        values = read_config_file(known.config)
        if "direction" in values:
            values["direction"] = [values["direction"]]
        # defaults on every subparser; explicit flags still win
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                dests = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in values.items() if k in dests})
    return parser.parse_args(argv)


def _cmd_sweep(args) -> int:
    from .sweep import SweepConfig, check_ordering, emit, fit_all, run_sweep

    metrics = METRICS if args.metrics == "all" else tuple(s.strip() for s in args.metrics.split(",") if s.strip())
    dirs = [parse_direction(d) for d in args.direction] if args.direction else [NORMAL]
    config = SweepConfig(
        m=args.m,
        delta_min=args.delta_min,
        delta_max=args.delta_max,
        steps=args.steps,
        metrics=metrics,
        directions=dirs,
        budget=args.budget,
        seed=args.seed,
    )
    records = run_sweep(config)
    fits = fit_all(records)
    text = emit(records, fits, args.format)
    try:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        if args.plot:
            from .plotting import plot_sweep

            plot_sweep(records, fits, args.plot, title=f"egg-ring domain, m={args.m}")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for f in fits:
        log.info("fit %s/%s slope %.4f target %.4f ok=%s", f.metric, f.kind, f.slope, f.theoretical_slope, f.within_tolerance)
    problems = check_ordering(records)
    if problems:
        for p in problems:
            print(f"invariant violation: {p}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_certify(args) -> int:
    from .psh import certify_admissible
    from .sibony import SibonyWitness, witness_candidate

    if args.samples < 1:
        raise ConfigError("samples must be positive")
    witness = SibonyWitness(args.delta, args.m)
    cert = certify_admissible(witness_candidate(witness), EggRingDomain(args.m), args.samples, args.seed)
    print(cert.summary())
    return EXIT_OK if cert.passed else EXIT_INVARIANT


def _cmd_point(args) -> int:
    from .sweep import SweepConfig, _records_at, check_ordering

    d = parse_direction(args.direction)
    if d.is_zero():
        raise ConfigError("direction must be nonzero")
    BasePoint(args.delta)
    config = SweepConfig(m=args.m, delta_min=1e-6, delta_max=0.2, steps=4, directions=[d], budget=args.budget)
    records = _records_at(args.delta, config)
    print(f"m = {args.m}   delta = {args.delta:g}   p = {0.5 + args.delta:g}   direction = ({d.xi_z:g}, {d.xi_w:g})")
    print(f"{'metric':<14}{'kind':<8}{'value':>18}  method")
    for r in records:
        print(f"{r.metric:<14}{r.kind:<8}{r.value:>18.10g}  {r.method}")
    problems = check_ordering(records)
    for p in problems:
        print(f"invariant violation: {p}", file=sys.stderr)
    return EXIT_INVARIANT if problems else EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handlers = {"sweep": _cmd_sweep, "certify": _cmd_certify, "point": _cmd_point}
    try:
        return handlers[args.command](args)
    except (ConfigError, NotApplicableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MetricsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
