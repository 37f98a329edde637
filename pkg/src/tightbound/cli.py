"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 oracle
violation, 4 I/O error. Diagnostics go to stderr prefixed with ``error:``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bounds, channel, estimation, formats, oracle

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VIOLATION, EXIT_IO = 0, 1, 2, 3, 4

FORMATS_HELP = """\
file formats:
  confusion CSV   n rows x n columns of decimal probabilities p(x, xhat);
                  row = true signal, column = MAP decode; no header unless
                  --header is given. Must sum to 1 and have each diagonal
                  entry be its column's maximum.
  channel JSON    {"p_hat": [...], "fibers": [{"xhat": i, "columns":
                  [{"support": [indices], "weight": w}]}]}
  samples         CSV with header "x,y", or JSONL lines {"x": ..., "y": ...}
  stress report   JSON {"trials", "min_slack", "violations", "master_seed"}
  figure table    CSV with header n,h_post,bound_ours,bound_kov

Signal indices are 0-based in JSON and CSV output and 1-based in
human-readable tables. Floats in JSON carry 12 significant digits.
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _n_list(text: str) -> list[int]:
    """``2,3,5`` or ``2..30`` or a mix such as ``2..5,8``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n list {text!r}") from None
    if not out or min(out) < 2:
        raise argparse.ArgumentTypeError("n values must be integers >= 2")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="tightbound",
        description="Confusion-matrix bounds on equivocation and mutual information.",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def confusion_args(sp):
        sp.add_argument("--confusion", required=True, metavar="FILE", help="confusion-matrix CSV")
        sp.add_argument("--header", action="store_true", help="skip one header row")

    sp = sub.add_parser("validate", help="check a confusion matrix")
    confusion_args(sp)

    sp = sub.add_parser("bound", help="report entropies and bounds")
    confusion_args(sp)
    sp.add_argument("--json", action="store_true", help="emit JSON instead of a table")

    sp = sub.add_parser("construct", help="build a channel achieving the bound")
    confusion_args(sp)
    sp.add_argument("--out", required=True, metavar="FILE", help="channel JSON destination")

    sp = sub.add_parser("oracle-check", help="random-channel soundness stress test")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--nx", type=int, default=5, help="max signal alphabet size (default 5)")
    sp.add_argument("--ny", type=int, default=40, help="max output alphabet size (default 40)")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", metavar="FILE", help="also write the report here")

    sp = sub.add_parser("example", help="bounds for the example confusion-matrix family")
    sp.add_argument("--n-list", type=_n_list, required=True, help="e.g. 2,3,4 or 2..30")
    sp.add_argument("--out", required=True, metavar="FILE")

    sp = sub.add_parser("estimate", help="mutual-information sandwich from samples")
    sp.add_argument("--samples", required=True, metavar="FILE")
    sp.add_argument("--dump-confusion", metavar="FILE")
    return p


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _table(rep: bounds.BoundReport, cm: bounds.ConfusionMatrix) -> str:
    prof = bounds.decode_profile(cm)
    lines = [f"{'decode':>7}  {'p(xhat)':>14}  {'eps_xhat':>14}  {'phi*(eps)':>14}"]
    for xh in range(cm.n):
        if prof.empty[xh]:
            lines.append(f"{xh + 1:>7}  {0.0:>14.12g}  {'-':>14}  {'-':>14}")
        else:
            e = prof.eps[xh]
            lines.append(f"{xh + 1:>7}  {prof.p_hat[xh]:>14.12g}  {e:>14.12g}  {bounds.phi_star(e):>14.12g}")
    lines.append("")
    for key, value in rep.as_dict().items():
        lines.append(f"{key:<18} {value:.12g}")
    return "\n".join(lines) + "\n"


def _cmd_validate(args) -> int:
    try:
        cm = formats.read_confusion_csv(args.confusion, header=args.header)
    except bounds.ConfusionMatrixError as exc:
        print("invalid")
        for v in exc.violations:
            print(f"  {v.kind}: {v.message}")
        return EXIT_INVALID
    prof = bounds.decode_profile(cm)
    print(f"valid: n={cm.n}")
    for xh in range(cm.n):
        e = "-" if prof.empty[xh] else f"{prof.eps[xh]:.12g}"
        print(f"  decode {xh + 1}: p={prof.p_hat[xh]:.12g} eps={e}")
    return EXIT_OK


def _cmd_bound(args) -> int:
    cm = formats.read_confusion_csv(args.confusion, header=args.header)
    rep = bounds.bound_report(cm)
    sys.stdout.write(formats.dumps(rep.as_dict()) if args.json else _table(rep, cm))
    return EXIT_OK


def _cmd_construct(args) -> int:
    cm = formats.read_confusion_csv(args.confusion, header=args.header)
    ch = channel.build_achieving_channel(cm)
    achieved = ch.equivocation()
    bound = bounds.equivocation_bound(cm)
    formats.atomic_write(args.out, formats.dumps(ch.to_dict()))
    print(f"achieved equivocation  {achieved:.12g}")
    print(f"equivocation bound     {bound:.12g}")
    print(f"|achieved - bound|     {abs(achieved - bound):.3g}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    if args.trials < 1 or args.nx < 1 or args.ny < 1:
        raise UsageError("--trials, --nx and --ny must be positive")
    rep = oracle.bound_stress_test(
        args.trials, args.nx, args.ny, seed=args.seed, workers=args.workers, raise_on_violation=False
    )
    text = formats.dumps(rep.to_dict())
    if args.out:
        formats.atomic_write(args.out, text)
    sys.stdout.write(text)
    if rep.violations:
        _err(f"{len(rep.violations)} bound violation(s); first seed {rep.violations[0]['seed']}")
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_example(args) -> int:
    rows = oracle.figure2b_table(args.n_list)
    formats.atomic_write(args.out, oracle.rows_to_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    batch = estimation.read_samples(args.samples)
    rep = estimation.estimate(batch)
    if args.dump_confusion:
        cm = estimation.empirical_confusion(batch)
        formats.atomic_write(args.dump_confusion, formats.confusion_to_csv(cm))
    sys.stdout.write(formats.dumps(rep.to_dict()))
    return EXIT_OK


COMMANDS = {
    "validate": _cmd_validate,
    "bound": _cmd_bound,
    "construct": _cmd_construct,
    "oracle-check": _cmd_oracle_check,
    "example": _cmd_example,
    "estimate": _cmd_estimate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _err(str(exc))
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    except bounds.ConfusionMatrixError as exc:
        _err(f"invalid confusion matrix: {exc}")
        return EXIT_INVALID
    except estimation.EstimationError as exc:
        _err(str(exc))
        return EXIT_INVALID
    except OSError as exc:
        _err(f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "))
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
