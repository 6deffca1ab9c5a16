"""Command-line entry point: ``stbc-forge <command> ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import codec
from .constructions import FAMILIES, generate, pair_rows
from .design import check_cod_characterization, classify, is_orthogonal, orthogonality_violations
from .indexing import weight
from .metrics import DesignMetrics, get_constellation, zero_fraction_counted, zero_fraction_formula
from .simulator import Constraint, SimConfig, parse_snr_range, run


class UsageError(Exception):
    """Bad user input detected after argument parsing (exit status 2)."""


def _emit(data: bytes | str, out: Optional[str]) -> None:
    if isinstance(data, str):
        data = data.encode()
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _design_from_args(args):
    if getattr(args, "design", None):
        try:
            return codec.import_design(Path(args.design).read_bytes())
        except OSError as exc:
            raise UsageError(f"cannot read {args.design}: {exc}") from None
    if not args.family or args.antennas is None:
        raise UsageError("give either --design PATH or --family with --antennas")
    return generate(args.family, args.antennas, args.l)


def cmd_generate(args) -> int:
    design = generate(args.family, args.antennas, args.l)
    _emit(codec.export(design, args.format), args.out)
    return 0


def cmd_verify(args) -> int:
    try:
        data = Path(args.inp).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.inp}: {exc}") from None
    design = codec.import_design(data, args.format)
    ok = is_orthogonal(design)
    kind = classify(design)
    print(f"size [{design.p},{design.n},{design.k}] rate {design.rate}")
    print(f"classification {kind.value}")
    print(f"gram {'identity' if ok else 'NOT identity'}")
    if ok:
        return 0
    cells = orthogonality_violations(design)
    print("gram violations at " + ", ".join(f"({u},{v})" for u, v in cells), file=sys.stderr)
    if design.is_atomic():
        res = check_cod_characterization(design)
        if not res.ok:
            print(f"condition {res.condition} fails: {res.message}", file=sys.stderr)
            if res.witness:
                print("witness (row, row, col, col) = " + str(tuple(res.witness)), file=sys.stderr)
    return 1


def cmd_metrics(args) -> int:
    design = _design_from_args(args)
    c = get_constellation(args.constellation)
    m = DesignMetrics.of(design, c)
    print(f"size,[{design.p},{design.n},{design.k}]")
    print(f"rate,{m.rate}")
    print(f"delay,{m.delay}")
    print(f"zero_fraction,{m.zero_fraction},{float(m.zero_fraction):.4f}")
    print("papr_" + c.name + "," + ",".join(f"{float(x):.6g}" for x in m.per_antenna_papr))
    print("duplicate_counts," + ",".join(str(x) for x in m.duplicate_counts))
    return 0


def cmd_table1(args) -> int:
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= --n-min <= --n-max")
    lines = ["n,w_l,fraction_counted,fraction_formula,match"]
    for n in range(args.n_min, args.n_max + 1):
        for w in range(1, n + 1):
            masks = [l for l in range(1, 1 << n) if weight(l) == w] if args.all_l else [(1 << w) - 1]
            counted = {zero_fraction_counted(pair_rows(n, l)[0]) for l in masks}
            formula = {zero_fraction_formula(n, l) for l in masks}
            c = next(iter(counted))
            f = next(iter(formula))
            match = len(counted) == 1 and counted == formula
            lines.append(f"{n},{w},{float(c):.4f},{float(f):.4f},{str(match).lower()}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args) -> int:
    design = _design_from_args(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cfg = SimConfig(
        design=design,
        constellation=get_constellation(args.constellation),
        snr_grid_db=parse_snr_range(args.snr),
        constraint=Constraint.parse(args.constraint),
        trials=args.trials,
        seed=args.seed,
        n_rx=args.n_rx,
        workers=args.workers,
    )
    _emit(run(cfg).to_csv(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stbc-forge", description="Build, verify and analyze orthogonal space-time designs.")
    sub = p.add_subparsers(dest="command", required=True)

    def family_args(sp, required: bool):
        sp.add_argument("--family", choices=FAMILIES, required=required)
        sp.add_argument("--antennas", type=int, required=required, help="number of transmit antennas")
        sp.add_argument("--l", type=int, default=1, help="row-pairing mask for paired/cis families")

    g = sub.add_parser("generate", help="emit a design")
    family_args(g, True)
    g.add_argument("--format", choices=codec.FORMATS, default="json")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check the orthogonality identity of a design file")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--format", choices=codec.FORMATS, default=None, help="input format (guessed when omitted)")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("metrics", help="rate, zero fraction, PAPR and duplicate counts")
    family_args(m, False)
    m.add_argument("--design", help="design file instead of a family")
    m.add_argument("--constellation", choices=("qpsk", "qam16"), default="qpsk")
    m.set_defaults(func=cmd_metrics)

    t = sub.add_parser("table1", help="zero fraction of row-paired designs by mask weight, as CSV")
    t.add_argument("--n-min", type=int, default=4)
    t.add_argument("--n-max", type=int, default=7)
    t.add_argument("--all-l", action="store_true", help="check every mask of each weight, not one representative")
    t.add_argument("--out")
    t.set_defaults(func=cmd_table1)

    s = sub.add_parser("simulate", help="Monte Carlo symbol error rate, as CSV")
    family_args(s, False)
    s.add_argument("--design", help="design file instead of a family")
    s.add_argument("--constraint", choices=("peak", "avg"), required=True)
    s.add_argument("--snr", required=True, help="start:stop:step in dB, stop inclusive")
    s.add_argument("--trials", type=int, required=True, help="codewords per SNR point")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-rx", type=int, default=1)
    s.add_argument("--constellation", choices=("qpsk", "qam16"), default="qpsk")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"stbc-forge {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
