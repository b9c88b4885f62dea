"""Command-line front end.

Exit codes: 0 on success, 1 on a failed check, 2 on configuration or usage
errors, 3 when an enumeration budget is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .codebooks import (
    check_source_separability,
    check_tag_separability,
    gen_gold,
    gen_tag_codebook,
    pilot_table,
)
from .errors import BudgetExceededError, ConfigInvalidError, RadarTagError
from .framesim import check_assumptions
from .harness import SWEEP_AXES, load_config, rows_to_csv, rows_to_json, run_trials, sweep

__all__ = ["main"]


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _words_csv(words) -> str:
    return "\n".join(",".join(str(int(v)) for v in word) for word in words) + "\n"


def _parse_rates(spec: str) -> list[int]:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in spec.split(",") if tok]


def _cmd_codebook(args) -> int:
    if args.codebook_cmd == "gen-gold":
        book = gen_gold(args.degree)
        _write(_words_csv(book.words), args.out)
        return 0
    if args.codebook_cmd == "gen-tag":
        book = gen_tag_codebook(args.len)
        _write(_words_csv(book.words), args.out)
        return 0
    if args.codebook_cmd == "check":
        source = gen_gold(args.degree)
        tag = gen_tag_codebook(args.len)
        src_ok = check_source_separability(source, args.q)
        tag_ok = check_tag_separability(tag)
        print(f"source: {len(source)} words of length {source.n}, "
              f"pairwise rank 2(q+1) at q={args.q}: {'ok' if src_ok else 'FAIL'}")
        print(f"tag: {len(tag)} words of length {tag.l}, "
              f"zero-sum and pairwise rank 2: {'ok' if tag_ok else 'FAIL'}")
        return 0 if (src_ok and tag_ok) else 1
    if args.codebook_cmd == "psl-table":
        book = gen_gold(args.degree)
        rows = pilot_table(book, _parse_rates(args.rates))
        lines = ["rate,psl_db,islr_db"]
        lines += [f"{r.rate},{r.psl_db:.10g},{r.islr_db:.10g}" for r in rows]
        _write("\n".join(lines) + "\n", args.out)
        return 0
    raise ConfigInvalidError("missing codebook subcommand")


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    rows = run_trials(cfg, workers=args.workers)
    text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows, cfg)
    _write(text, args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    rows = sweep(cfg, args.axis, workers=args.workers)
    text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows, cfg)
    _write(text, args.out)
    return 0


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    report = check_assumptions(cfg.params)
    print(f"coherence: l * pri * nu_max = {report.coherence_product:.6g} "
          f"(threshold {report.coherence_threshold:g}) -> "
          f"{'ok' if report.coherence_ok else 'FAIL'}")
    print(f"  frame-constant channels need nu_max << "
          f"{report.nu_max_bound_hz / 1e3:.6g} kHz")
    print(f"timing: n_pri = {cfg.params.n_pri} must exceed n + q_max = "
          f"{report.n_pri_required} -> {'ok' if report.timing_ok else 'FAIL'}")
    return 0 if (report.coherence_ok and report.timing_ok) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radartag",
        description="Simulate and decode tag backscatter over coded radar pulses.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    codebook = sub.add_parser("codebook", help="generate and verify codebooks")
    cb_sub = codebook.add_subparsers(dest="codebook_cmd", required=True)
    gg = cb_sub.add_parser("gen-gold", help="emit the Gold source codebook as CSV")
    gg.add_argument("--degree", type=int, default=5)
    gg.add_argument("--out", default=None)
    gt = cb_sub.add_parser("gen-tag", help="emit the zero-sum tag codebook as CSV")
    gt.add_argument("--len", type=int, default=10)
    gt.add_argument("--out", default=None)
    ck = cb_sub.add_parser("check", help="run the identifiability rank checks")
    ck.add_argument("--q", type=int, required=True)
    ck.add_argument("--degree", type=int, default=5)
    ck.add_argument("--len", type=int, default=10)
    pt = cb_sub.add_parser("psl-table",
                           help="averaged worst-case PSL/ISLR vs source data rate")
    pt.add_argument("--rates", required=True, help="e.g. 0..9 or 0,4,9")
    pt.add_argument("--degree", type=int, default=5)
    pt.add_argument("--out", default=None)

    sim = sub.add_parser("simulate", help="run the SNR grid of a config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--out", default=None)
    sim.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", help="sweep one axis of a config")
    sw.add_argument("--config", required=True)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--out", default=None)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--workers", type=int, default=1)

    chk = sub.add_parser("check", help="report the frame-model assumption checks")
    chk.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.cmd == "codebook":
            return _cmd_codebook(args)
        if args.cmd == "simulate":
            return _cmd_simulate(args)
        if args.cmd == "sweep":
            return _cmd_sweep(args)
        if args.cmd == "check":
            return _cmd_check(args)
        raise ConfigInvalidError(f"unknown command {args.cmd!r}")
    except BudgetExceededError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except ConfigInvalidError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RadarTagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
