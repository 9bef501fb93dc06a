"""Command-line interface.

Subcommands:
  estimate    full-search MV fields of a raw YUV sequence -> CSV
  conceal     inject seeded MB losses and conceal the whole sequence
  experiment  run a multi-trial evaluation from a JSON/TOML spec
  psnr        per-frame and mean luma PSNR between two raw YUV files
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .core import Frame, MbStatusMap
from .engine import MODES, audit_csv_header, audit_csv_line, conceal_frame
from .experiment import blank_damaged, load_spec_file, run_experiment
from .loss import TrialConfig, apply_mask, make_mask
from .metrics import psnr
from .motion import SearchParams, estimate_field, save_mv_fields
from .yuv_io import YuvFrameRecord, open_sequence, read_frame, write_yuv_frame


def _add_geometry(p: argparse.ArgumentParser) -> None:
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)


def cmd_estimate(args) -> int:
    header = open_sequence(args.infile, args.width, args.height)
    params = SearchParams(p=args.p)
    prev = read_frame(header, 0).luma
    fields = []
    for t in range(1, header.frame_count):
        cur = read_frame(header, t).luma
        fields.append(estimate_field(cur, prev, params, frame_index=t))
        prev = cur
    save_mv_fields(fields, args.out)
    print(f"estimated {len(fields)} MV fields ({header.frame_count} frames) -> {args.out}")
    return 0


def cmd_conceal(args) -> int:
    header = open_sequence(args.infile, args.width, args.height)
    params = SearchParams(p=args.p)
    cols, rows = args.width // 16, args.height // 16
    cfg = TrialConfig(args.rate, args.seed, args.trial)

    records = [read_frame(header, t) for t in range(header.frame_count)]
    originals = [r.luma for r in records]
    fields = {
        t: estimate_field(originals[t], originals[t - 1], params, frame_index=t)
        for t in range(1, header.frame_count)
    }

    ref_frame = originals[0]
    ref_status = MbStatusMap.all_correct(cols, rows)
    psnrs = []
    with open(args.out_yuv, "wb") as sink, open(args.audit, "w", newline="") as audit:
        audit.write(audit_csv_header() + "\n")
        write_yuv_frame(records[0], sink)
        for t in range(1, header.frame_count):
            status = apply_mask(ref_status, make_mask(t, cols, rows, cfg))
            damaged = blank_damaged(originals[t], status)
            out = conceal_frame(
                damaged, ref_frame, ref_status, status, fields[t], fields.get(t - 1), args.mode
            )
            for rec in out.audit:
                audit.write(audit_csv_line(t, rec) + "\n")
            write_yuv_frame(
                YuvFrameRecord(out.frame, records[t].chroma_u, records[t].chroma_v), sink
            )
            value = psnr(out.frame, originals[t])
            psnrs.append(value)
            print(f"frame {t}: {len(out.audit)} MBs concealed, psnr {value:.4f} dB")
            ref_frame, ref_status = out.frame, out.status
    if psnrs:
        print(f"mean psnr over {len(psnrs)} concealed frames: {float(np.mean(psnrs)):.4f} dB")
    return 0


def cmd_experiment(args) -> int:
    spec = load_spec_file(args.spec)
    report = run_experiment(spec, args.out_dir)
    for row in report.rows:
        print(
            f"{row.sequence} {row.mode} rate={row.rate:g}: "
            f"{row.mean_psnr_db:.4f} dB, {row.mean_time_per_mb_ms:.4f} ms/MB "
            f"({row.trials} trials)"
        )
    print(f"report written to {args.out_dir}/report.csv")
    return 0


def cmd_psnr(args) -> int:
    ha = open_sequence(args.a, args.width, args.height)
    hb = open_sequence(args.b, args.width, args.height)
    if ha.frame_count != hb.frame_count:
        print(f"frame count mismatch: {ha.frame_count} vs {hb.frame_count}", file=sys.stderr)
        return 1
    values = []
    for t in range(ha.frame_count):
        v = psnr(read_frame(ha, t).luma, read_frame(hb, t).luma)
        values.append(v)
        print(f"frame {t}: {v:.4f} dB")
    print(f"mean: {float(np.mean(values)):.4f} dB")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vidconceal",
        description="temporal error concealment toolkit for raw I420 video",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="write full-search MV fields as CSV")
    p.add_argument("--in", dest="infile", required=True, help="raw I420 input")
    _add_geometry(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--p", type=int, default=7, help="search radius (default 7)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("conceal", help="inject losses and conceal a sequence")
    p.add_argument("--in", dest="infile", required=True, help="raw I420 input")
    _add_geometry(p)
    p.add_argument("--rate", type=float, required=True, help="MB loss rate in [0,1]")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--out-yuv", required=True, help="concealed I420 output")
    p.add_argument("--audit", required=True, help="audit CSV output")
    p.add_argument("--trial", type=int, default=0, help="trial index for the loss PRNG")
    p.add_argument("--p", type=int, default=7, help="search radius (default 7)")
    p.set_defaults(func=cmd_conceal)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--spec", required=True, help="JSON (or TOML on 3.11+) config")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("psnr", help="luma PSNR between two raw I420 files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_geometry(p)
    p.set_defaults(func=cmd_psnr)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
