"""Command line entry point: ``sftpair {sweep,table,encode,warp,analyze}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .dft import (center_spectrum, dft_forward, display_magnitude, magnitude,
                  normalize_minmax, read_image_csv, write_image_csv, write_pgm,
                  write_spectrum_csv)
from .estimation import detect_peaks, estimate_affine, write_detections_csv
from .geometry import transform_from_json, warp_image
from .pattern import PatternSpec, base_pattern_spec, encode_peaks


def _read_text(arg: str) -> str:
    p = Path(arg)
    return p.read_text() if p.exists() else arg


def _sweep_configs(args) -> list[harness.SweepConfig]:
    if args.config:
        data = json.loads(_read_text(args.config))
        items = data if isinstance(data, list) else [data]
        configs = [harness.SweepConfig.from_dict(d) for d in items]
    else:
        kinds = harness.FIGURE_KINDS if args.kind == "figures" else \
            harness.KINDS if args.kind == "all" else [args.kind]
        configs = [harness.SweepConfig.default(k) for k in kinds]
    if args.interpolation:
        configs = [harness.with_interpolation(c, args.interpolation) for c in configs]
    return configs


def cmd_sweep(args) -> int:
    out = Path(args.out)
    results, status = {}, 0
    for cfg in _sweep_configs(args):
        records = harness.run_sweep(cfg)
        results[cfg.transform_kind] = records
        degraded = sum(r.degraded for r in records)
        msg = f"{cfg.transform_kind}: {len(records)} samples"
        if degraded:
            msg += f", {degraded} degraded"
        if args.diff_golden:
            chk = harness.check_sweep(cfg, records)
            msg += f" | {'PASS' if chk.passed else 'FAIL'} {chk.detail}"
            status |= 0 if chk.passed else 1
        print(msg)
        if args.dump_images:
            harness.dump_images(cfg, out / "images" / harness.FILE_NAMES[cfg.transform_kind])
    for p in harness.export_figures(results, out):
        print(f"wrote {p}")
    return status


def cmd_table(args) -> int:
    status = 0
    ids = ["2", "3", "4"] if args.table == "all" else [args.table]
    for tid in ids:
        rows = harness.reproduce_table(tid, args.interpolation or "bilinear")
        print(harness.render_table(tid, rows))
        print()
        if args.diff_golden and not all(r.captured_ok and r.calculated_ok for r in rows):
            status = 1
    return status


def cmd_encode(args) -> int:
    spec = PatternSpec.from_json(_read_text(args.config)) if args.config else base_pattern_spec()
    img = encode_peaks(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_image_csv(out / "pattern.csv", img)
    write_pgm(out / "pattern.pgm", normalize_minmax(img))
    write_pgm(out / "pattern_magnitude.pgm", display_magnitude(dft_forward(img)))
    (out / "pattern.json").write_text(spec.to_json() + "\n")
    print(f"wrote {out / 'pattern.csv'} (fill value {img.fill_value:.6g})")
    return 0


def _load_image(path):
    if path:
        return read_image_csv(path)
    return encode_peaks(base_pattern_spec())


def cmd_warp(args) -> int:
    img = _load_image(args.input)
    t = transform_from_json(_read_text(args.transform))
    if args.fill is not None:
        img = type(img)(img.samples, args.fill)
    warped = warp_image(img, t, args.interpolation or "bilinear")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_image_csv(out / "warped.csv", warped)
    write_pgm(out / "warped.pgm", normalize_minmax(warped))
    print(f"wrote {out / 'warped.csv'}")
    return 0


def cmd_analyze(args) -> int:
    img = _load_image(args.input)
    spectrum = center_spectrum(dft_forward(img))
    mag = magnitude(spectrum)
    dets = detect_peaks(mag, k=args.k)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_spectrum_csv(out / "spectrum.csv", spectrum)
    write_detections_csv(out / "detections.csv", dets)
    write_pgm(out / "magnitude.pgm", display_magnitude(spectrum))
    for d in dets:
        print(f"({d.u:3d}, {d.v:3d})  ncc={d.ncc_score:.4f}  |F|={d.magnitude:.6g}")
    if args.reference and len(dets) >= 3:
        ref = json.loads(_read_text(args.reference))
        est = estimate_affine(ref, [(d.u, d.v) for d in harness.assign_peaks(ref, dets)])
        (out / "estimate.json").write_text(json.dumps(est.to_dict(), indent=2) + "\n")
        print(json.dumps(est.to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sftpair", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_help):
        p.add_argument("--config", help=config_help)
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--interpolation", choices=["bilinear", "sum"])

    p = sub.add_parser("sweep", help="run coefficient sweeps and export CSV")
    common(p, "sweep config JSON (file or literal); object or list of objects")
    p.add_argument("--kind", default="figures",
                   choices=["figures", "all", *harness.KINDS],
                   help="sweep to run without --config (default: the nine figure sweeps)")
    p.add_argument("--diff-golden", action="store_true",
                   help="check congruence, translation law and warp vertices")
    p.add_argument("--dump-images", action="store_true", help="write PGM images per sample")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table", help="reproduce a results table")
    p.add_argument("table", choices=["2", "3", "4", "all"])
    p.add_argument("--interpolation", choices=["bilinear", "sum"])
    p.add_argument("--diff-golden", action="store_true")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("encode", help="build a pattern from a PatternSpec")
    common(p, "PatternSpec JSON (file or literal)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("warp", help="apply a perspective transform to an image")
    common(p, argparse.SUPPRESS)
    p.add_argument("--input", help="image CSV (default: the four-peak pattern)")
    p.add_argument("--transform", required=True,
                   help="9 values, 3x3 list, or named coefficients, as JSON or a file")
    p.add_argument("--fill", type=float, help="fill value for uncovered pixels")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("analyze", help="spectrum, detections and estimate for an image")
    common(p, argparse.SUPPRESS)
    p.add_argument("--input", help="image CSV (default: the four-peak pattern)")
    p.add_argument("-k", type=int, default=4)
    p.add_argument("--reference", help="JSON list of reference (u, v) for estimation")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
