"""Command-line entry point for background initialization.

Subcommands:
    estimate      SPMD background of a frame directory
    baseline-tmf  temporal median background of a frame directory
    evaluate      six quality metrics of an estimate against ground truth
    aggregate     CSV table (per category and overall means) from JSON reports
    bench         per-stage timing of the pipeline
    synth         render a synthetic scene to a frame directory
"""
import argparse
import logging
import re
import sys
from pathlib import Path
from typing import List, Optional

from config import Config, PipelineConfig
from errors import SPMDError
from background.baseline import run_tmf
from evaluation.metrics import ERROR_THRESHOLD, evaluate
from evaluation.reports import append_report_csv, read_report_json, write_aggregate_csv, write_report_json
from ingestion.frames import load_frame, load_sequence
from ingestion.synthetic import ObjectScript, SyntheticScene, generate_synthetic
from pipeline import run_spmd
from storage.images import save_png

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad command-line arguments (exit code 2)."""


def _existing(path: Path, kind: str = "path") -> Path:
    if not path.exists():
        raise UsageError(f"{kind} not found: {path}")
    return path


def _load_config(args) -> PipelineConfig:
    config_path = args.config or Config.SPMD_CONFIG
    config = PipelineConfig.load(_existing(Path(config_path), "config file")) if config_path else PipelineConfig()
    if getattr(args, "workers", None):
        config = config.model_copy(update={"workers": args.workers})
    return config


def bench_scene(width: int, height: int, frames: int) -> SyntheticScene:
    """Textured background with two checkered boxes crossing it."""
    size = max(4, min(width, height) // 5)
    return SyntheticScene(
        width=width,
        height=height,
        frames=frames,
        noise_sigma=2.0,
        objects=[
            ObjectScript(size=(size, size), color=(230, 230, 230), pattern="checker", cell=4,
                         start=(0, height // 4), velocity=(4, 0), motion="wrap"),
            ObjectScript(size=(size, size), color=(20, 20, 120), pattern="checker", alt_color=(200, 200, 40),
                         cell=4, start=(width // 2, 0), velocity=(0, 4), motion="wrap"),
        ],
    )


def cmd_estimate(args) -> int:
    config = _load_config(args)
    frames = load_sequence(_existing(args.in_dir, "input directory"))
    estimate, stats = run_spmd(frames, config, args.debug_dir)
    save_png(estimate.color, args.out)
    if args.stats:
        args.stats.parent.mkdir(parents=True, exist_ok=True)
        args.stats.write_text(stats.model_dump_json(indent=2))
    print(f"Background written to {args.out} ({stats.fps:.1f} fps, {stats.fallback_pixels} fallback pixels)")
    return 0


def cmd_baseline_tmf(args) -> int:
    frames = load_sequence(_existing(args.in_dir, "input directory"))
    save_png(run_tmf(frames), args.out)
    print(f"Temporal median background written to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    est = load_frame(_existing(args.estimate, "estimate image"))
    gt = load_frame(_existing(args.ground_truth, "ground-truth image"))
    report = evaluate(gt, est, tau=args.tau, name=args.name, category=args.category)
    write_report_json(report, args.json)
    if args.csv:
        append_report_csv(report, args.csv)
    print(report.model_dump_json(indent=2))
    return 0


def cmd_aggregate(args) -> int:
    reports = [read_report_json(_existing(p, "report")) for p in args.reports]
    write_aggregate_csv(reports, args.csv)
    print(f"Aggregated {len(reports)} reports into {args.csv}")
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args)
    if args.synthetic:
        match = re.fullmatch(r"(\d+)x(\d+)", args.synthetic)
        if not match:
            raise UsageError(f"--synthetic expects WIDTHxHEIGHT, got {args.synthetic}")
        scene = bench_scene(int(match.group(1)), int(match.group(2)), args.frames)
        frames, _ = generate_synthetic(scene)
    elif args.in_dir:
        frames = load_sequence(_existing(args.in_dir, "input directory"))
    else:
        raise UsageError("bench needs an input directory or --synthetic WIDTHxHEIGHT")
    _, stats = run_spmd(frames, config)
    print(stats.summary())
    return 0


def cmd_synth(args) -> int:
    scene = SyntheticScene.from_yaml(_existing(args.scene, "scene spec"))
    frames, truth = generate_synthetic(scene, args.frames, args.seed)
    for t, frame in enumerate(frames):
        save_png(frame, args.out_dir / "input" / f"in{t + 1:06d}.png")
    save_png(truth, args.out_dir / "groundtruth" / "gt.png")
    print(f"Wrote {len(frames)} frames and ground truth to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Superpixel motion detection background initialization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="Estimate the background of a frame directory")
    p.add_argument("in_dir", type=Path, help="Directory of frames (or SBMnet sequence directory)")
    p.add_argument("--out", type=Path, required=True, help="Output PNG")
    p.add_argument("--config", help="Pipeline config file (key=value)")
    p.add_argument("--debug-dir", type=Path, help="Write masks, superpixel overlays and provenance here")
    p.add_argument("--stats", type=Path, help="Write run statistics as JSON")
    p.add_argument("--workers", type=int, help="Worker threads (overrides config)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("baseline-tmf", help="Temporal median background of a frame directory")
    p.add_argument("in_dir", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_baseline_tmf)

    p = sub.add_parser("evaluate", help="Score an estimate against ground truth")
    p.add_argument("estimate", type=Path)
    p.add_argument("ground_truth", type=Path)
    p.add_argument("--json", type=Path, required=True, help="Output JSON report")
    p.add_argument("--csv", type=Path, help="Append a row to this CSV")
    p.add_argument("--name", help="Sequence name stored in the report")
    p.add_argument("--category", help="Sequence category stored in the report")
    p.add_argument("--tau", type=int, default=ERROR_THRESHOLD, help=f"Error-pixel threshold (default: {ERROR_THRESHOLD})")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("aggregate", help="Combine JSON reports into a CSV with category means")
    p.add_argument("reports", type=Path, nargs="+")
    p.add_argument("--csv", type=Path, required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("bench", help="Print per-stage timing")
    p.add_argument("in_dir", type=Path, nargs="?")
    p.add_argument("--synthetic", help="Benchmark a rendered WIDTHxHEIGHT sequence instead")
    p.add_argument("--frames", type=int, default=200, help="Frames for --synthetic (default: 200)")
    p.add_argument("--config", help="Pipeline config file (key=value)")
    p.add_argument("--workers", type=int, help="Worker threads (overrides config)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="Render a synthetic scene (YAML) to frames and ground truth")
    p.add_argument("scene", type=Path)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--frames", type=int, help="Override the frame count")
    p.add_argument("--seed", type=int, help="Override the noise seed")
    p.set_defaults(func=cmd_synth)
    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    logging.basicConfig(
        level=getattr(logging, Config.LOG_LEVEL),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SPMDError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(cli_main())
