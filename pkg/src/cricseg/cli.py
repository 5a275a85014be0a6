"""Command-line front door.

Subcommands: segment, track, classify, eval, bench, scenarios. Exit
codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from cricseg import kernels
from cricseg.backend import (
    AnnotationError,
    AnnotationLoadError,
    MappingBackend,
    load_precomputed,
)
from cricseg.config import (
    ConfigError,
    PipelineConfig,
    build_pipeline_config,
    load_config_file,
)
from cricseg.frames import FrameSourceError, open_source, write_pgm
from cricseg.geometry import DELIVERY_WIRE, GeometryError, classify_clip_delivery
from cricseg.metrics import (
    ConfusionMatrix,
    PerfStats,
    metrics_report,
    report_to_csv,
    report_to_json,
    throughput,
)
from cricseg.scenario import (
    OTHER_VIEW,
    FRONT_VIEW,
    DeliverySpec,
    ScenarioError,
    ScenarioScript,
    bundled_scripts,
    frame_stream,
    load_script,
    resolve_script,
    script_from_lengths,
    synthetic_backend,
)
from cricseg.segmenter import SegmentationError, run_segmentation
from cricseg.tracker import (
    BallCandidate,
    TrackerConfig,
    build_trajectory,
    trajectory_from_obj,
    trajectory_to_obj,
)

_JSON = {"sort_keys": True, "separators": (",", ":")}


class _Parser(argparse.ArgumentParser):
    # Flag misuse is a configuration error: exit 1, not argparse's 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key-value config file; flags override it")
    p.add_argument("--source", help="frame directory or raw-luma file")
    p.add_argument("--scenario", help="bundled scenario name or script path")
    p.add_argument("--backend", help="'synthetic' or 'file:<annotations.jsonl>'")
    p.add_argument("--gate", dest="gate_strategy", help="classifier|umpire|pitch|either|dual")
    p.add_argument("--fps", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cricseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a stream into delivery clips")
    _add_common(p)
    p.add_argument("--out", required=True, help="clip manifest (JSON Lines)")
    p.add_argument("--export-frames", help="directory for per-clip frame dumps")

    p = sub.add_parser("track", help="build ball trajectories for manifest clips")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="directory for trajectory JSON files")

    p = sub.add_parser("classify", help="classify tracked deliveries by length")
    _add_common(p)
    p.add_argument("--trajectories", required=True, help="directory of trajectory files")
    p.add_argument("--out", required=True, help="delivery report (JSON Lines)")

    p = sub.add_parser("eval", help="recall/precision from predictions or counts")
    p.add_argument("--counts", help="JSON file with tp/fp/fn/tn")
    p.add_argument("--predictions", help="one 0/1 per line")
    p.add_argument("--labels", help="one 0/1 per line")
    p.add_argument("--out", help="report path stem (.json and .csv written)")

    p = sub.add_parser("bench", help="throughput of the segment pipeline")
    _add_common(p)
    p.add_argument("--frames", type=int, default=3000)
    p.add_argument("--impl", choices=("native", "fallback", "both", "auto"), default="auto")
    p.add_argument("--out", help="benchmark report JSON")

    sub.add_parser("scenarios", help="list bundled synthetic scenarios")
    return parser


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    values = load_config_file(args.config) if args.config else {}
    override = {
        "source.path": args.source,
        "source.scenario": args.scenario,
        "backend.kind": args.backend,
        "gate.strategy": args.gate_strategy,
        "source.fps": args.fps,
        "source.width": args.width,
        "source.height": args.height,
        "run.threads": args.threads,
    }
    for key, value in override.items():
        if value is not None:
            values[key] = str(value)
    cfg = build_pipeline_config(values)
    cfg.validate()
    return cfg


def _open_stream_and_backend(cfg: PipelineConfig):
    if cfg.backend == "synthetic":
        script = resolve_script(cfg.scenario)
        return frame_stream(script), synthetic_backend(script), script.fps, script.width
    backend = load_precomputed(
        cfg.backend[len("file:") :],
        crop=cfg.crop,
        frame_size=(cfg.width, cfg.height) if cfg.width and cfg.height else None,
    )
    path = Path(cfg.source)
    if path.is_file():
        with open(path, "rb") as fh:
            # Raw streams are small enough to buffer for the manifest run.
            import io

            data = io.BytesIO(fh.read())
        stream = open_source(data, cfg.fps, cfg.width, cfg.height)
    else:
        stream = open_source(path, cfg.fps)
    return stream, backend, cfg.fps, cfg.width or 1280


def cmd_segment(args: argparse.Namespace) -> int:
    cfg = _pipeline_config(args)
    stream, backend, fps, _ = _open_stream_and_backend(cfg)
    export_dir = Path(args.export_frames) if args.export_frames else None
    frames_by_index = {}
    frame_iter = stream
    if export_dir is not None:
        export_dir.mkdir(parents=True, exist_ok=True)

        def tee():
            for f in stream:
                frames_by_index[f.index] = f
                yield f

        frame_iter = tee()
    run = run_segmentation(
        frame_iter,
        backend,
        fps,
        gate_cfg=cfg.gate,
        boundary_cfg=cfg.boundary,
        replay_cfg=cfg.replay,
        strategy=cfg.strategy,
        threads=cfg.threads,
        kernel_impl=cfg.kernel_impl,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for clip in run.clips:
            fh.write(
                json.dumps(
                    {
                        "start": clip.start,
                        "end": clip.end,
                        "liveness": clip.liveness,
                        "evidence": clip.evidence,
                    },
                    **_JSON,
                )
                + "\n"
            )
    if export_dir is not None:
        for n, clip in enumerate(run.clips, start=1):
            clip_dir = export_dir / f"clip_{n:04d}"
            clip_dir.mkdir(exist_ok=True)
            for idx in range(clip.start, clip.end + 1):
                write_pgm(frames_by_index[idx].luma, clip_dir / f"{idx:06d}.pgm")
    print(
        f"segment: {run.frames_processed} frames -> {len(run.clips)} clips "
        f"({run.wall_ms / max(run.frames_processed, 1):.2f} ms/frame)"
    )
    return 0


def _read_manifest(path: str | Path) -> list[dict]:
    clips = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                clips.append(json.loads(line))
    return clips


def _tracker_config(cfg: PipelineConfig, width: int, raw_max_jump_set: bool) -> TrackerConfig:
    if raw_max_jump_set:
        return cfg.tracker
    return TrackerConfig.for_frame_width(width, cfg.tracker.max_gap_frames)


def cmd_track(args: argparse.Namespace) -> int:
    cfg = _pipeline_config(args)
    _, backend, _, width = _open_stream_and_backend(cfg)
    values = load_config_file(args.config) if args.config else {}
    tracker_cfg = _tracker_config(cfg, width, "tracker.max_jump_px" in values)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    clips = _read_manifest(args.manifest)
    for n, clip in enumerate(clips, start=1):
        per_frame = []
        for idx in range(int(clip["start"]), int(clip["end"]) + 1):
            try:
                ann = backend.by_index(idx)
            except AnnotationError:
                per_frame.append((idx, []))
                continue
            candidates = [
                BallCandidate(idx, det.center(), det.confidence)
                for det in ann.with_label("ball")
            ]
            per_frame.append((idx, candidates))
        trajectory = build_trajectory(per_frame, tracker_cfg)
        obj = trajectory_to_obj(trajectory)
        obj["clip"] = f"clip_{n:04d}"
        with open(out_dir / f"clip_{n:04d}.json", "w", encoding="utf-8") as fh:
            fh.write(json.dumps(obj, **_JSON) + "\n")
    print(f"track: {len(clips)} clips -> {out_dir}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    cfg = _pipeline_config(args)
    _, backend, _, _ = _open_stream_and_backend(cfg)
    traj_dir = Path(args.trajectories)
    paths = sorted(traj_dir.glob("clip_*.json"))
    if not paths:
        raise FrameSourceError(f"no trajectory files in {traj_dir}")
    rows = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        clip_id = obj.get("clip", path.stem)
        trajectory = trajectory_from_obj(obj)
        if not trajectory.points or trajectory.bounce_index is None:
            rows.append({"clip": clip_id, "error": "no trajectory"})
            continue
        release_frame = trajectory.points[0].frame
        bounce_frame = trajectory.points[trajectory.bounce_index].frame
        try:
            result = classify_clip_delivery(
                trajectory,
                backend.by_index(release_frame),
                backend.by_index(bounce_frame),
                cfg.pitch,
            )
        except (GeometryError, AnnotationError) as exc:
            rows.append({"clip": clip_id, "error": str(exc)})
            continue
        rows.append(
            {
                "clip": clip_id,
                "bounce_frame": result.bounce_frame,
                "distance_m": round(result.distance_m, 4),
                "type": DELIVERY_WIRE[result.delivery_type],
                "zoom": round(result.zoom, 4),
            }
        )
    with open(args.out, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, **_JSON) + "\n")
    print(f"classify: {len(rows)} rows -> {args.out}")
    return 0


def _read_bool_lines(path: str) -> list[bool]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip().lower()
            if not token:
                continue
            if token in ("1", "true", "t", "front"):
                out.append(True)
            elif token in ("0", "false", "f", "not_front"):
                out.append(False)
            else:
                raise ValueError(f"{path}:{lineno}: not a boolean: {token!r}")
    if not out:
        raise ValueError(f"{path}: no prediction values")
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    if args.counts:
        with open(args.counts, "r", encoding="utf-8") as fh:
            counts = json.load(fh)
        cm = ConfusionMatrix(
            tp=int(counts["tp"]), fp=int(counts["fp"]),
            fn=int(counts["fn"]), tn=int(counts["tn"]),
        )
    elif args.predictions and args.labels:
        from cricseg.metrics import confusion

        cm = confusion(_read_bool_lines(args.predictions), _read_bool_lines(args.labels))
    else:
        raise ConfigError("eval needs --counts or both --predictions and --labels")
    report = metrics_report(cm)
    if args.out:
        Path(args.out + ".json").write_text(report_to_json(report), encoding="utf-8")
        Path(args.out + ".csv").write_text(report_to_csv(report), encoding="utf-8")
    fmt = lambda v: "undefined" if v is None else f"{v:.2f}%"
    print(
        f"eval: recall={fmt(report['recall_pct'])} precision={fmt(report['precision_pct'])} "
        f"(n={report['n']})"
    )
    return 0


def bench_script(n_frames: int, width: int, height: int) -> ScenarioScript:
    """A repeating match-like timeline with the requested frame count."""
    spec: list[tuple] = []
    total = 0
    while total < n_frames:
        for kind, length, extra in (
            (OTHER_VIEW, 90, {}),
            (FRONT_VIEW, 60, {"delivery": DeliverySpec(bounce_distance_m=7.0)}),
            (FRONT_VIEW, 50, {"scorecard": False}),
        ):
            length = min(length, n_frames - total)
            if length <= 0:
                break
            delivery = extra.get("delivery")
            if delivery is not None:
                arc_len = delivery.release_offset + delivery.descent_frames + delivery.ascent_frames + 1
                if length < arc_len:
                    extra = {k: v for k, v in extra.items() if k != "delivery"}
            spec.append((kind, length, extra))
            total += length
    return script_from_lengths(spec, width=width, height=height)


def _bench_pipeline(script: ScenarioScript, impl: str | None) -> PerfStats:
    backend = synthetic_backend(script)
    run = run_segmentation(
        frame_stream(script), backend, script.fps, kernel_impl=impl
    )
    return throughput(run.frames_processed, run.wall_ms)


def _bench_kernels(width: int, height: int, reps: int = 200) -> dict:
    rng = np.random.default_rng(7)
    frame = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    out = {}
    for name in kernels.available_impls():
        impl = kernels.get_impl(name)
        mean = frame.astype(np.float32)
        mask = np.zeros(frame.shape, dtype=np.bool_)
        impl.bg_update(mean, frame, 0.05, 25.0, mask, True)  # warm-up
        start = time.perf_counter()
        for _ in range(reps):
            impl.bg_update(mean, frame, 0.05, 25.0, mask, True)
        wall_ms = (time.perf_counter() - start) * 1000.0
        out[name] = {"bg_update_ms_per_frame": wall_ms / reps}
    return out


def cmd_bench(args: argparse.Namespace) -> int:
    width = args.width or 640
    height = args.height or 360
    if args.scenario:
        script = resolve_script(args.scenario)
        width, height = script.width, script.height
    else:
        script = bench_script(args.frames, width, height)
    impls: tuple[str | None, ...]
    if args.impl == "both":
        impls = kernels.available_impls()
    elif args.impl == "auto":
        impls = (kernels.ACTIVE_IMPL,)
    else:
        impls = (args.impl,)
    report: dict = {
        "frames": script.n_frames,
        "frame_size": [width, height],
        "machine": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "cpu": platform.processor() or platform.machine(),
        },
        "pipeline": {},
        "kernels": _bench_kernels(width, height),
    }
    for impl in impls:
        stats = _bench_pipeline(script, impl)
        report["pipeline"][impl] = {
            "frames_processed": stats.frames_processed,
            "wall_ms": round(stats.wall_ms, 3),
            "ms_per_frame": round(stats.ms_per_frame, 4),
            "fps": round(stats.fps, 1),
        }
        print(f"bench[{impl}]: {stats.fps:.0f} fps, {stats.ms_per_frame:.3f} ms/frame")
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def cmd_scenarios(_: argparse.Namespace) -> int:
    for name, path in bundled_scripts().items():
        script = load_script(path)
        deliveries = sum(1 for s in script.segments if s.delivery is not None)
        print(
            f"{name}: {script.n_frames} frames, {script.width}x{script.height} "
            f"@{script.fps:g}fps, {len(script.segments)} segments, {deliveries} deliveries"
        )
    return 0


_COMMANDS = {
    "segment": cmd_segment,
    "track": cmd_track,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "scenarios": cmd_scenarios,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (
        SegmentationError,
        AnnotationError,
        AnnotationLoadError,
        FrameSourceError,
        ScenarioError,
        GeometryError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
