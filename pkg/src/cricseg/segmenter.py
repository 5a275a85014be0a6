"""Shot-boundary detection and the clip state machine.

A per-pixel running-average background model flags deviating pixels; a
frame whose foreground fraction exceeds the boundary threshold is a shot
change. Debounced gate events open clips, and the first boundary (or a
sustained gate close, whichever comes first) ends them. Each emitted clip
carries a live/replay verdict from the scorecard band check.
"""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from cricseg import kernels
from cricseg.backend import AnnotationError, Backend, FrameAnnotations
from cricseg.frames import Frame
from cricseg.gate import Debouncer, GateConfig, GateVerdict, apply_gate
from cricseg.replay import ReplayConfig, UNDETERMINED, classify_liveness


class SegmentationError(Exception):
    """Pipeline failure; names the stage and the frame where it happened."""

    def __init__(self, stage: str, frame_index: int, message: str) -> None:
        super().__init__(f"{stage} at frame {frame_index}: {message}")
        self.stage = stage
        self.frame_index = frame_index


@dataclass(frozen=True)
class BoundaryConfig:
    foreground_threshold: float = 0.6
    pixel_diff_threshold: float = 25.0
    learning_rate: float = 0.05
    init_frames: int = 30
    min_clip_frames: int = 25

    def __post_init__(self) -> None:
        if not 0.0 < self.foreground_threshold <= 1.0:
            raise ValueError("foreground_threshold must be in (0, 1]")
        if self.pixel_diff_threshold < 0:
            raise ValueError("pixel_diff_threshold must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.init_frames < 1:
            raise ValueError("init_frames must be >= 1")
        if self.min_clip_frames < 1:
            raise ValueError("min_clip_frames must be >= 1")


class BackgroundModel:
    """Per-pixel running average over the luma plane.

    The model is warm once it has seen ``init_frames`` frames; the
    foreground mask is all-false until then.
    """

    def __init__(self, cfg: BoundaryConfig, kernel_impl: str | None = None) -> None:
        self.cfg = cfg
        self._impl = kernels.get_impl(kernel_impl)
        self._mean: np.ndarray | None = None
        self._mask: np.ndarray | None = None
        self.seen = 0

    @property
    def warm(self) -> bool:
        return self.seen >= self.cfg.init_frames

    def reset(self) -> None:
        self._mean = None
        self.seen = 0

    def update(self, luma: np.ndarray) -> np.ndarray:
        """Fold one frame in; returns the foreground mask.

        The mask compares against the pre-update mean, so a hard cut
        lights up the whole mask before the model starts adapting to the
        new scene.
        """
        if self._mean is None:
            self._mean = luma.astype(np.float32)
            self._mask = np.zeros(luma.shape, dtype=np.bool_)
            self.seen = 1
            return self._mask
        if luma.shape != self._mean.shape:
            raise ValueError(
                f"frame dimensions {luma.shape} do not match model {self._mean.shape}"
            )
        compute = self.warm
        if not compute:
            self._mask.fill(False)
        self._impl.bg_update(
            self._mean,
            luma,
            self.cfg.learning_rate,
            self.cfg.pixel_diff_threshold,
            self._mask,
            compute,
        )
        self.seen += 1
        return self._mask


def update_background(model: BackgroundModel, frame: Frame) -> np.ndarray:
    return model.update(frame.luma)


def foreground_fraction(mask: np.ndarray) -> float:
    """Share of pixels flagged as foreground."""
    return float(np.count_nonzero(mask)) / mask.size


def detect_boundary(fraction: float, cfg: BoundaryConfig, warm: bool) -> bool:
    """Shot change iff the model is warm and the fraction strictly exceeds
    the threshold."""
    return warm and fraction > cfg.foreground_threshold


@dataclass(frozen=True)
class Clip:
    """A contiguous frame interval with gate evidence and a liveness verdict."""

    start: int
    end: int
    duration_ms: float
    liveness: str
    evidence: dict

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("clip start must not exceed its end")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass
class _OpenClip:
    start: int
    first_frame: Frame
    signal_counts: dict = field(default_factory=dict)
    counted_up_to: int = -1

    def count(self, index: int, verdict: GateVerdict, sign: int = 1) -> None:
        for signal in verdict.evidence:
            self.signal_counts[signal] = self.signal_counts.get(signal, 0) + sign
        if sign > 0:
            self.counted_up_to = index


def _annotated(
    frames: Iterable[Frame], backend: Backend, threads: int
) -> Iterator[tuple[Frame, FrameAnnotations]]:
    if threads <= 1:
        for frame in frames:
            yield frame, backend.annotate(frame)
        return
    # Backends may be called concurrently for distinct frames; map()
    # preserves input order so the state machine stays strictly
    # sequential.
    from concurrent.futures import ThreadPoolExecutor

    def work(frame: Frame) -> tuple[Frame, FrameAnnotations]:
        return frame, backend.annotate(frame)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(work, frames, chunksize=4)


def segment(
    frames: Iterable[Frame],
    backend: Backend,
    fps: float,
    gate_cfg: GateConfig | None = None,
    boundary_cfg: BoundaryConfig | None = None,
    replay_cfg: ReplayConfig | None = None,
    strategy: str = "dual",
    threads: int = 1,
    kernel_impl: str | None = None,
    on_frame: Callable[[int], None] | None = None,
) -> Iterator[Clip]:
    """Run the full gate + boundary state machine over a frame stream.

    Clips open at the start of a debounced front run (or right at a
    boundary when the gate is already open, covering front-to-front cuts)
    and close at the first boundary or sustained gate close. The
    background model resets at every boundary. Emitted clips are disjoint,
    ordered, and at least min_clip_frames long. Backend errors abort the
    clip in progress and surface with the frame index.
    """
    gate_cfg = gate_cfg or GateConfig()
    boundary_cfg = boundary_cfg or BoundaryConfig()
    replay_cfg = replay_cfg or ReplayConfig()

    model = BackgroundModel(boundary_cfg, kernel_impl)
    debouncer = Debouncer(gate_cfg.debounce_k)
    open_clip: _OpenClip | None = None
    # Lookback buffer for retroactive opens and closes: the debounce lag
    # plus the boundary's one-frame step back.
    recent: OrderedDict[int, tuple[Frame, GateVerdict]] = OrderedDict()
    lookback = gate_cfg.debounce_k + 2
    current = -1

    def close(end_index: int) -> Clip | None:
        """Close the open clip at end_index; None when nothing to emit."""
        nonlocal open_clip
        state, open_clip = open_clip, None
        if state is None or end_index < state.start:
            return None
        for idx in range(end_index + 1, state.counted_up_to + 1):
            state.count(idx, recent[idx][1], sign=-1)
        length = end_index - state.start + 1
        if length < boundary_cfg.min_clip_frames:
            return None
        last_frame = recent[end_index][0]
        liveness = (
            classify_liveness([state.first_frame, last_frame], replay_cfg)
            if length >= 2
            else UNDETERMINED
        )
        evidence = {
            "frames": length,
            "signals": {k: v for k, v in sorted(state.signal_counts.items()) if v > 0},
        }
        return Clip(state.start, end_index, length * 1000.0 / fps, liveness, evidence)

    def open_at(start_index: int) -> None:
        nonlocal open_clip
        open_clip = _OpenClip(start_index, recent[start_index][0])
        for idx in range(start_index, current + 1):
            open_clip.count(idx, recent[idx][1])

    annotated = _annotated(frames, backend, threads)
    while True:
        try:
            frame, annotations = next(annotated)
        except StopIteration:
            break
        except AnnotationError as exc:
            open_clip = None
            raise SegmentationError("backend", exc.frame_index, str(exc)) from exc

        current = frame.index
        verdict = apply_gate(strategy, annotations, gate_cfg)
        recent[current] = (frame, verdict)
        while len(recent) > lookback:
            recent.popitem(last=False)

        was_warm = model.warm
        mask = model.update(frame.luma)
        boundary = detect_boundary(foreground_fraction(mask), boundary_cfg, was_warm)
        event = debouncer.push(current, verdict.is_front)

        if event is not None and event.kind == "close" and open_clip is not None:
            clip = close(event.run_start - 1)
            if clip is not None:
                yield clip
        if boundary:
            if open_clip is not None:
                clip = close(current - 1)
                if clip is not None:
                    yield clip
            model.reset()
            model.update(frame.luma)
            if debouncer.gate_open:
                open_at(current)
        if event is not None and event.kind == "open" and open_clip is None:
            open_at(event.run_start)

        if open_clip is not None and open_clip.counted_up_to < current:
            open_clip.count(current, verdict)
        if on_frame is not None:
            on_frame(current)

    if open_clip is not None and current >= 0:
        clip = close(current)
        if clip is not None:
            yield clip


@dataclass(frozen=True)
class SegmentRun:
    clips: list
    frames_processed: int
    wall_ms: float


def run_segmentation(
    frames: Iterable[Frame], backend: Backend, fps: float, **kwargs
) -> SegmentRun:
    """Drive segment() to completion, timing the run."""
    count = 0

    def tick(_: int) -> None:
        nonlocal count
        count += 1

    start = time.perf_counter()
    clips = list(segment(frames, backend, fps, on_frame=tick, **kwargs))
    wall_ms = (time.perf_counter() - start) * 1000.0
    return SegmentRun(clips=clips, frames_processed=count, wall_ms=wall_ms)
