"""Pipeline configuration: a flat key-value file plus flag overrides.

The file format is one ``section.key = value`` pair per line, with ``#``
comments. Flags always win over file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from cricseg.frames import BandSpec, CropSpec
from cricseg.gate import GateConfig, STRATEGIES
from cricseg.geometry import PitchSpec
from cricseg.replay import ReplayConfig
from cricseg.segmenter import BoundaryConfig
from cricseg.tracker import TrackerConfig


class ConfigError(Exception):
    pass


def load_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _get(values: dict[str, str], key: str, cast, default):
    if key not in values:
        return default
    raw = values[key]
    try:
        if cast is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key}: {exc}") from exc


@dataclass
class PipelineConfig:
    source: str | None = None
    scenario: str | None = None
    backend: str = "synthetic"  # synthetic | file:<path>
    fps: float = 50.0
    width: int | None = None
    height: int | None = None
    strategy: str = "dual"
    threads: int = 1
    kernel_impl: str | None = None
    gate: GateConfig = field(default_factory=GateConfig)
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    replay: ReplayConfig = field(default_factory=ReplayConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    pitch: PitchSpec = field(default_factory=PitchSpec)
    crop: CropSpec = field(default_factory=CropSpec)

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"gate.strategy must be one of {STRATEGIES}")
        if not (self.backend == "synthetic" or self.backend.startswith("file:")):
            raise ConfigError("backend must be 'synthetic' or 'file:<path>'")
        if self.backend.startswith("file:"):
            path = self.backend[len("file:") :]
            if not Path(path).exists():
                raise ConfigError(f"annotation file does not exist: {path}")
            if self.source is None:
                raise ConfigError("a file backend needs --source for the frames")
        if self.backend == "synthetic" and self.scenario is None:
            raise ConfigError("the synthetic backend needs --scenario")
        if self.fps <= 0:
            raise ConfigError("fps must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def build_pipeline_config(values: dict[str, str]) -> PipelineConfig:
    """Assemble the typed config from flat key-value pairs."""
    try:
        gate = GateConfig(
            classifier_threshold=_get(values, "gate.thresholds.classifier", float, 0.5),
            umpire_conf_min=_get(values, "gate.thresholds.umpire", float, 0.25),
            pitch_conf_min=_get(values, "gate.thresholds.pitch", float, 0.25),
            dual_mode=_get(values, "gate.dual_mode", str, "union"),
            debounce_k=_get(values, "gate.debounce_k", int, 3),
        )
        boundary = BoundaryConfig(
            foreground_threshold=_get(values, "boundary.foreground_threshold", float, 0.6),
            pixel_diff_threshold=_get(values, "boundary.pixel_diff_threshold", float, 25.0),
            learning_rate=_get(values, "boundary.learning_rate", float, 0.05),
            init_frames=_get(values, "boundary.init_frames", int, 30),
            min_clip_frames=_get(values, "boundary.min_clip_frames", int, 25),
        )
        replay = ReplayConfig(
            band=BandSpec(_get(values, "replay.band_fraction", float, 0.15)),
            mean_abs_diff_threshold=_get(values, "replay.threshold", float, 8.0),
            strict=_get(values, "replay.strict", bool, False),
        )
        tracker = TrackerConfig(
            max_jump_px=_get(values, "tracker.max_jump_px", float, 120.0),
            max_gap_frames=_get(values, "tracker.max_gap_frames", int, 3),
        )
        pitch = PitchSpec(
            full_max_m=_get(values, "pitch.full_max_m", float, 6.0),
            good_max_m=_get(values, "pitch.good_max_m", float, 8.0),
            tilt_deg=_get(values, "pitch.tilt_deg", float, 20.0),
        )
        crop = CropSpec(
            top=_get(values, "crop.top", float, 0.0),
            bottom=_get(values, "crop.bottom", float, 0.0),
            left=_get(values, "crop.left", float, 0.0),
            right=_get(values, "crop.right", float, 0.0),
        )
        cfg = PipelineConfig(
            source=values.get("source.path"),
            scenario=values.get("source.scenario"),
            backend=_get(values, "backend.kind", str, "synthetic"),
            fps=_get(values, "source.fps", float, 50.0),
            width=_get(values, "source.width", int, None),
            height=_get(values, "source.height", int, None),
            strategy=_get(values, "gate.strategy", str, "dual"),
            threads=_get(values, "run.threads", int, 1),
            kernel_impl=values.get("run.kernel_impl"),
            gate=gate,
            boundary=boundary,
            replay=replay,
            tracker=tracker,
            pitch=pitch,
            crop=crop,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
