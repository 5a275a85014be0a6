"""Live/replay classification via the bottom scorecard band.

Live broadcast footage keeps a stationary scorecard at the bottom of the
frame; replays drop it. A clip whose bottom band is unchanged between its
first and last frame is live, otherwise it is a replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from cricseg import kernels
from cricseg.frames import BandSpec, Frame

LIVE = "live"
REPLAY = "replay"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ReplayConfig:
    band: BandSpec = field(default_factory=BandSpec)
    mean_abs_diff_threshold: float = 8.0
    strict: bool = False  # also require first/middle and middle/last to agree

    def __post_init__(self) -> None:
        if self.mean_abs_diff_threshold < 0:
            raise ValueError("mean_abs_diff_threshold must be >= 0")


def band_difference(first: Frame, last: Frame, band: BandSpec) -> float:
    """Mean absolute luma difference over the bottom band, in [0, 255].

    Symmetric in its two arguments.
    """
    if first.luma.shape != last.luma.shape:
        raise ValueError("frames differ in dimensions")
    r0, r1 = band.rows(first.height)
    return kernels.band_abs_diff_mean(first.luma[r0:r1], last.luma[r0:r1])


def classify_liveness(frames: Sequence[Frame], cfg: ReplayConfig) -> str:
    """Label a clip from its frames; needs at least two to decide.

    Only the endpoints are compared by default; strict mode additionally
    requires the band to be static between each endpoint and the middle
    frame.
    """
    if len(frames) < 2:
        return UNDETERMINED
    pairs = [(frames[0], frames[-1])]
    if cfg.strict:
        mid = frames[len(frames) // 2]
        pairs = [(frames[0], mid), (mid, frames[-1])]
    static = all(
        band_difference(a, b, cfg.band) <= cfg.mean_abs_diff_threshold for a, b in pairs
    )
    return LIVE if static else REPLAY
