"""Motion segmentation with the power burst curve.

The power burst curve sums squared spectrogram values over the Doppler
bands [-500, -20] and [+20, +500] Hz, column by column, skipping the
zero-Doppler strip where the static body return lives.  A smoothed
curve is thresholded a fraction above its floor to find motion bursts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simulate import IQRecord
from .tfr import Spectrogram, StftConfig, spectrogram


@dataclass(frozen=True)
class PbcConfig:
    neg_lo_hz: float = -500.0
    neg_hi_hz: float = -20.0
    pos_lo_hz: float = 20.0
    pos_hi_hz: float = 500.0
    smooth_len: int = 5
    alpha: float = 0.1
    merge_gap_s: float = 0.40

    def __post_init__(self):
        if not (self.neg_lo_hz < self.neg_hi_hz < 0 < self.pos_lo_hz < self.pos_hi_hz):
            raise ValueError("bands must satisfy neg_lo < neg_hi < 0 < pos_lo < pos_hi")
        if self.smooth_len < 1 or self.smooth_len % 2 == 0:
            raise ValueError("smoothing window must be odd and positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.merge_gap_s < 0:
            raise ValueError("merge gap must be non-negative")


@dataclass(frozen=True)
class MotionInterval:
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError("interval must have start < end")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    @property
    def mid_s(self) -> float:
        return 0.5 * (self.start_s + self.end_s)


def pbc(spec: Spectrogram, cfg: PbcConfig = PbcConfig()) -> np.ndarray:
    f = spec.freq_hz
    if cfg.neg_lo_hz < f[0] or cfg.pos_hi_hz > f[-1]:
        raise ValueError("band/axis mismatch: analysis band outside frequency axis")
    neg = (f >= cfg.neg_lo_hz) & (f <= cfg.neg_hi_hz)
    pos = (f >= cfg.pos_lo_hz) & (f <= cfg.pos_hi_hz)
    sq = spec.power**2
    return sq[neg].sum(axis=0) + sq[pos].sum(axis=0)


def smooth(x: np.ndarray, win: int) -> np.ndarray:
    """Centered moving average with truncated windows at the edges."""
    if win < 1 or win % 2 == 0:
        raise ValueError("smoothing window must be odd and positive")
    x = np.asarray(x, float)
    if x.ndim != 1:
        raise ValueError("expected a 1-D curve")
    if win == 1 or x.size == 0:
        return x.copy()
    h = win // 2
    c = np.concatenate(([0.0], np.cumsum(x)))
    n = x.size
    hi = np.minimum(np.arange(n) + h + 1, n)
    lo = np.maximum(np.arange(n) - h, 0)
    return (c[hi] - c[lo]) / (hi - lo)


def detect(
    s_f: np.ndarray,
    time_s: np.ndarray,
    cfg: PbcConfig = PbcConfig(),
) -> list[MotionInterval]:
    """Threshold the smoothed curve and return merged motion intervals.

    Threshold is floor + alpha * (peak - floor); a run's onset is its
    first column, the offset the first column after it.  Runs closer
    than ``merge_gap_s`` are merged.  A flat curve yields no intervals.
    """
    s_f = np.asarray(s_f, float)
    time_s = np.asarray(time_s, float)
    if s_f.shape != time_s.shape:
        raise ValueError("curve and time axis lengths differ")
    if s_f.size == 0:
        return []
    lo, hi = float(s_f.min()), float(s_f.max())
    if hi == lo:
        return []
    thr = lo + cfg.alpha * (hi - lo)
    above = s_f >= thr
    edges = np.diff(above.astype(int))
    starts = list(np.flatnonzero(edges == 1) + 1)
    ends = list(np.flatnonzero(edges == -1) + 1)
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        ends.append(s_f.size)
    step = float(time_s[1] - time_s[0]) if time_s.size > 1 else 1.0

    def col_time(i: int) -> float:
        return float(time_s[i]) if i < time_s.size else float(time_s[-1] + step)

    merged: list[list[float]] = []
    for s, e in zip(starts, ends):
        t0, t1 = col_time(s), col_time(e)
        if merged and t0 - merged[-1][1] < cfg.merge_gap_s:
            merged[-1][1] = t1
        else:
            merged.append([t0, t1])
    return [MotionInterval(a, b) for a, b in merged]


def segment_record(
    record: IQRecord,
    stft_cfg: StftConfig = StftConfig(),
    pbc_cfg: PbcConfig = PbcConfig(),
) -> list[MotionInterval]:
    """Spectrogram -> burst curve -> smoothing -> detection in one call."""
    spec = spectrogram(record, stft_cfg)
    return detect(smooth(pbc(spec, pbc_cfg), pbc_cfg.smooth_len), spec.time_s, pbc_cfg)


def window(record: IQRecord, interval: MotionInterval, duration_s: float = 5.0) -> IQRecord:
    """Cut a fixed-length slice centered on the interval midpoint.

    The slice is zero-padded where it reaches past either end of the
    record; label and provenance carry over, and any ground-truth active
    span is shifted into the new time base.
    """
    n_total = len(record.samples)
    rec_dur = n_total / record.sample_rate_hz
    if interval.end_s <= 0 or interval.start_s >= rec_dur:
        raise ValueError("interval lies outside the record")
    n_out = int(round(duration_s * record.sample_rate_hz))
    start = int(round(interval.mid_s * record.sample_rate_hz - n_out / 2))
    out = np.zeros(n_out, dtype=record.samples.dtype)
    src_lo = max(start, 0)
    src_hi = min(start + n_out, n_total)
    if src_lo < src_hi:
        out[src_lo - start : src_hi - start] = record.samples[src_lo:src_hi]
    active = None
    if record.active_s is not None:
        shift = start / record.sample_rate_hz
        a0 = max(record.active_s[0] - shift, 0.0)
        a1 = min(record.active_s[1] - shift, duration_s)
        if a0 < a1:
            active = (a0, a1)
    return IQRecord(
        samples=out,
        sample_rate_hz=record.sample_rate_hz,
        label=record.label,
        config=record.config,
        active_s=active,
        record_id=record.record_id,
    )
