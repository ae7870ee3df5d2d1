"""Comparison features: the empirical triple and sparse peak trajectories.

The empirical features are the event length, the ratio of extreme
positive to extreme negative envelope frequency, and the occupied
bandwidth.  The trajectory feature greedily collects the strongest
spectrogram cells (with a suppression neighborhood, in the spirit of a
matching pursuit over time-frequency atoms) and summarizes a class by
K-means centroids over the pooled normalized points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .envelope import EnvelopePair
from .segmentation import MotionInterval
from .tfr import Spectrogram

TRAJECTORY_POINTS = 10
TIME_NORM_S = 5.0
FREQ_NORM_HZ = 500.0


@dataclass
class EmpiricalFeatures:
    event_length_s: float
    extreme_ratio: float
    bandwidth_hz: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.event_length_s, self.extreme_ratio, self.bandwidth_hz])


def empirical(interval: MotionInterval, env: EnvelopePair) -> EmpiricalFeatures:
    """Event length, positive/negative extreme ratio, and bandwidth.

    The extremes are taken over envelope samples inside the interval.
    When the negative extreme is exactly zero the ratio divides by one
    frequency bin instead, keeping it finite.
    """
    sel = (env.time_s >= interval.start_s) & (env.time_s <= interval.end_s)
    if not sel.any():
        sel = np.ones(len(env.time_s), dtype=bool)
    f_pos = float(env.upper_hz[sel].max())
    f_neg = float(env.lower_hz[sel].min())
    denom = abs(f_neg) if f_neg != 0.0 else abs(f_neg) + env.bin_hz
    return EmpiricalFeatures(
        event_length_s=interval.duration_s,
        extreme_ratio=abs(f_pos) / denom,
        bandwidth_hz=abs(f_pos) + abs(f_neg),
    )


@dataclass
class Trajectory:
    """(time, frequency, intensity) rows sorted by descending intensity."""

    points: np.ndarray
    padded: bool = False

    def __post_init__(self):
        self.points = np.asarray(self.points, float)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError("trajectory needs rows of (time, freq, intensity)")

    @property
    def tf(self) -> np.ndarray:
        return self.points[:, :2]

    def normalized_tf(self) -> np.ndarray:
        """Points scaled to the unit square: t / 5 s, f / 500 Hz."""
        out = self.points[:, :2].copy()
        out[:, 0] /= TIME_NORM_S
        out[:, 1] /= FREQ_NORM_HZ
        return out


def trajectory(
    spec: Spectrogram,
    n_points: int = TRAJECTORY_POINTS,
    band_hz: tuple[float, float] | None = (20.0, 500.0),
    suppress: tuple[int, int] = (5, 3),
) -> Trajectory:
    """Greedy bright-point extraction with neighborhood suppression.

    Repeatedly takes the brightest remaining cell and zeroes the
    surrounding +-suppress[0] frequency rows by +-suppress[1] columns.
    ``band_hz`` restricts the search to the Doppler analysis band (pass
    ``None`` to search the whole plane).  If the matrix runs out of
    nonzero cells the result is padded with (0, 0, 0) rows and flagged.
    """
    if n_points < 1:
        raise ValueError("need at least one trajectory point")
    work = spec.power.copy()
    if band_hz is not None:
        lo, hi = band_hz
        keep = (np.abs(spec.freq_hz) >= lo) & (np.abs(spec.freq_hz) <= hi)
        work[~keep] = 0.0
    df, dt = suppress
    pts = []
    for _ in range(n_points):
        k = int(np.argmax(work))
        r, c = divmod(k, work.shape[1])
        v = work[r, c]
        if v <= 0.0:
            break
        pts.append((spec.time_s[c], spec.freq_hz[r], float(v)))
        work[max(r - df, 0) : r + df + 1, max(c - dt, 0) : c + dt + 1] = 0.0
    padded = len(pts) < n_points
    while len(pts) < n_points:
        pts.append((0.0, 0.0, 0.0))
    pts = np.array(pts)
    order = np.argsort(-pts[:, 2], kind="stable")
    return Trajectory(pts[order], padded=padded)


def _kmeans_once(x: np.ndarray, k: int, rng: np.random.Generator, iters: int, tol: float):
    uniq = np.unique(x, axis=0)
    if len(uniq) >= k:
        centers = uniq[rng.choice(len(uniq), size=k, replace=False)]
    else:
        centers = x[rng.choice(len(x), size=k, replace=True)].astype(float)
    for _ in range(iters):
        d = cdist(x, centers)
        assign = d.argmin(axis=1)
        new = centers.copy()
        for j in range(k):
            members = x[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
            else:
                # revive an empty cluster at the worst-served point
                new[j] = x[d.min(axis=1).argmax()]
        shift = np.abs(new - centers).max()
        centers = new
        if shift <= tol:
            break
    d = cdist(x, centers)
    assign = d.argmin(axis=1)
    inertia = float((d[np.arange(len(x)), assign] ** 2).sum())
    return centers, assign, inertia


def central_trajectory(
    trajectories: list[Trajectory],
    n_points: int = TRAJECTORY_POINTS,
    seed: int = 0,
    restarts: int = 50,
    iters: int = 300,
    tol: float = 1e-6,
) -> Trajectory:
    """K-means summary of a set of trajectories.

    All (t, f) points are pooled in normalized units and clustered with
    K = ``n_points`` (Lloyd iterations, best of ``restarts`` seeded
    starts).  Centroids are returned in physical units with the mean
    member intensity attached.
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    pooled = np.vstack([t.normalized_tf() for t in trajectories])
    weights = np.concatenate([t.points[:, 2] for t in trajectories])
    if len(pooled) < n_points:
        raise ValueError("fewer pooled points than clusters")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    best = None
    for _ in range(restarts):
        centers, assign, inertia = _kmeans_once(pooled, n_points, rng, iters, tol)
        if best is None or inertia < best[2] - 1e-15:
            best = (centers, assign, inertia)
        if best[2] == 0.0:
            break
    centers, assign, _ = best
    rows = []
    for j in range(n_points):
        members = assign == j
        amp = float(weights[members].mean()) if members.any() else 0.0
        rows.append((centers[j, 0] * TIME_NORM_S, centers[j, 1] * FREQ_NORM_HZ, amp))
    rows = np.array(rows)
    return Trajectory(rows[np.argsort(-rows[:, 2], kind="stable")])
