"""Distances, nearest-neighbor classification, and a linear SVM.

Envelope vectors can be compared four ways: L1, L2, a closed-form 1-D
earth mover's distance on the vectors re-read as distributions, and the
modified Hausdorff distance on the vectors re-read as planar point
sets.  The SVM is six one-vs-rest linear hinge-loss machines trained
with seeded epoch-wise subgradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .simulate import STREAM_SVM


class DistanceKind(Enum):
    L1 = "l1"
    L2 = "l2"
    EMD = "emd"
    MHD = "mhd"

    @classmethod
    def parse(cls, name) -> "DistanceKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown distance kind: {name!r}") from None


def _as_mass(v: np.ndarray) -> np.ndarray:
    """Shift to non-negative if needed and normalize to unit mass; a
    vector with no mass stands in for the uniform distribution."""
    v = np.asarray(v, float)
    lo = v.min()
    if lo < 0:
        v = v - lo
    s = v.sum()
    if s <= 0:
        return np.full(v.shape, 1.0 / v.size)
    return v / s


def emd_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Earth mover's distance between two vectors on the unit-spaced
    line: the L1 distance of the normalized cumulative sums."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("EMD needs two equal-length vectors")
    return float(np.abs(np.cumsum(_as_mass(a) - _as_mass(b))).sum())


def mhd(a: np.ndarray, b: np.ndarray) -> float:
    """Modified Hausdorff distance between two point sets (rows)."""
    a = np.atleast_2d(np.asarray(a, float))
    b = np.atleast_2d(np.asarray(b, float))
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets must share a dimension")
    d = cdist(a, b)
    return float(max(d.min(axis=1).mean(), d.min(axis=0).mean()))


def envelope_to_points(vec: np.ndarray, f_scale_hz: float = 500.0) -> np.ndarray:
    """Re-read a stacked envelope vector as 2N points (n/N, e(n)/scale)."""
    vec = np.asarray(vec, float)
    if vec.ndim != 1 or vec.size % 2:
        raise ValueError("expected an even-length stacked envelope vector")
    n = vec.size // 2
    t = np.arange(n) / n
    pts = np.empty((2 * n, 2))
    pts[:n, 0] = t
    pts[n:, 0] = t
    pts[:, 1] = vec / f_scale_hz
    return pts


def dist(a, b, kind: DistanceKind | str) -> float:
    kind = DistanceKind.parse(kind)
    if kind is DistanceKind.MHD:
        return mhd(a, b)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("vector distances need two equal-length vectors")
    if kind is DistanceKind.L1:
        return float(np.abs(a - b).sum())
    if kind is DistanceKind.L2:
        return float(np.sqrt(((a - b) ** 2).sum()))
    return emd_1d(a, b)


def _uniform_sets(xs) -> bool:
    """True when every element is a 2-D point set of one common shape."""
    if not len(xs):
        return False
    first = np.shape(xs[0])
    return len(first) == 2 and all(np.shape(p) == first for p in xs)


def _mhd_matrix(a: np.ndarray, b: np.ndarray, chunk: int = 64) -> np.ndarray:
    """All-pairs modified Hausdorff for stacks of same-size point sets.

    Works on blocks of squared distances in single precision, taking the
    square root only after the min reductions (the minimizer is the same
    either way).  Matches ``mhd(a[i], b[j])`` to float32 resolution but
    runs orders of magnitude faster than a pair loop.
    """
    na, p, dim = a.shape
    nb, q, _ = b.shape
    a32 = np.ascontiguousarray(a, dtype=np.float32)
    b32 = np.ascontiguousarray(b, dtype=np.float32)
    out = np.empty((na, nb))
    for j0 in range(0, nb, chunk):
        blk = b32[j0 : j0 + chunk]
        s = len(blk)
        flat = blk.reshape(s * q, dim)
        for i in range(na):
            d2 = np.zeros((p, s * q), dtype=np.float32)
            for k in range(dim):
                d2 += (a32[i, :, k, None] - flat[None, :, k]) ** 2
            d2 = d2.reshape(p, s, q)
            fwd = np.sqrt(d2.min(axis=2), dtype=np.float64).mean(axis=0)
            bwd = np.sqrt(d2.min(axis=0), dtype=np.float64).mean(axis=1)
            out[i, j0 : j0 + s] = np.maximum(fwd, bwd)
    return out


def pairwise_distances(xa, xb, kind: DistanceKind | str) -> np.ndarray:
    """Distance matrix between two collections.

    Vector kinds take 2-D arrays (rows are samples); MHD takes lists of
    point-set arrays.
    """
    kind = DistanceKind.parse(kind)
    if kind is DistanceKind.MHD:
        if _uniform_sets(xa) and _uniform_sets(xb) and xa[0].shape[1] == xb[0].shape[1]:
            return _mhd_matrix(np.stack(xa), np.stack(xb))
        out = np.empty((len(xa), len(xb)))
        same = xa is xb
        for i, pa in enumerate(xa):
            j0 = i if same else 0
            for j in range(j0, len(xb)):
                out[i, j] = mhd(pa, xb[j])
                if same:
                    out[j, i] = out[i, j]
        return out
    xa = np.asarray(xa, float)
    xb = np.asarray(xb, float)
    if kind is DistanceKind.L1:
        return cdist(xa, xb, metric="cityblock")
    if kind is DistanceKind.L2:
        return cdist(xa, xb, metric="euclidean")
    ca = np.cumsum(np.stack([_as_mass(r) for r in xa]), axis=1)
    cb = np.cumsum(np.stack([_as_mass(r) for r in xb]), axis=1)
    return cdist(ca, cb, metric="cityblock")


@dataclass
class NnModel:
    """1-nearest-neighbor over stored training features."""

    features: object  # (M, D) array, or list of point sets for MHD
    labels: np.ndarray
    kind: DistanceKind = DistanceKind.L1
    k: int = 1


def fit_nn(features, labels, kind: DistanceKind | str = DistanceKind.L1) -> NnModel:
    kind = DistanceKind.parse(kind)
    labels = np.asarray(labels, int)
    n = len(features) if isinstance(features, list) else np.asarray(features).shape[0]
    if n != len(labels):
        raise ValueError("feature/label count mismatch")
    if n == 0:
        raise ValueError("empty training set")
    if kind is not DistanceKind.MHD:
        features = np.asarray(features, float)
    return NnModel(features=features, labels=labels, kind=kind)


def nn_classify(model: NnModel, x) -> int:
    """Label of the nearest stored sample; ties go to the lowest index."""
    if model.kind is DistanceKind.MHD:
        d = np.array([mhd(x, p) for p in model.features])
    else:
        d = pairwise_distances(np.asarray(x, float)[None, :], model.features, model.kind)[0]
    return int(model.labels[int(np.argmin(d))])


def nn_predict(model: NnModel, xs) -> np.ndarray:
    if model.kind is DistanceKind.MHD:
        return np.array([nn_classify(model, p) for p in xs])
    d = pairwise_distances(np.asarray(xs, float), model.features, model.kind)
    return model.labels[d.argmin(axis=1)]


@dataclass
class SvmModel:
    weights: np.ndarray  # (C, D)
    bias: np.ndarray  # (C,)
    mean: np.ndarray
    scale: np.ndarray
    classes: np.ndarray
    epoch_losses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    majority: int | None = None  # set when training data was degenerate

    def decision(self, x: np.ndarray) -> np.ndarray:
        z = (np.atleast_2d(np.asarray(x, float)) - self.mean) / self.scale
        return z @ self.weights.T + self.bias


def fit_svm(
    x: np.ndarray,
    y: np.ndarray,
    lam: float = 1e-4,
    epochs: int = 200,
    seed: int = 0,
) -> SvmModel:
    """Train one-vs-rest linear hinge machines.

    Features are standardized (constant dimensions keep unit scale).
    Per-sample subgradient steps with 1/(lam*t) rates run in a seeded
    shuffle order; after each epoch the full objective is evaluated and
    the best iterate so far is kept, so the recorded loss curve is
    non-increasing and the returned machine is the best one seen.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, int)
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("need (M, D) features with matching labels")
    classes = np.unique(y)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    z = (x - mean) / scale

    if np.all(np.all(x == x[0], axis=1)):
        counts = np.array([(y == c).sum() for c in classes])
        maj = int(classes[int(np.argmax(counts))])
        c, dim = len(classes), x.shape[1]
        return SvmModel(np.zeros((c, dim)), np.zeros(c), mean, scale, classes, majority=maj)

    targets = np.where(y[None, :] == classes[:, None], 1.0, -1.0)  # (C, M)
    m, dim = z.shape
    w = np.zeros((len(classes), dim))
    b = np.zeros(len(classes))

    def objective(wm, bm):
        margins = 1.0 - targets * (z @ wm.T + bm).T
        hinge = np.maximum(margins, 0.0).mean(axis=1).sum()
        return 0.5 * lam * (wm**2).sum() + hinge

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, STREAM_SVM])))
    best_w, best_b = w.copy(), b.copy()
    best_obj = objective(w, b)
    losses = []
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(m):
            t += 1
            eta = 1.0 / (lam * t)
            zi = z[i]
            viol = targets[:, i] * (w @ zi + b) < 1.0
            w *= 1.0 - eta * lam
            if viol.any():
                w[viol] += (eta / m) * targets[viol, i][:, None] * zi
                b[viol] += (eta / m) * targets[viol, i]
        obj = objective(w, b)
        if obj < best_obj:
            best_obj = obj
            best_w, best_b = w.copy(), b.copy()
        losses.append(best_obj)
    return SvmModel(best_w, best_b, mean, scale, classes, epoch_losses=np.array(losses))


def svm_predict(model: SvmModel, x: np.ndarray) -> np.ndarray:
    xs = np.atleast_2d(np.asarray(x, float))
    if model.majority is not None:
        return np.full(len(xs), model.majority)
    return model.classes[model.decision(xs).argmax(axis=1)]


def shuffle_features(x: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Apply one shared coordinate permutation to every sample row."""
    x = np.asarray(x)
    perm = np.asarray(perm, int)
    if x.ndim != 2:
        raise ValueError("expected an (M, D) feature matrix")
    if sorted(perm.tolist()) != list(range(x.shape[1])):
        raise ValueError("not a permutation of the feature coordinates")
    return x[:, perm]
