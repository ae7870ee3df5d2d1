"""PCA bases, class subspaces, and principal-angle similarity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .simulate import GestureLabel
from .tfr import GrayImage, vectorize


def _as_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        x = np.asarray(samples, float)
    else:
        rows = [vectorize(s) if isinstance(s, GrayImage) else np.asarray(s, float) for s in samples]
        x = np.vstack(rows)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("expected a non-empty (samples x dims) matrix")
    return x


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    # deterministic orientation: largest-|entry| coordinate made positive
    for j in range(basis.shape[1]):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


@dataclass
class PcaModel:
    mean: np.ndarray
    basis: np.ndarray  # (dims, d), orthonormal columns
    singular_values: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def fit_pca(samples, d: int) -> PcaModel:
    """Top-d principal directions of mean-centered samples (rows)."""
    x = _as_matrix(samples)
    m, q = x.shape
    if not 1 <= d <= min(m, q):
        raise ValueError(f"d={d} out of range for {m} samples of dim {q}")
    mean = x.mean(axis=0)
    u, s, _ = np.linalg.svd((x - mean).T, full_matrices=False)
    return PcaModel(mean=mean, basis=_fix_signs(u[:, :d].copy()), singular_values=s)


def project(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Coefficients of one sample (1-D) or a stack of samples (2-D)."""
    x = np.asarray(x, float)
    if x.shape[-1] != model.mean.shape[0]:
        raise ValueError("sample dimension does not match the model")
    return (x - model.mean) @ model.basis


@dataclass
class ClassSubspace:
    basis: np.ndarray  # (dims, d), orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def class_subspace(samples, d: int) -> ClassSubspace:
    """Orthonormal span of the raw (uncentered) samples, top-d."""
    x = _as_matrix(samples)
    m, q = x.shape
    if not 1 <= d <= min(m, q):
        raise ValueError(f"d={d} out of range for {m} samples of dim {q}")
    u, _, _ = np.linalg.svd(x.T, full_matrices=False)
    return ClassSubspace(basis=_fix_signs(u[:, :d].copy()))


def canonical_correlations(a: ClassSubspace, b: ClassSubspace) -> np.ndarray:
    """Cosines of the principal angles, descending, clipped to [0, 1]."""
    if a.basis.shape[0] != b.basis.shape[0]:
        raise ValueError("subspaces live in different ambient dimensions")
    s = np.linalg.svd(a.basis.T @ b.basis, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def similarity(a: ClassSubspace, b: ClassSubspace) -> float:
    """Largest canonical correlation between two subspaces."""
    return float(canonical_correlations(a, b)[0])


@dataclass
class SimilarityMatrix:
    values: np.ndarray
    labels: tuple[GestureLabel, ...]

    def to_csv(self, path) -> None:
        letters = [lab.letter for lab in self.labels]
        with open(path, "w") as fh:
            fh.write("," + ",".join(letters) + "\n")
            for letter, row in zip(letters, self.values):
                fh.write(letter + "," + ",".join(f"{v:.6f}" for v in row) + "\n")


def similarity_table(
    samples_by_class: Mapping[GestureLabel, Sequence],
    d: int = 10,
) -> SimilarityMatrix:
    """Pairwise largest canonical correlation between class subspaces.

    Unit diagonal by construction; each class needs at least ``d``
    samples.  Off-diagonal entries are computed once and mirrored.
    """
    labels = tuple(sorted(samples_by_class, key=int))
    if not labels:
        raise ValueError("no classes given")
    bases = {}
    for lab in labels:
        x = _as_matrix(samples_by_class[lab])
        if x.shape[0] < d:
            raise ValueError(f"class {GestureLabel(lab).letter} has fewer than d={d} samples")
        bases[lab] = class_subspace(x, d)
    n = len(labels)
    vals = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            vals[i, j] = vals[j, i] = similarity(bases[labels[i]], bases[labels[j]])
    return SimilarityMatrix(values=vals, labels=labels)
