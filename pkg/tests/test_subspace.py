"""PCA and principal-angle subspace comparison against linear-algebra oracles."""

import numpy as np
import pytest

from mdgest.simulate import GestureLabel
from mdgest.subspace import (
    ClassSubspace,
    canonical_correlations,
    class_subspace,
    fit_pca,
    project,
    similarity,
    similarity_table,
)
from mdgest.tfr import GrayImage


def random_subspace(rng, ambient, d):
    q, _ = np.linalg.qr(rng.normal(size=(ambient, d)))
    return ClassSubspace(basis=q[:, :d])


def eigen_oracle(a, b):
    """Principal-angle cosines via the eigenvalues of (A'B)(A'B)'."""
    m = a.basis.T @ b.basis
    lam = np.linalg.eigvalsh(m @ m.T)
    lam = np.clip(lam, 0.0, 1.0)
    return np.sqrt(lam[::-1])


class TestPca:
    def test_basis_orthonormal(self):
        rng = np.random.default_rng(0)
        model = fit_pca(rng.normal(size=(20, 12)), d=5)
        gram = model.basis.T @ model.basis
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)

    @pytest.mark.prop
    def test_full_rank_projection_preserves_distances(self):
        # With d equal to the centered rank, projection is an isometry on
        # the data: pairwise distances survive exactly.
        rng = np.random.default_rng(1)
        x = rng.normal(size=(12, 30))
        model = fit_pca(x, d=11)
        z = project(model, x)
        for i in range(12):
            for j in range(i + 1, 12):
                orig = np.linalg.norm(x[i] - x[j])
                proj = np.linalg.norm(z[i] - z[j])
                assert proj == pytest.approx(orig, abs=1e-9)

    def test_beats_random_bases_at_reconstruction(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(40, 25)) @ np.diag(np.linspace(3, 0.1, 25))
        d = 6
        model = fit_pca(x, d)
        xc = x - model.mean

        def resid(basis):
            return np.linalg.norm(xc - (xc @ basis) @ basis.T) ** 2

        best = resid(model.basis)
        for _ in range(10):
            assert best <= resid(random_subspace(rng, 25, d).basis) + 1e-9

    def test_project_shapes(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(9, 7))
        model = fit_pca(x, d=4)
        assert project(model, x[0]).shape == (4,)
        assert project(model, x).shape == (9, 4)
        with pytest.raises(ValueError):
            project(model, np.zeros(8))

    def test_sign_convention_and_determinism(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(15, 10))
        a = fit_pca(x, d=3)
        b = fit_pca(x, d=3)
        np.testing.assert_array_equal(a.basis, b.basis)
        for j in range(3):
            i = np.argmax(np.abs(a.basis[:, j]))
            assert a.basis[i, j] > 0

    @pytest.mark.parametrize("d", [0, 8, 100])
    def test_rank_bounds_enforced(self, d):
        with pytest.raises(ValueError):
            fit_pca(np.ones((8, 7)), d)

    def test_accepts_gray_images(self):
        rng = np.random.default_rng(5)
        mats = [rng.random((4, 3)) for _ in range(6)]
        from_imgs = fit_pca([GrayImage(m) for m in mats], d=2)
        from_rows = fit_pca(np.vstack([m.reshape(-1) for m in mats]), d=2)
        np.testing.assert_allclose(from_imgs.basis, from_rows.basis, atol=1e-12)


class TestClassSubspace:
    def test_orthonormal_columns(self):
        rng = np.random.default_rng(6)
        sub = class_subspace(rng.normal(size=(10, 20)), d=4)
        np.testing.assert_allclose(sub.basis.T @ sub.basis, np.eye(4), atol=1e-12)

    def test_uncentered_span(self):
        # Samples along one ray span a single direction; centering would
        # collapse it, so the fit must work on the raw rows.
        v = np.array([3.0, 4.0, 0.0, 0.0])
        x = np.outer([1.0, 2.0, 5.0], v)
        sub = class_subspace(x, d=1)
        np.testing.assert_allclose(sub.basis[:, 0], v / 5.0, atol=1e-12)


class TestCanonicalCorrelations:
    def test_matches_eigen_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = random_subspace(rng, 40, 5)
            b = random_subspace(rng, 40, 5)
            got = canonical_correlations(a, b)
            np.testing.assert_allclose(got, eigen_oracle(a, b), atol=1e-8)
            assert np.all(np.diff(got) <= 1e-12)  # descending
            assert np.all((got >= 0.0) & (got <= 1.0))

    @pytest.mark.prop
    def test_invariant_to_basis_rotation(self):
        # Correlations describe the subspaces, not the particular bases:
        # any orthogonal remix of basis columns leaves them unchanged.
        rng = np.random.default_rng(8)
        for _ in range(10):
            a = random_subspace(rng, 30, 4)
            b = random_subspace(rng, 30, 4)
            qa, _ = np.linalg.qr(rng.normal(size=(4, 4)))
            qb, _ = np.linalg.qr(rng.normal(size=(4, 4)))
            base = canonical_correlations(a, b)
            mixed = canonical_correlations(
                ClassSubspace(a.basis @ qa), ClassSubspace(b.basis @ qb)
            )
            np.testing.assert_allclose(mixed, base, atol=1e-9)

    def test_identical_subspaces_score_one(self):
        rng = np.random.default_rng(9)
        a = random_subspace(rng, 20, 3)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        b = ClassSubspace(a.basis @ q)
        np.testing.assert_allclose(canonical_correlations(a, b), 1.0, atol=1e-9)
        assert similarity(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_subspaces_score_zero(self):
        e = np.eye(6)
        a = ClassSubspace(e[:, :2])
        b = ClassSubspace(e[:, 3:5])
        np.testing.assert_allclose(canonical_correlations(a, b), 0.0, atol=1e-12)

    def test_partial_overlap_flags_the_shared_direction(self):
        e = np.eye(5)
        a = ClassSubspace(e[:, [0, 1]])
        b = ClassSubspace(e[:, [0, 3]])
        np.testing.assert_allclose(canonical_correlations(a, b), [1.0, 0.0], atol=1e-12)

    def test_ambient_mismatch_raises(self):
        with pytest.raises(ValueError):
            canonical_correlations(
                ClassSubspace(np.eye(4)[:, :2]), ClassSubspace(np.eye(5)[:, :2])
            )


class TestSimilarityTable:
    def class_samples(self, rng, n=12, dim=40):
        return {
            lab: rng.normal(size=(n, dim)) + 0.5 * int(lab) for lab in GestureLabel
        }

    def test_diagonal_symmetry_and_range(self):
        table = similarity_table(self.class_samples(np.random.default_rng(10)), d=4)
        v = table.values
        np.testing.assert_array_equal(np.diag(v), np.ones(6))
        np.testing.assert_allclose(v, v.T, atol=0)
        off = v[~np.eye(6, dtype=bool)]
        assert np.all(off < 1.0)
        assert np.all(off >= 0.0)

    def test_labels_sorted_regardless_of_input_order(self):
        samples = self.class_samples(np.random.default_rng(11))
        shuffled = {lab: samples[lab] for lab in reversed(list(GestureLabel))}
        table = similarity_table(shuffled, d=4)
        assert table.labels == tuple(sorted(GestureLabel, key=int))

    def test_duplicated_class_pairs_at_one(self):
        rng = np.random.default_rng(12)
        samples = self.class_samples(rng)
        samples[GestureLabel.CROSS] = samples[GestureLabel.PUSH_PULL].copy()
        table = similarity_table(samples, d=4)
        i = table.labels.index(GestureLabel.PUSH_PULL)
        j = table.labels.index(GestureLabel.CROSS)
        assert table.values[i, j] == pytest.approx(1.0, abs=1e-9)

    def test_small_class_rejected_with_letter(self):
        samples = self.class_samples(np.random.default_rng(13))
        samples[GestureLabel.ROLL] = samples[GestureLabel.ROLL][:3]
        with pytest.raises(ValueError, match="class d"):
            similarity_table(samples, d=4)

    def test_csv_layout(self, tmp_path):
        table = similarity_table(self.class_samples(np.random.default_rng(14)), d=4)
        path = tmp_path / "sim.csv"
        table.to_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == ",a,b,c,d,e,f"
        first = lines[1].split(",")
        assert first[0] == "a"
        assert first[1] == "1.000000"
        assert len(lines) == 7
