import numpy as np
import pytest

from acme_ad.dataset import load_csv, write_csv
from acme_ad.synthetic import SyntheticSpec, generate_test_outliers, generate_training


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="ring"):
            SyntheticSpec(p=1)
        with pytest.raises(ValueError, match="disjoint"):
            SyntheticSpec(inlier_rho=(0, 5), outlier_rho=(4, 30))
        with pytest.raises(ValueError, match="non-negative"):
            SyntheticSpec(n_axis_x=-1)


class TestTraining:
    def test_counts(self):
        data = generate_training(SyntheticSpec(p=6, n_train=1000, contamination=0.10))
        assert data.n_rows == 1000
        assert data.n_features == 6
        assert int(data.labels.sum()) == 100

    def test_rounded_outlier_count(self):
        data = generate_training(SyntheticSpec(p=2, n_train=7, contamination=0.10))
        assert int(data.labels.sum()) == round(0.7)

    def test_radius_bands(self):
        data = generate_training(SyntheticSpec(seed=13))
        r2 = data.columns[0] ** 2 + data.columns[1] ** 2
        inlier = data.labels == 0
        assert np.all(r2[inlier] <= 9.0 + 1e-9)
        assert np.all(r2[~inlier] >= 16.0 - 1e-9)
        assert np.all(r2[~inlier] <= 900.0 + 1e-9)

    def test_deterministic(self):
        a = generate_training(SyntheticSpec(seed=21))
        b = generate_training(SyntheticSpec(seed=21))
        np.testing.assert_array_equal(a.matrix(), b.matrix())
        np.testing.assert_array_equal(a.labels, b.labels)


@pytest.fixture(scope="module")
def families():
    return generate_test_outliers(SyntheticSpec(seed=2))


class TestTestOutliers:
    def test_counts_default_hundred(self, families):
        assert set(families) == {"x-axis", "y-axis", "bisec"}
        assert all(ds.n_rows == 100 for ds in families.values())
        assert all(np.all(ds.labels == 1) for ds in families.values())

    def test_family_geometry_exact(self, families):
        x = families["x-axis"]
        assert np.all(x.columns[1] == 0.0)
        assert np.all((np.abs(x.columns[0]) >= 4.0) & (np.abs(x.columns[0]) <= 30.0))

        y = families["y-axis"]
        assert np.all(y.columns[0] == 0.0)
        assert np.all((np.abs(y.columns[1]) >= 4.0) & (np.abs(y.columns[1]) <= 30.0))

        b = families["bisec"]
        np.testing.assert_array_equal(b.columns[0], b.columns[1])
        radius = np.hypot(b.columns[0], b.columns[1])
        assert np.all((radius >= 4.0 - 1e-9) & (radius <= 30.0 + 1e-9))

    def test_both_diagonal_quadrants_used(self, families):
        signs = np.sign(families["bisec"].columns[0])
        assert (signs > 0).any() and (signs < 0).any()

    def test_zero_count_family_omitted(self):
        families = generate_test_outliers(SyntheticSpec(n_bisec=0))
        assert "bisec" not in families

    def test_csv_round_trip_with_family_column(self, families, tmp_path):
        ds = families["x-axis"]
        out = tmp_path / "fam.csv"
        write_csv(ds, out, extra_columns={"family": ["x-axis"] * ds.n_rows})
        again = load_csv(out, label_column="label", ignore_columns=("family",))
        np.testing.assert_array_equal(again.matrix(), ds.matrix())
