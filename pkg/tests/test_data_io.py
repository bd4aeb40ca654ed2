import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import double_loop_distances
from stad.data_io import (
    DataError,
    DistanceMatrix,
    PointCloud,
    compute_distances,
    load_distance_matrix,
    load_points,
    write_distance_matrix,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadPoints:
    def test_plain_table(self, tmp_path):
        cloud = load_points(write(tmp_path, "0,0\n1,0\n0,1\n"))
        assert (cloud.n, cloud.m) == (3, 2)
        assert cloud.labels is None

    def test_header_and_labels(self, tmp_path):
        text = "name,a,b\nx,0,0\ny,1,0\nz,0,1\n"
        cloud = load_points(write(tmp_path, text), header=True, labels=True)
        assert cloud.m == 2
        assert cloud.labels == ["x", "y", "z"]
        assert cloud.columns == ["a", "b"]
        np.testing.assert_array_equal(cloud.column("b"), [0, 0, 1])

    def test_tab_delimiter(self, tmp_path):
        cloud = load_points(write(tmp_path, "0\t0\n1\t0\n0\t1\n"), delimiter="\t")
        assert cloud.m == 2

    def test_too_few_rows(self, tmp_path):
        with pytest.raises(DataError, match="n < 3"):
            load_points(write(tmp_path, "0,0\n1,0\n"))

    def test_ragged(self, tmp_path):
        with pytest.raises(DataError, match="ragged row 2"):
            load_points(write(tmp_path, "0,0\n1\n0,1\n"))

    def test_parse_error_names_cell(self, tmp_path):
        with pytest.raises(DataError, match="row 3, column 2"):
            load_points(write(tmp_path, "0,0\n1,0\n0,abc\n"))

    def test_missing_cell_rejected(self, tmp_path):
        with pytest.raises(DataError):
            load_points(write(tmp_path, "0,0\n1,\n0,1\n"))

    def test_nan_rejected(self, tmp_path):
        with pytest.raises(DataError, match="non-finite"):
            load_points(write(tmp_path, "0,0\n1,nan\n0,1\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_points(tmp_path / "absent.csv")


class TestLoadDistanceMatrix:
    def test_condensed(self, tmp_path):
        d = load_distance_matrix(write(tmp_path, "0,1,2\n1,0,1\n2,1,0\n"))
        np.testing.assert_array_equal(d.condensed, [1, 2, 1])

    def test_tiny_diagonal_forced_to_zero(self, tmp_path):
        d = load_distance_matrix(write(tmp_path, "1e-12,1,2\n1,0,1\n2,1,0\n"))
        assert d[0, 0] == 0.0
        np.testing.assert_array_equal(d.condensed, [1, 2, 1])

    def test_negative(self, tmp_path):
        with pytest.raises(DataError, match="negative distance"):
            load_distance_matrix(write(tmp_path, "0,-0.5,2\n-0.5,0,1\n2,1,0\n"))

    def test_not_square(self, tmp_path):
        with pytest.raises(DataError, match="not square"):
            load_distance_matrix(write(tmp_path, "0,1,2\n1,0,1\n"))

    def test_rounding_asymmetry_is_averaged(self, tmp_path):
        d = load_distance_matrix(write(tmp_path, "0,1,2\n1.0000000000001,0,1\n2,1,0\n"))
        assert d[0, 1] == pytest.approx(1.00000000000005, abs=1e-15)

    def test_real_asymmetry(self, tmp_path):
        with pytest.raises(DataError, match="asymmetric"):
            load_distance_matrix(write(tmp_path, "0,1,2\n1.1,0,1\n2,1,0\n"))


class TestComputeDistances:
    def test_euclidean_345(self):
        d = compute_distances(PointCloud([[0, 0], [3, 4], [6, 8]]))
        assert d[0, 1] == 5.0

    def test_manhattan(self):
        d = compute_distances(PointCloud([[0, 0], [3, 4], [6, 8]]), "manhattan")
        assert d[0, 1] == 7.0

    def test_cosine_zero_row(self):
        with pytest.raises(DataError, match="zero-norm"):
            compute_distances(PointCloud([[0, 0], [3, 4], [6, 8]]), "cosine")

    @pytest.mark.parametrize("metric", ["euclidean", "manhattan"])
    def test_matches_double_loop_exactly(self, metric, rng):
        pts = rng.normal(size=(10, 4))
        d = compute_distances(PointCloud(pts), metric)
        np.testing.assert_array_equal(d.condensed, double_loop_distances(pts.tolist(), metric))

    def test_cosine_matches_double_loop(self, rng):
        # cosine is computed in a different operation order; agree to an ulp
        pts = rng.normal(size=(10, 4))
        d = compute_distances(PointCloud(pts), "cosine")
        np.testing.assert_allclose(d.condensed, double_loop_distances(pts.tolist(), "cosine"), rtol=0, atol=1e-15)

    def test_symmetric_access(self, rng):
        d = compute_distances(PointCloud(rng.normal(size=(6, 3))))
        sq = d.square()
        np.testing.assert_array_equal(sq, sq.T)
        for i in range(6):
            for j in range(6):
                assert d[i, j] == d[j, i] == sq[i, j]


cloud_arrays = arrays(
    np.float64,
    st.tuples(st.integers(3, 8), st.integers(1, 4)),
    elements=st.floats(-100, 100, allow_nan=False, allow_infinity=False),
)


@given(cloud_arrays, st.sampled_from(["euclidean", "manhattan"]))
def test_triangle_inequality(pts, metric):
    sq = compute_distances(PointCloud(pts), metric).square()
    n = sq.shape[0]
    for i in range(n):
        for j in range(n):
            assert np.all(sq[i, j] <= sq[i, :] + sq[:, j] + 1e-9)


@given(cloud_arrays)
def test_write_read_round_trip(tmp_path_factory, pts):
    d = compute_distances(PointCloud(pts))
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_distance_matrix(d, path)
    back = load_distance_matrix(path)
    np.testing.assert_allclose(back.condensed, d.condensed, rtol=0, atol=1e-12)


def test_condensed_length_checked():
    with pytest.raises(DataError):
        DistanceMatrix(4, np.ones(5))
