import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbamkit.coalition import Coalition
from rbamkit.distributions import (
    Dataset,
    Empirical,
    Gaussian,
    GaussianSpec,
    PointMass,
    ProductOfMarginals,
    UniformBox,
    enumerate_support,
    gaussian_conditional,
    load_csv,
    sample,
)


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_two_by_two(tmp_path):
    ds = load_csv(write(tmp_path, "x1,x2\n1,1\n-1,-1\n"), has_label=False)
    assert ds.d == 2 and ds.n == 2
    assert ds.X.tolist() == [[1.0, 1.0], [-1.0, -1.0]]


def test_load_csv_rejects_noncontiguous_names(tmp_path):
    with pytest.raises(ValueError, match="non-contiguous"):
        load_csv(write(tmp_path, "x1,x3\n1,2\n"), has_label=False)


def test_load_csv_with_labels(tmp_path):
    ds = load_csv(write(tmp_path, "x1,x2,y\n1,2,3\n4,5,6\n"), has_label=True)
    assert ds.y.tolist() == [3.0, 6.0]
    assert ds.require_labels() is ds.y


@pytest.mark.parametrize(
    "text",
    ["x1,x2\n1,2\n3\n", "x1,x2\n1,a\n", "", "1,2\n3,4\n", "x1,x2\n"],
)
def test_load_csv_errors(tmp_path, text):
    with pytest.raises(ValueError):
        load_csv(write(tmp_path, text), has_label=False)


def test_sample_point_mass_and_single_row():
    z = [1.5, -2.0]
    assert np.array_equal(sample(PointMass(z), 5, seed=3), np.tile(z, (5, 1)))
    one = Dataset([[4.0, 5.0]])
    assert np.array_equal(sample(Empirical(one), 4, seed=0), np.tile([4.0, 5.0], (4, 1)))


def test_gaussian_sample_mean_within_clt_bound():
    rows = sample(Gaussian(GaussianSpec([0, 0], np.eye(2))), 100_000, seed=7)
    assert np.all(np.abs(rows.mean(axis=0)) < 0.02)


@pytest.mark.parametrize(
    "dist",
    [
        Empirical(Dataset([[1, 2], [3, 4], [5, 6]])),
        ProductOfMarginals(Dataset([[1, 2], [3, 4], [5, 6]])),
        UniformBox(((0, 1), (-1, 1))),
        Gaussian(GaussianSpec.bivariate(0.3)),
    ],
)
def test_sample_is_bitwise_deterministic(dist):
    assert np.array_equal(sample(dist, 64, seed=11), sample(dist, 64, seed=11))
    assert not np.array_equal(sample(dist, 64, seed=11), sample(dist, 64, seed=12))


def test_gaussian_sample_rejects_non_psd():
    with pytest.raises(ValueError):
        GaussianSpec([0, 0], [[1, 2], [2, 1]])


def test_conditional_mean_example():
    cond = gaussian_conditional(GaussianSpec.bivariate(0.5), Coalition.of(2, [2]), [1.0])
    assert cond.mean.tolist() == [0.5]
    assert cond.cov[0, 0] == pytest.approx(0.75)


def test_conditioning_on_nothing_returns_spec():
    spec = GaussianSpec.bivariate(0.5)
    assert gaussian_conditional(spec, Coalition.empty(2), []) is spec


def test_independent_coordinates_condition_to_marginal():
    spec = GaussianSpec([1.0, 2.0, 3.0], np.diag([1.0, 2.0, 3.0]))
    cond = gaussian_conditional(spec, Coalition.of(3, [2]), [10.0])
    assert cond.mean.tolist() == [1.0, 3.0]
    assert np.array_equal(cond.cov, np.diag([1.0, 3.0]))


def test_conditioning_on_singular_block_fails():
    spec = GaussianSpec([0, 0, 0], [[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError, match="singular"):
        gaussian_conditional(spec, Coalition.of(3, [1, 2]), [0.0, 0.0])


@settings(max_examples=30)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.data())
def test_conditional_covariance_stays_psd(d, seed, data):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d))
    spec = GaussianSpec(rng.normal(size=d), A @ A.T + 1e-3 * np.eye(d))
    bits = data.draw(st.integers(0, (1 << d) - 1))
    known = Coalition(bits, d)
    cond = gaussian_conditional(spec, known, rng.normal(size=known.size))
    if cond.d:
        assert np.min(np.linalg.eigvalsh(cond.cov)) >= -1e-9


def test_product_of_marginals_keeps_column_multisets():
    X = np.array([[1, 10], [2, 30], [3, 20]], dtype=float)
    ds = Dataset(X)
    # columns already independent permutations of each other
    rows, w = enumerate_support(Empirical(ds))
    n = ds.n
    grid = np.array([[X[i, 0], X[j, 1]] for i in range(n) for j in range(n)])
    for c in range(2):
        emp = sorted(np.repeat(rows[:, c], n))
        prod = sorted(grid[:, c])
        assert emp == prod
