import numpy as np
import pytest

from phdinfluence import SimSpec, cosine_model_constants, mc_constants, simulate
from phdinfluence.moments import Dataset, compute_moments


def test_noiseless_cosine_is_deterministic_in_x():
    beta = np.array([0.6, 0.8, 0.0])
    spec = SimSpec(model="cosine_index", n=500, p=3, seed=42, sigma=0.0, beta=beta)
    d = simulate(spec)
    assert np.array_equal(d.y, np.cos(2.0 * d.x @ beta - np.pi / 4))


def test_linear_model_ols_recovery():
    beta = np.array([1.0, -0.5, 2.0, 0.0])
    spec = SimSpec(model="linear_index", n=10_000, p=4, seed=5, sigma=1.0, beta=beta)
    d = simulate(spec)
    m = compute_moments(d)
    beta_hat = m.s_inv @ m.s_xy
    assert np.linalg.norm(beta_hat - beta) <= 5.0 / np.sqrt(d.n)


def test_quadratic_first_has_null_response_covariance():
    spec = SimSpec(model="quadratic_first", n=100_000, p=3, seed=9)
    d = simulate(spec)
    m = compute_moments(d)
    assert np.linalg.norm(m.s_xy) <= 0.02


def test_custom_index_link():
    beta = np.column_stack([np.eye(4)[:, 0], np.eye(4)[:, 1]])
    spec = SimSpec(model="custom_index", n=100, p=4, seed=1, sigma=0.0,
                   beta=beta, link="product")
    d = simulate(spec)
    assert np.array_equal(d.y, d.x[:, 0] * d.x[:, 1])


def test_same_seed_same_bytes():
    spec = SimSpec(model="cosine_index", n=200, p=3, seed=123, sigma=0.7)
    a, b = simulate(spec), simulate(spec)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.y.tobytes() == b.y.tobytes()
    other = simulate(SimSpec(model="cosine_index", n=200, p=3, seed=124, sigma=0.7))
    assert a.x.tobytes() != other.x.tobytes()


def test_predictors_look_standard_normal():
    spec = SimSpec(model="cosine_index", n=20_000, p=4, seed=31, sigma=0.0)
    d = simulate(spec)
    root_n = np.sqrt(d.n)
    assert np.abs(d.x.mean(axis=0)).max() <= 4.0 / root_n
    cov = np.cov(d.x, rowvar=False)
    assert np.abs(cov - np.eye(4)).max() <= 5.0 / root_n


def test_spec_validation():
    with pytest.raises(ValueError):
        SimSpec(model="nope", n=10, p=2, seed=0)
    with pytest.raises(ValueError):
        SimSpec(model="cosine_index", n=10, p=2, seed=0,
                beta=np.array([1.0, 1.0]))  # not unit norm
    with pytest.raises(ValueError):
        SimSpec(model="custom_index", n=10, p=2, seed=0,
                beta=np.eye(2), link="nope")


def test_returns_dataset_type():
    d = simulate(SimSpec(model="cosine_index", n=50, p=3, seed=2, sigma=0.1))
    assert isinstance(d, Dataset)
    assert d.names == ("x1", "x2", "x3")


# ----------------------------------------------------------------------
# the Monte Carlo validator of the analytic constants
# ----------------------------------------------------------------------

def test_mc_constants_hit_their_targets():
    mu_y, cov_zy, lam1 = cosine_model_constants()
    spec = SimSpec(model="cosine_index", n=1, p=2, seed=7, sigma=0.0)
    est = mc_constants(spec, 1_000_000)
    assert abs(est.mu_y - mu_y) <= 3 * est.se_mu_y
    assert abs(est.cov_zy - cov_zy) <= 3 * est.se_cov_zy
    assert abs(est.lambda1 - lam1) <= 3 * est.se_lambda1
    # the estimate must discriminate the true eigenvalue from the
    # factor-two-off value
    assert abs(est.lambda1 - (-cov_zy)) > 3 * est.se_lambda1


def test_mc_constants_insensitive_to_noise_level():
    spec0 = SimSpec(model="cosine_index", n=1, p=2, seed=15, sigma=0.0)
    spec1 = SimSpec(model="cosine_index", n=1, p=2, seed=16, sigma=1.0)
    a = mc_constants(spec0, 400_000)
    b = mc_constants(spec1, 400_000)
    for field in ("mu_y", "cov_zy", "lambda1"):
        va, vb = getattr(a, field), getattr(b, field)
        se = np.hypot(getattr(a, "se_" + field), getattr(b, "se_" + field))
        assert abs(va - vb) <= 3 * se


def test_mc_constants_needs_cosine_model():
    with pytest.raises(ValueError):
        mc_constants(SimSpec(model="linear_index", n=1, p=2, seed=0), 100)
