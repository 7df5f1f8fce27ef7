import numpy as np
import pytest

from phdinfluence import (
    Basis,
    Dataset,
    PopulationModel,
    compute_moments,
    fit_phd,
    population_h,
    sine_to_subspace,
    sym_eigen,
)
from phdinfluence.errors import InvalidRank
from phdinfluence.population import COSINE_MODEL_LAMBDA1, cosine_model
from phdinfluence.simulate import SimSpec, simulate
from conftest import random_orthonormal


def test_population_h_rank_one():
    model = cosine_model(p=3)
    h = population_h(model)
    expected = np.zeros((3, 3))
    expected[0, 0] = COSINE_MODEL_LAMBDA1
    assert np.allclose(h, expected)


def test_population_h_eigen_round_trip(rng):
    gamma = random_orthonormal(rng, 5, 2)
    lam = np.array([2.0, -1.0])
    model = PopulationModel(
        mu=np.zeros(5),
        sigma=np.eye(5),
        gamma=Basis(gamma),
        lam=lam,
        mu_y=0.0,
        sigma_xy=np.zeros(5),
    )
    es = sym_eigen(population_h(model))
    assert np.allclose(es.values[:2], lam, atol=1e-10)
    assert np.abs(es.values[2:]).max() <= 1e-10
    for k in range(2):
        assert sine_to_subspace(es.vectors[:, k], model.gamma) <= 1e-10


def test_fit_structure_and_sandwich(rng):
    x = rng.standard_normal((200, 4))
    y = x[:, 0] ** 2 + 0.3 * rng.standard_normal(200)
    d = Dataset(y=y, x=x)
    m = compute_moments(d)
    fit = fit_phd(d, "y", 2, moments=m)
    assert np.array_equal(fit.h, fit.h.T)
    assert np.abs(fit.h - m.s_inv @ m.sigma_yxx_hat @ m.s_inv).max() <= 1e-10
    assert np.array_equal(fit.gamma_hat.columns, fit.eig.vectors[:, :2])
    assert np.array_equal(fit.lambda_hat, fit.eig.values[:2])
    assert len(fit.eig.values) == 4  # full spectrum retained
    fit_r = fit_phd(d, "r", 2, moments=m)
    assert np.abs(fit_r.h - m.s_inv @ m.sigma_rxx_hat @ m.s_inv).max() <= 1e-10


def test_fit_rejects_bad_rank(rng):
    x = rng.standard_normal((30, 3))
    d = Dataset(y=rng.standard_normal(30), x=x)
    with pytest.raises(InvalidRank):
        fit_phd(d, "y", 4)
    with pytest.raises(InvalidRank):
        fit_phd(d, "y", 0)


def test_independent_response_gives_null_spectrum():
    spec = SimSpec(model="linear_index", n=100_000, p=3, seed=77, sigma=1.0,
                   beta=np.zeros(3))
    d = simulate(spec)  # y is pure noise, independent of x
    fit = fit_phd(d, "y", 1)
    assert np.abs(fit.eig.values).max() <= 0.05 * d.y.std()


@pytest.mark.parametrize("variant", ["y", "r"])
def test_cosine_model_recovers_eigenvalue_and_direction(variant):
    spec = SimSpec(model="cosine_index", n=1_000_000, p=3, seed=11, sigma=0.5)
    d = simulate(spec)
    fit = fit_phd(d, variant, 1)
    assert fit.lambda_hat[0] == pytest.approx(COSINE_MODEL_LAMBDA1, abs=0.01)
    beta1 = np.array([1.0, 0.0, 0.0])
    gap = sine_to_subspace(beta1, fit.gamma_hat)
    assert gap <= 0.02


def test_projector_invariant_to_sign_flips(rng):
    x = rng.standard_normal((120, 3))
    y = np.cos(2 * x[:, 0] - np.pi / 4) + 0.2 * rng.standard_normal(120)
    fit = fit_phd(Dataset(y=y, x=x), "y", 2)
    flipped = fit.gamma_hat.columns.copy()
    flipped[:, 0] = -flipped[:, 0]
    p_flipped = flipped @ flipped.T
    assert np.abs(p_flipped - fit.p_hat).max() <= 1e-12
    assert np.array_equal(np.abs(fit.lambda_hat), np.abs(fit.eig.values[:2]))


def test_variants_converge_to_the_same_matrix():
    meds = []
    for n in (1_000, 10_000, 100_000):
        gaps = []
        for seed in range(10):
            d = simulate(SimSpec(model="cosine_index", n=n, p=3, seed=seed, sigma=0.5))
            m = compute_moments(d)
            fit_y = fit_phd(d, "y", 1, moments=m)
            fit_r = fit_phd(d, "r", 1, moments=m)
            gaps.append(np.abs(fit_y.h - fit_r.h).max())
        meds.append(np.median(gaps))
    assert meds[0] > meds[1] > meds[2]


def test_residual_variant_resists_added_linear_trend():
    dist_y, dist_r = [], []
    for seed in range(8):
        d = simulate(SimSpec(model="cosine_index", n=2_000, p=3, seed=300 + seed,
                             sigma=0.2))
        trend = 2.0 * d.x[:, 0]
        d_mod = Dataset(y=d.y + trend, x=d.x)
        for variant, acc in (("y", dist_y), ("r", dist_r)):
            base = fit_phd(d, variant, 1)
            mod = fit_phd(d_mod, variant, 1)
            acc.append(sine_to_subspace(mod.gamma_hat.columns[:, 0], base.gamma_hat))
    assert np.median(dist_r) < np.median(dist_y)
