"""Seeded generators for multi-index regression models.

Predictors are always i.i.d. standard p-variate normal and the noise is
independent N(0, sigma^2); streams come from numpy's PCG64 generator so a
(seed, spec) pair reproduces the dataset bit for bit on any platform.  The
link catalog is closed: simulations stay reproducible artifacts, this is not
a modeling framework.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import Dataset

MODELS = ("cosine_index", "quadratic_first", "linear_index", "custom_index")

#: Closed catalog of link functions for custom_index specs.  Each maps the
#: n x K index matrix B'X to the noiseless response.
LINK_CATALOG = {
    "cosine": lambda t: np.cos(2.0 * t[:, 0] - math.pi / 4.0),
    "linear": lambda t: t.sum(axis=1),
    "quadratic": lambda t: t[:, 0] ** 2,
    "product": lambda t: t[:, 0] * t[:, -1],
    "sum_squares": lambda t: (t**2).sum(axis=1),
}


@dataclass(frozen=True)
class SimSpec:
    """One reproducible simulation: model family, sizes, parameters, seed."""

    model: str
    n: int
    p: int
    seed: int
    sigma: float = 1.0
    beta: np.ndarray | None = None
    link: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        beta = self.beta
        if beta is None:
            if self.model == "custom_index":
                raise ValueError("custom_index needs an explicit p x K beta matrix")
            beta = np.zeros(self.p)
            beta[0] = 1.0
        beta = np.asarray(beta, dtype=float)
        if self.model == "custom_index":
            if beta.ndim != 2 or beta.shape[0] != self.p or beta.shape[1] < 1:
                raise ValueError(f"beta must be p x K for custom_index, got {beta.shape}")
            if self.link not in LINK_CATALOG:
                raise ValueError(
                    f"link must be one of {sorted(LINK_CATALOG)}, got {self.link!r}"
                )
        else:
            if beta.shape != (self.p,):
                raise ValueError(f"beta must be a length-p vector, got shape {beta.shape}")
            if self.model == "cosine_index" and abs(np.linalg.norm(beta) - 1.0) > 1e-10:
                raise ValueError("the cosine model requires a unit-norm beta")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


def _noiseless(spec: SimSpec, x: np.ndarray) -> np.ndarray:
    if spec.model == "cosine_index":
        return np.cos(2.0 * (x @ spec.beta) - math.pi / 4.0)
    if spec.model == "quadratic_first":
        return x[:, 0] ** 2
    if spec.model == "linear_index":
        return x @ spec.beta
    return LINK_CATALOG[spec.link](x @ spec.beta)


def simulate(spec: SimSpec) -> Dataset:
    """Draw a dataset from the spec.  Same (seed, spec) gives identical bytes."""
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal((spec.n, spec.p))
    y = _noiseless(spec, x)
    if spec.sigma > 0:
        y = y + spec.sigma * rng.standard_normal(spec.n)
    names = tuple(f"x{i + 1}" for i in range(spec.p))
    return Dataset(y=y, x=x, names=names)


@dataclass(frozen=True)
class McConstants:
    """Monte Carlo estimates of the cosine-model constants with plug-in
    standard errors (sd of the per-sample terms over sqrt(n))."""

    n_mc: int
    mu_y: float
    se_mu_y: float
    cov_zy: float
    se_cov_zy: float
    lambda1: float
    se_lambda1: float


def mc_constants(spec: SimSpec, n_mc: int) -> McConstants:
    """Estimate E(Y), cov(beta'X, Y) and E[(Y - mu_y)(beta'X)^2] for the
    cosine model by direct sampling of the scalar index Z = beta'X ~ N(0,1).

    The three targets depend on (Z, Y) only, so sampling Z instead of the
    full predictor vector is exact and keeps 1e7-sample runs cheap.
    """
    if spec.model != "cosine_index":
        raise ValueError("mc_constants is defined for the cosine model only")
    if n_mc < 2:
        raise ValueError("n_mc must be at least 2")
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal(n_mc)
    y = np.cos(2.0 * z - math.pi / 4.0)
    if spec.sigma > 0:
        y = y + spec.sigma * rng.standard_normal(n_mc)

    ybar = float(y.mean())
    se_mu = float(y.std(ddof=1) / math.sqrt(n_mc))

    cov_terms = (z - z.mean()) * (y - ybar)
    cov_hat = float(cov_terms.mean())
    se_cov = float(cov_terms.std(ddof=1) / math.sqrt(n_mc))

    lam_terms = (y - ybar) * z**2
    lam_hat = float(lam_terms.mean())
    se_lam = float(lam_terms.std(ddof=1) / math.sqrt(n_mc))

    return McConstants(
        n_mc=n_mc,
        mu_y=ybar,
        se_mu_y=se_mu,
        cov_zy=cov_hat,
        se_cov_zy=se_cov,
        lambda1=lam_hat,
        se_lambda1=se_lam,
    )
