"""Closed-form population influence of contamination on PHD directions.

The central quantity is the rate at which the sine of the angle between a
perturbed direction estimate and the true reduction subspace grows when the
sampling distribution is mixed with a point mass eps at (y0, x0).  For the
k-th direction of either PHD variant it has the closed form

    RIS_k = || (I - P) Sigma^{-1/2} alpha_k || / |lambda_k|,    P = Gamma Gamma'

with, writing z0 = Sigma^{-1/2}(x0 - mu) and r0 for the population OLS
residual of (y0, x0),

    alpha_{y,k} = { (y0 - mu_y) g_k' Sigma^{-1/2} z0 - lambda_k g_k' Sigma^{1/2} z0
                    - g_k' Sigma^{-1} sigma_xy } z0  -  (y0 - mu_y) Sigma^{-1/2} g_k
    alpha_{r,k} = { r0 g_k' Sigma^{-1/2} z0 - lambda_k g_k' Sigma^{1/2} z0 } z0
                  -  r0 Sigma^{-1/2} g_k .

Two independent routes to the same number are implemented: the alpha displays
above, and the influence matrix of the Hessian estimator

    F_y = H - [Sigma^{-1} d (d' H + sigma_yx Sigma^{-1})] - [...]'
            + (y0 - mu_y) Sigma^{-1} (d d' - Sigma) Sigma^{-1},   d = x0 - mu

(for the r variant drop the sigma_yx terms and weight by r0) followed by
|| (I - P) F g_k || / |lambda_k|.  They agree to rounding and are cross-checked
in the tests.

Everything is additionally validated against a numeric oracle that builds the
EXACT moments of the contaminated mixture at a small finite eps, recomputes
the Hessian eigensystem, and measures the sine directly.  The mixture moments
(no first-order truncation anywhere) are, with dy = y0 - mu_y and
t = eps (1 - eps):

    mu_eps        = (1 - eps) mu + eps x0
    mu_y,eps      = (1 - eps) mu_y + eps y0
    Sigma_eps     = (1 - eps) Sigma + t d d'
    sigma_xy,eps  = (1 - eps) sigma_xy + t dy d
    Sigma_yxx,eps = (1 - eps) Sigma_yxx
                    + t [ dy (1 - 2 eps) d d' - dy Sigma - sigma_xy d' - d sigma_xy' ]

and the residual-weighted matrix re-centers the residual at the contaminated
OLS solution b_eps = Sigma_eps^{-1} sigma_xy,eps:

    Sigma_rxx,eps = Sigma_yxx,eps
                    + t [ (d'b_eps) Sigma + (Sigma b_eps) d' + d (Sigma b_eps)'
                          - (1 - 2 eps) (d'b_eps) d d' ]

where the Gaussian predictor makes all centered third moments of X vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousMatch,
    DegenerateSpectrum,
    InvalidEpsilon,
    UnsupportedModel,
)
from .linalg import Basis, mirror, project_out, sine_to_subspace, sym_eigen, sym_inverse, sym_sqrt, inv_sqrt, symmetrize
from .phd import check_variant, population_h

SPECTRUM_TOL = 1e-9
MATCH_TOL = 1e-8
DEFAULT_ORACLE_EPS = 1e-6


@dataclass(frozen=True)
class PopulationModel:
    """Exact model parameters at which the closed forms are evaluated.

    ``gamma`` spans the reduction subspace, ``lam`` holds the K nonzero
    Hessian eigenvalues ordered by descending magnitude.  The OLS direction
    Sigma^{-1} sigma_xy must lie inside span(gamma): that membership is what
    makes the r-based residual blind to contamination orthogonal to the
    subspace.
    """

    mu: np.ndarray
    sigma: np.ndarray
    gamma: Basis
    lam: np.ndarray
    mu_y: float
    sigma_xy: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        sigma_xy = np.asarray(self.sigma_xy, dtype=float)
        sigma = symmetrize(self.sigma)
        p, k = self.gamma.dim, self.gamma.rank
        if mu.shape != (p,) or sigma_xy.shape != (p,):
            raise ValueError("mu and sigma_xy must be length-p vectors")
        if sigma.shape != (p, p):
            raise ValueError("sigma must be p x p")
        if lam.shape != (k,):
            raise ValueError("lam must have one eigenvalue per basis column")
        if np.any(np.abs(lam) <= 0.0):
            raise ValueError("all reduction eigenvalues must be nonzero")
        if np.any(np.diff(np.abs(lam)) > 0):
            raise ValueError("eigenvalues must be ordered by descending magnitude")
        for i in range(k):
            for j in range(i + 1, k):
                if abs(lam[i] - lam[j]) < SPECTRUM_TOL:
                    raise DegenerateSpectrum(
                        f"eigenvalues {i + 1} and {j + 1} coincide "
                        f"({lam[i]!r} vs {lam[j]!r}); the eigenvector influence "
                        "is undefined for tied spectra"
                    )
        sigma_inv = sym_inverse(sigma)
        beta = sigma_inv @ sigma_xy
        leak = float(np.abs(project_out(self.gamma, beta)).max())
        if leak > 1e-10 * (1.0 + float(np.abs(beta).max())):
            raise ValueError(
                "the OLS direction Sigma^{-1} sigma_xy must lie in span(gamma); "
                f"residual component {leak:.3e}"
            )
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma_xy", sigma_xy)
        object.__setattr__(self, "_sigma_inv", sigma_inv)
        object.__setattr__(self, "_sigma_inv_sqrt", inv_sqrt(sigma))
        object.__setattr__(self, "_sigma_sqrt", sym_sqrt(sigma))
        object.__setattr__(self, "_beta", beta)

    @property
    def p(self) -> int:
        return self.gamma.dim

    @property
    def k(self) -> int:
        return self.gamma.rank

    @property
    def sigma_inv(self) -> np.ndarray:
        return self._sigma_inv

    @property
    def sigma_inv_sqrt(self) -> np.ndarray:
        return self._sigma_inv_sqrt

    @property
    def sigma_sqrt(self) -> np.ndarray:
        return self._sigma_sqrt

    @property
    def beta(self) -> np.ndarray:
        """Population OLS slope Sigma^{-1} sigma_xy."""
        return self._beta


@dataclass(frozen=True)
class ContaminationPoint:
    """The location (y0, x0) of the contaminating point mass."""

    y0: float
    x0: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        if x0.ndim != 1:
            raise ValueError(f"x0 must be a vector, got shape {x0.shape}")
        if not (math.isfinite(self.y0) and np.all(np.isfinite(x0))):
            raise ValueError("contamination point must be finite")
        object.__setattr__(self, "x0", x0)


@dataclass(frozen=True)
class RisValue:
    variant: str
    k: int
    value: float


def _direction_index(model: PopulationModel, k: int) -> int:
    """Directions are indexed 1..K as in the math."""
    if not 1 <= k <= model.k:
        raise IndexError(f"direction index must satisfy 1 <= k <= {model.k}, got {k}")
    return k - 1


def population_ols_residual(model: PopulationModel, pt: ContaminationPoint) -> float:
    """OLS residual of (y0, x0) under the population regression of Y on X."""
    return float(pt.y0 - model.mu_y - (pt.x0 - model.mu) @ model.beta)


def ris_y(model: PopulationModel, pt: ContaminationPoint, k: int) -> RisValue:
    """Closed-form influence rate on the k-th y-based direction (k is 1-based)."""
    i = _direction_index(model, k)
    g = model.gamma.columns[:, i]
    lam_k = float(model.lam[i])
    dy = pt.y0 - model.mu_y
    z0 = model.sigma_inv_sqrt @ (pt.x0 - model.mu)
    scal = (
        dy * float(g @ (model.sigma_inv_sqrt @ z0))
        - lam_k * float(g @ (model.sigma_sqrt @ z0))
        - float(g @ model.beta)
    )
    alpha = scal * z0 - dy * (model.sigma_inv_sqrt @ g)
    resid = project_out(model.gamma, model.sigma_inv_sqrt @ alpha)
    return RisValue("y", k, float(np.linalg.norm(resid)) / abs(lam_k))


def ris_r(
    model: PopulationModel,
    pt: ContaminationPoint,
    k: int,
    residual: float | None = None,
) -> RisValue:
    """Closed-form influence rate on the k-th r-based direction (k is 1-based).

    ``residual`` overrides the population OLS residual of (y0, x0); the sample
    plug-in diagnostics pass the fitted residual of the observation here.
    """
    i = _direction_index(model, k)
    g = model.gamma.columns[:, i]
    lam_k = float(model.lam[i])
    r0 = population_ols_residual(model, pt) if residual is None else float(residual)
    z0 = model.sigma_inv_sqrt @ (pt.x0 - model.mu)
    scal = r0 * float(g @ (model.sigma_inv_sqrt @ z0)) - lam_k * float(
        g @ (model.sigma_sqrt @ z0)
    )
    alpha = scal * z0 - r0 * (model.sigma_inv_sqrt @ g)
    resid = project_out(model.gamma, model.sigma_inv_sqrt @ alpha)
    return RisValue("r", k, float(np.linalg.norm(resid)) / abs(lam_k))


def if_h_y(model: PopulationModel, pt: ContaminationPoint) -> np.ndarray:
    """Influence matrix of the y-based Hessian estimator (the product-rule
    expansion of the sandwich), evaluated literally."""
    h = population_h(model)
    d = pt.x0 - model.mu
    dy = pt.y0 - model.mu_y
    si = model.sigma_inv
    bracket = np.outer(si @ d, d @ h + model.sigma_xy @ si)
    tail = dy * si @ (np.outer(d, d) - model.sigma) @ si
    return h - bracket - bracket.T + tail


def if_h_r(
    model: PopulationModel,
    pt: ContaminationPoint,
    residual: float | None = None,
) -> np.ndarray:
    """Influence matrix of the r-based Hessian estimator.  Identical shape to
    the y-based one with the covariance-with-Y terms absent and the OLS
    residual replacing the centered response."""
    h = population_h(model)
    d = pt.x0 - model.mu
    r0 = population_ols_residual(model, pt) if residual is None else float(residual)
    si = model.sigma_inv
    bracket = np.outer(si @ d, d @ h)
    tail = r0 * si @ (np.outer(d, d) - model.sigma) @ si
    return h - bracket - bracket.T + tail


def ris_from_if_matrix(model: PopulationModel, f: np.ndarray, k: int) -> float:
    """|| (I - P) F g_k || / |lambda_k| for an influence matrix F."""
    i = _direction_index(model, k)
    g = model.gamma.columns[:, i]
    resid = project_out(model.gamma, f @ g)
    return float(np.linalg.norm(resid)) / abs(float(model.lam[i]))


@dataclass(frozen=True)
class ContaminatedMoments:
    """Exact moments of the eps-mixture of the model and a point mass."""

    eps: float
    mu_eps: np.ndarray
    sigma_eps: np.ndarray
    sigma_yxx_eps: np.ndarray
    sigma_rxx_eps: np.ndarray
    mu_y_eps: float
    sigma_xy_eps: np.ndarray


def contaminated_moments(
    model: PopulationModel, pt: ContaminationPoint, eps: float
) -> ContaminatedMoments:
    """Exact (not first-order) moments of (1 - eps) G + eps point mass."""
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"eps must lie strictly in (0, 1), got {eps!r}")
    d = pt.x0 - model.mu
    dy = pt.y0 - model.mu_y
    t = eps * (1.0 - eps)
    ddt = np.outer(d, d)
    sigma_yxx = mirror(model.sigma @ population_h(model) @ model.sigma)

    mu_eps = (1.0 - eps) * model.mu + eps * pt.x0
    mu_y_eps = (1.0 - eps) * model.mu_y + eps * pt.y0
    sigma_eps = mirror((1.0 - eps) * model.sigma + t * ddt)
    sigma_xy_eps = (1.0 - eps) * model.sigma_xy + t * dy * d
    sigma_yxx_eps = mirror(
        (1.0 - eps) * sigma_yxx
        + t
        * (
            dy * (1.0 - 2.0 * eps) * ddt
            - dy * model.sigma
            - np.outer(model.sigma_xy, d)
            - np.outer(d, model.sigma_xy)
        )
    )
    beta_eps = np.linalg.solve(sigma_eps, sigma_xy_eps)
    sb = model.sigma @ beta_eps
    db = float(d @ beta_eps)
    sigma_rxx_eps = mirror(
        sigma_yxx_eps
        + t
        * (
            db * model.sigma
            + np.outer(sb, d)
            + np.outer(d, sb)
            - (1.0 - 2.0 * eps) * db * ddt
        )
    )
    return ContaminatedMoments(
        eps=eps,
        mu_eps=mu_eps,
        sigma_eps=sigma_eps,
        sigma_yxx_eps=sigma_yxx_eps,
        sigma_rxx_eps=sigma_rxx_eps,
        mu_y_eps=mu_y_eps,
        sigma_xy_eps=sigma_xy_eps,
    )


def ris_numeric_oracle(
    model: PopulationModel,
    pt: ContaminationPoint,
    k: int,
    variant: str,
    eps: float = DEFAULT_ORACLE_EPS,
) -> float:
    """Finite-eps influence rate measured directly on the contaminated model.

    Builds the exact mixture moments, recomputes the Hessian eigensystem,
    matches the perturbed eigenvector to the k-th direction by maximal
    absolute inner product (eigenvalue order may swap near ties, the
    eigenvector moves continuously), and returns sine / eps.
    """
    check_variant(variant)
    i = _direction_index(model, k)
    cm = contaminated_moments(model, pt, eps)
    mat = cm.sigma_yxx_eps if variant == "y" else cm.sigma_rxx_eps
    sig_inv_eps = sym_inverse(cm.sigma_eps)
    h_eps = mirror(sig_inv_eps @ mat @ sig_inv_eps)
    eig = sym_eigen(h_eps)
    inner = np.abs(eig.vectors.T @ model.gamma.columns[:, i])
    order = np.argsort(inner)[::-1]
    if len(order) > 1 and inner[order[0]] - inner[order[1]] < MATCH_TOL:
        raise AmbiguousMatch(
            "cannot match the perturbed eigenvector: two candidates have "
            f"|inner product| within {MATCH_TOL} of each other "
            f"({inner[order[0]]:.12f} vs {inner[order[1]]:.12f})"
        )
    matched = eig.vectors[:, order[0]]
    return sine_to_subspace(matched, model.gamma) / eps


# ----------------------------------------------------------------------
# The cosine single-index example and its influence surface
# ----------------------------------------------------------------------

#: E(Y), the coefficient of beta_1 in cov(X, Y), and the nonzero Hessian
#: eigenvalue of the model Y = cos(2 beta_1'X - pi/4) + sigma eps with
#: standard normal X.  Derived via the moment generating function; the
#: eigenvalue equals E[f''(Z)] = -4 E(Y) = -2 sqrt(2) exp(-2) by Stein's
#: identity.  Dropping a factor of two here yields the tempting near miss
#: -sqrt(2) exp(-2) = -cov(Z, Y), so the Monte Carlo validator checks its
#: estimate against the true value AND against that near miss.
COSINE_MODEL_MU_Y = math.exp(-2.0) / math.sqrt(2.0)
COSINE_MODEL_SIGMA_XY_COEF = math.sqrt(2.0) * math.exp(-2.0)
COSINE_MODEL_LAMBDA1 = -2.0 * math.sqrt(2.0) * math.exp(-2.0)


def cosine_model_constants() -> tuple[float, float, float]:
    """(mu_y, sigma_xy coefficient, lambda_1) of the cosine single-index model."""
    return (COSINE_MODEL_MU_Y, COSINE_MODEL_SIGMA_XY_COEF, COSINE_MODEL_LAMBDA1)


def cosine_model(p: int = 3, beta1: np.ndarray | None = None) -> PopulationModel:
    """The cosine single-index population model on standard normal predictors."""
    if p < 2:
        raise UnsupportedModel("the cosine example needs p >= 2")
    if beta1 is None:
        beta1 = np.zeros(p)
        beta1[0] = 1.0
    beta1 = np.asarray(beta1, dtype=float)
    if beta1.shape != (p,) or abs(np.linalg.norm(beta1) - 1.0) > 1e-10:
        raise UnsupportedModel("beta1 must be a unit p-vector")
    return PopulationModel(
        mu=np.zeros(p),
        sigma=np.eye(p),
        gamma=Basis(beta1[:, None]),
        lam=np.array([COSINE_MODEL_LAMBDA1]),
        mu_y=COSINE_MODEL_MU_Y,
        sigma_xy=COSINE_MODEL_SIGMA_XY_COEF * beta1,
    )


def _unit_perpendicular(beta1: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to beta1."""
    e = np.zeros_like(beta1)
    e[int(np.argmin(np.abs(beta1)))] = 1.0
    u = e - beta1 * float(beta1 @ e)
    return u / np.linalg.norm(u)


def _check_surface_model(model: PopulationModel) -> np.ndarray:
    if model.k != 1:
        raise UnsupportedModel("the influence surface needs a rank-1 model")
    if model.p < 2:
        raise UnsupportedModel("the influence surface needs p >= 2")
    if float(np.abs(model.mu).max()) > 1e-12:
        raise UnsupportedModel("the influence surface needs mu = 0")
    if float(np.abs(model.sigma - np.eye(model.p)).max()) > 1e-12:
        raise UnsupportedModel("the influence surface needs identity covariance")
    return model.gamma.columns[:, 0]


def influence_surface(
    model: PopulationModel,
    variant: str,
    norm_grid,
    costheta_grid,
) -> np.ndarray:
    """Influence surface over (||x0||, cos theta0) for the cosine model.

    x0 = ||x0|| (cos(theta0) beta_1 + sin(theta0) u) for a fixed unit u
    orthogonal to beta_1, with y0 on the noiseless curve.  Every cell is
    evaluated through the general closed form AND through the single-index
    shortcut (the c_y / c_r factorisation); the two must agree to 1e-9.
    """
    check_variant(variant)
    beta1 = _check_surface_model(model)
    u = _unit_perpendicular(beta1)
    norms = np.asarray(list(norm_grid), dtype=float)
    costhetas = np.asarray(list(costheta_grid), dtype=float)
    if np.any(np.abs(costhetas) > 1.0):
        raise ValueError("cos(theta0) grid must lie in [-1, 1]")
    mu_y = model.mu_y
    lam1 = float(model.lam[0])
    bxy = float(beta1 @ model.sigma_xy)

    out = np.empty((norms.size, costhetas.size))
    for a, nrm in enumerate(norms):
        for b, ct in enumerate(costhetas):
            st = math.sqrt(max(0.0, 1.0 - ct * ct))
            x0 = nrm * (ct * beta1 + st * u)
            y0 = math.cos(2.0 * nrm * ct - math.pi / 4.0)
            pt = ContaminationPoint(y0=y0, x0=x0)
            if variant == "y":
                val = ris_y(model, pt, 1).value
                c = abs(((y0 - mu_y) * nrm * ct - lam1 * nrm * ct - bxy) / lam1)
            else:
                val = ris_r(model, pt, 1).value
                c = abs(((y0 - mu_y - bxy * nrm * ct) * nrm * ct - lam1 * nrm * ct) / lam1)
            shortcut = c * nrm * st
            if abs(val - shortcut) > 1e-9:
                raise AssertionError(
                    "general and shortcut influence disagree at "
                    f"(||x0||={nrm}, cos={ct}): {val!r} vs {shortcut!r}"
                )
            out[a, b] = val
    return out


def write_surface_csv(path, norm_grid, costheta_grid, ris_y_grid, ris_r_grid) -> None:
    """Serialize the two influence surfaces to CSV in row-major grid order."""
    norms = np.asarray(list(norm_grid), dtype=float)
    costhetas = np.asarray(list(costheta_grid), dtype=float)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("norm_x0,cos_theta0,ris_y,ris_r\n")
        for a in range(norms.size):
            for b in range(costhetas.size):
                fh.write(
                    f"{norms[a]:.17g},{costhetas[b]:.17g},"
                    f"{ris_y_grid[a, b]:.17g},{ris_r_grid[a, b]:.17g}\n"
                )
