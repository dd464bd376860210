"""Sliced-Wasserstein mixture fitting.

Fits a GMM to data by stochastic gradient descent on the sliced
p-Wasserstein distance between the mixture and the empirical distribution.
Each iteration draws fresh random directions, computes the closed-form 1-D
transport map from the current model slice to the projected data on each
direction, and, holding those maps fixed, takes an RMSProp step on the
analytic gradients of the transported mass, followed by projections back
onto the feasible set (PSD covariances, simplex weights).

The alternation matters: gradients are exact for the objective with the
transport maps frozen, which is what the finite-difference checks verify.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr

from .gmm import (EPS_VAR, Dataset, GmmModel, nll, project_psd,
                  project_simplex)
from .slicing import Direction, _draw_direction_matrix
from .trace import FitTrace

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


class DivergenceError(RuntimeError):
    """Fit produced non-finite values; carries the trace collected so far."""

    def __init__(self, message: str, trace: FitTrace | None = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SwmConfig:
    """Hyperparameters of the sliced-Wasserstein fit."""

    p: float = 2.0          # Wasserstein order
    l: int = 20             # random projections per iteration
    iters: int = 2000       # gradient steps
    quad_points: int = 256  # quadrature nodes per direction
    lr: float = 0.01        # RMSProp learning rate
    gamma: float = 0.9      # moment decay
    kappa: float = 0.9      # velocity momentum
    eps: float = 1e-8       # denominator guard
    eps_var: float = EPS_VAR
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.l < 1 or self.iters < 1 or self.quad_points < 2:
            raise ValueError("l, iters must be >= 1 and quad_points >= 2")
        if self.lr <= 0 or self.eps <= 0 or self.eps_var <= 0:
            raise ValueError("lr, eps, eps_var must be positive")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 <= self.kappa < 1:
            raise ValueError("kappa must lie in [0, 1)")


class GmmGradients(NamedTuple):
    weights: np.ndarray       # (K,)
    means: np.ndarray         # (K, d)
    covariances: np.ndarray   # (K, d, d)


@dataclass
class _Moments:
    m: np.ndarray
    g: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "_Moments":
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))


@dataclass
class OptimizerState:
    """RMSProp accumulators mirroring the model parameter shapes."""

    weights: _Moments
    means: _Moments
    covariances: _Moments
    iteration: int = 0

    @classmethod
    def zeros(cls, k: int, d: int) -> "OptimizerState":
        return cls(_Moments.zeros(k), _Moments.zeros((k, d)), _Moments.zeros((k, d, d)))


@dataclass(frozen=True)
class TransportTables:
    """Frozen per-direction quadrature grids and transport-map values.

    ``grids[l]`` spans the union of the model-slice 6-sigma range and the
    projected data range on direction l; ``maps[l]`` holds f(t) = the
    empirical quantile of the projected data at the model-slice CDF of t.
    """

    directions: np.ndarray   # (L, d)
    grids: np.ndarray        # (L, T)
    maps: np.ndarray         # (L, T)


def _direction_matrix(dirs) -> np.ndarray:
    if isinstance(dirs, np.ndarray):
        mat = np.atleast_2d(np.asarray(dirs, dtype=float))
    else:
        mat = np.stack([d.theta if isinstance(d, Direction) else np.asarray(d, float)
                        for d in dirs])
    if mat.ndim != 2 or mat.shape[0] < 1:
        raise ValueError("need at least one direction")
    return mat


def _slice_params(model: GmmModel, dirs: np.ndarray, eps_var: float):
    """Slice means (K, L) and floored slice variances (K, L) for all directions."""
    means1d = model.means @ dirs.T
    vars1d = np.einsum("kij,li,lj->kl", model.covariances, dirs, dirs)
    return means1d, np.maximum(vars1d, eps_var)


def _transport_tables(model: GmmModel, data: Dataset, dirs: np.ndarray,
                      quad_points: int, eps_var: float) -> TransportTables:
    proj = np.sort(data.samples @ dirs.T, axis=0)       # (N, L)
    means1d, vars1d = _slice_params(model, dirs, eps_var)
    sd = np.sqrt(vars1d)
    lo = np.minimum((means1d - 6.0 * sd).min(axis=0), proj[0])
    hi = np.maximum((means1d + 6.0 * sd).max(axis=0), proj[-1])
    hi = np.maximum(hi, lo + 1e-9)  # degenerate slices still get a valid grid
    grids = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, quad_points)

    z = (grids[None, :, :] - means1d[:, :, None]) / sd[:, :, None]
    cdf = np.einsum("k,klt->lt", model.weights, ndtr(z))
    pp = (np.arange(proj.shape[0]) + 0.5) / proj.shape[0]
    maps = np.empty_like(grids)
    for j in range(dirs.shape[0]):
        maps[j] = np.interp(cdf[j], pp, proj[:, j])
    return TransportTables(dirs, grids, maps)


def transport_tables(model: GmmModel, data: Dataset, dirs,
                     quad_points: int = 256, eps_var: float = EPS_VAR) -> TransportTables:
    """Build the per-direction transport maps for the current model."""
    if data.dim != model.dim:
        raise ValueError(f"data dimension {data.dim} does not match model {model.dim}")
    mat = _direction_matrix(dirs)
    if mat.shape[1] != model.dim:
        raise ValueError(f"direction dimension {mat.shape[1]} does not match model {model.dim}")
    return _transport_tables(model, data, mat, quad_points, eps_var)


def _trapezoid_weights(grids: np.ndarray) -> np.ndarray:
    dt = (grids[:, -1] - grids[:, 0]) / (grids.shape[1] - 1)
    w = np.ones_like(grids)
    w[:, 0] = 0.5
    w[:, -1] = 0.5
    return w * dt[:, None]


def _slice_densities(model: GmmModel, tables: TransportTables, eps_var: float):
    """Per-component slice densities phi_klt on the frozen grids."""
    means1d, vars1d = _slice_params(model, tables.directions, eps_var)
    sd = np.sqrt(vars1d)
    diff = tables.grids[None, :, :] - means1d[:, :, None]
    phi = np.exp(-0.5 * (diff / sd[:, :, None]) ** 2) / (_SQRT_2PI * sd[:, :, None])
    return phi, diff, vars1d


def objective_from_tables(model: GmmModel, tables: TransportTables,
                          p: float = 2.0, eps_var: float = EPS_VAR) -> float:
    """Transported mass for fixed maps: avg_l integral |f(t)-t|^p I_x dt."""
    phi, _, _ = _slice_densities(model, tables, eps_var)
    mix = np.einsum("k,klt->lt", model.weights, phi)
    cost = np.abs(tables.maps - tables.grids) ** p
    per_dir = np.sum(_trapezoid_weights(tables.grids) * cost * mix, axis=1)
    return float(per_dir.mean())


def gradients_from_tables(model: GmmModel, tables: TransportTables,
                          p: float = 2.0, eps_var: float = EPS_VAR) -> GmmGradients:
    """Analytic gradients of the frozen-map objective.

    For slice variance s = theta^T Sigma theta and slice mean m = mu.theta:

        d/d alpha_k:  avg_l integral c(t) phi_k(t) dt
        d/d mu_k:     avg_l [integral alpha_k c(t) phi_k(t) (t-m)/s dt] theta
        d/d Sigma_k:  avg_l [integral alpha_k c(t) phi_k(t) ((t-m)^2/s - 1)/(2s) dt] theta theta^T

    with c(t) = |f(t) - t|^p.  The averages use the same 1/L factor as the
    objective so finite differences of :func:`objective_from_tables` match.
    """
    phi, diff, vars1d = _slice_densities(model, tables, eps_var)
    n_dirs = tables.directions.shape[0]
    wc = _trapezoid_weights(tables.grids) * np.abs(tables.maps - tables.grids) ** p

    d_alpha = np.einsum("lt,klt->k", wc, phi) / n_dirs

    mu_coef = np.einsum("lt,klt->kl", wc, phi * diff / vars1d[:, :, None])
    d_mu = model.weights[:, None] * (mu_coef @ tables.directions) / n_dirs

    s_integrand = phi * ((diff ** 2) / vars1d[:, :, None] - 1.0) / (2.0 * vars1d[:, :, None])
    s_coef = np.einsum("lt,klt->kl", wc, s_integrand)
    d_sigma = model.weights[:, None, None] * np.einsum(
        "kl,li,lj->kij", s_coef, tables.directions, tables.directions) / n_dirs

    return GmmGradients(d_alpha, d_mu, d_sigma)


def swm_objective(model: GmmModel, data: Dataset, dirs,
                  p: float = 2.0, quad_points: int = 256,
                  eps_var: float = EPS_VAR) -> float:
    """Sliced transport objective with maps computed from the given model."""
    tables = transport_tables(model, data, dirs, quad_points, eps_var)
    return objective_from_tables(model, tables, p, eps_var)


def swm_gradients(model: GmmModel, data: Dataset, dirs,
                  p: float = 2.0, quad_points: int = 256,
                  eps_var: float = EPS_VAR) -> GmmGradients:
    """Analytic gradients at ``model`` with maps computed from ``model``."""
    tables = transport_tables(model, data, dirs, quad_points, eps_var)
    return gradients_from_tables(model, tables, p, eps_var)


def _rmsprop_update(mom: _Moments, grad: np.ndarray, cfg: SwmConfig) -> _Moments:
    m = cfg.gamma * mom.m + (1.0 - cfg.gamma) * grad
    g = cfg.gamma * mom.g + (1.0 - cfg.gamma) * grad * grad
    denom = np.sqrt(np.maximum(g - m * m, 0.0) + cfg.eps)
    v = cfg.kappa * mom.v - cfg.lr * grad / denom
    return _Moments(m, g, v)


def rmsprop_step(state: OptimizerState, grads: GmmGradients, config: SwmConfig,
                 model: GmmModel) -> tuple[GmmModel, OptimizerState]:
    """One RMSProp update of all parameters, then feasibility projections.

    Every parameter tensor follows the same recursion
    m <- gamma m + (1-gamma) grad, g <- gamma g + (1-gamma) grad^2,
    v <- kappa v - lr grad / sqrt(g - m^2 + eps), param <- param + v.
    Covariances are projected back onto the PSD cone with the eps_var
    eigenvalue floor and weights are clipped and renormalized, so the
    returned model always satisfies the mixture invariants.
    """
    for name, grad in grads._asdict().items():
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(
                f"non-finite {name} gradient at iteration {state.iteration}")
    if grads.weights.shape != (model.k,) or grads.means.shape != model.means.shape \
            or grads.covariances.shape != model.covariances.shape:
        raise ValueError("gradient shapes do not match the model")

    w_mom = _rmsprop_update(state.weights, grads.weights, config)
    mu_mom = _rmsprop_update(state.means, grads.means, config)
    cov_mom = _rmsprop_update(state.covariances, grads.covariances, config)

    new_weights = project_simplex(model.weights + w_mom.v)
    new_means = model.means + mu_mom.v
    new_covs = np.stack([project_psd(c, config.eps_var)
                         for c in model.covariances + cov_mom.v])

    new_model = GmmModel(new_weights, new_means, new_covs)
    new_state = OptimizerState(w_mom, mu_mom, cov_mom, state.iteration + 1)
    return new_model, new_state


def default_init(data: Dataset, k: int, seed, eps_var: float = EPS_VAR) -> GmmModel:
    """Seeded default initialization shared by the SWM and EM fitters.

    Means are k distinct data points, every covariance is the isotropic
    matrix (trace of the data covariance / d) I, and weights are uniform.
    """
    if k < 1:
        raise ValueError("component count must be positive")
    if k > data.n:
        raise ValueError(f"cannot place {k} components on {data.n} samples")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = rng.choice(data.n, size=k, replace=False)
    means = data.samples[idx]
    scale = max(float(np.trace(np.cov(data.samples.T, ddof=0).reshape(data.dim, data.dim)))
                / data.dim, eps_var)
    covs = np.tile(scale * np.eye(data.dim), (k, 1, 1))
    weights = np.full(k, 1.0 / k)
    return GmmModel(weights, means, covs)


def fit_swm(data: Dataset, k: int, config: SwmConfig | None = None,
            init: GmmModel | None = None) -> tuple[GmmModel, FitTrace]:
    """Fit a k-component GMM by sliced-Wasserstein minimization.

    Each iteration draws config.l fresh directions, rebuilds the transport
    maps, takes one RMSProp step on the analytic gradients, and projects
    back onto the feasible set.  The trace holds one record per iteration
    (0 = the initial model) with the stochastic objective estimate and the
    NLL of that iterate; record ``iters`` describes the returned model.
    Fully deterministic given (config.seed, init).
    """
    cfg = config if config is not None else SwmConfig()
    if init is not None and (init.k != k or init.dim != data.dim):
        raise ValueError("init model shape does not match requested fit")
    root = np.random.SeedSequence(cfg.seed)
    init_ss, dir_ss = root.spawn(2)
    model = init if init is not None else default_init(
        data, k, np.random.default_rng(init_ss), cfg.eps_var)
    dir_rng = np.random.default_rng(dir_ss)

    state = OptimizerState.zeros(k, data.dim)
    trace = FitTrace()
    for i in range(cfg.iters):
        dirs = _draw_direction_matrix(dir_rng, data.dim, cfg.l)
        tables = _transport_tables(model, data, dirs, cfg.quad_points, cfg.eps_var)
        objective = objective_from_tables(model, tables, cfg.p, cfg.eps_var)
        if not np.isfinite(objective):
            raise DivergenceError(f"objective diverged at iteration {i} (seed {cfg.seed})", trace)
        trace.append(i, objective, nll(model, data))
        grads = gradients_from_tables(model, tables, cfg.p, cfg.eps_var)
        try:
            model, state = rmsprop_step(state, grads, cfg, model)
        except DivergenceError as exc:
            exc.trace = trace
            raise
    final_dirs = _draw_direction_matrix(dir_rng, data.dim, cfg.l)
    trace.append(cfg.iters,
                 swm_objective(model, data, final_dirs, cfg.p, cfg.quad_points, cfg.eps_var),
                 nll(model, data))
    return model, trace
