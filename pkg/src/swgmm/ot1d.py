"""Closed-form one-dimensional optimal transport.

In 1-D the optimal transport map between two distributions is the monotone
rearrangement J_b^{-1}(J_a(t)) of their CDFs, and the p-Wasserstein
distance reduces to an L_p norm of the difference of quantile functions:

    W_p(a, b)^p = integral_0^1 |J_a^{-1}(z) - J_b^{-1}(z)|^p dz

This module evaluates quantile functions for empirical slices (plotting
positions with linear interpolation), for 1-D Gaussian mixtures (bisection
of the mixture CDF), and for precomputed quantile tables, and builds the
sliced distance as a Monte-Carlo average of 1-D distances over random
projection directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gmm import Dataset, GmmModel, _frozen
from .slicing import Direction, SliceData, SliceModel, _draw_direction_matrix, slice_data, slice_model

_BISECT_TOL = 1e-10


@dataclass(frozen=True)
class QuantileGrid:
    """Inverse-CDF values tabulated at increasing quantile levels in (0, 1)."""

    zs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        zs = np.asarray(self.zs, dtype=float).reshape(-1)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if zs.size < 1 or zs.shape != vals.shape:
            raise ValueError("zs and values must be nonempty and the same length")
        if np.any(zs <= 0) or np.any(zs >= 1):
            raise ValueError("quantile levels must lie strictly inside (0, 1)")
        if np.any(np.diff(zs) <= 0):
            raise ValueError("quantile levels must be strictly increasing")
        if np.any(np.diff(vals) < 0):
            raise ValueError("quantile values must be nondecreasing")
        if not (np.all(np.isfinite(zs)) and np.all(np.isfinite(vals))):
            raise ValueError("quantile grid contains non-finite entries")
        object.__setattr__(self, "zs", _frozen(zs))
        object.__setattr__(self, "values", _frozen(vals))


def midpoint_levels(m: int) -> np.ndarray:
    """The m midpoint quantile levels (i - 0.5) / m."""
    if m < 1:
        raise ValueError("grid size must be positive")
    return (np.arange(m) + 0.5) / m


def _plotting_positions(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def _empirical_quantiles_sorted(sorted_points: np.ndarray, z: np.ndarray) -> np.ndarray:
    # np.interp clamps outside the plotting positions, which implements the
    # [min, max] endpoint clamping of the empirical inverse CDF.
    return np.interp(z, _plotting_positions(sorted_points.shape[0]), sorted_points)


def empirical_quantile(slice: SliceData, z):
    """Empirical inverse CDF at level(s) z in [0, 1].

    Order statistics sit at plotting positions (i - 0.5) / N and are
    linearly interpolated; levels outside the positions clamp to the
    extreme samples.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(z_arr > 1) or not np.all(np.isfinite(z_arr)):
        raise ValueError("quantile level must lie in [0, 1]")
    out = _empirical_quantiles_sorted(slice.points, z_arr)
    return float(out) if np.isscalar(z) or z_arr.ndim == 0 else out


def _mixture_cdf(weights, means, vars_, t):
    sd = np.sqrt(vars_)
    t = np.asarray(t, dtype=float)
    z = (t[..., None] - means) / sd
    return ndtr(z) @ weights


def model_cdf(slice: SliceModel, t):
    """CDF of a 1-D Gaussian mixture: sum_k alpha_k Phi((t - m_k) / s_k)."""
    out = _mixture_cdf(slice.weights, slice.means1d, slice.vars1d, t)
    return float(out) if np.isscalar(t) or np.asarray(t).ndim == 0 else out


def _mixture_quantiles(weights, means, vars_, z: np.ndarray) -> np.ndarray:
    """Invert the mixture CDF by bisection, vectorized over levels.

    No closed form exists for mixture quantiles; the CDF is strictly
    increasing so bisection on a generous bracket converges unconditionally.
    """
    sd_max = float(np.sqrt(vars_).max())
    lo = float(means.min()) - 10.0 * sd_max
    hi = float(means.max()) + 10.0 * sd_max
    # widen if an extreme level falls outside the default bracket
    while _mixture_cdf(weights, means, vars_, np.array(lo)) > z.min():
        lo -= 10.0 * sd_max
    while _mixture_cdf(weights, means, vars_, np.array(hi)) < z.max():
        hi += 10.0 * sd_max
    lo_arr = np.full(z.shape, lo)
    hi_arr = np.full(z.shape, hi)
    n_iter = int(np.ceil(np.log2((hi - lo) / _BISECT_TOL))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo_arr + hi_arr)
        below = _mixture_cdf(weights, means, vars_, mid) < z
        lo_arr = np.where(below, mid, lo_arr)
        hi_arr = np.where(below, hi_arr, mid)
    return 0.5 * (lo_arr + hi_arr)


def model_quantile(slice: SliceModel, z):
    """Inverse CDF of a 1-D Gaussian mixture at level(s) z in (0, 1)."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr <= 0) or np.any(z_arr >= 1) or not np.all(np.isfinite(z_arr)):
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    out = _mixture_quantiles(slice.weights, slice.means1d, slice.vars1d, z_arr)
    return float(out[0]) if np.isscalar(z) or np.asarray(z).ndim == 0 else out


def _quantiles_at(marginal, zs: np.ndarray) -> np.ndarray:
    if isinstance(marginal, SliceData):
        return _empirical_quantiles_sorted(marginal.points, zs)
    if isinstance(marginal, SliceModel):
        return _mixture_quantiles(marginal.weights, marginal.means1d, marginal.vars1d, zs)
    if isinstance(marginal, QuantileGrid):
        return np.interp(zs, marginal.zs, marginal.values)
    raise TypeError(f"expected SliceData, SliceModel or QuantileGrid, got {type(marginal).__name__}")


def quantile_grid(marginal, m: int = 512) -> QuantileGrid:
    """Tabulate a marginal's quantile function at m midpoint levels."""
    zs = midpoint_levels(m)
    return QuantileGrid(zs, _quantiles_at(marginal, zs))


def transport_map(x_slice: SliceModel, y_slice: SliceData, t):
    """The monotone 1-D transport map J_y^{-1}(J_x(t)) from model to data."""
    return empirical_quantile(y_slice, model_cdf(x_slice, t))


def wasserstein_1d(a, b, p: float = 2.0, m: int = 512) -> float:
    """1-D p-Wasserstein distance between two marginals.

    Accepts any mix of SliceData, SliceModel, and QuantileGrid.  Two
    empirical slices of equal size short-circuit to the exact mean of
    sorted pairwise differences; every other combination integrates
    |J_a^{-1}(z) - J_b^{-1}(z)|^p over m midpoint levels.
    """
    if p < 1:
        raise ValueError("Wasserstein order p must be >= 1")
    if isinstance(a, SliceData) and isinstance(b, SliceData) and a.n == b.n:
        diffs = np.abs(a.points - b.points)
    else:
        zs = midpoint_levels(m)
        diffs = np.abs(_quantiles_at(a, zs) - _quantiles_at(b, zs))
    return float(np.mean(diffs ** p) ** (1.0 / p))


def _slice_along(obj, theta: Direction):
    if isinstance(obj, GmmModel):
        return slice_model(obj, theta)
    if isinstance(obj, Dataset):
        return slice_data(obj, theta)
    raise TypeError(f"expected GmmModel or Dataset, got {type(obj).__name__}")


def _dim_of(obj) -> int:
    if isinstance(obj, (GmmModel, Dataset)):
        return obj.dim
    raise TypeError(f"expected GmmModel or Dataset, got {type(obj).__name__}")


def sliced_wasserstein(a, b, p: float = 2.0, l: int = 100, m: int = 512,
                       seed=0) -> float:
    """Monte-Carlo sliced p-Wasserstein distance between models or datasets.

    Averages the p-th power of the 1-D distance between the two marginals
    over l directions drawn uniformly on the sphere (both arguments see the
    same directions, so the result is symmetric and deterministic per seed),
    then takes the p-th root.
    """
    if p < 1:
        raise ValueError("Wasserstein order p must be >= 1")
    if l < 1:
        raise ValueError("projection count must be positive")
    d = _dim_of(a)
    if _dim_of(b) != d:
        raise ValueError(f"dimension mismatch: {d} vs {_dim_of(b)}")
    dirs = _draw_direction_matrix(np.random.default_rng(seed), d, l)
    total = 0.0
    for row in dirs:
        theta = Direction(row)
        total += wasserstein_1d(_slice_along(a, theta), _slice_along(b, theta), p=p, m=m) ** p
    return float((total / l) ** (1.0 / p))
