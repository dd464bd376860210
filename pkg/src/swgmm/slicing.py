"""Random projection directions and one-dimensional marginals.

Projecting a dataset onto a unit vector gives its 1-D empirical marginal;
slicing a Gaussian mixture along the same vector gives a closed-form 1-D
mixture with means theta.mu_k and variances theta^T Sigma_k theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gmm import EPS_VAR, Dataset, GmmModel, _frozen

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """A unit vector on the (d-1)-sphere used as a projection axis."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float).reshape(-1)
        if t.size < 1 or not np.all(np.isfinite(t)):
            raise ValueError("direction must be a nonempty finite vector")
        norm = float(np.linalg.norm(t))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"direction norm {norm!r} is not 1 within {_UNIT_TOL}")
        object.__setattr__(self, "theta", _frozen(t))

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class SliceData:
    """Projected sample values, kept sorted ascending."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1)
        if p.size < 1:
            raise ValueError("slice needs at least one point")
        if not np.all(np.isfinite(p)):
            raise ValueError("slice contains non-finite values")
        object.__setattr__(self, "points", _frozen(np.sort(p)))

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class SliceModel:
    """The 1-D mixture obtained by slicing a GMM along one direction."""

    weights: np.ndarray
    means1d: np.ndarray
    vars1d: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        m = np.asarray(self.means1d, dtype=float).reshape(-1)
        v = np.asarray(self.vars1d, dtype=float).reshape(-1)
        if not (w.shape == m.shape == v.shape) or w.size < 1:
            raise ValueError("weights, means1d, vars1d must share a nonzero length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(v))):
            raise ValueError("slice parameters contain non-finite entries")
        if np.any(v <= 0):
            raise ValueError("slice variances must be positive")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "means1d", _frozen(m))
        object.__setattr__(self, "vars1d", _frozen(v))

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def _draw_direction_matrix(rng: np.random.Generator, d: int, l: int) -> np.ndarray:
    """L uniform unit vectors as an (L, d) matrix: Gaussian draw, normalize."""
    v = rng.standard_normal((l, d))
    norms = np.linalg.norm(v, axis=1)
    while np.any(norms < 1e-12):  # essentially never; keeps normalize safe
        bad = norms < 1e-12
        v[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(v, axis=1)
    return v / norms[:, None]


def sample_directions(d: int, l: int, seed) -> list[Direction]:
    """L directions drawn uniformly on the unit sphere, deterministic per seed."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if l < 1:
        raise ValueError("direction count must be positive")
    mat = _draw_direction_matrix(np.random.default_rng(seed), d, l)
    return [Direction(row) for row in mat]


def slice_data(data: Dataset, theta: Direction) -> SliceData:
    """Project every sample onto theta; the result is sorted ascending."""
    if data.dim != theta.dim:
        raise ValueError(f"data dimension {data.dim} does not match direction {theta.dim}")
    return SliceData(data.samples @ theta.theta)


def slice_model(model: GmmModel, theta: Direction, eps_var: float = EPS_VAR) -> SliceModel:
    """Closed-form 1-D marginal of the mixture along theta.

    Component k becomes a scalar Gaussian with mean theta.mu_k and variance
    theta^T Sigma_k theta, floored at eps_var so downstream CDFs and
    gradients never divide by a vanishing variance.
    """
    if model.dim != theta.dim:
        raise ValueError(f"model dimension {model.dim} does not match direction {theta.dim}")
    t = theta.theta
    means1d = model.means @ t
    vars1d = np.einsum("kij,i,j->k", model.covariances, t, t)
    return SliceModel(model.weights, means1d, np.maximum(vars1d, eps_var))
