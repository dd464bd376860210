"""Gaussian mixture models: parameterization, density, sampling, and the
feasibility projections (PSD cone for covariances, probability simplex for
weights) used by the fitting routines."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

# Default eigenvalue floor for covariance matrices.  Keeps sliced variances
# and Cholesky factors away from zero; every model produced by the library
# (initialization, projections, fits) satisfies it.
EPS_VAR = 1e-6

_LOG_2PI = float(np.log(2.0 * np.pi))
_SYM_TOL = 1e-9
_WEIGHT_SUM_TOL = 1e-9
_PSD_TOL = 1e-9


class InvalidModelError(ValueError):
    """Mixture parameters violate the model invariants."""


class DegenerateWeightsError(ValueError):
    """Mixture weights cannot be renormalized onto the simplex."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GmmModel:
    """A K-component Gaussian mixture in d dimensions.

    Immutable after construction; the arrays are copied and marked
    read-only, so instances are safe to share across threads.  Construction
    validates the invariants: weights on the probability simplex (within
    1e-9), covariances symmetric (within 1e-9) and positive semidefinite.
    Tiny but nonnegative variances are accepted here; the ``EPS_VAR``
    eigenvalue floor is enforced by the fitting code, which routes every
    covariance update through :func:`project_psd`.
    """

    weights: np.ndarray       # (K,)
    means: np.ndarray         # (K, d)
    covariances: np.ndarray   # (K, d, d)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        k = w.shape[0]
        if k < 1:
            raise InvalidModelError("mixture needs at least one component")
        mu = np.asarray(self.means, dtype=float)
        if mu.ndim == 1:
            # (d,) for a single component, (K,) for a 1-D mixture
            mu = mu[None, :] if k == 1 and mu.shape[0] != 1 else mu[:, None]
        cov = np.asarray(self.covariances, dtype=float)
        if cov.ndim == 1:
            # per-component variances of a 1-D mixture
            cov = cov[:, None, None]
        elif cov.ndim == 2 and k == 1:
            cov = cov[None, :, :]
        if mu.shape[0] != k or cov.shape[0] != k:
            raise InvalidModelError(
                f"component count mismatch: weights {k}, means {mu.shape[0]}, "
                f"covariances {cov.shape[0]}")
        d = mu.shape[1]
        if cov.shape[1:] != (d, d):
            raise InvalidModelError(
                f"covariance shape {cov.shape[1:]} does not match dimension {d}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(mu))
                and np.all(np.isfinite(cov))):
            raise InvalidModelError("parameters contain non-finite entries")
        if np.any(w < 0):
            raise InvalidModelError("mixture weights must be nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidModelError(f"mixture weights sum to {w.sum()!r}, not 1")
        asym = np.abs(cov - np.swapaxes(cov, 1, 2)).max()
        if asym > _SYM_TOL:
            raise InvalidModelError(f"covariance asymmetry {asym:.3e} exceeds {_SYM_TOL}")
        for j in range(k):
            lo = np.linalg.eigvalsh(cov[j]).min()
            if lo < -_PSD_TOL:
                raise InvalidModelError(
                    f"covariance {j} has negative eigenvalue {lo:.3e}")

        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "means", _frozen(mu))
        object.__setattr__(self, "covariances", _frozen(cov))

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class Dataset:
    """N samples in d dimensions, stored as an immutable (N, d) array."""

    samples: np.ndarray
    label: str | None = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("dataset must be a nonempty N x d array")
        if not np.all(np.isfinite(x)):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "samples", _frozen(x))

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def _cholesky_with_retry(cov: np.ndarray, eps_var: float) -> np.ndarray:
    """Cholesky factor of a covariance, flooring eigenvalues on failure."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(project_psd(cov, eps_var))
    except np.linalg.LinAlgError as exc:
        raise InvalidModelError(
            "covariance is not positive definite even after PSD projection"
        ) from exc


def _log_component_densities(model: GmmModel, x: np.ndarray,
                             eps_var: float = EPS_VAR) -> np.ndarray:
    """Per-component Gaussian log densities, shape (N, K)."""
    n = x.shape[0]
    out = np.empty((n, model.k))
    for j in range(model.k):
        chol = _cholesky_with_retry(model.covariances[j], eps_var)
        z = solve_triangular(chol, (x - model.means[j]).T, lower=True)
        maha = np.sum(z * z, axis=0)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, j] = -0.5 * (model.dim * _LOG_2PI + log_det + maha)
    return out


def _log_weights(weights: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(weights)


def log_density(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Log of the mixture density at each row of ``x`` (shape (N, d))."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.dim:
        raise ValueError(f"points have dimension {x.shape[1]}, model has {model.dim}")
    lcd = _log_component_densities(model, x)
    return logsumexp(lcd + _log_weights(model.weights), axis=1)


def density(model: GmmModel, x) -> float:
    """Mixture density at a single point; strictly positive for finite x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.dim:
        raise ValueError(f"point has dimension {x.shape[0]}, model has {model.dim}")
    return float(np.exp(log_density(model, x[None, :])[0]))


def nll(model: GmmModel, data: Dataset) -> float:
    """Mean negative log likelihood of the data under the model.

    Uses log-sum-exp across components so far-away samples do not
    underflow.  Lower is better.
    """
    if data.dim != model.dim:
        raise ValueError(f"data dimension {data.dim} does not match model {model.dim}")
    return float(-np.mean(log_density(model, data.samples)))


def sample(model: GmmModel, n: int, seed) -> Dataset:
    """Draw n samples: pick a component by weight, then a Gaussian draw.

    Deterministic for a given (model, n, seed) triple.
    """
    if n < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(seed)
    comps = rng.choice(model.k, size=n, p=model.weights)
    z = rng.standard_normal((n, model.dim))
    out = np.empty((n, model.dim))
    for j in range(model.k):
        rows = comps == j
        if not np.any(rows):
            continue
        chol = _cholesky_with_retry(model.covariances[j], EPS_VAR)
        out[rows] = model.means[j] + z[rows] @ chol.T
    return Dataset(out)


def project_psd(m: np.ndarray, eps_var: float = EPS_VAR) -> np.ndarray:
    """Nearest symmetric matrix with eigenvalues at least ``eps_var``.

    Symmetrizes first, then clips the eigenvalues of the symmetric part.
    Idempotent, and leaves already-compliant matrices unchanged up to
    eigendecomposition round-off (well below 1e-9).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    if eps_var <= 0:
        raise ValueError("eps_var must be positive")
    sym = 0.5 * (m + m.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() >= eps_var:
        return sym
    clipped = np.maximum(vals, eps_var)
    out = (vecs * clipped) @ vecs.T
    return 0.5 * (out + out.T)


def project_simplex(w: np.ndarray) -> np.ndarray:
    """Clip negative weights to zero and renormalize to sum 1."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size < 1:
        raise ValueError("weight vector is empty")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights contain non-finite entries")
    clipped = np.maximum(w, 0.0)
    total = clipped.sum()
    if total <= 0.0:
        raise DegenerateWeightsError("all mixture weights are nonpositive")
    return clipped / total


# --- JSON serialization -------------------------------------------------

def model_to_dict(model: GmmModel) -> dict:
    return {
        "dim": model.dim,
        "k": model.k,
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
    }


def model_from_dict(obj: dict) -> GmmModel:
    try:
        weights = obj["weights"]
        means = obj["means"]
        covariances = obj["covariances"]
    except (TypeError, KeyError) as exc:
        raise InvalidModelError(f"model object missing field: {exc}") from exc
    model = GmmModel(np.asarray(weights), np.asarray(means), np.asarray(covariances))
    for field in ("dim", "k"):
        if field in obj and int(obj[field]) != getattr(model, field):
            raise InvalidModelError(
                f"declared {field}={obj[field]} does not match arrays ({getattr(model, field)})")
    return model


def save_model(model: GmmModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> GmmModel:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidModelError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(obj)
