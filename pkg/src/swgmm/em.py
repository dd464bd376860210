"""Expectation-maximization baseline for GMM fitting.

Standard EM on the mean negative log likelihood, sharing the seeded
initialization and covariance floor of the sliced-Wasserstein fitter so
that comparisons isolate the objective rather than the starting point.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .gmm import (EPS_VAR, Dataset, GmmModel, _log_component_densities,
                  _log_weights, project_psd)
from .swm import default_init
from .trace import FitTrace


def responsibilities(model: GmmModel, data: Dataset) -> np.ndarray:
    """Posterior component probabilities, shape (N, K); rows sum to 1."""
    if data.dim != model.dim:
        raise ValueError(f"data dimension {data.dim} does not match model {model.dim}")
    log_joint = _log_component_densities(model, data.samples) + _log_weights(model.weights)
    return np.exp(log_joint - logsumexp(log_joint, axis=1, keepdims=True))


def fit_em(data: Dataset, k: int, iters: int = 500, tol: float = 1e-7,
           eps_var: float = EPS_VAR, seed=0,
           init: GmmModel | None = None) -> tuple[GmmModel, FitTrace]:
    """Fit a k-component GMM by EM.

    Stops after ``iters`` iterations or when the relative NLL improvement
    drops below ``tol``.  Covariances are floored at ``eps_var`` through the
    PSD projection; a component whose total responsibility falls below
    1e-12 is reinitialized at a random data point.  Both events are flagged
    in the trace (tags ``floor:k`` and ``reinit:k``), since the NLL descent
    guarantee only holds for iterations without them.  The trace stores the
    NLL in both value columns to keep the shared CSV schema.
    """
    if k < 1:
        raise ValueError("component count must be positive")
    if iters < 1:
        raise ValueError("iteration count must be positive")
    root = np.random.SeedSequence(seed)
    init_ss, reinit_ss = root.spawn(2)
    model = init if init is not None else default_init(
        data, k, np.random.default_rng(init_ss), eps_var)
    if model.k != k or model.dim != data.dim:
        raise ValueError("init model shape does not match requested fit")
    reinit_rng = np.random.default_rng(reinit_ss)

    x = data.samples
    n, d = x.shape
    reinit_cov = max(float(np.trace(np.cov(x.T, ddof=0).reshape(d, d))) / d,
                     eps_var) * np.eye(d)

    trace = FitTrace()
    prev_nll = None
    for i in range(1, iters + 1):
        log_joint = _log_component_densities(model, x) + _log_weights(model.weights)
        log_norm = logsumexp(log_joint, axis=1, keepdims=True)
        current_nll = float(-np.mean(log_norm))
        if i == 1:
            trace.append(0, current_nll, current_nll)
        resp = np.exp(log_joint - log_norm)
        counts = resp.sum(axis=0)

        weights = counts / n
        means = np.empty_like(model.means)
        covs = np.empty_like(model.covariances)
        event = False
        for j in range(k):
            if counts[j] < 1e-12:
                means[j] = x[reinit_rng.integers(n)]
                covs[j] = reinit_cov
                weights[j] = 1.0 / k
                trace.flag(i, f"reinit:{j}")
                event = True
                continue
            means[j] = resp[:, j] @ x / counts[j]
            centered = x - means[j]
            raw = (resp[:, j, None] * centered).T @ centered / counts[j]
            if np.linalg.eigvalsh(0.5 * (raw + raw.T)).min() < eps_var:
                trace.flag(i, f"floor:{j}")
                event = True
            covs[j] = project_psd(raw, eps_var)
        weights = weights / weights.sum()

        model = GmmModel(weights, means, covs)
        new_nll = float(-np.mean(logsumexp(
            _log_component_densities(model, x) + _log_weights(model.weights), axis=1)))
        trace.append(i, new_nll, new_nll)

        if prev_nll is not None and not event:
            if abs(prev_nll - new_nll) <= tol * max(abs(prev_nll), 1e-12):
                break
        prev_nll = new_nll
    return model, trace
