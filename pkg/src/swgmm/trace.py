"""Per-iteration fit traces shared by the sliced-Wasserstein and EM fitters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_HEADER = "iteration,objective,nll"


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    nll: float


@dataclass
class FitTrace:
    """Iteration log: objective estimate and NLL per logged iteration.

    ``events`` records exceptional steps (covariance flooring, component
    reinitialization) as (iteration, tag) pairs; they are not part of the
    CSV schema.
    """

    records: list[TraceRecord] = field(default_factory=list)
    events: list[tuple[int, str]] = field(default_factory=list)

    def append(self, iteration: int, objective: float, nll: float) -> None:
        if not (np.isfinite(objective) and np.isfinite(nll)):
            raise ValueError(
                f"non-finite trace values at iteration {iteration}: "
                f"objective={objective!r}, nll={nll!r}")
        self.records.append(TraceRecord(int(iteration), float(objective), float(nll)))

    def flag(self, iteration: int, tag: str) -> None:
        self.events.append((int(iteration), tag))

    def flagged_iterations(self) -> set[int]:
        return {i for i, _ in self.events}

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def nlls(self) -> np.ndarray:
        return np.array([r.nll for r in self.records])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(_HEADER + "\n")
            for r in self.records:
                fh.write(f"{r.iteration},{float(r.objective)!r},{float(r.nll)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "FitTrace":
        trace = cls()
        with open(path) as fh:
            header = fh.readline().strip()
            if header != _HEADER:
                raise ValueError(f"{path}: unexpected trace header {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                it, obj, nll = line.split(",")
                trace.append(int(it), float(obj), float(nll))
        return trace
