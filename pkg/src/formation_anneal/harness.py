"""Experiment runner: seed ensembles, CSV trajectories and run summaries."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import median

import numpy as np

from .dynamics import IntegrationError, Trajectory, integrate
from .equilibria import EquilibriumReport, check_equilibrium
from .scenario import Scenario

log = logging.getLogger(__name__)

# drift norm at which a deterministic run counts as settled on its plateau
PLATEAU_TOL = 1e-8


@dataclass
class RunSummary:
    scenario: str
    seed: int
    status: str  # "ok" | "failed"
    final_time: float
    final_lyapunov: float
    max_centroid_drift: float
    equilibrium_report: EquilibriumReport | None
    stop_reason: str  # "converged" | "t_end" | "diverged"
    error: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        rep = self.equilibrium_report
        if rep is not None:
            d["equilibrium_report"] = {
                "is_equilibrium": rep.is_equilibrium,
                "drift_norm": rep.drift_norm,
                "tree_condition_holds": rep.tree_condition_holds,
                "per_edge_gains": {f"u_{g.edge[0]}_{g.edge[1]}": g.value for g in rep.per_edge_gains},
                "degenerate_edges": [list(e) for e in rep.degenerate_edges],
            }
        return d


@dataclass
class RunResult:
    scenario: Scenario
    trajectories: dict[int, Trajectory]
    summaries: list[RunSummary]

    @property
    def failed(self) -> bool:
        return any(s.status != "ok" for s in self.summaries)


def is_noisy(s: Scenario) -> bool:
    return s.params.stochastic and s.schedule.c1 > 0


def summarize_trajectory(s: Scenario, seed: int, traj: Trajectory,
                         status: str = "ok", error: str | None = None) -> RunSummary:
    final = traj.configurations[-1]
    report = check_equilibrium(s.graph, final, s.target)
    return RunSummary(
        scenario=s.name,
        seed=seed,
        status=status,
        final_time=traj.final_time,
        final_lyapunov=float(traj.lyapunov_values[-1]),
        max_centroid_drift=float(np.max(np.linalg.norm(traj.centroids, axis=1))),
        equilibrium_report=report,
        stop_reason=traj.stop_reason,
        error=error,
    )


def run(s: Scenario) -> RunResult:
    """Run every ensemble member (seeds ``seed .. seed+ensemble_size-1``).

    Without noise the ensemble collapses to one deterministic run, which
    stops early once the drift norm reaches :data:`PLATEAU_TOL`.  A failing
    seed is reported in its summary and does not stop the others.
    """
    noisy = is_noisy(s)
    seeds = [s.seed + k for k in range(s.ensemble_size)] if noisy else [s.seed]
    stop_tol = None if noisy else PLATEAU_TOL
    trajectories: dict[int, Trajectory] = {}
    summaries: list[RunSummary] = []
    for seed in seeds:
        try:
            traj = integrate(s.graph, s.initial, s.target, s.params, s.schedule, seed, stop_tol=stop_tol)
        except IntegrationError as exc:
            log.warning("%s seed %d failed: %s", s.name, seed, exc)
            partial = exc.trajectory
            if partial is None:
                summaries.append(RunSummary(s.name, seed, "failed", exc.time, float("nan"),
                                            float("nan"), None, "diverged", str(exc)))
                continue
            trajectories[seed] = partial
            summaries.append(summarize_trajectory(s, seed, partial, "failed", str(exc)))
            continue
        trajectories[seed] = traj
        summaries.append(summarize_trajectory(s, seed, traj))
    return RunResult(s, trajectories, summaries)


def csv_header(traj: Trajectory) -> list[str]:
    n_agents, dim = traj.configurations.shape[1:]
    cols = ["t", "phi"] + [f"centroid_{k}" for k in range(1, dim + 1)]
    cols += [f"u_{i}_{j}" for i, j in traj.graph.edges]
    cols += [f"a{i}_{k}" for i in range(1, n_agents + 1) for k in range(1, dim + 1)]
    return cols


def emit_csv(traj: Trajectory, path: str | Path) -> None:
    """One row per recorded snapshot; floats written in shortest round-trip form."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(csv_header(traj))
            for k in range(len(traj)):
                row = [traj.times[k], traj.lyapunov_values[k], *traj.centroids[k],
                       *traj.edge_gains[k], *traj.configurations[k].ravel()]
                w.writerow([repr(float(x)) for x in row])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write trajectory CSV {path}: {exc.strerror}") from exc


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=np.float64).reshape(len(rows) - 1, len(rows[0]))


def summarize_ensemble(summaries: list[RunSummary], threshold: float = 1.0) -> dict:
    """Median/min/max of the final Lyapunov value over successful runs."""
    if not summaries:
        raise ValueError("summarize_ensemble needs at least one run summary")
    ok = [s for s in summaries if s.status == "ok"]
    finals = [s.final_lyapunov for s in ok]
    drifts = [s.max_centroid_drift for s in summaries if np.isfinite(s.max_centroid_drift)]
    return {
        "n_runs": len(summaries),
        "n_failed": len(summaries) - len(ok),
        "median_final_lyapunov": median(finals) if finals else None,
        "min_final_lyapunov": min(finals) if finals else None,
        "max_final_lyapunov": max(finals) if finals else None,
        "threshold": threshold,
        "n_below_threshold": sum(f < threshold for f in finals),
        "max_centroid_drift": max(drifts) if drifts else None,
    }


def trajectory_filename(s: Scenario, seed: int) -> str:
    return f"{s.name}_seed{seed}.csv"


def write_outputs(result: RunResult, out_dir: str | Path, threshold: float = 1.0) -> Path:
    """Write one CSV per run plus ``summary.json``; returns the summary path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for seed, traj in result.trajectories.items():
        emit_csv(traj, out / trajectory_filename(result.scenario, seed))
    summary = {
        "scenario": result.scenario.name,
        "aggregate": summarize_ensemble(result.summaries, threshold),
        "runs": [s.to_dict() for s in result.summaries],
    }
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2, allow_nan=True) + "\n")
    return path
