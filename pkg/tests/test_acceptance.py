"""Acceptance suite: one test per criterion, each with its stated tolerance and time budget.

A PASS/FAIL line per criterion is printed in the "acceptance criteria"
section at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from formation_anneal.core import dissipation, drift, edge_gains, lyapunov
from formation_anneal.dynamics import AnnealingSchedule, IntegratorParams, integrate
from formation_anneal.equilibria import (
    check_equilibrium,
    classify_by_distance,
    classify_relative_position,
    random_sphere_coords,
    sample_tree_equilibrium,
    two_agent_gain,
    two_agent_sphere,
)
from formation_anneal.harness import emit_csv, run
from formation_anneal.scenario import preset
from formation_anneal.topology import random_connected, random_tree

from conftest import SPREAD_INITIAL, SQUARE_TARGET


def centred(x):
    return x - x.mean(axis=0)


@pytest.fixture(scope="module")
def plateau():
    """Noiseless star run, shared by the monotonicity and annealing criteria."""
    t0 = time.perf_counter()
    result = run(preset("paper-star", noise=False))
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ensembles():
    t0 = time.perf_counter()
    out = {name: run(preset(name).replace(ensemble_size=10)) for name in ("paper-star", "paper-circle")}
    return out, time.perf_counter() - t0


@pytest.mark.criterion("1 dissipation matches central difference of phi")
def test_lyapunov_identity(criterion):
    rng = np.random.default_rng(1)
    h = 1e-6
    t0 = time.perf_counter()
    worst, checked = 0.0, 0
    for _ in range(500):
        n = int(rng.integers(2, 9))
        dim = int(rng.integers(1, 4))
        g = random_connected(n, rng)
        b = centred(rng.normal(size=(n, dim)))
        a = centred(rng.normal(size=(n, dim)) * 2)
        rate = dissipation(g, a, b)
        if abs(rate) <= 1e-8:
            continue
        d = drift(g, a, b)
        fd = (lyapunov(a + h * d, b) - lyapunov(a - h * d, b)) / (2 * h)
        worst = max(worst, abs(fd - rate) / abs(rate))
        checked += 1
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"max rel err {worst:.2e} over {checked} instances, {elapsed:.2f}s"
    assert checked >= 450
    assert worst <= 1e-6
    assert elapsed < 5


@pytest.mark.criterion("2 noiseless star run is monotone and plateaus above zero")
def test_deterministic_plateau(criterion, plateau):
    result, elapsed = plateau
    tr = result.trajectories[0]
    phi = tr.lyapunov_values
    summary = result.summaries[0]
    gains = np.abs(edge_gains(tr.graph, tr.configurations[-1], tr.target))
    criterion["detail"] = (f"phi {phi[0]:g} -> {phi[-1]:.4f} at t={tr.times[-1]:g}, "
                           f"max|u| {gains.max():.1e}, {elapsed:.2f}s")
    assert phi[0] == 32.0
    assert np.all(np.diff(phi) <= 1e-9)
    assert summary.stop_reason == "converged"
    assert 0 < phi[-1] < 32
    assert gains.shape == (4,) and np.all(gains <= 1e-6)
    assert elapsed < 10


@pytest.mark.criterion("3 tree equilibria have zero drift, non-equilibria do not")
def test_tree_equilibria(criterion):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        dim = int(rng.integers(1, 4))
        g = random_tree(n, rng)
        b = centred(rng.normal(size=(n, dim)))
        p = sample_tree_equilibrium(g, b, random_sphere_coords(g, dim, rng))
        worst = max(worst, check_equilibrium(g, p, b).drift_norm)
    smallest, perturbed = np.inf, 0
    while perturbed < 1000:
        n = int(rng.integers(2, 9))
        dim = int(rng.integers(1, 4))
        g = random_tree(n, rng)
        b = centred(rng.normal(size=(n, dim)))
        p = sample_tree_equilibrium(g, b, random_sphere_coords(g, dim, rng)).points
        a = centred(p + 0.1 * rng.normal(size=p.shape))
        if np.abs(edge_gains(g, a, b)).max() <= 1e-3:
            continue
        smallest = min(smallest, float(np.linalg.norm(drift(g, a, b))))
        perturbed += 1
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"max equilibrium drift {worst:.1e}, min perturbed drift {smallest:.1e}, {elapsed:.2f}s"
    assert worst <= 1e-10
    assert smallest > 0
    assert elapsed < 5


@pytest.mark.criterion("4 two-agent sphere classification")
def test_two_agent_sphere(criterion):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    disagreements, worst_gain, n_points = 0, 0.0, 0
    for _ in range(1000):
        dim = int(rng.integers(1, 4))
        b = centred(rng.normal(size=(2, dim)) * rng.uniform(0.1, 10))
        center, radius = two_agent_sphere(b)
        s = rng.normal(size=dim)
        s /= np.linalg.norm(s)
        on = center + radius * s
        cases = {
            "on": on,
            "inside": center + rng.uniform(0.0, 0.9) * radius * s,
            "outside": center + rng.uniform(1.1, 3.0) * radius * s,
        }
        for expected, v in cases.items():
            got = classify_relative_position(b, v)
            disagreements += got != classify_by_distance(b, v) or got != expected
            n_points += 1
        worst_gain = max(worst_gain, abs(two_agent_gain(b, on)))
    elapsed = time.perf_counter() - t0
    criterion["detail"] = (f"{disagreements} disagreements over {n_points} points, "
                           f"max on-sphere |u| {worst_gain:.1e}, {elapsed:.2f}s")
    assert disagreements == 0
    assert worst_gain <= 1e-10
    assert elapsed < 2


@pytest.mark.criterion("5 centroid stays at zero under annealing noise")
def test_centroid_invariance(criterion, ensembles):
    results, elapsed = ensembles
    worst = max(
        float(np.abs(tr.centroids).max())
        for r in results.values() for tr in r.trajectories.values()
    )
    n = sum(len(r.trajectories) for r in results.values())
    criterion["detail"] = f"max |centroid| {worst:.1e} over {n} runs, {elapsed:.1f}s"
    assert n == 20 and not any(r.failed for r in results.values())
    assert worst <= 1e-10
    assert elapsed < 60


@pytest.mark.criterion("6 annealing ends below the deterministic plateau")
def test_annealing_efficacy(criterion, ensembles, plateau):
    results, elapsed = ensembles
    det = {
        "paper-star": plateau[0].summaries[0].final_lyapunov,
        "paper-circle": run(preset("paper-circle", noise=False)).summaries[0].final_lyapunov,
    }
    medians = {}
    for name, r in results.items():
        assert all(tr.final_time == 5000.0 for tr in r.trajectories.values())
        medians[name] = float(np.median([s.final_lyapunov for s in r.summaries]))
    criterion["detail"] = ", ".join(
        f"{k} median {medians[k]:.3g} vs plateau {det[k]:.3f}" for k in medians
    )
    for name, v in medians.items():
        assert v < det[name]
        assert v <= 1.0
    assert elapsed < 300


@pytest.mark.criterion("7 zero noise reproduces Euler bit for bit")
def test_noiseless_limit(criterion, star5):
    q, p0 = SQUARE_TARGET, SPREAD_INITIAL
    euler = integrate(star5, p0, q, IntegratorParams(dt=0.01, t_end=10.0, scheme="deterministic-euler"))
    em = integrate(star5, p0, q, IntegratorParams(dt=0.01, t_end=10.0, scheme="stochastic-euler-maruyama"),
                   AnnealingSchedule(0.0, 0.001), seed=5)
    criterion["detail"] = f"{len(euler) - 1} steps compared"
    assert len(euler) == 1001
    assert euler.configurations.tobytes() == em.configurations.tobytes()


@pytest.mark.criterion("8 same seed gives byte-identical CSV")
def test_reproducible_csv(criterion, tmp_path):
    sizes = []
    for name in ("paper-star", "paper-circle"):
        s = preset(name).replace(seed=11)
        paths = []
        for k in range(2):
            path = tmp_path / f"{name}_{k}.csv"
            emit_csv(run(s).trajectories[11], path)
            paths.append(path)
        a, b = (p.read_bytes() for p in paths)
        sizes.append(len(a))
        assert a == b
    criterion["detail"] = f"compared {sizes[0]} and {sizes[1]} bytes"
