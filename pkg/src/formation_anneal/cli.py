"""Command-line front end.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 an integration
run failed (the other ensemble members still complete and are reported).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dynamics import IntegratorParams, make_rng
from .equilibria import check_equilibrium, construction_edges, random_sphere_coords, sample_tree_equilibrium
from .harness import run, summarize_ensemble, write_outputs
from .scenario import PRESET_SCENARIOS, Scenario, ScenarioError, load_scenario, preset

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3


def _apply_overrides(s: Scenario, args) -> Scenario:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.dt is not None or args.t_end is not None:
        try:
            changes["params"] = IntegratorParams(
                dt=args.dt if args.dt is not None else s.params.dt,
                t_end=args.t_end if args.t_end is not None else s.params.t_end,
                record_every=s.params.record_every,
                scheme=s.params.scheme,
            )
        except ValueError as exc:
            raise ScenarioError(f"override rejected: {exc}") from None
    return s.replace(**changes) if changes else s


def _execute(s: Scenario, out: Path) -> int:
    result = run(s)
    summary_path = write_outputs(result, out)
    agg = summarize_ensemble(result.summaries)
    for rs in result.summaries:
        line = (f"{rs.scenario} seed={rs.seed} status={rs.status} t={rs.final_time:g} "
                f"phi={rs.final_lyapunov:.6g} stop={rs.stop_reason}")
        if rs.error:
            line += f" error={rs.error}"
        print(line)
    if agg["median_final_lyapunov"] is not None:
        print(f"median final phi {agg['median_final_lyapunov']:.6g} over {agg['n_runs'] - agg['n_failed']} run(s)")
    print(f"wrote {summary_path}")
    return EXIT_FAILED if result.failed else EXIT_OK


def cmd_run(args) -> int:
    s = _apply_overrides(load_scenario(args.scenario), args)
    return _execute(s, Path(args.out))


def cmd_preset(args) -> int:
    s = preset(args.name, noise=not args.no_noise)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ScenarioError("--seeds must be >= 1")
        s = s.replace(ensemble_size=args.seeds)
    s = _apply_overrides(s, args)
    return _execute(s, Path(args.out))


def cmd_check(args) -> int:
    s = load_scenario(args.scenario)
    kind = "tree" if s.graph.is_tree() else ("connected" if s.graph.is_connected() else "disconnected")
    print(f"{args.scenario}: ok ({s.graph.n_vertices} agents in R^{s.dimension}, "
          f"{s.graph.n_edges} edges, {kind}, {s.params.scheme}, {s.params.n_steps} steps)")
    return EXIT_OK


def cmd_sample_equilibria(args) -> int:
    s = load_scenario(args.scenario)
    if not s.graph.is_tree():
        raise ScenarioError(f"{args.scenario}: sample-equilibria needs a tree graph")
    if args.count < 1:
        raise ScenarioError("--count must be >= 1")
    seed = s.seed if args.seed is None else args.seed
    rng = make_rng(seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{s.name}_equilibria.csv"
    n, dim = s.graph.n_vertices, s.dimension
    header = ["sample", "phi", "drift_norm"]
    header += [f"s{p}_{c}_{k}" for p, c in construction_edges(s.graph) for k in range(1, dim + 1)]
    header += [f"a{i}_{k}" for i in range(1, n + 1) for k in range(1, dim + 1)]
    worst = 0.0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for m in range(args.count):
            coords = random_sphere_coords(s.graph, dim, rng)
            p = sample_tree_equilibrium(s.graph, s.target, coords)
            rep = check_equilibrium(s.graph, p, s.target)
            worst = max(worst, rep.drift_norm)
            phi = float(np.sum((p.points - s.target) ** 2))
            row = [m, phi, rep.drift_norm, *np.concatenate([c.direction for c in coords]), *p.points.ravel()]
            w.writerow([str(m)] + [repr(float(x)) for x in row[1:]])
    print(json.dumps({"samples": args.count, "max_drift_norm": worst, "path": str(path)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formation-anneal",
        description="Formation control toward a target embedding, with annealed noise.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--dt", type=float)
        p.add_argument("--t-end", dest="t_end", type=float)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run one of the built-in five-agent experiments")
    p.add_argument("name", choices=sorted(PRESET_SCENARIOS))
    p.add_argument("--no-noise", action="store_true", help="deterministic RK4 run instead of annealing")
    p.add_argument("--seeds", type=int, help="ensemble size")
    overrides(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sample-equilibria", help="sample equilibria of a tree scenario")
    p.add_argument("scenario")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sample_equilibria)

    p = sub.add_parser("check", help="validate a scenario file without running it")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
