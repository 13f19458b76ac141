"""Command-line front end: ``polyurn analyze|simulate|flow|report``.

Exit codes: 0 success, 1 input/configuration error, 2 numerical failure
(solver did not converge, flow step too large or left the domain).  Every
command that gets past argument and hypergraph parsing writes a manifest
``<command>.manifest.json`` into ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, dynamics, equilibria, exactlin, hypergraph, plot, simulate, spectral
from .errors import BoundaryOnly, DomainExit, HypergraphError, NoConvergence, StepTooLarge

ANALYSIS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "m", "N", "edges", "rank_incidence", "k", "kernel", "kernel_full_dim",
        "equilibria", "pendant", "limit_candidates", "verdict", "thresholds",
    ],
    "properties": {
        "m": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "edges": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "rank_incidence": {"type": "integer"},
        "k": {"type": "integer", "minimum": 0},
        "kernel_full_dim": {"type": "integer", "minimum": 0},
        "kernel": {
            "type": "object",
            "required": ["dim", "ambient", "basis"],
            "properties": {
                "basis": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+/\d+$"}},
                }
            },
        },
        "equilibria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["requested_support", "converged", "point", "support", "classification", "gradient"],
                "properties": {
                    "classification": {"enum": ["unstable", "non_unstable"]},
                    "converged": {"type": "boolean"},
                    "spectrum": {"type": ["object", "null"]},
                },
            },
        },
        "pendant": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["edge", "i", "j"],
            },
        },
        "limit_candidates": {"type": ["object", "null"]},
        "verdict": {"enum": ["theorem1", "theorem2", "boundary"]},
        "thresholds": {"type": "object"},
    },
}


def verdict(k: int, pendant: bool, interior: bool) -> str:
    if pendant or not interior:
        return "boundary"
    return "theorem1" if k == 0 else "theorem2"


def load_hypergraph(source: str) -> hypergraph.Hypergraph:
    if source.startswith("builtin:"):
        return hypergraph.builtin(source[len("builtin:"):])
    return hypergraph.parse(Path(source).read_text())


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


class Manifest:
    def __init__(self, command: str, args: argparse.Namespace, out: Path):
        self.out = out
        self.data = {
            "tool": "polyurn",
            "version": __version__,
            "command": command,
            "hypergraph": getattr(args, "hypergraph", None),
            "config": {k: v for k, v in vars(args).items() if k != "func"},
            "outputs": [],
            "timings": {},
        }
        self._t0 = time.perf_counter()

    def output(self, path: Path) -> Path:
        self.data["outputs"].append(str(path))
        return path

    def time(self, label: str, seconds: float) -> None:
        self.data["timings"][label] = seconds

    def write(self, exit_code: int) -> None:
        self.data["exit_code"] = exit_code
        self.data["status"] = "ok" if exit_code == 0 else "error"
        self.data["timings"]["wall_seconds"] = time.perf_counter() - self._t0
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{self.data['command']}.manifest.json"
        path.write_text(json.dumps(self.data, indent=2, default=str) + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# --- analyze --------------------------------------------------------------------


def analyze(H: hypergraph.Hypergraph, supports=(), eps_zero=equilibria.EPS_ZERO, eps=equilibria.EPS_GRAD):
    """Build the analysis report; returns (report dict, all_converged)."""
    K = exactlin.kernel_gamma(H)
    pendant = equilibria.detect_pendant(H)
    requested = [None, *supports]
    records = []
    all_converged = True
    for S in requested:
        converged = True
        try:
            rec = equilibria.find_equilibrium(H, S, eps_zero=eps_zero, eps=eps)
        except NoConvergence as exc:
            rec, converged = exc.record, False
            all_converged = False
        entry = rec.to_json()
        entry["requested_support"] = list(range(H.m)) if S is None else sorted(S)
        entry["converged"] = converged
        entry["spectrum"] = None
        if converged:
            entry["spectrum"] = spectral.restricted_spectrum(H, rec.point, K=K).to_json()
        records.append((rec, entry))

    full = records[0][0]
    interior = full.is_interior and records[0][1]["converged"]
    candidates = equilibria.LimitCandidateSet(full, K) if interior else None
    report = {
        "m": H.m,
        "N": H.N,
        "edges": [list(e) for e in H.edges],
        "rank_incidence": exactlin.incidence_rank(H),
        "k": K.dim,
        "kernel_full_dim": exactlin.kernel_full(H).dim,
        "kernel": K.to_json(),
        "equilibria": [entry for _, entry in records],
        "pendant": [{"edge": list(I), "i": i, "j": j} for I, i, j in pendant],
        "limit_candidates": candidates.to_json() if candidates else None,
        "verdict": verdict(K.dim, bool(pendant), interior),
        "thresholds": {"eps_zero": eps_zero, "eps": eps, "relative_zero_eigenvalue": spectral.REL_ZERO},
    }
    return report, all_converged


def candidates_from_report(H, report: dict):
    if report.get("m") != H.m or [tuple(e) for e in report.get("edges", [])] != list(H.edges):
        raise ValueError("analysis report was computed for a different hypergraph")
    lc = report.get("limit_candidates")
    if not lc:
        return None
    base = equilibria.record_at(H, lc["base"]["point"])
    return equilibria.LimitCandidateSet(base, exactlin.KernelBasis.from_json(lc["kernel"]))


def cmd_analyze(args, H, manifest: Manifest) -> int:
    supports = [tuple(s) for s in args.support or []]
    t = time.perf_counter()
    report, converged = analyze(H, supports)
    manifest.time("analyze_seconds", time.perf_counter() - t)
    path = manifest.output(args.out / "analysis.json")
    path.write_text(_dump(report))
    if args.json:
        sys.stdout.write(_dump(report))
    else:
        print(f"m={report['m']} N={report['N']} rank I(H)={report['rank_incidence']} k={report['k']}")
        print(f"verdict: {report['verdict']}")
        for e in report["equilibria"]:
            print(f"  support {e['support']}: {e['classification']} at {np.round(e['point'], 6).tolist()}")
        if report["pendant"]:
            print(f"  pendant triples: {[(p['edge'], p['i'], p['j']) for p in report['pendant']]}")
    return 0 if converged else 2


# --- simulate -------------------------------------------------------------------


def cmd_simulate(args, H, manifest: Manifest) -> int:
    balls = args.balls if args.balls is not None else [1] * H.m
    try:
        config = simulate.SimConfig(
            seed=args.seed,
            replicas=args.replicas,
            steps=args.steps,
            initial_balls=balls,
            schedule=simulate.Schedule.parse(args.schedule),
            record_noise=args.noise,
        )
        if len(balls) != H.m:
            raise ValueError(f"--balls needs {H.m} entries, got {len(balls)}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.against_analysis:
        try:
            candidates = candidates_from_report(H, json.loads(Path(args.against_analysis).read_text()))
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot use analysis report: {exc}", file=sys.stderr)
            return 1
    else:
        try:
            candidates = equilibria.limit_candidates(H)
        except (BoundaryOnly, NoConvergence):
            candidates = None

    t = time.perf_counter()
    results = simulate.run(H, config, threads=args.threads)
    manifest.time("simulate_seconds", time.perf_counter() - t)
    simulate.write_trajectories_csv(results, manifest.output(args.out / "trajectories.csv"))
    stats = simulate.limit_statistics(H, results, candidates)
    summary = {
        "config": config.to_json(),
        "hypergraph": H.to_dict(),
        "candidates": candidates.to_json() if candidates else None,
        "terminal": [
            {"replica": r.replica, "x": [float(v) for v in r.terminal], "balls": [int(b) for b in r.terminal_balls]}
            for r in results
        ],
        "limit_statistics": stats.to_json(),
    }
    if config.record_noise:
        summary["noise"] = [simulate.noise_diagnostics(r.noise).to_json() for r in results]
    manifest.output(args.out / "summary.json").write_text(_dump(summary))
    if args.json:
        sys.stdout.write(_dump(summary))
    else:
        agg = stats.aggregate()
        print(f"{config.replicas} replicas x {config.steps} steps written to {args.out}")
        for key, vals in agg.items():
            print(f"  terminal {key}: mean {vals['mean']:.4g}  median {vals['median']:.4g}  max {vals['max']:.4g}")
    return 0


# --- flow -----------------------------------------------------------------------


def cmd_flow(args, H, manifest: Manifest) -> int:
    start = np.array(args.start, dtype=float) if args.start else np.ones(H.m) / H.m
    if start.shape != (H.m,):
        print(f"error: --start needs {H.m} entries", file=sys.stderr)
        return 1
    try:
        start = start / start.sum()
        domain = dynamics.FlowDomain(args.c, H.N) if args.c is not None else dynamics.FlowDomain.default(H)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    t = time.perf_counter()
    try:
        traj = dynamics.flow_integrate(H, start, domain, T=args.T, dt=args.dt)
    except (StepTooLarge, DomainExit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manifest.time("flow_seconds", time.perf_counter() - t)
    traj.write_csv(manifest.output(args.out / "flow.csv"))
    drops = np.diff(traj.lyapunov)
    worst = float(-drops.min()) if drops.size else 0.0
    if worst > 1e-9:
        print(f"error: L decreased by {worst:.3g} along the flow", file=sys.stderr)
        return 2
    if args.json:
        sys.stdout.write(_dump({"terminal": [float(x) for x in traj.terminal], "L": float(traj.lyapunov[-1])}))
    else:
        print(f"terminal point {np.round(traj.terminal, 8).tolist()}, L = {traj.lyapunov[-1]:.12g}")
    return 0


# --- report ---------------------------------------------------------------------


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def cmd_report(args, manifest: Manifest) -> int:
    if not args.inputs:
        print("error: no input files", file=sys.stderr)
        return 1
    args.out.mkdir(parents=True, exist_ok=True)
    lines = ["# polyurn report", ""]
    for src in args.inputs:
        src = Path(src)
        try:
            header, data = _read_csv(src)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        stem = src.stem
        if header[:2] == ["replica", "n"]:
            coords = header[2:]
            series = []
            for r in np.unique(data[:, 0]):
                block = data[data[:, 0] == r]
                for c, name in enumerate(coords):
                    series.append((name, block[:, 1], block[:, 2 + c]))
            svg = plot.line_chart(series, title=f"{stem}: x_i(n)", xlabel="n", ylabel="x_i(n)", log_x=args.log_x)
            manifest.output(args.out / f"{stem}.svg").write_text(svg)
            lines += _terminal_table(stem, coords, data)
        elif header[0] == "t" and header[-1] == "L":
            coords = header[1:-1]
            series = [(name, data[:, 0], data[:, 1 + c]) for c, name in enumerate(coords)]
            svg = plot.line_chart(series, title=f"{stem}: v_i(t)", xlabel="t", ylabel="v_i(t)", log_x=args.log_x)
            manifest.output(args.out / f"{stem}.svg").write_text(svg)
            if args.show_lyapunov:
                svg = plot.line_chart([("L", data[:, 0], data[:, -1])], title=f"{stem}: L(v(t))", xlabel="t", ylabel="L")
                manifest.output(args.out / f"{stem}_lyapunov.svg").write_text(svg)
            monotone = bool(np.all(np.diff(data[:, -1]) >= -1e-9))
            lines += [
                f"## {stem}",
                "",
                "| quantity | value |",
                "|---|---|",
                f"| final t | {data[-1, 0]:.6g} |",
                *(f"| {name} | {data[-1, 1 + c]:.8g} |" for c, name in enumerate(coords)),
                f"| L | {data[-1, -1]:.12g} |",
                f"| L non-decreasing | {'yes' if monotone else 'no'} |",
                "",
            ]
        else:
            print(f"error: {src}: unrecognized CSV header {header}", file=sys.stderr)
            return 1
    manifest.output(args.out / "summary.md").write_text("\n".join(lines))
    return 0


def _terminal_table(stem, coords, data):
    last = data[:, 1].max()
    term = data[data[:, 1] == last][:, 2:]
    out = [
        f"## {stem} (terminal n = {int(last)}, {len(term)} replicas)",
        "",
        "| coordinate | mean | std | min | max |",
        "|---|---|---|---|---|",
    ]
    for c, name in enumerate(coords):
        col = term[:, c]
        std = col.std(ddof=1) if len(col) > 1 else 0.0
        out.append(f"| {name} | {col.mean():.6g} | {std:.3g} | {col.min():.6g} | {col.max():.6g} |")
    return out + [""]


# --- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("polyurn-out"), help="output directory")
    common.add_argument("--json", action="store_true", help="print machine-readable JSON to stdout")
    hyper = argparse.ArgumentParser(add_help=False)
    hyper.add_argument("--hypergraph", required=True, help="JSON file or builtin:<name>")

    parser = argparse.ArgumentParser(prog="polyurn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"polyurn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common, hyper], help="kernel, equilibria, spectra, verdict")
    p.add_argument("--support", type=_int_list, action="append", help="extra face to solve on, e.g. 0,2")

    p = sub.add_parser("simulate", parents=[common, hyper], help="run urn replicas")
    p.add_argument("--balls", type=_int_list, help="initial ball counts (default all ones)")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", default="geometric:1.1", help="geometric:<ratio> or linear:<stride>")
    p.add_argument("--noise", action="store_true", help="record the martingale noise")
    p.add_argument("--against-analysis", help="analysis.json whose candidate set to measure against")
    p.add_argument("--threads", type=int, default=None, help="default: $POLYURN_THREADS or 1")

    p = sub.add_parser("flow", parents=[common, hyper], help="integrate dv/dt = F(v)")
    p.add_argument("--start", type=_float_list, help="starting point (default uniform)")
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--c", type=float, default=None, help="edge-sum cutoff, default 1/(2N)")

    p = sub.add_parser("report", parents=[common], help="SVG charts and markdown summary")
    p.add_argument("inputs", nargs="*", help="trajectory or flow CSV files")
    p.add_argument("--log-x", action="store_true")
    p.add_argument("--show-lyapunov", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report":
        manifest = Manifest("report", args, args.out)
        code = cmd_report(args, manifest)
        manifest.write(code)
        return code
    try:
        H = load_hypergraph(args.hypergraph)
    except (OSError, HypergraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = Manifest(args.command, args, args.out)
    args.out.mkdir(parents=True, exist_ok=True)
    handler = {"analyze": cmd_analyze, "simulate": cmd_simulate, "flow": cmd_flow}[args.command]
    code = handler(args, H, manifest)
    manifest.write(code)
    return code


if __name__ == "__main__":
    sys.exit(main())
