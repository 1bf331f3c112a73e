"""``sfcluster`` command line: build overlays, cluster them, measure them, sweep seeds."""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from sfcluster import centralized, protocol, sfn_rewire
from sfcluster.graph import (
    DEFAULT_D_MAX,
    Graph,
    empirical_degree_distribution,
    partition,
    read_edge_list,
    write_edge_list,
)
from sfcluster.metrics import fidelity, trace_distance
from sfcluster.powerlaw import PowerLawParams, theoretical_distribution
from sfcluster.report import RunReport, write_csv, write_json, write_report
from sfcluster.simnet import DelayModel, write_trace

log = logging.getLogger("sfcluster")

_MULT = re.compile(r"^\s*([0-9]*\.?[0-9]+)\s*[xX]?\s*N\s*$")


def parse_count(text: str, n_nodes: int) -> int:
    """``1400`` or a multiple of N such as ``1.4N`` / ``1.4xN``."""
    m = _MULT.match(text)
    if m:
        return centralized.iterations_for(float(m.group(1)), n_nodes)
    try:
        v = int(text)
    except ValueError:
        raise ValueError(f"bad iteration count {text!r}; use an integer or e.g. 1.4N") from None
    if v < 0:
        raise ValueError("iteration count must be >= 0")
    return v


def parse_seeds(text: str) -> list[int]:
    """``3`` or an inclusive range ``a..b``."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


# -- shared pieces ------------------------------------------------------------


def fit(g: Graph, gamma: float) -> tuple[float, float]:
    emp = empirical_degree_distribution(g)
    theory = theoretical_distribution(PowerLawParams(gamma), max(emp.support_max, 1))
    return trace_distance(emp, theory), fidelity(emp, theory)


def build_graph(mode: str, n: int, gamma: float, seed: int, iters: str | None = None,
                epsilon: float | None = None, walk_length: int = 10,
                topology: str = "matched-random") -> tuple[Graph, dict]:
    if mode == "centralized":
        if epsilon is not None:
            cfg = centralized.RewireConfig(n, gamma, epsilon=epsilon, seed=seed)
        else:
            cfg = centralized.RewireConfig(n, gamma, fixed_iterations=parse_count(iters or "1.4N", n),
                                           seed=seed)
        g = centralized.rewire(cfg)
        info = {"iterations": g.n_edges, "alpha": cfg.alpha}
        if cfg.epsilon is not None:
            info["epsilon"] = cfg.epsilon
        return g, info
    cfg = sfn_rewire.RewireWalkConfig(walk_length=walk_length, gamma=gamma, seed=seed)
    g, stats = sfn_rewire.build_distributed(n, cfg, topology)
    return g, {"walk_length": walk_length, "topology": topology, "rewired": stats.n_rewired,
               "skipped": stats.n_skipped}


def cluster_graph(mode: str, g: Graph, threshold: int, d_max: int, seed: int,
                  tie_break: str, delay: str, tau_end: float | None):
    """Returns ``(assignment map, sizes, n_isolated, protocol result or None)``."""
    part = partition(g, threshold)
    if part.n_cores == 0:
        raise centralized.NoCoresError(threshold, int(g.degrees().max(initial=0)))
    if mode == "centralized":
        ca = centralized.assign_clusters(g, part, d_max, seed=seed, tie_break=tie_break)
        core_of, unassigned, res = ca.core_of(), ca.unassigned, None
    else:
        delays = DelayModel.parse(delay, seed=seed)
        tau = protocol.default_tau_end(delays, d_max) if tau_end is None else tau_end
        res = protocol.start_round(g, part, delays, tau, d_max)
        core_of, unassigned = res.core_of(), res.isolated
    members: dict[int, list[tuple[int, int]]] = {c: [] for c in part.core_ids}
    for s, (c, h) in sorted(core_of.items()):
        members[c].append((s, h))
    amap = {
        "threshold": threshold,
        "d_max": d_max,
        "cores": [{"id": c, "members": [{"id": s, "hops": h} for s, h in members[c]]}
                  for c in part.core_ids],
        "isolated": sorted(unassigned),
    }
    sizes = [len(members[c]) for c in part.core_ids]
    return amap, sizes, len(unassigned), res


def _graph_gamma(g: Graph, override: float | None) -> float:
    if override is not None:
        return override
    try:
        return float(g.meta.get("gamma", "2.5"))
    except ValueError:
        return 2.5


def _graph_seed(g: Graph) -> int:
    try:
        return int(g.meta.get("seed", "0"))
    except ValueError:
        return 0


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _degree_rows(g: Graph, gamma: float) -> list[tuple[int, float, float]]:
    emp = empirical_degree_distribution(g)
    S = max(emp.support_max, 1)
    theory = theoretical_distribution(PowerLawParams(gamma), S)
    e, t = emp.padded(S), theory.padded(S)
    return [(k, float(e[k - 1]), float(t[k - 1])) for k in range(1, S + 1)]


def _write_table(rows, header, out: Path, stem: str, fmt: str) -> Path:
    if fmt == "json":
        path = out / f"{stem}.json"
        write_json([dict(zip(header, r)) for r in rows], path)
    else:
        path = out / f"{stem}.csv"
        write_csv(rows, header, path)
    return path


# -- commands -----------------------------------------------------------------


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    PowerLawParams(args.gamma)  # reject divergent gamma before building
    g, info = build_graph(args.mode, args.n, args.gamma, args.seed, args.iters, args.epsilon,
                          args.walk_length, args.topology)
    out = _outdir(args.out)
    write_edge_list(g, out / "graph.csv")
    e, f = fit(g, args.gamma)
    rep = RunReport("build", args.mode, g.n_nodes, args.gamma, args.seed, g.n_edges, e, f,
                    build=info)
    if args.timing:
        rep.wall_time = time.perf_counter() - t0
    write_report(rep, out / "report.json")
    if args.plot:
        from sfcluster import plotting
        rows = _degree_rows(g, args.gamma)
        plotting.degree_distribution([r[0] for r in rows], [r[1] for r in rows],
                                     [r[2] for r in rows], out / "degree.png")
    print(f"{args.mode} build: N={g.n_nodes} edges={g.n_edges} trace_distance={e:.4f} -> {out}")
    return 0


def cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    g = read_edge_list(args.graph)
    gamma = _graph_gamma(g, args.gamma)
    seed = _graph_seed(g) if args.seed is None else args.seed
    amap, sizes, n_iso, res = cluster_graph(args.mode, g, args.threshold, args.dmax, seed,
                                            args.tie_break, args.delay, args.tau_end)
    out = _outdir(args.out)
    write_json(amap, out / "clusters.json")
    if res is not None:
        protocol.write_state(res, out / "state.json")
        if args.trace:
            write_trace(res.trace, out / "trace.jsonl")
    core_ids = [c["id"] for c in amap["cores"]]
    _write_table(list(zip(core_ids, sizes)), ["core", "size"], out, "cluster_sizes", args.format)
    e, f = fit(g, gamma)
    rep = RunReport("cluster", args.mode, g.n_nodes, gamma, seed, g.n_edges, e, f,
                    threshold=args.threshold, n_cores=len(core_ids), n_isolated=n_iso,
                    cluster_sizes=sizes)
    if args.timing:
        rep.wall_time = time.perf_counter() - t0
    write_report(rep, out / "report.json")
    if args.plot:
        from sfcluster import plotting
        plotting.cluster_sizes(core_ids, sizes, out / "cluster_sizes.png")
    st = rep.cluster_size_stats
    print(f"{args.mode} clustering: T={args.threshold} M={len(core_ids)} mean={st.mean:.2f} "
          f"std={st.std:.2f} isolated={n_iso} -> {out}")
    return 0


def cmd_stats(args) -> int:
    g = read_edge_list(args.graph)
    gamma = _graph_gamma(g, args.gamma)
    rows = _degree_rows(g, gamma)
    out = _outdir(args.out)
    _write_table(rows, ["k", "empirical", "theoretical"], out, "degree", args.format)
    e, f = fit(g, gamma)
    write_json({"trace_distance": e, "fidelity": f, "n": g.n_nodes, "n_edges": g.n_edges,
                "gamma": gamma}, out / "metrics.json")
    if args.plot:
        from sfcluster import plotting
        plotting.degree_distribution([r[0] for r in rows], [r[1] for r in rows],
                                     [r[2] for r in rows], out / "degree.png")
    print(f"trace_distance={e:.6f} fidelity={f:.6f}")
    return 0


def cmd_sweep(args) -> int:
    """Trace distance against the centralized iteration budget, one shared run."""
    marks = [parse_count(t.strip(), args.n) for t in args.checkpoints.split(",") if t.strip()]
    cfg = centralized.RewireConfig(args.n, args.gamma, fixed_iterations=max(marks), seed=args.seed)
    rows = [(it, it / args.n, m, d) for it, m, d in centralized.distance_curve(cfg, marks)]
    out = _outdir(args.out)
    _write_table(rows, ["iterations", "multiple_of_n", "n_edges", "trace_distance"], out,
                 "distance_curve", args.format)
    if args.plot:
        from sfcluster import plotting
        plotting.distance_curve([r[0] for r in rows], [r[3] for r in rows],
                                out / "distance_curve.png", args.n)
    for r in rows:
        print(f"{r[0]:>8d} ({r[1]:.2f}N) edges={r[2]} e={r[3]:.4f}")
    return 0


def _experiment_run(job: tuple) -> list[tuple]:
    mode, n, gamma, seed, iters, walk_length, topology, thresholds, d_max, delay = job
    g, _ = build_graph(mode, n, gamma, seed, iters, None, walk_length, topology)
    e, _ = fit(g, gamma)
    rows = []
    for T in thresholds:
        try:
            _, sizes, n_iso, _ = cluster_graph(mode, g, T, d_max, seed, "lowest_id", delay, None)
        except centralized.NoCoresError:
            rows.append((seed, T, e, g.n_edges, 0, "", "", "", n))
            continue
        a = np.asarray(sizes, dtype=float)
        rows.append((seed, T, e, g.n_edges, len(sizes), float(a.mean()), float(a.std()),
                     float(a.var()), n_iso))
    return rows


def cmd_experiment(args) -> int:
    """Seed sweep of build + clustering; one row per (seed, threshold)."""
    seeds = parse_seeds(args.seeds)
    thresholds = _ints(args.threshold)
    jobs = [(args.mode, args.n, args.gamma, s, args.iters, args.walk_length, args.topology,
             thresholds, args.dmax, args.delay) for s in seeds]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_experiment_run, jobs))
    else:
        results = [_experiment_run(j) for j in jobs]
    rows = [r for rs in results for r in rs]
    header = ["seed", "threshold", "trace_distance", "n_edges", "n_cores", "mean_size",
              "std_size", "var_size", "n_isolated"]
    out = _outdir(args.out)
    _write_table(rows, header, out, "runs", args.format)
    dists = [rs[0][2] for rs in results]
    summary = {
        "mode": args.mode, "n": args.n, "gamma": args.gamma, "seeds": seeds,
        "median_trace_distance": float(np.median(dists)),
        "max_trace_distance": float(np.max(dists)),
        "n_cores": {str(T): [r[4] for r in rows if r[1] == T] for T in thresholds},
    }
    write_json(summary, out / "summary.json")
    if args.plot:
        from sfcluster import plotting
        plotting.seed_sweep(seeds, dists, out / "trace_distance.png", "trace distance")
    print(f"median trace distance over {len(seeds)} seeds: {summary['median_trace_distance']:.4f}")
    for T in thresholds:
        print(f"T={T}: M per seed {summary['n_cores'][str(T)]}")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sfcluster", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default: int | None = 0):
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="format of tabular outputs")
        sp.add_argument("--plot", action="store_true", help="also write PNG figures")
        sp.add_argument("--seed", type=int, default=seed_default)

    def building(sp):
        sp.add_argument("--mode", choices=("centralized", "distributed"), default="centralized")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--gamma", type=float, default=2.5)
        sp.add_argument("--iters", default="1.4N", help="link budget, e.g. 1400 or 1.4N")
        sp.add_argument("--walk-length", type=int, default=10)
        sp.add_argument("--topology", choices=sfn_rewire.TOPOLOGIES, default="matched-random",
                        help="starting overlay for distributed builds")

    def clustering(sp):
        sp.add_argument("--dmax", type=int, default=DEFAULT_D_MAX)
        sp.add_argument("--delay", default="uniform:0.5:1.5", help="fixed:D or uniform:LO:HI")

    b = sub.add_parser("build", help="build an overlay and write its edge list")
    building(b)
    b.add_argument("--epsilon", type=float, help="stop at this trace distance instead of --iters")
    b.add_argument("--timing", action="store_true", help="record wall time in the report")
    common(b)
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("cluster", help="cluster an existing overlay")
    c.add_argument("--graph", required=True, help="edge-list file")
    c.add_argument("--mode", choices=("centralized", "distributed"), default="centralized")
    c.add_argument("--threshold", type=int, required=True)
    c.add_argument("--gamma", type=float, help="defaults to the value in the edge-list header")
    c.add_argument("--tau-end", type=float, help="protocol timeout (default 4*dmax*max delay)")
    c.add_argument("--tie-break", choices=centralized.TIE_BREAKS, default="lowest_id")
    c.add_argument("--trace", action="store_true", help="write the event trace (distributed)")
    c.add_argument("--timing", action="store_true")
    clustering(c)
    common(c, seed_default=None)
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("stats", help="degree distribution and fit metrics of an edge list")
    s.add_argument("--graph", required=True)
    s.add_argument("--gamma", type=float)
    common(s)
    s.set_defaults(func=cmd_stats)

    w = sub.add_parser("sweep", help="trace distance versus centralized iteration budget")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--gamma", type=float, default=2.5)
    w.add_argument("--checkpoints", default="0.2N,0.4N,0.6N,0.8N,1N,1.2N,1.4N,1.6N,1.8N,2N")
    common(w)
    w.set_defaults(func=cmd_sweep)

    x = sub.add_parser("experiment", help="build and cluster over a range of seeds")
    building(x)
    x.add_argument("--threshold", default="32", help="comma-separated thresholds")
    x.add_argument("--seeds", default="0..10", help="inclusive range a..b")
    x.add_argument("--jobs", type=int, default=1)
    clustering(x)
    common(x)
    x.set_defaults(func=cmd_experiment)
    return p


def _configure_logging() -> None:
    level = os.environ.get("SFN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"sfcluster {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
