"""Command-line entry point: ``hc2lab <subcommand> ...``.

Exit codes: 0 success, 1 an asserted audit statement failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from .copies import BudgetExceeded, count_copies, enumerate_copies, export_catalog_csv
from .graph_core import EdgeSet, RngStream, read_graph, sample_gnm, sample_gnp, write_graph
from .io import atomic_write_text, csv_text, json_text
from .solver import SearchBudget, find_power_ham

log = logging.getLogger("hc2lab")

EXIT_OK, EXIT_AUDIT, EXIT_USAGE = 0, 1, 2

AUDIT_STATEMENTS = (
    "prop_easy",
    "prop_easy2",
    "tree_lemma",
    "subtree",
    "ivc",
    "fi_bound",
    "fiand",
    "spread",
)

# per-subcommand defaults for options that may also come from a JSON config
DEFAULTS = {
    "solve": {"k": 2, "node_limit": 10**9, "time_limit": 300.0},
    "copies": {"k": 2},
    "fragments": {"C": 2.0, "c0_surrogate": 3.0, "trials": 100, "simulations": 10000},
    "threshold": {"trials": 100, "coupled": True, "node_limit": 10**8, "time_limit": 60.0},
}


class UsageError(Exception):
    pass


def _csv_list(cast):
    def parse(text):
        return [cast(x) for x in text.split(",") if x.strip()]

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters; explicit flags win")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="master seed (required for stochastic commands)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--workers", type=int, default=None, help="worker processes (parallelism hint)")

    p = argparse.ArgumentParser(prog="hc2lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample G(n,p) or G(n,m) to a graph file")
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--m", type=int, dest="m_edges")

    s = sub.add_parser("solve", parents=[common], help="search for a spanning k-th power of a Hamilton cycle")
    s.add_argument("--input")
    s.add_argument("--k", type=int)
    s.add_argument("--node-limit", type=int)
    s.add_argument("--time-limit", type=float)

    c = sub.add_parser("copies", parents=[common], help="count (and optionally export) the copy hypergraph")
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--export", help="write the catalog CSV here")

    a = sub.add_parser("audit", parents=[common], help="exhaustive checks of the counting bounds")
    a.add_argument("--statement", choices=AUDIT_STATEMENTS)
    a.add_argument("--n", type=int)
    mode = a.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", default=None)
    mode.add_argument("--samples", type=int)
    a.add_argument("--max-l", type=int)
    a.add_argument("--w-prime", type=int)

    f = sub.add_parser("fragments", help="fragment / two-round experiments")
    fsub = f.add_subparsers(dest="fragments_command", required=True)
    for name, help_ in (
        ("census", "bad-pair census with fixed-size W"),
        ("two-round", "end-to-end two-round exposure"),
        ("second-moment", "second-moment report for one seeded W0"),
    ):
        fp = fsub.add_parser(name, parents=[common], help=help_)
        fp.add_argument("--n", type=int)
        fp.add_argument("--C", type=float, dest="C")
        fp.add_argument("--c0-surrogate", type=float)
        fp.add_argument("--k", type=int, dest="frag_k")
        fp.add_argument("--w", type=int)
        fp.add_argument("--trials", type=int)
        if name == "second-moment":
            fp.add_argument("--simulations", type=int)

    t = sub.add_parser("threshold", parents=[common], help="Monte Carlo containment probabilities over C")
    t.add_argument("--n-list", type=_csv_list(int))
    t.add_argument("--c-list", type=_csv_list(float))
    t.add_argument("--trials", type=int)
    t.add_argument("--coupled", action=argparse.BooleanOptionalAction, default=None)
    t.add_argument("--node-limit", type=int)
    t.add_argument("--time-limit", type=float)
    t.add_argument("--fit-out", help="write per-n crossing fits as JSON here")
    for sp in list(sub.choices.values()) + list(fsub.choices.values()):
        sp.set_defaults(_parser=sp)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS.get(args.command, {}))
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        if "master_seed" in loaded and "seed" not in loaded:
            loaded["seed"] = loaded.pop("master_seed")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if val is not None and key != "config" and not key.startswith("_"):
            cfg[key] = val
    if "frag_k" in cfg:
        cfg["k"] = cfg.pop("frag_k")
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _header(cfg, command) -> list[str]:
    shown = {k: v for k, v in sorted(cfg.items()) if k not in ("out", "verbose", "no_timestamp", "workers")}
    lines = [f"hc2lab {__version__} {command}", "config: " + json.dumps(shown, sort_keys=True, default=str)]
    if not cfg.get("no_timestamp"):
        lines.append("generated: " + datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"))
    return lines


def _emit(cfg, text: str) -> None:
    if cfg.get("out"):
        atomic_write_text(cfg["out"], text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg, command, payload: dict) -> None:
    meta = {"command": command, "config": json.loads(json.dumps(
        {k: v for k, v in cfg.items() if k not in ("out", "verbose", "no_timestamp", "workers")}, default=str))}
    if not cfg.get("no_timestamp"):
        meta["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    _emit(cfg, json_text({**payload, "_meta": meta}))


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(cfg) -> int:
    _require(cfg, "n", "seed")
    rng = RngStream(cfg["seed"], 0)
    if cfg.get("p") is not None:
        g = sample_gnp(cfg["n"], cfg["p"], rng)
    elif cfg.get("m_edges") is not None:
        g = sample_gnm(cfg["n"], cfg["m_edges"], rng)
    else:
        raise UsageError("gen needs --p or --m")
    if cfg.get("out"):
        write_graph(g, cfg["out"])
    else:
        from .graph_core import format_graph

        sys.stdout.write(format_graph(g))
    return EXIT_OK


def cmd_solve(cfg) -> int:
    _require(cfg, "input")
    g = read_graph(cfg["input"])
    budget = SearchBudget(int(cfg["node_limit"]), float(cfg["time_limit"]))
    rng = RngStream(cfg["seed"], 0) if cfg.get("seed") is not None else None
    out = find_power_ham(g, int(cfg.get("k", 2)), budget, rng)
    _emit(cfg, json.dumps(out.to_json(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_copies(cfg) -> int:
    _require(cfg, "n")
    n, k = cfg["n"], int(cfg.get("k", 2))
    total = count_copies(n)
    if cfg.get("export"):
        cat = enumerate_copies(n, k)
        export_catalog_csv(cat, cfg["export"])
    _emit(cfg, f"{total}\n")
    return EXIT_OK


def cmd_audit(cfg) -> int:
    from . import spread_audit as sa

    _require(cfg, "statement")
    st = cfg["statement"]
    sampled = cfg.get("samples") is not None
    if sampled:
        _require(cfg, "seed")
    n = cfg.get("n")
    reports: list = []
    asserted = True
    if st == "prop_easy":
        _require(cfg, "n")
        reports = sa.audit_prop_easy(n, cfg.get("max_l") or n // 3)
    elif st == "ivc":
        _require(cfg, "n")
        reports = sa.audit_ivc(n, cfg.get("max_l"))
    elif st == "prop_easy2":
        _require(cfg, "n")
        from .copies import CyclicOrdering, power_edges

        S = power_edges(CyclicOrdering.identity(n))
        if sampled:
            gen = RngStream(cfg["seed"], 0).generator()
            idx = S.indices()
            for _ in range(cfg["samples"]):
                h = int(gen.integers(0, min(12, len(idx)) + 1))
                F = EdgeSet.from_indices(n, gen.choice(idx, size=h, replace=False))
                reports += sa.audit_prop_easy2(F)
        else:
            reports = sa.audit_prop_easy2(S)
    elif st == "tree_lemma":
        _require(cfg, "n")
        from .copies import CyclicOrdering, power_edges
        from .graph_core import Graph

        G = Graph(n, power_edges(CyclicOrdering.identity(n)))
        reports = [sa.check_tree_lemma(G, 0, h) for h in range(1, (cfg.get("max_l") or 5) + 1)]
    elif st == "subtree":
        top = cfg.get("max_l") or 8
        reports = [sa.check_subtree_formula(d, v) for d in (2, 3, 4) for v in range(1, top + 1)]
    elif st == "fi_bound":
        _require(cfg, "n")
        reports = sa.check_fi_bounds(n, sa.overlap_histogram(n))
    elif st == "fiand":
        _require(cfg, "n")
        m = n * (n - 1) // 2
        wps = [cfg["w_prime"]] if cfg.get("w_prime") is not None else range(0, m - 2 * n + 1)
        reports = [
            sa.check_fiand_ratio(n, wp, i) for wp in wps for i in range(2 * n + 1) if 2 * n - i <= m - 2 * n
        ]
    elif st == "spread":
        _require(cfg, "n")
        reports = sa.spread_reports(n, range(1, 2 * n + 1))
        asserted = n >= 8
    rows = [r.row() for r in reports]
    _emit(cfg, csv_text(sa.REPORT_HEADER, rows, _header(cfg, "audit")))
    failed = [r for r in reports if not r.holds]
    for r in failed[:10]:
        log.warning("violation: %s %s lhs=%s rhs=%s", r.statement, r.instance, r.lhs, r.rhs)
    print(f"{st}: {len(reports)} instances, {len(failed)} violations", file=sys.stderr)
    return EXIT_AUDIT if failed and asserted else EXIT_OK


def _plan(cfg):
    from .fragment_lab import TwoRoundPlan

    _require(cfg, "n", "seed")
    return TwoRoundPlan(cfg["n"], float(cfg["c0_surrogate"]), float(cfg["C"]), cfg.get("k"), cfg.get("w"))


def cmd_fragments(cfg) -> int:
    from . import fragment_lab as fl

    sub = cfg["fragments_command"]
    plan = _plan(cfg)
    if sub == "census":
        res = fl.bad_pair_census(plan, int(cfg["trials"]), cfg["seed"])
        _emit_json(cfg, "fragments census", {"plan": plan.to_json(), "census": res.to_json()})
        return EXIT_OK
    if sub == "two-round":
        recs = fl.two_round_experiment(plan, int(cfg["trials"]), cfg["seed"])
        lines = _header(cfg, "fragments two-round") + ["plan: " + json.dumps(plan.to_json(), sort_keys=True)]
        _emit(cfg, csv_text(fl.TRIAL_HEADER, [r.row() for r in recs], lines))
        unsound = [r.trial for r in recs if not r.sound]
        if unsound:
            log.error("X > 0 without solver-confirmed containment in trials %s", unsound)
            return EXIT_AUDIT
        return EXIT_OK
    # second-moment
    stream = RngStream(cfg["seed"], 0)
    W0 = sample_gnp(plan.n, plan.p0, stream.child(0)).edges
    fam = fl.build_fragment_family(W0, plan.k)
    rep = fl.second_moment(fam, Fraction(plan.p1), int(cfg["simulations"]), stream.child(1))
    _emit_json(cfg, "fragments second-moment", {"plan": plan.to_json(), "w0_size": len(W0), "report": rep.to_json()})
    return EXIT_AUDIT if not rep.variance_ok else EXIT_OK


def cmd_threshold(cfg) -> int:
    from . import threshold_mc as tm

    _require(cfg, "n_list", "c_list", "seed")
    grid = tm.ThresholdGrid(
        tuple(cfg["n_list"]),
        tuple(cfg["c_list"]),
        int(cfg["trials"]),
        cfg["seed"],
        SearchBudget(int(cfg["node_limit"]), float(cfg["time_limit"])),
        bool(cfg["coupled"]),
    )
    cells = tm.run_grid(grid, workers=cfg.get("workers") or 1)
    _emit(cfg, csv_text(tm.GRID_HEADER, [c.row() for c in cells], _header(cfg, "threshold")))
    if cfg.get("fit_out"):
        fits = [tm.fit_crossing([c for c in cells if c.n == n]).to_json() for n in grid.n_values]
        atomic_write_text(cfg["fit_out"], json_text(fits))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "copies": cmd_copies,
    "audit": cmd_audit,
    "fragments": cmd_fragments,
    "threshold": cmd_threshold,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, BudgetExceeded, ValueError, OSError) as exc:
        if isinstance(exc, UsageError):
            args._parser.print_help(sys.stderr)
        print(f"hc2lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
