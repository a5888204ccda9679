"""Command-line interface.

Exit codes: 0 success, 2 invalid arguments or parameters, 1 runtime failure.
Every run records its fully resolved arguments; ``plantmatch rerun FILE``
replays them.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _lambda_arg(s: str) -> float:
    if s.strip().lower() in ("inf", "infinity"):
        return math.inf
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("lambda must be positive or 'inf'")
    return v


def _add_params(p: argparse.ArgumentParser, q: bool = False, need_seed: bool = False) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    if q:
        p.add_argument("--q", type=float, help="null density; must agree with the regime")
    p.add_argument("--regime", choices=["equal-ambient", "equal-average"])
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--zeta", type=float, help="lambda = 1/(zeta n)")
    g.add_argument("--lambda", dest="lam", type=_lambda_arg, help="raw activity or 'inf'")
    if need_seed:
        p.add_argument("--seed", type=int, required=True)


def _params(args):
    from .models import ModelParams, Regime

    regime = args.regime
    if regime is None:
        q = getattr(args, "q", None)
        regime = "equal-ambient" if q is None or q == args.p else "equal-average"
    if args.lam is not None and math.isfinite(args.lam) and args.lam > 1.0 / (30 * args.n):
        print(f"warning: lambda={args.lam} exceeds 1/(30n); the cluster expansion may not converge",
              file=sys.stderr)
    params = ModelParams.create(args.n, args.p, lam=args.lam, zeta=args.zeta, regime=regime)
    q = getattr(args, "q", None)
    if q is not None and not math.isclose(q, params.q, rel_tol=1e-9, abs_tol=1e-12):
        raise UsageError(f"--q {q} disagrees with the {Regime.parse(regime).value} regime "
                         f"(expected {params.q!r})")
    return params


def _load_graph(path: str):
    from .graph import read_edgelist
    return read_edgelist(path)


def _emit(args, text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _record_config(args, out: str | None) -> None:
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    lines = [f"{k} = {json.dumps(v if not (isinstance(v, float) and math.isinf(v)) else 'inf')}"
             for k, v in sorted(resolved.items())]
    text = "\n".join(lines) + "\n"
    if out:
        base = Path(out)
        target = base / "run" if base.is_dir() else base.with_suffix("")
        path = Path(str(target) + ".config.txt")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stderr.write("# resolved config: " + "; ".join(text.splitlines()) + "\n")


# ------------------------------------------------------------------ commands


def cmd_sample(args) -> int:
    from .graph import write_edgelist
    from .models import sample_null, sample_planted

    params = _params(args)
    if args.model == "planted":
        s = sample_planted(params, args.seed)
        G = s.graph
        if args.hidden_out:
            Path(args.hidden_out).write_text(
                "".join(f"{a + 1} {b + 1}\n" for a, b in s.hidden.as_tuples()))
    else:
        G = sample_null(params, args.seed)
    if args.out:
        write_edgelist(G, args.out)
    else:
        _emit(args, f"n {G.n}\n" + "".join(f"{u + 1} {v + 1}\n" for u, v in G.edges()))
    return EXIT_OK


def cmd_stats(args) -> int:
    from .graph import signed_edge_count, signed_wedge_count

    G = _load_graph(args.graph)
    out = {"n": G.n, "edges": G.edge_count,
           "signed_edge": signed_edge_count(G, args.q)}
    if G.n >= 3:
        out["signed_wedge"] = signed_wedge_count(G, args.q)
    _emit(args, json.dumps(out))
    return EXIT_OK


def cmd_llr(args) -> int:
    from .inference import ce_llr, exact_llr_breakdown, llr_approx_rhs

    params = _params(args)
    G = _load_graph(args.graph)
    if G.n != params.n:
        raise UsageError(f"graph has n={G.n} but --n {params.n}")
    if args.ce:
        b = ce_llr(G, params, args.m_max)
        if args.breakdown:
            _emit(args, json.dumps({"F": b.F, "logZ_A": b.logZ_A, "logZ_Kn": b.logZ_Kn,
                                    "total": b.total, "parts": b.ce_parts}))
        else:
            _emit(args, repr(b.total))
    elif args.approx:
        _emit(args, repr(llr_approx_rhs(G, params)))
    else:
        b = exact_llr_breakdown(G, params)
        if args.breakdown:
            _emit(args, json.dumps({"F": b.F, "logZ_A": b.logZ_A, "logZ_Kn": b.logZ_Kn,
                                    "total": b.total if not b.impossible else "-inf",
                                    "impossible": b.impossible}))
        else:
            _emit(args, "-inf" if b.impossible else repr(b.total))
    return EXIT_OK


def cmd_test(args) -> int:
    from .inference import edge_test, wedge_test

    params = _params(args)
    G = _load_graph(args.graph)
    fn = edge_test if args.kind == "edge" else wedge_test
    _emit(args, str(fn(G, params)))
    return EXIT_OK


def cmd_ce(args) -> int:
    from . import expansion as ex
    from .templates import TemplateFilter, enumerate_templates, template_weights

    sub = args.ce_cmd
    if sub == "templates":
        ts = enumerate_templates(args.max_edges, TemplateFilter.parse(args.filter),
                                 cumulative=args.cumulative)
        _emit(args, "\n".join(template_weights(t).dump() for t in ts))
    elif sub == "logz":
        lam = _ce_lambda(args)
        M = args.m_max or ex.default_truncation(args.n)
        r = ex.truncation_check(args.n, lam, M)
        _emit(args, json.dumps({"n": r.n, "lambda": r.lam, "M_target": r.M_target,
                                "M_used": r.M_used, "series": r.series, "exact": r.exact,
                                "error": r.error, "tail_bound": r.tail_bound,
                                "formal_series": r.formal_series, "within_1_over_n": r.ok}))
    elif sub == "expectM":
        from .matching import expected_matching_size
        lam = _ce_lambda(args)
        M = min(args.m_max or ex.default_truncation(args.n), ex.TEMPLATE_CAP)
        _emit(args, json.dumps({"series": ex.ce_expected_M(args.n, lam, M, args.trees_only),
                                "exact": expected_matching_size(args.n, lam), "M_max": M,
                                "trees_only": args.trees_only}))
    elif sub == "identities":
        which = [args.which] if args.which else [i.value for i in ex.Identity]
        ok = True
        for w in which:
            for m in range(1, args.m + 1):
                r = ex.verify_ursell_identity(w, m)
                ok &= r.equal
                _emit(args, f"{w} m={m} lhs={r.lhs} rhs={r.rhs} equal={r.equal}")
        return EXIT_OK if ok else EXIT_RUNTIME
    elif sub == "penrose":
        from .templates import connected_signed_sum, penrose_check, spanning_tree_count
        rng = np.random.default_rng(args.seed)
        bad = 0
        for _ in range(args.trials):
            H = random_connected_graph(rng, int(rng.integers(1, args.max_vertices + 1)))
            bad += not penrose_check(H)
            if args.verbose:
                _emit(args, f"m={H.m} sum={connected_signed_sum(H)} trees={spanning_tree_count(H)}")
        _emit(args, f"checked={args.trials} violations={bad}")
        return EXIT_OK if bad == 0 else EXIT_RUNTIME
    elif sub == "clique-kl":
        _emit(args, repr(ex.planted_clique_partial_kl(args.n, args.k, args.v_max)))
    return EXIT_OK


def _ce_lambda(args) -> float:
    if args.zeta is not None:
        return 1.0 / (args.zeta * args.n)
    if math.isinf(args.lam):
        raise UsageError("the series needs a finite lambda")
    if args.lam > 1.0 / (30 * args.n):
        print(f"warning: lambda={args.lam} exceeds 1/(30n)", file=sys.stderr)
    return args.lam


def random_connected_graph(rng: np.random.Generator, m: int):
    """Random connected simple graph on m vertices: a random tree plus extra edges."""
    from .templates import IncompatibilityGraph

    edges = set()
    order = rng.permutation(m)
    for i in range(1, m):
        j = int(rng.integers(0, i))
        a, b = sorted((int(order[i]), int(order[j])))
        edges.add((a, b))
    density = rng.random()
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < density:
                edges.add((a, b))
    return IncompatibilityGraph.from_edges(m, sorted(edges))


def cmd_experiment(args) -> int:
    from .harness import (
        EXPERIMENT_HEADER,
        ExperimentConfig,
        experiment_row,
        qq_points,
        rows_to_csv,
        run_error_experiment,
        run_llr_distribution,
        write_results,
    )

    params = _params(args)
    statistic = args.statistic or ("edge-test" if params.regime.value == "equal-ambient"
                                   else "wedge-test")
    args.statistic = statistic
    cfg = ExperimentConfig(params, args.trials, args.seed, statistic, args.workers, args.m_max)
    if cfg.statistic.is_test:
        row = experiment_row(cfg, run_error_experiment(cfg))
        if args.out:
            write_results([row], EXPERIMENT_HEADER, args.out)
        _emit(args, rows_to_csv([row], EXPERIMENT_HEADER))
    else:
        s = run_llr_distribution(cfg, args.under)
        summary = {"key": cfg.key(), **cfg.to_dict(), "under": s.under.value, "mean": s.mean,
                   "var": s.var, "se_mean": s.se_mean, "contiguity_gap": s.contiguity_gap,
                   "contiguity_z": s.contiguity_z, "predicted_mean": s.predicted_mean,
                   "predicted_var": s.predicted_var}
        _emit(args, json.dumps(summary))
        if args.out:
            base = Path(args.out)
            base.parent.mkdir(parents=True, exist_ok=True)
            base.with_suffix(".json").write_text(json.dumps(summary, indent=1) + "\n")
            np.savetxt(base.with_suffix(".values.txt"), s.values, fmt="%.17g")
            if s.values.size > 1:
                theo, emp = qq_points(s.values)
                np.savetxt(base.with_suffix(".qq.csv"), np.column_stack([theo, emp]),
                           delimiter=",", header="normal_quantile,standardized_value",
                           comments="", fmt="%.10g")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import EXPERIMENT_HEADER, ExperimentConfig, rows_to_csv, sweep
    from .models import ModelParams

    grid = []
    ps = [float(x) for x in args.ps.split(",")] if args.ps else []
    if args.thetas:
        ps += [float(t) / math.sqrt(args.n) for t in args.thetas.split(",")]
    if not ps:
        raise UsageError("give --ps or --thetas")
    for p in ps:
        params = ModelParams.create(args.n, p, lam=args.lam, zeta=args.zeta, regime=args.regime)
        stat = "edge-test" if args.regime == "equal-ambient" else "wedge-test"
        grid.append(ExperimentConfig(params, args.trials, args.seed, stat, args.workers))
    rows = sweep(grid, args.out)
    _emit(args, rows_to_csv(rows, EXPERIMENT_HEADER))
    return EXIT_OK


def cmd_moments(args) -> int:
    from .harness import MOMENT_HEADER, moment_check, moment_rows, rows_to_csv, write_results

    params = _params(args)
    rows = moment_rows(params, args.trials, args.seed,
                       moment_check(params, args.trials, args.seed, args.workers))
    if args.out:
        write_results(rows, MOMENT_HEADER, args.out)
    _emit(args, rows_to_csv(rows, MOMENT_HEADER))
    return EXIT_OK


def cmd_rerun(args) -> int:
    text = Path(args.config).read_text()
    resolved = {}
    for line in text.splitlines():
        if line.strip() and "=" in line:
            k, v = line.split("=", 1)
            val = json.loads(v.strip())
            resolved[k.strip()] = math.inf if val == "inf" else val
    ns = argparse.Namespace(**resolved)
    ns.func = COMMANDS[resolved["command"]]
    return ns.func(ns)


COMMANDS = {"sample": cmd_sample, "stats": cmd_stats, "llr": cmd_llr, "test": cmd_test,
            "ce": cmd_ce, "experiment": cmd_experiment, "sweep": cmd_sweep,
            "moments": cmd_moments}


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plantmatch",
                                 description="Planted matching detection toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a planted or null graph")
    _add_params(p, need_seed=True)
    p.add_argument("--model", choices=["planted", "null"], default="planted")
    p.add_argument("--out")
    p.add_argument("--hidden-out")

    p = sub.add_parser("stats", help="signed edge and wedge counts of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", type=float, required=True)

    p = sub.add_parser("llr", help="log-likelihood ratio of a graph")
    _add_params(p, q=True)
    p.add_argument("--graph", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--ce", action="store_true")
    mode.add_argument("--approx", action="store_true")
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--breakdown", action="store_true")

    p = sub.add_parser("test", help="apply the edge or wedge threshold test")
    _add_params(p, q=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--kind", choices=["edge", "wedge"], required=True)

    p = sub.add_parser("ce", help="cluster-expansion tools")
    ce = p.add_subparsers(dest="ce_cmd", required=True)
    c = ce.add_parser("templates")
    c.add_argument("--max-edges", type=int, required=True)
    c.add_argument("--filter", default="all",
                   choices=["all", "simple-trees", "one-rep-trees", "two-rep-trees", "simple-cyclic"])
    c.add_argument("--cumulative", action="store_true", help="include all sizes up to --max-edges")
    for name in ("logz", "expectM"):
        c = ce.add_parser(name)
        c.add_argument("--n", type=int, required=True)
        g = c.add_mutually_exclusive_group(required=True)
        g.add_argument("--zeta", type=float)
        g.add_argument("--lambda", dest="lam", type=_lambda_arg)
        c.add_argument("--m-max", type=int)
        if name == "expectM":
            c.add_argument("--trees-only", action="store_true")
    c = ce.add_parser("identities")
    c.add_argument("--which", choices=["one-rep-convolution", "wedge-marked", "triple-edge"])
    c.add_argument("--m", type=int, default=4)
    c = ce.add_parser("penrose")
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--max-vertices", type=int, default=8)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--verbose", action="store_true")
    c = ce.add_parser("clique-kl")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=float, required=True)
    c.add_argument("--v-max", type=int, required=True)

    helps = {"experiment": "Monte Carlo error rates or LLR distributions",
             "sweep": "error rates over a grid of p or theta values",
             "moments": "empirical vs exact moments of the signed counts"}
    for name in ("experiment", "sweep", "moments"):
        p = sub.add_parser(name, help=helps[name])
        if name == "sweep":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--ps")
            p.add_argument("--thetas")
            p.add_argument("--regime", choices=["equal-ambient", "equal-average"], required=True)
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--zeta", type=float)
            g.add_argument("--lambda", dest="lam", type=_lambda_arg)
            p.add_argument("--seed", type=int, required=True)
        else:
            _add_params(p, need_seed=True)
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out")
        if name == "experiment":
            p.add_argument("--statistic",
                           choices=["edge-test", "wedge-test", "exact-llr", "ce-llr", "approx-rhs"])
            p.add_argument("--under", choices=["null", "planted"], default="null")
            p.add_argument("--m-max", type=int, default=4)

    p = sub.add_parser("rerun", help="replay a recorded configuration")
    p.add_argument("config")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    from .matching import SizeLimitError
    from .models import ParameterError

    try:
        if args.command == "rerun":
            return cmd_rerun(args)
        code = COMMANDS[args.command](args)
        _record_config(args, getattr(args, "out", None))
        return code
    except (UsageError, ParameterError, SizeLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
