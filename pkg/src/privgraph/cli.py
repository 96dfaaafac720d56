"""Command-line surface: generate, evaluate, bounds, table, project, noisecheck,
dist, mc. Configuration comes from flags or a single JSON file (--config); a
manifest written by a previous run is itself a valid config."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .experiments import ExperimentConfig, cmd_evaluate, cmd_generate, resolve
from .fgw import FgwParams, fgw_exact_small, fgw_upper_bound, graph_to_measure, mc_expected_fgw
from .graphs import graph_from_json
from .measures import SignedMeasure, tv_project
from .noise import bounded_power, discrete_laplace, dp_ratio_satisfied, noise_from_json


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        obj = json.loads(Path(args.config).read_text())
        cfg = ExperimentConfig.from_dict(obj)
    else:
        if args.seed is None:
            raise SystemExit("--seed is mandatory (or provide --config)")
        cfg = ExperimentConfig(seed=args.seed)
    for name in (
        "eps",
        "d",
        "metric",
        "data",
        "recipe",
        "n",
        "m",
        "a",
        "b",
        "kernel",
        "kernel_param",
        "alpha",
        "C",
        "replicates",
        "refine_iters",
        "out_dir",
        "seed",
        "csv_sep",
    ):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    for flag in ("private_only", "redact_counts", "emit_dot"):
        if getattr(args, flag, False):
            setattr(cfg, flag, True)
    return cfg


def _add_experiment_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config or a manifest from a previous run")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--metric", choices=["sup", "euclidean"])
    p.add_argument("--data", help="CSV of attribute points in [0,1]^d")
    p.add_argument("--recipe", choices=["half_zero_one", "uniform"])
    p.add_argument("--n", type=int, help="synthetic recipe size")
    p.add_argument("--m", help='partition size request or "auto"')
    p.add_argument("--a", help='expected true-graph size or "auto"')
    p.add_argument("--b", help='expected synthetic-graph size or "auto"')
    p.add_argument("--kernel", choices=["chung-lu", "constant", "inverse-distance"])
    p.add_argument("--kernel-param", dest="kernel_param", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--refine-iters", dest="refine_iters", type=int)
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--csv-sep", dest="csv_sep")


def _coerce_auto(cfg: ExperimentConfig):
    for name in ("m", "a", "b"):
        val = getattr(cfg, name)
        if isinstance(val, str) and val != "auto":
            setattr(cfg, name, float(val) if name != "m" else int(float(val)))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="privgraph",
        description="Private synthetic attributed graphs with utility guarantees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate coupled graph pairs")
    _add_experiment_flags(p_gen)
    p_gen.add_argument("--eps-list", type=_float_list, help="comma list; one pair per level")
    p_gen.add_argument("--emit", choices=["dot"], help="also write DOT files")
    p_gen.add_argument("--private-only", action="store_true")
    p_gen.add_argument("--redact-counts", action="store_true")

    p_eval = sub.add_parser("evaluate", help="replicate distances vs. theoretical bounds")
    _add_experiment_flags(p_eval)
    p_eval.add_argument("--ipm-samples", type=int, default=50)

    p_bounds = sub.add_parser("bounds", help="per-term bound report for given inputs")
    p_bounds.add_argument("--json", required=True, help="JSON file of bound inputs")
    p_bounds.add_argument("--out", help="write report JSON here (default stdout)")

    p_table = sub.add_parser("table", help="bound table over (eps, n) grids")
    p_table.add_argument("--d", type=int, default=2)
    p_table.add_argument("--alpha", type=float, default=0.5)
    p_table.add_argument("--C", type=float, default=1.0)
    p_table.add_argument("--Lk", type=float, default=1.0)
    p_table.add_argument("--eps", type=_float_list, default=list(bnd.DEFAULT_TABLE_EPS))
    p_table.add_argument("--n", type=_int_list, default=list(bnd.DEFAULT_TABLE_N))
    p_table.add_argument("--out", help="write CSV here (default stdout)")
    p_table.add_argument("--sep", default=";")

    p_proj = sub.add_parser("project", help="TV-project a signed measure onto the simplex")
    p_proj.add_argument("measure", help='JSON file: {"weights": [...], "support": [[...]]?}')
    p_proj.add_argument("--method", choices=["closed_form", "lp"], default="closed_form")

    p_noise = sub.add_parser("noisecheck", help="verify the unit-shift likelihood ratio")
    p_noise.add_argument("--kind", choices=["discrete-laplace", "bounded-power", "custom"], default="discrete-laplace")
    p_noise.add_argument("--eps", type=float, default=1.0, help="noise parameter")
    p_noise.add_argument("--A", type=int, default=2)
    p_noise.add_argument("--pmf", help="JSON pmf file for custom noise")
    p_noise.add_argument("--level", type=float, help="privacy level to check (default --eps)")

    p_dist = sub.add_parser("dist", help="FGW distance between two graph JSON files")
    p_dist.add_argument("graph_a")
    p_dist.add_argument("graph_b")
    p_dist.add_argument("--alpha", type=float, default=0.5)
    p_dist.add_argument("--cap", type=float, default=1.0)
    p_dist.add_argument("--metric", choices=["sup", "euclidean"], default="sup")
    p_dist.add_argument("--out", help="write JSON here (default stdout)")

    p_mc = sub.add_parser("mc", help="Monte-Carlo expected FGW over generator runs")
    _add_experiment_flags(p_mc)
    p_mc.add_argument("--reps", type=int, help="alias for --replicates")

    args = parser.parse_args(argv)

    try:
        if args.command == "generate":
            cfg = _config_from_args(args)
            if args.emit == "dot":
                cfg.emit_dot = True
            _coerce_auto(cfg)
            outputs = cmd_generate(cfg, eps_list=args.eps_list)
            print("\n".join(outputs))
            return 0

        if args.command == "evaluate":
            cfg = _config_from_args(args)
            _coerce_auto(cfg)
            summary = cmd_evaluate(cfg, ipm_samples=args.ipm_samples)
            print(json.dumps(summary, indent=2, sort_keys=True))
            ok = summary["coupling_bound_satisfied"] and summary["sandwich_satisfied"]
            return 0 if ok else 3

        if args.command == "bounds":
            obj = json.loads(Path(args.json).read_text())
            inp = bnd.BoundInputs(**obj)
            report = bnd.bound_report(inp)
            payload = {}
            for key, val in report.items():
                if isinstance(val, bnd.BoundTerms):
                    payload[key] = {"terms": val.terms, "total": val.total}
                else:
                    payload[key] = {"coupling": val.coupling, "stein": val.stein}
            text = json.dumps(payload, indent=2, sort_keys=True)
            if args.out:
                Path(args.out).write_text(text + "\n")
            else:
                print(text)
            return 0

        if args.command == "table":
            table = bnd.bound_table(
                eps_list=args.eps, n_list=args.n, d=args.d, alpha=args.alpha, C=args.C, L_kappa=args.Lk
            )
            csv_text = table.to_csv(sep=args.sep)
            monotone = all(
                row[1 + 2 * j] > row[3 + 2 * j] and row[2 + 2 * j] > row[4 + 2 * j]
                for row in table.rows
                for j in range(len(args.n) - 1)
            )
            footer = f"# entries decrease in n at fixed eps: {monotone}\n"
            if args.out:
                Path(args.out).write_text(csv_text + footer)
            else:
                sys.stdout.write(csv_text + footer)
            return 0

        if args.command == "project":
            obj = json.loads(Path(args.measure).read_text())
            weights = np.asarray(obj["weights"], dtype=float)
            support = np.asarray(
                obj.get("support", [[float(i)] for i in range(weights.size)]), dtype=float
            )
            measure = SignedMeasure(support=support, weights=weights)
            projected, dist = tv_project(measure, method=args.method)
            print(json.dumps({"weights": projected.weights.tolist(), "distance": dist}))
            return 0

        if args.command == "noisecheck":
            if args.kind == "discrete-laplace":
                spec = discrete_laplace(args.eps)
            elif args.kind == "bounded-power":
                spec = bounded_power(args.eps, args.A)
            else:
                if not args.pmf:
                    raise SystemExit("custom noise needs --pmf")
                spec = noise_from_json(args.pmf)
            level = args.level if args.level is not None else args.eps
            report = dp_ratio_satisfied(spec, level)
            print(
                json.dumps(
                    {
                        "satisfied": report.satisfied,
                        "worst_ratio": report.worst_ratio,
                        "worst_k": report.worst_k,
                        "worst_shift": report.worst_shift,
                        "bound": float(np.exp(level)),
                    }
                )
            )
            return 0 if report.satisfied else 2

        if args.command == "dist":
            params = FgwParams(alpha=args.alpha, C=args.cap, metric=args.metric)
            ga = graph_from_json(Path(args.graph_a).read_text())
            gb = graph_from_json(Path(args.graph_b).read_text())
            ma = graph_to_measure(ga, params)
            mb = graph_to_measure(gb, params)
            if ma.n <= 4 and mb.n <= 4:
                value = fgw_exact_small(ma, mb, params)
                _, coupling = fgw_upper_bound(ma, mb, params, iterations=200)
                mode = "exact_small"
            else:
                value, coupling = fgw_upper_bound(ma, mb, params, iterations=50)
                mode = "upper_bound"
            text = json.dumps({"value": value, "mode": mode, "coupling": coupling.tolist()})
            if args.out:
                Path(args.out).write_text(text + "\n")
            else:
                print(text)
            return 0

        if args.command == "mc":
            cfg = _config_from_args(args)
            if args.reps is not None:
                cfg.replicates = args.reps
            _coerce_auto(cfg)
            resolved = resolve(cfg)
            res = mc_expected_fgw(
                resolved.dataset,
                resolved.partition,
                resolved.noise,
                resolved.a,
                resolved.b,
                resolved.kernel,
                resolved.params,
                cfg.replicates,
                cfg.seed,
                refine_iters=cfg.refine_iters,
                refine_size_cap=cfg.refine_size_cap,
            )
            print(f"mean{cfg.csv_sep}stderr{cfg.csv_sep}plan_mean{cfg.csv_sep}plan_stderr")
            print(
                f"{res.mean:.9g}{cfg.csv_sep}{res.stderr:.9g}{cfg.csv_sep}"
                f"{res.plan_mean:.9g}{cfg.csv_sep}{res.plan_stderr:.9g}"
            )
            return 0
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
