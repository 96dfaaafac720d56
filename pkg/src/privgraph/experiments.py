"""Experiment configuration, manifests, and the replicate runner behind the CLI.

A config fully determines an experiment: dataset (file or synthetic recipe),
space, partition request (or "auto" via the optimal parameter rule), noise,
privacy level, expected sizes (or "auto"), kernel, FGW parameters, replicate
count, and a mandatory master seed. Replicate r always draws from
``default_rng(SeedSequence(seed).spawn()[r])``, so outputs are bit-identical
no matter how the replicate pool is scheduled.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .fgw import (
    FgwParams,
    fgw_upper_bound,
    ipm_lower_bound,
    matched_plan_cost,
    plan_coupling,
    plan_cost_exact,
    reference_graphs,
    spawn_streams,
    worst_pair_cost,
)
from .generator import generate_coupled_graphs
from .graphs import Kernel, chung_lu, constant_kernel, graph_to_dot, inverse_distance
from .noise import NoiseSpec, bounded_power, custom, discrete_laplace
from .space import AttributeDataset, Partition, SpaceConfig, build_grid_partition, load_points_csv

VERSION = "0.1.0"


@dataclass
class ExperimentConfig:
    seed: int
    eps: float = 1.0
    d: int = 1
    metric: str = "sup"
    data: str | None = None  # CSV path
    recipe: str | None = None  # "half_zero_one" or "uniform"
    n: int = 1000  # recipe size
    m: int | str = "auto"
    a: float | str = "auto"
    b: float | str = "auto"
    noise_kind: str = "discrete_laplace"
    noise_A: int = 2
    noise_pmf: dict | None = None
    kernel: str = "chung-lu"
    kernel_param: float = 0.5
    alpha: float = 0.5
    C: float = 1.0
    replicates: int = 100
    refine_iters: int = 2
    refine_size_cap: int = 4096
    private_only: bool = False
    redact_counts: bool = False
    emit_dot: bool = False
    csv_sep: str = ","
    out_dir: str = "."

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if "config" in obj:  # manifests embed their resolved config; accept directly
            obj = obj["config"]
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in obj.items() if k in known})

    def to_dict(self) -> dict:
        return asdict(self)


def make_recipe_dataset(recipe: str, n: int, d: int, seed: int) -> AttributeDataset:
    """Synthetic datasets: "half_zero_one" (half attrs 0, half 1, any d) or
    "uniform" (iid uniform on the cube)."""
    if recipe == "half_zero_one":
        pts = np.zeros((n, d))
        pts[n // 2 :] = 1.0
        return AttributeDataset(points=pts)
    if recipe == "uniform":
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        return AttributeDataset(points=rng.random((n, d)))
    raise ValueError(f"unknown recipe {recipe!r}")


def make_kernel(name: str, param: float, d: int, metric: str) -> Kernel:
    if name in ("chung-lu", "chung_lu"):
        return chung_lu(d=d)
    if name == "constant":
        return constant_kernel(param)
    if name in ("inverse-distance", "inverse_distance"):
        return inverse_distance(param, metric=metric)
    raise ValueError(f"unknown kernel {name!r}")


def make_noise(cfg: ExperimentConfig) -> NoiseSpec:
    if cfg.noise_kind == "discrete_laplace":
        return discrete_laplace(cfg.eps)
    if cfg.noise_kind == "bounded_power":
        return bounded_power(cfg.eps, cfg.noise_A)
    if cfg.noise_kind == "custom":
        if not cfg.noise_pmf:
            raise ValueError("custom noise requires noise_pmf")
        return custom({int(k): float(v) for k, v in cfg.noise_pmf.items()})
    raise ValueError(f"unknown noise kind {cfg.noise_kind!r}")


@dataclass
class ResolvedExperiment:
    config: ExperimentConfig
    dataset: AttributeDataset
    space: SpaceConfig
    partition: Partition
    noise: NoiseSpec
    kernel: Kernel
    params: FgwParams
    a: float
    b: float

    @property
    def manifest_config(self) -> dict:
        out = self.config.to_dict()
        out["resolved_m"] = self.partition.m
        out["resolved_k_per_axis"] = self.partition.k_per_axis
        out["resolved_a"] = self.a
        out["resolved_b"] = self.b
        out["resolved_n"] = self.dataset.n
        return out


def resolve(cfg: ExperimentConfig) -> ResolvedExperiment:
    if cfg.seed is None:
        raise ValueError("seed is mandatory in experiment mode")
    if cfg.data:
        dataset = load_points_csv(cfg.data, cfg.d)
    elif cfg.recipe:
        dataset = make_recipe_dataset(cfg.recipe, cfg.n, cfg.d, cfg.seed)
    else:
        raise ValueError("config needs either a data path or a recipe")
    space = SpaceConfig(d=cfg.d, metric=cfg.metric)
    if cfg.m == "auto":
        opt = bnd.optimal_params(cfg.eps, dataset.n, cfg.d)
        m_request = opt.m_request
        auto_a = opt.a
    else:
        m_request = int(cfg.m)
        auto_a = None
    partition = build_grid_partition(space, m_request)
    if cfg.a == "auto" or cfg.b == "auto":
        if auto_a is None:
            auto_a = float(partition.m) ** (2.0 / cfg.d)
    a = auto_a if cfg.a == "auto" else float(cfg.a)
    b = auto_a if cfg.b == "auto" else float(cfg.b)
    return ResolvedExperiment(
        config=cfg,
        dataset=dataset,
        space=space,
        partition=partition,
        noise=make_noise(cfg),
        kernel=make_kernel(cfg.kernel, cfg.kernel_param, cfg.d, cfg.metric),
        params=FgwParams(alpha=cfg.alpha, C=cfg.C, metric=cfg.metric),
        a=a,
        b=b,
    )


def _pool_size() -> int:
    try:
        return max(1, int(os.environ.get("PRIVGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def run_replicates(fn, n: int, seed: int) -> list:
    """Run fn(r, rng_r) for r in range(n); ordered by index regardless of the
    pool schedule. PRIVGRAPH_THREADS caps the pool (default serial)."""
    streams = spawn_streams(seed, n)
    workers = _pool_size()
    if workers == 1:
        return [fn(r, streams[r]) for r in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, r, streams[r]) for r in range(n)]
        return [f.result() for f in futures]


def write_manifest(path: Path, command: str, resolved: ResolvedExperiment, outputs: list[str], t0: float) -> None:
    manifest = {
        "tool": "privgraph",
        "version": VERSION,
        "command": command,
        "config": resolved.manifest_config,
        "seeding": "replicate r uses default_rng(SeedSequence(seed).spawn()[r])",
        "replicate_seed_paths": [[resolved.config.seed, r] for r in range(resolved.config.replicates)],
        "outputs": outputs,
        "timing_s": round(time.time() - t0, 3),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_generate(cfg: ExperimentConfig, eps_list: list[float] | None = None) -> list[str]:
    """Generate one coupled pair per privacy level; write JSON (+ optional DOT)
    and a manifest sufficient for bit-exact replay."""
    t0 = time.time()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eps_values = eps_list or [cfg.eps]
    outputs: list[str] = []
    resolved = None
    children = np.random.SeedSequence(cfg.seed).spawn(len(eps_values))
    for idx, eps in enumerate(eps_values):
        sub = ExperimentConfig(**{**cfg.to_dict(), "eps": eps})
        resolved = resolve(sub)
        rng = np.random.default_rng(children[idx])
        pair = generate_coupled_graphs(
            resolved.dataset,
            resolved.partition,
            resolved.noise,
            resolved.a,
            resolved.b,
            resolved.kernel,
            rng,
        )
        tag = f"eps{eps:g}"
        pair_path = out_dir / f"pair_{tag}.json"
        pair_path.write_text(
            json.dumps(
                pair.to_dict(redact_counts=cfg.redact_counts, private_only=cfg.private_only),
                sort_keys=True,
            )
            + "\n"
        )
        outputs.append(str(pair_path))
        if cfg.emit_dot:
            if idx == 0 and not cfg.private_only:
                p = out_dir / "true.dot"
                p.write_text(graph_to_dot(pair.true_graph, name="true_graph"))
                outputs.append(str(p))
            p = out_dir / f"synthetic_{tag}.dot"
            p.write_text(graph_to_dot(pair.synthetic_graph, name="synthetic_graph"))
            outputs.append(str(p))
    write_manifest(out_dir / "manifest.json", "generate", resolved, outputs, t0)
    return outputs


def _evaluate_one(resolved: ResolvedExperiment, r: int, rng: np.random.Generator, keep_graphs: bool):
    cfg = resolved.config
    pair = generate_coupled_graphs(
        resolved.dataset, resolved.partition, resolved.noise, resolved.a, resolved.b, resolved.kernel, rng
    )
    charge = matched_plan_cost(pair, resolved.params)
    nt, ns = pair.true_graph.n_vertices, pair.synthetic_graph.n_vertices
    if cfg.refine_iters > 0 and 0 < nt * ns <= cfg.refine_size_cap:
        ma, mb, pi = plan_coupling(pair, resolved.params)
        refined, _ = fgw_upper_bound(ma, mb, resolved.params, init=pi, iterations=cfg.refine_iters)
    else:
        refined = plan_cost_exact(pair, resolved.params)
    graphs = (pair.true_graph, pair.synthetic_graph) if keep_graphs else None
    return charge, refined, graphs


def cmd_evaluate(cfg: ExperimentConfig, ipm_samples: int = 50) -> dict:
    """Per-replicate distance statistics against the theoretical bounds.

    Writes evaluate.csv (per-replicate rows + summary row) and a manifest.
    Returns the summary as a dict.
    """
    t0 = time.time()
    resolved = resolve(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    inp = bnd.bound_inputs_from(
        resolved.partition,
        resolved.dataset.n,
        resolved.noise,
        resolved.a,
        resolved.b,
        resolved.params,
        resolved.kernel,
        cfg.eps,
    )
    coupling_total = bnd.expected_fgw_bound(inp).total
    grid_total = None
    if resolved.a == resolved.b and resolved.noise.kind == "discrete_laplace":
        try:
            grid_total = bnd.expected_fgw_bound_grid(inp).total
        except ValueError:
            grid_total = None

    keep = min(ipm_samples, cfg.replicates)
    results = run_replicates(
        lambda r, rng: _evaluate_one(resolved, r, rng, keep_graphs=r < keep),
        cfg.replicates,
        cfg.seed,
    )
    charges = np.array([res[0] for res in results])
    refined = np.array([res[1] for res in results])
    trues = [res[2][0] for res in results if res[2] is not None]
    syns = [res[2][1] for res in results if res[2] is not None]
    worst = worst_pair_cost(
        resolved.params, resolved.space.diameter, resolved.kernel.lipschitz_constant
    )
    ipm = ipm_lower_bound(
        trues,
        syns,
        reference_graphs(cfg.d),
        resolved.params,
        refine_iters=max(cfg.refine_iters, 1),
        empty_value=worst,
    )

    nrep = cfg.replicates
    charge_se = float(charges.std(ddof=1) / np.sqrt(nrep))
    refined_se = float(refined.std(ddof=1) / np.sqrt(nrep))
    summary = {
        "matched_plan_mean": float(charges.mean()),
        "matched_plan_stderr": charge_se,
        "refined_mean": float(refined.mean()),
        "refined_stderr": refined_se,
        "coupling_bound": coupling_total,
        "grid_coupling_bound": grid_total,
        "ipm_lower": ipm,
        "coupling_bound_satisfied": bool(charges.mean() <= coupling_total + 3 * charge_se),
        "grid_bound_satisfied": (
            bool(charges.mean() <= grid_total + 3 * charge_se) if grid_total is not None else None
        ),
        "sandwich_satisfied": bool(ipm <= refined.mean() + 3 * refined_se),
    }

    sep = cfg.csv_sep
    lines = [sep.join(["replicate", "matched_plan_cost", "refined_fgw", "coupling_bound", "grid_coupling_bound", "ipm_lower"])]
    for r in range(nrep):
        lines.append(
            sep.join(
                [
                    str(r),
                    f"{charges[r]:.9g}",
                    f"{refined[r]:.9g}",
                    f"{coupling_total:.9g}",
                    "" if grid_total is None else f"{grid_total:.9g}",
                    "",
                ]
            )
        )
    lines.append(
        sep.join(
            [
                "summary",
                f"{summary['matched_plan_mean']:.9g}",
                f"{summary['refined_mean']:.9g}",
                f"{coupling_total:.9g}",
                "" if grid_total is None else f"{grid_total:.9g}",
                f"{ipm:.9g}",
            ]
        )
    )
    csv_path = out_dir / "evaluate.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_manifest(out_dir / "manifest.json", "evaluate", resolved, [str(csv_path)], t0)
    return summary
