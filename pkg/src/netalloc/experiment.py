"""Config-driven pipeline: generate, train, allocate, evaluate, report.

Every stage is a pure function of (config, disk artifacts). Work is split
into independent arms, one per (seed, spillover) cell; arms sharing a seed
share the same networks, weights, features, and treatments so spillover
sweeps are paired. All randomness is derived from the arm seed through fixed
stream ids, which makes results independent of worker count and rerunnable
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import dgp
from .allocation import (
    celf,
    degree_topk,
    genetic,
    greedy,
    random_allocation,
    single_discount,
    tte_objective,
    uplift_topk,
    write_allocation_json,
    write_value_trace,
    GaConfig,
)
from .config import ExperimentConfig
from .dgp import (
    DgpInstance,
    DgpParams,
    Dataset,
    instance_from_files,
    make_dataset,
    read_dataset_csv,
    sample_weights,
    write_dataset_csv,
    write_instance_manifest,
)
from .errors import StageDependencyError
from .graphs import (
    degree_histogram,
    generate_barabasi_albert,
    generate_watts_strogatz,
    load_edge_list,
    load_features,
    save_edge_list,
    save_features,
)
from .metrics import allocation_similarity, random_baseline, riseo
from .relational import (
    RelationalModel,
    RelationalPredictor,
    TrainingConfig,
    load_checkpoint,
    outcome_bce,
    save_checkpoint,
    train,
    write_loss_trace,
)
from .tarnet import load_tarnet, save_tarnet, tarnet_bce, tarnet_ite, train_tarnet

WORKERS_ENV = "NETALLOC_WORKERS"

# Stream ids for per-arm random derivations.
S_GRAPH, S_WEIGHTS, S_FEATURES, S_TREATMENT, S_OUTCOME = 0, 1, 2, 3, 4
S_MODEL_INIT, S_TRAIN, S_TARNET, S_GA, S_CELF, S_RANDOM, S_BASELINE = 5, 6, 7, 8, 9, 10, 11

SPLITS = ("train", "valid", "test")


def stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


@dataclass(frozen=True)
class Arm:
    seed: int
    beta: float

    @property
    def run_id(self) -> str:
        return f"seed{self.seed}_spill{self.beta:g}"


def arms_of(cfg: ExperimentConfig) -> list[Arm]:
    return [Arm(seed=s, beta=b) for s in cfg.seeds for b in cfg.beta_spillover]


def _arm_dir(cfg: ExperimentConfig, arm: Arm) -> Path:
    return Path(cfg.output_dir) / "arms" / arm.run_id


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _pool_map(fn, items):
    workers = _workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _params_for(cfg: ExperimentConfig, beta: float, d: int | None = None) -> DgpParams:
    fields = dict(cfg.dgp_overrides)
    fields["beta_spillover"] = float(beta)
    if d is not None:
        fields.setdefault("d", d)
    return DgpParams(**fields)


# --------------------------------------------------------------------------
# generate
# --------------------------------------------------------------------------

def _build_graph(cfg: ExperimentConfig, arm: Arm, split_idx: int):
    net = cfg.network
    if net.kind == "ba":
        return generate_barabasi_albert(net.n, net.m, stream(arm.seed, S_GRAPH, split_idx))
    if net.kind == "ws":
        return generate_watts_strogatz(
            net.n, net.ring_degree, net.rewire_prob,
            stream(arm.seed, S_GRAPH, split_idx),
        )
    split = SPLITS[split_idx]
    return load_edge_list(net.files[split]["edges"])


def _generate_arm(cfg: ExperimentConfig, arm: Arm) -> list[str]:
    arm_dir = _arm_dir(cfg, arm)
    arm_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    weights = None
    for split_idx, split in enumerate(SPLITS):
        graph = _build_graph(cfg, arm, split_idx)
        if cfg.network.kind == "files":
            features = load_features(cfg.network.files[split]["features"])
            params = _params_for(cfg, arm.beta, d=features.shape[1])
        else:
            params = _params_for(cfg, arm.beta)
            features = stream(arm.seed, S_FEATURES, split_idx).standard_normal(
                (graph.n, params.d)
            )
        if weights is None:
            weights = sample_weights(params, stream(arm.seed, S_WEIGHTS))
        instance = DgpInstance(graph=graph, features=features, weights=weights,
                               params=params)
        t = dgp.assign_treatments(instance, stream(arm.seed, S_TREATMENT, split_idx))
        z = dgp.exposure(graph, t)
        y = dgp.sample_factual_outcomes(
            instance, t, stream(arm.seed, S_OUTCOME, split_idx),
            binary=cfg.binary_outcomes,
        )
        dataset = Dataset(instance=instance, t=t, z=z, y=y)
        edge_path = arm_dir / f"{split}.edges"
        feat_path = arm_dir / f"{split}.features.csv"
        data_path = arm_dir / f"{split}.data.csv"
        man_path = arm_dir / f"{split}.manifest.json"
        save_edge_list(graph, edge_path)
        save_features(features, feat_path)
        write_dataset_csv(dataset, data_path)
        write_instance_manifest(
            instance, man_path,
            seeds={"arm_seed": arm.seed, "split": split,
                   "beta_spillover": arm.beta},
        )
        written += [str(edge_path), str(feat_path), str(data_path), str(man_path)]
    return written


def stage_generate(cfg: ExperimentConfig) -> list[str]:
    results = _pool_map(partial(_generate_arm, cfg), arms_of(cfg))
    return [path for chunk in results for path in chunk]


# --------------------------------------------------------------------------
# train
# --------------------------------------------------------------------------

def _load_split(cfg: ExperimentConfig, arm: Arm, split: str):
    arm_dir = _arm_dir(cfg, arm)
    edge = arm_dir / f"{split}.edges"
    feat = arm_dir / f"{split}.features.csv"
    data = arm_dir / f"{split}.data.csv"
    man = arm_dir / f"{split}.manifest.json"
    for p in (edge, feat, data, man):
        if not p.exists():
            raise StageDependencyError(
                f"missing artifact {p}; run the generate stage first"
            )
    instance = instance_from_files(edge, feat, man)
    t, z, y = read_dataset_csv(data)
    return Dataset(instance=instance, t=t, z=z, y=y)


def _train_arm(cfg: ExperimentConfig, arm: Arm) -> list[str]:
    arm_dir = _arm_dir(cfg, arm)
    models_dir = arm_dir / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    train_ds = _load_split(cfg, arm, "train")
    valid_ds = _load_split(cfg, arm, "valid")
    d = train_ds.instance.params.d
    written: list[str] = []

    records = []
    best = None
    for gi, point in enumerate(cfg.estimator.grid_points()):
        tc = TrainingConfig(
            learning_rate=point["learning_rate"], epochs=point["epochs"],
            alpha=cfg.estimator.alpha, gamma=cfg.estimator.gamma,
            seed=arm.seed, hidden=cfg.estimator.hidden,
        )
        model = RelationalModel(d, hidden=tc.hidden,
                                rng=stream(arm.seed, S_MODEL_INIT, gi))
        model, trace = train(model, train_ds, tc, stream(arm.seed, S_TRAIN, gi))
        val = outcome_bce(model, valid_ds)
        ckpt = models_dir / f"relational_g{gi}.json"
        save_checkpoint(model, ckpt, config=tc, seed=arm.seed)
        trace_path = models_dir / f"relational_g{gi}_trace.csv"
        write_loss_trace(trace, trace_path)
        written += [str(ckpt), str(trace_path)]
        records.append({"grid_index": gi, **point, "valid_bce": val,
                        "checkpoint": ckpt.name})
        if best is None or val < best[0]:
            best = (val, gi)
    selection = {"records": records, "chosen": records[best[1]]}
    sel_path = models_dir / "selection.json"
    sel_path.write_text(json.dumps(selection, indent=2) + "\n", encoding="utf-8")
    written.append(str(sel_path))

    t_records = []
    t_best = None
    for gi, point in enumerate(cfg.tarnet.grid_points()):
        tc = TrainingConfig(
            learning_rate=point["learning_rate"], epochs=point["epochs"],
            seed=arm.seed, hidden=cfg.estimator.hidden,
        )
        tmodel, _ = train_tarnet(
            train_ds.instance.features, train_ds.t, train_ds.y, tc,
            stream(arm.seed, S_TARNET, gi),
            rep_layers=point["rep_layers"], head_layers=point["head_layers"],
        )
        val = tarnet_bce(tmodel, valid_ds.instance.features, valid_ds.t, valid_ds.y)
        ckpt = models_dir / f"tarnet_g{gi}.json"
        save_tarnet(tmodel, ckpt, config=tc, seed=arm.seed)
        written.append(str(ckpt))
        t_records.append({"grid_index": gi, **point, "valid_bce": val,
                          "checkpoint": ckpt.name})
        if t_best is None or val < t_best[0]:
            t_best = (val, gi)
    t_selection = {"records": t_records, "chosen": t_records[t_best[1]]}
    t_sel_path = models_dir / "tarnet_selection.json"
    t_sel_path.write_text(json.dumps(t_selection, indent=2) + "\n", encoding="utf-8")
    written.append(str(t_sel_path))
    return written


def stage_train(cfg: ExperimentConfig) -> list[str]:
    results = _pool_map(partial(_train_arm, cfg), arms_of(cfg))
    return [path for chunk in results for path in chunk]


# --------------------------------------------------------------------------
# allocate
# --------------------------------------------------------------------------

def _chosen_model(cfg: ExperimentConfig, arm: Arm):
    models_dir = _arm_dir(cfg, arm) / "models"
    sel_path = models_dir / "selection.json"
    if not sel_path.exists():
        raise StageDependencyError(
            f"missing {sel_path}; run the train stage first"
        )
    chosen = json.loads(sel_path.read_text(encoding="utf-8"))["chosen"]
    return load_checkpoint(models_dir / chosen["checkpoint"])


def _chosen_tarnet(cfg: ExperimentConfig, arm: Arm):
    models_dir = _arm_dir(cfg, arm) / "models"
    sel_path = models_dir / "tarnet_selection.json"
    if not sel_path.exists():
        raise StageDependencyError(
            f"missing {sel_path}; run the train stage first"
        )
    chosen = json.loads(sel_path.read_text(encoding="utf-8"))["chosen"]
    return load_tarnet(models_dir / chosen["checkpoint"])


def _ga_config(cfg: ExperimentConfig) -> GaConfig:
    ga = dict(cfg.ga)
    return GaConfig(
        population=int(ga.get("population", 40)),
        elites=int(ga.get("elites", 5)),
        parents=int(ga.get("parents", 15)),
        genes_mutated=int(ga.get("genes_mutated", 1)),
        generations=(int(ga["generations"])
                     if ga.get("generations") is not None else None),
    )


def _allocate_arm(cfg: ExperimentConfig, arm: Arm):
    """Run every configured method on the test split of one arm.

    Returns (written paths, failure records, timing rows).
    """
    arm_dir = _arm_dir(cfg, arm)
    alloc_dir = arm_dir / "allocations"
    alloc_dir.mkdir(parents=True, exist_ok=True)
    test_ds = _load_split(cfg, arm, "test")
    instance = test_ds.instance
    graph = instance.graph
    n = graph.n
    ks = cfg.k_values(n)
    k_max = max(ks)
    written: list[str] = []
    failures: list[dict] = []
    timings: list[tuple[str, int, float]] = []

    def export(method, k, allocation, value, seconds, trace=None, trace_label="step"):
        path = alloc_dir / f"{method}_k{k}.json"
        write_allocation_json(path, allocation, method, value, arm.seed)
        written.append(str(path))
        timings.append((method, k, seconds))
        if trace is not None:
            tpath = alloc_dir / f"{method}_k{k}_trace.csv"
            write_value_trace(tpath, trace, label=trace_label)
            written.append(str(tpath))

    needs_model = bool({"greedy", "genetic"} & set(cfg.methods))
    model = _chosen_model(cfg, arm) if needs_model else None
    predictor = (RelationalPredictor(model, graph, instance.features)
                 if model is not None else None)
    model_objective = (tte_objective(graph, predictor.outcomes)
                       if predictor is not None else None)
    oracle_objective = tte_objective(graph, dgp.oracle_outcome_fn(instance))

    for method in cfg.methods:
        start = time.perf_counter()
        try:
            if method == "greedy":
                schedule = greedy(model_objective, n, k_max)
                for k in ks:
                    export(method, k, schedule.at(k), schedule.value_at(k),
                           schedule.seconds_at(k),
                           trace=schedule.values[:k])
            elif method == "upper_bound":
                schedule = greedy(oracle_objective, n, k_max)
                for k in ks:
                    export(method, k, schedule.at(k), schedule.value_at(k),
                           schedule.seconds_at(k),
                           trace=schedule.values[:k])
            elif method == "celf":
                schedule = celf(graph, k_max, cfg.celf_p, cfg.celf_sims,
                                stream(arm.seed, S_CELF))
                for k in ks:
                    export(method, k, schedule.at(k), schedule.value_at(k),
                           schedule.seconds_at(k),
                           trace=schedule.values[:k])
            elif method == "genetic":
                ga_cfg = _ga_config(cfg)
                for k in ks:
                    t0 = time.perf_counter()
                    history: list[float] = []
                    best = genetic(
                        model_objective, n, k, ga_cfg,
                        [degree_topk(graph, k), single_discount(graph, k)],
                        stream(arm.seed, S_GA, k),
                        on_generation=lambda gen, val: history.append(val),
                    )
                    export(method, k, best, model_objective.evaluate(best.t),
                           time.perf_counter() - t0, trace=history,
                           trace_label="generation")
            elif method == "degree":
                for k in ks:
                    t0 = time.perf_counter()
                    alloc = degree_topk(graph, k)
                    export(method, k, alloc, oracle_objective.evaluate(alloc.t),
                           time.perf_counter() - t0)
            elif method == "single_discount":
                for k in ks:
                    t0 = time.perf_counter()
                    alloc = single_discount(graph, k)
                    export(method, k, alloc, oracle_objective.evaluate(alloc.t),
                           time.perf_counter() - t0)
            elif method == "tarnet":
                tmodel = _chosen_tarnet(cfg, arm)
                scores = tarnet_ite(tmodel, instance.features)
                for k in ks:
                    t0 = time.perf_counter()
                    alloc = uplift_topk(scores, k)
                    export(method, k, alloc, float(np.sort(scores)[-k:].sum()),
                           time.perf_counter() - t0)
            elif method == "random":
                for k in ks:
                    t0 = time.perf_counter()
                    alloc = random_allocation(n, k, stream(arm.seed, S_RANDOM, k))
                    export(method, k, alloc, oracle_objective.evaluate(alloc.t),
                           time.perf_counter() - t0)
            else:  # pragma: no cover - config validation rejects unknowns
                raise ValueError(f"unhandled method {method}")
        except StageDependencyError:
            raise
        except Exception as exc:  # record and continue with other methods
            failures.append({"run_id": arm.run_id, "method": method,
                             "error": f"{type(exc).__name__}: {exc}"})
            print(f"warning: {arm.run_id}/{method} failed: {exc}", file=sys.stderr)
        _ = start
    return written, failures, timings


def stage_allocate(cfg: ExperimentConfig):
    results = _pool_map(partial(_allocate_arm, cfg), arms_of(cfg))
    written = [p for chunk in results for p in chunk[0]]
    failures = [f for chunk in results for f in chunk[1]]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings_path = out / "timings.csv"
    with open(timings_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_id,method,k,seconds\n")
        for arm, chunk in zip(arms_of(cfg), results):
            for method, k, seconds in chunk[2]:
                fh.write(f"{arm.run_id},{method},{k},{seconds:.6f}\n")
    written.append(str(timings_path))
    return written, failures


# --------------------------------------------------------------------------
# evaluate
# --------------------------------------------------------------------------

def _evaluate_arm(cfg: ExperimentConfig, arm: Arm) -> list[dict]:
    from .allocation import read_allocation_json

    arm_dir = _arm_dir(cfg, arm)
    alloc_dir = arm_dir / "allocations"
    if not alloc_dir.exists():
        raise StageDependencyError(
            f"missing {alloc_dir}; run the allocate stage first"
        )
    test_ds = _load_split(cfg, arm, "test")
    instance = test_ds.instance
    n = instance.n
    ks = cfg.k_values(n)
    pct_of = {}
    for pct in cfg.k_grid_pct:
        k = max(1, round(n * pct / 100.0))
        pct_of.setdefault(k, pct)
    rows = []
    for k in ks:
        baseline = random_baseline(
            instance, k, cfg.random_baseline_samples, stream(arm.seed, S_BASELINE, k)
        )
        for method in cfg.methods:
            path = alloc_dir / f"{method}_k{k}.json"
            if not path.exists():
                continue  # method failed during allocation; recorded there
            allocation, _ = read_allocation_json(path, n)
            true_tte = dgp.tte(instance, allocation.t)
            rows.append({
                "run_id": arm.run_id,
                "seed": arm.seed,
                "beta_spillover": arm.beta,
                "method": method,
                "k": k,
                "k_pct": pct_of[k],
                "tte": true_tte,
                "liftup": true_tte / baseline.mean_tte,
                "riseo": riseo(instance, allocation, baseline.mean_outcome_sum),
            })
    return rows


def stage_evaluate(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    chunks = _pool_map(partial(_evaluate_arm, cfg), arms_of(cfg))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["seed"], r["beta_spillover"], r["method"], r["k"]))
    results_path = out / "results.csv"
    with open(results_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_id,method,k,k_pct,tte,liftup,riseo\n")
        for r in rows:
            fh.write(
                f"{r['run_id']},{r['method']},{r['k']},{r['k_pct']:g},"
                f"{r['tte']!r},{r['liftup']!r},{r['riseo']!r}\n"
            )
    return results_path


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

def _read_results(cfg: ExperimentConfig) -> list[dict]:
    path = Path(cfg.output_dir) / "results.csv"
    if not path.exists():
        raise StageDependencyError(f"missing {path}; run the evaluate stage first")
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for raw in fh:
            if not raw.strip():
                continue
            vals = raw.strip().split(",")
            rows.append(dict(zip(header, vals)))
    for r in rows:
        r["k"] = int(r["k"])
        r["k_pct"] = float(r["k_pct"])
        r["tte"] = float(r["tte"])
        r["liftup"] = float(r["liftup"])
        r["riseo"] = float(r["riseo"])
        seed_part, spill_part = r["run_id"].split("_spill")
        r["seed"] = int(seed_part.removeprefix("seed"))
        r["beta_spillover"] = float(spill_part)
    return rows


def stage_report(cfg: ExperimentConfig) -> list[str]:
    from .allocation import read_allocation_json
    from .metrics import write_similarity_matrix

    out = Path(cfg.output_dir)
    report_dir = out / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    rows = _read_results(cfg)
    written: list[str] = []

    def aggregate(keyfn):
        groups: dict = {}
        for r in rows:
            groups.setdefault(keyfn(r), []).append(r)
        return groups

    # Liftup/RISEO against budget, one row per (spillover, method, k).
    path = report_dir / "liftup_vs_k.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("beta_spillover,method,k,k_pct,mean_liftup,std_liftup,"
                 "mean_riseo,std_riseo,mean_tte\n")
        groups = aggregate(lambda r: (r["beta_spillover"], r["method"], r["k"]))
        for (beta, method, k), grp in sorted(groups.items()):
            lifts = np.array([g["liftup"] for g in grp])
            riseos = np.array([g["riseo"] for g in grp])
            ttes = np.array([g["tte"] for g in grp])
            fh.write(
                f"{beta:g},{method},{k},{grp[0]['k_pct']:g},"
                f"{lifts.mean()!r},{lifts.std()!r},"
                f"{riseos.mean()!r},{riseos.std()!r},{ttes.mean()!r}\n"
            )
    written.append(str(path))

    # Liftup against spillover strength, one row per (k, method, spillover).
    path = report_dir / "liftup_vs_spillover.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k_pct,method,beta_spillover,mean_liftup,std_liftup\n")
        groups = aggregate(lambda r: (r["k_pct"], r["method"], r["beta_spillover"]))
        for (pct, method, beta), grp in sorted(groups.items()):
            lifts = np.array([g["liftup"] for g in grp])
            fh.write(f"{pct:g},{method},{beta:g},{lifts.mean()!r},{lifts.std()!r}\n")
    written.append(str(path))

    # Degree histograms of the generated test networks (one arm per seed).
    path = report_dir / "degree_histograms.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("seed,split,degree,count\n")
        first_beta = cfg.beta_spillover[0]
        for seed in cfg.seeds:
            arm = Arm(seed=seed, beta=first_beta)
            for split in SPLITS:
                edge_path = _arm_dir(cfg, arm) / f"{split}.edges"
                if not edge_path.exists():
                    raise StageDependencyError(
                        f"missing {edge_path}; run the generate stage first"
                    )
                hist = degree_histogram(load_edge_list(edge_path))
                for degree in sorted(hist):
                    fh.write(f"{seed},{split},{degree},{hist[degree]}\n")
    written.append(str(path))

    # Allocation-similarity matrices, averaged over seeds, per (spillover, k).
    for beta in cfg.beta_spillover:
        ks = sorted({r["k"] for r in rows if r["beta_spillover"] == beta})
        for k in ks:
            mats = []
            for seed in cfg.seeds:
                arm = Arm(seed=seed, beta=beta)
                alloc_dir = _arm_dir(cfg, arm) / "allocations"
                allocs = {}
                n = None
                for method in cfg.methods:
                    p = alloc_dir / f"{method}_k{k}.json"
                    if p.exists():
                        if n is None:
                            test_edges = _arm_dir(cfg, arm) / "test.edges"
                            n = load_edge_list(test_edges).n
                        allocs[method] = read_allocation_json(p, n)[0]
                names = [m for m in cfg.methods if m in allocs]
                mat = np.zeros((len(names), len(names)))
                for i, a in enumerate(names):
                    for j, b in enumerate(names):
                        mat[i, j] = allocation_similarity(allocs[a], allocs[b])
                mats.append((names, mat))
            if not mats:
                continue
            names = mats[0][0]
            stack = np.mean([m for _, m in mats], axis=0)
            path = report_dir / f"similarity_spill{beta:g}_k{k}.csv"
            write_similarity_matrix(path, names, stack)
            written.append(str(path))
    return written


# --------------------------------------------------------------------------
# full run + manifest
# --------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def run_experiment(cfg: ExperimentConfig, raw_config: dict | None = None) -> dict:
    """Run all stages and write a manifest describing every artifact."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    generated = stage_generate(cfg)
    trained = stage_train(cfg)
    allocated, failures = stage_allocate(cfg)
    results_path = stage_evaluate(cfg)
    reported = stage_report(cfg)

    seed_of: dict[str, int] = {}
    for arm in arms_of(cfg):
        prefix = str(_arm_dir(cfg, arm))
        seed_of[prefix] = arm.seed
    files = {}
    tracked = generated + trained + allocated + reported + [str(results_path)]
    for path in tracked:
        p = Path(path)
        seed = next((s for prefix, s in seed_of.items() if str(p).startswith(prefix)),
                    None)
        files[str(p.relative_to(out))] = {"sha256": _sha256(p), "seed": seed}
    manifest = {
        "config": raw_config,
        "seeds": list(cfg.seeds),
        "beta_spillover": list(cfg.beta_spillover),
        "arms": [arm.run_id for arm in arms_of(cfg)],
        "workers": _workers(),
        "failures": failures,
        "files": files,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
