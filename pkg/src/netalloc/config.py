"""Experiment configuration: YAML schema, strict validation, defaults.

Unknown keys are errors so typos in coefficient names fail fast. Spillover
values outside the studied [0, 0.7] range only warn.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

METHODS = (
    "upper_bound",
    "greedy",
    "genetic",
    "degree",
    "single_discount",
    "celf",
    "tarnet",
    "random",
)

DEFAULT_K_GRID_PCT = (1.0, 5.0, 10.0, 20.0, 40.0, 60.0, 80.0)

# The seven curves reported by default; plain "random" can be added as a
# method, but it already serves as the denominator of every ratio metric.
DEFAULT_METHODS = tuple(m for m in METHODS if m != "random")

DGP_OVERRIDE_KEYS = {
    "beta0", "beta_xy", "beta_ny", "beta_individual", "beta_xt", "beta_nt",
    "b_ty", "beta_eps", "d",
}

SPLITS = ("train", "valid", "test")


def _check_keys(data: dict, allowed: set[str], context: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(unknown)}")


def _require(data: dict, key: str, context: str):
    if key not in data:
        raise ConfigError(f"missing required key '{key}' in {context}")
    return data[key]


@dataclass(frozen=True)
class NetworkSpec:
    kind: str  # "ba" | "ws" | "files"
    n: int = 500
    m: int = 2
    ring_degree: int = 4
    rewire_prob: float = 0.1
    files: dict = field(default_factory=dict)  # split -> {edges, features}

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        kind = _require(data, "kind", "network")
        if kind == "ba":
            _check_keys(data, {"kind", "n", "m"}, "network (ba)")
            spec = cls(kind=kind, n=int(data.get("n", 500)), m=int(data.get("m", 2)))
            if spec.n <= spec.m or spec.m < 1:
                raise ConfigError("network.ba requires n > m >= 1")
            return spec
        if kind == "ws":
            _check_keys(data, {"kind", "n", "ring_degree", "rewire_prob"},
                        "network (ws)")
            spec = cls(
                kind=kind, n=int(data.get("n", 500)),
                ring_degree=int(data.get("ring_degree", 4)),
                rewire_prob=float(data.get("rewire_prob", 0.1)),
            )
            if spec.ring_degree % 2 or spec.n <= spec.ring_degree:
                raise ConfigError("network.ws requires even ring_degree < n")
            if not 0.0 <= spec.rewire_prob <= 1.0:
                raise ConfigError("network.ws rewire_prob must be in [0, 1]")
            return spec
        if kind == "files":
            allowed = {"kind"}
            for split in SPLITS:
                allowed.add(f"{split}_edges")
                allowed.add(f"{split}_features")
            _check_keys(data, allowed, "network (files)")
            files = {}
            for split in SPLITS:
                edges = _require(data, f"{split}_edges", "network (files)")
                feats = _require(data, f"{split}_features", "network (files)")
                for p in (edges, feats):
                    if not Path(p).exists():
                        raise ConfigError(f"network file does not exist: {p}")
                files[split] = {"edges": edges, "features": feats}
            return cls(kind=kind, files=files)
        raise ConfigError(f"network.kind must be ba, ws, or files, got {kind!r}")


@dataclass(frozen=True)
class EstimatorSpec:
    hidden: int = 16
    alpha: float = 0.5
    gamma: float = 0.5
    learning_rate: float = 5e-3
    epochs: int = 300
    grid: dict = field(default_factory=dict)  # learning_rate/epochs lists

    @classmethod
    def from_dict(cls, data: dict) -> "EstimatorSpec":
        _check_keys(
            data,
            {"hidden", "alpha", "gamma", "learning_rate", "epochs", "grid"},
            "estimator",
        )
        grid = data.get("grid", {}) or {}
        _check_keys(grid, {"learning_rate", "epochs"}, "estimator.grid")
        return cls(
            hidden=int(data.get("hidden", 16)),
            alpha=float(data.get("alpha", 0.5)),
            gamma=float(data.get("gamma", 0.5)),
            learning_rate=float(data.get("learning_rate", 5e-3)),
            epochs=int(data.get("epochs", 300)),
            grid={k: list(v) for k, v in grid.items()},
        )

    def grid_points(self) -> list[dict]:
        lrs = [float(v) for v in self.grid.get("learning_rate", [self.learning_rate])]
        eps = [int(v) for v in self.grid.get("epochs", [self.epochs])]
        return [{"learning_rate": lr, "epochs": ep} for lr in lrs for ep in eps]


@dataclass(frozen=True)
class TarnetSpec:
    learning_rate: float = 5e-3
    epochs: int = 300
    rep_layers: int = 1
    head_layers: int = 2
    grid: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "TarnetSpec":
        _check_keys(
            data,
            {"learning_rate", "epochs", "rep_layers", "head_layers", "grid"},
            "tarnet",
        )
        grid = data.get("grid", {}) or {}
        _check_keys(
            grid, {"learning_rate", "epochs", "rep_layers", "head_layers"},
            "tarnet.grid",
        )
        return cls(
            learning_rate=float(data.get("learning_rate", 5e-3)),
            epochs=int(data.get("epochs", 300)),
            rep_layers=int(data.get("rep_layers", 1)),
            head_layers=int(data.get("head_layers", 2)),
            grid={k: list(v) for k, v in grid.items()},
        )

    def grid_points(self) -> list[dict]:
        lrs = [float(v) for v in self.grid.get("learning_rate", [self.learning_rate])]
        eps = [int(v) for v in self.grid.get("epochs", [self.epochs])]
        reps = [int(v) for v in self.grid.get("rep_layers", [self.rep_layers])]
        heads = [int(v) for v in self.grid.get("head_layers", [self.head_layers])]
        return [
            {"learning_rate": lr, "epochs": ep, "rep_layers": r, "head_layers": h}
            for lr in lrs for ep in eps for r in reps for h in heads
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: str
    seeds: tuple[int, ...]
    network: NetworkSpec
    beta_spillover: tuple[float, ...] = (0.3,)
    dgp_overrides: dict = field(default_factory=dict)
    binary_outcomes: bool = True
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    tarnet: TarnetSpec = field(default_factory=TarnetSpec)
    methods: tuple[str, ...] = DEFAULT_METHODS
    k_grid_pct: tuple[float, ...] = DEFAULT_K_GRID_PCT
    celf_p: float = 0.01
    celf_sims: int = 1000
    ga: dict = field(default_factory=dict)
    random_baseline_samples: int = 100

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _check_keys(
            data,
            {"output_dir", "seeds", "network", "dgp", "estimator", "tarnet",
             "methods", "k_grid_pct", "celf", "ga", "random_baseline_samples"},
            "config",
        )
        output_dir = str(_require(data, "output_dir", "config"))
        seeds = tuple(int(s) for s in _require(data, "seeds", "config"))
        if not seeds:
            raise ConfigError("config.seeds must be non-empty")
        network = NetworkSpec.from_dict(dict(_require(data, "network", "config")))

        dgp_section = dict(data.get("dgp", {}) or {})
        _check_keys(dgp_section, {"beta_spillover", "overrides", "binary_outcomes"},
                    "dgp")
        betas = dgp_section.get("beta_spillover", [0.3])
        if not isinstance(betas, (list, tuple)):
            betas = [betas]
        betas = tuple(float(b) for b in betas)
        for b in betas:
            if not 0.0 <= b <= 0.7:
                print(
                    f"warning: beta_spillover={b} lies outside the studied "
                    f"range [0, 0.7]",
                    file=sys.stderr,
                )
        overrides = dict(dgp_section.get("overrides", {}) or {})
        _check_keys(overrides, DGP_OVERRIDE_KEYS, "dgp.overrides")

        methods = tuple(data.get("methods", DEFAULT_METHODS))
        for m in methods:
            if m not in METHODS:
                raise ConfigError(
                    f"unknown method {m!r}; valid: {', '.join(METHODS)}"
                )

        k_grid = tuple(float(v) for v in data.get("k_grid_pct", DEFAULT_K_GRID_PCT))
        for pct in k_grid:
            if not 0.0 < pct <= 100.0:
                raise ConfigError(f"k_grid_pct entries must be in (0, 100], got {pct}")

        celf_section = dict(data.get("celf", {}) or {})
        _check_keys(celf_section, {"p", "n_sims"}, "celf")
        ga_section = dict(data.get("ga", {}) or {})
        _check_keys(
            ga_section,
            {"population", "elites", "parents", "genes_mutated", "generations"},
            "ga",
        )

        return cls(
            output_dir=output_dir,
            seeds=seeds,
            network=network,
            beta_spillover=betas,
            dgp_overrides=overrides,
            binary_outcomes=bool(dgp_section.get("binary_outcomes", True)),
            estimator=EstimatorSpec.from_dict(dict(data.get("estimator", {}) or {})),
            tarnet=TarnetSpec.from_dict(dict(data.get("tarnet", {}) or {})),
            methods=methods,
            k_grid_pct=k_grid,
            celf_p=float(celf_section.get("p", 0.01)),
            celf_sims=int(celf_section.get("n_sims", 1000)),
            ga=ga_section,
            random_baseline_samples=int(data.get("random_baseline_samples", 100)),
        )

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse YAML config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        return cls.from_dict(data)

    def k_values(self, n: int) -> list[int]:
        """Budget grid in nodes, deduplicated, at least 1 each."""
        ks = []
        for pct in self.k_grid_pct:
            k = max(1, round(n * pct / 100.0))
            if k not in ks:
                ks.append(k)
        return ks
