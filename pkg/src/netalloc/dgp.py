"""Synthetic data generation and the ground-truth outcome oracle.

The generating process: node features are standard normal, treatments are
Bernoulli with feature-driven propensities (confounding), a node's exposure is
the fraction of treated neighbors, and the outcome probability is a sigmoid of
its own treatment, exposure, and own/neighbor feature effects with a
heterogeneous susceptibility multiplier. The oracle evaluates that probability
at zero noise, which makes every treatment-effect quantity computable exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError, ShapeError
from .graphs import Graph
from .numerics import sigmoid


@dataclass(frozen=True)
class DgpParams:
    """Fixed coefficients of the generating process.

    Defaults are the reference setting; beta_spillover is the knob swept by
    experiments (0 disables interference entirely).
    """

    beta0: float = -3.0
    beta_xy: float = 0.7
    beta_ny: float = 0.2
    beta_individual: float = 1.0
    beta_spillover: float = 0.3
    beta_xt: float = 1.0
    beta_nt: float = 0.5
    b_ty: float = 4.0
    beta_eps: float = 0.05
    d: int = 10

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError(f"feature dimension must be >= 1, got {self.d}")
        if self.beta_eps < 0:
            raise InvalidInputError("noise scale beta_eps must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DgpParams":
        return cls(**data)


@dataclass(frozen=True)
class DgpWeights:
    """Per-instance random linear weights: feature->treatment, feature->outcome,
    feature->susceptibility. Each component is uniform on [-1, 1]."""

    w_xt: np.ndarray
    w_xy: np.ndarray
    w_ty: np.ndarray

    def __post_init__(self):
        for name in ("w_xt", "w_xy", "w_ty"):
            v = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, v)
            v.setflags(write=False)
            if v.ndim != 1:
                raise ShapeError(f"{name} must be a vector")
            if np.any(np.abs(v) > 1.0):
                raise InvalidInputError(f"{name} has components outside [-1, 1]")

    def to_dict(self) -> dict:
        return {
            "w_xt": self.w_xt.tolist(),
            "w_xy": self.w_xy.tolist(),
            "w_ty": self.w_ty.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DgpWeights":
        return cls(
            w_xt=np.asarray(data["w_xt"], dtype=float),
            w_xy=np.asarray(data["w_xy"], dtype=float),
            w_ty=np.asarray(data["w_ty"], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class DgpInstance:
    """One sampled world: graph, features, weights, and fixed coefficients."""

    graph: Graph
    features: np.ndarray
    weights: DgpWeights
    params: DgpParams

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        object.__setattr__(self, "features", feats)
        feats.setflags(write=False)
        if feats.shape != (self.graph.n, self.params.d):
            raise ShapeError(
                f"features shape {feats.shape} does not match "
                f"(n={self.graph.n}, d={self.params.d})"
            )
        for w in (self.weights.w_xt, self.weights.w_xy, self.weights.w_ty):
            if w.shape != (self.params.d,):
                raise ShapeError("weight vector length does not match d")

    @property
    def n(self) -> int:
        return self.graph.n

    # Allocation-independent node quantities, computed once per instance.
    @cached_property
    def propensity(self) -> np.ndarray:
        return sigmoid(self.features @ self.weights.w_xt)

    @cached_property
    def feature_effect(self) -> np.ndarray:
        return sigmoid(self.features @ self.weights.w_xy)

    @cached_property
    def neighbor_feature_effect(self) -> np.ndarray:
        return self.graph.neighbor_mean(self.feature_effect)

    @cached_property
    def susceptibility(self) -> np.ndarray:
        return sigmoid(self.features @ self.weights.w_ty) + self.params.b_ty

    @cached_property
    def outcome_base(self) -> np.ndarray:
        p = self.params
        return (
            p.beta0
            + p.beta_xy * self.feature_effect
            + p.beta_ny * self.neighbor_feature_effect
        )


def sample_weights(params: DgpParams, rng: np.random.Generator) -> DgpWeights:
    """Draw the three weight vectors, each uniform on [-1, 1]^d."""
    return DgpWeights(
        w_xt=rng.uniform(-1.0, 1.0, params.d),
        w_xy=rng.uniform(-1.0, 1.0, params.d),
        w_ty=rng.uniform(-1.0, 1.0, params.d),
    )


def sample_instance(
    graph: Graph,
    params: DgpParams,
    rng: np.random.Generator,
    weights: DgpWeights | None = None,
) -> DgpInstance:
    """Sample a world on `graph`: weights first (unless given), then features.

    Passing `weights` reuses one causal mechanism across several networks,
    which is what lets an estimator trained on one network transfer to
    another.
    """
    if weights is None:
        weights = sample_weights(params, rng)
    features = rng.standard_normal((graph.n, params.d))
    return DgpInstance(graph=graph, features=features, weights=weights, params=params)


def _require_binary(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 1:
        raise InvalidInputError("treatment vector must be 1-D")
    if not np.all((t == 0) | (t == 1)):
        raise InvalidInputError("treatment vector must be binary 0/1")
    return t.astype(float)


def exposure(graph: Graph, t: np.ndarray) -> np.ndarray:
    """Fraction of each node's neighbors that are treated (0 if isolated)."""
    t = _require_binary(t)
    if t.size != graph.n:
        raise ShapeError(f"treatment length {t.size} != n {graph.n}")
    return graph.neighbor_mean(t)


def assign_treatments(instance: DgpInstance, rng: np.random.Generator) -> np.ndarray:
    """Confounded Bernoulli treatments from own and neighbor propensities.

    The success probability beta_xt*p_i + beta_nt*p_Ni can exceed 1 under the
    default coefficients, so it is clamped into [0, 1].
    """
    p = instance.propensity
    p_nbr = instance.graph.neighbor_mean(p)
    prob = np.clip(
        instance.params.beta_xt * p + instance.params.beta_nt * p_nbr, 0.0, 1.0
    )
    return (rng.random(instance.n) < prob).astype(np.int8)


def _outcome_logits(instance: DgpInstance, nodes, t, z) -> np.ndarray:
    p = instance.params
    base = instance.outcome_base[nodes]
    h = instance.susceptibility[nodes]
    return base + h * (p.beta_individual * np.asarray(t, dtype=float)
                       + p.beta_spillover * np.asarray(z, dtype=float))


def expected_outcomes(
    instance: DgpInstance,
    t: np.ndarray,
    z: np.ndarray,
    noise_draws: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Oracle outcome probability for every node at the given (t_i, z_i).

    With noise_draws=0 (the default) the sigmoid is evaluated at zero noise,
    making the oracle deterministic. noise_draws > 0 averages the sigmoid
    over that many standard-normal noise draws instead (sensitivity mode).
    """
    t = _require_binary(t)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > 1):
        raise InvalidInputError("exposure values must lie in [0, 1]")
    logits = _outcome_logits(instance, slice(None), t, z)
    if noise_draws <= 0:
        return sigmoid(logits)
    if rng is None:
        raise InvalidInputError("noise_draws > 0 requires an rng")
    eps = rng.standard_normal((noise_draws, instance.n))
    return sigmoid(logits[None, :] + instance.params.beta_eps * eps).mean(axis=0)


def expected_outcome(instance: DgpInstance, i: int, t_i: int, z_i: float) -> float:
    """Oracle outcome probability for node i at own treatment t_i, exposure z_i."""
    if t_i not in (0, 1):
        raise InvalidInputError(f"t_i must be 0 or 1, got {t_i}")
    if not 0.0 <= z_i <= 1.0:
        raise InvalidInputError(f"z_i must lie in [0, 1], got {z_i}")
    return float(sigmoid(_outcome_logits(instance, i, t_i, z_i)))


def sample_factual_outcomes(
    instance: DgpInstance,
    t: np.ndarray,
    rng: np.random.Generator,
    binary: bool = True,
) -> np.ndarray:
    """Factual outcomes under allocation t.

    Per node: draw noise, form q_i = sigmoid(linear predictor + beta_eps*eps),
    then draw y_i ~ Bernoulli(q_i). With binary=False the q_i themselves are
    returned as soft labels.
    """
    t = _require_binary(t)
    z = exposure(instance.graph, t)
    eps = rng.standard_normal(instance.n)
    q = sigmoid(_outcome_logits(instance, slice(None), t, z)
                + instance.params.beta_eps * eps)
    if not binary:
        return q
    return (rng.random(instance.n) < q).astype(np.int8)


def mite(instance: DgpInstance, i: int, z: float) -> float:
    """Own-treatment effect at fixed exposure z."""
    return expected_outcome(instance, i, 1, z) - expected_outcome(instance, i, 0, z)


def spillover(instance: DgpInstance, i: int, t: int, z: float) -> float:
    """Effect of neighbor exposure z at fixed own treatment t."""
    return expected_outcome(instance, i, t, z) - expected_outcome(instance, i, t, 0.0)


def itte(instance: DgpInstance, i: int, t: int, z: float) -> float:
    """Total effect on node i of (t, z) versus the all-control world."""
    return expected_outcome(instance, i, t, z) - expected_outcome(instance, i, 0, 0.0)


def itte_vector(instance: DgpInstance, t: np.ndarray) -> np.ndarray:
    """ITTE of every node under allocation t (exposure derived from t)."""
    t = _require_binary(t)
    z = exposure(instance.graph, t)
    zeros = np.zeros(instance.n)
    return expected_outcomes(instance, t, z) - expected_outcomes(instance, zeros, zeros)


def tte(instance: DgpInstance, t: np.ndarray) -> float:
    """Total treatment effect of allocation t: the sum of per-node ITTEs."""
    return float(itte_vector(instance, t).sum())


def oracle_outcome_fn(instance: DgpInstance):
    """Fast per-node oracle for allocation objectives.

    Returns f(nodes, t, z) -> outcome probabilities, with no input validation;
    callers guarantee binary t and z in [0, 1].
    """
    base = instance.outcome_base
    h = instance.susceptibility
    bi = instance.params.beta_individual
    bs = instance.params.beta_spillover

    def fn(nodes, t, z):
        return sigmoid(base[nodes] + h[nodes] * (bi * t + bs * z))

    return fn


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observed data for one network: factual treatments, exposures, outcomes."""

    instance: DgpInstance
    t: np.ndarray
    z: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        n = self.instance.n
        for name in ("t", "z", "y"):
            v = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, v)
            v.setflags(write=False)
            if v.shape != (n,):
                raise ShapeError(f"{name} must have length {n}")
        if not np.allclose(self.z, exposure(self.instance.graph, self.t), atol=1e-12):
            raise InvalidInputError("z is not the exposure induced by t")


def make_dataset(
    instance: DgpInstance, rng: np.random.Generator, binary: bool = True
) -> Dataset:
    """Sample treatments and outcomes, bundling them with derived exposures."""
    t = assign_treatments(instance, rng)
    z = exposure(instance.graph, t)
    y = sample_factual_outcomes(instance, t, rng, binary=binary)
    return Dataset(instance=instance, t=t, z=z, y=y)


def write_dataset_csv(dataset: Dataset, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node,t,z,y\n")
        for i in range(dataset.instance.n):
            fh.write(
                f"{i},{int(dataset.t[i])},{repr(float(dataset.z[i]))},"
                f"{repr(float(dataset.y[i]))}\n"
            )


def read_dataset_csv(path):
    """Read a dataset CSV back to (t, z, y) arrays."""
    path = Path(path)
    t, z, y = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "node,t,z,y":
            raise ParseError(path, 1, f"expected header 'node,t,z,y', got {header!r}")
        for raw in fh:
            if not raw.strip():
                continue
            _, ti, zi, yi = raw.strip().split(",")
            t.append(float(ti))
            z.append(float(zi))
            y.append(float(yi))
    return np.asarray(t), np.asarray(z), np.asarray(y)


def write_instance_manifest(
    instance: DgpInstance, path, seeds: dict | None = None
) -> None:
    """JSON sidecar with params, weights, and the seeds that produced a run."""
    payload = {
        "params": instance.params.to_dict(),
        "weights": instance.weights.to_dict(),
        "n": instance.n,
        "seeds": seeds or {},
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def instance_from_files(edge_path, feature_path, manifest_path) -> DgpInstance:
    """Rebuild a DgpInstance from its exported files."""
    from .graphs import load_edge_list, load_features

    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    graph = load_edge_list(edge_path)
    features = load_features(feature_path)
    return DgpInstance(
        graph=graph,
        features=features,
        weights=DgpWeights.from_dict(manifest["weights"]),
        params=DgpParams.from_dict(manifest["params"]),
    )
