"""k-means grouping of segment feature vectors into three driving styles.

Styles are reported in a canonical order so downstream consumers can rely
on the index: style 1 has the highest centroid TETH (time spent below the
safety headway -> most aggressive), style 2 has the highest THW_RMS among
the remaining clusters (longest typical headway -> least aggressive) and
style 3 is the one left over.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ValidationError
from .features import FEATURE_NAMES


@dataclass(frozen=True)
class KMeansConfig:
    n_clusters: int = 3
    n_init: int = 50
    max_iters: int = 300
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValidationError("n_clusters must be >= 1")
        if self.n_init < 1 or self.max_iters < 1:
            raise ValidationError("n_init and max_iters must be >= 1")
        if self.tol < 0:
            raise ValidationError("tol must be >= 0")


@dataclass
class ClusterModel:
    centroids: np.ndarray  # (k, n_features), canonical order
    inertia: float
    n_iter: int
    order: tuple[int, ...] = ()  # canonical style -> raw kmeans index
    inertia_history: list[float] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return len(self.centroids)


def _pairwise_sq(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all points coincide with chosen centroids; any pick works
            centroids[i] = x[rng.integers(n)]
            continue
        centroids[i] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centroids[i]) ** 2, axis=1))
    return centroids


def _lloyd(
    x: np.ndarray, init: np.ndarray, max_iters: int, tol: float
) -> tuple[np.ndarray, np.ndarray, float, int, list[float]]:
    centroids = init.copy()
    k = len(centroids)
    history = []
    labels = np.zeros(len(x), dtype=int)
    inertia = np.inf
    for it in range(1, max_iters + 1):
        d2 = _pairwise_sq(x, centroids)
        labels = np.argmin(d2, axis=1)
        for j in range(k):
            member = labels == j
            if member.any():
                centroids[j] = x[member].mean(axis=0)
            else:
                # reseed an empty cluster to the point farthest from its centroid
                far = np.argmax(np.min(d2, axis=1))
                centroids[j] = x[far]
                labels[far] = j
        new_inertia = float(
            np.sum((x - centroids[labels]) ** 2)
        )
        history.append(new_inertia)
        if np.isfinite(inertia):
            if inertia - new_inertia <= tol * max(inertia, 1e-300):
                inertia = new_inertia
                return centroids, labels, inertia, it, history
        inertia = new_inertia
    return centroids, labels, inertia, max_iters, history


def kmeans_fit(x: np.ndarray, config: KMeansConfig = KMeansConfig()) -> ClusterModel:
    """Best-of-n_init Lloyd iterations with kmeans++ seeding.

    Restart r uses np.random.default_rng([seed, r]) so results are
    reproducible regardless of restart scheduling.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValidationError("feature matrix must be 2-D")
    if not np.all(np.isfinite(x)):
        raise NumericError("feature matrix contains non-finite values")
    k = config.n_clusters
    if len(x) < k:
        raise ValidationError(f"need at least {k} segments to form {k} clusters, got {len(x)}")

    best = None
    for r in range(config.n_init):
        rng = np.random.default_rng([config.seed & 0xFFFFFFFF, r])
        init = _kmeanspp_init(x, k, rng)
        centroids, labels, inertia, n_iter, history = _lloyd(
            x, init, config.max_iters, config.tol
        )
        if best is None or inertia < best[2]:
            best = (centroids, labels, inertia, n_iter, history)

    centroids, _, inertia, n_iter, history = best
    order = canonical_order(centroids)
    return ClusterModel(
        centroids=centroids[list(order)],
        inertia=inertia,
        n_iter=n_iter,
        order=order,
        inertia_history=history,
    )


def canonical_order(centroids: np.ndarray) -> tuple[int, ...]:
    """Raw centroid indices in (aggressive, least aggressive, rest) order.

    Assumes columns follow FEATURE_NAMES: THW_RMS, TETH, TITH. With fewer
    than 3 clusters the surviving rules of the ordering are applied in turn.
    Ties pick the lower raw index.
    """
    k = len(centroids)
    remaining = list(range(k))
    order = []
    if remaining:
        teth = centroids[remaining, 1]
        first = remaining[int(np.argmax(teth))]
        order.append(first)
        remaining.remove(first)
    if remaining:
        thw_rms = centroids[remaining, 0]
        second = remaining[int(np.argmax(thw_rms))]
        order.append(second)
        remaining.remove(second)
    order.extend(remaining)
    return tuple(order)


def assign(x: np.ndarray, model: ClusterModel) -> np.ndarray:
    """Canonical style index (0-based) of each row's nearest centroid."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d2 = _pairwise_sq(x, model.centroids)
    return np.argmin(d2, axis=1)


def model_to_dict(model: ClusterModel, scaler_ref: str | None = None) -> dict:
    doc = {
        "feature_names": list(FEATURE_NAMES),
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "inertia": model.inertia,
        "n_iter": model.n_iter,
        "label_order": list(model.order),
    }
    if scaler_ref is not None:
        doc["scaler_ref"] = scaler_ref
    return doc


def model_from_dict(d: dict) -> ClusterModel:
    if list(d.get("feature_names", [])) != list(FEATURE_NAMES):
        raise ValidationError("cluster model feature names do not match this build")
    return ClusterModel(
        centroids=np.asarray(d["centroids"], dtype=float),
        inertia=float(d["inertia"]),
        n_iter=int(d["n_iter"]),
        order=tuple(int(i) for i in d["label_order"]),
    )


def save_model(
    model: ClusterModel, path, scaler_ref: str | None = None, extra: dict | None = None
) -> None:
    doc = model_to_dict(model, scaler_ref=scaler_ref)
    if extra:
        doc.update(extra)
    with open(str(path), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ClusterModel:
    with open(str(path)) as fh:
        return model_from_dict(json.load(fh))
