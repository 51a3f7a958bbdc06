"""Per-style headway planes and the individualized ACC setpoint.

Each driving style contributes a plane THW_hat = alpha * THW_RMS_bar +
beta * TITH + gamma fixed by three points of its cluster statistics: the
shortest observed headway paired with the largest time-in-deficit maps to
mean - sd, the longest headway with the smallest deficit to mean + sd, and
the means map to the mean. A driver who keeps shorter headways than their
cluster average therefore gets a setpoint below the cluster mean, and vice
versa — but never below the 1.0 s floor.

THW_RMS enters in seconds; TITH enters scaler-normalized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .features import FeatureVector, Scaler, apply_scaler

THW_FLOOR_S = 1.0

_DEGENERATE_DET = 1e-12


@dataclass(frozen=True)
class ClusterStats:
    thw_rms_mean: float
    thw_rms_sd: float
    thw_rms_min: float
    thw_rms_max: float
    tith_min: float
    tith_max: float
    tith_mean: float

    def __post_init__(self):
        if not self.thw_rms_min <= self.thw_rms_mean <= self.thw_rms_max:
            raise ValidationError("THW_RMS stats must satisfy min <= mean <= max")
        if not self.tith_min <= self.tith_mean <= self.tith_max:
            raise ValidationError("TITH stats must satisfy min <= mean <= max")
        if self.thw_rms_sd < 0:
            raise ValidationError("standard deviation must be >= 0")


@dataclass(frozen=True)
class PlaneModel:
    alpha: float
    beta: float
    gamma: float
    points: tuple[tuple[float, float, float], ...]
    floor_s: float = THW_FLOOR_S

    def raw(self, thw_rms_bar: float, tith_norm: float) -> float:
        """Plane height before the safety floor."""
        return self.alpha * thw_rms_bar + self.beta * tith_norm + self.gamma


@dataclass(frozen=True)
class Observation:
    thw_rms_bar: float  # seconds
    tith_norm: float  # scaler-normalized

    def __post_init__(self):
        if not self.thw_rms_bar > 0:
            raise ValidationError("observed THW_RMS must be > 0")
        if not 0.0 <= self.tith_norm <= 1.0:
            raise ValidationError("normalized TITH must lie in [0, 1]")


def compute_cluster_stats(
    features: list[FeatureVector], labels, scaler: Scaler, n_clusters: int = 3
) -> list[ClusterStats]:
    """Population statistics per style: THW_RMS in seconds, TITH normalized."""
    labels = np.asarray(labels, dtype=int)
    if len(labels) != len(features):
        raise ValidationError("labels and features must have equal length")
    thw_rms = np.array([f.thw_rms for f in features])
    raw = np.array([f.as_array() for f in features])
    tith_norm = apply_scaler(scaler, raw)[:, 2]
    out = []
    for k in range(n_clusters):
        member = labels == k
        if not member.any():
            raise ValidationError(f"style {k + 1} has no segments")
        t = thw_rms[member]
        g = tith_norm[member]
        out.append(
            ClusterStats(
                thw_rms_mean=float(t.mean()),
                thw_rms_sd=float(t.std()),  # population sd
                thw_rms_min=float(t.min()),
                thw_rms_max=float(t.max()),
                tith_min=float(g.min()),
                tith_max=float(g.max()),
                tith_mean=float(g.mean()),
            )
        )
    return out


def fit_plane(stats: ClusterStats, floor_s: float = THW_FLOOR_S) -> PlaneModel:
    """Unique plane through the three defining points of the statistics.

    p1 = (min THW_RMS, max TITH, mean - sd), p2 = (max THW_RMS, min TITH,
    mean + sd), p3 = (mean THW_RMS, mean TITH, mean). Collinear points
    (e.g. a style whose TITH never varies) cannot fix a plane and raise.
    """
    p1 = (stats.thw_rms_min, stats.tith_max, stats.thw_rms_mean - stats.thw_rms_sd)
    p2 = (stats.thw_rms_max, stats.tith_min, stats.thw_rms_mean + stats.thw_rms_sd)
    p3 = (stats.thw_rms_mean, stats.tith_mean, stats.thw_rms_mean)
    points = (p1, p2, p3)

    m = np.array([[x, y, 1.0] for x, y, _ in points])
    z = np.array([p[2] for p in points])
    det = float(np.linalg.det(m))
    if abs(det) < _DEGENERATE_DET:
        raise NumericError(
            f"plane-defining points {points} are collinear (det={det:.3e})"
        )
    alpha, beta, gamma = np.linalg.solve(m, z)

    spread_x = stats.thw_rms_max > stats.thw_rms_min
    spread_y = stats.tith_max > stats.tith_min
    if spread_x and spread_y and not (alpha > 0 and beta <= 0):
        raise NumericError(
            f"plane slopes have unexpected signs (alpha={alpha:.4g}, beta={beta:.4g}); "
            "expected the setpoint to rise with THW_RMS and fall with TITH"
        )
    return PlaneModel(
        alpha=float(alpha), beta=float(beta), gamma=float(gamma), points=points, floor_s=floor_s
    )


def personalize(plane: PlaneModel, obs: Observation) -> float:
    """Individualized headway setpoint in seconds, floored for safety."""
    return max(plane.raw(obs.thw_rms_bar, obs.tith_norm), plane.floor_s)


def learning_window(features: list[FeatureVector], scaler: Scaler) -> Observation:
    """Condense the segments of a learning period into one observation.

    THW_RMS values average in physical seconds; the mean raw TITH is then
    normalized with the cohort scaler so it lands on the plane's TITH axis.
    """
    if not features:
        raise ValidationError("learning window contains no segments")
    thw_rms_bar = float(np.mean([f.thw_rms for f in features]))
    mean_raw = np.array([[0.0, 0.0, float(np.mean([f.tith for f in features]))]])
    tith_norm = float(apply_scaler(scaler, mean_raw)[0, 2])
    return Observation(thw_rms_bar=thw_rms_bar, tith_norm=tith_norm)


def format_setpoint(thw_s: float, cluster: int, ts: float) -> str:
    """One line of the downstream emission protocol."""
    return f"SETPOINT thw_s={thw_s!r} cluster={cluster} ts={ts!r}\n"


def plane_to_dict(plane: PlaneModel, cluster: int) -> dict:
    return {
        "cluster": cluster,
        "alpha": plane.alpha,
        "beta": plane.beta,
        "gamma": plane.gamma,
        "points": [list(p) for p in plane.points],
        "floor_s": plane.floor_s,
    }


def plane_from_dict(d: dict) -> PlaneModel:
    return PlaneModel(
        alpha=float(d["alpha"]),
        beta=float(d["beta"]),
        gamma=float(d["gamma"]),
        points=tuple(tuple(float(v) for v in p) for p in d["points"]),
        floor_s=float(d["floor_s"]),
    )


def save_planes(planes: list[PlaneModel], path, extra: dict | None = None) -> None:
    doc = {"planes": [plane_to_dict(p, k + 1) for k, p in enumerate(planes)]}
    if extra:
        doc.update(extra)
    with open(str(path), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_planes(path) -> list[PlaneModel]:
    with open(str(path)) as fh:
        doc = json.load(fh)
    entries = sorted(doc["planes"], key=lambda p: int(p["cluster"]))
    return [plane_from_dict(d) for d in entries]
