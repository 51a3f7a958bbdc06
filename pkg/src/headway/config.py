"""Run configuration: one JSON file drives every pipeline stage.

All fields default to the bundled demo cohort, so an empty JSON object
(or no --config at all) reproduces the demo end-to-end. The SHA-256 hash
of the effective configuration (after --seed / --out-dir overrides) is
embedded in every artifact so stages can refuse mismatched inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .anfis import TrainConfig
from .clustering import KMeansConfig
from .errors import ValidationError
from .features import SafetyThreshold
from .personalization import THW_FLOOR_S
from .segmentation import Premises
from .trips import MoodSpec


@dataclass(frozen=True)
class ArchetypeSpec:
    """A driver population the cohort generator draws from."""

    name: str
    target_thw: float
    thw_jitter_sd: float
    gain: float = 0.5
    moods: tuple[MoodSpec, ...] = ()


# The demo populations are tuned so every emergent cluster supports a
# non-degenerate setpoint plane: each needs its mean THW_RMS and mean TITH
# on opposite sides of the respective range midpoints, which no amount of
# symmetric jitter provides. The close population gets rare abrupt lunges
# (slew_mult 2 makes the entry/exit transitions interrupt steady following,
# so each lunge yields a short deep-gap stretch plus short quiet fragments);
# the mid population gets mild relaxing episodes for an upper THW_RMS tail;
# the far population gets grazing dips below the safety threshold (its only
# TITH exposure) plus rare long relaxes for its upper THW_RMS tail.
DEMO_ARCHETYPES = (
    ArchetypeSpec(
        name="close",
        target_thw=0.9,
        thw_jitter_sd=0.08,
        gain=1.2,
        moods=(MoodSpec(0.06, 0.52, 0.62, hold=3, slew_mult=2.0),),
    ),
    ArchetypeSpec(
        name="mid",
        target_thw=1.7,
        thw_jitter_sd=0.16,
        gain=1.2,
        moods=(MoodSpec(0.05, 1.90, 2.10, hold=1),),
    ),
    ArchetypeSpec(
        name="far",
        target_thw=2.6,
        thw_jitter_sd=0.25,
        gain=1.2,
        moods=(MoodSpec(0.04, 1.42, 1.48, hold=1), MoodSpec(0.03, 3.05, 3.40, hold=4)),
    ),
)


@dataclass(frozen=True)
class CohortConfig:
    archetypes: tuple[ArchetypeSpec, ...] = DEMO_ARCHETYPES
    drivers_per_archetype: int = 2
    trips_per_driver: int = 3
    trip_duration_s: float = 600.0

    def __post_init__(self):
        if not self.archetypes:
            raise ValidationError("cohort needs at least one archetype")
        if self.drivers_per_archetype < 1 or self.trips_per_driver < 1:
            raise ValidationError("cohort counts must be >= 1")
        if self.trip_duration_s < 60.0:
            raise ValidationError("trip_duration_s must be >= 60")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    out_dir: str = "artifacts"
    sample_period: float = 0.1
    cohort: CohortConfig = CohortConfig()
    premises: Premises = Premises()
    safety: SafetyThreshold = SafetyThreshold()
    thw_rms_max: float = 4.5
    kmeans: KMeansConfig = KMeansConfig()
    # The pipeline default ridge is far stiffer than the TrainConfig default:
    # rules in sparsely covered corners of the demo feature space otherwise
    # pick up huge cancelling consequents that no hardware table can hold.
    train: TrainConfig = TrainConfig(lse_ridge=0.05)
    learning_segments: int = 5
    floor_s: float = THW_FLOOR_S
    hw_sweep: int = 2000

    def __post_init__(self):
        if self.sample_period <= 0:
            raise ValidationError("sample_period must be > 0")
        if self.thw_rms_max <= 0:
            raise ValidationError("thw_rms_max must be > 0")
        if self.learning_segments < 1:
            raise ValidationError("learning_segments must be >= 1")
        if self.hw_sweep < 1:
            raise ValidationError("hw_sweep must be >= 1")


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ValidationError(
            f"unknown {where} keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _archetype_from_dict(d: dict) -> ArchetypeSpec:
    _check_keys(d, {"name", "target_thw", "thw_jitter_sd", "gain", "moods"}, "archetype")
    moods = []
    for m in d.get("moods", []):
        _check_keys(m, {"rate", "thw_lo", "thw_hi", "hold", "slew_mult"}, "mood")
        moods.append(
            MoodSpec(
                rate=float(m["rate"]),
                thw_lo=float(m["thw_lo"]),
                thw_hi=float(m["thw_hi"]),
                hold=int(m.get("hold", 1)),
                slew_mult=float(m.get("slew_mult", 1.0)),
            )
        )
    return ArchetypeSpec(
        name=str(d["name"]),
        target_thw=float(d["target_thw"]),
        thw_jitter_sd=float(d.get("thw_jitter_sd", 0.0)),
        gain=float(d.get("gain", 0.5)),
        moods=tuple(moods),
    )


def _cohort_from_dict(d: dict) -> CohortConfig:
    _check_keys(
        d,
        {"archetypes", "drivers_per_archetype", "trips_per_driver", "trip_duration_s"},
        "cohort",
    )
    base = CohortConfig()
    archetypes = (
        tuple(_archetype_from_dict(a) for a in d["archetypes"])
        if "archetypes" in d
        else base.archetypes
    )
    return CohortConfig(
        archetypes=archetypes,
        drivers_per_archetype=int(d.get("drivers_per_archetype", base.drivers_per_archetype)),
        trips_per_driver=int(d.get("trips_per_driver", base.trips_per_driver)),
        trip_duration_s=float(d.get("trip_duration_s", base.trip_duration_s)),
    )


def _premises_from_dict(d: dict) -> Premises:
    _check_keys(
        d,
        {
            "max_distance",
            "min_speed_kmh",
            "min_speed_mps",
            "max_abs_ttci",
            "min_duration",
            "dropout_tolerance",
        },
        "premises",
    )
    base = Premises()
    if "min_speed_kmh" in d and "min_speed_mps" in d:
        raise ValidationError("give min_speed_kmh or min_speed_mps, not both")
    if "min_speed_kmh" in d:
        min_speed = float(d["min_speed_kmh"]) / 3.6
    else:
        min_speed = float(d.get("min_speed_mps", base.min_speed))
    return Premises(
        max_distance=float(d.get("max_distance", base.max_distance)),
        min_speed=min_speed,
        max_abs_ttci=float(d.get("max_abs_ttci", base.max_abs_ttci)),
        min_duration=float(d.get("min_duration", base.min_duration)),
        dropout_tolerance=int(d.get("dropout_tolerance", base.dropout_tolerance)),
    )


def config_from_dict(doc: dict) -> PipelineConfig:
    _check_keys(
        doc,
        {
            "seed",
            "out_dir",
            "sample_period",
            "cohort",
            "premises",
            "safety",
            "thw_rms_max",
            "kmeans",
            "train",
            "learning_segments",
            "floor_s",
            "hw_sweep",
        },
        "config",
    )
    base = PipelineConfig()
    seed = int(doc.get("seed", base.seed))

    # Stage seeds normally derive from the global seed, but an explicit value
    # (as written by config_to_dict, e.g. the config blob inside summary.json)
    # wins, so that blob can be replayed as a config file unchanged.
    kd = dict(doc.get("kmeans", {}))
    _check_keys(kd, {"n_clusters", "n_init", "max_iters", "tol", "seed"}, "kmeans")
    kmeans = KMeansConfig(
        n_clusters=int(kd.get("n_clusters", 3)),
        n_init=int(kd.get("n_init", 50)),
        max_iters=int(kd.get("max_iters", 300)),
        tol=float(kd.get("tol", 1e-6)),
        seed=int(kd.get("seed", seed)),
    )

    td = dict(doc.get("train", {}))
    _check_keys(
        td,
        {"epochs", "learning_rate", "train_fraction", "split_seed", "lse_ridge"},
        "train",
    )
    train = TrainConfig(
        epochs=int(td.get("epochs", 50)),
        learning_rate=float(td.get("learning_rate", 0.05)),
        train_fraction=float(td.get("train_fraction", 0.75)),
        split_seed=int(td.get("split_seed", seed)),
        lse_ridge=float(td.get("lse_ridge", base.train.lse_ridge)),
    )

    sd = dict(doc.get("safety", {}))
    _check_keys(sd, {"thw_star"}, "safety")
    safety = SafetyThreshold(thw_star=float(sd.get("thw_star", 1.5)))

    return PipelineConfig(
        seed=seed,
        out_dir=str(doc.get("out_dir", base.out_dir)),
        sample_period=float(doc.get("sample_period", base.sample_period)),
        cohort=_cohort_from_dict(dict(doc.get("cohort", {}))),
        premises=_premises_from_dict(dict(doc.get("premises", {}))),
        safety=safety,
        thw_rms_max=float(doc.get("thw_rms_max", base.thw_rms_max)),
        kmeans=kmeans,
        train=train,
        learning_segments=int(doc.get("learning_segments", base.learning_segments)),
        floor_s=float(doc.get("floor_s", base.floor_s)),
        hw_sweep=int(doc.get("hw_sweep", base.hw_sweep)),
    )


def config_to_dict(cfg: PipelineConfig) -> dict:
    # out_dir is deliberately absent: artifacts must hash the same no matter
    # where they are written, so reruns into fresh directories stay
    # byte-identical.
    return {
        "seed": cfg.seed,
        "sample_period": cfg.sample_period,
        "cohort": {
            "archetypes": [
                {
                    "name": a.name,
                    "target_thw": a.target_thw,
                    "thw_jitter_sd": a.thw_jitter_sd,
                    "gain": a.gain,
                    "moods": [
                        {
                            "rate": m.rate,
                            "thw_lo": m.thw_lo,
                            "thw_hi": m.thw_hi,
                            "hold": m.hold,
                            "slew_mult": m.slew_mult,
                        }
                        for m in a.moods
                    ],
                }
                for a in cfg.cohort.archetypes
            ],
            "drivers_per_archetype": cfg.cohort.drivers_per_archetype,
            "trips_per_driver": cfg.cohort.trips_per_driver,
            "trip_duration_s": cfg.cohort.trip_duration_s,
        },
        "premises": {
            "max_distance": cfg.premises.max_distance,
            "min_speed_mps": cfg.premises.min_speed,
            "max_abs_ttci": cfg.premises.max_abs_ttci,
            "min_duration": cfg.premises.min_duration,
            "dropout_tolerance": cfg.premises.dropout_tolerance,
        },
        "safety": {"thw_star": cfg.safety.thw_star},
        "thw_rms_max": cfg.thw_rms_max,
        "kmeans": {
            "n_clusters": cfg.kmeans.n_clusters,
            "n_init": cfg.kmeans.n_init,
            "max_iters": cfg.kmeans.max_iters,
            "tol": cfg.kmeans.tol,
            "seed": cfg.kmeans.seed,
        },
        "train": {
            "epochs": cfg.train.epochs,
            "learning_rate": cfg.train.learning_rate,
            "train_fraction": cfg.train.train_fraction,
            "split_seed": cfg.train.split_seed,
            "lse_ridge": cfg.train.lse_ridge,
        },
        "learning_segments": cfg.learning_segments,
        "floor_s": cfg.floor_s,
        "hw_sweep": cfg.hw_sweep,
    }


def load_config(path) -> PipelineConfig:
    with open(str(path)) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return config_from_dict(doc)


def with_overrides(
    cfg: PipelineConfig, seed: int | None = None, out_dir: str | None = None
) -> PipelineConfig:
    """Apply the global CLI flags; the per-stage seeds follow the global one."""
    if seed is not None:
        cfg = replace(
            cfg,
            seed=seed,
            kmeans=replace(cfg.kmeans, seed=seed),
            train=replace(cfg.train, split_seed=seed),
        )
    if out_dir is not None:
        cfg = replace(cfg, out_dir=out_dir)
    return cfg


def config_hash(cfg: PipelineConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
