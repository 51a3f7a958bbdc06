"""Car-following features and the min-max normalizer used before clustering.

THW = d / v, TTCi = v_r / d. Over a segment, THW_RMS is the root mean
square of per-sample THW; TETH accumulates sample_period for every sample
whose THW falls in [0, THW*]; TITH accumulates (THW* - THW) * sample_period
over the same samples. Sums are computed as (count or sum) * sample_period
with a single multiply so the constant-THW closed forms come out exact.

Samples bridged over radar dropouts carry no defined THW and are excluded
from every sum and from the RMS denominator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import ParseError, UndefinedFeatureError, ValidationError
from .trips import TripSample

FEATURE_NAMES = ("thw_rms", "teth", "tith")


class SampleWindow(Protocol):
    """Anything featurizable: a contiguous sample slice plus validity mask."""

    samples: Sequence[TripSample]
    valid_mask: Sequence[bool]
    sample_period: float


@dataclass(frozen=True)
class SafetyThreshold:
    """Critical headway THW* below which exposure/deficit accumulate."""

    thw_star: float = 1.5

    def __post_init__(self):
        if self.thw_star <= 0:
            raise ValidationError("thw_star must be > 0")


@dataclass(frozen=True)
class FeatureVector:
    thw_rms: float
    teth: float
    tith: float
    duration: float

    def as_array(self) -> np.ndarray:
        return np.array([self.thw_rms, self.teth, self.tith], dtype=float)


@dataclass(frozen=True)
class Scaler:
    """Per-feature min/max observed on the training cohort."""

    mins: tuple[float, float, float]
    maxs: tuple[float, float, float]

    def __post_init__(self):
        for name, lo, hi in zip(FEATURE_NAMES, self.mins, self.maxs):
            if not hi > lo:
                raise ValidationError(f"degenerate feature {name!r}: max ({hi}) <= min ({lo})")


def thw(sample: TripSample) -> float:
    """Time headway of one sample, seconds."""
    if not sample.lead_present:
        raise UndefinedFeatureError("THW undefined: no lead vehicle")
    if sample.v <= 0:
        raise UndefinedFeatureError("THW undefined: host speed is zero")
    return sample.d / sample.v


def ttci(sample: TripSample) -> float:
    """Inverse time to collision of one sample, 1/s."""
    if sample.d <= 0:
        raise UndefinedFeatureError("TTCi undefined: non-positive distance")
    return sample.v_r / sample.d


def _valid_thw_array(window: SampleWindow) -> np.ndarray:
    samples = window.samples
    mask = window.valid_mask
    if len(mask) != len(samples):
        raise ValidationError("valid_mask length does not match samples")
    vals = [thw(s) for s, ok in zip(samples, mask) if ok]
    if not vals:
        raise UndefinedFeatureError("no valid samples in window")
    return np.asarray(vals, dtype=float)


def thw_rms(window: SampleWindow) -> float:
    """sqrt(mean(THW^2)) over the valid samples."""
    t = _valid_thw_array(window)
    return float(np.sqrt(np.mean(t * t)))


def teth(window: SampleWindow, thr: SafetyThreshold) -> float:
    """Time spent with 0 <= THW <= THW*, seconds."""
    t = _valid_thw_array(window)
    below = (t >= 0.0) & (t <= thr.thw_star)
    return float(np.count_nonzero(below)) * window.sample_period


def tith(window: SampleWindow, thr: SafetyThreshold) -> float:
    """Accumulated headway deficit (THW* - THW) over the exposure samples."""
    t = _valid_thw_array(window)
    below = (t >= 0.0) & (t <= thr.thw_star)
    return float(np.sum(thr.thw_star - t[below])) * window.sample_period


def featurize(window: SampleWindow, thr: SafetyThreshold) -> FeatureVector:
    t = _valid_thw_array(window)
    below = (t >= 0.0) & (t <= thr.thw_star)
    return FeatureVector(
        thw_rms=float(np.sqrt(np.mean(t * t))),
        teth=float(np.count_nonzero(below)) * window.sample_period,
        tith=float(np.sum(thr.thw_star - t[below])) * window.sample_period,
        duration=len(window.samples) * window.sample_period,
    )


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    return np.array([[v.thw_rms, v.teth, v.tith] for v in vectors], dtype=float)


def fit_scaler(vectors: Sequence[FeatureVector]) -> Scaler:
    """Min-max over the training cohort; raises if a feature is constant."""
    if len(vectors) < 2:
        raise ValidationError("need at least 2 vectors to fit a scaler")
    m = feature_matrix(vectors)
    mins = m.min(axis=0)
    maxs = m.max(axis=0)
    return Scaler(mins=tuple(float(x) for x in mins), maxs=tuple(float(x) for x in maxs))


def apply_scaler(scaler: Scaler, vector: FeatureVector | np.ndarray) -> np.ndarray:
    """Map to [0,1]^3; values outside the training range clamp."""
    raw = vector.as_array() if isinstance(vector, FeatureVector) else np.asarray(vector, dtype=float)
    lo = np.asarray(scaler.mins)
    hi = np.asarray(scaler.maxs)
    return np.clip((raw - lo) / (hi - lo), 0.0, 1.0)


def scaler_to_dict(scaler: Scaler) -> dict:
    return {"mins": list(scaler.mins), "maxs": list(scaler.maxs)}


def scaler_from_dict(d: dict) -> Scaler:
    return Scaler(mins=tuple(float(x) for x in d["mins"]), maxs=tuple(float(x) for x in d["maxs"]))


FEATURE_TABLE_HEADER = ["trip_id", "segment_idx", "thw_rms", "teth", "tith", "duration_s"]


def write_feature_table(rows: Sequence[tuple[str, int, FeatureVector]], path) -> None:
    """Feature table CSV; floats via repr() so a reread is lossless."""
    with open(str(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_TABLE_HEADER)
        for trip_id, segment_idx, v in rows:
            writer.writerow(
                [trip_id, segment_idx, repr(v.thw_rms), repr(v.teth), repr(v.tith), repr(v.duration)]
            )


def read_feature_table(path) -> list[tuple[str, int, FeatureVector]]:
    rows = []
    with open(str(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURE_TABLE_HEADER:
            raise ParseError(f"{path}: expected header {','.join(FEATURE_TABLE_HEADER)}")
        for ln, rec in enumerate(reader, start=2):
            if len(rec) != len(FEATURE_TABLE_HEADER):
                raise ParseError(f"{path}:{ln}: expected {len(FEATURE_TABLE_HEADER)} fields")
            try:
                rows.append(
                    (
                        rec[0],
                        int(rec[1]),
                        FeatureVector(
                            thw_rms=float(rec[2]),
                            teth=float(rec[3]),
                            tith=float(rec[4]),
                            duration=float(rec[5]),
                        ),
                    )
                )
            except ValueError as exc:
                raise ParseError(f"{path}:{ln}: {exc}") from exc
    return rows
