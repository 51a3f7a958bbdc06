"""Steady car-following stretch extraction and segment uniformization.

A sample complies with the steady-following premises when a lead vehicle
is tracked within 120 m at host speed >= 20 km/h and |TTCi| <= 0.05 1/s.
Maximal compliant runs of one lead id become stretches; short radar
dropouts (up to ``dropout_tolerance`` consecutive non-compliant samples)
are bridged, and the bridged samples are flagged invalid so the feature
sums skip them. Stretches are then split into comparable segments of
30 to 59.9 s.

Durations are counted as n_samples * sample_period so equal splits and
the TETH <= duration bound are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from . import features as feat
from .errors import ValidationError
from .trips import Trip, TripSample

KMH_20 = 20.0 / 3.6  # premise speed floor in m/s

SEGMENT_MAX_S = 59.9
SEGMENT_MIN_S = 30.0

# Below this gap the radar return is too close to trust TTCi; treat as
# non-compliant instead of letting v_r / d blow up.
MIN_PLAUSIBLE_DISTANCE_M = 1.0


@dataclass(frozen=True)
class Premises:
    max_distance: float = 120.0
    min_speed: float = KMH_20
    max_abs_ttci: float = 0.05
    min_duration: float = 30.0
    dropout_tolerance: int = 5

    def __post_init__(self):
        for name in ("max_distance", "min_speed", "max_abs_ttci", "min_duration"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"premise {name} must be > 0")
        if self.dropout_tolerance < 0:
            raise ValidationError("dropout_tolerance must be >= 0")


@dataclass(frozen=True)
class Stretch:
    trip_id: str
    driver_id: str
    start_index: int
    end_index: int  # inclusive
    lead_id: int
    samples: tuple[TripSample, ...]
    valid_mask: tuple[bool, ...]
    sample_period: float

    @property
    def duration(self) -> float:
        return len(self.samples) * self.sample_period


@dataclass(frozen=True)
class CarFollowingSegment:
    trip_id: str
    driver_id: str
    start_index: int
    end_index: int  # inclusive
    lead_id: int
    samples: tuple[TripSample, ...]
    valid_mask: tuple[bool, ...]
    sample_period: float
    duration: float


def complies(sample: TripSample, p: Premises) -> bool:
    """Per-sample steady-following check, ignoring lead identity."""
    if not sample.lead_present:
        return False
    if sample.d > p.max_distance or sample.d < MIN_PLAUSIBLE_DISTANCE_M:
        return False
    if sample.v < p.min_speed:
        return False
    if abs(sample.v_r / sample.d) > p.max_abs_ttci:
        return False
    return True


def find_stretches(trip: Trip, p: Premises) -> list[Stretch]:
    """Maximal steady-following runs of one lead, with dropout bridging.

    Blocks of consecutive compliant samples sharing a lead id are merged
    when separated by at most ``dropout_tolerance`` non-compliant samples;
    a compliant sample of a different lead always ends the run. Runs
    shorter than ``min_duration`` (wall clock, bridged gaps included) are
    dropped.
    """
    ok = [complies(s, p) for s in trip.samples]

    # maximal blocks of consecutive compliant samples with constant lead_id
    blocks: list[tuple[int, int, int]] = []  # (start, end inclusive, lead_id)
    i = 0
    n = len(trip.samples)
    while i < n:
        if not ok[i]:
            i += 1
            continue
        lead = trip.samples[i].lead_id
        j = i
        while j + 1 < n and ok[j + 1] and trip.samples[j + 1].lead_id == lead:
            j += 1
        blocks.append((i, j, lead))
        i = j + 1

    # bridge gaps between same-lead blocks
    merged: list[tuple[int, int, int]] = []
    for blk in blocks:
        if merged:
            s0, e0, lead0 = merged[-1]
            gap = blk[0] - e0 - 1
            if blk[2] == lead0 and gap <= p.dropout_tolerance:
                merged[-1] = (s0, blk[1], lead0)
                continue
        merged.append(blk)

    out = []
    for s0, e0, lead in merged:
        count = e0 - s0 + 1
        if count * trip.sample_period < p.min_duration:
            continue
        samples = trip.samples[s0 : e0 + 1]
        mask = tuple(ok[s0 : e0 + 1])
        out.append(
            Stretch(
                trip_id=trip.trip_id,
                driver_id=trip.driver_id,
                start_index=s0,
                end_index=e0,
                lead_id=lead,
                samples=samples,
                valid_mask=mask,
                sample_period=trip.sample_period,
            )
        )
    return out


def uniformize(stretches: list[Stretch]) -> list[CarFollowingSegment]:
    """Split each stretch into n equal pieces, n minimal with L/n <= 59.9 s.

    Piece sample counts differ by at most one. The only case where the
    equal split would break the 30 s floor is L in (59.9, 60) s; such a
    stretch is truncated to a single 59.9 s segment instead.
    """
    segments = []
    for st in stretches:
        n_samples = len(st.samples)
        tau = st.sample_period
        length = n_samples * tau
        if length < SEGMENT_MIN_S:
            raise ValidationError(
                f"stretch {st.trip_id}[{st.start_index}:{st.end_index}] shorter than 30 s"
            )
        n_pieces = max(1, math.ceil(length / SEGMENT_MAX_S))
        if length / n_pieces < SEGMENT_MIN_S:
            # only reachable for L in (59.9, 60): truncate to one segment
            keep = int(math.floor(SEGMENT_MAX_S / tau))
            bounds = [(0, keep)]
        else:
            base, extra = divmod(n_samples, n_pieces)
            bounds = []
            pos = 0
            for k in range(n_pieces):
                size = base + (1 if k < extra else 0)
                bounds.append((pos, pos + size))
                pos += size
        for lo, hi in bounds:
            segments.append(
                CarFollowingSegment(
                    trip_id=st.trip_id,
                    driver_id=st.driver_id,
                    start_index=st.start_index + lo,
                    end_index=st.start_index + hi - 1,
                    lead_id=st.lead_id,
                    samples=st.samples[lo:hi],
                    valid_mask=st.valid_mask[lo:hi],
                    sample_period=tau,
                    duration=(hi - lo) * tau,
                )
            )
    return segments


def filter_by_thw_rms(
    segments: list[CarFollowingSegment], thw_rms_max: float = 4.5
) -> list[CarFollowingSegment]:
    """Discard segments whose THW_RMS exceeds the car-following plausibility cap."""
    return [s for s in segments if feat.thw_rms(s) <= thw_rms_max]


def segment_trip(trip: Trip, p: Premises, thw_rms_max: float = 4.5) -> list[CarFollowingSegment]:
    """find_stretches -> uniformize -> THW_RMS filter, for one trip."""
    return filter_by_thw_rms(uniformize(find_stretches(trip, p)), thw_rms_max)


def write_manifest(segments: list[CarFollowingSegment], path) -> None:
    """Segment manifest: JSON array of trip-relative index ranges."""
    entries = [
        {
            "trip_id": s.trip_id,
            "driver_id": s.driver_id,
            "start_index": s.start_index,
            "end_index": s.end_index,
            "duration_s": s.duration,
        }
        for s in segments
    ]
    with open(str(path), "w") as fh:
        json.dump(entries, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> list[dict]:
    with open(str(path)) as fh:
        entries = json.load(fh)
    if not isinstance(entries, list):
        raise ValidationError(f"{path}: segment manifest must be a JSON array")
    return entries


def segment_from_manifest_entry(trip: Trip, entry: dict, p: Premises) -> CarFollowingSegment:
    """Rebuild a segment (and its validity mask) from manifest indices.

    The mask is recomputed from the premises; the segment's lead is taken
    as the modal lead id among its compliant samples, which matches the
    originating stretch since bridged gaps are at most dropout_tolerance
    samples long.
    """
    s0, e0 = int(entry["start_index"]), int(entry["end_index"])
    if not (0 <= s0 <= e0 < len(trip.samples)):
        raise ValidationError(
            f"manifest entry [{s0}:{e0}] out of range for trip {trip.trip_id!r}"
        )
    samples = trip.samples[s0 : e0 + 1]
    ok = [complies(s, p) for s in samples]
    leads = [s.lead_id for s, good in zip(samples, ok) if good]
    if not leads:
        raise ValidationError(
            f"manifest entry [{s0}:{e0}] of trip {trip.trip_id!r} has no compliant samples"
        )
    lead = max(set(leads), key=lambda x: (leads.count(x), -x))
    mask = tuple(good and s.lead_id == lead for s, good in zip(samples, ok))
    return CarFollowingSegment(
        trip_id=trip.trip_id,
        driver_id=str(entry.get("driver_id", trip.driver_id)),
        start_index=s0,
        end_index=e0,
        lead_id=lead,
        samples=samples,
        valid_mask=mask,
        sample_period=trip.sample_period,
        duration=len(samples) * trip.sample_period,
    )
