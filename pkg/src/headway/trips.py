"""Trip data model, CSV persistence, and a synthetic car-following generator.

A trip is a 10 Hz time series of host speed, relative speed, and distance
to the tracked lead vehicle. The CSV schema is
``t_s,v_mps,vr_mps,d_m,lead_present,lead_id`` with '.' decimals and LF line
endings; an absent lead is encoded as d_m=0, vr_mps=0, lead_id=0,
lead_present=0.

The synthetic generator exists so downstream stages can be tested against
known ground truth: each archetype tracks a target time headway with a
proportional spacing controller, so the steady-state THW of a generated
trip is controllable.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError

CSV_HEADER = ["t_s", "v_mps", "vr_mps", "d_m", "lead_present", "lead_id"]

DEFAULT_SAMPLE_PERIOD = 0.1  # 10 Hz acquisition rate

# Follower acceleration limits, m/s^2 (comfort braking / mild throttle).
ACCEL_MIN = -3.0
ACCEL_MAX = 2.0

# Lead-vehicle speed profile: piecewise constant within [LEAD_SPEED_MIN,
# LEAD_SPEED_MAX], stepping by up to LEAD_STEP every SWITCH_MIN..SWITCH_MAX s.
LEAD_SPEED_MIN = 18.0
LEAD_SPEED_MAX = 35.0
LEAD_STEP = 0.8
SWITCH_MIN_S = 40.0
SWITCH_MAX_S = 80.0

# Target-headway jitter: a new goal is drawn every JITTER_INTERVAL_S and the
# tracked target slews toward it at THW_SLEW_FRAC of its current value per
# second (the slew itself then contributes ~THW_SLEW_FRAC to |v_r|/d,
# independent of how large the gap is). Goals are floored so the follower
# never tracks an absurdly small gap.
JITTER_INTERVAL_S = 10.0
THW_TARGET_FLOOR_S = 0.3
THW_SLEW_FRAC = 0.035



@dataclass(frozen=True)
class TripSample:
    """One radar/CAN sample.

    v_r is host speed minus lead speed, so positive means closing in.
    """

    t: float
    v: float
    v_r: float
    d: float
    lead_present: bool
    lead_id: int = 0


@dataclass(frozen=True)
class Trip:
    trip_id: str
    driver_id: str
    sample_period: float
    samples: tuple[TripSample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        validate_trip(self)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class MoodSpec:
    """A transient headway mood (pressing or relaxing episode).

    With probability ``rate`` per jitter redraw the driver tracks a goal
    headway drawn uniformly in [thw_lo, thw_hi] instead of the usual
    target-plus-jitter goal, holding it for ``hold`` extra redraw intervals.
    Episodes never chain: the redraw that ends one always tracks the
    ordinary target before another episode may start.

    ``slew_mult`` scales the headway slew rate while the episode's entry and
    exit transitions are underway. At the default 1.0 the episode blends
    smoothly into surrounding driving; much above ~1.4 the transitions are
    abrupt enough (|v_r|/d spikes) that steady-following extraction treats
    the episode as its own stretch, bracketed by short interruptions.
    """

    rate: float
    thw_lo: float
    thw_hi: float
    hold: int = 1
    slew_mult: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValidationError("mood rate must be in [0, 1]")
        if not 0.0 < self.thw_lo <= self.thw_hi:
            raise ValidationError("mood headway range must satisfy 0 < lo <= hi")
        if self.hold < 0:
            raise ValidationError("mood hold must be >= 0")
        if self.slew_mult <= 0:
            raise ValidationError("mood slew_mult must be > 0")


@dataclass(frozen=True)
class DriverArchetype:
    """Synthetic driver profile with a controllable target headway."""

    target_thw: float
    thw_jitter_sd: float = 0.0
    speed_profile_seed: int = 0
    gain: float = 0.5  # 1/s, proportional spacing-error gain
    moods: tuple[MoodSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moods", tuple(self.moods))
        if self.target_thw <= 0:
            raise ValidationError("target_thw must be > 0")
        if self.thw_jitter_sd < 0:
            raise ValidationError("thw_jitter_sd must be >= 0")
        if self.gain <= 0:
            raise ValidationError("gain must be > 0")
        if sum(m.rate for m in self.moods) > 1.0:
            raise ValidationError("mood rates must sum to <= 1")


def validate_trip(trip: Trip) -> None:
    """Check all trip invariants; raise ValidationError on the first failure."""
    if not trip.samples:
        raise ValidationError(f"trip {trip.trip_id!r}: no samples")
    if trip.sample_period <= 0:
        raise ValidationError(f"trip {trip.trip_id!r}: sample_period must be > 0")
    prev_t = -math.inf
    for i, s in enumerate(trip.samples):
        if s.t < 0:
            raise ValidationError(f"trip {trip.trip_id!r} sample {i}: negative t")
        if s.t <= prev_t:
            raise ValidationError(
                f"trip {trip.trip_id!r} sample {i}: time not strictly increasing"
            )
        if i > 0:
            dt = s.t - prev_t
            if abs(dt - trip.sample_period) > 0.01 * trip.sample_period:
                raise ValidationError(
                    f"trip {trip.trip_id!r} sample {i}: time delta {dt:.6f}s "
                    f"deviates more than 1% from sample period {trip.sample_period}s"
                )
        if s.v < 0:
            raise ValidationError(f"trip {trip.trip_id!r} sample {i}: negative speed")
        if s.lead_present and s.d <= 0:
            raise ValidationError(
                f"trip {trip.trip_id!r} sample {i}: lead present but d <= 0"
            )
        prev_t = s.t


def load_trip(path, trip_id: str | None = None, driver_id: str = "") -> Trip:
    """Parse a trip CSV; ids default to the file stem when not given.

    The sample period is inferred as the median time delta (0.1 s fallback
    for single-row files); validation then enforces deltas within 1%.
    """
    path = str(path)
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ParseError(f"{path}: bad header {header!r}, expected {CSV_HEADER}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 6:
                raise ParseError(f"{path} row {row_no}: expected 6 fields, got {len(row)}")
            try:
                t, v, v_r, d = (float(row[k]) for k in range(4))
                lead_present = int(row[4])
                lead_id = int(row[5])
            except ValueError as exc:
                raise ParseError(f"{path} row {row_no}: {exc}") from exc
            if lead_present not in (0, 1):
                raise ParseError(f"{path} row {row_no}: lead_present must be 0 or 1")
            samples.append(TripSample(t, v, v_r, d, bool(lead_present), lead_id))
    if not samples:
        raise ParseError(f"{path}: no data rows")
    if len(samples) >= 2:
        deltas = [b.t - a.t for a, b in zip(samples, samples[1:])]
        period = float(np.median(deltas))
    else:
        period = DEFAULT_SAMPLE_PERIOD
    stem = path.rsplit("/", 1)[-1].removesuffix(".csv")
    return Trip(
        trip_id=trip_id if trip_id is not None else stem,
        driver_id=driver_id,
        sample_period=period,
        samples=tuple(samples),
    )


def write_trip(trip: Trip, path) -> None:
    """Write a trip as CSV. repr() float formatting makes the round trip exact."""
    validate_trip(trip)
    with open(str(path), "w", newline="\n") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for s in trip.samples:
            fh.write(
                f"{s.t!r},{s.v!r},{s.v_r!r},{s.d!r},{int(s.lead_present)},{s.lead_id}\n"
            )


def generate_trip(
    archetype: DriverArchetype,
    duration: float,
    seed: int,
    trip_id: str = "synthetic",
    driver_id: str = "driver-0",
    sample_period: float = DEFAULT_SAMPLE_PERIOD,
) -> Trip:
    """Simulate one car-following trip for the given archetype.

    Lead speed is piecewise constant (see LEAD_SPEED_MIN/MAX, stepped every
    SWITCH_MIN_S..SWITCH_MAX_S);
    the follower applies a = gain * (d - thw_t * v) / thw_t clamped to
    [-3, +2] m/s^2. The tracked target thw_t slews toward a goal headway
    that is redrawn every 10 s: usually the archetype target plus Gaussian
    jitter, occasionally a held mood episode (see MoodSpec).
    Deterministic for fixed (archetype, duration, seed).
    """
    if duration < 60.0:
        raise ValidationError(f"duration must be >= 60 s, got {duration}")
    rng = np.random.default_rng([seed & 0xFFFFFFFF, archetype.speed_profile_seed & 0xFFFFFFFF])
    n = int(round(duration / sample_period))
    tau = sample_period

    v_lead = float(rng.uniform(18.0, 30.0))
    next_switch = float(rng.uniform(SWITCH_MIN_S, SWITCH_MAX_S))
    thw_t = archetype.target_thw
    thw_goal = archetype.target_thw
    slew_mult = 1.0
    in_mood = False
    jittering = archetype.thw_jitter_sd > 0 or archetype.moods
    next_jitter = JITTER_INTERVAL_S

    v = v_lead
    d = archetype.target_thw * v
    samples = []
    for i in range(n):
        t = i * tau
        if t >= next_switch:
            v_lead = float(
                np.clip(v_lead + rng.uniform(-LEAD_STEP, LEAD_STEP), LEAD_SPEED_MIN, LEAD_SPEED_MAX)
            )
            next_switch += float(rng.uniform(SWITCH_MIN_S, SWITCH_MAX_S))
        if jittering and t >= next_jitter:
            mood = None
            if not in_mood:  # episodes don't chain; each is bracketed by ordinary driving
                r = float(rng.random())
                acc = 0.0
                for m in archetype.moods:
                    acc += m.rate
                    if r < acc:
                        mood = m
                        break
            if mood is not None:
                thw_goal = float(rng.uniform(mood.thw_lo, mood.thw_hi))
                next_jitter += (1 + mood.hold) * JITTER_INTERVAL_S
                slew_mult = mood.slew_mult
                in_mood = True
            else:
                thw_goal = max(
                    THW_TARGET_FLOOR_S,
                    archetype.target_thw + float(rng.normal(0.0, archetype.thw_jitter_sd)),
                )
                next_jitter += JITTER_INTERVAL_S
                in_mood = False
        slew = THW_SLEW_FRAC * slew_mult * thw_t * tau
        if thw_goal > thw_t:
            thw_t = min(thw_t + slew, thw_goal)
        else:
            thw_t = max(thw_t - slew, thw_goal)
        if not in_mood and thw_t == thw_goal:
            slew_mult = 1.0  # boosted slew persists through the exit transition
        samples.append(TripSample(t=t, v=v, v_r=v - v_lead, d=d, lead_present=True, lead_id=1))
        a = archetype.gain * (d - thw_t * v) / thw_t
        a = min(max(a, ACCEL_MIN), ACCEL_MAX)
        v = max(0.0, v + a * tau)
        d = d + (v_lead - v) * tau
    return Trip(trip_id=trip_id, driver_id=driver_id, sample_period=tau, samples=tuple(samples))
