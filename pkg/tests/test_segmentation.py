"""Steady-following extraction against an independent scan, and split bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from headway import segmentation as seg
from headway.config import DEMO_ARCHETYPES
from headway.errors import ValidationError
from headway.features import thw_rms
from headway.trips import DriverArchetype, Trip, TripSample, generate_trip

TAU = 0.1


def flat_trip(n, v=20.0, d=30.0, lead_id=1, overrides=None, tau=TAU):
    """Constant-state compliant trip with optional per-index sample overrides."""
    overrides = overrides or {}
    samples = []
    for i in range(n):
        kw = dict(t=i * tau, v=v, v_r=0.0, d=d, lead_present=True, lead_id=lead_id)
        kw.update(overrides.get(i, {}))
        samples.append(TripSample(**kw))
    return Trip(trip_id="flat", driver_id="d0", sample_period=tau, samples=tuple(samples))


def scan_stretches(trip, p):
    """Single forward scan re-deriving the runs; structured unlike the real one."""
    runs = []
    cur = None  # [start, last_compliant, lead]
    for i, s in enumerate(trip.samples):
        good = (
            s.lead_present
            and 1.0 <= s.d <= p.max_distance
            and s.v >= p.min_speed
            and abs(s.v_r / s.d) <= p.max_abs_ttci
        )
        if not good:
            continue
        if cur is not None and s.lead_id == cur[2] and i - cur[1] - 1 <= p.dropout_tolerance:
            cur[1] = i
        else:
            if cur is not None:
                runs.append(tuple(cur))
            cur = [i, i, s.lead_id]
    if cur is not None:
        runs.append(tuple(cur))
    return [r for r in runs if (r[1] - r[0] + 1) * trip.sample_period >= p.min_duration]


@pytest.mark.parametrize("ai", range(len(DEMO_ARCHETYPES)))
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_find_stretches_matches_independent_scan(ai, seed):
    spec = DEMO_ARCHETYPES[ai]
    arch = DriverArchetype(
        target_thw=spec.target_thw,
        thw_jitter_sd=spec.thw_jitter_sd,
        gain=spec.gain,
        moods=spec.moods,
        speed_profile_seed=seed,
    )
    trip = generate_trip(arch, 400.0, seed=seed, trip_id=f"t{ai}-{seed}")
    p = seg.Premises()
    got = [(s.start_index, s.end_index, s.lead_id) for s in seg.find_stretches(trip, p)]
    assert got == scan_stretches(trip, p)


def test_stretch_masks_flag_exactly_the_compliant_samples():
    trip = generate_trip(
        DriverArchetype(target_thw=1.2, thw_jitter_sd=0.1, gain=1.2), 300.0, seed=8
    )
    p = seg.Premises()
    for st_ in seg.find_stretches(trip, p):
        for s, ok in zip(st_.samples, st_.valid_mask):
            assert ok == seg.complies(s, p)
            if ok:
                assert s.lead_id == st_.lead_id
        assert st_.valid_mask[0] and st_.valid_mask[-1]


def test_per_sample_compliance_boundaries():
    p = seg.Premises()
    base = dict(t=0.0, v=20.0, v_r=0.0, d=30.0, lead_present=True, lead_id=1)

    def variant(**kw):
        return seg.complies(TripSample(**{**base, **kw}), p)

    assert variant()
    assert not variant(lead_present=False)
    assert not variant(d=120.0001)
    assert variant(d=120.0)
    assert not variant(d=0.99)  # implausibly close radar return
    assert variant(v=20.0 / 3.6)
    assert not variant(v=20.0 / 3.6 - 1e-9)
    assert variant(v_r=0.05 * 30.0)  # |TTCi| exactly at the limit
    assert not variant(v_r=0.05 * 30.0 + 1e-6)
    assert not variant(v_r=-(0.05 * 30.0 + 1e-6))


def test_dropout_bridging_boundary():
    p = seg.Premises()  # tolerance 5
    n = 700

    def gap(width):
        mid = 350
        return {i: {"lead_present": False} for i in range(mid, mid + width)}

    bridged = seg.find_stretches(flat_trip(n, overrides=gap(5)), p)
    assert [(s.start_index, s.end_index) for s in bridged] == [(0, n - 1)]
    assert sum(not ok for ok in bridged[0].valid_mask) == 5

    split = seg.find_stretches(flat_trip(n, overrides=gap(6)), p)
    assert [(s.start_index, s.end_index) for s in split] == [(0, 349), (356, n - 1)]
    assert all(all(s.valid_mask) for s in split)


def test_compliant_lead_change_always_splits():
    n = 700
    overrides = {i: {"lead_id": 2} for i in range(350, n)}
    stretches = seg.find_stretches(flat_trip(n, overrides=overrides), seg.Premises())
    assert [(s.start_index, s.end_index, s.lead_id) for s in stretches] == [
        (0, 349, 1),
        (350, n - 1, 2),
    ]


def test_sub_minimum_runs_are_dropped():
    # 29.9 s of following then nothing: below the 30 s premise
    overrides = {i: {"lead_present": False} for i in range(299, 700)}
    assert seg.find_stretches(flat_trip(700, overrides=overrides), seg.Premises()) == []


def test_uniformize_120s_gives_three_40s_segments():
    stretch = seg.find_stretches(flat_trip(1200), seg.Premises())[0]
    pieces = seg.uniformize([stretch])
    assert len(pieces) == 3
    assert [p.duration for p in pieces] == [40.0, 40.0, 40.0]
    assert [(p.start_index, p.end_index) for p in pieces] == [
        (0, 399),
        (400, 799),
        (800, 1199),
    ]


@given(n=st.integers(300, 24000))
@settings(max_examples=200)
def test_uniformize_bounds_and_partition(n):
    stretch = seg.find_stretches(flat_trip(n), seg.Premises())[0]
    pieces = seg.uniformize([stretch])
    sizes = [len(p.samples) for p in pieces]
    for p in pieces:
        assert seg.SEGMENT_MIN_S - 1e-9 <= p.duration <= seg.SEGMENT_MAX_S + 1e-9
    if sum(sizes) == n:
        # the regular path: balanced contiguous partition
        assert max(sizes) - min(sizes) <= 1
        assert pieces[0].start_index == 0 and pieces[-1].end_index == n - 1
        for a, b in zip(pieces, pieces[1:]):
            assert b.start_index == a.end_index + 1
    else:
        # the (59.9, 60) s corner: truncated to a single max-length segment
        assert len(pieces) == 1 and sum(sizes) < n


def test_uniformize_truncation_corner():
    # 59.95 s stretch: an even split would break the 30 s floor
    stretch = seg.find_stretches(flat_trip(1199, tau=0.05), seg.Premises())[0]
    pieces = seg.uniformize([stretch])
    assert len(pieces) == 1
    assert len(pieces[0].samples) == 1198
    assert pieces[0].duration == pytest.approx(59.9)


def test_uniformize_rejects_short_stretch():
    st_ = seg.find_stretches(flat_trip(600), seg.Premises())[0]
    short = seg.Stretch(
        trip_id=st_.trip_id,
        driver_id=st_.driver_id,
        start_index=0,
        end_index=199,
        lead_id=st_.lead_id,
        samples=st_.samples[:200],
        valid_mask=st_.valid_mask[:200],
        sample_period=st_.sample_period,
    )
    with pytest.raises(ValidationError):
        seg.uniformize([short])


def test_thw_rms_filter():
    # d=110 m at ~6 m/s is steady but implausibly far for car-following
    far = seg.segment_trip(flat_trip(400, v=6.0, d=110.0), seg.Premises())
    assert far == []
    kept = seg.segment_trip(flat_trip(400, v=6.0, d=110.0), seg.Premises(), thw_rms_max=100.0)
    assert len(kept) == 1
    assert thw_rms(kept[0]) > 4.5


def test_manifest_round_trip(tmp_path):
    trip = generate_trip(
        DriverArchetype(target_thw=1.6, thw_jitter_sd=0.12, gain=1.2), 600.0, seed=21
    )
    p = seg.Premises()
    segments = seg.segment_trip(trip, p)
    assert segments, "cohort trip should produce segments"
    path = tmp_path / "segments.json"
    seg.write_manifest(segments, path)
    entries = seg.read_manifest(path)
    assert len(entries) == len(segments)
    for entry, original in zip(entries, segments):
        rebuilt = seg.segment_from_manifest_entry(trip, entry, p)
        assert rebuilt.samples == original.samples
        assert rebuilt.valid_mask == original.valid_mask
        assert rebuilt.lead_id == original.lead_id
        assert rebuilt.duration == original.duration


def test_manifest_entry_errors():
    trip = flat_trip(700)
    p = seg.Premises()
    with pytest.raises(ValidationError):
        seg.segment_from_manifest_entry(trip, {"start_index": 0, "end_index": 9999}, p)
    hidden = flat_trip(700, overrides={i: {"lead_present": False} for i in range(0, 100)})
    with pytest.raises(ValidationError):
        seg.segment_from_manifest_entry(hidden, {"start_index": 0, "end_index": 99}, p)


def test_premises_validation():
    with pytest.raises(ValidationError):
        seg.Premises(max_distance=0.0)
    with pytest.raises(ValidationError):
        seg.Premises(dropout_tolerance=-1)
    with pytest.raises(ValidationError):
        seg.Premises(min_duration=-5.0)


def test_duration_is_count_based():
    stretch = seg.find_stretches(flat_trip(1200), seg.Premises())[0]
    assert stretch.duration == len(stretch.samples) * stretch.sample_period
    for piece in seg.uniformize([stretch]):
        assert piece.duration == len(piece.samples) * piece.sample_period
        assert math.isclose(
            piece.duration, (piece.end_index - piece.start_index + 1) * TAU, rel_tol=1e-12
        )
