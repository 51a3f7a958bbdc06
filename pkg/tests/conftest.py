"""Shared fixtures: synthetic cohorts and a fully-run artifact directory."""

import dataclasses

import hypothesis
import numpy as np
import pytest

from headway import cli
from headway.features import SafetyThreshold, apply_scaler, featurize, fit_scaler
from headway.segmentation import Premises, segment_trip
from headway.trips import DriverArchetype, TripSample, generate_trip

hypothesis.settings.register_profile("suite", deadline=None)
hypothesis.settings.load_profile("suite")

# clean three-style population used by the statistical checks: no mood
# episodes, separation wide enough that the generator label is the truth
STYLE_TARGETS = (0.9, 1.6, 2.6)
STYLE_JITTER = (0.10, 0.12, 0.15)


def build_style_cohort(cohort_seed=0, drivers=2, trips=3, duration=600.0):
    """Generate, segment and featurize one labeled cohort.

    Returns (features, labels, scaler, x) with labels the archetype index
    and x the min-max normalized feature matrix.
    """
    prem = Premises()
    thr = SafetyThreshold()
    fvs, labels = [], []
    for ai, (tgt, sd) in enumerate(zip(STYLE_TARGETS, STYLE_JITTER)):
        for d in range(drivers):
            for t in range(trips):
                pseed = (ai * 1000 + d) * 1000 + t
                arch = DriverArchetype(
                    target_thw=tgt, thw_jitter_sd=sd, gain=1.2, speed_profile_seed=pseed
                )
                trip = generate_trip(
                    arch,
                    duration,
                    seed=cohort_seed * 7_000_003 + pseed,
                    trip_id=f"a{ai}-d{d}-t{t}",
                    driver_id=f"a{ai}-d{d}",
                )
                for segment in segment_trip(trip, prem):
                    fvs.append(featurize(segment, thr))
                    labels.append(ai)
    scaler = fit_scaler(fvs)
    x = np.array([apply_scaler(scaler, v) for v in fvs])
    return fvs, np.array(labels), scaler, x


@pytest.fixture(scope="session")
def style_cohort():
    return build_style_cohort()


@pytest.fixture(scope="session")
def demo_dir(tmp_path_factory):
    """One full pipeline run on the default (demo) config; treat as read-only."""
    out = tmp_path_factory.mktemp("demo_artifacts")
    rc = cli.main(["pipeline", "--out-dir", str(out)])
    assert rc == 0, "demo pipeline failed"
    return out


@dataclasses.dataclass
class Window:
    """Minimal featurizable stand-in for a segment."""

    samples: tuple
    valid_mask: tuple
    sample_period: float = 0.1


def make_window(d, v, mask=None, tau=0.1, v_r=0.0):
    d = np.atleast_1d(np.asarray(d, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    samples = tuple(
        TripSample(t=i * tau, v=float(vi), v_r=v_r, d=float(di), lead_present=True)
        for i, (di, vi) in enumerate(zip(d, v))
    )
    if mask is None:
        mask = (True,) * len(samples)
    return Window(samples=samples, valid_mask=tuple(mask), sample_period=tau)
