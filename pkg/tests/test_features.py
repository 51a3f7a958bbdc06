"""Feature formulas against a per-sample brute-force oracle, plus scaler/IO."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import make_window
from headway import features as feat
from headway.errors import ParseError, UndefinedFeatureError, ValidationError
from headway.trips import TripSample


def oracle(window, thw_star):
    """Plain-Python re-derivation: one pass over samples, no numpy."""
    thws = [s.d / s.v for s, ok in zip(window.samples, window.valid_mask) if ok]
    rms = math.sqrt(sum(t * t for t in thws) / len(thws))
    below = [t for t in thws if 0.0 <= t <= thw_star]
    return (
        rms,
        len(below) * window.sample_period,
        sum(thw_star - t for t in below) * window.sample_period,
    )


def close(a, b, rel=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-15)


def test_matches_oracle_on_random_windows():
    rng = np.random.default_rng(1234)
    thr = feat.SafetyThreshold()
    for _ in range(300):
        n = int(rng.integers(5, 400))
        d = rng.uniform(1.0, 120.0, n)
        v = rng.uniform(5.6, 40.0, n)
        mask = rng.random(n) > 0.1
        if not mask.any():
            mask[0] = True
        w = make_window(d, v, mask=tuple(bool(m) for m in mask))
        fv = feat.featurize(w, thr)
        rms, teth, tith = oracle(w, thr.thw_star)
        assert close(fv.thw_rms, rms)
        assert close(fv.teth, teth)
        assert close(fv.tith, tith)
        assert fv.duration == n * w.sample_period


def test_constant_thw_closed_form_is_exact():
    # 10 samples at THW = 25/25 = 1.0 s, tau = 0.1 s, THW* = 1.5 s
    w = make_window([25.0] * 10, [25.0] * 10)
    fv = feat.featurize(w, feat.SafetyThreshold(thw_star=1.5))
    assert fv.thw_rms == 1.0
    assert fv.teth == 1.0
    assert fv.tith == 0.5


def test_bridged_samples_are_excluded():
    # second half is masked out; features must see only the first half
    d = [10.0] * 6 + [120.0] * 6
    v = [10.0] * 12
    w = make_window(d, v, mask=(True,) * 6 + (False,) * 6)
    fv = feat.featurize(w, feat.SafetyThreshold())
    assert close(fv.thw_rms, 1.0)
    assert fv.duration == pytest.approx(1.2)


def test_thw_and_ttci_sample_level():
    s = TripSample(t=0.0, v=20.0, v_r=1.0, d=40.0, lead_present=True)
    assert feat.thw(s) == 2.0
    assert feat.ttci(s) == 1.0 / 40.0
    with pytest.raises(UndefinedFeatureError):
        feat.thw(TripSample(t=0.0, v=20.0, v_r=0.0, d=40.0, lead_present=False))
    with pytest.raises(UndefinedFeatureError):
        feat.thw(TripSample(t=0.0, v=0.0, v_r=0.0, d=40.0, lead_present=True))
    with pytest.raises(UndefinedFeatureError):
        feat.ttci(TripSample(t=0.0, v=20.0, v_r=0.0, d=0.0, lead_present=True))


def test_empty_window_raises():
    w = make_window([20.0], [20.0], mask=(False,))
    with pytest.raises(UndefinedFeatureError):
        feat.thw_rms(w)


def test_mask_length_mismatch_raises():
    w = make_window([20.0, 20.0], [20.0, 20.0], mask=(True,))
    with pytest.raises(ValidationError):
        feat.thw_rms(w)


@given(
    thws=st.lists(st.floats(0.05, 6.0), min_size=1, max_size=200),
    thw_star=st.floats(0.5, 3.0),
)
def test_exposure_invariants(thws, thw_star):
    # fix v, derive d so each sample's THW is the drawn value
    v = 20.0
    w = make_window([t * v for t in thws], [v] * len(thws))
    thr = feat.SafetyThreshold(thw_star=thw_star)
    fv = feat.featurize(w, thr)
    n = len(thws)
    assert 0.0 <= fv.teth <= n * w.sample_period + 1e-12
    assert 0.0 <= fv.tith <= thw_star * fv.teth + 1e-9
    assert fv.thw_rms >= 0.0
    # a larger safety threshold never shrinks exposure or deficit
    fv2 = feat.featurize(w, feat.SafetyThreshold(thw_star=thw_star + 0.5))
    assert fv2.teth >= fv.teth - 1e-12
    assert fv2.tith >= fv.tith - 1e-12


@given(seed=st.integers(0, 10_000))
def test_scaler_maps_training_range_to_unit_box(seed):
    rng = np.random.default_rng(seed)
    vecs = [
        feat.FeatureVector(
            thw_rms=float(rng.uniform(0.5, 4.0)),
            teth=float(rng.uniform(0.0, 60.0)),
            tith=float(rng.uniform(0.0, 40.0)),
            duration=50.0,
        )
        for _ in range(8)
    ]
    try:
        scaler = feat.fit_scaler(vecs)
    except ValidationError:
        return  # a degenerate (constant) feature column is allowed to refuse
    for v in vecs:
        z = feat.apply_scaler(scaler, v)
        assert np.all(z >= 0.0) and np.all(z <= 1.0)
    # out-of-range values clamp instead of extrapolating
    lo = feat.apply_scaler(scaler, np.array([-10.0, -10.0, -10.0]))
    hi = feat.apply_scaler(scaler, np.array([100.0, 1000.0, 1000.0]))
    assert np.all(lo == 0.0) and np.all(hi == 1.0)


def test_scaler_rejects_constant_feature():
    vecs = [feat.FeatureVector(1.0, 2.0, 3.0, 50.0), feat.FeatureVector(1.0, 2.5, 3.5, 50.0)]
    with pytest.raises(ValidationError):
        feat.fit_scaler(vecs)
    with pytest.raises(ValidationError):
        feat.fit_scaler(vecs[:1])


def test_scaler_dict_round_trip():
    s = feat.Scaler(mins=(0.5, 0.0, 0.0), maxs=(3.0, 50.0, 30.0))
    assert feat.scaler_from_dict(feat.scaler_to_dict(s)) == s


def test_feature_table_round_trip_is_lossless(tmp_path):
    rng = np.random.default_rng(7)
    rows = [
        (f"trip-{i}", i, feat.FeatureVector(*(float(x) for x in rng.random(4))))
        for i in range(20)
    ]
    path = tmp_path / "features.csv"
    feat.write_feature_table(rows, path)
    assert feat.read_feature_table(path) == rows


def test_feature_table_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope\n1,2,3,4,5,6\n")
    with pytest.raises(ParseError):
        feat.read_feature_table(path)


def test_safety_threshold_validation():
    with pytest.raises(ValidationError):
        feat.SafetyThreshold(thw_star=0.0)
