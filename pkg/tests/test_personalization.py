"""Per-style headway planes and setpoint generation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from headway import personalization as pers
from headway.errors import NumericError, ValidationError
from headway.features import FeatureVector, Scaler

# population statistics of the three styles reported for the reference
# deployment: (THW_RMS mean, sd) = (1.08, 0.27), (2.44, 0.59), (1.61, 0.17)
REFERENCE_STATS = [
    pers.ClusterStats(1.08, 0.27, 0.60, 1.50, 0.00, 1.00, 0.70),
    pers.ClusterStats(2.44, 0.59, 1.55, 3.60, 0.00, 0.40, 0.10),
    pers.ClusterStats(1.61, 0.17, 1.30, 1.95, 0.02, 0.55, 0.20),
]


def test_plane_passes_through_its_defining_points():
    for stats in REFERENCE_STATS:
        plane = pers.fit_plane(stats)
        for x, y, z in plane.points:
            assert abs(plane.raw(x, y) - z) <= 1e-12 * max(1.0, abs(z))


def test_point_assignments_follow_mean_and_sigma():
    for stats in REFERENCE_STATS:
        plane = pers.fit_plane(stats)
        p1, p2, p3 = plane.points
        assert p1 == (stats.thw_rms_min, stats.tith_max, stats.thw_rms_mean - stats.thw_rms_sd)
        assert p2 == (stats.thw_rms_max, stats.tith_min, stats.thw_rms_mean + stats.thw_rms_sd)
        assert p3 == (stats.thw_rms_mean, stats.tith_mean, stats.thw_rms_mean)
        # shorter-than-average headway with more deficit -> below-mean setpoint
        assert plane.raw(*p1[:2]) < plane.raw(*p3[:2]) < plane.raw(*p2[:2])
        assert plane.alpha > 0 and plane.beta <= 0


def test_mean_observation_recovers_the_cluster_mean():
    for stats in REFERENCE_STATS:
        plane = pers.fit_plane(stats)
        obs = pers.Observation(thw_rms_bar=stats.thw_rms_mean, tith_norm=stats.tith_mean)
        assert pers.personalize(plane, obs) == pytest.approx(stats.thw_rms_mean, rel=1e-12)


def test_floor_binds_where_the_plane_dips_below_one_second():
    # the shortest-headway corner of the aggressive style sits at 0.81 s raw
    plane = pers.fit_plane(REFERENCE_STATS[0])
    p1 = plane.points[0]
    assert plane.raw(*p1[:2]) == pytest.approx(1.08 - 0.27, rel=1e-12)
    assert pers.personalize(plane, pers.Observation(p1[0], p1[1])) == 1.0

    xs = np.linspace(0.2, 3.0, 100)
    ys = np.linspace(0.0, 1.0, 100)
    raw_below = 0
    for x in xs:
        for y in ys:
            out = pers.personalize(plane, pers.Observation(x, y))
            assert out >= 1.0
            if plane.raw(x, y) < 1.0:
                raw_below += 1
    assert raw_below > 0, "grid should actually exercise the floor"


def test_collinear_points_are_rejected():
    # zero spread on both axes: the three points coincide
    stats = pers.ClusterStats(1.5, 0.0, 1.5, 1.5, 0.3, 0.3, 0.3)
    with pytest.raises(NumericError):
        pers.fit_plane(stats)
    # a style whose deficit never varies also cannot pin a plane
    flat_tith = pers.ClusterStats(2.0, 1.0, 1.0, 3.0, 0.2, 0.2, 0.2)
    with pytest.raises(NumericError):
        pers.fit_plane(flat_tith)


def test_inverted_slopes_are_rejected():
    # min headway paired with min deficit would make the setpoint rise
    # with deficit; the geometry check must refuse such statistics
    stats = pers.ClusterStats(
        thw_rms_mean=2.0,
        thw_rms_sd=0.5,
        thw_rms_min=1.0,
        thw_rms_max=3.0,
        tith_min=0.4,
        tith_max=0.6,
        tith_mean=0.59,
    )
    with pytest.raises(NumericError):
        pers.fit_plane(stats)


@given(
    mean=st.floats(1.0, 3.0),
    sd=st.floats(0.05, 0.6),
    x_lo=st.floats(0.1, 0.9),
    x_hi=st.floats(0.1, 0.9),
    y_lo=st.floats(0.0, 0.45),
    y_hi=st.floats(0.05, 0.5),
)
@settings(max_examples=150)
def test_interpolation_property_on_random_valid_stats(mean, sd, x_lo, x_hi, y_lo, y_hi):
    stats = pers.ClusterStats(
        thw_rms_mean=mean,
        thw_rms_sd=sd,
        thw_rms_min=mean - x_lo,
        thw_rms_max=mean + x_hi,
        tith_min=y_lo,
        tith_max=y_lo + y_hi,
        tith_mean=y_lo + y_hi / 2,
    )
    try:
        plane = pers.fit_plane(stats)
    except NumericError:
        return  # geometry may legitimately refuse (collinear / inverted)
    for x, y, z in plane.points:
        assert plane.raw(x, y) == pytest.approx(z, rel=1e-12, abs=1e-12)


def test_cluster_stats_validation():
    with pytest.raises(ValidationError):
        pers.ClusterStats(1.0, 0.1, 1.5, 2.0, 0.0, 1.0, 0.5)  # mean below min
    with pytest.raises(ValidationError):
        pers.ClusterStats(1.0, -0.1, 0.5, 2.0, 0.0, 1.0, 0.5)
    with pytest.raises(ValidationError):
        pers.Observation(thw_rms_bar=0.0, tith_norm=0.5)
    with pytest.raises(ValidationError):
        pers.Observation(thw_rms_bar=1.0, tith_norm=1.5)


def test_compute_cluster_stats_matches_manual():
    scaler = Scaler(mins=(0.5, 0.0, 0.0), maxs=(3.5, 50.0, 20.0))
    fvs = [
        FeatureVector(1.0, 10.0, 4.0, 40.0),
        FeatureVector(1.4, 5.0, 2.0, 40.0),
        FeatureVector(2.8, 0.0, 0.0, 40.0),
        FeatureVector(3.2, 0.0, 0.0, 40.0),
        FeatureVector(1.9, 1.0, 1.0, 40.0),
        FeatureVector(2.1, 2.0, 0.5, 40.0),
    ]
    labels = [0, 0, 1, 1, 2, 2]
    s0, s1, s2 = pers.compute_cluster_stats(fvs, labels, scaler)
    assert s0.thw_rms_mean == pytest.approx(1.2)
    assert s0.thw_rms_sd == pytest.approx(0.2)  # population sd
    assert s0.thw_rms_min == 1.0 and s0.thw_rms_max == 1.4
    assert s0.tith_max == pytest.approx(4.0 / 20.0)
    assert s1.tith_min == s1.tith_max == 0.0
    assert s2.thw_rms_mean == pytest.approx(2.0)

    # two-point cluster {1, 3}: mean 2, population sd exactly 1
    pair = [FeatureVector(1.0, 1.0, 1.0, 40.0), FeatureVector(3.0, 2.0, 2.0, 40.0)]
    s = pers.compute_cluster_stats(pair, [0, 0], scaler, n_clusters=1)[0]
    assert s.thw_rms_mean == 2.0 and s.thw_rms_sd == 1.0

    with pytest.raises(ValidationError):
        pers.compute_cluster_stats(fvs, [0, 0, 1, 1, 1, 1], scaler)  # style 3 empty
    with pytest.raises(ValidationError):
        pers.compute_cluster_stats(fvs, [0, 1], scaler)


def test_learning_window_averages_then_normalizes():
    scaler = Scaler(mins=(0.5, 0.0, 0.0), maxs=(3.5, 50.0, 20.0))
    fvs = [FeatureVector(1.0, 10.0, 4.0, 40.0), FeatureVector(2.0, 0.0, 8.0, 40.0)]
    obs = pers.learning_window(fvs, scaler)
    assert obs.thw_rms_bar == pytest.approx(1.5)
    assert obs.tith_norm == pytest.approx(6.0 / 20.0)
    with pytest.raises(ValidationError):
        pers.learning_window([], scaler)


def test_setpoint_line_format():
    line = pers.format_setpoint(1.2345, cluster=2, ts=150.0)
    assert line == f"SETPOINT thw_s={1.2345!r} cluster=2 ts={150.0!r}\n"
    fields = dict(part.split("=") for part in line.strip().split()[1:])
    assert float(fields["thw_s"]) == 1.2345
    assert int(fields["cluster"]) == 2


def test_planes_json_round_trip(tmp_path):
    planes = [pers.fit_plane(s) for s in REFERENCE_STATS]
    path = tmp_path / "planes.json"
    pers.save_planes(planes, path, extra={"config_hash": "beef"})
    back = pers.load_planes(path)
    assert len(back) == 3
    for p, q in zip(planes, back):
        assert (p.alpha, p.beta, p.gamma) == (q.alpha, q.beta, q.gamma)
        assert p.points == q.points
        assert p.floor_s == q.floor_s
