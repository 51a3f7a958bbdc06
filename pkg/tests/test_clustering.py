"""k-means behavior: Lloyd descent, canonical style order, stability."""

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from headway import clustering as clu
from headway.errors import NumericError, ValidationError


def blobs(seed=0, n_per=60, centers=((0.1, 0.9, 0.8), (0.5, 0.2, 0.1), (0.9, 0.05, 0.02))):
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for k, c in enumerate(centers):
        pts.append(np.asarray(c) + rng.normal(0.0, 0.04, (n_per, 3)))
        labels.extend([k] * n_per)
    return np.vstack(pts), np.array(labels)


def test_inertia_history_never_increases():
    x, _ = blobs(seed=3)
    model = clu.kmeans_fit(x, clu.KMeansConfig(n_init=1, seed=7))
    hist = model.inertia_history
    assert hist, "Lloyd must record at least one iteration"
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
    assert model.inertia == pytest.approx(hist[-1])


def test_assign_is_nearest_centroid():
    x, _ = blobs(seed=5, n_per=40)
    model = clu.kmeans_fit(x)
    got = clu.assign(x, model)
    for row, g in zip(x, got):
        d2 = [float(np.sum((row - c) ** 2)) for c in model.centroids]
        assert g == int(np.argmin(d2))


def test_fit_is_deterministic_per_seed():
    x, _ = blobs(seed=1)
    m1 = clu.kmeans_fit(x, clu.KMeansConfig(seed=4))
    m2 = clu.kmeans_fit(x, clu.KMeansConfig(seed=4))
    assert np.array_equal(m1.centroids, m2.centroids)
    assert m1.inertia == m2.inertia
    assert m1.order == m2.order


def test_recovers_planted_blobs_and_matches_sklearn():
    x, labels = blobs(seed=2)
    model = clu.kmeans_fit(x)
    ours = clu.assign(x, model)
    assert adjusted_rand_score(labels, ours) == 1.0

    from sklearn.cluster import KMeans

    ref = KMeans(n_clusters=3, n_init=10, random_state=0).fit_predict(x)
    assert adjusted_rand_score(ref, ours) == 1.0


def test_canonical_order_semantics():
    # columns: THW_RMS, TETH, TITH
    centroids = np.array(
        [
            [0.9, 0.1, 0.0],  # long headway, no exposure -> least aggressive
            [0.1, 0.9, 0.8],  # short headway, high exposure -> aggressive
            [0.5, 0.3, 0.2],  # in between
        ]
    )
    assert clu.canonical_order(centroids) == (1, 0, 2)
    ordered = centroids[list(clu.canonical_order(centroids))]
    assert ordered[0, 1] == centroids[:, 1].max()  # style 1: max TETH
    assert ordered[1, 0] == max(centroids[0, 0], centroids[2, 0])  # style 2: max THW_RMS


def test_canonical_order_breaks_ties_toward_lower_index():
    tied = np.array([[0.5, 0.7, 0.1], [0.2, 0.7, 0.1], [0.9, 0.1, 0.0]])
    # TETH ties between rows 0 and 1 -> row 0 becomes style 1
    assert clu.canonical_order(tied)[0] == 0


def test_model_centroids_are_stored_in_canonical_order():
    x, _ = blobs(seed=9)
    model = clu.kmeans_fit(x)
    assert model.centroids[0, 1] == model.centroids[:, 1].max()
    assert model.centroids[1, 0] >= model.centroids[2, 0]


def test_kmeans_input_validation():
    with pytest.raises(ValidationError):
        clu.kmeans_fit(np.zeros((5, 2, 2)))
    with pytest.raises(NumericError):
        clu.kmeans_fit(np.array([[np.nan, 0.0, 0.0], [0.1, 0.2, 0.3], [1, 2, 3.0]]))
    with pytest.raises(ValidationError):
        clu.kmeans_fit(np.random.default_rng(0).random((2, 3)))
    with pytest.raises(ValidationError):
        clu.KMeansConfig(n_clusters=0)
    with pytest.raises(ValidationError):
        clu.KMeansConfig(tol=-1.0)


def test_duplicate_points_do_not_crash():
    x = np.array([[0.1, 0.1, 0.1]] * 10 + [[0.9, 0.9, 0.9]] * 10 + [[0.5, 0.5, 0.5]] * 10)
    model = clu.kmeans_fit(x, clu.KMeansConfig(n_init=5))
    assert model.inertia == pytest.approx(0.0, abs=1e-12)


def test_model_json_round_trip(tmp_path):
    x, _ = blobs(seed=11, n_per=30)
    model = clu.kmeans_fit(x)
    path = tmp_path / "cluster.json"
    clu.save_model(model, path, scaler_ref="scaler.json")
    back = clu.load_model(path)
    assert np.array_equal(back.centroids, model.centroids)
    assert back.inertia == model.inertia
    assert back.order == model.order
    doc = clu.model_to_dict(model)
    doc["feature_names"] = ["a", "b", "c"]
    with pytest.raises(ValidationError):
        clu.model_from_dict(doc)


def test_cohort_styles_are_recovered(style_cohort):
    fvs, labels, scaler, x = style_cohort
    model = clu.kmeans_fit(x)
    pred = clu.assign(x, model)
    assert adjusted_rand_score(labels, pred) >= 0.8
    # canonical order must map archetype 0 (shortest target headway) to style 1
    agg = pred[labels == 0]
    assert np.mean(agg == 0) > 0.9
    calm = pred[labels == 2]
    assert np.mean(calm == 1) > 0.9
