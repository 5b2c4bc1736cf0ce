"""Smoke tests for the Python bindings: shapes, determinism, and the core
rigid-motion invariants, each on small inputs."""

import numpy as np
import pytest

import canon3d


def random_cloud(seed, n):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, 3))


def test_sample_surface_shapes_and_determinism():
    for kind in ("plane", "sphere", "box", "torus"):
        a = canon3d.sample_surface(kind, count=128, seed=3)
        b = canon3d.sample_surface(kind, count=128, seed=3)
        assert a.shape == (128, 3)
        np.testing.assert_array_equal(a, b)
    with pytest.raises(canon3d.CanonError):
        canon3d.sample_surface("dodecahedron", count=16, seed=0)


def test_knn_and_chamfer_match_numpy_oracles():
    pts = random_cloud(1, 200)
    query = np.array([0.1, -0.2, 0.3])
    idx, dist = canon3d.knn(pts, query, 8)
    d_all = np.linalg.norm(pts - query, axis=1)
    order = np.lexsort((np.arange(len(pts)), d_all))[:8]
    assert list(idx) == list(order)
    np.testing.assert_allclose(dist, d_all[order], atol=1e-12)

    a, b = random_cloud(2, 100), random_cloud(3, 80)
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(-1)
    oracle = d2.min(1).mean() + d2.min(0).mean()
    assert canon3d.chamfer(a, b) == pytest.approx(oracle, abs=1e-12)


def test_fps_subset_and_determinism():
    pts = random_cloud(4, 64)
    sub = canon3d.fps(pts, 16, seed=7)
    assert sub.shape == (16, 3)
    np.testing.assert_array_equal(sub, canon3d.fps(pts, 16, seed=7))
    # every selected point is one of the inputs
    for row in sub:
        assert np.min(np.linalg.norm(pts - row, axis=1)) == 0.0


def test_denoise_reduces_sphere_noise():
    clean = canon3d.sample_surface("sphere", count=1024, seed=5)
    rng = np.random.default_rng(5)
    noisy = clean + rng.normal(0.0, 0.02, clean.shape)

    def rms_about_fit_radius(p):
        r = np.linalg.norm(p, axis=1)
        return np.sqrt(np.mean((r - r.mean()) ** 2))

    out, flags = canon3d.denoise(noisy, k=16)
    assert out.shape == noisy.shape
    assert len(flags) == len(noisy)
    assert rms_about_fit_radius(out) < 0.5 * rms_about_fit_radius(noisy)


def test_frame_equivariance_and_canonical_agreement():
    params = canon3d.init_params(11)
    x = random_cloud(6, 64)
    rot, trans = canon3d.random_transform(9)
    moved = x @ rot.T + trans

    r0, t0 = canon3d.estimate_frame(params, x)
    r1, t1 = canon3d.estimate_frame(params, moved)
    assert canon3d.rotation_geodesic(r1, rot @ r0) < 1e-6
    np.testing.assert_allclose(t1, rot @ t0 + trans, atol=1e-9)

    canon_a, _, _, deg_a = canon3d.canonicalize(params, x)
    canon_b, _, _, deg_b = canon3d.canonicalize(params, moved)
    assert not deg_a and not deg_b
    np.testing.assert_allclose(canon_a, canon_b, atol=1e-6)


def test_embedding_invariance():
    params = canon3d.init_params(12)
    x = random_cloud(7, 48)
    rot, trans = canon3d.random_transform(13)
    z0 = canon3d.encode(params, x)
    z1 = canon3d.encode(params, x @ rot.T + trans)
    np.testing.assert_allclose(z0, z1, atol=1e-8)


def test_params_roundtrip(tmp_path):
    params = canon3d.init_params(21)
    path = str(tmp_path / "params.bin")
    canon3d.save_params(params, path)
    loaded = canon3d.load_params(path)
    assert loaded.seed == params.seed
    assert loaded.channels == params.channels
    x = random_cloud(8, 32)
    np.testing.assert_array_equal(canon3d.encode(params, x), canon3d.encode(loaded, x))


def test_train_runs_and_returns_history():
    params = canon3d.init_params(22)
    clouds = [random_cloud(100 + i, 32) for i in range(3)]
    trained, history = canon3d.train(params, clouds, epochs=3, seed=1)
    assert len(history) == 3
    # epochs=0 leaves the parameters untouched
    frozen, empty = canon3d.train(params, clouds, epochs=0, seed=1)
    assert empty == []
    x = random_cloud(9, 24)
    np.testing.assert_array_equal(canon3d.encode(params, x), canon3d.encode(frozen, x))


def test_act_is_equivariant():
    params = canon3d.init_params(23)
    base = canon3d.sample_surface("sphere", count=800, seed=31)
    crop_dir = np.array([0.8, 0.5, 0.33])
    crop_dir /= np.linalg.norm(crop_dir)
    body = base[base @ crop_dir < 0.55]
    rng = np.random.default_rng(31)
    cluster = np.array([1.3, 0.2, 0.4]) + rng.uniform(-0.05, 0.05, size=(24, 3))
    pts = np.vstack([body, cluster])
    labels = [0] * len(body) + [1] * len(cluster)
    proprio = np.array([0.5, -0.2, 0.8])

    pos0, ori0, grip0, deg0 = canon3d.act(params, pts, labels, proprio, gripper=0.07)
    assert not deg0
    assert grip0 == 0.07

    rot, trans = canon3d.random_transform(17)
    pos1, ori1, _, deg1 = canon3d.act(
        params, pts @ rot.T + trans, labels, rot @ proprio + trans, gripper=0.07
    )
    assert not deg1
    np.testing.assert_allclose(pos1, rot @ pos0 + trans, atol=1e-6)
    assert canon3d.rotation_geodesic(ori1, rot @ ori0) < 1e-6


def test_shape_errors():
    with pytest.raises(canon3d.CanonError):
        canon3d.denoise(np.zeros((4, 2)), k=3)
    with pytest.raises(canon3d.CanonError):
        canon3d.fps(random_cloud(1, 8), 9)
