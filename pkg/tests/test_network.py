import numpy as np
import pytest

from sciviz import network as nw
from sciviz.exceptions import CorruptFileError, FingerprintMismatchError, ShapeError
from sciviz.network import LayerSpec, conv, dense

SMALL = (
    conv(3, 1, 3, padding="same"),
    LayerSpec("relu"),
    LayerSpec("maxpool", pool=2),
    conv((2, 3), 3, 4, stride=2, padding="valid"),
    LayerSpec("relu"),
    LayerSpec("flatten"),
    dense(8, 5),
)
SMALL_SHAPE = (9, 8, 1)  # conv same -> 9x8x3, pool -> 4x4x3, conv valid s2 -> 2x1x4


def naive_forward(w, img):
    """Explicit loops; padding offsets follow the usual 'same' rule."""
    x = (np.asarray(img, dtype=np.float64) - 127.5) / 127.5
    for layer, p in zip(w.layers, w.params):
        if layer.kind == "conv":
            k, b = p
            kh, kw = layer.kernel
            h, wd, cin = x.shape
            s = layer.stride
            if layer.padding == "same":
                ho, wo = -(-h // s), -(-wd // s)
                ph = max((ho - 1) * s + kh - h, 0)
                pw = max((wo - 1) * s + kw - wd, 0)
                top, left = ph // 2, pw // 2
            else:
                ho, wo = (h - kh) // s + 1, (wd - kw) // s + 1
                top = left = 0
            out = np.zeros((ho, wo, layer.out_channels))
            for i in range(ho):
                for j in range(wo):
                    for o in range(layer.out_channels):
                        acc = b[o]
                        for u in range(kh):
                            for v in range(kw):
                                r, q = i * s + u - top, j * s + v - left
                                if 0 <= r < h and 0 <= q < wd:
                                    for ci in range(cin):
                                        acc += x[r, q, ci] * k[u, v, ci, o]
                        out[i, j, o] = acc
            x = out
        elif layer.kind == "relu":
            x = np.where(x > 0, x, 0.0)
        elif layer.kind == "maxpool":
            pz = layer.pool
            h, wd, c = x.shape
            out = np.zeros((h // pz, wd // pz, c))
            for i in range(h // pz):
                for j in range(wd // pz):
                    for ci in range(c):
                        out[i, j, ci] = max(x[i * pz + u, j * pz + v, ci]
                                            for u in range(pz) for v in range(pz))
            x = out
        elif layer.kind == "flatten":
            x = x.reshape(-1)
        else:
            k, b = p
            x = np.array([b[o] + sum(x[i] * k[i, o] for i in range(len(x)))
                          for o in range(k.shape[1])])
    return x


@pytest.fixture
def small_net():
    return nw.init_weights(SMALL_SHAPE, SMALL, seed=4)


def test_shapes_are_inferred(small_net):
    assert nw.infer_shapes(SMALL_SHAPE, SMALL)[-1] == (5,)
    assert small_net.num_classes == 5


def test_mismatched_architecture_rejected():
    with pytest.raises(ShapeError):
        nw.infer_shapes((9, 8, 1), (conv(3, 2, 3), LayerSpec("flatten"), dense(216, 2)))


def test_forward_matches_naive_loops(small_net, rng):
    for _ in range(5):
        img = rng.uniform(0, 255, size=SMALL_SHAPE)
        np.testing.assert_allclose(nw.forward_logits(small_net, img),
                                   naive_forward(small_net, img), rtol=1e-10, atol=1e-12)


def test_default_architecture_forward_matches_naive(rng):
    w = nw.init_weights((12, 12, 3), nw.default_architecture((12, 12, 3), 4), seed=1)
    img = rng.uniform(0, 255, size=(12, 12, 3))
    np.testing.assert_allclose(nw.forward_logits(w, img), naive_forward(w, img), rtol=1e-10, atol=1e-12)


def test_batch_forward_matches_single(small_net, rng):
    X = rng.uniform(0, 255, size=(4, *SMALL_SHAPE))
    batch = nw.forward_batch(small_net, X)
    for x, row in zip(X, batch):
        np.testing.assert_allclose(row, nw.forward_logits(small_net, x), rtol=1e-13)


def test_zero_weights_give_zero_logits_and_gradient(rng):
    w = nw.init_weights((28, 28, 1), scale="zero")
    img = rng.uniform(0, 255, size=(28, 28, 1))
    np.testing.assert_array_equal(nw.forward_logits(w, img), 0.0)
    np.testing.assert_array_equal(nw.input_gradient(w, img, 3), 0.0)


def test_gradient_matches_finite_differences(small_net, rng):
    img = rng.uniform(0, 255, size=SMALL_SHAPE)
    for c in range(5):
        err, info = nw.gradient_check(small_net, img, c, n_samples=72, return_details=True)
        assert err < 1e-6
        assert info["checked"] > 0


def test_linear_network_gradient_is_exact(rng):
    layers = (LayerSpec("flatten"), dense(12, 3))
    w = nw.init_weights((2, 2, 3), layers, seed=0)
    img = rng.uniform(0, 255, size=(2, 2, 3))
    assert nw.gradient_check(w, img, 1, n_samples=12) < 1e-10
    np.testing.assert_allclose(nw.input_gradient(w, img, 1).ravel(), w.params[1][0][:, 1] / 127.5,
                               rtol=1e-15)


def test_weight_vector_objective(small_net, rng):
    img = rng.uniform(0, 255, size=SMALL_SHAPE)
    g = nw.input_gradient(small_net, img, np.array([0.5, 0, 0.5, 0, 0]))
    want = 0.5 * nw.input_gradient(small_net, img, 0) + 0.5 * nw.input_gradient(small_net, img, 2)
    np.testing.assert_allclose(g, want, rtol=1e-12, atol=1e-15)


def test_relu_kink_is_excluded():
    # 1x1 identity conv: the pixel at 127.5 sits exactly on the ReLU kink
    layers = (conv(1, 1, 1), LayerSpec("relu"), LayerSpec("flatten"), dense(4, 2))
    w = nw.init_weights((2, 2, 1), layers, seed=0)
    w.params[0][0][...] = 1.0
    img = np.array([[127.5, 200.0], [220.0, 250.0]])[:, :, None]
    err, info = nw.gradient_check(w, img, 0, n_samples=4, return_details=True)
    assert info["excluded"] == [0]
    assert info["checked"] == 3
    assert err < 1e-8


def test_maxpool_tie_routes_to_first_position():
    layers = (LayerSpec("maxpool", pool=2), LayerSpec("flatten"), dense(1, 1))
    w = nw.init_weights((2, 2, 1), layers, seed=0)
    w.params[2][0][...] = 1.0
    g = nw.input_gradient(w, np.full((2, 2, 1), 100.0), 0)
    np.testing.assert_array_equal(g[:, :, 0], [[1 / 127.5, 0], [0, 0]])


def test_input_shape_checked(small_net):
    with pytest.raises(ShapeError):
        nw.forward_logits(small_net, np.zeros((8, 8, 1)))


def test_save_load_roundtrip(tmp_path, small_net):
    p = tmp_path / "w.sciw"
    nw.save_weights(small_net, p)
    back = nw.load_weights(p, expected_fingerprint=small_net.fingerprint)
    assert back.layers == small_net.layers
    for a, b in zip(small_net.tensors(), back.tensors()):
        np.testing.assert_array_equal(a, b)
    assert nw.dumps_weights(back) == p.read_bytes()


def test_truncated_file_is_corrupt(tmp_path, small_net):
    p = tmp_path / "w.sciw"
    blob = nw.dumps_weights(small_net)
    p.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(CorruptFileError):
        nw.load_weights(p)
    flipped = bytearray(blob)
    flipped[-20] ^= 1
    with pytest.raises(CorruptFileError):
        nw.loads_weights(bytes(flipped))


def test_fingerprint_mismatch(tmp_path, small_net):
    p = tmp_path / "w.sciw"
    nw.save_weights(small_net, p)
    other = nw.init_weights((28, 28, 1))
    with pytest.raises(FingerprintMismatchError):
        nw.load_weights(p, expected_fingerprint=other.fingerprint)


def tiny_data(n=64, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 3, size=n)
    X = rng.uniform(0, 60, size=(n, 6, 6, 1))
    for i, c in enumerate(y):
        X[i, 2 * c : 2 * c + 2] += 180
    return X, y


TINY = (conv(3, 1, 4), LayerSpec("relu"), LayerSpec("maxpool", pool=2),
        LayerSpec("flatten"), dense(36, 3))


def test_training_is_deterministic():
    X, y = tiny_data()
    a, _ = nw.train_classifier(X, y, epochs=2, batch_size=8, step_size=0.05, seed=3, layers=TINY)
    b, _ = nw.train_classifier(X, y, epochs=2, batch_size=8, step_size=0.05, seed=3, layers=TINY)
    assert nw.dumps_weights(a) == nw.dumps_weights(b)


def test_zero_step_leaves_initial_weights():
    X, y = tiny_data()
    w, _ = nw.train_classifier(X, y, epochs=1, batch_size=8, step_size=0.0, seed=3, layers=TINY)
    assert nw.dumps_weights(w) == nw.dumps_weights(nw.init_weights((6, 6, 1), TINY, seed=3))


def test_training_learns_separable_toy_task():
    X, y = tiny_data(200)
    w, hist = nw.train_classifier(X, y, epochs=5, batch_size=16, step_size=0.05, seed=0,
                                  layers=TINY, X_test=X, y_test=y)
    assert hist["epoch_loss"][-1] < hist["epoch_loss"][0]
    assert hist["test_accuracy"] > 0.9


def test_divergence_is_reported():
    X, y = tiny_data()
    with pytest.raises(nw.TrainingDivergedError):
        nw.train_classifier(X, y, epochs=3, batch_size=8, step_size=1e300, seed=0, layers=TINY)


def test_cross_entropy_parameter_gradients(rng):
    X, y = tiny_data(4)
    w = nw.init_weights((6, 6, 1), TINY, seed=1)
    _, grads = nw.cross_entropy_and_grads(w, X, y)
    eps = 1e-6
    for li in (0, 4):
        k = w.params[li][0]
        for idx in [(0,) * k.ndim, tuple(s - 1 for s in k.shape)]:
            old = k[idx]
            k[idx] = old + eps
            lp, _ = nw.cross_entropy_and_grads(w, X, y)
            k[idx] = old - eps
            lm, _ = nw.cross_entropy_and_grads(w, X, y)
            k[idx] = old
            assert nw.relative_error(grads[li][0][idx], (lp - lm) / (2 * eps)) < 1e-5


def test_softmax_is_stable():
    p = nw.softmax(np.array([1000.0, 1000.0, -1000.0]))
    np.testing.assert_allclose(p, [0.5, 0.5, 0.0])
