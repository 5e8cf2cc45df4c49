import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sciviz.transforms import (
    IDENTITY,
    TransformParams,
    TransformSample,
    apply_transform,
    sample_transform,
)


def test_disabled_params_give_identity(rng):
    assert sample_transform(TransformParams(enabled=False), rng, (8, 8, 1)) == IDENTITY


def test_zero_probability_gives_identity_and_same_stream():
    a = np.random.default_rng(3)
    b = np.random.default_rng(3)
    assert sample_transform(TransformParams(apply_probability=0.0), a, (8, 8, 1)) == IDENTITY
    sample_transform(TransformParams(), b, (8, 8, 1))
    assert a.random() == b.random()


def test_same_seed_same_samples():
    p = TransformParams()
    a = [sample_transform(p, np.random.default_rng(11), (28, 28, 1)) for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_samples_in_range_and_uniform():
    p = TransformParams()
    rng = np.random.default_rng(0)
    draws = [sample_transform(p, rng, (32, 32, 3)) for _ in range(10_000)]
    angles = np.array([d.angle for d in draws])
    scales = np.array([d.scale for d in draws])
    jit = np.array([d.jitter for d in draws])
    offs = np.array([d.crop_offset for d in draws])
    assert np.all(np.abs(angles) <= 5) and np.all((scales >= 0.95) & (scales <= 1.05))
    assert np.all(np.abs(jit) <= 10)
    assert np.all((offs >= 0) & (offs <= 2 * 2))
    counts, _ = np.histogram(angles, bins=10, range=(-5, 5))
    assert stats.chisquare(counts).pvalue > 1e-3
    counts = np.bincount(offs[:, 0], minlength=5)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_identity_sample_is_bit_identical(rng):
    img = rng.uniform(0, 255, size=(9, 7, 3))
    out = apply_transform(img, TransformSample(0.0, 1.0, (1, 1), 0, (0.0, 0.0, 0.0)))
    np.testing.assert_array_equal(out, img)
    assert out is not img


def test_quarter_turn_permutes_pixels():
    img = np.array([[10.0, 20.0], [30.0, 40.0]])[:, :, None]
    out = apply_transform(img, TransformSample(angle=90.0))
    assert sorted(out.ravel()) == sorted(img.ravel())
    np.testing.assert_allclose(out[:, :, 0], np.rot90(img[:, :, 0], k=-1), atol=1e-9)


def test_jitter_shifts_channel():
    img = np.full((4, 4, 3), 128.0)
    out = apply_transform(img, TransformSample(jitter=(10.0, 0.0, 0.0)))
    assert np.all(out[:, :, 0] == 138.0)
    np.testing.assert_array_equal(out[:, :, 1:], 128.0)


def test_output_is_clamped():
    out = apply_transform(np.full((3, 3, 1), 250.0), TransformSample(jitter=(10.0,)))
    assert out.max() == 255.0


def test_nonpositive_scale():
    with pytest.raises(ValueError):
        apply_transform(np.zeros((3, 3, 1)), TransformSample(scale=0.0))


def test_param_validation():
    with pytest.raises(ValueError):
        TransformParams(scale_min=1.1, scale_max=1.0)
    with pytest.raises(ValueError):
        TransformParams(apply_probability=1.5)


def test_default_crop_pad_scales_with_size():
    assert TransformParams().pad_for(224) == 14
    assert TransformParams().pad_for(28) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_random_transform_keeps_shape_and_range(seed):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 255, size=(12, 10, 3))
    out = apply_transform(img, sample_transform(TransformParams(), rng, img.shape))
    assert out.shape == img.shape
    assert out.min() >= 0 and out.max() <= 255


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(-20, 20))
def test_geometric_part_commutes_with_constant_shift(seed, shift):
    # away from the clamp bounds, shifting the input by a constant shifts the output by it
    rng = np.random.default_rng(seed)
    img = rng.uniform(60, 190, size=(10, 10, 1))
    s = sample_transform(TransformParams(jitter=0.0), rng, img.shape)
    np.testing.assert_allclose(apply_transform(img + shift, s), apply_transform(img, s) + shift, atol=1e-9)
