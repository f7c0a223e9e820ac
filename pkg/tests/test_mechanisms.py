import logging
import math

import numpy as np
import pytest

from pvmw_dp.mechanisms import (
    NoiseRole,
    NoiseSource,
    above_threshold,
    above_threshold_step,
    clip,
    clip_concentration_bound,
    gaussian_tail_bound,
    laplace_tail_bound,
    sample_gaussian_vector,
    sample_laplace,
    trunc,
    verify_clip_concentration,
)

log = logging.getLogger("pvmw_dp")
log.setLevel(logging.DEBUG)

pytestmark = pytest.mark.mandatory


def test_noise_source_is_deterministic():
    a = NoiseSource(42, NoiseRole.QUERY)
    b = NoiseSource(42, NoiseRole.QUERY)
    assert [a.laplace(1.0) for _ in range(5)] == [b.laplace(1.0) for _ in range(5)]
    assert np.array_equal(a.gaussian(2.0, size=7), b.gaussian(2.0, size=7))


def test_streams_are_independent():
    a = NoiseSource(42, NoiseRole.THRESHOLD)
    b = NoiseSource(42, NoiseRole.QUERY)
    assert a.uniform(size=4).tolist() != b.uniform(size=4).tolist()


def test_one_draw_per_sample():
    """The n-th sample does not depend on the kinds or scales sampled before it."""
    a = NoiseSource(3)
    b = NoiseSource(3)
    a.laplace(1.0, size=3)
    b.gaussian(5.0, size=3)
    assert a.draws == b.draws == 3
    assert a.uniform() == b.uniform()


def test_history_records_scales():
    src = NoiseSource(0)
    src.laplace(2.0)
    src.gaussian(0.5, size=3)
    src.laplace(4.0)
    assert src.scales('laplace') == [2.0, 4.0]
    assert src.scales('gaussian') == [0.5]
    assert src.history[1].index == 1
    assert src.history[1].count == 3


def test_uniforms_are_open_interval():
    u = NoiseSource(1).uniform(size=10000)
    assert np.all(u > 0)
    assert np.all(u < 1)


@pytest.mark.parametrize('scale', [0.0, -1.0])
def test_nonpositive_scale(scale):
    src = NoiseSource(0)
    with pytest.raises(ValueError):
        src.laplace(scale)
    with pytest.raises(ValueError):
        src.gaussian(scale)


def test_sampling_helpers():
    src = NoiseSource(5)
    assert isinstance(sample_laplace(1.0, src), float)
    assert sample_gaussian_vector(6, 1.0, src).shape == (6,)
    with pytest.raises(ValueError):
        sample_gaussian_vector(0, 1.0, src)


def test_laplace_and_gaussian_moments():
    src = NoiseSource(11)
    laplace = src.laplace(2.0, size=200000)
    gaussian = src.gaussian(3.0, size=200000)
    # Var(Lap(b)) = 2 b^2
    assert abs(laplace.mean()) < 0.05
    assert abs(laplace.var() / 8.0 - 1.0) < 0.03
    assert abs(gaussian.mean()) < 0.05
    assert abs(gaussian.std() / 3.0 - 1.0) < 0.01


@pytest.mark.slow
def test_tail_bounds_hold_empirically():
    src = NoiseSource(12)
    laplace = np.abs(src.laplace(1.0, size=10 ** 6))
    gaussian = np.abs(src.gaussian(1.0, size=10 ** 6))
    for t in (1.0, 2.0, 4.0):
        se = math.sqrt(laplace_tail_bound(t, 1.0) / 10 ** 6)
        assert np.mean(laplace >= t) <= laplace_tail_bound(t, 1.0) + 3 * se
        se = math.sqrt(gaussian_tail_bound(t, 1.0) / 10 ** 6)
        assert np.mean(gaussian >= t) <= gaussian_tail_bound(t, 1.0) + 3 * se


def test_tail_bound_values():
    assert laplace_tail_bound(0.0, 1.0) == 2.0
    assert math.isclose(laplace_tail_bound(2.0, 1.0), 2.0 * math.exp(-2.0))
    assert math.isclose(gaussian_tail_bound(2.0, 1.0), 2.0 * math.exp(-2.0))


def test_trunc():
    assert trunc(5.0, 3.0) == 3.0
    assert trunc(-5.0, 3.0) == -3.0
    assert trunc(1.5, 3.0) == 1.5
    assert np.array_equal(trunc(np.array([-4.0, 0.5, 4.0]), 3.0), [-3.0, 0.5, 3.0])
    with pytest.raises(ValueError):
        trunc(1.0, 0.0)


def test_clip():
    phi = np.array([1.0, 0.0])
    assert np.allclose(clip([6.0, 2.0], phi, 3.0), [3.0, 1.0])
    assert np.allclose(clip([1.0, 2.0], phi, 3.0), [1.0, 2.0])
    # orthogonal to phi: left alone
    assert np.allclose(clip([0.0, 9.0], phi, 3.0), [0.0, 9.0])


def test_trunc_equals_inner_product_with_clip(rng):
    """eta * trunc(<phi, u>) == eta * <phi, clip(u, phi, c)>."""
    for _ in range(100):
        phi = 3 * rng.standard_normal(4)
        u = rng.standard_normal(4)
        assert math.isclose(trunc(float(phi @ u), 3.0), float(phi @ clip(u, phi, 3.0)), abs_tol=1e-12)


def test_above_threshold_step():
    assert above_threshold_step(1.0, tau=1.0, chi=0.0, nu=0.0)
    assert not above_threshold_step(0.9, tau=1.0, chi=0.0, nu=0.0)
    assert above_threshold_step(0.5, tau=1.0, chi=0.2, nu=0.8)
    assert not above_threshold_step(2.0, tau=1.0, chi=1.5, nu=0.0)


def test_above_threshold_finds_large_value():
    values = [0.0] * 20 + [100.0] + [0.0] * 5
    threshold_src, query_src = NoiseSource(1, NoiseRole.THRESHOLD), NoiseSource(1, NoiseRole.QUERY)
    index = above_threshold(values, tau=50.0, epsilon=10.0, threshold_src=threshold_src, query_src=query_src)
    assert index == 20


def test_above_threshold_exhausts_stream():
    index = above_threshold([0.0] * 10, 50.0, 10.0, NoiseSource(2, 0), NoiseSource(2, 1))
    assert index is None


def test_above_threshold_noise_scales():
    threshold_src = NoiseSource(3, 0)
    query_src = NoiseSource(3, 1)
    above_threshold([0.0] * 3, 50.0, 2.0, threshold_src, query_src, sensitivity=0.5)
    assert threshold_src.scales('laplace') == [0.5]
    assert query_src.scales('laplace') == [1.0, 1.0, 1.0]


def test_clip_concentration_bound():
    assert math.isclose(clip_concentration_bound(0.15), 2.0 * math.exp(-0.1 / 0.0225))
    assert clip_concentration_bound(0.15) == pytest.approx(0.02349, abs=1e-5)


def test_clip_concentration_small_noise_never_fails(rng):
    support = 0.5 * np.eye(3)
    weights = np.full(3, 1.0 / 3)
    result = verify_clip_concentration(support, weights, np.zeros(3), 0.1, 10 ** 4, NoiseSource(0))
    assert result.failures == 0
    assert result.trials == 10 ** 4


@pytest.mark.parametrize(
    'support, weights, mu_z, sigma_z, trials',
    [
        ([[2.0, 0.0]], [1.0], [0.0, 0.0], 0.1, 10 ** 4),
        ([[0.5, 0.0]], [0.5], [0.0, 0.0], 0.1, 10 ** 4),
        ([[0.5, 0.0]], [1.0], [3.0, 0.0], 0.1, 10 ** 4),
        ([[0.5, 0.0]], [1.0], [0.0], 0.1, 10 ** 4),
        ([[0.5, 0.0]], [1.0], [0.0, 0.0], 1.5, 10 ** 4),
        ([[0.5, 0.0]], [1.0], [0.0, 0.0], 0.1, 10),
    ],
)
def test_clip_concentration_rejects_bad_input(support, weights, mu_z, sigma_z, trials):
    with pytest.raises(ValueError):
        verify_clip_concentration(support, weights, mu_z, sigma_z, trials, NoiseSource(0))


@pytest.mark.slow
@pytest.mark.parametrize('sigma_z', [0.1, 0.15, 0.2])
def test_clip_concentration_random_instances(sigma_z):
    from pvmw_dp.experiments.clip_concentration import instance_rng, random_instance

    for seed in range(3):
        d = 4 + 6 * seed
        support, weights, mu_z = random_instance(instance_rng(seed, d), 32, d)
        result = verify_clip_concentration(support, weights, mu_z, sigma_z, 10 ** 5, NoiseSource(seed, 3))
        assert result.failure_rate <= result.bound + 3 * result.standard_error
