import math

import numpy as np
import pytest

from osasim import ChannelParams, FadingDraw, received_power, sample_fading, sample_fadings, sir


def test_channel_params_requires_alpha_above_two():
    ChannelParams(2.5)
    with pytest.raises(ValueError):
        ChannelParams(2.0)
    with pytest.raises(ValueError):
        ChannelParams(1.0)


def test_fading_draw_nonnegative():
    FadingDraw(0.0)
    with pytest.raises(ValueError):
        FadingDraw(-0.1)


def test_fading_is_unit_exponential():
    rng = np.random.default_rng(3)
    h = sample_fadings(rng, 200_000)
    n = h.size
    assert (h >= 0).all()
    # Exp(1): mean 1 (sd 1), median ln 2 (asymptotic se 1/sqrt(n) since
    # 1/(2 f(m)) = 1), P(h > 1) = 1/e.
    assert abs(h.mean() - 1.0) < 3 / math.sqrt(n)
    assert abs(np.median(h) - math.log(2)) < 3 / math.sqrt(n)
    p_tail = (h > 1.0).mean()
    assert abs(p_tail - math.exp(-1)) < 3 * math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / n)


def test_fading_memoryless():
    rng = np.random.default_rng(4)
    h = sample_fadings(rng, 400_000)
    tail2 = (h > 2.0).sum()
    tail1 = (h > 1.0).sum()
    cond = tail2 / tail1
    uncond = tail1 / h.size
    se = math.sqrt(uncond * (1 - uncond) * (1 / tail1 + 1 / h.size))
    assert abs(cond - uncond) < 3 * se


def test_single_fading_draw():
    rng = np.random.default_rng(9)
    d = sample_fading(rng)
    assert isinstance(d, FadingDraw)
    assert d.h >= 0


def test_received_power_hand_values():
    ch = ChannelParams(4.0)
    assert received_power(5.0, 2.0, 2.0, ch) == pytest.approx(5.0 * 2.0 / 16.0)
    assert received_power(5.0, 1.0, 1.0, ch) == pytest.approx(5.0)
    assert received_power(3.0, FadingDraw(0.5), 1.0, ch) == pytest.approx(1.5)


def test_received_power_decreasing_in_distance():
    ch = ChannelParams(3.0)
    d = np.linspace(0.5, 10.0, 50)
    p = received_power(2.0, 1.0, d, ch)
    assert (np.diff(p) < 0).all()


def test_received_power_rejects_nonpositive_distance():
    ch = ChannelParams(4.0)
    with pytest.raises(ValueError):
        received_power(1.0, 1.0, 0.0, ch)
    with pytest.raises(ValueError):
        received_power(1.0, 1.0, np.array([1.0, -2.0]), ch)


def test_sir_values():
    assert sir(6.0, 2.0) == pytest.approx(3.0)
    assert sir(1.0, 0.0) == math.inf
    with pytest.raises(ValueError):
        sir(0.0, 0.0)
    with pytest.raises(ValueError):
        sir(-1.0, 2.0)


def test_fading_deterministic_under_seed():
    a = sample_fadings(np.random.default_rng(42), 100)
    b = sample_fadings(np.random.default_rng(42), 100)
    np.testing.assert_array_equal(a, b)
