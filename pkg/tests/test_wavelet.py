import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_pi.errors import InvalidInputError, ShapeError
from langevin_pi.wavelet import WaveletTensor, forward_uwt, inverse_uwt
from conftest import random_complex


def hand_haar_impulse(n):
    """Hand convolution of the 2-tap filters with a unit impulse at (0, 0).

    Along one axis ``low[k] = (x[k] + x[k+1]) / 2`` picks up the impulse at
    k = 0 and k = n - 1 (wrap), each with weight 1/2; ``high`` gives +1/2 at
    k = 0 and -1/2 at k = n - 1.
    """
    lo = np.zeros(n)
    hi = np.zeros(n)
    lo[0], lo[-1] = 0.5, 0.5
    hi[0], hi[-1] = 0.5, -0.5
    col = {"l": lo, "h": hi}
    # subband name: row filter, then column filter
    return {name: np.outer(col[name[1]], col[name[0]]) for name in ("ll", "lh", "hl", "hh")}


def test_constant_image():
    t = forward_uwt(np.full((6, 5), 2.5 - 1j))
    np.testing.assert_allclose(t.ll, 2.5 - 1j)
    for band in (t.lh, t.hl, t.hh):
        np.testing.assert_allclose(band, 0, atol=1e-15)


def test_impulse_subbands():
    x = np.zeros((4, 4))
    x[0, 0] = 1
    t = forward_uwt(x)
    expected = hand_haar_impulse(4)
    for name in ("ll", "lh", "hl", "hh"):
        band = getattr(t, name)
        assert np.count_nonzero(band) == 4
        np.testing.assert_allclose(np.abs(band[band != 0]), 0.25)
        np.testing.assert_allclose(band, expected[name])


@pytest.mark.parametrize("shape", [(16, 16), (8, 8), (64, 64), (65, 65), (7, 12)])
def test_perfect_reconstruction(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(100 if shape == (16, 16) else 5):
        x = random_complex(rng, shape)
        err = np.max(np.abs(inverse_uwt(forward_uwt(x)) - x))
        assert err <= 1e-10 * np.max(np.abs(x))


def test_forward_linearity(rng):
    x, y = random_complex(rng, (8, 8)), random_complex(rng, (8, 8))
    a, b = 1.5 - 0.5j, -0.25
    lhs = forward_uwt(a * x + b * y)
    tx, ty = forward_uwt(x), forward_uwt(y)
    for l, p, q in zip(lhs.bands(), tx.bands(), ty.bands()):
        np.testing.assert_allclose(l, a * p + b * q, atol=1e-12)


def test_inverse_linearity(rng):
    t1 = WaveletTensor(*(random_complex(rng, (8, 8)) for _ in range(4)))
    t2 = WaveletTensor(*(random_complex(rng, (8, 8)) for _ in range(4)))
    a, b = 0.7, -2 + 1j
    np.testing.assert_allclose(inverse_uwt(a * t1 + b * t2),
                               a * inverse_uwt(t1) + b * inverse_uwt(t2), atol=1e-12)


def test_inverse_of_constant_lowpass():
    z = np.zeros((5, 6), complex)
    t = WaveletTensor(np.full((5, 6), 3.0 + 0j), z, z, z)
    np.testing.assert_allclose(inverse_uwt(t), 3.0)


def test_inverse_is_adjoint(rng):
    x = random_complex(rng, (9, 10))
    t = WaveletTensor(*(random_complex(rng, (9, 10)) for _ in range(4)))
    lhs = sum(np.vdot(a, b) for a, b in zip(forward_uwt(x).bands(), t.bands()))
    rhs = np.vdot(x, inverse_uwt(t))
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_energy_bound(rng):
    for _ in range(20):
        x = random_complex(rng, (12, 12))
        e = sum(np.sum(np.abs(b) ** 2) for b in forward_uwt(x).bands())
        assert e <= np.sum(np.abs(x) ** 2) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 2 ** 32 - 1))
def test_shift_covariance(dr, dc, seed):
    x = random_complex(np.random.default_rng(seed), (16, 16))
    shifted = forward_uwt(np.roll(x, (dr, dc), axis=(0, 1)))
    for a, b in zip(shifted.bands(), forward_uwt(x).bands()):
        np.testing.assert_allclose(a, np.roll(b, (dr, dc), axis=(0, 1)), atol=1e-12)


def test_channel_layout_roundtrip(rng):
    t = forward_uwt(random_complex(rng, (6, 6)))
    ch = t.channels()
    assert ch.shape == (8, 6, 6)
    np.testing.assert_array_equal(ch[0], t.ll.real)
    np.testing.assert_array_equal(ch[3], t.lh.imag)
    np.testing.assert_array_equal(ch[6], t.hh.real)
    back = WaveletTensor.from_channels(ch)
    for a, b in zip(back.bands(), t.bands()):
        np.testing.assert_array_equal(a, b)


def test_batched_coils(rng):
    x = random_complex(rng, (3, 8, 8))
    ch = forward_uwt(x).channels()
    assert ch.shape == (3, 8, 8, 8)
    np.testing.assert_allclose(inverse_uwt(WaveletTensor.from_channels(ch)), x, atol=1e-12)


def test_errors():
    with pytest.raises(InvalidInputError):
        forward_uwt(np.zeros((1, 5)))
    z = np.zeros((4, 4))
    with pytest.raises(ShapeError):
        inverse_uwt(WaveletTensor(z, z, z, np.zeros((4, 5))))
