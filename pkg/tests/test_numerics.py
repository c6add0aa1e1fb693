import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_pi.errors import InvalidInputError, ShapeError
from langevin_pi.numerics import apply_mask, fft2c, ifft2c, sos_combine
from conftest import random_complex


def test_centered_impulse_has_flat_spectrum():
    x = np.zeros((8, 8), complex)
    x[4, 4] = 1
    np.testing.assert_allclose(np.abs(fft2c(x)), 1 / 8, rtol=0, atol=1e-15)


def test_constant_spectrum_inverts_to_centered_impulse():
    k = np.full((8, 8), 1 / 8, complex)
    expected = np.zeros((8, 8))
    expected[4, 4] = 1
    np.testing.assert_allclose(ifft2c(k), expected, atol=1e-15)


@pytest.mark.parametrize("n", [8, 16, 64, 65])
def test_parseval_and_roundtrip(n):
    rng = np.random.default_rng(n)
    for _ in range(100 if n <= 16 else 10):
        x = random_complex(rng, (n, n))
        k = fft2c(x)
        assert abs(np.linalg.norm(x) - np.linalg.norm(k)) <= 1e-10 * np.linalg.norm(x)
        assert np.linalg.norm(ifft2c(k) - x) <= 1e-10 * np.linalg.norm(x)
        assert np.linalg.norm(fft2c(ifft2c(x)) - x) <= 1e-10 * np.linalg.norm(x)


def test_odd_size_dc_at_center():
    x = np.ones((5, 7))
    k = fft2c(x)
    assert np.argmax(np.abs(k)) == np.ravel_multi_index((2, 3), (5, 7))


def test_ifft_linearity(rng):
    k1, k2 = random_complex(rng, (16, 16)), random_complex(rng, (16, 16))
    a, b = 0.3 - 1.2j, 2.5
    np.testing.assert_allclose(ifft2c(a * k1 + b * k2), a * ifft2c(k1) + b * ifft2c(k2), atol=1e-10)


def test_fft_acts_on_coil_stacks(rng):
    x = random_complex(rng, (3, 8, 8))
    k = fft2c(x)
    for j in range(3):
        np.testing.assert_allclose(k[j], fft2c(x[j]), atol=1e-14)


def test_nonfinite_input_rejected():
    x = np.zeros((4, 4), complex)
    x[1, 1] = np.nan
    with pytest.raises(InvalidInputError):
        fft2c(x)
    x[1, 1] = np.inf
    with pytest.raises(InvalidInputError):
        ifft2c(x)


def test_mask_all_ones_and_zeros(rng):
    k = random_complex(rng, (8, 8))
    assert np.array_equal(apply_mask(k, np.ones((8, 8), bool)), k)
    assert not np.any(apply_mask(k, np.zeros((8, 8), bool)))


def test_mask_projection_properties(rng):
    k1, k2 = random_complex(rng, (8, 8)), random_complex(rng, (8, 8))
    m = rng.random((8, 8)) < 0.4
    once = apply_mask(k1, m)
    assert np.array_equal(apply_mask(once, m), once)
    np.testing.assert_allclose(apply_mask(2 * k1 - 3j * k2, m), 2 * once - 3j * apply_mask(k2, m))
    assert np.array_equal(once[m], k1[m])
    assert np.all(once[~m] == 0)


def test_mask_shape_mismatch():
    with pytest.raises(ShapeError):
        apply_mask(np.zeros((8, 8)), np.ones((4, 4), bool))


def test_sos_single_coil(rng):
    x = random_complex(rng, (8, 8))
    np.testing.assert_array_equal(sos_combine([x]), np.abs(x))


def test_sos_two_identical_coils(rng):
    x = random_complex(rng, (8, 8))
    np.testing.assert_allclose(sos_combine([x, x]), np.sqrt(2) * np.abs(x), rtol=0, atol=1e-12)


def test_sos_matches_pixel_loop(rng):
    coils = random_complex(rng, (4, 8, 8))
    expected = np.empty((8, 8))
    for r in range(8):
        for c in range(8):
            acc = 0.0
            for j in range(4):
                v = coils[j, r, c]
                acc += v.real * v.real + v.imag * v.imag
            expected[r, c] = acc ** 0.5
    np.testing.assert_allclose(sos_combine(coils), expected, rtol=0, atol=1e-12)


def test_sos_empty_rejected():
    with pytest.raises(InvalidInputError):
        sos_combine([])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3), st.integers(0, 2 ** 32 - 1))
def test_sos_ignores_per_coil_phase(phases, seed):
    coils = random_complex(np.random.default_rng(seed), (3, 6, 6))
    rotated = coils * np.exp(1j * np.asarray(phases))[:, None, None]
    np.testing.assert_allclose(sos_combine(rotated), sos_combine(coils), rtol=0, atol=1e-12)
