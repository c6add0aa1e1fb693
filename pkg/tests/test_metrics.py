import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from langevin_pi.errors import InvalidInputError, InvalidReferenceError, ShapeError
from langevin_pi.metrics import MetricReport, evaluate, gaussian_window, hfen, log_kernel, psnr, ssim
from langevin_pi.sim import shepp_logan

PH = shepp_logan(64)


def test_psnr_formula():
    ref = np.zeros((10, 10))
    ref[0, 0] = 1.0
    rec = ref + 1e-2  # MSE exactly 1e-4
    assert abs(psnr(rec, ref) - 40.0) < 1e-9
    assert psnr(ref, ref) == math.inf


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 2 ** 32 - 1))
def test_psnr_scale_invariant(c, seed):
    r = np.random.default_rng(seed)
    rec = PH + 0.05 * r.standard_normal(PH.shape)
    assert abs(psnr(c * rec, c * PH) - psnr(rec, PH)) < 1e-9


def test_psnr_monotone_in_noise(rng):
    z = rng.standard_normal(PH.shape)
    vals = [psnr(PH + s * z, PH) for s in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_psnr_errors():
    with pytest.raises(InvalidReferenceError):
        psnr(PH, np.zeros_like(PH))
    with pytest.raises(ShapeError):
        psnr(PH, PH[:10])


def test_ssim_identity_and_noise(rng):
    assert ssim(PH, PH) == 1.0
    noisy = PH + 2 * PH.std() * rng.standard_normal(PH.shape)
    assert ssim(noisy, PH) < 0.5


def test_ssim_symmetric_option(rng):
    b = PH + 0.1 * rng.standard_normal(PH.shape)
    assert ssim(PH, b, symmetric=True) == pytest.approx(ssim(b, PH, symmetric=True), abs=1e-15)


def test_ssim_against_scikit_image(rng):
    skm = pytest.importorskip("skimage.metrics")
    for s in (0.02, 0.1, 0.3):
        rec = PH + s * rng.standard_normal(PH.shape)
        expected = skm.structural_similarity(rec, PH, data_range=PH.max() - PH.min(),
                                             gaussian_weights=True, sigma=1.5,
                                             use_sample_covariance=False)
        assert abs(ssim(rec, PH) - expected) < 1e-10


def test_ssim_too_small():
    with pytest.raises(InvalidInputError):
        ssim(np.ones((10, 10)), np.ones((10, 10)))


def test_gaussian_window_normalized():
    w = gaussian_window()
    assert w.shape == (11, 11) and abs(w.sum() - 1) < 1e-15


def test_hfen_basics(rng):
    assert hfen(PH, PH) == 0.0
    assert abs(hfen(2 * PH, PH) - 1.0) < 1e-12
    assert abs(log_kernel().sum()) < 1e-12
    rec = PH + 0.05 * rng.standard_normal(PH.shape)
    assert abs(hfen(rec + 3.0, PH + 3.0) - hfen(rec, PH)) < 1e-9
    with pytest.raises(InvalidReferenceError):
        hfen(PH, np.ones_like(PH))
    with pytest.raises(InvalidInputError):
        hfen(np.ones((14, 14)), np.ones((14, 14)))


def test_log_kernel_matches_formula():
    k = log_kernel(15, 1.5)
    # direct evaluation at one off-center tap
    c = np.arange(15) - 7
    g = np.exp(-(c[:, None] ** 2 + c[None, :] ** 2) / 4.5)
    g /= g.sum()
    raw = g * (c[:, None] ** 2 + c[None, :] ** 2 - 4.5) / 1.5 ** 4
    assert abs(k[3, 9] - (raw[3, 9] - raw.mean())) < 1e-15


def test_report_serialization():
    rep = evaluate(PH, PH)
    d = json.loads(rep.to_json())
    assert set(d) == {"psnr_db", "ssim", "hfen", "peak"}
    assert d == {"psnr_db": 99.0, "ssim": 1.0, "hfen": 0.0, "peak": 1.0}
    r2 = MetricReport.from_dict({"psnr_db": 30.5, "ssim": 0.8, "hfen": 0.2, "peak": 1.0})
    assert r2.to_dict()["psnr_db"] == 30.5
