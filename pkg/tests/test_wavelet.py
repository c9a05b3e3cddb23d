"""DWT filter-bank tests: hand cases, naive oracle, reconstruction, energy."""

import math

import numpy as np
import pytest

from csiwave.errors import InvalidValue
from csiwave.wavelet import WaveletPyramid, WaveletSpec, dwt_pyramid, dwt_step, idwt_step


def naive_step(x, spec):
    """Direct double-loop convolution + downsample with periodic extension."""
    length = len(x)
    half = length // 2
    approx = np.zeros(half)
    detail = np.zeros(half)
    for k in range(half):
        for m, (hp, hq) in enumerate(zip(spec.h_phi, spec.h_psi)):
            idx = (2 * k + m) % length
            approx[k] += hp * x[idx]
            detail[k] += hq * x[idx]
    return approx, detail


class TestSpecs:
    def test_haar_values(self):
        haar = WaveletSpec.haar()
        s = 1 / math.sqrt(2)
        np.testing.assert_allclose(haar.h_phi, [s, s], atol=1e-15)
        np.testing.assert_allclose(haar.h_psi, [s, -s], atol=1e-15)

    def test_db2_invariants(self):
        db2 = WaveletSpec.db2()
        assert abs(db2.h_phi.sum() - math.sqrt(2)) < 1e-12
        assert abs(np.linalg.norm(db2.h_phi) - 1.0) < 1e-12
        signs = np.array([1.0, -1.0, 1.0, -1.0])
        np.testing.assert_allclose(db2.h_psi, signs * db2.h_phi[::-1], atol=1e-12)

    def test_by_name(self):
        assert WaveletSpec.by_name("haar").name == "haar"
        assert WaveletSpec.by_name("db2").name == "db2"
        with pytest.raises(InvalidValue):
            WaveletSpec.by_name("db4")

    def test_bad_filters_rejected(self):
        with pytest.raises(InvalidValue):
            WaveletSpec("x", np.array([1.0, 1.0]), np.array([1.0, -1.0]))


class TestDwtStep:
    def test_haar_constant(self):
        approx, detail = dwt_step(np.full(8, 3.0), WaveletSpec.haar())
        np.testing.assert_allclose(approx, 3.0 * math.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(detail, 0.0, atol=1e-12)

    def test_haar_hand_case(self):
        approx, detail = dwt_step([1.0, 2.0, 3.0, 4.0], WaveletSpec.haar())
        s2 = math.sqrt(2)
        np.testing.assert_allclose(approx, [3 / s2, 7 / s2], atol=1e-12)
        np.testing.assert_allclose(detail, [-1 / s2, -1 / s2], atol=1e-12)

    @pytest.mark.parametrize("name", ["haar", "db2"])
    def test_matches_naive_oracle(self, name):
        spec = WaveletSpec.by_name(name)
        rng = np.random.default_rng(3)
        for length in (8, 12, 30, 64):
            x = rng.normal(size=length)
            a1, d1 = dwt_step(x, spec)
            a2, d2 = naive_step(x, spec)
            np.testing.assert_allclose(a1, a2, atol=1e-12)
            np.testing.assert_allclose(d1, d2, atol=1e-12)

    @pytest.mark.parametrize("name", ["haar", "db2"])
    def test_energy_conservation(self, name):
        spec = WaveletSpec.by_name(name)
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.normal(size=64)
            a, d = dwt_step(x, spec)
            assert np.sum(x**2) == pytest.approx(np.sum(a**2) + np.sum(d**2), abs=1e-9)

    def test_odd_length_rejected(self):
        with pytest.raises(InvalidValue):
            dwt_step(np.ones(7), WaveletSpec.haar())

    def test_haar_shift_by_two_covariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=32)
        spec = WaveletSpec.haar()
        a1, _ = dwt_step(x, spec)
        a2, _ = dwt_step(np.roll(x, 2), spec)
        np.testing.assert_allclose(a2, np.roll(a1, 1), atol=1e-12)


class TestIdwtStep:
    @pytest.mark.parametrize("name", ["haar", "db2"])
    def test_perfect_reconstruction(self, name):
        spec = WaveletSpec.by_name(name)
        rng = np.random.default_rng(6)
        for length in (8, 64, 126, 512):
            x = rng.normal(size=length)
            a, d = dwt_step(x, spec)
            np.testing.assert_allclose(idwt_step(a, d, spec), x, atol=1e-9)

    def test_zero_inputs(self):
        out = idwt_step(np.zeros(4), np.zeros(4), WaveletSpec.db2())
        np.testing.assert_array_equal(out, np.zeros(8))

    def test_linearity_split(self):
        spec = WaveletSpec.db2()
        rng = np.random.default_rng(7)
        a, d = rng.normal(size=(2, 16))
        joint = idwt_step(a, d, spec)
        split = idwt_step(a, np.zeros(16), spec) + idwt_step(np.zeros(16), d, spec)
        np.testing.assert_allclose(joint, split, atol=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidValue):
            idwt_step(np.ones(4), np.ones(5), WaveletSpec.haar())


class TestPyramid:
    def test_lengths_halve(self):
        rng = np.random.default_rng(8)
        pyr = dwt_pyramid(rng.normal(size=(2, 256)), 3, WaveletSpec.haar())
        assert [a.shape for a in pyr.approx] == [(2, 128), (2, 64), (2, 32)]

    def test_constant_scaling(self):
        pyr = dwt_pyramid(np.full((1, 64), 5.0), 3, WaveletSpec.haar())
        for j, level in enumerate(pyr.approx, start=1):
            np.testing.assert_allclose(level, 5.0 * 2 ** (j / 2), atol=1e-9)

    @pytest.mark.parametrize("name", ["haar", "db2"])
    def test_composition_oracle(self, name):
        spec = WaveletSpec.by_name(name)
        rng = np.random.default_rng(9)
        series = rng.normal(size=(2, 64))
        pyr = dwt_pyramid(series, 3, spec)
        for ch in range(2):
            current = series[ch]
            for j in range(3):
                current, _ = naive_step(current, spec)
                np.testing.assert_allclose(pyr.approx[j][ch], current, atol=1e-9)

    def test_linearity(self):
        spec = WaveletSpec.haar()
        rng = np.random.default_rng(10)
        x, y = rng.normal(size=(2, 1, 32))
        pa = dwt_pyramid(2 * x + 3 * y, 2, spec)
        px = dwt_pyramid(x, 2, spec)
        py = dwt_pyramid(y, 2, spec)
        for j in range(2):
            np.testing.assert_allclose(
                pa.approx[j], 2 * px.approx[j] + 3 * py.approx[j], atol=1e-10
            )

    def test_energy_telescoping(self):
        # ||x||^2 = ||approx_J||^2 + sum details via repeated steps
        spec = WaveletSpec.db2()
        rng = np.random.default_rng(11)
        x = rng.normal(size=128)
        total = np.sum(x**2)
        detail_energy = 0.0
        current = x
        for _ in range(3):
            current, d = dwt_step(current, spec)
            detail_energy += np.sum(d**2)
        recon_energy = np.sum(current**2) + detail_energy
        assert abs(total - recon_energy) / total < 1e-8

    def test_indivisible_length_rejected(self):
        with pytest.raises(InvalidValue):
            dwt_pyramid(np.ones((2, 60)), 3, WaveletSpec.haar())

    def test_pyramid_type_validation(self):
        with pytest.raises(InvalidValue):
            WaveletPyramid(levels=2, approx=(np.ones((2, 8)),), channels=2)
        with pytest.raises(InvalidValue):
            WaveletPyramid(
                levels=2, approx=(np.ones((2, 8)), np.ones((2, 5))), channels=2
            )
