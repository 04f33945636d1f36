import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_dft
from sftpair.dft import (ComplexSpectrum, FrequencyPeak, SpatialImage, UndefinedPhaseError,
                         center_spectrum, dft_forward, dft_inverse, display_magnitude,
                         magnitude, normalize_minmax, phase, read_image_csv, read_pgm,
                         read_spectrum_csv, uncenter_spectrum, write_image_csv, write_pgm,
                         write_spectrum_csv)
from sftpair.pattern import base_pattern_spec, encode_peaks

small_images = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda s: arrays(float, s, elements=st.floats(-1e3, 1e3, allow_nan=False)))


def test_single_sample():
    F = dft_forward(SpatialImage([[3.5]]))
    assert F.samples.shape == (1, 1)
    assert F.samples[0, 0] == pytest.approx(3.5 + 0j)


def test_constant_image_only_dc():
    F = dft_forward(SpatialImage(np.full((6, 9), 2.0))).samples.copy()
    assert F[0, 0] == pytest.approx(2.0 * 54)
    F[0, 0] = 0
    assert np.max(np.abs(F)) < 1e-9


def test_rejects_empty():
    with pytest.raises(ValueError):
        dft_forward(np.zeros((0, 4)))


@pytest.mark.parametrize("shape", [(5, 7), (6, 4), (8, 8), (7, 3)])
def test_direct_matches_naive_oracle(shape):
    f = np.random.default_rng(1).normal(size=shape)
    got = center_spectrum(dft_forward(f)).samples
    assert np.max(np.abs(got - naive_dft(f))) < 1e-9


@pytest.mark.parametrize("shape", [(25, 25), (24, 25), (32, 32), (1, 9), (11, 2)])
def test_fast_path_matches_direct(shape):
    f = np.random.default_rng(2).normal(size=shape) * 50
    d = dft_forward(f).samples
    q = dft_forward(f, method="fft").samples
    assert np.max(np.abs(d - q)) < 1e-9
    back = dft_inverse(dft_forward(f), method="fft").samples
    assert np.max(np.abs(back - f)) < 1e-9


def test_encoded_pattern_against_naive_oracle():
    img = encode_peaks(base_pattern_spec())
    m = np.abs(naive_dft(img.samples))
    for u, v in [(6, 6), (-6, -6), (6, -6), (-6, 6)]:
        assert m[v + 12, u + 12] == pytest.approx(10000, abs=1e-6)
        m[v + 12, u + 12] = 0
    assert m.max() <= 1e-6


def test_inverse_of_dc_only():
    F = np.zeros((4, 5), complex)
    F[0, 0] = 20
    assert np.allclose(dft_inverse(ComplexSpectrum(F)).samples, 1.0, atol=1e-12)


def test_inverse_rejects_centered():
    with pytest.raises(ValueError):
        dft_inverse(center_spectrum(dft_forward(np.ones((3, 3)))))


def test_inverse_reports_residual():
    F = np.zeros((4, 4), complex)
    F[1, 0] = 1j * 16  # not conjugate symmetric
    _, res = dft_inverse(ComplexSpectrum(F), return_residual=True)
    assert res > 0.5


def test_centering_index_arithmetic():
    f = np.random.default_rng(3).normal(size=(25, 25))
    U = dft_forward(f)
    C = center_spectrum(U)
    assert C.samples[12, 12] == U.samples[0, 0]
    assert C.at(6, 6) == U.samples[6, 6]
    assert C.at(-6, -6) == U.samples[19, 19]
    assert np.array_equal(uncenter_spectrum(C).samples, U.samples)


def test_centering_even_grid_is_half_period_shift():
    f = np.random.default_rng(4).normal(size=(8, 6))
    U = dft_forward(f)
    twice = np.roll(center_spectrum(U).samples, (4, 3), axis=(0, 1))
    assert np.array_equal(twice, U.samples)


def test_modulated_image_centers_spectrum():
    # multiplying by (-1)^(x+y) moves ZF to the middle bin on even grids
    f = np.random.default_rng(5).normal(size=(8, 8))
    r, c = np.mgrid[0:8, 0:8]
    mod = dft_forward(f * (-1.0) ** (r + c)).samples
    assert np.allclose(mod, center_spectrum(dft_forward(f)).samples, atol=1e-9)


def test_center_flag_guards():
    U = dft_forward(np.ones((3, 3)))
    with pytest.raises(ValueError):
        uncenter_spectrum(U)
    with pytest.raises(ValueError):
        center_spectrum(center_spectrum(U))


def test_magnitude_values():
    assert magnitude(np.array([3 + 4j, 0j])).tolist() == [5.0, 0.0]


def test_phase_values():
    S = ComplexSpectrum(np.array([[1 + 0j, 1j, -1 + 0j]]))
    assert phase(S, 0, 0) == 0.0
    assert phase(S, 1, 0) == pytest.approx(90.0)
    assert phase(S, -1, 0) == -180.0  # half-open range


def test_phase_undefined_on_empty_bin():
    S = ComplexSpectrum(np.zeros((3, 3)))
    with pytest.raises(UndefinedPhaseError):
        phase(S, 1, 1)


def test_phase_of_base_pattern_is_zero():
    S = center_spectrum(dft_forward(encode_peaks(base_pattern_spec())))
    for u, v in [(6, 6), (-6, -6), (6, -6), (-6, 6)]:
        assert abs(phase(S, u, v)) < 1e-9


def test_bounds_checked():
    S = center_spectrum(dft_forward(np.ones((25, 25))))
    with pytest.raises(IndexError):
        S.at(13, 0)
    S.at(-12, 12)


def test_normalize():
    assert normalize_minmax(np.array([0.0, 5.0, 10.0])).tolist() == [0.0, 127.5, 255.0]
    assert normalize_minmax(np.full(4, 7.0), 3, 9).tolist() == [3.0] * 4
    with pytest.raises(ValueError):
        normalize_minmax(np.ones(2), 5, 5)


def test_display_magnitude_zeroes_zf():
    img = encode_peaks(base_pattern_spec()).samples + 100.0
    d = display_magnitude(dft_forward(img))
    assert d[12, 12] == 0.0
    assert d.max() == pytest.approx(255.0)
    # v points up: peak (6, 6) is drawn six rows above the middle
    assert d[12 - 6, 12 + 6] == pytest.approx(255.0)


def test_image_validation():
    with pytest.raises(ValueError):
        SpatialImage([[np.nan]])
    with pytest.raises(ValueError):
        SpatialImage(np.ones(3))
    with pytest.raises(ValueError):
        FrequencyPeak(1, 1, -1.0)


def test_serialization_round_trips(tmp_path):
    img = SpatialImage(np.random.default_rng(6).normal(size=(5, 7)))
    write_image_csv(tmp_path / "i.csv", img)
    assert np.array_equal(read_image_csv(tmp_path / "i.csv").samples, img.samples)
    S = center_spectrum(dft_forward(img))
    write_spectrum_csv(tmp_path / "s.csv", S)
    assert np.array_equal(read_spectrum_csv(tmp_path / "s.csv", 7, 5).samples, S.samples)
    g = np.arange(12).reshape(3, 4) * 20.0
    write_pgm(tmp_path / "g.pgm", g)
    assert np.array_equal(read_pgm(tmp_path / "g.pgm"), g)


# ---- properties ----------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(small_images)
def test_round_trip(f):
    back = dft_inverse(dft_forward(f)).samples
    assert np.max(np.abs(back - f)) <= 1e-9 * max(1.0, np.max(np.abs(f)))


@settings(max_examples=60, deadline=None)
@given(small_images)
def test_parseval(f):
    F = dft_forward(f).samples
    lhs = np.sum(f * f)
    rhs = np.sum(np.abs(F) ** 2) / f.size
    assert abs(lhs - rhs) <= 1e-6 * max(lhs, 1e-300) + 1e-12


@settings(max_examples=60, deadline=None)
@given(small_images)
def test_conjugate_symmetry(f):
    F = dft_forward(f).samples
    N, M = F.shape
    mirror = F[(-np.arange(N)) % N][:, (-np.arange(M)) % M]
    scale = max(1.0, np.max(np.abs(F)))
    assert np.max(np.abs(F - np.conj(mirror))) <= 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(small_images, st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(f, a, b):
    g = np.cos(np.arange(f.size).reshape(f.shape))
    lhs = dft_forward(a * f + b * g).samples
    rhs = a * dft_forward(f).samples + b * dft_forward(g).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(rhs)))


@settings(max_examples=40, deadline=None)
@given(small_images, st.integers(-20, 20), st.integers(-20, 20))
def test_magnitude_invariant_under_cyclic_shift(f, dy, dx):
    m0 = magnitude(dft_forward(f))
    m1 = magnitude(dft_forward(np.roll(f, (dy, dx), axis=(0, 1))))
    assert np.max(np.abs(m0 - m1)) <= 1e-9 * max(1.0, m0.max())
