"""Discrete Fourier analysis on small image grids.

Images are stored row-major with row 0 at the top.  Spatially, x runs along
columns and the Cartesian y axis points up, so a pixel at ``row`` sits at
``y = -row (mod N)``.  With that convention the centered spectrum displays
with ``v`` pointing up, and an untranslated cosine pattern has zero phase.

The reference transform is the direct sum, evaluated as two dense DFT-matrix
products (the 2-D kernel is separable).  ``method="fft"`` routes through
``numpy.fft`` and is checked bin-for-bin against the direct path in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

EPS_MAG = 1e-6


class UndefinedPhaseError(ValueError):
    """Raised when a phase is requested at a bin with negligible magnitude."""


@dataclass(frozen=True)
class SpatialImage:
    samples: np.ndarray
    fill_value: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.size == 0:
            raise ValueError(f"image must be a non-empty 2-D grid, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("image samples must be finite")
        if not np.isfinite(self.fill_value):
            raise ValueError("fill_value must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.shape[1]

    @property
    def N(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class ComplexSpectrum:
    """M x N complex grid.

    Uncentered: ``samples[v % N, u % M]``.  Centered: ``samples[v + N//2, u + M//2]``.
    """

    samples: np.ndarray
    centered: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 2 or s.size == 0:
            raise ValueError(f"spectrum must be a non-empty 2-D grid, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.shape[1]

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    def index(self, u: int, v: int) -> tuple[int, int]:
        """Array index (row, col) of Cartesian bin (u, v)."""
        check_bounds(u, v, self.M, self.N)
        if self.centered:
            return v + self.N // 2, u + self.M // 2
        return v % self.N, u % self.M

    def at(self, u: int, v: int) -> complex:
        return complex(self.samples[self.index(u, v)])


@dataclass(frozen=True)
class FrequencyPeak:
    u: float
    v: float
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        object.__setattr__(self, "phase", wrap_degrees(self.phase))


def wrap_degrees(angle):
    """Map degrees into [-180, 180)."""
    out = (np.asarray(angle, dtype=float) + 180.0) % 360.0 - 180.0
    return float(out) if out.ndim == 0 else out


def cartesian_range(size: int) -> tuple[int, int]:
    """Inclusive Cartesian index range for a centered axis of ``size`` bins."""
    lo = -(size // 2)
    return lo, lo + size - 1


def check_bounds(u, v, M: int, N: int) -> None:
    ulo, uhi = cartesian_range(M)
    vlo, vhi = cartesian_range(N)
    if not (ulo <= u <= uhi and vlo <= v <= vhi):
        raise IndexError(f"bin ({u}, {v}) outside centered range [{ulo},{uhi}]x[{vlo},{vhi}]")


def _kernels(M: int, N: int, sign: float):
    # exp(sign*2*pi*i*(u*x/M + v*y/N)) with y = -row
    cols = np.arange(M)
    rows = np.arange(N)
    ku = np.exp(sign * 2j * np.pi * np.outer(cols, cols) / M)
    kv = np.exp(-sign * 2j * np.pi * np.outer(rows, rows) / N)
    return ku, kv


def dft_forward(image: SpatialImage | np.ndarray, method: str = "direct") -> ComplexSpectrum:
    """Forward 2-D DFT, uncentered.

    F(u, v) = sum_x sum_y f(x, y) exp(-2 pi i (u x / M + v y / N)), y = -row.
    """
    f = image.samples if isinstance(image, SpatialImage) else np.asarray(image, dtype=float)
    if f.ndim != 2 or 0 in f.shape:
        raise ValueError(f"cannot transform grid of shape {np.shape(f)}")
    N, M = f.shape
    if method == "direct":
        ku, kv = _kernels(M, N, -1.0)
        F = kv @ f @ ku.T
    elif method == "fft":
        Fr = np.fft.fft2(f)
        F = Fr[(-np.arange(N)) % N, :]
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComplexSpectrum(F, centered=False)


def dft_inverse(spectrum: ComplexSpectrum, method: str = "direct",
                return_residual: bool = False):
    """Inverse of :func:`dft_forward`.  Returns the real part as a SpatialImage.

    With ``return_residual`` also returns max |imag| / max(|f|, 1).
    """
    if spectrum.centered:
        raise ValueError("dft_inverse needs an uncentered spectrum; call uncenter_spectrum first")
    F = spectrum.samples
    N, M = F.shape
    if method == "direct":
        ku, kv = _kernels(M, N, 1.0)
        f = kv @ F @ ku.T / (M * N)
    elif method == "fft":
        f = np.fft.ifft2(F[(-np.arange(N)) % N, :])
    else:
        raise ValueError(f"unknown method {method!r}")
    img = SpatialImage(f.real)
    if return_residual:
        scale = max(float(np.max(np.abs(f.real))), 1.0)
        return img, float(np.max(np.abs(f.imag))) / scale
    return img


def center_spectrum(spectrum: ComplexSpectrum) -> ComplexSpectrum:
    if spectrum.centered:
        raise ValueError("spectrum already centered")
    N, M = spectrum.samples.shape
    return ComplexSpectrum(np.roll(spectrum.samples, (N // 2, M // 2), axis=(0, 1)), True)


def uncenter_spectrum(spectrum: ComplexSpectrum) -> ComplexSpectrum:
    if not spectrum.centered:
        raise ValueError("spectrum is not centered")
    N, M = spectrum.samples.shape
    return ComplexSpectrum(np.roll(spectrum.samples, (-(N // 2), -(M // 2)), axis=(0, 1)), False)


def magnitude(spectrum: ComplexSpectrum | np.ndarray) -> np.ndarray:
    s = spectrum.samples if isinstance(spectrum, ComplexSpectrum) else np.asarray(spectrum)
    return np.hypot(s.real, s.imag)


def phase(spectrum: ComplexSpectrum, u: int, v: int, eps: float = EPS_MAG) -> float:
    """Phase in degrees, [-180, 180), at Cartesian bin (u, v)."""
    z = spectrum.at(u, v)
    if abs(z) < eps:
        raise UndefinedPhaseError(f"|F({u},{v})| = {abs(z):.3g} below {eps:g}")
    return wrap_degrees(np.degrees(np.arctan2(z.imag, z.real)))


def normalize_minmax(image, lo: float = 0.0, hi: float = 255.0) -> np.ndarray:
    """Affine rescale to [lo, hi].  A flat input maps to ``lo``."""
    if not hi > lo:
        raise ValueError("MAX must exceed MIN")
    a = np.asarray(image.samples if isinstance(image, SpatialImage) else image, dtype=float)
    amin, amax = a.min(), a.max()
    if amax == amin:
        return np.full_like(a, lo)
    return lo + (a - amin) * (hi - lo) / (amax - amin)


def display_magnitude(spectrum: ComplexSpectrum) -> np.ndarray:
    """Centered magnitude with the ZF bin zeroed, scaled to 0..255, v pointing up."""
    s = spectrum if spectrum.centered else center_spectrum(spectrum)
    m = magnitude(s)
    m[s.N // 2, s.M // 2] = 0.0
    return normalize_minmax(m)[::-1]


# ---- serialization -------------------------------------------------------

def write_pgm(path, grid) -> None:
    """8-bit binary PGM of an already-normalized grid (values clipped to 0..255)."""
    g = np.clip(np.rint(np.asarray(grid, dtype=float)), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{g.shape[1]} {g.shape[0]}\n255\n".encode("ascii"))
        fh.write(g.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5" or int(fields[3]) > 255:
        raise ValueError("only 8-bit binary PGM is supported")
    w, h = int(fields[1]), int(fields[2])
    pos += 1
    return np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w).astype(float)


def write_image_csv(path, image: SpatialImage) -> None:
    np.savetxt(path, image.samples, delimiter=",", fmt="%.17g")


def read_image_csv(path, fill_value: float = 0.0) -> SpatialImage:
    return SpatialImage(np.loadtxt(path, delimiter=",", ndmin=2), fill_value)


def write_spectrum_csv(path, spectrum: ComplexSpectrum) -> None:
    """Rows of u, v, re, im in centered Cartesian coordinates."""
    s = spectrum if spectrum.centered else center_spectrum(spectrum)
    ulo, uhi = cartesian_range(s.M)
    vlo, vhi = cartesian_range(s.N)
    with open(path, "w") as fh:
        fh.write("u,v,re,im\n")
        for v in range(vlo, vhi + 1):
            for u in range(ulo, uhi + 1):
                z = s.at(u, v)
                fh.write(f"{u},{v},{z.real:.17g},{z.imag:.17g}\n")


def read_spectrum_csv(path, M: int, N: int) -> ComplexSpectrum:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    F = np.zeros((N, M), dtype=complex)
    for u, v, re, im in rows:
        F[int(v) + N // 2, int(u) + M // 2] = re + 1j * im
    return ComplexSpectrum(F, centered=True)
