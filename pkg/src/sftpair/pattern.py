"""Spatial patterns built from prescribed spectral peaks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dft import (ComplexSpectrum, FrequencyPeak, SpatialImage, check_bounds,
                  dft_inverse, uncenter_spectrum)

BASE_PEAKS = ((6, 6), (-6, -6), (6, -6), (-6, 6))
BASE_AMPLITUDE = 10000.0


@dataclass(frozen=True)
class PatternSpec:
    M: int
    N: int
    peaks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.M <= 0 or self.N <= 0:
            raise ValueError("pattern dimensions must be positive")
        peaks = tuple(self.peaks)
        object.__setattr__(self, "peaks", peaks)
        seen = {}
        for p in peaks:
            if p.u != int(p.u) or p.v != int(p.v):
                raise ValueError(f"peak ({p.u}, {p.v}) is not on an integer bin")
            check_bounds(p.u, p.v, self.M, self.N)
            seen[self._key(p.u, p.v)] = p
        for p in peaks:
            q = seen.get(self._key(-p.u, -p.v))
            if q is None or not np.isclose(q.amplitude, p.amplitude) or \
                    not _opposite(q.phase, p.phase):
                raise ValueError(f"peak ({p.u}, {p.v}) has no conjugate partner; "
                                 "list both (u, v) and (-u, -v)")

    def _key(self, u, v):
        return int(u) % self.M, int(v) % self.N

    def to_json(self) -> str:
        return json.dumps({"M": self.M, "N": self.N,
                           "peaks": [{"u": p.u, "v": p.v, "amp": p.amplitude,
                                      "phase_deg": p.phase} for p in self.peaks]})

    @classmethod
    def from_json(cls, text: str) -> "PatternSpec":
        d = json.loads(text)
        peaks = [FrequencyPeak(p["u"], p["v"], p.get("amp", BASE_AMPLITUDE), p.get("phase_deg", 0.0))
                 for p in d.get("peaks", [])]
        return cls(int(d["M"]), int(d["N"]), tuple(peaks))


def _opposite(a, b) -> bool:
    d = (a + b + 180.0) % 360.0 - 180.0
    return abs(d) < 1e-9


def base_pattern_spec(M: int = 25, N: int = 25, amplitude: float = BASE_AMPLITUDE) -> PatternSpec:
    return PatternSpec(M, N, tuple(FrequencyPeak(u, v, amplitude) for u, v in BASE_PEAKS))


def encode_peaks(spec: PatternSpec) -> SpatialImage:
    """Real image whose DFT holds exactly the requested peaks.

    The fill value is the midpoint of the resulting intensity range, so blank
    regions after a warp read as mid grey.
    """
    F = np.zeros((spec.N, spec.M), dtype=complex)
    for p in spec.peaks:
        # a self-conjugate bin (Nyquist or ZF) must stay real
        F[int(p.v) + spec.N // 2, int(p.u) + spec.M // 2] += \
            p.amplitude * np.exp(1j * np.radians(p.phase))
    img, residual = dft_inverse(uncenter_spectrum(ComplexSpectrum(F, centered=True)),
                                return_residual=True)
    if residual > 1e-9:
        raise ValueError(f"encoded pattern is not real (residual {residual:.3g})")
    s = img.samples
    return SpatialImage(s, 0.5 * (float(s.max()) + float(s.min())))


def tile_periodic(image: SpatialImage, kx: int, ky: int) -> SpatialImage:
    if kx < 1 or ky < 1:
        raise ValueError("tiling factors must be positive")
    return SpatialImage(np.tile(image.samples, (ky, kx)), image.fill_value)


def crop_window(image: SpatialImage, origin, size) -> SpatialImage:
    """Sub-grid with top-left pixel at ``origin = (x0, y0)`` (column, row)."""
    x0, y0 = (int(o) for o in origin)
    M, N = (int(s) for s in size)
    if x0 < 0 or y0 < 0 or M <= 0 or N <= 0 or x0 + M > image.M or y0 + N > image.N:
        raise IndexError(f"window at {origin} of size {size} leaves the {image.M}x{image.N} image")
    return SpatialImage(image.samples[y0:y0 + N, x0:x0 + M].copy(), image.fill_value)
