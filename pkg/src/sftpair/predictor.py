"""Prediction of Fourier peak motion under spatial transforms.

For a transform A = B + C (linear part B, translation column C) the encoded
frequency row vector maps as ``[u v w] B^-1`` followed by a divide by the new
``w``.  Transforms act on pixel coordinates whose y axis points down, while
the spectrum's v axis points up, so the Cartesian map is ``S B^-T S`` with
``S = diag(1, -1, 1)``.

Translation enters only through the phase factor.  Here ``C`` is read as the
displacement of the sampling window in Cartesian axes (x right, y up), which
is how the tiling experiments shift the view: a window moved by C advances the
phase at (u, v) by ``360 (u' C_x / M + v' C_y / N)`` degrees, with (u', v')
the mapped frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dft import FrequencyPeak, cartesian_range, wrap_degrees
from .geometry import PerspectiveTransform, SingularTransformError, decompose

S3 = np.diag([1.0, -1.0, 1.0])


def round_half_away(x):
    """Round to the nearest integer, halves away from zero."""
    return math.copysign(math.floor(abs(x) + 0.5), x)


@dataclass(frozen=True)
class FrequencyMap:
    H: np.ndarray      # Cartesian 3x3 action on column vectors (u, v, 1)
    C: np.ndarray      # sampling-window displacement (x, y, 0)
    M: int
    N: int
    D: int = 1

    def map(self, u: float, v: float) -> tuple[float, float]:
        q = self.H @ np.array([u, v, 1.0])
        if abs(q[2]) < 1e-12:
            raise SingularTransformError(f"frequency ({u}, {v}) maps to infinity")
        return float(q[0] / q[2]), float(q[1] / q[2])

    def E(self, u: float, v: float) -> np.ndarray:
        """Periodicity-scaled mapped frequency."""
        up, vp = self.map(u, v)
        return np.array([up / self.M, vp / self.N, 0.0])

    def phase_shift(self, u: float, v: float) -> float:
        """360 (E . C) in degrees, reduced to [0, 360)."""
        return float((360.0 * (self.E(u, v) @ self.C)) % 360.0)

    def phase_factor(self, u: float, v: float) -> complex:
        return complex(np.exp(2j * np.pi * (self.E(u, v) @ self.C)))


@dataclass(frozen=True)
class PredictedPeak:
    peak: FrequencyPeak
    binned: tuple[int, int]
    aliased: bool


def build_frequency_map(t: PerspectiveTransform, M: int, N: int, D: int = 1,
                        translation: str = "window") -> FrequencyMap:
    """Frequency map of ``t`` on an M x N grid.

    ``translation="window"`` reads t's translation column as the sampling
    window displacement (Cartesian, y up).  ``"content"`` reads it as image
    content moved in pixel coordinates, which is what :func:`warp_image` does;
    moving content by (tx, ty) pixels equals moving the window by (-tx, ty).
    """
    if D != 1:
        raise ValueError("only D = 1 is supported")
    d = decompose(t)
    H = S3 @ np.linalg.inv(d.B).T @ S3
    if translation == "window":
        C = d.C.copy()
    elif translation == "content":
        C = np.array([-d.C[0], d.C[1], 0.0])
    else:
        raise ValueError(f"unknown translation mode {translation!r}")
    return FrequencyMap(H, C, M, N, D)


def _wrap_into(x: float, size: int) -> tuple[float, bool]:
    lo, hi = cartesian_range(size)
    if lo - 0.5 <= x < hi + 0.5:
        return x, False
    return (x - lo) % size + lo, True


def predict_peak(fmap: FrequencyMap, peak: FrequencyPeak) -> PredictedPeak:
    """Continuous prediction, its integer bin, and whether it left the grid."""
    up, vp = fmap.map(peak.u, peak.v)
    up, au = _wrap_into(up, fmap.M)
    vp, av = _wrap_into(vp, fmap.N)
    out = FrequencyPeak(up, vp, peak.amplitude, peak.phase + fmap.phase_shift(peak.u, peak.v))
    return PredictedPeak(out, bin_coordinate(up, vp, fmap.M, fmap.N), au or av)


def bin_coordinate(u: float, v: float, M: int, N: int) -> tuple[int, int]:
    lo_u, hi_u = cartesian_range(M)
    lo_v, hi_v = cartesian_range(N)
    bu, bv = int(round_half_away(u)), int(round_half_away(v))
    # a half-bin overshoot at the edge wraps onto the opposite edge
    if bu > hi_u:
        bu -= M
    if bv > hi_v:
        bv -= N
    return bu, bv


# ---- closed-form pairs ---------------------------------------------------

def pair_rotation(theta: float, peak: FrequencyPeak) -> FrequencyPeak:
    c, s = math.cos(math.radians(theta)), math.sin(math.radians(theta))
    return FrequencyPeak(c * peak.u - s * peak.v, s * peak.u + c * peak.v,
                         peak.amplitude, peak.phase)


def pair_scale(chi_x: float, chi_y: float, chi_z: float, peak: FrequencyPeak) -> FrequencyPeak:
    return FrequencyPeak(peak.u * chi_z / chi_x, peak.v * chi_z / chi_y,
                         peak.amplitude, peak.phase)


def pair_shear(psi_yx: float, psi_xy: float, peak: FrequencyPeak) -> FrequencyPeak:
    det = 1.0 - psi_yx * psi_xy
    if abs(det) < 1e-12:
        raise SingularTransformError("shear with psi_yx * psi_xy = 1 is singular")
    return FrequencyPeak((peak.u + psi_xy * peak.v) / det, (peak.v + psi_yx * peak.u) / det,
                         peak.amplitude, peak.phase)


# ---- special cases -------------------------------------------------------

def predict_translation_phase(C, dims, peak) -> float:
    """Phase advance in degrees, [0, 360), for a window displaced by C = (tx, ty)."""
    M, N = dims[0], dims[1]
    u, v = (peak.u, peak.v) if isinstance(peak, FrequencyPeak) else peak
    return float((360.0 * (u * C[0] / M + v * C[1] / N)) % 360.0)


def predict_warp(psi_xz: float, psi_yz: float, peak: FrequencyPeak,
                 anchor=None, shape=(25, 25)) -> FrequencyPeak:
    """Single-point warp estimate.

    The warp rescales the neighbourhood of pixel ``anchor = (x, y)`` by
    ``s = psi_xz x + psi_yz y + 1``, so frequencies there grow by s.  This is a
    local estimate with no knowledge of neighbouring pixels; over a full image
    the spectrum smears and the estimate drifts from simulation as the
    coefficients grow.  The default anchor is the midpoint of an M x N grid.
    """
    if anchor is None:
        anchor = ((shape[0] - 1) / 2.0, (shape[1] - 1) / 2.0)
    x, y = anchor
    s = psi_xz * x + psi_yz * y + 1.0
    if abs(s) < 1e-12:
        raise ZeroDivisionError("warp denominator vanishes at the anchor")
    return FrequencyPeak(peak.u * s, peak.v * s, peak.amplitude, peak.phase)


def predict_warp_homogeneous(psi_xz: float, psi_yz: float, peak: FrequencyPeak) -> FrequencyPeak:
    """Warp estimate from the homogeneous frequency row ``[u v 1] B``.

    In the pixel frame this adds (psi_xz, psi_yz) to the frequency; with v
    pointing up that is (u + psi_xz, v - psi_yz).
    """
    q = S3 @ (np.array([[1.0, 0.0, psi_xz], [0.0, 1.0, psi_yz], [0.0, 0.0, 1.0]])
              @ (S3 @ np.array([peak.u, peak.v, 1.0])))
    return FrequencyPeak(float(q[0] / q[2]), float(q[1] / q[2]), peak.amplitude, peak.phase)


def transform_phase(fmap: FrequencyMap, peak: FrequencyPeak) -> float:
    """Predicted phase in [-180, 180) of ``peak`` after the transform."""
    return wrap_degrees(peak.phase + fmap.phase_shift(peak.u, peak.v))
