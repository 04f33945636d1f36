"""Peak detection in magnitude spectra and transform recovery from peaks."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dft import EPS_MAG, ComplexSpectrum, UndefinedPhaseError, magnitude, phase
from .predictor import S3

EPS_CLASS = 0.05


@dataclass(frozen=True)
class PeakDetection:
    u: int
    v: int
    ncc_score: float
    magnitude: float


@dataclass(frozen=True)
class EstimatedTransform:
    kind: str
    coefficients: dict
    residual: float
    H: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "coefficients": self.coefficients,
                "residual": self.residual}


class DegeneratePeaksError(ValueError):
    pass


def impulse_template(size) -> np.ndarray:
    """Odd-sized grid holding one centered impulse."""
    h, w = (size, size) if np.isscalar(size) else size
    if h % 2 == 0 or w % 2 == 0:
        raise ValueError("template dimensions must be odd")
    t = np.zeros((h, w))
    t[h // 2, w // 2] = 1.0
    return t


def default_template(shape) -> np.ndarray:
    """Impulse covering the whole (periodic) spectrum, forced to odd size."""
    N, M = shape
    return impulse_template((N - 1 + N % 2, M - 1 + M % 2))


def zncc_map(mag: np.ndarray, template: np.ndarray, periodic: bool = True) -> np.ndarray:
    """Zero-normalized cross-correlation of ``template`` centred on every bin.

    The spectrum is periodic, so by default windows wrap around the edges and
    every bin gets a score.  With ``periodic=False`` only fully-inside windows
    are scored; the rest read -inf.
    """
    mag = np.asarray(mag, dtype=float)
    th, tw = template.shape
    if th > mag.shape[0] or tw > mag.shape[1]:
        raise ValueError("template larger than the magnitude grid")
    t = template - template.mean()
    tn = np.sqrt((t * t).sum())
    if tn == 0:
        raise ValueError("template is flat")
    src = np.pad(mag, ((th // 2, th // 2), (tw // 2, tw // 2)), mode="wrap") if periodic else mag
    W = sliding_window_view(src, (th, tw))
    D = W - W.mean(axis=(-1, -2), keepdims=True)
    num = np.einsum("ijkl,kl->ij", D, t)
    den = np.sqrt((D * D).sum(axis=(-1, -2))) * tn
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(den > 0, num / den, 0.0)
    if periodic:
        return s
    out = np.full(mag.shape, -np.inf)
    out[th // 2:th // 2 + s.shape[0], tw // 2:tw // 2 + s.shape[1]] = s
    return out


def detect_peaks(mag: np.ndarray, template: np.ndarray | None = None, k: int = 4,
                 radius: int = 1, periodic: bool = True) -> list[PeakDetection]:
    """Top-``k`` ZNCC matches on a centered magnitude grid.

    ``mag[v + N//2, u + M//2]`` holds |F(u, v)|.  Greedy non-maximum
    suppression keeps picks more than ``radius`` bins apart (Chebyshev).  The
    ZF bin never qualifies.  Fewer than ``k`` results come back with a warning.
    """
    mag = np.asarray(mag, dtype=float)
    if k < 1:
        raise ValueError("k must be positive")
    N, M = mag.shape
    if template is None:
        template = default_template(mag.shape)
    score = zncc_map(mag, np.asarray(template, dtype=float), periodic)
    score[N // 2, M // 2] = -np.inf
    rows, cols = np.nonzero(np.isfinite(score))
    order = sorted(zip(-score[rows, cols], cols - M // 2, rows - N // 2))
    picks: list[PeakDetection] = []
    for neg, u, v in order:
        if all(max(abs(u - p.u), abs(v - p.v)) > radius for p in picks):
            picks.append(PeakDetection(int(u), int(v), float(-neg),
                                       float(mag[v + N // 2, u + M // 2])))
            if len(picks) == k:
                break
    if len(picks) < k:
        warnings.warn(f"only {len(picks)} of {k} peaks found", RuntimeWarning, stacklevel=2)
    return picks


def write_detections_csv(path, detections) -> None:
    with open(path, "w") as fh:
        fh.write("u,v,ncc,magnitude\n")
        for d in detections:
            fh.write(f"{d.u},{d.v},{d.ncc_score:.6g},{d.magnitude:.6g}\n")


# ---- transform estimation --------------------------------------------------

def fit_frequency_map(before, after) -> tuple[np.ndarray, float]:
    """Least-squares 2x2 H with after ~ H before; returns (H, rms residual)."""
    P = np.asarray(before, dtype=float)
    Q = np.asarray(after, dtype=float)
    if P.shape != Q.shape or P.ndim != 2 or P.shape[1] != 2:
        raise ValueError("before and after must be equal-length lists of (u, v)")
    if len(P) < 3:
        raise DegeneratePeaksError("need at least three correspondences")
    if np.linalg.matrix_rank(P, tol=1e-9) < 2:
        raise DegeneratePeaksError("correspondences are collinear")
    X, *_ = np.linalg.lstsq(P, Q, rcond=None)
    H = X.T
    r = Q - P @ X
    return H, float(np.sqrt((r * r).sum(axis=1).mean()))


def _spatial_from_H(H: np.ndarray) -> np.ndarray:
    S = S3[:2, :2]
    return S @ np.linalg.inv(H).T @ S


def estimate_affine(before, after, eps_class: float = EPS_CLASS) -> EstimatedTransform:
    """Recover the spatial linear part from peak correspondences.

    The classification picks the simplest family whose off-pattern entries
    are all below ``eps_class``.  A uniform scale of x and y cannot be told
    apart from ``chi_z = 1 / chi``; the uniform case reports both.
    """
    H, residual = fit_frequency_map(before, after)
    B = _spatial_from_H(H)
    (a, b), (c, d) = B
    coeffs = {"chi_x": float(a), "psi_yx": float(b), "psi_xy": float(c), "chi_y": float(d)}
    theta = math.degrees(math.atan2(b - c, a + d))
    rot = math.hypot(a + d, b - c) / 2.0
    if np.allclose(B, np.eye(2), atol=eps_class):
        kind, named = "identity", {}
    elif abs(b) < eps_class and abs(c) < eps_class:
        if abs(a - d) < eps_class:
            kind, named = "uniform_scale", {"chi_x": float(a), "chi_y": float(d),
                                            "chi_z": float(2.0 / (a + d))}
        else:
            kind, named = "scale", {"chi_x": float(a), "chi_y": float(d)}
    elif abs(a - 1) < eps_class and abs(d - 1) < eps_class:
        kind, named = "shear", {"psi_yx": float(b), "psi_xy": float(c)}
    elif abs(a - d) < eps_class and abs(b + c) < eps_class and abs(rot - 1) < eps_class:
        kind, named = "rotation", {"theta": theta}
    else:
        kind, named = "affine", dict(coeffs)
    named = {**named, **{f"raw_{k}": v for k, v in coeffs.items()}}
    return EstimatedTransform(kind, named, residual, H, B)


# ---- phase analysis ------------------------------------------------------

def measure_phase_set(spectrum: ComplexSpectrum, peaks, eps: float = EPS_MAG,
                      strict: bool = True) -> list[float]:
    """Phase in degrees at each (u, v).

    Bins whose magnitude is below ``eps`` (for instance after destructive
    interference) raise, or read NaN with ``strict=False``.
    """
    out = []
    for u, v in peaks:
        try:
            out.append(phase(spectrum, int(u), int(v), eps))
        except UndefinedPhaseError:
            if strict:
                raise
            out.append(float("nan"))
    return out


def estimate_translation(phases, peaks, M: int, N: int) -> tuple[int, int]:
    """Integer window shift (tx, ty) in [0, M) x [0, N) explaining ``phases``.

    Solves phase = 360 (u tx / M + v ty / N) mod 360 in the least circular
    error sense over the whole period.  Needs two peaks with independent
    (u/M, v/N) directions.
    """
    P = np.array([(u, v) for (u, v), ph in zip(peaks, phases) if np.isfinite(ph)], dtype=float)
    ph = np.array([p for p in phases if np.isfinite(p)], dtype=float)
    if len(P) < 2 or np.linalg.matrix_rank(P, tol=1e-9) < 2:
        raise DegeneratePeaksError("translation is underdetermined by these peaks")
    tx, ty = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    pred = 360.0 * (np.multiply.outer(tx, P[:, 0]) / M + np.multiply.outer(ty, P[:, 1]) / N)
    err = np.abs((pred - ph + 180.0) % 360.0 - 180.0).sum(axis=-1)
    i, j = np.unravel_index(np.argmin(err), err.shape)
    return int(tx[i, j]), int(ty[i, j])


def assign_peaks(reference, detections) -> list:
    """Pair each reference coordinate with a distinct detection, minimising total distance."""
    ref = [tuple(map(float, r)) for r in reference]
    det = list(detections)
    if not det:
        return [None] * len(ref)
    best, best_cost = None, math.inf
    n = min(len(ref), len(det))
    for slots in itertools.permutations(range(len(ref)), n):
        for picks in itertools.combinations(range(len(det)), n):
            cost = sum(math.hypot(ref[i][0] - det[j].u, ref[i][1] - det[j].v)
                       for i, j in zip(slots, picks))
            if cost < best_cost - 1e-12:
                best, best_cost = (slots, picks), cost
    out = [None] * len(ref)
    for i, j in zip(*best):
        out[i] = det[j]
    return out


def spectrum_magnitude(spectrum: ComplexSpectrum) -> np.ndarray:
    """Centered magnitude grid with ``[v + N//2, u + M//2]`` indexing."""
    if not spectrum.centered:
        raise ValueError("expected a centered spectrum")
    return magnitude(spectrum)
