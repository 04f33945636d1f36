"""Perspective transforms of 2-D images.

A transform acts on pixel coordinates ``(x, y, 1)`` with ``x`` the column and
``y`` the row, origin at the top-left pixel (the usual image-warping
convention).  Coefficient layout::

    [[chi_x,  psi_yx, tau_x],
     [psi_xy, chi_y,  tau_y],
     [psi_xz, psi_yz, chi_z]]

followed by a perspective divide by the third coordinate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dft import SpatialImage

EPS_DET = 1e-12
EPS_DIVIDE = 1e-12

COEFFICIENTS = {
    "chi_x": (0, 0), "psi_yx": (0, 1), "tau_x": (0, 2),
    "psi_xy": (1, 0), "chi_y": (1, 1), "tau_y": (1, 2),
    "psi_xz": (2, 0), "psi_yz": (2, 1), "chi_z": (2, 2),
}


class SingularTransformError(ValueError):
    pass


class PointAtInfinityError(ValueError):
    pass


class Interpolation(str, Enum):
    BILINEAR = "bilinear"
    SUM = "sum"


@dataclass(frozen=True)
class PerspectiveTransform:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.shape != (3, 3) or not np.all(np.isfinite(A)):
            raise ValueError("transform must be a finite 3x3 matrix")
        det = np.linalg.det(A)
        if abs(det) <= EPS_DET:
            raise SingularTransformError(f"singular transform, det = {det:.3g}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    def __getattr__(self, name):
        if name in COEFFICIENTS:
            return float(self.A[COEFFICIENTS[name]])
        raise AttributeError(name)

    def __matmul__(self, other: "PerspectiveTransform") -> "PerspectiveTransform":
        return PerspectiveTransform(self.A @ other.A)

    def inverse(self) -> "PerspectiveTransform":
        return PerspectiveTransform(np.linalg.inv(self.A))

    def to_dict(self) -> dict:
        return {k: float(self.A[ij]) for k, ij in COEFFICIENTS.items()}

    def to_json(self) -> str:
        return json.dumps(self.A.ravel().tolist())


@dataclass(frozen=True)
class DecomposedTransform:
    B: np.ndarray
    C: np.ndarray


def build_transform(chi_x=1.0, chi_y=1.0, chi_z=1.0, psi_yx=0.0, psi_xy=0.0,
                    psi_xz=0.0, psi_yz=0.0, tau_x=0.0, tau_y=0.0) -> PerspectiveTransform:
    return PerspectiveTransform([[chi_x, psi_yx, tau_x],
                                 [psi_xy, chi_y, tau_y],
                                 [psi_xz, psi_yz, chi_z]])


def rotation_transform(theta: float, center=None) -> PerspectiveTransform:
    """In-plane rotation by ``theta`` degrees, (x, y) -> (cos x + sin y, cos y - sin x).

    With ``center`` the rotation pivots on that pixel coordinate instead of
    the origin, which puts a compensating translation in the third column.
    """
    c, s = np.cos(np.radians(theta)), np.sin(np.radians(theta))
    R = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    if center is not None:
        cx, cy = center
        T = np.array([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]])
        Ti = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
        R = T @ R @ Ti
    return PerspectiveTransform(R)


def about(transform: PerspectiveTransform, pivot) -> PerspectiveTransform:
    """Conjugate ``transform`` so it acts about ``pivot`` rather than the origin."""
    px, py = pivot
    T = np.array([[1.0, 0.0, px], [0.0, 1.0, py], [0.0, 0.0, 1.0]])
    Ti = np.array([[1.0, 0.0, -px], [0.0, 1.0, -py], [0.0, 0.0, 1.0]])
    return PerspectiveTransform(T @ transform.A @ Ti)


def transform_from_json(text: str) -> PerspectiveTransform:
    """Accept a 9-value row-major list, a 3x3 nested list, or named coefficients."""
    data = json.loads(text)
    if isinstance(data, dict):
        unknown = set(data) - set(COEFFICIENTS) - {"theta"}
        if unknown:
            raise ValueError(f"unknown coefficients: {sorted(unknown)}")
        theta = data.pop("theta", None)
        t = build_transform(**data)
        if theta is not None:
            t = rotation_transform(theta) @ t
        return t
    return PerspectiveTransform(np.asarray(data, dtype=float).reshape(3, 3))


def decompose(t: PerspectiveTransform) -> DecomposedTransform:
    B = t.A.copy()
    C = np.array([B[0, 2], B[1, 2], 0.0])
    B[0, 2] = B[1, 2] = 0.0
    if abs(np.linalg.det(B)) <= EPS_DET:
        raise SingularTransformError("linear part B is singular")
    return DecomposedTransform(B, C)


def recompose(B, C) -> PerspectiveTransform:
    A = np.array(B, dtype=float)
    A[0, 2] += C[0]
    A[1, 2] += C[1]
    return PerspectiveTransform(A)


def solve_point(d: DecomposedTransform, P_prime) -> np.ndarray:
    """P = B^-1 (P' - C), by LU with partial pivoting."""
    return np.linalg.solve(d.B, np.asarray(P_prime, dtype=float) - d.C)


def perspective_divide(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if abs(P[2]) < EPS_DIVIDE:
        raise PointAtInfinityError(f"z' = {P[2]:.3g}")
    return P / P[2]


def apply_point(t: PerspectiveTransform, P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.shape == (2,):
        P = np.append(P, 1.0)
    return perspective_divide(t.A @ P)


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def warp_image(image: SpatialImage, t: PerspectiveTransform,
               scheme: Interpolation | str = Interpolation.BILINEAR,
               fill_value: float | None = None) -> SpatialImage:
    """Resample ``image`` under ``t``.

    Bilinear: inverse mapping; each output pixel reads the source at
    A^-1 (x, y, 1) after the divide.  Neighbours outside the grid read the fill.
    Sum: forward splatting; each source pixel is added into the output bin its
    image lands in (round half away from zero).  Unhit bins hold the fill.
    """
    scheme = Interpolation(scheme)
    fill = image.fill_value if fill_value is None else fill_value
    f = image.samples
    N, M = f.shape
    rows, cols = np.mgrid[0:N, 0:M].astype(float)
    P = np.stack([cols.ravel(), rows.ravel(), np.ones(M * N)])

    if scheme is Interpolation.BILINEAR:
        Q = np.linalg.inv(t.A) @ P
        if np.any(np.abs(Q[2]) < EPS_DIVIDE):
            raise PointAtInfinityError("output grid maps through the horizon")
        x, y = Q[0] / Q[2], Q[1] / Q[2]
        x0, y0 = np.floor(x).astype(int), np.floor(y).astype(int)
        fx, fy = x - x0, y - y0

        def read(r, c):
            ok = (r >= 0) & (r < N) & (c >= 0) & (c < M)
            out = np.full(r.shape, fill, dtype=float)
            out[ok] = f[r[ok], c[ok]]
            return out

        g = (read(y0, x0) * (1 - fx) * (1 - fy) + read(y0, x0 + 1) * fx * (1 - fy)
             + read(y0 + 1, x0) * (1 - fx) * fy + read(y0 + 1, x0 + 1) * fx * fy)
        return SpatialImage(g.reshape(N, M), image.fill_value)

    Q = t.A @ P
    if np.any(np.abs(Q[2]) < EPS_DIVIDE):
        raise PointAtInfinityError("source grid maps through the horizon")
    c = _round_half_away(Q[0] / Q[2]).astype(int)
    r = _round_half_away(Q[1] / Q[2]).astype(int)
    ok = (r >= 0) & (r < N) & (c >= 0) & (c < M)
    out = np.zeros((N, M))
    hit = np.zeros((N, M), dtype=bool)
    # sequential accumulation in raster order keeps the sum deterministic
    np.add.at(out, (r[ok], c[ok]), f.ravel()[ok])
    hit[r[ok], c[ok]] = True
    out[~hit] = fill
    return SpatialImage(out, image.fill_value)
