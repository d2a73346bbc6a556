"""Discrete second-derivative (Lambda) reconstruction.

The reconstruction at a point x is the backprojection

    f_eps(x) = -(1/(4 pi eps^2)) * sum_k sum_j
               phi_c''((alpha_k . x - p_j)/eps) * data[k, j] * dalpha

over the full circle of sampled directions; the inner sum has at most
seven nonzero terms because phi_c'' is supported on [-3, 3]. The 1/(4 pi)
weight is the full-circle form of the usual half-range -1/(2 pi): the
integrand is pi-periodic in the direction, so the circle counts each line
twice. Accumulation order is fixed (k ascending, then the seven j
offsets ascending), so results are bitwise deterministic and chunking
points across threads cannot change them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import Sinogram
from .kernel import Kernel
from .phantom import EdgeSite
from .transition import lt_edge_response

__all__ = [
    "ReconGrid",
    "EdgeProfile",
    "lambda_recon_point",
    "lambda_recon_points",
    "lambda_recon_grid",
    "edge_profile",
    "write_pgm16",
]

THREADS_ENV = "LAMTOMO_THREADS"


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        return max(1, n)
    return min(os.cpu_count() or 1, 4)


@dataclass
class ReconGrid:
    """Rectangular lattice of pixel centers with reconstructed values."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.size < 1 or self.y.size < 1:
            raise ValueError("grid must contain at least one pixel per axis")
        if self.values is None:
            self.values = np.zeros((self.y.size, self.x.size))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.y.size, self.x.size):
            raise ValueError("values shape must be (len(y), len(x))")

    @classmethod
    def square(cls, L: float, resolution: int = 1001) -> "ReconGrid":
        """Pixel centers covering [-L, L]^2 inclusively."""
        if resolution < 2:
            raise ValueError("resolution must be >= 2")
        c = np.linspace(-L, L, resolution)
        return cls(x=c, y=c.copy())

    @classmethod
    def sublattice(cls, L: float, resolution: int, rect) -> "ReconGrid":
        """Restriction of the square lattice to a world rectangle.

        rect = (x0, x1, y0, y1). Pixel centers are exactly those of the
        full square grid, so statistics over the window agree with a
        full-grid reconstruction restricted to it.
        """
        full = np.linspace(-L, L, resolution)
        x0, x1, y0, y1 = rect
        xs = full[(full >= x0) & (full <= x1)]
        ys = full[(full >= y0) & (full <= y1)]
        if xs.size == 0 or ys.size == 0:
            raise ValueError("rectangle contains no pixel centers")
        return cls(x=xs, y=ys)

    @property
    def extent(self):
        return float(self.x[0]), float(self.x[-1]), float(self.y[0]), float(self.y[-1])

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as f:
            f.write("# columns: x, y, value\n")
            for line in header_lines:
                f.write(f"# {line}\n")
            for iy, yv in enumerate(self.y):
                row = self.values[iy]
                for ix, xv in enumerate(self.x):
                    f.write(f"{xv:.17g},{yv:.17g},{row[ix]:.17g}\n")


def _phi2_tables(k: Kernel):
    """Quadratic coefficients of phi_c'' per unit piece [-3, -2), ..., [2, 3)."""
    poly = k.recentered(2)
    if not np.allclose(poly.breaks, np.arange(-3, 4)):
        raise ValueError("reconstruction requires the integer-knot kernel")
    coeffs = np.zeros((6, 3))
    coeffs[:, : poly.coeffs.shape[1]] = np.real(poly.coeffs)
    return coeffs


def lambda_recon_points(s: Sinogram, k: Kernel, points) -> np.ndarray:
    """Reconstruction at an (M, 2) array of points. Vectorized core."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError("points must have shape (M, 2)")
    g = s.geometry
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r > g.p_max + 1e-12):
        raise ValueError(
            "point outside the sampled data region (|x| must be <= p_max)"
        )
    # pad the detector rows so j0 + d + 3 is always a valid column
    g = s.geometry
    data = np.zeros((g.n0, g.n0 + 8))
    data[:, 3 : g.n0 + 4] = s.values
    nthreads = _thread_count()
    if nthreads <= 1 or pts.shape[0] < 2 * nthreads:
        return _recon_chunk(s, k, data, pts)
    chunks = np.array_split(np.arange(pts.shape[0]), nthreads)
    out = np.empty(pts.shape[0])
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        futures = [
            (idx, pool.submit(_recon_chunk, s, k, data, pts[idx]))
            for idx in chunks
            if idx.size
        ]
        for idx, fut in futures:
            out[idx] = fut.result()
    return out


def _recon_chunk(s: Sinogram, k: Kernel, data: np.ndarray, pts: np.ndarray) -> np.ndarray:
    g = s.geometry
    eps = g.delta_p
    coeffs = _phi2_tables(k)
    cos_a = np.cos(g.angles())
    sin_a = np.sin(g.angles())
    out = np.zeros(pts.shape[0])
    px = pts[:, 0].copy()
    py = pts[:, 1].copy()
    for kk in range(g.n0):
        # fractional detector coordinate of alpha_k . x
        t = (cos_a[kk] * px + sin_a[kk] * py + g.p_max) / eps
        j0 = np.floor(t).astype(np.int64)
        frac = t - j0
        row = data[kk]
        # offset d selects the fixed kernel piece [-d, 1-d)
        for d in range(-2, 4):
            c0, c1, c2 = coeffs[3 - d]
            u = frac - d
            out += ((c2 * u + c1) * u + c0) * row[j0 + (d + 3)]
    out *= -g.delta_alpha / (4.0 * np.pi * eps * eps)
    return out


def lambda_recon_point(s: Sinogram, k: Kernel, x) -> float:
    """Reconstruction at a single point."""
    return float(lambda_recon_points(s, k, np.asarray(x, dtype=float)[None, :])[0])


def lambda_recon_grid(s: Sinogram, k: Kernel, grid: ReconGrid) -> ReconGrid:
    """Fill the grid with reconstructed values (row-parallel, deterministic)."""
    xx, yy = np.meshgrid(grid.x, grid.y)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    vals = lambda_recon_points(s, k, pts).reshape(grid.values.shape)
    return ReconGrid(x=grid.x, y=grid.y, values=vals)


@dataclass
class EdgeProfile:
    """Measured vs predicted rescaled profile across a boundary point."""

    site: EdgeSite
    h_values: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray
    n0: int

    def __post_init__(self):
        if not (len(self.h_values) == len(self.measured) == len(self.predicted)):
            raise ValueError("profile arrays must have equal length")

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as f:
            f.write("# columns: h, measured, predicted\n")
            for line in header_lines:
                f.write(f"# {line}\n")
            for h, m, p in zip(self.h_values, self.measured, self.predicted):
                f.write(f"{h:.17g},{m:.17g},{p:.17g}\n")


def edge_profile(
    s: Sinogram,
    k: Kernel,
    site: EdgeSite,
    h_range: tuple[float, float] = (-4.0, 4.0),
    n_samples: int = 81,
) -> EdgeProfile:
    """Measured and predicted profiles along x0 + h * eps * Theta0.

    measured[i] = eps * f_eps at the sample point; predicted[i] =
    jump * Phi(h_i) with the closed-form unit edge response (smoothed by
    the detector box when the sinogram was aperture-averaged).
    """
    if not np.isfinite(site.R):
        raise ValueError("edge profile prediction requires finite curvature radius")
    g = s.geometry
    eps = g.delta_p
    hs = np.linspace(h_range[0], h_range[1], n_samples)
    normal = site.normal
    pts = np.asarray(site.x0)[None, :] + hs[:, None] * eps * normal[None, :]
    measured = eps * lambda_recon_points(s, k, pts)
    predicted = lt_edge_response(k, site.jump, hs, aperture=s.aperture)
    return EdgeProfile(
        site=site,
        h_values=hs,
        measured=measured,
        predicted=np.asarray(predicted, dtype=float),
        n0=g.n0,
    )


def write_pgm16(grid: ReconGrid, path, window=None):
    """16-bit binary PGM (P5), rows from the top (max y) down.

    The affine value-to-gray window is returned and also written to a
    sidecar text file '<path>.window.txt'.
    """
    vmin, vmax = window if window is not None else (
        float(grid.values.min()),
        float(grid.values.max()),
    )
    span = vmax - vmin if vmax > vmin else 1.0
    scaled = np.clip((grid.values - vmin) / span, 0.0, 1.0)
    gray = np.round(scaled * 65535.0).astype(">u2")
    gray = gray[::-1, :]  # top row first
    with open(path, "wb") as f:
        f.write(f"P5\n{gray.shape[1]} {gray.shape[0]}\n65535\n".encode())
        f.write(gray.tobytes(order="C"))
    x0, x1, y0, y1 = grid.extent
    with open(f"{path}.window.txt", "w") as f:
        f.write("# value-to-gray mapping: gray = 65535*(value - vmin)/(vmax - vmin)\n")
        f.write(f"vmin = {vmin:.17g}\nvmax = {vmax:.17g}\n")
        f.write(f"extent = {x0:.17g} {x1:.17g} {y0:.17g} {y1:.17g}\n")
    return vmin, vmax
