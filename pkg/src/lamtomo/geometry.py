"""Scan geometry, sinogram sampling, and the genericity diagnostic.

The sampling lattice is

    alpha_k = dalpha * (k + q_alpha),  k = 0..n0-1,  dalpha = 2 pi / n0,
    p_j     = -p_max + j * dp,         j = 0..n0,    dp = 2 p_max / n0,
    p_max   = 1.1 * L * sqrt(2),

with the angular offset q_alpha (default sqrt(2)) keeping all angles away
from special directions. The ratio kappa = dalpha / dp is independent of
n0 for fixed L; the transition behavior of a boundary point x0 with
exterior normal angle theta0 is governed by a = (Theta0_perp . x0) * kappa
being badly approximable by small-denominator rationals.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .phantom import Phantom, radon, radon_pixel_avg

__all__ = [
    "ScanGeometry",
    "Sinogram",
    "build_geometry",
    "sample_sinogram",
    "genericity",
    "GenericityReport",
]

APERTURES = ("none", "box")


@dataclass(frozen=True)
class ScanGeometry:
    n0: int
    L: float
    q_alpha: float = float(np.sqrt(2.0))

    @property
    def delta_alpha(self) -> float:
        return 2.0 * np.pi / self.n0

    @property
    def p_max(self) -> float:
        return 1.1 * self.L * np.sqrt(2.0)

    @property
    def delta_p(self) -> float:
        return 2.0 * self.p_max / self.n0

    @property
    def eps(self) -> float:
        return self.delta_p

    @property
    def kappa(self) -> float:
        return self.delta_alpha / self.delta_p

    def angles(self) -> np.ndarray:
        return self.delta_alpha * (self.q_alpha + np.arange(self.n0))

    def p_grid(self) -> np.ndarray:
        return -self.p_max + self.delta_p * np.arange(self.n0 + 1)


def build_geometry(n0: int, L: float, q_alpha: float | None = None) -> ScanGeometry:
    if n0 < 4:
        raise ValueError(f"n0 must be >= 4, got {n0}")
    if L <= 0:
        raise ValueError("reconstruction half-width L must be positive")
    if q_alpha is None:
        q_alpha = float(np.sqrt(2.0))
    return ScanGeometry(n0=int(n0), L=float(L), q_alpha=float(q_alpha))


@dataclass(frozen=True)
class Sinogram:
    geometry: ScanGeometry
    values: np.ndarray          # (n0, n0+1)
    aperture: str = "none"

    def __post_init__(self):
        g = self.geometry
        if self.values.shape != (g.n0, g.n0 + 1):
            raise ValueError(
                f"sinogram shape {self.values.shape} does not match geometry "
                f"({g.n0}, {g.n0 + 1})"
            )
        if self.aperture not in APERTURES:
            raise ValueError(f"aperture must be one of {APERTURES}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sinogram contains non-finite values")
        self.values.flags.writeable = False

    # -- serialization ---------------------------------------------------

    def to_csv(self, path):
        g = self.geometry
        alphas = g.angles()
        ps = g.p_grid()
        with open(path, "w") as f:
            f.write("# columns: k, j, alpha_k, p_j, value\n")
            f.write(
                f"# n0 = {g.n0}\n# L = {g.L!r}\n# q_alpha = {g.q_alpha!r}\n"
                f"# aperture = {self.aperture}\n"
            )
            for k in range(g.n0):
                row = self.values[k]
                for j in range(g.n0 + 1):
                    f.write(
                        f"{k},{j},{alphas[k]:.17g},{ps[j]:.17g},{row[j]:.17g}\n"
                    )

    def to_binary(self, path):
        """Header (n0: int64, L: float64, aperture flag: int64), then
        row-major little-endian float64 values."""
        flag = APERTURES.index(self.aperture)
        with open(path, "wb") as f:
            f.write(struct.pack("<qdq", self.geometry.n0, self.geometry.L, flag))
            f.write(self.values.astype("<f8").tobytes(order="C"))

    @classmethod
    def from_binary(cls, path, q_alpha: float | None = None) -> "Sinogram":
        with open(path, "rb") as f:
            n0, L, flag = struct.unpack("<qdq", f.read(24))
            data = np.frombuffer(f.read(), dtype="<f8").reshape(n0, n0 + 1)
        geom = build_geometry(n0, L, q_alpha)
        return cls(geometry=geom, values=data.copy(), aperture=APERTURES[flag])


def sample_sinogram(
    ph: Phantom, g: ScanGeometry, aperture: str = "none"
) -> Sinogram:
    """Sample the phantom's line integrals on the (alpha_k, p_j) lattice.

    aperture == "box" averages the data over each detector pixel (the
    unit box of width delta_p centered at p_j) instead of point-sampling.
    """
    if aperture not in APERTURES:
        raise ValueError(f"aperture must be one of {APERTURES}")
    alphas = g.angles()
    ps = g.p_grid()
    values = np.empty((g.n0, g.n0 + 1))
    for k in range(g.n0):
        if aperture == "none":
            values[k] = radon(ph, alphas[k], ps)
        else:
            values[k] = radon_pixel_avg(ph, alphas[k], ps, g.delta_p)
    return Sinogram(geometry=g, values=values, aperture=aperture)


@dataclass(frozen=True)
class GenericityReport:
    a: float
    best_rational: tuple[int, int]
    approx_error: float
    quality: float               # approx_error * q**2; small means well-approximable
    near_non_generic: bool

    NEAR_NON_GENERIC_QUALITY = 0.05


def genericity(x0, theta0: float, kappa: float, Q: int = 100) -> GenericityReport:
    """Rationality diagnostic for a = (Theta0_perp . x0) * kappa.

    True genericity (a irrational) is untestable in floating point; the
    report gives the best rational approximation p/q with q <= Q via
    continued fractions and flags "near-non-generic" when
    |a - p/q| * q^2 is small, which is when the predicted edge response
    degrades. Sign convention: theta0 is the exterior-normal angle and
    Theta0_perp = (-sin theta0, cos theta0).
    """
    if Q < 1:
        raise ValueError("denominator bound Q must be >= 1")
    x0 = np.asarray(x0, dtype=float)
    perp = np.array([-np.sin(theta0), np.cos(theta0)])
    a = float(np.dot(perp, x0) * kappa)
    best = Fraction(a).limit_denominator(Q)
    err = abs(a - float(best))
    quality = err * best.denominator**2
    return GenericityReport(
        a=a,
        best_rational=(best.numerator, best.denominator),
        approx_error=err,
        quality=quality,
        near_non_generic=quality < GenericityReport.NEAR_NON_GENERIC_QUALITY,
    )
