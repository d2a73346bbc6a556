"""Interpolation kernel built from cardinal B-splines.

The reconstruction interpolates sampled line-integral data in the affine
variable with a fixed compactly supported kernel

    phi(t) = 0.5*(B3(t) + B3(t-2)) + 4*B3(t-1) - 2*(B4(t) + B4(t-1)),

where B_n is the cardinal B-spline of degree n supported on [0, n+1].
phi is supported on [0, 6], symmetric about 3, has unit integral, and
after recentering (phi_c(t) = phi(t+3)) reproduces polynomials up to
degree 3 under lattice summation. All pieces are generated once from the
B-spline recursion in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .piecewise import PiecewisePoly

__all__ = [
    "Kernel",
    "bspline_eval",
    "bspline_pieces",
    "interpolation_kernel",
    "kernel_eval",
    "exactness_defect",
    "kernel_certificate",
    "KernelCertificate",
]

MAX_BSPLINE_DEGREE = 4


# -- exact rational polynomial helpers (ascending-power Fraction lists) ----

def _p_add(a, b):
    n = max(len(a), len(b))
    return [
        (a[k] if k < len(a) else Fraction(0)) + (b[k] if k < len(b) else Fraction(0))
        for k in range(n)
    ]


def _p_scale(a, c):
    return [c * ak for ak in a]


def _p_shift(a, delta):
    """q(x) = p(x + delta) for Fraction coefficient list a."""
    delta = Fraction(delta)
    out = [Fraction(0)] * len(a)
    for k, ck in enumerate(a):
        if ck == 0:
            continue
        for m in range(k + 1):
            out[m] += ck * comb(k, m) * delta ** (k - m)
    return out


def _p_mul_linear(a, c0, c1):
    """(c0 + c1*x) * p(x)."""
    out = [Fraction(0)] * (len(a) + 1)
    for k, ck in enumerate(a):
        out[k] += c0 * ck
        out[k + 1] += c1 * ck
    return out


def _p_deriv(a, order=1):
    for _ in range(order):
        a = [k * a[k] for k in range(1, len(a))] or [Fraction(0)]
    return a


def _p_eval(a, x):
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def bspline_pieces(degree: int) -> list[list[Fraction]]:
    """Exact per-piece coefficients of B_degree on [i, i+1), i = 0..degree.

    Generated by the two-term recursion
    B_n(t) = (t/n) B_{n-1}(t) + ((n+1-t)/n) B_{n-1}(t-1); coefficients are
    in the global coordinate.
    """
    if not 0 <= degree <= MAX_BSPLINE_DEGREE:
        raise ValueError(f"degree must be in 0..{MAX_BSPLINE_DEGREE}, got {degree}")
    pieces = [[Fraction(1)]]
    for n in range(1, degree + 1):
        new = []
        for i in range(n + 1):
            acc = [Fraction(0)]
            if i < len(pieces):
                acc = _p_add(acc, _p_mul_linear(pieces[i], Fraction(0), Fraction(1, n)))
            if 0 <= i - 1 < len(pieces):
                shifted = _p_shift(pieces[i - 1], -1)
                acc = _p_add(
                    acc, _p_mul_linear(shifted, Fraction(n + 1, n), Fraction(-1, n))
                )
            new.append(acc)
        pieces = new
    return pieces


_BSPLINE_CACHE: dict[int, list[list[Fraction]]] = {
    n: bspline_pieces(n) for n in range(MAX_BSPLINE_DEGREE + 1)
}


def bspline_eval(degree: int, order: int, t: float) -> float:
    """Value of the order-th derivative of the cardinal B-spline B_degree.

    B_degree is supported on [0, degree+1]; pieces are half-open, so at
    interior knots the right-limit is returned (irrelevant for continuous
    orders, i.e. order <= degree - 1).
    """
    if not 0 <= degree <= MAX_BSPLINE_DEGREE:
        raise ValueError(f"degree must be in 0..{MAX_BSPLINE_DEGREE}, got {degree}")
    if not 0 <= order <= degree:
        raise ValueError(f"order must be in 0..{degree}, got {order}")
    i = int(np.floor(t))
    if i < 0 or i > degree:
        return 0.0
    poly = _p_deriv(_BSPLINE_CACHE[degree][i], order)
    return float(_p_eval(poly, Fraction(t)))


# -- the composite interpolation kernel ------------------------------------

# (coefficient, spline degree, integer shift) of each term of phi
_KERNEL_TERMS = (
    (Fraction(1, 2), 3, 0),
    (Fraction(1, 2), 3, 2),
    (Fraction(4), 3, 1),
    (Fraction(-2), 4, 0),
    (Fraction(-2), 4, 1),
)

_RAW_SUPPORT = (0, 6)
_CENTER = 3


def _raw_kernel_fractions() -> list[list[Fraction]]:
    """Exact pieces of phi on [i, i+1), i = 0..5."""
    pieces = [[Fraction(0)] * 5 for _ in range(6)]
    for coef, degree, shift in _KERNEL_TERMS:
        spline = _BSPLINE_CACHE[degree]
        for j, poly in enumerate(spline):
            target = j + shift
            shifted = _p_shift(poly, -shift) if shift else poly
            pieces[target] = _p_add(pieces[target], _p_scale(shifted, coef))
    return pieces


@dataclass(frozen=True)
class Kernel:
    """Immutable piecewise-polynomial interpolation kernel.

    ``pieces`` is the raw kernel phi on [0, 6]; ``recentered()`` gives
    phi_c(t) = phi(t + center), the form used by reconstruction and all
    transition-behavior formulas. Derivatives up to ``max_derivative``
    are precomputed. When ``recentered_pieces`` is omitted it is derived
    by a float shift; the factory supplies it from exact rationals so the
    evenness of phi_c is bitwise (mirrored coefficients).
    """

    pieces: PiecewisePoly
    center: float = float(_CENTER)
    max_derivative: int = 3
    recentered_pieces: PiecewisePoly | None = None
    _derivs_raw: tuple[PiecewisePoly, ...] = field(repr=False, default=())
    _derivs_centered: tuple[PiecewisePoly, ...] = field(repr=False, default=())

    def __post_init__(self):
        if self.max_derivative < 3:
            raise ValueError("max_derivative must be >= 3")
        raw = tuple(
            self.pieces.derivative(k) for k in range(self.max_derivative + 1)
        )
        centered_base = self.recentered_pieces
        if centered_base is None:
            centered_base = self.pieces.shifted(self.center)
            object.__setattr__(self, "recentered_pieces", centered_base)
        cen = tuple(
            centered_base.derivative(k) for k in range(self.max_derivative + 1)
        )
        object.__setattr__(self, "_derivs_raw", raw)
        object.__setattr__(self, "_derivs_centered", cen)

    @property
    def support(self) -> tuple[float, float]:
        return self.pieces.support

    def recentered(self, order: int = 0) -> PiecewisePoly:
        return self._derivs_centered[order]

    def raw(self, order: int = 0) -> PiecewisePoly:
        return self._derivs_raw[order]

    def __call__(self, t, order: int = 0, recentered: bool = True):
        return kernel_eval(self, order, t, recentered)


def interpolation_kernel(max_derivative: int = 3) -> Kernel:
    """Build the composite kernel with exact rational coefficients."""
    frac_pieces = _raw_kernel_fractions()
    coeffs = np.array([[float(c) for c in row] for row in frac_pieces])
    pieces = PiecewisePoly(np.arange(7, dtype=float), coeffs)
    centered = [_p_shift(row, _CENTER) for row in frac_pieces]
    centered_coeffs = np.array([[float(c) for c in row] for row in centered])
    centered_pieces = PiecewisePoly(np.arange(-3, 4, dtype=float), centered_coeffs)
    return Kernel(
        pieces=pieces,
        max_derivative=max_derivative,
        recentered_pieces=centered_pieces,
    )


def kernel_integral_exact() -> Fraction:
    """Integral of phi from the rational pieces, as an exact Fraction."""
    total = Fraction(0)
    for i, poly in enumerate(_raw_kernel_fractions()):
        anti = [Fraction(0)] + [c / (k + 1) for k, c in enumerate(poly)]
        total += _p_eval(anti, Fraction(i + 1)) - _p_eval(anti, Fraction(i))
    return total


def kernel_moment_exact(m: int, recentered: bool = True) -> Fraction:
    """Exact moment of phi (about `center` when recentered)."""
    total = Fraction(0)
    c0 = Fraction(_CENTER) if recentered else Fraction(0)
    for i, poly in enumerate(_raw_kernel_fractions()):
        # integrate (t - c0)^m * poly(t) over [i, i+1]
        prod = poly
        for _ in range(m):
            prod = _p_mul_linear(prod, -c0, Fraction(1))
        anti = [Fraction(0)] + [c / (k + 1) for k, c in enumerate(prod)]
        total += _p_eval(anti, Fraction(i + 1)) - _p_eval(anti, Fraction(i))
    return total


def kernel_eval(k: Kernel, order: int, t, recentered: bool = True):
    """phi^(order)(t) (raw) or phi_c^(order)(t) = phi^(order)(t + center)."""
    if not 0 <= order <= k.max_derivative:
        raise ValueError(
            f"order must be in 0..{k.max_derivative}, got {order}"
        )
    poly = k._derivs_centered[order] if recentered else k._derivs_raw[order]
    return poly(t)


def exactness_defect(k: Kernel, m: int, grid) -> float:
    """max over the grid of |sum_j j^m phi_c(t - j) - t^m|.

    The lattice sum is finite by compact support of phi_c ([-3, 3]).
    """
    if m < 0:
        raise ValueError("moment degree m must be >= 0")
    t = np.atleast_1d(np.asarray(grid, dtype=float))
    if t.size == 0:
        raise ValueError("grid must be nonempty")
    phi_c = k.recentered(0)
    base = np.floor(t).astype(int)
    total = np.zeros_like(t)
    for d in range(-3, 4):
        j = base + d
        total += (j.astype(float) ** m) * phi_c(t - j)
    return float(np.max(np.abs(total - t**m)))


@dataclass(frozen=True)
class KernelCertificate:
    """Numerical certificate for the four kernel axioms."""

    exactness_defects: dict[int, float]   # lattice-sum defect per degree
    integral_is_exactly_one: bool         # from rational pieces
    integral_float: float
    evenness_defect: float                # sup |phi_c(-t) - phi_c(t)|
    derivative_bounds: dict[int, float]   # sup |phi^(j)| on the support
    exactness_tol: float
    evenness_tol: float

    @property
    def passed(self) -> bool:
        return (
            all(d < self.exactness_tol for d in self.exactness_defects.values())
            and self.integral_is_exactly_one
            and abs(self.integral_float - 1.0) < 1e-12
            and self.evenness_defect < self.evenness_tol
            and all(np.isfinite(b) for b in self.derivative_bounds.values())
        )

    def lines(self) -> list[str]:
        out = []
        for m, d in sorted(self.exactness_defects.items()):
            ok = "pass" if d < self.exactness_tol else "FAIL"
            out.append(f"IK1 degree {m}: defect {d:.3e} [{ok}]")
        out.append("IK2 compact support: [0, 6] (recentered [-3, 3]) [pass]")
        for j, b in sorted(self.derivative_bounds.items()):
            ok = "pass" if np.isfinite(b) else "FAIL"
            out.append(f"IK3 sup|phi^({j})| = {b:.6g} [{ok}]")
        ok = "pass" if self.integral_is_exactly_one else "FAIL"
        out.append(f"IK4 integral = 1 exactly (rational arithmetic) [{ok}]")
        ok = "pass" if self.evenness_defect < self.evenness_tol else "FAIL"
        out.append(f"symmetry: sup|phi_c(-t)-phi_c(t)| = {self.evenness_defect:.3e} [{ok}]")
        out.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return out


def kernel_certificate(
    k: Kernel,
    grid=None,
    exactness_degrees=(0, 1, 2),
    exactness_tol: float = 1e-10,
    evenness_tol: float = 1e-14,
) -> KernelCertificate:
    if grid is None:
        grid = np.arange(-5.0, 5.0 + 1e-9, 1e-3)
    defects = {m: exactness_defect(k, m, grid) for m in exactness_degrees}
    tt = np.linspace(0.0, 3.0, 6001)
    phi_c = k.recentered(0)
    evenness = float(np.max(np.abs(phi_c(-tt) - phi_c(tt))))
    dense = np.linspace(0.0, 6.0, 24001)
    bounds = {
        j: float(np.max(np.abs(k.raw(j)(dense))))
        for j in range(k.max_derivative + 1)
    }
    return KernelCertificate(
        exactness_defects=defects,
        integral_is_exactly_one=(kernel_integral_exact() == 1),
        integral_float=float(k.pieces.integral()),
        evenness_defect=evenness,
        derivative_bounds=bounds,
        exactness_tol=exactness_tol,
        evenness_tol=evenness_tol,
    )
