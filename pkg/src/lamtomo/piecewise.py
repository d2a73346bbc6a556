"""Piecewise-polynomial functions with exact calculus.

Everything downstream (interpolation kernels, edge-response convolutions,
detector-aperture smoothing) runs on compactly supported piecewise
polynomials, so this module keeps the representation explicit: ascending
break points and per-piece coefficients in the *global* coordinate,
ascending powers. A function is identically zero outside
``[breaks[0], breaks[-1]]`` and each piece is taken on the half-open
interval ``[breaks[i], breaks[i+1])``.
"""

from __future__ import annotations

from math import comb

import numpy as np

__all__ = ["PiecewisePoly"]


def shift_poly(coeffs: np.ndarray, delta: float) -> np.ndarray:
    """Coefficients of q(x) = p(x + delta), ascending powers."""
    c = np.asarray(coeffs)
    n = len(c)
    out = np.zeros(n, dtype=c.dtype)
    for k in range(n):
        ck = c[k]
        if ck == 0:
            continue
        for m in range(k + 1):
            out[m] += ck * comb(k, m) * delta ** (k - m)
    return out


class PiecewisePoly:
    """Compactly supported piecewise polynomial on the real line.

    Parameters
    ----------
    breaks : array_like, shape (m+1,)
        Strictly increasing knots.
    coeffs : array_like, shape (m, d+1)
        Ascending-power coefficients of the polynomial valid on
        ``[breaks[i], breaks[i+1])``, expressed in the global coordinate.
    """

    __slots__ = ("breaks", "coeffs")

    def __init__(self, breaks, coeffs):
        breaks = np.asarray(breaks, dtype=float)
        coeffs = np.atleast_2d(np.asarray(coeffs))
        if breaks.ndim != 1 or len(breaks) < 2:
            raise ValueError("need at least two break points")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("break points must be strictly increasing")
        if coeffs.shape[0] != len(breaks) - 1:
            raise ValueError("one coefficient row per piece required")
        if not np.iscomplexobj(coeffs):
            coeffs = coeffs.astype(float)
        self.breaks = breaks
        self.coeffs = coeffs
        self.breaks.flags.writeable = False
        self.coeffs.flags.writeable = False

    # -- basic queries -------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breaks[0]), float(self.breaks[-1])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        idx = np.searchsorted(self.breaks, xv, side="right") - 1
        ok = (idx >= 0) & (idx < len(self.breaks) - 1)
        out = np.zeros(xv.shape, dtype=self.coeffs.dtype)
        if np.any(ok):
            c = self.coeffs[idx[ok]]
            xs = xv[ok]
            acc = np.zeros_like(xs, dtype=self.coeffs.dtype)
            for k in range(c.shape[1] - 1, -1, -1):
                acc = acc * xs + c[:, k]
            out[ok] = acc
        return out[0] if scalar else out

    def piece_at(self, x: float) -> np.ndarray | None:
        """Coefficient row of the piece containing x, or None outside."""
        i = int(np.searchsorted(self.breaks, x, side="right")) - 1
        if 0 <= i < len(self.breaks) - 1:
            return self.coeffs[i]
        return None

    # -- calculus --------------------------------------------------------

    def derivative(self, order: int = 1) -> "PiecewisePoly":
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        c = self.coeffs
        for _ in range(order):
            if c.shape[1] == 1:
                c = np.zeros((c.shape[0], 1), dtype=c.dtype)
            else:
                c = c[:, 1:] * np.arange(1, c.shape[1], dtype=float)
        return PiecewisePoly(self.breaks, c)

    def antiderivative(self) -> "PiecewisePoly":
        """F with F' = self and F(breaks[0]) = 0, valid on the support.

        The returned object still evaluates to 0 outside the support;
        callers needing the right-tail constant should use ``integral()``.
        """
        c = self.coeffs
        m, d = c.shape
        out = np.zeros((m, d + 1), dtype=c.dtype)
        out[:, 1:] = c / np.arange(1, d + 1, dtype=float)
        # fix integration constants so F is continuous with F(b0) = 0
        total = 0.0
        for i in range(m):
            a = self.breaks[i]
            val_a = _horner(out[i], a)
            out[i, 0] += total - val_a
            total = _horner(out[i], self.breaks[i + 1])
        return PiecewisePoly(self.breaks, out)

    def integral(self) -> float | complex:
        return self.moment(0)

    def moment(self, m: int):
        """Integral of x^m * f(x) over the support, exact per piece."""
        total = 0.0
        for i in range(self.coeffs.shape[0]):
            a, b = self.breaks[i], self.breaks[i + 1]
            for k, ck in enumerate(self.coeffs[i]):
                if ck != 0:
                    p = k + m + 1
                    total += ck * (b**p - a**p) / p
        return total

    # -- transformations -------------------------------------------------

    def shifted(self, delta: float) -> "PiecewisePoly":
        """g with g(x) = f(x + delta)."""
        new_breaks = self.breaks - delta
        new_coeffs = np.stack([shift_poly(row, delta) for row in self.coeffs])
        return PiecewisePoly(new_breaks, new_coeffs)

    def reflected(self) -> "PiecewisePoly":
        """g with g(x) = f(-x)."""
        new_breaks = -self.breaks[::-1]
        m, d = self.coeffs.shape
        signs = (-1.0) ** np.arange(d)
        new_coeffs = (self.coeffs * signs)[::-1]
        return PiecewisePoly(new_breaks, new_coeffs.copy())

    def scaled(self, factor) -> "PiecewisePoly":
        return PiecewisePoly(self.breaks, self.coeffs * factor)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        breaks = np.unique(np.concatenate([self.breaks, other.breaks]))
        d = max(self.coeffs.shape[1], other.coeffs.shape[1])
        dtype = np.result_type(self.coeffs.dtype, other.coeffs.dtype)
        coeffs = np.zeros((len(breaks) - 1, d), dtype=dtype)
        for i in range(len(breaks) - 1):
            mid = 0.5 * (breaks[i] + breaks[i + 1])
            for f in (self, other):
                row = f.piece_at(mid)
                if row is not None:
                    coeffs[i, : len(row)] += row
        return PiecewisePoly(breaks, coeffs)

    def __neg__(self) -> "PiecewisePoly":
        return self.scaled(-1.0)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self + other.scaled(-1.0)

    def box_smoothed(self, width: float) -> "PiecewisePoly":
        """Convolution with the unit-mass box of the given width.

        g(x) = (1/w) * integral of f over [x - w/2, x + w/2]; piecewise
        polynomial of degree+1 with knots at breaks +- w/2.
        """
        if width <= 0:
            raise ValueError("box width must be positive")
        half = 0.5 * width
        F = self.antiderivative()
        total = _horner(F.coeffs[-1], F.breaks[-1])
        breaks = np.unique(np.concatenate([self.breaks - half, self.breaks + half]))
        d = F.coeffs.shape[1]
        coeffs = np.zeros((len(breaks) - 1, d), dtype=F.coeffs.dtype)
        lo, hi = self.support
        for i in range(len(breaks) - 1):
            mid = 0.5 * (breaks[i] + breaks[i + 1])
            piece = np.zeros(d, dtype=F.coeffs.dtype)
            for sign, delta in ((1.0, half), (-1.0, -half)):
                z = mid + delta
                if z >= hi:
                    piece[0] += sign * total
                elif z > lo:
                    row = F.piece_at(z)
                    piece += sign * shift_poly(row, delta)
                # z <= lo contributes 0
            coeffs[i] = piece / width
        return PiecewisePoly(breaks, coeffs)

    # -- serialization ---------------------------------------------------

    def rows(self):
        """(left_knot, right_knot, c0, c1, ...) tuples for CSV export."""
        for i in range(self.coeffs.shape[0]):
            yield (self.breaks[i], self.breaks[i + 1], *self.coeffs[i])

    def __repr__(self) -> str:  # pragma: no cover
        lo, hi = self.support
        return (
            f"PiecewisePoly(support=[{lo:g}, {hi:g}], pieces={self.coeffs.shape[0]}, "
            f"degree={self.degree})"
        )


def _horner(coeffs: np.ndarray, x: float):
    acc = 0.0
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc
