"""Transition behavior of discrete-data reconstructions across an edge.

Given a reconstruction filter of order beta acting on data with a power
singularity of order s across a smooth convex interface in n dimensions,
the reconstruction from continuous data has a homogeneous leading
singularity mu across the interface (the continuous transition behavior,
CTB), and the reconstruction from lattice-sampled data, rescaled by
eps^kappa2 and viewed in an eps-neighborhood of a generic boundary point,
converges to the convolution of the interpolation kernel with mu (the
discrete transition behavior, DTB).

This module evaluates both in closed form for the parameter tuple
(n, beta, s, a+-, b+-, |det H''|), including the classical 2D
second-derivative (Lambda) filter and 3D exact reconstruction as special
cases, plus the lattice-sum profiles psi / Psi with an independent
double-integral route to the DTB, and the non-local artifact models for
flat edges and remote tangent lines.

All singular convolutions against piecewise-polynomial kernels are done
with exact antiderivatives (power and log terms); no quadrature enters
except in the explicitly quadrature-based oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from .geometry import ScanGeometry
from .kernel import Kernel
from .piecewise import PiecewisePoly

__all__ = [
    "UnsupportedParametersError",
    "SingularityParams",
    "CtbSpec",
    "ctb_spec",
    "ctb_mu",
    "dtb",
    "lt_edge_response",
    "psi",
    "capital_psi",
    "dtb_double_integral_oracle",
    "f0_singularity",
    "fhat0_singularity",
    "fhat0_coefficients",
    "lt_unit_spec",
    "lt_disk_spec",
    "exact3d_spec",
    "LineEdge",
    "line_artifact_model",
    "RemoteSite",
    "remote_ripple_model",
    "pv_convolution",
    "power_convolution",
]


class UnsupportedParametersError(ValueError):
    """Parameter combination outside the supported (log-free) class."""


# ---------------------------------------------------------------------------
# Singular convolutions against piecewise polynomials
# ---------------------------------------------------------------------------

def _binom_series_coeff(expo: float, m: int) -> float:
    c = 1.0
    for i in range(1, m + 1):
        c *= (expo - i + 1) / i
    return c


def _far_scale(poly: PiecewisePoly) -> float:
    lo, hi = poly.support
    return 2.0 * max(abs(lo), abs(hi)) + 2.0


def pv_convolution(poly: PiecewisePoly, h):
    """PV integral of poly(v) / (h - v) dv, vectorized over h.

    Near the support this splits each piece into the polynomial quotient
    (P(v) - P(h)) / (h - v) plus exact log terms whose coefficients cancel
    at shared knots; far from the support it switches to the moment series
    sum_m M_m / h^(m+1), avoiding catastrophic cancellation.
    """
    h = np.asarray(h, dtype=float)
    scalar = h.ndim == 0
    hv = np.atleast_1d(h).astype(float)
    out = np.zeros(hv.shape, dtype=poly.coeffs.dtype)
    far = np.abs(hv) > _far_scale(poly)
    if np.any(far):
        out[far] = _pv_far(poly, hv[far])
    if np.any(~far):
        out[~far] = _pv_near(poly, hv[~far])
    return out[0] if scalar else out


def _pv_far(poly: PiecewisePoly, h: np.ndarray) -> np.ndarray:
    lo, hi = poly.support
    bound = max(abs(lo), abs(hi))
    acc = np.zeros(h.shape, dtype=poly.coeffs.dtype)
    invh = 1.0 / h
    power = invh.copy()
    m = 0
    while True:
        mom = poly.moment(m)
        term = mom * power
        acc += term
        m += 1
        power *= invh
        # remaining tail is bounded by a geometric series in bound/|h|
        if bound ** (m + 1) * np.max(np.abs(power)) < 1e-18 * (1.0 + np.max(np.abs(acc))):
            break
        if m > 80:
            break
    return acc


def _pv_near(poly: PiecewisePoly, h: np.ndarray) -> np.ndarray:
    out = np.zeros(h.shape, dtype=poly.coeffs.dtype)
    log_coeffs: dict[float, np.ndarray] = {}
    for i in range(poly.coeffs.shape[0]):
        a, b = poly.breaks[i], poly.breaks[i + 1]
        c = poly.coeffs[i]
        # value of the piece polynomial at h
        ph = np.zeros(h.shape, dtype=poly.coeffs.dtype)
        for ck in c[::-1]:
            ph = ph * h + ck
        # quotient Q with P(v) = (v - h) Q(v) + P(h); integral of -Q over [a, b]
        q = np.zeros(h.shape, dtype=poly.coeffs.dtype)
        integral = np.zeros(h.shape, dtype=poly.coeffs.dtype)
        # synthetic division, highest power first; quotient coefficient for
        # power (k-1) is available once coefficient k has been folded in
        acc = np.zeros(h.shape, dtype=poly.coeffs.dtype)
        deg = len(c) - 1
        for k in range(deg, 0, -1):
            acc = acc * h + c[k]
            # acc is the quotient coefficient of v^(k-1)
            integral += acc * (b**k - a**k) / k
        out -= integral
        for knot, sign in ((a, 1.0), (b, -1.0)):
            key = float(knot)
            if key not in log_coeffs:
                log_coeffs[key] = np.zeros(h.shape, dtype=poly.coeffs.dtype)
            log_coeffs[key] += sign * ph
    for knot, coef in log_coeffs.items():
        d = np.abs(h - knot)
        safe = d > 0
        vals = np.zeros(h.shape, dtype=poly.coeffs.dtype)
        vals[safe] = coef[safe] * np.log(d[safe])
        # at a knot the adjacent-piece coefficients cancel for continuous poly
        at = ~safe
        if np.any(at) and np.any(np.abs(coef[at]) > 1e-9 * (1 + np.max(np.abs(poly.coeffs)))):
            raise ValueError("PV integral evaluated at a genuine log singularity")
        out += vals
    return out


def power_convolution(poly: PiecewisePoly, h, expo: float, side: int):
    """Integral of poly(h - t) * |t|^expo over t > 0 (side=+1) or t < 0.

    Requires expo > -1 (absolutely convergent). Vectorized over h; far
    from the support the binomial series in v/h is used for stability.
    """
    if expo <= -1:
        raise ValueError("power_convolution requires exponent > -1")
    h = np.asarray(h, dtype=float)
    scalar = h.ndim == 0
    hv = np.atleast_1d(h).astype(float)
    out = np.zeros(hv.shape, dtype=poly.coeffs.dtype)
    lim = _far_scale(poly)
    # the integrand lives at t near h (side +) or -h (side -)
    far = (hv > lim) if side > 0 else (hv < -lim)
    inert = (hv < poly.support[0]) if side > 0 else (hv > poly.support[1])
    near = ~(far | inert)
    if np.any(far):
        out[far] = _power_far(poly, hv[far], expo, side)
    if np.any(near):
        out[near] = _power_near(poly, hv[near], expo, side)
    return out[0] if scalar else out


def _power_near(poly: PiecewisePoly, h: np.ndarray, expo: float, side: int):
    out = np.zeros(h.shape, dtype=poly.coeffs.dtype)
    for i in range(poly.coeffs.shape[0]):
        a, b = poly.breaks[i], poly.breaks[i + 1]
        c = poly.coeffs[i]
        deg = len(c) - 1
        if side > 0:
            lo = np.maximum(h - b, 0.0)
            hi = np.maximum(h - a, 0.0)
        else:
            lo = np.maximum(a - h, 0.0)
            hi = np.maximum(b - h, 0.0)
        live = hi > lo
        if not np.any(live):
            continue
        # P(h -+ u) = sum_m d_m(h) u^m  (u = |t|), with t = side * u
        sgn = -1.0 if side > 0 else 1.0
        for m in range(deg + 1):
            d_m = np.zeros(h.shape, dtype=poly.coeffs.dtype)
            for k in range(deg, m - 1, -1):
                d_m = d_m * h + c[k] * math.comb(k, m)
            d_m = d_m * sgn**m
            p = m + expo + 1.0
            out += np.where(live, d_m * (hi**p - lo**p) / p, 0.0)
    return out


def _power_far(poly: PiecewisePoly, h: np.ndarray, expo: float, side: int):
    # integral of poly(v) * (side*(h - v))^expo over the support;
    # expand ((h - v))^expo = h^expo * (1 - v/h)^expo binomially
    acc = np.zeros(h.shape, dtype=poly.coeffs.dtype)
    lo, hi = poly.support
    bound = max(abs(lo), abs(hi))
    invh = 1.0 / h
    m = 0
    power = np.ones_like(h)
    while True:
        coeff = _binom_series_coeff(expo, m) * (-1.0) ** m
        term = coeff * poly.moment(m) * power
        acc += term
        m += 1
        power *= invh
        tail = abs(_binom_series_coeff(expo, m)) * bound**m * np.max(np.abs(power))
        if tail < 1e-18 * (1.0 + np.max(np.abs(acc))) or m > 80:
            break
    base = np.abs(h) ** expo
    return acc * base


# ---------------------------------------------------------------------------
# Homogeneous distributions C+ t_+^-k + C- t_-^-k (+ finite part / deltas)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousDistribution:
    """A distribution homogeneous of degree -exponent.

    Non-integer exponent: coef_plus * t_+^-e + coef_minus * t_-^-e
    (regularized one-sided powers). Integer exponent q >= 1: pv_coef *
    (finite-part t^-q) + delta_coef * delta^(q-1). Exponent 0 is the
    two-sided step coef_plus * 1_{t>0} + coef_minus * 1_{t<0}.
    """

    exponent: float
    coef_plus: complex = 0.0
    coef_minus: complex = 0.0
    pv_coef: complex = 0.0
    delta_coef: complex = 0.0

    @property
    def is_integer_order(self) -> bool:
        return self.exponent >= 0.5 and abs(self.exponent - round(self.exponent)) < 1e-12

    def regular_value(self, t):
        """Pointwise value away from t = 0 (delta parts excluded)."""
        t = np.asarray(t, dtype=float)
        pos = t > 0
        neg = t < 0
        out = np.zeros(t.shape, dtype=complex)
        e = self.exponent
        if self.is_integer_order:
            q = int(round(e))
            out = np.where(pos | neg, self.pv_coef * np.sign(t) ** q / np.abs(t) ** q, out)
        else:
            out = np.where(pos, self.coef_plus * np.where(pos, np.abs(t), 1.0) ** -e, out)
            out = out + np.where(neg, self.coef_minus * np.where(neg, np.abs(t), 1.0) ** -e, 0.0)
        return out[()] if np.ndim(t) == 0 else out

    def convolve(self, poly: PiecewisePoly, h):
        """(poly * self)(h), exact, vectorized over h."""
        e = self.exponent
        out = np.zeros(np.shape(h), dtype=complex)
        if self.is_integer_order:
            q = int(round(e))
            if self.pv_coef != 0:
                # finite-part t^-q = (-1)^(q-1)/(q-1)! D^(q-1) pv(1/t)
                red = poly.derivative(q - 1)
                out = out + self.pv_coef * (-1.0) ** (q - 1) / math.factorial(q - 1) * pv_convolution(red, h)
            if self.delta_coef != 0:
                out = out + self.delta_coef * poly.derivative(q - 1)(h)
            return out
        m = int(math.floor(e))
        nu = e - m  # in [0, 1)
        red = poly.derivative(m) if m else poly
        fac_plus = 1.0
        fac_minus = 1.0
        for i in range(1, m + 1):
            fac_plus *= -(e - i)
            fac_minus *= e - i
        if self.coef_plus != 0:
            out = out + self.coef_plus / fac_plus * power_convolution(red, h, -nu, +1)
        if self.coef_minus != 0:
            out = out + self.coef_minus / fac_minus * power_convolution(red, h, -nu, -1)
        return out


def _resolve_boundary_powers(exponent: float, coef_lower: complex, coef_upper: complex) -> HomogeneousDistribution:
    """Resolve A (t - i0)^-e + B (t + i0)^-e into one-sided powers.

    coef_lower multiplies (t - i0)^-e, coef_upper multiplies (t + i0)^-e.
    """
    e = exponent
    if e >= 0.5 and abs(e - round(e)) < 1e-12:
        q = int(round(e))
        pv = coef_lower + coef_upper
        delta = 1j * math.pi * (-1.0) ** (q - 1) / math.factorial(q - 1) * (coef_lower - coef_upper)
        return HomogeneousDistribution(exponent=float(q), pv_coef=pv, delta_coef=delta)
    rot = cmath.exp(1j * math.pi * e)
    return HomogeneousDistribution(
        exponent=e,
        coef_plus=coef_lower + coef_upper,
        coef_minus=coef_lower * rot + coef_upper / rot,
    )


# ---------------------------------------------------------------------------
# Singularity parameters and the CTB
# ---------------------------------------------------------------------------

OP_KINDS = ("local", "hilbert", "fractional")


@dataclass(frozen=True)
class SingularityParams:
    """Parameter tuple driving the transition-behavior formulas.

    n: ambient dimension; beta: filter order; s: data singularity order;
    b_plus/b_minus: filter coefficients at the two normal directions;
    a_plus/a_minus: data coefficients of p_+^(s-1) / p_-^(s-1);
    det_hess: |det H''| > 0 of the interface's direction Hessian;
    v_plus/v_minus: optional symbol values when the data is an actual
    line-integral transform (used by the f / f-hat singularity formulas).
    """

    n: int
    beta: float
    s: float
    b_plus: complex
    b_minus: complex
    a_plus: complex
    a_minus: complex
    det_hess: float = 1.0
    v_plus: complex | None = None
    v_minus: complex | None = None
    op_kind: str = "local"

    def __post_init__(self):
        if self.n < 2:
            raise UnsupportedParametersError("dimension n must be >= 2")
        if self.det_hess <= 0:
            raise UnsupportedParametersError("det_hess must be positive")
        if self.op_kind not in OP_KINDS:
            raise UnsupportedParametersError(f"op_kind must be one of {OP_KINDS}")
        if self.kappa1 < -1e-12:
            raise UnsupportedParametersError(
                f"kappa1 = s - (n+1)/2 = {self.kappa1:.6g} must be >= 0"
            )
        if self.kappa2 < -1e-12:
            raise UnsupportedParametersError(
                f"kappa2 = beta - s - (n-3)/2 = {self.kappa2:.6g} must be >= 0"
            )
        beta_int = abs(self.beta - round(self.beta)) < 1e-12
        if self.op_kind == "fractional" and beta_int:
            raise UnsupportedParametersError("fractional op_kind needs non-integer beta")
        if self.op_kind in ("local", "hilbert"):
            if not beta_int:
                raise UnsupportedParametersError(f"{self.op_kind} op_kind needs integer beta")
            parity = (-1.0) ** round(self.beta)
            want = parity if self.op_kind == "local" else -parity
            if abs(self.b_minus - want * self.b_plus) > 1e-9 * (abs(self.b_plus) + 1e-300):
                raise UnsupportedParametersError(
                    f"{self.op_kind} filter requires b_minus = {want:+g} * b_plus"
                )

    @property
    def kappa1(self) -> float:
        return self.s - (self.n + 1) / 2.0

    @property
    def kappa2(self) -> float:
        return self.beta - self.s - (self.n - 3) / 2.0

    @cached_property
    def c1(self) -> tuple[complex, complex]:
        """Filter-times-data coefficients of the profile's Fourier law."""
        g = math.gamma(self.s)
        rot = cmath.exp(1j * math.pi * self.s / 2.0)
        plus = g * self.b_plus * (self.a_plus * rot + self.a_minus / rot)
        minus = g * self.b_minus * (self.a_plus / rot + self.a_minus * rot)
        return plus, minus

    @cached_property
    def c2(self) -> tuple[complex, complex]:
        rot = cmath.exp(-1j * math.pi * (self.n - 1) / 4.0)
        return self.c1[0] * rot, self.c1[1] / rot

    @cached_property
    def c3_plus(self) -> complex:
        return self.c1[0] * cmath.exp(-1j * math.pi * (self.n - 3) / 4.0)

    def ratio_condition_defect(self) -> float:
        """Relative defect of the kappa2 = 0 coefficient-ratio condition."""
        target = cmath.exp(-1j * math.pi * (self.beta - self.s))
        c_plus, c_minus = self.c1
        scale = max(abs(c_plus), abs(c_minus))
        if scale == 0:
            return 0.0
        return abs(c_minus - target * c_plus) / scale


@dataclass(frozen=True)
class CtbSpec:
    """Singularity parameters plus the CTB amplitude coefficients.

    mu_plus / mu_minus are twice the product of the filter and symbol
    amplitudes at +-Theta0 (equal to 2 b+- v+- when the data comes from an
    actual transform); ratio_defect records the kappa2 = 0 coefficient
    condition, which construction checks but does not enforce.
    """

    params: SingularityParams
    mu_plus: complex
    mu_minus: complex
    ratio_defect: float

    @property
    def ratio_condition_ok(self) -> bool:
        return self.ratio_defect < 1e-9


def ctb_spec(params: SingularityParams) -> CtbSpec:
    pref = 2.0 * (2.0 * math.pi) ** ((params.n - 1) / 2.0) / math.sqrt(params.det_hess)
    c2p, c2m = params.c2
    return CtbSpec(
        params=params,
        mu_plus=pref / 2.0 * 2.0 * c2p,
        mu_minus=pref / 2.0 * 2.0 * c2m,
        ratio_defect=params.ratio_condition_defect(),
    )


def _as_spec(spec) -> CtbSpec:
    if isinstance(spec, SingularityParams):
        return ctb_spec(spec)
    return spec


def ctb_distribution(spec, normalization: str = "step") -> HomogeneousDistribution:
    """The CTB mu as a homogeneous distribution.

    kappa2 > 0: the inverse Fourier transform of
    mu_+ lambda_+^(kappa2-1) + mu_- lambda_-^(kappa2-1), resolved into
    one-sided powers (plus a delta part at integer kappa2).

    kappa2 = 0: "step" fixes the one-sided t_-^0 normalization (unique);
    "sign" gives the odd form (mu_+/2)(-i) sgn t, which differs from the
    step form by an additive constant only. Requires the coefficient
    ratio condition.
    """
    spec = _as_spec(spec)
    p = spec.params
    k2 = p.kappa2
    if k2 < -1e-12:
        raise UnsupportedParametersError("kappa2 must be >= 0")
    if k2 > 1e-12:
        g = math.gamma(k2)
        q2 = cmath.exp(-1j * math.pi * k2 / 2.0)
        lower = g * q2 * spec.mu_plus / (2.0 * math.pi)
        upper = g * spec.mu_minus / (2.0 * math.pi * q2)
        return _resolve_boundary_powers(k2, lower, upper)
    if not spec.ratio_condition_ok:
        raise UnsupportedParametersError(
            "kappa2 = 0 requires the coefficient ratio condition "
            f"(relative defect {spec.ratio_defect:.3e})"
        )
    if normalization == "step":
        coef = 2.0 * (2.0 * math.pi) ** ((p.n - 1) / 2.0) / math.sqrt(p.det_hess) * p.c3_plus
        return HomogeneousDistribution(exponent=0.0, coef_minus=coef)
    if normalization == "sign":
        amp = -1j * spec.mu_plus / 2.0
        return HomogeneousDistribution(exponent=0.0, coef_plus=amp, coef_minus=-amp)
    raise ValueError("normalization must be 'step' or 'sign'")


def ctb_mu(spec, t, normalization: str = "step"):
    """Pointwise CTB value mu(t) away from t = 0 (regular part).

    For kappa2 > 0 the value at t = 0 does not exist; requesting it
    raises. For integer kappa2 the delta-derivative part is tracked by
    the distribution object, not the pointwise value.
    """
    spec = _as_spec(spec)
    dist = ctb_distribution(spec, normalization=normalization)
    t_arr = np.asarray(t, dtype=float)
    if spec.params.kappa2 > 1e-12 and np.any(t_arr == 0.0):
        raise ValueError("mu(t) is singular at t = 0 for kappa2 > 0")
    return dist.regular_value(t)


def _kernel_poly(k: Kernel, aperture: str = "none") -> PiecewisePoly:
    if aperture == "none":
        return k.recentered(0)
    if aperture == "box":
        return k.recentered(0).box_smoothed(1.0)
    raise ValueError("aperture must be 'none' or 'box'")


def dtb(spec, k: Kernel, h, aperture: str = "none", normalization: str = "step"):
    """The DTB (phi_c * mu)(h); with a box aperture, ((phi_c * box) * mu)(h).

    Closed form: the one-sided power / principal-value / delta parts of mu
    are each convolved against the piecewise-polynomial kernel exactly.
    """
    spec = _as_spec(spec)
    dist = ctb_distribution(spec, normalization=normalization)
    return dist.convolve(_kernel_poly(k, aperture), h)


def lt_edge_response(k: Kernel, jump: float, h, aperture: str = "none"):
    """Unit-normalized edge response of the second-derivative filter.

    jump * PV integral of phi_c(h - r) / (pi r) dr, exact per polynomial
    piece. This is the closed-form profile a jump of the given size
    produces in the rescaled discrete reconstruction at a generic point.
    """
    poly = _kernel_poly(k, aperture)
    return jump / math.pi * np.real(pv_convolution(poly, h))


# ---------------------------------------------------------------------------
# The filtered kernel B phi and the lattice profiles psi / Psi
# ---------------------------------------------------------------------------

class _FilteredKernel:
    """Evaluates (B phi_c)(u) for the three filter kinds.

    local: b+ i^beta phi_c^(beta), compactly supported.
    hilbert: b+ i^(beta-1) H(phi_c^(beta)), exact log-kernel transform.
    fractional: one-sided power integrals against phi_c^(ceil beta).
    Decay for the non-local kinds is O(|u|^-(beta+1)).
    """

    def __init__(self, params: SingularityParams, k: Kernel, aperture: str = "none"):
        self.params = params
        base = _kernel_poly(k, aperture)
        if params.op_kind == "local":
            b = int(round(params.beta))
            self.poly = base.derivative(b).scaled(params.b_plus * (1j) ** b)
            self.compact = True
        elif params.op_kind == "hilbert":
            b = int(round(params.beta))
            self.poly = base.derivative(b)
            self.scale = params.b_plus * (1j) ** (b - 1) / math.pi
            self.compact = False
        else:
            b = params.beta
            kk = int(math.floor(b)) + 1
            nu = b - math.floor(b)
            self.poly = base.derivative(kk)
            self.refl = self.poly.reflected()
            self.nu = nu
            gam = math.gamma(1.0 - nu)
            e_minus = gam * cmath.exp(-1j * math.pi * (1.0 - nu) / 2.0)
            e_plus = gam * cmath.exp(1j * math.pi * (1.0 - nu) / 2.0)
            rot = cmath.exp(-1j * math.pi * (nu - 1.0))
            # match c+ F(g+) + c- F(g-) = b(lambda) at lambda = +-1
            m11 = e_minus * (-1j) ** kk
            m12 = e_plus * (-1j) ** kk
            m21 = e_minus * (1j) ** kk * rot
            m22 = e_plus * (1j) ** kk / rot
            det = m11 * m22 - m12 * m21
            self.c_plus = (params.b_plus * m22 - params.b_minus * m12) / det
            self.c_minus = (m11 * params.b_minus - m21 * params.b_plus) / det
            self.compact = False

    def __call__(self, u):
        p = self.params
        if p.op_kind == "local":
            return self.poly(u)
        if p.op_kind == "hilbert":
            return self.scale * pv_convolution(self.poly, u)
        # fractional: integrals of phi^(k)(q) (q - u)_+-^(-nu) dq
        m_plus = power_convolution(self.refl, -np.asarray(u, dtype=float), -self.nu, +1)
        m_minus = power_convolution(self.refl, -np.asarray(u, dtype=float), -self.nu, -1)
        return self.c_plus * m_plus + self.c_minus * m_minus

    @property
    def support_radius(self) -> float:
        lo, hi = self.poly.support
        return max(abs(lo), abs(hi))


def _a_weights(params: SingularityParams, u):
    """A(u) = a+ u_+^(s-1) + a- u_-^(s-1)."""
    u = np.asarray(u, dtype=float)
    e = params.s - 1.0
    pos = np.where(u > 0, u, 0.0) ** e
    neg = np.where(u < 0, -u, 0.0) ** e
    return params.a_plus * pos + params.a_minus * neg


def psi(spec, k: Kernel, t, p, aperture: str = "none", tail_tol: float = 1e-9):
    """Lattice profile psi(t, p) = sum_j (B phi_c)(t - j) A(j - p).

    Absolutely convergent since beta - s + 1 > 0. For the local filter
    kind the sum is finite (compact support); for the non-local kinds it
    is truncated once the algebraic tail bound drops below ``tail_tol``
    (absolute). Vectorized over broadcastable t, p.
    """
    params = _as_spec(spec).params
    if params.beta - params.s + 1.0 <= 0:
        raise UnsupportedParametersError("psi requires beta - s + 1 > 0")
    fk = _FilteredKernel(params, k, aperture)
    return _psi_sum(fk, params, t, p, tail_tol=tail_tol)


def _psi_window(fk: _FilteredKernel, params: SingularityParams, gap: float,
                tail_tol: float) -> int:
    rad = int(math.ceil(fk.support_radius)) + 1
    if fk.compact:
        return rad
    decay = params.beta + 1.0
    grow = params.s - 1.0
    amax = max(abs(params.a_plus), abs(params.a_minus), 1e-300)
    u0 = fk.support_radius + 2.0
    cal = float(max(abs(complex(fk(np.array([u0]))[0])),
                    abs(complex(fk(np.array([-u0]))[0]))))
    c_decay = cal * u0**decay + 1e-300
    d = rad + 2
    while d < 60000:
        tail = (
            2.0 * amax * c_decay * (d + gap) ** grow
            * d ** (1.0 - decay) / max(decay - 1.0 - grow, 0.1)
        )
        if tail < tail_tol:
            break
        d = int(d * 1.5) + 1
    return d


def _psi_sum(fk: _FilteredKernel, params: SingularityParams, t, p,
             tail_tol: float = 1e-9):
    t, p = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(p, dtype=float))
    scalar = t.ndim == 0
    tv = np.atleast_1d(t).astype(float)
    pv = np.atleast_1d(p).astype(float)
    base = np.floor(tv).astype(int)
    gap = float(np.max(np.abs(tv - pv))) if tv.size else 0.0
    D = _psi_window(fk, params, gap, tail_tol)
    offsets = np.arange(-D, D + 1)
    out = np.zeros(tv.shape, dtype=complex)
    chunk = max(8, int(5_000_000 // max(tv.size, 1)))
    for start in range(0, len(offsets), chunk):
        block = offsets[start : start + chunk]
        j = base[..., None] + block
        vals = fk(tv[..., None] - j) * _a_weights(params, j - pv[..., None])
        out += vals.sum(axis=-1)
    return out[0] if scalar else out


def _psi_weight_distribution(params: SingularityParams) -> HomogeneousDistribution:
    """Psi = phi_c convolved with this distribution (Fourier route)."""
    gamma_exp = params.beta - params.s  # > -1
    e = gamma_exp + 1.0
    c_plus, c_minus = params.c1
    g = math.gamma(e)
    lower = c_plus * g * cmath.exp(-1j * math.pi * e / 2.0) / (2.0 * math.pi)
    upper = c_minus * g * cmath.exp(1j * math.pi * e / 2.0) / (2.0 * math.pi)
    return _resolve_boundary_powers(e, lower, upper)


def capital_psi(spec, k: Kernel, t):
    """Continuum profile Psi(t) = integral (B phi_c)(t - r) A(r) dr.

    Evaluated as the exact convolution of phi_c with the homogeneous
    distribution carrying the c^(1) coefficients; closed form per piece.
    """
    params = _as_spec(spec).params
    if params.beta - params.s + 1.0 <= 0:
        raise UnsupportedParametersError("Psi requires beta - s + 1 > 0")
    dist = _psi_weight_distribution(params)
    return dist.convolve(k.recentered(0), t)


def dtb_double_integral_oracle(spec, k: Kernel, h, A: float = 50.0,
                               aperture: str = "none"):
    """Quadrature route to the DTB through the lattice profile psi.

    prefactor * int_0^A int_0^1 psi(h + r, r - t^2) dr t^(n-2) dt with
    prefactor 2^((n+1)/2) |S^(n-2)| / sqrt|det H''|. The inner integral is
    segmented Gauss-Legendre with a square-root substitution at the data
    kink; the outer integral is adaptive quadrature. Truncation error is
    O(1/A^2). Serves as the independent check of ``dtb``.
    """
    if A <= 0:
        raise ValueError("truncation A must be positive")
    spec = _as_spec(spec)
    params = spec.params
    n = params.n
    if n == 2:
        sphere = 2.0
    else:
        sphere = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
    pref = 2.0 ** ((n + 1) / 2.0) * sphere / math.sqrt(params.det_hess)
    fk = _FilteredKernel(params, k, aperture)
    nodes, weights = np.polynomial.legendre.leggauss(16)

    h_arr = np.atleast_1d(np.asarray(h, dtype=float))
    out = np.zeros(h_arr.shape, dtype=complex)
    for idx, hval in enumerate(h_arr):
        def inner(tt, hval=hval):
            return _psi_inner_integral(fk, params, hval, tt * tt, nodes, weights)

        pts = [math.sqrt(m) for m in range(1, 26) if math.sqrt(m) < A]
        re, _ = quad(lambda tt: (inner(tt) * tt ** (n - 2)).real, 0.0, A,
                     points=pts, limit=300, epsabs=1e-9, epsrel=1e-9)
        im, _ = quad(lambda tt: (inner(tt) * tt ** (n - 2)).imag, 0.0, A,
                     points=pts, limit=300, epsabs=1e-9, epsrel=1e-9)
        out[idx] = re + 1j * im
    out *= pref
    return out[0] if np.ndim(h) == 0 else out


def _psi_inner_integral(fk, params, h, tsq, nodes, weights):
    """int_0^1 psi(h + r, r - tsq) dr by kink-aware Gauss-Legendre."""
    kink_a = (-h) % 1.0        # filtered-kernel knots
    kink_d = tsq % 1.0         # data-power kink
    cuts = sorted({0.0, 1.0, kink_a, kink_d})
    total = 0.0 + 0.0j
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-14:
            continue
        # anchor a sqrt substitution at a data kink endpoint
        if abs(a - kink_d) < 1e-14 and params.s - 1.0 < 1.0:
            xi = np.sqrt(nodes * 0.5 + 0.5) * math.sqrt(b - a)
            r = a + xi**2
            jac = (b - a) * 0.5  # dr = 2 xi dxi, absorbed below
            vals = _psi_sum(fk, params, h + r, r - tsq)
            total += np.sum(weights * vals) * jac
        elif abs(b - kink_d) < 1e-14 and params.s - 1.0 < 1.0:
            xi = np.sqrt(nodes * 0.5 + 0.5) * math.sqrt(b - a)
            r = b - xi**2
            jac = (b - a) * 0.5
            vals = _psi_sum(fk, params, h + r, r - tsq)
            total += np.sum(weights * vals) * jac
        else:
            r = (nodes * 0.5 + 0.5) * (b - a) + a
            vals = _psi_sum(fk, params, h + r, r - tsq)
            total += np.sum(weights * vals) * (b - a) * 0.5
    return total


# ---------------------------------------------------------------------------
# Leading singularities of f and its transform (no-log parameter class)
# ---------------------------------------------------------------------------

def _omega_factor(params: SingularityParams, side: int) -> complex:
    """Stationary-phase amplitude at side * Theta0.

    The direction Hessian is negative definite on the + side, so its
    signature is -side * (n - 1).
    """
    sgn = -side * (params.n - 1)
    return (
        math.sqrt(params.det_hess)
        * cmath.exp(-1j * math.pi / 4.0 * sgn)
        / (2.0 * math.pi) ** ((params.n - 1) / 2.0)
    )


def _require_symbols(params: SingularityParams):
    if params.v_plus is None or params.v_minus is None:
        raise ValueError("operation requires the symbol values v_plus / v_minus")


def f0_singularity(params: SingularityParams, p):
    """Leading singularity profile of f across the interface at x0.

    Non-integer kappa1 uses the two-sided power form; integer kappa1
    requires v_minus = (-1)^(kappa1+1) v_plus (otherwise the profile
    develops logarithms, which are out of the supported class) and gives
    the odd power-times-sign form.
    """
    _require_symbols(params)
    k1 = params.kappa1
    n = params.n
    p_arr = np.asarray(p, dtype=float)
    if abs(k1 - round(k1)) < 1e-9:
        m = int(round(k1))
        want = (-1.0) ** (m + 1) * params.v_plus
        if abs(params.v_minus - want) > 1e-9 * (abs(params.v_plus) + 1e-300):
            raise UnsupportedParametersError(
                "integer kappa1 with v_minus != (-1)^(kappa1+1) v_plus "
                "produces logarithmic terms (unsupported)"
            )
        coef = params.v_plus / (
            2.0 * (2.0 * math.pi) ** (n - 1) * (1j) ** (m + 1) * math.factorial(m)
        )
        out = coef * p_arr**m * np.sign(p_arr)
        return out[()] if np.ndim(p) == 0 else out
    q1 = cmath.exp(1j * k1 * math.pi / 2.0)
    pref = -1.0 / (2.0 * (2.0 * math.pi) ** (n - 1) * math.sin(math.pi * k1) * math.gamma(k1 + 1.0))
    c_pos = pref * (q1 * params.v_plus + params.v_minus / q1)
    c_neg = pref * (q1 * params.v_minus + params.v_plus / q1)
    pos = np.where(p_arr > 0, p_arr, 0.0) ** k1
    neg = np.where(p_arr < 0, -p_arr, 0.0) ** k1
    out = c_pos * pos + c_neg * neg
    return out[()] if np.ndim(p) == 0 else out


def fhat0_coefficients(params: SingularityParams, side: int = +1) -> tuple[complex, complex]:
    """(a_plus, a_minus) of the transform's leading singularity at side*Theta0."""
    _require_symbols(params)
    s = params.s
    v_here = params.v_plus if side > 0 else params.v_minus
    v_there = params.v_minus if side > 0 else params.v_plus
    w_here = _omega_factor(params, side)
    w_there = _omega_factor(params, -side)
    if abs(s - round(s)) < 1e-9:
        m = int(round(s))
        want = cmath.exp(-1j * math.pi * (params.kappa1 + 1.0)) * v_here
        if abs(v_there - want) > 1e-9 * (abs(v_here) + 1e-300):
            raise UnsupportedParametersError(
                "integer s with v(-alpha) != exp(-i pi (kappa1+1)) v(alpha) "
                "produces logarithmic terms (unsupported)"
            )
        coef = w_here * v_here / (2.0 * (1j) ** m * math.factorial(m - 1))
        # p^(s-1) sgn p = p_+^(s-1) + (-1)^s p_-^(s-1)
        return coef, coef * (-1.0) ** m
    pref = 1.0 / (2.0 * math.sin(math.pi * s) * math.gamma(s))
    rot = cmath.exp(1j * (s - 1.0) * math.pi / 2.0)
    a_plus = pref * (w_here * v_here * rot + w_there * v_there / rot)
    a_minus = pref * (w_here * v_here / rot + w_there * v_there * rot)
    return a_plus, a_minus


def fhat0_singularity(params: SingularityParams, side: int, p):
    """Leading transform profile a+ p_+^(s-1) + a- p_-^(s-1) at side*Theta0."""
    a_plus, a_minus = fhat0_coefficients(params, side)
    p_arr = np.asarray(p, dtype=float)
    e = params.s - 1.0
    pos = np.where(p_arr > 0, p_arr, 0.0) ** e
    neg = np.where(p_arr < 0, -p_arr, 0.0) ** e
    out = a_plus * pos + a_minus * neg
    return out[()] if np.ndim(p) == 0 else out


# ---------------------------------------------------------------------------
# Ready-made parameter sets
# ---------------------------------------------------------------------------

def lt_unit_spec() -> SingularityParams:
    """Second-derivative filter with unit profile weights.

    Normalized so (B phi_c) = phi_c'' and A(u) = u_+^(1/2): the raw
    lattice profile of the 2D Lambda filter.
    """
    return SingularityParams(
        n=2, beta=2.0, s=1.5,
        b_plus=-1.0, b_minus=-1.0,
        a_plus=1.0, a_minus=0.0,
        det_hess=1.0,
    )


def lt_disk_spec(R: float = 1.0, jump: float = 1.0) -> SingularityParams:
    """2D Lambda filter on a disk-type edge of curvature radius R.

    jump is the density step crossing the boundary toward the center of
    curvature (interior minus exterior). The CTB is jump / (pi t).
    """
    v_plus = 1j * 2.0 * math.pi * jump
    base = SingularityParams(
        n=2, beta=2.0, s=1.5,
        b_plus=1.0 / (4.0 * math.pi), b_minus=1.0 / (4.0 * math.pi),
        a_plus=0.0, a_minus=0.0,
        det_hess=R,
        v_plus=v_plus, v_minus=-v_plus,
    )
    a_plus, a_minus = fhat0_coefficients(base, +1)
    return SingularityParams(
        n=2, beta=2.0, s=1.5,
        b_plus=base.b_plus, b_minus=base.b_minus,
        a_plus=a_plus, a_minus=a_minus,
        det_hess=R,
        v_plus=v_plus, v_minus=-v_plus,
    )


def exact3d_spec(det_hess: float = 1.0, jump: float = 1.0) -> SingularityParams:
    """3D smoothness-preserving reconstruction of a one-sided jump.

    kappa2 = 0; the CTB is the unit step -jump * t_-^0 and the DTB is
    -jump * int_h^inf phi_c.
    """
    v_plus = 1j * (2.0 * math.pi) ** 2 * jump
    base = SingularityParams(
        n=3, beta=2.0, s=2.0,
        b_plus=1.0 / (8.0 * math.pi**2), b_minus=1.0 / (8.0 * math.pi**2),
        a_plus=0.0, a_minus=0.0,
        det_hess=det_hess,
        v_plus=v_plus, v_minus=-v_plus,
    )
    a_plus, a_minus = fhat0_coefficients(base, +1)
    return SingularityParams(
        n=3, beta=2.0, s=2.0,
        b_plus=base.b_plus, b_minus=base.b_minus,
        a_plus=a_plus, a_minus=a_minus,
        det_hess=det_hess,
        v_plus=v_plus, v_minus=-v_plus,
    )


# ---------------------------------------------------------------------------
# Non-local artifact models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineEdge:
    """A vertical jump edge from (H, b1) to (H, b2), observed near (H, b0)."""

    H: float
    b0: float
    b1: float
    b2: float

    def __post_init__(self):
        if self.b1 >= self.b2:
            raise ValueError("edge requires b1 < b2")
        if self.b1 <= self.b0 <= self.b2:
            raise ValueError("observation ordinate b0 must lie outside [b1, b2]")


def _edge_ramp(p, t1, t2, jump):
    """Ramp profile of a finite straight edge's transform near tangency."""
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    p = np.asarray(p, dtype=float)
    mid = jump * (hi - p) / np.maximum(hi - lo, 1e-300)
    return np.where(p <= lo, jump, np.where(p >= hi, 0.0, mid))


def line_artifact_model(k: Kernel, geometry: ScanGeometry, edge: LineEdge,
                        h: float, eps: float, A: float = 20.0) -> float:
    """Rescaled artifact amplitude on the extension of a flat edge.

    Finite double sum over the directions nearly parallel to the edge;
    the result is the O(1) amplitude multiplying 1/eps in the
    reconstruction near (H, b0) + h*eps*(1, 0). Requires a non-integer
    angular offset so no sampled direction is exactly parallel.
    """
    q_alpha = geometry.q_alpha
    if abs(q_alpha - round(q_alpha)) < 1e-12:
        raise ValueError("line artifact model requires a non-integer angular offset")
    if eps <= 0:
        raise ValueError("eps must be positive")
    kappa = geometry.kappa
    jump = edge.b2 - edge.b1
    phipp = k.recentered(2)
    k_max = int(math.ceil(A / kappa))
    total = 0.0
    for kk in range(-k_max, k_max + 1):
        tau = q_alpha + kk
        if abs(kappa * tau) >= A:
            continue
        r_k = (edge.H / eps + edge.b0 * kappa * tau) % 1.0
        t1 = (edge.b1 - edge.b0) * kappa * tau
        t2 = (edge.b2 - edge.b0) * kappa * tau
        j0 = int(math.floor(h + r_k))
        js = np.arange(j0 - 3, j0 + 5)
        w = phipp(h + r_k - js)
        total += float(np.real(np.sum(w * _edge_ramp(js - r_k, t1, t2, jump))))
    return -kappa / (2.0 * math.pi) * total


@dataclass(frozen=True)
class RemoteSite:
    """Observation point x0 seeing the boundary's tangent line at z0.

    theta0 is the angle of the direction normal to that tangent line;
    rho is the singularity weight of the boundary point z0 (for a
    density-f edge of curvature radius R, rho = -f * sqrt(2 R) / pi).
    """

    x0: tuple[float, float]
    z0: tuple[float, float]
    theta0: float
    rho: float


def remote_ripple_model(k: Kernel, geometry: ScanGeometry, site: RemoteSite,
                        h: float, eps: float, chi_halfwidth: float = 0.15,
                        tail_tol: float = 1e-6) -> float:
    """Ripple amplitude at a point away from the boundary.

    Lattice sum of the profile psi over directions near the remote
    tangent direction; the value carries the eps^(-1/2) scale explicitly
    and does not converge as eps -> 0. The sum is truncated by the
    psi tail bound O((t - p)^(-3/2)) and by the angular window.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x0 = np.asarray(site.x0, dtype=float)
    z0 = np.asarray(site.z0, dtype=float)
    theta0 = site.theta0
    perp = np.array([-math.sin(theta0), math.cos(theta0)])
    gap = float(np.dot(perp, z0 - x0))
    if abs(gap) < 1e-12:
        raise ValueError("remote-site model requires Theta0_perp . (z0 - x0) != 0")
    kappa = geometry.kappa
    q_alpha = geometry.q_alpha
    phipp = k.recentered(2)

    # directions cluster around theta0; terms fall off like |t - p|^(-3/2)
    # with |t - p| growing by |gap| * kappa per step away from the center
    k_center = theta0 / (kappa * eps) - q_alpha
    t_cut = (2.0 / tail_tol) ** (2.0 / 3.0)
    rad = int(min(chi_halfwidth / (kappa * eps), t_cut / (abs(gap) * kappa))) + 1
    k0 = int(round(k_center))
    ks = np.arange(k0 - rad, k0 + rad + 1)
    alphas = kappa * eps * (q_alpha + ks)
    r_k = ((np.cos(alphas) * x0[0] + np.sin(alphas) * x0[1]) / eps) % 1.0
    p_arg = r_k + gap * (kappa * (q_alpha + ks) - theta0 / eps)
    t_arg = h + r_k
    vals = np.zeros(len(ks))
    base = np.floor(t_arg).astype(int)
    for d in range(-3, 4):
        j = base + d
        u = j - p_arg
        vals += np.real(phipp(t_arg - j)) * np.where(u > 0, u, 0.0) ** 0.5
    return kappa * site.rho / math.sqrt(eps) * float(np.sum(vals))
