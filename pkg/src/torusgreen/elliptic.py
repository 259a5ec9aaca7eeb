"""Weierstrass elliptic kernel on rectangular lattices Z + Z(ib).

Evaluation goes through Fourier series in u = exp(2*pi*i*z) with nome
q = exp(2*pi*i*tau), tau = ib:

    wp(z)   = (2*pi*i)^2 [ 1/12 + u/(1-u)^2
              + sum_n ( q^n u/(1-q^n u)^2 + q^n/u/(1-q^n/u)^2 - 2 q^n/(1-q^n)^2 ) ]
    wp'(z)  = (2*pi*i)^3 [ u(1+u)/(1-u)^3
              + sum_n ( w(1+w)/(1-w)^3 - v(1+v)/(1-v)^3 ) ],  w = q^n u, v = q^n/u
    zeta(z) = eta1 z + pi*i (u+1)/(u-1) + 2*pi*i sum_n ( v/(1-v) - w/(1-w) )

Arguments are reduced to the fundamental cell r, s in [-1/2, 1/2) of
z = r + s*tau before summing; zeta is unwound back to the supplied
representative through the quasi-periods, so it is the honest meromorphic
function on C rather than a torus function.

For b < 1 every evaluation is routed through the rescaled lattice
tau' = i/b (so the effective nome never exceeds exp(-2*pi)) and mapped
back by homogeneity:

    wp(z; ib)   = -b^-2  * wp(-i z / b; i/b)
    wp'(z; ib)  =  i b^-3 * wp'(-i z / b; i/b)
    zeta(z; ib) = -i b^-1 * zeta(-i z / b; i/b)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError, RangeError

TWO_PI = 2.0 * math.pi
_C_WP = (2j * math.pi) ** 2          # -4 pi^2
_C_WPP = (2j * math.pi) ** 3         # -8 pi^3 i
_POLE_GUARD = 1e-9                   # wrapped (r, s) distance
_SERIES_CAP = 64

# ---------------------------------------------------------------------------
# cell reduction
# ---------------------------------------------------------------------------


def wrap_half(x):
    """Wrap real coordinate(s) into [-1/2, 1/2)."""
    return x - np.floor(x + 0.5) if isinstance(x, np.ndarray) else x - math.floor(x + 0.5)


def reduce_cell(z, b):
    """Split z = z_red + m + n*(ib) with the (r, s) of z_red in [-1/2, 1/2).

    Works on complex scalars and ndarrays; returns (z_red, m, n).
    """
    if isinstance(z, np.ndarray):
        r = z.real
        s = z.imag / b
        m = np.floor(r + 0.5)
        n = np.floor(s + 0.5)
        return (r - m) + 1j * b * (s - n), m, n
    r = z.real
    s = z.imag / b
    m = math.floor(r + 0.5)
    n = math.floor(s + 0.5)
    return complex(r - m, b * (s - n)), m, n


def cell_coord_dist(z, b):
    """Wrapped distance of z from the lattice in (r, s) coordinates."""
    if isinstance(z, np.ndarray):
        return np.hypot(wrap_half(z.real), wrap_half(z.imag / b))
    return math.hypot(wrap_half(z.real), wrap_half(z.imag / b))


def torus_dist(z, b):
    """Euclidean distance in C between z and the nearest lattice point of Z+Z(ib)."""
    if isinstance(z, np.ndarray):
        return np.hypot(wrap_half(z.real), b * wrap_half(z.imag / b))
    return math.hypot(wrap_half(z.real), b * wrap_half(z.imag / b))


# ---------------------------------------------------------------------------
# series kernel at aspect ratio >= 1
# ---------------------------------------------------------------------------


def _lambert_sum(q: float, k: int) -> float:
    """sum_{n>=1} n^k q^n / (1 - q^n), truncated at relative 1e-18."""
    acc = 0.0
    qn = 1.0
    for n in range(1, 256):
        qn *= q
        term = (n ** k) * qn / (1.0 - qn)
        acc += term
        if term < 1e-18 * (abs(acc) + 1.0):
            break
    return acc


@dataclass(frozen=True)
class _SeriesKernel:
    """Precomputed data for direct series evaluation; requires b >= 1."""

    b: float
    q: float
    qn: tuple = field(repr=False)
    eta1: float = 0.0
    eta2: complex = 0j
    g2: float = 0.0
    g3: float = 0.0
    log_q_prod: float = field(default=0.0, repr=False)  # sum_n 2 log(1 - q^n)


def make_series_kernel(b: float) -> _SeriesKernel:
    if b < 1.0 - 1e-12:
        raise DomainError(f"series kernel needs b >= 1, got {b}")
    q = math.exp(-TWO_PI * b)
    # worst-case term magnitude is exp(-(2n-1) pi b); push below 1e-18
    nterms = min(_SERIES_CAP, max(3, math.ceil((18.0 * math.log(10.0) / (math.pi * b) + 1.0) / 2.0) + 1))
    qn = tuple(q ** n for n in range(1, nterms + 1))
    eta1 = (math.pi ** 2 / 3.0) * (1.0 - 24.0 * _lambert_sum(q, 1))
    tau = 1j * b
    eta2 = tau * eta1 - 2j * math.pi
    g2 = (4.0 * math.pi ** 4 / 3.0) * (1.0 + 240.0 * _lambert_sum(q, 3))
    g3 = (8.0 * math.pi ** 6 / 27.0) * (1.0 - 504.0 * _lambert_sum(q, 5))
    log_q_prod = sum(2.0 * math.log1p(-p) for p in qn)
    return _SeriesKernel(b=b, q=q, qn=qn, eta1=eta1, eta2=eta2, g2=g2, g3=g3,
                         log_q_prod=log_q_prod)


# scalar series (cmath): z must already be reduced to the kernel's cell


def _wp_red_s(k: _SeriesKernel, z: complex) -> complex:
    u = cmath.exp(2j * math.pi * z)
    d = 1.0 - u
    acc = 1.0 / 12.0 + u / (d * d)
    for p in k.qn:
        w = p * u
        v = p / u
        dw = 1.0 - w
        dv = 1.0 - v
        dq = 1.0 - p
        acc += w / (dw * dw) + v / (dv * dv) - 2.0 * p / (dq * dq)
    return _C_WP * acc


def _wpp_red_s(k: _SeriesKernel, z: complex) -> complex:
    u = cmath.exp(2j * math.pi * z)
    d = 1.0 - u
    acc = u * (1.0 + u) / (d * d * d)
    for p in k.qn:
        w = p * u
        v = p / u
        dw = 1.0 - w
        dv = 1.0 - v
        acc += w * (1.0 + w) / (dw * dw * dw) - v * (1.0 + v) / (dv * dv * dv)
    return _C_WPP * acc


def _zeta_red_s(k: _SeriesKernel, z: complex) -> complex:
    u = cmath.exp(2j * math.pi * z)
    acc = 1j * math.pi * (u + 1.0) / (u - 1.0)
    for p in k.qn:
        w = p * u
        v = p / u
        acc += 2j * math.pi * (v / (1.0 - v) - w / (1.0 - w))
    return k.eta1 * z + acc


def _logabs_sigw_red_s(k: _SeriesKernel, z: complex) -> float:
    """log | exp(-eta1 z^2 / 2) sigma(z) | for z already inside the cell."""
    uh = cmath.exp(1j * math.pi * z)
    val = -math.log(TWO_PI) + math.log(abs(uh - 1.0 / uh)) - k.log_q_prod
    u = uh * uh
    for p in k.qn:
        val += math.log(abs(1.0 - p * u)) + math.log(abs(1.0 - p / u))
    return val


# array series (numpy), same formulas


def _wp_red_a(k: _SeriesKernel, z: np.ndarray) -> np.ndarray:
    u = np.exp(2j * math.pi * z)
    d = 1.0 - u
    acc = 1.0 / 12.0 + u / (d * d)
    for p in k.qn:
        w = p * u
        v = p / u
        dw = 1.0 - w
        dv = 1.0 - v
        dq = 1.0 - p
        acc = acc + w / (dw * dw) + v / (dv * dv) - 2.0 * p / (dq * dq)
    return _C_WP * acc


def _wpp_red_a(k: _SeriesKernel, z: np.ndarray) -> np.ndarray:
    u = np.exp(2j * math.pi * z)
    d = 1.0 - u
    acc = u * (1.0 + u) / (d * d * d)
    for p in k.qn:
        w = p * u
        v = p / u
        dw = 1.0 - w
        dv = 1.0 - v
        acc = acc + w * (1.0 + w) / (dw * dw * dw) - v * (1.0 + v) / (dv * dv * dv)
    return _C_WPP * acc


def _zeta_red_a(k: _SeriesKernel, z: np.ndarray) -> np.ndarray:
    u = np.exp(2j * math.pi * z)
    acc = 1j * math.pi * (u + 1.0) / (u - 1.0)
    for p in k.qn:
        w = p * u
        v = p / u
        acc = acc + 2j * math.pi * (v / (1.0 - v) - w / (1.0 - w))
    return k.eta1 * z + acc


# kernel-level wrappers: reduce, evaluate, unwind (zeta only)


def _kern_wp(k: _SeriesKernel, z):
    zr, _, _ = reduce_cell(z, k.b)
    return _wp_red_a(k, zr) if isinstance(z, np.ndarray) else _wp_red_s(k, zr)


def _kern_wpp(k: _SeriesKernel, z):
    zr, _, _ = reduce_cell(z, k.b)
    return _wpp_red_a(k, zr) if isinstance(z, np.ndarray) else _wpp_red_s(k, zr)


def _kern_zeta(k: _SeriesKernel, z):
    zr, m, n = reduce_cell(z, k.b)
    if isinstance(z, np.ndarray):
        return _zeta_red_a(k, zr) + m * k.eta1 + n * k.eta2
    return _zeta_red_s(k, zr) + m * k.eta1 + n * k.eta2


# ---------------------------------------------------------------------------
# torus points
# ---------------------------------------------------------------------------


@dataclass
class TorusPoint:
    """A point of the torus C / (Z + Z ib), held as coordinates z = r + s*(ib).

    Stored canonically with r, s in [-1/2, 1/2).  Two points are the same
    torus point when their wrapped coordinate difference is below 1e-9.
    """

    r: float
    s: float
    b: float

    def __post_init__(self):
        self.r = wrap_half(float(self.r))
        self.s = wrap_half(float(self.s))
        self.b = float(self.b)

    @classmethod
    def from_z(cls, z: complex, b: float) -> "TorusPoint":
        z = complex(z)
        return cls(z.real, z.imag / b, b)

    @property
    def tau(self) -> complex:
        return 1j * self.b

    @property
    def z(self) -> complex:
        return complex(self.r, self.s * self.b)

    def wrapped_distance(self, other: "TorusPoint") -> float:
        return math.hypot(wrap_half(self.r - other.r), wrap_half(self.s - other.s))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorusPoint):
            return NotImplemented
        return abs(self.b - other.b) < 1e-12 and self.wrapped_distance(other) < 1e-9

    __hash__ = None  # tolerant equality is incompatible with hashing

    def __neg__(self) -> "TorusPoint":
        return TorusPoint(-self.r, -self.s, self.b)

    def half_period_index(self, tol: float = 1e-9):
        """Index k with self = omega_k/2 (0:0, 1:1/2, 2:tau/2, 3:(1+tau)/2), else None."""
        for k, (hr, hs) in enumerate(((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5))):
            if math.hypot(wrap_half(self.r - hr), wrap_half(self.s - hs)) < tol:
                return k
        return None

    @property
    def is_half_period(self) -> bool:
        return self.half_period_index() is not None


def half_period(k: int, b: float) -> TorusPoint:
    """omega_k / 2 as a TorusPoint."""
    rs = ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5))[k]
    return TorusPoint(rs[0], rs[1], b)


def as_complex(z) -> complex:
    return z.z if isinstance(z, TorusPoint) else complex(z)


# ---------------------------------------------------------------------------
# lattice-aware public API (L is a LatticeData from torusgreen.lattice)
# ---------------------------------------------------------------------------


def _pole_check(zc, b, what="argument"):
    d = cell_coord_dist(zc, b)
    if isinstance(d, np.ndarray):
        if np.any(d < _POLE_GUARD):
            raise PoleError(f"{what} within pole guard of the lattice")
    elif d < _POLE_GUARD:
        raise PoleError(f"{what} at lattice point (wrapped distance {d:.2e})")


def wp(z, L):
    """Weierstrass wp(z; ib).  Accepts TorusPoint, complex or ndarray."""
    zc = z.z if isinstance(z, TorusPoint) else z
    _pole_check(zc, L.b)
    if L._rescaled:
        return -(L.b ** -2) * _kern_wp(L._kern, -1j * zc / L.b)
    return _kern_wp(L._kern, zc)


def wp_prime(z, L):
    """wp'(z; ib); satisfies wp'^2 = 4 wp^3 - g2 wp - g3."""
    zc = z.z if isinstance(z, TorusPoint) else z
    _pole_check(zc, L.b)
    if L._rescaled:
        return (1j * L.b ** -3) * _kern_wpp(L._kern, -1j * zc / L.b)
    return _kern_wpp(L._kern, zc)


def wp_second(z, L):
    """wp''(z; ib) = 6 wp(z)^2 - g2/2."""
    w = wp(z, L)
    return 6.0 * w * w - 0.5 * L.g2


def zeta(z, L):
    """Weierstrass zeta at the *given* representative (not torus-invariant).

    zeta(z + 1) = zeta(z) + eta1 and zeta(z + tau) = zeta(z) + eta2 hold
    exactly by construction.
    """
    zc = z.z if isinstance(z, TorusPoint) else z
    _pole_check(zc, L.b)
    if L._rescaled:
        return (-1j / L.b) * _kern_zeta(L._kern, -1j * zc / L.b)
    return _kern_zeta(L._kern, zc)


def logabs_sigma_weighted(z, L) -> float:
    """log | exp(-eta1 z^2/2) sigma(z; ib) | at the canonical representative.

    Only this combination is needed (the Green potential); sigma itself grows
    like exp(quadratic) and is never formed.  The value refers to the reduced
    representative of z.
    """
    zc = z.z if isinstance(z, TorusPoint) else complex(z)
    _pole_check(zc, L.b)
    zr, _, _ = reduce_cell(zc, L.b)
    if not L._rescaled:
        return _logabs_sigw_red_s(L._kern, zr)
    # homogeneity: sigma(z; tau) = tau sigma(z/tau; tau'), and
    # eta1(tau) z^2/2 = eta1(tau') w^2/2 + pi i z^2 / tau with w = z/tau,
    # so logabs gains log|tau| - Re(pi i z^2 / tau) = log b - pi Re(z^2)/b.
    w = -1j * zr / L.b
    # w lies in |r'|,|s'| <= 1/2 for the rescaled lattice: safe to sum directly
    return (math.log(L.b) - math.pi * (zr * zr).real / L.b
            + _logabs_sigw_red_s(L._kern, w))


# ---------------------------------------------------------------------------
# restricted inverse of wp along the real-value contour
# ---------------------------------------------------------------------------

# contour segments on which wp is real and monotone (Z + Z(ib), b > 0):
#   seg_0_half:          z = t,            t in (0, 1/2]   wp: +inf -> e1
#   seg_half_corner:     z = 1/2 + t*tau,  t in [0, 1/2]   wp: e1   -> e3
#   seg_corner_tauhalf:  z = t + tau/2,    t in [0, 1/2]   wp: e2   -> e3
#   seg_tauhalf_0:       z = t*tau,        t in (0, 1/2]   wp: -inf -> e2
SEGMENTS = ("seg_0_half", "seg_half_corner", "seg_corner_tauhalf", "seg_tauhalf_0")

_T_MIN = 1e-6  # overflow guard: clamp this far from the pole at 0


def _segment_map(branch: str, b: float):
    tau = 1j * b
    if branch == "seg_0_half":
        return (lambda t: complex(t, 0.0)), 1.0 + 0j, _T_MIN
    if branch == "seg_half_corner":
        return (lambda t: 0.5 + t * tau), tau, 0.0
    if branch == "seg_corner_tauhalf":
        return (lambda t: complex(t, 0.5 * b)), 1.0 + 0j, 0.0
    if branch == "seg_tauhalf_0":
        return (lambda t: t * tau), tau, _T_MIN
    raise DomainError(f"unknown contour segment {branch!r}")


def inverse_wp_real(c: float, branch: str, L) -> TorusPoint:
    """The unique p on the requested contour segment with wp(p) = c.

    Monotone bisection in the segment parameter followed by Newton polish;
    the result satisfies |wp(p) - c| < 1e-10 * max(1, |c|).
    """
    c = float(c)
    if not math.isfinite(c):
        raise DomainError("inverse_wp_real needs a finite target value")
    zmap, dz, tmin = _segment_map(branch, L.b)
    slack = 1e-9 * max(1.0, abs(L.e1), abs(L.e2))
    if branch == "seg_0_half" and c < L.e1 - slack:
        raise RangeError(f"value {c} below e1 = {L.e1}; not on seg_0_half")
    if branch == "seg_tauhalf_0" and c > L.e2 + slack:
        raise RangeError(f"value {c} above e2 = {L.e2}; not on seg_tauhalf_0")
    if branch == "seg_half_corner" and not (L.e3 - slack <= c <= L.e1 + slack):
        raise RangeError(f"value {c} outside [e3, e1]; not on seg_half_corner")
    if branch == "seg_corner_tauhalf" and not (L.e2 - slack <= c <= L.e3 + slack):
        raise RangeError(f"value {c} outside [e2, e3]; not on seg_corner_tauhalf")

    lo, hi = tmin, 0.5
    flo = (wp(zmap(lo), L)).real - c
    fhi = (wp(zmap(hi), L)).real - c
    if flo == 0.0:
        t = lo
    elif fhi == 0.0:
        t = hi
    else:
        if flo * fhi > 0.0:
            # target beyond the pole-side clamp (|c| enormous) or endpoint
            # rounding: snap to the nearer endpoint
            t = lo if abs(flo) < abs(fhi) else hi
        else:
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = (wp(zmap(mid), L)).real - c
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi, fhi = mid, fm
                else:
                    lo, flo = mid, fm
            t = 0.5 * (lo + hi)
    # Newton polish along the segment
    target = 1e-10 * max(1.0, abs(c))
    for _ in range(40):
        zt = zmap(t)
        f = wp(zt, L) - c
        if abs(f) < 0.1 * target:
            break
        dwp = wp_prime(zt, L) * dz
        if dwp == 0:
            break
        step = (f / dwp).real
        t = min(0.5, max(tmin, t - step))
    zt = zmap(t)
    if abs(wp(zt, L) - c) > target and not (t in (tmin,) and abs(c) > 1e10):
        raise ConvergenceError(
            f"inverse_wp_real failed on {branch}: residual {abs(wp(zt, L) - c):.2e}")
    return TorusPoint.from_z(zt, L.b)
