"""Degeneracy disks B_0..B_3, thresholds d_1..d_8, and region classification.

In the wp(p)-plane the locus where the trivial critical point omega_k/2 of
G_p degenerates is the circle dB_k.  On rectangular tori all four B_k are
genuine open disks with real centers:

    B_0: center pi/b - eta1, radius pi/b
    B_k: center e_k + alpha_k / (alpha_k^2 - beta_k^2),
         radius beta_k / |alpha_k^2 - beta_k^2|,
         alpha_k = (pi/b - (eta1 + e_k)) / (3 e_k^2 - g2/4),
         beta_k  = pi / (b |3 e_k^2 - g2/4|),          k = 1, 2, 3.

Their eight real boundary crossings are the thresholds, with closed forms

    d1 = e1 + D1/(2pi/b - (e1+eta1))   d2 = e3 + D3/(2pi/b - (e3+eta1))
    d3 = -eta1                         d4 = e1 - D1/(e1+eta1)
    d5 = e2 + D2/(2pi/b - (e2+eta1))   d6 = 2pi/b - eta1
    d7 = e3 - D3/(e3+eta1)             d8 = e2 - D2/(e2+eta1)

where Dk = 3 e_k^2 - g2/4.  The strict interleaving

    d1 < wp(tau/4) < d2 < e2 < d3 < wp(1/4 + tau/2) < d4 < e3
       < d5 < wp(1/2 + tau/4) < d6 < e1 < d7 < wp(1/4) < d8

holds for every b > 0 and is enforced here as a fatal consistency check.
The closed forms are the source of truth; the disk-boundary route is kept
as a cross-check (it cancels badly near tangency).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import elliptic as el
from . import green
from .elliptic import TorusPoint, as_complex, half_period
from .errors import DomainError, InconsistencyError, PoleError

_BOUNDARY_TOL = 1e-10   # "on a circle" tolerance for region classification


@dataclass(frozen=True)
class DiskSpec:
    k: int
    center: complex
    radius: float
    kind: str = "disk"   # half-planes never occur for tau = ib

    @property
    def real_crossings(self):
        c = self.center.real
        return (c - self.radius, c + self.radius)

    def signed_dist(self, w: complex) -> float:
        """|w - center| - radius: negative inside, zero on the boundary."""
        return abs(w - self.center) - self.radius


@dataclass(frozen=True)
class RegionThresholds:
    d: tuple          # d1..d8, strictly increasing
    landmark: tuple   # wp(tau/4), e2, wp(1/4+tau/2), e3, wp(1/2+tau/4), e1, wp(1/4)


def disk(k: int, L) -> DiskSpec:
    """The open disk B_k in the wp(p)-plane."""
    if k == 0:
        return DiskSpec(k=0, center=complex(math.pi / L.b - L.eta1, 0.0),
                        radius=math.pi / L.b)
    if k not in (1, 2, 3):
        raise DomainError(f"disk index must be 0..3, got {k}")
    ek = (L.e1, L.e2, L.e3)[k - 1]
    dk = 3.0 * ek * ek - 0.25 * L.g2
    alpha = (math.pi / L.b - (L.eta1 + ek)) / dk
    beta = math.pi / (abs(dk) * L.b)
    denom = alpha * alpha - beta * beta
    if abs(abs(alpha) - beta) < 1e-12 * max(abs(alpha), beta):
        raise InconsistencyError(
            f"B_{k} degenerates to a half-plane (|alpha| = beta); impossible "
            "on a rectangular torus, upstream invariants are wrong")
    return DiskSpec(k=k, center=complex(ek + alpha / denom, 0.0),
                    radius=beta / abs(denom))


def disks(L):
    return tuple(disk(k, L) for k in range(4))


def thresholds(L) -> RegionThresholds:
    """d_1 < ... < d_8 from the closed formulas, with landmarks interleaved."""
    e1, e2, e3 = L.e1, L.e2, L.e3
    g2 = L.g2
    eta1 = L.eta1
    twopib = L.two_pi_over_b
    d1_ = 3.0 * e1 * e1 - 0.25 * g2
    d2_ = 3.0 * e2 * e2 - 0.25 * g2
    d3_ = 3.0 * e3 * e3 - 0.25 * g2
    d = (
        e1 + d1_ / (twopib - (e1 + eta1)),
        e3 + d3_ / (twopib - (e3 + eta1)),
        -eta1,
        e1 - d1_ / (e1 + eta1),
        e2 + d2_ / (twopib - (e2 + eta1)),
        twopib - eta1,
        e3 - d3_ / (e3 + eta1),
        e2 - d2_ / (e2 + eta1),
    )
    tau = L.tau
    landmark = (
        el.wp(tau / 4.0, L).real,
        e2,
        el.wp(0.25 + tau / 2.0, L).real,
        e3,
        el.wp(0.5 + tau / 4.0, L).real,
        e1,
        el.wp(0.25 + 0j, L).real,
    )
    chain = [d[0], landmark[0], d[1], landmark[1], d[2], landmark[2], d[3],
             landmark[3], d[4], landmark[4], d[5], landmark[5], d[6],
             landmark[6], d[7]]
    scale = max(abs(v) for v in chain)
    for lo, hi in zip(chain, chain[1:]):
        if not hi - lo > -1e-9 * scale:
            raise InconsistencyError(
                f"threshold interleaving chain violated: {lo} !< {hi}")
    return RegionThresholds(d=d, landmark=landmark)


def predicted_pair_count(wp_p: float, T: RegionThresholds) -> int:
    """1 on the four open intervals carrying a nontrivial pair, else 0.

    Boundary values (within 1e-12) count as 0; the branch values e_k are
    rejected (they correspond to p in the half-period set).
    """
    wp_p = float(wp_p)
    if not math.isfinite(wp_p):
        raise DomainError("wp(p) must be finite")
    for ek in (T.landmark[1], T.landmark[3], T.landmark[5]):
        if abs(wp_p - ek) < 1e-12 * max(1.0, abs(ek)):
            raise DomainError(f"wp(p) = e_k = {ek}: p is a half-period")
    d = T.d
    tol = 1e-12 * max(1.0, max(abs(v) for v in d))
    for lo, hi in ((d[0], d[1]), (d[2], d[3]), (d[4], d[5]), (d[6], d[7])):
        if lo + tol < wp_p < hi - tol:
            return 1
    return 0


# region tags: Xi1..Xi9 partition C minus boundaries minus {e1,e2,e3}
REGION_TAGS = tuple(f"Xi{i}" for i in range(1, 10)) + ("boundary", "excluded")


def classify_region(wp_p: complex, L, tol: float = _BOUNDARY_TOL) -> str:
    """Which Xi-region of the wp(p)-plane the value lies in.

    Returns "boundary" within `tol` of any circle dB_k and "excluded" at the
    branch values e_k.
    """
    w = complex(wp_p)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError("wp(p) must be finite")
    scale = max(1.0, abs(L.e1), abs(L.e2))
    for ek in (L.e1, L.e2, L.e3):
        if abs(w - ek) < tol * scale:
            return "excluded"
    ds = disks(L)
    sd = [dk.signed_dist(w) for dk in ds]
    if any(abs(x) < tol * max(1.0, dk.radius) for x, dk in zip(sd, ds)):
        return "boundary"
    in0, in1, in2, in3 = (x < 0.0 for x in sd)
    if in1 and not in3:
        return "Xi1"
    if in0 and in1:
        return "Xi2"
    if in0 and in2:
        return "Xi3"
    if in2 and not in3:
        return "Xi4"
    if not (in0 or in1 or in2 or in3):
        return "Xi5"
    if in0:
        return "Xi6"
    if in1 and in3:
        return "Xi7"
    if in2 and in3:
        return "Xi8"
    return "Xi9"


def degeneracy_boundary_test(p, k: int, L, tol: float = 1e-9) -> bool:
    """Whether omega_k/2 is a degenerate critical point of G_p.

    Tested as wp(p) on dB_k; asserts agreement with the two equivalent
    criteria (wp(p - omega_k/2) on dB_0, and the half-period Hessian
    vanishing) up to a 100x hysteresis band.
    """
    pz = as_complex(p)
    hk = half_period(k, L.b).z
    if el.cell_coord_dist(pz - hk, L.b) < 1e-9:
        raise PoleError(f"p coincides with omega_{k}/2")
    dk = disk(k, L)
    d0 = disk(0, L)
    m1 = abs(dk.signed_dist(el.wp(pz, L))) / max(1.0, dk.radius)
    m2 = abs(d0.signed_dist(el.wp(pz - hk, L))) / max(1.0, d0.radius)
    h = green.hessian_det_halfperiod(k, p, L)
    # det vanishes linearly across the boundary with slope ~ 1/(2 pi b)
    m3 = abs(h) * (2.0 * math.pi * L.b)
    on = m1 < tol
    for m in (m2, m3):
        if on != (m < tol) and not (tol / 100.0 < m < tol * 100.0):
            raise InconsistencyError(
                f"degeneracy criteria disagree for k={k}: "
                f"distances ({m1:.3e}, {m2:.3e}, {m3:.3e})")
    return on


def hessian_sign_matches_disks(p, L, band: float = 1e-6) -> bool:
    """Check sign(det D^2 G_p(omega_k/2)) against disk membership for all k.

    Returns True when every k agrees; points within `band` of a boundary
    (relative to the radius) are skipped.  Membership rule: det > 0 iff
    wp(p) in B_k for k = 0, 1, 2, and iff wp(p) outside closure(B_3).
    """
    w = el.wp(as_complex(p), L)
    for k in range(4):
        dk = disk(k, L)
        sd = dk.signed_dist(w)
        if abs(sd) < band * max(1.0, dk.radius):
            continue
        det = green.hessian_det_halfperiod(k, p, L)
        inside = sd < 0.0
        expect_positive = inside if k != 3 else not inside
        if (det > 0.0) != expect_positive:
            return False
    return True
