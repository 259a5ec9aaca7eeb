"""Scalar invariants of the rectangular lattice Z + Z(ib).

The quasi-period eta1 and the cubic invariants g2, g3 come from Eisenstein
q-series (eta1 = pi^2/3 E2, g2 = 4 pi^4/3 E4, g3 = 8 pi^6/27 E6); eta2 is
fixed by the Legendre relation tau eta1 - eta2 = 2 pi i; the branch values
e_k are direct wp-evaluations at the half-periods.  For b < 1 the series
run on the rescaled lattice tau' = i/b and map back through

    eta1(ib) = -eta1(i/b)/b^2 + 2 pi/b,
    g2(ib)   =  g2(i/b)/b^4,     g3(ib) = -g3(i/b)/b^6.

On rectangular tori e2 < e3 < e1 with e2 < 0 < e1, eta1 is real and eta2
purely imaginary; compute_invariants enforces all of that before returning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import elliptic
from .errors import DomainError, InconsistencyError


@dataclass(frozen=True)
class LatticeData:
    """Immutable bundle of invariants for one aspect ratio b (tau = ib)."""

    b: float
    tau: complex
    nome_q: complex
    e1: float
    e2: float
    e3: float
    g2: float
    g3: float
    eta1: float
    eta2: complex
    two_pi_over_b: float
    _kern: elliptic._SeriesKernel = field(repr=False)
    _rescaled: bool = field(repr=False)


def compute_invariants(b: float) -> LatticeData:
    """All invariants of Z + Z(ib) to near machine precision.

    Raises DomainError unless b is finite and positive.
    """
    b = float(b)
    if not math.isfinite(b) or b <= 0.0:
        raise DomainError(f"aspect ratio must be finite and positive, got {b}")

    rescaled = b < 1.0
    kern = elliptic.make_series_kernel(1.0 / b if rescaled else b)
    if rescaled:
        eta1 = -kern.eta1 / b ** 2 + 2.0 * math.pi / b
        g2 = kern.g2 / b ** 4
        g3 = -kern.g3 / b ** 6
    else:
        eta1, g2, g3 = kern.eta1, kern.g2, kern.g3
    tau = 1j * b
    eta2 = tau * eta1 - 2j * math.pi

    lat = LatticeData(
        b=b,
        tau=tau,
        nome_q=complex(math.exp(-2.0 * math.pi * b), 0.0),
        e1=0.0, e2=0.0, e3=0.0,
        g2=g2, g3=g3,
        eta1=eta1,
        eta2=eta2,
        two_pi_over_b=2.0 * math.pi / b,
        _kern=kern,
        _rescaled=rescaled,
    )
    e1 = elliptic.wp(0.5 + 0j, lat).real
    e2 = elliptic.wp(tau / 2.0, lat).real
    e3 = elliptic.wp((1.0 + tau) / 2.0, lat).real
    object.__setattr__(lat, "e1", e1)
    object.__setattr__(lat, "e2", e2)
    object.__setattr__(lat, "e3", e3)
    _check_invariants(lat)
    return lat


def _check_invariants(L: LatticeData) -> None:
    scale_e = max(abs(L.e1), abs(L.e2), abs(L.e3))
    if not (L.e2 < L.e3 < L.e1 and L.e2 < 0.0 < L.e1):
        raise InconsistencyError(
            f"branch ordering e2 < e3 < e1, e2 < 0 < e1 violated: "
            f"({L.e1}, {L.e2}, {L.e3})")
    if abs(L.e1 + L.e2 + L.e3) > 1e-12 * scale_e:
        raise InconsistencyError("e1 + e2 + e3 != 0 beyond tolerance")
    scale_g = max(abs(L.g2), abs(L.g3), 1.0)
    for ek in (L.e1, L.e2, L.e3):
        if abs(4.0 * ek ** 3 - L.g2 * ek - L.g3) > 1e-10 * scale_g:
            raise InconsistencyError("cubic 4e^3 - g2 e - g3 = 0 violated")
    if abs(L.tau * L.eta1 - L.eta2 - 2j * math.pi) > 1e-12 * max(1.0, abs(L.eta1)):
        raise InconsistencyError("Legendre relation violated")


def legendre_residual(L: LatticeData) -> float:
    """|tau*eta1 - eta2 - 2*pi*i| (should be ~0 by construction)."""
    return abs(L.tau * L.eta1 - L.eta2 - 2j * math.pi)


def cubic_residual(L: LatticeData) -> float:
    """max_k |4 e_k^3 - g2 e_k - g3|, relative to max(|g2|, |g3|, 1)."""
    scale = max(abs(L.g2), abs(L.g3), 1.0)
    return max(abs(4.0 * ek ** 3 - L.g2 * ek - L.g3) for ek in (L.e1, L.e2, L.e3)) / scale
