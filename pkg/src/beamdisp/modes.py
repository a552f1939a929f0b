"""Hermite-Gauss mode algebra for a beam displaced along one transverse axis.

Amplitude convention: u_0(x) = (2 / (pi w0^2))^(1/4) exp(-(x / w0)^2), so the
photon position density |u_0|^2 has standard deviation w0 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import MAX_HERMITE_ORDER, HermiteOrderError, QuadSpec, erf, integrate

DEFAULT_N_MAX = 20
TAIL_TOL = 1e-6


@dataclass(frozen=True)
class BeamState:
    """The interrogated TEM00 beam: waist, mean photon number and true displacement."""

    waist: float = 1.0
    photons: float = 1e6
    displacement: float = 0.0

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError(f"waist must be positive, got {self.waist}")
        if not self.photons > 0:
            raise ValueError(f"photons must be positive, got {self.photons}")

    @property
    def position_std(self) -> float:
        return self.waist / 2.0

    def displaced(self, d: float) -> "BeamState":
        return BeamState(self.waist, self.photons, d)


@dataclass(frozen=True)
class ModeSpec:
    """TEM_n0 mode u_n(x - center), optionally sign-flipped for x < flip."""

    order: int
    waist: float = 1.0
    center: float = 0.0
    flip: Optional[float] = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("mode order must be non-negative")
        if not self.waist > 0:
            raise ValueError("waist must be positive")


@dataclass(frozen=True)
class CoeffVector:
    values: tuple
    n_max: int
    truncation_tail: float

    @property
    def truncated(self) -> bool:
        return self.truncation_tail > TAIL_TOL


def _hermite_functions(n: int, y):
    """Orthonormal Hermite functions psi_n(y) = (2^n n! sqrt(pi))^(-1/2) H_n(y) exp(-y^2/2).

    Uses the normalised recurrence, which stays finite up to the order cap.
    """
    if n > MAX_HERMITE_ORDER:
        raise HermiteOrderError(f"Hermite order {n} exceeds {MAX_HERMITE_ORDER}")
    psi_prev = np.pi ** -0.25 * np.exp(-0.5 * y * y)
    if n == 0:
        return psi_prev
    psi = math.sqrt(2.0) * y * psi_prev
    for k in range(2, n + 1):
        psi_prev, psi = psi, math.sqrt(2.0 / k) * y * psi - math.sqrt((k - 1) / k) * psi_prev
    return psi


def mode_amplitude(spec: ModeSpec, x):
    """Evaluate the (possibly flipped) mode at x; accepts scalars or arrays."""
    w0 = spec.waist
    y = math.sqrt(2.0) * (np.asarray(x, dtype=float) - spec.center) / w0
    # u_n(x) = sqrt(sqrt(2)/w0) * psi_n(sqrt(2) x / w0)
    amp = (2.0 ** 0.25 / math.sqrt(w0)) * _hermite_functions(spec.order, y)
    if spec.flip is not None:
        amp = np.where(np.asarray(x) < spec.flip, -amp, amp)
    if np.ndim(amp) == 0:
        return float(amp)
    return amp


def _overlap(a: ModeSpec, b: ModeSpec, **kw) -> float:
    width = max(a.waist, b.waist)
    cuts = [s.flip for s in (a, b) if s.flip is not None]
    spec = QuadSpec.window([a.center, b.center], width, cuts, **kw)
    return integrate(lambda x: mode_amplitude(a, x) * mode_amplitude(b, x), spec)


def overlap(a: ModeSpec, b: ModeSpec, **kw) -> float:
    """Inner product of two real transverse modes by adaptive quadrature."""
    return _overlap(a, b, **kw)


def displaced_coeff(n: int, beam: BeamState) -> float:
    """Amplitude of the centred TEM_n0 mode in the displaced beam, alpha_n / sqrt(N).

    (d/w0)^n exp(-d^2 / 2 w0^2) / sqrt(n!), evaluated in log space.
    """
    if n < 0:
        raise ValueError("mode order must be non-negative")
    ratio = beam.displacement / beam.waist
    if ratio == 0.0:
        return 1.0 if n == 0 else 0.0
    log_mag = n * math.log(abs(ratio)) - 0.5 * math.lgamma(n + 1) - 0.5 * ratio * ratio
    sign = -1.0 if (ratio < 0 and n % 2) else 1.0
    return sign * math.exp(log_mag)


def decompose(beam: BeamState, n_max: Optional[int] = None, tail_tol: float = TAIL_TOL) -> CoeffVector:
    """Coefficients of the displaced beam in the centred Hermite-Gauss basis.

    With ``n_max=None`` the basis starts at 20 modes and is extended until the
    missing power drops below ``tail_tol`` or the order cap is reached.
    """
    if n_max is not None:
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        values = [displaced_coeff(n, beam) for n in range(n_max + 1)]
    else:
        values = [displaced_coeff(n, beam) for n in range(DEFAULT_N_MAX + 1)]
        while 1.0 - math.fsum(v * v for v in values) > tail_tol and len(values) <= MAX_HERMITE_ORDER:
            values.append(displaced_coeff(len(values), beam))
    tail = 1.0 - math.fsum(v * v for v in values)
    return CoeffVector(tuple(values), len(values) - 1, tail)


def zeta0(d: float, w0: float) -> float:
    """Normalised split-detector mean: power right of x=0 minus power left, over N."""
    if not w0 > 0:
        raise ValueError("waist must be positive")
    return erf(math.sqrt(2.0) * d / w0)


def zeta0_quadrature(d: float, w0: float) -> float:
    beam = ModeSpec(0, w0, d)
    spec = QuadSpec.window([0.0, d], w0, [0.0])
    return integrate(lambda x: np.sign(x) * mode_amplitude(beam, x) ** 2, spec)


def zeta0_slope(d: float, w0: float) -> float:
    """d(zeta0)/dd in closed form."""
    return 2.0 * math.sqrt(2.0 / math.pi) / w0 * math.exp(-2.0 * d * d / (w0 * w0))


def xi_coeff(n: int, d: float, w0: float) -> float:
    """Overlap of the flipped TEM00 mode v_0(x, d) with the displaced flipped mode v_n(x - d, 0).

    Both flips sit at x = d, so the quadrature is cut there once.
    """
    if n < 0:
        raise ValueError("mode order must be non-negative")
    if not w0 > 0:
        raise ValueError("waist must be positive")
    return _overlap(ModeSpec(0, w0, 0.0, flip=d), ModeSpec(n, w0, d, flip=d))


def xi_coeff_closed(n: int, d: float, w0: float) -> float:
    # the two sign flips coincide and cancel, leaving the u_0(x), u_n(x - d) overlap
    return displaced_coeff(n, BeamState(w0, 1.0, -d))


def chi_coeff(n: int, d: float, w0: float, method: str = "auto") -> float:
    """Overlap of the centred TEM10 local oscillator with the displaced mode u_n(x - d).

    ``method="auto"`` uses closed forms for n in {0, 1} and quadrature otherwise;
    ``"quadrature"`` forces the integral for every n.
    """
    if n < 0:
        raise ValueError("mode order must be non-negative")
    if not w0 > 0:
        raise ValueError("waist must be positive")
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and n <= 1:
        return chi_coeff_closed(n, d, w0)
    return _overlap(ModeSpec(1, w0, 0.0), ModeSpec(n, w0, d))


def chi_coeff_closed(n: int, d: float, w0: float) -> float:
    """Displacement-operator matrix element <u_1 | u_n(. - d)> for any n."""
    r = d / w0
    gauss = math.exp(-0.5 * r * r)
    if n == 0:
        return r * gauss
    if r == 0.0:
        return 1.0 if n == 1 else 0.0
    log_mag = (n - 1) * math.log(abs(r)) - 0.5 * math.lgamma(n + 1) - 0.5 * r * r
    sign = -1.0 if (r > 0 and (n - 1) % 2) else 1.0
    return sign * (n - r * r) * math.exp(log_mag)


def xi_tail(d: float, w0: float, n_max: int) -> float:
    """Power of the split-detector noise mode beyond order n_max."""
    return 1.0 - math.fsum(xi_coeff_closed(n, d, w0) ** 2 for n in range(n_max + 1))


def chi_tail(d: float, w0: float, n_max: int) -> float:
    """Power of the TEM10 local-oscillator mode beyond order n_max."""
    return 1.0 - math.fsum(chi_coeff_closed(n, d, w0) ** 2 for n in range(n_max + 1))
