"""Signal, noise and sensitivity of the three displacement detection schemes.

Signals are normalised so that a coherent beam gives unit noise:

* array_qnl: photon-centroid estimate in units of the single-photon std, 2 d / w0
* split: <n_-> / N, difference photocurrent of a detector split at x = 0
* tem10_homodyne: <n_-> / (sqrt(N_LO) sqrt(N)), TEM10 local oscillator

With these conventions every sensitivity is sqrt(N) |d mean / d d| / noise and the
local-oscillator power drops out.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .modes import (
    BeamState,
    chi_coeff,
    chi_tail,
    displaced_coeff,
    xi_coeff,
    xi_tail,
    zeta0,
    zeta0_slope,
)

DEFAULT_NOISE_N_MAX = 40
TAIL_TOL = 1e-6


class Scheme(str, enum.Enum):
    ARRAY_QNL = "array_qnl"
    SPLIT = "split"
    TEM10_HOMODYNE = "tem10_homodyne"


class SqueezeTarget(str, enum.Enum):
    FLIPPED_V0 = "flipped_v0"
    TEM10 = "tem10"


class TruncationError(ArithmeticError):
    pass


def db_to_variance(db: float) -> float:
    if not db >= 0:
        raise ValueError(f"squeezing must be >= 0 dB, got {db}")
    return 10.0 ** (-db / 10.0)


def variance_to_db(v: float) -> float:
    if not 0 < v <= 1:
        raise ValueError(f"squeezed variance must lie in (0, 1], got {v}")
    return -10.0 * math.log10(v)


@dataclass(frozen=True)
class SqueezeSpec:
    magnitude_db: float
    target: SqueezeTarget

    def __post_init__(self):
        object.__setattr__(self, "target", SqueezeTarget(self.target))
        if not self.magnitude_db >= 0:
            raise ValueError("magnitude_db must be non-negative")

    def variance(self) -> float:
        return db_to_variance(self.magnitude_db)


_SQUEEZE_TARGET = {
    Scheme.SPLIT: SqueezeTarget.FLIPPED_V0,
    Scheme.TEM10_HOMODYNE: SqueezeTarget.TEM10,
}


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme
    squeeze: Optional[SqueezeSpec] = None
    n_max: int = DEFAULT_NOISE_N_MAX

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.squeeze is not None:
            want = _SQUEEZE_TARGET.get(self.scheme)
            if want is None:
                raise ValueError(f"{self.scheme.value} does not accept squeezing")
            if self.squeeze.target is not want:
                raise ValueError(
                    f"{self.scheme.value} needs squeezing on {want.value}, got {self.squeeze.target.value}"
                )
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")

    @classmethod
    def with_db(cls, scheme, db: Optional[float] = None, n_max: int = DEFAULT_NOISE_N_MAX) -> "SchemeConfig":
        """Config for ``scheme`` with ``db`` of squeezing on its matching mode."""
        scheme = Scheme(scheme)
        if db is not None and scheme not in _SQUEEZE_TARGET:
            raise ValueError(f"{scheme.value} does not accept squeezing")
        squeeze = None if db is None else SqueezeSpec(db, _SQUEEZE_TARGET[scheme])
        return cls(scheme, squeeze, n_max)

    def variance(self) -> float:
        return 1.0 if self.squeeze is None else self.squeeze.variance()


@dataclass(frozen=True)
class SchemeResult:
    displacement: float
    mean_signal: float
    noise_std: float
    sensitivity: float
    relative_to_qnl: float


def qnl_sensitivity(beam: BeamState) -> float:
    return 2.0 * math.sqrt(beam.photons) / beam.waist


def _result(beam: BeamState, mean: float, slope: float, noise: float) -> SchemeResult:
    sens = math.sqrt(beam.photons) * abs(slope) / noise
    return SchemeResult(beam.displacement, mean, noise, sens, sens / qnl_sensitivity(beam))


def array_sensitivity(beam: BeamState) -> SchemeResult:
    """Idealised photon-resolving array: the centroid of N photons."""
    return _result(beam, 2.0 * beam.displacement / beam.waist, 2.0 / beam.waist, 1.0)


def split_mean(beam: BeamState) -> float:
    return zeta0(beam.displacement, beam.waist)


def _check_scheme(config: SchemeConfig, scheme: Scheme):
    if config.scheme is not scheme:
        raise ValueError(f"expected a {scheme.value} config, got {config.scheme.value}")


def _squeezed_noise(overlap: float, v: float) -> float:
    return math.sqrt(1.0 - overlap * overlap * (1.0 - v))


def split_noise(config: SchemeConfig, beam: BeamState) -> float:
    """Difference-photocurrent std per sqrt(N).

    Squeezing with variance V on the flipped mode enters with weight xi_0^2; all
    other noise modes stay at vacuum, giving sqrt(1 - xi_0^2 (1 - V)).
    """
    _check_scheme(config, Scheme.SPLIT)
    v = config.variance()
    if v == 1.0:
        return 1.0
    d, w0 = beam.displacement, beam.waist
    tail = xi_tail(d, w0, config.n_max)
    if tail > TAIL_TOL:
        raise TruncationError(f"xi sum rule tail {tail:.3e} exceeds {TAIL_TOL} at n_max={config.n_max}")
    return _squeezed_noise(xi_coeff(0, d, w0), v)


def split_sensitivity(config: SchemeConfig, beam: BeamState) -> SchemeResult:
    noise = split_noise(config, beam)
    return _result(beam, split_mean(beam), zeta0_slope(beam.displacement, beam.waist), noise)


def homodyne_mean(beam: BeamState) -> float:
    return 2.0 * displaced_coeff(1, beam)


def homodyne_slope(beam: BeamState) -> float:
    r = beam.displacement / beam.waist
    return 2.0 / beam.waist * (1.0 - r * r) * math.exp(-0.5 * r * r)


def homodyne_noise(config: SchemeConfig, beam: BeamState) -> float:
    """Homodyne photocurrent std per sqrt(N_LO); squeezing on TEM10 weighted by chi_1^2."""
    _check_scheme(config, Scheme.TEM10_HOMODYNE)
    v = config.variance()
    if v == 1.0:
        return 1.0
    d, w0 = beam.displacement, beam.waist
    tail = chi_tail(d, w0, config.n_max)
    if tail > TAIL_TOL:
        raise TruncationError(f"chi sum rule tail {tail:.3e} exceeds {TAIL_TOL} at n_max={config.n_max}")
    return _squeezed_noise(chi_coeff(1, d, w0), v)


def homodyne_sensitivity(config: SchemeConfig, beam: BeamState) -> SchemeResult:
    noise = homodyne_noise(config, beam)
    return _result(beam, homodyne_mean(beam), homodyne_slope(beam), noise)


def evaluate(config: SchemeConfig, beam: BeamState) -> SchemeResult:
    if config.scheme is Scheme.SPLIT:
        return split_sensitivity(config, beam)
    if config.scheme is Scheme.TEM10_HOMODYNE:
        return homodyne_sensitivity(config, beam)
    return array_sensitivity(beam)


def small_displacement_relative(scheme, db: float) -> float:
    """d -> 0 limit of relative_to_qnl with ``db`` of squeezing on the scheme's mode."""
    scheme = Scheme(scheme)
    gain = 1.0 / math.sqrt(db_to_variance(db))
    if scheme is Scheme.SPLIT:
        return math.sqrt(2.0 / math.pi) * gain
    if scheme is Scheme.TEM10_HOMODYNE:
        return gain
    raise ValueError("array_qnl takes no squeezing")


def qnl_crossover_db(scheme, tol: float = 1e-7, upper: float = 20.0) -> float:
    """Smallest squeezing (dB) at which the small-displacement sensitivity reaches the QNL."""
    scheme = Scheme(scheme)
    if small_displacement_relative(scheme, 0.0) >= 1.0:
        return 0.0
    lo, hi = 0.0, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if small_displacement_relative(scheme, mid) >= 1.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
