"""Photon-level Monte Carlo of coherent-beam displacement measurements.

Each photon lands at an independent Gaussian position (mean d, std w0/2); the
photon number per trial is fixed or Poisson distributed. Trial ``i`` draws from a
Philox counter-based stream keyed by ``seed`` with ``i`` in the counter, so results
do not depend on execution order or on how trials are split between workers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .modes import BeamState, zeta0

GENERATOR = "numpy Philox4x64-10, key=seed, counter=(0, 0, trial_index, 0)"
BOOTSTRAP_RESAMPLES = 200


class PhotonSampling(str, enum.Enum):
    FIXED_N = "fixed_n"
    POISSONIAN = "poissonian"


class McScheme(str, enum.Enum):
    ARRAY_QNL = "array_qnl"
    SPLIT = "split"


class EmptyTrialError(ValueError):
    pass


@dataclass(frozen=True)
class McConfig:
    beam: BeamState
    trials: int = 1000
    seed: int = 0
    photon_sampling: PhotonSampling = PhotonSampling.POISSONIAN

    def __post_init__(self):
        object.__setattr__(self, "photon_sampling", PhotonSampling(self.photon_sampling))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McResult:
    """Ensemble statistics of one estimator.

    ``standard_error`` is the standard error of ``estimator_std`` itself,
    estimator_std / sqrt(2 (trials - 1)), with trials counting non-empty trials.
    """

    scheme: str
    estimator_mean: float
    estimator_std: float
    predicted_mean: float
    predicted_std: float
    n_effective: float
    standard_error: float
    trials: int
    empty_trials: int


class Sensitivity(float):
    """Empirical sensitivity value carrying its bootstrap standard error."""

    standard_error: float
    empty_trials: int

    def __new__(cls, value, standard_error, empty_trials=0):
        obj = super().__new__(cls, value)
        obj.standard_error = standard_error
        obj.empty_trials = empty_trials
        return obj


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, trial_index, 0]))


def _unit_draws(config: McConfig, trial_index: int) -> np.ndarray:
    """Standard-normal offsets of every photon in one trial."""
    if not 0 <= trial_index < config.trials:
        raise IndexError(f"trial_index {trial_index} outside [0, {config.trials})")
    rng = trial_rng(config.seed, trial_index)
    n = config.beam.photons
    if config.photon_sampling is PhotonSampling.FIXED_N:
        k = int(round(n))
    else:
        k = int(rng.poisson(n))
    return rng.standard_normal(k)


def sample_positions(config: McConfig, trial_index: int) -> np.ndarray:
    beam = config.beam
    return beam.displacement + beam.position_std * _unit_draws(config, trial_index)


def array_estimate(positions) -> float:
    """Centroid of the detected photon positions."""
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        raise EmptyTrialError("no photons detected in this trial")
    return float(positions.mean())


def split_trial(positions) -> int:
    """Photons right of the split minus photons left of it; x == 0 counts for neither."""
    positions = np.asarray(positions, dtype=float)
    return int(np.count_nonzero(positions > 0)) - int(np.count_nonzero(positions < 0))


@dataclass(frozen=True)
class TrialTable:
    """Per-trial raw outcomes; ``centroid`` is NaN for empty trials."""

    photons: np.ndarray
    centroid: np.ndarray
    split: np.ndarray


def _run_chunk(config: McConfig, offsets: tuple, indices: range):
    beam = config.beam
    k = np.empty(len(indices), dtype=np.int64)
    cen = np.empty((len(offsets), len(indices)))
    spl = np.empty((len(offsets), len(indices)), dtype=np.int64)
    for j, i in enumerate(indices):
        z = _unit_draws(config, i)
        k[j] = z.size
        for a, off in enumerate(offsets):
            x = (beam.displacement + off) + beam.position_std * z
            cen[a, j] = x.mean() if z.size else math.nan
            spl[a, j] = split_trial(x)
    return k, cen, spl


def run_trials(config: McConfig, offsets=(0.0,), workers: int = 1, chunk: int = 256) -> list[TrialTable]:
    """Simulate every trial once per displacement offset, reusing the same photons.

    Sharing the random draws between offsets makes finite differences across
    offsets low-variance (common random numbers).
    """
    offsets = tuple(offsets)
    chunks = [range(s, min(s + chunk, config.trials)) for s in range(0, config.trials, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda idx: _run_chunk(config, offsets, idx), chunks))
    else:
        parts = [_run_chunk(config, offsets, idx) for idx in chunks]
    k = np.concatenate([p[0] for p in parts])
    cen = np.concatenate([p[1] for p in parts], axis=1)
    spl = np.concatenate([p[2] for p in parts], axis=1)
    return [TrialTable(k, cen[a], spl[a]) for a in range(len(offsets))]


def trial_estimates(table: TrialTable, scheme, photons: float) -> np.ndarray:
    """Per-trial estimator values: centroid (length units) or split signal n_- / N."""
    scheme = McScheme(scheme)
    if scheme is McScheme.ARRAY_QNL:
        return table.centroid[~np.isnan(table.centroid)]
    return table.split / photons


def _predicted(config: McConfig, scheme: McScheme) -> tuple[float, float]:
    beam = config.beam
    n = beam.photons
    if scheme is McScheme.ARRAY_QNL:
        return beam.displacement, beam.position_std / math.sqrt(n)
    z = zeta0(beam.displacement, beam.waist)
    if config.photon_sampling is PhotonSampling.POISSONIAN:
        return z, 1.0 / math.sqrt(n)
    return z, math.sqrt((1.0 - z * z) / n)


def summarize(config: McConfig, table: TrialTable, scheme) -> McResult:
    scheme = McScheme(scheme)
    est = trial_estimates(table, scheme, config.beam.photons)
    empty = int(np.count_nonzero(table.photons == 0))
    if est.size == 0:
        raise EmptyTrialError("every trial was empty")
    std = float(est.std(ddof=1)) if est.size > 1 else math.nan
    se = std / math.sqrt(2.0 * (est.size - 1)) if est.size > 1 else math.nan
    pmean, pstd = _predicted(config, scheme)
    return McResult(
        scheme=scheme.value,
        estimator_mean=float(est.mean()),
        estimator_std=std,
        predicted_mean=pmean,
        predicted_std=pstd,
        n_effective=float(table.photons.mean()),
        standard_error=se,
        trials=int(est.size),
        empty_trials=empty,
    )


def run_montecarlo(config: McConfig, scheme="array_qnl", workers: int = 1) -> McResult:
    (table,) = run_trials(config, workers=workers)
    return summarize(config, table, scheme)


def _paired_sensitivity(plus: np.ndarray, minus: np.ndarray, delta: float) -> float:
    std = math.sqrt(0.5 * (plus.var(ddof=1) + minus.var(ddof=1)))
    return (plus.mean() - minus.mean()) / delta / std


def empirical_sensitivity(config: McConfig, scheme="array_qnl", delta=None, workers: int = 1) -> Sensitivity:
    """Finite-difference sensitivity from paired ensembles at d +/- delta/2.

    Returns (d mean / d d) / std in inverse length units, where the mean and std
    are those of the raw detector signal (centroid, or photon-count difference).
    The attached standard error comes from a bootstrap over trials.
    """
    scheme = McScheme(scheme)
    if delta is None:
        delta = 0.01 * config.beam.waist
    if not delta > 0:
        raise ValueError("delta must be positive")
    plus_t, minus_t = run_trials(config, (0.5 * delta, -0.5 * delta), workers=workers)
    if scheme is McScheme.ARRAY_QNL:
        keep = plus_t.photons > 0
        plus, minus = plus_t.centroid[keep], minus_t.centroid[keep]
    else:
        plus, minus = plus_t.split.astype(float), minus_t.split.astype(float)
    if plus.size < 2:
        raise EmptyTrialError("fewer than two non-empty trials")
    empty = int(np.count_nonzero(plus_t.photons == 0))
    value = _paired_sensitivity(plus, minus, delta)

    boot_rng = np.random.Generator(np.random.Philox(key=config.seed, counter=[0, 1, 0, 0]))
    boots = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        idx = boot_rng.integers(0, plus.size, plus.size)
        boots[b] = _paired_sensitivity(plus[idx], minus[idx], delta)
    return Sensitivity(value, float(boots.std(ddof=1)), empty)
