"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""

import math
import time

import numpy as np
import pytest

from beamdisp.cli import main, read_csv
from beamdisp.detection import Scheme, SchemeConfig, evaluate, qnl_crossover_db
from beamdisp.modes import (
    BeamState,
    ModeSpec,
    chi_coeff,
    decompose,
    displaced_coeff,
    overlap,
    xi_coeff,
    zeta0,
)
from beamdisp.montecarlo import McConfig, empirical_sensitivity, run_montecarlo

EPS = math.sqrt(2 / math.pi)


def small_d_relative(scheme, db=None):
    config = SchemeConfig.with_db(scheme, db)
    return evaluate(config, BeamState(1.0, 1e6, 1e-6)).relative_to_qnl


@pytest.mark.criterion(1, "split efficiency sqrt(2/pi) at d=1e-6 w0 within 1e-6")
def test_split_efficiency():
    assert abs(small_d_relative(Scheme.SPLIT) - EPS) < 1e-6
    assert EPS == pytest.approx(0.79788, abs=1e-5)


@pytest.mark.criterion(2, "TEM10 homodyne efficiency 1 at d=1e-6 w0 within 1e-9")
def test_homodyne_optimal():
    assert abs(small_d_relative(Scheme.TEM10_HOMODYNE) - 1.0) < 1e-9


@pytest.mark.criterion(3, "squeezing crossover: split 1.961 dB (+-0.001), homodyne 0 dB exactly")
def test_crossover():
    assert abs(qnl_crossover_db(Scheme.SPLIT) - 1.961) < 0.001
    assert qnl_crossover_db(Scheme.TEM10_HOMODYNE) == 0.0


@pytest.mark.criterion(4, "2.0/3.05 dB table: split 1.005/1.130, homodyne 1.26/1.415 within 0.01")
@pytest.mark.parametrize("scheme,db,quoted", [
    (Scheme.SPLIT, 2.0, 1.005),
    (Scheme.TEM10_HOMODYNE, 2.0, 1.26),
    (Scheme.SPLIT, 3.05, 1.130),
    (Scheme.TEM10_HOMODYNE, 3.05, 1.415),
])
def test_squeezed_comparison(scheme, db, quoted):
    assert abs(small_d_relative(scheme, db) - quoted) <= 0.01


@pytest.mark.criterion(5, "displaced-mode coefficients equal quadrature overlaps within 1e-8 (n<=8)")
def test_decomposition_oracle():
    for r in (0.1, 0.5, 1.0, 2.0):
        for n in range(9):
            quad = overlap(ModeSpec(0, 1.0, r), ModeSpec(n, 1.0, 0.0))
            assert abs(displaced_coeff(n, BeamState(1.0, 1.0, r)) - quad) < 1e-8


@pytest.mark.criterion(6, "xi and chi sum rules to n=40 within 1e-6")
def test_sum_rules():
    for r in (0.0, 0.25, 0.5, 1.0):
        xi = math.fsum(xi_coeff(n, r, 1.0) ** 2 for n in range(41))
        chi = math.fsum(chi_coeff(n, r, 1.0, method="quadrature") ** 2 for n in range(41))
        assert abs(xi - 1) < 1e-6
        assert abs(chi - 1) < 1e-6


@pytest.mark.slow
@pytest.mark.criterion(7, "Monte Carlo N=1e4, 1e4 trials: array std within 3% of QNL, split/array within 3% of sqrt(2/pi)")
def test_monte_carlo_qnl():
    start = time.perf_counter()
    config = McConfig(BeamState(1.0, 1e4, 0.0), trials=10_000, seed=20240601)
    res = run_montecarlo(config)
    assert abs(res.estimator_std / (1.0 / (2 * math.sqrt(1e4))) - 1) < 0.03
    arr = empirical_sensitivity(config, "array_qnl")
    spl = empirical_sensitivity(config, "split")
    assert abs(spl / arr / EPS - 1) < 0.03
    assert time.perf_counter() - start < 300


@pytest.mark.criterion(8, "reproduce fig2/3/4/6 byte-stable and checkpoints hold")
def test_figures(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reproduce", "all", "--out", str(a)]) == 0
    assert main(["reproduce", "all", "--out", str(b)]) == 0
    for fig in ("fig2", "fig3", "fig4", "fig6"):
        assert (a / f"{fig}.csv").read_bytes() == (b / f"{fig}.csv").read_bytes()

    header, rows = read_csv(a / "fig2.csv")
    hom = np.array([r[2] for r in rows])
    peak = int(np.argmax(hom))
    assert rows[peak][0] == 1.0
    assert round(hom[peak], 4) == 1.2131
    assert abs(rows[-1][0] - 4.0) < 1e-15 and abs(rows[-1][1] - 1.0) < 1e-10

    header, rows = read_csv(a / "fig3.csv")
    assert rows[0][4] / rows[0][5] == pytest.approx(EPS, abs=1e-4)

    header, rows = read_csv(a / "fig4.csv")
    for r in rows:
        assert math.fsum(c * c for c in r[1:]) <= 1.0 + 1e-15

    header, rows = read_csv(a / "fig6.csv")
    split = np.array([r[1] for r in rows])
    hom = np.array([r[2] for r in rows])
    assert np.all(np.diff(split) > 0) and np.all(np.diff(hom) > 0)
    assert np.all(hom > split)


@pytest.mark.criterion(9, "property suites: orthonormality, completeness, symmetry, scale invariance, determinism")
def test_property_suites():
    rng = np.random.default_rng(9)
    for w0 in rng.uniform(0.2, 5.0, 5):
        for m in range(11):
            for n in range(m, 11):
                assert abs(overlap(ModeSpec(m, w0), ModeSpec(n, w0)) - (m == n)) < 1e-8
    for m in range(11):
        for n in range(m, 11):
            val = overlap(ModeSpec(m, 1.0, 0.2, 0.2), ModeSpec(n, 1.0, 0.2, 0.2))
            assert abs(val - (m == n)) < 1e-8
    for r in (0.0, 0.5, 1.0, 2.0, 3.0):
        vec = decompose(BeamState(1.0, 1.0, r), None, tail_tol=1e-12)
        assert abs(math.fsum(v * v for v in vec.values) - 1) < 1e-10
    for r in rng.uniform(-3, 3, 10):
        assert zeta0(-r, 1.0) == -zeta0(r, 1.0)
        for n in range(6):
            assert displaced_coeff(n, BeamState(1.0, 1.0, -r)) == (-1) ** n * displaced_coeff(n, BeamState(1.0, 1.0, r))
    for r, s in zip(rng.uniform(-2, 2, 5), rng.uniform(0.1, 10, 5)):
        assert zeta0(r * s, s) == pytest.approx(zeta0(r, 1.0), rel=1e-12, abs=1e-15)
        assert xi_coeff(2, r * s, s) == pytest.approx(xi_coeff(2, r, 1.0), rel=1e-7, abs=1e-9)
        assert chi_coeff(3, r * s, s) == pytest.approx(chi_coeff(3, r, 1.0), rel=1e-7, abs=1e-9)
        config = SchemeConfig.with_db(Scheme.SPLIT, 3.0)
        ref = evaluate(config, BeamState(1.0, 1.0, r)).relative_to_qnl
        assert evaluate(config, BeamState(s, 1e8, r * s)).relative_to_qnl == pytest.approx(ref, rel=1e-7)
    cfg = McConfig(BeamState(1.0, 200, 0.1), trials=300, seed=77)
    assert run_montecarlo(cfg) == run_montecarlo(cfg)
    assert xi_coeff(3, 0.37, 1.0) == xi_coeff(3, 0.37, 1.0)
