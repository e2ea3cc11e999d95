import math

import numpy as np
import pytest

from conftest import ORDERS, matrix_schemes
from pcg_eur import (Ensemble, Grid, WaveFunction, bin_localized_state, covering_grid, frft, hermite_gauss,
                     make_scheme, matched_grid, random_superposition, symmetric_scheme)
from pcg_eur.errors import CoverageError, ResolutionError, SamplingError, SchemeError
from pcg_eur.eur import (GaussianFamily, HermiteFamily, TwoModeState, continuous_renyi, eur_report, eur_reports,
                         invalid_scheme_probe, joint_probabilities, limit_study, measure_pair,
                         minimize_entropy_sum, probe_deviations, steering_witness, two_mode_squeezed)
from pcg_eur.measurement import conditional_shannon, pcg_probabilities


def canonical():
    return make_scheme(2, 0.0, math.pi / 2, 1, 2 * math.sqrt(math.pi))


def test_localized_report():
    scheme = canonical()
    psi = bin_localized_state(scheme, "theta", 0, matched_grid(scheme))
    r = eur_report(psi, scheme, 1.0, "loc")
    assert r.h_theta == 0 and r.h_theta_prime == pytest.approx(math.log(2), abs=1e-12)
    assert abs(r.deficit) < 1e-12 and not r.red_flag
    assert r.to_dict()["state"] == "loc"


def test_ground_state_against_finer_grid():
    scheme = canonical()
    coarse = eur_report(hermite_gauss(0, matched_grid(scheme, 8)), scheme, 1.0)
    fine = eur_report(hermite_gauss(0, matched_grid(scheme, 32)), scheme, 1.0)
    assert coarse.deficit >= 0
    assert coarse.total == pytest.approx(fine.total, abs=1e-3)
    # x and p marginals of HG_0 coincide for equal periods
    assert coarse.h_theta == pytest.approx(coarse.h_theta_prime, abs=1e-12)


def test_extreme_orders():
    scheme = canonical()
    psi = hermite_gauss(0, matched_grid(scheme))
    r = eur_report(psi, scheme, 0.5)
    assert r.beta == math.inf and r.deficit >= 0
    r = eur_report(psi, scheme, math.inf)
    assert r.beta == 0.5 and r.deficit >= 0


def test_state_may_come_from_either_direction():
    scheme = symmetric_scheme(3, math.pi / 6, 2 * math.pi / 3)
    grid = matched_grid(scheme)
    psi = random_superposition(6, 1, grid, scheme.theta)
    other = frft(psi, scheme.theta_prime - scheme.theta)
    a, b = eur_report(psi, scheme, 2.0), eur_report(other, scheme, 2.0)
    assert a.total == pytest.approx(b.total, abs=1e-9)


def test_order_symmetry():
    for scheme in matrix_schemes()[::3]:
        grid = matched_grid(scheme)
        psi = random_superposition(10, 7, grid, scheme.theta)
        for a in ORDERS:
            r1 = eur_report(psi, scheme, a)
            r2 = eur_report(psi, scheme.swapped(), r1.beta)
            assert r1.total == pytest.approx(r2.total, abs=1e-9)


def test_ensembles_obey_bound():
    scheme = symmetric_scheme(4)
    grid = matched_grid(scheme)
    rho = Ensemble(tuple((w, random_superposition(5, s, grid)) for w, s in ((0.3, 1), (0.7, 2))))
    for r in eur_reports(rho, scheme, ORDERS):
        assert r.deficit >= -2e-3


def test_invalid_scheme_refused():
    bad = symmetric_scheme(2, M=2, check=False)
    psi = hermite_gauss(0, matched_grid(bad))
    with pytest.raises(SchemeError) as exc:
        eur_report(psi, bad, 1.0)
    assert exc.value.reason == "coprimality-failure"
    with pytest.raises(SchemeError):
        minimize_entropy_sum(bad, 1.0, GaussianFamily(1, free=("center",)))


def test_probe_examples():
    assert probe_deviations(2, math.pi / 2, 2)[0] > 0.05
    assert invalid_scheme_probe(4, math.pi / 2, 2) > 0.05
    assert invalid_scheme_probe(3, math.pi / 2, 1) < 2e-3
    assert invalid_scheme_probe(5, math.pi / 2, 3) < 2e-3


def test_probe_other_angle():
    assert invalid_scheme_probe(6, math.pi / 3, 4) > 0.05
    assert invalid_scheme_probe(6, math.pi / 3, 5) < 2e-3


def test_continuous_renyi_closed_forms():
    grid = Grid(1024, 0.03)
    hg = hermite_gauss(0, grid)
    assert continuous_renyi(hg, 1.0) == pytest.approx(0.5 * math.log(math.pi) + 0.5, abs=1e-9)
    # Gaussian with variance 1/2: h_a = 0.5 ln(pi) + ln(a) / (2 (a - 1))
    for a in (0.5, 2.0, 3.0):
        assert continuous_renyi(hg, a) == pytest.approx(0.5 * math.log(math.pi) + math.log(a) / (2 * (a - 1)), abs=1e-9)
    w = 3.0
    box = WaveFunction.normalized(grid, (np.abs(grid.q) < w / 2).astype(float))
    for a in (0.5, 1.0, 2.0, math.inf):
        assert continuous_renyi(box, a) == pytest.approx(math.log(w), abs=1e-9)


def test_limit_study_records():
    recs = limit_study(ds=(4, 16))
    assert [r.d for r in recs] == [4, 16]
    for r in recs:
        assert r.s_theta == pytest.approx(r.s_theta_prime)
        assert r.rescaled_sum >= r.bound
        assert r.T_theta == pytest.approx(math.sqrt(2 * math.pi * r.d))
    assert recs[1].gap_theta < recs[0].gap_theta


def test_limit_study_other_state_and_order():
    recs = limit_study(state=lambda g, t: hermite_gauss(1, g, t), alpha=2.0, ds=(8, 32))
    assert all(r.beta == pytest.approx(2 / 3) for r in recs)
    assert all(r.rescaled_sum >= r.bound - 2e-3 for r in recs)


def test_optimizer_center_only():
    scheme = canonical()
    res = minimize_entropy_sum(scheme, 1.0, GaussianFamily(1, free=("center",)), budget=500, restarts=2)
    assert res.best_sum >= math.log(2) - 2e-3
    assert res.evaluations <= 2 * 500 + 10 and len(res.restart_sums) == 2


def test_optimizer_finds_localized_minimum():
    scheme = canonical()
    grid = matched_grid(scheme)
    a, b = 0.0, scheme.spec_theta.s
    start = [(a + b) / 2, math.log((b - a) / 10), 0.0]
    res = minimize_entropy_sum(scheme, 1.0, GaussianFamily(1), budget=500, restarts=1, starts=[start], grid=grid)
    assert abs(res.deficit) < 2e-3 and not res.red_flag


def test_optimizer_determinism_and_budget():
    scheme = symmetric_scheme(3)
    fam = HermiteFamily(4)
    r1 = minimize_entropy_sum(scheme, 2.0, fam, budget=150, restarts=2, seed=9)
    r2 = minimize_entropy_sum(scheme, 2.0, fam, budget=150, restarts=2, seed=9)
    assert r1.best_sum == r2.best_sum and np.array_equal(r1.best_params, r2.best_params)
    assert r1.deficit >= -2e-3
    with pytest.raises(ValueError):
        minimize_entropy_sum(scheme, 1.0, fam, budget=50)


def test_two_mode_marginals():
    scheme = symmetric_scheme(2)
    grid = matched_grid(scheme)
    a, b = hermite_gauss(1, grid), random_superposition(3, 4, grid)
    joint = joint_probabilities(TwoModeState.product(a, b), scheme, "theta", "theta_prime", 0.0, math.pi / 2)
    assert np.allclose(joint.sum(axis=1), pcg_probabilities(a, scheme), atol=1e-12)
    assert np.allclose(joint.sum(axis=0), measure_pair(b, scheme)[1], atol=1e-10)
    assert conditional_shannon(joint) == pytest.approx(-np.sum(joint.sum(1) * np.log(joint.sum(1))), abs=1e-9)


def test_two_mode_rotation_matches_single_mode():
    grid = Grid(256, 0.1)
    a, b = random_superposition(4, 1, grid), random_superposition(4, 2, grid)
    rot = TwoModeState.product(a, b).rotated(0.7, -0.4)
    assert np.allclose(rot.psi, np.outer(frft(a, 0.7).psi, frft(b, -0.4).psi), atol=1e-12)


def test_two_mode_rotation_drift_is_reported():
    scheme = symmetric_scheme(3)
    grid = matched_grid(scheme)
    state = TwoModeState.product(random_superposition(4, 1, grid), random_superposition(4, 2, grid))
    with pytest.raises(SamplingError):
        state.rotated(0.7, -0.4)


def test_squeezed_vacuum_sweep_reaches_violation():
    scheme = symmetric_scheme(2)
    grid = matched_grid(scheme, 16)
    totals = [steering_witness(two_mode_squeezed(r, grid), scheme).total for r in (0.0, 0.5, 1.0, 1.7)]
    assert all(b < a for a, b in zip(totals, totals[1:]))
    # r = 0 is the product vacuum
    assert totals[0] >= math.log(2) - 1e-3
    assert steering_witness(two_mode_squeezed(1.7, grid), scheme).violated


def test_squeezed_vacuum_resolution_check():
    grid = matched_grid(symmetric_scheme(2), 8)
    with pytest.raises(ResolutionError):
        two_mode_squeezed(1.5, grid)


def test_steering_refuses_invalid_scheme():
    bad = symmetric_scheme(4, M=2, check=False)
    grid = matched_grid(bad)
    with pytest.raises(SchemeError):
        steering_witness(two_mode_squeezed(0.5, grid), bad)


def test_two_mode_grid_cap():
    with pytest.raises(Exception):
        TwoModeState(Grid(1024, 0.05), np.zeros((1024, 1024)))


def test_squeezed_vacuum_needs_room():
    grid = matched_grid(symmetric_scheme(2))
    with pytest.raises(CoverageError):
        two_mode_squeezed(2.0, grid)


def test_squeezed_vacuum_generic_angles():
    scheme = symmetric_scheme(2, math.pi / 6, 2 * math.pi / 3)
    coarse = steering_witness(two_mode_squeezed(1.0, covering_grid(scheme, 10.0, 16)), scheme)
    fine = steering_witness(two_mode_squeezed(1.0, covering_grid(scheme, 10.0, 32)), scheme)
    assert coarse.total == pytest.approx(fine.total, abs=5e-3)
