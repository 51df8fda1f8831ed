"""End-to-end reproductions of the documented guarantees.

The heavier reproductions carry ``@pytest.mark.slow``; deselect them with
``pytest -m "not slow"``.
"""

import numpy as np
import pytest

from handsoff.core.signal import l0_norm, l1_norm
from handsoff.oracle import DiInstance, analytic_handsoff, non_sparse_l1_control
from handsoff.pmp.certificate import CERTIFICATE_TOL, find_certificate
from handsoff.solver.sparse import is_reachable, solve_l1, solve_max_handsoff, solve_reweighted_lp, value
from handsoff.solver.transcription import transcribe
from handsoff.value_map.field import (
    GridAxis,
    boundary_estimate,
    parse_grid_spec,
    reachability_mismatches,
    sample_value_field,
)
from handsoff.value_map.probes import ValueOracle, continuity_probe, convexity_probe

INSTANCE = DiInstance(1.0, -1.0, 5.0)


def random_reachable_states(di, count, seed, horizon=5.0, n_intervals=100):
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        xi = rng.uniform(-2.5, 2.5, size=2)
        if is_reachable(di, xi, horizon, n_intervals):
            states.append(xi)
    return states


def test_sparse_pulse_reproduction(nonnormal_problem):
    result = solve_max_handsoff(nonnormal_problem)
    t1, t2 = analytic_handsoff(INSTANCE)
    (start, end), = result.support
    assert abs(start - t1) <= nonnormal_problem.delta
    assert abs(end - t2) <= nonnormal_problem.delta
    assert result.l0_value == pytest.approx(1.0, abs=0.02)
    assert result.l1_value == pytest.approx(1.0, abs=1e-6)
    assert find_certificate(nonnormal_problem, result.control).max_violation <= CERTIFICATE_TOL


def test_l1_optimal_set_is_strictly_larger(nonnormal_problem):
    v1 = value(nonnormal_problem)
    u1 = non_sparse_l1_control(INSTANCE, 500)
    assert l1_norm(u1) == pytest.approx(v1, abs=1e-9)
    assert l0_norm(u1) >= 2.0 * v1 - 1e-9


@pytest.mark.slow
def test_l0_and_l1_values_agree_on_random_states(di):
    for xi in random_reachable_states(di, 50, seed=2024):
        problem = transcribe(di, xi, 5.0, 100)
        result = solve_max_handsoff(problem)
        v1 = value(problem)
        assert abs(result.l0_value - v1) <= 1e-6 + 2 * problem.delta
        assert find_certificate(problem, result.control) is not None


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_reweighted_matches_handsoff_on_nonnormal_instance(small_nonnormal_problem, p):
    handsoff = solve_max_handsoff(small_nonnormal_problem)
    reweighted = solve_reweighted_lp(small_nonnormal_problem, p=p)
    assert abs(reweighted.l0_value - handsoff.l0_value) <= 2 * small_nonnormal_problem.delta + 1e-9
    assert find_certificate(small_nonnormal_problem, reweighted.control) is not None


@pytest.mark.slow
@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_reweighted_matches_handsoff_on_random_states(di, p):
    for xi in random_reachable_states(di, 20, seed=7):
        problem = transcribe(di, xi, 5.0, 100)
        handsoff = solve_max_handsoff(problem)
        reweighted = solve_reweighted_lp(problem, p=p)
        assert abs(reweighted.l0_value - handsoff.l0_value) <= 2 * problem.delta + 1e-6
        assert find_certificate(problem, reweighted.control) is not None


@pytest.mark.parametrize("n_intervals", [100, 200, 300, 400, 500])
def test_aligned_grids_polish_to_bang_off_bang(di, n_intervals):
    result = solve_max_handsoff(transcribe(di, INSTANCE.xi, 5.0, n_intervals))
    distance = np.min(np.abs(result.control.values[:, None] - np.array([-1.0, 0.0, 1.0])), axis=1)
    assert np.all(distance <= 1e-9)


@pytest.mark.parametrize("n_intervals", [113, 257, 331])
def test_arbitrary_grids_have_at_most_n_fractional_samples(di, n_intervals):
    assert solve_l1(transcribe(di, INSTANCE.xi, 5.0, n_intervals)).fractional_count <= 2


@pytest.mark.slow
def test_convexity_probe_on_double_integrator(di):
    report = convexity_probe(ValueOracle(di, 5.0, 100), trials=200, seed=42, box=[(-3.0, 3.0)] * 2)
    assert report.trials == 200
    assert report.max_violation <= 1e-8


@pytest.mark.slow
def test_reachable_set_agrees_with_value_level_set(di):
    field = sample_value_field(di, parse_grid_spec("-3:3:61,-3:3:61"), 5.0, 100, workers=4, check_reachability=True)
    assert reachability_mismatches(field) == []


def test_scalar_boundary_brackets_unit_interval(scalar):
    axis = GridAxis(-1.5, 1.5, 31)
    field = sample_value_field(scalar, [axis], 1.0, 200)
    cells = boundary_estimate(field)
    assert len(cells) == 2
    for cell in cells:
        inner, outer = abs(cell.inner_state[0]), abs(cell.outer_state[0])
        assert inner < 1.0 <= outer + 1e-12
        assert outer - inner <= axis.step + 1e-12


@pytest.mark.slow
def test_continuity_oscillation_is_bounded_by_dual_norm(di):
    oracle = ValueOracle(di, 5.0, 100)
    points = np.random.default_rng(11).uniform(-1.0, 1.0, size=(10, 2))
    for radius in (0.1, 0.05):
        report = continuity_probe(oracle, points, radius)
        assert report.skipped == []
        for row in report.rows:
            assert row.oscillation <= row.lipschitz * radius + 1e-8
            assert row.oscillation < 2.0 * row.lipschitz * radius + 1e-8
