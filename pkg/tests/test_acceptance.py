"""Acceptance criteria at their stated tolerances, one line per criterion."""
import pytest

from fuzzyspec import acceptance

LINES: list[str] = []


def check(result: acceptance.Criterion):
    line = result.line()
    LINES.append(line)
    print(line)
    assert result.passed, line


def test_criterion_1_construction_invariants():
    result = acceptance.criterion_construction()
    assert result.seconds <= 60
    check(result)


def test_criterion_2_closed_form_reconciliation():
    check(acceptance.criterion_closed_form())


def test_criterion_3_spectrum_convergence(eigen_cache):
    result = acceptance.criterion_convergence(eigen_cache)
    assert result.seconds <= 600
    check(result)


def test_criterion_4_functional_calculus_routes():
    check(acceptance.criterion_calculus())


def test_criterion_5_projections_and_multiplicities():
    check(acceptance.criterion_projections())


def test_criterion_6_spectral_action_trend(eigen_cache):
    check(acceptance.criterion_action(cache=eigen_cache))


def test_criterion_7_connes_distance():
    check(acceptance.criterion_mk())


def test_criterion_8_unitary_dynamics():
    check(acceptance.criterion_dynamics())


def test_criterion_9_metric_axioms_and_round_trip():
    check(acceptance.criterion_axioms())
