"""Validation and penalty-construction tests."""

import numpy as np
import pytest

from mpct_eadmm.errors import (
    DimensionMismatch,
    EmptyBox,
    HorizonTooShort,
    NonPositiveWeight,
)
from mpct_eadmm.problem import (
    CostWeights,
    MpctConfig,
    PenaltyParams,
    SystemModel,
    build_rho,
    validate_problem,
)


def small_model(**overrides):
    kwargs = dict(
        A=np.array([[1.0, 0.1], [0.0, 1.0]]),
        B=np.array([[0.0], [0.1]]),
        x_lb=np.array([-1.0, -1.0]),
        x_ub=np.array([1.0, 1.0]),
        u_lb=np.array([-1.0]),
        u_ub=np.array([1.0]),
    )
    kwargs.update(overrides)
    return SystemModel(**kwargs)


def test_pendulum_instance_accepted(problem):
    assert problem.n == 3 and problem.m == 1 and problem.N == 12


def test_degenerate_box_rejected():
    with pytest.raises(EmptyBox):
        small_model(x_lb=np.array([-1.0, 1.0]))


def test_tightened_box_empty_rejected():
    with pytest.raises(EmptyBox):
        small_model(eps_x=np.array([1.0, 1.0]))


def test_horizon_too_short():
    with pytest.raises(HorizonTooShort):
        MpctConfig(N=1)


def test_dimension_cross_checks():
    model = small_model()
    costs = CostWeights(
        Q_diag=np.ones(2), R_diag=np.ones(1), T=np.eye(2), S=np.eye(1)
    )
    config = MpctConfig(N=3)
    rho = build_rho(model, config, 1.0, 1.0)
    bad = PenaltyParams(rho0=np.ones(3), rho_s=rho.rho_s, rho_hat=rho.rho_hat)
    with pytest.raises(DimensionMismatch):
        validate_problem(model, costs, config, bad)
    wrong_costs = CostWeights(
        Q_diag=np.ones(3), R_diag=np.ones(1), T=np.eye(3), S=np.eye(1)
    )
    with pytest.raises(DimensionMismatch):
        validate_problem(model, wrong_costs, config, rho)


def test_cost_weights_must_be_positive_definite():
    with pytest.raises(NonPositiveWeight):
        CostWeights(Q_diag=np.array([1.0, 0.0]), R_diag=np.ones(1), T=np.eye(2), S=np.eye(1))
    with pytest.raises(NonPositiveWeight):
        CostWeights(Q_diag=np.ones(2), R_diag=np.ones(1), T=-np.eye(2), S=np.eye(1))
    with pytest.raises(NonPositiveWeight):
        CostWeights(
            Q_diag=np.ones(2),
            R_diag=np.ones(1),
            T=np.array([[1.0, 0.5], [0.0, 1.0]]),
            S=np.eye(1),
        )


def test_penalty_params_positive():
    with pytest.raises(NonPositiveWeight):
        PenaltyParams(rho0=np.array([1.0, -1.0]), rho_s=np.ones(3), rho_hat=np.ones((3, 4)))
    with pytest.raises(NonPositiveWeight):
        PenaltyParams(rho0=np.ones(2), rho_s=np.ones(3), rho_hat=np.full((3, 4), np.inf))


def test_build_rho_pendulum_pattern(problem):
    rho = problem.rho
    n, N = problem.n, problem.N
    assert np.all(rho.rho0 == 1000.0)
    assert np.all(rho.rho_s == 1000.0)
    # First congruence column: boosted on the state part only; the input part
    # keeps the base value so the first input is not tied to the slowly
    # converging artificial reference.
    assert np.all(rho.rho_hat[:n, 0] == 1000.0)
    assert np.all(rho.rho_hat[n:, 0] == 20.0)
    assert np.all(rho.rho_hat[:, N] == 1000.0)
    assert np.all(rho.rho_hat[:, 1:N] == 20.0)
    # e.g. the fifth column is an interior one
    assert np.all(rho.rho_hat[:, 4] == 20.0)


def test_build_rho_uniform_degenerate():
    model = small_model()
    config = MpctConfig(N=4)
    rho = build_rho(model, config, 3.0, 3.0)
    assert np.all(rho.rho0 == 3.0)
    assert np.all(rho.rho_s == 3.0)
    assert np.all(rho.rho_hat == 3.0)
    assert rho.rho_hat.shape == (3, 5)


def test_build_rho_rejects_nonpositive():
    model = small_model()
    config = MpctConfig(N=4)
    with pytest.raises(NonPositiveWeight):
        build_rho(model, config, 0.0, 1.0)
    with pytest.raises(NonPositiveWeight):
        build_rho(model, config, 1.0, -2.0)
