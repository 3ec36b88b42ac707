"""Shared fixtures: the case-study discretization and control problems."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import fracheat as fh

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def grid20():
    return fh.build_grid(20)


@pytest.fixture(scope="session")
def op20_unit(grid20):
    return fh.build_operator(grid20, s=0.8, normalization="unit")


@pytest.fixture(scope="session")
def op20_symbol(grid20):
    return fh.build_operator(grid20, s=0.8, normalization="symbol")


@pytest.fixture(scope="session")
def cos_profile(grid20):
    return np.cos(np.pi * grid20.interior_nodes / 2.0)


@pytest.fixture(scope="session")
def prob_case1(op20_unit, cos_profile):
    """First case study: steer 2 cos down to the trajectory of 0.05 cos."""
    return fh.make_problem(
        op20_unit,
        2.0 * cos_profile,
        0.05 * cos_profile,
        uhat=0.2,
        omega=(-0.3, 0.8),
        T_nominal=0.9,
        n_t=300,
    )


@pytest.fixture(scope="session")
def prob_case2(op20_unit, cos_profile):
    """Second case study: steer 0.5 cos up to the trajectory of 6 cos."""
    return fh.make_problem(
        op20_unit,
        0.5 * cos_profile,
        6.0 * cos_profile,
        uhat=1.0,
        omega=(-0.3, 0.8),
        T_nominal=0.4,
        n_t=100,
    )


@pytest.fixture(scope="session")
def lumped_diag(op20_unit):
    return np.diag(op20_unit.mass_lumped)


def m_norm(v, m):
    return float(np.sqrt(v @ (m * v)))
