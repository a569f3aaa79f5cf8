"""Shared factories and fixtures for the test suite."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from marketgames import (
    COURNOT,
    KELLY,
    OPEN,
    DynamicsConstants,
    GameSpec,
    MatchConfig,
    SyntheticSocialAgent,
    run_match,
)

settings.register_profile(
    "suite", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_cournot(valuation: float = 15.0, n: int = 2) -> GameSpec:
    return GameSpec(COURNOT, (valuation,) * n)


def make_kelly(valuation: float = 2.0, capacity: float = 1.0,
               n: int = 2) -> GameSpec:
    return GameSpec(KELLY, (valuation,) * n, capacity=capacity)


def play_synthetic(spec: GameSpec, horizon: int = 10, mode: str = OPEN,
                   **config_kwargs):
    """Run an all-synthetic match and return its log."""
    constants = DynamicsConstants.for_game(spec)
    config = MatchConfig(spec, horizon, mode, **config_kwargs)
    agents = [SyntheticSocialAgent(constants=constants)
              for _ in range(spec.n_agents)]
    return run_match(config, agents)


@pytest.fixture(scope="session")
def flagship() -> GameSpec:
    """Two-seller linear market with valuation 15 (Nash 5, optimum 3.75)."""
    return make_cournot()


@pytest.fixture(scope="session")
def bidding() -> GameSpec:
    """Two-bidder allocation market, valuation 2, capacity 1 (Nash 0.5)."""
    return make_kelly()


@pytest.fixture(scope="session")
def flagship_constants(flagship) -> DynamicsConstants:
    return DynamicsConstants.for_game(flagship)


@pytest.fixture(scope="session")
def trust_log(flagship):
    """Canonical 10-round cooperative trajectory, shared read-only."""
    return play_synthetic(flagship, horizon=10)
