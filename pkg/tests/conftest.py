import typing

import pytest

from enercoop.convex.program import ConvexProgram
from enercoop.model import Case, ChannelState, NetworkConfig, Objective, Scenario, ScenarioSpec
from enercoop.network import build_problem, derive_channels
from enercoop.utils.logger import Level, setup_logger


@pytest.fixture(scope="session", autouse=True)
def _quiet_logger() -> None:
    setup_logger(Level.WARNING)


@pytest.fixture()
def cfg() -> NetworkConfig:
    """d1 = du = 1, d2 = 2, X1 = X2 = 100 mW"""
    return NetworkConfig.default()


@pytest.fixture()
def ch(cfg: NetworkConfig) -> ChannelState:
    return derive_channels(cfg)


@pytest.fixture()
def not_beneficial() -> NetworkConfig:
    """U2 is closer to D than to U1, so relaying does not pay off"""
    return NetworkConfig.default().with_values(du=3.0)


@pytest.fixture()
def program() -> typing.Callable[..., ConvexProgram]:
    """Build the program of a combination, on the default network unless another one is given"""

    def build(
        scenario: Scenario,
        case: Case,
        objective: Objective = Objective.WEIGHTED_SUM,
        rho: float = 0.0,
        network: NetworkConfig | None = None,
    ) -> ConvexProgram:
        network = network or NetworkConfig.default()
        spec = ScenarioSpec(scenario=scenario, case=case, objective=objective, rho=rho)
        return build_problem(spec, network, derive_channels(network))

    return build
