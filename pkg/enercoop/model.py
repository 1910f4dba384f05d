"""This module contains the definition of the value types describing the network, the scenarios and the solutions."""
from __future__ import annotations

import abc
import enum
import math
import typing
from dataclasses import dataclass, fields, replace

from enercoop.convex.program import Allocation
from enercoop.errors import InvalidConfigurationError


class Serializable(abc.ABC):  # noqa: D101
    @abc.abstractmethod
    def asdict(self) -> dict: ...  # noqa: ANN101, D102


class Scenario(enum.Enum):
    """The four energy/data cooperation scenarios"""

    S1 = "S1"
    """Both data cooperation (relaying) and energy cooperation (RF harvesting) are applied"""
    S2 = "S2"
    """Only data cooperation is applied"""
    S3 = "S3"
    """Only energy cooperation is applied"""
    S4 = "S4"
    """Neither data nor energy cooperation occurs"""

    @property
    def relays(self: typing.Self) -> bool:
        """Whether the near user relays the far user's message in this scenario"""
        return self in (Scenario.S1, Scenario.S2)

    @property
    def harvests(self: typing.Self) -> bool:
        """Whether RF energy broadcast by the other user is harvested in this scenario"""
        return self in (Scenario.S1, Scenario.S3)


class Case(enum.Enum):
    """The transmission order within a block"""

    A = "A"
    """The near user U1 transmits first"""
    B = "B"
    """The far user U2 transmits first"""


class Objective(enum.Enum):
    """The design goal"""

    WEIGHTED_SUM = "sum"
    """Maximize w1·B1 + w2·B2"""
    COMMON_THROUGHPUT = "common"
    """Maximize min(B1, B2)"""


class SolveStatus(enum.Enum):
    """The termination status of a solver"""

    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"
    FAILED = "Failed"
    """The program could not be built or solved because of an error"""
    SKIPPED = "Skipped"
    """The combination was not evaluated, as relaying does not pay off in this network"""


@dataclass(frozen=True)
class NetworkConfig(Serializable):
    """
    The physical scenario of the three-node network.

    Users U1 (near) and U2 (far) send data to the destination D. Energy arrival rates are given in mW, that is, in mJ
    per block, as the block length is fixed to one unit of time.
    """

    d1: float = 1.0
    """Distance from U1 to D"""
    d2: float = 2.0
    """Distance from U2 to D"""
    du: float = 1.0
    """Distance between U1 and U2"""
    alpha: float = 2.0
    """Path-loss exponent"""
    lambda_: float = 1.0
    """Average signal power attenuation at a reference distance of one unit"""
    sigma2_D: float = 1e-4
    """Noise power at the destination (W)"""
    sigma2_U1: float = 1e-4
    """Noise power at U1, the relay (W)"""
    sigma2_U2: float = 1e-4
    """Noise power at U2 (W)"""
    eta: float = 0.75
    """Energy harvesting efficiency"""
    X1: float = 100.0
    """Natural energy arrival rate at U1 (mW)"""
    X2: float = 100.0
    """Natural energy arrival rate at U2 (mW)"""
    w1: float = 1.0
    """Throughput weight of U1"""
    w2: float = 1.0
    """Throughput weight of U2"""

    def __post_init__(self: typing.Self) -> None:
        violations = self.violations
        if len(violations) > 0:
            raise InvalidConfigurationError(f"invalid network configuration: {', '.join(violations)}")

    @property
    def violations(self: typing.Self) -> list[str]:
        """Get the violations of the validity of the configuration"""
        result = []
        for name in ("d1", "d2", "du", "lambda_", "sigma2_D", "sigma2_U1", "sigma2_U2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                result.append(f"{name} must be positive (got {value})")
        if self.d1 >= self.d2:
            result.append(f"the near user must be closer than the far one (d1={self.d1}, d2={self.d2})")
        if not 0 <= self.eta <= 1:
            result.append(f"eta must lie in [0, 1] (got {self.eta})")
        if self.X1 < 0 or self.X2 < 0:
            result.append(f"energy arrival rates must be nonnegative (got X1={self.X1}, X2={self.X2})")
        if self.w1 < 0 or self.w2 < 0 or self.w1 + self.w2 == 0:
            result.append(f"weights must be nonnegative and not both zero (got w1={self.w1}, w2={self.w2})")
        return result

    @staticmethod
    def default() -> NetworkConfig:
        """The reference setting of the numerical study: collinear nodes d1 = du = 1, d2 = 2"""
        return NetworkConfig()

    def with_values(self: typing.Self, **changes: typing.Any) -> NetworkConfig:
        """Return a copy of this configuration with the given fields replaced (and validated)"""
        return replace(self, **changes)

    def with_d1_collinear(self: typing.Self, d1: float) -> NetworkConfig:
        """Move U1 along the U2-D segment, so that du = d2 - d1"""
        return replace(self, d1=d1, du=self.d2 - d1)

    def asdict(self: typing.Self) -> dict:
        return {item.name: getattr(self, item.name) for item in fields(self)}


@dataclass(frozen=True)
class ChannelState(Serializable):
    """Channel power gains and SNR coefficients derived from a `NetworkConfig`"""

    h1: float
    """Power gain of the U1 -> D channel"""
    h2: float
    """Power gain of the U2 -> D channel"""
    hu: float
    """Power gain of the (reciprocal) U1 <-> U2 channel"""
    gamma1: float
    """SNR coefficient of U1 at D"""
    gamma2: float
    """SNR coefficient of U2 at D"""
    gammaU: float
    """SNR coefficient of U2 at U1"""

    def asdict(self: typing.Self) -> dict:
        return {item.name: getattr(self, item.name) for item in fields(self)}


@dataclass(frozen=True)
class ScenarioSpec(Serializable):
    """A (scenario, case, objective, PS ratio) combination for which a program is built"""

    scenario: Scenario
    case: Case
    objective: Objective = Objective.WEIGHTED_SUM
    rho: float = 0.0
    """The power-splitting ratio at U1: the fraction of the received RF power sent to the harvester"""

    def __post_init__(self: typing.Self) -> None:
        if not 0 <= self.rho < 1:
            raise InvalidConfigurationError(f"the PS ratio must lie in [0, 1) (got {self.rho})")
        if self.scenario != Scenario.S1 and self.rho != 0:
            raise InvalidConfigurationError(f"the PS ratio is only meaningful in S1 (got rho={self.rho} for {self.scenario.value})")

    @property
    def label(self: typing.Self) -> str:
        """A short name for the combination, such as S1-A"""
        return f"{self.scenario.value}-{self.case.value}"

    def __str__(self: typing.Self) -> str:
        return f"{self.label}[{self.objective.value}, rho={self.rho:g}]"

    def asdict(self: typing.Self) -> dict:
        return {
            "scenario": self.scenario.value,
            "case": self.case.value,
            "objective": self.objective.value,
            "rho": self.rho,
        }


@dataclass(frozen=True)
class SolveResult(Serializable):
    """The outcome of a solver run"""

    x_star: Allocation
    """The final iterate"""
    objective_bits: float
    """The maximized objective (weighted sum or common throughput), in bits per block"""
    outer_iters: int
    """Barrier updates (Newton barrier) or quadratization rounds (iterative quadratic approach)"""
    inner_iters: int
    """Total Newton steps (Newton barrier) or total interior-point iterations (iterative quadratic approach)"""
    max_constraint_violation: float
    """The largest constraint value c_j(x*) (nonpositive when feasible)"""
    status: SolveStatus
    kkt_residual: float = math.nan
    """The stationarity residual of the final iterate"""
    solver: str = ""
    """The name of the solver that produced the result"""
    elapsed: float = 0.0
    """Wall-clock seconds spent by the solver"""
    history: tuple[float, ...] = ()
    """The objective (in bits) after each outer iteration"""
    diagnostics: tuple[str, ...] = ()
    """Notable events, such as regularized Newton systems"""
    reference_gap: float | None = None
    """Relative objective gap to the alternative solver, when both were run"""

    @property
    def converged(self: typing.Self) -> bool:
        """Whether the solver reported convergence"""
        return self.status == SolveStatus.CONVERGED

    def asdict(self: typing.Self) -> dict:
        return {
            "x_star": self.x_star.asdict(),
            "objective_bits": self.objective_bits,
            "outer_iters": self.outer_iters,
            "inner_iters": self.inner_iters,
            "max_constraint_violation": self.max_constraint_violation,
            "status": self.status.value,
            "kkt_residual": self.kkt_residual,
            "solver": self.solver,
            "elapsed": self.elapsed,
            "diagnostics": list(self.diagnostics),
            "reference_gap": self.reference_gap,
        }


@dataclass(frozen=True)
class CandidateRow(Serializable):
    """One evaluated (scenario, case, rho) candidate of a strategy selection"""

    scenario: Scenario
    case: Case
    rho: float
    objective_bits: float
    """The candidate objective, NaN when the solve failed"""
    status: SolveStatus

    def asdict(self: typing.Self) -> dict:
        return {
            "scenario": self.scenario.value,
            "case": self.case.value,
            "rho": self.rho,
            "objective_bits": self.objective_bits,
            "status": self.status.value,
        }


@dataclass(frozen=True)
class StrategyResult(Serializable):
    """The winning (scenario, case, rho*) combination with its allocation and per-user throughputs"""

    scenario: Scenario
    case: Case
    rho_star: float
    result: SolveResult
    B1: float
    """Throughput of U1 at the winning allocation (bits)"""
    B2: float
    """Throughput of U2 at the winning allocation (bits)"""
    per_candidate_table: tuple[CandidateRow, ...] = ()
    skipped: tuple[str, ...] = ()
    """Combinations that were not evaluated, with the reason"""
    refined_rho: float | None = None
    """A continuous refinement of rho*, reported separately and never replacing the grid value"""
    refined_objective_bits: float | None = None

    @property
    def objective_bits(self: typing.Self) -> float:
        """The winning objective"""
        return self.result.objective_bits

    @property
    def label(self: typing.Self) -> str:
        """A short name for the winner, such as S1-B"""
        return f"{self.scenario.value}-{self.case.value}"

    def asdict(self: typing.Self) -> dict:
        return {
            "scenario": self.scenario.value,
            "case": self.case.value,
            "rho_star": self.rho_star,
            "objective_bits": self.objective_bits,
            "B1": self.B1,
            "B2": self.B2,
            "result": self.result.asdict(),
            "candidates": [row.asdict() for row in self.per_candidate_table],
            "skipped": list(self.skipped),
            "refined_rho": self.refined_rho,
            "refined_objective_bits": self.refined_objective_bits,
        }


ALL_COMBINATIONS: tuple[tuple[Scenario, Case], ...] = tuple((scenario, case) for scenario in Scenario for case in Case)
"""The eight (scenario, case) combinations in canonical order"""

LN2: float = math.log(2.0)
"""Conversion factor between nats and bits"""

MILLI: float = 1e-3
"""Conversion factor from mJ per block (mW) to J per block"""

