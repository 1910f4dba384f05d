"""
This module builds the convex program of every (scenario, case, objective) combination.

Transmit powers are replaced by energies `y = P·t`, which turns every rate `t·log(1 + γP)` into the negated perspective
`−l_γ(t, y)`. The harvesting slot `t0 = 1 − Σt` is eliminated. Scenarios without energy cooperation (S2, S4) are obtained
from their counterparts (S1, S3) by substituting `ρ = 0` and `η = 0`.
"""
from __future__ import annotations

import typing
from dataclasses import dataclass, field

from enercoop.convex.program import ConvexProgram, EpigraphConstraint, LinearConstraint, PerspectiveTerm, VariableKind
from enercoop.errors import InvalidConfigurationError
from enercoop.model import MILLI, Case, ChannelState, NetworkConfig, Objective, Scenario, ScenarioSpec
from enercoop.network.channels import rho_max

THROUGHPUT_FLOOR: float = 1.0
"""Lower bound (nats) put on a relayed throughput that carries no weight in the objective"""


@dataclass
class _ProgramBuilder:
    label: str
    names: list[str] = field(default_factory=list)
    kinds: list[VariableKind] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    objective_terms: list[PerspectiveTerm] = field(default_factory=list)
    epigraphs: list[EpigraphConstraint] = field(default_factory=list)
    linear: list[LinearConstraint] = field(default_factory=list)

    def variables(self: typing.Self, kind: VariableKind, *names: str) -> None:
        self.names.extend(names)
        self.kinds.extend([kind] * len(names))

    def term(self: typing.Self, gamma: float, t: str, y: str, coeff: float = 1.0) -> PerspectiveTerm:
        return PerspectiveTerm(gamma=gamma, t_index=self.names.index(t), y_index=self.names.index(y), coeff=coeff)

    def maximize_rate(self: typing.Self, weight: float, gamma: float, t: str, y: str) -> None:
        if weight > 0:
            self.objective_terms.append(self.term(gamma, t, y, weight))

    def maximize(self: typing.Self, weight: float, name: str) -> None:
        self.objective[name] = self.objective.get(name, 0.0) - weight

    def epigraph(self: typing.Self, aux: str, terms: typing.Iterable[PerspectiveTerm], label: str) -> None:
        self.epigraphs.append(EpigraphConstraint(aux_index=self.names.index(aux), terms=tuple(terms), label=label))

    def constrain(self: typing.Self, coefficients: dict[str, float], b: float, label: str) -> None:
        unknown = set(coefficients) - set(self.names)
        if len(unknown) > 0:
            raise InvalidConfigurationError(f"constraint '{label}' uses unknown variables {sorted(unknown)}")
        a = tuple(float(coefficients.get(name, 0.0)) for name in self.names)
        self.linear.append(LinearConstraint(a=a, b=float(b), label=label))

    def build(self: typing.Self) -> ConvexProgram:
        return ConvexProgram(
            names=tuple(self.names),
            kinds=tuple(self.kinds),
            linear_objective=tuple(self.objective.get(name, 0.0) for name in self.names),
            objective_terms=tuple(self.objective_terms),
            epigraphs=tuple(self.epigraphs),
            linear=tuple(self.linear),
            label=self.label,
        )


def _relay_program(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState, *, rho: float, eta: float) -> ConvexProgram:
    """Data cooperation: U1 relays U2's message in a third slot (S1, and S2 with ρ = η = 0)"""
    builder = _ProgramBuilder(label=spec.label)
    builder.variables(VariableKind.TIME, "t1", "t2", "t3")
    builder.variables(VariableKind.ENERGY, "y1", "y2", "y3")
    builder.variables(VariableKind.AUX, "B")

    X1, X2 = cfg.X1 * MILLI, cfg.X2 * MILLI
    split = (1.0 - rho) * ch.gammaU
    common = spec.objective == Objective.COMMON_THROUGHPUT

    if spec.case == Case.A:
        # U1 own data in t1, U2 broadcast in t2, U1 relays in t3
        own, broadcast, relay = ("t1", "y1"), ("t2", "y2"), ("t3", "y3")
    else:
        # U2 broadcast in t1, U1 relays in t2, U1 own data in t3
        broadcast, relay, own = ("t1", "y1"), ("t2", "y2"), ("t3", "y3")

    if common:
        builder.variables(VariableKind.AUX, "Bbar")
        builder.maximize(1.0, "Bbar")
    else:
        builder.maximize_rate(cfg.w1, ch.gamma1, *own)
        builder.maximize(cfg.w2, "B")

    builder.epigraph("B", (builder.term(ch.gamma2, *broadcast), builder.term(ch.gamma1, *relay)), "U2 direct and relayed rate")
    builder.epigraph("B", (builder.term(split, *broadcast),), "U2 -> U1 decoding rate")
    if common:
        builder.epigraph("Bbar", (builder.term(ch.gamma1, *own),), "U1 rate")

    if spec.case == Case.A:
        builder.constrain({"y1": 1.0, "t1": X1, "t2": X1, "t3": X1}, X1, "U1 energy in t1")
        builder.constrain({"y1": -eta * ch.hu, "y2": 1.0, "t2": X2, "t3": X2}, X2, "U2 energy in t2")
        builder.constrain({"y1": 1.0, "y2": -eta * rho * ch.hu, "y3": 1.0, "t3": X1}, X1, "U1 energy in t3")
    else:
        builder.constrain({"y1": 1.0, "t1": X2, "t2": X2, "t3": X2}, X2, "U2 energy in t1")
        builder.constrain({"y1": -eta * rho * ch.hu, "y2": 1.0, "t2": X1, "t3": X1}, X1, "U1 energy in t2")
        builder.constrain({"y1": -eta * rho * ch.hu, "y2": 1.0, "y3": 1.0, "t3": X1}, X1, "U1 energy in t3")
    builder.constrain({"t1": 1.0, "t2": 1.0, "t3": 1.0}, 1.0, "total time")

    if common:
        builder.constrain({"Bbar": 1.0, "B": -1.0}, 0.0, "common throughput below U2 rate")
    elif cfg.w2 == 0:
        builder.constrain({"B": -1.0}, THROUGHPUT_FLOOR, "unweighted throughput floor")

    return builder.build()


def _direct_program(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState, *, eta: float) -> ConvexProgram:
    """No data cooperation: each user sends its own data in its slot (S3, and S4 with η = 0)"""
    builder = _ProgramBuilder(label=spec.label)
    builder.variables(VariableKind.TIME, "t1", "t2")
    builder.variables(VariableKind.ENERGY, "y1", "y2")

    X1, X2 = cfg.X1 * MILLI, cfg.X2 * MILLI

    # the first slot belongs to U1 in Case A and to U2 in Case B
    first, second = ("t1", "y1"), ("t2", "y2")
    u1, u2 = (first, second) if spec.case == Case.A else (second, first)
    X_first, X_second = (X1, X2) if spec.case == Case.A else (X2, X1)

    if spec.objective == Objective.COMMON_THROUGHPUT:
        builder.variables(VariableKind.AUX, "Bbar")
        builder.maximize(1.0, "Bbar")
        builder.epigraph("Bbar", (builder.term(ch.gamma1, *u1),), "U1 rate")
        builder.epigraph("Bbar", (builder.term(ch.gamma2, *u2),), "U2 rate")
    else:
        builder.maximize_rate(cfg.w1, ch.gamma1, *u1)
        builder.maximize_rate(cfg.w2, ch.gamma2, *u2)

    builder.constrain({"y1": 1.0, "t1": X_first, "t2": X_first}, X_first, "first user energy in t1")
    builder.constrain({"y1": -eta * ch.hu, "y2": 1.0, "t2": X_second}, X_second, "second user energy in t2")
    builder.constrain({"t1": 1.0, "t2": 1.0}, 1.0, "total time")

    return builder.build()


def build_problem(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState) -> ConvexProgram:
    """
    Build the canonical convex program of a combination.

    Variable layouts are `(t1, t2, t3, y1, y2, y3, B)` for S1/S2 and `(t1, t2, y1, y2)` for S3/S4; the common throughput
    objective appends `Bbar`. Energies are in joules: the natural arrival rates (mW) are converted with `MILLI`.

    Raises
    ------
    * `RelayNotBeneficialError` for S1/S2 when U2 reaches D better than U1
    * `InvalidConfigurationError` when the PS ratio is not below `rho_max`
    """
    match spec.scenario:
        case Scenario.S1:
            limit = rho_max(ch)
            if spec.rho >= limit:
                raise InvalidConfigurationError(f"the PS ratio must be below rho_max={limit:g} (got {spec.rho})")
            return _relay_program(spec, cfg, ch, rho=spec.rho, eta=cfg.eta)
        case Scenario.S2:
            rho_max(ch)
            return _relay_program(spec, cfg, ch, rho=0.0, eta=0.0)
        case Scenario.S3:
            return _direct_program(spec, cfg, ch, eta=cfg.eta)
        case Scenario.S4:
            return _direct_program(spec, cfg, ch, eta=0.0)
