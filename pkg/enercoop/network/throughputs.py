"""Per-user throughputs, relay diagnostics and energy accounting of an allocation."""
from __future__ import annotations

import typing
from dataclasses import dataclass

import numpy as np
import pandas as pd

from enercoop.convex.perspective import perspective_value
from enercoop.convex.program import Allocation, VariableKind
from enercoop.errors import InfeasibleAllocationError, InvalidConfigurationError
from enercoop.model import LN2, MILLI, ChannelState, NetworkConfig, ScenarioSpec
from enercoop.network.channels import harvested_rf_energy
from enercoop.network.formulation import build_problem
from enercoop.network.protocol import Harvest, Transmission, User, schedule

FEASIBILITY_TOLERANCE: float = 1e-9
"""Largest constraint violation (J or block fraction) accepted when evaluating an allocation"""


def _bits(gamma: float, t: float, y: float) -> float:
    """The rate `t·log2(1 + γy/t)` of a slot, 0 for an empty slot"""
    return -perspective_value(gamma, max(t, 0.0), max(y, 0.0)) / LN2


def _check_feasible(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState, alloc: Allocation) -> None:
    program = build_problem(spec, cfg, ch)
    physical = [i for i, kind in enumerate(program.kinds) if kind != VariableKind.AUX]
    missing = [program.names[i] for i in physical if program.names[i] not in alloc]
    if len(missing) > 0:
        raise InfeasibleAllocationError(f"allocation for {spec.label} misses {missing}")
    x = np.array([alloc.get(name) for name in program.names])

    negative = [program.names[i] for i in physical if x[i] < -FEASIBILITY_TOLERANCE]
    if len(negative) > 0:
        raise InfeasibleAllocationError(f"allocation for {spec.label} has negative {negative}")
    for constraint in program.linear:
        # constraints between auxiliary throughputs say nothing about the physical allocation
        if any(constraint.a[i] != 0 for i in program.indices(VariableKind.AUX)):
            continue
        if constraint.value(x) > FEASIBILITY_TOLERANCE:
            raise InfeasibleAllocationError(f"allocation for {spec.label} violates '{constraint.label}' by {constraint.value(x):g}")


@dataclass(frozen=True)
class RelayBranches:
    """The two branches of the relayed user's throughput, in bits"""

    direct: float
    """U2's rate straight to D"""
    relayed: float
    """The rate U1 forwards to D"""
    link: float
    """The rate U1 can decode from U2's broadcast"""

    @property
    def cooperative(self: typing.Self) -> float:
        """What D can decode by combining the direct and relayed signals"""
        return self.direct + self.relayed

    @property
    def throughput(self: typing.Self) -> float:
        """The relayed user's throughput, limited by the weaker branch"""
        return min(self.cooperative, self.link)

    @property
    def binding(self: typing.Self) -> str:
        """Which branch limits the throughput"""
        return "link" if self.link < self.cooperative else "cooperative"


def relay_branches(spec: ScenarioSpec, ch: ChannelState, alloc: Allocation) -> RelayBranches:
    """
    Evaluate both branches of U2's throughput in a data cooperation scenario.

    The relay decodes U2 from the fraction `1 − ρ` of the received signal left to its information decoder.
    """
    if not spec.scenario.relays:
        raise InvalidConfigurationError(f"{spec.scenario.value} has no relay")

    slots = {slot.transmission: slot for slot in schedule(spec.scenario, spec.case)}
    broadcast, relay = slots[Transmission.BROADCAST], slots[Transmission.RELAY]

    t_b, y_b = alloc[broadcast.time], alloc[broadcast.energy]
    t_r, y_r = alloc[relay.time], alloc[relay.energy]

    return RelayBranches(
        direct=_bits(ch.gamma2, t_b, y_b),
        relayed=_bits(ch.gamma1, t_r, y_r),
        link=_bits((1.0 - spec.rho) * ch.gammaU, t_b, y_b),
    )


def throughputs_from_allocation(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState, alloc: Allocation) -> tuple[float, float]:
    """
    The bits delivered to D by each user over one block.

    Raises
    ------
    * `InfeasibleAllocationError` if the allocation violates the time or energy constraints of the combination
    """
    _check_feasible(spec, cfg, ch, alloc)

    own = dict.fromkeys(User, 0.0)
    gammas = {User.U1: ch.gamma1, User.U2: ch.gamma2}
    for slot in schedule(spec.scenario, spec.case):
        if slot.transmission == Transmission.OWN:
            own[slot.transmitter] = _bits(gammas[slot.transmitter], alloc[slot.time], alloc[slot.energy])

    if spec.scenario.relays:
        return own[User.U1], relay_branches(spec, ch, alloc).throughput
    return own[User.U1], own[User.U2]


def describe_allocation(spec: ScenarioSpec, alloc: Allocation) -> pd.DataFrame:
    """A table with the duration, transmitter, role, energy and power of every slot, the harvesting slot first"""
    rows = [{"slot": "t0", "duration": alloc.t0, "transmitter": "", "role": "both users harvest natural energy", "energy_J": 0.0, "power_W": 0.0}]
    powers = alloc.powers
    for slot in schedule(spec.scenario, spec.case):
        rows.append({
            "slot": slot.time,
            "duration": alloc[slot.time],
            "transmitter": slot.transmitter.value,
            "role": slot.role,
            "energy_J": alloc[slot.energy],
            "power_W": powers[f"P{slot.index}"],
        })
    return pd.DataFrame(rows)


def energy_ledger(spec: ScenarioSpec, cfg: NetworkConfig, ch: ChannelState, alloc: Allocation) -> pd.DataFrame:
    """
    Track the energy of both users slot by slot.

    For every slot and user the table holds the natural energy arriving during the slot, the RF energy harvested from the
    other user's transmission, the energy spent, and the energy available before the slot. Energy arriving during a slot can
    only be spent in later slots, so the `causal` column checks `spent ≤ available`.
    """
    eta = cfg.eta if spec.scenario.harvests else 0.0
    arrivals = {User.U1: cfg.X1 * MILLI, User.U2: cfg.X2 * MILLI}
    available = dict.fromkeys(User, 0.0)

    rows = []
    slots = [("t0", alloc.t0, None)] + [(slot.time, alloc[slot.time], slot) for slot in schedule(spec.scenario, spec.case)]
    for name, duration, slot in slots:
        for user in User:
            spent, harvested = 0.0, 0.0
            if slot is not None and slot.transmitter == user:
                spent = alloc[slot.energy]
            if slot is not None and slot.transmitter == user.other and slot.harvest != Harvest.NONE:
                rho = 1.0 if slot.harvest == Harvest.FULL else spec.rho
                power = alloc[slot.energy] / duration if duration > 0 else 0.0
                harvested = harvested_rf_energy(power, ch.hu, rho, eta, duration)
            natural = arrivals[user] * duration
            rows.append({
                "slot": name,
                "user": user.value,
                "available_J": available[user],
                "natural_J": natural,
                "harvested_J": harvested,
                "spent_J": spent,
                "causal": spent <= available[user] + FEASIBILITY_TOLERANCE,
            })
            available[user] += natural + harvested - spent

    return pd.DataFrame(rows)
