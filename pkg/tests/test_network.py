import math

import numpy as np
import pytest

from enercoop.convex.program import Allocation, VariableKind
from enercoop.errors import DomainError, InfeasibleAllocationError, InvalidConfigurationError, RelayNotBeneficialError
from enercoop.model import Case, NetworkConfig, Objective, Scenario, ScenarioSpec
from enercoop.network import (
    Transmission,
    User,
    build_problem,
    derive_channels,
    describe_allocation,
    energy_ledger,
    harvested_rf_energy,
    relay_beneficial,
    relay_branches,
    rho_max,
    schedule,
    throughputs_from_allocation,
)
from enercoop.network.channels import path_gain

TIME, ENERGY = VariableKind.TIME, VariableKind.ENERGY


def _direct(t1: float, t2: float, y1: float, y2: float) -> Allocation:
    return Allocation(x=np.array([t1, t2, y1, y2]), names=("t1", "t2", "y1", "y2"), kinds=(TIME, TIME, ENERGY, ENERGY))


def _relayed(t: tuple[float, float, float], y: tuple[float, float, float]) -> Allocation:
    return Allocation(
        x=np.array([*t, *y, 0.0]),
        names=("t1", "t2", "t3", "y1", "y2", "y3", "B"),
        kinds=(TIME, TIME, TIME, ENERGY, ENERGY, ENERGY, VariableKind.AUX),
    )


def _bits(gamma: float, t: float, y: float) -> float:
    return t * math.log2(1 + gamma * y / t)


def test_path_gain():
    assert path_gain(2.0, 2.0, 1.0) == pytest.approx(0.25)
    assert path_gain(1.0, 3.0, 0.5) == pytest.approx(0.5)
    with pytest.raises(InvalidConfigurationError):
        path_gain(0.0, 2.0, 1.0)


def test_default_channels(ch):
    assert (ch.h1, ch.h2, ch.hu) == pytest.approx((1.0, 0.25, 1.0))
    assert (ch.gamma1, ch.gamma2, ch.gammaU) == pytest.approx((1e4, 2500.0, 1e4))
    assert relay_beneficial(ch)
    assert rho_max(ch) == pytest.approx(0.75)


def test_relay_not_beneficial(not_beneficial):
    ch = derive_channels(not_beneficial)
    assert ch.gammaU == pytest.approx(1e4 / 9)
    assert not relay_beneficial(ch)
    with pytest.raises(RelayNotBeneficialError):
        rho_max(ch)
    for scenario in (Scenario.S1, Scenario.S2):
        with pytest.raises(RelayNotBeneficialError):
            build_problem(ScenarioSpec(scenario=scenario, case=Case.A), not_beneficial, ch)


def test_harvested_rf_energy():
    assert harvested_rf_energy(0.1, 1.0, 0.5, 0.75, 0.4) == pytest.approx(0.015)
    assert harvested_rf_energy(0.1, 1.0, 0.0, 0.75, 0.4) == 0.0
    with pytest.raises(DomainError):
        harvested_rf_energy(-0.1, 1.0, 0.5, 0.75, 0.4)
    with pytest.raises(DomainError):
        harvested_rf_energy(0.1, 1.0, 1.5, 0.75, 0.4)


def test_network_config_validation():
    with pytest.raises(InvalidConfigurationError):
        NetworkConfig(d1=2.5)
    with pytest.raises(InvalidConfigurationError):
        NetworkConfig(eta=1.5)
    with pytest.raises(InvalidConfigurationError):
        NetworkConfig(X1=-1.0)
    with pytest.raises(InvalidConfigurationError):
        NetworkConfig(w1=0.0, w2=0.0)

    moved = NetworkConfig.default().with_d1_collinear(1.6)
    assert moved.d1 == pytest.approx(1.6)
    assert moved.du == pytest.approx(0.4)


def test_scenario_spec_validation():
    with pytest.raises(InvalidConfigurationError):
        ScenarioSpec(scenario=Scenario.S2, case=Case.A, rho=0.2)
    with pytest.raises(InvalidConfigurationError):
        ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=1.0)
    assert str(ScenarioSpec(scenario=Scenario.S1, case=Case.B, rho=0.3)) == "S1-B[sum, rho=0.3]"


def test_rho_at_or_above_its_supremum_is_rejected(cfg, ch):
    with pytest.raises(InvalidConfigurationError):
        build_problem(ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=0.75), cfg, ch)
    build_problem(ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=0.7), cfg, ch)


def test_variable_layouts(program):
    assert program(Scenario.S1, Case.A).names == ("t1", "t2", "t3", "y1", "y2", "y3", "B")
    assert program(Scenario.S2, Case.B, Objective.COMMON_THROUGHPUT).names == ("t1", "t2", "t3", "y1", "y2", "y3", "B", "Bbar")
    assert program(Scenario.S3, Case.A).names == ("t1", "t2", "y1", "y2")
    assert program(Scenario.S4, Case.B, Objective.COMMON_THROUGHPUT).names == ("t1", "t2", "y1", "y2", "Bbar")


def test_direct_program_constraints(program):
    p = program(Scenario.S3, Case.A)
    u1, u2, total = p.linear
    assert u1.a == pytest.approx((0.1, 0.1, 1.0, 0.0))
    assert u1.b == pytest.approx(0.1)
    # U2 also spends what it harvested from U1's slot
    assert u2.a == pytest.approx((0.0, 0.1, -0.75, 1.0))
    assert total.a == pytest.approx((1.0, 1.0, 0.0, 0.0))
    assert total.b == 1.0
    assert len(p.objective_terms) == 2
    assert [term.gamma for term in p.objective_terms] == pytest.approx([1e4, 2500.0])


def test_relay_program_constraints(program):
    p = program(Scenario.S1, Case.B, rho=0.4)
    u2, relay, own, _ = p.linear
    # layout (t1, t2, t3, y1, y2, y3, B): U2 broadcasts in t1, U1 relays in t2 and sends its own data in t3
    assert u2.a == pytest.approx((0.1, 0.1, 0.1, 1.0, 0.0, 0.0, 0.0))
    assert relay.a == pytest.approx((0.0, 0.1, 0.1, -0.3, 1.0, 0.0, 0.0))
    assert own.a == pytest.approx((0.0, 0.0, 0.1, -0.3, 1.0, 1.0, 0.0))
    cooperative, link = p.epigraphs
    assert [term.gamma for term in cooperative.terms] == pytest.approx([2500.0, 1e4])
    assert [term.gamma for term in link.terms] == pytest.approx([6000.0])


@pytest.mark.parametrize("case", list(Case))
def test_data_cooperation_alone_is_relaying_without_harvesting(case):
    cfg = NetworkConfig(eta=0.0)
    ch = derive_channels(cfg)
    both = build_problem(ScenarioSpec(scenario=Scenario.S1, case=case, rho=0.0), cfg, ch)
    data_only = build_problem(ScenarioSpec(scenario=Scenario.S2, case=case), cfg, ch)
    assert both.equivalent(data_only)


@pytest.mark.parametrize("case", list(Case))
def test_no_cooperation_is_energy_cooperation_without_harvesting(case):
    cfg = NetworkConfig(eta=0.0)
    ch = derive_channels(cfg)
    energy_only = build_problem(ScenarioSpec(scenario=Scenario.S3, case=case), cfg, ch)
    neither = build_problem(ScenarioSpec(scenario=Scenario.S4, case=case), cfg, ch)
    assert energy_only.equivalent(neither)
    assert not energy_only.equivalent(build_problem(ScenarioSpec(scenario=Scenario.S3, case=case), NetworkConfig(), derive_channels(NetworkConfig())))


def test_schedules():
    roles = [slot.role for slot in schedule(Scenario.S1, Case.A)]
    assert roles == ["U1 sends its own data", "U2 broadcasts its data to D and U1", "U1 relays U2's data"]
    assert [slot.transmitter for slot in schedule(Scenario.S4, Case.B)] == [User.U2, User.U1]
    assert schedule(Scenario.S2, Case.B) == schedule(Scenario.S1, Case.B)
    assert schedule(Scenario.S1, Case.B)[1].transmission == Transmission.RELAY


def test_throughputs_without_relaying(cfg, ch):
    alloc = _direct(0.4, 0.4, 0.02, 0.04)
    spec = ScenarioSpec(scenario=Scenario.S4, case=Case.A)
    B1, B2 = throughputs_from_allocation(spec, cfg, ch, alloc)
    assert B1 == pytest.approx(_bits(1e4, 0.4, 0.02))
    assert B2 == pytest.approx(_bits(2500.0, 0.4, 0.04))

    # Case B: U2 owns the first slot
    B1, B2 = throughputs_from_allocation(ScenarioSpec(scenario=Scenario.S4, case=Case.B), cfg, ch, alloc)
    assert B1 == pytest.approx(_bits(1e4, 0.4, 0.04))
    assert B2 == pytest.approx(_bits(2500.0, 0.4, 0.02))


def test_infeasible_allocation_is_rejected(cfg, ch):
    spec = ScenarioSpec(scenario=Scenario.S4, case=Case.A)
    with pytest.raises(InfeasibleAllocationError):
        throughputs_from_allocation(spec, cfg, ch, _direct(0.4, 0.4, 0.05, 0.04))
    with pytest.raises(InfeasibleAllocationError):
        throughputs_from_allocation(spec, cfg, ch, _direct(0.4, 0.4, -0.01, 0.04))


def test_relayed_throughput_takes_the_weaker_branch(cfg, ch):
    spec = ScenarioSpec(scenario=Scenario.S2, case=Case.A)
    alloc = _relayed((0.3, 0.3, 0.2), (0.01, 0.02, 0.01))

    branches = relay_branches(spec, ch, alloc)
    assert branches.direct == pytest.approx(_bits(2500.0, 0.3, 0.02))
    assert branches.relayed == pytest.approx(_bits(1e4, 0.2, 0.01))
    assert branches.link == pytest.approx(_bits(1e4, 0.3, 0.02))
    assert branches.throughput == pytest.approx(min(branches.cooperative, branches.link))

    B1, B2 = throughputs_from_allocation(spec, cfg, ch, alloc)
    assert B1 == pytest.approx(_bits(1e4, 0.3, 0.01))
    assert B2 == pytest.approx(branches.throughput)

    with pytest.raises(InvalidConfigurationError):
        relay_branches(ScenarioSpec(scenario=Scenario.S3, case=Case.A), ch, _direct(0.4, 0.4, 0.02, 0.04))


def test_power_splitting_weakens_the_link(ch):
    alloc = _relayed((0.3, 0.3, 0.2), (0.01, 0.02, 0.01))
    plain = relay_branches(ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=0.0), ch, alloc)
    split = relay_branches(ScenarioSpec(scenario=Scenario.S1, case=Case.A, rho=0.5), ch, alloc)
    assert split.link == pytest.approx(_bits(5000.0, 0.3, 0.02))
    assert split.link < plain.link
    assert split.cooperative == pytest.approx(plain.cooperative)


def test_describe_allocation():
    table = describe_allocation(ScenarioSpec(scenario=Scenario.S1, case=Case.B), _relayed((0.3, 0.3, 0.2), (0.01, 0.02, 0.01)))
    assert list(table["slot"]) == ["t0", "t1", "t2", "t3"]
    assert table["duration"].sum() == pytest.approx(1.0)
    assert list(table["transmitter"]) == ["", "U2", "U1", "U1"]
    assert table.loc[table["slot"] == "t3", "power_W"].item() == pytest.approx(0.05)


def test_energy_ledger(cfg, ch):
    alloc = _direct(0.4, 0.4, 0.02, 0.04)

    ledger = energy_ledger(ScenarioSpec(scenario=Scenario.S3, case=Case.A), cfg, ch, alloc)
    assert len(ledger) == 6
    assert ledger["causal"].all()
    harvested = ledger[(ledger["slot"] == "t1") & (ledger["user"] == "U2")]["harvested_J"].item()
    assert harvested == pytest.approx(0.015)

    ledger = energy_ledger(ScenarioSpec(scenario=Scenario.S4, case=Case.A), cfg, ch, alloc)
    assert ledger["harvested_J"].sum() == 0.0
    assert ledger["causal"].all()


def test_throughputs_grow_with_the_energies(cfg, ch):
    direct = ScenarioSpec(scenario=Scenario.S4, case=Case.A)
    B1 = [throughputs_from_allocation(direct, cfg, ch, _direct(0.4, 0.4, y1, 0.04))[0] for y1 in np.linspace(0.0, 0.02, 6)]
    B2 = [throughputs_from_allocation(direct, cfg, ch, _direct(0.4, 0.4, 0.01, y2))[1] for y2 in np.linspace(0.0, 0.06, 6)]
    assert np.all(np.diff(B1) > 0)
    assert np.all(np.diff(B2) > 0)

    relayed = ScenarioSpec(scenario=Scenario.S2, case=Case.A)
    by_relay = [throughputs_from_allocation(relayed, cfg, ch, _relayed((0.3, 0.3, 0.2), (0.01, 0.02, y3)))[1] for y3 in np.linspace(0.0, 0.01, 6)]
    by_own = [throughputs_from_allocation(relayed, cfg, ch, _relayed((0.3, 0.3, 0.2), (0.01, y2, 0.01)))[1] for y2 in np.linspace(0.0, 0.02, 6)]
    assert np.all(np.diff(by_relay) >= 0)
    assert np.all(np.diff(by_own) >= 0)
