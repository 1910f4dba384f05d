"""
The physical layer of the three-node network: channels, harvesting, transmission schedules, and the convex programs and
throughputs of every energy/data cooperation scenario.
"""
from enercoop.network.channels import derive_channels, harvested_rf_energy, relay_beneficial, rho_max
from enercoop.network.formulation import build_problem
from enercoop.network.protocol import Harvest, Slot, Transmission, User, schedule
from enercoop.network.throughputs import (
    RelayBranches,
    describe_allocation,
    energy_ledger,
    relay_branches,
    throughputs_from_allocation,
)

__all__ = [
    "Harvest",
    "RelayBranches",
    "Slot",
    "Transmission",
    "User",
    "build_problem",
    "derive_channels",
    "describe_allocation",
    "energy_ledger",
    "harvested_rf_energy",
    "relay_beneficial",
    "relay_branches",
    "rho_max",
    "schedule",
    "throughputs_from_allocation",
]
