"""
The transmission schedule of every (scenario, case) combination.

Slot 0 (`t0`) is always reserved to harvesting the natural energy arrivals. The remaining slots are listed in order with the
user transmitting in each, the energy variable it spends, and the user harvesting RF energy from that transmission.
"""
from __future__ import annotations

import enum
import typing
from dataclasses import dataclass

from enercoop.model import Case, Scenario


class User(enum.Enum):
    """The two sources"""

    U1 = "U1"
    """The near user, acting as relay in the data cooperation scenarios"""
    U2 = "U2"
    """The far user"""

    @property
    def other(self: typing.Self) -> User:
        """The other user"""
        return User.U2 if self == User.U1 else User.U1


class Harvest(enum.Enum):
    """How the listening user handles the received RF signal"""

    NONE = "none"
    """Nothing is harvested"""
    FULL = "full"
    """The whole signal goes to the harvester (the message is useless to the listener)"""
    SPLIT = "split"
    """A fraction ρ goes to the harvester, the rest to the information decoder"""


class Transmission(enum.Enum):
    """What a slot carries"""

    OWN = "sends its own data"
    """The transmitter sends its own message to D"""
    BROADCAST = "broadcasts its data to D and U1"
    """U2 sends its message to D while U1 listens"""
    RELAY = "relays U2's data"
    """U1 forwards the message it decoded from U2"""


@dataclass(frozen=True)
class Slot:
    """A transmission slot of the schedule"""

    index: int
    """The slot number, 1-based (slot 0 is the harvesting slot)"""
    transmitter: User
    transmission: Transmission
    harvest: Harvest

    @property
    def time(self: typing.Self) -> str:
        """The name of the time variable of the slot"""
        return f"t{self.index}"

    @property
    def energy(self: typing.Self) -> str:
        """The name of the energy variable of the slot"""
        return f"y{self.index}"

    @property
    def role(self: typing.Self) -> str:
        """A readable description of the slot"""
        return f"{self.transmitter.value} {self.transmission.value}"


_SCHEDULES: dict[tuple[bool, Case], tuple[Slot, ...]] = {
    (True, Case.A): (
        Slot(1, User.U1, Transmission.OWN, Harvest.FULL),
        Slot(2, User.U2, Transmission.BROADCAST, Harvest.SPLIT),
        Slot(3, User.U1, Transmission.RELAY, Harvest.NONE),
    ),
    (True, Case.B): (
        Slot(1, User.U2, Transmission.BROADCAST, Harvest.SPLIT),
        Slot(2, User.U1, Transmission.RELAY, Harvest.NONE),
        Slot(3, User.U1, Transmission.OWN, Harvest.NONE),
    ),
    (False, Case.A): (
        Slot(1, User.U1, Transmission.OWN, Harvest.FULL),
        Slot(2, User.U2, Transmission.OWN, Harvest.NONE),
    ),
    (False, Case.B): (
        Slot(1, User.U2, Transmission.OWN, Harvest.FULL),
        Slot(2, User.U1, Transmission.OWN, Harvest.NONE),
    ),
}


def schedule(scenario: Scenario, case: Case) -> tuple[Slot, ...]:
    """
    The transmission slots of a combination.

    Scenarios without energy cooperation share the schedule of their counterpart; their harvesting efficiency is zero.
    """
    return _SCHEDULES[(scenario.relays, case)]
