"""Path-loss channel gains, SNR coefficients and the RF energy harvesting model."""
from __future__ import annotations

from enercoop.errors import DomainError, InvalidConfigurationError, RelayNotBeneficialError
from enercoop.model import ChannelState, NetworkConfig


def path_gain(distance: float, alpha: float, lambda_: float) -> float:
    """The channel power gain `h = λ·d^(−α)`"""
    if distance <= 0:
        raise InvalidConfigurationError(f"distances must be positive (got {distance})")
    return lambda_ * distance ** (-alpha)


def derive_channels(cfg: NetworkConfig) -> ChannelState:
    """
    Compute the channel power gains and SNR coefficients of a network.

    The U1 <-> U2 channel is reciprocal, so a single gain `hu` describes both directions.
    """
    for name in ("sigma2_D", "sigma2_U1"):
        if getattr(cfg, name) <= 0:
            raise InvalidConfigurationError(f"{name} must be positive (got {getattr(cfg, name)})")

    h1 = path_gain(cfg.d1, cfg.alpha, cfg.lambda_)
    h2 = path_gain(cfg.d2, cfg.alpha, cfg.lambda_)
    hu = path_gain(cfg.du, cfg.alpha, cfg.lambda_)

    return ChannelState(
        h1=h1,
        h2=h2,
        hu=hu,
        gamma1=h1 / cfg.sigma2_D,
        gamma2=h2 / cfg.sigma2_D,
        gammaU=hu / cfg.sigma2_U1,
    )


def relay_beneficial(ch: ChannelState) -> bool:
    """Whether U2 reaches U1 better than it reaches D, which is required for relaying"""
    return ch.gammaU > ch.gamma2


def rho_max(ch: ChannelState) -> float:
    """
    The supremum of the power-splitting ratio at the relay, `1 − γ2/γu`.

    Above it, the part of U2's signal left for decoding at U1 is weaker than the direct U2 -> D link.
    """
    if not relay_beneficial(ch):
        raise RelayNotBeneficialError(f"relay not beneficial: gammaU={ch.gammaU:g} <= gamma2={ch.gamma2:g}")
    return 1.0 - ch.gamma2 / ch.gammaU


def harvested_rf_energy(P: float, h: float, rho: float, eta: float, t: float) -> float:
    """
    The energy harvested from a received RF signal, `η·ρ·P·h·t`.

    Parameters
    ----------
    * `P`:      *the transmit power*
    * `h`:      *the channel power gain between transmitter and harvester*
    * `rho`:    *the fraction of the received power sent to the harvester (1 when it harvests everything)*
    * `eta`:    *the harvesting efficiency*
    * `t`:      *the duration of the transmission*

    Returns
    -------
    * the harvested energy, in the units of `P·t`
    """
    if min(P, h, rho, eta, t) < 0:
        raise DomainError(f"harvesting arguments must be nonnegative (P={P}, h={h}, rho={rho}, eta={eta}, t={t})")
    if rho > 1 or eta > 1:
        raise DomainError(f"rho and eta cannot exceed 1 (rho={rho}, eta={eta})")
    return eta * rho * P * h * t
