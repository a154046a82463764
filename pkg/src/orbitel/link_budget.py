"""
Downlink budget chain: free-space loss, thermal noise, array gain and SNR.

Two evaluation modes are provided. ``snr_paper_mode`` reproduces the classic
worked-example arithmetic term by term (G/T added *and* kTB subtracted, with
the noise term taken as quoted, typically in dBm). ``snr_physical_mode`` is
the dimensionally consistent carrier-to-noise chain used for simulation.
Both return an itemised ledger whose entries sum to the SNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .constants import BOLTZMANN_J_K

PAPER = "paper"
PHYSICAL = "physical"

DEFAULT_NOISE_TEMP_K = 290.0
DEFAULT_HANDSET_GAIN_DBI = -3.0
DEFAULT_MARGIN_DB = 3.0


@dataclass(frozen=True)
class LinkBudgetInput:
    eirp_dbw: float
    path_loss_db: float
    excess_loss_db: float = 0.0
    rx_gain_over_temp_db_per_k: float = -17.0
    noise_temp_k: float = DEFAULT_NOISE_TEMP_K
    bandwidth_hz: float = 1e6
    impl_margin_db: float = DEFAULT_MARGIN_DB
    rx_gain_dbi: Optional[float] = DEFAULT_HANDSET_GAIN_DBI
    boltzmann: float = BOLTZMANN_J_K

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if not self.noise_temp_k > 0:
            raise ValueError(f"noise_temp_k must be > 0, got {self.noise_temp_k}")
        for name in ("path_loss_db", "excess_loss_db", "impl_margin_db"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class LinkBudgetResult:
    snr_db: float
    mode: str
    components: dict = field(default_factory=dict)

    def ledger_lines(self) -> list[str]:
        width = max((len(k) for k in self.components), default=0)
        lines = [f"{k:<{width}}  {v:+10.3f} dB" for k, v in self.components.items()]
        lines.append(f"{'SNR':<{width}}  {self.snr_db:+10.3f} dB  ({self.mode} mode)")
        return lines


def fspl_db(distance_km: float, freq_ghz: float) -> float:
    """Free-space path loss with distance in km and frequency in GHz."""
    if not (distance_km > 0 and freq_ghz > 0):
        raise ValueError("distance_km and freq_ghz must be positive")
    return 20.0 * math.log10(distance_km) + 20.0 * math.log10(freq_ghz) + 92.45


def noise_power_dbw(temp_k: float, bandwidth_hz: float, boltzmann: float = BOLTZMANN_J_K) -> float:
    if not (temp_k > 0 and bandwidth_hz > 0):
        raise ValueError("temp_k and bandwidth_hz must be positive")
    return 10.0 * math.log10(boltzmann * temp_k * bandwidth_hz)


def noise_power_dbm(temp_k: float, bandwidth_hz: float, boltzmann: float = BOLTZMANN_J_K) -> float:
    return noise_power_dbw(temp_k, bandwidth_hz, boltzmann) + 30.0


def array_gain_db(n_elements: int) -> float:
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    return 10.0 * math.log10(n_elements)


def _result(components: dict, mode: str) -> LinkBudgetResult:
    # snr is defined as the ledger sum so the two can never drift apart
    return LinkBudgetResult(snr_db=sum(components.values()), mode=mode, components=components)


def snr_paper_mode(
    inp: LinkBudgetInput,
    array_gain_db: float = 0.0,
    noise_db: Optional[float] = None,
) -> LinkBudgetResult:
    """Literal worked-example SNR.

    ``EIRP + G/T - Lp - Ls - noise - margin + array_gain`` where ``noise``
    defaults to ``noise_power_dbm(T, B)``. Pass ``noise_db`` to use a quoted
    (e.g. rounded) noise figure instead.
    """
    noise = noise_power_dbm(inp.noise_temp_k, inp.bandwidth_hz, inp.boltzmann) if noise_db is None else noise_db
    components = {
        "eirp": inp.eirp_dbw,
        "g_over_t": inp.rx_gain_over_temp_db_per_k,
        "path_loss": -inp.path_loss_db,
        "excess_loss": -inp.excess_loss_db,
        "noise": -noise,
        "margin": -inp.impl_margin_db,
        "array_gain": array_gain_db,
    }
    return _result(components, PAPER)


def snr_physical_mode(inp: LinkBudgetInput) -> LinkBudgetResult:
    """Carrier-to-noise ratio with the noise floor kTB in dBW."""
    if inp.rx_gain_dbi is None:
        raise ValueError("physical mode requires rx_gain_dbi")
    components = {
        "eirp": inp.eirp_dbw,
        "path_loss": -inp.path_loss_db,
        "excess_loss": -inp.excess_loss_db,
        "rx_gain": inp.rx_gain_dbi,
        "noise": -noise_power_dbw(inp.noise_temp_k, inp.bandwidth_hz, inp.boltzmann),
        "margin": -inp.impl_margin_db,
    }
    return _result(components, PHYSICAL)


def link_margin_db(result, required_snr_db: float) -> float:
    snr = result.snr_db if isinstance(result, LinkBudgetResult) else float(result)
    return snr - required_snr_db
