"""Environment classes, excess-loss draws and service-mode classification."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .capacity import McsLadder

# Street-level NLOS blockage assumed for dense cities; indoor classes add
# the midpoint of each material's penetration-loss range on top of it.
URBAN_BASE_LOSS_DB = 30.0
URBAN_SHADOWING_SIGMA_DB = 8.0
DEFAULT_RELAY_GAIN_DB = 15.0

PENETRATION_RANGES_DB = {
    "indoor_glass": (5.0, 10.0),
    "indoor_concrete": (20.0, 30.0),
    "indoor_lowE": (25.0, 40.0),
}


class ServiceMode(str, Enum):
    OUTAGE = "outage"
    RELAY_ASSISTED = "relay_assisted"
    DIRECT = "direct"

    @property
    def rank(self) -> int:
        return _RANK[self]


_RANK = {ServiceMode.OUTAGE: 0, ServiceMode.RELAY_ASSISTED: 1, ServiceMode.DIRECT: 2}


@dataclass(frozen=True)
class EnvironmentClass:
    tag: str
    mean_excess_loss_db: float
    shadowing_sigma_db: float

    def __post_init__(self):
        if self.mean_excess_loss_db < 0:
            raise ValueError(f"{self.tag}: mean excess loss must be >= 0")
        if self.shadowing_sigma_db < 0:
            raise ValueError(f"{self.tag}: shadowing sigma must be >= 0")


@dataclass(frozen=True)
class ChannelDraw:
    excess_loss_db: float
    seed_used: int


def default_environment_table() -> list[EnvironmentClass]:
    def indoor(tag):
        lo, hi = PENETRATION_RANGES_DB[tag]
        return EnvironmentClass(tag, URBAN_BASE_LOSS_DB + (lo + hi) / 2, URBAN_SHADOWING_SIGMA_DB)

    return [
        EnvironmentClass("rooftop_los", 0.0, 2.0),
        EnvironmentClass("street_nlos", URBAN_BASE_LOSS_DB, URBAN_SHADOWING_SIGMA_DB),
        indoor("indoor_glass"),
        indoor("indoor_concrete"),
        indoor("indoor_lowE"),
        EnvironmentClass("rural_open", 0.0, 4.0),
    ]


def environment_by_tag(table=None) -> dict[str, EnvironmentClass]:
    return {env.tag: env for env in (table or default_environment_table())}


def draw_excess_loss(env: EnvironmentClass, seed: int) -> ChannelDraw:
    """Log-normal shadowing (Gaussian in dB) around the class mean, clamped at 0."""
    z = np.random.default_rng(seed).standard_normal()
    loss = max(0.0, env.mean_excess_loss_db + env.shadowing_sigma_db * float(z))
    return ChannelDraw(loss, seed)


def sample_excess_losses(means, sigmas, rng: np.random.Generator) -> np.ndarray:
    """Vectorised counterpart of :func:`draw_excess_loss` for a population."""
    means = np.asarray(means, dtype=float)
    z = rng.standard_normal(means.shape)
    return np.maximum(0.0, means + np.asarray(sigmas, dtype=float) * z)


def service_mode(
    snr_db: float,
    ladder: McsLadder,
    relay_gain_db: float = DEFAULT_RELAY_GAIN_DB,
    direct_threshold_db: Optional[float] = None,
) -> ServiceMode:
    """Classify a link as direct, relay-assisted or in outage.

    The direct-service threshold defaults to the ladder floor; comparisons
    are inclusive.
    """
    threshold = ladder.floor_db if direct_threshold_db is None else direct_threshold_db
    if snr_db >= threshold:
        return ServiceMode.DIRECT
    if snr_db + relay_gain_db >= threshold:
        return ServiceMode.RELAY_ASSISTED
    return ServiceMode.OUTAGE
