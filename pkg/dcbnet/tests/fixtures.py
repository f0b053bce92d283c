"""Cenários reutilizados pelos testes."""

from __future__ import annotations

import numpy as np

from dcbnet.api.models import Channel, ChannelizationScheme, WlanConfig
from dcbnet.services.phy80211 import REFERENCE_DURATIONS, cw_to_lambda, mu_from_durations

CW16_RATE = cw_to_lambda(16)
REFERENCE_MU = mu_from_durations(REFERENCE_DURATIONS)
# Canalização do cenário de quatro WLANs distribuído em scenarios/four_wlans.json.
FOUR_WLAN_SCHEME = ChannelizationScheme.IEEE80211AC_DCB
FOUR_WLAN_DOMINANT = ["A_4^5B_2^3D_2^1", "B_2^3C_4^5D_2^1"]


def toy_wlans(rate: float = CW16_RATE, nodes_a: int = 1, nodes_b: int = 1) -> list[WlanConfig]:
    return [
        WlanConfig("A", Channel(1, 4), primary=2, nodes=nodes_a, access_rate=rate),
        WlanConfig("B", Channel(3, 2), primary=3, nodes=nodes_b, access_rate=rate),
    ]


def four_wlans(rate: float = CW16_RATE) -> list[WlanConfig]:
    return [
        WlanConfig("A", Channel(1, 8), primary=5, access_rate=rate),
        WlanConfig("B", Channel(1, 4), primary=3, access_rate=rate),
        WlanConfig("C", Channel(5, 4), primary=7, access_rate=rate),
        WlanConfig("D", Channel(1, 2), primary=1, access_rate=rate),
    ]


def single_wlan(rate: float = 1000.0, width: int = 4) -> list[WlanConfig]:
    return [WlanConfig("A", Channel(1, width), primary=1, access_rate=rate)]


# μ_n para todas as larguras até 8, usado nos cenários aleatórios.
FLAT_MU = {width: 50.0 + 30.0 * width for width in range(1, 9)}


def random_scenario(rng: np.random.Generator) -> tuple[list[WlanConfig], ChannelizationScheme, int]:
    """Até 5 WLANs em até 8 canais básicos, taxas moderadas e esquema sorteado."""
    n_channels = int(rng.integers(1, 9))
    count = int(rng.integers(1, 6))
    scheme = list(ChannelizationScheme)[int(rng.integers(len(ChannelizationScheme)))]
    wlans = []
    for position in range(count):
        width = int(rng.integers(1, min(4, n_channels) + 1))
        lo = int(rng.integers(1, n_channels - width + 2))
        wlans.append(
            WlanConfig(
                id=chr(ord("A") + position),
                assigned=Channel(lo, width),
                primary=lo + int(rng.integers(width)),
                nodes=int(rng.integers(1, 4)),
                access_rate=float(rng.uniform(20.0, 400.0)),
            )
        )
    return wlans, scheme, n_channels
