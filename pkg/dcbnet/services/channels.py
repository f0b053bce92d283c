"""Álgebra de canais e esquemas de canalização (conjunto permitido e candidatos DCB)."""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable

from dcbnet.api.models import Channel, ChannelizationScheme, WlanConfig
from dcbnet.core.errors import ConfigurationError

# Apelidos aceitos nos arquivos de cenário e na linha de comando.
SCHEME_ALIASES = {
    "full": ChannelizationScheme.FULL_CONTIGUOUS,
    "fullcontiguous": ChannelizationScheme.FULL_CONTIGUOUS,
    "contiguous": ChannelizationScheme.FULL_CONTIGUOUS,
    "p2dcb": ChannelizationScheme.P2DCB,
    "poweroftwo": ChannelizationScheme.P2DCB,
    "11acdcb": ChannelizationScheme.IEEE80211AC_DCB,
    "ieee80211acdcb": ChannelizationScheme.IEEE80211AC_DCB,
    "80211acdcb": ChannelizationScheme.IEEE80211AC_DCB,
    "scb": ChannelizationScheme.SCB,
    "11acscb": ChannelizationScheme.SCB,
    "static": ChannelizationScheme.SCB,
}


def _normalize_scheme_name(name: str) -> str:
    return re.sub(r"[^0-9a-zA-Z]+", "", name).lower()


def resolve_scheme(raw: str | ChannelizationScheme) -> ChannelizationScheme:
    """Resolve o esquema a partir do nome ou de apelidos aceitos."""
    if isinstance(raw, ChannelizationScheme):
        return raw
    normalized = _normalize_scheme_name(raw or "")
    if not normalized:
        raise ConfigurationError("Esquema de canalização não informado.")
    scheme = SCHEME_ALIASES.get(normalized)
    if scheme is None:
        valid = sorted(item.value for item in ChannelizationScheme)
        raise ConfigurationError(
            f"Esquema de canalização inválido '{raw}'. Utilize um destes: {', '.join(valid)}."
        )
    return scheme


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def _check_range(n_channels: int, assigned: Channel) -> None:
    if n_channels < 1:
        raise ConfigurationError(f"Número de canais básicos inválido: {n_channels}.")
    if assigned.hi > n_channels:
        raise ConfigurationError(
            f"Canal atribuído {assigned} excede os {n_channels} canais básicos disponíveis."
        )


def is_allowed(scheme: ChannelizationScheme, channel: Channel) -> bool:
    """Indica se o canal pertence ao conjunto permitido do esquema (sem restrição ao atribuído)."""
    if scheme is ChannelizationScheme.FULL_CONTIGUOUS or scheme is ChannelizationScheme.SCB:
        return True
    if not _is_power_of_two(channel.width):
        return False
    if scheme is ChannelizationScheme.IEEE80211AC_DCB:
        return (channel.lo - 1) % channel.width == 0
    return True


@lru_cache(maxsize=1024)
def _allowed(scheme: ChannelizationScheme, n_channels: int, assigned: Channel) -> frozenset[Channel]:
    if scheme is ChannelizationScheme.SCB:
        return frozenset({assigned})
    channels = set()
    for width in range(1, assigned.width + 1):
        for lo in range(assigned.lo, assigned.hi - width + 2):
            channel = Channel(lo, width)
            if is_allowed(scheme, channel):
                channels.add(channel)
    return frozenset(channels)


def allowed_channels(
    scheme: ChannelizationScheme | str, n_channels: int, assigned: Channel
) -> frozenset[Channel]:
    """Conjunto permitido restrito aos subconjuntos do canal atribuído."""
    resolved = resolve_scheme(scheme)
    _check_range(n_channels, assigned)
    return _allowed(resolved, n_channels, assigned)


def candidate_tx_channels(
    wlan: WlanConfig,
    busy: Iterable[Channel],
    scheme: ChannelizationScheme | str,
    n_channels: int,
) -> tuple[Channel, ...]:
    """Canais de maior largura permitidos, livres e que contêm o primário, ordenados por lo.

    Uma tupla vazia significa que a WLAN não pode transmitir no estado atual.
    """
    occupied = [channel for channel in busy if channel is not None]
    eligible = [
        channel
        for channel in allowed_channels(scheme, n_channels, wlan.assigned)
        if channel.contains(wlan.primary)
        and not any(channel.overlaps(other) for other in occupied)
    ]
    if not eligible:
        return ()
    widest = max(channel.width for channel in eligible)
    return tuple(sorted(channel for channel in eligible if channel.width == widest))


def busy_from_basics(basics: Iterable[int]) -> list[Channel]:
    """Converte canais básicos ocupados em canais unitários para a consulta de candidatos."""
    return [Channel(basic, 1) for basic in sorted(set(basics))]


def widths_in_use(scheme: ChannelizationScheme | str, n_channels: int, wlans: Iterable[WlanConfig]) -> set[int]:
    """Larguras que podem aparecer em transmissões das WLANs informadas."""
    widths: set[int] = set()
    for wlan in wlans:
        widths.update(
            channel.width
            for channel in allowed_channels(scheme, n_channels, wlan.assigned)
            if channel.contains(wlan.primary)
        )
    return widths
