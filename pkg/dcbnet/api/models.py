"""Tipos do domínio: canais, esquemas de canalização, WLANs e estados da rede."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from dcbnet.core.errors import ConfigurationError

EMPTY_STATE_LABEL = "∅"


class ChannelizationScheme(str, Enum):
    """Define o conjunto de canais permitidos usado na escolha do canal de transmissão."""

    FULL_CONTIGUOUS = "full"
    P2DCB = "p2dcb"
    IEEE80211AC_DCB = "11acdcb"
    SCB = "scb"


@dataclass(frozen=True, order=True)
class Channel:
    """Grupo contíguo de canais básicos {lo, ..., lo + width - 1}, indexado a partir de 1."""

    lo: int
    width: int

    def __post_init__(self) -> None:
        if self.lo < 1:
            raise ConfigurationError(f"Canal inválido: índice inicial {self.lo} menor que 1.")
        if self.width < 1:
            raise ConfigurationError(f"Canal inválido: largura {self.width} menor que 1.")

    @property
    def hi(self) -> int:
        return self.lo + self.width - 1

    def basics(self) -> range:
        return range(self.lo, self.lo + self.width)

    def contains(self, basic: int) -> bool:
        return self.lo <= basic <= self.hi

    def overlaps(self, other: Channel) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def notation(self, wlan_id: str) -> str:
        """Rótulo X_n^j usado nos estados da cadeia."""
        return f"{wlan_id}_{self.width}^{self.lo}"

    def __str__(self) -> str:
        if self.width == 1:
            return f"{{{self.lo}}}"
        return f"{{{self.lo}..{self.hi}}}"


@dataclass(frozen=True)
class WlanConfig:
    """Configuração de uma WLAN: canal atribuído C_i, primário, U_i, λ_i e L_i."""

    id: str
    assigned: Channel
    primary: int
    nodes: int = 1
    access_rate: float = 1.0
    packet_bits: float = 768_000.0

    def __post_init__(self) -> None:
        if not str(self.id).strip():
            raise ConfigurationError("Identificador da WLAN é obrigatório.")
        if not self.assigned.contains(self.primary):
            raise ConfigurationError(
                f"WLAN '{self.id}': canal primário {self.primary} fora do canal atribuído {self.assigned}."
            )
        if self.nodes < 1:
            raise ConfigurationError(f"WLAN '{self.id}': número de nós deve ser positivo.")
        if not self.access_rate > 0:
            raise ConfigurationError(f"WLAN '{self.id}': taxa de acesso deve ser positiva.")
        if not self.packet_bits > 0:
            raise ConfigurationError(f"WLAN '{self.id}': tamanho do pacote deve ser positivo.")

    @property
    def aggregate_rate(self) -> float:
        """Taxa com que o conjunto de nós da WLAN conclui o backoff (U_i λ_i)."""
        return self.nodes * self.access_rate


@dataclass(frozen=True)
class NetworkState:
    """Tupla s = (c_1, ..., c_M); None indica WLAN sem transmissão ativa."""

    channels: tuple[Channel | None, ...]

    @classmethod
    def empty(cls, size: int) -> NetworkState:
        return cls((None,) * size)

    def with_channel(self, position: int, channel: Channel) -> NetworkState:
        updated = list(self.channels)
        updated[position] = channel
        return NetworkState(tuple(updated))

    def without(self, position: int) -> NetworkState:
        updated = list(self.channels)
        updated[position] = None
        return NetworkState(tuple(updated))

    def active_channels(self) -> list[Channel]:
        return [channel for channel in self.channels if channel is not None]

    def active_count(self) -> int:
        return sum(1 for channel in self.channels if channel is not None)

    def is_empty(self) -> bool:
        return self.active_count() == 0

    def label(self, wlan_ids: Sequence[str]) -> str:
        return state_label(wlan_ids, self.channels)


@dataclass(frozen=True)
class Transition:
    """Transição dirigida da cadeia; forward quando uma WLAN inicia a transmissão."""

    source: int
    target: int
    rate: float
    forward: bool
    wlan: int
    width: int


def state_label(wlan_ids: Sequence[str], channels: Iterable[Channel | None]) -> str:
    """Concatena X_n^j na ordem de declaração das WLANs; ∅ para o estado vazio."""
    parts = [
        channel.notation(wlan_id)
        for wlan_id, channel in zip(wlan_ids, channels)
        if channel is not None
    ]
    return "".join(parts) or EMPTY_STATE_LABEL
