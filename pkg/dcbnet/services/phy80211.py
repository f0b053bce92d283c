"""Temporização PHY/MAC IEEE 802.11ac: duração de transmissão, tabela MCS e CW ↔ λ."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping

from dcbnet.core.errors import ConfigurationError


@dataclass(frozen=True)
class PhyParams:
    """Parâmetros de quadro e temporização (bits e segundos)."""

    packet_bits: int = 12_000
    aggregated: int = 64
    service_field: int = 16
    mpdu_delimiter: int = 32
    mac_header: int = 288
    tail: int = 6
    block_ack: int = 256
    t_phy: float = 40e-6
    t_symbol: float = 4e-6
    t_sifs: float = 16e-6
    t_difs: float = 34e-6
    t_slot: float = 9e-6

    def __post_init__(self) -> None:
        for name in ("packet_bits", "aggregated", "service_field", "mpdu_delimiter", "mac_header", "tail", "block_ack"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"Parâmetro PHY '{name}' deve ser positivo.")
        for name in ("t_phy", "t_symbol", "t_sifs", "t_difs", "t_slot"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"Parâmetro PHY '{name}' deve ser positivo.")

    @property
    def payload_bits(self) -> int:
        """Bits úteis entregues por transmissão agregada (K_A · L_d)."""
        return self.aggregated * self.packet_bits

    def with_overrides(self, overrides: Mapping[str, object]) -> PhyParams:
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"Parâmetros PHY desconhecidos: {', '.join(sorted(unknown))}.")
        return replace(self, **overrides)


@dataclass(frozen=True)
class McsEntry:
    width: int
    data_subcarriers: int
    modulation_bits: int
    coding_rate: Fraction

    def __post_init__(self) -> None:
        if self.width < 1 or self.data_subcarriers < 1 or self.modulation_bits < 1:
            raise ConfigurationError(f"Entrada MCS inválida para largura {self.width}.")
        if not 0 < self.coding_rate <= 1:
            raise ConfigurationError(f"Taxa de codificação inválida para largura {self.width}.")


# Modulação e codificação de referência por largura (p_e abaixo de 10%).
DEFAULT_MCS = (
    McsEntry(1, 52, 6, Fraction(5, 6)),
    McsEntry(2, 108, 6, Fraction(3, 4)),
    McsEntry(4, 234, 4, Fraction(3, 4)),
    McsEntry(8, 468, 4, Fraction(1, 2)),
)

# Durações publicadas (segundos) para reproduzir resultados sem passar pela fórmula.
REFERENCE_DURATIONS = {1: 12.26e-3, 2: 6.63e-3, 4: 4.64e-3, 8: 3.52e-3}
ROUNDED_DURATIONS = {1: 12.3e-3, 2: 6.6e-3, 4: 4.6e-3, 8: 3.5e-3}

DURATION_PRESETS = {
    "reference": REFERENCE_DURATIONS,
    "rounded": ROUNDED_DURATIONS,
}


def _exact_bits_per_symbol(entry: McsEntry) -> Fraction:
    return entry.modulation_bits * Fraction(entry.coding_rate) * entry.data_subcarriers


def bits_per_symbol(entry: McsEntry) -> int | float:
    """L_DBPS(n) = K_m · R · ξ(n)."""
    value = _exact_bits_per_symbol(entry)
    return int(value) if value.denominator == 1 else float(value)


def _symbols(bits: int, per_symbol: Fraction) -> int:
    return math.ceil(Fraction(bits) / per_symbol)


def _mcs_by_width(mcs_list: Iterable[McsEntry]) -> dict[int, McsEntry]:
    return {entry.width: entry for entry in mcs_list}


def tx_duration(
    n: int,
    params: PhyParams | None = None,
    mcs: McsEntry | None = None,
    mcs_list: Iterable[McsEntry] = DEFAULT_MCS,
) -> float:
    """Duração em segundos de uma transmissão agregada em n canais básicos (1/μ_n).

    O Block ACK volta sempre em um canal básico, por isso a entrada de largura 1
    também é necessária.
    """
    params = params or PhyParams()
    table = _mcs_by_width(mcs_list)
    entry = mcs or table.get(n)
    if entry is None:
        raise ConfigurationError(f"Sem entrada MCS para a largura {n}.")
    if entry.width != n:
        raise ConfigurationError(f"Entrada MCS de largura {entry.width} usada para largura {n}.")
    basic = table.get(1) if n != 1 else entry
    if basic is None:
        raise ConfigurationError("Sem entrada MCS para a largura 1 (Block ACK).")

    data_bits = (
        params.service_field
        + params.aggregated * (params.mpdu_delimiter + params.mac_header + params.packet_bits)
        + params.tail
    )
    ack_bits = params.service_field + params.block_ack + params.tail
    data_symbols = _symbols(data_bits, _exact_bits_per_symbol(entry))
    ack_symbols = _symbols(ack_bits, _exact_bits_per_symbol(basic))
    return (
        2 * params.t_phy
        + data_symbols * params.t_symbol
        + params.t_sifs
        + ack_symbols * params.t_symbol
        + params.t_difs
        + params.t_slot
    )


def cw_to_lambda(cw: float, t_slot: float = PhyParams.t_slot) -> float:
    """λ = 2 / ((CW − 1) · T_slot): backoff contínuo com a mesma média do slotted."""
    if cw < 2:
        raise ConfigurationError(f"Janela de contenção CW={cw} deve ser ao menos 2.")
    if not t_slot > 0:
        raise ConfigurationError("Duração do slot deve ser positiva.")
    return 2.0 / ((cw - 1) * t_slot)


def lambda_to_cw(rate: float, t_slot: float = PhyParams.t_slot) -> int:
    """CW inteiro mais próximo cuja taxa equivalente é ``rate`` (mínimo 2)."""
    if not rate > 0:
        raise ConfigurationError("Taxa de acesso deve ser positiva.")
    return max(2, round(1 + 2.0 / (rate * t_slot)))


def mu_table(
    params: PhyParams | None = None,
    mcs_list: Iterable[McsEntry] = DEFAULT_MCS,
    widths: Iterable[int] | None = None,
) -> dict[int, float]:
    """μ_n = 1 / tx_duration(n) para cada largura pedida (ou todas as da tabela MCS)."""
    entries = _mcs_by_width(mcs_list)
    requested = sorted(set(widths)) if widths is not None else sorted(entries)
    missing = [width for width in requested if width not in entries]
    if missing:
        raise ConfigurationError(
            f"Sem entrada MCS para as larguras: {', '.join(map(str, missing))}."
        )
    return {
        width: 1.0 / tx_duration(width, params, entries[width], entries.values())
        for width in requested
    }


def mu_from_durations(durations: Mapping[int, float], widths: Iterable[int] | None = None) -> dict[int, float]:
    """Converte uma tabela explícita de durações (segundos) em taxas μ_n."""
    table = {int(width): float(value) for width, value in durations.items()}
    for width, value in table.items():
        if not value > 0:
            raise ConfigurationError(f"Duração para largura {width} deve ser positiva.")
    if widths is not None:
        missing = sorted(set(widths) - set(table))
        if missing:
            raise ConfigurationError(
                f"Duração não informada para as larguras: {', '.join(map(str, missing))}."
            )
    return {width: 1.0 / value for width, value in sorted(table.items())}
