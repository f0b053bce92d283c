"""Vazão por WLAN, vazão agregada, índice de justiça de Jain e largura esperada."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import pandas as pd

from dcbnet.services.ctmc import Ctmc


@dataclass
class MetricsReport:
    per_wlan_throughput: dict[str, float]
    expected_width: dict[str, float]
    jfi: float | None
    occupancy: dict[str, float] = field(default_factory=dict)

    @property
    def aggregate(self) -> float:
        return float(sum(self.per_wlan_throughput.values()))

    def to_frame(self) -> pd.DataFrame:
        """Linhas wlan_id, throughput_bps, expected_width."""
        return pd.DataFrame(
            {
                "wlan_id": list(self.per_wlan_throughput),
                "throughput_bps": list(self.per_wlan_throughput.values()),
                "expected_width": [self.expected_width[key] for key in self.per_wlan_throughput],
            }
        )

    def occupancy_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"state": list(self.occupancy), "probability": list(self.occupancy.values())}
        )


def _check_error_probability(p_e: float) -> None:
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("Probabilidade de erro p_e deve estar em [0, 1].")


def throughput(ctmc: Ctmc, pi: np.ndarray, p_e: float = 0.0) -> dict[str, float]:
    """Γ_X = L_X (Σ_s μ_{n(X,s)} π_s)(1 − p_e), com μ_0 = 0 nos estados em que X está ocioso."""
    _check_error_probability(p_e)
    pi = np.asarray(pi, dtype=float)
    if pi.size != ctmc.size:
        raise ValueError("Distribuição com dimensão diferente da cadeia.")
    result: dict[str, float] = {}
    for position, wlan in enumerate(ctmc.wlans):
        service = 0.0
        for state, probability in zip(ctmc.states, pi):
            channel = state.channels[position]
            if channel is not None:
                service += ctmc.mu[channel.width] * probability
        result[wlan.id] = float(wlan.packet_bits * service * (1.0 - p_e))
    return result


def jfi(throughputs: Iterable[float], normalized: bool = True) -> float:
    """Índice de Jain (ΣΓ)²/(M·ΣΓ²); com normalized=False omite o fator M."""
    values = np.asarray(list(throughputs), dtype=float)
    if values.size == 0 or not np.any(values > 0):
        raise ValueError("Índice de Jain indefinido: nenhuma vazão positiva.")
    if np.any(values < 0):
        raise ValueError("Vazões não podem ser negativas.")
    index = values.sum() ** 2 / np.square(values).sum()
    return float(index / values.size) if normalized else float(index)


def expected_tx_width(ctmc: Ctmc, pi: np.ndarray) -> dict[str, float]:
    """Largura média por transmissão, ponderada pela frequência de início (fluxo forward)."""
    pi = np.asarray(pi, dtype=float)
    weighted = np.zeros(len(ctmc.wlans))
    flow = np.zeros(len(ctmc.wlans))
    for item in ctmc.transitions:
        if not item.forward:
            continue
        starts = pi[item.source] * item.rate
        flow[item.wlan] += starts
        weighted[item.wlan] += starts * item.width
    return {
        wlan.id: float(weighted[position] / flow[position]) if flow[position] > 0 else 0.0
        for position, wlan in enumerate(ctmc.wlans)
    }


def safe_jfi(values: Iterable[float], normalized: bool = True) -> float | None:
    try:
        return jfi(values, normalized=normalized)
    except ValueError:
        return None


def compute_metrics(ctmc: Ctmc, pi: np.ndarray, p_e: float = 0.0, normalized_jfi: bool = True) -> MetricsReport:
    rates = throughput(ctmc, pi, p_e)
    return MetricsReport(
        per_wlan_throughput=rates,
        expected_width=expected_tx_width(ctmc, pi),
        jfi=safe_jfi(rates.values(), normalized=normalized_jfi),
        occupancy=dict(zip(ctmc.labels(), map(float, pi))),
    )

