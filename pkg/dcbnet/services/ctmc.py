"""Construção da cadeia de Markov de tempo contínuo (descoberta sistemática de estados)."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from dcbnet.api.models import (
    ChannelizationScheme,
    NetworkState,
    Transition,
    WlanConfig,
)
from dcbnet.core.errors import ConfigurationError
from dcbnet.services.channels import (
    allowed_channels,
    candidate_tx_channels,
    resolve_scheme,
    widths_in_use,
)

logger = logging.getLogger("dcbnet.ctmc")


@dataclass(frozen=True)
class Ctmc:
    """Estados em ordem de descoberta (estado 0 vazio) e transições dirigidas com taxas."""

    states: tuple[NetworkState, ...]
    transitions: tuple[Transition, ...]
    wlans: tuple[WlanConfig, ...]
    mu: Mapping[int, float]
    scheme: ChannelizationScheme
    n_channels: int

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def wlan_ids(self) -> list[str]:
        return [wlan.id for wlan in self.wlans]

    def labels(self) -> list[str]:
        ids = self.wlan_ids
        return [state.label(ids) for state in self.states]

    def find(self, label: str) -> int:
        """Localiza um estado pelo rótulo X_n^j (ex.: 'A_2^1B_2^3')."""
        for position, candidate in enumerate(self.labels()):
            if candidate == label:
                return position
        raise KeyError(label)

    def scaled(self, lambda_factor: float) -> Ctmc:
        """Mesma estrutura com todas as taxas de acesso multiplicadas por lambda_factor."""
        if not lambda_factor > 0:
            raise ValueError("Fator de escala de λ deve ser positivo.")
        wlans = tuple(
            replace(wlan, access_rate=wlan.access_rate * lambda_factor) for wlan in self.wlans
        )
        transitions = tuple(
            replace(item, rate=item.rate * lambda_factor) if item.forward else item
            for item in self.transitions
        )
        return Ctmc(
            states=self.states,
            transitions=transitions,
            wlans=wlans,
            mu=dict(self.mu),
            scheme=self.scheme,
            n_channels=self.n_channels,
        )


def _check_state(state: NetworkState, wlans: Sequence[WlanConfig], scheme, n_channels: int) -> None:
    active = []
    for wlan, channel in zip(wlans, state.channels):
        if channel is None:
            continue
        if not channel.contains(wlan.primary):
            raise AssertionError(f"Estado inválido: {wlan.id} transmite sem o primário.")
        if channel not in allowed_channels(scheme, n_channels, wlan.assigned):
            raise AssertionError(f"Estado inválido: canal {channel} não permitido para {wlan.id}.")
        for other in active:
            if channel.overlaps(other):
                raise AssertionError("Estado inválido: transmissões sobrepostas.")
        active.append(channel)


def build_ctmc(
    wlans: Sequence[WlanConfig],
    scheme: ChannelizationScheme | str,
    n_channels: int,
    mu: Mapping[int, float],
) -> Ctmc:
    """Descobre em largura todos os estados viáveis a partir do estado vazio.

    Para cada estado da fronteira, as WLANs são visitadas na ordem de declaração:
    uma WLAN ativa gera a transição de saída com taxa μ_n; uma WLAN inativa gera
    uma transição por canal candidato com taxa U·λ/t, sendo t o número de empates.
    """
    resolved = resolve_scheme(scheme)
    wlans = tuple(wlans)
    seen_ids: set[str] = set()
    for wlan in wlans:
        if wlan.id in seen_ids:
            raise ConfigurationError(f"WLAN '{wlan.id}' declarada mais de uma vez.")
        seen_ids.add(wlan.id)
        allowed_channels(resolved, n_channels, wlan.assigned)

    rates = {int(width): float(value) for width, value in mu.items()}
    for width in sorted(widths_in_use(resolved, n_channels, wlans)):
        value = rates.get(width)
        if value is None:
            raise ConfigurationError(f"Taxa μ_{width} não informada para a largura {width}.")
        if not value > 0:
            raise ConfigurationError(f"Taxa μ_{width} deve ser positiva.")

    empty = NetworkState.empty(len(wlans))
    states: list[NetworkState] = [empty]
    index: dict[NetworkState, int] = {empty: 0}
    transitions: list[Transition] = []
    frontier: deque[int] = deque([0])

    def _discover(state: NetworkState) -> int:
        position = index.get(state)
        if position is None:
            _check_state(state, wlans, resolved, n_channels)
            position = len(states)
            states.append(state)
            index[state] = position
            frontier.append(position)
        return position

    while frontier:
        source = frontier.popleft()
        state = states[source]
        busy = state.active_channels()
        for position, wlan in enumerate(wlans):
            channel = state.channels[position]
            if channel is not None:
                target = _discover(state.without(position))
                transitions.append(
                    Transition(source, target, rates[channel.width], False, position, channel.width)
                )
                continue
            candidates = candidate_tx_channels(wlan, busy, resolved, n_channels)
            if not candidates:
                continue
            share = wlan.aggregate_rate / len(candidates)
            for candidate in candidates:
                target = _discover(state.with_channel(position, candidate))
                transitions.append(
                    Transition(source, target, share, True, position, candidate.width)
                )

    logger.info(
        "Cadeia construída: %d estados, %d transições (%s, N=%d)",
        len(states),
        len(transitions),
        resolved.value,
        n_channels,
    )
    return Ctmc(
        states=tuple(states),
        transitions=tuple(transitions),
        wlans=wlans,
        mu=rates,
        scheme=resolved,
        n_channels=n_channels,
    )


def is_locally_maximal(ctmc: Ctmc, state_index: int) -> bool:
    """Verdadeiro quando nenhuma WLAN consegue iniciar transmissão a partir do estado."""
    if not 0 <= state_index < ctmc.size:
        raise IndexError(state_index)
    return not any(item.forward and item.source == state_index for item in ctmc.transitions)


def locally_maximal_states(ctmc: Ctmc) -> list[int]:
    with_forward = {item.source for item in ctmc.transitions if item.forward}
    return [position for position in range(ctmc.size) if position not in with_forward]


def maximal_states(ctmc: Ctmc) -> list[int]:
    """Estados com o maior número possível de WLANs ativas simultaneamente."""
    counts = [state.active_count() for state in ctmc.states]
    peak = max(counts)
    return [position for position, count in enumerate(counts) if count == peak]


def _format_rate(value: float) -> str:
    return f"{value:.6g}"


def export_dot(ctmc: Ctmc) -> str:
    """Descreve a cadeia em DOT; arestas forward sólidas, backward tracejadas."""
    labels = ctmc.labels()
    lines = [
        "digraph ctmc {",
        "  rankdir=LR;",
        '  node [shape=ellipse, fontname="Helvetica"];',
    ]
    for position, label in enumerate(labels):
        lines.append(f'  s{position} [label="{label}\\n#{position}"];')
    for item in ctmc.transitions:
        ids = ctmc.wlan_ids
        direction = "forward" if item.forward else "backward"
        style = "solid" if item.forward else "dashed"
        lines.append(
            f'  s{item.source} -> s{item.target} '
            f'[label="{_format_rate(item.rate)}", style={style}, '
            f'comment="{direction} {ids[item.wlan]} n={item.width}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
