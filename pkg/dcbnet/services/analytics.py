"""Estados dominantes, probabilidades de troca, agrupamento e tempos de permanência/retorno."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from dcbnet.services.ctmc import Ctmc, is_locally_maximal, locally_maximal_states, maximal_states
from dcbnet.services.solver import rate_matrix, steady_state

logger = logging.getLogger("dcbnet.analytics")

DEFAULT_THRESHOLD = 0.05
DEFAULT_LAMBDA_FACTOR = 10.0
DEFAULT_CUTOFF = 0.5
EXIT_RULES = ("group_switch", "leave_group")

_PATH_CHUNK = 65_536


@dataclass
class DominanceReport:
    dominant: list[int]
    threshold_used: float
    locally_maximal_flags: dict[int, bool]
    total_mass: float
    labels: dict[int, str] = field(default_factory=dict)
    pi: np.ndarray | None = None
    scaled_pi: np.ndarray | None = None
    locally_maximal: list[int] = field(default_factory=list)
    maximal: list[int] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "state_index": self.dominant,
                "state": [self.labels.get(index, str(index)) for index in self.dominant],
                "probability": [float(self.pi[index]) if self.pi is not None else np.nan for index in self.dominant],
                "scaled_probability": [
                    float(self.scaled_pi[index]) if self.scaled_pi is not None else np.nan
                    for index in self.dominant
                ],
                "locally_maximal": [self.locally_maximal_flags[index] for index in self.dominant],
                "maximal": [index in self.maximal for index in self.dominant],
            }
        )


@dataclass
class SwitchingMatrix:
    states: list[int]
    probs: np.ndarray
    labels: list[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        names = self.labels or [str(index) for index in self.states]
        return pd.DataFrame(self.probs, index=pd.Index(names, name="from"), columns=names)


@dataclass
class SojournReturnStats:
    groups: list[list[int]]
    median_sojourn: list[float | None]
    median_return: list[float | None]
    samples: list[int]
    return_samples: list[int]
    exit_rule: str = "group_switch"
    labels: list[str] = field(default_factory=list)

    @property
    def insufficient(self) -> list[bool]:
        return [
            sojourn == 0 or returns == 0
            for sojourn, returns in zip(self.samples, self.return_samples)
        ]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "group": self.labels or ["+".join(map(str, group)) for group in self.groups],
                "median_sojourn_s": self.median_sojourn,
                "median_return_s": self.median_return,
                "sojourn_samples": self.samples,
                "return_samples": self.return_samples,
                "insufficient": self.insufficient,
            }
        )


def dominant_states(
    ctmc: Ctmc,
    threshold: float = DEFAULT_THRESHOLD,
    lambda_factor: float = DEFAULT_LAMBDA_FACTOR,
) -> DominanceReport:
    """Estados com π acima do limiar tanto nas taxas dadas quanto com λ multiplicado.

    Um estado dominante que não seja localmente máximo é registrado como achado.
    """
    if not 0 < threshold < 1:
        raise ValueError("Limiar de dominância deve estar em (0, 1).")
    pi = steady_state(rate_matrix(ctmc))
    scaled_pi = steady_state(rate_matrix(ctmc.scaled(lambda_factor)))
    dominant = [
        index
        for index in range(ctmc.size)
        if pi[index] > threshold and scaled_pi[index] > threshold
    ]
    labels = ctmc.labels()
    flags = {index: is_locally_maximal(ctmc, index) for index in dominant}
    for index, flag in flags.items():
        if not flag:
            logger.warning("Estado dominante %s não é localmente máximo", labels[index])
    return DominanceReport(
        dominant=dominant,
        threshold_used=threshold,
        locally_maximal_flags=flags,
        total_mass=float(pi[dominant].sum()) if dominant else 0.0,
        labels={index: labels[index] for index in dominant},
        pi=pi,
        scaled_pi=scaled_pi,
        locally_maximal=locally_maximal_states(ctmc),
        maximal=maximal_states(ctmc),
    )


def jump_chain(ctmc: Ctmc) -> sparse.csr_matrix:
    """Matriz de transição da cadeia de saltos embutida (P_ij = q_ij / q_i)."""
    Q = rate_matrix(ctmc)
    exit_rates = -Q.diagonal()
    off_diagonal = Q - sparse.diags(Q.diagonal())
    scale = np.divide(1.0, exit_rates, out=np.zeros_like(exit_rates), where=exit_rates > 0)
    P = sparse.diags(scale) @ off_diagonal
    P.eliminate_zeros()
    return P.tocsr()


def switching_probabilities(ctmc: Ctmc, dominant: Sequence[int]) -> SwitchingMatrix:
    """Probabilidade de o primeiro dominante visitado após sair de i ser j (primeira passagem)."""
    states = list(dominant)
    if not states:
        raise ValueError("Conjunto de estados dominantes vazio.")
    labels = ctmc.labels()
    size = len(states)
    probs = np.zeros((size, size))
    if size == 1:
        return SwitchingMatrix(states, probs, [labels[states[0]]])

    P = jump_chain(ctmc)
    for row, source in enumerate(states):
        targets = [state for state in states if state != source]
        target_set = set(targets)
        free = [index for index in range(ctmc.size) if index not in target_set]
        position = {index: offset for offset, index in enumerate(free)}
        P_free = P[free][:, free]
        P_targets = P[free][:, targets].toarray()
        system = (sparse.identity(len(free), format="csc") - P_free).tocsc()
        hitting = splu(system).solve(P_targets)
        first_hit = hitting[position[source]]
        columns = [column for column, state in enumerate(states) if state != source]
        probs[row, columns] = np.clip(first_hit, 0.0, 1.0)
        probs[row] /= probs[row].sum()
    return SwitchingMatrix(states, probs, [labels[index] for index in states])


def group_dominants(switching: SwitchingMatrix, cutoff: float = DEFAULT_CUTOFF) -> list[list[int]]:
    """Componentes conexas do grafo com aresta (i, j) quando probs(i,j) e probs(j,i) ≥ cutoff."""
    if not 0 < cutoff < 1:
        raise ValueError("Corte de agrupamento deve estar em (0, 1).")
    size = len(switching.states)
    if size == 0:
        return []
    probs = np.asarray(switching.probs)
    mutual = (probs >= cutoff) & (probs.T >= cutoff)
    np.fill_diagonal(mutual, False)
    count, membership = connected_components(sparse.csr_matrix(mutual), directed=False)
    groups: list[list[int]] = [[] for _ in range(count)]
    for offset, component in enumerate(membership):
        groups[component].append(switching.states[offset])
    return sorted(groups, key=lambda group: switching.states.index(group[0]))


def _sample_path(ctmc: Ctmc, horizon: float, rng: np.random.Generator) -> Iterator[tuple[int, float, float]]:
    """Trajetória exata a partir do estado vazio: (estado, início, fim) truncada no horizonte."""
    Q = rate_matrix(ctmc)
    exit_rates = -Q.diagonal()
    off_diagonal = (Q - sparse.diags(Q.diagonal())).tocsr()
    targets = []
    cumulative = []
    for index in range(ctmc.size):
        start, end = off_diagonal.indptr[index], off_diagonal.indptr[index + 1]
        targets.append(off_diagonal.indices[start:end])
        weights = off_diagonal.data[start:end]
        cumulative.append(np.cumsum(weights) / weights.sum() if weights.size else weights)

    state = 0
    now = 0.0
    while now < horizon:
        holds = rng.standard_exponential(_PATH_CHUNK)
        picks = rng.random(_PATH_CHUNK)
        for hold, pick in zip(holds, picks):
            rate = exit_rates[state]
            if rate <= 0:
                yield state, now, horizon
                return
            end = now + hold / rate
            if end >= horizon:
                yield state, now, horizon
                return
            yield state, now, end
            choice = int(np.searchsorted(cumulative[state], pick, side="right"))
            state = int(targets[state][min(choice, targets[state].size - 1)])
            now = end


def _median(values: list[float]) -> float | None:
    return float(np.median(values)) if values else None


def sojourn_return_times(
    ctmc: Ctmc,
    groups: Sequence[Sequence[int]],
    horizon: float,
    seed: int | None = 0,
    exit_rule: str = "group_switch",
) -> SojournReturnStats:
    """Medianas de permanência e retorno por grupo ao longo de uma trajetória simulada.

    ``group_switch``: a permanência vai da entrada em um dominante do grupo até a
    entrada em um dominante de outro grupo; o retorno, dessa saída até a reentrada.
    ``leave_group``: a permanência é o tempo contínuo dentro dos estados do grupo.
    """
    if not horizon > 0:
        raise ValueError("Horizonte deve ser positivo.")
    if exit_rule not in EXIT_RULES:
        raise ValueError(f"Regra de saída inválida '{exit_rule}'. Utilize: {', '.join(EXIT_RULES)}.")
    group_of = {state: position for position, group in enumerate(groups) for state in group}
    sojourns: list[list[float]] = [[] for _ in groups]
    returns: list[list[float]] = [[] for _ in groups]
    exited_at: list[float | None] = [None] * len(groups)
    current: int | None = None
    entered_at = 0.0

    rng = np.random.default_rng(seed)
    for state, start, _end in _sample_path(ctmc, horizon, rng):
        group = group_of.get(state)
        if exit_rule == "leave_group":
            if group == current:
                continue
            if current is not None:
                sojourns[current].append(start - entered_at)
                exited_at[current] = start
            current = group
            if group is not None:
                if exited_at[group] is not None:
                    returns[group].append(start - exited_at[group])
                entered_at = start
            continue

        if group is None or group == current:
            continue
        if current is not None:
            sojourns[current].append(start - entered_at)
            exited_at[current] = start
        if exited_at[group] is not None:
            returns[group].append(start - exited_at[group])
        current = group
        entered_at = start

    labels = ctmc.labels()
    stats = SojournReturnStats(
        groups=[list(group) for group in groups],
        median_sojourn=[_median(values) for values in sojourns],
        median_return=[_median(values) for values in returns],
        samples=[len(values) for values in sojourns],
        return_samples=[len(values) for values in returns],
        exit_rule=exit_rule,
        labels=["+".join(labels[state] for state in group) for group in groups],
    )
    for label, lacking in zip(stats.labels, stats.insufficient):
        if lacking:
            logger.warning("Amostras insuficientes para o grupo %s no horizonte %.3g s", label, horizon)
    return stats


def occupancy_trace(
    ctmc: Ctmc,
    horizon: float,
    window: float,
    seed: int | None = 0,
    top_k: int | None = None,
) -> pd.DataFrame:
    """Fração do tempo em cada estado por janela (colunas window, start_s, state, fraction)."""
    if not horizon > 0 or not window > 0:
        raise ValueError("Horizonte e janela devem ser positivos.")
    count = int(np.ceil(horizon / window))
    occupancy = np.zeros((count, ctmc.size))
    rng = np.random.default_rng(seed)
    for state, start, end in _sample_path(ctmc, horizon, rng):
        first = int(start // window)
        last = min(int(end // window), count - 1)
        for slot in range(first, last + 1):
            low = max(start, slot * window)
            high = min(end, (slot + 1) * window)
            if high > low:
                occupancy[slot, state] += high - low
    lengths = np.minimum(window, horizon - np.arange(count) * window)
    fractions = occupancy / lengths[:, None]

    labels = ctmc.labels()
    rows = []
    for slot in range(count):
        order = np.argsort(-fractions[slot], kind="stable")
        chosen = [index for index in order if fractions[slot, index] > 0]
        if top_k is not None:
            chosen = chosen[:top_k]
        for index in chosen:
            rows.append(
                {
                    "window": slot,
                    "start_s": slot * window,
                    "state": labels[index],
                    "fraction": float(fractions[slot, index]),
                }
            )
    return pd.DataFrame(rows, columns=["window", "start_s", "state", "fraction"])
