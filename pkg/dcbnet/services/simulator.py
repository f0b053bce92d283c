"""Simulador de eventos discretos do MAC com DCB (backoff contínuo ou slotted com colisões)."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
import simpy
from scipy import stats

from dcbnet.api.models import Channel, ChannelizationScheme, WlanConfig, state_label
from dcbnet.core.config import default_workers
from dcbnet.core.errors import ConfigurationError
from dcbnet.services.channels import busy_from_basics, candidate_tx_channels, resolve_scheme
from dcbnet.services.ctmc import build_ctmc
from dcbnet.services.metrics import safe_jfi, throughput
from dcbnet.services.phy80211 import PhyParams, cw_to_lambda, lambda_to_cw, mu_table
from dcbnet.services.solver import rate_matrix, steady_state

logger = logging.getLogger("dcbnet.simulator")

DENSE_CHANNELS = 24
DENSE_WIDTH = 8
DEFAULT_WARMUP_FRACTION = 0.05
CONFIDENCE_LEVEL = 0.95
# Executada depois de todos os eventos NORMAL do mesmo instante.
_BATCH_PRIORITY = 2


class DistKind(str, Enum):
    EXPONENTIAL = "E"
    UNIFORM = "U"
    DETERMINISTIC = "D"


DIST_ALIASES = {
    "e": DistKind.EXPONENTIAL,
    "exp": DistKind.EXPONENTIAL,
    "exponential": DistKind.EXPONENTIAL,
    "u": DistKind.UNIFORM,
    "uni": DistKind.UNIFORM,
    "uniform": DistKind.UNIFORM,
    "d": DistKind.DETERMINISTIC,
    "det": DistKind.DETERMINISTIC,
    "deterministic": DistKind.DETERMINISTIC,
}

DEFAULT_PAIRS = tuple(f"{b.value}/{t.value}" for b in DistKind for t in DistKind)


def parse_dist(raw: str | DistKind) -> DistKind:
    if isinstance(raw, DistKind):
        return raw
    kind = DIST_ALIASES.get((raw or "").strip().lower())
    if kind is None:
        raise ConfigurationError(
            f"Distribuição inválida '{raw}'. Utilize E (exponencial), U (uniforme) ou D (determinística)."
        )
    return kind


def parse_pair(raw: str) -> tuple[DistKind, DistKind]:
    """Converte 'U/D' em (backoff, duração de transmissão)."""
    parts = (raw or "").split("/")
    if len(parts) != 2:
        raise ConfigurationError(f"Par de distribuições inválido '{raw}'. Use o formato backoff/tx, ex.: U/D.")
    return parse_dist(parts[0]), parse_dist(parts[1])


@dataclass(frozen=True)
class DistSpec:
    """Distribuição com média fixa; a uniforme ocupa [0, 2·média]."""

    kind: DistKind
    mean: float

    def __post_init__(self) -> None:
        if not self.mean > 0:
            raise ConfigurationError("Média da distribuição deve ser positiva.")

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind is DistKind.EXPONENTIAL:
            return float(rng.exponential(self.mean))
        if self.kind is DistKind.UNIFORM:
            return float(rng.uniform(0.0, 2.0 * self.mean))
        return self.mean


class SimMode(str, Enum):
    CONTINUOUS = "continuous"
    SLOTTED = "slotted"


@dataclass(frozen=True)
class SimConfig:
    mode: SimMode = SimMode.CONTINUOUS
    backoff: DistKind = DistKind.EXPONENTIAL
    tx_time: DistKind | None = None
    cw: int | Mapping[str, int] | None = None
    t_slot: float = PhyParams.t_slot
    p_e: float = 0.0
    horizon: float = 10.0
    warmup: float | None = None
    seed: int = 0
    replications: int = 1
    workers: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", SimMode(self.mode))
        object.__setattr__(self, "backoff", parse_dist(self.backoff))
        if self.tx_time is not None:
            object.__setattr__(self, "tx_time", parse_dist(self.tx_time))
        if not self.horizon > 0:
            raise ValueError("Horizonte de simulação deve ser positivo.")
        if not 0 <= self.effective_warmup < self.horizon:
            raise ValueError("Aquecimento deve estar em [0, horizonte).")
        if not 0.0 <= self.p_e <= 1.0:
            raise ValueError("p_e deve estar em [0, 1].")
        if self.replications < 1:
            raise ValueError("Número de replicações deve ser positivo.")
        if not self.t_slot > 0:
            raise ValueError("Duração do slot deve ser positiva.")

    @property
    def effective_warmup(self) -> float:
        if self.warmup is None:
            return DEFAULT_WARMUP_FRACTION * self.horizon
        return self.warmup

    @property
    def tx_kind(self) -> DistKind:
        if self.tx_time is not None:
            return self.tx_time
        return DistKind.DETERMINISTIC if self.mode is SimMode.SLOTTED else DistKind.EXPONENTIAL

    def cw_for(self, wlan: WlanConfig) -> int:
        if isinstance(self.cw, Mapping):
            window = self.cw.get(wlan.id)
        else:
            window = self.cw
        if window is None:
            return lambda_to_cw(wlan.access_rate, self.t_slot)
        if window < 2:
            raise ConfigurationError(f"WLAN '{wlan.id}': CW={window} deve ser ao menos 2.")
        return int(window)


@dataclass
class ReplicationResult:
    index: int
    throughput: dict[str, float]
    expected_width: dict[str, float]
    successes: dict[str, int]
    failures: dict[str, int]
    starts: dict[str, int]
    width_sum: dict[str, int]
    occupancy: dict[str, float] = field(default_factory=dict)
    collisions: int = 0
    ties: int = 0
    overlaps: int = 0

    @property
    def aggregate(self) -> float:
        return float(sum(self.throughput.values()))

    @property
    def mean_width(self) -> float:
        starts = sum(self.starts.values())
        return sum(self.width_sum.values()) / starts if starts else 0.0


@dataclass
class SimReport:
    wlan_ids: list[str]
    throughput: dict[str, float]
    ci: dict[str, float]
    expected_width: dict[str, float]
    occupancy: dict[str, float]
    collisions: int
    successes: dict[str, int]
    failures: dict[str, int]
    replications: list[ReplicationResult]

    @property
    def aggregate(self) -> float:
        return float(sum(self.throughput.values()))

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "wlan_id": self.wlan_ids,
                "throughput_bps": [self.throughput[key] for key in self.wlan_ids],
                "ci_half_width": [self.ci[key] for key in self.wlan_ids],
                "expected_width": [self.expected_width[key] for key in self.wlan_ids],
                "successes": [self.successes[key] for key in self.wlan_ids],
                "failures": [self.failures[key] for key in self.wlan_ids],
            }
        )

    def to_frame(self) -> pd.DataFrame:
        """Uma linha por replicação e WLAN."""
        rows = [
            {
                "replication": result.index,
                "wlan_id": key,
                "throughput_bps": result.throughput[key],
                "expected_width": result.expected_width[key],
                "successes": result.successes[key],
                "failures": result.failures[key],
                "collisions": result.collisions,
            }
            for result in self.replications
            for key in self.wlan_ids
        ]
        return pd.DataFrame(rows)


def confidence_interval(values: Sequence[float], level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    """Média e meia-largura do intervalo t de Student; meia-largura NaN com menos de 2 amostras."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        return float("nan"), float("nan")
    mean = float(data.mean())
    if data.size < 2:
        return mean, float("nan")
    quantile = stats.t.ppf((1.0 + level) / 2.0, data.size - 1)
    return mean, float(quantile * data.std(ddof=1) / math.sqrt(data.size))


class _BatchResolution(simpy.events.Event):
    """Evento já disparado, processado após os eventos NORMAL do mesmo instante."""

    def __init__(self, env: simpy.Environment, callback: Callable[[simpy.events.Event], None]) -> None:
        super().__init__(env)
        self.callbacks.append(callback)
        self._ok = True
        self._value = None
        env.schedule(self, priority=_BATCH_PRIORITY)


@dataclass
class _Transmission:
    wlan: int
    channel: Channel
    duration: float
    finished: simpy.Event
    collided: bool = False


class _Medium:
    """Ocupação por canal básico, espera por canal livre e congelamento do backoff."""

    def __init__(self, run: _Replication) -> None:
        self.run = run
        self.env = run.env
        self.load = [0] * (run.n_channels + 2)
        self.idle: dict[int, simpy.Event] = {}
        self.counting: dict[int, dict[_Node, None]] = {}
        self.pending: list[tuple[_Node, simpy.Event]] = []
        self.resolver: _BatchResolution | None = None

    def busy(self, basic: int) -> bool:
        return self.load[basic] > 0

    def busy_basics(self) -> list[int]:
        return [basic for basic in range(1, self.run.n_channels + 1) if self.load[basic] > 0]

    def idle_event(self, basic: int) -> simpy.Event:
        event = self.idle.get(basic)
        if event is None:
            event = self.idle[basic] = self.env.event()
        return event

    def start_counting(self, node: _Node) -> None:
        node.counting = True
        self.counting.setdefault(node.primary, {})[node] = None

    def stop_counting(self, node: _Node) -> None:
        node.counting = False
        self.counting.get(node.primary, {}).pop(node, None)

    def occupy(self, channel: Channel) -> None:
        for basic in channel.basics():
            self.load[basic] += 1
            if self.load[basic] == 1:
                for node in list(self.counting.get(basic, {})):
                    self.stop_counting(node)
                    node.process.interrupt("busy")

    def release(self, channel: Channel) -> None:
        for basic in channel.basics():
            self.load[basic] -= 1
            if self.load[basic] == 0:
                event = self.idle.pop(basic, None)
                if event is not None:
                    event.succeed()

    def request_start(self, node: _Node) -> simpy.Event:
        event = self.env.event()
        self.pending.append((node, event))
        if self.resolver is None:
            self.resolver = _BatchResolution(self.env, self._resolve)
        return event

    def _resolve(self, _event: simpy.events.Event) -> None:
        batch, self.pending, self.resolver = self.pending, [], None
        self.run.resolve_batch(batch)


class _Node:
    def __init__(self, run: _Replication, wlan_position: int, wlan: WlanConfig) -> None:
        self.run = run
        self.wlan_position = wlan_position
        self.wlan = wlan
        self.primary = wlan.primary
        self.counting = False
        self.process = run.env.process(self.loop())

    def loop(self):
        env = self.run.env
        medium = self.run.medium
        remaining = self.run.draw_backoff(self)
        while True:
            while medium.busy(self.primary):
                yield medium.idle_event(self.primary)
            medium.start_counting(self)
            started = env.now
            try:
                yield env.timeout(remaining)
            except simpy.Interrupt:
                remaining -= env.now - started
                if remaining <= 0 and not self.run.slotted:
                    remaining = self.run.draw_backoff(self)
                remaining = max(remaining, 0)
                continue
            medium.stop_counting(self)
            transmission = yield medium.request_start(self)
            if transmission is not None:
                yield transmission.finished
            remaining = self.run.draw_backoff(self)


class _Replication:
    """Uma execução do laço de eventos com gerador próprio."""

    def __init__(
        self,
        index: int,
        wlans: Sequence[WlanConfig],
        scheme: ChannelizationScheme,
        n_channels: int,
        mu: Mapping[int, float],
        config: SimConfig,
        rng: np.random.Generator,
    ) -> None:
        self.index = index
        self.wlans = list(wlans)
        self.ids = [wlan.id for wlan in self.wlans]
        self.scheme = scheme
        self.n_channels = n_channels
        self.mu = dict(mu)
        self.config = config
        self.rng = rng
        self.slotted = config.mode is SimMode.SLOTTED
        self.unit = config.t_slot if self.slotted else 1.0
        self.horizon = self._to_units(config.horizon)
        self.warmup = self._to_units(config.effective_warmup)
        self.windows = {wlan.id: config.cw_for(wlan) for wlan in self.wlans} if self.slotted else {}
        self.backoff = {
            wlan.id: DistSpec(config.backoff, 1.0 / wlan.access_rate) for wlan in self.wlans
        }
        self.tx_kind = config.tx_kind

        self.env = simpy.Environment()
        self.medium = _Medium(self)
        self.current: list[Channel | None] = [None] * len(self.wlans)
        self.last_change = 0.0
        self.occupancy: dict[str, float] = {}
        self.starts = [0] * len(self.wlans)
        self.width_sum = [0] * len(self.wlans)
        self.successes = [0] * len(self.wlans)
        self.failures = [0] * len(self.wlans)
        self.collisions = 0
        self.ties = 0
        self.overlaps = 0
        for position, wlan in enumerate(self.wlans):
            for _ in range(wlan.nodes):
                _Node(self, position, wlan)

    def _to_units(self, seconds: float) -> float:
        if self.slotted:
            return float(math.ceil(round(seconds / self.unit, 9)))
        return seconds

    def draw_backoff(self, node: _Node) -> float:
        if self.slotted:
            return int(self.rng.integers(0, self.windows[node.wlan.id]))
        return self.backoff[node.wlan.id].sample(self.rng)

    def draw_duration(self, width: int) -> float:
        seconds = DistSpec(self.tx_kind, 1.0 / self.mu[width]).sample(self.rng)
        if self.slotted:
            return max(1, math.ceil(seconds / self.unit))
        return seconds

    def _in_window(self) -> bool:
        return self.warmup <= self.env.now <= self.horizon

    def _record_state(self) -> None:
        if self.slotted:
            return
        now = self.env.now
        low = max(self.last_change, self.warmup)
        high = min(now, self.horizon)
        if high > low:
            label = state_label(self.ids, self.current)
            self.occupancy[label] = self.occupancy.get(label, 0.0) + (high - low)
        self.last_change = now

    def resolve_batch(self, batch: list[tuple[_Node, simpy.Event]]) -> None:
        busy = busy_from_basics(self.medium.busy_basics())
        if not self.slotted and len(batch) > 1:
            # Empate em tempo contínuo: um membro aleatório segue, os demais sorteiam novo backoff.
            self.ties += 1
            order = self.rng.permutation(len(batch))
            for position in order[1:]:
                batch[position][1].succeed(None)
            batch = [batch[order[0]]]

        picks: list[tuple[simpy.Event, _Transmission]] = []
        for node, event in batch:
            candidates = candidate_tx_channels(node.wlan, busy, self.scheme, self.n_channels)
            if not candidates:
                event.succeed(None)
                continue
            if len(candidates) == 1:
                channel = candidates[0]
            else:
                channel = candidates[int(self.rng.integers(len(candidates)))]
            transmission = _Transmission(
                wlan=node.wlan_position,
                channel=channel,
                duration=self.draw_duration(channel.width),
                finished=self.env.event(),
            )
            picks.append((event, transmission))

        for group in _overlap_groups([item[1] for item in picks]):
            if len(group) < 2:
                continue
            self.collisions += 1
            longest = max(picks[position][1].duration for position in group)
            for position in group:
                picks[position][1].collided = True
                picks[position][1].duration = longest

        for event, transmission in picks:
            self._start(transmission)
            event.succeed(transmission)

    def _start(self, transmission: _Transmission) -> None:
        self._record_state()
        self.medium.occupy(transmission.channel)
        if not self.slotted and any(load > 1 for load in self.medium.load):
            self.overlaps += 1
        if self.current[transmission.wlan] is None:
            self.current[transmission.wlan] = transmission.channel
        if self._in_window():
            self.starts[transmission.wlan] += 1
            self.width_sum[transmission.wlan] += transmission.channel.width
        self.env.process(self._carry(transmission))

    def _carry(self, transmission: _Transmission):
        yield self.env.timeout(transmission.duration)
        self._record_state()
        self.medium.release(transmission.channel)
        if self.current[transmission.wlan] == transmission.channel:
            self.current[transmission.wlan] = None
        p_e = self.config.p_e
        success = not transmission.collided and (p_e == 0.0 or self.rng.random() >= p_e)
        if self._in_window():
            if success:
                self.successes[transmission.wlan] += 1
            else:
                self.failures[transmission.wlan] += 1
        transmission.finished.succeed(success)

    def execute(self) -> ReplicationResult:
        self.env.run(until=self.horizon)
        self._record_state()
        window = (self.horizon - self.warmup) * self.unit
        total = sum(self.occupancy.values())
        return ReplicationResult(
            index=self.index,
            throughput={
                wlan.id: self.successes[position] * wlan.packet_bits / window
                for position, wlan in enumerate(self.wlans)
            },
            expected_width={
                wlan.id: self.width_sum[position] / self.starts[position] if self.starts[position] else 0.0
                for position, wlan in enumerate(self.wlans)
            },
            successes=dict(zip(self.ids, self.successes)),
            failures=dict(zip(self.ids, self.failures)),
            starts=dict(zip(self.ids, self.starts)),
            width_sum=dict(zip(self.ids, self.width_sum)),
            occupancy={label: value / total for label, value in self.occupancy.items()} if total else {},
            collisions=self.collisions,
            ties=self.ties,
            overlaps=self.overlaps,
        )


def _overlap_groups(transmissions: Sequence[_Transmission]) -> list[list[int]]:
    parent = list(range(len(transmissions)))

    def find(item: int) -> int:
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    for first in range(len(transmissions)):
        for second in range(first + 1, len(transmissions)):
            if transmissions[first].channel.overlaps(transmissions[second].channel):
                parent[find(first)] = find(second)
    groups: dict[int, list[int]] = {}
    for item in range(len(transmissions)):
        groups.setdefault(find(item), []).append(item)
    return list(groups.values())


def _run_replication(job: tuple[Any, ...]) -> ReplicationResult:
    index, wlans, scheme, n_channels, mu, config, seed_sequence = job
    rng = np.random.default_rng(seed_sequence)
    return _Replication(index, wlans, scheme, n_channels, mu, config, rng).execute()


def _run_jobs(function: Callable[[Any], Any], jobs: list[Any], workers: int) -> list[Any]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(function, jobs))
    return [function(job) for job in jobs]


def _summarize(wlan_ids: list[str], results: list[ReplicationResult]) -> SimReport:
    results = sorted(results, key=lambda item: item.index)
    throughput_mean: dict[str, float] = {}
    ci: dict[str, float] = {}
    widths: dict[str, float] = {}
    for key in wlan_ids:
        throughput_mean[key], ci[key] = confidence_interval([item.throughput[key] for item in results])
        observed = [item.expected_width[key] for item in results if item.starts[key] > 0]
        widths[key] = float(np.mean(observed)) if observed else 0.0
    labels = sorted({label for item in results for label in item.occupancy})
    occupancy = {
        label: float(np.mean([item.occupancy.get(label, 0.0) for item in results])) for label in labels
    }
    return SimReport(
        wlan_ids=list(wlan_ids),
        throughput=throughput_mean,
        ci=ci,
        expected_width=widths,
        occupancy=occupancy,
        collisions=sum(item.collisions for item in results),
        successes={key: sum(item.successes[key] for item in results) for key in wlan_ids},
        failures={key: sum(item.failures[key] for item in results) for key in wlan_ids},
        replications=results,
    )


def simulate(
    wlans: Sequence[WlanConfig],
    scheme: ChannelizationScheme | str,
    n_channels: int,
    mu: Mapping[int, float],
    config: SimConfig,
) -> SimReport:
    """Executa ``config.replications`` replicações independentes e agrega os resultados.

    As sementes de cada replicação derivam de ``SeedSequence(config.seed)``, de modo
    que a mesma configuração produz relatórios idênticos com qualquer número de processos.
    """
    resolved = resolve_scheme(scheme)
    wlans = list(wlans)
    if not wlans:
        raise ConfigurationError("Cenário sem WLANs.")
    seeds = np.random.SeedSequence(config.seed).spawn(config.replications)
    jobs = [
        (index, wlans, resolved, n_channels, dict(mu), config, seeds[index])
        for index in range(config.replications)
    ]
    workers = config.workers or default_workers()
    logger.info(
        "Simulando %d replicações (%s, %s/%s, horizonte %.3g s, %d processos)",
        config.replications,
        config.mode.value,
        config.backoff.value,
        config.tx_kind.value,
        config.horizon,
        workers,
    )
    results = _run_jobs(_run_replication, jobs, workers)
    return _summarize([wlan.id for wlan in wlans], results)


def sensitivity_suite(
    wlans: Sequence[WlanConfig],
    scheme: ChannelizationScheme | str,
    n_channels: int,
    mu: Mapping[int, float],
    base_config: SimConfig,
    pairs: Iterable[str] = DEFAULT_PAIRS,
) -> pd.DataFrame:
    """Vazão por par backoff/transmissão e diferença em relação ao par E/E (mesmas sementes)."""
    base = replace(base_config, mode=SimMode.CONTINUOUS, backoff=DistKind.EXPONENTIAL, tx_time=DistKind.EXPONENTIAL)
    reference = simulate(wlans, scheme, n_channels, mu, base)
    rows = []
    for pair in pairs:
        backoff, tx_time = parse_pair(pair)
        if backoff is DistKind.EXPONENTIAL and tx_time is DistKind.EXPONENTIAL:
            report = reference
        else:
            report = simulate(wlans, scheme, n_channels, mu, replace(base, backoff=backoff, tx_time=tx_time))
        for key in report.wlan_ids:
            rows.append(
                {
                    "pair": f"{backoff.value}/{tx_time.value}",
                    "wlan_id": key,
                    "throughput_bps": report.throughput[key],
                    "ci_half_width": report.ci[key],
                    "delta_bps": report.throughput[key] - reference.throughput[key],
                    "expected_width": report.expected_width[key],
                }
            )
    return pd.DataFrame(rows)


def random_dense_scenario(
    m: int,
    rng: np.random.Generator,
    n_channels: int = DENSE_CHANNELS,
    width: int = DENSE_WIDTH,
    access_rate: float | None = None,
    nodes: int = 1,
    packet_bits: float | None = None,
) -> list[WlanConfig]:
    """M WLANs com canal de largura fixa em posição uniforme e primário uniforme dentro dele."""
    if m < 1:
        raise ValueError("Número de WLANs deve ser ao menos 1.")
    if width > n_channels:
        raise ConfigurationError("Largura do canal atribuído maior que o número de canais básicos.")
    rate = access_rate if access_rate is not None else cw_to_lambda(16)
    bits = packet_bits if packet_bits is not None else float(PhyParams().payload_bits)
    wlans = []
    for position in range(m):
        lo = int(rng.integers(1, n_channels - width + 2))
        primary = lo + int(rng.integers(width))
        wlans.append(
            WlanConfig(
                id=f"W{position + 1}",
                assigned=Channel(lo, width),
                primary=primary,
                nodes=nodes,
                access_rate=rate,
                packet_bits=bits,
            )
        )
    return wlans


def _dense_job(job: tuple[Any, ...]) -> dict[str, Any]:
    m, replication, mu, config, seed_sequence, n_channels = job
    scenario_seed, simulation_seed = seed_sequence.spawn(2)
    wlans = random_dense_scenario(m, np.random.default_rng(scenario_seed), n_channels=n_channels)
    outcome: dict[str, Any] = {"M": m, "replication": replication}
    for label, scheme in (("dcb", ChannelizationScheme.P2DCB), ("scb", ChannelizationScheme.SCB)):
        result = _run_replication((replication, wlans, scheme, n_channels, mu, config, simulation_seed))
        outcome[label] = {
            "aggregate_bps": result.aggregate,
            "jfi": safe_jfi(result.throughput.values()),
            "expected_width": result.mean_width,
        }
    return outcome


def dcb_vs_scb_sweep(
    m_values: Iterable[int],
    replications: int,
    config: SimConfig,
    mu: Mapping[int, float] | None = None,
    seed: int = 0,
    n_channels: int = DENSE_CHANNELS,
) -> pd.DataFrame:
    """Cenários densos aleatórios simulados com DCB e SCB sob as mesmas atribuições e sementes.

    Retorna linhas longas: M, scheme, metric, mean, ci_low, ci_high, replications.
    """
    if replications < 2:
        raise ValueError("São necessárias ao menos 2 replicações para o intervalo de confiança.")
    m_values = list(m_values)
    rates = dict(mu) if mu is not None else mu_table(widths=[1, 2, 4, 8])
    children = np.random.SeedSequence(seed).spawn(len(m_values))
    jobs = [
        (m, replication, rates, config, child, n_channels)
        for m, parent in zip(m_values, children)
        for replication, child in enumerate(parent.spawn(replications))
    ]
    workers = config.workers or default_workers()
    outcomes = _run_jobs(_dense_job, jobs, workers)

    rows = []
    for m in m_values:
        subset = [item for item in outcomes if item["M"] == m]
        for scheme in ("dcb", "scb"):
            for metric in ("aggregate_bps", "jfi", "expected_width"):
                values = [item[scheme][metric] for item in subset if item[scheme][metric] is not None]
                mean, half = confidence_interval(values)
                rows.append(
                    {
                        "M": m,
                        "scheme": scheme,
                        "metric": metric,
                        "mean": mean,
                        "ci_low": mean - half,
                        "ci_high": mean + half,
                        "replications": len(values),
                    }
                )
        logger.info("Densidade M=%d concluída (%d replicações)", m, len(subset))
    return pd.DataFrame(rows)


def cw_sweep(
    wlans: Sequence[WlanConfig],
    scheme: ChannelizationScheme | str,
    n_channels: int,
    mu: Mapping[int, float],
    cw_values: Iterable[int],
    config: SimConfig,
) -> pd.DataFrame:
    """Vazão analítica (λ derivado de CW) contra a simulada no modo slotted, por CW e WLAN."""
    rows = []
    for cw in cw_values:
        rate = cw_to_lambda(cw, config.t_slot)
        adjusted = [replace(wlan, access_rate=rate) for wlan in wlans]
        ctmc = build_ctmc(adjusted, scheme, n_channels, mu)
        analytic = throughput(ctmc, steady_state(rate_matrix(ctmc)), config.p_e)
        report = simulate(adjusted, scheme, n_channels, mu, replace(config, mode=SimMode.SLOTTED, cw=cw))
        for wlan in adjusted:
            rows.append(
                {
                    "cw": cw,
                    "wlan_id": wlan.id,
                    "analytic_bps": analytic[wlan.id],
                    "simulated_bps": report.throughput[wlan.id],
                    "ci": report.ci[wlan.id],
                }
            )
    return pd.DataFrame(rows)
