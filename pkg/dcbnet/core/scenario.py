"""Leitura e validação dos arquivos de cenário (JSON) usados pela linha de comando."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

import jsonschema
from jsonschema.exceptions import best_match

from dcbnet.api.models import Channel, ChannelizationScheme, WlanConfig
from dcbnet.core.config import SCENARIO_DIR
from dcbnet.core.errors import ConfigurationError
from dcbnet.services.channels import resolve_scheme, widths_in_use
from dcbnet.services.phy80211 import (
    DEFAULT_MCS,
    DURATION_PRESETS,
    McsEntry,
    PhyParams,
    cw_to_lambda,
    mu_from_durations,
    mu_table,
)

logger = logging.getLogger("dcbnet.scenario")

SCHEMA_PATH = SCENARIO_DIR / "scenario.schema.json"


@dataclass(frozen=True)
class Scenario:
    """Cenário validado: N, esquema, WLANs, tabela μ_n e p_e."""

    n_channels: int
    scheme: ChannelizationScheme
    wlans: tuple[WlanConfig, ...]
    mu: dict[int, float]
    p_e: float = 0.0
    phy: PhyParams = field(default_factory=PhyParams)
    cw: dict[str, int] = field(default_factory=dict)
    digest: str = ""
    name: str = "scenario"
    mcs: tuple[McsEntry, ...] = DEFAULT_MCS
    durations: dict[int, float] | None = None

    def with_scheme(self, scheme: ChannelizationScheme | str) -> Scenario:
        """Troca o esquema recalculando μ_n para as larguras que ele passa a exigir."""
        resolved = resolve_scheme(scheme)
        mu = _mu_for(resolved, self.n_channels, self.wlans, self.phy, self.mcs, self.durations)
        return replace(self, scheme=resolved, mu=mu)

    def with_error_probability(self, p_e: float) -> Scenario:
        if not 0.0 <= p_e <= 1.0:
            raise ConfigurationError("p_e deve estar em [0, 1].")
        return replace(self, p_e=p_e)


def _mu_for(
    scheme: ChannelizationScheme,
    n_channels: int,
    wlans,
    params: PhyParams,
    mcs: tuple[McsEntry, ...],
    durations: dict[int, float] | None,
) -> dict[int, float]:
    widths = widths_in_use(scheme, n_channels, wlans)
    if durations is not None:
        return mu_from_durations(durations, widths)
    return mu_table(params, mcs, widths)


def _line_of(text: str, wlan_id: str) -> int | None:
    pattern = re.compile(r'"id"\s*:\s*"' + re.escape(wlan_id) + '"')
    match = pattern.search(text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def _where(text: str, wlan_id: str) -> str:
    line = _line_of(text, wlan_id) if text else None
    return f" (linha {line})" if line else ""


@lru_cache(maxsize=1)
def scenario_schema() -> dict[str, Any]:
    """JSON Schema dos arquivos de cenário (``scenarios/scenario.schema.json``)."""
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def _location(path) -> str:
    location = ""
    for item in path:
        if isinstance(item, int):
            location += f"[{item}]"
        else:
            location += f".{item}" if location else str(item)
    return location or "raiz"


def _wlan_id_at(data: Any, path) -> str | None:
    path = list(path)
    if len(path) < 2 or path[0] != "wlans" or not isinstance(data, Mapping):
        return None
    item = data["wlans"][path[1]]
    if isinstance(item, Mapping) and isinstance(item.get("id"), str) and item["id"].strip():
        return item["id"].strip()
    return None


def _validate_document(data: Any, text: str) -> None:
    validator = jsonschema.Draft202012Validator(scenario_schema())
    error = best_match(validator.iter_errors(data))
    if error is None:
        return
    if error.validator == "oneOf" or (error.parent is not None and error.parent.validator == "oneOf"):
        message = "informe exatamente um entre 'lambda' e 'cw'"
    else:
        message = error.message
    wlan_id = _wlan_id_at(data, error.absolute_path)
    if wlan_id is not None:
        raise ConfigurationError(f"WLAN '{wlan_id}'{_where(text, wlan_id)}: {message}.")
    raise ConfigurationError(f"Cenário inválido em '{_location(error.absolute_path)}': {message}.")


def _parse_fraction(value: Any, label: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(value).limit_denominator(1000)
    except (ValueError, TypeError, ZeroDivisionError) as error:
        raise ConfigurationError(f"{label} inválida: {value!r}.") from error


def _parse_phy(raw: Mapping[str, Any] | None) -> tuple[PhyParams, tuple[McsEntry, ...], dict[int, float] | None]:
    if raw is None:
        return PhyParams(), DEFAULT_MCS, None
    params = PhyParams().with_overrides(dict(raw.get("params", {})))

    mcs = DEFAULT_MCS
    if "mcs" in raw:
        mcs = tuple(
            McsEntry(
                width=int(item["width"]),
                data_subcarriers=int(item["data_subcarriers"]),
                modulation_bits=int(item["modulation_bits"]),
                coding_rate=_parse_fraction(item["coding_rate"], f"phy.mcs[{position}].coding_rate"),
            )
            for position, item in enumerate(raw["mcs"])
        )

    durations: dict[int, float] | None = None
    if "preset" in raw:
        durations = dict(DURATION_PRESETS[raw["preset"]])
    if "tx_durations_ms" in raw:
        durations = {int(width): float(value) * 1e-3 for width, value in raw["tx_durations_ms"].items()}
    return params, mcs, durations


def _parse_wlan(item: Mapping[str, Any], n_channels: int, params: PhyParams, text: str) -> tuple[WlanConfig, int | None]:
    wlan_id = item["id"].strip()
    where = _where(text, wlan_id)
    try:
        channel = Channel(int(item["lo"]), int(item["len"]))
        if channel.hi > n_channels:
            raise ConfigurationError(f"canal atribuído {channel} fora de {{1..{n_channels}}}")
        cw = int(item["cw"]) if "cw" in item else None
        rate = cw_to_lambda(cw, params.t_slot) if cw is not None else float(item["lambda"])
        wlan = WlanConfig(
            id=wlan_id,
            assigned=channel,
            primary=int(item["primary"]),
            nodes=int(item.get("nodes", 1)),
            access_rate=rate,
            packet_bits=float(item.get("packet_bits", params.payload_bits)),
        )
    except ConfigurationError as error:
        message = str(error)
        if message.startswith(f"WLAN '{wlan_id}'"):
            raise ConfigurationError(f"{message}{where}") from error
        raise ConfigurationError(f"WLAN '{wlan_id}'{where}: {message}") from error
    return wlan, cw


def parse_scenario(data: Mapping[str, Any], *, text: str = "", name: str = "scenario") -> Scenario:
    """Valida o conteúdo contra o JSON Schema e monta o cenário com a tabela μ_n.

    O schema cobre forma e domínio de cada campo; aqui restam as regras que
    cruzam campos: canal dentro de N, primário dentro do canal e ids únicos.
    """
    _validate_document(data, text)
    n_channels = int(data["N"])
    scheme = resolve_scheme(data["scheme"])
    p_e = float(data.get("p_e", 0.0))
    params, mcs, durations = _parse_phy(data.get("phy"))

    wlans: list[WlanConfig] = []
    cw: dict[str, int] = {}
    for item in data["wlans"]:
        wlan, window = _parse_wlan(item, n_channels, params, text)
        if any(existing.id == wlan.id for existing in wlans):
            raise ConfigurationError(f"WLAN '{wlan.id}' declarada mais de uma vez.")
        wlans.append(wlan)
        if window is not None:
            cw[wlan.id] = window

    mu = _mu_for(scheme, n_channels, wlans, params, mcs, durations)

    digest = hashlib.sha256(
        (text or json.dumps(data, sort_keys=True, ensure_ascii=False)).encode("utf-8")
    ).hexdigest()
    return Scenario(
        n_channels=n_channels,
        scheme=scheme,
        wlans=tuple(wlans),
        mu=mu,
        p_e=p_e,
        phy=params,
        cw=cw,
        digest=digest,
        name=name,
        mcs=mcs,
        durations=durations,
    )


def resolve_scenario_path(raw: str | Path) -> Path:
    """Aceita caminho direto ou nome de arquivo dentro da pasta de cenários."""
    path = Path(raw).expanduser()
    if path.exists():
        return path
    for candidate in (SCENARIO_DIR / path.name, SCENARIO_DIR / f"{path.name}.json"):
        if candidate.exists():
            return candidate
    raise ConfigurationError(f"Arquivo de cenário não encontrado: {raw}.")


def load_scenario(raw_path: str | Path) -> Scenario:
    path = resolve_scenario_path(raw_path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigurationError(
            f"{path.name}: JSON inválido na linha {error.lineno}, coluna {error.colno}: {error.msg}."
        ) from error
    scenario = parse_scenario(data, text=text, name=path.stem)
    logger.info(
        "Cenário %s carregado: %d WLANs, N=%d, %s",
        path.name,
        len(scenario.wlans),
        scenario.n_channels,
        scenario.scheme.value,
    )
    return scenario
