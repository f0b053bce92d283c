"""Configuração centralizada de caminhos e variáveis de ambiente do dcbnet."""

import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


PROJECT_ROOT = Path(__file__).resolve().parents[2]
SCENARIO_DIR = PROJECT_ROOT / "scenarios"
DEFAULT_OUTPUT_DIR = PROJECT_ROOT / "output"

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


def env_str(name: str, default: str | None = None) -> str | None:
	"""Obtém uma variável de ambiente como string, retornando o padrão quando ausente."""
	return os.getenv(name, default)


def env_int(name: str, default: int) -> int:
	"""Lê um inteiro do ambiente; valores inválidos caem para o padrão."""
	raw = env_str(name)
	if raw is None:
		return default
	try:
		return int(raw)
	except ValueError:
		return default


@lru_cache(maxsize=1)
def output_dir() -> Path:
	"""Resolve a pasta de saída dos CSV e DOT, permitindo sobrescrita via variável."""
	custom = env_str("DCBNET_OUTPUT_DIR")
	if custom:
		return Path(custom).expanduser().resolve()
	return DEFAULT_OUTPUT_DIR.resolve()


@lru_cache(maxsize=1)
def dense_solver_limit() -> int:
	"""Maior dimensão resolvida por fatoração densa; acima disso usa o caminho iterativo."""
	return max(env_int("DCBNET_DENSE_LIMIT", 2000), 1)


@lru_cache(maxsize=1)
def default_workers() -> int:
	"""Número de processos usados para distribuir replicações de simulação."""
	return max(env_int("DCBNET_WORKERS", 1), 1)


@lru_cache(maxsize=1)
def log_level() -> str:
	"""Nível de log padrão da CLI."""
	value = (env_str("DCBNET_LOG_LEVEL") or "INFO").strip().upper()
	return value or "INFO"


def reset_config_caches() -> None:
	"""Limpa caches para forçar a reavaliação das variáveis em tempo de execução."""
	output_dir.cache_clear()
	dense_solver_limit.cache_clear()
	default_workers.cache_clear()
	log_level.cache_clear()
