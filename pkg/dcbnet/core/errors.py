"""Exceções compartilhadas entre o carregamento de cenários e os serviços."""


class ConfigurationError(ValueError):
    """Cenário, parâmetro ou tabela inválida; a CLI devolve código 1."""


class SolverError(RuntimeError):
    """Falha numérica que indica cadeia mal construída; a CLI devolve código 2."""
