"""Análise e simulação de redes de WLANs com Dynamic Channel Bonding."""

__version__ = "0.1.0"
