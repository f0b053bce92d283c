"""Linha de comando: build, solve, analyze, simulate e dense-sweep."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import pandas as pd

from dcbnet import __version__
from dcbnet.core.config import LOG_FORMAT, log_level, output_dir
from dcbnet.core.scenario import Scenario, load_scenario
from dcbnet.services.analytics import (
    DEFAULT_CUTOFF,
    DEFAULT_THRESHOLD,
    EXIT_RULES,
    dominant_states,
    group_dominants,
    occupancy_trace,
    sojourn_return_times,
    switching_probabilities,
)
from dcbnet.services.ctmc import build_ctmc, export_dot, locally_maximal_states, maximal_states
from dcbnet.services.metrics import compute_metrics
from dcbnet.services.solver import is_reversible, mixing_time, rate_matrix, residual, steady_state
from dcbnet.services.simulator import (
    DEFAULT_PAIRS,
    DENSE_CHANNELS,
    SimConfig,
    SimMode,
    cw_sweep,
    dcb_vs_scb_sweep,
    parse_pair,
    sensitivity_suite,
    simulate,
)

logger = logging.getLogger("dcbnet.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _int_list(raw: str) -> list[int]:
    try:
        values = [int(item) for item in raw.split(",") if item.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"lista de inteiros inválida: {raw}") from error
    if not values:
        raise argparse.ArgumentTypeError("lista vazia")
    return values


def write_csv(frame: pd.DataFrame, path: Path, *, seed: object, digest: str) -> Path:
    """Grava o CSV precedido de uma linha de proveniência (versão, semente, hash do cenário)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# dcbnet {__version__} seed={seed} scenario={digest[:12]}\n")
        frame.to_csv(handle, index=False)
    logger.info("Arquivo gravado em %s", path)
    return path


def _target_dir(args: argparse.Namespace) -> Path:
    return Path(args.output_dir).expanduser().resolve() if args.output_dir else output_dir()


def _prepare(args: argparse.Namespace) -> Scenario:
    scenario = load_scenario(args.scenario)
    if getattr(args, "scheme", None):
        scenario = scenario.with_scheme(args.scheme)
    if getattr(args, "p_e", None) is not None:
        scenario = scenario.with_error_probability(args.p_e)
    return scenario


def _chain(scenario: Scenario):
    return build_ctmc(scenario.wlans, scenario.scheme, scenario.n_channels, scenario.mu)


def cmd_build(args: argparse.Namespace) -> int:
    scenario = _prepare(args)
    ctmc = _chain(scenario)
    labels = ctmc.labels()
    print(f"{ctmc.size} states, {len(ctmc.transitions)} transitions")
    print("locally maximal: " + ", ".join(labels[index] for index in locally_maximal_states(ctmc)))
    print("maximal: " + ", ".join(labels[index] for index in maximal_states(ctmc)))
    if args.list:
        for position, label in enumerate(labels):
            print(f"  {position:>4}  {label}")
    target = Path(args.dot) if args.dot else _target_dir(args) / f"{scenario.name}.dot"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(export_dot(ctmc), encoding="utf-8")
    logger.info("Grafo DOT gravado em %s", target)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = _prepare(args)
    ctmc = _chain(scenario)
    Q = rate_matrix(ctmc)
    pi = steady_state(Q)
    report = compute_metrics(ctmc, pi, scenario.p_e, normalized_jfi=not args.raw_jfi)
    occupancy = report.occupancy_frame()
    metrics = report.to_frame()

    print(occupancy.to_string(index=False))
    print()
    print(metrics.to_string(index=False))
    print(f"aggregate_bps: {report.aggregate:.6g}")
    print(f"jfi: {report.jfi:.6f}" if report.jfi is not None else "jfi: undefined")
    print(f"residual: {residual(Q, pi):.3e}")
    print(f"reversible: {is_reversible(Q, pi)}")

    summary = metrics.copy()
    summary["aggregate_bps"] = report.aggregate
    summary["jfi"] = report.jfi
    directory = _target_dir(args)
    write_csv(summary, directory / f"{scenario.name}_metrics.csv", seed="-", digest=scenario.digest)
    write_csv(occupancy, directory / f"{scenario.name}_pi.csv", seed="-", digest=scenario.digest)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    scenario = _prepare(args)
    ctmc = _chain(scenario)
    dominance = dominant_states(ctmc, threshold=args.threshold)
    labels = ctmc.labels()
    print(f"dominant states ({len(dominance.dominant)}, mass {dominance.total_mass:.4f}):")
    print(dominance.to_frame().to_string(index=False))

    directory = _target_dir(args)
    stem = scenario.name
    write_csv(dominance.to_frame(), directory / f"{stem}_dominant.csv", seed=args.seed, digest=scenario.digest)
    if not dominance.dominant:
        logger.warning("Nenhum estado dominante acima do limiar %.3g", args.threshold)
        return EXIT_OK

    switching = switching_probabilities(ctmc, dominance.dominant)
    print()
    print(switching.to_frame().to_string())
    write_csv(
        switching.to_frame().reset_index(),
        directory / f"{stem}_switching.csv",
        seed=args.seed,
        digest=scenario.digest,
    )

    groups = group_dominants(switching, cutoff=args.cutoff)
    stats = sojourn_return_times(ctmc, groups, args.horizon, seed=args.seed, exit_rule=args.exit_rule)
    print()
    print(stats.to_frame().to_string(index=False))
    write_csv(stats.to_frame(), directory / f"{stem}_sojourn.csv", seed=args.seed, digest=scenario.digest)

    trace = occupancy_trace(ctmc, args.horizon, args.window, seed=args.seed, top_k=args.top_k)
    write_csv(trace, directory / f"{stem}_trace.csv", seed=args.seed, digest=scenario.digest)

    if args.epsilon is not None:
        Q = rate_matrix(ctmc)
        value = mixing_time(Q, args.epsilon, pi=dominance.pi)
        print(f"mixing_time(eps={args.epsilon}): {value:.6g} s")
    logger.debug("Estados analisados: %s", ", ".join(labels[index] for index in dominance.dominant))
    return EXIT_OK


def _sim_config(args: argparse.Namespace, scenario: Scenario) -> SimConfig:
    backoff, tx_time = parse_pair(args.dists) if args.dists else (None, None)
    mode = SimMode(args.mode)
    kwargs = {}
    if backoff is not None:
        kwargs["backoff"] = backoff
        kwargs["tx_time"] = tx_time
    return SimConfig(
        mode=mode,
        cw=scenario.cw or None,
        t_slot=scenario.phy.t_slot,
        p_e=scenario.p_e,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
        replications=args.replications,
        workers=args.workers,
        **kwargs,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _prepare(args)
    config = _sim_config(args, scenario)
    directory = _target_dir(args)
    stem = scenario.name
    wlans, scheme, n_channels, mu = scenario.wlans, scenario.scheme, scenario.n_channels, scenario.mu

    if args.cw_sweep:
        frame = cw_sweep(wlans, scheme, n_channels, mu, args.cw_sweep, config)
        print(frame.to_string(index=False))
        write_csv(frame, directory / f"{stem}_cw_sweep.csv", seed=args.seed, digest=scenario.digest)
        return EXIT_OK

    if args.sensitivity:
        pairs = args.pairs.split(",") if args.pairs else DEFAULT_PAIRS
        frame = sensitivity_suite(wlans, scheme, n_channels, mu, config, pairs)
        print(frame.to_string(index=False))
        write_csv(frame, directory / f"{stem}_sensitivity.csv", seed=args.seed, digest=scenario.digest)
        return EXIT_OK

    report = simulate(wlans, scheme, n_channels, mu, config)
    summary = report.summary_frame()
    print(summary.to_string(index=False))
    if config.mode is SimMode.SLOTTED:
        print(f"collisions: {report.collisions}")
    write_csv(summary, directory / f"{stem}_sim_summary.csv", seed=args.seed, digest=scenario.digest)
    write_csv(report.to_frame(), directory / f"{stem}_sim_replications.csv", seed=args.seed, digest=scenario.digest)
    if report.occupancy:
        occupancy = pd.DataFrame(
            {"state": list(report.occupancy), "fraction": list(report.occupancy.values())}
        )
        write_csv(occupancy, directory / f"{stem}_sim_occupancy.csv", seed=args.seed, digest=scenario.digest)
    return EXIT_OK


def cmd_dense_sweep(args: argparse.Namespace) -> int:
    densities = args.densities or list(range(1, args.max_wlans + 1))
    config = SimConfig(
        mode=SimMode(args.mode),
        p_e=args.p_e if args.p_e is not None else 0.0,
        horizon=args.horizon,
        seed=args.seed,
        workers=args.workers,
    )
    frame = dcb_vs_scb_sweep(densities, args.replications, config, seed=args.seed)
    print(frame.to_string(index=False))
    parameters = {
        "densities": densities,
        "replications": args.replications,
        "horizon": args.horizon,
        "mode": args.mode,
        "p_e": config.p_e,
        "N": DENSE_CHANNELS,
    }
    digest = hashlib.sha256(json.dumps(parameters, sort_keys=True).encode("utf-8")).hexdigest()
    write_csv(frame, _target_dir(args) / "dense_sweep.csv", seed=args.seed, digest=digest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcbnet", description="Análise e simulação de WLANs com channel bonding dinâmico")
    parser.add_argument("-v", "--verbose", action="store_true", help="Ativa logs de depuração")
    parser.add_argument("--output-dir", help="Pasta de saída (padrão: DCBNET_OUTPUT_DIR ou ./output)")
    commands = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        command = commands.add_parser(name, help=help_text)
        command.add_argument("scenario", help="Arquivo de cenário JSON (ou nome dentro de scenarios/)")
        command.add_argument("--scheme", help="Sobrescreve o esquema de canalização do arquivo")
        command.set_defaults(handler=handler)
        return command

    build = scenario_command("build", cmd_build, "Constrói a cadeia e grava o grafo DOT")
    build.add_argument("--dot", help="Caminho do arquivo DOT")
    build.add_argument("--list", action="store_true", help="Lista os estados em ordem de descoberta")

    solve = scenario_command("solve", cmd_solve, "Distribuição estacionária e métricas")
    solve.add_argument("--p-e", type=float, dest="p_e")
    solve.add_argument("--raw-jfi", action="store_true", help="Índice de Jain sem a normalização por M")

    analyze = scenario_command("analyze", cmd_analyze, "Estados dominantes, trocas e tempos de permanência")
    analyze.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    analyze.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    analyze.add_argument("--horizon", type=float, default=10.0, help="Segundos de trajetória simulada")
    analyze.add_argument("--seed", type=int, default=0)
    analyze.add_argument("--exit-rule", choices=EXIT_RULES, default="group_switch")
    analyze.add_argument("--window", type=float, default=0.06, help="Janela do traço de ocupação (s)")
    analyze.add_argument("--top-k", type=int, default=3)
    analyze.add_argument("--epsilon", type=float, help="Calcula também o tempo de mistura")

    sim = scenario_command("simulate", cmd_simulate, "Simulação de eventos discretos")
    sim.add_argument("--mode", choices=[mode.value for mode in SimMode], default=SimMode.CONTINUOUS.value)
    sim.add_argument("--dists", help="Par backoff/transmissão, ex.: E/E, U/D")
    sim.add_argument("--cw-sweep", type=_int_list, help="Lista de CW, ex.: 8,16,32,64")
    sim.add_argument("--sensitivity", action="store_true", help="Compara pares de distribuições com E/E")
    sim.add_argument("--pairs", help="Pares para --sensitivity, ex.: E/E,U/D")
    sim.add_argument("--replications", type=int, default=10)
    sim.add_argument("--horizon", type=float, default=10.0)
    sim.add_argument("--warmup", type=float)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--p-e", type=float, dest="p_e")

    dense = commands.add_parser("dense-sweep", help="Cenários densos aleatórios: DCB contra SCB")
    dense.add_argument("--max-wlans", type=int, default=40)
    dense.add_argument("--densities", type=_int_list, help="Valores de M, ex.: 1,5,10,20,40")
    dense.add_argument("--replications", type=int, default=5)
    dense.add_argument("--horizon", type=float, default=2.0)
    dense.add_argument("--mode", choices=[mode.value for mode in SimMode], default=SimMode.CONTINUOUS.value)
    dense.add_argument("--seed", type=int, default=0)
    dense.add_argument("--workers", type=int)
    dense.add_argument("--p-e", type=float, dest="p_e")
    dense.set_defaults(handler=cmd_dense_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Ponto de entrada para execução via CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else getattr(logging, log_level(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        return args.handler(args)
    except ValueError as error:
        logger.error("%s", error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as error:  # noqa: BLE001
        logger.exception("Falha ao executar '%s': %s", args.command, error)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
