import math
import os
import unittest

import numpy as np
from scipy import stats

from dcbnet.api.models import ChannelizationScheme
from dcbnet.core.errors import ConfigurationError
from dcbnet.services.ctmc import build_ctmc
from dcbnet.services.metrics import throughput
from dcbnet.services.phy80211 import cw_to_lambda
from dcbnet.services.simulator import (
    DEFAULT_PAIRS,
    DistKind,
    DistSpec,
    SimConfig,
    SimMode,
    confidence_interval,
    cw_sweep,
    dcb_vs_scb_sweep,
    parse_dist,
    parse_pair,
    random_dense_scenario,
    sensitivity_suite,
    simulate,
)
from dcbnet.services.solver import rate_matrix, steady_state
from dcbnet.tests.fixtures import FLAT_MU, FOUR_WLAN_SCHEME, REFERENCE_MU, four_wlans, single_wlan, toy_wlans

RUN_SLOW = bool(os.environ.get("DCBNET_RUN_SLOW"))
# WLANs que disputam o canal {5..8} no cenário de quatro WLANs.
CONTENDING = ("A", "C")


def _analytic(wlans, scheme, n_channels, mu, p_e=0.0):
    ctmc = build_ctmc(wlans, scheme, n_channels, mu)
    pi = steady_state(rate_matrix(ctmc))
    return ctmc, pi, throughput(ctmc, pi, p_e)


def _within_noise(case: unittest.TestCase, simulated: float, half_width: float, expected: float, replications: int) -> None:
    sigma = half_width / stats.t.ppf(0.975, replications - 1)
    case.assertLessEqual(abs(simulated - expected), 3.0 * sigma + 1e-3 * expected)


def _contending_total(frame, cw: int, column: str) -> float:
    rows = frame[(frame["cw"] == cw) & frame["wlan_id"].isin(CONTENDING)]
    return float(rows[column].sum())


class DistributionTests(unittest.TestCase):
    def test_parsing(self) -> None:
        self.assertIs(parse_dist("exp"), DistKind.EXPONENTIAL)
        self.assertIs(parse_dist("U"), DistKind.UNIFORM)
        self.assertEqual(parse_pair("u/d"), (DistKind.UNIFORM, DistKind.DETERMINISTIC))
        self.assertEqual(len(DEFAULT_PAIRS), 9)
        self.assertIn("E/E", DEFAULT_PAIRS)
        with self.assertRaises(ConfigurationError):
            parse_dist("gamma")
        with self.assertRaises(ConfigurationError):
            parse_pair("E")

    def test_samples_keep_the_mean(self) -> None:
        rng = np.random.default_rng(0)
        uniform = DistSpec(DistKind.UNIFORM, 2.0)
        draws = np.array([uniform.sample(rng) for _ in range(20_000)])
        self.assertTrue(np.all((draws >= 0.0) & (draws <= 4.0)))
        self.assertAlmostEqual(float(draws.mean()), 2.0, delta=0.05)
        self.assertEqual(DistSpec(DistKind.DETERMINISTIC, 0.5).sample(rng), 0.5)
        with self.assertRaises(ConfigurationError):
            DistSpec(DistKind.EXPONENTIAL, 0.0)


class ConfigTests(unittest.TestCase):
    def test_defaults(self) -> None:
        config = SimConfig(horizon=4.0)
        self.assertAlmostEqual(config.effective_warmup, 0.2)
        self.assertIs(config.tx_kind, DistKind.EXPONENTIAL)
        self.assertIs(SimConfig(mode=SimMode.SLOTTED).tx_kind, DistKind.DETERMINISTIC)
        self.assertIs(SimConfig(mode=SimMode.SLOTTED, tx_time=DistKind.UNIFORM).tx_kind, DistKind.UNIFORM)

    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            SimConfig(horizon=1.0, warmup=1.0)
        with self.assertRaises(ValueError):
            SimConfig(p_e=1.2)
        with self.assertRaises(ValueError):
            SimConfig(replications=0)

    def test_contention_window_per_wlan(self) -> None:
        wlan_a, wlan_b = toy_wlans(rate=cw_to_lambda(32))
        self.assertEqual(SimConfig().cw_for(wlan_a), 32)
        config = SimConfig(cw={"A": 8})
        self.assertEqual(config.cw_for(wlan_a), 8)
        self.assertEqual(config.cw_for(wlan_b), 32)
        with self.assertRaises(ConfigurationError):
            SimConfig(cw=1).cw_for(wlan_a)

    def test_confidence_interval(self) -> None:
        mean, half = confidence_interval([1.0, 2.0, 3.0])
        self.assertAlmostEqual(mean, 2.0)
        self.assertAlmostEqual(half, 4.302653 / math.sqrt(3.0), places=5)
        mean, half = confidence_interval([5.0])
        self.assertEqual(mean, 5.0)
        self.assertTrue(math.isnan(half))


class ContinuousModeTests(unittest.TestCase):
    def test_single_wlan_matches_analysis(self) -> None:
        wlans = single_wlan(1000.0)
        _, _, expected = _analytic(wlans, ChannelizationScheme.P2DCB, 4, FLAT_MU)
        report = simulate(wlans, "p2dcb", 4, FLAT_MU, SimConfig(horizon=20.0, replications=2, seed=4))
        self.assertAlmostEqual(report.throughput["A"], expected["A"], delta=0.05 * expected["A"])
        self.assertAlmostEqual(report.expected_width["A"], 4.0)
        self.assertEqual(set(report.occupancy), {"∅", "A_4^1"})

    def test_toy_example_matches_analysis(self) -> None:
        wlans = toy_wlans()
        ctmc, pi, expected = _analytic(wlans, ChannelizationScheme.P2DCB, 4, REFERENCE_MU)
        report = simulate(wlans, "p2dcb", 4, REFERENCE_MU, SimConfig(horizon=20.0, replications=2, seed=1))
        for key in ("A", "B"):
            self.assertAlmostEqual(report.throughput[key], expected[key], delta=0.06 * expected[key])
        self.assertTrue(set(report.occupancy) <= set(ctmc.labels()))
        self.assertAlmostEqual(sum(report.occupancy.values()), 1.0, places=9)
        for label, probability in zip(ctmc.labels(), pi):
            self.assertAlmostEqual(report.occupancy.get(label, 0.0), probability, delta=0.03)
        self.assertTrue(all(item.overlaps == 0 for item in report.replications))
        self.assertEqual(report.collisions, 0)

    def test_error_probability_removes_successes(self) -> None:
        report = simulate(toy_wlans(), "p2dcb", 4, REFERENCE_MU, SimConfig(horizon=0.5, p_e=1.0))
        self.assertEqual(report.aggregate, 0.0)
        self.assertGreater(sum(report.failures.values()), 0)

    def test_same_seed_same_report(self) -> None:
        config = SimConfig(horizon=0.5, replications=3, seed=12)
        first = simulate(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config)
        second = simulate(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config)
        self.assertEqual(first.throughput, second.throughput)
        self.assertEqual(first.successes, second.successes)
        frame = first.to_frame()
        self.assertEqual(len(frame), 3 * 2)
        self.assertEqual(list(first.summary_frame()["wlan_id"]), ["A", "B"])

    def test_worker_count_does_not_change_results(self) -> None:
        config = SimConfig(horizon=0.3, replications=2, seed=8, workers=1)
        serial = simulate(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config)
        parallel = simulate(
            toy_wlans(), "p2dcb", 4, REFERENCE_MU, SimConfig(horizon=0.3, replications=2, seed=8, workers=2)
        )
        self.assertEqual(serial.throughput, parallel.throughput)

    def test_empty_scenario_is_rejected(self) -> None:
        with self.assertRaises(ConfigurationError):
            simulate([], "p2dcb", 4, REFERENCE_MU, SimConfig(horizon=0.1))


class SlottedModeTests(unittest.TestCase):
    def test_overlapping_wlans_collide(self) -> None:
        config = SimConfig(mode=SimMode.SLOTTED, horizon=2.0, seed=3)
        report = simulate(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config)
        self.assertGreater(report.collisions, 0)
        self.assertGreater(sum(report.failures.values()), 0)
        self.assertGreater(sum(report.successes.values()), 0)

    def test_single_wlan_matches_analysis(self) -> None:
        rate = cw_to_lambda(16)
        wlans = single_wlan(rate)
        _, _, expected = _analytic(wlans, ChannelizationScheme.P2DCB, 4, FLAT_MU)
        config = SimConfig(mode=SimMode.SLOTTED, cw=16, horizon=10.0, replications=2, seed=6)
        report = simulate(wlans, "p2dcb", 4, FLAT_MU, config)
        self.assertAlmostEqual(report.throughput["A"], expected["A"], delta=0.03 * expected["A"])
        self.assertEqual(report.collisions, 0)

    def test_cw_sweep_rows(self) -> None:
        config = SimConfig(horizon=5.0, replications=2, seed=2)
        frame = cw_sweep(single_wlan(), "p2dcb", 4, FLAT_MU, [16, 64], config)
        self.assertEqual(list(frame["cw"]), [16, 64])
        self.assertEqual(list(frame.columns), ["cw", "wlan_id", "analytic_bps", "simulated_bps", "ci"])
        for row in frame.itertuples():
            self.assertAlmostEqual(row.simulated_bps, row.analytic_bps, delta=0.05 * row.analytic_bps)


class SensitivityTests(unittest.TestCase):
    def test_single_wlan_is_insensitive(self) -> None:
        config = SimConfig(horizon=40.0, replications=2, seed=5)
        frame = sensitivity_suite(single_wlan(1000.0), "p2dcb", 4, FLAT_MU, config, pairs=["E/E", "U/D"])
        self.assertEqual(list(frame["pair"]), ["E/E", "U/D"])
        baseline, other = frame["throughput_bps"]
        self.assertEqual(frame["delta_bps"].iloc[0], 0.0)
        self.assertAlmostEqual(other, baseline, delta=0.05 * baseline)


class DenseScenarioTests(unittest.TestCase):
    def test_random_assignment(self) -> None:
        wlans = random_dense_scenario(10, np.random.default_rng(1))
        self.assertEqual([wlan.id for wlan in wlans], [f"W{index}" for index in range(1, 11)])
        for wlan in wlans:
            self.assertEqual(wlan.assigned.width, 8)
            self.assertLessEqual(wlan.assigned.hi, 24)
            self.assertTrue(wlan.assigned.contains(wlan.primary))
            self.assertAlmostEqual(wlan.access_rate, cw_to_lambda(16))
            self.assertEqual(wlan.packet_bits, 768_000)
        with self.assertRaises(ValueError):
            random_dense_scenario(0, np.random.default_rng(1))

    def test_leftmost_channel_and_primary_are_uniform(self) -> None:
        wlans = random_dense_scenario(10_000, np.random.default_rng(2024))
        leftmost = np.bincount([wlan.assigned.lo for wlan in wlans], minlength=18)[1:]
        offsets = np.bincount([wlan.primary - wlan.assigned.lo for wlan in wlans], minlength=8)
        self.assertEqual(len(leftmost), 17)
        self.assertEqual(len(offsets), 8)
        self.assertGreater(stats.chisquare(leftmost).pvalue, 1e-3)
        self.assertGreater(stats.chisquare(offsets).pvalue, 1e-3)

    def test_sweep_table(self) -> None:
        frame = dcb_vs_scb_sweep([1, 3], replications=2, config=SimConfig(horizon=0.3), seed=4)
        self.assertEqual(len(frame), 2 * 2 * 3)
        self.assertEqual(
            list(frame.columns), ["M", "scheme", "metric", "mean", "ci_low", "ci_high", "replications"]
        )
        alone = frame[frame["M"] == 1].set_index(["scheme", "metric"])["mean"]
        self.assertAlmostEqual(alone[("dcb", "aggregate_bps")], alone[("scb", "aggregate_bps")])
        self.assertAlmostEqual(alone[("dcb", "expected_width")], 8.0)
        self.assertAlmostEqual(alone[("dcb", "jfi")], 1.0)
        with self.assertRaises(ValueError):
            dcb_vs_scb_sweep([1], replications=1, config=SimConfig(horizon=0.3))


class ShortAcceptanceTests(unittest.TestCase):
    """Versões curtas das validações longas, com sementes fixas."""

    def test_toy_throughput_within_three_sigma(self) -> None:
        wlans = toy_wlans()
        _, _, expected = _analytic(wlans, ChannelizationScheme.P2DCB, 4, REFERENCE_MU)
        report = simulate(wlans, "p2dcb", 4, REFERENCE_MU, SimConfig(horizon=5.0, replications=8, seed=61))
        for key in report.wlan_ids:
            _within_noise(self, report.throughput[key], report.ci[key], expected[key], 8)

    def test_small_window_loses_throughput_to_collisions(self) -> None:
        config = SimConfig(horizon=2.0, replications=2, seed=62)
        frame = cw_sweep(four_wlans(), FOUR_WLAN_SCHEME, 8, REFERENCE_MU, [8], config)
        self.assertLessEqual(
            _contending_total(frame, 8, "simulated_bps"), _contending_total(frame, 8, "analytic_bps")
        )

    def test_dense_scenarios_favor_dynamic_bonding(self) -> None:
        frame = dcb_vs_scb_sweep([1, 10], replications=3, config=SimConfig(horizon=0.5), seed=63)
        means = frame.set_index(["M", "scheme", "metric"])["mean"]
        for m in (1, 10):
            self.assertGreaterEqual(means[(m, "dcb", "aggregate_bps")], means[(m, "scb", "aggregate_bps")])
        self.assertLessEqual(means[(10, "dcb", "expected_width")], means[(1, "dcb", "expected_width")])

    def test_toy_example_is_sensitive_to_distributions(self) -> None:
        config = SimConfig(horizon=2.0, replications=2, seed=64)
        frame = sensitivity_suite(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config, pairs=["E/E", "U/D"])
        deltas = frame.set_index(["pair", "wlan_id"])["delta_bps"]
        self.assertEqual(deltas[("E/E", "A")], 0.0)
        self.assertNotEqual(deltas[("U/D", "A")], 0.0)


@unittest.skipUnless(RUN_SLOW, "defina DCBNET_RUN_SLOW=1 para as execuções longas")
class LongRunTests(unittest.TestCase):
    def test_continuous_runs_match_analysis(self) -> None:
        cases = (
            (toy_wlans(), ChannelizationScheme.P2DCB, 4),
            (four_wlans(), FOUR_WLAN_SCHEME, 8),
        )
        for wlans, scheme, n_channels in cases:
            _, _, expected = _analytic(wlans, scheme, n_channels, REFERENCE_MU)
            report = simulate(
                wlans, scheme, n_channels, REFERENCE_MU, SimConfig(horizon=100.0, replications=10, seed=21)
            )
            for key in report.wlan_ids:
                _within_noise(self, report.throughput[key], report.ci[key], expected[key], 10)

    def test_slotted_contention_window_sweep(self) -> None:
        config = SimConfig(horizon=20.0, replications=5, seed=31)
        frame = cw_sweep(four_wlans(), FOUR_WLAN_SCHEME, 8, REFERENCE_MU, [8, 16, 32, 64, 128, 256], config)
        self.assertLessEqual(
            _contending_total(frame, 8, "simulated_bps"), _contending_total(frame, 8, "analytic_bps")
        )
        large = frame[frame["cw"] >= 64]
        self.assertTrue(((large["simulated_bps"] - large["analytic_bps"]).abs() <= 0.1 * large["analytic_bps"]).all())

    def test_dense_sweep_trends(self) -> None:
        densities = (1, 5, 10, 20, 40)
        frame = dcb_vs_scb_sweep(list(densities), replications=20, config=SimConfig(horizon=2.0), seed=41)
        means = frame.set_index(["M", "scheme", "metric"])["mean"]
        widths = [means[(m, "dcb", "expected_width")] for m in densities]
        for m in densities:
            self.assertGreaterEqual(means[(m, "dcb", "aggregate_bps")], means[(m, "scb", "aggregate_bps")])
        self.assertTrue(all(later <= earlier for earlier, later in zip(widths, widths[1:])))
        self.assertLess(widths[-1], 2.0)
        dcb_jfi = np.mean([means[(m, "dcb", "jfi")] for m in densities])
        scb_jfi = np.mean([means[(m, "scb", "jfi")] for m in densities])
        self.assertGreaterEqual(dcb_jfi, scb_jfi)

    def test_sensitivity_exceeds_noise_on_toy_example(self) -> None:
        config = SimConfig(horizon=100.0, replications=10, seed=51)
        frame = sensitivity_suite(toy_wlans(), "p2dcb", 4, REFERENCE_MU, config, pairs=["E/E", "U/D"])
        row = frame[(frame["pair"] == "U/D") & (frame["wlan_id"] == "A")].iloc[0]
        self.assertGreater(abs(row["delta_bps"]), 3.0 * row["ci_half_width"] / stats.t.ppf(0.975, 9))

    def test_sensitivity_control_on_single_wlan(self) -> None:
        config = SimConfig(horizon=100.0, replications=10, seed=52)
        frame = sensitivity_suite(single_wlan(1000.0), "p2dcb", 4, FLAT_MU, config)
        for row in frame.itertuples():
            noise = 3.0 * math.sqrt(2.0) * row.ci_half_width / stats.t.ppf(0.975, 9)
            self.assertLessEqual(abs(row.delta_bps), noise + 1e-3 * row.throughput_bps)


if __name__ == "__main__":
    unittest.main()
