import copy
import hashlib
import json
import tempfile
import unittest
from pathlib import Path

import jsonschema

from dcbnet.api.models import ChannelizationScheme
from dcbnet.core.config import SCENARIO_DIR
from dcbnet.core.errors import ConfigurationError
from dcbnet.core.scenario import load_scenario, parse_scenario, resolve_scenario_path, scenario_schema
from dcbnet.services.ctmc import build_ctmc
from dcbnet.services.metrics import throughput
from dcbnet.services.phy80211 import REFERENCE_DURATIONS, cw_to_lambda, tx_duration
from dcbnet.services.solver import rate_matrix, steady_state

TOY = {
    "N": 4,
    "scheme": "p2dcb",
    "p_e": 0.1,
    "phy": {"preset": "reference"},
    "wlans": [
        {"id": "A", "lo": 1, "len": 4, "primary": 2, "cw": 16},
        {"id": "B", "lo": 3, "len": 2, "primary": 3, "cw": 16},
    ],
}


def _variant(**changes) -> dict:
    data = copy.deepcopy(TOY)
    data.update(changes)
    return data


def _with_wlan(position: int, **changes) -> dict:
    data = copy.deepcopy(TOY)
    data["wlans"][position].update(changes)
    return data


class ShippedScenarioTests(unittest.TestCase):
    def test_toy_file(self) -> None:
        scenario = load_scenario("toy")
        self.assertEqual(scenario.name, "toy")
        self.assertEqual(scenario.n_channels, 4)
        self.assertIs(scenario.scheme, ChannelizationScheme.P2DCB)
        self.assertAlmostEqual(scenario.p_e, 0.1)
        self.assertEqual([wlan.id for wlan in scenario.wlans], ["A", "B"])
        self.assertEqual(scenario.cw, {"A": 16, "B": 16})
        self.assertAlmostEqual(scenario.wlans[0].access_rate, cw_to_lambda(16))
        self.assertAlmostEqual(scenario.mu[2], 1.0 / REFERENCE_DURATIONS[2])
        self.assertAlmostEqual(scenario.mu[4], 1.0 / REFERENCE_DURATIONS[4])
        text = (SCENARIO_DIR / "toy.json").read_text(encoding="utf-8")
        self.assertEqual(scenario.digest, hashlib.sha256(text.encode("utf-8")).hexdigest())

    def test_every_shipped_scenario_loads(self) -> None:
        for path in sorted(SCENARIO_DIR.glob("*.json")):
            if path.name.endswith(".schema.json"):
                continue
            scenario = load_scenario(path)
            self.assertTrue(scenario.wlans, path.name)

    def test_formula_is_used_without_phy_section(self) -> None:
        scenario = load_scenario("single")
        self.assertEqual(sorted(scenario.mu), [1, 2, 4])
        self.assertAlmostEqual(scenario.mu[4], 1.0 / tx_duration(4))
        self.assertEqual(scenario.cw, {})
        self.assertEqual(scenario.wlans[0].packet_bits, 768_000)

    def test_scheme_override_recomputes_service_rates(self) -> None:
        scenario = load_scenario("single").with_scheme("scb")
        self.assertIs(scenario.scheme, ChannelizationScheme.SCB)
        self.assertEqual(sorted(scenario.mu), [4])
        with self.assertRaises(ConfigurationError):
            scenario.with_error_probability(1.5)
        self.assertEqual(scenario.with_error_probability(1.0).p_e, 1.0)

    def test_aligned_channelization_lowers_aggregate_throughput(self) -> None:
        totals = {}
        for name in ("scenario_i", "scenario_ii"):
            scenario = load_scenario(name)
            ctmc = build_ctmc(scenario.wlans, scenario.scheme, scenario.n_channels, scenario.mu)
            rates = throughput(ctmc, steady_state(rate_matrix(ctmc)), scenario.p_e)
            totals[name] = sum(rates.values())
        self.assertIs(load_scenario("scenario_i").scheme, ChannelizationScheme.P2DCB)
        self.assertIs(load_scenario("scenario_ii").scheme, ChannelizationScheme.IEEE80211AC_DCB)
        self.assertAlmostEqual(totals["scenario_i"], 391e6, delta=0.01 * 391e6)
        self.assertAlmostEqual(totals["scenario_ii"], 296e6, delta=0.01 * 296e6)
        self.assertGreater(totals["scenario_i"] / totals["scenario_ii"], 1.25)


class ValidationTests(unittest.TestCase):
    def test_rate_and_window_are_exclusive(self) -> None:
        data = _with_wlan(1, **{"lambda": 100.0})
        text = json.dumps(data, indent=2)
        line = next(number for number, content in enumerate(text.splitlines(), 1) if '"B"' in content)
        with self.assertRaises(ConfigurationError) as context:
            parse_scenario(data, text=text)
        message = str(context.exception)
        self.assertIn("WLAN 'B'", message)
        self.assertIn(f"linha {line}", message)

    def test_channel_outside_range(self) -> None:
        with self.assertRaises(ConfigurationError) as context:
            parse_scenario(_with_wlan(0, lo=2))
        self.assertIn("WLAN 'A'", str(context.exception))

    def test_primary_outside_assigned_channel(self) -> None:
        with self.assertRaises(ConfigurationError):
            parse_scenario(_with_wlan(1, primary=1))

    def test_rejected_documents(self) -> None:
        cases = [
            _variant(scheme="hexagonal"),
            _variant(p_e=1.5),
            _variant(extra=True),
            _variant(wlans={}),
            _variant(phy={"preset": "fastest"}),
            _with_wlan(0, colour="red"),
            _with_wlan(0, nodes=0),
            _with_wlan(0, cw=1),
            {key: value for key, value in TOY.items() if key != "N"},
            _variant(phy={"mcs": [{"width": 1, "data_subcarriers": 52, "modulation_bits": 6, "coding_rate": "cinco"}]}),
            ["N", 4],
        ]
        duplicate = copy.deepcopy(TOY)
        duplicate["wlans"][1]["id"] = "A"
        cases.append(duplicate)
        for data in cases:
            with self.subTest(data=data), self.assertRaises(ConfigurationError):
                parse_scenario(data)

    def test_schema_errors_name_the_field(self) -> None:
        with self.assertRaises(ConfigurationError) as context:
            parse_scenario(_variant(phy={"preset": "fastest"}))
        self.assertIn("'phy.preset'", str(context.exception))
        with self.assertRaises(ConfigurationError) as context:
            parse_scenario(_with_wlan(0, id=" "))
        self.assertIn("'wlans[0].id'", str(context.exception))
        with self.assertRaises(ConfigurationError) as context:
            parse_scenario(_with_wlan(1, nodes=0))
        self.assertIn("WLAN 'B'", str(context.exception))

    def test_shipped_schema_accepts_every_scenario(self) -> None:
        schema = scenario_schema()
        self.assertEqual(schema["title"], "dcbnet scenario")
        for path in sorted(SCENARIO_DIR.glob("*.json")):
            if path.name.endswith(".schema.json"):
                continue
            jsonschema.validate(instance=json.loads(path.read_text(encoding="utf-8")), schema=schema)

    def test_explicit_duration_table(self) -> None:
        scenario = parse_scenario(_variant(phy={"tx_durations_ms": {"1": 10.0, "2": 5.0, "4": 2.5}}))
        self.assertAlmostEqual(scenario.mu[4], 400.0)
        with self.assertRaises(ConfigurationError):
            parse_scenario(_variant(phy={"tx_durations_ms": {"4": 2.5}}))

    def test_custom_mcs_and_params(self) -> None:
        phy = {
            "params": {"aggregated": 1},
            "mcs": [
                {"width": 1, "data_subcarriers": 52, "modulation_bits": 6, "coding_rate": "5/6"},
                {"width": 2, "data_subcarriers": 108, "modulation_bits": 6, "coding_rate": "3/4"},
                {"width": 4, "data_subcarriers": 234, "modulation_bits": 4, "coding_rate": 0.75},
            ],
        }
        scenario = parse_scenario(_variant(phy=phy))
        self.assertEqual(scenario.phy.aggregated, 1)
        self.assertGreater(scenario.mu[4], 1.0 / tx_duration(4))


class FileTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmpdir = tempfile.TemporaryDirectory(ignore_cleanup_errors=True)
        self.addCleanup(self._tmpdir.cleanup)
        self.folder = Path(self._tmpdir.name)

    def test_invalid_json_reports_position(self) -> None:
        path = self.folder / "broken.json"
        path.write_text('{\n  "N": 4,\n  "wlans": [\n}', encoding="utf-8")
        with self.assertRaises(ConfigurationError) as context:
            load_scenario(path)
        self.assertIn("JSON inválido na linha", str(context.exception))

    def test_missing_file(self) -> None:
        with self.assertRaises(ConfigurationError):
            resolve_scenario_path(self.folder / "nothing.json")

    def test_file_name_becomes_scenario_name(self) -> None:
        path = self.folder / "custom.json"
        path.write_text(json.dumps(TOY), encoding="utf-8")
        self.assertEqual(load_scenario(path).name, "custom")


if __name__ == "__main__":
    unittest.main()
