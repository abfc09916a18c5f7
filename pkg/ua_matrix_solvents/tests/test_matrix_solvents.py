import io
import os
import json
import logging
import unittest
from contextlib import redirect_stdout

import numpy as np
from nose.tools import raises
from nose.plugins.attrib import attr

from ua_matrix_solvents import factor
from ua_matrix_solvents import log_config
from ua_matrix_solvents import matrix_solvents
from ua_matrix_solvents import report_tools


FIXTURES = os.path.join(os.path.split(__file__)[0], "fixtures")


def _fixture(name):
    return os.path.join(FIXTURES, f"{name}.json")


def _run(*argv):
    """Run the command line and return (exit status, stdout)."""
    output = io.StringIO()
    with redirect_stdout(output):
        status = matrix_solvents.main(list(argv))
    return status, output.getvalue()


def _run_json(*argv):
    status, text = _run(*argv, "--format", "json")
    assert status == 0, argv
    return json.loads(text)


class TestReports(unittest.TestCase):
    @attr("cli")
    def test_analyze_report(self):
        report = _run_json("analyze", _fixture("example4"))
        assert set(report) == {
            "schema_version", "command", "tolerance", "regularity",
            "payload", "warnings"}
        assert report["schema_version"] == "1"
        assert report["command"]["name"] == "analyze"
        assert report["regularity"]["M"] == 2
        assert report["regularity"]["infinite_mult_total"] == 2
        assert report["payload"]["solvent_bound"] == 1
        assert report["payload"]["spectral_data"]["infinite"] == [2]

    @attr("cli")
    def test_reconstructed_polynomial_is_valid_input(self):
        report = _run_json("reconstruct", _fixture("example4_pair"))
        poly = report_tools.polynomial_from_document(
            report["payload"]["polynomial"])
        source = report_tools.parse_input(_fixture("example4"))
        scale = np.linalg.inv(source.coeffs[0])
        for coeff, expected in zip(poly.coeffs, source.coeffs):
            assert np.allclose(coeff, scale @ expected)

    @attr("cli")
    def test_json_reports_are_deterministic(self):
        argv = ("bisolvents", _fixture("example6"), "--format", "json")
        assert _run(*argv) == _run(*argv)

    @attr("cli")
    def test_analyze_finds_every_eigenvalue(self):
        expected = report_tools.load_document(
            _fixture("example6_expected"))
        report = _run_json("analyze", _fixture("example6"))
        data = report["payload"]["spectral_data"]
        found = sorted(entry["eigenvalue"][0] for entry in data["finite"])
        assert np.allclose(found, sorted(expected["eigenvalues"]))
        assert data["infinite"] == expected["infinite"]

    @attr("cli")
    def test_text_report(self):
        status, text = _run("solvents", _fixture("example4"))
        assert status == 0
        assert text.startswith("matrix_solvents solvents")
        assert "regularity:" in text
        assert "\nsolvents:\n" in text
        assert "count: 1" in text

    @attr("cli")
    def test_tolerance_flags(self):
        report = _run_json(
            "analyze", _fixture("example4"), "--tol", "1e-9",
            "--rank-tol", "1e-11")
        assert report["tolerance"]["residual_tol"] == 1e-9
        assert report["tolerance"]["rank_tol"] == 1e-11

    @attr("cli")
    def test_pair_with_inversion(self):
        report = _run_json("pair", _fixture("example4"), "--invert", "2")
        payload = report["payload"]
        assert (payload["p"], payload["q"]) == (1, 3)
        assert payload["check"]["rank_ok"]

    @attr("cli")
    def test_enumeration_reports(self):
        cosolvents = _run_json("cosolvents", _fixture("example4"))
        assert cosolvents["payload"]["count"] == 3
        bisolvents = _run_json("bisolvents", _fixture("example5"))
        assert bisolvents["payload"]["count"] == 1
        assert bisolvents["payload"]["items"][0]["reduces_to"] == "neither"
        factors = _run_json("factor", _fixture("example4"))
        assert factors["payload"]["count"] == 3
        for item in factors["payload"]["items"]:
            assert item["max_rel_residual"] < 1e-8
            assert item["quotient"]["k"] <= 1

    @attr("cli")
    def test_enumeration_cap_is_reported(self):
        report = _run_json(
            "bisolvents", _fixture("example4"), "--max-enum", "1")
        assert report["payload"]["truncated"]

    @attr("cli")
    def test_reconstruct_from_pair(self):
        report = _run_json("reconstruct", _fixture("example4_pair"))
        rebuilt = report["payload"]["polynomial"]
        assert (rebuilt["n"], rebuilt["k"]) == (2, 2)
        assert report["regularity"]["M"] == 2


class TestVerify(unittest.TestCase):
    @attr("cli")
    def test_verify_companions(self):
        for poly_name, companion, kind in (
                ("example4", "example4_pair", "pair"),
                ("example4", "example4_solvent", "solvent"),
                ("example5", "example5_bisolvent", "bisolvent"),
                ("example5", "example5_factor", "factor")):
            report = _run_json(
                "verify", _fixture(poly_name),
                "--companion", _fixture(companion))
            assert report["payload"]["kind"] == kind
            assert report["payload"]["passed"], companion

    @attr("cli")
    def test_verify_rejects_foreign_bisolvent(self):
        report = _run_json(
            "verify", _fixture("example6"),
            "--companion", _fixture("example5_bisolvent"))
        assert report["payload"]["kind"] == "bisolvent"
        assert not report["payload"]["passed"]


class TestExitCodes(unittest.TestCase):
    @attr("cli")
    def test_input_errors(self):
        for argv in (
                ("analyze", _fixture("malformed")),
                ("analyze", _fixture("mismatched")),
                ("analyze", _fixture("missing")),
                ("verify", _fixture("example4")),
                ("pair", _fixture("example4"), "--invert", "5"),
                ("pair", _fixture("example5"), "--invert", "0"),
                ("pair", _fixture("example4"), "--invert", "two")):
            status, text = _run(*argv)
            assert status == 1, argv
            assert text == ""

    @attr("cli")
    def test_pair_document_that_is_not_an_object(self):
        status, text = _run("reconstruct", _fixture("pair_list"))
        assert status == 1
        assert text == ""

    @attr("cli")
    def test_singular_polynomial(self):
        status, _ = _run("solvents", _fixture("singular"))
        assert status == 2

    @attr("cli")
    def test_factor_of_wrong_size(self):
        status, _ = _run(
            "verify", _fixture("example4"),
            "--companion", _fixture("example5_factor"))
        assert status == 1

    def test_exit_code_mapping(self):
        assert matrix_solvents.exit_code(report_tools.ParseError()) == 1
        assert matrix_solvents.exit_code(
            factor.NotRegularFactor()) == 2
        assert matrix_solvents.exit_code(
            factor.NotADivisor()) == 3


class TestParsing(unittest.TestCase):
    def test_parse_eigenvalues(self):
        values = matrix_solvents.parse_eigenvalues("2, -2,1+1j")
        assert values == [2, -2, 1 + 1j]

    @raises(report_tools.ParseError)
    def test_parse_bad_eigenvalue(self):
        matrix_solvents.parse_eigenvalues("2,x")

    @raises(report_tools.ParseError)
    def test_bad_entry(self):
        report_tools.decode_matrix([[[1.0, 2.0, 3.0]]], "m")

    @raises(report_tools.ParseError)
    def test_ragged_rows(self):
        report_tools.decode_matrix([[1.0, 2.0], [1.0]], "m")

    @raises(report_tools.ParseError)
    def test_unknown_companion_kind(self):
        report_tools.load_companion(_fixture("example4"))

    def test_real_entries_are_accepted(self):
        matrix = report_tools.decode_matrix([[1, [0, 2]]], "m")
        assert np.allclose(matrix, [[1, 2j]])

    @raises(report_tools.ParseError)
    def test_pair_document_must_be_an_object(self):
        report_tools.pair_from_document([], where="pair")

    def test_constant_polynomial_is_accepted(self):
        poly = report_tools.polynomial_from_document(
            {"n": 1, "m": 1, "k": 0, "coefficients": [[[2.0]]]})
        assert poly.k == 0
        assert np.allclose(poly(5.0), [[2.0]])


class TestLogConfig(unittest.TestCase):
    def _record(self, level):
        return logging.LogRecord(
            "ua_matrix_solvents.spectral", level, __file__, 1, "message",
            None, None)

    def test_level_filter(self):
        only_warnings = log_config.LevelFilter([logging.WARNING])
        assert only_warnings.filter(self._record(logging.WARNING))
        assert not only_warnings.filter(self._record(logging.INFO))

    def test_verbose_routes_info_to_stderr(self):
        quiet = log_config.build_config()["filters"]
        verbose = log_config.build_config(verbose=True)["filters"]
        assert logging.INFO not in quiet["stderr_filter"]["levels"]
        assert logging.INFO in quiet["null_filter"]["levels"]
        assert logging.INFO in verbose["stderr_filter"]["levels"]
        assert logging.INFO not in verbose["null_filter"]["levels"]
