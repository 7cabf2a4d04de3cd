import json
from fractions import Fraction

import pytest

from limitseries import cli
from limitseries.degree_graph import rho
from limitseries.series import EHTSeries, chain_adaptable

from conftest import three_chain_fixture


def run_cli(tmp_path, argv, payload=None):
    """Drive one command through files; returns (exit code, parsed output
    or None when nothing was written)."""
    full = list(argv)
    if payload is not None:
        inp = tmp_path / "in.json"
        inp.write_text(json.dumps(payload))
        full += ["--input", str(inp)]
    out = tmp_path / "out.json"
    full += ["--output", str(out)]
    rc = cli.main(full)
    if not out.exists():
        return rc, None
    return rc, json.loads(out.read_text())


def eht_payload(data):
    cfg, bundle, spaces = data
    s = EHTSeries(bundle, spaces, require_condition_I=False)
    return {
        "graph": cli.format_graph(cfg.graph),
        "config": cli.format_config(cfg),
        "bundle": cli.format_bundle(bundle),
        "spaces": cli.format_component_spaces(s),
    }


class TestCodecs:
    def test_rationals(self):
        assert cli.parse_rational(3) == 3
        assert cli.parse_rational("3/4") == Fraction(3, 4)
        assert cli.parse_rational("-2") == -2
        assert cli.format_rational(Fraction(3, 4)) == "3/4"
        assert cli.format_rational(Fraction(5)) == "5"
        with pytest.raises(cli.SchemaError):
            cli.parse_rational(0.5)
        with pytest.raises(cli.SchemaError):
            cli.parse_rational(True)
        with pytest.raises(cli.SchemaError):
            cli.parse_rational("1/0")

    def test_poly_round_trip(self):
        arr = ["0", "1/2", "-3"]
        assert cli.format_poly(cli.parse_poly(arr)) == arr
        assert cli.format_poly(cli.parse_poly([])) == []

    def test_canonical_json_is_idempotent(self):
        for name in ("example-A6", "example-bad-compare"):
            text = cli.canonical_json(cli.load_fixture(name))
            assert cli.canonical_json(json.loads(text)) == text

    def test_bundle_round_trip(self):
        fx = cli.load_fixture("example-bad-compare")
        graph = cli.parse_graph(fx["graph"])
        cfg = cli.parse_config(fx["config"], graph)
        bundle = cli.parse_bundle(fx["bundle"], cfg)
        assert cli.format_graph(graph) == fx["graph"]
        assert cli.format_config(cfg) == fx["config"]
        assert cli.format_bundle(bundle) == fx["bundle"]

    def test_prelinked_round_trip(self):
        fx = cli.load_fixture("example-A6")
        data, point = cli.parse_prelinked(fx["prelinked"])
        assert cli.format_prelinked(data, point) == fx["prelinked"]

    def test_eht_spaces_round_trip(self):
        fx = cli.load_fixture("example-bad-compare")
        graph = cli.parse_graph(fx["graph"])
        cfg = cli.parse_config(fx["config"], graph)
        bundle = cli.parse_bundle(fx["bundle"], cfg)
        s = EHTSeries(
            bundle,
            cli.parse_component_spaces(fx["spaces"]),
            require_condition_I=False,
        )
        assert cli.format_component_spaces(s) == fx["spaces"]


class TestFixtureCommand:
    def test_lists_available_on_unknown(self, tmp_path, capsys):
        rc, _ = run_cli(tmp_path, ["fixtures", "--name", "nope"])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert "example-A6" in err["error"]
        assert "example-bad-compare" in err["error"]

    def test_emits_canonical_fixture(self, tmp_path):
        rc, out = run_cli(tmp_path, ["fixtures", "--name", "example-A6"])
        assert rc == 0
        assert out == cli.load_fixture("example-A6")

    def test_directory_override(self, tmp_path, monkeypatch):
        d = tmp_path / "fx"
        d.mkdir()
        (d / "mine.json").write_text('{"hello": 1}')
        monkeypatch.setenv(cli.FIXTURE_DIR_VAR, str(d))
        rc, out = run_cli(tmp_path, ["fixtures", "--name", "mine"])
        assert rc == 0 and out == {"hello": 1}
        rc, _ = run_cli(tmp_path, ["fixtures", "--name", "example-A6"])
        assert rc == 2


class TestGrassmannianCommands:
    def test_star_point_is_linked_not_simple(self, tmp_path):
        fx = cli.load_fixture("example-A6")
        rc, out = run_cli(tmp_path, ["grassmannian-check"], fx)
        assert rc == 1
        assert out["verdicts"] == {
            "condition_I": True,
            "linked": True,
            "simple": False,
            "simple_verdict": "proven-false",
        }

    def test_tangent_dim(self, tmp_path):
        fx = cli.load_fixture("example-A6")
        rc, out = run_cli(tmp_path, ["tangent-dim"], fx)
        assert rc == 0
        assert out["verdicts"]["tangent_dimension"] == 2
        assert out["verdicts"]["smooth_expected"] == 2
        assert out["verdicts"]["matches_expected"] is True

    def test_unlinked_point_is_gate_false(self, tmp_path):
        fx = json.loads(json.dumps(cli.load_fixture("example-A6")))
        fx["prelinked"]["spaces"]["v2"] = [["1", "1", "0"], ["0", "1", "0"]]
        rc, out = run_cli(tmp_path, ["grassmannian-check"], fx)
        assert rc == 1
        assert out["verdicts"]["linked"] is False
        assert out["verdicts"]["simple"] is None
        rc, _ = run_cli(tmp_path, ["tangent-dim"], fx)
        assert rc == 2


class TestSeriesCommands:
    def test_kernel_table(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(tmp_path, ["kernel-table"], fx)
        assert rc == 0
        assert out["verdicts"]["exact_on_type_I"] is True
        assert out["verdicts"]["condition_I"] is False
        dims = {
            row["multidegree"]: (row["dimension"], row["type_I_vertex"])
            for row in out["witnesses"]["table"]
        }
        assert dims == {
            "0,1,1": (2, True),
            "0,2,0": (2, True),
            "1,0,1": (3, False),
            "1,1,0": (2, True),
        }

    def test_check_eht_and_refined(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(tmp_path, ["check-eht"], fx)
        assert rc == 0
        assert out["verdicts"]["eht"] is True
        assert out["verdicts"]["kernel_criterion"] is True
        assert out["verdicts"]["criteria_agree"] is True
        assert out["verdicts"]["condition_I"] is False
        rc, out = run_cli(tmp_path, ["check-refined"], fx)
        assert rc == 0 and out["verdicts"]["refined"] is True

    def test_simple_and_constrained_gates(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(tmp_path, ["check-simple"], fx)
        assert rc == 0
        assert out["verdicts"] == {"simple": True, "verdict": "witnessed"}
        assert len(out["witnesses"]["simple"]["vectors"]) == 2
        rc, out = run_cli(tmp_path, ["check-constrained"], fx)
        assert rc == 1
        assert out["verdicts"] == {
            "constrained": False,
            "verdict": "proven-false",
        }

    def test_adaptable_matches_library(self, tmp_path):
        data = three_chain_fixture()
        expect = chain_adaptable(
            EHTSeries(data[1], data[2], require_condition_I=False),
            require_condition_I=False,
        )
        rc, out = run_cli(tmp_path, ["check-adaptable"], eht_payload(data))
        assert out["verdicts"]["adaptable"] is expect is True
        assert rc == 0

    def test_chain_bases(self, tmp_path):
        rc, out = run_cli(
            tmp_path, ["chain-bases"], eht_payload(three_chain_fixture())
        )
        assert rc == 0
        assert out["verdicts"]["components"] == 3
        assert out["verdicts"]["nontrivial_matchings"] == 0
        assert len(out["witnesses"]["bases"]) == 3
        for comp in out["witnesses"]["bases"]:
            assert len(comp) == 2

    def test_eht_linked_round_trip(self, tmp_path):
        """Component data -> compatible family -> component data is the
        identity on the shipped counterexample."""
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(tmp_path, ["eht-to-linked"], fx)
        assert rc == 0
        assert out["verdicts"]["linked"] is True
        assert out["verdicts"]["multidegrees"] == 4
        back = {
            "graph": fx["graph"],
            "config": fx["config"],
            "bundle": fx["bundle"],
            "series": out["witnesses"]["series"],
        }
        rc, chk = run_cli(tmp_path, ["check-linked"], back)
        assert rc == 0 and chk["verdicts"]["linked"] is True
        rc, eht = run_cli(tmp_path, ["linked-to-eht"], back)
        assert rc == 0
        assert eht["witnesses"]["spaces"] == fx["spaces"]


class TestLocusCommands:
    def test_vanishing_locus_scaled_diagonal(self, tmp_path):
        payload = {
            "matrix": [[[0, 1], [0]], [[0], [0, 1]]],
            "k": 1,
        }
        rc, out = run_cli(tmp_path, ["vanishing-locus"], payload)
        assert rc == 0
        assert out["witnesses"]["generator"] == ["0", "0", "1"]
        assert out["verdicts"]["is_whole"] is False
        rows = {r["t"]: r for r in out["witnesses"]["samples"]}
        assert set(rows) == {"-1", "0", "1", "2", "7"}
        assert rows["0"]["in_locus"] is True
        assert rows["0"]["kernel_dimension"] == 2
        assert rows["7"]["in_locus"] is False

    def test_samples_flag(self, tmp_path):
        payload = {"matrix": [[[0, 1]]], "k": 1}
        rc, out = run_cli(
            tmp_path, ["vanishing-locus", "--samples", "1,1/2"], payload
        )
        assert rc == 0
        assert [r["t"] for r in out["witnesses"]["samples"]] == ["1/2", "1"]

    def test_family_locus(self, tmp_path):
        payload = {
            "graph": {
                "vertices": [
                    {"id": "v1", "genus": 0}, {"id": "v2", "genus": 0},
                ],
                "edges": [{"id": "e1", "tail": "v1", "head": "v2"}],
            },
            "config": {
                "r": 1, "d": 2, "k": 1, "b": 0, "dv": {"v1": 1, "v2": 1},
            },
            "family": {
                "splits": {"v1": [1], "v2": [1]},
                "nodes": {"e1": {"tailCoord": "1", "headCoord": "0"}},
                "gluings": {"e1": [[[0, 1]]]},
            },
            "spaces": {"v1": [[1, 0]], "v2": [[0, 1]]},
            "w": [1, 1],
            "k": 2,
        }
        rc, out = run_cli(tmp_path, ["family-locus"], payload)
        assert rc == 0
        assert out["witnesses"]["generator"] == ["0", "1"]
        assert out["verdicts"]["w"] == "1,1"
        rows = {r["t"]: r for r in out["witnesses"]["samples"]}
        assert rows["0"]["kernel_dimension"] == 2
        assert rows["1"]["kernel_dimension"] == 1

    def test_rho(self, tmp_path):
        rc, out = run_cli(
            tmp_path, ["rho", "--g", "0", "--r", "1", "--d", "2", "--k", "2"]
        )
        assert rc == 0 and out["verdicts"]["rho"] == 2
        rc, out = run_cli(
            tmp_path, ["rho", "--g", "3", "--r", "2", "--d", "5", "--k", "2"]
        )
        assert out["verdicts"]["rho"] == rho(3, 2, 5, 2)


class TestReportContract:
    def test_reports_are_byte_identical(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        inp = tmp_path / "in.json"
        inp.write_text(json.dumps(fx))
        texts = []
        for i in range(2):
            out = tmp_path / ("out%d.json" % i)
            rc = cli.main(
                ["kernel-table", "--input", str(inp),
                 "--output", str(out), "--seed", "7"]
            )
            assert rc == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1]

    def test_report_shape_and_options_echo(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(
            tmp_path, ["check-refined", "--seed", "11", "--budget", "99"], fx
        )
        assert rc == 0
        assert set(out) == {
            "command", "input_digest", "options", "timing_ms",
            "verdicts", "witnesses",
        }
        assert out["command"] == "check-refined"
        assert out["input_digest"].startswith("sha256:")
        assert out["options"]["seed"] == 11
        assert out["options"]["budget"] == 99
        assert out["timing_ms"] is None

    def test_timing_opt_in(self, tmp_path):
        fx = cli.load_fixture("example-bad-compare")
        rc, out = run_cli(tmp_path, ["check-refined", "--timing"], fx)
        assert rc == 0
        assert isinstance(out["timing_ms"], int)

    def test_stdin_stdout(self, tmp_path, monkeypatch, capsys):
        class FakeIn:
            def __init__(self, data):
                self.buffer = _Buf(data)

        class _Buf:
            def __init__(self, data):
                self._data = data

            def read(self):
                return self._data

        raw = json.dumps(cli.load_fixture("example-bad-compare")).encode()
        monkeypatch.setattr(cli.sys, "stdin", FakeIn(raw))
        rc = cli.main(["check-refined"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["verdicts"]["refined"] is True


class TestErrorPaths:
    def test_malformed_json(self, tmp_path, capsys):
        inp = tmp_path / "in.json"
        inp.write_text("{not json")
        rc = cli.main(["check-eht", "--input", str(inp)])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert "line 1" in err["error"]
        assert "column" in err["error"]

    def test_missing_field(self, tmp_path, capsys):
        graph = {"vertices": [{"id": "v1", "genus": 0}], "edges": []}
        rc, _ = run_cli(tmp_path, ["check-eht"], {"graph": graph})
        assert rc == 2
        assert "config" in json.loads(capsys.readouterr().err)["error"]

    def test_dimension_precondition(self, tmp_path, capsys):
        fx = json.loads(json.dumps(cli.load_fixture("example-bad-compare")))
        fx["spaces"]["v1"] = [["1", "0"]]
        rc, _ = run_cli(tmp_path, ["check-eht"], fx)
        assert rc == 2
        assert "dimension" in json.loads(capsys.readouterr().err)["error"]

    def test_inexact_rational_rejected(self, tmp_path, capsys):
        fx = json.loads(json.dumps(cli.load_fixture("example-bad-compare")))
        fx["bundle"]["nodes"]["e1"]["tailCoord"] = 0.5
        rc, _ = run_cli(tmp_path, ["check-eht"], fx)
        assert rc == 2
        capsys.readouterr()
