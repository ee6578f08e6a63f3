import csv
import io
import json

import mpmath
import pytest

from meanlab import cli, operator_means as om
from meanlab.errors import DomainError
from meanlab.report import CSV_HEADER, ReportEnvelope, encode_json, format_number, load_config, parse_config_text


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestFormatting:
    def test_seventeen_digits_roundtrip(self):
        for x in [0.1, 1 / 3, 1e-300, 123456789.123, -2.5e-8]:
            text = format_number(x)
            assert float(text) == x
        assert format_number(1.0) == "1"

    def test_bigfloat_full_digits(self):
        ctx = mpmath.MPContext()
        ctx.dps = 40
        text = format_number(ctx.mpf(1) / 3)
        assert text.startswith("0.3333") and len(text.replace("0.", "", 1)) == 30

    def test_json_sorted_and_nonfinite(self):
        text = encode_json({"b": 1, "a": [float("inf"), None, True]}, indent=None)
        assert text == '{"a": ["inf", null, true], "b": 1}'
        assert json.loads(encode_json({"x": 0.1})) == {"x": 0.1}


class TestConfig:
    def test_parse(self):
        cfg = parse_config_text("# comment\nseed = 5\n tol=1e-10\nformat = csv\n\nthreads = none\n")
        assert cfg == {"seed": 5, "tol": 1e-10, "format": "csv", "threads": None}

    def test_bad_lines(self):
        with pytest.raises(DomainError):
            parse_config_text("seed 5")
        with pytest.raises(DomainError):
            parse_config_text("colour = red")
        with pytest.raises(DomainError):
            parse_config_text("seed = five")

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 5\nnodes = 48\n")
        cfg = load_config(path, {"seed": 9, "nodes": None})
        assert cfg.seed == 9 and cfg.nodes == 48

    def test_validation(self):
        with pytest.raises(DomainError):
            load_config(None, {"digits": 10})
        with pytest.raises(DomainError):
            load_config(None, {"seed": -1})


class TestEnvelope:
    def test_summary_matches_records(self):
        recs = [{"id": "x", "point": {"a": 1.0}, "gap": 0.5, "relative_gap": 0.5, "precision": "double",
                 "verdict": v, "paper_anchor": ""} for v in ("holds", "violated", "indeterminate", "holds")]
        env = ReportEnvelope({"seed": 0}, recs, skipped=2)
        assert env.summary == {"checked": 4, "held": 2, "violated": 1, "indeterminate": 1, "skipped": 2}
        assert list(json.loads(env.to_json())) == ["cases", "config", "exit", "summary", "version"]

    def test_csv_header(self):
        env = ReportEnvelope({}, [])
        assert env.to_csv().strip() == ",".join(CSV_HEADER)


class TestMeansEval:
    def test_examples(self):
        assert run("means", "eval", "--kind", "L", "--a", "2", "--b", "1") == (0, "1.4426950408889634\n", "")
        assert run("means", "eval", "--kind", "A", "--a", "1", "--b", "1", "--v", "0.3")[:2] == (0, "1\n")
        code, _, err = run("means", "eval", "--kind", "G", "--a", "2", "--b", "1", "--v", "2")
        assert code == 2 and "weight" in err

    def test_other_kinds(self):
        assert float(run("means", "eval", "--kind", "LNR", "--a", "5", "--r", "1")[1]) == pytest.approx(4.0, rel=1e-15)
        ryf = float(run("means", "eval", "--kind", "RYF", "--a", "8", "--b", "1", "--v", "0.5")[1])
        assert ryf == pytest.approx(1 + mpmath.log(8) ** 2 / 8)
        assert run("means", "eval", "--kind", "LNR", "--a", "5")[0] == 2
        assert run("means", "eval", "--kind", "Q", "--a", "5")[0] == 2
        assert run("means", "eval", "--a", "5")[0] == 2


class TestIneqCheck:
    def test_random_polya(self):
        code, out, _ = run("ineq", "check", "--case", "polya", "--random", "100000", "--seed", "7")
        rep = json.loads(out)
        assert code == 0 and rep["exit"] == 0
        assert rep["findings"]["random"]["polya"]["points"] == 100000

    def test_violation(self):
        code, out, _ = run("ineq", "check", "--case", "half_mix_unweighted_L", "--a", "2", "--b", "1", "--v", "0.75")
        rep = json.loads(out)
        assert code == 1 and rep["exit"] == 1
        assert rep["cases"][0]["gap"] == pytest.approx(-0.223091, abs=1e-6)
        assert rep["summary"]["violated"] == 1

    def test_unknown_case(self):
        assert run("ineq", "check", "--case", "nope")[0] == 2

    def test_missing_point(self):
        assert run("ineq", "check", "--case", "polya", "--a", "2")[0] == 2

    def test_strict_indeterminate(self):
        args = ("ineq", "check", "--case", "polya", "--a", "1", "--b", "1", "--precision", "double")
        assert run(*args)[0] == 0
        assert run(*args, "--strict")[0] == 3

    def test_expected_failure_random(self):
        assert run("ineq", "check", "--case", "wlog_two_thirds", "--random", "1000")[0] == 1

    def test_csv_matches_json(self):
        base = ("ineq", "check", "--case", "wlog_two_thirds", "--a", "10", "--b", "1", "--v", "0.1")
        js = json.loads(run(*base)[1])["cases"][0]
        row = next(csv.DictReader(io.StringIO(run(*base, "--format", "csv")[1])))
        assert float(row["gap"]) == js["gap"] and float(row["relative_gap"]) == js["relative_gap"]
        assert row["verdict"] == js["verdict"] and row["a"] == js["point"]["a"]


class TestOperatorVerify:
    def test_zj(self):
        code, out, _ = run("operator", "verify", "--case", "op_zj", "--dims", "2,3,5", "--pairs", "20", "--seed", "1")
        rep = json.loads(out)
        assert code == 0 and rep["summary"]["checked"] == 60

    def test_precondition_skips(self):
        code, out, _ = run("operator", "verify", "--case", "op_zj_tsallis", "--r", "1", "--dims", "3", "--pairs", "10")
        assert code == 0 and json.loads(out)["summary"]["skipped"] > 0

    def test_zero_pairs(self):
        assert run("operator", "verify", "--case", "all", "--pairs", "0")[0] == 2

    def test_manifest(self, tmp_path):
        A, B = om.random_pair(3, 1)
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"pairs": [{"A": A.to_json(), "B": B.to_json(), "v": 0.3}]}))
        code, out, _ = run("operator", "verify", "--case", "op_mix", "--manifest", str(path))
        assert code == 0 and json.loads(out)["cases"][0]["point"]["pair"] == 0
        path.write_text("{not json")
        assert run("operator", "verify", "--manifest", str(path))[0] == 2

    def test_unknown_case(self):
        assert run("operator", "verify", "--case", "op_nope", "--pairs", "1")[0] == 2


class TestExploratory:
    def test_counterexample(self, tmp_path):
        wit = tmp_path / "w.jsonl"
        code, out, _ = run("search", "counterexample", "--case", "wlog_two_thirds", "--grid", "24",
                           "--witness-file", str(wit))
        assert code == 0
        assert json.loads(out)["cases"][0]["verdict"] == "violated"
        assert len(wit.read_text().splitlines()) == 1

    def test_no_failure_exit_on_findings(self):
        assert run("search", "counterexample", "--case", "half_mix_unweighted_L", "--grid", "16")[0] == 0

    def test_optimal_p(self):
        code, out, _ = run("search", "optimal-p", "--digits", "50", "--grid", "20", "--budget", "100")
        f = json.loads(out)["findings"]
        assert code == 0 and f["width"] <= 1e-4
        assert 0.5 <= f["bracket"][0] < f["bracket"][1] <= 2 / 3
        assert f["witness"]["printed_gap"] == -1.39948e-8

    def test_optimal_p_needs_escalation(self):
        assert run("search", "optimal-p", "--precision", "double")[0] == 2

    def test_conjecture(self):
        code, out, _ = run("conjecture", "probe", "--samples", "2e4", "--seed", "9", "--budget", "50")
        assert code == 0 and json.loads(out)["findings"]["samples"] == 20000


class TestDeterminism:
    def test_byte_identical(self, tmp_path):
        args = ("search", "counterexample", "--case", "refined_young_reverse", "--grid", "16", "--seed", "3")
        a = run(*args)[1]
        b = run(*args, "--threads", "2")[1]
        assert a == b

    def test_threads_env(self, monkeypatch):
        argv = ("operator", "verify", "--case", "all", "--dims", "2,3", "--pairs", "4", "--seed", "2")
        monkeypatch.setenv("MEANLAB_THREADS", "1")
        one = run(*argv)
        monkeypatch.setenv("MEANLAB_THREADS", "4")
        four = run(*argv)
        monkeypatch.setenv("MEANLAB_THREADS", "bogus")
        bogus = run(*argv)
        assert one == four == bogus and one[0] == 0
        assert "threads" not in json.loads(one[1])["config"]

    def test_output_and_config_file(self, tmp_path):
        cfgf = tmp_path / "c.cfg"
        cfgf.write_text("seed = 11\nformat = csv\n")
        out = tmp_path / "r.csv"
        code, stdout, _ = run("ineq", "check", "--case", "lin_chain", "--random", "500", "--config", str(cfgf),
                              "--output", str(out))
        assert code == 0 and stdout == ""
        assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
        code, stdout, _ = run("ineq", "check", "--case", "lin_chain", "--random", "500", "--config", str(cfgf),
                              "--format", "json")
        assert json.loads(stdout)["config"]["seed"] == 11

    def test_bad_config(self, tmp_path):
        cfgf = tmp_path / "c.cfg"
        cfgf.write_text("bogus = 1\n")
        assert run("ineq", "check", "--case", "polya", "--random", "10", "--config", str(cfgf))[0] == 2
