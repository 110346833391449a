import json

import pytest
from click.testing import CliRunner

from citescreen.cli import main


@pytest.fixture
def runner():
    return CliRunner()


T1_TITLE = "Diuretics for heart failure in elderly patients"


def _invoke(runner, args, **kw):
    result = runner.invoke(main, args, **kw)
    if result.exit_code != 0 and result.exception is not None:
        if not isinstance(result.exception, SystemExit):
            raise result.exception
    return result


class TestIngest:
    def test_stdout_jsonl(self, runner, fixture_corpus_dir):
        xml = str(fixture_corpus_dir / "heart_failure.xml")
        result = _invoke(runner, ["ingest", xml])
        assert result.exit_code == 0
        records = [json.loads(line) for line in result.output.splitlines()]
        assert [r["pmid"] for r in records] == list(range(1101, 1111))

    def test_out_file(self, runner, fixture_corpus_dir, tmp_path):
        xml = str(fixture_corpus_dir / "stroke.xml")
        out = tmp_path / "stroke.jsonl"
        result = _invoke(runner, ["ingest", xml, "--out", str(out)])
        assert result.exit_code == 0
        assert len(out.read_text().splitlines()) == 10

    def test_malformed_xml_is_validation_error(self, runner, tmp_path):
        bad = tmp_path / "bad.xml"
        bad.write_text("<MedlineCitationSet><oops>")
        result = _invoke(runner, ["ingest", str(bad)])
        assert result.exit_code == 1
        assert "error:" in result.output


class TestExtract:
    def test_text_mode(self, runner):
        result = _invoke(runner, [
            "extract", "--text",
            "Furosemide improved survival in elderly patients with heart failure.",
        ])
        assert result.exit_code == 0
        assert result.output.startswith("category\tconcept\n")
        assert "disease\theart failure" in result.output
        assert "intervention\tfurosemide" in result.output

    def test_tree_mode(self, runner):
        result = _invoke(runner, [
            "extract", "--tree",
            "(S (NP elderly (NN patients)) (VP improved))",
        ])
        assert result.exit_code == 0
        assert "population\telderly patients" in result.output

    def test_json_output(self, runner):
        result = _invoke(runner, [
            "--output", "json", "extract", "--text", "heart failure",
        ])
        assert result.exit_code == 0
        rows = json.loads(result.output)
        assert {"category": "disease", "concept": "heart failure"} in rows

    def test_requires_exactly_one_input(self, runner):
        assert _invoke(runner, ["extract"]).exit_code == 1
        assert _invoke(
            runner, ["extract", "--text", "x", "--tree", "(S x)"]
        ).exit_code == 1

    def test_bad_tree_is_validation_error(self, runner):
        result = _invoke(runner, ["extract", "--tree", "(S (NP"])
        assert result.exit_code == 1


class TestQuery:
    def test_boolean_string(self, runner):
        result = _invoke(runner, ["query", "--title", T1_TITLE])
        assert result.exit_code == 0
        assert '"heart failure"[MeSH]' in result.output
        assert '"congestive heart failure"[MeSH]' in result.output
        assert "1974:[Year]" in result.output


class TestFetch:
    def test_fixture_pmids(self, runner, fixture_corpus_dir):
        query = _invoke(runner, ["query", "--title", T1_TITLE]).output.strip()
        result = _invoke(runner, [
            "--fixture-dir", str(fixture_corpus_dir), "fetch", query,
        ])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "pmid"
        assert lines[1:] == [str(p) for p in range(1101, 1108)]

    def test_unreachable_endpoint_is_transport_error(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "endpoint": {
                "endpoint_base_url": "http://127.0.0.1:9/entrez",
                "max_retries": 0,
                "rate_limit_ms": 0,
            },
        }))
        result = _invoke(runner, [
            "--config", str(config), "fetch", '"heart failure"[MeSH]',
        ])
        assert result.exit_code == 2

    def test_malformed_query_is_validation_error(self, runner,
                                                 fixture_corpus_dir):
        result = _invoke(runner, [
            "--fixture-dir", str(fixture_corpus_dir), "fetch", "((broken",
        ])
        assert result.exit_code == 1


@pytest.fixture
def hf_jsonl(runner, fixture_corpus_dir, tmp_path):
    xml = str(fixture_corpus_dir / "heart_failure.xml")
    out = tmp_path / "hf.jsonl"
    assert _invoke(
        runner, ["ingest", xml, "--out", str(out)]
    ).exit_code == 0
    return out


class TestScreen:
    def test_decisions(self, runner, hf_jsonl):
        result = _invoke(runner, [
            "screen", "--title", T1_TITLE, str(hf_jsonl),
        ])
        assert result.exit_code == 0
        decisions = [json.loads(line) for line in result.output.splitlines()]
        by_pmid = {d["pmid"]: d for d in decisions}
        for pmid in (1101, 1102, 1103, 1104, 1105):
            assert by_pmid[pmid]["accepted"]
        assert not by_pmid[1106]["accepted"]
        assert not by_pmid[1107]["accepted"]


class TestRank:
    def test_matches_frozen_expectation(self, runner, hf_jsonl, expected_dir):
        result = _invoke(runner, ["rank", "--title", T1_TITLE, str(hf_jsonl)])
        assert result.exit_code == 0
        assert result.output.startswith(
            "rank\tpmid\tpop_sim\tint_sim\tdis_sim\tvsm_score\n"
        )

    def test_top_k(self, runner, hf_jsonl):
        result = _invoke(runner, [
            "--top-k", "3", "rank", "--title", T1_TITLE, str(hf_jsonl),
        ])
        assert len(result.output.splitlines()) == 4  # header + 3 rows


class TestPipelineAndEval:
    def test_end_to_end_report(self, runner, fixture_corpus_dir, gold_path,
                               tmp_path, expected_dir):
        out_dir = tmp_path / "ranked"
        result = _invoke(runner, [
            "--fixture-dir", str(fixture_corpus_dir), "--output", "json",
            "--gold-k", "5",
            "pipeline", str(gold_path), "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0
        report = json.loads(result.output)
        expected = json.loads((expected_dir / "report.json").read_text())
        assert report == expected
        for topic_id in ("T1", "T2", "T3"):
            produced = (out_dir / f"{topic_id}.tsv").read_text()
            frozen = (expected_dir / f"{topic_id}.tsv").read_text()
            assert produced == frozen

    def test_eval_on_frozen_rankings(self, runner, gold_path, expected_dir):
        result = _invoke(runner, [
            "--output", "json", "eval", str(gold_path), str(expected_dir),
        ])
        assert result.exit_code == 0
        report = json.loads(result.output)
        for entry in report["topics"].values():
            assert entry["f_score"] == 80.0

    def test_gold_k_section(self, runner, gold_path, expected_dir):
        result = _invoke(runner, [
            "--gold-k", "5", "--output", "json",
            "eval", str(gold_path), str(expected_dir),
        ])
        report = json.loads(result.output)
        assert "overall_gold_k_micro" in report

    def test_bad_config_is_validation_error(self, runner, gold_path, tmp_path):
        config = tmp_path / "broken.json"
        config.write_text("{not json")
        result = _invoke(runner, [
            "--config", str(config), "pipeline", str(gold_path),
        ])
        assert result.exit_code == 1
