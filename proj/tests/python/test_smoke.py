import json
import math

import pytest

import _citegcn as cg


def test_parse_and_clean_roundtrip():
    text = "#index 5\n#* A Title\n#@ A. One;B. Two\n#t 2006\n#c VLDB\n#% 3\n"
    records, diagnostics = cg.parse_records_text(text)
    assert diagnostics == []
    assert len(records) == 1
    rec = records[0]
    assert rec.id == 5
    assert rec.authors == ["A. One", "B. Two"]
    assert rec.year == 2006
    assert rec.references == [3]

    kept, report = cg.clean(records)
    assert report.kept == 1
    assert kept[0].affiliations == ["NaN", "NaN"]

    assert "#index 5" in cg.write_aminer(kept)


def test_clean_drops_missing_venue():
    rec = cg.PaperRecord()
    rec.id = 1
    rec.year = 2000
    rec.authors = ["A"]
    kept, report = cg.clean([rec])
    assert kept == []
    assert report.dropped_missing_venue == 1


def test_metrics_match_hand_values():
    assert cg.mae([1, 2, 3], [2, 2, 2]) == pytest.approx(2 / 3, abs=1e-12)
    assert cg.rmse([1, 2, 3], [2, 2, 2]) == pytest.approx(
        math.sqrt(2 / 3), abs=1e-12
    )
    assert cg.mape([1, 0, 4], [2, 7, 2]) == pytest.approx(0.75, abs=1e-12)
    assert cg.r2([1, 2, 3], [1, 2, 2]) == pytest.approx(0.5, abs=1e-12)
    assert cg.adjusted_r2(0.5, 12, 1) == pytest.approx(0.45, abs=1e-12)

    report = cg.evaluate([1, 0, 4], [2, 7, 2], 1)
    assert report["mape_support"] == 2
    assert report["mae"] <= report["rmse"]


def test_h_index():
    assert cg.h_index([3, 0, 6, 1, 5]) == 3
    assert cg.h_index([]) == 0


def test_tokenizer_lowercases_and_splits():
    assert cg.tokenize_text("Graph-Based Citation!") == [
        "graph",
        "based",
        "citation",
    ]


def test_generate_corpus_is_parseable_and_deterministic():
    config = json.dumps({"synth": {"papers": 60, "topics": 2, "seed": 9}})
    corpus_text, truth_csv = cg.generate_corpus(config)
    again_text, again_truth = cg.generate_corpus(config)
    assert corpus_text == again_text
    assert truth_csv == again_truth

    records, diagnostics = cg.parse_records_text(corpus_text)
    assert diagnostics == []
    assert len(records) == 60
    assert truth_csv.splitlines()[0].startswith("id,")


def test_adjacency_fingerprint_is_stable():
    corpus_text, _ = cg.generate_corpus(
        json.dumps({"synth": {"papers": 40, "seed": 2}})
    )
    records, _ = cg.parse_records_text(corpus_text)
    first = cg.adjacency_fingerprint(records, 2010)
    second = cg.adjacency_fingerprint(records, 2010)
    assert first == second
    assert first != cg.adjacency_fingerprint(records, 2000)


def test_bad_config_raises_config_error():
    with pytest.raises(cg.ConfigError):
        cg.run_experiment(json.dumps({"models": ["lr"], "typo": 1}))
    assert "models" in cg.default_config()


def test_run_experiment_end_to_end(tmp_path):
    corpus_text, truth_csv = cg.generate_corpus(
        json.dumps({"synth": {"papers": 450, "topics": 3, "seed": 5}})
    )
    corpus_path = tmp_path / "corpus.txt"
    truth_path = tmp_path / "truth.csv"
    corpus_path.write_text(corpus_text)
    truth_path.write_text(truth_csv)

    config = {
        "input": str(corpus_path),
        "truth": str(truth_path),
        "case": "5yr",
        "window": {"start": 1990, "end": 2010, "delta": 5},
        "models": ["lr"],
        "seed": 5,
        "out": str(tmp_path / "out"),
        "lda": {"topics": 3, "iterations": 10},
    }
    rows = cg.run_experiment(json.dumps(config))
    assert [row["model"] for row in rows] == ["lr"]
    final = rows[0]
    assert final["fold"] == "final"
    assert final["metrics"]["n"] > 25
    assert math.isfinite(final["metrics"]["r2"])
    assert (tmp_path / "out" / "results_5yr.csv").exists()
    assert (tmp_path / "out" / "models" / "lr_5yr.bin").exists()
