"""Command-line interface: the full workflow plus the exit-code taxonomy."""

from __future__ import annotations

import csv
import json

import pytest

from groundling import cli
from groundling.corpus import load_corpus
from groundling.symbols import default_registry, load_registry
from groundling.world import load_observations, load_world


def test_full_workflow(tmp_path, capsys):
    corpus_path = tmp_path / "corpus.jsonl"
    models_dir = tmp_path / "models"
    obs_path = tmp_path / "site1.jsonl"
    spec_path = tmp_path / "site1.yaml"
    csv_path = tmp_path / "bench.csv"
    audit_path = tmp_path / "audit.json"
    registry_path = tmp_path / "registry.yaml"

    assert cli.main(["generate-corpus", "--out", str(corpus_path)]) == 0
    assert len(load_corpus(corpus_path)) == 500

    assert cli.main(["train", "--corpus", str(corpus_path),
                     "--out", str(models_dir)]) == 0
    for name in ("semantic", "perception", "grounding"):
        assert (models_dir / f"{name}.json").exists()

    assert cli.main(["evaluate", "--corpus", str(corpus_path),
                     "--models", str(models_dir)]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines()
             if l.startswith(("train:", "held-out:"))]
    assert len(lines) == 2

    assert cli.main(["generate-world", "--site", "site-1",
                     "--out", str(obs_path),
                     "--spec-out", str(spec_path)]) == 0
    assert len(load_observations(obs_path)) == 60
    assert load_world(spec_path).name == "site-1"

    assert cli.main(["ground",
                     "--instruction", "go to the farthest cup in the kitchen",
                     "--models", str(models_dir),
                     "--observations", str(obs_path),
                     "--mode", "OF_AP"]) == 0
    out = capsys.readouterr().out
    assert "grounding: action[navigate_to:" in out

    assert cli.main(["benchmark", "--models", str(models_dir),
                     "--out", str(csv_path),
                     "--audit", str(audit_path),
                     "--jobs", "2"]) == 0
    rows = list(csv.reader(csv_path.open()))
    assert len(rows) == 25
    assert len(json.loads(audit_path.read_text())) == 24

    assert cli.main(["dump-registry", "--out", str(registry_path)]) == 0
    assert load_registry(registry_path) == default_registry()


def test_missing_input_exits_one(tmp_path):
    missing = tmp_path / "nope.jsonl"
    code = cli.main(["train", "--corpus", str(missing),
                     "--out", str(tmp_path / "models")])
    assert code == 1


def test_domain_error_exits_one(tmp_path, bundle, capsys):
    models_dir = tmp_path / "models"
    bundle.save(models_dir)
    code = cli.main(["ground", "--instruction", "fetch me a sandwich",
                     "--models", str(models_dir), "--site", "site-1"])
    assert code == 1
    assert "OutOfGrammar" in capsys.readouterr().err


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["not-a-command"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["generate-corpus"])  # missing required --out
    assert excinfo.value.code == 2


def test_custom_registry_flows_through(tmp_path, capsys):
    registry_path = tmp_path / "registry.yaml"
    assert cli.main(["dump-registry", "--out", str(registry_path)]) == 0
    out_path = tmp_path / "corpus.jsonl"
    assert cli.main(["--registry", str(registry_path),
                     "generate-corpus", "--out", str(out_path)]) == 0
    assert out_path.exists()
