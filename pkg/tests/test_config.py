from __future__ import annotations

import json

import pytest

from triplecorpus.config import STAGES, PipelineConfig, build_config, load_config_file
from triplecorpus.errors import ConfigError


@pytest.fixture
def inputs(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text("", encoding="utf-8")
    titles = tmp_path / "titles.txt"
    titles.write_text("Microsoft\n", encoding="utf-8")
    return str(corpus), str(titles)


def test_toml_file_then_flags(tmp_path, inputs) -> None:
    corpus, titles = inputs
    path = tmp_path / "pipeline.toml"
    path.write_text(
        f'input = ["{corpus}"]\njobs = 4\nstages = "ingest,spate"\nself-link-scope = "first-sentence"\n',
        encoding="utf-8",
    )
    config = build_config(str(path), {"jobs": 2, "titles": None, "strict": False})

    assert config.input == (corpus,)
    assert config.jobs == 2
    assert config.strict is False
    assert config.stages == ("ingest", "spate")
    assert config.self_link_scope == "first-sentence"
    assert config.validate() is config


def test_json_file_with_underscored_keys(tmp_path, inputs) -> None:
    corpus, titles = inputs
    path = tmp_path / "pipeline.json"
    path.write_text(json.dumps({"input": corpus, "titles": titles, "be_filter_partial": True,
                                "stages": ["ingest", "spate", "postprocess"]}), encoding="utf-8")
    config = build_config(str(path))

    assert config.input == (corpus,)
    assert config.be_filter_partial is True
    assert config.to_dict()["be-filter-partial"] is True
    assert config.to_dict()["stages"] == ["ingest", "spate", "postprocess"]


@pytest.mark.parametrize("values", [
    {"workers": 3},
    {"jobs": "many"},
    {"strict": "yes"},
    {"stages": 7},
])
def test_bad_config_values(values) -> None:
    with pytest.raises(ConfigError):
        build_config(overrides=values)


def test_unreadable_config_file(tmp_path) -> None:
    path = tmp_path / "broken.toml"
    path.write_text("jobs = = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_file(str(path))
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "missing.toml"))


@pytest.mark.parametrize("changes, message", [
    ({"jobs": 0}, "jobs"),
    ({"stages": ("ingest", "postprocess")}, "prefix"),
    ({"self_link_scope": "document"}, "self-link-scope"),
    ({"top_k": 0}, "top-k"),
    ({"input": ()}, "no input"),
    ({}, "needs --model"),
])
def test_validation_errors(inputs, changes, message) -> None:
    corpus, titles = inputs
    config = PipelineConfig(**{"input": (corpus,), "titles": titles, **changes})
    with pytest.raises(ConfigError, match=message):
        config.validate()


def test_missing_files_are_reported_before_running(inputs, tmp_path) -> None:
    corpus, _ = inputs
    config = PipelineConfig(input=(corpus,), stages=STAGES[:5], model=corpus, titles=str(tmp_path / "none.txt"))
    with pytest.raises(ConfigError, match="titles file not found"):
        config.validate()
