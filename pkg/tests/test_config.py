"""INI schema: defaults, precedence, and rejection with the key named."""

import pytest

from ldlab.config import (SCHEMA, defaults, help_lines, load_config,
                          parse_box, parse_masses, validate)
from ldlab.errors import ConfigError


def write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text, encoding="utf-8")
    return p


def test_defaults_cover_schema():
    cfg = defaults()
    assert cfg["kernel"] == {"n": 3, "alpha": 1.0}
    assert cfg["grid"]["h"] == pytest.approx(1 / 16)
    for sec, keys in SCHEMA.items():
        assert set(cfg[sec]) == set(keys)


def test_empty_file_yields_defaults(tmp_path):
    p = write(tmp_path, "")
    assert load_config(p) == defaults()


def test_partial_override(tmp_path):
    p = write(tmp_path, "[kernel]\nalpha = 0.5\n[grid]\nh = 0.25\n")
    cfg = load_config(p)
    assert cfg["kernel"]["alpha"] == 0.5
    assert cfg["kernel"]["n"] == 3  # untouched keys keep defaults
    assert cfg["grid"]["h"] == 0.25
    assert cfg["anneal"]["budget"] == defaults()["anneal"]["budget"]


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/run.ini")


@pytest.mark.parametrize("text,frag", [
    ("[nope]\nx = 1\n", "nope"),
    ("[kernel]\nbeta = 1\n", "kernel.beta"),
    ("[kernel]\nalpha = fast\n", "kernel.alpha"),
    ("[anneal]\nbudget = 1\nbudget = 2\n", "duplicate"),
])
def test_rejects_with_offender_named(tmp_path, text, frag):
    with pytest.raises(ConfigError, match=frag):
        load_config(write(tmp_path, text))


@pytest.mark.parametrize("sec,key,val", [
    ("kernel", "n", 4),
    ("kernel", "alpha", 3.0),   # must be strictly inside (0, n)
    ("kernel", "alpha", -1.0),
    ("grid", "h", 0.0),
    ("anneal", "decay", 1.2),
    ("anneal", "w_boundary", -0.1),
    ("anneal", "budget", -5),
    ("anneal", "t0", -1.0),
    ("sweep", "samples", 0),
])
def test_validate_rejects(sec, key, val):
    cfg = defaults()
    cfg[sec][key] = val
    with pytest.raises(ConfigError):
        validate(cfg)


def test_validate_rejects_zero_weights():
    cfg = defaults()
    cfg["anneal"]["w_boundary"] = 0.0
    cfg["anneal"]["w_far"] = 0.0
    with pytest.raises(ConfigError, match="sum to zero"):
        validate(cfg)


def test_parse_masses():
    assert parse_masses("0.5, 1,2") == [0.5, 1.0, 2.0]
    for bad in ("", "1,zwei", "1,-2"):
        with pytest.raises(ConfigError):
            parse_masses(bad)


def test_parse_box():
    assert parse_box("auto", 3) is None
    assert parse_box("16,24,32", 3) == (16, 24, 32)
    for bad in ("16,24", "16,0,8", "a,b,c"):
        with pytest.raises(ConfigError):
            parse_box(bad, 3)


def test_help_lines_enumerate_schema():
    lines = help_lines()
    assert len(lines) == sum(len(keys) for keys in SCHEMA.values())
    assert any("anneal.budget" in ln and "200000" in ln for ln in lines)
