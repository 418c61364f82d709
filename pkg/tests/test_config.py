import pytest

from nvgate.config import (
    ConfigError,
    config_digest,
    default_config,
    load_config,
    merge_config,
    parse_config,
)


def test_parse_floats_and_strings():
    cfg = parse_config("a.b = 1.5\nname = hello\n# comment\n\nc = -2e3")
    assert cfg == {"a.b": 1.5, "name": "hello", "c": -2000.0}


def test_parse_inline_comment():
    cfg = parse_config("key = 3.0  # trailing note")
    assert cfg["key"] == 3.0


def test_parse_rejects_missing_equals():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("ok = 1\nbroken line\n")


def test_parse_rejects_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("k = 1\nk = 2")


def test_parse_rejects_empty_value():
    with pytest.raises(ConfigError):
        parse_config("k = ")


def test_default_config_core_keys():
    cfg = default_config()
    assert cfg["level.g1_ghz"] == -2.87
    assert cfg["level.e1_ghz"] == 5.11
    assert cfg["dipole.f11"] == 0.0513
    assert cfg["lifetime.total_ns"] == 7.8
    assert cfg["lifetime.radiative_ns"] == 12.0


def test_merge_overrides_known_key():
    base = default_config()
    merged = merge_config(base, {"dipole.f11": 0.06})
    assert merged["dipole.f11"] == 0.06
    assert base["dipole.f11"] == 0.0513  # input untouched


def test_merge_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        merge_config(default_config(), {"nope.nothere": 1.0})


def test_digest_stable_and_sensitive():
    base = default_config()
    assert config_digest(base) == config_digest(dict(reversed(base.items())))
    changed = merge_config(base, {"dipole.f11": 0.06})
    assert config_digest(changed) != config_digest(base)


def test_load_config_roundtrip(tmp_path):
    p = tmp_path / "alt.cfg"
    p.write_text("x.y = 4.25\n")
    assert load_config(p) == {"x.y": 4.25}
