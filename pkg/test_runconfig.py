"""
Tests for run configuration parsing
"""

from pathlib import Path

import pytest

from errors import ConfigError
from models import Family
from runconfig import RunConfig, parse_config, print_config

SUITES = Path(__file__).parent / "suites"

SMALL = "\n".join([
    "[setting G3]",
    "Q = 3",
    "",
    "[profile b12]",
    "text = (bump 1 2)",
    "",
    "[instance euler]",
    "family = EulerHardy",
    "setting = G3",
    "p = 2",
    "alpha = 0",
    "profiles = b12",
    "",
    "[probe euler-sharp]",
    "instance = euler",
    "indices = 1e2, 1e4, 1e6",
    "",
    "[identity map]",
    "profile = b12",
    "Q = 5",
    "m = 3",
    "R = 4",
    "",
    "[instance stab]",
    "family = StabilityHardy  # trailing comment",
    "setting = G3",
    "p = 2",
    "alpha = -1",
    "R_grid = 0.5, 1.5, 3",
    "",
    "[instance sw]",
    "family = SuperweightHigherOrder",
    "setting = G3",
    "p = 2",
    "m = 1",
    "k = 2",
    "a = 1",
    "b = 1",
    "alpha = 2",
    "beta = 1",
    "",
    "[tolerances]",
    "quadrature = 1e-9",
    "",
    "[output]",
    "format = CSV",
    "path = out.csv",
])


def test_parse_small_config():
    config = parse_config(SMALL)
    assert config.setting("G3").Q == 3
    assert config.profile_text("b12").startswith("(profile (support 1.0 2.0)")
    euler = config.instance("euler")
    assert euler.family == Family.EULER_HARDY
    assert euler.params.p == 2.0 and euler.params.alpha == 0.0
    assert euler.profiles == ["b12"]
    assert config.probe("euler-sharp").indices == [100.0, 10000.0, 1000000.0]
    assert config.identity("map").m == 3
    assert config.instance("stab").params.R_grid == (0.5, 1.5, 3.0)
    assert config.instance("sw").params.k == 2
    assert config.order == [("instance", "euler"), ("probe", "euler-sharp"), ("identity", "map"),
                            ("instance", "stab"), ("instance", "sw")]
    assert config.tolerances.quadrature == 1e-9
    assert config.tolerances.probe_gap == 0.02
    assert config.output.format == "csv"
    assert config.output.path == "out.csv"


def test_round_trip():
    config = parse_config(SMALL)
    printed = print_config(config)
    again = parse_config(printed)
    assert again == config
    assert print_config(again) == printed
    assert again.config_hash() == config.config_hash()


def test_defaults():
    config = parse_config("[setting S]\nQ = 4\n")
    assert config == RunConfig(settings=config.settings)
    assert config.output.format == "json"
    assert config.tolerances.quadrature is None


def test_continuation_lines():
    text = "[profile two]\ntext = (add (bump 1 2)\n    (bump 3 4))\n"
    config = parse_config(text)
    assert config.profile_text("two").count("(breaks") == 1


def test_unresolved_reference():
    text = SMALL.replace("setting = G3\np = 2\nalpha = 0", "setting = fX\np = 2\nalpha = 0")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.reason == "unresolved setting reference 'fX' in 'euler'"
    assert info.value.line == 9
    assert info.value.column == 11


def test_unresolved_probe_instance():
    with pytest.raises(ConfigError) as info:
        parse_config("[probe p1]\ninstance = nowhere\nindices = 1, 2, 3\n")
    assert "unresolved instance reference 'nowhere' in 'p1'" in str(info.value)


def test_profile_syntax_error_position():
    with pytest.raises(ConfigError) as info:
        parse_config("[profile bad]\ntext = (bump 1 x)\n")
    assert info.value.line == 2
    assert info.value.column == 16


def test_profile_syntax_error_on_continuation_line():
    with pytest.raises(ConfigError) as info:
        parse_config("[profile bad]\ntext = (add (bump 1 2)\n  (zork 1))\n")
    assert info.value.line == 3


@pytest.mark.parametrize("text, line, column", [
    ("[frob x]\n", 1, 2),
    ("[setting]\nQ = 3\n", 1, 1),
    ("[tolerances extra]\n", 1, 13),
    ("Q = 3\n", 1, 1),
    ("[setting S]\nQ 3\n", 2, 1),
    ("[setting S]\nQ = three\n", 2, 5),
    ("[setting S]\nQ = 3\nQ = 4\n", 3, 1),
    ("[setting S]\nQ = 3\nfoo = 1\n", 3, 1),
    ("[setting S]\nQ = 3\n\n[setting S]\nQ = 4\n", 4, 1),
    ("[instance i]\nfamily = Frobnicate\nsetting = S\n", 2, 10),
])
def test_syntax_errors_carry_positions(text, line, column):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_validation_errors():
    with pytest.raises(ConfigError):
        parse_config("[setting S]\nQ = 0.5\n")
    with pytest.raises(ConfigError):
        parse_config("[tolerances]\nprobe_gap = -1\n")
    with pytest.raises(ConfigError):
        parse_config("[output]\nformat = xml\n")
    with pytest.raises(ConfigError):
        parse_config("[setting S]\n")


def test_missing_key_names_block():
    with pytest.raises(ConfigError) as info:
        parse_config("[profile p]\n")
    assert "[profile p] is missing 'text'" in str(info.value)


@pytest.mark.parametrize("name", ["minimal.cfg", "acceptance.cfg"])
def test_suites_parse(name):
    config = parse_config((SUITES / name).read_text(encoding="utf-8"))
    assert parse_config(print_config(config)) == config


def test_acceptance_suite_contents():
    config = parse_config((SUITES / "acceptance.cfg").read_text(encoding="utf-8"))
    assert len(config.instances) == 17
    assert len(config.probes) == 5
    assert len(config.identities) == 2
    assert config.tolerances.probe_gap == 0.02
    assert {i.family for i in config.instances} == set(Family)
