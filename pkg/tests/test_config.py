from pathlib import Path

import numpy as np
import pytest

from fraxterp.config import build_scenario, dump_config, load_config, parse_config, parse_p
from fraxterp.errors import ConfigError
from fraxterp.rb import evaluate, uniform_grid
from fraxterp.scenarios import builtin

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
PAIRS = [("example1.yaml", "example1"), ("halfline.yaml", "halfline"),
         ("example1-pullback.yaml", "pullback")]


def samples(s, n=257):
    x = uniform_grid(s.operator.scheme, n - 1)
    return x, evaluate(s.fixed_point(), x)


@pytest.mark.parametrize("cfg_name,builtin_name", PAIRS)
def test_configs_match_builtins(cfg_name, builtin_name):
    s, _ = load_config(CONFIGS / cfg_name)
    x, v = samples(s)
    x2, v2 = samples(builtin(builtin_name))
    assert np.array_equal(x, x2) and np.array_equal(v, v2)


@pytest.mark.parametrize("builtin_name", ["example1", "halfline", "pullback"])
def test_dump_round_trip(builtin_name, tmp_path):
    s = builtin(builtin_name)
    path = tmp_path / "s.yaml"
    dump_config(s, path)
    again, _ = load_config(path)
    assert np.array_equal(samples(s)[1], samples(again)[1])


def test_unknown_key_reports_line():
    text = (CONFIGS / "example1.yaml").read_text().replace("scale:", "scal:", 1)
    with pytest.raises(ConfigError) as err:
        parse_config(text, "x.yaml")
    diag = "\n".join(err.value.diagnostics)
    assert "Extra inputs are not permitted" in diag and diag.startswith("line ")


def test_yaml_syntax_error_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("name: [unclosed\n", "bad.yaml")
    assert any("line" in d for d in err.value.diagnostics)


def test_non_contractive_scale_is_config_error():
    text = (CONFIGS / "example1.yaml").read_text()
    cfg = parse_config(text.replace("0.8", "1.2", 1))
    with pytest.raises(ConfigError) as err:
        build_scenario(cfg, CONFIGS)
    assert "NotContractiveError" in "\n".join([str(err.value)] + err.value.diagnostics)


def test_exactly_one_construction():
    with pytest.raises(ConfigError):
        build_scenario(parse_config("name: empty\n"))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config(CONFIGS / "does-not-exist.yaml")


def test_parse_p():
    assert parse_p("inf") == float("inf") and parse_p(2) == 2.0 and parse_p("0.5") == 0.5
