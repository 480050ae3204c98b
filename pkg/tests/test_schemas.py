import numpy as np
import pytest

from optomech.src.errors import ConfigError
from runner.schemas import (
    ExperimentConfig,
    merge_options,
    parse_grid,
    parse_param_overrides,
    parse_phases,
    require_seed,
    validate_config,
)


def test_grid_is_inclusive():
    np.testing.assert_allclose(parse_grid("-0.3:0.3:0.01"), np.linspace(-0.3, 0.3, 61))
    assert parse_grid("0.25").tolist() == [0.25]


def test_grid_tau_units():
    np.testing.assert_allclose(parse_grid("0:3tau:0.5tau", unit=2.0), [0, 1, 2, 3, 4, 5, 6])
    assert parse_grid("tau", unit=4.0).tolist() == [4.0]
    with pytest.raises(ConfigError):
        parse_grid("0:3tau:1")


def test_bad_grids():
    for text in ("0:1", "1:0:0.1", "0:1:-0.1", "a:b:c", "0:1:0.3"):
        with pytest.raises(ConfigError):
            parse_grid(text)


def test_phase_spellings():
    assert parse_phases(None) is None
    assert parse_phases("Optimal") == "optimal"
    assert parse_phases("0") == "zero"
    assert parse_phases("0, 2.0944, 0") == [0.0, 2.0944, 0.0]
    with pytest.raises(ConfigError):
        parse_phases("zero,one")


def test_param_overrides():
    assert parse_param_overrides(("init_phonons=1", "name=test")) == {"init_phonons": 1.0, "name": "test"}
    with pytest.raises(ConfigError):
        parse_param_overrides(("init_phonons",))


def test_flags_override_config():
    config = validate_config({"preset": "cohen", "instances": 100, "levels": [1.0, 2.0]})
    merged = merge_options(config, instances=50, levels=(), seed=None)
    assert merged.instances == 50
    assert merged.levels == [1.0, 2.0]
    assert merged.seed is None


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as info:
        validate_config({"bogus": 1})
    assert info.value.key == "bogus"
    with pytest.raises(ConfigError) as info:
        validate_config({"timing": -1})
    assert info.value.key == "timing"


def test_seed_required():
    with pytest.raises(ConfigError):
        require_seed(ExperimentConfig())
    assert require_seed(ExperimentConfig(seed=0)) == 0


def test_grid_keeps_the_requested_step():
    np.testing.assert_allclose(parse_grid("0:1:0.25"), [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ConfigError, match="does not divide"):
        parse_grid("0:1:0.3", key="deviations")
