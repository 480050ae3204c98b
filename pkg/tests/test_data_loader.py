import json

import pytest

from optomech.src.data_loader import list_presets, load_params, load_preset, read_json_file
from optomech.src.errors import ConfigError


def test_bundled_presets():
    assert {"cohen", "lecocq", "groblacher", "transfer-demo"} <= set(list_presets())


def test_every_preset_validates():
    for name in list_presets():
        assert load_preset(name).name == name


def test_unknown_preset():
    with pytest.raises(ConfigError) as info:
        load_preset("nope")
    assert info.value.key == "preset"


def test_overrides_apply_on_top_of_preset():
    params = load_params(preset="cohen", overrides={"init_phonons": 1.0})
    assert params.init_phonons == 1.0
    assert params.enhanced_coupling == load_preset("cohen").enhanced_coupling


def test_params_file(tmp_path):
    path = tmp_path / "set.json"
    path.write_text(json.dumps({"bare_coupling": 1e-4, "enhanced_coupling": 0.01,
                                "cavity_decay": 0.01, "mech_decay": 0.001}))
    assert load_params(params_file=path).enhanced_coupling == 0.01


def test_preset_and_file_are_exclusive(tmp_path):
    with pytest.raises(ConfigError):
        load_params(preset="cohen", params_file=tmp_path / "x.json")


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "bare_coupling": 1e-4,\n  "cavity_decay": \n}')
    with pytest.raises(ConfigError) as info:
        read_json_file(path)
    assert info.value.line == 4


def test_invalid_value_names_the_key():
    with pytest.raises(ConfigError) as info:
        load_params(preset="cohen", overrides={"cavity_decay": -1.0})
    assert info.value.key == "cavity_decay"
    assert "cavity_decay" in str(info.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as info:
        load_params(preset="cohen", overrides={"kappa": 0.1})
    assert info.value.key == "kappa"
