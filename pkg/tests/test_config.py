import pytest

from searchtrack.config import (
    PRESETS,
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    echo_config,
    get_preset,
    load_config,
    with_overrides,
)


def test_defaults():
    cfg = config_from_dict({})
    assert cfg.filter.r_B == 0.005
    assert cfg.sensor.clutter_rate == 0.2
    assert cfg.steps == 200
    assert cfg.planner.horizon == 3


@pytest.mark.parametrize("name, n_objects, extent", [
    ("scenario1", 3, 1000), ("scenario2", 4, 1000), ("scenario3", 4, 1000), ("scenario4", 20, 2000)])
def test_preset_structure(name, n_objects, extent):
    cfg = get_preset(name)
    assert len(cfg.objects) == n_objects
    assert cfg.area.xmax - cfg.area.xmin == extent
    assert cfg.steps == 200


def test_late_births():
    s2 = {o.label: o.birth for o in get_preset("scenario2").objects}
    assert s2["C1"] > 0 and s2["D1"] > 0 and s2["A1"] == 0
    assert any(o.birth > 0 for o in get_preset("scenario3").objects)


def test_preset_agent_count_configurable():
    cfg = config_from_dict({"preset": "scenario2", "agents": {"count": 7}})
    assert cfg.agents.count == 7
    assert len(cfg.objects) == 4


def test_negative_steps_rejected():
    with pytest.raises(ConfigError, match="steps"):
        config_from_dict({"steps": -3})


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="sensor.range"):
        config_from_dict({"sensor": {"range": 3}})


def test_type_error_named():
    with pytest.raises(ConfigError, match="agents.count"):
        config_from_dict({"agents": {"count": "three"}})


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown scenario"):
        get_preset("scenario9")


def test_yaml_round_trip(tmp_path):
    for name in PRESETS:
        cfg = get_preset(name)
        path = tmp_path / f"{name}.yaml"
        path.write_text(echo_config(cfg))
        again = load_config(path)
        assert echo_config(again) == echo_config(cfg)


def test_overrides():
    cfg = with_overrides(get_preset("scenario1"), **{"agents.count": 5, "sensor.r_d": 150.0})
    assert cfg.agents.count == 5 and cfg.sensor.r_d == 150.0
    with pytest.raises(ConfigError):
        with_overrides(cfg, **{"agents.bogus": 1})


def test_birth_defaults_follow_area():
    cfg = ScenarioConfig()
    assert cfg.birth_mean.tolist() == [500, 0, 500, 0]
    assert cfg.birth_cov.diagonal().tolist() == [500**2, 100, 500**2, 100]


def test_invalid_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("steps: [1,\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(p)
