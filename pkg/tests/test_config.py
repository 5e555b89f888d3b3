import json

import pytest

from raysynth.config import ConfigError, load_config

MINIMAL = {"source": {"paths": "s.txt"}, "active_bs": [0], "active_areas": [0]}


def cfg_text(**over):
    doc = dict(MINIMAL)
    doc.update(over)
    return json.dumps(doc)


def test_minimal_defaults():
    cfg = load_config(cfg_text())
    assert cfg.selected_points == "all"
    assert cfg.bw == 100e6
    assert cfg.move is False and cfg.beams.enabled is False
    assert cfg.seed == 0 and cfg.f_up is None and cfg.band is None


def test_full_case_study_job():
    doc = dict(MINIMAL, source={"scene": "street.json"}, bs_elements=16, band=3.5e9,
               f_up=3.5e9, f_dn=60e9, move=True,
               movement={"speed": 20.0, "sample_interval": 1e-3, "n_samples": 1000},
               beams={"enabled": True, "n_beams": 64, "dl_source": {"scene": "street.json"},
                      "dl_band": 60e9, "dl_bs_elements": 64})
    cfg = load_config(json.dumps(doc))
    assert cfg.movement.area == 0
    assert cfg.beams.window == 25 and cfg.beams.horizon == 1


def test_move_without_speed_rejected():
    with pytest.raises(ConfigError, match="movement.speed"):
        load_config(cfg_text(move=True))


def test_movement_area_must_be_active():
    with pytest.raises(ConfigError, match="not an active area"):
        load_config(cfg_text(move=True, movement={"speed": 1.0, "area": 4}))


@pytest.mark.parametrize("over, where", [
    ({"bogus": 1}, "bogus"),
    ({"movement": {"sped": 1.0}}, "movement.sped"),
    ({"source": {"paths": "a", "scene": "b"}}, "source"),
    ({"active_bs": []}, "active_bs"),
    ({"bw": 0}, "bw"),
    ({"seed": -1}, "seed"),
    ({"seed": 2**64}, "seed"),
    ({"movement": {"speed": -1.0}}, "movement.speed"),
])
def test_invalid_fields_named(over, where):
    with pytest.raises(ConfigError, match=where):
        load_config(cfg_text(**over))


def test_not_json():
    with pytest.raises(ConfigError, match="JSON"):
        load_config("{nope")


def test_relative_sources_resolved(tmp_path):
    cfg = load_config(cfg_text(beams={"dl_source": {"scene": "dl.json"}}), base_dir=tmp_path)
    assert cfg.source.paths == str(tmp_path / "s.txt")
    assert cfg.beams.dl_source.scene == str(tmp_path / "dl.json")


def test_digest_ignores_output_only():
    a = load_config(cfg_text(output="x"))
    assert a.digest() == load_config(cfg_text(output="y")).digest()
    assert a.digest() != load_config(cfg_text(seed=1)).digest()
