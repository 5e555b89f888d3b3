import json

import numpy as np
import pytest

from raysynth import cli
from raysynth.config import load_config
from raysynth.pipeline import run_generate, run_trace, run_validate
from raysynth.raypaths import parse_paths_file
from raysynth.tensorfile import read_tensor

SCENE = {
    "freq_hz": 3.5e9,
    "gamma_wall": -0.5,
    "buildings": [{"min": [-20, 15, 0], "max": [120, 25, 20]}],
    "arrays": [
        {"kind": "bs", "id": 0, "position": [40, 0, 6], "shape": [1, 4], "plane": "xz"},
        {"kind": "grid", "id": 0, "origin": [0, -5, 1.5], "spacing": 1.0, "rows": 1, "cols": 30},
    ],
}


def write_job(tmp_path, **over):
    (tmp_path / "scene.json").write_text(json.dumps(SCENE))
    doc = {"source": {"scene": "scene.json"}, "active_bs": [0], "active_areas": [0],
           "selected_points": [0, 5, 9], "movement": {"speed": 20.0, "n_samples": 40},
           "seed": 3, "output": str(tmp_path / "out")}
    doc.update(over)
    path = tmp_path / "job.json"
    path.write_text(json.dumps(doc))
    return path


def job(tmp_path, **over):
    path = write_job(tmp_path, **over)
    return load_config(path.read_text(), base_dir=tmp_path)


def test_static_tensor_shapes(tmp_path):
    m = run_generate(job(tmp_path, ue_elements=1), tmp_path / "o")
    up = read_tensor(tmp_path / "o" / "H_up_bs0_area0.dai6")
    assert up.shape == (3, 4, 1)
    np.testing.assert_array_equal(read_tensor(tmp_path / "o" / "points_bs0_area0.dai6"), [0, 5, 9])
    assert m["mode"] == "static"


def test_single_element_single_point(tmp_path):
    run_generate(job(tmp_path, selected_points=[2], bs_elements=1), tmp_path / "o")
    assert read_tensor(tmp_path / "o" / "H_dn_bs0_area0.dai6").shape == (1, 1, 1)


def test_manifest_matches_payload(tmp_path):
    m = run_generate(job(tmp_path), tmp_path / "o")
    for f in m["files"]:
        arr = read_tensor(tmp_path / "o" / f["name"])
        assert list(arr.shape) == f["dims"]
    on_disk = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert on_disk == m
    assert set(m) == {"version", "mode", "seed", "config_hash", "source_sha256", "files", "created"}


@pytest.mark.parametrize("mode", ["static", "mobility", "beams"])
def test_deterministic_outputs(tmp_path, mode):
    beams = {"enabled": mode == "beams", "window": 5, "n_beams": 8, "noise_var": 0.01}
    cfg = job(tmp_path, beams=beams)
    a = run_generate(cfg, tmp_path / "a", mode=mode)
    b = run_generate(cfg, tmp_path / "b", mode=mode)
    a.pop("created"), b.pop("created")
    assert a == b
    for f in a["files"]:
        assert (tmp_path / "a" / f["name"]).read_bytes() == (tmp_path / "b" / f["name"]).read_bytes()


def test_seed_changes_noisy_features(tmp_path):
    cfg = job(tmp_path, beams={"enabled": True, "window": 5, "n_beams": 8, "noise_var": 0.01})
    run_generate(cfg, tmp_path / "a", seed=1)
    run_generate(cfg, tmp_path / "b", seed=2)
    assert (tmp_path / "a" / "features.dai6").read_bytes() != (tmp_path / "b" / "features.dai6").read_bytes()


def test_beams_outputs(tmp_path):
    cfg = job(tmp_path, beams={"enabled": True, "window": 5, "n_beams": 8})
    run_generate(cfg, tmp_path / "o")
    feats = read_tensor(tmp_path / "o" / "features.dai6")
    labels = read_tensor(tmp_path / "o" / "labels.dai6")
    assert feats.shape == (40 - 5, 5, 4)
    assert labels.dtype == np.int64 and labels.shape == (35,)
    assert ((0 <= labels) & (labels < 8)).all()


def test_trace_round_trips(tmp_path):
    target = run_trace(job(tmp_path), tmp_path / "t")
    data = parse_paths_file(target.read_text())
    assert len(data.links) == 4 * 3


def test_validate_healthy(tmp_path):
    checks = run_validate(job(tmp_path))
    assert all(c.passed for c in checks), checks


def test_validate_reports_bad_paths_file(tmp_path):
    text = ("DATAAI6G-PATHS v1\nfreq_hz 3500000000\ngrid 0 0 0 0 1 1 1\n"
            "link tx 0 0 rx 0 0 0 npaths 1\n0 0 0 0 -1e-9 0 0\n")
    (tmp_path / "bad.txt").write_text(text)
    cfg = load_config(json.dumps({"source": {"paths": "bad.txt"}, "active_bs": [0],
                                  "active_areas": [0]}), base_dir=tmp_path)
    (check,) = run_validate(cfg)
    assert not check.passed and "line 5" in check.detail


class TestCli:
    def test_generate(self, tmp_path, capsys):
        path = write_job(tmp_path)
        assert cli.main(["generate", "--config", str(path), "--out", str(tmp_path / "g")]) == 0
        assert "H_up_bs0_area0.dai6" in capsys.readouterr().out
        assert (tmp_path / "g" / "manifest.json").exists()

    def test_mobility_and_seed_override(self, tmp_path):
        path = write_job(tmp_path)
        assert cli.main(["mobility", "--config", str(path), "--seed", "42"]) == 0
        m = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert m["seed"] == 42 and m["mode"] == "mobility"

    def test_beams(self, tmp_path):
        path = write_job(tmp_path, beams={"window": 5, "n_beams": 8})
        assert cli.main(["beams", "--config", str(path)]) == 0
        assert (tmp_path / "out" / "labels.csv").exists()

    def test_trace(self, tmp_path, capsys):
        path = write_job(tmp_path)
        assert cli.main(["trace", "--config", str(path), "--out", str(tmp_path / "t")]) == 0
        assert capsys.readouterr().out.strip().endswith("paths.txt")

    def test_validate_prints_lines(self, tmp_path, capsys):
        path = write_job(tmp_path)
        assert cli.main(["validate", "--config", str(path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 5 and all(l.startswith("PASS") for l in lines)

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "job.json"
        path.write_text(json.dumps({"source": {"paths": "x"}}))
        assert cli.main(["generate", "--config", str(path)]) == 2
        assert "active_bs" in capsys.readouterr().err

    def test_trajectory_off_grid_exit_code(self, tmp_path, capsys):
        path = write_job(tmp_path, movement={"speed": 20.0, "n_samples": 5000})
        assert cli.main(["mobility", "--config", str(path)]) == 1
        assert "leaves area grid" in capsys.readouterr().err

    def test_seed_range(self, tmp_path):
        with pytest.raises(SystemExit):
            cli.main(["generate", "--config", "x", "--seed", str(2**64)])
