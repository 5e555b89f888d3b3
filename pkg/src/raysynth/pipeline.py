"""Job orchestration: load a source, synthesize channels, write tensors."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from . import tensorfile
from .beamharness import (RateParams, awgn_observe, build_dataset, labels_csv,
                          make_codebook)
from .chansynth import CarrierPair, bin_paths, synth_matrix, synth_uldl
from .config import JobConfig, Source
from .geomtracer import load_scene, trace_scenario
from .mobility import (MovementSpec, VirtualSample, sample_trajectory, synth_mobile,
                       synth_mobile_series)
from .raypaths import ScenarioData, parse_paths_file, write_paths_file

log = logging.getLogger(__name__)

MANIFEST_VERSION = 1


def _points_for(cfg: JobConfig, area: int, n_points: int) -> List[int]:
    if cfg.selected_points == "all":
        return list(range(n_points))
    return sorted(set(cfg.selected_points))


def _movement_spec(cfg: JobConfig, speed: Optional[float] = None) -> MovementSpec:
    mv = cfg.movement
    return MovementSpec(mv.area, mv.start_point, mv.direction,
                        mv.speed if speed is None else speed,
                        mv.sample_interval, mv.n_samples)


def _needed_points(cfg: JobConfig, grids, mode: str) -> Dict[int, List[int]]:
    if mode == "static":
        return {a: _points_for(cfg, a, grids[a].grid.n_points) for a in cfg.active_areas}
    spec = _movement_spec(cfg)
    samples = sample_trajectory(spec, grids[spec.area].grid)
    return {spec.area: sorted({spec.start_point} | {s.point for s in samples})}


def load_source(src: Source, cfg: JobConfig, band: Optional[float] = None,
                mode: str = "static") -> ScenarioData:
    """Parse a paths file, or trace a scene for the points the job needs."""
    loc = Path(src.location)
    text = loc.read_text(encoding="utf-8")
    if src.paths is not None:
        return parse_paths_file(text)
    sf = load_scene(text, freq_hz=band)
    missing = [b for b in cfg.active_bs if b not in sf.bs]
    if missing:
        raise ValueError(f"scene {loc} has no base station {missing}")
    missing = [a for a in cfg.active_areas if a not in sf.grids]
    if missing:
        raise ValueError(f"scene {loc} has no user area {missing}")
    grids = {a: sf.grids[a] for a in cfg.active_areas}
    points = _needed_points(cfg, grids, mode)
    grids = {a: g for a, g in grids.items() if a in points}
    log.info("tracing %s at %.6g Hz", loc, sf.scene.freq_hz)
    return trace_scenario(sf.scene, {b: sf.bs[b] for b in cfg.active_bs}, grids, points)


def _check_source(data: ScenarioData, cfg: JobConfig, where: str) -> None:
    bss = set(data.bs_indices())
    for b in cfg.active_bs:
        if b not in bss:
            raise ValueError(f"{where}: base station {b} not present")
    for a in cfg.active_areas:
        if a not in data.grids:
            raise ValueError(f"{where}: user area {a} not present")


def carriers_for(cfg: JobConfig, data: ScenarioData) -> CarrierPair:
    band = cfg.band if cfg.band is not None else data.freq_hz
    return CarrierPair(cfg.f_up if cfg.f_up is not None else band,
                       cfg.f_dn if cfg.f_dn is not None else band)


def trajectory(cfg: JobConfig, data: ScenarioData, speed: Optional[float] = None) -> List[VirtualSample]:
    spec = _movement_spec(cfg, speed)
    return sample_trajectory(spec, data.grids[spec.area])


def static_tensors(cfg: JobConfig, data: ScenarioData, bs: int, area: int):
    carriers = carriers_for(cfg, data)
    pts = _points_for(cfg, area, data.grids[area].n_points)
    ups, dns = [], []
    for p in pts:
        up, dn = synth_matrix(data, bs, area, p, cfg.bw, carriers, cfg.bs_elements, cfg.ue_elements)
        ups.append(up.H)
        dns.append(dn.H)
    return np.array(pts, dtype=np.int64), np.stack(ups), np.stack(dns)


def mobile_tensors(cfg: JobConfig, data: ScenarioData, bs: int, carriers: CarrierPair,
                   n_bs: Optional[int] = None, n_ue: Optional[int] = None):
    samples = trajectory(cfg, data)
    up, dn = synth_mobile_series(data, samples, bs, cfg.bw, carriers, n_bs, n_ue)
    return samples, up, dn


class _Writer:
    def __init__(self, out: Path):
        self.out = out
        self.files: List[dict] = []
        out.mkdir(parents=True, exist_ok=True)

    def tensor(self, name: str, arr: np.ndarray) -> None:
        digest = tensorfile.write_tensor(self.out / name, arr)
        code = tensorfile._code_for(np.asarray(arr))
        self.files.append({"name": name, "dtype": tensorfile.DTYPE_NAMES[code],
                           "dims": list(np.shape(arr)), "sha256": digest})

    def text(self, name: str, text: str, dtype: str, dims: Sequence[int]) -> None:
        data = text.encode("utf-8")
        (self.out / name).write_bytes(data)
        self.files.append({"name": name, "dtype": dtype, "dims": list(dims),
                           "sha256": hashlib.sha256(data).hexdigest()})


def _source_digest(src: Source) -> str:
    return hashlib.sha256(Path(src.location).read_bytes()).hexdigest()


def default_mode(cfg: JobConfig) -> str:
    if cfg.beams.enabled:
        return "beams"
    return "mobility" if cfg.move else "static"


def run_generate(cfg: JobConfig, out_dir: Union[str, Path, None] = None,
                 mode: Optional[str] = None, seed: Optional[int] = None) -> dict:
    """Run a job and write tensors plus ``manifest.json``; returns the manifest."""
    mode = mode or default_mode(cfg)
    if mode not in ("static", "mobility", "beams"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "static" and (cfg.movement is None or cfg.movement.speed is None):
        raise ValueError(f"{mode} mode needs movement.speed in the config")
    seed = cfg.seed if seed is None else seed
    out = Path(out_dir if out_dir is not None else cfg.output)
    w = _Writer(out)

    data = load_source(cfg.source, cfg, cfg.band, mode)
    _check_source(data, cfg, str(cfg.source.location))
    sources = {"source": _source_digest(cfg.source)}

    if mode == "static":
        for bs in cfg.active_bs:
            for area in cfg.active_areas:
                pts, up, dn = static_tensors(cfg, data, bs, area)
                w.tensor(f"points_bs{bs}_area{area}.dai6", pts)
                w.tensor(f"H_up_bs{bs}_area{area}.dai6", up)
                w.tensor(f"H_dn_bs{bs}_area{area}.dai6", dn)
    elif mode == "mobility":
        carriers = carriers_for(cfg, data)
        for bs in cfg.active_bs:
            samples, up, dn = mobile_tensors(cfg, data, bs, carriers, cfg.bs_elements, cfg.ue_elements)
            if bs == cfg.active_bs[0]:
                w.tensor("trajectory_points.dai6", np.array([s.point for s in samples], dtype=np.int64))
                w.tensor("trajectory_dd.dai6", np.array([s.dd for s in samples], dtype=float))
            w.tensor(f"H_up_bs{bs}_move.dai6", up)
            w.tensor(f"H_dn_bs{bs}_move.dai6", dn)
    else:
        bc = cfg.beams
        bs = cfg.active_bs[0]
        carriers = carriers_for(cfg, data)
        _, up, _ = mobile_tensors(cfg, data, bs, carriers, cfg.bs_elements, 1)
        if bc.dl_source is not None:
            dl_data = load_source(bc.dl_source, cfg, bc.dl_band, mode)
            _check_source(dl_data, cfg, str(bc.dl_source.location))
            sources["dl_source"] = _source_digest(bc.dl_source)
        else:
            dl_data = data
        _, _, dn = mobile_tensors(cfg, dl_data, bs, carriers, bc.dl_bs_elements, 1)
        ul_series = [awgn_observe(h, 1.0, bc.noise_var, seed=[seed, t])
                     for t, h in enumerate(up[:, :, 0])]
        dn_series = list(dn[:, :, 0])
        codebook = make_codebook(bc.n_beams, dn.shape[1])
        ds = build_dataset(ul_series, dn_series, codebook, RateParams(bc.bandwidth, bc.snr),
                           bc.window, bc.horizon)
        w.tensor("features.dai6", np.stack([s.features for s in ds]))
        w.tensor("labels.dai6", np.array([s.label for s in ds], dtype=np.int64))
        w.text("labels.csv", labels_csv(ds), "csv", [len(ds)])

    manifest = {
        "version": MANIFEST_VERSION,
        "mode": mode,
        "seed": seed,
        "config_hash": cfg.digest(),
        "source_sha256": sources,
        "files": w.files,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def run_trace(cfg: JobConfig, out_dir: Union[str, Path, None] = None,
              name: str = "paths.txt") -> Path:
    """Trace the config's scene source and write it in the paths format."""
    if cfg.source.scene is None:
        raise ValueError("trace needs a scene source")
    data = load_source(cfg.source, cfg, cfg.band, "static")
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    target = out / name
    target.write_text(write_paths_file(data), encoding="utf-8")
    return target


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _links_in_scope(cfg: JobConfig, data: ScenarioData):
    areas = set(cfg.active_areas)
    bss = set(cfg.active_bs)
    for key in sorted(data.links):
        if key[0][0] in bss and key[1][0] in areas:
            yield data.links[key]


def run_validate(cfg: JobConfig) -> List[Check]:
    """Run the built-in invariant checks against the configured source."""
    checks: List[Check] = []
    try:
        data = load_source(cfg.source, cfg, cfg.band, "static")
        _check_source(data, cfg, str(cfg.source.location))
    except Exception as err:  # report, don't raise
        return [Check("source loads", False, f"{type(err).__name__}: {err}")]
    links = list(_links_in_scope(cfg, data))
    checks.append(Check("source loads", True, f"{len(links)} links, {data.n_paths} paths"))

    bad = [l.key for l in links if sum(t.count for t in bin_paths(l, cfg.bw).taps) != len(l)]
    checks.append(Check("bin conservation", not bad,
                        f"{len(links)} links" if not bad else f"mismatch at {bad[:3]}"))

    f = carriers_for(cfg, data).f_dn
    equal = CarrierPair(f, f)
    bad = []
    for l in links:
        up, dn = synth_uldl(l, cfg.bw, equal)
        if up != dn:
            bad.append(l.key)
    checks.append(Check("UL=DL at equal carriers", not bad,
                        f"f = {f:g} Hz" if not bad else f"differs at {bad[:3]}"))

    checks.append(_zero_speed_check(cfg, data))

    m = cfg.beams.dl_bs_elements or cfg.bs_elements or 64
    cb = make_codebook(cfg.beams.n_beams, m)
    err = float(np.max(np.abs(np.linalg.norm(cb.beams, axis=1) - 1.0)))
    checks.append(Check("codebook norms", err <= 1e-12, f"N={cb.N} M={cb.M} max |norm-1| = {err:.3g}"))
    return checks


def _zero_speed_check(cfg: JobConfig, data: ScenarioData) -> Check:
    name = "zero-speed equivalence"
    carriers = carriers_for(cfg, data)
    area = cfg.movement.area if cfg.movement and cfg.movement.area is not None else cfg.active_areas[0]
    start = cfg.movement.start_point if cfg.movement else 0
    mv = MovementSpec(area, start, cfg.movement.direction if cfg.movement else "right", 0.0, 1e-3, 3)
    try:
        samples = sample_trajectory(mv, data.grids[area])
        bs = cfg.active_bs[0]
        ref_up, ref_dn = synth_matrix(data, bs, area, start, cfg.bw, carriers,
                                      cfg.bs_elements, cfg.ue_elements)
        for s in samples:
            up, dn = synth_mobile(data, s, bs, cfg.bw, carriers, cfg.bs_elements, cfg.ue_elements)
            if not (np.array_equal(up.H, ref_up.H) and np.array_equal(dn.H, ref_dn.H)):
                return Check(name, False, f"sample {s.kappa} differs from static channel")
    except Exception as err:
        return Check(name, False, f"{type(err).__name__}: {err}")
    return Check(name, True, f"bs {bs} area {area} point {start}")
