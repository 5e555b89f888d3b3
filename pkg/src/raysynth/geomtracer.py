"""Desk-scale image-method ray tracer.

Traces the line-of-sight path and single-bounce specular reflections off
the ground plane and the faces of axis-aligned boxes, separately for every
antenna element. Output is a :class:`~raysynth.raypaths.ScenarioData`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .raypaths import (GridGeometry, Link, PathRecord, ScenarioData,
                       amplitude_to_dbm, normalize_phase)

SPEED_OF_LIGHT = 299_792_458.0

# Boxes are shrunk by this much (meters) for occlusion tests so rays that
# end on, or graze, a face are not reported as blocked by it.
_EPS = 1e-9

_PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


def wavelength(freq_hz: float) -> float:
    return SPEED_OF_LIGHT / freq_hz


@dataclass(frozen=True)
class Box:
    lo: Tuple[float, float, float]
    hi: Tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"box needs positive extent on every axis: {self.lo} {self.hi}")

    def contains(self, p) -> bool:
        return all(l < v < h for l, v, h in zip(self.lo, p, self.hi))


@dataclass(frozen=True)
class Scene:
    """Buildings, reflection coefficients and carrier for one tracing run.

    ``gamma_ground=None`` disables the ground plane. Reflection coefficients
    are real and in [-1, 0].
    """

    freq_hz: float
    buildings: Tuple[Box, ...] = ()
    gamma_ground: Optional[float] = -1.0
    gamma_wall: float = -1.0
    tx_power_mw: float = 1.0
    dipole: bool = False

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        if not self.freq_hz > 0:
            raise ValueError("freq_hz must be > 0")
        if not self.tx_power_mw > 0:
            raise ValueError("tx_power_mw must be > 0")
        for name in ("gamma_ground", "gamma_wall"):
            g = getattr(self, name)
            if g is not None and not -1.0 <= g <= 0.0:
                raise ValueError(f"{name} must be in [-1, 0], got {g}")

    @property
    def wavelength(self) -> float:
        return wavelength(self.freq_hz)


@lru_cache(maxsize=32)
def _box_arrays(boxes: Tuple[Box, ...]):
    if not boxes:
        return np.zeros((0, 3)), np.zeros((0, 3))
    lo = np.array([b.lo for b in boxes]) + _EPS
    hi = np.array([b.hi for b in boxes]) - _EPS
    return lo, hi


@dataclass(frozen=True)
class ElementLayout:
    """Planar array with half-wavelength spacing at ``freq_hz``.

    ``plane`` names the two axes the array spans; columns step along the
    first axis and rows along the second. Element index = row * cols + col.
    """

    position: Tuple[float, float, float]
    freq_hz: float
    rows: int = 1
    cols: int = 1
    plane: str = "xz"

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if self.plane not in _PLANES:
            raise ValueError(f"plane must be one of {sorted(_PLANES)}, got {self.plane!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one element")
        if not self.freq_hz > 0:
            raise ValueError("freq_hz must be > 0")

    @property
    def spacing(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.freq_hz)

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


def element_positions(layout: ElementLayout) -> np.ndarray:
    """Element coordinates, shape ``(rows * cols, 3)``."""
    a, b = _PLANES[layout.plane]
    r, c = np.divmod(np.arange(layout.n_elements), layout.cols)
    pos = np.tile(np.asarray(layout.position, dtype=float), (layout.n_elements, 1))
    pos[:, a] += c * layout.spacing
    pos[:, b] += r * layout.spacing
    return pos


@dataclass(frozen=True)
class UserGrid:
    """A user area: grid geometry plus the per-user array shape."""

    grid: GridGeometry
    rows: int = 1
    cols: int = 1
    plane: str = "xy"


def _segment_blocked(p, q, lo, hi) -> bool:
    """True if segment p->q passes through the interior of any box (slab test)."""
    if lo.shape[0] == 0:
        return False
    d = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - p) / d
        t2 = (hi - p) / d
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    # axis with no motion: inside the slab for all t, or never
    flat = d == 0
    inside = (lo <= p) & (p <= hi)
    tmin = np.where(flat, np.where(inside, -np.inf, np.inf), tmin)
    tmax = np.where(flat, np.where(inside, np.inf, -np.inf), tmax)
    t_enter = np.maximum(tmin.max(axis=1), 0.0)
    t_exit = np.minimum(tmax.min(axis=1), 1.0)
    return bool(np.any(t_enter < t_exit))


def _direction_angles(v) -> Tuple[float, float]:
    """Azimuth (from +x toward +y) and elevation of a direction, degrees."""
    x, y, z = v
    az = math.degrees(math.atan2(y, x))
    el = math.degrees(math.atan2(z, math.hypot(x, y)))
    return az, el


def dipole_gain(direction) -> float:
    """Half-wave dipole power gain for a vertical dipole, linear (peak 1.64)."""
    n = np.linalg.norm(direction)
    cos_t = direction[2] / n
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    if sin_t == 0.0:
        return 0.0
    return 1.64 * (math.cos(math.pi / 2 * cos_t) / sin_t) ** 2


def _reflectors(scene: Scene):
    """Yield (axis, plane coordinate, outward sign, face bounds, gamma)."""
    if scene.gamma_ground is not None and scene.gamma_ground != 0.0:
        yield 2, 0.0, 1.0, None, scene.gamma_ground
    if scene.gamma_wall == 0.0:
        return
    for box in scene.buildings:
        for axis in range(3):
            others = [a for a in range(3) if a != axis]
            bounds = [(box.lo[a], box.hi[a]) for a in others]
            yield axis, box.lo[axis], -1.0, (others, bounds), scene.gamma_wall
            yield axis, box.hi[axis], 1.0, (others, bounds), scene.gamma_wall


def _make_path(scene, points, n_refl, gamma_mag, gamma_arg):
    segs = [points[i + 1] - points[i] for i in range(len(points) - 1)]
    d = float(sum(np.linalg.norm(s) for s in segs))
    lam = scene.wavelength
    amp = math.sqrt(scene.tx_power_mw) * lam / (4.0 * math.pi * d) * gamma_mag ** n_refl
    if scene.dipole:
        amp *= math.sqrt(dipole_gain(segs[0]) * dipole_gain(segs[-1]))
    if amp == 0.0:
        return None
    phase = normalize_phase(-2.0 * math.pi * d / lam + n_refl * gamma_arg)
    aod_az, aod_el = _direction_angles(segs[0])
    aoa_az, aoa_el = _direction_angles(-segs[-1])
    return PathRecord(aod_az, aod_el, aoa_az, aoa_el, d / SPEED_OF_LIGHT,
                      phase, amplitude_to_dbm(amp))


def trace_link(scene: Scene, tx, rx, tx_id=(0, 0), rx_id=(0, 0, 0)) -> Link:
    """Trace LOS plus single-bounce specular paths between two points."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    if np.array_equal(tx, rx):
        raise ValueError("tx and rx coincide")
    for box in scene.buildings:
        if box.contains(tx):
            raise ValueError(f"tx {tuple(tx)} is inside building {box}")
        if box.contains(rx):
            raise ValueError(f"rx {tuple(rx)} is inside building {box}")
    lo, hi = _box_arrays(scene.buildings)
    below = scene.gamma_ground is not None and (tx[2] < 0 or rx[2] < 0)
    if below:
        raise ValueError("tx and rx must be above the ground plane")

    paths: List[PathRecord] = []
    if not _segment_blocked(tx, rx, lo, hi):
        p = _make_path(scene, [tx, rx], 0, 1.0, 0.0)
        if p is not None:
            paths.append(p)

    for axis, coord, outward, face, gamma in _reflectors(scene):
        st = (tx[axis] - coord) * outward
        sr = (rx[axis] - coord) * outward
        if st <= 0 or sr <= 0:
            continue
        image = tx.copy()
        image[axis] = 2.0 * coord - tx[axis]
        t = (coord - image[axis]) / (rx[axis] - image[axis])
        hit = image + t * (rx - image)
        hit[axis] = coord
        if face is not None:
            others, bounds = face
            if not all(b0 <= hit[a] <= b1 for a, (b0, b1) in zip(others, bounds)):
                continue
        if _segment_blocked(tx, hit, lo, hi) or _segment_blocked(hit, rx, lo, hi):
            continue
        p = _make_path(scene, [tx, hit, rx], 1, abs(gamma), math.pi if gamma < 0 else 0.0)
        if p is not None:
            paths.append(p)
    return Link(tuple(tx_id), tuple(rx_id), tuple(paths))


def trace_scenario(scene: Scene, tx_layouts: Mapping[int, ElementLayout],
                   rx_layouts: Mapping[int, UserGrid],
                   points: Optional[Mapping[int, Sequence[int]]] = None) -> ScenarioData:
    """Trace every (BS element, user element) pair independently.

    ``points`` optionally restricts which user points are traced per area.
    """
    links = []
    for bs in sorted(tx_layouts):
        tx_pos = element_positions(tx_layouts[bs])
        for area in sorted(rx_layouts):
            ug = rx_layouts[area]
            sel = range(ug.grid.n_points) if points is None or area not in points else points[area]
            for pt in sorted(sel):
                rx_layout = ElementLayout(tuple(ug.grid.position(pt)), scene.freq_hz,
                                          ug.rows, ug.cols, ug.plane)
                rx_pos = element_positions(rx_layout)
                for k, tp in enumerate(tx_pos):
                    for g, rp in enumerate(rx_pos):
                        links.append(trace_link(scene, tp, rp, (bs, k), (area, pt, g)))
    return ScenarioData.from_links(scene.freq_hz, {a: u.grid for a, u in rx_layouts.items()},
                                   links)


@dataclass
class SceneFile:
    """Parsed scene description: scene plus BS arrays and user grids."""

    scene: Scene
    bs: Dict[int, ElementLayout] = field(default_factory=dict)
    grids: Dict[int, UserGrid] = field(default_factory=dict)


def load_scene(text: str, freq_hz: Optional[float] = None) -> SceneFile:
    """Read a scene JSON document.

    Schema::

        {"freq_hz": 3.5e9, "tx_power_mw": 1.0, "gamma_ground": -1.0,
         "gamma_wall": -1.0, "dipole": false,
         "buildings": [{"min": [x, y, z], "max": [x, y, z]}, ...],
         "arrays": [
           {"kind": "bs", "id": 0, "position": [x, y, z], "shape": [1, 16], "plane": "xz"},
           {"kind": "grid", "id": 0, "origin": [x, y, z], "spacing": 1.0,
            "rows": 1, "cols": 40, "shape": [1, 1], "plane": "xy"}]}

    ``freq_hz`` overrides the file's carrier (array spacing follows it).
    """
    doc = json.loads(text)
    known = {"freq_hz", "tx_power_mw", "gamma_ground", "gamma_wall", "dipole",
             "buildings", "arrays"}
    extra = set(doc) - known
    if extra:
        raise ValueError(f"unknown scene keys: {sorted(extra)}")
    freq = float(freq_hz if freq_hz is not None else doc["freq_hz"])
    scene = Scene(
        freq_hz=freq,
        buildings=tuple(Box(b["min"], b["max"]) for b in doc.get("buildings", [])),
        gamma_ground=doc.get("gamma_ground", -1.0),
        gamma_wall=doc.get("gamma_wall", -1.0),
        tx_power_mw=doc.get("tx_power_mw", 1.0),
        dipole=bool(doc.get("dipole", False)),
    )
    out = SceneFile(scene)
    for arr in doc.get("arrays", []):
        rows, cols = arr.get("shape", [1, 1])
        ident = int(arr["id"])
        if arr["kind"] == "bs":
            if ident in out.bs:
                raise ValueError(f"duplicate bs id {ident}")
            out.bs[ident] = ElementLayout(tuple(arr["position"]), freq, rows, cols,
                                          arr.get("plane", "xz"))
        elif arr["kind"] == "grid":
            if ident in out.grids:
                raise ValueError(f"duplicate grid id {ident}")
            geom = GridGeometry(tuple(arr["origin"]), float(arr["spacing"]),
                                int(arr["rows"]), int(arr["cols"]))
            out.grids[ident] = UserGrid(geom, rows, cols, arr.get("plane", "xy"))
        else:
            raise ValueError(f"unknown array kind {arr['kind']!r}")
    return out
