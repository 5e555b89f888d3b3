"""Per-path ray data model and the line-oriented paths text format.

A paths file looks like::

    DATAAI6G-PATHS v1
    freq_hz 3500000000
    grid 0 0 0 1.5 1 4 20
    link tx 0 0 rx 0 3 0 npaths 2
    <aod_az> <aod_el> <aoa_az> <aoa_el> <delay_s> <phase_deg> <power_dbm>
    ...

Angles are degrees, delay is seconds, phase is degrees in the file and
radians in memory. Blank lines and ``#`` comments are ignored on input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from functools import cached_property
from typing import Dict, Iterable, Tuple

import numpy as np

MAGIC = "DATAAI6G-PATHS v1"

TxId = Tuple[int, int]
RxId = Tuple[int, int, int]
LinkKey = Tuple[TxId, RxId]

# pi to 60 digits; phase conversion is done in decimal so that
# degrees -> radians -> degrees is exact at 17 significant digits.
_PI = Decimal("3.14159265358979323846264338327950288419716939937510582097494")
_TWO_PI = 2.0 * math.pi


class PathsFormatError(ValueError):
    """Raised for malformed paths files. Carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def fmt_real(x: float) -> str:
    """Canonical 17-significant-digit text for a binary64 value."""
    return format(float(x), ".17g")


def dbm_to_amplitude(p: float) -> float:
    """Convert path power in dBm to a linear amplitude in sqrt(mW)."""
    if not math.isfinite(p):
        raise ValueError(f"power must be finite, got {p!r}")
    return 10.0 ** (p / 20.0)


def amplitude_to_dbm(a: float) -> float:
    if not a > 0.0 or not math.isfinite(a):
        raise ValueError(f"amplitude must be positive and finite, got {a!r}")
    return 20.0 * math.log10(a)


def _normalize_az(az: float) -> float:
    az = az % 360.0
    if az >= 360.0:  # -tiny % 360 rounds up to 360
        az = 0.0
    return az + 0.0  # drop negative zero


def _deg_text_to_rad(text: str) -> float:
    with localcontext() as ctx:
        ctx.prec = 50
        deg = Decimal(text) % 360
        if deg < 0:
            deg += 360
        rad = float(deg * _PI / 180)
    if rad >= _TWO_PI:
        rad = 0.0
    return rad + 0.0


def _rad_to_deg_text(rad: float) -> str:
    if rad == 0.0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 50
        text = format(Decimal(rad) * 180 / _PI, ".17g")
    # The nearest 17-digit decimal in degrees always maps back to the same
    # double; the check makes a violated edge case fail loudly.
    if _deg_text_to_rad(text) != rad:
        raise ArithmeticError(f"phase {rad!r} does not round-trip through degrees")
    return text


def direction_vectors(az_deg, el_deg) -> np.ndarray:
    """Unit vectors for azimuth/elevation pairs in degrees, shape (..., 3)."""
    az = np.radians(np.asarray(az_deg, dtype=float))
    el = np.radians(np.asarray(el_deg, dtype=float))
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def normalize_phase(phase: float) -> float:
    """Wrap a phase in radians into [0, 2*pi)."""
    phase = phase % _TWO_PI
    if phase >= _TWO_PI:
        phase = 0.0
    return phase + 0.0


@dataclass(frozen=True)
class PathRecord:
    """One multipath component between a transmit and a receive element.

    Angles are degrees, ``delay`` seconds, ``phase`` radians in [0, 2*pi)
    and ``power_dbm`` the received path power.
    """

    aod_az: float
    aod_el: float
    aoa_az: float
    aoa_el: float
    delay: float
    phase: float
    power_dbm: float

    def __post_init__(self):
        vals = (self.aod_az, self.aod_el, self.aoa_az, self.aoa_el,
                self.delay, self.phase, self.power_dbm)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite field in {self!r}")
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay!r}")
        for name in ("aod_el", "aoa_el"):
            if not -90.0 <= getattr(self, name) <= 90.0:
                raise ValueError(f"{name} must be in [-90, 90], got {getattr(self, name)!r}")
        object.__setattr__(self, "aod_az", _normalize_az(float(self.aod_az)))
        object.__setattr__(self, "aoa_az", _normalize_az(float(self.aoa_az)))
        object.__setattr__(self, "phase", normalize_phase(float(self.phase)))

    @property
    def amplitude(self) -> float:
        return dbm_to_amplitude(self.power_dbm)


@dataclass(frozen=True)
class Link:
    """Ordered path list for one (BS element, user element) pair.

    Paths are stably sorted by delay on construction.
    """

    tx_id: TxId
    rx_id: RxId
    paths: Tuple[PathRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tx_id", tuple(int(i) for i in self.tx_id))
        object.__setattr__(self, "rx_id", tuple(int(i) for i in self.rx_id))
        if len(self.tx_id) != 2 or len(self.rx_id) != 3:
            raise ValueError(f"bad link ids tx={self.tx_id} rx={self.rx_id}")
        object.__setattr__(self, "paths", tuple(sorted(self.paths, key=lambda p: p.delay)))

    @property
    def key(self) -> LinkKey:
        return (self.tx_id, self.rx_id)

    def __len__(self) -> int:
        return len(self.paths)

    @cached_property
    def arrays(self) -> Dict[str, np.ndarray]:
        """Column arrays of the path fields (delay-sorted), computed once."""
        p = self.paths
        return {
            "delay": np.array([r.delay for r in p], dtype=float),
            "phase": np.array([r.phase for r in p], dtype=float),
            "amplitude": np.array([r.amplitude for r in p], dtype=float),
            "aoa_az": np.array([r.aoa_az for r in p], dtype=float),
            "aoa_el": np.array([r.aoa_el for r in p], dtype=float),
            "arrival": direction_vectors([r.aoa_az for r in p], [r.aoa_el for r in p]),
        }


@dataclass(frozen=True)
class GridGeometry:
    """Regular user grid of one area: point index = row * cols + col.

    Columns step along +x and rows along +y, both by ``ds`` meters.
    """

    origin: Tuple[float, float, float]
    ds: float
    rows: int
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        if not (self.ds > 0 and math.isfinite(self.ds)):
            raise ValueError(f"grid spacing must be > 0, got {self.ds!r}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have at least one point, got {self.rows}x{self.cols}")

    @property
    def n_points(self) -> int:
        return self.rows * self.cols

    def row_col(self, point: int) -> Tuple[int, int]:
        if not 0 <= point < self.n_points:
            raise IndexError(f"point {point} outside grid of {self.n_points} points")
        return divmod(point, self.cols)

    def index(self, row: int, col: int) -> int:
        return row * self.cols + col

    def position(self, point: int) -> np.ndarray:
        row, col = self.row_col(point)
        return np.asarray(self.origin) + np.array([col * self.ds, row * self.ds, 0.0])


@dataclass(frozen=True)
class ScenarioData:
    """All traced links of a scenario plus the band and the user grids."""

    freq_hz: float
    grids: Dict[int, GridGeometry] = field(default_factory=dict)
    links: Dict[LinkKey, Link] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.freq_hz > 0 and math.isfinite(self.freq_hz)):
            raise ValueError(f"freq_hz must be > 0, got {self.freq_hz!r}")
        for key, link in self.links.items():
            if key != link.key:
                raise ValueError(f"link stored under {key} has key {link.key}")
            area = link.rx_id[0]
            if area not in self.grids:
                raise ValueError(f"link {key} references area {area} without grid geometry")

    @classmethod
    def from_links(cls, freq_hz: float, grids: Dict[int, GridGeometry],
                   links: Iterable[Link]) -> "ScenarioData":
        table: Dict[LinkKey, Link] = {}
        for link in links:
            if link.key in table:
                raise ValueError(f"duplicate link {link.key}")
            table[link.key] = link
        return cls(freq_hz, dict(grids), table)

    @property
    def n_paths(self) -> int:
        return sum(len(l) for l in self.links.values())

    def bs_indices(self) -> list[int]:
        return sorted({k[0][0] for k in self.links})

    def tx_elements(self, bs: int) -> list[int]:
        return sorted({k[0][1] for k in self.links if k[0][0] == bs})

    def rx_elements(self, area: int, point: int) -> list[int]:
        return sorted({k[1][2] for k in self.links if k[1][:2] == (area, point)})

    def get(self, bs: int, k: int, area: int, point: int, g: int) -> Link:
        try:
            return self.links[((bs, k), (area, point, g))]
        except KeyError:
            raise KeyError(f"no link for bs {bs} element {k} -> "
                           f"area {area} point {point} element {g}") from None


def _parse_ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise PathsFormatError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def parse_paths_file(text: str) -> ScenarioData:
    """Parse paths-format text into a :class:`ScenarioData`."""
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines or lines[0][1] != MAGIC:
        raise PathsFormatError(f"missing header {MAGIC!r}", lines[0][0] if lines else 1)
    if len(lines) < 2 or lines[1][1].split()[0] != "freq_hz":
        raise PathsFormatError("missing freq_hz line", lines[1][0] if len(lines) > 1 else 1)

    n, ln = lines[1]
    tok = ln.split()
    if len(tok) != 2:
        raise PathsFormatError("freq_hz takes one value", n)
    try:
        freq = float(tok[1])
    except ValueError:
        raise PathsFormatError(f"bad frequency {tok[1]!r}", n) from None

    grids: Dict[int, GridGeometry] = {}
    links: Dict[LinkKey, Link] = {}
    idx = 2
    while idx < len(lines) and lines[idx][1].startswith("grid"):
        n, ln = lines[idx]
        tok = ln.split()
        if len(tok) != 8:
            raise PathsFormatError("grid line needs 7 values", n)
        area = _parse_ints(tok[1:2], n)[0]
        rows, cols = _parse_ints(tok[6:8], n)
        try:
            ox, oy, oz, ds = (float(t) for t in tok[2:6])
            geom = GridGeometry((ox, oy, oz), ds, rows, cols)
        except ValueError as err:
            raise PathsFormatError(str(err), n) from None
        if area in grids:
            raise PathsFormatError(f"duplicate grid for area {area}", n)
        grids[area] = geom
        idx += 1

    while idx < len(lines):
        n, ln = lines[idx]
        tok = ln.split()
        if (len(tok) != 10 or tok[0] != "link" or tok[1] != "tx"
                or tok[4] != "rx" or tok[8] != "npaths"):
            raise PathsFormatError(f"expected link section header, got {ln!r}", n)
        bs, elem = _parse_ints(tok[2:4], n)
        area, point, relem = _parse_ints(tok[5:8], n)
        (count,) = _parse_ints(tok[9:10], n)
        if count < 0:
            raise PathsFormatError("npaths must be >= 0", n)
        key = ((bs, elem), (area, point, relem))
        if key in links:
            raise PathsFormatError(f"duplicate link section {key}", n)
        if area not in grids:
            raise PathsFormatError(f"area {area} has no grid line", n)
        if point >= grids[area].n_points or point < 0:
            raise PathsFormatError(f"point {point} outside grid of area {area}", n)
        paths = []
        for j in range(count):
            idx += 1
            if idx >= len(lines):
                raise PathsFormatError(f"section declares {count} paths, found {j}", n)
            pn, pl = lines[idx]
            ptok = pl.split()
            if len(ptok) != 7:
                raise PathsFormatError(f"path line needs 7 values, got {len(ptok)}", pn)
            try:
                vals = [float(t) for t in ptok]
                phase = _deg_text_to_rad(ptok[5])
                paths.append(PathRecord(vals[0], vals[1], vals[2], vals[3],
                                        vals[4], phase, vals[6]))
            except (ValueError, ArithmeticError) as err:
                raise PathsFormatError(str(err), pn) from None
        links[key] = Link(key[0], key[1], tuple(paths))
        idx += 1

    try:
        return ScenarioData(freq, grids, links)
    except ValueError as err:
        raise PathsFormatError(str(err)) from None


def write_paths_file(data: ScenarioData) -> str:
    """Serialize to canonical text: sorted grids and links, 17 digits."""
    out = [MAGIC, f"freq_hz {fmt_real(data.freq_hz)}"]
    for area in sorted(data.grids):
        g = data.grids[area]
        out.append("grid {} {} {} {} {} {} {}".format(
            area, *(fmt_real(v) for v in g.origin), fmt_real(g.ds), g.rows, g.cols))
    for key in sorted(data.links):
        link = data.links[key]
        (bs, elem), (area, point, relem) = key
        out.append(f"link tx {bs} {elem} rx {area} {point} {relem} npaths {len(link)}")
        for p in link.paths:
            out.append(" ".join((
                fmt_real(p.aod_az), fmt_real(p.aod_el), fmt_real(p.aoa_az),
                fmt_real(p.aoa_el), fmt_real(p.delay), _rad_to_deg_text(p.phase),
                fmt_real(p.power_dbm),
            )))
    return "\n".join(out) + "\n"
