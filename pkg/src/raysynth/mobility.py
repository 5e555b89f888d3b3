"""Moving-user channels.

A user walks from a grid point along one grid axis. Each time sample is a
virtual point placed ``dd`` meters past anchor point ``m`` of the walk; the
anchor's traced paths are reused and the displacement enters only as a
per-path Doppler phase ``2*pi*dd*(u . n)/lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .chansynth import (CarrierPair, ChannelMatrix, active_elements, bin_coefficients,
                        bin_edges, path_coefficients, synth_response)
from .geomtracer import SPEED_OF_LIGHT
from .raypaths import GridGeometry, Link, ScenarioData

# (row step, col step, unit vector): rows run along +y, columns along +x
DIRECTIONS = {
    "up": (1, 0, (0.0, 1.0, 0.0)),
    "down": (-1, 0, (0.0, -1.0, 0.0)),
    "right": (0, 1, (1.0, 0.0, 0.0)),
    "left": (0, -1, (-1.0, 0.0, 0.0)),
}


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class MovementSpec:
    area: int
    start_point: int
    direction: str
    speed: float
    sample_interval: float
    n_samples: int

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {sorted(DIRECTIONS)}, got {self.direction!r}")
        if not (self.speed >= 0 and math.isfinite(self.speed)):
            raise ValueError(f"speed must be >= 0, got {self.speed!r}")
        if not self.sample_interval > 0:
            raise ValueError(f"sample_interval must be > 0, got {self.sample_interval!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class VirtualSample:
    """Sample ``kappa`` sits ``dd`` meters past anchor ``m`` (grid point ``point``)."""

    kappa: int
    m: int
    dd: float
    u: Tuple[float, float, float]
    area: int
    point: int


@dataclass(frozen=True)
class DopplerContext:
    """Carrier wavelength and the per-path arrival unit vectors of a link."""

    wavelength: float
    arrival: np.ndarray

    @classmethod
    def from_link(cls, link: Link, freq_hz: float) -> "DopplerContext":
        return cls(SPEED_OF_LIGHT / freq_hz, link.arrays["arrival"])

    def shifts(self, dd: float, u) -> np.ndarray:
        return doppler_shift(dd, np.asarray(u, dtype=float), self.arrival, self.wavelength)


def virtual_offset(kappa: int, speed: float, dt: float, ds: float) -> Tuple[int, float]:
    """Anchor index m = ceil(k*v*dt/ds - 1) and remainder dd = k*v*dt - m*ds.

    Evaluated in exact rational arithmetic on the given floats, so dd lands
    in (0, ds] whenever the travelled distance is positive. Zero travel
    returns (0, 0.0): the user is still at the start point.
    """
    travel = Fraction(kappa) * Fraction(speed) * Fraction(dt)
    if travel == 0:
        return 0, 0.0
    step = Fraction(ds)
    m = math.ceil(travel / step - 1)
    return m, float(travel - m * step)


def sample_trajectory(spec: MovementSpec, grid: GridGeometry) -> List[VirtualSample]:
    drow, dcol, u = DIRECTIONS[spec.direction]
    row, col = grid.row_col(spec.start_point)
    # number of whole grid steps available in the walking direction
    if drow > 0:
        room = grid.rows - 1 - row
    elif drow < 0:
        room = row
    elif dcol > 0:
        room = grid.cols - 1 - col
    else:
        room = col
    out = []
    for kappa in range(1, spec.n_samples + 1):
        m, dd = virtual_offset(kappa, spec.speed, spec.sample_interval, grid.ds)
        if m + (1 if dd > 0 else 0) > room:
            raise TrajectoryError(
                f"sample {kappa} at {kappa * spec.speed * spec.sample_interval:g} m "
                f"leaves area grid ({room} steps of {grid.ds:g} m available)")
        point = grid.index(row + m * drow, col + m * dcol)
        out.append(VirtualSample(kappa, m, dd, u, spec.area, point))
    return out


def aoa_unit_vector(aoa_az: float, aoa_el: float) -> np.ndarray:
    """Unit vector from the receiver toward where the ray arrives from."""
    az, el = math.radians(aoa_az), math.radians(aoa_el)
    return np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])


def doppler_shift(dd: float, u, n, wavelength: float):
    """Phase advance 2*pi*dd*(u . n)/wavelength; ``n`` may be (3,) or (P, 3)."""
    return 2.0 * np.pi * dd * (np.asarray(n) @ np.asarray(u)) / wavelength


def synth_mobile_link(link: Link, dd: float, u, bw: float,
                      carriers: CarrierPair) -> Tuple[complex, complex]:
    """Moving-state UL/DL response of one link displaced ``dd`` along ``u``."""
    delays = link.arrays["delay"]
    out = []
    for f in (carriers.f_up, carriers.f_dn):
        shift = DopplerContext.from_link(link, f).shifts(dd, u)
        taps = bin_coefficients(delays, path_coefficients(link, shift), bw)
        out.append(synth_response(taps, f))
    return out[0], out[1]


def synth_mobile(data: ScenarioData, sample: VirtualSample, bs: int, bw: float,
                 carriers: CarrierPair, n_bs=None, n_ue=None) -> Tuple[ChannelMatrix, ChannelMatrix]:
    """UL/DL matrices at a virtual sample, built from its anchor point's links."""
    ks, gs = active_elements(data, bs, sample.area, sample.point, n_bs, n_ue)
    up = np.empty((len(ks), len(gs)), dtype=complex)
    dn = np.empty_like(up)
    for i, k in enumerate(ks):
        for j, g in enumerate(gs):
            link = data.get(bs, k, sample.area, sample.point, g)
            up[i, j], dn[i, j] = synth_mobile_link(link, sample.dd, sample.u, bw, carriers)
    return (ChannelMatrix(tuple(ks), tuple(gs), up),
            ChannelMatrix(tuple(ks), tuple(gs), dn))


def synth_mobile_link_series(link: Link, dds, u, bw: float,
                             carriers: CarrierPair) -> Tuple[np.ndarray, np.ndarray]:
    """``synth_mobile_link`` for many displacements at once; bitwise identical per entry."""
    dds = np.asarray(dds, dtype=float)
    arr = link.arrays
    if len(link) == 0:
        zero = np.zeros(dds.shape, dtype=complex)
        return zero, zero.copy()
    tau0, idx = bin_edges(arr["delay"], bw)
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    tap_delays = tau0 + idx[starts] / bw
    proj = arr["arrival"] @ np.asarray(u, dtype=float)
    out = []
    for f in (carriers.f_up, carriers.f_dn):
        wl = SPEED_OF_LIGHT / f
        shift = 2.0 * np.pi * dds[:, None] * proj[None, :] / wl
        coeffs = arr["amplitude"] * np.exp(1j * (arr["phase"] + shift))
        sums = np.add.reduceat(coeffs, starts, axis=1)
        out.append(np.sum(sums * np.exp(-2j * np.pi * f * tap_delays), axis=-1))
    return out[0], out[1]


def synth_mobile_series(data: ScenarioData, samples: Sequence[VirtualSample], bs: int,
                        bw: float, carriers: CarrierPair, n_bs=None,
                        n_ue=None) -> Tuple[np.ndarray, np.ndarray]:
    """Stacked UL/DL matrices, shape (samples, bs elements, ue elements).

    Samples sharing an anchor point are synthesized together; values equal
    ``synth_mobile`` sample by sample.
    """
    if not samples:
        raise ValueError("no samples to synthesize")
    groups = {}
    for i, s in enumerate(samples):
        groups.setdefault((s.area, s.point, s.u), []).append(i)
    up = dn = None
    for (area, point, u), rows in groups.items():
        ks, gs = active_elements(data, bs, area, point, n_bs, n_ue)
        if up is None:
            up = np.empty((len(samples), len(ks), len(gs)), dtype=complex)
            dn = np.empty_like(up)
        elif up.shape[1:] != (len(ks), len(gs)):
            raise ValueError(f"element counts differ at area {area} point {point}")
        dds = [samples[i].dd for i in rows]
        for a, k in enumerate(ks):
            for b, g in enumerate(gs):
                link = data.get(bs, k, area, point, g)
                up[rows, a, b], dn[rows, a, b] = synth_mobile_link_series(link, dds, u, bw, carriers)
    return up, dn
