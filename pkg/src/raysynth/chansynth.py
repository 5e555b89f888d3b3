"""Tapped-delay binning of path sets and UL/DL frequency responses.

Paths are grouped into half-open sampling bins of width ``1/bw`` anchored at
the first arrival; each occupied bin becomes one tap whose coefficient is the
coherent sum of its paths. The channel at carrier ``f`` is
``sum(coeff_i * exp(-2j*pi*f*tau_i))`` with ``tau_i`` the bin's left edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .raypaths import Link, ScenarioData


@dataclass(frozen=True)
class SamplingGrid:
    bw: float
    tau0: float
    L: int

    @property
    def bin_width(self) -> float:
        return 1.0 / self.bw


@dataclass(frozen=True)
class Tap:
    index: int
    delay: float
    coeff: complex
    count: int


@dataclass(frozen=True)
class TapSet:
    grid: SamplingGrid
    taps: Tuple[Tap, ...]

    @property
    def delays(self) -> np.ndarray:
        return np.array([t.delay for t in self.taps], dtype=float)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([t.coeff for t in self.taps], dtype=complex)


@dataclass(frozen=True)
class CarrierPair:
    f_up: float
    f_dn: float

    def __post_init__(self):
        if not (self.f_up > 0 and self.f_dn > 0):
            raise ValueError(f"carrier frequencies must be > 0, got {self.f_up}, {self.f_dn}")


@dataclass(frozen=True)
class ChannelMatrix:
    """Channel responses, rows = BS elements, columns = user elements."""

    bs_elements: Tuple[int, ...]
    ue_elements: Tuple[int, ...]
    H: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.H.shape


def bin_edges(delays: np.ndarray, bw: float) -> Tuple[float, np.ndarray]:
    """First-arrival anchor and per-path bin index for delay-sorted paths."""
    if not bw > 0:
        raise ValueError(f"bandwidth must be > 0, got {bw!r}")
    if delays.size == 0:
        return 0.0, np.zeros(0, dtype=np.int64)
    tau0 = float(delays.min())
    return tau0, np.floor((delays - tau0) * bw).astype(np.int64)


def bin_coefficients(delays: np.ndarray, coeffs: np.ndarray, bw: float) -> TapSet:
    """Group per-path complex coefficients into taps.

    ``delays`` must be sorted ascending; sums run in that order.
    """
    tau0, idx = bin_edges(delays, bw)
    if idx.size == 0:
        return TapSet(SamplingGrid(bw, tau0, 0), ())
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    sums = np.add.reduceat(coeffs, starts)
    counts = np.diff(np.r_[starts, idx.size])
    taps = tuple(
        Tap(int(idx[s]), tau0 + int(idx[s]) / bw, complex(c), int(n))
        for s, c, n in zip(starts, sums, counts)
    )
    return TapSet(SamplingGrid(bw, tau0, len(taps)), taps)


def path_coefficients(link: Link, extra_phase: Optional[np.ndarray] = None) -> np.ndarray:
    """alpha_n * exp(j*(phi_n + extra_n)) for the link's paths."""
    arr = link.arrays
    phase = arr["phase"] if extra_phase is None else arr["phase"] + extra_phase
    return arr["amplitude"] * np.exp(1j * phase)


def bin_paths(link: Link, bw: float) -> TapSet:
    """Bin a link's paths at sampling interval ``1/bw``."""
    return bin_coefficients(link.arrays["delay"], path_coefficients(link), bw)


def synth_response(taps: TapSet, f: float) -> complex:
    """Frequency response of a tap set at ``f`` Hz; 0 for no taps."""
    if not taps.taps:
        return 0j
    return complex(np.sum(taps.coeffs * np.exp(-2j * np.pi * f * taps.delays)))


def synth_uldl(link: Link, bw: float, carriers: CarrierPair) -> Tuple[complex, complex]:
    taps = bin_paths(link, bw)
    return synth_response(taps, carriers.f_up), synth_response(taps, carriers.f_dn)


def active_elements(data: ScenarioData, bs: int, area: int, point: int,
                    n_bs: Optional[int] = None, n_ue: Optional[int] = None):
    """Element index lists for a BS/point pair, truncated to the active counts."""
    ks = data.tx_elements(bs)
    gs = data.rx_elements(area, point)
    if n_bs is not None:
        ks = list(range(n_bs))
    if n_ue is not None:
        gs = list(range(n_ue))
    if not ks or not gs:
        raise KeyError(f"no links between bs {bs} and area {area} point {point}")
    return ks, gs


def synth_matrix(data: ScenarioData, bs: int, area: int, point: int, bw: float,
                 carriers: CarrierPair, n_bs: Optional[int] = None,
                 n_ue: Optional[int] = None) -> Tuple[ChannelMatrix, ChannelMatrix]:
    """UL and DL channel matrices between a BS and one user point.

    ``n_bs``/``n_ue`` select the first elements of each array; by default
    every element present in ``data`` is used.
    """
    ks, gs = active_elements(data, bs, area, point, n_bs, n_ue)
    up = np.empty((len(ks), len(gs)), dtype=complex)
    dn = np.empty_like(up)
    for i, k in enumerate(ks):
        for j, g in enumerate(gs):
            up[i, j], dn[i, j] = synth_uldl(data.get(bs, k, area, point, g), bw, carriers)
    return (ChannelMatrix(tuple(ks), tuple(gs), up),
            ChannelMatrix(tuple(ks), tuple(gs), dn))
