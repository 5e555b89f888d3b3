"""Beam-selection labels and windowed datasets for beam prediction.

Sub-6 GHz uplink channel vectors are the model inputs; the label for a window
ending at slot ``t`` is the codebook beam that maximizes the mmWave downlink
rate at slot ``t + horizon``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Codebook:
    """``beams[n]`` is the n-th unit-norm beamforming vector (length M)."""

    beams: np.ndarray

    @property
    def N(self) -> int:
        return self.beams.shape[0]

    @property
    def M(self) -> int:
        return self.beams.shape[1]


@dataclass(frozen=True)
class RateParams:
    bandwidth: float
    snr: float

    def __post_init__(self):
        if not (self.bandwidth > 0 and self.snr > 0):
            raise ValueError(f"bandwidth and snr must be > 0, got {self.bandwidth}, {self.snr}")


@dataclass(frozen=True)
class WindowedSample:
    t: int
    features: np.ndarray  # (W, M_sub6)
    label: int
    rate: float


def matched_filter(h_up) -> np.ndarray:
    """Unit-norm beamformer conj(h)/||h||."""
    h = np.asarray(h_up, dtype=complex)
    norm = np.linalg.norm(h)
    if norm == 0:
        raise ValueError("matched filter of a zero channel is undefined")
    return np.conj(h) / norm


def make_codebook(N: int, M: int) -> Codebook:
    """Progressive-phase codebook: beam n, antenna m = exp(2j*pi*m*n/N)/sqrt(M)."""
    if N < 1 or M < 1:
        raise ValueError(f"codebook needs N >= 1 and M >= 1, got N={N}, M={M}")
    n = np.arange(N)[:, None]
    m = np.arange(M)[None, :]
    return Codebook(np.exp(2j * np.pi * ((m * n) % N) / N) / np.sqrt(M))


def rate(h_dn, f, p: RateParams) -> float:
    """Achievable rate B*log2(1 + snr*|h.f|^2) in bit/s."""
    h = np.asarray(h_dn)
    f = np.asarray(f)
    if h.shape != f.shape:
        raise ValueError(f"channel shape {h.shape} does not match beam shape {f.shape}")
    gain = abs(np.dot(h, f)) ** 2
    return float(p.bandwidth * np.log2(1.0 + p.snr * gain))


def optimal_beam(h_dn, codebook: Codebook, p: RateParams) -> Tuple[int, float]:
    """Exhaustive argmax of the rate over the codebook; lowest index wins ties."""
    best, best_rate = 0, -np.inf
    for n, beam in enumerate(codebook.beams):
        r = rate(h_dn, beam, p)
        if r > best_rate:
            best, best_rate = n, r
    return best, best_rate


def awgn_observe(h, s: complex = 1.0, noise_var: float = 0.0, seed=None) -> np.ndarray:
    """Received pilot ``h*s + n`` with circular complex Gaussian noise of variance ``noise_var``."""
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var}")
    y = np.asarray(h, dtype=complex) * s
    if noise_var == 0:
        return y
    rng = np.random.default_rng(seed)
    scale = np.sqrt(noise_var / 2.0)
    return y + scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))


def build_dataset(ul_series: Sequence, dn_series: Sequence, codebook: Codebook,
                  p: RateParams, window: int = 25, horizon: int = 1) -> List[WindowedSample]:
    """Slide a ``window``-slot UL feature window and label it ``horizon`` slots ahead."""
    T = len(ul_series)
    if len(dn_series) != T:
        raise ValueError(f"UL and DL series lengths differ: {T} vs {len(dn_series)}")
    if window < 1 or horizon < 0:
        raise ValueError("window must be >= 1 and horizon >= 0")
    if T < window + horizon:
        raise ValueError(f"series of {T} slots is too short for window {window} + horizon {horizon}")
    ul = np.asarray(ul_series, dtype=complex)
    labels = {}
    out = []
    for t in range(window - 1, T - horizon):
        if t + horizon not in labels:
            labels[t + horizon] = optimal_beam(dn_series[t + horizon], codebook, p)
        idx, r = labels[t + horizon]
        out.append(WindowedSample(t, ul[t - window + 1:t + 1].copy(), idx, r))
    return out


def labels_csv(samples: Sequence[WindowedSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "label", "rate_bps"])
    for s in samples:
        w.writerow([s.t, s.label, format(s.rate, ".17g")])
    return buf.getvalue()
