"""Random data generators and an independent canonical renderer for tests."""

import math
from decimal import Decimal, localcontext

import numpy as np

from raysynth.raypaths import GridGeometry, Link, PathRecord, ScenarioData

PI_DEC = Decimal("3.14159265358979323846264338327950288419716939937510582097494")


def random_path(rng, base_delay=1e-6, spread=500e-9):
    return PathRecord(
        aod_az=float(rng.uniform(0, 360)),
        aod_el=float(rng.uniform(-90, 90)),
        aoa_az=float(rng.uniform(0, 360)),
        aoa_el=float(rng.uniform(-90, 90)),
        delay=float(base_delay + rng.uniform(0, spread)),
        phase=float(rng.uniform(0, 2 * math.pi)),
        power_dbm=float(rng.normal(-80, 15)),
    )


def random_link(rng, n_paths=None, tx_id=(0, 0), rx_id=(0, 0, 0), **kw):
    if n_paths is None:
        n_paths = int(rng.integers(0, 40))
    return Link(tx_id, rx_id, tuple(random_path(rng, **kw) for _ in range(n_paths)))


def random_scenario(rng, max_links=12):
    n_areas = int(rng.integers(1, 4))
    grids = {
        a: GridGeometry(tuple(float(v) for v in rng.normal(0, 100, 3)),
                        float(rng.uniform(0.1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 6)))
        for a in range(n_areas)
    }
    links = {}
    for _ in range(int(rng.integers(0, max_links + 1))):
        area = int(rng.integers(0, n_areas))
        key = ((int(rng.integers(0, 3)), int(rng.integers(0, 4))),
               (area, int(rng.integers(0, grids[area].n_points)), int(rng.integers(0, 4))))
        links[key] = random_link(rng, int(rng.integers(0, 6)), key[0], key[1])
    return ScenarioData(float(rng.choice([3.5e9, 28e9, 60e9, rng.uniform(1e8, 1e11)])), grids, links)


def deg_text(rad):
    """17-digit degree text for a phase in radians (test-side rendering)."""
    if rad == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 50
        return format(Decimal(rad) * 180 / PI_DEC, ".17g")


def render_canonical(data):
    """Independent renderer of the canonical paths text for ``data``."""
    g17 = lambda x: "%.17g" % x
    lines = ["DATAAI6G-PATHS v1", "freq_hz " + g17(data.freq_hz)]
    for a in sorted(data.grids):
        g = data.grids[a]
        lines.append(" ".join(["grid", str(a)] + [g17(v) for v in g.origin]
                              + [g17(g.ds), str(g.rows), str(g.cols)]))
    for (tx, rx) in sorted(data.links):
        link = data.links[(tx, rx)]
        lines.append("link tx %d %d rx %d %d %d npaths %d" % (*tx, *rx, len(link.paths)))
        for p in link.paths:
            lines.append(" ".join([g17(p.aod_az), g17(p.aod_el), g17(p.aoa_az), g17(p.aoa_el),
                                   g17(p.delay), deg_text(p.phase), g17(p.power_dbm)]))
    return "\n".join(lines) + "\n"
