"""Built-in property suites for `chanflow check`.

Each suite returns a JSON-ready dict: measured residuals against their
thresholds, with an overall pass flag.  These are the same invariants the
test suite enforces, packaged for quick field verification.
"""

from __future__ import annotations

import numpy as np

from . import junction as junc_mod
from . import reconstruction as recon
from .geometry import (
    CellGeom,
    CrossSection,
    FaceGeometry,
    bed_slope_term_v,
    pressure_i1,
    volume,
    volume_v,
    wall_force_v,
)
from .output import Schedule, collect_run
from .scenario import builtin_config, load_scenario


def _check(name, value, threshold, larger_is_worse=True):
    passed = value <= threshold if larger_is_worse else value >= threshold
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "passed": bool(passed)}


def _result(suite, checks):
    return {"suite": suite, "passed": all(c["passed"] for c in checks), "checks": checks}


def _random_section(rng):
    k = int(rng.integers(2, 6))
    depths = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 1.5, size=k - 1))])
    widths = rng.uniform(0.0, 3.0, size=k)
    if widths.max() < 0.05:
        widths[int(rng.integers(0, k))] += 1.0
    return CrossSection(np.column_stack([depths, widths]))


def check_well_balance(seed=42):
    """Water at rest over irregular topography stays at rest exactly."""
    cfg = builtin_config("perturbed_lake", n=100)
    cfg["scenario"]["initial"] = {"preset": "lake_at_rest", "surface": 0.8}
    sc = load_scenario(cfg)
    st = sc.state
    s = st
    for _ in range(1000):
        s, _ = sc.engine.step_euler(s)
    w_st = recon.still_water_levels(sc.network.cells, sc.network.cell_combined, s.area,
                                    vol_table=sc.network.cell_volume_table)
    wet = w_st >= np.maximum(sc.network.cells.bedL, sc.network.cells.bedR)
    checks = [
        _check("max_discharge", np.abs(s.discharge).max(), 1e-12),
        _check("max_surface_drift", np.abs(w_st[wet] - 0.8).max(), 1e-12),
    ]
    return _result("well-balance", checks)


def check_positivity(seed=42):
    """Randomized dam breaks over random topography keep depths >= 0."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    runs = 0
    for trial in range(60):
        n = int(rng.integers(20, 60))
        length = float(rng.uniform(5.0, 50.0))
        x = np.linspace(0.0, length, n + 1)
        bed = rng.uniform(0.0, 0.5) * np.sin(rng.uniform(0.5, 3.0) * np.pi * x / length)
        bed -= bed.min()
        width = float(rng.uniform(0.3, 3.0))
        cfg = {
            "cross_sections": {"c": [[0.0, width], [5.0, width * float(rng.uniform(1.0, 2.0))]]},
            "nodes": [
                {"id": "L", "kind": "boundary", "boundary_condition": "wall"},
                {"id": "R", "kind": "boundary", "boundary_condition": "wall"},
            ],
            "links": [{"id": "m", "from": "L", "to": "R", "manning_n": 0.0,
                       "edges": [[float(a), float(b), "c"] for a, b in zip(x, bed)]}],
            "boundary_conditions": {"wall": {"kind": "wall"}},
            "scenario": {
                "end_time": 0.0,
                "initial": {
                    "preset": "dam_break",
                    "x_dam": float(rng.uniform(0.3, 0.7) * length),
                    "surface_up": float(bed.max() + rng.uniform(0.1, 1.0)),
                    "surface_down": float(rng.uniform(0.0, 0.3)),
                },
            },
        }
        sc = load_scenario(cfg)
        s = sc.state
        for _ in range(60):
            s, rep = sc.engine.step_euler(s)
            worst = max(worst, -rep.min_depth)
            runs += 1
    checks = [_check("max_negative_depth", worst, 0.0)]
    return _result("positivity", checks)


def check_conservation(seed=42):
    """Closed channel: total volume drifts only at rounding level."""
    sc = load_scenario(builtin_config("closed_dam_break", dx=0.25, end_time=18.0))
    res = collect_run(sc.engine, sc.state, sc.schedule)
    v0 = res.audit[0][1]
    drift = abs(res.audit[-1][1] - v0) / v0
    checks = [_check("relative_volume_drift", drift, 1e-10)]
    return _result("conservation", checks)


def check_junction_jacobian(seed=42):
    """Analytic junction storage derivative matches central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    tested = 0
    while tested < 200:
        n_ends = int(rng.integers(2, 5))
        secs = [_random_section(rng) for _ in range(n_ends)]
        from .geometry import SectionSet

        lens = rng.uniform(0.05, 2.0, size=n_ends)
        bedL = rng.uniform(0.0, 1.0, size=n_ends)
        bedR = rng.uniform(0.0, 1.0, size=n_ends)
        tabs = SectionSet(secs)
        cg = CellGeom(tabs, tabs.take(rng.permutation(n_ends)), bedL, bedR,
                      np.zeros(n_ends), lens)
        jg = junc_mod.JunctionGeom(
            node_id="t", node_index=0, is_inflow=np.ones(n_ends, bool),
            terminal_face=np.zeros(n_ends, np.int64),
            terminal_cell=np.zeros(n_ends, np.int64),
            stub_len=lens, cg=cg, comb=None, junction_bed=bedR,
            junction_tab=tabs, min_bed=float(np.minimum(bedL, bedR).min()),
            polys=[junc_mod._StubPolys(cg, e) for e in range(n_ends)],
        )
        cap = float(np.min(np.minimum(bedL + cg.tabL.h_valid, bedR + cg.tabR.h_valid)))
        hi = min(max(bedL.max(), bedR.max()) + 1.0, cap - 1e-6)
        if hi <= jg.min_bed + 0.05:
            continue
        y = float(rng.uniform(jg.min_bed + 0.05, hi))
        if junc_mod.continuity_jacobian(jg, y) <= 1e-10:
            continue
        eps = 1e-6
        fd = (junc_mod.total_volume(jg, y + eps) - junc_mod.total_volume(jg, y - eps)) / (2 * eps)
        an = junc_mod.continuity_jacobian(jg, y)
        worst = max(worst, abs(an - fd) / max(abs(fd), 1e-12))
        tested += 1
    checks = [_check("max_relative_jacobian_error", worst, 1e-6)]
    return _result("junction-jacobian", checks)


def check_geometry_oracle(seed=42):
    """Exact volumes against quadrature, and the rest-state source balance."""
    from scipy.integrate import quad

    rng = np.random.default_rng(seed)
    worst_vol = 0.0
    worst_bal = 0.0
    for _ in range(200):
        secL, secR = _random_section(rng), _random_section(rng)
        xL = float(rng.uniform(-2, 2))
        dx = float(rng.uniform(0.1, 3.0))
        bL, bR = rng.uniform(-1, 1, size=2)
        fl = FaceGeometry(bed=float(bL), section=secL, x=xL)
        fr = FaceGeometry(bed=float(bR), section=secR, x=xL + dx)
        lo, hi = min(bL, bR), max(bL, bR)
        wl = float(rng.uniform(lo - 0.3, hi + 1.0))
        wr = float(rng.uniform(lo - 0.3, hi + 1.0))
        got = volume(fl, fr, fl.x, fr.x, wl, wr)

        def interp_width(sec, y):
            if y <= sec.depths[-1]:
                return np.interp(y, sec.depths, sec.widths)
            sl = (sec.widths[-1] - sec.widths[-2]) / (sec.depths[-1] - sec.depths[-2])
            return sec.widths[-1] + sl * (y - sec.depths[-1])

        def a_of(sec, h):
            if h <= 0:
                return 0.0
            ys = np.concatenate([[0.0], [y for y in sec.depths if 0 < y < h], [h]])
            return np.trapezoid([interp_width(sec, y) for y in ys], ys)

        def integrand(x):
            hl = wl - bL
            hr = wr - bR
            h = hl + (hr - hl) * (x - fl.x) / dx
            if h <= 0:
                return 0.0
            lam = (x - fl.x) / dx
            return (1 - lam) * a_of(secL, h) + lam * a_of(secR, h)

        pts = {fl.x, fr.x}
        hl0, hr0 = wl - bL, wr - bR
        if hr0 != hl0:
            for y in set(secL.depths) | set(secR.depths) | {0.0}:
                xc = fl.x + (y - hl0) * dx / (hr0 - hl0)
                if fl.x < xc < fr.x:
                    pts.add(float(xc))
        pts = sorted(pts)
        ref = sum(quad(integrand, a, b, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
        worst_vol = max(worst_vol, abs(got - ref) / max(abs(ref), 1e-10))
        # rest-state balance at a horizontal surface
        w = float(rng.uniform(lo - 0.2, hi + 1.0))
        hL = max(0.0, w - bL)
        hR = max(0.0, w - bR)
        cg = CellGeom.from_faces(fl, fr)
        i2 = float(wall_force_v(cg, [fl.x], [fr.x], [w], [w])[0])
        bx = float(bed_slope_term_v(cg, [fl.x], [fr.x], [w], [w])[0])
        bal = pressure_i1(fl, fr, fr.x, hR) - pressure_i1(fl, fr, fl.x, hL) - i2 + bx
        worst_bal = max(worst_bal, abs(bal))
    checks = [
        _check("max_relative_volume_error", worst_vol, 1e-10),
        _check("max_balance_residual", worst_bal, 1e-11),
    ]
    return _result("geometry-oracle", checks)


SUITES = {
    "well-balance": check_well_balance,
    "positivity": check_positivity,
    "conservation": check_conservation,
    "junction-jacobian": check_junction_jacobian,
    "geometry-oracle": check_geometry_oracle,
}
