"""Acceptance suite: one test per criterion, at the stated tolerances.

Heavy shared runs are session-cached; fine-grid references persist in
.chanflow_cache at the repository root so repeat sessions skip the long
reference computations.  Run with ``pytest -v tests/test_acceptance.py`` to
get one pass/fail line per criterion.

Criterion 7's loop sub-check asserts the specified 0.10 bound between the
two junction models; the continuity-plus-momentum model as defined (one
shared interface discharge at every attached end) cannot meet it at
mid-branch gauges with branch widths 2 m and 1 m - see the analysis in the
reviewer notes.  The test states the measured values either way.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from chanflow import checks, oracle
from chanflow.output import Schedule, collect_run, cell_surface_summary
from chanflow.oracle import error_norms, fine_grid_reference, project_to_coarse
from chanflow.scenario import builtin_config, load_scenario
from chanflow import reconstruction as recon

CACHE = Path(__file__).resolve().parent.parent / ".chanflow_cache"
G = 9.81

# Observed first-order errors from the published accuracy table
TABLE1_W = {80: 9.60751e-4, 160: 2.37650e-4, 320: 6.19365e-5, 640: 1.64387e-5}
TABLE1_Q = {80: 1.09671e-2, 160: 2.85182e-3, 320: 7.33061e-4, 640: 1.89283e-4}


def announce(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="session")
def shared():
    return {}


# ---------------------------------------------------------------------------
# 1. Convergence
# ---------------------------------------------------------------------------


def test_criterion_01_convergence():
    grids = [80, 160, 320, 640]
    ref = fine_grid_reference("trapezoid_smooth_wave", 5120, cache_dir=CACHE)
    errs_w, errs_q = {}, {}
    for n in grids:
        sol = fine_grid_reference("trapezoid_smooth_wave", n, cache_dir=CACHE)
        dx = 1.0 / n
        l1w, _, _ = error_norms(sol["w"], project_to_coarse(ref["w"], n), dx)
        l1q, _, _ = error_norms(sol["q"], project_to_coarse(ref["q"], n), dx)
        errs_w[n], errs_q[n] = l1w, l1q
    orders_w = [np.log2(errs_w[a] / errs_w[b]) for a, b in zip(grids, grids[1:])]
    orders_q = [np.log2(errs_q[a] / errs_q[b]) for a, b in zip(grids, grids[1:])]
    ratios_w = [errs_w[n] / TABLE1_W[n] for n in grids]
    ratios_q = [errs_q[n] / TABLE1_Q[n] for n in grids]
    ok = (
        all(o >= 1.8 for o in orders_w + orders_q)
        and all(1.0 / 3.0 <= r <= 3.0 for r in ratios_w + ratios_q)
    )
    announce(
        "criterion 1 convergence", ok,
        f"orders w={['%.3f' % o for o in orders_w]} Q={['%.3f' % o for o in orders_q]}; "
        f"error ratios to the published table w={['%.2f' % r for r in ratios_w]} "
        f"Q={['%.2f' % r for r in ratios_q]}",
    )
    assert all(o >= 1.8 for o in orders_w), f"spatial order for w below 1.8: {orders_w}"
    assert all(o >= 1.8 for o in orders_q), f"spatial order for Q below 1.8: {orders_q}"
    assert all(1.0 / 3.0 <= r <= 3.0 for r in ratios_w), f"w errors off the table: {ratios_w}"
    assert all(1.0 / 3.0 <= r <= 3.0 for r in ratios_q), f"Q errors off the table: {ratios_q}"


# ---------------------------------------------------------------------------
# 2. Exact well-balance
# ---------------------------------------------------------------------------


def _rest_run(cfg, w0, steps, junction_model="cuj1"):
    cfg["scenario"]["initial"] = {"preset": "lake_at_rest", "surface": w0}
    cfg["scenario"]["junction_model"] = junction_model
    sc = load_scenario(cfg)
    s = sc.state
    for _ in range(steps):
        s, _ = sc.engine.step_euler(s)
    net = sc.network
    w_st = recon.still_water_levels(net.cells, net.cell_combined, s.area,
                                    vol_table=net.cell_volume_table)
    wet = w_st >= np.maximum(net.cells.bedL, net.cells.bedR)
    max_q = float(np.abs(s.discharge).max())
    drift = float(np.abs(w_st[wet] - w0).max()) if wet.any() else 0.0
    dy = float(np.abs(s.junc_surface - sc.state.junc_surface).max()) if len(s.junc_surface) else 0.0
    dqs = float(np.abs(s.junc_discharge).max()) if len(s.junc_discharge) else 0.0
    return max_q, drift, dy, dqs, sc, s


def test_criterion_02_exact_well_balance():
    # spline-bed channel with dry cells present
    cfg = builtin_config("perturbed_lake", n=200)
    max_q, drift, _, _, sc, s = _rest_run(cfg, 0.8, 1000)
    assert (s.area == 0).any() or (recon.still_water_levels(
        sc.network.cells, sc.network.cell_combined, s.area,
        vol_table=sc.network.cell_volume_table)
        < np.maximum(sc.network.cells.bedL, sc.network.cells.bedR)).any(), \
        "test setup must include dry cells"
    ok = max_q <= 1e-12 and drift <= 1e-12
    detail = f"channel: max|Q|={max_q:.2e}, wet |w-0.8| max={drift:.2e}"
    # network with junctions of unequal stub beds, both models
    for model in ("cuj1", "cuj2"):
        cfg = builtin_config("dry_network_inundation", dx=0.2)
        for k in ("src_a", "src_e", "src_h", "out_d"):
            cfg["boundary_conditions"][k] = {"kind": "wall"}
        mq, dr, dy, dqs, _, _ = _rest_run(cfg, 0.28, 1000, junction_model=model)
        detail += f"; network {model}: max|Q|={mq:.2e}, |dY|={dy:.2e}, |Qs|={dqs:.2e}"
        ok = ok and mq <= 1e-12 and dr <= 1e-12 and dy <= 1e-12 and dqs <= 1e-12
        assert mq <= 1e-12 and dr <= 1e-12 and dy <= 1e-12 and dqs <= 1e-12, detail
    announce("criterion 2 exact well-balance", ok, detail)
    assert max_q <= 1e-12 and drift <= 1e-12, detail


# ---------------------------------------------------------------------------
# 3. Positivity and front-error decay
# ---------------------------------------------------------------------------


def test_criterion_03_positivity_dry_dam_break():
    ref = fine_grid_reference("triangular_dam_break_dry", 16000, cache_dir=CACHE)
    errs = {}
    for n in (400, 1000):
        sc = load_scenario(builtin_config("triangular_dam_break_dry", n=n))
        res = collect_run(sc.engine, sc.state, Schedule(end_time=45.0))
        assert res.summary.min_depth >= 0.0
        st = res.final_state
        assert np.all(np.isfinite(st.area)) and np.all(np.isfinite(st.discharge))
        w, h_av = cell_surface_summary(sc.engine, st)
        l1, _, _ = error_norms(h_av, project_to_coarse(ref["h"], n), 1000.0 / n)
        errs[n] = l1
    ok = errs[1000] < errs[400]
    announce("criterion 3 positivity + front decay", ok,
             f"min depth >= 0 at every step; L1(h): N=400 {errs[400]:.4e} "
             f"-> N=1000 {errs[1000]:.4e}")
    assert errs[1000] < errs[400], errs


# ---------------------------------------------------------------------------
# 4. Subcritical steady state
# ---------------------------------------------------------------------------


def test_criterion_04_subcritical_steady():
    sc = load_scenario(builtin_config("subcritical_steady", n=200, end_time=15.0))
    res = collect_run(sc.engine, sc.state, Schedule(end_time=15.0))
    st = res.final_state
    w, h_av = cell_surface_summary(sc.engine, st)
    prof = oracle.steady_profile(sc.network, 0.3343, 0.8)
    dq = float(np.abs(st.discharge - 0.3343).max())
    comb = sc.network.cell_combined
    a = np.maximum(comb.area(h_av), 1e-300)
    bed = 0.5 * (sc.network.cells.bedL + sc.network.cells.bedR)
    energy = 0.5 * st.discharge**2 / (a * a) + G * (h_av + bed)
    _, e_l2, _ = error_norms(energy, prof.energy, sc.network.cell_dx)
    e_mean = float(energy.mean())
    ok = dq <= 2e-3 and e_l2 <= 2e-4 and 10.00 <= e_mean <= 10.10
    announce("criterion 4 subcritical steady", ok,
             f"max|Q-Qin|={dq:.3e} (<=2e-3), energy relL2={e_l2:.3e} (<=2e-4), "
             f"E={e_mean:.4f} (in [10.00, 10.10])")
    assert dq <= 2e-3
    assert e_l2 <= 2e-4
    assert 10.00 <= e_mean <= 10.10


# ---------------------------------------------------------------------------
# 5. Transcritical steady state with shock
# ---------------------------------------------------------------------------


def test_criterion_05_transcritical_shock():
    sc = load_scenario(builtin_config("transcritical_shock", n=200, end_time=14.0))
    res = collect_run(sc.engine, sc.state, Schedule(end_time=14.0))
    st = res.final_state
    w, h_av = cell_surface_summary(sc.engine, st)
    x = 0.5 * (sc.network.cells.xL + sc.network.cells.xR)
    q_in = 2.5561
    relq = np.abs(st.discharge - q_in) / q_in
    shock_cell = int(np.argmin(np.diff(w)))
    in_bump = 0.5 <= x[shock_cell] <= 0.9
    away = np.array([abs(i - shock_cell) > 5 for i in range(len(relq))])
    max_away = float(relq[away].max())
    # a single shock: only one cluster of steep surface drops
    drops = np.nonzero(np.diff(w) < -0.05)[0]
    single = len(drops) == 0 or (drops.max() - drops.min()) <= 5
    ok = in_bump and single and max_away <= 1e-2
    announce("criterion 5 transcritical shock", ok,
             f"shock at x={x[shock_cell]:.3f} (in [0.5,0.9]), single={single}, "
             f"max rel dQ away from shock={max_away:.2e} (<=1e-2)")
    assert in_bump
    assert single
    assert max_away <= 1e-2


# ---------------------------------------------------------------------------
# 6. Conservation
# ---------------------------------------------------------------------------


def test_criterion_06_conservation(shared):
    sc = load_scenario(builtin_config("closed_dam_break", dx=0.1, end_time=18.0))
    res = collect_run(sc.engine, sc.state, sc.schedule)
    v0 = res.audit[0][1]
    drift = abs(res.audit[-1][1] - v0) / v0
    detail = f"closed-channel volume drift={drift:.2e} (<=1e-10)"
    shared["closed_ref"] = res
    ok = drift <= 1e-10
    worst_junc = 0.0
    for model in ("cuj1", "cuj2"):
        cfg = builtin_config("closed_dam_break_junction", dx=0.1, end_time=18.0)
        cfg["scenario"]["junction_model"] = model
        scj = load_scenario(cfg)
        rj = collect_run(scj.engine, scj.state, scj.schedule)
        shared[f"closed_{model}"] = rj
        worst_junc = max(worst_junc, rj.summary.max_junction_residual)
        vj = abs(rj.audit[-1][1] - rj.audit[0][1]) / rj.audit[0][1]
        ok = ok and rj.summary.max_junction_residual <= 1e-10 and vj <= 1e-10
        detail += f"; {model}: junction residual={rj.summary.max_junction_residual:.2e}, drift={vj:.2e}"
    announce("criterion 6 conservation", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------------------
# 7. Junction model agreement
# ---------------------------------------------------------------------------


def _gauge_depth(res, label):
    i = res.gauge_labels.index(label)
    return res.gauge_rows[:, 3 * i + 1]


def test_criterion_07a_junction_vs_straight_channel(shared):
    if "closed_ref" not in shared:
        test_criterion_06_conservation(shared)
    ref = shared["closed_ref"]
    cuj1 = shared["closed_cuj1"]
    worst = 0.0
    for g in ("G1", "G2"):
        h_ref = _gauge_depth(ref, g)
        h1 = _gauge_depth(cuj1, g)
        n = min(len(h_ref), len(h1))
        _, l2, _ = error_norms(h1[:n], h_ref[:n], 1.0)
        worst = max(worst, l2)
    ok = worst <= 0.05
    announce("criterion 7a pass-through junction vs plain channel", ok,
             f"max gauge relL2={worst:.4f} (<=0.05)")
    assert worst <= 0.05


def test_criterion_07b_loop_model_agreement(shared):
    runs = {}
    for model in ("cuj1", "cuj2"):
        cfg = builtin_config("loop_dam_break_subcritical", dx=0.1, end_time=18.0)
        cfg["scenario"]["junction_model"] = model
        sc = load_scenario(cfg)
        runs[model] = collect_run(sc.engine, sc.state, sc.schedule)
    vals = {}
    for g in ("G1", "G2", "G3", "G4"):
        h1 = _gauge_depth(runs["cuj1"], g)
        h2 = _gauge_depth(runs["cuj2"], g)
        n = min(len(h1), len(h2))
        _, l2, _ = error_norms(h1[:n], h2[:n], 1.0)
        vals[g] = l2
    ok = all(v <= 0.10 for v in vals.values())
    announce(
        "criterion 7b loop CUJ1-vs-CUJ2", ok,
        "relL2 " + ", ".join(f"{g}={v:.4f}" for g, v in vals.items()) + " (<=0.10); "
        "the momentum model feeds one shared discharge into unequal branches, so the "
        "mid-branch gauges exceed the bound by construction (see reviewer notes)",
    )
    assert all(v <= 0.10 for v in vals.values()), vals


def test_criterion_07c_supercritical_loop(shared):
    cfg = builtin_config("loop_dam_break_supercritical", dx=0.1, end_time=18.0)
    sc = load_scenario(cfg)
    res = collect_run(sc.engine, sc.state, sc.schedule)
    finite = bool(
        np.all(np.isfinite(res.final_state.area))
        and np.all(np.isfinite(res.final_state.discharge))
    )
    nonneg = res.summary.min_depth >= 0.0
    cfg["scenario"]["junction_model"] = "cuj1"
    cfg["scenario"]["end_time"] = 3.0
    sc1 = load_scenario(cfg)
    warned = False
    try:
        r1 = collect_run(sc1.engine, sc1.state, sc1.schedule)
        warned = r1.summary.cuj1_supercritical
    except Exception:
        # blowing up is acceptable for the continuity-only model here, as
        # long as the warning fired first
        s = sc1.state
        for _ in range(2000):
            try:
                s, rep = sc1.engine.step_euler(s)
            except Exception:
                break
            if rep.cuj1_supercritical:
                warned = True
                break
    ok = finite and nonneg and warned
    announce("criterion 7c supercritical loop", ok,
             f"cuj2 finite={finite}, depths>=0 ({res.summary.min_depth:.3e}), "
             f"cuj1 warned={warned}")
    assert finite and nonneg and warned


# ---------------------------------------------------------------------------
# 8. Dry-network inundation
# ---------------------------------------------------------------------------


def test_criterion_08_dry_network_inundation():
    sc = load_scenario(builtin_config("dry_network_inundation", dx=0.2, end_time=400.0))
    res = collect_run(sc.engine, sc.state, sc.schedule)
    assert res.summary.min_depth >= 0.0
    inflow_total = res.audit[-1][2]
    residual = abs(res.audit[-1][4])
    rel = residual / max(inflow_total, 1e-300)
    tF, rates = res.junction_fluxes["F"]
    jg = [j for j in sc.engine.junctions if j.node_id == "F"][0]
    inflow = rates[:, jg.is_inflow].sum(axis=1)
    outflow = np.abs(rates[:, ~jg.is_inflow]).max(axis=1)
    phases = int(np.sum((inflow > 1e-8) & (outflow == 0.0)))
    # quiescence: discharges decay by the end of the run
    tail_q = float(np.abs(res.final_state.discharge).max())
    ok = rel <= 1e-8 and phases > 0 and res.summary.min_depth >= 0.0
    announce("criterion 8 dry-network inundation", ok,
             f"mass closure rel={rel:.2e} (<=1e-8), F inflow-only instants={phases}, "
             f"min depth={res.summary.min_depth:.2e}, final max|Q|={tail_q:.2e}")
    assert rel <= 1e-8
    assert phases > 0


# ---------------------------------------------------------------------------
# 9. Rectangular dry-bed dam break against the closed form
# ---------------------------------------------------------------------------


def test_criterion_09_ritter_check():
    n = 1000
    sc = load_scenario(builtin_config("rectangular_dam_break_dry", n=n, end_time=20.0))
    res = collect_run(sc.engine, sc.state, Schedule(end_time=20.0))
    st = res.final_state
    w, h_av = cell_surface_summary(sc.engine, st)
    x = 0.5 * (sc.network.cells.xL + sc.network.cells.xR)
    h_exact, _ = oracle.ritter_drybed(1.0, 500.0, 20.0, x)
    dx = 1000.0 / n
    l1, _, _ = error_norms(h_av, h_exact, dx)
    bound = 0.02 * 1.0 * 1000.0
    # front position: wetting-front depth contour, measured identically on
    # both solutions (robust across 0.5-2 percent of the upstream depth;
    # thinner contours probe the numerical film, not the front)
    offs = {}
    for frac in (0.02, 0.01, 0.005):
        xs = x[np.nonzero(h_av > frac)[0][-1]]
        xe = x[np.nonzero(h_exact > frac)[0][-1]]
        offs[frac] = abs(xs - xe) / dx
    off = offs[0.01]
    ok = l1 <= bound and all(v <= 5.0 for v in offs.values())
    announce("criterion 9 dry-bed closed form", ok,
             f"L1(h)={l1:.3f} (<= {bound:.0f}), front offset cells="
             + ", ".join(f"{k:g}:{v:.1f}" for k, v in offs.items()) + " (<=5)")
    assert l1 <= bound
    assert all(v <= 5.0 for v in offs.values()), offs


# ---------------------------------------------------------------------------
# 10. Numerical derivative checks
# ---------------------------------------------------------------------------


def test_criterion_10_derivative_checks():
    jac = checks.check_junction_jacobian(seed=42)
    geo = checks.check_geometry_oracle(seed=42)
    jv = jac["checks"][0]["value"]
    gv = geo["checks"][0]["value"]
    ok = jac["passed"] and geo["passed"]
    announce("criterion 10 derivative checks", ok,
             f"junction jacobian vs FD={jv:.2e} (<=1e-6), "
             f"volume vs quadrature={gv:.2e} (<=1e-10)")
    assert jac["passed"], jac
    assert geo["passed"], geo
