"""Simulation driver: schedules, gauge series, snapshots and mass audits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import junction as junc_mod
from . import reconstruction as recon


@dataclass
class Gauge:
    label: str
    kind: str          # "cell" | "node"
    index: int         # global cell index or engine junction index


@dataclass
class Schedule:
    end_time: float
    output_dt: float | None = None        # gauge/audit sampling; None: every step
    snapshot_times: tuple = ()
    gauges: tuple = ()
    track_junction_fluxes: bool = False
    max_steps: int = 50_000_000


@dataclass
class RunSummary:
    steps: int = 0
    final_time: float = 0.0
    min_depth: float = np.inf
    max_junction_residual: float = 0.0
    drain_limited_faces: int = 0
    bc_fallbacks: int = 0
    cuj1_supercritical: bool = False
    dt_min: float = np.inf
    dt_max: float = 0.0


@dataclass
class RunResult:
    times: np.ndarray
    gauge_labels: list
    gauge_rows: np.ndarray              # (n_times, 3*n_gauges): w, h, Q per gauge
    snapshots: dict                     # t -> dict of cell arrays
    audit: np.ndarray                   # (n_times, 5): t, volume, influx, lateral, residual
    summary: RunSummary
    final_state: object
    junction_fluxes: dict = field(default_factory=dict)  # node id -> (times, per-end H1*dtf)


def cell_surface_summary(engine, state):
    """(w, h_av) per cell for output: classification surface and volumetric depth."""
    net = engine.net
    w_st = recon.still_water_levels(net.cells, net.cell_combined, state.area,
                                    w_start=state.wst_cache,
                                    vol_table=net.cell_volume_table)
    h_av = recon.bed_parallel_depths(net.cell_combined, state.area)
    prev, nxt = net.prev_cell, net.next_cell
    q = state.discharge
    qL = np.where(prev >= 0, q[np.maximum(prev, 0)], 0.0)
    qR = np.where(nxt >= 0, q[np.minimum(nxt, net.n_cells - 1)], 0.0)
    wet, still, w, l = recon.classify(net.cells, state.area, q, w_st, h_av,
                                      engine.cfg.q_still, qL, qR)
    return w, h_av


def _gauge_row(engine, state, gauges, w, h_av):
    row = np.empty(3 * len(gauges))
    for i, gg in enumerate(gauges):
        if gg.kind == "cell":
            c = gg.index
            row[3 * i] = w[c]
            row[3 * i + 1] = h_av[c]
            row[3 * i + 2] = state.discharge[c]
        else:
            row[3 * i] = state.junc_surface[gg.index]
            jg = engine.junctions[gg.index]
            row[3 * i + 1] = max(0.0, state.junc_surface[gg.index] - jg.min_bed)
            row[3 * i + 2] = state.junc_discharge[gg.index]
    return row


def total_volume(engine, state):
    v = float(np.sum(state.area * engine.net.cell_dx))
    for k, jg in enumerate(engine.junctions):
        v += junc_mod.total_volume(jg, float(state.junc_surface[k]))
    return v


def snapshot(engine, state):
    net = engine.net
    w, h_av = cell_surface_summary(engine, state)
    return {
        "x": 0.5 * (net.cells.xL + net.cells.xR),
        "bed": 0.5 * (net.cells.bedL + net.cells.bedR),
        "w": w,
        "h": h_av,
        "q": state.discharge.copy(),
        "area": state.area.copy(),
        "link": net.cell_link.copy(),
    }


def collect_run(engine, state, schedule: Schedule) -> RunResult:
    snaps_todo = sorted(set(float(t) for t in schedule.snapshot_times))
    gauges = list(schedule.gauges)
    times = []
    rows = []
    audit = []
    snapshots = {}
    summary = RunSummary()
    jflux_t = []
    jflux = {jg.node_id: [] for jg in engine.junctions} if schedule.track_junction_fluxes else {}

    v0 = total_volume(engine, state)
    influx_cum = 0.0
    lateral_cum = 0.0

    def record(st):
        w, h_av = cell_surface_summary(engine, st)
        times.append(st.t)
        rows.append(_gauge_row(engine, st, gauges, w, h_av))
        v = total_volume(engine, st)
        audit.append([st.t, v, influx_cum, lateral_cum, (v - v0) - (influx_cum + lateral_cum)])

    record(state)
    for ts in list(snaps_todo):
        if ts <= state.t + 1e-15:
            snapshots[ts] = snapshot(engine, state)
            snaps_todo.remove(ts)

    next_tick = None
    if schedule.output_dt:
        next_tick = state.t + schedule.output_dt

    eps_t = 1e-9
    while state.t < schedule.end_time - 1e-12 and summary.steps < schedule.max_steps:
        cap = schedule.end_time - state.t
        if snaps_todo:
            cap = min(cap, snaps_todo[0] - state.t)
        if next_tick is not None:
            cap = min(cap, next_tick - state.t)
        state, rep = engine.step(state, dt_cap=cap)
        if schedule.track_junction_fluxes and engine.junctions:
            jflux_t.append(state.t)
            for jg in engine.junctions:
                jflux[jg.node_id].append(rep.junction_mass_rates[jg.node_id])
        influx_cum += rep.boundary_influx
        lateral_cum += rep.lateral_influx
        summary.steps += 1
        summary.final_time = state.t
        summary.min_depth = min(summary.min_depth, rep.min_depth)
        summary.max_junction_residual = max(summary.max_junction_residual, rep.junction_residual)
        summary.drain_limited_faces += rep.drain_limited_faces
        summary.bc_fallbacks += rep.bc_fallbacks
        summary.cuj1_supercritical |= rep.cuj1_supercritical
        summary.dt_min = min(summary.dt_min, rep.dt)
        summary.dt_max = max(summary.dt_max, rep.dt)
        if not (np.all(np.isfinite(state.area)) and np.all(np.isfinite(state.discharge))):
            from .scheme import SolverError

            raise SolverError(f"t={state.t:.6g}: non-finite state")
        hit_snap = snaps_todo and state.t >= snaps_todo[0] - eps_t
        if hit_snap:
            snapshots[snaps_todo.pop(0)] = snapshot(engine, state)
        if next_tick is not None and state.t >= next_tick - eps_t:
            record(state)
            while next_tick <= state.t + eps_t:
                next_tick += schedule.output_dt
        elif next_tick is None:
            record(state)
    if not times or times[-1] < state.t - 1e-15:
        record(state)
    for ts in snaps_todo:
        snapshots[ts] = snapshot(engine, state)

    return RunResult(
        times=np.asarray(times),
        gauge_labels=[gg.label for gg in gauges],
        gauge_rows=np.asarray(rows) if rows else np.zeros((0, 3 * len(gauges))),
        snapshots=snapshots,
        audit=np.asarray(audit),
        summary=summary,
        final_state=state,
        junction_fluxes=(
            {nid: (np.asarray(jflux_t), np.asarray(v)) for nid, v in jflux.items()}
            if schedule.track_junction_fluxes
            else {}
        ),
    )
