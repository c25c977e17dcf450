"""Fully discrete central-upwind evolution over a channel network.

One step is a sequence of vectorized passes over flat cell/face arrays:
reconstruct -> face states (with boundary ghosts and junction surfaces at
the link ends) -> wave speeds and CFL step -> fluxes -> draining limits ->
exact source integrals -> cell update with implicit friction -> junction
solves.  Mass is conserved to rounding because every face flux enters both
of its neighbours (cells or junction stubs) scaled by the same face-local
time step.

Positivity is guaranteed by the draining limits: a face's time step never
exceeds the time its donor cell needs to drain, so no cell can export more
water than it holds.  Water at rest is preserved exactly because the
reconstructed surfaces are face-continuous and the source integrals balance
the gravity flux gradient identically (see geometry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import boundary as bc_mod
from . import fluxes, junction as junc_mod, reconstruction as recon
from .geometry import _surface_integrals
from .network import Network


class SolverError(RuntimeError):
    """Numerical failure with time and location context."""


@dataclass
class SolverConfig:
    g: float = 9.81
    cfl: float = 0.5
    eps: float = 1e-12            # desingularization and friction floors
    q_still: float = 1e-12        # |Q| treated as still water
    dt_max: float = 10.0
    fixed_dt: float | None = None
    junction_model: str = "cuj1"  # "cuj1" | "cuj2"
    integrator: str = "euler"     # "euler" | "ssp2"


@dataclass
class FlowState:
    """Per-cell averages plus junction states at one time level."""

    t: float
    area: np.ndarray
    discharge: np.ndarray
    junc_surface: np.ndarray
    junc_discharge: np.ndarray
    wst_cache: np.ndarray | None = None

    def copy(self):
        return FlowState(
            self.t,
            self.area.copy(),
            self.discharge.copy(),
            self.junc_surface.copy(),
            self.junc_discharge.copy(),
            None if self.wst_cache is None else self.wst_cache.copy(),
        )


@dataclass
class StepReport:
    dt: float
    min_depth: float
    junction_residual: float      # max relative continuity residual
    drain_limited_faces: int
    boundary_influx: float        # volume through boundary faces this step
    lateral_influx: float
    cuj1_supercritical: bool
    bc_fallbacks: int
    junction_mass_rates: dict | None = None  # node id -> signed H1 per end


class Engine:
    """Reusable stepper bound to a network and a solver configuration.

    Holds only immutable precomputed data; stepping allocates fresh state,
    so independent simulations may run concurrently from the same network.
    """

    def __init__(self, network: Network, config: SolverConfig | None = None):
        self.net = network
        self.cfg = config or SolverConfig()
        if self.cfg.junction_model not in ("cuj1", "cuj2"):
            raise ValueError(f"unknown junction model {self.cfg.junction_model!r}")
        if self.cfg.integrator not in ("euler", "ssp2"):
            raise ValueError(f"unknown integrator {self.cfg.integrator!r}")
        net = network
        self.junctions = [junc_mod.build_junction_geom(net, n) for n in net.junctions()]
        self._junc_of_node = {jg.node_index: jg for jg in self.junctions}
        # boundary faces: (face, cell, at_left, node)
        self.bfaces = []
        for node in net.boundary_nodes():
            end = node.ends[0]
            at_left = not end.is_inflow      # upstream end of the link
            self.bfaces.append((end.terminal_face, end.terminal_cell, at_left, node))
        self._bctx = {
            f: bc_mod.FaceContext(
                tab=net.face_sections.take(np.array([f])),
                bed=float(net.face_bed[f]),
                g=self.cfg.g,
                eps=self.cfg.eps,
            )
            for f, _, _, _ in self.bfaces
        }
        self.any_friction = bool(np.any(net.cell_manning > 0.0))
        self.all_prismatic_flat = bool(np.all(net.cell_prismatic & net.cell_flat))
        self.h_valid_face = net.face_sections.h_valid
        # junction stub manning: taken from the adjacent terminal cell
        self._stub_manning = {
            jg.node_index: net.cell_manning[jg.terminal_cell] for jg in self.junctions
        }

    # -- public API ---------------------------------------------------------

    def initial_state(self, area, discharge, junc_surface=None, t=0.0):
        area = np.asarray(area, dtype=float)
        discharge = np.asarray(discharge, dtype=float)
        nj = len(self.junctions)
        if junc_surface is None:
            ys = np.array([jg.min_bed for jg in self.junctions])
        else:
            ys = np.asarray(junc_surface, dtype=float)
        return FlowState(t, area, discharge, ys, np.zeros(nj))

    def step(self, state: FlowState, dt_cap: float | None = None):
        if self.cfg.integrator == "ssp2":
            return self.step_ssp2(state, dt_cap)
        return self.step_euler(state, dt_cap)

    def step_euler(self, state: FlowState, dt_cap: float | None = None):
        new, rep, _ = self._advance(state, None, dt_cap, friction=True)
        return new, rep

    def step_ssp2(self, state: FlowState, dt_cap: float | None = None):
        """Three-stage semi-implicit second-order step (opt-in integrator).

        Stages one and two are Euler steps with implicit friction; the third
        stage corrects the friction-damped components only."""
        u1, rep1, parts1 = self._advance(state, None, dt_cap, friction=True)
        dt = rep1.dt
        e1, rep2, _ = self._advance(u1, dt, None, friction=True)
        a2 = 0.5 * state.area + 0.5 * e1.area
        q2 = 0.5 * state.discharge + 0.5 * e1.discharge
        ys2 = self._combine_junction_surfaces(state, e1, 0.5)
        qs2 = 0.5 * state.junc_discharge + 0.5 * e1.junc_discharge
        u2 = FlowState(state.t + dt, a2, q2, ys2, qs2, wst_cache=e1.wst_cache)
        nf, rep3, parts3 = self._advance(u2, dt, None, friction=False)
        g2 = parts3["g2"]
        fq = (nf.discharge - u2.discharge) / dt
        q3 = (u2.discharge + dt * dt * fq * g2) / (1.0 + (dt * g2) ** 2)
        qs3 = u2.junc_discharge
        if self.cfg.junction_model == "cuj2" and self.junctions:
            gs = parts3["junc_damp"]
            fqs = (nf.junc_discharge - u2.junc_discharge) / dt
            qs3 = (u2.junc_discharge + dt * dt * fqs * gs) / (1.0 + (dt * gs) ** 2)
        out = FlowState(state.t + dt, a2, q3, ys2, qs3, wst_cache=u2.wst_cache)
        report = replace(
            rep1,
            boundary_influx=0.5 * rep1.boundary_influx + 0.5 * rep2.boundary_influx,
            lateral_influx=0.5 * rep1.lateral_influx + 0.5 * rep2.lateral_influx,
            min_depth=float(self.net.cell_combined.depth_from_area(a2).min()),
        )
        return out, report

    def run(self, state: FlowState, schedule):
        from .output import collect_run  # local import: output layer sits above

        return collect_run(self, state, schedule)

    # -- internals ------------------------------------------------------------

    def _combine_junction_surfaces(self, sa: FlowState, sb: FlowState, w):
        if not self.junctions:
            return sa.junc_surface.copy()
        out = np.empty(len(self.junctions))
        for k, jg in enumerate(self.junctions):
            va = junc_mod.total_volume(jg, float(sa.junc_surface[k]))
            vb = junc_mod.total_volume(jg, float(sb.junc_surface[k]))
            target = (1.0 - w) * va + w * vb
            out[k] = junc_mod.solve_surface(jg, target, float(sb.junc_surface[k]))
        return out

    def _advance(self, state: FlowState, dt_forced, dt_cap, friction=True):
        """One Euler-type update.  Returns (new_state, StepReport, parts)."""
        net, cfg = self.net, self.cfg
        g = cfg.g
        A = state.area
        Q = state.discharge
        t = state.t
        cells = net.cells
        comb = net.cell_combined
        nc, nf = net.n_cells, net.n_faces

        # ---- reconstruction -------------------------------------------------
        w_st = recon.still_water_levels(cells, comb, A, w_start=state.wst_cache,
                                        vol_table=net.cell_volume_table)
        h_av = recon.bed_parallel_depths(comb, A)
        prev, nxt = net.prev_cell, net.next_cell
        qL_nb = np.where(prev >= 0, Q[np.maximum(prev, 0)], 0.0)
        qR_nb = np.where(nxt >= 0, Q[np.minimum(nxt, nc - 1)], 0.0)
        wet, still, w, l = recon.classify(cells, A, Q, w_st, h_av, cfg.q_still, qL_nb, qR_nb)
        l_mir = np.where(still, l - np.sign(cells.bedR - cells.bedL), 1.0)

        # junction ghosts (per end) and per-node cached data
        ghosts = {}
        for k, jg in enumerate(self.junctions):
            y = float(state.junc_surface[k])
            if cfg.junction_model == "cuj2":
                q_stub = np.full(jg.n_ends, state.junc_discharge[k])
            else:
                q_stub = Q[jg.terminal_cell]
            ghosts[jg.node_index] = junc_mod.stub_ghost(jg, y, q_stub, cfg.q_still)

        nb = self._neighbour_arrays(state, w_st, h_av, wet, still, l, l_mir, ghosts)

        dw_m, dq_m = recon.one_sided_backward(
            wet, w_st, h_av, l, Q, net.cell_dx, cells.bedL, cells.bedR,
            nb["wetL"], nb["wstL"], nb["havL"], nb["lL"], nb["qL"], nb["dxL"], nb["bfarL"],
        )
        dw_p, dq_p = recon.one_sided_forward(
            wet, w_st, h_av, l_mir, Q, net.cell_dx, cells.bedL, cells.bedR,
            nb["wetR"], nb["wstR"], nb["havR"], nb["lmR"], nb["qR"], nb["dxR"], nb["bfarR"],
        )
        # Cells with no water at all reconstruct along the bed (the degenerate
        # limit of the dry-pair stencil); anything else would manufacture
        # depth at their lower face.
        empty = A <= 0.0
        bed_slope = (cells.bedR - cells.bedL) / net.cell_dx
        dw_m = np.where(empty, bed_slope, dw_m)
        dw_p = np.where(empty, bed_slope, dw_p)
        dq_m = np.where(empty, 0.0, dq_m)
        dq_p = np.where(empty, 0.0, dq_p)
        slope_w = recon.minmod(dw_m, dw_p)
        slope_q = recon.minmod(dq_m, dq_p)
        w_up, w_dn, q_up, q_dn = recon.one_sided_values(w, l, slope_w, slope_q, Q, net.cell_dx)

        # ---- face states -----------------------------------------------------
        B = net.face_bed
        wm = np.empty(nf)
        wp = np.empty(nf)
        qm = np.empty(nf)
        qp = np.empty(nf)
        wm[net.cell_faceR] = w_dn
        qm[net.cell_faceR] = q_dn
        wp[net.cell_faceL] = w_up
        qp[net.cell_faceL] = q_up

        # junction sides of terminal faces: horizontal surface, model discharge
        for k, jg in enumerate(self.junctions):
            y = float(state.junc_surface[k])
            for e in range(jg.n_ends):
                f = int(jg.terminal_face[e])
                if jg.is_inflow[e]:
                    wp[f] = y
                    qp[f] = state.junc_discharge[k] if cfg.junction_model == "cuj2" else qm[f]
                else:
                    wm[f] = y
                    qm[f] = state.junc_discharge[k] if cfg.junction_model == "cuj2" else qp[f]

        # boundary ghosts
        bc_fallbacks = 0
        for f, c, at_left, node in self.bfaces:
            ctx = self._bctx[f]
            if at_left:
                h_int = max(0.0, wp[f] - B[f])
                q_int = qp[f]
            else:
                h_int = max(0.0, wm[f] - B[f])
                q_int = qm[f]
            h_g, q_g, ok = bc_mod.ghost_state(node.bc, t, ctx, h_int, q_int, at_left)
            if not ok:
                bc_fallbacks += 1
            if at_left:
                wm[f] = B[f] + h_g
                qm[f] = q_g
            else:
                wp[f] = B[f] + h_g
                qp[f] = q_g

        hm = np.maximum(0.0, wm - B)
        hp = np.maximum(0.0, wp - B)
        if np.any(hm > self.h_valid_face) or np.any(hp > self.h_valid_face):
            f = int(np.argmax(np.maximum(hm, hp) - self.h_valid_face))
            raise SolverError(
                f"t={t:.6g}: water depth exceeds the cross-section validity "
                f"range at face {f} (x={net.face_x[f]:.6g})"
            )
        secs = net.face_sections
        A_m = secs.area(hm)
        A_p = secs.area(hp)
        u_m = fluxes.desingularized_velocity(A_m, qm, cfg.eps)
        u_p = fluxes.desingularized_velocity(A_p, qp, cfg.eps)
        Q_m = A_m * u_m
        Q_p = A_p * u_p
        c_m = fluxes.celerity(g, A_m, secs.width(hm))
        c_p = fluxes.celerity(g, A_p, secs.width(hp))
        i1_m = secs.moment(hm)
        i1_p = secs.moment(hp)
        ap, am = fluxes.wave_speeds(u_m, c_m, u_p, c_p)

        # ---- time step -------------------------------------------------------
        if dt_forced is not None:
            dt = float(dt_forced)
        elif cfg.fixed_dt is not None:
            dt = float(cfg.fixed_dt)
        else:
            gap = ap[net.cell_faceL] - am[net.cell_faceR]
            ok = gap > 1e-12
            dt = cfg.dt_max
            if np.any(ok):
                dt = min(dt, cfg.cfl * float(np.min(net.cell_dx[ok] / gap[ok])))
            for jg in self.junctions:
                # wave leaving the link into the junction limits the stub
                fin = jg.terminal_face[jg.is_inflow]
                sp_in = ap[fin]
                good = sp_in > 1e-12
                if np.any(good):
                    dt = min(dt, cfg.cfl * float(np.min(jg.stub_len[jg.is_inflow][good] / sp_in[good])))
                fout = jg.terminal_face[~jg.is_inflow]
                sp_out = -am[fout]
                good = sp_out > 1e-12
                if np.any(good):
                    dt = min(dt, cfg.cfl * float(np.min(jg.stub_len[~jg.is_inflow][good] / sp_out[good])))
        if dt_cap is not None:
            dt = min(dt, float(dt_cap))
        if not (dt > 0.0) or not math.isfinite(dt):
            raise SolverError(f"t={t:.6g}: non-positive time step {dt}")

        # ---- fluxes and draining ----------------------------------------------
        H1, H2a, H2g = fluxes.face_fluxes(g, A_m, Q_m, u_m, i1_m, A_p, Q_p, u_p, i1_p, ap, am)

        out_r = np.maximum(0.0, H1[net.cell_faceR])
        out_l = np.maximum(0.0, -H1[net.cell_faceL])
        drain_den = out_r + out_l
        with np.errstate(divide="ignore", over="ignore"):
            cell_drain = np.where(
                drain_den > 0.0, net.cell_dx * A / np.where(drain_den > 0.0, drain_den, 1.0), np.inf
            )
        dtf = np.full(nf, dt)
        fl = net.face_cell_L
        fr = net.face_cell_R
        donor_left = (H1 > 0.0) & (fl >= 0)
        dtf = np.where(donor_left, np.minimum(dt, cell_drain[np.maximum(fl, 0)]), dtf)
        donor_right = (H1 < 0.0) & (fr >= 0)
        dtf = np.where(donor_right, np.minimum(dt, cell_drain[np.maximum(fr, 0)]), dtf)
        # junction stubs as donors at the terminal faces
        for k, jg in enumerate(self.junctions):
            gst = ghosts[jg.node_index]
            for e in range(jg.n_ends):
                f = int(jg.terminal_face[e])
                ln = float(jg.stub_len[e])
                ab = float(gst["abar"][e])
                gapf = ap[f] - am[f]
                if jg.is_inflow[e] and H1[f] < 0.0:
                    den = (-am[f]) * A_p[f] * (ap[f] - u_p[f])
                    if den > 0.0:
                        dtf[f] = min(dtf[f], ln * ab * gapf / den)
                elif (not jg.is_inflow[e]) and H1[f] > 0.0:
                    den = ap[f] * A_m[f] * (u_m[f] - am[f])
                    if den > 0.0:
                        dtf[f] = min(dtf[f], ln * ab * gapf / den)

        # ---- sources ----------------------------------------------------------
        if self.all_prismatic_flat:
            i2 = np.zeros(nc)
            bx = np.zeros(nc)
        else:
            parts = _surface_integrals(cells, cells.xL, cells.xR, w_up, w_dn, want_i2=True)
            i2 = parts["i2"]
            bx = (cells.bedR - cells.bedL) / cells.dx * parts["volume"]
        if self.any_friction and friction:
            hL = cells.tabL.depth_from_area(A)
            hR = cells.tabR.depth_from_area(A)
            pL = cells.tabL.perimeter(hL)
            pR = cells.tabR.perimeter(hR)
            rL = np.where(pL > 0.0, A / np.where(pL > 0.0, pL, 1.0), 0.0)
            rR = np.where(pR > 0.0, A / np.where(pR > 0.0, pR, 1.0), 0.0)
            g2 = fluxes.friction_coefficient(g, net.cell_manning, Q, A, 0.5 * (rL + rR), cfg.eps)
        else:
            g2 = np.zeros(nc)

        # ---- update ------------------------------------------------------------
        dtf_r = dtf[net.cell_faceR]
        dtf_l = dtf[net.cell_faceL]
        A_new = A - (dtf_r * H1[net.cell_faceR] - dtf_l * H1[net.cell_faceL]) / net.cell_dx
        bad = A_new < -1e-14 * np.maximum(1.0, A)
        if np.any(bad):
            j = int(np.argmax(bad))
            raise SolverError(
                f"t={t:.6g}: negative wetted area {A_new[j]:.3e} in cell {j} "
                f"(link {net.links[net.cell_link[j]].id}); positivity violated"
            )
        A_new = np.maximum(A_new, 0.0)
        den = 1.0 + dt * g2
        Q_new = (
            Q
            - (dtf_r * H2a[net.cell_faceR] - dtf_l * H2a[net.cell_faceL]) / net.cell_dx
            - dt * (H2g[net.cell_faceR] - H2g[net.cell_faceL] - g * i2 + g * bx) / net.cell_dx
        ) / den

        # ---- junction updates ----------------------------------------------------
        ys_new = state.junc_surface.copy()
        qs_new = state.junc_discharge.copy()
        max_res = 0.0
        lateral_in = 0.0
        junc_damp = np.zeros(max(len(self.junctions), 1))
        cuj1_super = False
        junc_rates = {}
        for k, jg in enumerate(self.junctions):
            y_old = float(state.junc_surface[k])
            tf = jg.terminal_face
            sgn = np.where(jg.is_inflow, 1.0, -1.0)
            junc_rates[jg.node_id] = sgn * H1[tf]
            net_in = float(np.sum(sgn * dtf[tf] * H1[tf]))
            node = self.net.nodes[jg.node_index]
            if node.lateral is not None:
                q_lat = node.lateral.value(t)
                net_in += dt * q_lat
                lateral_in += dt * q_lat
            v_old = junc_mod.total_volume(jg, y_old)
            target = v_old + net_in
            if target < -1e-10 * max(v_old, 1.0):
                raise SolverError(
                    f"t={t:.6g}: junction '{jg.node_id}' drained below empty "
                    f"(volume target {target:.3e})"
                )
            y_new = junc_mod.solve_surface(jg, target, y_old)
            ys_new[k] = y_new
            res = junc_mod.continuity_residual(jg, y_new, y_old, net_in)
            max_res = max(max_res, abs(res) / max(v_old, 1.0))
            if cfg.junction_model == "cuj2":
                h2_term = (H2a + H2g)[tf]
                mn = self._stub_manning[jg.node_index]
                qs_new[k] = junc_mod.solve_momentum(
                    jg, float(state.junc_discharge[k]), y_old, dt, g, h2_term, mn, cfg.eps
                )
                if friction:
                    vols = junc_mod.stub_volumes(jg, y_old)
                    a_st = vols / jg.stub_len
                    junc_damp[k] = 0.0 if np.all(a_st <= 0) else float(
                        np.sum(g * mn**2 * abs(state.junc_discharge[k]) * jg.stub_len)
                        / np.sum(jg.stub_len)
                    )
            else:
                fr_num = np.abs(np.where(jg.is_inflow, u_m[tf], u_p[tf]))
                fr_den = np.where(jg.is_inflow, c_m[tf], c_p[tf])
                if np.any((fr_den > 0.0) & (fr_num > fr_den)):
                    cuj1_super = True

        # ---- bookkeeping ----------------------------------------------------------
        influx = 0.0
        for f, c, at_left, node in self.bfaces:
            influx += (1.0 if at_left else -1.0) * dtf[f] * H1[f]
        report = StepReport(
            dt=dt,
            min_depth=float(comb.depth_from_area(A_new).min()),
            junction_residual=max_res,
            drain_limited_faces=int(np.sum(dtf < dt)),
            boundary_influx=float(influx),
            lateral_influx=lateral_in,
            cuj1_supercritical=cuj1_super,
            bc_fallbacks=bc_fallbacks,
            junction_mass_rates=junc_rates,
        )
        new_state = FlowState(t + dt, A_new, Q_new, ys_new, qs_new, wst_cache=w_st)
        parts = {"g2": g2, "junc_damp": junc_damp, "dtf": dtf, "H1": H1}
        return new_state, report, parts

    def _neighbour_arrays(self, state, w_st, h_av, wet, still, l, l_mir, ghosts):
        """Left/right stencil-neighbour fields with ghosts at the link ends.

        Boundary ends mirror the end cell (zero-gradient); junction ends use
        the stub pseudo-cell."""
        net = self.net
        Q = state.discharge
        prev, nxt = net.prev_cell, net.next_cell
        iL = np.maximum(prev, 0)
        iR = np.minimum(np.where(nxt >= 0, nxt, 0), net.n_cells - 1)
        noL = prev < 0
        noR = nxt < 0
        out = {
            "wetL": np.where(noL, wet, wet[iL]),
            "wstL": np.where(noL, w_st, w_st[iL]),
            "havL": np.where(noL, h_av, h_av[iL]),
            "lL": np.where(noL, l, l[iL]),
            "qL": np.where(noL, Q, Q[iL]),
            "dxL": np.where(noL, net.cell_dx, net.cell_dx[iL]),
            "bfarL": np.where(noL, net.cells.bedL, net.cells.bedL[iL]),
            "wetR": np.where(noR, wet, wet[iR]),
            "wstR": np.where(noR, w_st, w_st[iR]),
            "havR": np.where(noR, h_av, h_av[iR]),
            "lmR": np.where(noR, l_mir, l_mir[iR]),
            "qR": np.where(noR, Q, Q[iR]),
            "dxR": np.where(noR, net.cell_dx, net.cell_dx[iR]),
            "bfarR": np.where(noR, net.cells.bedR, net.cells.bedR[iR]),
        }
        for k, jg in enumerate(self.junctions):
            gst = ghosts[jg.node_index]
            qs = state.junc_discharge[k]
            for e in range(jg.n_ends):
                c = int(jg.terminal_cell[e])
                q_gh = qs if self.cfg.junction_model == "cuj2" else Q[c]
                if jg.is_inflow[e]:
                    # stub is the RIGHT neighbour of the link's last cell
                    out["wetR"][c] = gst["wet"][e]
                    out["wstR"][c] = gst["w_st"][e]
                    out["havR"][c] = gst["h_av"][e]
                    out["lmR"][c] = gst["l_mirror"][e]
                    out["qR"][c] = q_gh
                    out["dxR"][c] = gst["dx"][e]
                    out["bfarR"][c] = gst["far_bed"][e]
                else:
                    out["wetL"][c] = gst["wet"][e]
                    out["wstL"][c] = gst["w_st"][e]
                    out["havL"][c] = gst["h_av"][e]
                    out["lL"][c] = gst["l"][e]
                    out["qL"][c] = q_gh
                    out["dxL"][c] = gst["dx"][e]
                    out["bfarL"][c] = gst["far_bed"][e]
        return out


# ---------------------------------------------------------------------------
# Free-function views of single operations (testing surface)
# ---------------------------------------------------------------------------


def local_speeds(g, a_minus, q_minus, u_minus, top_minus, a_plus, q_plus, u_plus, top_plus):
    c_m = fluxes.celerity(g, a_minus, top_minus)
    c_p = fluxes.celerity(g, a_plus, top_plus)
    return fluxes.wave_speeds(u_minus, c_m, u_plus, c_p)


def stable_dt(engine: Engine, state: FlowState) -> float:
    """CFL time step the engine would choose for this state."""
    _, rep, _ = engine._advance(state, None, None)
    return rep.dt
