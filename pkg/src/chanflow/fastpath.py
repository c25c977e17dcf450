"""Compiled fixed-step kernel for convergence studies.

Grid-refinement studies take millions of tiny time steps, which the
vectorized engine cannot deliver at an acceptable pace.  This kernel handles
the restricted configuration those studies use - a single link with a flat
bed, one prismatic cross-section with a single linear segment, outflow at
both ends, no friction, fixed time step, fully wet - and is verified
step-for-step against the general engine by the test suite.  Anything
outside that envelope falls back to the general path.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    NUMBA = True
except Exception:  # pragma: no cover - numba is an optional accelerator
    class _NumbaShim:
        prange = staticmethod(range)

    numba = _NumbaShim()
    NUMBA = False


def _jit(**kw):
    if NUMBA:
        return numba.njit(cache=True, **kw)

    def deco(fn):
        return fn

    return deco


@_jit(fastmath=True)
def _run_kernel(area, q, s0, m, dx, dt, nsteps, g, eps, check_every):  # pragma: no cover
    n = area.shape[0]
    nf = n + 1
    w = np.empty(n)
    sw = np.empty(n)
    sq = np.empty(n)
    wm = np.empty(nf)
    wp = np.empty(nf)
    qm = np.empty(nf)
    qp = np.empty(nf)
    h1 = np.empty(nf)
    h2a = np.empty(nf)
    h2g = np.empty(nf)
    dtf = np.empty(nf)
    drain = np.empty(n)
    half = 0.5 * dx
    sqrt2 = np.sqrt(2.0)
    for step in range(nsteps):
        if check_every > 0 and step % check_every == 0:
            for j in range(n):
                if not (area[j] > 0.0) or not np.isfinite(area[j]):
                    return 1
        for j in range(n):
            a = area[j]
            w[j] = 2.0 * a / (s0 + np.sqrt(s0 * s0 + 2.0 * m * a))
        for j in range(n):
            if j == 0 or j == n - 1:
                sw[j] = 0.0
                sq[j] = 0.0
            else:
                dm = (w[j] - w[j - 1]) / dx
                dp = (w[j + 1] - w[j]) / dx
                sw[j] = 0.5 * (np.sign(dm) + np.sign(dp)) * min(abs(dm), abs(dp))
                dm = (q[j] - q[j - 1]) / dx
                dp = (q[j + 1] - q[j]) / dx
                sq[j] = 0.5 * (np.sign(dm) + np.sign(dp)) * min(abs(dm), abs(dp))
        for j in range(n):
            wm[j + 1] = w[j] + sw[j] * half
            qm[j + 1] = q[j] + sq[j] * half
            wp[j] = w[j] - sw[j] * half
            qp[j] = q[j] - sq[j] * half
        wm[0] = wp[0]
        qm[0] = qp[0]
        wp[nf - 1] = wm[nf - 1]
        qp[nf - 1] = qm[nf - 1]
        for f in range(nf):
            hm = wm[f] if wm[f] > 0.0 else 0.0
            hp = wp[f] if wp[f] > 0.0 else 0.0
            am_ = hm * (s0 + 0.5 * m * hm)
            ap_ = hp * (s0 + 0.5 * m * hp)
            a4 = am_ * am_ * am_ * am_
            if a4 > eps:
                um = sqrt2 * am_ * qm[f] / np.sqrt(2.0 * a4)
            else:
                um = sqrt2 * am_ * qm[f] / np.sqrt(a4 + eps)
            a4 = ap_ * ap_ * ap_ * ap_
            if a4 > eps:
                up = sqrt2 * ap_ * qp[f] / np.sqrt(2.0 * a4)
            else:
                up = sqrt2 * ap_ * qp[f] / np.sqrt(a4 + eps)
            qmm = am_ * um
            qpp = ap_ * up
            tm = s0 + m * hm
            tp = s0 + m * hp
            cm = np.sqrt(g * am_ / tm) if (am_ > 0.0 and tm > 0.0) else 0.0
            cp = np.sqrt(g * ap_ / tp) if (ap_ > 0.0 and tp > 0.0) else 0.0
            sp = max(0.0, max(um + cm, up + cp))
            sm = min(0.0, min(um - cm, up - cp))
            gap = sp - sm
            if gap > 1e-12:
                wa = sp / gap
                wb = sm / gap
                diff = sp * wb
                i1m = 0.5 * s0 * hm * hm + m * hm * hm * hm / 6.0
                i1p = 0.5 * s0 * hp * hp + m * hp * hp * hp / 6.0
                h1[f] = wa * qmm - wb * qpp + diff * (ap_ - am_)
                h2a[f] = wa * am_ * um * um - wb * ap_ * up * up + diff * (qpp - qmm)
                h2g[f] = g * (wa * i1m - wb * i1p)
            else:
                h1[f] = 0.0
                h2a[f] = 0.0
                h2g[f] = 0.0
        for j in range(n):
            outflow = max(0.0, h1[j + 1]) + max(0.0, -h1[j])
            drain[j] = dx * area[j] / outflow if outflow > 0.0 else 1e300
        for f in range(nf):
            lim = dt
            if h1[f] > 0.0 and f > 0:
                if drain[f - 1] < lim:
                    lim = drain[f - 1]
            elif h1[f] < 0.0 and f < nf - 1:
                if drain[f] < lim:
                    lim = drain[f]
            dtf[f] = lim
        for j in range(n):
            area[j] = area[j] - (dtf[j + 1] * h1[j + 1] - dtf[j] * h1[j]) / dx
            q[j] = (
                q[j]
                - (dtf[j + 1] * h2a[j + 1] - dtf[j] * h2a[j]) / dx
                - dt * (h2g[j + 1] - h2g[j]) / dx
            )
    return 0


def eligible(scenario) -> bool:
    """True when the scenario fits the compiled kernel's envelope."""
    net = scenario.network
    cfg = scenario.engine.cfg
    if len(net.links) != 1 or net.junctions():
        return False
    if cfg.fixed_dt is None or cfg.integrator != "euler":
        return False
    if np.any(net.cell_manning != 0.0):
        return False
    if not np.all(net.cell_flat) or net.face_bed[0] != 0.0 or np.any(net.face_bed != net.face_bed[0]):
        return False
    names = set(net.face_section_names)
    if len(names) != 1:
        return False
    tab = net.face_sections
    real = tab.hk[0][tab.hk[0] < 0.5e9]
    if len(real) != 2:
        return False
    dx = net.cell_dx
    if not np.allclose(dx, dx[0], rtol=0, atol=1e-12 * dx[0]):
        return False
    for node in net.boundary_nodes():
        if node.bc.kind != "outflow":
            return False
    if np.any(scenario.state.area <= 0.0):
        return False
    return True


def run_fixed_dt(scenario, check_every=10000):
    """Advance the scenario to its end time with the compiled kernel.

    Returns the final (area, discharge) or None when the configuration is
    outside the kernel envelope or a wet-only assumption breaks (the caller
    then uses the general engine)."""
    if not eligible(scenario):
        return None
    cfg = scenario.engine.cfg
    net = scenario.network
    dt = float(cfg.fixed_dt)
    nsteps = int(round(scenario.schedule.end_time / dt))
    if abs(nsteps * dt - scenario.schedule.end_time) > 1e-9 * max(scenario.schedule.end_time, 1.0):
        return None
    tab = net.face_sections
    s0 = float(tab.sk[0][0])
    m = float(tab.mk[0][0])
    area = scenario.state.area.copy()
    q = scenario.state.discharge.copy()
    status = _run_kernel(
        area, q, s0, m, float(net.cell_dx[0]), dt, nsteps,
        cfg.g, cfg.eps, int(check_every),
    )
    if status != 0:
        return None
    return area, q
