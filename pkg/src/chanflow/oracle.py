"""Independent reference solutions and error norms for validation.

Steady profiles come from per-station energy-level solves (constant
discharge, constant specific energy per smooth branch, hydraulic jump
located by a momentum-flux balance), entirely separate from the
finite-volume path.  The dry-bed dam-break reference is the classical
self-similar rarefaction for a rectangular channel.  Fine-grid references
re-run the solver itself at high resolution and are cached on disk keyed by
the scenario content.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import GeometryError


class OracleError(RuntimeError):
    pass


@dataclass
class SteadyProfile:
    x: np.ndarray
    bed: np.ndarray
    h: np.ndarray
    w: np.ndarray
    q: np.ndarray
    energy: np.ndarray
    supercritical: np.ndarray
    shock_x: float | None = None


def _cell_mid_tables(network):
    comb = network.cell_combined
    bed = 0.5 * (network.cells.bedL + network.cells.bedR)
    x = 0.5 * (network.cells.xL + network.cells.xR)
    return comb, bed, x


def _critical_depths(comb, q, g):
    """Depth where g A^3 = Q^2 sigma_T, per cell (vectorized bisection)."""
    n = comb.n
    lo = np.zeros(n)
    hi = np.full(n, 1e-6)
    cap = np.where(np.isfinite(comb.h_valid), comb.h_valid * 0.999, 1e6)
    for _ in range(80):
        f = g * comb.area(hi) ** 3 - q * q * comb.width(hi)
        grow = (f <= 0.0) & (hi < cap)
        if not np.any(grow):
            break
        hi = np.where(grow, np.minimum(hi * 2.0, cap), hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f = g * comb.area(mid) ** 3 - q * q * comb.width(mid)
        lo = np.where(f < 0.0, mid, lo)
        hi = np.where(f < 0.0, hi, mid)
    return 0.5 * (lo + hi)


def _energy(comb, bed, q, g, h):
    a = np.maximum(comb.area(h), 1e-300)
    return 0.5 * q * q / (a * a) + g * (h + bed)


def _energy_root(comb, bed, q, g, e_star, h_crit, branch):
    """Depth with specific energy e_star on the requested branch."""
    n = comb.n
    if branch == "sub":
        lo = h_crit.copy()
        hi = np.maximum(h_crit * 2.0, 1e-4)
        cap = np.where(np.isfinite(comb.h_valid), comb.h_valid * 0.999, 1e6)
        for _ in range(100):
            f = _energy(comb, bed, q, g, hi) - e_star
            grow = (f < 0.0) & (hi < cap)
            if not np.any(grow):
                break
            hi = np.where(grow, np.minimum(hi * 2.0, cap), hi)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            f = _energy(comb, bed, q, g, mid) - e_star
            lo = np.where(f < 0.0, mid, lo)
            hi = np.where(f < 0.0, hi, mid)
        return 0.5 * (lo + hi)
    # supercritical branch: energy decreases with h up to h_crit
    lo = np.full(n, 1e-12)
    hi = h_crit.copy()
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f = _energy(comb, bed, q, g, mid) - e_star
        lo = np.where(f < 0.0, lo, mid)
        hi = np.where(f < 0.0, mid, hi)
    return 0.5 * (lo + hi)


def _momentum(comb_mom, comb, q, g, h):
    a = np.maximum(comb.area(h), 1e-300)
    return q * q / a + g * comb_mom(h)


def steady_profile(network, q_in: float, w_out: float, g: float = 9.81) -> SteadyProfile:
    """Steady flow with constant discharge against a downstream surface.

    Subcritical throughout when possible; otherwise a transcritical profile
    choked at the section of maximal critical energy, with a hydraulic jump
    placed where the momentum flux of the supercritical branch falls to the
    subcritical one coming up from the outlet.
    """
    comb, bed, x = _cell_mid_tables(network)
    n = len(x)
    q = float(q_in)
    h_crit = _critical_depths(comb, q, g)
    e_crit = _energy(comb, bed, q, g, h_crit)
    h_out = w_out - bed[-1]
    if h_out <= 0.0:
        raise OracleError("downstream surface below the bed")
    e_out = float(_energy(comb, bed, q, g, np.where(np.arange(n) == n - 1, h_out, h_out))[n - 1])

    if e_out >= e_crit.max() or q == 0.0:
        if q == 0.0:
            h = np.maximum(w_out - bed, 0.0)
            e = g * np.where(h > 0, w_out, bed)
            return SteadyProfile(x, bed, h, bed + h, np.zeros(n), e, np.zeros(n, bool))
        h = _energy_root(comb, bed, q, g, np.full(n, e_out), h_crit, "sub")
        e = _energy(comb, bed, q, g, h)
        return SteadyProfile(x, bed, h, bed + h, np.full(n, q), e, np.zeros(n, bool))

    # transcritical: control at the maximal critical energy
    crest = int(np.argmax(e_crit))
    e_up = float(e_crit[crest])
    h = np.empty(n)
    sup = np.zeros(n, dtype=bool)
    h[: crest + 1] = _energy_root(comb, bed, q, g, np.full(n, e_up), h_crit, "sub")[: crest + 1]
    h_super = _energy_root(comb, bed, q, g, np.full(n, e_up), h_crit, "super")
    h_sub_dn = _energy_root(comb, bed, q, g, np.full(n, e_out), h_crit, "sub")

    def mom(hh):
        a = np.maximum(comb.area(hh), 1e-300)
        return q * q / a + g * comb.moment(hh)

    m_super = mom(h_super)
    m_sub = mom(h_sub_dn)
    # the branches coincide at the crest; the jump sits where the
    # supercritical momentum flux falls back to the subcritical one
    jump = None
    started = False
    for j in range(crest + 1, n):
        if m_super[j] > m_sub[j] * (1.0 + 1e-12):
            started = True
        elif started:
            jump = j
            break
    if not started:
        jump = crest + 1
    if jump is None:
        raise OracleError("no admissible hydraulic jump location (choked outflow)")
    h[crest + 1: jump] = h_super[crest + 1: jump]
    sup[crest + 1: jump] = True
    h[jump:] = h_sub_dn[jump:]
    e = _energy(comb, bed, q, g, h)
    return SteadyProfile(
        x, bed, h, bed + h, np.full(n, q), e, sup, shock_x=float(x[jump])
    )


# ---------------------------------------------------------------------------
# Exact dry-bed dam break (rectangular channel)
# ---------------------------------------------------------------------------


def ritter_drybed(h0: float, x_dam: float, t: float, x, g: float = 9.81):
    """Self-similar dry-bed dam-break profile for a rectangular channel.

    h = (2 sqrt(g h0) - (x - x_dam)/t)^2 / (9 g) inside the fan, h0 behind
    the tail, dry ahead of the front at x_dam + 2 t sqrt(g h0).  Returns
    (h, u)."""
    if t <= 0.0:
        raise GeometryError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    c0 = np.sqrt(g * h0)
    xi = (x - x_dam) / t
    h = (2.0 * c0 - xi) ** 2 / (9.0 * g)
    u = 2.0 / 3.0 * (xi + c0)
    h = np.where(xi <= -c0, h0, h)
    u = np.where(xi <= -c0, 0.0, u)
    h = np.where(xi >= 2.0 * c0, 0.0, h)
    u = np.where(xi >= 2.0 * c0, 0.0, u)
    return h, u


# ---------------------------------------------------------------------------
# Fine-grid self-reference
# ---------------------------------------------------------------------------


def _scenario_hash(config: dict) -> str:
    payload = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def fine_grid_reference(family_name: str, n_ref: int, cache_dir=None, **family_kw):
    """Final-time cell profile of a built-in case at high resolution.

    Runs the solver itself (the compiled kernel when eligible) and caches
    the result as CSV keyed by the scenario content hash."""
    from . import fastpath
    from .output import Schedule, cell_surface_summary, collect_run
    from .scenario import builtin_config, load_scenario

    config = builtin_config(family_name, n=n_ref, **family_kw)
    key = _scenario_hash(config)
    cache = None
    if cache_dir is not None:
        cache = Path(cache_dir) / f"ref_{family_name}_{n_ref}_{key}.csv"
        if cache.exists():
            data = np.loadtxt(cache, delimiter=",", skiprows=1)
            return {"x": data[:, 0], "w": data[:, 1], "h": data[:, 2],
                    "q": data[:, 3], "area": data[:, 4]}
    sc = load_scenario(config)
    fast = fastpath.run_fixed_dt(sc)
    if fast is not None:
        area, q = fast
        state = sc.engine.initial_state(area, q)
        state.wst_cache = None
        w, h_av = cell_surface_summary(sc.engine, state)
    else:
        res = collect_run(sc.engine, sc.state, Schedule(end_time=sc.schedule.end_time))
        state = res.final_state
        w, h_av = cell_surface_summary(sc.engine, state)
        area, q = state.area, state.discharge
    out = {
        "x": 0.5 * (sc.network.cells.xL + sc.network.cells.xR),
        "w": w,
        "h": h_av,
        "q": q,
        "area": area,
    }
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        rows = np.column_stack([out["x"], out["w"], out["h"], out["q"], out["area"]])
        np.savetxt(cache, rows, delimiter=",", header="x,w,h,q,area",
                   fmt="%.16e", comments="")
    return out


def project_to_coarse(fine: np.ndarray, n_coarse: int) -> np.ndarray:
    """Cell-average projection of a fine uniform-grid field onto a coarse
    grid; the fine grid must be an integer refinement."""
    n_fine = len(fine)
    if n_fine % n_coarse != 0:
        raise OracleError(f"grids not nested: {n_fine} vs {n_coarse}")
    r = n_fine // n_coarse
    return fine.reshape(n_coarse, r).mean(axis=1)


def error_norms(computed, reference, dx, rel_floor=1e-300):
    """(L1, relative L2, Linf) between fields on a common grid.

    L1 integrates |f - f_ref| dx; the relative L2 norm is the root of the
    length-weighted mean of ((f - f_ref)/f_ref)^2."""
    computed = np.asarray(computed, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if computed.shape != reference.shape:
        raise OracleError(f"shape mismatch: {computed.shape} vs {reference.shape}")
    dx = np.broadcast_to(np.asarray(dx, dtype=float), computed.shape)
    diff = computed - reference
    l1 = float(np.sum(np.abs(diff) * dx))
    total = np.sum(dx)
    safe = np.abs(reference) > rel_floor
    rel = np.where(safe, diff / np.where(safe, reference, 1.0), 0.0)
    l2rel = float(np.sqrt(np.sum(rel * rel * dx) / total))
    linf = float(np.max(np.abs(diff)))
    return l1, l2rel, linf
