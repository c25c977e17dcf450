"""Second-order wet/dry reconstruction of surface elevation and discharge.

Every cell gets a still-water level (the horizontal surface storing exactly
its average wetted area), a bed-parallel depth, and a wet/dry class:

* wet: the still-water level covers both faces; the cell surface is the
  still-water level.
* dry holding still water: the still-water level cuts the bed inside the
  cell; the surface is still horizontal and the pooling fraction l records
  which part of the cell is wet (l in [0,1] pools at the left face on an
  ascending bed, l in [-1,0] pools at the right face on a descending bed).
* dry: the surface runs parallel to the bed at the bed-parallel depth.

Slopes come from one-sided differences whose stencils depend on the wet/dry
classes of the pair (distances run between the midpoints of the wetted
patches), limited by minmod.  One-sided interface values tilt the surface
around the wet-patch midpoint so still water is never disturbed.
"""

from __future__ import annotations

import numpy as np

from .fluxes import desingularized_velocity
from .geometry import (CellGeom, FaceGeometry, SectionSet, combined_sections,
                       dvolume_dsurface_v, volume_v)


class ReconstructionError(RuntimeError):
    """Still-water solver failed to converge."""


def minmod(a, b):
    """minmod(a, b) = (sgn a + sgn b)/2 * min(|a|, |b|)."""
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def desingularize_velocity(area, q, eps=1e-12):
    """Regularized velocity u = sqrt(2) A Q / sqrt(A^4 + max(A^4, eps))."""
    return desingularized_velocity(area, q, eps)


# ---------------------------------------------------------------------------
# Still-water level and bed-parallel depth
# ---------------------------------------------------------------------------


def still_water_levels(cells: CellGeom, combined: SectionSet, abar, w_start=None,
                       vol_table=None, rtol=1e-13, max_iter=100):
    """Horizontal surface whose stored volume matches each cell average.

    Level-bed cells invert the combined face-area table in closed form; the
    rest run a bracketed Newton iteration on the exact volume function,
    polished to machine precision (the well-balanced property needs
    neighbouring still-water levels to agree to rounding).
    """
    abar = np.asarray(abar, dtype=float)
    n = cells.n
    lo = np.minimum(cells.bedL, cells.bedR)
    hi_depth = combined.depth_from_area(abar)
    flat = cells.bedL == cells.bedR
    w = np.where(flat, cells.bedL + hi_depth, 0.0)
    todo = (~flat) & (abar > 0.0)
    w = np.where((~flat) & ~todo, lo, w)
    if not np.any(todo):
        return w

    if vol_table is not None:
        # mask-based iteration on the full arrays: evaluations are cheap
        # piecewise-polynomial lookups, so subsetting would cost more than
        # it saves
        blo = lo.copy()
        bhi = np.maximum(cells.bedL, cells.bedR) + hi_depth
        x = np.clip(w_start, blo + 1e-14, bhi) if w_start is not None else 0.5 * (blo + bhi)
        x = np.where(todo, x, blo)
        tol = rtol * np.maximum(abar, 1.0)
        done = ~todo
        for _ in range(max_iter):
            res = vol_table.volume(x) / cells.dx - abar
            deriv = vol_table.dvolume(x) / cells.dx
            ok = deriv > 0.0
            step = np.where(ok, res / np.where(ok, deriv, 1.0), 0.0)
            tiny_step = np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(x))
            done |= (np.abs(res) <= tol) & (tiny_step | ~ok | (np.abs(res) <= 1e-4 * tol))
            if np.all(done):
                break
            upd = ~done
            blo = np.where(upd & (res < 0.0), np.maximum(blo, x), blo)
            bhi = np.where(upd & (res > 0.0), np.minimum(bhi, x), bhi)
            xn = np.where(ok, x - step, 0.5 * (blo + bhi))
            out = (xn <= blo) | (xn >= bhi)
            xn = np.where(out & tiny_step, x, np.where(out, 0.5 * (blo + bhi), xn))
            x = np.where(done, x, xn)
        else:
            res = np.where(todo, vol_table.volume(x) / cells.dx - abar, 0.0)
            bad = np.abs(res) > 1e4 * tol
            if np.any(bad):
                j = int(np.nonzero(bad)[0][0])
                raise ReconstructionError(
                    f"still-water level did not converge for cell {j}: "
                    f"abar={abar[j]:.6e}, residual={res[j]:.3e}, w={x[j]:.9e}"
                )
        return np.where(todo, x, w)

    idx = np.nonzero(todo)[0]
    sub = cells.take(idx)
    a_t = abar[idx]
    blo = lo[idx].copy()
    bhi = (np.maximum(cells.bedL, cells.bedR) + hi_depth)[idx]
    x = np.clip(w_start[idx], blo + 1e-14, bhi) if w_start is not None else 0.5 * (blo + bhi)
    tol = rtol * np.maximum(a_t, 1.0)
    done = np.zeros(len(idx), dtype=bool)
    for _ in range(max_iter):
        res = volume_v(sub, sub.xL, sub.xR, x, x) / sub.dx - a_t
        deriv = dvolume_dsurface_v(sub, sub.xL, sub.xR, x) / sub.dx
        ok = deriv > 0.0
        step = np.where(ok, res / np.where(ok, deriv, 1.0), 0.0)
        tiny_step = np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(x))
        done |= (np.abs(res) <= tol) & (tiny_step | ~ok | (np.abs(res) <= 1e-4 * tol))
        if np.all(done):
            break
        upd = ~done
        blo = np.where(upd & (res < 0.0), np.maximum(blo, x), blo)
        bhi = np.where(upd & (res > 0.0), np.minimum(bhi, x), bhi)
        xn = np.where(ok, x - step, 0.5 * (blo + bhi))
        out = (xn <= blo) | (xn >= bhi)
        xn = np.where(out & tiny_step, x, np.where(out, 0.5 * (blo + bhi), xn))
        x = np.where(done, x, xn)
    else:
        res = volume_v(sub, sub.xL, sub.xR, x, x) / sub.dx - a_t
        bad = np.abs(res) > 1e4 * tol
        if np.any(bad):
            j = int(np.nonzero(bad)[0][0])
            raise ReconstructionError(
                f"still-water level did not converge for cell {idx[j]}: "
                f"abar={a_t[j]:.6e}, residual={res[j]:.3e}, w={x[j]:.9e}"
            )
    w[idx] = x
    return w


def bed_parallel_depths(combined: SectionSet, abar):
    """Depth of the surface parallel to the bed storing each cell average:
    inverts (A_left(h) + A_right(h))/2 = abar in closed form."""
    return combined.depth_from_area(np.asarray(abar, dtype=float))


def classify(cells: CellGeom, abar, q, w_st, h_av, q_still, q_left=None, q_right=None):
    """Wet/dry classes, cell surface elevations and pooling fractions.

    A dry cell is treated as holding still water when it stores volume, its
    still-water level is above the lower face bed, and neither it nor its
    neighbours carry discharge beyond ``q_still``."""
    abar = np.asarray(abar, dtype=float)
    q = np.asarray(q, dtype=float)
    bmax = np.maximum(cells.bedL, cells.bedR)
    bmin = np.minimum(cells.bedL, cells.bedR)
    wet = w_st >= bmax
    calm = np.abs(q) <= q_still
    if q_left is not None:
        calm &= np.abs(q_left) <= q_still
    if q_right is not None:
        calm &= np.abs(q_right) <= q_still
    still = (~wet) & (abar > 0.0) & (w_st > bmin) & calm
    db = cells.bedR - cells.bedL
    safe = np.where(db != 0.0, np.abs(db), 1.0)
    l = np.where(still, (w_st - cells.bedL) / safe, 1.0)
    w = np.where(wet | still, w_st, h_av + 0.5 * (cells.bedL + cells.bedR))
    return wet, still, w, l


# ---------------------------------------------------------------------------
# Limited slopes
# ---------------------------------------------------------------------------


def _mirror_l(still, l, bedL, bedR):
    # pooling fraction seen in the mirrored axis: l - sign(bed jump)
    return np.where(still, l - np.sign(bedR - bedL), 1.0)


def one_sided_backward(wet, w_st, h_av, l, q, dx, bedL, bedR,
                       wetL, w_stL, h_avL, lL, qL, dxL, bedfarL):
    """Backward differences of surface and discharge for each cell given its
    left neighbour's classification (ghost values at link ends)."""
    dw_c1 = (w_st - w_stL) / (0.5 * (dx + dxL))
    dq_c1 = (q - qL) / (0.5 * (dx + dxL))

    den2 = 0.5 * (dxL + l * dx)
    dw_c2a = (w_st - w_stL) / den2
    dq_c2a = (q - qL) / den2
    dw_c2b = 2.0 * (bedL + h_av - w_stL) / dx
    dq_c2b = 2.0 * (q - qL) / dx

    den3 = 0.5 * ((1.0 + lL) * dxL + dx)
    dw_c3a = (w_st - w_stL) / den3
    dq_c3a = (q - qL) / den3
    dw_c3b = 2.0 * (w_st - bedL - h_avL) / dx
    dq_c3b = 2.0 * (q - qL) / dx

    den4 = 0.5 * ((1.0 + lL) * dxL + l * dx)
    dw_c4a = (w_st - w_stL) / den4
    dq_c4a = (q - qL) / den4
    dw_c4b = (bedR - bedL) / dx

    asc = bedR > bedL          # cell rises away from the shared face
    nb_adj = bedfarL > bedL    # neighbour's far face above the shared face

    dw = np.where(
        wetL & wet, dw_c1,
        np.where(
            wetL & ~wet, np.where(asc, dw_c2a, dw_c2b),
            np.where(
                ~wetL & wet, np.where(nb_adj, dw_c3a, dw_c3b),
                np.where(nb_adj & asc, dw_c4a, dw_c4b),
            ),
        ),
    )
    dq = np.where(
        wetL & wet, dq_c1,
        np.where(
            wetL & ~wet, np.where(asc, dq_c2a, dq_c2b),
            np.where(
                ~wetL & wet, np.where(nb_adj, dq_c3a, dq_c3b),
                np.where(nb_adj & asc, dq_c4a, 0.0),
            ),
        ),
    )
    return dw, dq


def one_sided_forward(wet, w_st, h_av, l_mir, q, dx, bedL, bedR,
                      wetR, w_stR, h_avR, lR_mir, qR, dxR, bedfarR):
    """Forward differences: the mirror image of the backward stencil table.

    ``l_mir``/``lR_mir`` are the pooling fractions seen in the mirrored axis
    (l - sign of the bed jump for cells holding still water)."""
    dw_c1 = (w_stR - w_st) / (0.5 * (dx + dxR))
    dq_c1 = (qR - q) / (0.5 * (dx + dxR))

    den2 = 0.5 * (dxR + l_mir * dx)
    dw_c2a = (w_stR - w_st) / den2
    dq_c2a = (qR - q) / den2
    dw_c2b = 2.0 * (w_stR - (bedR + h_av)) / dx
    dq_c2b = 2.0 * (qR - q) / dx

    den3 = 0.5 * ((1.0 + lR_mir) * dxR + dx)
    dw_c3a = (w_stR - w_st) / den3
    dq_c3a = (qR - q) / den3
    dw_c3b = 2.0 * (bedR + h_avR - w_st) / dx
    dq_c3b = 2.0 * (qR - q) / dx

    den4 = 0.5 * ((1.0 + lR_mir) * dxR + l_mir * dx)
    dw_c4a = (w_stR - w_st) / den4
    dq_c4a = (qR - q) / den4
    dw_c4b = (bedR - bedL) / dx

    desc = bedL > bedR          # cell rises away from the shared (right) face
    nb_adj = bedfarR > bedR     # neighbour's far face above the shared face

    dw = np.where(
        wetR & wet, dw_c1,
        np.where(
            wetR & ~wet, np.where(desc, dw_c2a, dw_c2b),
            np.where(
                ~wetR & wet, np.where(nb_adj, dw_c3a, dw_c3b),
                np.where(nb_adj & desc, dw_c4a, dw_c4b),
            ),
        ),
    )
    dq = np.where(
        wetR & wet, dq_c1,
        np.where(
            wetR & ~wet, np.where(desc, dq_c2a, dq_c2b),
            np.where(
                ~wetR & wet, np.where(nb_adj, dq_c3a, dq_c3b),
                np.where(nb_adj & desc, dq_c4a, 0.0),
            ),
        ),
    )
    return dw, dq


def one_sided_values(w, l, slope_w, slope_q, q, dx):
    """Interface values at the cell's own faces from the limited slopes.

    The tilt pivots at the wet-patch midpoint: offset l/2 from the left face
    for l >= 0, (1-l)/2 for pools at the right face (l < 0).  Returns
    (w_up, w_dn, q_up, q_dn): up = left-face plus side, dn = right-face
    minus side."""
    pos = l >= 0.0
    up_frac = np.where(pos, 0.5 * l, 0.5 * (1.0 - l))
    dn_frac = np.where(pos, 1.0 - 0.5 * l, 0.5 * (1.0 + l))
    w_up = w - slope_w * up_frac * dx
    w_dn = w + slope_w * dn_frac * dx
    q_up = q - slope_q * up_frac * dx
    q_dn = q + slope_q * dn_frac * dx
    return w_up, w_dn, q_up, q_dn


# ---------------------------------------------------------------------------
# Scalar wrappers for single cells
# ---------------------------------------------------------------------------


def _cell_geom(faceL: FaceGeometry, faceR: FaceGeometry):
    cg = CellGeom.from_faces(faceL, faceR)
    return cg, combined_sections(cg.tabL, cg.tabR)


def still_water_level(faceL: FaceGeometry, faceR: FaceGeometry, abar: float) -> float:
    """Still-water surface elevation for one cell (scalar convenience)."""
    cg, comb = _cell_geom(faceL, faceR)
    return float(still_water_levels(cg, comb, np.array([abar]))[0])


def average_depth(faceL: FaceGeometry, faceR: FaceGeometry, abar: float) -> float:
    """Bed-parallel depth for one cell."""
    cg, comb = _cell_geom(faceL, faceR)
    return float(bed_parallel_depths(comb, np.array([abar]))[0])


def classify_and_level(faceL: FaceGeometry, faceR: FaceGeometry, abar: float,
                       q: float = 0.0, q_still: float = 1e-12):
    """(w, wet, still, l) for one cell with no-momentum neighbours."""
    cg, comb = _cell_geom(faceL, faceR)
    a = np.array([abar])
    w_st = still_water_levels(cg, comb, a)
    h_av = bed_parallel_depths(comb, a)
    wet, still, w, l = classify(cg, a, np.array([q]), w_st, h_av, q_still)
    return float(w[0]), bool(wet[0]), bool(still[0]), float(l[0])
