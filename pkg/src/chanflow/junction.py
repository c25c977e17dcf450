"""Junction control-volume updates.

A junction stores water on short stubs reaching from each attached link end
to the junction point, under a horizontal surface Y.  Two models:

* continuity only ("cuj1"): Y advances so the stub storage change matches
  the net mass flux through the terminal faces; terminal discharges are
  copied one-sided from the links.
* continuity plus momentum ("cuj2"): additionally a junction discharge Qs
  advances from a momentum balance over the stubs (flux and source terms
  frozen at the old time level, friction implicit), and the terminal-face
  discharges on the junction side are set to Qs.

The continuity equation is solved by a bracketed Newton iteration; its exact
derivative is the wet free-surface area of the stubs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    CellGeom,
    SectionSet,
    combined_sections,
    dvolume_dsurface_v,
    volume_v,
)


class JunctionError(RuntimeError):
    """Junction solve failed; message carries the node id."""


class _StubPolys:
    """Per-stub piecewise cubics in the junction surface Y.

    For a horizontal surface over fixed stub geometry, the stored volume,
    its Y-derivative, and the wall/bed source integrals are piecewise
    quartic between breakpoints (bed ends and profile knots lifted by both
    beds).  Each piece is fitted exactly from five evaluations of the
    closed-form integrals, so evaluation is a Horner step instead of the
    full kernel.
    """

    def __init__(self, cg, e):
        from .geometry import _real_knots, bed_slope_term_v, volume_v, wall_force_v

        bedL = float(cg.bedL[e])
        bedR = float(cg.bedR[e])
        knots = set(_real_knots(cg.tabL, e)[1:]) | set(_real_knots(cg.tabR, e)[1:])
        # a knot's waterline crossing enters/leaves the stub at both lifted
        # elevations, so pieces break at every bed + knot combination
        bps = {bedL, bedR}
        bps.update(bedL + k for k in knots)
        bps.update(bedR + k for k in knots)
        bps = sorted(bps)
        span = max(bps[-1] - bps[0], 1.0)
        bps.append(bps[-1] + 10.0 * span)
        self.lo = bps[0]
        self.edges = np.asarray(bps)
        sub = cg.take(np.array([e]))
        nodes_t = np.cos(np.pi * np.arange(5)[::-1] / 4.0)
        vander = np.vander(nodes_t, 5, increasing=True)
        self.vol = []
        self.i2 = []
        self.bx = []
        for a, b in zip(bps[:-1], bps[1:]):
            ys = 0.5 * (a + b) + 0.5 * (b - a) * nodes_t
            yv = ys[None, :].T
            vv = np.array([float(volume_v(sub, sub.xL, sub.xR, np.array([y]), np.array([y]))[0]) for y in ys])
            iv = np.array([float(wall_force_v(sub, sub.xL, sub.xR, np.array([y]), np.array([y]))[0]) for y in ys])
            bv = np.array([float(bed_slope_term_v(sub, sub.xL, sub.xR, np.array([y]), np.array([y]))[0]) for y in ys])
            self.vol.append(np.linalg.solve(vander, vv))
            self.i2.append(np.linalg.solve(vander, iv))
            self.bx.append(np.linalg.solve(vander, bv))

    def _locate(self, y):
        # piece index and scaled coordinate t in [-1, 1]
        e = self.edges
        j = int(np.searchsorted(e, y, side="right")) - 1
        j = min(max(j, 0), len(e) - 2)
        t = 2.0 * (y - e[j]) / (e[j + 1] - e[j]) - 1.0
        return j, t

    def volume(self, y):
        if y <= self.lo:
            return 0.0
        j, t = self._locate(y)
        c = self.vol[j]
        return max(c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4]))), 0.0)

    def dvolume(self, y):
        if y <= self.lo:
            return 0.0
        j, t = self._locate(y)
        c = self.vol[j]
        scale = 2.0 / (self.edges[j + 1] - self.edges[j])
        return max((c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4]))) * scale, 0.0)

    def wall_force(self, y):
        if y <= self.lo:
            return 0.0
        j, t = self._locate(y)
        c = self.i2[j]
        return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])))

    def bed_slope(self, y):
        if y <= self.lo:
            return 0.0
        j, t = self._locate(y)
        c = self.bx[j]
        return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])))


@dataclass
class JunctionGeom:
    """Precomputed stub geometry for one junction node.

    Stubs live in local coordinates [0, stub_len].  For an inflow end the
    left face is the link's terminal face and the right face the junction
    point; outflow ends are the mirror image.
    """

    node_id: str
    node_index: int
    is_inflow: np.ndarray        # (n_ends,)
    terminal_face: np.ndarray    # global face indices
    terminal_cell: np.ndarray    # global cell indices
    stub_len: np.ndarray
    cg: CellGeom                 # stub cells, one row per end
    comb: SectionSet             # combined stub profiles
    junction_bed: np.ndarray     # bed at the junction point per stub
    junction_tab: SectionSet     # profile at the junction point per stub
    min_bed: float
    polys: list = None           # per-end _StubPolys

    @property
    def n_ends(self):
        return len(self.stub_len)


def build_junction_geom(network, node) -> JunctionGeom:
    from .geometry import SectionSet as SS

    ends = node.ends
    is_inflow = np.array([e.is_inflow for e in ends])
    term_face = np.array([e.terminal_face for e in ends], dtype=np.int64)
    term_cell = np.array([e.terminal_cell for e in ends], dtype=np.int64)
    lens = np.array([e.stub_len for e in ends])
    stub_tab = SS([e.stub_section for e in ends])
    link_tab = network.face_sections.take(term_face)
    stub_bed = np.array([e.stub_bed for e in ends])
    link_bed = network.face_bed[term_face]
    # local frames: inflow stub runs link face -> junction point
    bedL = np.where(is_inflow, link_bed, stub_bed)
    bedR = np.where(is_inflow, stub_bed, link_bed)
    n = len(ends)
    tabL = SS._from_packed(
        np.where(is_inflow[:, None], link_tab.hk, stub_tab.hk),
        np.where(is_inflow[:, None], link_tab.sk, stub_tab.sk),
    )
    tabR = SS._from_packed(
        np.where(is_inflow[:, None], stub_tab.hk, link_tab.hk),
        np.where(is_inflow[:, None], stub_tab.sk, link_tab.sk),
    )
    cg = CellGeom(tabL, tabR, bedL, bedR, np.zeros(n), lens)
    polys = [_StubPolys(cg, e) for e in range(n)]
    return JunctionGeom(
        node_id=node.id,
        node_index=node.index,
        is_inflow=is_inflow,
        terminal_face=term_face,
        terminal_cell=term_cell,
        stub_len=lens,
        cg=cg,
        comb=combined_sections(tabL, tabR),
        junction_bed=stub_bed,
        junction_tab=stub_tab,
        min_bed=float(np.minimum(bedL, bedR).min()),
        polys=polys,
    )


# ---------------------------------------------------------------------------
# Continuity
# ---------------------------------------------------------------------------


def stub_volumes(jg: JunctionGeom, y: float):
    return np.array([p.volume(y) for p in jg.polys])


def total_volume(jg: JunctionGeom, y: float) -> float:
    return sum(p.volume(y) for p in jg.polys)


def continuity_residual(jg: JunctionGeom, y_new: float, y_old: float, net_inflow: float) -> float:
    """Storage change minus net inflow volume over the step (root at Y_new)."""
    return total_volume(jg, y_new) - total_volume(jg, y_old) - net_inflow


def continuity_jacobian(jg: JunctionGeom, y: float) -> float:
    """d(residual)/dY: total wet free-surface area of the stubs at Y."""
    return sum(p.dvolume(y) for p in jg.polys)


def solve_surface(jg: JunctionGeom, target_volume: float, y_start: float,
                  rtol: float = 1e-13, max_iter: int = 100) -> float:
    """Y with total stub volume equal to ``target_volume`` (monotone root)."""
    target = max(target_volume, 0.0)
    if target == 0.0:
        return jg.min_bed
    lo = jg.min_bed
    hi = max(y_start, lo + 1e-9)
    for _ in range(200):
        if total_volume(jg, hi) >= target:
            break
        hi = lo + 2.0 * (hi - lo)
    else:
        raise JunctionError(f"node '{jg.node_id}': cannot bracket junction surface")
    tol = rtol * max(target, 1.0)
    y = min(max(y_start, lo), hi)
    for _ in range(max_iter):
        res = total_volume(jg, y) - target
        if res > 0.0:
            hi = min(hi, y)
        elif res < 0.0:
            lo = max(lo, y)
        deriv = continuity_jacobian(jg, y)
        if deriv > 0.0:
            yn = y - res / deriv
            if not (lo < yn < hi):
                yn = 0.5 * (lo + hi)
        else:
            yn = 0.5 * (lo + hi)
        moved = abs(yn - y)
        y = yn
        if abs(res) <= tol and moved <= 4e-16 * max(1.0, abs(y)):
            return y
        if moved <= 1e-17 * max(1.0, abs(y)) and abs(res) <= 1e4 * tol:
            return y
    res = total_volume(jg, y) - target
    if abs(res) <= 1e4 * tol:
        return y
    raise JunctionError(
        f"node '{jg.node_id}': junction continuity did not converge "
        f"(target={target:.6e}, residual={res:.3e}, Y={y:.9e})"
    )


# ---------------------------------------------------------------------------
# Momentum (cuj2)
# ---------------------------------------------------------------------------


def stub_source_terms(jg: JunctionGeom, y: float, g: float):
    """Per-end momentum bracket pieces at a horizontal surface y:
    (g I1 at the junction point, g I2 over the stub, g Bx over the stub)."""
    h_s = np.maximum(0.0, y - jg.junction_bed)
    i1 = jg.junction_tab.moment(h_s)
    i2 = np.array([p.wall_force(y) for p in jg.polys])
    bx = np.array([p.bed_slope(y) for p in jg.polys])
    return g * i1, g * i2, g * bx


def solve_momentum(jg: JunctionGeom, qs_old: float, y_old: float, dt: float, g: float,
                   h2_terminal: np.ndarray, manning_n: np.ndarray, eps: float) -> float:
    """Junction discharge update: linear in the unknown with flux and source
    terms frozen at the old level and friction folded implicitly."""
    total_len = float(np.sum(jg.stub_len))
    if total_len <= 0.0:
        raise JunctionError(f"node '{jg.node_id}': zero total stub length")
    gi1, gi2, gbx = stub_source_terms(jg, y_old, g)
    contrib = np.where(
        jg.is_inflow,
        h2_terminal - gi1 + gi2 - gbx,
        h2_terminal - gi1 - gi2 + gbx,
    )
    forcing = float(np.sum(np.where(jg.is_inflow, contrib, -contrib)))
    # implicit friction: damping rate per stub from the stored state
    vols = stub_volumes(jg, y_old)
    a_stub = vols / jg.stub_len
    hL = jg.cg.tabL.depth_from_area(a_stub)
    hR = jg.cg.tabR.depth_from_area(a_stub)
    pL = jg.cg.tabL.perimeter(hL)
    pR = jg.cg.tabR.perimeter(hR)
    r = 0.5 * (np.where(pL > 0, a_stub / np.where(pL > 0, pL, 1.0), 0.0)
               + np.where(pR > 0, a_stub / np.where(pR > 0, pR, 1.0), 0.0))
    g2 = g * manning_n**2 * abs(qs_old) / np.maximum(a_stub * r ** (4.0 / 3.0), eps)
    damp = float(np.sum(g2 * jg.stub_len))
    return (qs_old * total_len + dt * forcing) / (total_len + dt * damp)


# ---------------------------------------------------------------------------
# Stub pseudo-cells for the reconstruction stencil
# ---------------------------------------------------------------------------


def stub_ghost(jg: JunctionGeom, y: float, q_stub: np.ndarray, q_still: float):
    """Per-end pseudo-cell fields used as the missing stencil neighbour.

    Returns dict arrays: wet, still, w_st, h_av, l, l_mirror, w, dx and the
    far bed (the junction-point bed)."""
    vols = stub_volumes(jg, y)
    abar = vols / jg.stub_len
    bmax = np.maximum(jg.cg.bedL, jg.cg.bedR)
    bmin = np.minimum(jg.cg.bedL, jg.cg.bedR)
    w_st = np.where(abar > 0.0, y, bmin)
    wet = w_st >= bmax
    still = (~wet) & (abar > 0.0) & (w_st > bmin) & (np.abs(q_stub) <= q_still)
    h_av = jg.comb.depth_from_area(abar)
    db = jg.cg.bedR - jg.cg.bedL
    safe = np.where(db != 0.0, np.abs(db), 1.0)
    l = np.where(still, (w_st - jg.cg.bedL) / safe, 1.0)
    l_mir = np.where(still, l - np.sign(db), 1.0)
    w = np.where(wet | still, w_st, h_av + 0.5 * (jg.cg.bedL + jg.cg.bedR))
    return {
        "wet": wet,
        "still": still,
        "w_st": w_st,
        "h_av": h_av,
        "l": l,
        "l_mirror": l_mir,
        "w": w,
        "dx": jg.stub_len,
        "far_bed": jg.junction_bed,
        "abar": abar,
    }
