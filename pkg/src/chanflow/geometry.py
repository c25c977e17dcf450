"""Channel cross-section geometry and exact hydrostatic integrals.

A cross-section is a piecewise-linear width profile sigma(y): width of the
channel at height y above the local bed.  All integrals the solver needs
(wetted area, pressure-force moment, water volume between two stations,
wall-pressure and bed-slope source integrals) have closed polynomial forms
for this profile class and are evaluated exactly.  Exactness is load-bearing:
the discrete balance between flux and source terms for water at rest holds
only because every integral here is a polynomial antiderivative, never a
quadrature.

Volumes and source integrals over a cell assume the bed and the water
surface vary linearly between the two bounding faces, and the width profile
blends linearly between the face profiles.  Integration runs along the
channel axis, splitting the cell at the stations where the (linear) depth
crosses a profile knot, so each sub-interval integrates a plain polynomial.
This is algebraically identical to the depth-integrated form but remains
numerically stable when the depth is nearly constant along the cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric input (bad profile table, negative depth, ...)."""


# Padding step used to extend profile tables past their last knot.  The last
# segment is continued linearly, so depths up to ~1e9 m stay on the
# extrapolated line and no per-call special casing is needed.
_PAD_STEP = 1.0e9


class CrossSection:
    """Piecewise-linear depth -> width profile of a channel face.

    points: sequence of (depth, width) pairs with strictly increasing depths
    starting at 0 and non-negative widths.  Above the last knot the profile
    extrapolates the final segment linearly (vertical walls when the final
    segment is vertical).
    """

    __slots__ = ("depths", "widths")

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise GeometryError("cross-section needs at least 2 (depth, width) pairs")
        depths, widths = pts[:, 0].copy(), pts[:, 1].copy()
        if depths[0] != 0.0:
            raise GeometryError("cross-section table must start at depth 0")
        if np.any(np.diff(depths) <= 0.0):
            raise GeometryError("cross-section depths must be strictly increasing")
        if np.any(widths < 0.0):
            raise GeometryError("cross-section widths must be non-negative")
        if not (np.all(np.isfinite(depths)) and np.all(np.isfinite(widths))):
            raise GeometryError("cross-section table must be finite")
        self.depths = depths
        self.widths = widths

    def as_table(self):
        return [[float(h), float(s)] for h, s in zip(self.depths, self.widths)]

    def __eq__(self, other):
        return (
            isinstance(other, CrossSection)
            and self.depths.shape == other.depths.shape
            and np.array_equal(self.depths, other.depths)
            and np.array_equal(self.widths, other.widths)
        )

    def __repr__(self):
        return f"CrossSection({self.as_table()})"


@dataclass(frozen=True)
class FaceGeometry:
    """A cell interface: bed elevation, width profile and station coordinate."""

    bed: float
    section: CrossSection
    x: float = 0.0


class SectionSet:
    """Packed profile tables for a batch of faces, ready for vector kernels.

    Arrays are (n, K): knot depths ``hk``, knot widths ``sk``, segment slopes
    ``mk`` (column j covers [hk_j, hk_{j+1}); the last column carries the
    extrapolation slope), cumulative areas ``acum`` and first moments
    ``gcum`` (integral of y*sigma) at the knots, and per-segment bank-length
    factors ``pfac`` for wetted perimeters.
    """

    __slots__ = ("hk", "sk", "mk", "acum", "gcum", "pfac", "h_valid", "_acum_search", "n", "K", "_rows")

    def __init__(self, sections):
        sections = list(sections)
        if not sections:
            raise GeometryError("empty section set")
        kmax = max(len(s.depths) for s in sections) + 1
        n = len(sections)
        hk = np.empty((n, kmax))
        sk = np.empty((n, kmax))
        for i, sec in enumerate(sections):
            k = len(sec.depths)
            hk[i, :k] = sec.depths
            sk[i, :k] = sec.widths
            slope = (sec.widths[-1] - sec.widths[-2]) / (sec.depths[-1] - sec.depths[-2])
            for j in range(k, kmax):
                step = _PAD_STEP * (j - k + 1)
                hk[i, j] = sec.depths[-1] + step
                sk[i, j] = sec.widths[-1] + slope * step
        self._finish(hk, sk)

    @classmethod
    def _from_packed(cls, hk, sk):
        obj = cls.__new__(cls)
        obj._finish(hk, sk)
        return obj

    def _finish(self, hk, sk):
        n, K = hk.shape
        dh = np.diff(hk, axis=1)
        mk = np.empty_like(hk)
        mk[:, :-1] = np.diff(sk, axis=1) / dh
        mk[:, -1] = mk[:, -2]
        acum = np.zeros_like(hk)
        acum[:, 1:] = np.cumsum(0.5 * (sk[:, :-1] + sk[:, 1:]) * dh, axis=1)
        # gcum: integral of y*sigma(y) dy from 0 to each knot
        a = hk[:, :-1]
        seg = a * sk[:, :-1] * dh + (sk[:, :-1] + a * mk[:, :-1]) * dh**2 / 2.0 + mk[:, :-1] * dh**3 / 3.0
        gcum = np.zeros_like(hk)
        gcum[:, 1:] = np.cumsum(seg, axis=1)
        pfac = np.sqrt(1.0 + 0.25 * mk**2)
        # Depth at which the extrapolated width turns negative.  Real knot
        # widths are non-negative by validation, so a sign change can only
        # happen along the extrapolation line (padding columns).
        neg = sk < 0.0
        has_neg = neg.any(axis=1)
        j = np.argmax(neg, axis=1)
        jm = np.maximum(j - 1, 0)
        rows = np.arange(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            h_cross = hk[rows, jm] - sk[rows, jm] / mk[rows, jm]
        h_valid = np.where(has_neg, h_cross, np.inf)
        # Knots past the validity depth (negative extrapolated widths) must
        # never bracket an area search.
        acum_search = np.where(hk <= h_valid[:, None], acum, np.inf)
        self.hk, self.sk, self.mk = hk, sk, mk
        self.acum, self.gcum, self.pfac = acum, gcum, pfac
        self._acum_search = acum_search
        self.h_valid = h_valid
        self.n, self.K = n, K
        self._rows = np.arange(n)

    def take(self, idx):
        return SectionSet._from_packed(self.hk[idx], self.sk[idx])

    # -- pointwise quantities ---------------------------------------------

    def width(self, h):
        """Width at depth h (h >= 0, broadcastable against the rows)."""
        h = np.asarray(h, dtype=float)
        p = np.clip(np.sum(self.hk <= h[..., None], axis=-1) - 1, 0, self.K - 1)
        rows = self._rows if p.shape == (self.n,) else np.arange(p.shape[0]) % self.n
        a = self.hk[rows, p]
        s = self.sk[rows, p]
        m = self.mk[rows, p]
        return s + m * (h - a)

    def area(self, h):
        """Wetted area: integral of sigma from 0 to h (h >= 0)."""
        h = np.asarray(h, dtype=float)
        p = np.clip(np.sum(self.hk <= h[..., None], axis=-1) - 1, 0, self.K - 1)
        rows = self._rows if p.shape == (self.n,) else np.arange(p.shape[0]) % self.n
        a = self.hk[rows, p]
        s = self.sk[rows, p]
        m = self.mk[rows, p]
        ac = self.acum[rows, p]
        t = h - a
        return ac + t * (s + 0.5 * m * t)

    def moment(self, h):
        """Pressure moment: integral of (h - y) * sigma(y) dy from 0 to h."""
        h = np.asarray(h, dtype=float)
        d = h[..., None] - self.hk
        segw = np.empty_like(self.hk)
        segw[..., :-1] = np.diff(self.hk, axis=-1)
        segw[..., -1] = np.inf
        t = np.clip(d, 0.0, segw)
        out = self.sk * (d * t - 0.5 * t * t) + self.mk * (0.5 * d * t * t - t**3 / 3.0)
        return np.sum(np.where(t > 0.0, out, 0.0), axis=-1)

    def perimeter(self, h):
        """Wetted perimeter: bottom width plus both bank arc lengths."""
        h = np.asarray(h, dtype=float)
        d = h[..., None] - self.hk
        segw = np.empty_like(self.hk)
        segw[..., :-1] = np.diff(self.hk, axis=-1)
        segw[..., -1] = np.inf
        t = np.clip(d, 0.0, segw)
        return self.sk[..., 0] + 2.0 * np.sum(t * self.pfac, axis=-1)

    def depth_from_area(self, area):
        """Inverse of ``area``; exact per-segment quadratic solve."""
        area = np.asarray(area, dtype=float)
        p = np.clip(np.sum(self._acum_search < area[..., None], axis=-1) - 1, 0, self.K - 1)
        rows = self._rows if p.shape == (self.n,) else np.arange(p.shape[0]) % self.n
        a = self.hk[rows, p]
        s = self.sk[rows, p]
        m = self.mk[rows, p]
        ac = self.acum[rows, p]
        da = np.maximum(area - ac, 0.0)
        disc = np.maximum(s * s + 2.0 * m * da, 0.0)
        den = s + np.sqrt(disc)
        t = np.where(den > 0.0, 2.0 * da / np.where(den > 0.0, den, 1.0), 0.0)
        return a + t


class SurfaceVolumeTable:
    """Per-cell water volume under a horizontal surface, as piecewise cubics.

    Between breakpoints (the two face beds and every profile knot lifted by
    either bed) the stored volume is an exact quartic in the surface
    elevation (the waterline station is linear in the surface and the
    blended area is of joint degree three in station and surface), so each
    piece is fitted once from five exact evaluations and then evaluated with
    a Horner step.  This is the hot path of the still-water solve.
    """

    __slots__ = ("edges", "vol_c", "lo", "n", "P", "_rows")

    def __init__(self, cg: "CellGeom", edges=None, vol_c=None):
        if edges is not None:
            self.edges, self.vol_c = edges, vol_c
        else:
            n = cg.n
            cols = [cg.bedL[:, None], cg.bedR[:, None]]
            for tab in (cg.tabL, cg.tabR):
                real = np.where(tab.hk < 0.5 * _PAD_STEP + tab.hk[:, :1], tab.hk, np.nan)
                top = np.nanmax(real, axis=1)
                capped = np.minimum(tab.hk, top[:, None])
                cols.append(cg.bedL[:, None] + capped)
                cols.append(cg.bedR[:, None] + capped)
            edges = np.sort(np.concatenate(cols, axis=1), axis=1)
            # deduplicate by nudging equal edges apart along the last axis
            span = np.maximum(edges[:, -1] - edges[:, 0], 1.0)
            edges = np.concatenate([edges, (edges[:, -1] + 10.0 * span)[:, None]], axis=1)
            P = edges.shape[1]
            nodes_t = np.cos(np.pi * np.arange(5)[::-1] / 4.0)
            vinv = np.linalg.inv(np.vander(nodes_t, 5, increasing=True))
            vol_c = np.zeros((n, P - 1, 5))
            for j in range(P - 1):
                a, b = edges[:, j], edges[:, j + 1]
                vals = np.empty((n, 5))
                for k, tk in enumerate(nodes_t):
                    y = 0.5 * (a + b) + 0.5 * (b - a) * tk
                    vals[:, k] = volume_v(cg, cg.xL, cg.xR, y, y)
                vol_c[:, j, :] = vals @ vinv.T
            self.edges = edges
            self.vol_c = vol_c
        self.lo = self.edges[:, 0]
        self.n, self.P = self.edges.shape
        self._rows = np.arange(self.n)

    def take(self, idx):
        return SurfaceVolumeTable(None, edges=self.edges[idx], vol_c=self.vol_c[idx])

    def _locate(self, w):
        # duplicated edges (collapsed padding) sit consecutively, so counting
        # piece starts at or below w always lands past them
        j = np.sum(self.edges[:, :-1] <= w[:, None], axis=1) - 1
        j = np.clip(j, 0, self.P - 2)
        e0 = self.edges[self._rows, j]
        e1 = self.edges[self._rows, j + 1]
        t = 2.0 * (w - e0) / np.maximum(e1 - e0, 1e-300) - 1.0
        return j, t, e1 - e0

    def volume(self, w):
        w = np.asarray(w, dtype=float)
        j, t, _ = self._locate(w)
        c = self.vol_c[self._rows, j]
        v = c[:, 0] + t * (c[:, 1] + t * (c[:, 2] + t * (c[:, 3] + t * c[:, 4])))
        return np.where(w <= self.lo, 0.0, np.maximum(v, 0.0))

    def dvolume(self, w):
        w = np.asarray(w, dtype=float)
        j, t, width = self._locate(w)
        c = self.vol_c[self._rows, j]
        d = (c[:, 1] + t * (2.0 * c[:, 2] + t * (3.0 * c[:, 3] + t * 4.0 * c[:, 4]))) \
            * 2.0 / np.maximum(width, 1e-300)
        return np.where(w <= self.lo, 0.0, np.maximum(d, 0.0))


def _real_knots(tab: SectionSet, i: int):
    """Knot depths of row i below the padding region."""
    hk = tab.hk[i]
    jumps = np.diff(hk) > 0.5 * _PAD_STEP
    if jumps.any():
        return hk[: int(np.argmax(jumps)) + 1]
    return hk


def combined_sections(tabL: SectionSet, tabR: SectionSet) -> SectionSet:
    """Per-row profile whose area is the mean of the two rows' areas.

    Inverting its area solves (A_left(h) + A_right(h))/2 = target, which is
    both the bed-parallel depth equation and the level-bed still-water case.
    Widths extrapolated past one table's validity clamp at zero; the solver
    never uses depths beyond the joint validity range.
    """
    if np.array_equal(tabL.hk, tabR.hk):
        return SectionSet._from_packed(tabL.hk.copy(), 0.5 * (tabL.sk + tabR.sk))
    secs = []
    for i in range(tabL.n):
        knots = np.unique(np.concatenate([_real_knots(tabL, i), _real_knots(tabR, i)]))
        wa = tabL.take([i]).width(knots)
        wb = tabR.take([i]).width(knots)
        wid = np.maximum(0.5 * (wa + wb), 0.0)
        secs.append(CrossSection(np.column_stack([knots, wid])))
    return SectionSet(secs)


# ---------------------------------------------------------------------------
# Scalar operations on a single cross-section (thin wrappers over SectionSet)
# ---------------------------------------------------------------------------


def _single(section: CrossSection) -> SectionSet:
    return SectionSet([section])


def width_at(section: CrossSection, h: float) -> float:
    """Channel width at depth h (linear extrapolation above the last knot)."""
    if h < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h}")
    return float(_single(section).width(np.array([h]))[0])


def area(section: CrossSection, h: float) -> float:
    """Wetted area at depth h."""
    if h < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h}")
    return float(_single(section).area(np.array([h]))[0])


def depth_from_area(section: CrossSection, a: float) -> float:
    """Depth whose wetted area equals ``a`` (exact inverse of ``area``)."""
    if a < 0.0:
        raise GeometryError(f"area must be non-negative, got {a}")
    return float(_single(section).depth_from_area(np.array([a]))[0])


def wetted_perimeter(section: CrossSection, h: float) -> float:
    if h < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h}")
    return float(_single(section).perimeter(np.array([h]))[0])


def hydraulic_radius(section: CrossSection, h: float) -> float:
    """A/P with R = 0 at zero depth."""
    if h < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h}")
    if h == 0.0:
        return 0.0
    tab = _single(section)
    a = float(tab.area(np.array([h]))[0])
    p = float(tab.perimeter(np.array([h]))[0])
    return a / p if p > 0.0 else 0.0


def section_moment(section: CrossSection, h: float) -> float:
    """Integral of (h - y) sigma(y) dy from 0 to h (face pressure moment)."""
    if h < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h}")
    return float(_single(section).moment(np.array([h]))[0])


# ---------------------------------------------------------------------------
# Cell-level integrals (two faces, linear blends along the channel axis)
# ---------------------------------------------------------------------------


class CellGeom:
    """Geometry bundle for a batch of cells: the two bounding faces of each.

    tabL/tabR hold one profile row per cell; bedL/bedR/xL/xR are (n,).
    """

    __slots__ = ("tabL", "tabR", "bedL", "bedR", "xL", "xR", "dx", "n")

    def __init__(self, tabL: SectionSet, tabR: SectionSet, bedL, bedR, xL, xR):
        self.tabL, self.tabR = tabL, tabR
        self.bedL = np.asarray(bedL, dtype=float)
        self.bedR = np.asarray(bedR, dtype=float)
        self.xL = np.asarray(xL, dtype=float)
        self.xR = np.asarray(xR, dtype=float)
        self.dx = self.xR - self.xL
        if np.any(self.dx <= 0.0):
            raise GeometryError("cell faces must have strictly increasing x")
        self.n = len(self.dx)

    @classmethod
    def from_faces(cls, faceL: FaceGeometry, faceR: FaceGeometry):
        return cls(
            SectionSet([faceL.section]),
            SectionSet([faceR.section]),
            [faceL.bed],
            [faceR.bed],
            [faceL.x],
            [faceR.x],
        )

    def take(self, idx):
        return CellGeom(
            self.tabL.take(idx),
            self.tabR.take(idx),
            self.bedL[idx],
            self.bedR[idx],
            self.xL[idx],
            self.xR[idx],
        )


def _wet_window(cg: CellGeom, x1, x2, wL, wR):
    """Clip [x1,x2] to the sub-interval where the linear surface is above the
    linear bed.  Returns (x1p, x2p, hLa, s) with hLa the affine depth at xL
    and s its slope; empty windows come back with x2p == x1p."""
    hLa = wL - cg.bedL
    hRa = wR - cg.bedR
    s = (hRa - hLa) / cg.dx
    nz = s != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = cg.xL - hLa / np.where(nz, s, 1.0)
    x1p = np.where(nz & (s > 0.0), np.maximum(x1, x0), x1)
    x2p = np.where(nz & (s < 0.0), np.minimum(x2, x0), x2)
    dry = (~nz) & (hLa <= 0.0)
    x2p = np.where(dry | (x2p < x1p), x1p, x2p)
    return x1p, x2p, hLa, s


def _breaks(cg: CellGeom, x1p, x2p, hLa, s):
    """Sorted station array splitting the window at profile-knot crossings."""
    n = cg.n
    nz = s != 0.0
    sdiv = np.where(nz, s, 1.0)
    cols = [x1p[:, None], x2p[:, None]]
    for tab in (cg.tabL, cg.tabR):
        xc = cg.xL[:, None] + (tab.hk - hLa[:, None]) / sdiv[:, None]
        xc = np.where(nz[:, None], xc, x1p[:, None])
        cols.append(np.clip(xc, x1p[:, None], x2p[:, None]))
    return np.sort(np.concatenate(cols, axis=1), axis=1)


def _seg_coeffs(tab: SectionSet, h_a, h_mid, s):
    """Polynomial coefficients (in the local axis offset xi) on one sub-
    interval: F0 = area(h(xi)) as quadratic c0+c1 xi+c2 xi^2, and the moment
    M(h(xi)) as cubic d0..d3.  h(xi) = h_a + s xi stays within one profile
    segment on the sub-interval (h_mid selects it)."""
    p = np.clip(np.sum(tab.hk[:, None, :] <= h_mid[:, :, None], axis=-1) - 1, 0, tab.K - 1)
    rows = tab._rows[:, None]
    a = tab.hk[rows, p]
    sg = tab.sk[rows, p]
    m = tab.mk[rows, p]
    ac = tab.acum[rows, p]
    gc = tab.gcum[rows, p]
    d = h_a - a
    sx = s[:, None]
    c0 = ac + d * (sg + 0.5 * m * d)
    c1 = sx * (sg + m * d)
    c2 = 0.5 * m * sx * sx
    # moment M(h) = h*F0(h) - G(h); G(h) = gc + a*sg*t + (sg + a*m)t^2/2 + m t^3/3
    t0, t1 = d, sx
    g0 = gc + a * sg * t0 + 0.5 * (sg + a * m) * t0 * t0 + m * t0**3 / 3.0
    g1 = a * sg * t1 + (sg + a * m) * t0 * t1 + m * t0 * t0 * t1
    g2 = 0.5 * (sg + a * m) * t1 * t1 + m * t0 * t1 * t1
    g3 = m * t1**3 / 3.0
    h0 = h_a
    d0 = h0 * c0 - g0
    d1 = h0 * c1 + sx * c0 - g1
    d2 = h0 * c2 + sx * c1 - g2
    d3 = sx * c2 - g3
    return (c0, c1, c2), (d0, d1, d2, d3), (sg + m * d, m * sx)


def _surface_integrals(cg: CellGeom, x1, x2, wL, wR, want_i2=False, want_dvol=False):
    """Exact integrals over the wet part of [x1,x2] under a linear surface.

    Returns a dict with 'volume' and optionally 'i2' (wall-pressure source
    integral) and 'dvol' (derivative of volume w.r.t. a uniform surface
    shift, i.e. the wet surface area)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    wL = np.asarray(wL, dtype=float)
    wR = np.asarray(wR, dtype=float)
    x1p, x2p, hLa, s = _wet_window(cg, x1, x2, wL, wR)
    br = _breaks(cg, x1p, x2p, hLa, s)
    xa, xb = br[:, :-1], br[:, 1:]
    w = xb - xa
    h_a = hLa[:, None] + s[:, None] * (xa - cg.xL[:, None])
    h_mid = hLa[:, None] + s[:, None] * (0.5 * (xa + xb) - cg.xL[:, None])
    (cL, dL, eL) = _seg_coeffs(cg.tabL, h_a, h_mid, s)
    (cR, dR, eR) = _seg_coeffs(cg.tabR, h_a, h_mid, s)
    u0 = cg.xR[:, None] - xa
    v0 = xa - cg.xL[:, None]
    w2, w3, w4 = w * w, w**3, w**4

    def iplain2(c):
        return c[0] * w + 0.5 * c[1] * w2 + c[2] * w3 / 3.0

    def ixi2(c):
        return 0.5 * c[0] * w2 + c[1] * w3 / 3.0 + 0.25 * c[2] * w4

    out = {}
    vol_seg = u0 * iplain2(cL) - ixi2(cL) + v0 * iplain2(cR) + ixi2(cR)
    out["volume"] = np.sum(vol_seg, axis=1) / cg.dx
    if want_i2:
        mm = tuple(r - l for r, l in zip(dR, dL))
        i2_seg = mm[0] * w + 0.5 * mm[1] * w2 + mm[2] * w3 / 3.0 + 0.25 * mm[3] * w4
        out["i2"] = np.sum(i2_seg, axis=1) / cg.dx
    if want_dvol:
        def ip1(e):
            return e[0] * w + 0.5 * e[1] * w2

        def ix1(e):
            return 0.5 * e[0] * w2 + e[1] * w3 / 3.0

        dv_seg = u0 * ip1(eL) - ix1(eL) + v0 * ip1(eR) + ix1(eR)
        out["dvol"] = np.sum(dv_seg, axis=1) / cg.dx
    return out


def volume_v(cg: CellGeom, x1, x2, wL, wR):
    """Water volume over the wet part of [x1,x2]; surface linear between the
    faces (anchored at xL and xR), bed linear, profiles blended linearly."""
    return _surface_integrals(cg, x1, x2, wL, wR)["volume"]


def wall_force_v(cg: CellGeom, x1, x2, wL, wR):
    """Wall-pressure source integral over the wet part of [x1,x2]."""
    return _surface_integrals(cg, x1, x2, wL, wR, want_i2=True)["i2"]


def bed_slope_term_v(cg: CellGeom, x1, x2, wL, wR):
    """Bed-slope source integral: bed gradient times the water volume."""
    vol = volume_v(cg, x1, x2, wL, wR)
    return (cg.bedR - cg.bedL) / cg.dx * vol


def dvolume_dsurface_v(cg: CellGeom, x1, x2, y):
    """d/dY of volume(x1,x2; Y,Y): the wet free-surface area."""
    y = np.asarray(y, dtype=float)
    return _surface_integrals(cg, x1, x2, y, y, want_dvol=True)["dvol"]


def pressure_i1_v(cg: CellGeom, x_i, h_i):
    """Pressure-force moment at station x_i and depth h_i, blending the two
    face profiles linearly in x."""
    x_i = np.asarray(x_i, dtype=float)
    h_i = np.asarray(h_i, dtype=float)
    mL = cg.tabL.moment(h_i)
    mR = cg.tabR.moment(h_i)
    wl = (cg.xR - x_i) / cg.dx
    wr = (x_i - cg.xL) / cg.dx
    return wl * mL + wr * mR


# -- scalar wrappers matching the public operation contracts ----------------


def volume(faceL: FaceGeometry, faceR: FaceGeometry, x1, x2, wL, wR) -> float:
    """Exact water volume between stations x1 <= x2 inside [faceL.x, faceR.x]."""
    if not (faceL.x <= x1 <= x2 <= faceR.x):
        raise GeometryError(f"stations [{x1}, {x2}] outside cell [{faceL.x}, {faceR.x}]")
    cg = CellGeom.from_faces(faceL, faceR)
    return float(volume_v(cg, [x1], [x2], [wL], [wR])[0])


def pressure_i1(faceL: FaceGeometry, faceR: FaceGeometry, x_i: float, h_i: float) -> float:
    """Hydrostatic pressure-force moment at an interior station."""
    if not (faceL.x <= x_i <= faceR.x):
        raise GeometryError(f"station {x_i} outside cell [{faceL.x}, {faceR.x}]")
    if h_i < 0.0:
        raise GeometryError(f"depth must be non-negative, got {h_i}")
    cg = CellGeom.from_faces(faceL, faceR)
    return float(pressure_i1_v(cg, [x_i], [h_i])[0])


def wall_force_i2(faceL: FaceGeometry, faceR: FaceGeometry, x1, x2, h1, h2) -> float:
    """Wall-pressure source integral over [x1, x2] given the wet depths at the
    two stations (the depth profile is the linear surface/bed difference)."""
    if not (faceL.x <= x1 <= x2 <= faceR.x):
        raise GeometryError(f"stations [{x1}, {x2}] outside cell [{faceL.x}, {faceR.x}]")
    if h1 < 0.0 or h2 < 0.0:
        raise GeometryError("station depths must be non-negative")
    cg = CellGeom.from_faces(faceL, faceR)
    if x2 == x1:
        return 0.0
    s = (h2 - h1) / (x2 - x1)
    hL = h1 - s * (x1 - faceL.x)
    hR = h1 + s * (faceR.x - x1)
    return float(wall_force_v(cg, [x1], [x2], [faceL.bed + hL], [faceR.bed + hR])[0])


def bed_slope_term(faceL: FaceGeometry, faceR: FaceGeometry, x1, x2, wL, wR) -> float:
    """Bed-slope source integral over [x1, x2] for a linear surface."""
    if not (faceL.x <= x1 <= x2 <= faceR.x):
        raise GeometryError(f"stations [{x1}, {x2}] outside cell [{faceL.x}, {faceR.x}]")
    cg = CellGeom.from_faces(faceL, faceR)
    return float(bed_slope_term_v(cg, [x1], [x2], [wL], [wR])[0])
