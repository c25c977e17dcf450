"""Geometry tests: closed-form integrals against independent oracles."""

import numpy as np
import pytest
from scipy.integrate import quad

from chanflow import geometry as geo
from chanflow.geometry import (
    CellGeom,
    CrossSection,
    FaceGeometry,
    GeometryError,
    SectionSet,
    area,
    bed_slope_term,
    depth_from_area,
    hydraulic_radius,
    pressure_i1,
    section_moment,
    volume,
    wall_force_i2,
    wetted_perimeter,
    width_at,
)

RECT = CrossSection([[0.0, 1.0], [1.0, 1.0]])
TRAP = CrossSection([[0.0, 1.0], [2.0, 1.6]])  # sigma(y) = 1 + 0.3 y
TRI = CrossSection([[0.0, 0.0], [1.0, 2.0]])  # 1H:1V side slopes


# --------------------------------------------------------------------------
# Independent oracles
# --------------------------------------------------------------------------


def oracle_area(section, h):
    """Trapezoid rule on the exact piecewise-linear width profile."""
    if h <= 0.0:
        return 0.0
    ys = [y for y in section.depths if 0.0 < y < h]
    grid = np.array([0.0] + ys + [h])
    last_slope = (section.widths[-1] - section.widths[-2]) / (
        section.depths[-1] - section.depths[-2]
    )

    def w(y):
        if y <= section.depths[-1]:
            return np.interp(y, section.depths, section.widths)
        return section.widths[-1] + last_slope * (y - section.depths[-1])

    vals = np.array([w(y) for y in grid])
    return float(np.trapezoid(vals, grid))


def oracle_volume(faceL, faceR, x1, x2, wL, wR):
    """Adaptive quadrature of the blended wetted area along the axis."""
    dx = faceR.x - faceL.x
    hL = wL - faceL.bed
    hR = wR - faceR.bed

    def depth(x):
        return hL + (hR - hL) * (x - faceL.x) / dx

    def integrand(x):
        h = depth(x)
        if h <= 0.0:
            return 0.0
        aL = oracle_area(faceL.section, h)
        aR = oracle_area(faceR.section, h)
        return ((faceR.x - x) * aL + (x - faceL.x) * aR) / dx

    # split the window at the waterline and at knot crossings
    pts = {x1, x2}
    if hR != hL:
        for y in set(faceL.section.depths) | set(faceR.section.depths) | {0.0}:
            xc = faceL.x + (y - hL) * dx / (hR - hL)
            if x1 < xc < x2:
                pts.add(xc)
    pts = sorted(pts)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = quad(integrand, a, b, limit=200, epsabs=1e-14, epsrel=1e-13)
        total += val
    return total


def oracle_wall_force(faceL, faceR, x1, x2, wL, wR):
    """Quadrature of the wall-pressure integrand (width gradient moment)."""
    dx = faceR.x - faceL.x
    hL = wL - faceL.bed
    hR = wR - faceR.bed

    def integrand(x):
        h = hL + (hR - hL) * (x - faceL.x) / dx
        if h <= 0.0:
            return 0.0
        mL = section_moment(faceL.section, h)
        mR = section_moment(faceR.section, h)
        return (mR - mL) / dx

    pts = {x1, x2}
    if hR != hL:
        for y in set(faceL.section.depths) | set(faceR.section.depths) | {0.0}:
            xc = faceL.x + (y - hL) * dx / (hR - hL)
            if x1 < xc < x2:
                pts.add(xc)
    pts = sorted(pts)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = quad(integrand, a, b, limit=200, epsabs=1e-14, epsrel=1e-13)
        total += val
    return total


def random_section(rng, allow_zero_bottom=True):
    k = rng.integers(2, 6)
    depths = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 1.5, size=k - 1))])
    widths = rng.uniform(0.0 if allow_zero_bottom else 0.1, 3.0, size=k)
    if widths.max() < 0.05:
        widths[rng.integers(0, k)] += 1.0
    return CrossSection(np.column_stack([depths, widths]))


def random_cell(rng):
    xL = rng.uniform(-5.0, 5.0)
    dx = rng.uniform(0.05, 4.0)
    faceL = FaceGeometry(bed=rng.uniform(-1.0, 1.0), section=random_section(rng), x=xL)
    faceR = FaceGeometry(bed=rng.uniform(-1.0, 1.0), section=random_section(rng), x=xL + dx)
    return faceL, faceR


# --------------------------------------------------------------------------
# Cross-section pointwise operations
# --------------------------------------------------------------------------


class TestWidth:
    def test_rectangular_constant(self):
        assert width_at(RECT, 0.5) == pytest.approx(1.0)

    def test_trapezoid_interpolation(self):
        assert width_at(TRAP, 1.0) == pytest.approx(1.3)

    def test_zero_depth_gives_bottom_width(self):
        assert width_at(TRAP, 0.0) == pytest.approx(1.0)
        assert width_at(TRI, 0.0) == pytest.approx(0.0)

    def test_linear_extrapolation_above_top_knot(self):
        assert width_at(TRAP, 4.0) == pytest.approx(1.0 + 0.3 * 4.0)
        assert width_at(RECT, 10.0) == pytest.approx(1.0)

    def test_negative_depth_rejected(self):
        with pytest.raises(GeometryError):
            width_at(RECT, -0.1)


class TestSectionValidation:
    def test_needs_two_points(self):
        with pytest.raises(GeometryError):
            CrossSection([[0.0, 1.0]])

    def test_depths_strictly_increasing(self):
        with pytest.raises(GeometryError):
            CrossSection([[0.0, 1.0], [0.0, 2.0]])
        with pytest.raises(GeometryError):
            CrossSection([[0.0, 1.0], [1.0, 1.0], [0.5, 1.0]])

    def test_first_depth_zero(self):
        with pytest.raises(GeometryError):
            CrossSection([[0.5, 1.0], [1.0, 1.0]])

    def test_negative_width_rejected(self):
        with pytest.raises(GeometryError):
            CrossSection([[0.0, 1.0], [1.0, -0.1]])


class TestArea:
    def test_rectangular(self):
        assert area(RECT, 0.5) == pytest.approx(0.5)

    def test_trapezoid_closed_form(self):
        # antiderivative h + 0.15 h^2 at h=1
        assert area(TRAP, 1.0) == pytest.approx(1.15)

    def test_zero_depth(self):
        assert area(TRAP, 0.0) == 0.0

    def test_monotone_in_depth(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            sec = random_section(rng)
            hs = np.sort(rng.uniform(0.0, sec.depths[-1], size=10))
            vals = [area(sec, h) for h in hs]
            assert np.all(np.diff(vals) >= -1e-14)

    def test_matches_trapezoid_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            sec = random_section(rng)
            h = rng.uniform(0.0, 1.3 * sec.depths[-1])
            if h > sec.depths[-1] and width_at(sec, h) < 0:
                continue
            assert area(sec, h) == pytest.approx(oracle_area(sec, h), rel=1e-12, abs=1e-14)


class TestDepthFromArea:
    def test_rectangular(self):
        assert depth_from_area(RECT, 0.5) == pytest.approx(0.5)

    def test_trapezoid_round_trip_example(self):
        assert depth_from_area(TRAP, 1.15) == pytest.approx(1.0)

    def test_zero_area(self):
        assert depth_from_area(TRAP, 0.0) == 0.0

    def test_negative_area_rejected(self):
        with pytest.raises(GeometryError):
            depth_from_area(RECT, -1e-9)

    def test_round_trip_random(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            sec = random_section(rng)
            h = rng.uniform(0.0, sec.depths[-1] * 1.2)
            if h > sec.depths[-1] and width_at(sec, h) <= 0.0:
                h = sec.depths[-1]
            a = area(sec, h)
            h2 = depth_from_area(sec, a)
            # exact inverse up to zero-width plateaus, where area is flat
            assert area(sec, h2) == pytest.approx(a, rel=1e-12, abs=1e-13)
            if width_at(sec, h) > 1e-9:
                assert h2 == pytest.approx(h, rel=1e-12, abs=1e-12)


class TestPerimeter:
    def test_rectangular(self):
        assert wetted_perimeter(RECT, 0.5) == pytest.approx(2.0)
        assert hydraulic_radius(RECT, 0.5) == pytest.approx(0.25)

    def test_triangular_pythagoras(self):
        assert wetted_perimeter(TRI, 1.0) == pytest.approx(2.0 * np.sqrt(2.0))
        assert area(TRI, 1.0) == pytest.approx(1.0)
        assert hydraulic_radius(TRI, 1.0) == pytest.approx(1.0 / (2.0 * np.sqrt(2.0)))

    def test_zero_depth(self):
        assert wetted_perimeter(TRAP, 0.0) == pytest.approx(1.0)
        assert hydraulic_radius(TRAP, 0.0) == 0.0


# --------------------------------------------------------------------------
# Cell integrals
# --------------------------------------------------------------------------


def F(bed, section, x):
    return FaceGeometry(bed=bed, section=section, x=x)


class TestPressureI1:
    def test_rectangular_closed_form(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, RECT, 1.0)
        # h^2/2 for unit width
        assert pressure_i1(fl, fr, 0.3, 2.0) == pytest.approx(2.0)

    def test_left_station_pure_left_moment(self):
        fl, fr = F(0.0, TRAP, 0.0), F(0.0, RECT, 1.0)
        assert pressure_i1(fl, fr, 0.0, 1.0) == pytest.approx(section_moment(TRAP, 1.0))
        assert pressure_i1(fl, fr, 1.0, 1.0) == pytest.approx(section_moment(RECT, 1.0))

    def test_zero_depth(self):
        fl, fr = F(0.0, TRAP, 0.0), F(0.0, RECT, 1.0)
        assert pressure_i1(fl, fr, 0.5, 0.0) == 0.0

    def test_station_outside_cell_rejected(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, RECT, 1.0)
        with pytest.raises(GeometryError):
            pressure_i1(fl, fr, 1.5, 1.0)

    def test_moment_quadrature(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            sec = random_section(rng)
            h = rng.uniform(0.0, sec.depths[-1])
            ref, _ = quad(
                lambda y: (h - y) * np.interp(y, sec.depths, sec.widths),
                0.0,
                h,
                points=[p for p in sec.depths if 0 < p < h] or None,
                limit=100,
            )
            assert section_moment(sec, h) == pytest.approx(ref, rel=1e-10, abs=1e-13)


class TestVolume:
    def test_uniform_prism(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, RECT, 1.0)
        assert volume(fl, fr, 0.0, 1.0, 0.5, 0.5) == pytest.approx(0.5)

    def test_wedge_partially_dry(self):
        # bed rises 0 -> 1, horizontal surface at 0.5: V = int_0^0.5 (0.5-x) dx
        fl, fr = F(0.0, RECT, 0.0), F(1.0, RECT, 1.0)
        assert volume(fl, fr, 0.0, 1.0, 0.5, 0.5) == pytest.approx(0.125, abs=1e-14)

    def test_fully_dry(self):
        fl, fr = F(0.0, RECT, 0.0), F(1.0, RECT, 1.0)
        assert volume(fl, fr, 0.0, 1.0, -0.2, -0.2) == 0.0

    def test_station_order_enforced(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, RECT, 1.0)
        with pytest.raises(GeometryError):
            volume(fl, fr, 0.8, 0.2, 0.5, 0.5)

    def test_additivity_and_quadrature(self):
        # Surfaces stay below each face's validity depth (where a decreasing
        # profile's extrapolated width would cross zero): containment is a
        # precondition of the whole geometry model.
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 200:
            fl, fr = random_cell(rng)
            mode = rng.integers(0, 3)
            lo = min(fl.bed, fr.bed)
            hi = max(fl.bed, fr.bed)
            cap = min(
                fl.bed + SectionSet([fl.section]).h_valid[0],
                fr.bed + SectionSet([fr.section]).h_valid[0],
            )
            if mode == 0:  # wet
                wL = hi + rng.uniform(0.1, 1.5)
                wR = wL + rng.uniform(-0.1, 0.1)
            elif mode == 1:  # partial
                wL = rng.uniform(lo, hi)
                wR = rng.uniform(lo, hi)
            else:  # arbitrary, possibly dry
                wL = rng.uniform(lo - 0.5, hi + 0.5)
                wR = rng.uniform(lo - 0.5, hi + 0.5)
            wL, wR = min(wL, cap), min(wR, cap)
            xm = rng.uniform(fl.x, fr.x)
            v_full = volume(fl, fr, fl.x, fr.x, wL, wR)
            v_a = volume(fl, fr, fl.x, xm, wL, wR)
            v_b = volume(fl, fr, xm, fr.x, wL, wR)
            assert v_full >= 0.0
            assert v_a + v_b == pytest.approx(v_full, rel=1e-12, abs=1e-13)
            ref = oracle_volume(fl, fr, fl.x, fr.x, wL, wR)
            assert v_full == pytest.approx(ref, rel=1e-10, abs=1e-11)
            checked += 1


class TestWallForce:
    def test_prismatic_is_zero(self):
        fl, fr = F(0.0, TRAP, 0.0), F(0.2, TRAP, 1.0)
        assert wall_force_i2(fl, fr, 0.0, 1.0, 0.7, 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_dry_is_zero(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, CrossSection([[0, 2], [1, 2]]), 1.0)
        assert wall_force_i2(fl, fr, 0.0, 1.0, 0.0, 0.0) == 0.0

    def test_rectangular_width_jump(self):
        # sigma_L=1, sigma_R=2, flat bed, h=1: (sigma_R-sigma_L) * h^2/2 = 0.5
        wide = CrossSection([[0.0, 2.0], [1.0, 2.0]])
        fl, fr = F(0.0, RECT, 0.0), F(0.0, wide, 1.0)
        assert wall_force_i2(fl, fr, 0.0, 1.0, 1.0, 1.0) == pytest.approx(0.5)

    def test_quadrature_oracle(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            fl, fr = random_cell(rng)
            lo, hi = min(fl.bed, fr.bed), max(fl.bed, fr.bed)
            wL = rng.uniform(lo - 0.3, hi + 1.0)
            wR = rng.uniform(lo - 0.3, hi + 1.0)
            cg = CellGeom.from_faces(fl, fr)
            got = float(geo.wall_force_v(cg, [fl.x], [fr.x], [wL], [wR])[0])
            ref = oracle_wall_force(fl, fr, fl.x, fr.x, wL, wR)
            assert got == pytest.approx(ref, rel=1e-10, abs=1e-11)


class TestBedSlopeTerm:
    def test_flat_bed_zero(self):
        fl, fr = F(0.3, TRAP, 0.0), F(0.3, RECT, 1.0)
        assert bed_slope_term(fl, fr, 0.0, 1.0, 0.8, 0.9) == 0.0

    def test_dry_zero(self):
        fl, fr = F(0.0, RECT, 0.0), F(1.0, RECT, 1.0)
        assert bed_slope_term(fl, fr, 0.0, 1.0, -1.0, -1.0) == 0.0

    def test_linear_bed_prism(self):
        # slope 1 x volume of the w=2 prism over rising bed: V = 1.5
        fl, fr = F(0.0, RECT, 0.0), F(1.0, RECT, 1.0)
        assert bed_slope_term(fl, fr, 0.0, 1.0, 2.0, 2.0) == pytest.approx(1.5)


class TestBalanceIdentity:
    """Discrete flux/source balance for water at rest.

    For any horizontal surface w over a cell:
        I1(xR, hR) - I1(xL, hL) - I2(xL, xR) + Bx(xL, xR) = 0
    including partially wet and dry cells.  This identity is what makes the
    scheme well balanced and it must hold to rounding.
    """

    def test_random_configurations(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            fl, fr = random_cell(rng)
            lo, hi = min(fl.bed, fr.bed), max(fl.bed, fr.bed)
            w = rng.uniform(lo - 0.4, hi + 1.2)
            hL = max(0.0, w - fl.bed)
            hR = max(0.0, w - fr.bed)
            i1L = pressure_i1(fl, fr, fl.x, hL)
            i1R = pressure_i1(fl, fr, fr.x, hR)
            cg = CellGeom.from_faces(fl, fr)
            i2 = float(geo.wall_force_v(cg, [fl.x], [fr.x], [w], [w])[0])
            bx = float(geo.bed_slope_term_v(cg, [fl.x], [fr.x], [w], [w])[0])
            assert i1R - i1L - i2 + bx == pytest.approx(0.0, abs=1e-11)

    def test_wet_dry_and_partial_specific(self):
        fl, fr = F(0.0, TRAP, 0.0), F(1.0, TRI, 2.0)
        for w in [-0.5, 0.0, 0.3, 0.999, 1.0, 1.7]:
            hL, hR = max(0.0, w - fl.bed), max(0.0, w - fr.bed)
            i1L = pressure_i1(fl, fr, fl.x, hL)
            i1R = pressure_i1(fl, fr, fr.x, hR)
            cg = CellGeom.from_faces(fl, fr)
            i2 = float(geo.wall_force_v(cg, [fl.x], [fr.x], [w], [w])[0])
            bx = float(geo.bed_slope_term_v(cg, [fl.x], [fr.x], [w], [w])[0])
            assert i1R - i1L - i2 + bx == pytest.approx(0.0, abs=1e-12)


class TestSurfaceDerivative:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            fl, fr = random_cell(rng)
            lo, hi = min(fl.bed, fr.bed), max(fl.bed, fr.bed)
            y = rng.uniform(lo + 0.05, hi + 1.0)
            cg = CellGeom.from_faces(fl, fr)
            dv = float(geo.dvolume_dsurface_v(cg, [fl.x], [fr.x], [y])[0])
            eps = 1e-6
            vp = volume(fl, fr, fl.x, fr.x, y + eps, y + eps)
            vm = volume(fl, fr, fl.x, fr.x, y - eps, y - eps)
            fd = (vp - vm) / (2 * eps)
            assert dv == pytest.approx(fd, rel=2e-5, abs=1e-7)

    def test_prism_storage_area(self):
        fl, fr = F(0.0, RECT, 0.0), F(0.0, RECT, 2.0)
        cg = CellGeom.from_faces(fl, fr)
        dv = float(geo.dvolume_dsurface_v(cg, [0.0], [2.0], [0.7])[0])
        assert dv == pytest.approx(2.0)  # width 1 x length 2


class TestVectorisedConsistency:
    def test_sectionset_matches_scalar_ops(self):
        rng = np.random.default_rng(11)
        secs = [random_section(rng) for _ in range(40)]
        tab = SectionSet(secs)
        hs = np.array([rng.uniform(0.0, s.depths[-1]) for s in secs])
        a = tab.area(hs)
        wdt = tab.width(hs)
        per = tab.perimeter(hs)
        mom = tab.moment(hs)
        for i, s in enumerate(secs):
            assert a[i] == pytest.approx(area(s, hs[i]), rel=1e-13, abs=1e-14)
            assert wdt[i] == pytest.approx(width_at(s, hs[i]), rel=1e-13, abs=1e-14)
            assert per[i] == pytest.approx(wetted_perimeter(s, hs[i]), rel=1e-13)
            assert mom[i] == pytest.approx(section_moment(s, hs[i]), rel=1e-12, abs=1e-15)
        h2 = tab.depth_from_area(a)
        np.testing.assert_allclose(h2, hs, rtol=1e-11, atol=1e-12)
