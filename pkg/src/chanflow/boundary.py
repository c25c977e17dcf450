"""Boundary conditions: hydrographs and ghost-state systems.

Each boundary face needs a one-sided exterior ("ghost") state so the
central-upwind flux can be formed.  Discharge and surface conditions solve a
small nonlinear system requiring the numerical face flux to equal the
physical flux of the imposed state; outflow and wall conditions are
extrapolations.  Everything here is written for a left (upstream) boundary
and mirrored for right boundaries by flipping the sign of discharge.

Sign convention: a discharge hydrograph is the flow in the link's +x
direction, so positive values mean inflow at an upstream node and outflow at
a downstream node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fluxes
from .geometry import SectionSet

BC_KINDS = ("discharge", "surface", "surface_simple", "outflow", "wall")


# ---------------------------------------------------------------------------
# Hydrographs
# ---------------------------------------------------------------------------


class Hydrograph:
    """Time series: linear table plus optional half-sine source pulses.

    value(t) = interp(table, t) + sum_p amp_p * sin(pi (t - start_p) / dur_p)
    with each pulse active on [start, start + duration] only.  The table is
    exact at its knots and linear between; it holds its end values outside
    the covered range.
    """

    def __init__(self, table=None, pulses=None, constant=None):
        self.table = None
        self.pulses = list(pulses or [])
        self.constant = constant
        if table is not None:
            arr = np.asarray(table, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
                raise ValueError("hydrograph table must be a list of [t, value] pairs")
            if np.any(np.diff(arr[:, 0]) <= 0.0):
                raise ValueError("hydrograph times must be strictly increasing")
            self.table = arr
        for p in self.pulses:
            if p["duration"] <= 0.0:
                raise ValueError("pulse duration must be positive")

    def value(self, t: float) -> float:
        v = 0.0
        if self.constant is not None:
            v += self.constant
        if self.table is not None:
            v += float(np.interp(t, self.table[:, 0], self.table[:, 1]))
        for p in self.pulses:
            local = t - p["start"]
            if 0.0 <= local <= p["duration"]:
                v += p["amplitude"] * math.sin(math.pi * local / p["duration"])
        return v

    def spec(self) -> dict:
        out = {}
        if self.constant is not None:
            out["value"] = self.constant
        if self.table is not None:
            out["hydrograph"] = [[float(a), float(b)] for a, b in self.table]
        if self.pulses:
            out["pulses"] = [dict(p) for p in self.pulses]
        return out


def parse_hydrograph(spec) -> Hydrograph:
    if isinstance(spec, (int, float)):
        return Hydrograph(constant=float(spec))
    if not isinstance(spec, dict):
        raise ValueError("expected a number or an object with 'value'/'hydrograph'/'pulses'")
    table = spec.get("hydrograph")
    pulses = spec.get("pulses")
    constant = spec.get("value")
    if table is None and pulses is None and constant is None:
        raise ValueError("needs at least one of 'value', 'hydrograph', 'pulses'")
    for p in pulses or []:
        missing = {"amplitude", "start", "duration"} - set(p)
        if missing:
            raise ValueError(f"pulse missing keys {sorted(missing)}")
    return Hydrograph(table=table, pulses=pulses, constant=constant)


@dataclass
class BoundaryCondition:
    kind: str
    hydrograph: Hydrograph | None
    spec: dict

    def target(self, t: float) -> float:
        return self.hydrograph.value(t) if self.hydrograph is not None else 0.0


def parse_boundary_condition(spec: dict) -> BoundaryCondition:
    if not isinstance(spec, dict):
        raise ValueError("boundary condition must be an object")
    kind = spec.get("kind")
    if kind not in BC_KINDS:
        raise ValueError(f"kind must be one of {BC_KINDS}, got {kind!r}")
    hyd = None
    if kind in ("discharge", "surface", "surface_simple"):
        hyd = parse_hydrograph({k: v for k, v in spec.items() if k != "kind"})
    return BoundaryCondition(kind=kind, hydrograph=hyd, spec=dict(spec))


# ---------------------------------------------------------------------------
# Ghost-state solvers
# ---------------------------------------------------------------------------


class FaceContext:
    """Geometry of one boundary face with cheap scalar evaluations.

    Knot tables are unpacked to plain tuples; the ghost solvers call these
    thousands of times per run and would drown in array overhead otherwise.
    """

    def __init__(self, tab: SectionSet, bed: float, g: float, eps: float):
        self.tab = tab
        self.bed = bed
        self.g = g
        self.eps = eps
        hk = tab.hk[0]
        keep = len(hk)
        jumps = np.nonzero(np.diff(hk) > 1e8)[0]
        if len(jumps):
            keep = int(jumps[0]) + 1
        self._hk = tuple(float(v) for v in tab.hk[0][: keep + 1])
        self._sk = tuple(float(v) for v in tab.sk[0][: keep + 1])
        self._mk = tuple(float(v) for v in tab.mk[0][: keep + 1])
        self._ac = tuple(float(v) for v in tab.acum[0][: keep + 1])
        self.h_cap = float(tab.h_valid[0]) * 0.999 if np.isfinite(tab.h_valid[0]) else 1e6

    def _seg(self, h):
        hk = self._hk
        p = 0
        for j in range(1, len(hk)):
            if hk[j] <= h:
                p = j
            else:
                break
        return p

    def area(self, h):
        if h <= 0.0:
            return 0.0
        p = self._seg(h)
        t = h - self._hk[p]
        return self._ac[p] + t * (self._sk[p] + 0.5 * self._mk[p] * t)

    def width(self, h):
        if h < 0.0:
            h = 0.0
        p = self._seg(h)
        return self._sk[p] + self._mk[p] * (h - self._hk[p])

    def moment(self, h):
        if h <= 0.0:
            return 0.0
        total = 0.0
        hk, sk, mk = self._hk, self._sk, self._mk
        for j in range(len(hk)):
            d = h - hk[j]
            if d <= 0.0:
                break
            seg = hk[j + 1] - hk[j] if j + 1 < len(hk) else d
            t = d if d < seg else seg
            total += sk[j] * (d * t - 0.5 * t * t) + mk[j] * (0.5 * d * t * t - t**3 / 3.0)
        return total

    def state(self, h, q):
        """(A, Q, u, c, I1) with desingularized velocity and Q = A u."""
        a = self.area(h)
        a4 = a**4
        u = math.sqrt(2.0) * a * q / math.sqrt(a4 + max(a4, self.eps))
        q2 = a * u
        w = self.width(h)
        c = math.sqrt(self.g * a / w) if (a > 0.0 and w > 0.0) else 0.0
        return a, q2, u, c, self.moment(h)


def _numerical_flux(ctx: FaceContext, ghost, interior):
    """(H1, H2) with the ghost on the minus side and the interior on plus."""
    aG, qG, uG, cG, iG = ghost
    aI, qI, uI, cI, iI = interior
    ap = max(0.0, uI + cI, uG + cG)
    am = min(0.0, uI - cI, uG - cG)
    gap = ap - am
    if gap <= fluxes.DRY_SPEED_GAP:
        return 0.0, 0.0
    wa = ap / gap
    wb = am / gap
    diff = ap * wb
    h1 = wa * qG - wb * qI + diff * (aI - aG)
    h2 = (wa * (aG * uG * uG + ctx.g * iG) - wb * (aI * uI * uI + ctx.g * iI)
          + diff * (qI - qG))
    return h1, h2


def critical_depth(ctx: FaceContext, q: float) -> float:
    """Depth where g A^3 / sigma_T = Q^2 (Froude number one)."""
    if q == 0.0:
        return 0.0
    target = q * q
    h_hi = 1e-6
    cap = ctx.h_cap
    while ctx.g * ctx.area(h_hi) ** 3 <= target * max(ctx.width(h_hi), 1e-300) and h_hi < cap:
        h_hi = min(h_hi * 2.0, cap)
    lo, hi = 0.0, h_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ctx.g * ctx.area(mid) ** 3 - target * ctx.width(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _newton_2x2(residual, x0, h_cap, tol=1e-10, max_iter=50, damping=0.5):
    """Damped Newton with finite-difference Jacobian on (q, h).

    Returns (x, converged)."""
    x = np.array(x0, dtype=float)
    x[1] = min(max(x[1], 0.0), h_cap)
    r = np.array(residual(x))
    for _ in range(max_iter):
        if np.all(np.abs(r) <= tol):
            return x, True
        J = np.empty((2, 2))
        for j in range(2):
            step = 1e-7 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += step
            if j == 1:
                xp[1] = min(xp[1], h_cap)
                if xp[1] == x[1]:
                    xp[1] = max(x[1] - step, 0.0)
            if xp[j] == x[j]:
                return x, False
            J[:, j] = (np.array(residual(xp)) - r) / (xp[j] - x[j])
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return x, False
        if not np.all(np.isfinite(dx)):
            return x, False
        scale = 1.0
        best = None
        for _ in range(10):
            xn = x + scale * dx
            xn[1] = min(max(xn[1], 0.0), h_cap)
            rn = np.array(residual(xn))
            if np.all(np.isfinite(rn)) and np.linalg.norm(rn) < np.linalg.norm(r):
                best = (xn, rn)
                break
            scale *= damping
        if best is None:
            xn = x + scale * dx
            xn[1] = min(max(xn[1], 0.0), h_cap)
            rn = np.array(residual(xn))
            if not np.all(np.isfinite(rn)):
                return x, False
            best = (xn, rn)
        x, r = best
    return x, bool(np.all(np.abs(r) <= tol))


def discharge_ghost(ctx: FaceContext, q_target: float, h_int: float, q_int: float):
    """Ghost state (h, q) for an imposed discharge at a left boundary.

    Solves for the exterior state whose central-upwind flux against the
    interior equals the physical flux of the imposed discharge.  Returns
    (h_ghost, q_ghost, converged).
    """
    interior = ctx.state(h_int, q_int)
    s1 = max(1.0, abs(q_target))

    def residual(x):
        q_g, h_g = x
        ghost = ctx.state(h_g, q_g)
        h1, h2 = _numerical_flux(ctx, ghost, interior)
        a_imp = max(ctx.area(h_g), 1e-12)
        f2 = q_target * q_target / a_imp + ctx.g * ctx.moment(h_g)
        s2 = max(1.0, abs(f2))
        return ((h1 - q_target) / s1, (h2 - f2) / s2)

    h_cap = ctx.h_cap
    dry_interior = h_int <= 0.0 or ctx.area(h_int) <= ctx.eps
    if dry_interior:
        h0 = critical_depth(ctx, q_target)
        x0 = (q_target, h0)
    else:
        x0 = (q_int, h_int)
    x, ok = _newton_2x2(residual, x0, h_cap)
    if ok:
        return float(x[1]), float(x[0]), True
    if dry_interior:
        return critical_depth(ctx, q_target), q_target, False
    return h_int, q_target, False


def surface_ghost(ctx: FaceContext, y_target: float, h_int: float, q_int: float, simplified: bool):
    """Ghost state for an imposed surface elevation at a left boundary."""
    h_imp = y_target - ctx.bed
    if h_imp <= 0.0:
        return 0.0, 0.0, True
    if simplified:
        return h_imp, q_int, True
    interior = ctx.state(h_int, q_int)
    a_imp = max(ctx.area(h_imp), 1e-12)
    i1_imp = ctx.moment(h_imp)

    def residual(x):
        q_g, h_g = x
        ghost = ctx.state(h_g, q_g)
        h1, h2 = _numerical_flux(ctx, ghost, interior)
        f2 = q_g * q_g / a_imp + ctx.g * i1_imp
        s2 = max(1.0, abs(f2))
        return ((h1 - q_g) / max(1.0, abs(q_g)), (h2 - f2) / s2)

    x, ok = _newton_2x2(residual, (q_int, h_imp), ctx.h_cap)
    if ok:
        return float(x[1]), float(x[0]), True
    return h_imp, q_int, False


def outflow_ghost(h_int: float, q_int: float):
    """Zero-order extrapolation."""
    return h_int, q_int


def wall_ghost(h_int: float, q_int: float):
    """Reflection: equal depth, opposite discharge (zero mass flux)."""
    return h_int, -q_int


def ghost_state(bc: BoundaryCondition, t: float, ctx: FaceContext, h_int: float,
                q_int: float, at_left: bool):
    """Exterior (h, q) for a boundary face, in link coordinates.

    ``at_left`` says whether the boundary is the upstream end of the link;
    downstream boundaries are handled by mirroring the axis (discharge signs
    flip).  Returns (h_ghost, q_ghost, converged)."""
    sgn = 1.0 if at_left else -1.0
    if bc.kind == "wall":
        h, q = wall_ghost(h_int, q_int)
        return h, q, True
    if bc.kind == "outflow":
        h, q = outflow_ghost(h_int, q_int)
        return h, q, True
    if bc.kind == "discharge":
        h, q, ok = discharge_ghost(ctx, sgn * bc.target(t), h_int, sgn * q_int)
        return h, sgn * q, ok
    if bc.kind in ("surface", "surface_simple"):
        h, q, ok = surface_ghost(
            ctx, bc.target(t), h_int, sgn * q_int, simplified=bc.kind == "surface_simple"
        )
        return h, sgn * q, ok
    raise ValueError(f"unknown boundary kind {bc.kind!r}")
