"""Central-upwind face fluxes, wave speeds and friction coefficients.

Free functions over plain arrays; no state.  The momentum flux is split into
an advective part (scaled by the face-local draining time step) and a
gravity-driven part (scaled by the global step) so the update can treat them
differently without re-deriving the flux.
"""

from __future__ import annotations

import numpy as np

DRY_SPEED_GAP = 1e-12  # a+ - a- below this means a dry face: zero flux


def desingularized_velocity(area, q, eps):
    """Velocity from area and discharge, regularized near dry states:
    u = sqrt(2) A Q / sqrt(A^4 + max(A^4, eps))."""
    area = np.asarray(area, dtype=float)
    q = np.asarray(q, dtype=float)
    a4 = area**4
    return np.sqrt(2.0) * area * q / np.sqrt(a4 + np.maximum(a4, eps))


def celerity(g, area, top_width):
    """Gravity-wave celerity sqrt(g A / sigma_T); zero on dry states."""
    area = np.asarray(area, dtype=float)
    top_width = np.asarray(top_width, dtype=float)
    safe = np.where(top_width > 0.0, top_width, 1.0)
    return np.where((area > 0.0) & (top_width > 0.0), np.sqrt(g * area / safe), 0.0)


def wave_speeds(u_minus, c_minus, u_plus, c_plus):
    """One-sided local speeds: a+ = max(0, u+-c bundles), a- = min(0, ...)."""
    ap = np.maximum(0.0, np.maximum(u_plus + c_plus, u_minus + c_minus))
    am = np.minimum(0.0, np.minimum(u_plus - c_plus, u_minus - c_minus))
    return ap, am


def face_fluxes(g, a_minus, q_minus, u_minus, i1_minus, a_plus, q_plus, u_plus, i1_plus, ap, am):
    """Central-upwind fluxes at faces.

    Returns (H1, H2a, H2g): mass flux, advective momentum flux and
    gravity-driven momentum flux.  H2a + H2g is the full momentum flux.
    Faces with a+ - a- below the dry gap get zero flux.
    """
    gap = ap - am
    wet = gap > DRY_SPEED_GAP
    d = np.where(wet, gap, 1.0)
    wa = ap / d
    wb = am / d
    diff = ap * wb  # a+ a- / (a+ - a-)
    h1 = wa * q_minus - wb * q_plus + diff * (a_plus - a_minus)
    # Q^2/A written as A u^2 with the desingularized u (Q is recomputed as A u)
    h2a = wa * a_minus * u_minus * u_minus - wb * a_plus * u_plus * u_plus + diff * (q_plus - q_minus)
    h2g = g * (wa * i1_minus - wb * i1_plus)
    zero = np.zeros_like(d)
    return (
        np.where(wet, h1, zero),
        np.where(wet, h2a, zero),
        np.where(wet, h2g, zero),
    )


def physical_flux(g, area, q, u, i1):
    """Exact flux of a single state: (Q, A u^2 + g I1)."""
    return q, area * u * u + g * i1


def friction_coefficient(g, manning_n, q, area, hyd_radius, eps):
    """Implicit friction damping rate: g n^2 |Q| / max(A R^{4/3}, eps)."""
    area = np.asarray(area, dtype=float)
    denom = np.maximum(area * np.asarray(hyd_radius, dtype=float) ** (4.0 / 3.0), eps)
    return g * np.asarray(manning_n, dtype=float) ** 2 * np.abs(q) / denom
