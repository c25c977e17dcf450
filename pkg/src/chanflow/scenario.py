"""Scenario assembly: named cases, initial-condition presets, file loading.

A scenario file is the network configuration plus a ``scenario`` object
(end time, CFL or fixed step, initial condition preset, gauges, snapshot
times, junction model, integrator and numerical knobs).  Built-in cases are
generated by parameterized builders (so convergence studies can rebuild
them at any resolution) and shipped as JSON files; ``resolve_scenario``
accepts either a name or a path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .geometry import volume_v
from .network import Network, NetworkConfigError, build_network
from .output import Gauge, Schedule
from .scheme import Engine, FlowState, SolverConfig


@dataclass
class Scenario:
    config: dict
    network: Network
    engine: Engine
    state: FlowState
    schedule: Schedule
    name: str = ""
    seed: int = 42


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def builtin_names():
    return sorted(_BUILDERS)


def builtin_config(name: str, **overrides) -> dict:
    if name not in _BUILDERS:
        raise NetworkConfigError("scenario", f"unknown built-in scenario '{name}'")
    return _BUILDERS[name](**overrides)


def resolve_scenario(source) -> dict:
    """Scenario config from a dict, a file path, or a built-in name."""
    if isinstance(source, dict):
        return source
    p = Path(source)
    if p.suffix == ".json" or p.exists():
        try:
            with open(p) as f:
                return json.load(f)
        except FileNotFoundError:
            raise NetworkConfigError("scenario", f"file not found: {source}")
        except json.JSONDecodeError as exc:
            raise NetworkConfigError("scenario", f"invalid JSON in {source}: {exc}")
    name = str(source)
    if name in _BUILDERS:
        res = resources.files("chanflow").joinpath(f"scenarios/{name}.json")
        if res.is_file():
            return json.loads(res.read_text())
        return builtin_config(name)
    raise NetworkConfigError("scenario", f"not a file or built-in name: {source}")


def load_scenario(source, **scenario_overrides) -> Scenario:
    config = resolve_scenario(source)
    if scenario_overrides:
        config = json.loads(json.dumps(config))
        config.setdefault("scenario", {}).update(scenario_overrides)
    network = build_network(config)
    sc = config.get("scenario", {})
    if not isinstance(sc, dict):
        raise NetworkConfigError("scenario", "must be an object")
    end_time = sc.get("end_time", 0.0)
    if end_time < 0.0:
        raise NetworkConfigError("scenario.end_time", "must be non-negative")
    cfgkw = {}
    for key in ("g", "cfl", "eps", "q_still", "dt_max", "fixed_dt", "junction_model", "integrator"):
        if key in sc:
            cfgkw[key] = sc[key]
    engine = Engine(network, SolverConfig(**cfgkw))
    state = initial_state(engine, sc.get("initial", {"preset": "dry"}))
    gauges = tuple(_resolve_gauge(network, engine, g, i) for i, g in enumerate(sc.get("gauges", [])))
    schedule = Schedule(
        end_time=float(end_time),
        output_dt=sc.get("output_dt"),
        snapshot_times=tuple(sc.get("snapshot_times", [])),
        gauges=gauges,
        track_junction_fluxes=bool(sc.get("track_junction_fluxes", False)),
    )
    return Scenario(
        config=config,
        network=network,
        engine=engine,
        state=state,
        schedule=schedule,
        name=sc.get("name", ""),
        seed=int(sc.get("seed", 42)),
    )


def _resolve_gauge(network, engine, spec, i):
    label = spec.get("label")
    if "node" in spec:
        nid = spec["node"]
        if nid not in network.node_index:
            raise NetworkConfigError(f"scenario.gauges[{i}]", f"unknown node '{nid}'")
        node_idx = network.node_index[nid]
        for k, jg in enumerate(engine.junctions):
            if jg.node_index == node_idx:
                return Gauge(label or nid, "node", k)
        raise NetworkConfigError(f"scenario.gauges[{i}]", f"node '{nid}' is not a junction")
    if "link" not in spec or "x" not in spec:
        raise NetworkConfigError(f"scenario.gauges[{i}]", "needs 'link' and 'x' (or 'node')")
    cell = network.cell_at(spec["link"], float(spec["x"]))
    return Gauge(label or f"{spec['link']}@{spec['x']:g}", "cell", cell)


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------


def initial_state(engine: Engine, spec: dict) -> FlowState:
    net = engine.net
    cells = net.cells
    nc = net.n_cells
    preset = spec.get("preset", "fields")
    if preset == "dry":
        area = np.zeros(nc)
        q = np.zeros(nc)
        surface = None
    elif preset in ("lake_at_rest", "uniform"):
        w = float(spec["surface"])
        wl = np.full(nc, w)
        wr = np.full(nc, w)
        pert = spec.get("perturbation")
        if pert is not None:
            a, b = pert["interval"]
            amt = float(pert["amount"])
            xc = 0.5 * (cells.xL + cells.xR)
            inb = (xc >= a) & (xc <= b)
            wl = np.where(inb, wl + amt, wl)
            wr = np.where(inb, wr + amt, wr)
        area = np.maximum(volume_v(cells, cells.xL, cells.xR, wl, wr) / cells.dx, 0.0)
        if preset == "uniform":
            u = spec.get("velocity")
            q = area * float(u) if u is not None else np.full(nc, float(spec.get("discharge", 0.0)))
        else:
            q = np.zeros(nc)
        surface = w
    elif preset == "dam_break":
        # links are assumed to share one longitudinal axis; the dam is the
        # surface jump at x_dam
        x_dam = float(spec["x_dam"])
        w_up = float(spec["surface_up"])
        w_dn = float(spec["surface_down"])
        xc = 0.5 * (cells.xL + cells.xR)
        w = np.where(xc < x_dam, w_up, w_dn)
        area = np.maximum(volume_v(cells, cells.xL, cells.xR, w, w) / cells.dx, 0.0)
        q = np.zeros(nc)
        surface = w_dn
    elif preset == "cosine_perturbation":
        base = float(spec["base"])
        amp = float(spec["amplitude"])
        x0 = float(spec["center"])
        hw = float(spec["half_width"])
        u0 = float(spec.get("velocity", 0.0))

        def wfun(x):
            return base + amp * np.cos(np.pi * (x - x0) / hw)

        wl = wfun(cells.xL)
        wr = wfun(cells.xR)
        area = np.maximum(volume_v(cells, cells.xL, cells.xR, wl, wr) / cells.dx, 0.0)
        q = area * u0
        surface = base
    elif preset == "fields":
        area = np.asarray(spec["area"], dtype=float)
        q = np.asarray(spec["discharge"], dtype=float)
        surface = None
    else:
        raise NetworkConfigError("scenario.initial", f"unknown preset '{preset}'")

    ys = None
    if "junction_surface" in spec:
        v = spec["junction_surface"]
        if isinstance(v, dict):
            ys = np.array(
                [float(v.get(net.nodes[jg.node_index].id, jg.min_bed)) for jg in engine.junctions]
            )
        else:
            ys = np.array([max(float(v), jg.min_bed) for jg in engine.junctions])
    elif surface is not None:
        ys = np.array([max(float(surface), jg.min_bed) for jg in engine.junctions])
    return engine.initial_state(area, q, ys)


# ---------------------------------------------------------------------------
# Built-in cases
# ---------------------------------------------------------------------------


def _line_edges(x, bed, names):
    return [[float(a), float(b), n] for a, b, n in zip(x, bed, names)]


def _single_link_config(x, bed, sections, bc_left, bc_right, manning=0.0, sec_names=None):
    """One link between two boundary nodes; sections per face."""
    names = sec_names or [f"xs{i}" for i in range(len(x))]
    xs = {}
    uniq_names = []
    for nm, sec in zip(names, sections):
        if nm not in xs:
            xs[nm] = sec
        uniq_names.append(nm)
    return {
        "cross_sections": xs,
        "nodes": [
            {"id": "IN", "kind": "boundary", "boundary_condition": "upstream"},
            {"id": "OUT", "kind": "boundary", "boundary_condition": "downstream"},
        ],
        "links": [
            {
                "id": "main",
                "from": "IN",
                "to": "OUT",
                "manning_n": manning,
                "edges": _line_edges(x, bed, uniq_names),
            }
        ],
        "boundary_conditions": {"upstream": bc_left, "downstream": bc_right},
    }


def trapezoid_smooth_wave(n=200):
    """Flat trapezoidal channel, smooth cosine surface wave, unit velocity."""
    x = np.linspace(0.0, 1.0, n + 1)
    bed = np.zeros(n + 1)
    sec = [[0.0, 1.0], [4.0, 1.0 + 0.3 * 4.0]]  # width 1 + 0.3 y
    cfg = _single_link_config(
        x, bed, [sec] * (n + 1), {"kind": "outflow"}, {"kind": "outflow"},
        sec_names=["trap"] * (n + 1),
    )
    cfg["scenario"] = {
        "name": "trapezoid_smooth_wave",
        "family": {"name": "trapezoid_smooth_wave", "n": n},
        "end_time": 0.05,
        "fixed_dt": 1e-08,
        "initial": {
            "preset": "cosine_perturbation",
            "base": 1.6,
            "amplitude": 0.1,
            "center": 0.4,
            "half_width": 0.2,
            "velocity": 1.0,
        },
    }
    return cfg


def _spline_lake_bed(xfaces):
    """Piecewise-rescaled natural spline topography with flat shores."""
    knots_x = [0.0, 0.05, 0.1, 0.15, 0.3, 0.4, 0.75]
    knots_b = [0.3, 0.3, 0.2, 0.5, 0.4, 0.6, 0.6]
    sp = CubicSpline(knots_x, knots_b, bc_type="natural")
    b = sp(np.clip(xfaces, 0.0, 0.75))
    b = np.where(xfaces <= 0.53, 0.5 * b, 1.3 * b)
    b = np.where(xfaces <= 0.0693, 0.12, b)
    b = np.where(xfaces >= 0.7386, 0.8, b)
    return b


def _cosine_channel_sections(xfaces):
    """Width (1 + 0.75 cos(pi x)) (1 - y/2), exactly linear in depth."""
    secs, names = [], []
    for i, x in enumerate(xfaces):
        s0 = 1.0 + 0.75 * np.cos(np.pi * x)
        secs.append([[0.0, s0], [2.0, 0.0]])
        names.append(f"xc{i}")
    return secs, names


def perturbed_lake(n=200):
    """Lake at rest over spline topography plus a localized hump of surface."""
    x = np.linspace(0.0, 1.0, n + 1)
    bed = _spline_lake_bed(x)
    secs, names = _cosine_channel_sections(x)
    cfg = _single_link_config(x, bed, secs, {"kind": "outflow"}, {"kind": "outflow"},
                              sec_names=names)
    cfg["scenario"] = {
        "name": "perturbed_lake",
        "family": {"name": "perturbed_lake", "n": n},
        "end_time": 0.3,
        "initial": {
            "preset": "lake_at_rest",
            "surface": 0.8,
            "perturbation": {"amount": 0.3, "interval": [0.1, 0.15]},
        },
        "snapshot_times": [0.1, 0.2, 0.3],
    }
    return cfg


def _steady_spline_bed(xfaces):
    knots_x = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
    knots_b = [0.0, 0.6, 0.4, 0.5, 0.2, 0.0]
    sp = CubicSpline(knots_x, knots_b, bc_type="natural")
    b = np.where((xfaces >= 0.2) & (xfaces <= 0.7), sp(np.clip(xfaces, 0.2, 0.7)), 0.0)
    return b


def subcritical_steady(n=200, end_time=25.0):
    """Inflow discharge against a fixed downstream surface over spline bed."""
    x = np.linspace(0.0, 1.0, n + 1)
    bed = _steady_spline_bed(x)
    secs, names = _cosine_channel_sections(x)
    cfg = _single_link_config(
        x, bed, secs,
        {"kind": "discharge", "value": 0.3343},
        {"kind": "surface", "value": 0.8},
        sec_names=names,
    )
    cfg["scenario"] = {
        "name": "subcritical_steady",
        "family": {"name": "subcritical_steady", "n": n},
        "end_time": end_time,
        "initial": {"preset": "lake_at_rest", "surface": 0.8},
    }
    return cfg


def transcritical_shock(n=200, end_time=25.0):
    """Flow over a bump with a standing shock on the lee side."""
    x = np.linspace(0.0, 1.0, n + 1)
    inb = (x >= 0.5) & (x <= 0.9)
    bed = np.where(inb, 0.5 * (1.0 + np.cos(np.pi * (np.clip(x, 0.5, 0.9) - 0.7) / 0.2)), 0.0)
    ygrid = 3.0 * (np.linspace(0.0, 1.0, 14)) ** 2
    secs, names = [], []
    for i, xi in enumerate(x):
        if 0.5 <= xi <= 0.9:
            coef = 3.0 / 8.0 - np.cos(np.pi * (xi - 0.7) / 0.2) / 8.0
            wid = 0.5 + coef * np.sqrt(ygrid)
        else:
            wid = 0.5 * (1.0 + np.sqrt(ygrid))
        secs.append([[float(a), float(b)] for a, b in zip(ygrid, wid)])
        names.append(f"xq{i}")
    cfg = _single_link_config(
        x, bed, secs,
        {"kind": "discharge", "value": 2.5561},
        {"kind": "surface", "value": 1.9968},
        sec_names=names,
    )
    cfg["scenario"] = {
        "name": "transcritical_shock",
        "family": {"name": "transcritical_shock", "n": n},
        "end_time": end_time,
        "initial": {"preset": "lake_at_rest", "surface": 1.9968},
    }
    return cfg


def triangular_dam_break(n=400, dry=True, end_time=None):
    """1000 m triangular channel (1H:1V banks), dam at the middle."""
    x = np.linspace(0.0, 1000.0, n + 1)
    bed = np.zeros(n + 1)
    sec = [[0.0, 0.0], [10.0, 20.0]]
    cfg = _single_link_config(
        x, bed, [sec] * (n + 1), {"kind": "wall"}, {"kind": "wall"},
        sec_names=["tri"] * (n + 1),
    )
    cfg["scenario"] = {
        "name": "triangular_dam_break_dry" if dry else "triangular_dam_break_wet",
        "family": {
            "name": "triangular_dam_break_dry" if dry else "triangular_dam_break_wet",
            "n": n,
        },
        "end_time": end_time if end_time is not None else (45.0 if dry else 80.0),
        "initial": {
            "preset": "dam_break",
            "x_dam": 500.0,
            "surface_up": 1.0,
            "surface_down": 0.0 if dry else 0.1,
        },
    }
    return cfg


def triangular_dam_break_dry(n=400, **kw):
    return triangular_dam_break(n=n, dry=True, **kw)


def triangular_dam_break_wet(n=400, **kw):
    return triangular_dam_break(n=n, dry=False, **kw)


def rectangular_dam_break_dry(n=1000, end_time=20.0):
    """Rectangular dry-bed dam break with a closed-form reference solution."""
    x = np.linspace(0.0, 1000.0, n + 1)
    bed = np.zeros(n + 1)
    sec = [[0.0, 1.0], [10.0, 1.0]]
    cfg = _single_link_config(
        x, bed, [sec] * (n + 1), {"kind": "wall"}, {"kind": "wall"},
        sec_names=["rect"] * (n + 1),
    )
    cfg["scenario"] = {
        "name": "rectangular_dam_break_dry",
        "family": {"name": "rectangular_dam_break_dry", "n": n},
        "end_time": end_time,
        "initial": {
            "preset": "dam_break",
            "x_dam": 500.0,
            "surface_up": 1.0,
            "surface_down": 0.0,
        },
    }
    return cfg


def reservoir_drain(n=200, end_time=60.0):
    """Symmetric reservoir draining through a contracting channel over a hump."""
    x = np.linspace(0.0, 1.0, n + 1)
    bed = np.where(np.abs(x - 0.5) < 0.1, 0.25 * (1.0 + np.cos(np.pi * (x - 0.5) / 0.1)), 0.0)
    secs, names = [], []
    for i, xi in enumerate(x):
        wid = 3.2 * (xi - 0.5) ** 2 + 0.8
        secs.append([[0.0, wid], [5.0, wid]])
        names.append(f"xr{i}")
    cfg = _single_link_config(
        x, bed, secs, {"kind": "wall"}, {"kind": "outflow"}, sec_names=names
    )
    cfg["scenario"] = {
        "name": "reservoir_drain",
        "family": {"name": "reservoir_drain", "n": n},
        "end_time": end_time,
        # reservoir held behind the hump; bed dry from there to the open end
        "initial": {
            "preset": "dam_break", "x_dam": 0.6, "surface_up": 0.8, "surface_down": -1.0,
        },
        "snapshot_times": [10.0, 30.0, 60.0],
    }
    return cfg


def closed_dam_break(with_junction=False, dx=0.1, end_time=18.0):
    """Closed rectangular channel, dam break between walls; optionally split
    into two links joined by a pass-through junction downstream of the dam."""
    sec = [[0.0, 3.0], [5.0, 3.0]]
    gauges = [
        {"link": "up" if with_junction else "main", "x": 19.4, "label": "G1"},
        {"link": "dn" if with_junction else "main", "x": 20.9, "label": "G2"},
    ]
    if with_junction:
        nup = int(round(20.0 / dx))
        ndn = int(round(14.0 / dx))
        xs_up = np.linspace(0.0, 20.0, nup + 1)
        xs_dn = np.linspace(20.0, 34.0, ndn + 1)
        gauges[0] = {"link": "up", "x": 19.4, "label": "G1"}
        gauges[1] = {"link": "dn", "x": 20.9, "label": "G2"}
        cfg = {
            "cross_sections": {"rect3": sec},
            "nodes": [
                {"id": "W1", "kind": "boundary", "boundary_condition": "wall"},
                {"id": "J", "kind": "junction"},
                {"id": "W2", "kind": "boundary", "boundary_condition": "wall"},
            ],
            "links": [
                {"id": "up", "from": "W1", "to": "J", "manning_n": 0.0,
                 "edges": [[float(v), 0.0, "rect3"] for v in xs_up]},
                {"id": "dn", "from": "J", "to": "W2", "manning_n": 0.0,
                 "edges": [[float(v), 0.0, "rect3"] for v in xs_dn]},
            ],
            "boundary_conditions": {"wall": {"kind": "wall"}},
        }
    else:
        n = int(round(34.0 / dx))
        x = np.linspace(0.0, 34.0, n + 1)
        cfg = _single_link_config(
            x, np.zeros(n + 1), [sec] * (n + 1), {"kind": "wall"}, {"kind": "wall"},
            sec_names=["rect3"] * (n + 1),
        )
        cfg["links"][0]["id"] = "main"
    cfg["scenario"] = {
        "name": "closed_dam_break_junction" if with_junction else "closed_dam_break",
        "family": {
            "name": "closed_dam_break_junction" if with_junction else "closed_dam_break",
            "dx": dx,
        },
        "end_time": end_time,
        "fixed_dt": 0.01,
        "initial": {
            "preset": "dam_break", "x_dam": 15.0, "surface_up": 0.5, "surface_down": 0.1,
        },
        "gauges": gauges,
        "output_dt": 0.05,
    }
    return cfg


def closed_dam_break_junction(dx=0.1, **kw):
    return closed_dam_break(with_junction=True, dx=dx, **kw)


def loop_dam_break(supercritical=False, dx=0.1, end_time=18.0):
    """Dam break through a loop of two parallel channels around an island."""

    def edges(a, b, name):
        n = int(round((b - a) / dx))
        return [[float(v), 0.0, name] for v in np.linspace(a, b, n + 1)]

    cfg = {
        "cross_sections": {
            "rect3": [[0.0, 3.0], [5.0, 3.0]],
            "rect2": [[0.0, 2.0], [5.0, 2.0]],
            "rect1": [[0.0, 1.0], [5.0, 1.0]],
        },
        "nodes": [
            {"id": "W1", "kind": "boundary", "boundary_condition": "wall"},
            {"id": "SPLIT", "kind": "junction"},
            {"id": "JOIN", "kind": "junction"},
            {"id": "W2", "kind": "boundary", "boundary_condition": "wall"},
        ],
        "links": [
            {"id": "up", "from": "W1", "to": "SPLIT", "manning_n": 0.0,
             "edges": edges(-15.0, 2.0, "rect3")},
            {"id": "island_b", "from": "SPLIT", "to": "JOIN", "manning_n": 0.0,
             "edges": edges(2.0, 12.0, "rect2")},
            {"id": "island_c", "from": "SPLIT", "to": "JOIN", "manning_n": 0.0,
             "edges": edges(2.0, 12.0, "rect1")},
            {"id": "dn", "from": "JOIN", "to": "W2", "manning_n": 0.0,
             "edges": edges(12.0, 19.0, "rect3")},
        ],
        "boundary_conditions": {"wall": {"kind": "wall"}},
    }
    cfg["scenario"] = {
        "name": "loop_dam_break_supercritical" if supercritical else "loop_dam_break_subcritical",
        "family": {
            "name": "loop_dam_break_supercritical" if supercritical else "loop_dam_break_subcritical",
            "dx": dx,
        },
        "end_time": end_time,
        "cfl": 0.5,
        "junction_model": "cuj2",
        "initial": {
            "preset": "dam_break",
            "x_dam": 0.0,
            "surface_up": 1.0 if supercritical else 0.5,
            "surface_down": 0.1,
        },
        "gauges": [
            {"link": "up", "x": -2.0, "label": "G1"},
            {"link": "island_b", "x": 7.0, "label": "G2"},
            {"link": "island_c", "x": 7.0, "label": "G3"},
            {"link": "dn", "x": 15.0, "label": "G4"},
        ],
        "output_dt": 0.05,
    }
    return cfg


def loop_dam_break_subcritical(dx=0.1, **kw):
    return loop_dam_break(supercritical=False, dx=dx, **kw)


def loop_dam_break_supercritical(dx=0.1, **kw):
    return loop_dam_break(supercritical=True, dx=dx, **kw)


def dry_network_inundation(dx=0.2, end_time=400.0):
    """Nine-channel dry network fed by three source hydrographs.

    Rectangular channels on linear slopes; junction F's attached channel
    ends sit at different elevations, so early inflow pools before any
    outflow starts."""
    chan = {
        # name: (length, width, upper bed, lower bed, from, to)
        "AB": (10.0, 0.1, 0.25, 0.20, "A", "B"),
        "BC": (20.0, 0.1, 0.20, 0.10, "B", "C"),
        "CD": (10.0, 0.1, 0.10, 0.00, "C", "D"),
        "EF": (20.0, 0.2, 0.35, 0.20, "E", "F"),
        "FB": (15.0, 0.2, 0.25, 0.20, "F", "B"),
        "FC": (15.0, 0.2, 0.30, 0.10, "F", "C"),
        "HG": (10.0, 0.2, 0.35, 0.30, "H", "G"),
        "GB": (10.0, 0.2, 0.30, 0.20, "G", "B"),
        "GC": (20.0, 0.2, 0.30, 0.10, "G", "C"),
    }
    cfg = {
        "cross_sections": {
            "w01": [[0.0, 0.1], [1.0, 0.1]],
            "w02": [[0.0, 0.2], [1.0, 0.2]],
        },
        "nodes": [
            {"id": "A", "kind": "boundary", "boundary_condition": "src_a"},
            {"id": "E", "kind": "boundary", "boundary_condition": "src_e"},
            {"id": "H", "kind": "boundary", "boundary_condition": "src_h"},
            {"id": "D", "kind": "boundary", "boundary_condition": "out_d"},
            {"id": "B", "kind": "junction"},
            {"id": "C", "kind": "junction"},
            {"id": "F", "kind": "junction"},
            {"id": "G", "kind": "junction"},
        ],
        "links": [],
        "boundary_conditions": {
            "src_a": {
                "kind": "discharge",
                "pulses": [{"amplitude": 0.002, "start": 1.0, "duration": 60.0}],
            },
            "src_e": {
                "kind": "discharge",
                "pulses": [
                    {"amplitude": 0.0015, "start": 1.0, "duration": 30.0},
                    {"amplitude": 0.01, "start": 150.0, "duration": 60.0},
                ],
            },
            "src_h": {
                "kind": "discharge",
                "pulses": [{"amplitude": 0.0015, "start": 50.0, "duration": 80.0}],
            },
            "out_d": {"kind": "outflow"},
        },
    }
    for name, (length, width, b_up, b_dn, frm, to) in chan.items():
        n = int(round(length / dx))
        x = np.linspace(0.0, length, n + 1)
        bed = b_up + (b_dn - b_up) * x / length
        sec = "w01" if width == 0.1 else "w02"
        cfg["links"].append(
            {
                "id": name,
                "from": frm,
                "to": to,
                "manning_n": 0.01,
                "edges": [[float(a), float(b), sec] for a, b in zip(x, bed)],
            }
        )
    cfg["scenario"] = {
        "name": "dry_network_inundation",
        "family": {"name": "dry_network_inundation", "dx": dx},
        "end_time": end_time,
        "cfl": 0.9,
        "junction_model": "cuj2",
        "initial": {"preset": "dry"},
        "gauges": [{"node": nid} for nid in ("B", "C", "F", "G")],
        "output_dt": 1.0,
        "track_junction_fluxes": True,
    }
    return cfg


_BUILDERS = {
    "trapezoid_smooth_wave": trapezoid_smooth_wave,
    "perturbed_lake": perturbed_lake,
    "subcritical_steady": subcritical_steady,
    "transcritical_shock": transcritical_shock,
    "triangular_dam_break_wet": triangular_dam_break_wet,
    "triangular_dam_break_dry": triangular_dam_break_dry,
    "rectangular_dam_break_dry": rectangular_dam_break_dry,
    "reservoir_drain": reservoir_drain,
    "closed_dam_break": closed_dam_break,
    "closed_dam_break_junction": closed_dam_break_junction,
    "loop_dam_break_subcritical": loop_dam_break_subcritical,
    "loop_dam_break_supercritical": loop_dam_break_supercritical,
    "dry_network_inundation": dry_network_inundation,
}


def write_builtin_scenarios(directory):
    """Regenerate the shipped scenario files from the builders."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, builder in _BUILDERS.items():
        cfg = builder()
        with open(directory / f"{name}.json", "w") as f:
            json.dump(cfg, f, indent=1)
            f.write("\n")
