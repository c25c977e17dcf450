"""Channel-network data model: links of cells joined at nodes.

A network is a directed graph.  Edges are *links* (channels split into
computational cells with shared face geometry); vertices are *nodes*, either
junctions (two or more link ends, each with a short stub reaching to the
junction point) or boundary nodes (exactly one link end plus a boundary
condition).  Loops around islands are allowed.

Built networks are immutable and hold flat per-cell/per-face arrays so the
solver can vectorize across all links at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryCondition, Hydrograph, parse_boundary_condition, parse_hydrograph
from .geometry import (CellGeom, CrossSection, GeometryError, SectionSet,
                       SurfaceVolumeTable, combined_sections)


class NetworkConfigError(ValueError):
    """Invalid network configuration; message carries the config path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Link:
    id: str
    index: int
    node_up: int
    node_dn: int
    cells: slice      # into the cell arrays
    faces: slice      # into the face arrays
    n_cells: int


@dataclass(frozen=True)
class LinkEnd:
    """One link end attached to a junction, with its stub to the junction point."""

    link: int
    is_inflow: bool        # True: the link's downstream end feeds this node
    terminal_cell: int     # global cell index adjacent to the node
    terminal_face: int     # global face index at the link end
    stub_len: float
    stub_bed: float        # bed elevation at the junction point for this stub
    stub_section: CrossSection
    stub_section_name: str
    explicit: bool = False


@dataclass(frozen=True)
class Node:
    id: str
    index: int
    kind: str                          # "junction" | "boundary"
    ends: tuple
    bc_name: str | None = None
    bc: BoundaryCondition | None = None
    lateral: Hydrograph | None = None
    lateral_spec: dict | None = None


class Network:
    """Immutable network: topology plus packed geometry arrays."""

    def __init__(self, links, nodes, face_x, face_bed, face_sections, face_section_names,
                 cell_dx, cell_manning, cell_link, config_tables):
        self.links = links
        self.nodes = nodes
        self.face_x = face_x
        self.face_bed = face_bed
        self.face_sections = face_sections
        self.face_section_names = face_section_names
        self.cell_dx = cell_dx
        self.cell_manning = cell_manning
        self.cell_link = cell_link
        self.n_cells = len(cell_dx)
        self.n_faces = len(face_x)
        self._config_tables = config_tables  # name -> table, for serialization

        # per-cell face indices
        faceL = np.empty(self.n_cells, dtype=np.int64)
        faceR = np.empty(self.n_cells, dtype=np.int64)
        prev_cell = np.full(self.n_cells, -1, dtype=np.int64)
        next_cell = np.full(self.n_cells, -1, dtype=np.int64)
        face_cell_L = np.full(self.n_faces, -1, dtype=np.int64)  # cell on the minus side
        face_cell_R = np.full(self.n_faces, -1, dtype=np.int64)
        for lk in links:
            c0, f0 = lk.cells.start, lk.faces.start
            idx = np.arange(lk.n_cells)
            faceL[c0 + idx] = f0 + idx
            faceR[c0 + idx] = f0 + idx + 1
            prev_cell[c0 + idx[1:]] = c0 + idx[1:] - 1
            next_cell[c0 + idx[:-1]] = c0 + idx[:-1] + 1
            face_cell_L[f0 + idx + 1] = c0 + idx
            face_cell_R[f0 + idx] = c0 + idx
        self.cell_faceL = faceL
        self.cell_faceR = faceR
        self.prev_cell = prev_cell
        self.next_cell = next_cell
        self.face_cell_L = face_cell_L
        self.face_cell_R = face_cell_R

        self.cells = CellGeom(
            face_sections.take(faceL),
            face_sections.take(faceR),
            face_bed[faceL],
            face_bed[faceR],
            face_x[faceL],
            face_x[faceR],
        )
        self.cell_combined = combined_sections(self.cells.tabL, self.cells.tabR)
        self.cell_volume_table = SurfaceVolumeTable(self.cells)
        # cells where the two faces are identical / the bed is level
        same = np.array(
            [face_section_names[a] == face_section_names[b] for a, b in zip(faceL, faceR)]
        )
        self.cell_prismatic = same
        self.cell_flat = face_bed[faceL] == face_bed[faceR]

        self.node_index = {n.id: n.index for n in nodes}
        self.link_index = {l.id: l.index for l in links}

        for arr in (self.face_x, self.face_bed, self.cell_dx, self.cell_manning):
            arr.setflags(write=False)

    # -- lookups ------------------------------------------------------------

    def link(self, link_id: str) -> Link:
        return self.links[self.link_index[link_id]]

    def junctions(self):
        return [n for n in self.nodes if n.kind == "junction"]

    def boundary_nodes(self):
        return [n for n in self.nodes if n.kind == "boundary"]

    def cell_at(self, link_id: str, x: float) -> int:
        """Global index of the cell of `link_id` containing station x."""
        lk = self.link(link_id)
        fx = self.face_x[lk.faces]
        if not (fx[0] <= x <= fx[-1]):
            raise NetworkConfigError(f"link '{link_id}'", f"station {x} outside [{fx[0]}, {fx[-1]}]")
        j = int(np.clip(np.searchsorted(fx, x, side="right") - 1, 0, lk.n_cells - 1))
        return lk.cells.start + j

    def reachable_from_boundaries(self) -> bool:
        """True when every link is reachable from some boundary node."""
        adj = {n.index: set() for n in self.nodes}
        for lk in self.links:
            adj[lk.node_up].add(lk.node_dn)
            adj[lk.node_dn].add(lk.node_up)
        seen = set()
        stack = [n.index for n in self.boundary_nodes()]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            stack.extend(adj[i] - seen)
        return all(lk.node_up in seen and lk.node_dn in seen for lk in self.links)

    # -- serialization -------------------------------------------------------

    def to_config(self) -> dict:
        """Reconstruct a configuration dict that parses to an equal network."""
        xs = {name: [list(p) for p in tab] for name, tab in self._config_tables.items()}
        links = []
        for lk in self.links:
            f = lk.faces
            edges = [
                [float(self.face_x[i]), float(self.face_bed[i]), self.face_section_names[i]]
                for i in range(f.start, f.stop)
            ]
            entry = {
                "id": lk.id,
                "from": self.nodes[lk.node_up].id,
                "to": self.nodes[lk.node_dn].id,
                "edges": edges,
            }
            mn = self.cell_manning[lk.cells]
            if np.all(mn == mn[0]):
                entry["manning_n"] = float(mn[0])
            else:
                entry["manning_n"] = [float(v) for v in mn]
            links.append(entry)
        nodes = []
        bcs = {}
        for n in self.nodes:
            if n.kind == "boundary":
                nodes.append({"id": n.id, "kind": "boundary", "boundary_condition": n.bc_name})
                bcs[n.bc_name] = n.bc.spec
            else:
                entry = {"id": n.id, "kind": "junction"}
                stubs = {}
                for e in n.ends:
                    stubs[self.links[e.link].id] = {
                        "length": e.stub_len,
                        "bed": e.stub_bed,
                        "cross_section": e.stub_section_name,
                    }
                entry["stubs"] = stubs
                if n.lateral_spec is not None:
                    entry["lateral_inflow"] = n.lateral_spec
                nodes.append(entry)
        return {"cross_sections": xs, "nodes": nodes, "links": links, "boundary_conditions": bcs}


# ---------------------------------------------------------------------------
# Configuration parsing
# ---------------------------------------------------------------------------


def build_network(config: dict) -> Network:
    """Parse, validate and freeze a network configuration.

    The configuration is a dict (usually loaded from JSON) with top-level
    keys ``cross_sections``, ``nodes``, ``links``, ``boundary_conditions``
    (and optionally ``scenario``, which this module ignores).
    """
    if not isinstance(config, dict):
        raise NetworkConfigError("$", "configuration must be an object")
    xs_raw = config.get("cross_sections")
    if not isinstance(xs_raw, dict) or not xs_raw:
        raise NetworkConfigError("cross_sections", "missing or empty")
    sections = {}
    for name, table in xs_raw.items():
        try:
            sections[name] = CrossSection(table)
        except (GeometryError, TypeError) as exc:
            raise NetworkConfigError(f"cross_sections['{name}']", str(exc)) from exc

    nodes_raw = config.get("nodes")
    if not isinstance(nodes_raw, list) or not nodes_raw:
        raise NetworkConfigError("nodes", "missing or empty")
    links_raw = config.get("links")
    if not isinstance(links_raw, list) or not links_raw:
        raise NetworkConfigError("links", "missing or empty")
    bcs_raw = config.get("boundary_conditions", {})

    node_ids = {}
    for i, nd in enumerate(nodes_raw):
        nid = nd.get("id")
        if nid is None:
            raise NetworkConfigError(f"nodes[{i}]", "missing id")
        if nid in node_ids:
            raise NetworkConfigError(f"nodes[{i}]", f"duplicate node id '{nid}'")
        node_ids[nid] = i

    # --- links and face arrays ---
    links = []
    face_x, face_bed, face_secs, face_names = [], [], [], []
    cell_dx, cell_manning, cell_link = [], [], []
    link_ids = set()
    c_cursor = f_cursor = 0
    for i, lr in enumerate(links_raw):
        path = f"links[{i}]"
        lid = lr.get("id")
        if lid is None:
            raise NetworkConfigError(path, "missing id")
        path = f"links[{i}] (id '{lid}')"
        if lid in link_ids:
            raise NetworkConfigError(path, f"duplicate link id '{lid}'")
        link_ids.add(lid)
        for key in ("from", "to"):
            if lr.get(key) not in node_ids:
                raise NetworkConfigError(path, f"unknown node '{lr.get(key)}' in '{key}'")
        edges = lr.get("edges")
        if not isinstance(edges, list) or len(edges) < 2:
            raise NetworkConfigError(path, "a link needs at least 2 edges (one cell)")
        xs_e, beds_e, names_e = [], [], []
        for j, e in enumerate(edges):
            if not (isinstance(e, (list, tuple)) and len(e) == 3):
                raise NetworkConfigError(f"{path}.edges[{j}]", "edge must be [x, bed, cross_section]")
            x, bed, name = e
            if name not in sections:
                raise NetworkConfigError(f"{path}.edges[{j}]", f"unknown cross-section '{name}'")
            xs_e.append(float(x))
            beds_e.append(float(bed))
            names_e.append(name)
        if np.any(np.diff(xs_e) <= 0.0):
            raise NetworkConfigError(f"{path}.edges", "x coordinates must be strictly increasing")
        ncell = len(edges) - 1
        mn = lr.get("manning_n", 0.0)
        if isinstance(mn, (int, float)):
            mn_arr = np.full(ncell, float(mn))
        else:
            mn_arr = np.asarray(mn, dtype=float)
            if mn_arr.shape != (ncell,):
                raise NetworkConfigError(f"{path}.manning_n", f"expected scalar or {ncell} values")
        if np.any(mn_arr < 0.0):
            raise NetworkConfigError(f"{path}.manning_n", "must be non-negative")
        links.append(
            Link(
                id=lid,
                index=i,
                node_up=node_ids[lr["from"]],
                node_dn=node_ids[lr["to"]],
                cells=slice(c_cursor, c_cursor + ncell),
                faces=slice(f_cursor, f_cursor + ncell + 1),
                n_cells=ncell,
            )
        )
        face_x.extend(xs_e)
        face_bed.extend(beds_e)
        face_secs.extend(sections[nm] for nm in names_e)
        face_names.extend(names_e)
        cell_dx.extend(np.diff(xs_e))
        cell_manning.extend(mn_arr)
        cell_link.extend([i] * ncell)
        c_cursor += ncell
        f_cursor += ncell + 1

    face_x = np.asarray(face_x)
    face_bed = np.asarray(face_bed)
    cell_dx = np.asarray(cell_dx)
    cell_manning = np.asarray(cell_manning)
    cell_link = np.asarray(cell_link, dtype=np.int64)

    # --- attachments ---
    attach = {i: [] for i in range(len(nodes_raw))}
    for lk in links:
        attach[lk.node_up].append((lk, False))   # upstream end: node feeds the link
        attach[lk.node_dn].append((lk, True))    # downstream end: link feeds the node

    nodes = []
    for i, nd in enumerate(nodes_raw):
        nid = nd["id"]
        path = f"nodes[{i}] (id '{nid}')"
        kind = nd.get("kind")
        ends_here = attach[i]
        if kind == "boundary":
            if len(ends_here) != 1:
                raise NetworkConfigError(
                    path, f"boundary node must attach exactly one link end, found {len(ends_here)}"
                )
            bc_name = nd.get("boundary_condition")
            if bc_name not in bcs_raw:
                raise NetworkConfigError(path, f"unknown boundary condition '{bc_name}'")
            try:
                bc = parse_boundary_condition(bcs_raw[bc_name])
            except ValueError as exc:
                raise NetworkConfigError(f"boundary_conditions['{bc_name}']", str(exc)) from exc
            lk, is_inflow = ends_here[0]
            ends = (_make_end(lk, is_inflow, None, face_x, cell_dx, face_bed, face_names, sections),)
            nodes.append(Node(id=nid, index=i, kind="boundary", ends=ends, bc_name=bc_name, bc=bc))
        elif kind == "junction":
            if len(ends_here) < 2:
                raise NetworkConfigError(
                    path, f"junction needs at least 2 link ends, found {len(ends_here)}"
                )
            stubs_cfg = nd.get("stubs", {})
            known = {lk.id for lk, _ in ends_here}
            for sid in stubs_cfg:
                if sid not in known:
                    raise NetworkConfigError(f"{path}.stubs", f"link '{sid}' not attached to this node")
            ends = []
            for lk, is_inflow in ends_here:
                scfg = stubs_cfg.get(lk.id)
                if scfg is not None and "cross_section" in scfg and scfg["cross_section"] not in sections:
                    raise NetworkConfigError(
                        f"{path}.stubs['{lk.id}']", f"unknown cross-section '{scfg['cross_section']}'"
                    )
                ends.append(
                    _make_end(lk, is_inflow, scfg, face_x, cell_dx, face_bed, face_names, sections)
                )
            lat_spec = nd.get("lateral_inflow")
            lateral = None
            if lat_spec is not None:
                try:
                    lateral = parse_hydrograph(lat_spec)
                except ValueError as exc:
                    raise NetworkConfigError(f"{path}.lateral_inflow", str(exc)) from exc
            nodes.append(
                Node(id=nid, index=i, kind="junction", ends=tuple(ends),
                     lateral=lateral, lateral_spec=lat_spec)
            )
        else:
            raise NetworkConfigError(path, f"kind must be 'junction' or 'boundary', got {kind!r}")

    tables = {name: sec.as_table() for name, sec in sections.items()}
    return Network(
        links=links,
        nodes=nodes,
        face_x=face_x,
        face_bed=face_bed,
        face_sections=SectionSet(face_secs),
        face_section_names=face_names,
        cell_dx=cell_dx,
        cell_manning=cell_manning,
        cell_link=cell_link,
        config_tables=tables,
    )


def _make_end(lk: Link, is_inflow: bool, stub_cfg, face_x, cell_dx, face_bed, face_names, sections):
    """Resolve one link end with stub defaults: half the adjacent cell's
    length, and the terminal face geometry, unless the config overrides."""
    if is_inflow:
        term_cell = lk.cells.stop - 1
        term_face = lk.faces.stop - 1
    else:
        term_cell = lk.cells.start
        term_face = lk.faces.start
    default_len = 0.5 * cell_dx[term_cell]
    default_bed = face_bed[term_face]
    default_name = face_names[term_face]
    explicit = stub_cfg is not None
    cfg = stub_cfg or {}
    name = cfg.get("cross_section", default_name)
    stub_len = float(cfg.get("length", default_len))
    if stub_len <= 0.0:
        raise NetworkConfigError(f"link '{lk.id}' stub", "stub length must be positive")
    return LinkEnd(
        link=lk.index,
        is_inflow=is_inflow,
        terminal_cell=term_cell,
        terminal_face=term_face,
        stub_len=stub_len,
        stub_bed=float(cfg.get("bed", default_bed)),
        stub_section=sections[name],
        stub_section_name=name,
        explicit=explicit,
    )
