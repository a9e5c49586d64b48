"""In-memory property graph with file importers and snapshot support.

The graph holds vertices with exactly one label and edges with exactly one
type, each carrying a scalar property map.  Property values are plain
Python ``str``/``int``/``float``/``bool``; the helpers below implement the
value semantics the engine relies on:

* strict equality is kind-aware (integer 2, float 2.0, text "2" and
  boolean True are four different values),
* comparison operators coerce to float only when both operands look
  numeric (see :func:`loose_equal`),
* :func:`as_text` is the canonical textual rendering used for
  lexicographic comparison and for string match functions.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import (
    DuplicateIdError,
    FrozenGraphError,
    GraphFormatError,
    MissingEndpointError,
    ReferentialError,
)

if TYPE_CHECKING:
    from .policy_model import Meta

PropertyValue = str | int | float | bool

_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\Z")


def value_kind(value: PropertyValue) -> str:
    """One of 'boolean', 'integer', 'float', 'text'."""
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "text"
    raise TypeError(f"unsupported property value {value!r}")


def strict_equal(a: PropertyValue, b: PropertyValue) -> bool:
    return value_kind(a) == value_kind(b) and a == b


def props_equal(a: dict[str, PropertyValue], b: dict[str, PropertyValue]) -> bool:
    if a.keys() != b.keys():
        return False
    return all(strict_equal(a[k], b[k]) for k in a)


def as_text(value: PropertyValue) -> str:
    """Canonical text form: booleans as true/false, floats via repr."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return repr(value) if isinstance(value, float) else str(value)


def as_number(value: PropertyValue) -> float | None:
    """Float view of a value, or None when it is not numeric.

    Text parses as a number only when it is exactly an integer or float
    literal; booleans never do.
    """
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if _FLOAT_RE.match(value):
        return float(value)
    return None


def canonical_key(value: PropertyValue) -> tuple[str, float | str]:
    """Equivalence-class key under :func:`loose_equal`."""
    num = as_number(value)
    if num is not None:
        return ("num", num)
    return ("text", as_text(value))


def loose_equal(a: PropertyValue, b: PropertyValue) -> bool:
    """Equality as the comparison operator '=' sees it.

    Numeric-looking operands compare as floats; two non-numeric operands
    compare by text; a numeric/non-numeric mix is unequal.
    """
    return canonical_key(a) == canonical_key(b)


@dataclass(eq=False)
class VertexRecord:
    id: str
    label: str
    properties: dict[str, PropertyValue] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and props_equal(self.properties, other.properties)
        )


@dataclass(eq=False)
class EdgeRecord:
    id: str
    type: str
    from_id: str
    to_id: str
    properties: dict[str, PropertyValue] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.type == other.type
            and self.from_id == other.from_id
            and self.to_id == other.to_id
            and props_equal(self.properties, other.properties)
        )


class PropertyGraph:
    """Mutable property graph with adjacency lists and exact-match indexes.

    ``snapshot()`` returns a frozen deep copy that later mutations of the
    live graph cannot affect; evaluations run against snapshots.
    """

    def __init__(self) -> None:
        self._vertices: dict[str, VertexRecord] = {}
        self._edges: dict[str, EdgeRecord] = {}
        self._out: dict[str, list[str]] = {}
        self._in: dict[str, list[str]] = {}
        self._label_index: dict[str, set[str]] = {}
        self._vertex_prop_index: dict[tuple[str, tuple], set[str]] = {}
        self._edge_type_index: dict[str, set[str]] = {}
        self._edge_prop_index: dict[tuple[str, tuple], set[str]] = {}
        self._frozen = False

    # -- mutation ----------------------------------------------------------

    def add_vertex(self, vertex: VertexRecord) -> None:
        self._check_mutable()
        if not vertex.id:
            raise GraphFormatError("vertex id must be non-empty")
        if vertex.id in self._vertices:
            raise DuplicateIdError(f"duplicate vertex id {vertex.id!r}")
        self._vertices[vertex.id] = vertex
        self._out[vertex.id] = []
        self._in[vertex.id] = []
        self._label_index.setdefault(vertex.label, set()).add(vertex.id)
        for name, value in vertex.properties.items():
            key = (name, canonical_key(value))
            self._vertex_prop_index.setdefault(key, set()).add(vertex.id)

    def add_edge(self, edge: EdgeRecord) -> None:
        self._check_mutable()
        if not edge.id:
            raise GraphFormatError("edge id must be non-empty")
        if edge.id in self._edges:
            raise DuplicateIdError(f"duplicate edge id {edge.id!r}")
        for endpoint in (edge.from_id, edge.to_id):
            if endpoint not in self._vertices:
                raise MissingEndpointError(
                    f"edge {edge.id!r} references missing vertex {endpoint!r}"
                )
        self._edges[edge.id] = edge
        self._out[edge.from_id].append(edge.id)
        self._in[edge.to_id].append(edge.id)
        self._edge_type_index.setdefault(edge.type, set()).add(edge.id)
        for name, value in edge.properties.items():
            key = (name, canonical_key(value))
            self._edge_prop_index.setdefault(key, set()).add(edge.id)

    def _check_mutable(self) -> None:
        if self._frozen:
            raise FrozenGraphError("graph snapshot is immutable")

    # -- access ------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def vertex(self, vertex_id: str) -> VertexRecord:
        return self._vertices[vertex_id]

    def edge(self, edge_id: str) -> EdgeRecord:
        return self._edges[edge_id]

    def has_vertex(self, vertex_id: str) -> bool:
        return vertex_id in self._vertices

    def vertices(self) -> Iterator[VertexRecord]:
        return iter(self._vertices.values())

    def edges(self) -> Iterator[EdgeRecord]:
        return iter(self._edges.values())

    def vertex_ids(self) -> list[str]:
        return sorted(self._vertices)

    def edge_ids(self) -> list[str]:
        return sorted(self._edges)

    def out_edge_ids(self, vertex_id: str) -> list[str]:
        return list(self._out[vertex_id])

    def in_edge_ids(self, vertex_id: str) -> list[str]:
        return list(self._in[vertex_id])

    def vertices_with_label(self, label: str) -> set[str]:
        return set(self._label_index.get(label, ()))

    def vertices_with_property(self, name: str, value: PropertyValue) -> set[str]:
        return set(self._vertex_prop_index.get((name, canonical_key(value)), ()))

    def edges_with_type(self, type_name: str) -> set[str]:
        return set(self._edge_type_index.get(type_name, ()))

    def edges_with_property(self, name: str, value: PropertyValue) -> set[str]:
        return set(self._edge_prop_index.get((name, canonical_key(value)), ()))

    # -- snapshots & equality ---------------------------------------------

    def snapshot(self) -> "PropertyGraph":
        """Frozen deep copy; unaffected by later mutation of this graph."""
        clone = copy.deepcopy(self)
        clone._frozen = True
        return clone

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        if self._vertices.keys() != other._vertices.keys():
            return False
        if self._edges.keys() != other._edges.keys():
            return False
        return all(
            self._vertices[v] == other._vertices[v] for v in self._vertices
        ) and all(self._edges[e] == other._edges[e] for e in self._edges)

    def __repr__(self) -> str:
        return f"PropertyGraph(vertices={self.vertex_count}, edges={self.edge_count})"


def build_source_subset(meta: "Meta", source: PropertyGraph) -> PropertyGraph:
    """Filter ``source`` down to the entities a policy declares relevant.

    Keeps the vertices whose label is listed in ``meta`` and the edges whose
    type is listed and whose endpoints both survived the vertex filter.
    """
    wanted_labels = set(meta.vertex_entities)
    wanted_types = set(meta.edge_entities)
    subset = PropertyGraph()
    for vertex in source.vertices():
        if vertex.label in wanted_labels:
            subset.add_vertex(
                VertexRecord(vertex.id, vertex.label, dict(vertex.properties))
            )
    for edge in source.edges():
        if (
            edge.type in wanted_types
            and subset.has_vertex(edge.from_id)
            and subset.has_vertex(edge.to_id)
        ):
            subset.add_edge(
                EdgeRecord(
                    edge.id, edge.type, edge.from_id, edge.to_id, dict(edge.properties)
                )
            )
    return subset


# -- JSON import/export ----------------------------------------------------

_VERTEX_KEYS = {"id", "label", "properties"}
_EDGE_KEYS = {"id", "type", "from", "to", "properties"}


def _check_properties(raw: object, where: str) -> dict[str, PropertyValue]:
    if not isinstance(raw, dict):
        raise GraphFormatError(f"{where}: properties must be an object")
    for name, value in raw.items():
        if not isinstance(value, (str, int, float, bool)):
            raise GraphFormatError(
                f"{where}: property {name!r} has unsupported value {value!r}"
            )
    return dict(raw)


def _record_str(raw: dict, key: str, where: str) -> str:
    value = raw.get(key)
    if not isinstance(value, str) or not value:
        raise GraphFormatError(f"{where}: {key!r} must be a non-empty string")
    return value


def load_graph_json(text: str) -> PropertyGraph:
    """Load the JSON graph format; edges may precede their endpoints."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno
        ) from exc
    if not isinstance(doc, dict) or set(doc) != {"vertices", "edges"}:
        raise GraphFormatError(
            "top level must be an object with exactly 'vertices' and 'edges'"
        )
    if not isinstance(doc["vertices"], list) or not isinstance(doc["edges"], list):
        raise GraphFormatError("'vertices' and 'edges' must be arrays")

    vertices: list[VertexRecord] = []
    for i, raw in enumerate(doc["vertices"]):
        where = f"vertices[{i}]"
        if not isinstance(raw, dict) or not set(raw) <= _VERTEX_KEYS:
            raise GraphFormatError(f"{where}: expected keys {sorted(_VERTEX_KEYS)}")
        vertices.append(
            VertexRecord(
                _record_str(raw, "id", where),
                _record_str(raw, "label", where),
                _check_properties(raw.get("properties", {}), where),
            )
        )
    edges: list[EdgeRecord] = []
    for i, raw in enumerate(doc["edges"]):
        where = f"edges[{i}]"
        if not isinstance(raw, dict) or not set(raw) <= _EDGE_KEYS:
            raise GraphFormatError(f"{where}: expected keys {sorted(_EDGE_KEYS)}")
        edges.append(
            EdgeRecord(
                _record_str(raw, "id", where),
                _record_str(raw, "type", where),
                _record_str(raw, "from", where),
                _record_str(raw, "to", where),
                _check_properties(raw.get("properties", {}), where),
            )
        )
    return _link(vertices, edges)


def _link(vertices: list[VertexRecord], edges: list[EdgeRecord]) -> PropertyGraph:
    # Second phase of the two-phase import: vertices first, then edges, so
    # file order never matters.
    graph = PropertyGraph()
    for vertex in vertices:
        graph.add_vertex(vertex)
    for edge in edges:
        for endpoint in (edge.from_id, edge.to_id):
            if not graph.has_vertex(endpoint):
                raise ReferentialError(edge.id, endpoint)
        graph.add_edge(edge)
    return graph


def serialize_graph(graph: PropertyGraph) -> str:
    """Deterministic JSON rendering (ids and property keys sorted)."""
    doc = {
        "vertices": [
            {
                "id": v.id,
                "label": v.label,
                "properties": {k: v.properties[k] for k in sorted(v.properties)},
            }
            for v in sorted(graph.vertices(), key=lambda r: r.id)
        ],
        "edges": [
            {
                "id": e.id,
                "type": e.type,
                "from": e.from_id,
                "to": e.to_id,
                "properties": {k: e.properties[k] for k in sorted(e.properties)},
            }
            for e in sorted(graph.edges(), key=lambda r: r.id)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# -- CSV import ------------------------------------------------------------


def parse_csv_value(cell: str) -> PropertyValue:
    """CSV cells are text unless they are exact int/float/bool literals."""
    if _INT_RE.match(cell):
        return int(cell)
    if _FLOAT_RE.match(cell):
        return float(cell)
    if cell in ("true", "false"):
        return cell == "true"
    return cell


def _read_csv_rows(
    text: str, fixed: tuple[str, ...], what: str
) -> tuple[list[str], list[tuple[int, list[str]]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise GraphFormatError(f"{what} CSV is empty", line=1) from None
    if tuple(header[: len(fixed)]) != fixed:
        raise GraphFormatError(
            f"{what} CSV header must start with {','.join(fixed)}", line=1
        )
    prop_names = header[len(fixed) :]
    if len(set(prop_names)) != len(prop_names):
        raise GraphFormatError(f"{what} CSV header repeats a property column", line=1)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise GraphFormatError(
                f"{what} CSV row has {len(row)} fields, expected {len(header)}",
                line=lineno,
            )
        rows.append((lineno, row))
    return prop_names, rows


def load_graph_csv(vertices_text: str, edges_text: str) -> PropertyGraph:
    """Load the two-file CSV format (vertex file + edge file).

    An empty cell means the property is absent on that record, so rows
    with differing property schemas can share one header.
    """
    v_props, v_rows = _read_csv_rows(vertices_text, ("_id", "_label"), "vertex")
    e_props, e_rows = _read_csv_rows(
        edges_text, ("_id", "_type", "_from", "_to"), "edge"
    )
    vertices = [
        VertexRecord(row[0], row[1], _csv_props(v_props, row[2:]))
        for _, row in v_rows
    ]
    edges = [
        EdgeRecord(row[0], row[1], row[2], row[3], _csv_props(e_props, row[4:]))
        for _, row in e_rows
    ]
    return _link(vertices, edges)


def _csv_props(names: list[str], cells: list[str]) -> dict[str, PropertyValue]:
    return {
        name: parse_csv_value(cell) for name, cell in zip(names, cells) if cell != ""
    }


def load_graph_file(text: str, format: str = "json") -> PropertyGraph:
    """Load a single graph file; only the JSON format is single-file."""
    if format == "json":
        return load_graph_json(text)
    raise GraphFormatError(
        f"format {format!r} is not a single-file format; "
        "use load_graph_csv for the two-file CSV layout"
    )


def load_graph_path(path, format: str = "json") -> PropertyGraph:
    """Load a graph from disk.

    ``json``: path is the graph file.  ``csv``: path is a directory
    containing ``vertices.csv`` and ``edges.csv``.
    """
    from pathlib import Path

    p = Path(path)
    if format == "json":
        return load_graph_json(p.read_text(encoding="utf-8"))
    if format == "csv":
        vfile = p / "vertices.csv"
        efile = p / "edges.csv"
        for f in (vfile, efile):
            if not f.is_file():
                raise GraphFormatError(f"missing CSV file {f}")
        return load_graph_csv(
            vfile.read_text(encoding="utf-8"), efile.read_text(encoding="utf-8")
        )
    raise GraphFormatError(f"unknown graph format {format!r}")
