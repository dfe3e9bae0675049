"""Customizable shortest-path engine for road networks.

Preprocessing builds a metric-independent separator-tree hierarchy and a
shortcut overlay; customization fills in costs for a concrete metric and
builds two-hop labels down to a tunable truncation depth; queries combine a
label join with a bounded upward search and can reconstruct full paths,
including batched reconstruction that shares work across overlapping routes.

Typical use goes through the facade::

    index = treeroute.build_index(network)
    routes = index.customize(metric, theta=100, variant="ee")
    result = routes.path(s, t)
"""
from __future__ import annotations

from .graph import (
    INF,
    RoadNetwork,
    dijkstra,
    dijkstra_sssp,
    parse_dimacs_gr,
    parse_dimacs_co,
    write_dimacs_gr,
    validate_metric,
    contract_degree_one,
    largest_component,
    generate_query_sets,
)
from .hierarchy import TreeHierarchy, VertexOrder, build_hierarchy, derive_order
from .shortcuts import (
    ShortcutGraph,
    build_records,
    build_shortcuts,
    customize_shortcuts,
    unpack_arc,
)
from .labeling import customize_labels, label_memory_report
from .query import QueryContext, find_distance, run_query
from .paths import VARIANTS, get_path, get_variant
from .batch import BatchStats, batch_get_paths, overlap
from .engine import (
    Customized,
    Index,
    RouteResult,
    STATUS_NOT_INDEXED,
    STATUS_OK,
    STATUS_UNREACHABLE,
    build_index,
)
from .index_io import IndexFormatError, load_index, save_index

__all__ = [
    "INF",
    "RoadNetwork",
    "dijkstra",
    "dijkstra_sssp",
    "parse_dimacs_gr",
    "parse_dimacs_co",
    "write_dimacs_gr",
    "validate_metric",
    "contract_degree_one",
    "largest_component",
    "generate_query_sets",
    "TreeHierarchy",
    "VertexOrder",
    "build_hierarchy",
    "derive_order",
    "ShortcutGraph",
    "build_shortcuts",
    "customize_shortcuts",
    "build_records",
    "unpack_arc",
    "customize_labels",
    "label_memory_report",
    "QueryContext",
    "run_query",
    "find_distance",
    "VARIANTS",
    "get_variant",
    "get_path",
    "BatchStats",
    "batch_get_paths",
    "overlap",
    "Index",
    "Customized",
    "RouteResult",
    "STATUS_OK",
    "STATUS_UNREACHABLE",
    "STATUS_NOT_INDEXED",
    "build_index",
    "save_index",
    "load_index",
    "IndexFormatError",
]

__version__ = "0.1.0"
