"""Single-file binary serialization for indexes and customized states.

Layout: an 8-byte magic, a section table (name, offset, length, CRC-32),
then the section payloads.  Each payload is a sequence of named 1-D arrays
with explicit little-endian dtypes.  Saving the same state twice produces
byte-identical files, so fingerprinting a build is just hashing the file;
every section is checksum-validated on load.
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .engine import Customized, Index
from .graph import ReattachmentMap, RoadNetwork
from .hierarchy import TreeHierarchy, TreeNode, derive_order
from .labeling import Labeling
from .paths import get_variant
from .shortcuts import CostState, RecordArena, ShortcutGraph

MAGIC = b"TRIDX001"
_HEADER = struct.Struct("<8sQQI")  # per-section table entry


class IndexFormatError(ValueError):
    """Raised when an index file is malformed or fails checksum validation."""


# ---------------------------------------------------------------------------
# array block packing
# ---------------------------------------------------------------------------

_DTYPES = {0: "<i8", 1: "<u4", 2: "<u8", 3: "u1", 4: "<f8"}
_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


def _pack_arrays(arrays: dict) -> bytes:
    out = [struct.pack("<I", len(arrays))]
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        code = _CODES[arr.dtype]
        nb = name.encode("ascii")
        out.append(struct.pack("<H", len(nb)))
        out.append(nb)
        out.append(struct.pack("<BQ", code, arr.shape[0]))
        out.append(arr.tobytes())
    return b"".join(out)


def _unpack_arrays(buf: bytes, section: str) -> dict:
    try:
        (count,) = struct.unpack_from("<I", buf, 0)
        off = 4
        arrays = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", buf, off)
            off += 2
            name = buf[off:off + nlen].decode("ascii")
            off += nlen
            code, length = struct.unpack_from("<BQ", buf, off)
            off += 9
            dtype = np.dtype(_DTYPES[code])
            nbytes = length * dtype.itemsize
            arrays[name] = np.frombuffer(
                buf[off:off + nbytes], dtype=dtype).copy()
            if len(arrays[name]) != length:
                raise IndexFormatError(f"section '{section}' is truncated")
            off += nbytes
        return arrays
    except (struct.error, KeyError) as exc:
        raise IndexFormatError(f"section '{section}' is malformed") from exc


def _pack_ragged(entries) -> tuple[np.ndarray, np.ndarray]:
    """CSR-pack a list of per-vertex arrays (``None`` packs as empty)."""
    lens = np.array([0 if e is None else len(e) for e in entries],
                    dtype=np.int64)
    ptr = np.zeros(len(entries) + 1, dtype=np.int64)
    np.cumsum(lens, out=ptr[1:])
    parts = [np.asarray(e, dtype=np.int64) for e in entries
             if e is not None and len(e)]
    val = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return ptr, val


# ---------------------------------------------------------------------------
# save
# ---------------------------------------------------------------------------


def save_index(path, index: Index, customized: Customized | None = None) -> None:
    """Write ``index`` (and optionally one customized state) to ``path``."""
    net = index.network
    meta = {
        "format": 1,
        "beta": index.beta,
        "seed": index.seed,
        "leaf_threshold": index.leaf_threshold,
        "vertices": net.vertex_count,
        "edges": net.edge_count,
        "sub_vertices": index.sub.vertex_count,
        "core_vertices": index.core.vertex_count,
    }
    hierarchy = index.hierarchy
    nodes = hierarchy.nodes
    vert_ptr, vert_val = _pack_ragged([n.vertices for n in nodes])
    sections = [
        ("graph", _pack_arrays({
            "edge_u": net.edge_u.astype(np.int64),
            "edge_v": net.edge_v.astype(np.int64),
        })),
        ("compmap", _pack_arrays({
            "sub_orig_of": index.sub_orig_of,
            "sub_core_of": index.sub_core_of,
            "sub_edge_orig": index.sub_edge_orig,
        })),
        ("pendant", _pack_arrays({
            "core_of": index.reattach.core_of,
            "orig_of": index.reattach.orig_of,
            "parent": index.reattach.parent,
            "parent_edge": index.reattach.parent_edge,
            "core_edge_orig": index.reattach.core_edge_orig,
        })),
        ("tree", _pack_arrays({
            "parent": np.array([n.parent for n in nodes], dtype=np.int64),
            "left": np.array([n.left for n in nodes], dtype=np.int64),
            "right": np.array([n.right for n in nodes], dtype=np.int64),
            "depth": np.array([n.depth for n in nodes], dtype=np.int64),
            "bits": np.array([n.bits for n in nodes], dtype=np.uint64),
            "vert_ptr": vert_ptr,
            "vert_val": vert_val,
        })),
        ("overlay", _pack_arrays({
            "up_ptr": index.sg.up_ptr,
            "up_to": index.sg.up_to,
            "up_orig": index.sg.up_orig,
        })),
    ]
    if customized is not None:
        labeling = customized.labeling
        meta["customized"] = {
            "variant": customized.variant.name,
            "theta": customized.theta,
            "k": customized.k,
            "has_paths": labeling.P is not None,
            "has_refs": labeling.P_ref is not None,
            "has_records": customized.arena is not None,
        }
        sections.append(("metric", _pack_arrays({
            "metric": np.asarray(customized.metric, dtype=np.int64),
        })))
        state = customized.state
        sections.append(("costs", _pack_arrays({
            "cost": state.cost,
            "prov_z": state.prov_z,
            "prov_ev": state.prov_ev,
            "prov_eu": state.prov_eu,
        })))
        label_arrays = {"untruncated": labeling.untruncated.astype(np.uint8)}
        label_arrays["c_ptr"], label_arrays["c_val"] = _pack_ragged(labeling.C)
        if labeling.P is not None:
            label_arrays["p_ptr"], label_arrays["p_val"] = \
                _pack_ragged(labeling.P)
        if labeling.P_ref is not None:
            label_arrays["r_ptr"], label_arrays["r_val"] = \
                _pack_ragged(labeling.P_ref)
        sections.append(("labels", _pack_arrays(label_arrays)))
        if customized.arena is not None:
            meta["customized"]["width"] = customized.arena.width
            sections.append(("records", _pack_arrays({
                "words": customized.arena.words,
                "n_inter": customized.arena.n_inter,
            })))
    meta_payload = json.dumps(meta, sort_keys=True).encode("ascii")
    sections.insert(0, ("meta", meta_payload))

    header_size = 8 + 4 + _HEADER.size * len(sections)
    offset = header_size
    table = []
    for name, payload in sections:
        table.append((name.encode("ascii").ljust(8, b"\0"), offset,
                      len(payload), zlib.crc32(payload) & 0xFFFFFFFF))
        offset += len(payload)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(sections)))
        for entry in table:
            fh.write(_HEADER.pack(*entry))
        for _, payload in sections:
            fh.write(payload)


# ---------------------------------------------------------------------------
# load
# ---------------------------------------------------------------------------


def _read_sections(path) -> dict:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:8] != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    (count,) = struct.unpack_from("<I", data, 8)
    sections = {}
    off = 12
    for _ in range(count):
        if off + _HEADER.size > len(data):
            raise IndexFormatError(f"{path}: truncated section table")
        raw_name, start, length, crc = _HEADER.unpack_from(data, off)
        off += _HEADER.size
        name = raw_name.rstrip(b"\0").decode("ascii")
        if start + length > len(data):
            raise IndexFormatError(f"{path}: section '{name}' is truncated")
        payload = data[start:start + length]
        if zlib.crc32(payload) & 0xFFFFFFFF != crc:
            raise IndexFormatError(
                f"{path}: checksum mismatch in section '{name}'")
        sections[name] = payload
    return sections


def _unpack_ragged(ptr, val, present):
    out = []
    for v in range(len(ptr) - 1):
        if present[v]:
            out.append(val[ptr[v]:ptr[v + 1]].copy())
        else:
            out.append(None)
    return out


def describe_sections(path) -> list[tuple[str, int]]:
    """Validated ``(section, payload bytes)`` pairs, in file order."""
    sections = _read_sections(path)
    return [(name, len(payload)) for name, payload in sections.items()]


def load_index(path) -> tuple[Index, Customized | None]:
    """Read an index file; returns ``(index, customized_or_None)``."""
    sections = _read_sections(path)
    for required in ("meta", "graph", "compmap", "pendant", "tree", "overlay"):
        if required not in sections:
            raise IndexFormatError(f"{path}: missing section '{required}'")
    try:
        meta = json.loads(sections["meta"].decode("ascii"))
    except ValueError as exc:
        raise IndexFormatError(f"{path}: bad metadata") from exc
    if meta.get("format") != 1:
        raise IndexFormatError(f"{path}: unsupported format {meta.get('format')}")

    graph = _unpack_arrays(sections["graph"], "graph")
    network = RoadNetwork(meta["vertices"],
                          zip(graph["edge_u"], graph["edge_v"]))
    comp = _unpack_arrays(sections["compmap"], "compmap")
    sub_eu = comp["sub_core_of"][graph["edge_u"][comp["sub_edge_orig"]]]
    sub_ev = comp["sub_core_of"][graph["edge_v"][comp["sub_edge_orig"]]]
    sub = RoadNetwork(meta["sub_vertices"], zip(sub_eu, sub_ev))
    pend = _unpack_arrays(sections["pendant"], "pendant")
    reattach = ReattachmentMap(pend["core_of"], pend["orig_of"],
                               pend["parent"], pend["parent_edge"],
                               pend["core_edge_orig"])
    core_eu = pend["core_of"][sub_eu[pend["core_edge_orig"]]]
    core_ev = pend["core_of"][sub_ev[pend["core_edge_orig"]]]
    core = RoadNetwork(meta["core_vertices"], zip(core_eu, core_ev))

    tree = _unpack_arrays(sections["tree"], "tree")
    nodes = []
    for i in range(len(tree["parent"])):
        lo, hi = int(tree["vert_ptr"][i]), int(tree["vert_ptr"][i + 1])
        node = TreeNode(i, int(tree["parent"][i]), int(tree["depth"][i]),
                        int(tree["bits"][i]),
                        [int(v) for v in tree["vert_val"][lo:hi]])
        node.left = int(tree["left"][i])
        node.right = int(tree["right"][i])
        nodes.append(node)
    hierarchy = TreeHierarchy(nodes, meta["core_vertices"], meta["beta"],
                              meta["leaf_threshold"])
    order = derive_order(hierarchy)
    overlay = _unpack_arrays(sections["overlay"], "overlay")
    sg = ShortcutGraph(order, overlay["up_ptr"], overlay["up_to"],
                       overlay["up_orig"])
    index = Index(network, sub, comp["sub_orig_of"], comp["sub_core_of"],
                  comp["sub_edge_orig"], core, reattach, hierarchy, order, sg,
                  meta["beta"], meta["seed"], meta["leaf_threshold"])

    cmeta = meta.get("customized")
    if cmeta is None:
        return index, None
    for required in ("metric", "costs", "labels"):
        if required not in sections:
            raise IndexFormatError(f"{path}: missing section '{required}'")
    metric = _unpack_arrays(sections["metric"], "metric")["metric"]
    costs = _unpack_arrays(sections["costs"], "costs")
    state = CostState(sg.arc_count)
    state.cost[:] = costs["cost"]
    state.prov_z[:] = costs["prov_z"]
    state.prov_ev[:] = costs["prov_ev"]
    state.prov_eu[:] = costs["prov_eu"]
    state.finalize()
    labels = _unpack_arrays(sections["labels"], "labels")
    untruncated = labels["untruncated"].astype(bool)
    C = _unpack_ragged(labels["c_ptr"], labels["c_val"], untruncated)
    P = P_ref = None
    if cmeta["has_paths"]:
        P = _unpack_ragged(labels["p_ptr"], labels["p_val"], untruncated)
    if cmeta["has_refs"]:
        P_ref = _unpack_ragged(labels["r_ptr"], labels["r_val"], untruncated)
    labeling = Labeling(cmeta["theta"], untruncated, C, P, P_ref)
    arena = None
    if cmeta["has_records"]:
        if "records" not in sections:
            raise IndexFormatError(f"{path}: missing section 'records'")
        rec = _unpack_arrays(sections["records"], "records")
        arena = RecordArena(cmeta["width"], cmeta["k"], sg.arc_count)
        arena.words[:] = rec["words"]
        arena.n_inter[:] = rec["n_inter"]
    variant = get_variant(cmeta["variant"])
    sub_metric = np.asarray(metric, dtype=np.int64)[comp["sub_edge_orig"]]
    customized = Customized(index, metric, sub_metric, state, labeling, arena,
                            variant, cmeta["theta"], cmeta["k"])
    return index, customized
