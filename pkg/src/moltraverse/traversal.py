"""Heuristic-weighted manifold traversal over an indexed latent space.

The pipeline: embed a compound corpus into latent points (``build_index``),
connect each point to its nearest neighbours with edge weights combining the
decoder pull-back metric and weighted heuristic distances
(``build_poi_graph``), attach free source/destination points, find one or
more loopless shortest paths (Dijkstra / Yen), resample each path at m
equidistant arc-length positions, and decode every sample into a candidate
compound with properties, a novelty flag and a neighbour-voted label.

Everything is deterministic for a fixed request and seed. Index and graph
are immutable once built; traversals are read-only and safe to run
concurrently.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import molecule
from .kdtree import KdTree
from .latent import jacobian_term
from .molecule import (
    MISSING_HEURISTICS,
    CompoundProfile,
    FragmentTable,
    HeuristicVector,
    activity_class,
    build_fragment_table,
    heuristic_distance,
    profile_from_mol,
    to_molgraph,
    validate,
)


class TraversalError(Exception):
    """Base class for traversal failures."""


class RequestError(TraversalError):
    """Invalid traversal request fields."""


class UnknownLabelError(RequestError):
    pass


class DisconnectedError(TraversalError):
    """Source and destination lie in different graph components."""


class IndexBuildError(TraversalError):
    pass


class ZeroLengthPathError(TraversalError):
    pass


# -- latent index --------------------------------------------------------


@dataclass(frozen=True)
class IndexRecord:
    id: str
    smiles: str
    label: str | None
    activity: float | None
    profile: CompoundProfile


@dataclass
class LatentIndex:
    """Embedded corpus: parallel points/records plus a k-d tree over coords."""

    points: np.ndarray
    records: list[IndexRecord]
    kdtree: KdTree
    frag_table: FragmentTable
    grammar: object

    def __post_init__(self) -> None:
        self._id_map = {rec.id: i for i, rec in enumerate(self.records)}
        self._smiles_set = {rec.smiles.strip() for rec in self.records}
        self._fp_set = {rec.profile.fingerprint.bits for rec in self.records}

    @property
    def size(self) -> int:
        return len(self.records)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def record_by_id(self, rec_id: str) -> tuple[int, IndexRecord]:
        if rec_id not in self._id_map:
            raise RequestError(f"unknown compound id {rec_id!r}")
        i = self._id_map[rec_id]
        return i, self.records[i]

    def labels(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.records:
            if rec.label:
                counts[rec.label] = counts.get(rec.label, 0) + 1
        return dict(sorted(counts.items()))

    def is_known_smiles(self, smiles: str) -> bool:
        return smiles.strip() in self._smiles_set

    def is_known_fingerprint(self, fp: molecule.Fingerprint) -> bool:
        return fp.bits in self._fp_set


def quantize_coords(z: np.ndarray) -> np.ndarray:
    """Round to float32 precision so the float32 index file is lossless."""
    return np.asarray(z, dtype=np.float32).astype(np.float64)


def build_index(records: Sequence, encoder, frag_table: FragmentTable | None = None) -> LatentIndex:
    """Encode a validated compound dataset and build the search index.

    ``records`` need ``id``, ``smiles``, ``label`` and ``activity`` fields.
    Invalid molecules abort the build, reporting the offending row.
    """
    records = list(records)
    if not records:
        raise IndexBuildError("dataset is empty")
    grammar = encoder.grammar
    mols = []
    for row, rec in enumerate(records, start=1):
        try:
            mol = to_molgraph(rec.smiles, grammar)
            report = validate(mol)
            if not report.valid:
                raise molecule.MoleculeError("; ".join(report.reasons))
        except Exception as exc:
            raise IndexBuildError(f"row {row} (id={rec.id!r}): {exc}") from exc
        mols.append(mol)
    if frag_table is None:
        frag_table = build_fragment_table(mols)
    out_records: list[IndexRecord] = []
    points = np.empty((len(records), encoder.latent_dim), dtype=np.float64)
    for i, (rec, mol) in enumerate(zip(records, mols)):
        profile = profile_from_mol(
            mol, frag_table, rec.smiles, rec.activity, encoder.nbits, encoder.max_path
        )
        out_records.append(IndexRecord(rec.id, rec.smiles, rec.label, rec.activity, profile))
        points[i] = quantize_coords(encoder.encode_fingerprint(profile.fingerprint))
    return LatentIndex(points, out_records, KdTree(points), frag_table, grammar)


def knn(index: LatentIndex, z: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n nearest records by Euclidean distance (ascending, ties by index)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > index.size:
        raise ValueError(f"n={n} exceeds index size {index.size}")
    return index.kdtree.query(np.asarray(z, dtype=np.float64), n)


# -- POI graph ------------------------------------------------------------


@dataclass(frozen=True)
class HeuristicWeights:
    """User weights W^k for the four heuristic distance components."""

    fingerprint: float = 1.0
    sa: float = 0.0
    drug_likeness: float = 0.0
    activity: float = 0.0

    def validate(self) -> None:
        for name, w in self.as_dict().items():
            if not math.isfinite(w) or w < 0:
                raise RequestError(f"weight {name} must be finite and >= 0, got {w}")

    def as_dict(self) -> dict[str, float]:
        return {
            "fingerprint": self.fingerprint,
            "sa": self.sa,
            "drug_likeness": self.drug_likeness,
            "activity": self.activity,
        }

    def apply(self, h: HeuristicVector) -> float:
        return (
            self.fingerprint * h.fingerprint_dist
            + self.sa * h.sa_dist
            + self.drug_likeness * h.druglike_dist
            + self.activity * h.activity_dist
        )

    def key(self) -> tuple[float, float, float, float]:
        return (self.fingerprint, self.sa, self.drug_likeness, self.activity)


@dataclass(frozen=True)
class EdgeData:
    weight: float
    jacobian: float
    heuristics: HeuristicVector


@dataclass
class PoiGraph:
    """Symmetric weighted graph over index nodes plus optional endpoints."""

    adjacency: dict[int, dict[int, float]]
    edges: dict[tuple[int, int], EdgeData]
    coords: dict[int, np.ndarray]
    n_components: int
    source: int | None = None
    dest: int | None = None

    def nodes(self) -> list[int]:
        return sorted(self.adjacency)

    def weight(self, u: int, v: int) -> float:
        return self.adjacency[u][v]

    def edge(self, u: int, v: int) -> EdgeData:
        return self.edges[(min(u, v), max(u, v))]


def _count_components(adjacency: dict[int, dict[int, float]]) -> int:
    seen: set[int] = set()
    count = 0
    for start in adjacency:
        if start in seen:
            continue
        count += 1
        stack = [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            for nbr in adjacency[node]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
    return count


def graph_from_edges(
    edges: Iterable[tuple[int, int, float]],
    coords: dict[int, np.ndarray] | None = None,
) -> PoiGraph:
    """Build a PoiGraph from explicit undirected weighted edges (tests, demos)."""
    adjacency: dict[int, dict[int, float]] = {}
    data: dict[tuple[int, int], EdgeData] = {}
    for u, v, w in edges:
        adjacency.setdefault(u, {})[v] = w
        adjacency.setdefault(v, {})[u] = w
        data[(min(u, v), max(u, v))] = EdgeData(w, w, MISSING_HEURISTICS)
    return PoiGraph(adjacency, data, coords or {}, _count_components(adjacency))


def build_poi_graph(
    index: LatentIndex,
    decoder,
    n: int,
    weights: HeuristicWeights,
    frag_table: FragmentTable | None = None,
) -> PoiGraph:
    """Connect every index point to its n nearest neighbours.

    Edge weight = pull-back Jacobian term at the edge midpoint plus the
    weighted heuristic distances; edges are inserted symmetrically and the
    number of connected components is recorded.
    """
    if n < 1:
        raise RequestError("n must be >= 1")
    if n >= index.size:
        raise RequestError(f"n={n} needs at least n+1 index points, have {index.size}")
    weights.validate()
    adjacency: dict[int, dict[int, float]] = {i: {} for i in range(index.size)}
    data: dict[tuple[int, int], EdgeData] = {}
    for i in range(index.size):
        ids, _ = index.kdtree.query(index.points[i], min(n + 1, index.size))
        neighbors = [int(j) for j in ids if int(j) != i][:n]
        for j in neighbors:
            key = (min(i, j), max(i, j))
            if key in data:
                continue
            jac = jacobian_term(decoder, index.points[i], index.points[j])
            heur = heuristic_distance(index.records[i].profile, index.records[j].profile)
            w = jac.value + weights.apply(heur)
            data[key] = EdgeData(w, jac.value, heur)
            adjacency[i][j] = w
            adjacency[j][i] = w
    coords = {i: index.points[i] for i in range(index.size)}
    return PoiGraph(adjacency, data, coords, _count_components(adjacency))


# -- shortest paths -------------------------------------------------------


def _dijkstra(
    adjacency: dict[int, dict[int, float]],
    source: int,
    dest: int,
    banned_nodes: set[int] | None = None,
    banned_edges: set[tuple[int, int]] | None = None,
    heuristic: Callable[[int], float] | None = None,
) -> tuple[list[int], float] | None:
    banned_nodes = banned_nodes or set()
    banned_edges = banned_edges or set()
    if source == dest:
        return [source], 0.0
    h = heuristic or (lambda _: 0.0)
    dist: dict[int, float] = {source: 0.0}
    prev: dict[int, int] = {}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(h(source), source)]
    while heap:
        _, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == dest:
            path = [dest]
            while path[-1] != source:
                path.append(prev[path[-1]])
            path.reverse()
            return path, dist[dest]
        for nbr, w in adjacency.get(node, {}).items():
            if nbr in done or nbr in banned_nodes or (node, nbr) in banned_edges:
                continue
            cand = dist[node] + w
            if cand < dist.get(nbr, math.inf):
                dist[nbr] = cand
                prev[nbr] = node
                heapq.heappush(heap, (cand + h(nbr), nbr))
    return None


def euclidean_heuristic(graph: PoiGraph, dest: int, scale: float) -> Callable[[int], float]:
    """A* heuristic scale * ||coords(v) - coords(dest)||.

    Admissible only when every edge weight is >= scale times its Euclidean
    length; the zero default (plain Dijkstra) is always safe.
    """
    target = graph.coords[dest]
    return lambda v: scale * float(np.linalg.norm(graph.coords[v] - target))


def shortest_path(
    graph: PoiGraph,
    source: int,
    dest: int,
    heuristic: Callable[[int], float] | None = None,
) -> tuple[list[int], float]:
    """Minimal-cost loopless path; raises DisconnectedError when there is none."""
    if source not in graph.adjacency or dest not in graph.adjacency:
        raise RequestError(f"node {source if source not in graph.adjacency else dest} not in graph")
    result = _dijkstra(graph.adjacency, source, dest, heuristic=heuristic)
    if result is None:
        raise DisconnectedError(
            f"no path from {source} to {dest}; graph has {graph.n_components} components"
        )
    return result


def yen_k_paths(graph: PoiGraph, source: int, dest: int, k: int) -> list[tuple[list[int], float]]:
    """The K shortest loopless paths, deduplicated, costs non-decreasing.

    Classic spur-node deviations; candidate ties resolve by (cost, node
    sequence) so the output order is deterministic. Returns fewer than K
    when the graph admits fewer simple paths.
    """
    if k < 1:
        raise RequestError("K must be >= 1")
    adjacency = graph.adjacency
    first = shortest_path(graph, source, dest)
    accepted: list[tuple[list[int], float]] = [first]
    accepted_set = {tuple(first[0])}
    candidates: dict[tuple[int, ...], float] = {}
    while len(accepted) < k:
        prev_path = accepted[-1][0]
        for i in range(len(prev_path) - 1):
            spur = prev_path[i]
            root = prev_path[: i + 1]
            banned_edges = {
                (p[i], p[i + 1])
                for p, _ in accepted
                if len(p) > i + 1 and p[: i + 1] == root
            }
            banned_nodes = set(root[:-1])
            spur_result = _dijkstra(adjacency, spur, dest, banned_nodes, banned_edges)
            if spur_result is None:
                continue
            spur_path, spur_cost = spur_result
            total = tuple(root[:-1] + spur_path)
            if total in accepted_set or total in candidates:
                continue
            root_cost = sum(adjacency[root[j]][root[j + 1]] for j in range(len(root) - 1))
            candidates[total] = root_cost + spur_cost
        if not candidates:
            break
        best = min(candidates.items(), key=lambda kv: (kv[1], kv[0]))
        del candidates[best[0]]
        accepted.append((list(best[0]), best[1]))
        accepted_set.add(best[0])
    return accepted


# -- geometry -------------------------------------------------------------


def segment_path(polyline: Sequence[np.ndarray] | np.ndarray, m: int) -> np.ndarray:
    """Resample a polyline at m equally spaced arc-length positions.

    The first and last output points are bit-exact copies of the polyline
    endpoints; consecutive samples are separated by total_length / (m - 1)
    of arc length.
    """
    pts = np.asarray(polyline, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("polyline needs at least two points")
    if m < 2:
        raise RequestError("m must be >= 2")
    seg = np.diff(pts, axis=0)
    seglen = np.linalg.norm(seg, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seglen)))
    total = float(cum[-1])
    out = np.empty((m, pts.shape[1]), dtype=np.float64)
    out[0] = pts[0]
    out[-1] = pts[-1]
    if total == 0.0:
        if m == 2:
            return out
        raise ZeroLengthPathError("zero-length polyline cannot hold more than its endpoints")
    k = 0
    last = len(seglen) - 1
    for j in range(1, m - 1):
        t = total * j / (m - 1)
        while k < last and (cum[k + 1] < t or seglen[k] == 0.0):
            k += 1
        frac = (t - cum[k]) / seglen[k]
        out[j] = pts[k] + frac * seg[k]
    return out


def centroid(index: LatentIndex, label: str) -> np.ndarray:
    """Coordinate-wise mean of the points carrying a label."""
    rows = [i for i, rec in enumerate(index.records) if rec.label == label]
    if not rows:
        raise UnknownLabelError(f"unknown label {label!r}")
    return index.points[rows].mean(axis=0)


def perturb(z: np.ndarray, sigma: float, seed) -> np.ndarray:
    """z + sigma * g with g standard Gaussian from a seeded generator."""
    if sigma < 0:
        raise RequestError("sigma must be >= 0")
    z = np.asarray(z, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return z + sigma * rng.standard_normal(z.shape)


# -- endpoint attachment ---------------------------------------------------


def _endpoint_profile(index: LatentIndex, decoder, coords: np.ndarray) -> CompoundProfile | None:
    """Profile for a free latent point: decode it and profile the result."""
    try:
        out = decoder.decode(coords)
    except Exception as exc:
        raise TraversalError(f"endpoint decoding failure: {exc}") from exc
    if not out.complete or not out.valid:
        return None
    mol = to_molgraph(out.text, index.grammar)
    return profile_from_mol(
        mol, index.frag_table, out.text,
        nbits=index.records[0].profile.fingerprint.nbits if index.records else 2048,
    )


def attach_endpoints(
    graph: PoiGraph,
    index: LatentIndex,
    decoder,
    s_coords: np.ndarray,
    d_coords: np.ndarray,
    n: int,
    weights: HeuristicWeights,
    s_profile: CompoundProfile | None = None,
    d_profile: CompoundProfile | None = None,
) -> PoiGraph:
    """Return a new graph with source/destination nodes wired to their n
    nearest index points using the same edge-weight formula.

    An endpoint exactly coinciding with a stored point adopts that record's
    profile (so the connecting edge has weight zero); otherwise the endpoint
    is decoded, and if the decode yields no valid molecule the heuristic
    components fall back to zero with a missing-profile flag.
    """
    adjacency = {u: dict(vs) for u, vs in graph.adjacency.items()}
    edges = dict(graph.edges)
    coords = dict(graph.coords)
    n_index = index.size
    out = PoiGraph(adjacency, edges, coords, graph.n_components)

    node_ids = (n_index, n_index + 1)
    for node_id, z, profile in (
        (node_ids[0], np.asarray(s_coords, dtype=np.float64), s_profile),
        (node_ids[1], np.asarray(d_coords, dtype=np.float64), d_profile),
    ):
        ids, dists = knn(index, z, min(n, index.size))
        if profile is None and dists[0] == 0.0:
            profile = index.records[int(ids[0])].profile
        if profile is None:
            profile = _endpoint_profile(index, decoder, z)
        adjacency[node_id] = {}
        coords[node_id] = z
        for j in ids:
            j = int(j)
            jac = jacobian_term(decoder, z, index.points[j])
            if profile is None:
                heur = MISSING_HEURISTICS
            else:
                heur = heuristic_distance(profile, index.records[j].profile)
            w = jac.value + weights.apply(heur)
            adjacency[node_id][j] = w
            adjacency[j][node_id] = w
            edges[(min(node_id, j), max(node_id, j))] = EdgeData(w, jac.value, heur)
    out.n_components = _count_components(adjacency)
    out.source, out.dest = node_ids
    return out


# -- labelling -------------------------------------------------------------


def _label_vote(index: LatentIndex, ids, dists) -> tuple[str | None, dict[str, int]]:
    votes: dict[str, int] = {}
    dist_sum: dict[str, float] = {}
    for j, dist in zip(ids, dists):
        label = index.records[int(j)].label
        if not label:
            continue
        votes[label] = votes.get(label, 0) + 1
        dist_sum[label] = dist_sum.get(label, 0.0) + float(dist)
    if not votes:
        return None, {}
    winner = min(votes, key=lambda lab: (-votes[lab], dist_sum[lab], lab))
    return winner, votes


def label_by_neighbors(index: LatentIndex, z: np.ndarray, k: int) -> tuple[str | None, dict[str, int]]:
    """Majority label among the k nearest labelled records.

    Ties break toward the label with the smaller summed neighbour distance,
    then lexicographically. Returns (label, vote counts); label is None when
    no neighbour carries one.
    """
    if index.size == 0:
        raise ValueError("index is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    ids, dists = knn(index, z, min(k, index.size))
    return _label_vote(index, ids, dists)


def _neighbor_activity(index: LatentIndex, ids) -> float | None:
    values = [index.records[int(j)].activity for j in ids]
    values = [v for v in values if v is not None]
    if not values:
        return None
    return sum(values) / len(values)


# -- traversal requests and results -----------------------------------------


@dataclass(frozen=True)
class Endpoint:
    """One of: explicit coords, a label (its centroid), or a compound id."""

    coords: tuple[float, ...] | None = None
    label: str | None = None
    id: str | None = None

    def validate(self) -> None:
        set_fields = sum(x is not None for x in (self.coords, self.label, self.id))
        if set_fields != 1:
            raise RequestError("endpoint must set exactly one of coords, label, id")


MODES = ("yen", "perturb", "vary_m")


@dataclass(frozen=True)
class TraversalRequest:
    source: Endpoint
    destination: Endpoint
    m: int = 100
    n: int = 8
    k_paths: int = 4
    weights: HeuristicWeights = field(default_factory=HeuristicWeights)
    mode: str = "perturb"
    sigma: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        self.source.validate()
        self.destination.validate()
        if self.m < 2:
            raise RequestError(f"m must be >= 2, got {self.m}")
        if self.n < 1:
            raise RequestError(f"n must be >= 1, got {self.n}")
        if self.k_paths < 1:
            raise RequestError(f"K must be >= 1, got {self.k_paths}")
        if self.mode not in MODES:
            raise RequestError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise RequestError(f"sigma must be finite and >= 0, got {self.sigma}")
        self.weights.validate()


@dataclass(frozen=True)
class CompoundEval:
    """One decoded path point with properties and provenance flags."""

    smiles: str
    complete: bool
    valid: bool
    reasons: tuple[str, ...]
    novel: bool
    mw: float | None
    sa: float | None
    drug_likeness: float | None
    activity_class: str | None  # estimated from neighbour activities
    potential_label: str | None


@dataclass(frozen=True)
class PathResult:
    nodes: tuple[int, ...]
    cost: float
    m: int
    points: np.ndarray
    compounds: tuple[CompoundEval, ...]


@dataclass(frozen=True)
class TraversalStats:
    points: int
    complete: int
    valid: int
    novel: int
    unique_novel_syntactic: int
    unique_novel_valid: int

    def as_dict(self) -> dict[str, int]:
        return {
            "points": self.points,
            "complete": self.complete,
            "valid": self.valid,
            "novel": self.novel,
            "unique_novel_syntactic": self.unique_novel_syntactic,
            "unique_novel_valid": self.unique_novel_valid,
        }


@dataclass(frozen=True)
class TraversalResult:
    paths: tuple[PathResult, ...]
    stats: TraversalStats
    source: np.ndarray
    dest: np.ndarray
    n_components: int


@dataclass(frozen=True)
class _TextEval:
    complete: bool
    valid: bool
    reasons: tuple[str, ...]
    novel: bool
    mw: float | None
    sa: float | None
    drug_likeness: float | None


def _evaluate_text(index: LatentIndex, out, memo: dict[str, _TextEval]) -> _TextEval:
    text = out.text
    cached = memo.get(text)
    if cached is not None and cached.complete == out.complete:
        return cached
    mw = sa = dl = None
    novel = False
    if out.complete:
        novel = not index.is_known_smiles(text)
        if out.valid:
            mol = to_molgraph(text, index.grammar)
            nbits = index.records[0].profile.fingerprint.nbits
            fp = molecule.fingerprint(mol, nbits)
            if novel:
                novel = not index.is_known_fingerprint(fp)
            mw = molecule.molecular_weight(mol)
            sa = molecule.sa_score(mol, index.frag_table)
            dl = molecule.drug_likeness(mol)
    ev = _TextEval(out.complete, out.valid, out.reasons, novel, mw, sa, dl)
    memo[text] = ev
    return ev


def evaluate_points(
    points: np.ndarray,
    index: LatentIndex,
    decoder,
    label_k: int,
    memo: dict[str, _TextEval] | None = None,
) -> list[CompoundEval]:
    """Decode and profile every latent point; shared by all path modes and
    the straight-line baseline so comparisons are like for like."""
    memo = {} if memo is None else memo
    out: list[CompoundEval] = []
    for z in points:
        decoded = decoder.decode(z)
        ev = _evaluate_text(index, decoded, memo)
        ids, dists = knn(index, z, min(label_k, index.size))
        label, _ = _label_vote(index, ids, dists)
        act = _neighbor_activity(index, ids)
        act_label = activity_class(act).label if act is not None else None
        out.append(
            CompoundEval(
                smiles=decoded.text,
                complete=ev.complete,
                valid=ev.valid,
                reasons=ev.reasons,
                novel=ev.novel,
                mw=ev.mw,
                sa=ev.sa,
                drug_likeness=ev.drug_likeness,
                activity_class=act_label,
                potential_label=label,
            )
        )
    return out


def _stats(compounds: Iterable[CompoundEval]) -> TraversalStats:
    compounds = list(compounds)
    syntactic: set[str] = set()
    valid_set: set[str] = set()
    for c in compounds:
        if c.complete and c.novel:
            syntactic.add(c.smiles)
            if c.valid:
                valid_set.add(c.smiles)
    return TraversalStats(
        points=len(compounds),
        complete=sum(c.complete for c in compounds),
        valid=sum(c.valid for c in compounds),
        novel=sum(c.novel for c in compounds),
        unique_novel_syntactic=len(syntactic),
        unique_novel_valid=len(valid_set),
    )


def _resolve_endpoint(
    ep: Endpoint, index: LatentIndex
) -> tuple[np.ndarray, CompoundProfile | None]:
    ep.validate()
    if ep.id is not None:
        i, rec = index.record_by_id(ep.id)
        return index.points[i].copy(), rec.profile
    if ep.label is not None:
        return centroid(index, ep.label), None
    coords = np.asarray(ep.coords, dtype=np.float64)
    if coords.shape != (index.dim,):
        raise RequestError(f"coords must have dimension {index.dim}, got {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise RequestError("coords must be finite")
    return coords, None


def traverse(
    request: TraversalRequest,
    index: LatentIndex,
    decoder,
    graph: PoiGraph | None = None,
) -> TraversalResult:
    """Run the full traversal: resolve endpoints, attach them to the POI
    graph, find K paths per the requested mode, resample each to m
    equidistant points and decode/evaluate every sample.

    Modes: ``yen`` (K shortest loopless paths), ``perturb`` (path 0 between
    the given endpoints, paths 1..K-1 between seeded Gaussian perturbations
    of them), ``vary_m`` (one path resampled at m, m+1, .., m+K-1 points; the
    only mode where path point counts differ from m).
    """
    request.validate()
    s_coords, s_profile = _resolve_endpoint(request.source, index)
    d_coords, d_profile = _resolve_endpoint(request.destination, index)
    if graph is None:
        graph = build_poi_graph(index, decoder, request.n, request.weights)

    def attached(s, d, sp, dp):
        return attach_endpoints(graph, index, decoder, s, d, request.n, request.weights, sp, dp)

    routed: list[tuple[list[int], float, np.ndarray, int]] = []  # nodes, cost, polyline, m
    if request.mode == "yen":
        g2 = attached(s_coords, d_coords, s_profile, d_profile)
        for nodes, cost in yen_k_paths(g2, g2.source, g2.dest, request.k_paths):
            polyline = np.stack([g2.coords[v] for v in nodes])
            routed.append((nodes, cost, polyline, request.m))
    elif request.mode == "perturb":
        for p in range(request.k_paths):
            if p == 0:
                sp, dp, s2, d2 = s_profile, d_profile, s_coords, d_coords
            else:
                s2 = perturb(s_coords, request.sigma, [request.seed, p, 0])
                d2 = perturb(d_coords, request.sigma, [request.seed, p, 1])
                sp = dp = None
            g2 = attached(s2, d2, sp, dp)
            nodes, cost = shortest_path(g2, g2.source, g2.dest)
            polyline = np.stack([g2.coords[v] for v in nodes])
            routed.append((nodes, cost, polyline, request.m))
        routed.sort(key=lambda r: r[1])
    else:  # vary_m
        g2 = attached(s_coords, d_coords, s_profile, d_profile)
        nodes, cost = shortest_path(g2, g2.source, g2.dest)
        polyline = np.stack([g2.coords[v] for v in nodes])
        for p in range(request.k_paths):
            routed.append((nodes, cost, polyline, request.m + p))

    memo: dict[str, _TextEval] = {}
    paths: list[PathResult] = []
    all_compounds: list[CompoundEval] = []
    for nodes, cost, polyline, m in routed:
        if polyline.shape[0] < 2:
            polyline = np.stack([polyline[0], polyline[0]])
        samples = segment_path(polyline, m)
        compounds = evaluate_points(samples, index, decoder, request.n, memo)
        all_compounds.extend(compounds)
        paths.append(PathResult(tuple(nodes), float(cost), m, samples, tuple(compounds)))

    return TraversalResult(
        paths=tuple(paths),
        stats=_stats(all_compounds),
        source=s_coords,
        dest=d_coords,
        n_components=graph.n_components,
    )


def linear_interpolation_points(s: np.ndarray, d: np.ndarray, n_points: int) -> np.ndarray:
    """Straight-line baseline: n equidistant points from s to d inclusive."""
    if n_points < 2:
        raise RequestError("n_points must be >= 2")
    return segment_path(np.stack([np.asarray(s, float), np.asarray(d, float)]), n_points)


# -- region mining -----------------------------------------------------------


@dataclass(frozen=True)
class Region:
    lower: np.ndarray
    upper: np.ndarray
    empty: bool
    record_indices: tuple[int, ...]


def mine_region(index: LatentIndex, paths: Sequence[np.ndarray]) -> Region:
    """Intersect the axis-aligned bounding boxes of segmented paths and list
    the index records inside the intersection (possibly none)."""
    if len(paths) < 2:
        raise ValueError("need at least two paths to mine an overlap region")
    lows = np.stack([np.asarray(p, float).min(axis=0) for p in paths])
    highs = np.stack([np.asarray(p, float).max(axis=0) for p in paths])
    lower = lows.max(axis=0)
    upper = highs.min(axis=0)
    empty = bool(np.any(lower > upper))
    if empty:
        return Region(lower, upper, True, ())
    inside = np.all((index.points >= lower) & (index.points <= upper), axis=1)
    return Region(lower, upper, False, tuple(int(i) for i in np.flatnonzero(inside)))


# -- serialization ------------------------------------------------------------


def round_floats(obj, sig: int = 9):
    """Recursively round floats to <= sig significant digits (JSON contract)."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if obj == 0.0 or not math.isfinite(obj):
            return obj
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, sig) for v in obj]
    return obj


def result_to_dict(result: TraversalResult) -> dict:
    """JSON-ready view of a traversal result (shared by CLI and service)."""
    paths = []
    compounds = []
    for pi, path in enumerate(result.paths):
        paths.append(
            {
                "nodes": [int(v) for v in path.nodes],
                "cost": float(path.cost),
                "m": path.m,
                "points": [[float(x) for x in row] for row in path.points],
            }
        )
        for j, c in enumerate(path.compounds):
            compounds.append(
                {
                    "path": pi,
                    "point": j,
                    "smiles": c.smiles,
                    "complete": c.complete,
                    "valid": c.valid,
                    "novel": c.novel,
                    "properties": {
                        "mw": c.mw,
                        "sa": c.sa,
                        "drug_likeness": c.drug_likeness,
                        "activity_class": c.activity_class,
                    },
                    "potential_label": c.potential_label,
                }
            )
    return {
        "paths": paths,
        "compounds": compounds,
        "stats": result.stats.as_dict(),
        "n_components": result.n_components,
    }
