"""Molecular graphs and property heuristics.

Builds molecular graphs from parsed SMILES and computes everything the edge
heuristics need: path fingerprints with Tanimoto/cosine similarity, molecular
weight, a synthetic-accessibility score driven by a fragment-frequency table,
a Lipinski-style drug-likeness score, binding-activity classes and the
per-pair heuristic distance vector.

The chemistry model is deliberately small: the standard valence table,
aromatic bonds counting 1.5 toward valence, and cycle membership as the
aromaticity sanity check. Isotopes are accepted syntactically but ignored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .grammar import Grammar, check_ring_pairing, parse

AROMATIC_ORDER = 1.5

VALENCE = {
    "B": 3, "C": 4, "N": 3, "O": 2, "P": 3, "S": 2,
    "F": 1, "Cl": 1, "Br": 1, "I": 1, "H": 1,
}

# IUPAC 2021 abridged standard atomic weights.
ATOMIC_MASS = {
    "H": 1.008, "B": 10.81, "C": 12.011, "N": 14.007, "O": 15.999,
    "F": 18.998, "P": 30.974, "S": 32.06, "Cl": 35.45, "Br": 79.904,
    "I": 126.904, "Li": 6.94, "Na": 22.990, "K": 39.098, "Mg": 24.305,
    "Ca": 40.078, "Al": 26.982, "Si": 28.085, "Fe": 55.845, "Cu": 63.546,
    "Zn": 65.38, "Se": 78.971, "As": 74.922,
}

_BOND_SYMBOLS = {"-": 1.0, "=": 2.0, "#": 3.0, ":": AROMATIC_ORDER, "/": 1.0, "\\": 1.0}
_BOND_TOKEN = {1.0: "-", 2.0: "=", 3.0: "#", AROMATIC_ORDER: ":"}

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; the one hash used for fingerprint and fragment bits."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _FNV_MASK
    return h


class MoleculeError(Exception):
    """Base class for molecular-graph construction failures."""


class ValenceError(MoleculeError):
    def __init__(self, message: str, atom: int):
        super().__init__(message)
        self.atom = atom


class RingClosureError(MoleculeError):
    pass


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    aromatic: bool = False
    explicit_h: int | None = None  # None for organic-subset atoms


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: float  # 1.0, 2.0, 3.0 or AROMATIC_ORDER


@dataclass
class MolGraph:
    """Molecular graph with resolved ring closures and derived implicit H."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    implicit_h: tuple[int, ...]
    has_stereo: bool = False
    _adj: list[list[tuple[int, float]]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self._adj:
            adj: list[list[tuple[int, float]]] = [[] for _ in self.atoms]
            for bond in self.bonds:
                adj[bond.a].append((bond.b, bond.order))
                adj[bond.b].append((bond.a, bond.order))
            for nbrs in adj:
                nbrs.sort()
            self._adj = adj

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self._adj[i])

    def total_h(self, i: int) -> int:
        explicit = self.atoms[i].explicit_h or 0
        return self.implicit_h[i] + explicit

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    reasons: tuple[str, ...] = ()


def _order_sum(atom_idx: int, bonds_by_atom: list[list[float]]) -> float:
    return sum(bonds_by_atom[atom_idx])


def _valence_issues(
    atoms: list[Atom], bonds: list[Bond]
) -> tuple[list[int], list[str]]:
    """Per-atom implicit hydrogen counts and the list of valence violations."""
    sums = [0.0] * len(atoms)
    for bond in bonds:
        sums[bond.a] += bond.order
        sums[bond.b] += bond.order
    implicit: list[int] = []
    issues: list[str] = []
    for i, atom in enumerate(atoms):
        if atom.explicit_h is None:
            val = VALENCE.get(atom.element)
            if val is None:
                issues.append(f"atom {i}: element {atom.element!r} has no valence entry")
                implicit.append(0)
                continue
            deficit = val - sums[i]
            ih = math.floor(deficit + 1e-9)
            if ih < 0:
                issues.append(
                    f"atom {i} ({atom.element}): bond order sum {sums[i]:g} exceeds valence {val}"
                )
                ih = 0
            implicit.append(ih)
        else:
            implicit.append(0)
            val = VALENCE.get(atom.element)
            if val is not None:
                allowed = val + abs(atom.charge)
                total = sums[i] + atom.explicit_h
                if total > allowed + 1e-9:
                    issues.append(
                        f"atom {i} ({atom.element}{atom.charge:+d}): total valence "
                        f"{total:g} exceeds {allowed}"
                    )
    return implicit, issues


def to_molgraph(smiles: str, grammar: Grammar) -> MolGraph:
    """Build a molecular graph from a SMILES string.

    Parses under the grammar first, so syntax errors surface as
    :class:`~moltraverse.grammar.SmilesParseError`; unpaired ring digits raise
    :class:`RingClosureError` and valence violations :class:`ValenceError`.
    """
    parse(smiles, grammar)
    ok, unpaired = check_ring_pairing(smiles)
    if not ok:
        raise RingClosureError(
            "; ".join(f"unpaired ring digit {d}" for d in unpaired)
        )

    tokens = [grammar.terminals[tid] for _, tid in grammar.tokenize(smiles)]
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_keys: set[tuple[int, int]] = set()
    has_stereo = False

    prev: int | None = None
    pending: float | None = None
    branch_stack: list[int | None] = []
    ring_open: dict[int, int] = {}

    def add_bond(a: int, b: int, order: float | None) -> None:
        if order is None:
            both_aromatic = atoms[a].aromatic and atoms[b].aromatic
            order = AROMATIC_ORDER if both_aromatic else 1.0
        if a == b:
            raise RingClosureError(f"ring bond closes on its own atom {a}")
        key = (min(a, b), max(a, b))
        if key in bond_keys:
            raise MoleculeError(f"duplicate bond between atoms {a} and {b}")
        bond_keys.add(key)
        bonds.append(Bond(key[0], key[1], order))

    def attach(new_idx: int) -> None:
        nonlocal prev, pending
        if prev is not None:
            add_bond(prev, new_idx, pending)
        pending = None
        prev = new_idx

    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok == "[":
            i += 1
            while tokens[i].isdigit():  # isotope digits: parsed, ignored
                i += 1
            sym = tokens[i]
            i += 1
            aromatic = sym.islower()
            element = sym.capitalize()
            if tokens[i] in ("@", "@@"):
                has_stereo = True
                i += 1
            explicit_h = 0
            if tokens[i] == "H":
                i += 1
                explicit_h = 1
                if tokens[i].isdigit():
                    explicit_h = int(tokens[i])
                    i += 1
            charge = 0
            if tokens[i] in ("+", "-"):
                sign = 1 if tokens[i] == "+" else -1
                i += 1
                magnitude = 1
                if tokens[i].isdigit():
                    magnitude = int(tokens[i])
                    i += 1
                charge = sign * magnitude
            assert tokens[i] == "]"
            atoms.append(Atom(element, charge, aromatic, explicit_h))
            attach(len(atoms) - 1)
        elif tok in _BOND_SYMBOLS:
            pending = _BOND_SYMBOLS[tok]
            if tok in ("/", "\\"):
                has_stereo = True
        elif tok == "(":
            branch_stack.append(prev)
        elif tok == ")":
            prev = branch_stack.pop()
            pending = None
        elif tok == ".":
            prev = None
            pending = None
        elif tok == "%":
            label = int(tokens[i + 1] + tokens[i + 2])
            i += 2
            _close_ring(label, prev, ring_open, atoms, add_bond)
        elif tok.isdigit():
            _close_ring(int(tok), prev, ring_open, atoms, add_bond)
        else:
            aromatic = tok.islower()
            atoms.append(Atom(tok.capitalize(), 0, aromatic, None))
            attach(len(atoms) - 1)
        i += 1

    assert not ring_open, "ring digits pre-checked"
    implicit, issues = _valence_issues(atoms, bonds)
    if issues:
        first = issues[0]
        atom_idx = int(first.split()[1].rstrip(":").rstrip("(").split("(")[0])
        raise ValenceError("; ".join(issues), atom_idx)
    return MolGraph(tuple(atoms), tuple(bonds), tuple(implicit), has_stereo)


def _close_ring(label, prev, ring_open, atoms, add_bond) -> None:
    if prev is None:
        raise RingClosureError(f"ring digit {label} before any atom")
    if label in ring_open:
        other = ring_open.pop(label)
        add_bond(other, prev, None)
    else:
        ring_open[label] = prev


def _bridges(mol: MolGraph) -> set[tuple[int, int]]:
    """Edges not on any cycle, via one DFS (iterative Tarjan low-links)."""
    n = mol.n_atoms
    disc = [-1] * n
    low = [0] * n
    bridges: set[tuple[int, int]] = set()
    timer = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]
        while stack:
            node, parent, ni = stack.pop()
            if ni == 0:
                disc[node] = low[node] = timer
                timer += 1
            nbrs = mol.neighbors(node)
            if ni < len(nbrs):
                stack.append((node, parent, ni + 1))
                nxt = nbrs[ni][0]
                if nxt == parent:
                    continue
                if disc[nxt] >= 0:
                    low[node] = min(low[node], disc[nxt])
                else:
                    stack.append((nxt, node, 0))
            elif parent >= 0:
                low[parent] = min(low[parent], low[node])
                if low[node] > disc[parent]:
                    bridges.add((min(parent, node), max(parent, node)))
    return bridges


def _cycle_basis(mol: MolGraph) -> list[list[int]]:
    """Fundamental cycles of a DFS spanning forest (one per non-tree edge)."""
    n = mol.n_atoms
    parent = [-2] * n
    depth = [0] * n
    order: list[int] = []
    for root in range(n):
        if parent[root] != -2:
            continue
        parent[root] = -1
        queue = [root]
        while queue:
            node = queue.pop()
            order.append(node)
            for nbr, _ in mol.neighbors(node):
                if parent[nbr] == -2:
                    parent[nbr] = node
                    depth[nbr] = depth[node] + 1
                    queue.append(nbr)
    tree_edges = {
        (min(i, parent[i]), max(i, parent[i])) for i in range(n) if parent[i] >= 0
    }
    cycles: list[list[int]] = []
    for bond in mol.bonds:
        key = (bond.a, bond.b)
        if key in tree_edges:
            continue
        a, b = bond.a, bond.b
        path_a: list[int] = [a]
        path_b: list[int] = [b]
        while depth[a] > depth[b]:
            a = parent[a]
            path_a.append(a)
        while depth[b] > depth[a]:
            b = parent[b]
            path_b.append(b)
        while a != b:
            a = parent[a]
            b = parent[b]
            path_a.append(a)
            path_b.append(b)
        cycles.append(path_a + path_b[-2::-1])
    return cycles


def validate(mol: MolGraph) -> ValidityReport:
    """Structural validity: bond sanity, valences, aromatic atoms on cycles."""
    reasons: list[str] = []
    seen: set[tuple[int, int]] = set()
    for bond in mol.bonds:
        if not (0 <= bond.a < mol.n_atoms and 0 <= bond.b < mol.n_atoms):
            reasons.append(f"bond ({bond.a},{bond.b}) has out-of-range atom index")
            continue
        if bond.a == bond.b:
            reasons.append(f"self-bond on atom {bond.a}")
        key = (min(bond.a, bond.b), max(bond.a, bond.b))
        if key in seen:
            reasons.append(f"duplicate bond between atoms {key[0]} and {key[1]}")
        seen.add(key)
    if not reasons:
        _, issues = _valence_issues(list(mol.atoms), list(mol.bonds))
        reasons.extend(issues)
        bridges = _bridges(mol)
        for i, atom in enumerate(mol.atoms):
            if not atom.aromatic:
                continue
            on_cycle = any(
                (min(i, j), max(i, j)) not in bridges for j, _ in mol.neighbors(i)
            )
            if not mol.neighbors(i) or not on_cycle:
                reasons.append(f"acyclic aromatic: atom {i}")
    return ValidityReport(not reasons, tuple(reasons))


def validate_smiles(smiles: str, grammar: Grammar) -> ValidityReport:
    """String-level validity: parse, ring pairing, then graph validation."""
    ok, unpaired = check_ring_pairing(smiles)
    if not ok:
        return ValidityReport(False, tuple(f"unpaired ring digit {d}" for d in unpaired))
    try:
        mol = to_molgraph(smiles, grammar)
    except MoleculeError as exc:
        return ValidityReport(False, (str(exc),))
    except Exception as exc:  # parse errors
        return ValidityReport(False, (f"parse error: {exc}",))
    return validate(mol)


def molecular_weight(mol: MolGraph) -> float:
    """Sum of standard atomic masses plus 1.008 per hydrogen."""
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        mass = ATOMIC_MASS.get(atom.element)
        if mass is None:
            raise MoleculeError(f"element {atom.element!r} missing from mass table")
        total += mass + ATOMIC_MASS["H"] * mol.total_h(i)
    return total


# -- fingerprints ------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset[int]
    nbits: int

    @property
    def popcount(self) -> int:
        return len(self.bits)


def _atom_token(atom: Atom) -> str:
    return f"{atom.element}|{atom.charge}|{int(atom.aromatic)}"


def path_strings(mol: MolGraph, max_path: int = 7) -> set[str]:
    """Canonical serializations of all simple linear paths of 1..max_path atoms.

    Each path reads as atom and bond tokens interleaved; of the two directed
    readings the lexicographically smaller one is canonical.
    """
    atom_toks = [_atom_token(a) for a in mol.atoms]
    out: set[str] = set()

    def walk(path: list[int], toks: list[str], visited: set[int]) -> None:
        forward = "".join(toks)
        backward = "".join(reversed(toks))
        out.add(min(forward, backward))
        if len(path) == max_path:
            return
        for nbr, order in mol.neighbors(path[-1]):
            if nbr in visited:
                continue
            toks.append(_BOND_TOKEN[order])
            toks.append(atom_toks[nbr])
            path.append(nbr)
            visited.add(nbr)
            walk(path, toks, visited)
            visited.remove(nbr)
            path.pop()
            toks.pop()
            toks.pop()

    for start in range(mol.n_atoms):
        walk([start], [atom_toks[start]], {start})
    return out


def fingerprint(mol: MolGraph, nbits: int = 2048, max_path: int = 7) -> Fingerprint:
    """Hashed path fingerprint: FNV-1a of each canonical path string mod nbits."""
    if nbits <= 0 or nbits & (nbits - 1):
        raise ValueError("nbits must be a power of two")
    if max_path < 1:
        raise ValueError("max_path must be >= 1")
    bits = {fnv1a64(s.encode("utf-8")) % nbits for s in path_strings(mol, max_path)}
    return Fingerprint(frozenset(bits), nbits)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a & b| / |a | b|; 0.0 for the degenerate both-empty case."""
    if a.nbits != b.nbits:
        raise ValueError(f"fingerprint length mismatch: {a.nbits} vs {b.nbits}")
    union = len(a.bits | b.bits)
    if union == 0:
        return 0.0
    return len(a.bits & b.bits) / union


def cosine_sim(a: Fingerprint, b: Fingerprint) -> float:
    """|a & b| / sqrt(|a| * |b|); 0.0 when either side is empty."""
    if a.nbits != b.nbits:
        raise ValueError(f"fingerprint length mismatch: {a.nbits} vs {b.nbits}")
    if not a.bits or not b.bits:
        return 0.0
    return len(a.bits & b.bits) / math.sqrt(len(a.bits) * len(b.bits))


# -- fragment table and synthetic accessibility ------------------------


@dataclass(frozen=True)
class FragmentTable:
    """Occurrence counts of hashed circular atom environments (radius 0..2)."""

    counts: dict[int, int]
    total: int

    def count(self, env_hash: int) -> int:
        return self.counts.get(env_hash, 0)


def atom_environments(mol: MolGraph, max_radius: int = 2) -> list[tuple[int, int, int]]:
    """(atom, radius, env hash) for every non-redundant circular environment.

    Environments are iterative neighborhood hashes; a radius is registered for
    an atom only while its ball of that radius still grows, so an isolated
    atom contributes exactly one environment.
    """
    n = mol.n_atoms
    env = [fnv1a64(_atom_token(a).encode("utf-8") + f"|{mol.degree(i)}|{mol.total_h(i)}".encode()) for i, a in enumerate(mol.atoms)]
    ball = [frozenset({i}) for i in range(n)]
    out = [(i, 0, env[i]) for i in range(n)]
    for radius in range(1, max_radius + 1):
        new_env: list[int] = []
        new_ball: list[frozenset[int]] = []
        for i in range(n):
            parts = sorted(
                f"{_BOND_TOKEN[order]}{env[j]}" for j, order in mol.neighbors(i)
            )
            new_env.append(fnv1a64(f"{env[i]}|{'|'.join(parts)}".encode("utf-8")))
            grown = ball[i].union(*(ball[j] for j, _ in mol.neighbors(i))) if mol.neighbors(i) else ball[i]
            new_ball.append(grown)
        for i in range(n):
            if new_ball[i] != ball[i]:
                out.append((i, radius, new_env[i]))
        env, ball = new_env, new_ball
    return out


def atom_env_keys(mol: MolGraph, max_radius: int = 2) -> list[int]:
    """Per-atom environment hash at the largest non-redundant radius <= max."""
    best: dict[int, int] = {}
    for atom, _, env_hash in atom_environments(mol, max_radius):
        best[atom] = env_hash  # entries arrive in increasing radius order
    return [best[i] for i in range(mol.n_atoms)]


def build_fragment_table(corpus: list[MolGraph]) -> FragmentTable:
    """Count circular environments over a molecule corpus."""
    if not corpus:
        raise ValueError("fragment table needs a non-empty corpus")
    counts: dict[int, int] = {}
    for mol in corpus:
        for _, _, env_hash in atom_environments(mol):
            counts[env_hash] = counts.get(env_hash, 0) + 1
    return FragmentTable(counts, sum(counts.values()))


def sa_score(mol: MolGraph, frag_table: FragmentTable) -> float:
    """Synthetic-accessibility score in [1, 10]; low means easy to make.

    Fragment rarity (mean negative log frequency of each atom's environment,
    scaled to [0, 6]) plus fixed complexity penalties: +0.5 for fused or spiro
    rings, +1.0 for any ring larger than 8 atoms, +0.005 * (heavy atoms - 30)^2
    beyond 30 heavy atoms, +0.5 when any stereo marker is present.
    """
    if frag_table.total <= 0 or not frag_table.counts:
        raise ValueError("fragment table is empty")
    if mol.n_atoms == 0:
        raise ValueError("empty molecule")
    keys = atom_env_keys(mol)
    total = frag_table.total
    rarity = [
        -math.log(max(frag_table.count(k), 0.5) / total) for k in keys
    ]
    scaled = 6.0 * (sum(rarity) / len(rarity)) / math.log(2.0 * total) if total > 0 else 0.0

    cycles = _cycle_basis(mol)
    fused = 0.0
    for i in range(len(cycles)):
        set_i = set(cycles[i])
        if any(len(set_i & set(cycles[j])) >= 2 for j in range(i + 1, len(cycles))):
            fused = 0.5
            break
    macro = 1.0 if any(len(c) > 8 for c in cycles) else 0.0
    size = 0.005 * max(0, mol.n_atoms - 30) ** 2
    stereo = 0.5 if mol.has_stereo else 0.0

    raw = scaled + fused + macro + size + stereo
    return float(min(10.0, max(1.0, 1.0 + raw)))


# -- drug-likeness and activity ----------------------------------------


def _ramp(value: float, good: float, bad: float) -> float:
    """1.0 up to `good`, linear down to 0.0 at `bad`."""
    if value <= good:
        return 1.0
    if value >= bad:
        return 0.0
    return (bad - value) / (bad - good)


def drug_likeness(mol: MolGraph) -> float:
    """Mean of four Lipinski-style ramp scores in [0, 1].

    Molecular weight <= 500 Da (down to 0 at 700), H-bond donors <= 5 (at 10),
    H-bond acceptors (N + O count) <= 10 (at 15), rotatable bonds <= 10 (at 15).
    """
    mw = molecular_weight(mol)
    donors = sum(
        mol.total_h(i) for i, a in enumerate(mol.atoms) if a.element in ("N", "O")
    )
    acceptors = sum(1 for a in mol.atoms if a.element in ("N", "O"))
    bridges = _bridges(mol)
    rotatable = sum(
        1
        for bond in mol.bonds
        if bond.order == 1.0
        and (bond.a, bond.b) in bridges
        and mol.degree(bond.a) >= 2
        and mol.degree(bond.b) >= 2
    )
    scores = (
        _ramp(mw, 500.0, 700.0),
        _ramp(donors, 5.0, 10.0),
        _ramp(acceptors, 10.0, 15.0),
        _ramp(rotatable, 10.0, 15.0),
    )
    return sum(scores) / 4.0


class ActivityClass(enum.IntEnum):
    """Binding-activity bands; the integer value is the class rank."""

    INACTIVE = 0
    INTERMEDIATE = 1
    ACTIVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()


def activity_class(p_activity: float) -> ActivityClass:
    """< 5 inactive, 5..7 intermediate (inclusive), > 7 active."""
    if math.isnan(p_activity):
        raise ValueError("activity value is NaN")
    if p_activity < 5.0:
        return ActivityClass.INACTIVE
    if p_activity <= 7.0:
        return ActivityClass.INTERMEDIATE
    return ActivityClass.ACTIVE


# -- heuristic distances -----------------------------------------------


@dataclass(frozen=True)
class CompoundProfile:
    """Precomputed per-compound properties used by edge heuristics."""

    smiles: str
    fingerprint: Fingerprint
    sa: float
    drug_likeness: float
    mw: float
    activity: float | None = None


def profile_from_mol(
    mol: MolGraph,
    frag_table: FragmentTable,
    smiles: str,
    activity: float | None = None,
    nbits: int = 2048,
    max_path: int = 7,
) -> CompoundProfile:
    return CompoundProfile(
        smiles=smiles,
        fingerprint=fingerprint(mol, nbits, max_path),
        sa=sa_score(mol, frag_table),
        drug_likeness=drug_likeness(mol),
        mw=molecular_weight(mol),
        activity=activity,
    )


@dataclass(frozen=True)
class HeuristicVector:
    """Per-pair heuristic distances, every component in [0, 1].

    ``activity_missing`` flags the zero-by-convention activity distance when
    either compound lacks an activity value; ``profile_missing`` flags a fully
    zeroed vector used when one side has no computable profile at all.
    """

    fingerprint_dist: float
    sa_dist: float
    druglike_dist: float
    activity_dist: float
    activity_missing: bool = False
    profile_missing: bool = False

    def components(self) -> tuple[float, float, float, float]:
        return (self.fingerprint_dist, self.sa_dist, self.druglike_dist, self.activity_dist)


MISSING_HEURISTICS = HeuristicVector(0.0, 0.0, 0.0, 0.0, True, True)


def heuristic_distance(a: CompoundProfile, b: CompoundProfile) -> HeuristicVector:
    """Componentwise heuristic distance between two compound profiles."""
    fp = 1.0 - tanimoto(a.fingerprint, b.fingerprint)
    sa = abs(a.sa - b.sa) / 9.0
    dl = abs(a.drug_likeness - b.drug_likeness)
    if a.activity is None or b.activity is None:
        act, missing = 0.0, True
    else:
        act = abs(int(activity_class(a.activity)) - int(activity_class(b.activity))) / 2.0
        missing = False
    return HeuristicVector(fp, sa, dl, act, missing)
