"""Dataset loading and binary persistence.

Three versioned file formats live here:

* latent index   -- magic ``LIDX0001``, little-endian u32 dim and count, a
  float32 coordinate block, then one metadata line per record
  (``id,smiles,label,activity``).
* fragment table -- magic ``FRAGTBL1``, little-endian u64 entry count, then
  (u64 hash, u64 count) pairs sorted by hash.
* decoder weights -- magic ``DECW0001``, little-endian u32 dims
  (latent_dim, t_max, n_productions, hidden), then row-major little-endian
  float32 blocks W1, b1, W2, b2.

Index coordinates are quantized to float32 at build time, so every round
trip is bit-exact.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grammar import Grammar
from .kdtree import KdTree
from .latent import GrammarLogitDecoder
from .molecule import MoleculeError, build_fragment_table, FragmentTable, profile_from_mol, to_molgraph, validate
from .traversal import IndexRecord, LatentIndex


class FormatError(Exception):
    """Bad magic, version, or truncated binary file."""


@dataclass(frozen=True)
class CompoundRecord:
    id: str
    smiles: str
    label: str | None = None
    activity: float | None = None


@dataclass(frozen=True)
class RowIssue:
    row: int  # 1-based data row number (header excluded)
    reason: str


@dataclass
class LoadResult:
    records: list[CompoundRecord]
    rejected: list[RowIssue]
    deduplicated: list[RowIssue]


EXPECTED_HEADER = ["id", "smiles", "label", "activity"]


def load_dataset(path: str | Path, grammar: Grammar) -> LoadResult:
    """Load and validate a compound CSV (header ``id,smiles,label,activity``).

    Every row is parsed and structurally validated; bad rows are rejected
    with their row number, duplicate SMILES keep the first occurrence, and
    duplicate ids are rejected.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty dataset file") from None
        if [h.strip() for h in header] != EXPECTED_HEADER:
            raise FormatError(
                f"{path}: expected header {','.join(EXPECTED_HEADER)!r}, got {','.join(header)!r}"
            )
        records: list[CompoundRecord] = []
        rejected: list[RowIssue] = []
        deduplicated: list[RowIssue] = []
        seen_smiles: dict[str, int] = {}
        seen_ids: set[str] = set()
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 4:
                rejected.append(RowIssue(row_no, f"expected 4 fields, got {len(row)}"))
                continue
            rec_id, smiles, label, activity_text = (f.strip() for f in row)
            if not rec_id or not smiles:
                rejected.append(RowIssue(row_no, "id and smiles must be non-empty"))
                continue
            if rec_id in seen_ids:
                rejected.append(RowIssue(row_no, f"duplicate id {rec_id!r}"))
                continue
            activity: float | None = None
            if activity_text:
                try:
                    activity = float(activity_text)
                except ValueError:
                    rejected.append(RowIssue(row_no, f"bad activity value {activity_text!r}"))
                    continue
            try:
                mol = to_molgraph(smiles, grammar)
                report = validate(mol)
                if not report.valid:
                    raise MoleculeError("; ".join(report.reasons))
            except Exception as exc:
                rejected.append(RowIssue(row_no, str(exc)))
                continue
            if smiles in seen_smiles:
                deduplicated.append(
                    RowIssue(row_no, f"duplicate smiles of row {seen_smiles[smiles]}")
                )
                continue
            seen_smiles[smiles] = row_no
            seen_ids.add(rec_id)
            records.append(CompoundRecord(rec_id, smiles, label or None, activity))
    return LoadResult(records, rejected, deduplicated)


# -- latent index -------------------------------------------------------


_LIDX_MAGIC = b"LIDX0001"


def save_index(index: LatentIndex, path: str | Path) -> None:
    path = Path(path)
    coords = np.ascontiguousarray(index.points, dtype="<f4")
    lines = []
    for rec in index.records:
        activity = repr(rec.activity) if rec.activity is not None else ""
        lines.append(f"{rec.id},{rec.smiles},{rec.label or ''},{activity}")
    meta = ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(_LIDX_MAGIC)
        fh.write(struct.pack("<II", index.dim, index.size))
        fh.write(coords.tobytes())
        fh.write(meta)


def load_index(path: str | Path, grammar: Grammar) -> LatentIndex:
    """Reload an index: coordinates bit-exactly from the file, profiles and
    the fragment table rebuilt deterministically from the stored SMILES."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != _LIDX_MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}, expected {_LIDX_MAGIC!r}")
    if len(blob) < 16:
        raise FormatError(f"{path}: truncated header")
    dim, count = struct.unpack("<II", blob[8:16])
    coord_bytes = dim * count * 4
    if len(blob) < 16 + coord_bytes:
        raise FormatError(f"{path}: truncated coordinate block")
    coords = np.frombuffer(blob[16:16 + coord_bytes], dtype="<f4").astype(np.float64)
    points = coords.reshape(count, dim) if count else np.zeros((0, dim))
    meta = blob[16 + coord_bytes:].decode("utf-8")
    rows = [line for line in meta.splitlines() if line]
    if len(rows) != count:
        raise FormatError(f"{path}: expected {count} metadata rows, found {len(rows)}")

    mols = []
    parsed: list[tuple[str, str, str | None, float | None]] = []
    for line in rows:
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"{path}: bad metadata row {line!r}")
        rec_id, smiles, label, activity_text = parts
        activity = float(activity_text) if activity_text else None
        parsed.append((rec_id, smiles, label or None, activity))
        mols.append(to_molgraph(smiles, grammar))

    records: list[IndexRecord] = []
    if mols:
        frag_table = build_fragment_table(mols)
        for (rec_id, smiles, label, activity), mol in zip(parsed, mols):
            profile = profile_from_mol(mol, frag_table, smiles, activity)
            records.append(IndexRecord(rec_id, smiles, label, activity, profile))
    else:
        frag_table = FragmentTable({}, 0)
    return LatentIndex(points, records, KdTree(points), frag_table, grammar)


# -- fragment table -------------------------------------------------------


_FRAG_MAGIC = b"FRAGTBL1"


def save_fragment_table(table: FragmentTable, path: str | Path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_FRAG_MAGIC)
        fh.write(struct.pack("<Q", len(table.counts)))
        for env_hash in sorted(table.counts):
            fh.write(struct.pack("<QQ", env_hash, table.counts[env_hash]))


def load_fragment_table(path: str | Path) -> FragmentTable:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != _FRAG_MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}, expected {_FRAG_MAGIC!r}")
    if len(blob) < 16:
        raise FormatError(f"{path}: truncated header")
    (count,) = struct.unpack("<Q", blob[8:16])
    need = 16 + count * 16
    if len(blob) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(blob)}")
    counts: dict[int, int] = {}
    for i in range(count):
        off = 16 + i * 16
        env_hash, n = struct.unpack("<QQ", blob[off:off + 16])
        counts[env_hash] = n
    return FragmentTable(counts, sum(counts.values()))


# -- decoder weights --------------------------------------------------------


_DECW_MAGIC = b"DECW0001"


def save_decoder_weights(decoder: GrammarLogitDecoder, path: str | Path) -> None:
    w1, b1, w2, b2 = decoder.params32
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_DECW_MAGIC)
        fh.write(
            struct.pack(
                "<IIII",
                decoder.latent_dim,
                decoder.t_max,
                decoder.grammar.n_productions,
                decoder.hidden,
            )
        )
        for arr in (w1, b1, w2, b2):
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_decoder_weights(path: str | Path, grammar: Grammar) -> GrammarLogitDecoder:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != _DECW_MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}, expected {_DECW_MAGIC!r}")
    if len(blob) < 24:
        raise FormatError(f"{path}: truncated header")
    latent_dim, t_max, n_prod, hidden = struct.unpack("<IIII", blob[8:24])
    if n_prod != grammar.n_productions:
        raise FormatError(
            f"{path}: weights built for {n_prod} productions, grammar has {grammar.n_productions}"
        )
    out = t_max * (n_prod + 1)
    sizes = [hidden * latent_dim, hidden, out * hidden, out]
    need = 24 + 4 * sum(sizes)
    if len(blob) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(blob)}")
    arrays = []
    off = 24
    for size in sizes:
        arrays.append(np.frombuffer(blob[off:off + size * 4], dtype="<f4").copy())
        off += size * 4
    w1 = arrays[0].reshape(hidden, latent_dim)
    b1 = arrays[1]
    w2 = arrays[2].reshape(out, hidden)
    b2 = arrays[3]
    return GrammarLogitDecoder.from_weights(grammar, w1, b1, w2, b2, t_max)
