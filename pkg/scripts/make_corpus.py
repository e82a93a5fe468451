"""Regenerate the bundled desk-scale corpus (src/moltraverse/data/corpus.csv).

Builds ~520 synthetic drug-like SMILES by combining scaffolds and substituent
fragments, keeps only strings our own validator accepts, and assigns
structure-derived labels plus seeded activity values. Deterministic: running
it twice produces the identical file.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from moltraverse.grammar import load_default_grammar
from moltraverse.molecule import validate_smiles

OUT = Path(__file__).resolve().parents[1] / "src" / "moltraverse" / "data" / "corpus.csv"

TARGET = 520
SEED = 20240517

# Prefix fragments end with an atom that bonds to what follows.
PREFIXES = [
    "", "C", "CC", "CCC", "CCCC", "CC(C)", "CCO", "CCN", "CO", "CN", "CS",
    "OC", "NC", "OCC", "NCC", "C(=O)", "CC(=O)", "CC(=O)O", "FC(F)(F)",
    "ClC", "BrC", "C=C", "CC=C", "N(C)C", "OC(C)", "CC(O)", "CC(N)",
]

# Suffix fragments appear inside a branch or at a chain end.
SUFFIXES = [
    "C", "CC", "CCC", "O", "OC", "OCC", "N", "NC", "N(C)C", "S", "SC",
    "F", "Cl", "Br", "C(=O)O", "C(=O)OC", "C(=O)N", "C(=O)NC", "C#N",
    "C=C", "CO", "CN", "C(C)C", "C(F)(F)F", "[N+](C)(C)C", "C[O-]",
]

AROMATIC_N_CORES = [  # aromatic rings with nitrogen -> LUNG CANCER
    "c1ccncc1", "c1ccnc({s})c1", "c1cncnc1", "c1cc({s})ncc1", "c1ncncc1",
]
AROMATIC_CORES = [  # plain carboaromatic rings -> DIABETES
    "c1ccccc1", "c1ccc({s})cc1", "c1cc({s})ccc1", "c1ccc({s})c(C)c1",
]
ALIPHATIC_CORES = [  # saturated cores -> HYPERTENSION
    "C1CCCCC1", "C1CCC({s})CC1", "C1CCCC1", "C1CCOC1", "N1CCCC1",
    "C1CCNC1", "C1CCOCC1", "CCCCCC", "CC(C)CC({s})C",
]


def assemble(rng: np.random.Generator) -> str:
    kind = rng.integers(0, 10)
    if kind < 4:
        core = AROMATIC_CORES[rng.integers(0, len(AROMATIC_CORES))]
    elif kind < 7:
        core = AROMATIC_N_CORES[rng.integers(0, len(AROMATIC_N_CORES))]
    else:
        core = ALIPHATIC_CORES[rng.integers(0, len(ALIPHATIC_CORES))]
    prefix = PREFIXES[rng.integers(0, len(PREFIXES))]
    if "{s}" in core:
        core = core.format(s=SUFFIXES[rng.integers(0, len(SUFFIXES))])
    smiles = prefix + core
    if rng.random() < 0.3:  # occasional second component or tail
        tail = SUFFIXES[rng.integers(0, len(SUFFIXES))]
        smiles = f"{smiles}({tail})" if rng.random() < 0.5 else f"{smiles}{tail}"
    return smiles


def classify(smiles: str) -> str:
    bare = _outside_brackets(smiles)
    if "n" in bare:
        return "LUNG CANCER"
    if "c" in bare:
        return "DIABETES"
    return "HYPERTENSION"


def _outside_brackets(smiles: str) -> str:
    out, depth = [], 0
    for ch in smiles:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def main() -> None:
    grammar = load_default_grammar()
    rng = np.random.default_rng(SEED)
    rows: list[tuple[str, str, str, str]] = []
    seen: set[str] = set()
    attempts = 0
    while len(rows) < TARGET and attempts < 50000:
        attempts += 1
        smiles = assemble(rng)
        if smiles in seen:
            continue
        if not validate_smiles(smiles, grammar).valid:
            continue
        seen.add(smiles)
        label = classify(smiles)
        base = 3.0 + 2.0 * ("n" in _outside_brackets(smiles)) + 1.5 * ("O" in smiles)
        activity = min(9.8, max(1.0, base + 2.0 * rng.random()))
        act_text = "" if rng.random() < 0.08 else f"{activity:.2f}"
        rows.append((f"M{len(rows):04d}", smiles, label, act_text))
    print(f"kept {len(rows)} of {attempts} attempts")
    labels = {}
    for _, _, label, _ in rows:
        labels[label] = labels.get(label, 0) + 1
    print("labels:", labels)
    lines = ["id,smiles,label,activity"]
    lines += [",".join(row) for row in rows]
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
