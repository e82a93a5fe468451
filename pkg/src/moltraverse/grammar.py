"""SMILES context-free grammar: loading, LL(1) parsing, leftmost derivations,
one-hot encodings and grammar-masked stack decoding.

The grammar is data, not code: productions come from a text file (see
``load_grammar``) and file order fixes the canonical rule ids used by every
encoding. Fixed-shape encodings carry one extra reserved "pad" column at
index ``len(productions)``; the pad column belongs to no nonterminal's mask,
so masked decoding can never select it.

Everything here is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

DEFAULT_T_MAX = 100


class GrammarError(Exception):
    """Base class for grammar loading, parsing and derivation failures."""


class GrammarFileError(GrammarError):
    """Malformed grammar file: bad syntax, unknown symbol, duplicate rule."""


class GrammarConflictError(GrammarError):
    """Grammar is not deterministically parseable with one-token lookahead."""


class SmilesParseError(GrammarError):
    """Input string is not in the grammar's language.

    ``position`` is the 1-based character offset of the first offending
    token (``len(text) + 1`` for unexpected end of input).
    """

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class DeriveError(GrammarError):
    """Rule sequence cannot be replayed as a leftmost derivation."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class SymbolRef:
    """Reference to a grammar symbol: terminal or nonterminal index."""

    terminal: bool
    index: int


@dataclass(frozen=True)
class Production:
    lhs: int
    rhs: tuple[SymbolRef, ...]  # empty tuple encodes an epsilon production

    @property
    def is_epsilon(self) -> bool:
        return not self.rhs


@dataclass(frozen=True)
class RuleSequence:
    """Ordered production ids of a leftmost derivation.

    ``complete`` is True iff replaying the ids from the start symbol empties
    the derivation stack.
    """

    rule_ids: tuple[int, ...]
    complete: bool


@dataclass(frozen=True)
class DeriveResult:
    text: str
    complete: bool


@dataclass(frozen=True)
class DecodeResult:
    """Output of grammar-masked stack decoding."""

    rules: RuleSequence
    text: str

    @property
    def complete(self) -> bool:
        return self.rules.complete


class Grammar:
    """Immutable CFG with an LL(1) parse table and per-nonterminal masks.

    Constructing a Grammar validates the production set: every right-hand
    symbol must be registered, every nonterminal reachable from the start
    symbol must have at least one production, and the parse table must be
    conflict-free (rejecting grammars that cannot be parsed deterministically
    with one token of lookahead).
    """

    def __init__(
        self,
        nonterminals: Sequence[str],
        terminals: Sequence[str],
        productions: Sequence[Production],
    ):
        if not productions:
            raise GrammarFileError("grammar has no productions")
        self.nonterminals = tuple(nonterminals)
        self.terminals = tuple(terminals)
        self.productions = tuple(productions)
        self.start_symbol = self.productions[0].lhs

        n_nts = len(self.nonterminals)
        n_terms = len(self.terminals)
        for pid, prod in enumerate(self.productions):
            if not 0 <= prod.lhs < n_nts:
                raise GrammarFileError(f"production {pid}: bad lhs index {prod.lhs}")
            for sym in prod.rhs:
                limit = n_terms if sym.terminal else n_nts
                if not 0 <= sym.index < limit:
                    raise GrammarFileError(f"production {pid}: bad symbol index {sym.index}")

        self._by_lhs: list[list[int]] = [[] for _ in range(n_nts)]
        for pid, prod in enumerate(self.productions):
            self._by_lhs[prod.lhs].append(pid)

        self._check_reachable_productive()

        # Boolean masks over the padded production axis, one row per nonterminal.
        width = self.encoding_width
        self._masks = np.zeros((n_nts, width), dtype=bool)
        for nt, pids in enumerate(self._by_lhs):
            self._masks[nt, pids] = True
        self._masks.setflags(write=False)
        self._prods_of_nt = [np.array(pids, dtype=np.int64) for pids in self._by_lhs]

        self._table = self._build_ll1_table()
        # Maximal-munch tokenizer: candidate terminals per first character,
        # longest spelling first.
        munch: dict[str, list[int]] = {}
        for tid, tok in enumerate(self.terminals):
            if not tok:
                raise GrammarFileError("empty terminal token")
            munch.setdefault(tok[0], []).append(tid)
        for cands in munch.values():
            cands.sort(key=lambda tid: (-len(self.terminals[tid]), tid))
        self._munch = munch
        self._terminal_index = {tok: tid for tid, tok in enumerate(self.terminals)}

    # -- basic shape ---------------------------------------------------

    @property
    def n_productions(self) -> int:
        return len(self.productions)

    @property
    def pad_index(self) -> int:
        """Column index of the reserved no-op pad in fixed-shape encodings."""
        return len(self.productions)

    @property
    def encoding_width(self) -> int:
        return len(self.productions) + 1

    def nonterminal_index(self, name: str) -> int:
        try:
            return self.nonterminals.index(name)
        except ValueError:
            raise KeyError(f"unknown nonterminal {name!r}") from None

    def productions_for(self, nt: int) -> tuple[int, ...]:
        return tuple(self._by_lhs[nt])

    # -- construction checks -------------------------------------------

    def _check_reachable_productive(self) -> None:
        seen = {self.start_symbol}
        frontier = [self.start_symbol]
        while frontier:
            nt = frontier.pop()
            if not self._by_lhs[nt]:
                raise GrammarFileError(
                    f"nonterminal {self.nonterminals[nt]!r} is reachable but has no productions"
                )
            for pid in self._by_lhs[nt]:
                for sym in self.productions[pid].rhs:
                    if not sym.terminal and sym.index not in seen:
                        seen.add(sym.index)
                        frontier.append(sym.index)

    def _build_ll1_table(self) -> np.ndarray:
        n_nts = len(self.nonterminals)
        n_terms = len(self.terminals)
        end_col = n_terms  # lookahead column for end of input

        nullable = [False] * n_nts
        first: list[set[int]] = [set() for _ in range(n_nts)]
        changed = True
        while changed:
            changed = False
            for prod in self.productions:
                if not nullable[prod.lhs] and all(
                    (not s.terminal) and nullable[s.index] for s in prod.rhs
                ):
                    nullable[prod.lhs] = True
                    changed = True
                acc = first[prod.lhs]
                before = len(acc)
                for s in prod.rhs:
                    if s.terminal:
                        acc.add(s.index)
                        break
                    acc |= first[s.index]
                    if not nullable[s.index]:
                        break
                if len(acc) != before:
                    changed = True

        follow: list[set[int]] = [set() for _ in range(n_nts)]
        follow[self.start_symbol].add(end_col)
        changed = True
        while changed:
            changed = False
            for prod in self.productions:
                trailer: set[int] = set(follow[prod.lhs])
                trailer_is_follow = True
                for s in reversed(prod.rhs):
                    if s.terminal:
                        trailer = {s.index}
                        trailer_is_follow = False
                        continue
                    before = len(follow[s.index])
                    follow[s.index] |= trailer
                    if len(follow[s.index]) != before:
                        changed = True
                    if nullable[s.index]:
                        if not trailer_is_follow:
                            trailer = set(trailer)
                        trailer |= first[s.index]
                    else:
                        trailer = set(first[s.index])
                        trailer_is_follow = False

        table = np.full((n_nts, n_terms + 1), -1, dtype=np.int64)

        def set_cell(nt: int, col: int, pid: int) -> None:
            prev = table[nt, col]
            if prev >= 0 and prev != pid:
                tok = "end of input" if col == end_col else repr(self.terminals[col])
                raise GrammarConflictError(
                    "grammar is not deterministically parseable with one-token "
                    f"lookahead: nonterminal {self.nonterminals[nt]!r} on {tok} "
                    f"admits productions {prev} and {pid}"
                )
            table[nt, col] = pid

        for pid, prod in enumerate(self.productions):
            rhs_first: set[int] = set()
            rhs_nullable = True
            for s in prod.rhs:
                if s.terminal:
                    rhs_first.add(s.index)
                    rhs_nullable = False
                    break
                rhs_first |= first[s.index]
                if not nullable[s.index]:
                    rhs_nullable = False
                    break
            for col in rhs_first:
                set_cell(prod.lhs, col, pid)
            if rhs_nullable:
                for col in follow[prod.lhs]:
                    set_cell(prod.lhs, col, pid)
        table.setflags(write=False)
        return table

    # -- tokenizing ----------------------------------------------------

    def tokenize(self, text: str) -> list[tuple[int, int]]:
        """Maximal-munch tokenization into ``(1-based position, terminal id)``."""
        out: list[tuple[int, int]] = []
        i = 0
        n = len(text)
        while i < n:
            cands = self._munch.get(text[i])
            hit = -1
            if cands is not None:
                for tid in cands:
                    tok = self.terminals[tid]
                    if text.startswith(tok, i):
                        hit = tid
                        break
            if hit < 0:
                raise SmilesParseError(
                    f"no terminal of the grammar matches input at position {i + 1}",
                    i + 1,
                )
            out.append((i + 1, hit))
            i += len(self.terminals[hit])
        return out


def _strip_comment(line: str) -> str:
    # '#' starts a comment only outside quoted terminals.
    in_quote = False
    for i, ch in enumerate(line):
        if ch == "'":
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def load_grammar(text: str) -> Grammar:
    """Parse a grammar file (see the bundled ``smiles.grammar`` for the format).

    Line order is canonical: the i-th production in the file gets rule id i,
    and the first production's left-hand side is the start symbol.
    """
    raw_rules: list[tuple[int, str, list[str]]] = []  # (line_no, lhs, rhs tokens)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        head, sep, tail = line.partition("->")
        if not sep:
            raise GrammarFileError(f"line {line_no}: expected 'Lhs -> symbols'")
        lhs = head.strip()
        if not lhs or "'" in lhs or " " in lhs:
            raise GrammarFileError(f"line {line_no}: bad left-hand side {lhs!r}")
        rhs_tokens = tail.split()
        if not rhs_tokens:
            raise GrammarFileError(f"line {line_no}: empty right-hand side (use EPS)")
        raw_rules.append((line_no, lhs, rhs_tokens))
    if not raw_rules:
        raise GrammarFileError("grammar file contains no productions")

    nonterminals: list[str] = []
    nt_index: dict[str, int] = {}
    for _, lhs, _ in raw_rules:
        if lhs not in nt_index:
            nt_index[lhs] = len(nonterminals)
            nonterminals.append(lhs)

    terminals: list[str] = []
    term_index: dict[str, int] = {}
    productions: list[Production] = []
    seen_rules: set[tuple[int, tuple[SymbolRef, ...]]] = set()
    for line_no, lhs, rhs_tokens in raw_rules:
        rhs: list[SymbolRef] = []
        if rhs_tokens == ["EPS"]:
            pass
        else:
            for tok in rhs_tokens:
                if tok == "EPS":
                    raise GrammarFileError(
                        f"line {line_no}: EPS must be the only right-hand symbol"
                    )
                if tok.startswith("'"):
                    if len(tok) < 3 or not tok.endswith("'"):
                        raise GrammarFileError(f"line {line_no}: bad terminal {tok}")
                    lit = tok[1:-1]
                    if lit not in term_index:
                        term_index[lit] = len(terminals)
                        terminals.append(lit)
                    rhs.append(SymbolRef(True, term_index[lit]))
                else:
                    if tok not in nt_index:
                        raise GrammarFileError(
                            f"line {line_no}: unknown symbol {tok!r} on right-hand side"
                        )
                    rhs.append(SymbolRef(False, nt_index[tok]))
        prod = Production(nt_index[lhs], tuple(rhs))
        key = (prod.lhs, prod.rhs)
        if key in seen_rules:
            raise GrammarFileError(f"line {line_no}: duplicate production")
        seen_rules.add(key)
        productions.append(prod)

    return Grammar(nonterminals, terminals, productions)


@lru_cache(maxsize=1)
def load_default_grammar() -> Grammar:
    """Load the bundled SMILES grammar (cached; Grammar is immutable)."""
    text = resources.files("moltraverse.data").joinpath("smiles.grammar").read_text("utf-8")
    return load_grammar(text)


def parse(smiles: str, grammar: Grammar) -> RuleSequence:
    """Parse a string into the rule ids of its leftmost derivation.

    Raises :class:`SmilesParseError` carrying the 1-based position of the
    first offending token when the string is not in the grammar's language.
    """
    tokens = grammar.tokenize(smiles)
    end_col = len(grammar.terminals)
    end_pos = len(smiles) + 1
    stack: list[SymbolRef] = [SymbolRef(False, grammar.start_symbol)]
    rules: list[int] = []
    ti = 0
    while stack:
        sym = stack.pop()
        if sym.terminal:
            if ti >= len(tokens):
                raise SmilesParseError(
                    f"unexpected end of input, expected {grammar.terminals[sym.index]!r}",
                    end_pos,
                )
            pos, tid = tokens[ti]
            if tid != sym.index:
                raise SmilesParseError(
                    f"expected {grammar.terminals[sym.index]!r} but found "
                    f"{grammar.terminals[tid]!r} at position {pos}",
                    pos,
                )
            ti += 1
        else:
            if ti < len(tokens):
                pos, look = tokens[ti]
            else:
                pos, look = end_pos, end_col
            pid = int(grammar._table[sym.index, look])
            if pid < 0:
                found = "end of input" if look == end_col else repr(grammar.terminals[look])
                raise SmilesParseError(
                    f"unexpected {found} at position {pos} while deriving "
                    f"{grammar.nonterminals[sym.index]!r}",
                    pos,
                )
            rules.append(pid)
            stack.extend(reversed(grammar.productions[pid].rhs))
    if ti != len(tokens):
        pos = tokens[ti][0]
        raise SmilesParseError(f"trailing input at position {pos}", pos)
    return RuleSequence(tuple(rules), True)


def derive(rules: RuleSequence | Iterable[int], grammar: Grammar) -> DeriveResult:
    """Replay rule ids as a leftmost derivation and concatenate terminals.

    An exhausted rule list with nonterminals still pending yields the text
    determined so far with ``complete=False``. A rule whose left-hand side
    does not match the stack top raises :class:`DeriveError` with the step.
    """
    rule_ids = rules.rule_ids if isinstance(rules, RuleSequence) else tuple(rules)
    out: list[str] = []
    stack: list[SymbolRef] = [SymbolRef(False, grammar.start_symbol)]
    for step, pid in enumerate(rule_ids):
        if not 0 <= pid < grammar.n_productions:
            raise DeriveError(f"step {step}: rule id {pid} out of range", step)
        while stack and stack[-1].terminal:
            out.append(grammar.terminals[stack.pop().index])
        if not stack:
            raise DeriveError(f"step {step}: derivation already complete", step)
        top = stack.pop()
        prod = grammar.productions[pid]
        if prod.lhs != top.index:
            raise DeriveError(
                f"step {step}: production {pid} expands "
                f"{grammar.nonterminals[prod.lhs]!r} but stack top is "
                f"{grammar.nonterminals[top.index]!r}",
                step,
            )
        stack.extend(reversed(prod.rhs))
    while stack and stack[-1].terminal:
        out.append(grammar.terminals[stack.pop().index])
    return DeriveResult("".join(out), complete=not stack)


def encode_onehot_rules(
    rules: RuleSequence | Iterable[int], grammar: Grammar, t_max: int = DEFAULT_T_MAX
) -> np.ndarray:
    """One-hot encode a rule sequence into a ``t_max x (n_productions + 1)``
    matrix; rows beyond the sequence select the pad column."""
    rule_ids = rules.rule_ids if isinstance(rules, RuleSequence) else tuple(rules)
    if len(rule_ids) > t_max:
        raise ValueError(f"rule sequence of length {len(rule_ids)} exceeds t_max={t_max}")
    mat = np.zeros((t_max, grammar.encoding_width), dtype=np.float64)
    for t, pid in enumerate(rule_ids):
        if not 0 <= pid < grammar.n_productions:
            raise ValueError(f"rule id {pid} out of range at step {t}")
        mat[t, pid] = 1.0
    mat[len(rule_ids):, grammar.pad_index] = 1.0
    return mat


def encode_onehot_chars(smiles: str, alphabet: Sequence[str], t_max: int) -> np.ndarray:
    """Per-character one-hot encoding; the last alphabet entry is the pad."""
    if len(alphabet) < 2:
        raise ValueError("alphabet needs at least one character plus a pad symbol")
    if len(smiles) > t_max:
        raise ValueError(f"input of length {len(smiles)} exceeds t_max={t_max}")
    index = {ch: i for i, ch in enumerate(alphabet)}
    mat = np.zeros((t_max, len(alphabet)), dtype=np.float64)
    for t, ch in enumerate(smiles):
        if ch not in index:
            raise ValueError(f"unknown character {ch!r} at position {t + 1}")
        mat[t, index[ch]] = 1.0
    mat[len(smiles):, len(alphabet) - 1] = 1.0
    return mat


def valid_mask(stack_top: int, grammar: Grammar) -> np.ndarray:
    """Boolean mask over the padded production axis selecting the productions
    whose left-hand side is ``stack_top``."""
    if not 0 <= stack_top < len(grammar.nonterminals):
        raise ValueError(f"nonterminal index {stack_top} out of range")
    mask = grammar._masks[stack_top]
    if not mask.any():
        raise GrammarError(
            f"nonterminal {grammar.nonterminals[stack_top]!r} has no productions"
        )
    return mask.copy()


def stack_decode(logits: np.ndarray, grammar: Grammar) -> DecodeResult:
    """Deterministic grammar-masked decode of a continuous score matrix.

    Starting from ``[start_symbol]``, each step pops the top nonterminal,
    applies the argmax over that row's masked scores (ties and all-non-finite
    rows resolve to the lowest production index) and pushes the right-hand
    nonterminals in reverse. Decoding stops when the stack empties or rows
    run out; the latter yields ``complete=False``. Complete output always
    re-parses under the same grammar.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != grammar.encoding_width:
        raise ValueError(
            f"logits must have shape (t_max, {grammar.encoding_width}), got {logits.shape}"
        )
    stack: list[int] = [grammar.start_symbol]
    rules: list[int] = []
    for t in range(logits.shape[0]):
        if not stack:
            break
        nt = stack.pop()
        cand = grammar._prods_of_nt[nt]
        if cand.size == 0:
            raise GrammarError(
                f"nonterminal {grammar.nonterminals[nt]!r} has no productions"
            )
        row = logits[t, cand]
        row = np.where(np.isfinite(row), row, -np.inf)
        pid = int(cand[int(np.argmax(row))])
        rules.append(pid)
        for sym in reversed(grammar.productions[pid].rhs):
            if not sym.terminal:
                stack.append(sym.index)
    replayed = derive(rules, grammar)
    return DecodeResult(RuleSequence(tuple(rules), replayed.complete), replayed.text)


def check_ring_pairing(smiles: str) -> tuple[bool, list[int]]:
    """Check that every ring-closure digit opens and closes in pairs.

    Digits inside bracket atoms are ignored (they are isotopes, H counts or
    charges). ``%nn`` two-digit labels are handled; after a label closes its
    number may be reused. Returns ``(ok, unpaired labels in opening order)``.
    """
    open_at: dict[int, int] = {}
    depth = 0
    i = 0
    n = len(smiles)

    def toggle(label: int, pos: int) -> None:
        if label in open_at:
            del open_at[label]
        else:
            open_at[label] = pos

    while i < n:
        ch = smiles[i]
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth = max(0, depth - 1)
        elif depth == 0:
            if ch == "%":
                j = i + 1
                digits = ""
                while j < n and smiles[j].isdigit() and len(digits) < 2:
                    digits += smiles[j]
                    j += 1
                if digits:
                    toggle(int(digits), i)
                i = j
                continue
            if ch.isdigit():
                toggle(int(ch), i)
        i += 1
    unpaired = [label for label, _ in sorted(open_at.items(), key=lambda kv: kv[1])]
    return (not unpaired, unpaired)
