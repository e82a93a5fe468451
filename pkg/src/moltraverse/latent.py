"""Latent-space encoders, decoders and Jacobian machinery.

Trained models are out of scope here: the decoders are deterministic seeded
stand-ins behind a small interface, so a trained model can later plug in by
implementing ``decode_vector`` / ``decode_logits``. Edge costs pull the
latent metric back through the decoder: the weight of a step from z_i to z_j
is the norm of the decoder Jacobian at the midpoint applied to the step,
``|| J((z_i+z_j)/2) (z_j - z_i) ||``.

Decoders that expose an analytic Jacobian-vector product are used directly;
otherwise central finite differences do the work (and verify the analytic
route in tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import molecule
from .grammar import DEFAULT_T_MAX, Grammar, RuleSequence, stack_decode

DEFAULT_LATENT_DIM = 56
DEFAULT_HIDDEN = 256
DEFAULT_DECODER_SEED = 3
DEFAULT_ENCODER_SEED = 0


@dataclass(frozen=True)
class DecoderOutput:
    """Decoded point: continuous scores plus the deterministic decode."""

    logits: np.ndarray
    rules: RuleSequence
    text: str
    complete: bool
    valid: bool
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class JacobianTerm:
    """Pull-back length of a latent step; symmetric in its endpoints."""

    value: float
    step: float
    method: str


def _as_vector(z: np.ndarray, dim: int) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (dim,):
        raise ValueError(f"latent point must have shape ({dim},), got {z.shape}")
    return z


def _min_completion_lengths(grammar: Grammar) -> list[int]:
    """Per production, the shortest terminal string its right-hand side derives."""
    inf = 10**9
    nt_min = [inf] * len(grammar.nonterminals)
    changed = True
    while changed:
        changed = False
        for prod in grammar.productions:
            total = 0
            for sym in prod.rhs:
                total += 1 if sym.terminal else nt_min[sym.index]
                if total >= inf:
                    total = inf
                    break
            if total < nt_min[prod.lhs]:
                nt_min[prod.lhs] = total
                changed = True
    out = []
    for prod in grammar.productions:
        total = 0
        for sym in prod.rhs:
            total += 1 if sym.terminal else min(nt_min[sym.index], inf)
        out.append(min(total, inf))
    return out


class SyntheticTanhDecoder:
    """f(z) = A tanh(B z): smooth nonlinear decoder with a closed-form Jacobian.

    Serves as the verification oracle for finite-difference Jacobians;
    J(z) = A diag(1 - tanh^2(Bz)) B, so J(0) = A B exactly.
    """

    def __init__(self, latent_dim: int, output_shape: tuple[int, int] = (8, 5), seed: int = 0):
        rng = np.random.default_rng(seed)
        out = int(np.prod(output_shape))
        self.latent_dim = latent_dim
        self.output_shape = output_shape
        self.A = rng.standard_normal((out, latent_dim)) / math.sqrt(latent_dim)
        self.B = rng.standard_normal((latent_dim, latent_dim)) / math.sqrt(latent_dim)

    def decode_vector(self, z: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        return self.A @ np.tanh(self.B @ z)

    def decode_logits(self, z: np.ndarray) -> np.ndarray:
        return self.decode_vector(z).reshape(self.output_shape)

    def analytic_jacobian(self, z: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        t = np.tanh(self.B @ z)
        return (self.A * (1.0 - t * t)) @ self.B

    def jvp(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        v = _as_vector(v, self.latent_dim)
        t = np.tanh(self.B @ z)
        return self.A @ ((1.0 - t * t) * (self.B @ v))


class LinearDecoder:
    """f(z) = M z; central differences recover M exactly up to roundoff."""

    def __init__(self, matrix: np.ndarray):
        self.M = np.asarray(matrix, dtype=np.float64)
        self.latent_dim = self.M.shape[1]

    @classmethod
    def identity(cls, dim: int) -> "LinearDecoder":
        return cls(np.eye(dim))

    def decode_vector(self, z: np.ndarray) -> np.ndarray:
        return self.M @ _as_vector(z, self.latent_dim)

    def analytic_jacobian(self, z: np.ndarray) -> np.ndarray:
        return self.M.copy()

    def jvp(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.M @ _as_vector(v, self.latent_dim)


class GrammarLogitDecoder:
    """Two-layer seeded map z -> tanh(W1 z + b1) -> W2 h + b2, reshaped to a
    (t_max, n_productions + 1) score matrix and stack-decoded under a grammar.

    Parameters are float32 (the persistence format) upcast once to float64;
    decoding is bit-deterministic. Weights may come from a file, so a trained
    model with the same shape drops in.
    """

    def __init__(
        self,
        grammar: Grammar,
        latent_dim: int = DEFAULT_LATENT_DIM,
        t_max: int = DEFAULT_T_MAX,
        hidden: int = DEFAULT_HIDDEN,
        seed: int = DEFAULT_DECODER_SEED,
        length_penalty: float = 0.6,
        recursion_penalty: float = 0.8,
    ):
        width = grammar.encoding_width
        out = t_max * width
        rng = np.random.default_rng(seed)
        w1 = (rng.standard_normal((hidden, latent_dim)) / math.sqrt(latent_dim)).astype(np.float32)
        b1 = (0.7 * rng.standard_normal(hidden)).astype(np.float32)
        w2 = (2.0 * rng.standard_normal((out, hidden)) / math.sqrt(hidden)).astype(np.float32)
        b2 = 0.5 * rng.standard_normal((t_max, width))
        # Structural prior baked into the seeded bias so random decodes behave
        # like a trained decoder's: productions are penalized by the minimal
        # terminal length their right-hand side must still derive (epsilon
        # pays nothing, so derivations terminate) and self-recursive
        # productions pay extra (ring-digit and branch repetition stays rare).
        # Weight files loaded via from_weights override all of this.
        b2[:, : grammar.n_productions] -= (
            length_penalty * np.array(_min_completion_lengths(grammar), dtype=np.float64)
            + recursion_penalty
            * np.array(
                [
                    any((not s.terminal) and s.index == p.lhs for s in p.rhs)
                    for p in grammar.productions
                ],
                dtype=np.float64,
            )
        )
        self._init(grammar, latent_dim, t_max, hidden, w1, b1, w2, b2.reshape(out).astype(np.float32))

    def _init(self, grammar, latent_dim, t_max, hidden, w1, b1, w2, b2) -> None:
        self.grammar = grammar
        self.latent_dim = latent_dim
        self.t_max = t_max
        self.hidden = hidden
        self.width = grammar.encoding_width
        self.params32 = (w1, b1, w2, b2)
        self.W1 = w1.astype(np.float64)
        self.b1 = b1.astype(np.float64)
        self.W2 = w2.astype(np.float64)
        self.b2 = b2.astype(np.float64)

    @classmethod
    def from_weights(
        cls,
        grammar: Grammar,
        w1: np.ndarray,
        b1: np.ndarray,
        w2: np.ndarray,
        b2: np.ndarray,
        t_max: int,
    ) -> "GrammarLogitDecoder":
        hidden, latent_dim = w1.shape
        out = t_max * grammar.encoding_width
        if w2.shape != (out, hidden) or b1.shape != (hidden,) or b2.shape != (out,):
            raise ValueError(
                f"weight shapes {w1.shape}/{b1.shape}/{w2.shape}/{b2.shape} do not "
                f"match t_max={t_max} and grammar width {grammar.encoding_width}"
            )
        obj = cls.__new__(cls)
        obj._init(
            grammar, latent_dim, t_max, hidden,
            w1.astype(np.float32), b1.astype(np.float32),
            w2.astype(np.float32), b2.astype(np.float32),
        )
        return obj

    def decode_vector(self, z: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        return self.W2 @ np.tanh(self.W1 @ z + self.b1) + self.b2

    def decode_logits(self, z: np.ndarray) -> np.ndarray:
        return self.decode_vector(z).reshape(self.t_max, self.width)

    def jvp(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        v = _as_vector(v, self.latent_dim)
        t = np.tanh(self.W1 @ z + self.b1)
        return self.W2 @ ((1.0 - t * t) * (self.W1 @ v))

    def decode(self, z: np.ndarray) -> DecoderOutput:
        logits = self.decode_logits(z)
        result = stack_decode(logits, self.grammar)
        if result.complete:
            report = molecule.validate_smiles(result.text, self.grammar)
            valid, reasons = report.valid, report.reasons
        else:
            valid, reasons = False, ("incomplete decode",)
        return DecoderOutput(logits, result.rules, result.text, result.complete, valid, reasons)


class CoordinateEchoDecoder:
    """Grammar decoder whose scores embed the latent point itself.

    Its Jacobian is the identity padded with zero rows, so pull-back edge
    weights reduce to plain Euclidean distances; useful for reductions in
    tests and as the simplest valid decoder.
    """

    def __init__(self, grammar: Grammar, latent_dim: int, t_max: int = DEFAULT_T_MAX):
        self.grammar = grammar
        self.latent_dim = latent_dim
        self.t_max = t_max
        self.width = grammar.encoding_width
        if t_max * self.width < latent_dim:
            raise ValueError("output too small to embed the latent point")

    def decode_vector(self, z: np.ndarray) -> np.ndarray:
        z = _as_vector(z, self.latent_dim)
        flat = np.zeros(self.t_max * self.width)
        flat[: self.latent_dim] = z
        return flat

    def decode_logits(self, z: np.ndarray) -> np.ndarray:
        return self.decode_vector(z).reshape(self.t_max, self.width)

    def jvp(self, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        v = _as_vector(v, self.latent_dim)
        flat = np.zeros(self.t_max * self.width)
        flat[: self.latent_dim] = v
        return flat

    def decode(self, z: np.ndarray) -> DecoderOutput:
        logits = self.decode_logits(z)
        result = stack_decode(logits, self.grammar)
        if result.complete:
            report = molecule.validate_smiles(result.text, self.grammar)
            valid, reasons = report.valid, report.reasons
        else:
            valid, reasons = False, ("incomplete decode",)
        return DecoderOutput(logits, result.rules, result.text, result.complete, valid, reasons)


def jacobian_fd(decoder, z: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Full Jacobian of the flattened decoder output by central differences.

    Column i uses a per-coordinate step h * (1 + |z_i|).
    """
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    z = np.asarray(z, dtype=np.float64)
    f0 = np.asarray(decoder.decode_vector(z), dtype=np.float64)
    if not np.all(np.isfinite(f0)):
        raise ValueError("decoder output is not finite")
    jac = np.empty((f0.size, z.size), dtype=np.float64)
    for i in range(z.size):
        hi = h * (1.0 + abs(float(z[i])))
        zp = z.copy()
        zm = z.copy()
        zp[i] += hi
        zm[i] -= hi
        fp = np.asarray(decoder.decode_vector(zp), dtype=np.float64)
        fm = np.asarray(decoder.decode_vector(zm), dtype=np.float64)
        jac[:, i] = (fp - fm) / (2.0 * hi)
    if not np.all(np.isfinite(jac)):
        raise ValueError("finite-difference Jacobian is not finite")
    return jac


def jacobian_term(
    decoder,
    z_i: np.ndarray,
    z_j: np.ndarray,
    h: float = 1e-4,
    method: str = "auto",
) -> JacobianTerm:
    """Edge weight contribution || J(z_mid) (z_j - z_i) || at the midpoint.

    ``method`` is "auto" (analytic Jacobian-vector product when the decoder
    has one, else finite differences), "analytic", or "fd". Symmetric in
    (z_i, z_j) bit-exactly: the midpoint is order-free and the step only
    flips sign.
    """
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_i.shape != z_j.shape:
        raise ValueError(f"endpoint shapes differ: {z_i.shape} vs {z_j.shape}")
    mid = (z_i + z_j) / 2.0
    delta = z_j - z_i
    if method not in ("auto", "analytic", "fd"):
        raise ValueError(f"unknown jacobian method {method!r}")
    use_jvp = method in ("auto", "analytic") and hasattr(decoder, "jvp")
    if method == "analytic" and not use_jvp:
        raise ValueError("decoder has no analytic Jacobian-vector product")
    if use_jvp:
        value = float(np.linalg.norm(decoder.jvp(mid, delta)))
        return JacobianTerm(value, h, "analytic-jvp")
    jac = jacobian_fd(decoder, mid, h)
    value = float(np.linalg.norm(jac @ delta))
    return JacobianTerm(value, h, "central-fd")


class ProjectionEncoder:
    """Deterministic encoder: signed random projection of the path fingerprint.

    z = (1/sqrt(nbits)) R fp with R a seeded d x nbits matrix of +-1 entries,
    so identical fingerprints map to identical points.
    """

    def __init__(
        self,
        grammar: Grammar,
        latent_dim: int = DEFAULT_LATENT_DIM,
        seed: int = DEFAULT_ENCODER_SEED,
        nbits: int = 2048,
        max_path: int = 7,
    ):
        rng = np.random.default_rng(seed)
        self.grammar = grammar
        self.latent_dim = latent_dim
        self.seed = seed
        self.nbits = nbits
        self.max_path = max_path
        self.matrix = rng.integers(0, 2, size=(latent_dim, nbits)).astype(np.float64) * 2.0 - 1.0

    def encode_mol(self, mol: molecule.MolGraph) -> np.ndarray:
        fp = molecule.fingerprint(mol, self.nbits, self.max_path)
        return self.encode_fingerprint(fp)

    def encode_fingerprint(self, fp: molecule.Fingerprint) -> np.ndarray:
        if fp.nbits != self.nbits:
            raise ValueError(f"fingerprint has {fp.nbits} bits, encoder expects {self.nbits}")
        cols = sorted(fp.bits)
        if not cols:
            return np.zeros(self.latent_dim)
        return self.matrix[:, cols].sum(axis=1) / math.sqrt(self.nbits)

    def encode(self, smiles: str) -> np.ndarray:
        return self.encode_mol(molecule.to_molgraph(smiles, self.grammar))
