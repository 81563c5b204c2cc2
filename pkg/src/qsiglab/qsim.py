"""Pure-state simulator for n registers of equal qudit dimension d.

Conventions, fixed once and relied on everywhere:

  * register 0 is the most significant digit of the flat amplitude index
    (big-endian), so ``state.amps.reshape((d,) * n)`` puts register q on
    axis q, and ``numpy.kron(a, b)`` makes ``a`` the leading registers;
  * measurement outcome 0 is always the accepting outcome;
  * norm and fidelity checks use absolute tolerance ``TOL`` = 1e-9;
  * every stochastic operation takes an explicit ``numpy.random.Generator``
    so trials are replayable.

States are immutable values: operations return new ``PureState`` objects.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

TOL = 1e-9
# Collapse-to-identity threshold for "the state already lies in the measured
# sector": two orders tighter than TOL so honest paths return inputs unchanged.
_EXACT = 1e-12
# Default cap on simulable amplitude-vector length (configuration knob).
MAX_AMPS = 2**20


class EntangledFactorError(ValueError):
    """Raised by extract_factor when the requested registers are not a product factor."""


def new_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from a path of labels, for per-trial/per-party streams."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over n qudit registers of dimension d."""

    d: int
    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")
        if self.n < 1:
            raise ValueError(f"register count must be >= 1, got {self.n}")
        dim = self.d**self.n
        if dim > MAX_AMPS:
            raise ValueError(f"state size {dim} exceeds cap {MAX_AMPS}")
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (dim,):
            raise ValueError(f"expected {dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.d**self.n


@dataclass(frozen=True)
class GateMatrix:
    """Unitary on m registers of dimension d, as a dense d^m x d^m matrix."""

    d: int
    m: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        dim = self.d**self.m
        entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if entries.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {entries.shape}")
        if dim <= 64:
            dev = np.abs(entries.conj().T @ entries - np.eye(dim)).max()
        else:
            # large matrices: probe unitarity on fixed random vectors
            probe_rng = np.random.default_rng(0)
            probes = probe_rng.standard_normal((dim, 8)) + 1j * probe_rng.standard_normal((dim, 8))
            probes /= np.linalg.norm(probes, axis=0)
            dev = np.abs(entries.conj().T @ (entries @ probes) - probes).max()
        if dev > TOL:
            raise ValueError(f"matrix not unitary: max deviation {dev:.3e}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    def dagger(self) -> "GateMatrix":
        return GateMatrix(self.d, self.m, self.entries.conj().T)


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome label, its Born probability, and the post-measurement state."""

    outcome: int
    probability: float
    post_state: PureState


@dataclass(frozen=True)
class LabelBijection:
    """A bijection on Z_d^m given as a forward/inverse callable pair.

    Anything with ``apply``/``invert`` methods on digit tuples works where a
    bijection is expected; this is the plain-callable packaging of one.
    """

    d: int
    m: int
    forward: Callable[[tuple[int, ...]], tuple[int, ...]]
    backward: Callable[[tuple[int, ...]], tuple[int, ...]]

    def apply(self, labels: tuple[int, ...]) -> tuple[int, ...]:
        return self.forward(labels)

    def invert(self, labels: tuple[int, ...]) -> tuple[int, ...]:
        return self.backward(labels)


# ---------------------------------------------------------------------------
# construction


def make_state(d: int, n: int, amps: Sequence[complex] | np.ndarray) -> PureState:
    """Build a PureState, normalizing the given amplitude vector."""
    vec = np.asarray(amps, dtype=np.complex128).reshape(-1)
    if vec.shape != (d**n,):
        raise ValueError(f"expected {d**n} amplitudes for d={d}, n={n}, got {vec.shape[0]}")
    norm = np.linalg.norm(vec)
    if norm <= 0.0:
        raise ValueError("cannot normalize the zero vector")
    return PureState(d, n, vec / norm)


def basis_state(d: int, n: int, digits: Sequence[int]) -> PureState:
    """Computational basis state |digits[0], ..., digits[n-1]>."""
    if len(digits) != n:
        raise ValueError(f"expected {n} digits, got {len(digits)}")
    amps = np.zeros(d**n, dtype=np.complex128)
    amps[encode_labels(tuple(digits), d)] = 1.0
    return PureState(d, n, amps)


def sample_random_pure(d: int, n: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state: iid complex normal amplitudes, normalized."""
    re_im = rng.standard_normal((2, d**n))
    return make_state(d, n, re_im[0] + 1j * re_im[1])


def encode_labels(digits: tuple[int, ...], d: int) -> int:
    """Big-endian mixed-radix encoding of a digit tuple."""
    idx = 0
    for v in digits:
        idx = idx * d + int(v)
    return idx


def decode_labels(idx: int, m: int, d: int) -> tuple[int, ...]:
    out = [0] * m
    for q in range(m - 1, -1, -1):
        out[q] = idx % d
        idx //= d
    return tuple(out)


def _digit_array(d: int, n: int, q: int) -> np.ndarray:
    """Value of register q for every flat index 0..d^n-1."""
    idx = np.arange(d**n)
    return (idx // d ** (n - 1 - q)) % d


# ---------------------------------------------------------------------------
# gates


def apply_gate(state: PureState, gate: GateMatrix, targets: Sequence[int]) -> PureState:
    """Apply a unitary to the target registers, identity elsewhere."""
    targets = list(targets)
    _check_targets(state, targets)
    if gate.d != state.d:
        raise ValueError(f"gate dimension {gate.d} != state dimension {state.d}")
    if gate.m != len(targets):
        raise ValueError(f"gate arity {gate.m} != {len(targets)} targets")
    d, n, m = state.d, state.n, gate.m
    arr = state.amps.reshape((d,) * n)
    moved = np.moveaxis(arr, targets, range(m))
    flat = moved.reshape(d**m, -1)
    out = (gate.entries @ flat).reshape((d,) * n)
    out = np.moveaxis(out, range(m), targets)
    return PureState(d, n, out.reshape(-1))


def apply_classical_bijection(state: PureState, f, targets: Sequence[int]) -> PureState:
    """Move the amplitude of basis label v on the targets to label f(v).

    ``f`` must expose ``apply(labels) -> labels`` and ``invert(labels) ->
    labels`` on m-digit tuples (m = number of targets). If it additionally
    carries precomputed ``forward_table``/``inverse_table`` index arrays
    (big-endian flat encoding) those are used directly. Bijectivity is
    checked on every call; the permutation is never materialized as a
    d^m x d^m matrix.
    """
    targets = list(targets)
    _check_targets(state, targets)
    d, n, m = state.d, state.n, len(targets)
    dm = d**m
    fwd = getattr(f, "forward_table", None)
    inv = getattr(f, "inverse_table", None)
    if fwd is None or inv is None:
        fwd = np.empty(dm, dtype=np.int64)
        inv = np.empty(dm, dtype=np.int64)
        for idx in range(dm):
            labels = decode_labels(idx, m, d)
            fwd[idx] = encode_labels(f.apply(labels), d)
            inv[idx] = encode_labels(f.invert(labels), d)
    else:
        fwd = np.asarray(fwd, dtype=np.int64)
        inv = np.asarray(inv, dtype=np.int64)
    order = np.arange(dm)
    if not (np.array_equal(fwd[inv], order) and np.array_equal(inv[fwd], order)):
        raise ValueError("supplied map is not a bijection (forward/inverse mismatch)")
    arr = state.amps.reshape((d,) * n)
    moved = np.moveaxis(arr, targets, range(m))
    flat = moved.reshape(dm, -1)
    out = flat[inv]  # new label w receives the amplitude of f^{-1}(w)
    out = np.moveaxis(out.reshape((d,) * n), range(m), targets)
    return PureState(d, n, out.reshape(-1))


def _check_targets(state: PureState, targets: Sequence[int]) -> None:
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct, got {targets}")
    for q in targets:
        if not 0 <= q < state.n:
            raise ValueError(f"target {q} out of range for {state.n} registers")


# ---------------------------------------------------------------------------
# comparisons and measurements


def fidelity(a: PureState, b: PureState) -> float:
    """Squared overlap |<a|b>|^2."""
    if (a.d, a.n) != (b.d, b.n):
        raise ValueError(f"shape mismatch: ({a.d},{a.n}) vs ({b.d},{b.n})")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def _exchange_swapped(state: PureState, regs_a: Sequence[int], regs_b: Sequence[int]) -> np.ndarray:
    """Amplitudes of S|state> where S exchanges regs_a[i] <-> regs_b[i]."""
    order = list(range(state.n))
    for qa, qb in zip(regs_a, regs_b):
        order[qa], order[qb] = order[qb], order[qa]
    arr = state.amps.reshape((state.d,) * state.n)
    return np.transpose(arr, order).reshape(-1)


def _check_blocks(state: PureState, regs_a: Sequence[int], regs_b: Sequence[int]) -> None:
    if len(regs_a) != len(regs_b):
        raise ValueError("register blocks must have equal length")
    both = list(regs_a) + list(regs_b)
    _check_targets(state, both)


def exchange_accept_probability(state: PureState, regs_a: Sequence[int], regs_b: Sequence[int]) -> float:
    """Accept probability (1 + <S>)/2 of the exchange measurement, no sampling."""
    _check_blocks(state, regs_a, regs_b)
    overlap = np.vdot(state.amps, _exchange_swapped(state, regs_a, regs_b)).real
    return float(min(max((1.0 + overlap) / 2.0, 0.0), 1.0))


def _exchange_measure(
    state: PureState, regs_a: Sequence[int], regs_b: Sequence[int], rng: np.random.Generator
) -> MeasurementRecord:
    _check_blocks(state, regs_a, regs_b)
    swapped = _exchange_swapped(state, regs_a, regs_b)
    overlap = np.vdot(state.amps, swapped).real
    p_acc = float(min(max((1.0 + overlap) / 2.0, 0.0), 1.0))
    accept = bool(rng.random() < p_acc)
    if accept:
        if p_acc >= 1.0 - _EXACT:
            post = state  # already symmetric: unchanged
        else:
            vec = state.amps + swapped
            post = PureState(state.d, state.n, vec / np.linalg.norm(vec))
        return MeasurementRecord(0, p_acc, post)
    if p_acc <= _EXACT:
        post = state  # already antisymmetric
    else:
        vec = state.amps - swapped
        post = PureState(state.d, state.n, vec / np.linalg.norm(vec))
    return MeasurementRecord(1, 1.0 - p_acc, post)


def swap_test(
    state: PureState, regs_a: Sequence[int], regs_b: Sequence[int], rng: np.random.Generator
) -> MeasurementRecord:
    """Exchange-symmetry equality test between two register blocks.

    Outcome 0 (accept) occurs with probability (1 + <S>)/2, which is
    (1 + F)/2 when the blocks hold unentangled pure factors with squared
    overlap F. The post-state is the renormalized projection onto the
    symmetric (accept) or antisymmetric (reject) exchange subspace, exactly
    the back-action of the ancilla-coupled swap-test circuit after the
    ancilla is read out.
    """
    return _exchange_measure(state, regs_a, regs_b, rng)


def symmetric_subspace_measure(
    state: PureState, regs_a: Sequence[int], regs_b: Sequence[int], rng: np.random.Generator
) -> MeasurementRecord:
    """Projective measurement onto the exchange-symmetric subspace.

    Identical statistics and post-states to swap_test (both measure the same
    exchange operator); kept as a separate name because callers use it as a
    direct nondestructive projector, not as an equality test. A state of the
    form psi (x) psi on the two blocks accepts with probability 1 and is
    returned unchanged.
    """
    return _exchange_measure(state, regs_a, regs_b, rng)


def parity_measure(
    state: PureState, coeffs: Sequence[int], targets: Sequence[int], rng: np.random.Generator
) -> MeasurementRecord:
    """Measure sum(coeffs[i] * label(targets[i])) mod d, nondestructively.

    Outcome s in Z_d has Born probability equal to the state's weight in the
    parity-s sector; the post-state is the renormalized projection onto that
    sector, so states fully inside one sector are returned unchanged.
    """
    targets = list(targets)
    _check_targets(state, targets)
    if len(coeffs) != len(targets):
        raise ValueError(f"{len(coeffs)} coefficients for {len(targets)} targets")
    d, n = state.d, state.n
    parity = np.zeros(state.dim, dtype=np.int64)
    for c, q in zip(coeffs, targets):
        parity += int(c) % d * _digit_array(d, n, q)
    parity %= d
    weights = np.bincount(parity, weights=np.abs(state.amps) ** 2, minlength=d)
    probs = weights / weights.sum()
    outcome = int(rng.choice(d, p=probs))
    p = float(probs[outcome])
    if p >= 1.0 - _EXACT:
        return MeasurementRecord(outcome, p, state)
    vec = np.where(parity == outcome, state.amps, 0.0)
    return MeasurementRecord(outcome, p, PureState(d, n, vec / np.linalg.norm(vec)))


# ---------------------------------------------------------------------------
# register plumbing


def tensor(a: PureState, b: PureState) -> PureState:
    """Joint state with a's registers leading (most significant)."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    return PureState(a.d, a.n + b.n, np.kron(a.amps, b.amps))


def permute_registers(state: PureState, order: Sequence[int]) -> PureState:
    """Reorder registers: new register i is old register order[i]."""
    order = list(order)
    if sorted(order) != list(range(state.n)):
        raise ValueError(f"order must be a permutation of 0..{state.n - 1}, got {order}")
    arr = state.amps.reshape((state.d,) * state.n)
    return PureState(state.d, state.n, np.transpose(arr, order).reshape(-1))


def reduced_density(state: PureState, regs: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of the given registers (measurement plumbing).

    Returned as a plain array for Born-probability computations; density
    matrices are not a state representation anywhere in this package.
    """
    regs = list(regs)
    _check_targets(state, regs)
    rest = [q for q in range(state.n) if q not in regs]
    arr = state.amps.reshape((state.d,) * state.n)
    mat = np.transpose(arr, regs + rest).reshape(state.d ** len(regs), -1)
    return mat @ mat.conj().T


def extract_factor(state: PureState, regs: Sequence[int]) -> tuple[PureState, PureState]:
    """Split off the given registers as an unentangled pure factor.

    Returns (factor, rest) with factor on ``regs`` (in the given order) and
    rest on the remaining registers in ascending order, such that
    factor (x) rest reproduces the suitably permuted state. Raises
    EntangledFactorError if the cut carries entanglement above tolerance.
    """
    regs = list(regs)
    _check_targets(state, regs)
    rest_regs = [q for q in range(state.n) if q not in regs]
    arr = state.amps.reshape((state.d,) * state.n)
    mat = np.transpose(arr, regs + rest_regs).reshape(state.d ** len(regs), -1)
    col = int(np.argmax(np.linalg.norm(mat, axis=0)))
    u = mat[:, col]
    u = u / np.linalg.norm(u)
    v = u.conj() @ mat
    residual = float(np.abs(mat - np.outer(u, v)).max())
    if residual > TOL:
        raise EntangledFactorError(f"registers {regs} are entangled with the rest (residual {residual:.3e})")
    factor = PureState(state.d, len(regs), u)
    rest = PureState(state.d, state.n - len(regs), v / np.linalg.norm(v))
    return factor, rest


# ---------------------------------------------------------------------------
# primitive gate constructors


def identity_gate(d: int, m: int = 1) -> GateMatrix:
    return GateMatrix(d, m, np.eye(d**m))


def shift_gate(d: int, a: int = 1) -> GateMatrix:
    """Generalized X^a: adds a to the computational label mod d."""
    entries = np.zeros((d, d))
    for j in range(d):
        entries[(j + a) % d, j] = 1.0
    return GateMatrix(d, 1, entries)


def clock_gate(d: int, b: int = 1) -> GateMatrix:
    """Generalized Z^b: phase omega^(b*label) per label."""
    omega = np.exp(2j * np.pi / d)
    return GateMatrix(d, 1, np.diag(omega ** (b * np.arange(d))))


def fourier_gate(d: int) -> GateMatrix:
    """Discrete Fourier transform |j> -> d^{-1/2} sum_k omega^{jk} |k>."""
    j = np.arange(d)
    omega = np.exp(2j * np.pi / d)
    return GateMatrix(d, 1, omega ** np.outer(j, j) / np.sqrt(d))


def hadamard_gate() -> GateMatrix:
    return GateMatrix(2, 1, np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0))


def phase_eighth_gate(c: int = 1) -> GateMatrix:
    """diag(1, exp(i pi c / 4)) on a qubit; c odd makes it non-Clifford."""
    return GateMatrix(2, 1, np.diag([1.0, np.exp(1j * np.pi * c / 4.0)]))


def pauli_gate(name: str) -> GateMatrix:
    mats = {
        "I": np.eye(2),
        "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
        "Y": np.array([[0.0, -1j], [1j, 0.0]]),
        "Z": np.diag([1.0, -1.0]),
    }
    if name not in mats:
        raise ValueError(f"unknown Pauli {name!r}")
    return GateMatrix(2, 1, mats[name])


def controlled_add_gate(d: int) -> GateMatrix:
    """Two-register gate |a, b> -> |a, b + a mod d> (control first)."""
    entries = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            entries[a * d + (a + b) % d, a * d + b] = 1.0
    return GateMatrix(d, 2, entries)


# ---------------------------------------------------------------------------
# debug dump format and digests


def state_digest(state: PureState) -> str:
    """Stable hex digest of the exact amplitude bytes (plus shape header)."""
    h = hashlib.sha256()
    h.update(f"{state.d}|{state.n}|".encode())
    h.update(state.amps.tobytes())
    return h.hexdigest()


def dump_state(state: PureState) -> str:
    """JSON debug dump: {d, n, amps: [[re, im], ...]}."""
    pairs = [[float(a.real), float(a.imag)] for a in state.amps]
    return json.dumps({"d": state.d, "n": state.n, "amps": pairs})


def load_state(text: str) -> PureState:
    obj = json.loads(text)
    amps = np.array([complex(re, im) for re, im in obj["amps"]])
    return PureState(int(obj["d"]), int(obj["n"]), amps)
