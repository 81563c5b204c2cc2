"""Shared-key primitives: key schedule, one-time MAC, quantum OTP, trap authentication.

Everything here is information-theoretic given fresh key material; the key
schedule itself is a deterministic SHA-256 expansion of a master seed so
that two parties holding the same link seed derive bit-identical material
without communicating. Derivation paths are disjoint per purpose (``qotp``,
``auth``, ``mac``, ``sig``) and per index, and consuming calls advance a
per-purpose counter so material is never silently reused.

The MAC is a polynomial-evaluation universal hash over GF(2^b) masked with
a one-time pad: tag = H_r(message) xor pad[index]. The message is split
into big-endian b-bit blocks with zero padding and no length block, so the
hash of the empty (or all-zero) message is zero and its tag is the pad
itself. Messages that differ only by trailing zero padding therefore
collide; callers MAC fixed-format metadata where lengths are implied, which
keeps that out of scope. Reusing a pad index for tagging raises.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordOp, apply_clifford, identity_clifford, sample_clifford  # noqa: F401
from .qsim import PureState, _digit_array, basis_state, derive_seed, make_state, new_rng, parity_measure, tensor

MAC_WIDTHS = (16, 32, 64)

# Irreducible reduction polynomials x^b + ... for GF(2^b).
_REDUCTION = {16: 0x1002B, 32: 0x10000008D, 64: 0x1000000000000001B}

_MAX_BLOCKS = 1 << 16


class PadReuseError(RuntimeError):
    """A one-time MAC pad index was used for tagging twice."""


# ---------------------------------------------------------------------------
# key schedule


@dataclass(frozen=True)
class AuthKey:
    """Seed selecting the trap-scrambling Clifford; None means identity (test hook)."""

    seed: int | None
    key_id: str


@dataclass
class MacKey:
    """Evaluation point plus per-index pads for the one-time polynomial MAC."""

    width: int
    seed: int
    used: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.width not in MAC_WIDTHS:
            raise ValueError(f"tag width must be one of {MAC_WIDTHS}, got {self.width}")

    @property
    def point(self) -> int:
        return derive_seed(self.seed, "mac_point", self.width) & ((1 << self.width) - 1)

    def pad(self, index: int) -> int:
        if index < 0:
            raise ValueError("pad index must be nonnegative")
        return derive_seed(self.seed, "mac_pad", self.width, index) & ((1 << self.width) - 1)


@dataclass
class LinkKey:
    """All key material one party shares with one counterpart, seed-derived.

    ``next_*`` methods consume (advance a per-purpose counter); ``*_at``
    methods are pure lookups so the counterpart can re-derive the same
    material by index.
    """

    role: str
    seed: int
    counters: dict[str, int] = field(default_factory=dict)

    def _next_index(self, purpose: str) -> int:
        idx = self.counters.get(purpose, 0)
        self.counters[purpose] = idx + 1
        return idx

    def qotp_key_at(self, index: int, n_regs: int, d: int = 2) -> np.ndarray:
        rng = new_rng(derive_seed(self.seed, "qotp", index))
        return rng.integers(0, d, size=(n_regs, 2))

    def next_qotp_key(self, n_regs: int, d: int = 2) -> np.ndarray:
        return self.qotp_key_at(self._next_index("qotp"), n_regs, d)

    def auth_key_at(self, index: int) -> AuthKey:
        return AuthKey(derive_seed(self.seed, "auth", index), f"{self.role}:auth:{index}")

    def next_auth_key(self) -> AuthKey:
        return self.auth_key_at(self._next_index("auth"))

    def mac_key(self, width: int) -> MacKey:
        return MacKey(width, derive_seed(self.seed, "mac", width))

    def sig_seed(self) -> int:
        return derive_seed(self.seed, "sig")


@dataclass
class KeyStore:
    """Key links one party holds, one per counterpart role."""

    master_seed: int
    links: dict[str, LinkKey]

    def link(self, role: str) -> LinkKey:
        if role not in self.links:
            raise KeyError(f"no key link for role {role!r}")
        return self.links[role]


def derive_keys(master_seed: int, roles: list[str]) -> KeyStore:
    """Derive independent link keys for each role from one master seed."""
    if len(set(roles)) != len(roles):
        raise ValueError(f"duplicate roles in {roles}")
    links = {role: LinkKey(role, derive_seed(master_seed, "link", role)) for role in roles}
    return KeyStore(master_seed, links)


# ---------------------------------------------------------------------------
# one-time MAC


def gf_mul(a: int, b: int, width: int) -> int:
    """Carry-less multiply in GF(2^width) with the fixed reduction polynomial."""
    poly = _REDUCTION[width]
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> width:
            a ^= poly
    return r


def _blocks(message: bytes, width: int) -> list[int]:
    nbytes = width // 8
    if len(message) > _MAX_BLOCKS * nbytes:
        raise ValueError(f"message exceeds {_MAX_BLOCKS} blocks")
    padded = message + b"\x00" * (-len(message) % nbytes)
    return [int.from_bytes(padded[i : i + nbytes], "big") for i in range(0, len(padded), nbytes)]


def _wc_hash(key: MacKey, message: bytes) -> int:
    h = 0
    for blk in _blocks(message, key.width):
        h = gf_mul(h, key.point, key.width) ^ blk
    return gf_mul(h, key.point, key.width)


@dataclass(frozen=True)
class MacTag:
    value: int
    width: int
    pad_index: int


def wc_tag(key: MacKey, message: bytes, pad_index: int) -> MacTag:
    """One-time tag: polynomial hash at the secret point, masked by pad[pad_index]."""
    if pad_index in key.used:
        raise PadReuseError(f"pad index {pad_index} already consumed on this key")
    key.used.add(pad_index)
    return MacTag(_wc_hash(key, message) ^ key.pad(pad_index), key.width, pad_index)


def wc_check(key: MacKey, message: bytes, tag: MacTag) -> bool:
    """Verify a tag. Does not consume the pad: checking is free, tagging is not."""
    if tag.width != key.width:
        return False
    return tag.value == (_wc_hash(key, message) ^ key.pad(tag.pad_index))


# ---------------------------------------------------------------------------
# quantum one-time pad


def qotp(state: PureState, qotp_key: np.ndarray, direction: str) -> PureState:
    """Pauli one-time pad on every register: X^a Z^b with (a, b) = key row.

    Encryption applies the phase part first, then the shifts; decryption
    inverts in the opposite order. Averaging the encryption over all d^2
    single-register keys yields the maximally mixed state exactly.
    """
    key = np.asarray(qotp_key, dtype=np.int64)
    if key.shape != (state.n, 2):
        raise ValueError(f"key shape must be ({state.n}, 2), got {key.shape}")
    key = key % state.d
    d, n = state.d, state.n
    if direction == "encrypt":
        amps = _phase_layer(state.amps, d, n, key[:, 1])
        amps = _shift_layer(amps, d, n, key[:, 0])
    elif direction == "decrypt":
        amps = _shift_layer(state.amps, d, n, -key[:, 0] % d)
        amps = _phase_layer(amps, d, n, -key[:, 1] % d)
    else:
        raise ValueError(f"direction must be 'encrypt' or 'decrypt', got {direction!r}")
    return PureState(d, n, amps)


def _phase_layer(amps: np.ndarray, d: int, n: int, phases: np.ndarray) -> np.ndarray:
    if not phases.any():
        return amps
    expo = np.zeros(d**n, dtype=np.int64)
    for q in range(n):
        if phases[q]:
            expo += int(phases[q]) * _digit_array(d, n, q)
    return amps * np.exp(2j * np.pi * (expo % d) / d)


def _shift_layer(amps: np.ndarray, d: int, n: int, shifts: np.ndarray) -> np.ndarray:
    if not shifts.any():
        return amps
    arr = amps.reshape((d,) * n)
    moved = [q for q in range(n) if shifts[q]]
    arr = np.roll(arr, shift=[int(shifts[q]) for q in moved], axis=moved)
    return arr.reshape(-1)


# ---------------------------------------------------------------------------
# trap authentication


@dataclass(frozen=True)
class AuthBlock:
    """An authenticated block: n payload registers and t traps under one Clifford."""

    state: PureState
    n: int
    t: int
    key_id: str


def _auth_clifford(auth_key: AuthKey, m: int) -> CliffordOp:
    if auth_key.seed is None:
        return identity_clifford(m)
    return sample_clifford(m, new_rng(auth_key.seed))


def qauth_encode(state: PureState, auth_key: AuthKey, t: int) -> AuthBlock:
    """Append t |0> traps and scramble payload+traps with the keyed Clifford."""
    if state.d != 2:
        raise ValueError("trap authentication requires qubit registers (d = 2)")
    if t < 0:
        raise ValueError(f"trap count must be nonnegative, got {t}")
    if t == 0:
        warnings.warn("t = 0 gives an authentication block with no traps", stacklevel=2)
    block = tensor(state, basis_state(2, t, [0] * t)) if t else state
    encoded = apply_clifford(block, _auth_clifford(auth_key, block.n))
    return AuthBlock(encoded, state.n, t, auth_key.key_id)


def qauth_verify(block: AuthBlock, auth_key: AuthKey, rng: np.random.Generator) -> tuple[bool, PureState]:
    """Unscramble, measure every trap, accept iff all read 0; return the payload.

    The payload (first n registers after unscrambling) is returned whether or
    not the traps accept, so callers can decide what to do with a rejected
    block. With t = 0 acceptance is vacuous.
    """
    if block.state.n != block.n + block.t:
        raise ValueError(f"block claims {block.n}+{block.t} registers, state has {block.state.n}")
    decoded = apply_clifford(block.state, _auth_clifford(auth_key, block.state.n).inverse())
    accept = True
    outcomes = []
    for j in range(block.t):
        rec = parity_measure(decoded, [1], [block.n + j], rng)
        outcomes.append(rec.outcome)
        decoded = rec.post_state
        if rec.outcome != 0:
            accept = False
    if block.t == 0:
        warnings.warn("verifying an authentication block with no traps is vacuous", stacklevel=2)
        return True, decoded
    col = 0
    for o in outcomes:
        col = col * 2 + o
    payload = decoded.amps.reshape(2**block.n, 2**block.t)[:, col]
    return accept, make_state(2, block.n, payload)
