"""Three-party arbitrated signing session over authenticated quantum channels.

Roles: alice signs a quantum message, bob receives it and cannot validate it
alone, a trusted arbiter adjudicates. Alice shares one key link with the
arbiter, bob shares another; alice and bob share nothing. One session is
four phases: SIGMA (alice -> bob: signed message plus a plaintext copy,
trap-authenticated), Y (bob -> arbiter: alice's block one-time padded and
re-authenticated under bob's key), T_REPLY (arbiter -> bob: validity bit r
plus the repacked registers), or ABORT in place of T_REPLY when a check
fails on the arbiter's side. Classical metadata rides under one-time MACs.

The signature itself is a keyed non-Clifford unitary on the message
registers. Its role is to bind the message to alice's key: stripping it
with the wrong key leaves a state visibly different from the plaintext
copy, and it is deliberately far from Pauli-covariant so register-local
Pauli attacks cannot be pushed through it (see signing_distance).

Verdicts carry a failure_stage from FAILURE_STAGES, naming the first check
that failed; honest sessions end accepted with stage "none".
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .authcrypto import (
    MAC_WIDTHS,
    AuthBlock,
    MacKey,
    MacTag,
    KeyStore,
    derive_keys,
    qauth_encode,
    qauth_verify,
    qotp,
    wc_check,
    wc_tag,
)
from .qsim import (
    TOL,
    EntangledFactorError,
    GateMatrix,
    PureState,
    apply_gate,
    basis_state,
    controlled_add_gate,
    decode_labels,
    derive_seed,
    extract_factor,
    fidelity,
    hadamard_gate,
    new_rng,
    pauli_gate,
    permute_registers,
    phase_eighth_gate,
    sample_random_pure,
    state_digest,
    symmetric_subspace_measure,
    tensor,
)

PHASE_SIGMA = "SIGMA"
PHASE_Y = "Y"
PHASE_T_REPLY = "T_REPLY"
PHASE_ABORT = "ABORT"

FAILURE_STAGES = ("none", "bob_auth", "arb_auth_outer", "arb_auth_inner", "sig_check", "bob_final_auth", "abort")

# Every keyed signing unitary must sit at least this far (Frobenius distance,
# phase-optimized) from the nearest Pauli-covariant behavior. Calibrated over
# the key space; scripts/calibrate_noncommutativity.py reproduces the floors.
NONCOMMUTATIVITY_THRESHOLD = 1.0


class ProtocolError(RuntimeError):
    """A message arrived in the wrong phase or with an impossible shape."""


# ---------------------------------------------------------------------------
# configuration and bookkeeping


@dataclass(frozen=True)
class SessionConfig:
    n: int = 2
    t: int = 4
    mode: str = "referee"
    seed: int = 0
    b: int = 16
    adversary: str = "identity"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need n >= 1 message registers, got {self.n}")
        if self.t < 0:
            raise ValueError(f"trap count must be nonnegative, got {self.t}")
        if self.mode not in ("referee", "protocol"):
            raise ValueError(f"mode must be 'referee' or 'protocol', got {self.mode!r}")
        if self.b not in MAC_WIDTHS:
            raise ValueError(f"MAC width must be one of {MAC_WIDTHS}, got {self.b}")


class CountingRNG:
    """Generator proxy that counts draws, so transcripts can log randomness use."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self.draws = 0

    def random(self, *args, **kwargs):
        self.draws += 1
        return self._rng.random(*args, **kwargs)

    def choice(self, *args, **kwargs):
        self.draws += 1
        return self._rng.choice(*args, **kwargs)

    def integers(self, *args, **kwargs):
        self.draws += 1
        return self._rng.integers(*args, **kwargs)

    def standard_normal(self, *args, **kwargs):
        self.draws += 1
        return self._rng.standard_normal(*args, **kwargs)


@dataclass
class ProtocolMessage:
    phase: str
    payload: PureState | None
    meta: dict
    tag: MacTag | None
    sender: str
    receiver: str


@dataclass(frozen=True)
class VerdictRecord:
    r: int
    accepted: bool
    failure_stage: str
    recovered_message: PureState | None
    recovered_fidelity: float | None


@dataclass
class Transcript:
    config: SessionConfig
    events: list[dict]
    verdict: VerdictRecord
    message: PureState

    def json_lines(self) -> str:
        lines = [_canon_json({"type": "event", **e}) for e in self.events]
        lines.append(
            _canon_json(
                {
                    "type": "verdict",
                    "r": self.verdict.r,
                    "accepted": self.verdict.accepted,
                    "failure_stage": self.verdict.failure_stage,
                    "recovered_fidelity": self.verdict.recovered_fidelity,
                }
            )
        )
        return "\n".join(lines) + "\n"


def _canon_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def canonical_meta(meta: dict) -> bytes:
    """Deterministic byte encoding of message metadata, the MAC'd content."""
    return _canon_json(meta).encode("utf-8")


# ---------------------------------------------------------------------------
# the keyed signing unitary


def signing_ops(n: int, sig_seed: int) -> tuple[tuple[GateMatrix, tuple[int, ...]], ...]:
    """Keyed signing circuit on n registers: 3n layers, deliberately non-Clifford.

    The fixed core is phase / Hadamard / phase with key-chosen odd eighth-phase
    exponents on every register, which already breaks Pauli covariance on one
    register. Remaining layers are key-chosen from register-wide Pauli,
    register-wide Hadamard, and neighbor controlled-add, keeping every key's
    unitary far from all Pauli-covariant behaviors (distance floor is
    calibrated, see NONCOMMUTATIVITY_THRESHOLD).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = new_rng(sig_seed)

    def pauli_layer() -> list[tuple[GateMatrix, tuple[int, ...]]]:
        return [(pauli_gate("IXYZ"[rng.integers(0, 4)]), (q,)) for q in range(n)]

    def phase_layer() -> list[tuple[GateMatrix, tuple[int, ...]]]:
        return [(phase_eighth_gate(int(2 * rng.integers(0, 4) + 1)), (q,)) for q in range(n)]

    def h_layer() -> list[tuple[GateMatrix, tuple[int, ...]]]:
        return [(hadamard_gate(), (q,)) for q in range(n)]

    def cadd_layer() -> list[tuple[GateMatrix, tuple[int, ...]]]:
        q = int(rng.integers(0, n - 1))
        flip = int(rng.integers(0, 2))
        return [(controlled_add_gate(2), (q + 1, q) if flip else (q, q + 1))]

    layers: list[list[tuple[GateMatrix, tuple[int, ...]]]] = []
    if 3 * n > 3:
        layers.append(pauli_layer())
    layers += [phase_layer(), h_layer(), phase_layer()]
    while len(layers) < 3 * n:
        kind = int(rng.integers(0, 3))
        if kind == 0:
            layers.append(pauli_layer())
        elif kind == 1:
            layers.append(h_layer())
        else:
            layers.append(cadd_layer())
    return tuple(g for layer in layers for g in layer)


def apply_signing(state: PureState, ops, inverse: bool = False) -> PureState:
    """Apply the signing circuit (or its exact inverse) to a state."""
    if inverse:
        for gate, targets in reversed(ops):
            state = apply_gate(state, gate.dagger(), targets)
    else:
        for gate, targets in ops:
            state = apply_gate(state, gate, targets)
    return state


def signing_unitary(n: int, ops) -> np.ndarray:
    """Dense matrix of a signing circuit (small n; calibration and tests)."""
    dim = 2**n
    u = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        u[:, j] = apply_signing(basis_state(2, n, decode_labels(j, n, 2)), ops).amps
    return u


def pauli_covariance_distance(u: np.ndarray, n: int) -> float:
    """min over P != I of the phase-optimized Frobenius distance from U P to
    the nearest P' U, quantifying how far U is from letting any Pauli slip
    through. Zero for Clifford U; the signing construction keeps it above
    NONCOMMUTATIVITY_THRESHOLD for every key."""
    from .clifford import pauli_from_bits

    dim = 2**n
    paulis = []
    for idx in range(4**n):
        bits = np.zeros(2 * n, dtype=np.int64)
        rem = idx
        for q in range(n - 1, -1, -1):
            code = rem % 4
            rem //= 4
            # 0=I 1=X 2=Y 3=Z
            bits[2 * q] = 1 if code in (1, 2) else 0
            bits[2 * q + 1] = 1 if code in (2, 3) else 0
        paulis.append(pauli_from_bits(bits, 0))
    right = [p @ u for p in paulis]
    best = np.inf
    for p in paulis[1:]:
        up = u @ p
        m = max(abs(np.einsum("ij,ij->", up.conj(), r)) for r in right)
        best = min(best, 2.0 * dim - 2.0 * float(m))
    return float(np.sqrt(max(best, 0.0)))


def signing_distance(n: int, sig_seed: int) -> float:
    """Pauli-covariance distance of the signing unitary for one key."""
    return pauli_covariance_distance(signing_unitary(n, signing_ops(n, sig_seed)), n)


# ---------------------------------------------------------------------------
# parties


@dataclass
class Party:
    name: str
    config: SessionConfig
    store: KeyStore
    rng: CountingRNG
    macs: dict[str, MacKey]
    sig_ops: tuple = ()


@dataclass
class SessionParties:
    alice: Party
    bob: Party
    arbiter: Party


def setup(config: SessionConfig) -> SessionParties:
    """Deal key material: alice-arbiter and bob-arbiter links, nothing between
    alice and bob. Each party gets its own counted RNG stream."""
    alice_store = derive_keys(config.seed, ["alice"])
    bob_store = derive_keys(config.seed, ["bob"])
    arb_store = derive_keys(config.seed, ["alice", "bob"])

    def party_rng(name: str) -> CountingRNG:
        return CountingRNG(new_rng(derive_seed(config.seed, "party", name)))

    alice_link = alice_store.link("alice")
    alice = Party(
        "alice",
        config,
        alice_store,
        party_rng("alice"),
        {"alice": alice_link.mac_key(config.b)},
        signing_ops(config.n, alice_link.sig_seed()),
    )
    bob = Party("bob", config, bob_store, party_rng("bob"), {"bob": bob_store.link("bob").mac_key(config.b)})
    arbiter = Party(
        "arbiter",
        config,
        arb_store,
        party_rng("arbiter"),
        {"alice": arb_store.link("alice").mac_key(config.b), "bob": arb_store.link("bob").mac_key(config.b)},
        signing_ops(config.n, arb_store.link("alice").sig_seed()),
    )
    return SessionParties(alice, bob, arbiter)


# ---------------------------------------------------------------------------
# protocol phases


def alice_sign(alice: Party, message_state: PureState, message_copy: PureState) -> ProtocolMessage:
    """SIGMA: sign the message, adjoin the plaintext copy, authenticate, MAC."""
    n, t = alice.config.n, alice.config.t
    for st in (message_state, message_copy):
        if st.d != 2 or st.n != n:
            raise ValueError(f"message must be {n} qubit registers, got d={st.d}, n={st.n}")
    signed = apply_signing(message_state, alice.sig_ops)
    block = qauth_encode(tensor(signed, message_copy), alice.store.link("alice").auth_key_at(0), t)
    meta = {"phase": PHASE_SIGMA, "n": n, "t": t, "key_id": block.key_id}
    tag = wc_tag(alice.macs["alice"], canonical_meta(meta), 0)
    return ProtocolMessage(PHASE_SIGMA, block.state, meta, tag, "alice", "bob")


def bob_wrap(bob: Party, sigma_msg: ProtocolMessage) -> ProtocolMessage:
    """Y: one-time pad alice's block, re-authenticate under bob's key, forward.

    Bob cannot check anything yet; he binds what he saw (alice's metadata and
    tag travel inside his own MAC'd metadata) and sends it to the arbiter.
    """
    if sigma_msg.phase != PHASE_SIGMA:
        raise ProtocolError(f"bob_wrap expects a SIGMA message, got {sigma_msg.phase}")
    if sigma_msg.payload is None:
        raise ProtocolError("SIGMA message carries no payload")
    t = bob.config.t
    link = bob.store.link("bob")
    wrapped = qotp(sigma_msg.payload, link.qotp_key_at(0, sigma_msg.payload.n), "encrypt")
    block = qauth_encode(wrapped, link.auth_key_at(0), t)
    meta = {
        "phase": PHASE_Y,
        "n": bob.config.n,
        "t": t,
        "key_id": block.key_id,
        "alice_meta": sigma_msg.meta,
        "alice_tag": [sigma_msg.tag.value, sigma_msg.tag.width, sigma_msg.tag.pad_index],
    }
    tag = wc_tag(bob.macs["bob"], canonical_meta(meta), 0)
    return ProtocolMessage(PHASE_Y, block.state, meta, tag, "bob", "arbiter")


def arbiter_adjudicate(arbiter: Party, y_msg: ProtocolMessage, mode: str | None = None) -> ProtocolMessage:
    """T_REPLY or ABORT: peel both wrappings, judge the signature, repack.

    Validity r = 1 means the unsigned message registers match the plaintext
    copy. In referee mode that comparison is exact (unentangled-factor
    extraction plus fidelity, no sampling); in protocol mode it is one
    symmetric-subspace measurement, the physically implementable check.
    """
    if y_msg.phase != PHASE_Y:
        raise ProtocolError(f"arbiter expects a Y message, got {y_msg.phase}")
    cfg = arbiter.config
    mode = cfg.mode if mode is None else mode
    if mode not in ("referee", "protocol"):
        raise ValueError(f"mode must be 'referee' or 'protocol', got {mode!r}")
    n, t = cfg.n, cfg.t
    alice_link = arbiter.store.link("alice")
    bob_link = arbiter.store.link("bob")

    def abort(stage: str) -> ProtocolMessage:
        meta = {"phase": PHASE_ABORT, "failure_stage": stage}
        tag = wc_tag(arbiter.macs["bob"], canonical_meta(meta), 1)
        return ProtocolMessage(PHASE_ABORT, None, meta, tag, "arbiter", "bob")

    if not wc_check(arbiter.macs["bob"], canonical_meta(y_msg.meta), y_msg.tag):
        return abort("arb_auth_outer")
    if y_msg.payload is None or y_msg.payload.n != 2 * n + 2 * t:
        return abort("arb_auth_outer")
    outer = AuthBlock(y_msg.payload, 2 * n + t, t, y_msg.meta["key_id"])
    ok, inner = qauth_verify(outer, bob_link.auth_key_at(0), arbiter.rng)
    if not ok:
        return abort("arb_auth_outer")
    unpadded = qotp(inner, bob_link.qotp_key_at(0, inner.n), "decrypt")

    alice_meta = y_msg.meta["alice_meta"]
    alice_tag = MacTag(*y_msg.meta["alice_tag"])
    if not wc_check(arbiter.macs["alice"], canonical_meta(alice_meta), alice_tag):
        return abort("arb_auth_inner")
    ok, core = qauth_verify(AuthBlock(unpadded, 2 * n, t, alice_meta["key_id"]), alice_link.auth_key_at(0), arbiter.rng)
    if not ok:
        return abort("arb_auth_inner")

    unsigned = apply_signing(core, arbiter.sig_ops, inverse=True)
    if mode == "referee":
        try:
            factor, rest = extract_factor(unsigned, list(range(n)))
            r = 1 if fidelity(factor, rest) >= 1.0 - TOL else 0
        except EntangledFactorError:
            r = 0
        post = unsigned
    else:
        rec = symmetric_subspace_measure(unsigned, list(range(n)), list(range(n, 2 * n)), arbiter.rng)
        r = 1 if rec.outcome == 0 else 0
        post = rec.post_state

    resigned = apply_signing(post, arbiter.sig_ops)
    reply_core = permute_registers(resigned, list(range(n, 2 * n)) + list(range(n)))
    block = qauth_encode(reply_core, bob_link.auth_key_at(1), t)
    meta = {"phase": PHASE_T_REPLY, "r": r, "n": n, "t": t, "key_id": block.key_id}
    tag = wc_tag(arbiter.macs["bob"], canonical_meta(meta), 1)
    return ProtocolMessage(PHASE_T_REPLY, block.state, meta, tag, "arbiter", "bob")


def bob_finalize(bob: Party, t_msg: ProtocolMessage) -> VerdictRecord:
    """Bob's verdict: check the arbiter's MAC and traps, then read r."""
    n, t = bob.config.n, bob.config.t
    if t_msg.phase == PHASE_ABORT:
        ok = wc_check(bob.macs["bob"], canonical_meta(t_msg.meta), t_msg.tag)
        stage = t_msg.meta.get("failure_stage", "abort") if ok else "abort"
        if stage not in FAILURE_STAGES:
            stage = "abort"
        return VerdictRecord(0, False, stage, None, None)
    if t_msg.phase != PHASE_T_REPLY:
        raise ProtocolError(f"bob_finalize expects T_REPLY or ABORT, got {t_msg.phase}")
    if not wc_check(bob.macs["bob"], canonical_meta(t_msg.meta), t_msg.tag):
        return VerdictRecord(0, False, "bob_auth", None, None)
    if t_msg.payload is None or t_msg.payload.n != 2 * n + t:
        return VerdictRecord(0, False, "bob_auth", None, None)
    block = AuthBlock(t_msg.payload, 2 * n, t, t_msg.meta["key_id"])
    ok, stripped = qauth_verify(block, bob.store.link("bob").auth_key_at(1), bob.rng)
    if not ok:
        return VerdictRecord(0, False, "bob_final_auth", None, None)
    if int(t_msg.meta["r"]) != 1:
        return VerdictRecord(0, False, "sig_check", None, None)
    try:
        recovered, _ = extract_factor(stripped, list(range(n)))
    except EntangledFactorError:
        recovered = None  # accepted, but the halves are entangled post-measurement
    return VerdictRecord(1, True, "none", recovered, None)


# ---------------------------------------------------------------------------
# whole sessions


def run_session(config: SessionConfig, adversary_hook=None, parties: SessionParties | None = None) -> Transcript:
    """One full session on a fresh Haar-random message.

    adversary_hook(position, msg) -> msg may rewrite the message in flight at
    positions "sigma", "y", "t_reply". The transcript logs a state digest and
    cumulative RNG draw counts after every step, and the verdict gains
    recovered_fidelity against the original message when bob both accepts and
    recovers an unentangled message factor.
    """
    if parties is None:
        parties = setup(config)
    alice, bob, arbiter = parties.alice, parties.bob, parties.arbiter
    msg_rng = new_rng(derive_seed(config.seed, "message"))
    psi = sample_random_pure(2, config.n, msg_rng)
    copy = PureState(2, config.n, psi.amps)
    events: list[dict] = []

    def log(event: str, party: str, payload: PureState | None, draws: int) -> None:
        events.append(
            {
                "event": event,
                "party": party,
                "digest": state_digest(payload) if payload is not None else "",
                "rng_draws": draws,
            }
        )

    def channel(position: str, msg: ProtocolMessage) -> ProtocolMessage:
        if adversary_hook is None:
            return msg
        msg = adversary_hook(position, msg)
        log(f"channel_{position}", "adversary", msg.payload, 0)
        return msg

    sigma = alice_sign(alice, psi, copy)
    log("alice_sign", "alice", sigma.payload, alice.rng.draws)
    sigma = channel("sigma", sigma)
    y = bob_wrap(bob, sigma)
    log("bob_wrap", "bob", y.payload, bob.rng.draws)
    y = channel("y", y)
    reply = arbiter_adjudicate(arbiter, y, config.mode)
    log("arbiter_adjudicate", "arbiter", reply.payload, arbiter.rng.draws)
    reply = channel("t_reply", reply)
    verdict = bob_finalize(bob, reply)
    log("bob_finalize", "bob", None, bob.rng.draws)
    if verdict.accepted and verdict.recovered_message is not None:
        verdict = replace(verdict, recovered_fidelity=fidelity(verdict.recovered_message, psi))
    return Transcript(config, events, verdict, psi)
