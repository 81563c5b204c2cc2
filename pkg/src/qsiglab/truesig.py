"""Stand-alone qudit signature scheme and the attack that breaks it.

The signer encodes a one-register message psi = sum_x0 psi(x0)|x0> into a
(2k-1)-register signed state

    s = d^{-(k-1)/2} sum_{x in Z_d^k} psi(x_0) |y_1(x), ..., y_{2k-1}(x)>

where the y_i are the keyed linear functionals of a FunctionalMatrix (y_0 =
x_0 stays implicit). Alongside travel one reference pair Omega =
d^{-1/2} sum_j |jj> and a plaintext copy of psi. Verification is a four-step
check measuring the parity syndrome, decoding, testing the k-1 residual
pairs against Omega, and comparing the decoded register with the copy.

The point of this module is negative: verification only needs the decode
bijection and the parity constraints, and anyone holding those can decode a
valid signed state, swap in a different message, and re-encode. forge()
does exactly that, using nothing but the verifying key, and its output is
indistinguishable from a fresh signature on the substituted message. The
scheme's security therefore cannot rest on the signed state itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fieldcode import (
    DecodeBijection,
    FunctionalMatrix,
    ParityConstraintSet,
    decode_bijection,
    gen_functionals,
    parity_constraints,
)
from .qsim import (
    TOL,
    EntangledFactorError,
    PureState,
    _digit_array,
    apply_classical_bijection,
    apply_gate,
    dump_state,
    extract_factor,
    fidelity,
    fourier_gate,
    load_state,
    make_state,
    new_rng,
    parity_measure,
    reduced_density,
    symmetric_subspace_measure,
    tensor,
)

# ---------------------------------------------------------------------------
# keys


@dataclass(frozen=True)
class VerifyingKey:
    """What a verifier holds: the relabeling and the syndrome constraints.

    Deliberately NOT enough to bind messages: forge() consumes exactly this.
    """

    d: int
    k: int
    decode: DecodeBijection
    constraints: ParityConstraintSet


@dataclass(frozen=True)
class TrueSigKeys:
    signing: FunctionalMatrix
    verifying: VerifyingKey

    @property
    def d(self) -> int:
        return self.signing.d

    @property
    def k(self) -> int:
        return self.signing.k


def keygen(d: int, k: int, seed: int) -> TrueSigKeys:
    """Sample evaluation points, fix the decode subset to rows 1..k."""
    if k < 2:
        raise ValueError(f"the scheme needs k >= 2 (no redundant coordinates otherwise), got k={k}")
    rng = new_rng(seed)
    points = [0] + [int(b) for b in 1 + rng.permutation(d - 1)[: 2 * k - 1]]
    fm = gen_functionals(d, k, points)
    in_subset = tuple(range(1, k + 1))
    vk = VerifyingKey(d, k, decode_bijection(fm, in_subset), parity_constraints(fm))
    return TrueSigKeys(fm, vk)


# ---------------------------------------------------------------------------
# signing


@dataclass(frozen=True)
class SignedBundle:
    """Signed state plus the two references the verifier compares against."""

    d: int
    k: int
    s_state: PureState
    omega_pair: PureState
    p_copy: PureState


def canonical_omega(d: int) -> PureState:
    amps = np.zeros(d * d, dtype=np.complex128)
    amps[:: d + 1] = 1.0
    return make_state(d, 2, amps)


def sign(keys: TrueSigKeys, psi_amplitudes, psi_copy: PureState) -> SignedBundle:
    """Encode psi into the signed (2k-1)-register state; attach references."""
    fm = keys.signing
    d, k = fm.d, fm.k
    psi = make_state(d, 1, np.asarray(psi_amplitudes, dtype=np.complex128))
    if psi_copy.d != d or psi_copy.n != 1:
        raise ValueError(f"copy must be one register of dimension {d}")
    grid = np.stack(np.meshgrid(*[np.arange(d)] * k, indexing="ij"), axis=-1).reshape(-1, k)
    y_all = grid @ fm.rows[1:].T % d  # coordinates y_1..y_{2k-1} for every x
    powers = d ** np.arange(2 * k - 2, -1, -1, dtype=np.int64)
    flat = y_all @ powers
    amps = np.zeros(d ** (2 * k - 1), dtype=np.complex128)
    amps[flat] = psi.amps[grid[:, 0]] * d ** (-(k - 1) / 2)  # injective placement
    return SignedBundle(d, k, PureState(d, 2 * k - 1, amps), canonical_omega(d), psi_copy)


def decode(keys: TrueSigKeys | VerifyingKey, s_state: PureState) -> PureState:
    """Relabel registers 0..k-1: afterwards register 0 holds the message and
    registers (i, k-1+i) for i = 1..k-1 hold the residual reference pairs."""
    vk = keys.verifying if isinstance(keys, TrueSigKeys) else keys
    if s_state.d != vk.d or s_state.n != 2 * vk.k - 1:
        raise ValueError(f"signed state must be {2 * vk.k - 1} registers of dimension {vk.d}")
    return apply_classical_bijection(s_state, vk.decode, list(range(vk.k)))


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class FourStepVerdict:
    """Per-step outcomes; steps after the first failure are not executed."""

    step1_syndrome: tuple[int, ...]
    step2_decoded: bool
    step3_entanglement: bool
    step4_equality: bool
    overall: bool
    mode: str


def failed_step(verdict: FourStepVerdict) -> str:
    if verdict.overall:
        return "none"
    if any(s != 0 for s in verdict.step1_syndrome):
        return "step1"
    if not verdict.step2_decoded:
        return "step2"
    if not verdict.step3_entanglement:
        return "step3"
    return "step4"


def _omega_pairs(k: int) -> list[tuple[int, int]]:
    return [(i, k - 1 + i) for i in range(1, k)]


def verify(
    keys: TrueSigKeys | VerifyingKey,
    bundle: SignedBundle,
    mode: str,
    rng: np.random.Generator | None = None,
) -> FourStepVerdict:
    """Four-step verification in either of two inspection regimes.

    "protocol" runs the physically implementable sequence: syndrome
    measurements, decode, pairwise parity tests in both bases, and equality
    tests sampled at their exact Born probabilities (rng required).
    "referee" is the noiseless classical referee: deterministic sector
    weights, unentangled-factor extraction and fidelity thresholds at
    1 - 1e-9, no randomness. Both short-circuit at the first failed step.
    """
    vk = keys.verifying if isinstance(keys, TrueSigKeys) else keys
    if mode not in ("referee", "protocol"):
        raise ValueError(f"mode must be 'referee' or 'protocol', got {mode!r}")
    if mode == "protocol" and rng is None:
        raise ValueError("protocol mode samples measurement outcomes and needs an rng")
    d, k = vk.d, vk.k
    cur = bundle.s_state
    if cur.d != d or cur.n != 2 * k - 1:
        raise ValueError(f"signed state must be {2 * k - 1} registers of dimension {d}")
    if bundle.omega_pair.n != 2 or bundle.p_copy.n != 1:
        raise ValueError("bundle references have the wrong register counts")

    def fail(syndrome, s2=False, s3=False) -> FourStepVerdict:
        return FourStepVerdict(tuple(syndrome), s2, s3, False, False, mode)

    # step 1: parity syndrome over all coordinate registers
    syndrome: list[int] = []
    regs = list(range(2 * k - 1))
    for c in vk.constraints.vectors:
        if mode == "protocol":
            rec = parity_measure(cur, [int(v) for v in c], regs, rng)
            cur = rec.post_state
            syndrome.append(rec.outcome)
        else:
            parity = np.zeros(cur.dim, dtype=np.int64)
            for coeff, q in zip(c, regs):
                parity += int(coeff) % d * _digit_array(d, 2 * k - 1, q)
            weights = np.bincount(parity % d, weights=np.abs(cur.amps) ** 2, minlength=d)
            dominant = int(np.argmax(weights))
            syndrome.append(0 if dominant == 0 and weights[0] >= 1.0 - TOL else (dominant or 1))
        if syndrome[-1] != 0:
            return fail(syndrome)

    # step 2: decode relabeling (a bijection; carries no pass/fail of its own)
    cur = apply_classical_bijection(cur, vk.decode, list(range(k)))

    # step 3: every residual pair must be the reference pair
    omega = canonical_omega(d)
    if mode == "protocol":
        ff = fourier_gate(d)
        for a, b in _omega_pairs(k):
            rec = parity_measure(cur, [1, d - 1], [a, b], rng)
            cur = rec.post_state
            if rec.outcome != 0:
                return fail(syndrome, s2=True)
            cur = apply_gate(apply_gate(cur, ff, [a]), ff, [b])
            rec = parity_measure(cur, [1, 1], [a, b], rng)
            cur = rec.post_state
            if rec.outcome != 0:
                return fail(syndrome, s2=True)
            cur = apply_gate(apply_gate(cur, ff.dagger(), [a]), ff.dagger(), [b])
    else:
        for a, b in _omega_pairs(k):
            try:
                pair_state, _ = extract_factor(cur, [a, b])
                ok = fidelity(pair_state, omega) >= 1.0 - TOL
            except EntangledFactorError:
                ok = False
            if not ok:
                return fail(syndrome, s2=True)

    # step 4: decoded message vs plaintext copy, first pair vs shipped pair
    if mode == "referee":
        try:
            f0, _ = extract_factor(cur, [0])
            ok4 = fidelity(f0, bundle.p_copy) >= 1.0 - TOL
        except EntangledFactorError:
            ok4 = False
        if ok4:
            try:
                fp, _ = extract_factor(cur, [1, k])
                ok4 = fidelity(fp, bundle.omega_pair) >= 1.0 - TOL
            except EntangledFactorError:
                ok4 = False
    else:
        merged = tensor(cur, bundle.p_copy)
        rec = symmetric_subspace_measure(merged, [0], [2 * k - 1], rng)
        if rec.outcome != 0:
            ok4 = False
        else:
            # exchange test against the shipped pair, sampled at its exact
            # Born probability from the reduced state (the post-state of the
            # last step is never used, so it is not materialized)
            rho = reduced_density(rec.post_state, [1, k])
            ref = np.outer(bundle.omega_pair.amps, bundle.omega_pair.amps.conj())
            p = (1.0 + float(np.trace(rho @ ref).real)) / 2.0
            ok4 = bool(rng.random() < min(max(p, 0.0), 1.0))
    return FourStepVerdict(tuple(syndrome), True, True, ok4, ok4, mode)


# ---------------------------------------------------------------------------
# the forgery


def forge(
    verifying_key: VerifyingKey,
    bundle: SignedBundle,
    psi_prime_amplitudes,
    psi_prime_copy: PureState,
) -> SignedBundle:
    """Decode, replace the message register, re-encode. No signing key used.

    Works on any bundle whose signed state decodes to an unentangled message
    register (every honestly signed bundle does). The output verifies and is
    state-identical to a fresh signature on the substituted message.
    """
    if isinstance(verifying_key, TrueSigKeys):
        raise TypeError("forge takes the verifying key only; the point is that it suffices")
    vk = verifying_key
    d, k = vk.d, vk.k
    psi_prime = make_state(d, 1, np.asarray(psi_prime_amplitudes, dtype=np.complex128))
    decoded = decode(vk, bundle.s_state)
    _, rest = extract_factor(decoded, [0])  # discard the signed message
    replaced = tensor(psi_prime, rest)
    s_new = apply_classical_bijection(replaced, vk.decode.inverted(), list(range(k)))
    return SignedBundle(d, k, s_new, bundle.omega_pair, psi_prime_copy)


# ---------------------------------------------------------------------------
# bundle serialization


def dump_bundle(bundle: SignedBundle) -> str:
    return json.dumps(
        {
            "d": bundle.d,
            "k": bundle.k,
            "s_state": dump_state(bundle.s_state),
            "omega_pair": dump_state(bundle.omega_pair),
            "p_copy": dump_state(bundle.p_copy),
        }
    )


def load_bundle(text: str) -> SignedBundle:
    obj = json.loads(text)
    return SignedBundle(
        int(obj["d"]),
        int(obj["k"]),
        load_state(obj["s_state"]),
        load_state(obj["omega_pair"]),
        load_state(obj["p_copy"]),
    )
