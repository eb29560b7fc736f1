"""Statevector simulation of small parameterized circuits.

Qubit 0 is the most significant bit of a basis-state index, so for two qubits
``|q0 q1>`` = ``|10>`` lives at index 2.

Every kernel accepts amplitudes with arbitrary leading batch dimensions,
``(..., 2**n)``; rotation angles broadcast against those batch dimensions.
This is how the parameter-shift code evaluates all shifted circuits in one
pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

MAX_QUBITS = 12
SHIFT = np.pi / 2


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CX = "CX"


ROTATIONS = (GateKind.RX, GateKind.RY, GateKind.RZ)


@dataclass(frozen=True)
class GateOp:
    """One gate in a circuit.

    A rotation takes its angle from exactly one of ``param_slot`` (trainable),
    ``input_slot`` (encoder) or ``fixed_angle``. ``targets`` is ``(q,)`` for
    rotations and ``(control, target)`` for CX.
    """

    kind: GateKind
    targets: tuple
    param_slot: Optional[int] = None
    input_slot: Optional[int] = None
    fixed_angle: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        sources = [s is not None for s in (self.param_slot, self.input_slot, self.fixed_angle)]
        if self.kind is GateKind.CX:
            if len(self.targets) != 2:
                raise ValueError("CX needs (control, target)")
            if self.targets[0] == self.targets[1]:
                raise ValueError("CX control and target must differ")
            if any(sources):
                raise ValueError("CX takes no angle")
        else:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind.value} acts on exactly one qubit")
            if sum(sources) != 1:
                raise ValueError(
                    f"{self.kind.value} needs exactly one of param_slot, input_slot, fixed_angle"
                )


@dataclass
class CircuitSpec:
    n_qubits: int
    encoder_slots: int = 0
    gates: list = field(default_factory=list)
    param_count: int = 0

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        for g in self.gates:
            if any(t < 0 or t >= self.n_qubits for t in g.targets):
                raise ValueError(f"gate {g} targets a qubit outside 0..{self.n_qubits - 1}")
            if g.param_slot is not None and not 0 <= g.param_slot < self.param_count:
                raise ValueError(f"param_slot {g.param_slot} >= param_count {self.param_count}")
            if g.input_slot is not None and not 0 <= g.input_slot < self.encoder_slots:
                raise ValueError(f"input_slot {g.input_slot} >= encoder_slots {self.encoder_slots}")

    def count_gates(self):
        """Return ``(trainable rotations, encoder rotations, fixed rotations, CX)``."""
        trainable = sum(g.param_slot is not None for g in self.gates)
        encoder = sum(g.input_slot is not None for g in self.gates)
        fixed = sum(g.fixed_angle is not None for g in self.gates)
        cx = sum(g.kind is GateKind.CX for g in self.gates)
        return trainable, encoder, fixed, cx


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape[-1] != 2**self.n_qubits:
            raise ValueError(
                f"expected {2 ** self.n_qubits} amplitudes, got {self.amplitudes.shape[-1]}"
            )


def _check_qubits(n):
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n!r}")


def zero_state(n_qubits: int, batch_shape: Sequence[int] = ()) -> Statevector:
    _check_qubits(n_qubits)
    amps = np.zeros(tuple(batch_shape) + (2**n_qubits,), dtype=np.complex128)
    amps[..., 0] = 1.0
    return Statevector(n_qubits, amps)


def rotation_matrix(kind, angle):
    """2x2 unitary ``exp(-i angle P / 2)``; ``angle`` may be an array, giving ``(..., 2, 2)``."""
    kind = GateKind(kind)
    half = np.asarray(angle, dtype=np.float64) / 2.0
    c, s = np.cos(half), np.sin(half)
    m = np.zeros(half.shape + (2, 2), dtype=np.complex128)
    if kind is GateKind.RX:
        m[..., 0, 0] = c
        m[..., 1, 1] = c
        m[..., 0, 1] = -1j * s
        m[..., 1, 0] = -1j * s
    elif kind is GateKind.RY:
        m[..., 0, 0] = c
        m[..., 1, 1] = c
        m[..., 0, 1] = -s
        m[..., 1, 0] = s
    elif kind is GateKind.RZ:
        m[..., 0, 0] = np.exp(-1j * half)
        m[..., 1, 1] = np.exp(1j * half)
    else:
        raise ValueError(f"{kind} is not a rotation")
    return m


def _apply_rotation(amps, n, qubit, kind, angle):
    batch = amps.shape[:-1]
    psi = amps.reshape(batch + (2**qubit, 2, 2 ** (n - qubit - 1)))
    angle = np.broadcast_to(np.asarray(angle, dtype=np.float64), batch)
    half = angle[..., None, None] / 2.0
    c, s = np.cos(half), np.sin(half)
    a0, a1 = psi[..., 0, :], psi[..., 1, :]
    out = np.empty_like(psi)
    if kind is GateKind.RX:
        out[..., 0, :] = c * a0 - 1j * s * a1
        out[..., 1, :] = -1j * s * a0 + c * a1
    elif kind is GateKind.RY:
        out[..., 0, :] = c * a0 - s * a1
        out[..., 1, :] = s * a0 + c * a1
    else:
        phase = np.exp(-1j * half)
        out[..., 0, :] = phase * a0
        out[..., 1, :] = np.conj(phase) * a1
    return out.reshape(amps.shape)


def _apply_cx(amps, n, control, target):
    batch = amps.shape[:-1]
    psi = amps.reshape(batch + (2,) * n).copy()
    nb = len(batch)
    idx = [slice(None)] * (nb + n)
    idx[nb + control] = 1
    sub = psi[tuple(idx)]
    # target axis index within ``sub`` shifts down once the control axis is gone
    t_axis = nb + target - (1 if target > control else 0)
    psi[tuple(idx)] = np.flip(sub, axis=t_axis)
    return psi.reshape(amps.shape)


def apply_gate(state: Statevector, gate: GateOp, angle=None) -> Statevector:
    """Apply ``gate`` with the already-resolved ``angle`` (None for CX)."""
    n = state.n_qubits
    if any(t >= n for t in gate.targets):
        raise ValueError(f"gate {gate} targets a qubit outside 0..{n - 1}")
    if gate.kind is GateKind.CX:
        if angle is not None:
            raise ValueError("CX takes no angle")
        return Statevector(n, _apply_cx(state.amplitudes, n, *gate.targets))
    if angle is None:
        raise ValueError(f"{gate.kind.value} requires an angle")
    return Statevector(n, _apply_rotation(state.amplitudes, n, gate.targets[0], gate.kind, angle))


def _resolve(gate, params, inputs):
    if gate.param_slot is not None:
        return params[..., gate.param_slot]
    if gate.input_slot is not None:
        return inputs[..., gate.input_slot]
    if gate.fixed_angle is not None:
        return gate.fixed_angle
    return None


def _as_angles(values, length, name):
    arr = np.asarray(values if values is not None else np.zeros(length), dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != length:
        raise ValueError(f"{name} must have trailing length {length}, got shape {arr.shape}")
    return arr


def run(circuit: CircuitSpec, params=None, inputs=None, initial=None) -> Statevector:
    """Apply the circuit's gates in order to ``|0...0>`` (or to ``initial``).

    ``params`` has trailing length ``param_count`` and ``inputs`` trailing
    length ``encoder_slots``; any leading dimensions are broadcast and become
    the batch shape of the returned state.
    """
    params = _as_angles(params, circuit.param_count, "params")
    inputs = _as_angles(inputs, circuit.encoder_slots, "inputs")
    batch = np.broadcast_shapes(params.shape[:-1], inputs.shape[:-1])
    n = circuit.n_qubits
    if initial is None:
        amps = zero_state(n, batch).amplitudes
    else:
        initial = np.asarray(initial, dtype=np.complex128)
        batch = np.broadcast_shapes(batch, initial.shape[:-1])
        amps = np.broadcast_to(initial, batch + (2**n,)).copy()
    for gate in circuit.gates:
        if gate.kind is GateKind.CX:
            amps = _apply_cx(amps, n, *gate.targets)
        else:
            amps = _apply_rotation(amps, n, gate.targets[0], gate.kind, _resolve(gate, params, inputs))
    return Statevector(n, amps)


def probabilities(state: Statevector) -> np.ndarray:
    amps = state.amplitudes
    return amps.real**2 + amps.imag**2


def z_signs(n_qubits: int) -> np.ndarray:
    """``(2**n, n)`` matrix with +1 where bit q of the outcome is 0, else -1."""
    k = np.arange(2**n_qubits)[:, None]
    bits = (k >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    return 1.0 - 2.0 * bits


def pauli_z_expectations(state: Statevector) -> np.ndarray:
    return probabilities(state) @ z_signs(state.n_qubits)


def _shift_batch(values, shift):
    """Stack ``values`` shifted by +/-shift in each slot: shape ``(2, m, ..., m)``."""
    m = values.shape[-1]
    eye = np.eye(m) * shift
    base = values[..., None, :]
    plus = base + eye
    minus = base - eye
    return np.stack([plus, minus])


def probability_jacobian(circuit: CircuitSpec, params=None, inputs=None, wrt="params"):
    """Exact Jacobian of the outcome probabilities by the parameter-shift rule.

    Returns shape ``(..., 2**n, m)`` where ``m`` is ``param_count`` (``wrt``
    = "params") or ``encoder_slots`` (``wrt`` = "inputs"). Every slot must
    feed exactly one rotation gate for the two-term rule to be exact; the
    ansatz builders guarantee that.
    """
    params = _as_angles(params, circuit.param_count, "params")
    inputs = _as_angles(inputs, circuit.encoder_slots, "inputs")
    if wrt == "params":
        shifted = _shift_batch(params, SHIFT)
        m = circuit.param_count
        probs = probabilities(run(circuit, shifted, inputs[..., None, :]))
    elif wrt == "inputs":
        shifted = _shift_batch(inputs, SHIFT)
        m = circuit.encoder_slots
        probs = probabilities(run(circuit, params[..., None, :], shifted))
    else:
        raise ValueError(f"wrt must be 'params' or 'inputs', got {wrt!r}")
    if m == 0:
        batch = np.broadcast_shapes(params.shape[:-1], inputs.shape[:-1])
        return np.zeros(batch + (2**circuit.n_qubits, 0))
    # probs: (2, ..., m, 2**n)
    jac = 0.5 * (probs[0] - probs[1])
    return np.swapaxes(jac, -1, -2)


def param_shift_gradient(circuit: CircuitSpec, params, inputs, cotangent) -> np.ndarray:
    """Vector-Jacobian product ``cotangent . dprobs/dparams`` (one circuit, no batch)."""
    cotangent = np.asarray(cotangent, dtype=np.float64)
    if cotangent.shape != (2**circuit.n_qubits,):
        raise ValueError(f"cotangent must have length {2 ** circuit.n_qubits}")
    if not np.any(cotangent):
        return np.zeros(circuit.param_count)
    jac = probability_jacobian(circuit, params, inputs, wrt="params")
    return cotangent @ jac


def split_encoder(circuit: CircuitSpec):
    """Split into ``(encoder, variational)`` circuits.

    The encoder is the leading run of gates driven by input slots; the
    remainder must not read inputs.
    """
    k = 0
    while k < len(circuit.gates) and circuit.gates[k].input_slot is not None:
        k += 1
    if any(g.input_slot is not None for g in circuit.gates[k:]):
        raise ValueError("encoder gates must precede all other gates")
    encoder = CircuitSpec(circuit.n_qubits, circuit.encoder_slots, circuit.gates[:k], 0)
    variational = CircuitSpec(circuit.n_qubits, 0, circuit.gates[k:], circuit.param_count)
    return encoder, variational


def circuit_unitary(circuit: CircuitSpec, params=None) -> np.ndarray:
    """Matrix ``U`` of an input-free circuit, shape ``(..., 2**n, 2**n)``."""
    if circuit.encoder_slots:
        raise ValueError("circuit_unitary needs a circuit without encoder slots")
    params = _as_angles(params, circuit.param_count, "params")
    dim = 2**circuit.n_qubits
    cols = run(circuit, params[..., None, :], initial=np.eye(dim)).amplitudes
    return np.swapaxes(cols, -1, -2)


def encoded_probabilities(circuit: CircuitSpec, params, inputs, jacobians=False):
    """Outcome probabilities for a bank of circuits over a batch of inputs.

    ``params`` is ``(G, param_count)`` (one row per circuit copy) and
    ``inputs`` is ``(B, encoder_slots)`` or ``(G, B, encoder_slots)``.
    The variational part is compiled once per copy into a unitary and
    applied to the encoded states, which is much cheaper than simulating
    every batch element gate by gate. With ``jacobians=True`` also returns
    the parameter-shift Jacobians w.r.t. params ``(G, B, 2**n, P)`` and
    inputs ``(G, B, 2**n, encoder_slots)``.
    """
    params = np.atleast_2d(np.asarray(params, dtype=np.float64))
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 2:
        inputs = inputs[None]
    encoder, variational = split_encoder(circuit)
    enc = run(encoder, inputs=inputs).amplitudes  # (G|1, B, d)
    unitary = circuit_unitary(variational, params)  # (G, d, d)
    probs = _probs_of(enc @ np.swapaxes(unitary, -1, -2))
    if not jacobians:
        return probs
    m = circuit.param_count
    shifted = circuit_unitary(variational, _shift_batch(params[:, None, :], SHIFT)[:, :, 0])
    # shifted: (2, G, P, d, d); enc -> (1, G|1, 1, B, d)
    out = _probs_of(enc[None, :, None] @ np.swapaxes(shifted, -1, -2))  # (2, G, P, B, d)
    jac_params = np.moveaxis(0.5 * (out[0] - out[1]), 1, -1)  # (G, B, d, P)
    enc_shift = run(encoder, inputs=_shift_batch(inputs, SHIFT)).amplitudes  # (2, G|1, B, S, d)
    out = _probs_of(enc_shift @ np.swapaxes(unitary, -1, -2)[None, :, None])  # (2, G, B, S, d)
    jac_inputs = np.swapaxes(0.5 * (out[0] - out[1]), -1, -2)  # (G, B, d, S)
    if m == 0:
        jac_params = np.zeros(probs.shape + (0,))
    return probs, jac_params, jac_inputs


def _probs_of(amps):
    return amps.real**2 + amps.imag**2
