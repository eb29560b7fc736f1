"""Hardware-efficient ansatz and native-gate resource accounting."""
from __future__ import annotations

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Optional

from .qsim import CircuitSpec, GateKind, GateOp


class Entangler(str, Enum):
    RING = "ring"


class Architecture(str, Enum):
    LSTM_QGAN = "lstm-qgan"
    PATCH_GAN = "patchgan"


# Per-QNN gate counts of the PatchGAN baseline, recorded from its published
# totals (1680 / 56 one-qubit, 1344 / 56 two-qubit); no circuit is given for it.
PATCHGAN_1QG_PER_QNN = 30
PATCHGAN_2QG_PER_QNN = 24


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    reps: int = 2
    entangler: Optional[Entangler] = Entangler.RING

    def __post_init__(self):
        if self.entangler is not None:
            object.__setattr__(self, "entangler", Entangler(self.entangler))
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        if self.entangler is not None and self.n_qubits < 2:
            raise ValueError("a ring entangler needs at least 2 qubits")

    @property
    def param_count(self):
        return 3 * self.n_qubits * self.reps


def default_entangler(n_qubits):
    return Entangler.RING if n_qubits >= 2 else None


def build_hw_efficient(spec: AnsatzSpec) -> CircuitSpec:
    """RY angle encoder, then ``reps`` blocks of RX, RY, RZ layers and a CX ring.

    With ``entangler=None`` the CX layers are left out (single-qubit cells).

    Trainable slot layout is ``[rep][RX|RY|RZ][qubit]``, flattened row-major.
    """
    n = spec.n_qubits
    gates = [GateOp(GateKind.RY, (q,), input_slot=q) for q in range(n)]
    slot = 0
    for _ in range(spec.reps):
        for kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
            for q in range(n):
                gates.append(GateOp(kind, (q,), param_slot=slot))
                slot += 1
        if spec.entangler is Entangler.RING:
            gates.extend(GateOp(GateKind.CX, (q, (q + 1) % n)) for q in range(n))
    return CircuitSpec(n_qubits=n, encoder_slots=n, gates=gates, param_count=slot)


@dataclass(frozen=True)
class ResourceReport:
    qubits_per_qnn: int
    qnn_count: int
    total_qubits: int
    total_1qg: int
    total_2qg: int

    def as_dict(self):
        return asdict(self)


def count_resources(arch, n_qubits=None, reps=2, qnn_count=None) -> ResourceReport:
    """Native-gate totals for one full generator.

    For LSTM-QGAN the per-QNN counts come from the constructed circuit; the
    angle encoder is treated as data loading and left out of the one-qubit
    gate total. Defaults are the MNIST configurations (7 qubits x 8 QNNs and
    5 qubits x 56 QNNs).
    """
    arch = Architecture(arch)
    if arch is Architecture.LSTM_QGAN:
        n = 7 if n_qubits is None else n_qubits
        count = 8 if qnn_count is None else qnn_count
        trainable, _encoder, fixed, cx = build_hw_efficient(AnsatzSpec(n, reps)).count_gates()
        one_q, two_q = trainable + fixed, cx
    else:
        n = 5 if n_qubits is None else n_qubits
        count = 56 if qnn_count is None else qnn_count
        one_q, two_q = PATCHGAN_1QG_PER_QNN, PATCHGAN_2QG_PER_QNN
    return ResourceReport(
        qubits_per_qnn=n,
        qnn_count=count,
        total_qubits=n * count,
        total_1qg=one_q * count,
        total_2qg=two_q * count,
    )
