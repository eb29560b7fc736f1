import numpy as np
import pytest

from lstmqgan.ansatz import (
    AnsatzSpec,
    Architecture,
    ResourceReport,
    build_hw_efficient,
    count_resources,
)
from lstmqgan.qsim import GateKind, probabilities, run


def test_seven_qubit_qnn_gate_counts():
    trainable, encoder, fixed, cx = build_hw_efficient(AnsatzSpec(7, 2)).count_gates()
    assert (trainable, encoder, fixed, cx) == (42, 7, 0, 14)
    # 8 QNNs reproduce the published 336 one-qubit and 112 two-qubit totals
    assert 8 * trainable == 336 and 8 * cx == 112


def test_small_instance_counts():
    circ = build_hw_efficient(AnsatzSpec(2, 1))
    assert circ.count_gates() == (6, 2, 0, 2)
    assert circ.param_count == 6 and circ.encoder_slots == 2


def test_layer_order_and_ring():
    circ = build_hw_efficient(AnsatzSpec(3, 1))
    kinds = [g.kind for g in circ.gates]
    assert kinds[:3] == [GateKind.RY] * 3
    assert kinds[3:12] == [GateKind.RX] * 3 + [GateKind.RY] * 3 + [GateKind.RZ] * 3
    assert [g.targets for g in circ.gates[12:]] == [(0, 1), (1, 2), (2, 0)]
    assert [g.param_slot for g in circ.gates[3:12]] == list(range(9))


def test_zero_angles_is_identity():
    circ = build_hw_efficient(AnsatzSpec(3, 2))
    probs = probabilities(run(circ, np.zeros(18), np.zeros(3)))
    np.testing.assert_allclose(probs, np.eye(8)[0], atol=1e-15)


@pytest.mark.parametrize("kwargs", [dict(n_qubits=3, reps=0), dict(n_qubits=1, reps=1)])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        AnsatzSpec(**kwargs)


def test_single_qubit_without_entangler():
    circ = build_hw_efficient(AnsatzSpec(1, 2, entangler=None))
    assert circ.count_gates() == (6, 1, 0, 0)


def test_resources_lstm_qgan():
    assert count_resources("lstm-qgan") == ResourceReport(7, 8, 56, 336, 112)


def test_resources_patchgan():
    assert count_resources(Architecture.PATCH_GAN) == ResourceReport(5, 56, 280, 1680, 1344)


def test_resources_single_qnn():
    assert count_resources("lstm-qgan", qnn_count=1) == ResourceReport(7, 1, 7, 42, 14)


def test_lstm_resources_follow_the_circuit():
    report = count_resources("lstm-qgan", n_qubits=4, reps=3, qnn_count=2)
    assert report == ResourceReport(4, 2, 8, 2 * 36, 2 * 12)


def test_unknown_architecture():
    with pytest.raises(ValueError):
        count_resources("transformer")
