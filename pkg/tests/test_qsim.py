import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lstmqgan.ansatz import AnsatzSpec, build_hw_efficient
from lstmqgan.qsim import (
    CircuitSpec,
    GateKind,
    GateOp,
    Statevector,
    apply_gate,
    circuit_unitary,
    encoded_probabilities,
    param_shift_gradient,
    pauli_z_expectations,
    probabilities,
    probability_jacobian,
    run,
    split_encoder,
    zero_state,
)
from oracles import central_diff, dense_run, hw_efficient_gates, rel_err


@pytest.mark.parametrize("n", [1, 2, 7])
def test_zero_state(n):
    amps = zero_state(n).amplitudes
    assert amps.shape == (2**n,)
    assert amps[0] == 1 and np.count_nonzero(amps) == 1


@pytest.mark.parametrize("n", [0, 13, 2.5])
def test_zero_state_rejects_bad_counts(n):
    with pytest.raises(ValueError):
        zero_state(n)


def test_ry_pi_flips():
    out = apply_gate(zero_state(1), GateOp("RY", (0,), param_slot=0), np.pi)
    np.testing.assert_allclose(probabilities(out), [0, 1], atol=1e-15)


def test_cx_truth_table():
    psi = np.zeros(4, complex)
    psi[2] = 1  # |10>
    out = apply_gate(Statevector(2, psi), GateOp("CX", (0, 1)))
    np.testing.assert_array_equal(out.amplitudes, [0, 0, 0, 1])
    # control is qubit 1 here: |01> -> |11>
    psi = np.zeros(4, complex)
    psi[1] = 1
    out = apply_gate(Statevector(2, psi), GateOp("CX", (1, 0)))
    np.testing.assert_array_equal(out.amplitudes, [0, 0, 0, 1])


@pytest.mark.parametrize("theta", [0.0, 0.3, np.pi, -2.0])
def test_rz_keeps_probabilities(theta):
    out = apply_gate(zero_state(1), GateOp("RZ", (0,), param_slot=0), theta)
    np.testing.assert_allclose(probabilities(out), [1, 0])


def test_gate_argument_errors():
    with pytest.raises(ValueError, match="requires an angle"):
        apply_gate(zero_state(1), GateOp("RX", (0,), param_slot=0))
    with pytest.raises(ValueError, match="no angle"):
        apply_gate(zero_state(2), GateOp("CX", (0, 1)), 0.5)
    with pytest.raises(ValueError):
        GateOp("CX", (1, 1))
    with pytest.raises(ValueError):
        GateOp("RX", (0,), param_slot=0, fixed_angle=1.0)
    with pytest.raises(ValueError):
        apply_gate(zero_state(1), GateOp("RX", (3,), fixed_angle=1.0), 1.0)
    with pytest.raises(ValueError):
        CircuitSpec(2, 0, [GateOp("RX", (0,), param_slot=2)], param_count=1)


def test_run_empty_and_single_rotation():
    np.testing.assert_array_equal(run(CircuitSpec(3)).amplitudes, zero_state(3).amplitudes)
    circ = CircuitSpec(1, 0, [GateOp("RY", (0,), param_slot=0)], 1)
    np.testing.assert_allclose(probabilities(run(circ, [np.pi / 2])), [0.5, 0.5])


def test_run_length_mismatch():
    circ = build_hw_efficient(AnsatzSpec(3, 2))
    with pytest.raises(ValueError):
        run(circ, np.zeros(5), np.zeros(3))
    with pytest.raises(ValueError):
        run(circ, np.zeros(18), np.zeros(2))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ansatz_matches_dense_oracle(n, rng):
    reps = 2
    circ = build_hw_efficient(AnsatzSpec(n, reps))
    params = rng.uniform(-np.pi, np.pi, circ.param_count)
    inputs = rng.uniform(-np.pi, np.pi, n)
    expected = dense_run(hw_efficient_gates(n, reps, params, inputs), n)
    np.testing.assert_allclose(run(circ, params, inputs).amplitudes, expected, atol=1e-10)


def test_probabilities_examples(rng):
    np.testing.assert_allclose(probabilities(Statevector(1, [1, 0])), [1, 0])
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(probabilities(Statevector(1, [s, 1j * s])), [0.5, 0.5])
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    np.testing.assert_allclose(probabilities(Statevector(3, amps)), np.abs(amps) ** 2, atol=1e-15)


def test_pauli_z_expectations(rng):
    np.testing.assert_allclose(pauli_z_expectations(zero_state(1)), [1.0])
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(pauli_z_expectations(Statevector(1, [s, s])), [0.0], atol=1e-15)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    probs = np.abs(amps) ** 2
    expected = [
        sum(probs[k] * (1 if (k >> (2 - q)) & 1 == 0 else -1) for k in range(8)) for q in range(3)
    ]
    np.testing.assert_allclose(pauli_z_expectations(Statevector(3, amps)), expected, atol=1e-14)


def test_param_shift_single_ry():
    circ = CircuitSpec(1, 0, [GateOp("RY", (0,), param_slot=0)], 1)
    # P(1) = sin^2(theta/2); derivative sin(theta)/2
    np.testing.assert_allclose(param_shift_gradient(circ, [0.0], [], [0, 1]), [0.0], atol=1e-15)
    np.testing.assert_allclose(param_shift_gradient(circ, [np.pi / 2], [], [0, 1]), [0.5])


def test_param_shift_zero_cotangent(rng):
    circ = build_hw_efficient(AnsatzSpec(3, 2))
    g = param_shift_gradient(circ, rng.uniform(size=18), rng.uniform(size=3), np.zeros(8))
    np.testing.assert_array_equal(g, np.zeros(18))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_param_shift_matches_finite_differences(n, rng):
    circ = build_hw_efficient(AnsatzSpec(n, 2))
    params = rng.uniform(0, np.pi, circ.param_count)
    inputs = rng.uniform(-np.pi, np.pi, n)
    cot = rng.normal(size=2**n)

    def loss(p):
        return cot @ np.abs(dense_run(hw_efficient_gates(n, 2, p, inputs), n)) ** 2

    expected = central_diff(loss, params)
    assert rel_err(param_shift_gradient(circ, params, inputs, cot), expected) <= 1e-6


def test_input_jacobian_matches_finite_differences(rng):
    n = 3
    circ = build_hw_efficient(AnsatzSpec(n, 2))
    params = rng.uniform(0, np.pi, circ.param_count)
    inputs = rng.uniform(-np.pi, np.pi, n)
    jac = probability_jacobian(circ, params, inputs, wrt="inputs")
    for k in range(2**n):
        fd = central_diff(
            lambda a: np.abs(dense_run(hw_efficient_gates(n, 2, params, a), n))[k] ** 2, inputs
        )
        np.testing.assert_allclose(jac[k], fd, atol=1e-8)


def test_circuit_unitary_is_unitary(rng):
    enc, var = split_encoder(build_hw_efficient(AnsatzSpec(3, 2)))
    assert enc.count_gates() == (0, 3, 0, 0)
    u = circuit_unitary(var, rng.uniform(size=18))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


def test_encoded_probabilities_agree_with_gate_by_gate(rng):
    circ = build_hw_efficient(AnsatzSpec(3, 2))
    theta = rng.uniform(0, np.pi, (4, 18))
    angles = rng.uniform(-np.pi, np.pi, (6, 3))
    probs, jp, ja = encoded_probabilities(circ, theta, angles, jacobians=True)
    np.testing.assert_allclose(probs, probabilities(run(circ, theta[:, None], angles[None])), atol=1e-13)
    np.testing.assert_allclose(jp, probability_jacobian(circ, theta[:, None], angles[None]), atol=1e-13)
    np.testing.assert_allclose(
        ja, probability_jacobian(circ, theta[:, None], angles[None], wrt="inputs"), atol=1e-13
    )


gate_strategy = st.one_of(
    st.tuples(st.sampled_from(["RX", "RY", "RZ"]), st.integers(0, 5), st.floats(-10, 10)),
    st.tuples(st.just("CX"), st.integers(0, 5), st.integers(0, 5)),
)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 6), ops=st.lists(gate_strategy, max_size=40))
def test_norm_preserved(n, ops):
    state = zero_state(n)
    for kind, a, b in ops:
        if kind == "CX":
            c, t = a % n, b % n
            if n == 1 or c == t:
                continue
            state = apply_gate(state, GateOp(GateKind.CX, (c, t)))
        else:
            state = apply_gate(state, GateOp(kind, (a % n,), fixed_angle=b), b)
    p = probabilities(state)
    assert abs(p.sum() - 1) <= 1e-12
    assert np.all(p >= 0)
