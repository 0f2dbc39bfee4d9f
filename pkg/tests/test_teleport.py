import io
import math

import numpy as np
import pytest

from conftest import random_qubits
from oracles import ideal_resonant_pulse
from spinchain.dynamics import StateVector, probabilities
from spinchain.spin_model import ChainParams, ParameterError, transition_frequency
from spinchain.teleport import (InputQubit, attach_entangled, build_program, cnot_32, fidelity, hadamard_3,
                                ideal_states, initial_state, measure_and_correct, outcome_probability,
                                protocol_targets, run_protocol)

FINAL_A = [0, 8, 5, 13]
FINAL_B = [12, 4, 9, 1]
NON_RESONANT = [2, 3, 6, 7, 10, 11, 14, 15]


@pytest.mark.parametrize("c0, c1, nonzero", [
    (1, 0, {0: 1}),
    (1 / 3, math.sqrt(8) / 3, {0: 1 / 3, 8: math.sqrt(8) / 3}),
    (1 / math.sqrt(2), 1 / math.sqrt(2), {0: 1 / math.sqrt(2), 8: 1 / math.sqrt(2)}),
])
def test_initial_state(c0, c1, nonzero):
    amps = initial_state(InputQubit(c0, c1)).amps
    expected = np.zeros(16, complex)
    for k, v in nonzero.items():
        expected[k] = v
    assert np.allclose(amps, expected, atol=1e-15)


def test_non_normalized_qubit_rejected():
    with pytest.raises(ParameterError):
        InputQubit(1, 1)
    with pytest.raises(ParameterError):
        InputQubit(0.6, 0.8 + 1e-9)


def test_program_layout(params):
    program = build_program(params, 0.1)
    assert len(program) == 7
    assert [len(program.stage(s)) for s in ("entangle", "cnot", "hadamard")] == [3, 2, 2]
    assert [p.label for p in program] == [(0, 4), (8, 12), (4, 5), (8, 12), (9, 13), (1, 9), (4, 12)]
    angles = [p.angle for p in program]
    assert angles == pytest.approx([math.pi / 2, math.pi / 2, math.pi, math.pi, math.pi, math.pi / 2, math.pi / 2])
    phases = [p.phase for p in program]
    assert phases == pytest.approx([-math.pi / 2, -math.pi / 2, -1.5 * math.pi, -1.5 * math.pi, 1.5 * math.pi,
                                    -1.5 * math.pi, -1.5 * math.pi])
    durations = [p.duration for p in program]
    assert durations == pytest.approx([2.5, 2.5, 5.0, 5.0, 5.0, 2.5, 2.5])


def test_program_carriers(params):
    program = build_program(params, 0.1)
    assert program.pulses[2].carrier == pytest.approx(109.6, abs=1e-12)
    assert program.pulses[2].carrier == abs(transition_frequency(12, 13, params))
    assert program.pulses[5].carrier == abs(transition_frequency(0, 8, params))
    for p in program:
        assert p.carrier == abs(transition_frequency(*p.label, params))


def test_program_carriers_follow_couplings():
    params = ChainParams((100.0, 200.0, 400.0, 800.0), 10.0, 1.3)
    program = build_program(params, 0.1)
    assert program.pulses[0].carrier == pytest.approx(400 + 20 + 1.3)


def test_ideal_states_trivial_branches():
    psi1, psi2, psi3 = ideal_states(InputQubit(1, 0))
    expected = np.zeros(16)
    expected[[0, 8, 5, 13]] = 0.5
    assert np.allclose(psi3, expected)
    _, psi2, _ = ideal_states(InputQubit(0, 1))
    assert set(np.flatnonzero(np.abs(psi2) > 0)) == {12, 9}


def test_ideal_state_probabilities(qubit):
    psi3 = ideal_states(qubit).final
    p = np.abs(psi3) ** 2
    assert np.allclose(p[FINAL_A], 1 / 36)
    assert np.allclose(p[FINAL_B], 2 / 9)
    assert np.allclose(p[NON_RESONANT + [2]], 0)


def test_gate_composition_matches_closed_forms():
    for q in random_qubits(100):
        psi1, psi2, psi3 = ideal_states(q)
        g1 = attach_entangled(q)
        g2 = cnot_32(g1)
        g3 = hadamard_3(g2)
        assert np.array_equal(g1, psi1) or np.allclose(g1, psi1, atol=1e-15, rtol=0)
        assert np.allclose(g2, psi2, atol=1e-15, rtol=0)
        assert np.allclose(g3, psi3, atol=1e-15, rtol=0)
        for psi in (psi1, psi2, psi3):
            assert abs(np.linalg.norm(psi) - 1) < 1e-14


def test_protocol_targets_from_resonant_gates(params):
    # exact rotations on every degenerate resonant pair reproduce the protocol-frame states
    program = build_program(params, 0.1)
    ends = program.stage_ends()
    for q in random_qubits(20, seed=1):
        amps = initial_state(q).amps
        states = []
        for p in program:
            amps = ideal_resonant_pulse(amps, p.angle, p.carrier, p.phase, params.omega, params.j1, params.j2)
            states.append(amps)
        targets = protocol_targets(q)
        for stage, target in zip(("entangle", "cnot", "hadamard"), targets):
            assert np.allclose(states[ends[stage] - 1], target, atol=1e-14)


def test_literal_final_state_differs_by_alice_phase(qubit):
    # only a Z on spin 2 separates the two, and Alice's measurement cannot see it
    ideal, target = ideal_states(qubit).final, protocol_targets(qubit).final
    assert fidelity(target, ideal).magnitude == pytest.approx(0.0, abs=1e-15)
    for outcome in ("00", "01", "10", "11"):
        assert outcome_probability(ideal, outcome) == pytest.approx(outcome_probability(target, outcome))


def test_fidelity_basics():
    a = StateVector.basis(3)
    f = fidelity(a, a.amps)
    assert (f.magnitude, f.squared) == (1.0, 1.0)
    assert fidelity(a, StateVector.basis(4).amps).magnitude == 0.0
    phased = StateVector(1j * a.amps)
    assert fidelity(phased, a.amps).overlap == pytest.approx(1j)


@pytest.mark.parametrize("target", ["ideal", "protocol"])
def test_teleportation_identity(target):
    for q in random_qubits(100, seed=2):
        psi3 = ideal_states(q).final if target == "ideal" else protocol_targets(q).final
        for outcome in ("00", "01", "10", "11"):
            assert outcome_probability(psi3, outcome) == pytest.approx(0.25)
            bob = measure_and_correct(psi3, outcome)
            assert abs(abs(np.vdot(q.amps, bob)) - 1) <= 1e-12


def test_branches_before_correction(qubit):
    psi3 = ideal_states(qubit).final
    c0, c1 = qubit.c0, qubit.c1
    raw = {o: 2 * psi3[[(int(o[0]) << 3) | (int(o[1]) << 2) | b for b in (0, 1)]] for o in ("00", "01", "10", "11")}
    assert np.allclose(raw["00"], [c0, c1])
    assert np.allclose(raw["01"], [c1, c0])
    assert np.allclose(raw["10"], [c0, -c1])
    assert np.allclose(raw["11"], [-c1, c0])
    assert np.allclose(measure_and_correct(psi3, "00"), [c0, c1])
    assert np.allclose(measure_and_correct(psi3, (0, 1)), [c0, c1])
    assert np.allclose(measure_and_correct(psi3, "11"), [c0, c1])


def test_zero_probability_outcome_rejected():
    psi3 = ideal_states(InputQubit(1, 0)).final
    with pytest.raises(ValueError):
        measure_and_correct(np.eye(16)[0], "11")
    with pytest.raises(ValueError):
        measure_and_correct(psi3, "2")


@pytest.fixture(scope="module")
def baseline():
    return run_protocol()


def test_baseline_final_probabilities(baseline):
    p = probabilities(baseline.final)
    assert np.all(np.abs(p[FINAL_A] - 1 / 36) <= 0.02)
    assert np.all(np.abs(p[FINAL_B] - 2 / 9) <= 0.02)
    assert np.all(p[NON_RESONANT] < 0.02)


def test_baseline_stage_probabilities(baseline):
    for stage, target in zip(("entangle", "cnot"), protocol_targets(baseline.qubit)):
        assert np.allclose(probabilities(baseline.stage_state(stage)), np.abs(target) ** 2, atol=0.02)


def test_baseline_fidelity_regression(baseline):
    # recorded from this implementation at the default parameters and step control
    f = baseline.fidelity
    assert f.magnitude == pytest.approx(0.998621757, abs=1e-6)
    assert f.magnitude > 0.99


def test_report(baseline):
    buf = io.StringIO()
    baseline.write_report(buf)
    text = buf.getvalue()
    for section in ("# pulses", "# probabilities", "# spin_expectations", "# fidelity"):
        assert section in text
    assert "4-5" in text and "109.6" in text


def test_leakage_bound(qubit):
    psi3 = ideal_states(qubit).final.copy()
    psi3[2] = 1e-3  # spin 1 excited in branch 00
    psi3 /= np.linalg.norm(psi3)
    with pytest.raises(ValueError, match="spin 1"):
        measure_and_correct(psi3, "00")
    bob = measure_and_correct(psi3, "00", max_leak=1e-4)
    assert abs(np.vdot(qubit.amps, bob)) == pytest.approx(1.0, abs=1e-12)
    # other branches carry no leakage
    assert abs(np.vdot(qubit.amps, measure_and_correct(psi3, "11"))) == pytest.approx(1.0, abs=1e-12)
