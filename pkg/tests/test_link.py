import math

import numpy as np
import pytest

from coilcoupler.config import build_link
from coilcoupler.errors import ConfigError, SolverError
from coilcoupler.inductance import self_inductances
from coilcoupler.link import (
    CURRENT_SOURCE,
    PASSIVE,
    CircuitSpec,
    WindingExcitation,
    coil_resistance,
    resonant_capacitance,
    solve_link,
    sweep_link,
)
from coilcoupler.sweep import SweepAxis, SweepConfig, run_sweep

F = 10e3
L1, L2 = 0.30, 0.015
R1, R2, RL = 40.0, 2.0, 100.0


def two_coil(M, r1=R1, r2=R2, tuned=True):
    L = np.array([[L1, M], [M, L2]])
    caps = (resonant_capacitance(L1, F), resonant_capacitance(L2, F)) if tuned else (None, None)
    return L, CircuitSpec(("Tx", "Rx"), (r1, r2), caps, "Rx", RL, F)


def drive_tx(amp=0.01, phase=0.0):
    return [WindingExcitation("Tx", CURRENT_SOURCE, amp, phase), WindingExcitation("Rx", PASSIVE)]


def closed_form_pte(M, r1=R1, r2=R2):
    """Resonant two-coil efficiency: X/(1+X) * R_L/(R_2+R_L), X = w^2 M^2 / (R_1 (R_2+R_L))."""
    w = 2 * math.pi * F
    X = w * w * M * M / (r1 * (r2 + RL))
    return X / (1 + X) * RL / (r2 + RL)


def test_resonant_capacitance():
    C = resonant_capacitance(L1, F)
    assert 1 / math.sqrt(L1 * C) == pytest.approx(2 * math.pi * F, rel=1e-14)


def test_coil_resistance_from_geometry(twocoil):
    rx = twocoil.coil("Rx")
    length = 1000 * 2 * math.pi * 0.007
    assert coil_resistance(rx) == pytest.approx(1.68e-8 * length / (math.pi * 1e-8), rel=1e-14)


def test_uncoupled_link_delivers_nothing():
    L, circ = two_coil(0.0)
    rep = solve_link(L, circ, drive_tx())
    assert rep.pdl == 0.0 and rep.pte == 0.0 and rep.emf == 0
    assert rep.input_power == pytest.approx(0.5 * R1 * 1e-4)


@pytest.mark.parametrize("k", [0.001, 0.01, 0.1])
def test_pte_matches_closed_form(k):
    M = k * math.sqrt(L1 * L2)
    L, circ = two_coil(M)
    rep = solve_link(L, circ, drive_tx())
    assert rep.pte == pytest.approx(closed_form_pte(M), rel=1e-9)


@pytest.mark.parametrize("k", [0.001, 0.01, 0.1])
def test_closed_form_equals_quality_factor_form(k):
    # same efficiency written with Q_1 = w L_1 / R_1, Q_2L = w L_2 / (R_2 + R_L), Q_L = w L_2 / R_L
    w = 2 * math.pi * F
    M = k * math.sqrt(L1 * L2)
    Q1, Q2L, QL = w * L1 / R1, w * L2 / (R2 + RL), w * L2 / RL
    kq = k * k * Q1 * Q2L
    assert closed_form_pte(M) == pytest.approx(kq / (1 + kq) * Q2L / QL, rel=1e-12)


def test_power_balance():
    L = np.array([[0.3, 0.002, -0.001], [0.002, 0.015, 0.0004], [-0.001, 0.0004, 0.2]])
    circ = CircuitSpec(("A", "B", "C"), (30.0, 2.0, 25.0), (resonant_capacitance(0.3, F), None, 1e-9), "B", RL, F)
    exc = [WindingExcitation("A", CURRENT_SOURCE, 0.02, 10.0), WindingExcitation("C", CURRENT_SOURCE, 0.01, 75.0)]
    rep = solve_link(L, circ, exc)
    assert rep.input_power == pytest.approx(rep.pdl + rep.dissipated.sum(), rel=1e-12)
    assert 0 <= rep.pte <= 1


def test_global_phase_shift_rotates_currents_only():
    L, circ = two_coil(0.002)
    a = solve_link(L, circ, drive_tx(phase=0.0))
    b = solve_link(L, circ, drive_tx(phase=37.0))
    rot = complex(math.cos(math.radians(37)), math.sin(math.radians(37)))
    assert np.allclose(b.currents, a.currents * rot, rtol=1e-12, atol=0)
    assert b.pdl == pytest.approx(a.pdl, rel=1e-12) and b.pte == pytest.approx(a.pte, rel=1e-12)


def test_transfer_reciprocity():
    M = 0.0015
    L = np.array([[L1, M], [M, L2]])
    forward = CircuitSpec(("Tx", "Rx"), (R1, R2), (None, None), "Rx", RL, F)
    backward = CircuitSpec(("Tx", "Rx"), (R1, R2), (None, None), "Tx", RL, F)
    e1 = solve_link(L, forward, [WindingExcitation("Tx", CURRENT_SOURCE, 1.0), WindingExcitation("Rx")]).emf
    e2 = solve_link(L, backward, [WindingExcitation("Rx", CURRENT_SOURCE, 1.0), WindingExcitation("Tx")]).emf
    assert e1 == e2 == pytest.approx(-1j * 2 * math.pi * F * M)


def test_role_swap_symmetric_link():
    L = np.array([[0.02, 0.0007], [0.0007, 0.02]])
    C = resonant_capacitance(0.02, F)
    forward = CircuitSpec(("A", "B"), (3.0, 3.0), (C, C), "B", RL, F)
    backward = CircuitSpec(("A", "B"), (3.0, 3.0), (C, C), "A", RL, F)
    a = solve_link(L, forward, [WindingExcitation("A", CURRENT_SOURCE, 0.01), WindingExcitation("B")])
    b = solve_link(L, backward, [WindingExcitation("B", CURRENT_SOURCE, 0.01), WindingExcitation("A")])
    assert b.pte == pytest.approx(a.pte, rel=1e-12)
    assert b.pdl == pytest.approx(a.pdl, rel=1e-12)


def test_threecoil_emf_and_phase_flip():
    L = np.array(
        [[0.0151e-2, 4e-6, 3.8e-6], [4e-6, 0.304e-2, -2.8e-4], [3.8e-6, -2.8e-4, 0.304e-2]]
    )
    circ = CircuitSpec(("Rx", "Tx1", "Tx2"), (1.0, 5.0, 5.0), (None, None, None), "Rx", RL, F)

    def emf(tx2_phase):
        exc = [
            WindingExcitation("Rx", CURRENT_SOURCE, 0.01, 0.0),
            WindingExcitation("Tx1", CURRENT_SOURCE, 0.01, 60.0),
            WindingExcitation("Tx2", CURRENT_SOURCE, 0.01, tx2_phase),
        ]
        return solve_link(L, circ, exc).emf

    assert abs(emf(120.0)) > 0
    assert abs(emf(300.0)) < abs(emf(120.0))


def test_preset_threecoil_link(threecoil):
    L_diag = self_inductances(threecoil.coils, threecoil.solver)
    circ, exc = build_link(threecoil, L_diag)
    cfg = SweepConfig((SweepAxis("x", 0.0, 0.0, 1), SweepAxis("z", 20.0, 20.0, 1)), "Rx")
    field = run_sweep(threecoil.coils, cfg, threecoil.solver)
    (rep,) = sweep_link(field, L_diag, circ, exc)
    assert abs(rep.emf) > 0
    assert rep.input_power > 0 and 0 <= rep.pte <= 1
    assert np.allclose(rep.current_amplitudes, 0.01)
    assert np.allclose(rep.current_phases, [0.0, 60.0, 120.0])

    # both transmitters couple to Rx with the same sign, so reversing one cancels
    k = field.coupling[0]
    assert np.sign(k[0, 1]) == np.sign(k[0, 2])
    flipped = [e if e.label != "Tx2" else WindingExcitation("Tx2", CURRENT_SOURCE, e.amplitude, e.phase + 180.0) for e in exc]
    assert abs(sweep_link(field, L_diag, circ, flipped)[0].emf) < abs(rep.emf)


def test_sweep_link_pdl_decays_on_axis(twocoil):
    cfg = SweepConfig((SweepAxis("z", 22.0, 82.0, 7),), "Rx")
    field = run_sweep(twocoil.coils, cfg, twocoil.solver)
    L_diag = self_inductances(twocoil.coils, twocoil.solver)
    circ, _ = build_link(twocoil, L_diag)
    reports = sweep_link(field, L_diag, circ, drive_tx())
    pdl = [r.pdl for r in reports]
    assert all(a > b for a, b in zip(pdl, pdl[1:]))
    assert all(0 <= r.pte <= 1 for r in reports)


def test_sweep_link_rebuilds_from_coupling(twocoil_field, twocoil):
    L_diag = self_inductances(twocoil.coils, twocoil.solver)
    circ, exc = build_link(twocoil, L_diag)
    stored = sweep_link(twocoil_field, L_diag, circ, exc)
    stripped = type(twocoil_field)(
        twocoil_field.labels, twocoil_field.moving_coil, twocoil_field.shape, twocoil_field.points, twocoil_field.coupling
    )
    rebuilt = sweep_link(stripped, L_diag, circ, exc)
    for a, b in zip(stored[:20], rebuilt[:20]):
        assert b.pdl == pytest.approx(a.pdl, rel=1e-9)


def test_singular_mesh():
    L = np.diag([0.3, 0.015, 0.1])
    circ = CircuitSpec(("A", "B", "C"), (10.0, 2.0, 0.0), (None, None, resonant_capacitance(0.1, F)), "B", RL, F)
    with pytest.raises(SolverError, match="singular"):
        solve_link(L, circ, [WindingExcitation("A", CURRENT_SOURCE, 1.0)])


def test_zero_input_power():
    L, circ = two_coil(0.0, r1=0.0)
    with pytest.raises(SolverError, match="zero active power"):
        solve_link(L, circ, drive_tx())


def test_no_source():
    L, circ = two_coil(0.001)
    with pytest.raises(SolverError):
        solve_link(L, circ, [WindingExcitation("Tx"), WindingExcitation("Rx")])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(mode=CURRENT_SOURCE),
        dict(mode=CURRENT_SOURCE, amplitude=-1.0),
        dict(mode=PASSIVE, amplitude=1.0),
        dict(mode="voltage", amplitude=1.0),
    ],
)
def test_excitation_validation(kwargs):
    with pytest.raises(ConfigError):
        WindingExcitation("Tx", **kwargs)


def test_unknown_excitation_label():
    L, circ = two_coil(0.001)
    with pytest.raises(ConfigError):
        solve_link(L, circ, [WindingExcitation("Nope", CURRENT_SOURCE, 1.0)])


@pytest.mark.parametrize(
    "kwargs",
    [dict(load_resistance=0.0), dict(frequency=-1.0), dict(receiver="X"), dict(resistance=(1.0,)), dict(capacitance=(None, 0.0))],
)
def test_circuit_validation(kwargs):
    base = dict(labels=("Tx", "Rx"), resistance=(1.0, 1.0), capacitance=(None, None), receiver="Rx", load_resistance=RL, frequency=F)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        CircuitSpec(**base)
