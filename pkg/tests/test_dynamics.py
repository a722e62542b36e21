import math

import numpy as np
import pytest

from conftest import random_network
from symscatter.dynamics import (
    Layout,
    LatticeState,
    PacketSpec,
    SimParams,
    build_full_hamiltonian,
    compare_with_steady_state,
    evolve,
    group_velocity,
    init_packet,
    layout_for,
    max_growth_rate,
    measure_intensities,
    relative_deviation,
    run_packet,
    snapshots_csv,
)
from symscatter.errors import Instability, OutOfBand, PacketDoesNotFit, PacketNotCleared, ValidationError
from symscatter.models import get_model
from symscatter.network import LeadAttachment, ScatteringNetwork, two_port_network


def chain():
    return two_port_network([[0, 1], [1, 0]])


def test_full_hamiltonian_small():
    net = ScatteringNetwork(np.array([[0.5j]]), (LeadAttachment(1, 0, 0.7),), 1.3, omega0=2.0)
    h = build_full_hamiltonian(net, 3, min_length=1).toarray()
    want = np.array([[0.5j, 0.7, 0, 0], [0.7, 0, 1.3, 0], [0, 1.3, 0, 1.3], [0, 0, 1.3, 0]]) + 2.0 * np.eye(4)
    assert np.allclose(h, want)
    with pytest.raises(ValidationError):
        build_full_hamiltonian(net, 3)


def test_full_hamiltonian_structure():
    rng = np.random.default_rng(2)
    net = random_network(rng, hermitian=True)
    h = build_full_hamiltonian(net, 60).toarray()
    assert np.allclose(h, h.conj().T)
    dis = get_model("dissipative_figS1").network
    h = build_full_hamiltonian(dis, 60).toarray()
    lay = layout_for(dis, 60)
    assert np.allclose(h[:3, :3], dis.hc)
    row = np.zeros(lay.size, dtype=complex)
    row[:3] = dis.hc[0]
    row[lay.index(1, 1)] = 1.0
    assert np.allclose(h[0], row)


def test_layout():
    lay = Layout(3, (1, 3), 100)
    assert lay.size == 203
    assert lay.index(3, 1) == 103 and lay.label(103) == "lead3:1"
    assert lay.label(2) == "c3" and lay.index(None, 2) == 2
    with pytest.raises(ValidationError):
        lay.index(1, 0)


def test_norm_is_conserved_for_hermitian_lattice():
    net = chain()
    lay = layout_for(net, 200)
    state = init_packet(lay, PacketSpec(1, s0=100, sigma=10))
    out = evolve(state, build_full_hamiltonian(net, 200), 0.01, 40.0)
    assert abs(out.norm() - 1.0) <= 1e-6
    assert out.t == pytest.approx(40.0)


def test_zero_hamiltonian_leaves_state():
    net = ScatteringNetwork(np.zeros((1, 1)), (LeadAttachment(1, 0, 1.0),))
    lay = layout_for(net, 50)
    state = init_packet(lay, PacketSpec(1, s0=25, sigma=5))
    h = build_full_hamiltonian(net, 50) * 0
    assert np.array_equal(evolve(state, h, 0.01, 1.0).amplitudes, state.amplitudes)


def test_lossy_center_decays_monotonically():
    net = two_port_network([[-0.5j, 1], [1, -0.5j]])
    lay = layout_for(net, 100)
    norms = []
    evolve(init_packet(lay, PacketSpec(1, s0=40, sigma=8)), build_full_hamiltonian(net, 100), 0.01, 40.0,
           on_step=lambda s: norms.append(s.norm()))
    assert np.all(np.diff(norms) <= 1e-12)
    assert norms[-1] < 0.9


def test_group_velocity():
    net = chain()
    lay = layout_for(net, 400)
    state = init_packet(lay, PacketSpec(1, s0=250, sigma=20))
    d = np.arange(1, 401)

    def centroid(s):
        p = s.intensity()[lay.lead_slice(1)]
        return float(p @ d / p.sum())

    out = evolve(state, build_full_hamiltonian(net, 400), 0.01, 50.0)
    v = (centroid(state) - centroid(out)) / 50.0
    assert v == pytest.approx(group_velocity(1.0, -math.pi / 2), rel=0.02)
    assert group_velocity(1.0, -math.pi / 2) == 2.0


def test_packet_fit_and_momentum():
    lay = layout_for(chain(), 400)
    with pytest.raises(PacketDoesNotFit):
        init_packet(lay, PacketSpec(1, s0=10, sigma=20))
    with pytest.raises(PacketDoesNotFit):
        init_packet(lay, PacketSpec(1, s0=350, sigma=20))
    with pytest.raises(OutOfBand):
        init_packet(lay, PacketSpec(1, k0=0.5))
    state = init_packet(lay, PacketSpec(2))
    assert state.norm() == pytest.approx(1.0)
    assert state.center_intensity() == 0


def test_measure_requires_empty_center():
    lay = layout_for(chain(), 50)
    amps = np.zeros(lay.size, dtype=complex)
    amps[0] = 0.1
    with pytest.raises(PacketNotCleared):
        measure_intensities(LatticeState(amps, lay, 1.0), lay, 1)


def test_short_time_budget_is_reported():
    with pytest.raises(PacketNotCleared):
        # a weakly coupled resonance keeps the packet long after t_max
        slow = ScatteringNetwork(np.array([[0, 0.02], [0.02, 0]]), (LeadAttachment(1, 0, 0.1), LeadAttachment(2, 1, 0.1)))
        run_packet(slow, PacketSpec(1), SimParams(t_max=100.0))


def test_uniform_chain_transmits():
    cmp = compare_with_steady_state(chain(), PacketSpec(1))
    assert cmp.passed and not cmp.informational
    assert cmp.measured.transmitted[2] == pytest.approx(1.0, abs=1e-3)
    assert cmp.measured.reflected < 1e-3


def test_dissipative_forward_and_backward():
    net = get_model("dissipative_figS1").network
    fwd = compare_with_steady_state(net, PacketSpec(1))
    bwd = compare_with_steady_state(net, PacketSpec(3))
    assert fwd.expected_transmitted[3] == pytest.approx(4.0)
    assert bwd.expected_transmitted[1] == pytest.approx(0.0, abs=1e-20)
    assert fwd.passed and bwd.passed
    assert fwd.measured.transmitted[3] > 3.5 and bwd.measured.transmitted[1] < 0.05


def test_hermitian_flux_is_conserved():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    net = two_port_network(0.4 * (a + a.conj().T), sites=(0, 2))
    m = run_packet(net, PacketSpec(1)).measured
    assert m.reflected + m.transmitted[2] == pytest.approx(1.0, abs=1e-3)


def test_longer_leads_do_not_change_result():
    net = get_model("dissipative_figS1").network
    a = run_packet(net, PacketSpec(1), SimParams(length=400)).measured
    b = run_packet(net, PacketSpec(1), SimParams(length=800)).measured
    assert abs(a.reflected - b.reflected) < 1e-3
    assert abs(a.transmitted[3] - b.transmitted[3]) < 1e-3


@pytest.mark.slow
def test_wider_packets_converge():
    net = get_model("dissipative_figS1").network
    devs = []
    for sigma in (10.0, 20.0, 40.0):
        s0 = 5 * sigma
        cmp = compare_with_steady_state(net, PacketSpec(1, s0=s0, sigma=sigma), SimParams(length=int(s0 + 15 * sigma)))
        devs.append(cmp.deviation)
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 0.01


def test_narrow_packet_is_informational():
    cmp = compare_with_steady_state(chain(), PacketSpec(1, s0=50, sigma=5), SimParams(length=200))
    assert cmp.informational


@pytest.mark.parametrize("name", ["c1_phase", "q1_example"])
def test_gain_localized_modes_are_reported(name):
    net = get_model(name).network
    assert max_growth_rate(net) > 0.1
    with pytest.raises(Instability):
        run_packet(net, PacketSpec(1))


def test_stable_centers_have_no_growth():
    assert max_growth_rate(chain()) < 1e-9
    assert max_growth_rate(get_model("dissipative_figS1").network) < 1e-9


def test_relative_deviation():
    assert relative_deviation(4.1, 4.0) == pytest.approx(0.025)
    assert relative_deviation(0.02, 0.0) == pytest.approx(0.02)


def test_snapshots():
    net = chain()
    res = run_packet(net, PacketSpec(1, s0=50, sigma=10), SimParams(length=200, snapshot_every=5.0))
    assert len(res.snapshots) > 3
    assert res.snapshots[0][0] == 0.0
    text = snapshots_csv(res.snapshots[:1], res.layout)
    lines = text.splitlines()
    assert lines[0] == "time,site_label,re,im,intensity"
    assert len(lines) == 1 + res.layout.size
    assert lines[1].startswith("0,c1,")
