import numpy as np
import pytest
import scipy.sparse as sp

import oracles
from pibus.bus import BusParams, ModelVariant, build_hamiltonian, bus_hamiltonian
from pibus.errors import HybridizationError, InvalidArgumentError, ResonanceError
from pibus.spectral import (
    bus_spectrum,
    converge_fock,
    diagonalize,
    doublet_half_splitting,
    dressed_qubit_frequency,
    effective_coupling,
    effective_coupling_split,
    effective_coupling_sum,
    effective_coupling_sw,
    full_spectrum,
    qubit_lamb_shifts,
    schrieffer_wolff,
    virtual_path_weights,
)

# Frozen from tests/oracles.py (independent numpy build of the same model,
# n_ph = 3). The sum uses the complete second-order kernel
# 1/(w - dE) - 1/(w + dE); the *_RWA table keeps the first term only.
SUM_FULL = {
    0.10: -5.286915405731906e-06,
    0.15: -3.0451229342193518e-05,
    0.20: -1.1806573102937624e-04,
    0.25: -3.99241944393613e-04,
    0.30: -1.5143673243006733e-03,
    0.32: -3.1193721254801944e-03,
    0.35: -1.9802587647984424e-01,
}
SUM_RWA_KERNEL = {
    0.10: -4.555691562600243e-06,
    0.20: -1.0443847649356913e-04,
    0.30: -1.424487665046514e-03,
    0.32: -2.9950969746319832e-03,
}
SPLIT_FULL = {
    0.05: 3.071164891288447e-07,
    0.10: 5.280790648098943e-06,
    0.15: 3.0404855557497612e-05,
    0.20: 1.1779257864175108e-04,
    0.25: 3.9744317455014944e-04,
    0.30: 1.4900595972182629e-03,
    0.32: 2.989187890340972e-03,
    0.35: 1.7902527852672767e-02,
}
SPLIT_BUS_RWA = {
    0.10: 7.131803889670607e-07,
    0.20: 1.555010803033774e-05,
    0.30: 1.6480238730154362e-04,
    0.32: 2.7961951681021446e-04,
}


# --- diagonalize -------------------------------------------------------------

def test_diagonalize_diagonal_matrix():
    s = diagonalize(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(s.energies, [1, 2, 3])
    np.testing.assert_allclose(np.abs(s.states), np.eye(3)[:, [1, 2, 0]])


def test_diagonalize_rejects_non_hermitian():
    with pytest.raises(InvalidArgumentError):
        diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_lanczos_matches_dense():
    H = build_hamiltonian(BusParams.at(0.3))
    dense = diagonalize(H)
    lanczos = diagonalize(sp.csr_matrix(H), k=6)
    np.testing.assert_allclose(lanczos.energies, dense.energies[:6], atol=1e-9)


def test_jaynes_cummings_splitting():
    g = 0.037
    a = oracles.ladder(4)
    H = 0.5 * np.kron(oracles.SZ, np.eye(4)) + np.kron(np.eye(2), a.T @ a)
    sp_ = np.array([[0.0, 0.0], [1.0, 0.0]])
    H += g * (np.kron(sp_, a) + np.kron(sp_.T, a.T))
    E = diagonalize(H).energies
    np.testing.assert_allclose(E[1:3], oracles.jaynes_cummings_doublet(g), atol=1e-12)


def test_spectrum_invariants_full_model():
    p = BusParams.at(0.3)
    H = build_hamiltonian(p)
    s = full_spectrum(p)
    V = s.states
    assert np.abs(V.conj().T @ V - np.eye(len(s))).max() < 1e-10
    resid = np.linalg.norm(H @ V - V * s.energies, axis=0).max()
    assert resid < 1e-9 * np.linalg.norm(H, 2)
    assert np.all(np.diff(s.energies) >= 0)
    with pytest.raises(ValueError):
        s.energies[0] = 0.0


def test_bus_spectrum_without_coupling():
    s = bus_spectrum(BusParams())
    assert s.energies[0] == pytest.approx(-3.0)
    np.testing.assert_allclose(s.gaps()[1:6], 3.0)
    assert s.gaps()[6] > 3.0 + 1


# --- dressed frequency ---------------------------------------------------------

def test_dressed_qubit_frequency_value():
    assert dressed_qubit_frequency(BusParams()) == pytest.approx(0.999375, abs=1e-15)
    assert dressed_qubit_frequency(BusParams(lam=0.0)) == 1.0


@pytest.mark.parametrize("lam", [0.02, 0.05, 0.1])
def test_dressed_frequency_matches_exact_single_mode(lam):
    n = 8
    a = oracles.ladder(n)
    H = 0.5 * np.kron(oracles.SZ, np.eye(n)) + 3.0 * np.kron(np.eye(2), a.T @ a)
    H += lam * np.kron(oracles.SX, a + a.T)
    E = np.linalg.eigvalsh(H)
    exact = E[1] - E[0]
    assert abs(exact - dressed_qubit_frequency(BusParams(lam=lam))) < 10 * lam ** 4


# --- summed coupling -------------------------------------------------------------

@pytest.mark.parametrize("ratio", sorted(SUM_FULL))
def test_sum_frozen_values(ratio):
    got = effective_coupling_sum(BusParams.at(ratio)).lambda_eff_sum
    assert got == pytest.approx(SUM_FULL[ratio], rel=1e-9)


@pytest.mark.parametrize("ratio", sorted(SUM_RWA_KERNEL))
def test_sum_rwa_kernel_frozen_values(ratio):
    got = effective_coupling_sum(BusParams.at(ratio), rwa=True).lambda_eff_sum
    assert got == pytest.approx(SUM_RWA_KERNEL[ratio], rel=1e-9)


def test_sum_vanishes_without_couplings():
    assert effective_coupling_sum(BusParams.at(0.3, lam=0.0)).lambda_eff_sum == 0
    assert effective_coupling_sum(BusParams.at(0.0)).lambda_eff_sum == 0


def test_sum_detects_resonance():
    p = BusParams.at(0.3)
    dE = bus_spectrum(p).gaps()
    k = int(np.flatnonzero(np.abs(bus_spectrum(p).gaps()) > 0)[0])
    with pytest.raises(ResonanceError, match="eigenstate"):
        effective_coupling_sum(p.replace(omega_q=float(dE[k])))


def test_sum_warns_near_resonance():
    with pytest.warns(UserWarning, match="dispersive"):
        effective_coupling_sum(BusParams.at(0.35))


def test_couplings_populated():
    ec = effective_coupling_sum(BusParams.at(0.3))
    assert ec.g_k_1.shape == ec.g_k_2.shape == (len(bus_spectrum(BusParams.at(0.3))),)
    assert ec.g_k_1[0] == 0


# --- splitting ---------------------------------------------------------------------

@pytest.mark.parametrize("ratio", sorted(SPLIT_FULL))
def test_split_frozen_values(ratio):
    got = effective_coupling_split(BusParams.at(ratio)).lambda_eff_split
    assert got == pytest.approx(SPLIT_FULL[ratio], rel=1e-6)


@pytest.mark.parametrize("ratio", sorted(SPLIT_BUS_RWA))
def test_split_bus_rwa_frozen_values(ratio):
    got = effective_coupling_split(BusParams.at(ratio), ModelVariant.BUS_RWA).lambda_eff_split
    assert got == pytest.approx(SPLIT_BUS_RWA[ratio], rel=1e-6)


@pytest.mark.parametrize("x", [0.0, 1e-4, 0.01, 0.2])
def test_split_of_direct_model_is_exact(x):
    ec = effective_coupling_split(None, ModelVariant.DIRECT, lambda_eff=x)
    assert ec.lambda_eff_split == pytest.approx(x, abs=1e-14)
    with pytest.raises(InvalidArgumentError):
        effective_coupling_split(None, ModelVariant.DIRECT)


def test_split_full_exceeds_rwa_at_03():
    p = BusParams.at(0.3)
    assert effective_coupling_split(p).lambda_eff_split > effective_coupling_split(p, "bus_rwa").lambda_eff_split


def test_split_sign_matches_sum_sign():
    ec = effective_coupling(BusParams.at(0.3))
    assert ec.split_sign == np.sign(ec.lambda_eff_sum) == -1


def test_split_zero_when_uncoupled():
    assert effective_coupling_split(BusParams.at(0.0)).lambda_eff_split == 0.0


def test_hybridized_doublet_raises():
    p = BusParams.at(0.35)
    from pibus.spectral import computational_reference
    e10 = computational_reference(p, (1, 0))
    e01 = computational_reference(p, (0, 1))
    with pytest.raises(HybridizationError):
        doublet_half_splitting(full_spectrum(p), (e10 + e01) / np.sqrt(2), (e10 - e01) / np.sqrt(2),
                               min_overlap=0.99)


# --- Schrieffer-Wolff -----------------------------------------------------------------

def test_sw_without_perturbation():
    H0 = np.diag([0.0, 1.0, 5.0, 6.0])
    P = np.diag([1.0, 1.0, 0.0, 0.0])
    res = schrieffer_wolff(H0, np.zeros((4, 4)), P)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(res.h_eff)), [0.0, 1.0], atol=1e-14)


def test_sw_dispersive_jaynes_cummings():
    wq, wc, g, n = 1.0, 3.0, 0.02, 4
    a = oracles.ladder(n)
    sp_ = np.array([[0.0, 0.0], [1.0, 0.0]])
    H0 = 0.5 * wq * np.kron(oracles.SZ, np.eye(n)) + wc * np.kron(np.eye(2), a.T @ a)
    V = g * (np.kron(sp_, a) + np.kron(sp_.T, a.T))
    vac = np.zeros(n)
    vac[0] = 1
    P = np.kron(np.eye(2), np.outer(vac, vac))
    Q = np.eye(2 * n) - P
    res = schrieffer_wolff(H0, P @ V @ Q + Q @ V @ P, P)
    e = np.sort(np.linalg.eigvalsh(res.h_eff))
    delta = wq - wc
    assert e[1] - e[0] == pytest.approx(wq + g ** 2 / delta, abs=1e-14)
    exact = np.linalg.eigvalsh(H0 + V)
    assert abs((e[1] - e[0]) - (exact[1] - exact[0])) < 10 * g ** 4
    assert res.commutator_residual < 1e-12


def test_sw_preconditions():
    H0 = np.diag([0.0, 0.0])
    V = np.array([[0.0, 0.1], [0.1, 0.0]])
    P = np.diag([1.0, 0.0])
    with pytest.raises(ResonanceError):
        schrieffer_wolff(H0, V, P)
    with pytest.raises(InvalidArgumentError, match="commute"):
        schrieffer_wolff(np.array([[0.0, 1.0], [1.0, 1.0]]), V, P)
    with pytest.raises(InvalidArgumentError, match="off-diagonal"):
        schrieffer_wolff(np.diag([0.0, 1.0]), np.eye(2), P)


@pytest.mark.parametrize("ratio", [0.1, 0.2, 0.3])
def test_sw_reproduces_sum(ratio):
    p = BusParams.at(ratio)
    sw = effective_coupling_sw(p).lambda_eff_sw
    assert sw == pytest.approx(SUM_FULL[ratio], rel=0.02)
    sw_rwa = effective_coupling_sw(p, rwa=True).lambda_eff_sw
    assert sw_rwa == pytest.approx(effective_coupling_sum(p, rwa=True).lambda_eff_sum, rel=1e-10)


# --- sweep properties -------------------------------------------------------------------

def test_cross_method_agreement_dispersive_range():
    for ratio in (0.1, 0.15, 0.2, 0.25, 0.3):
        ec = effective_coupling(BusParams.at(ratio))
        assert ec.max_relative_spread() < 0.05, ratio


def test_counter_rotating_boost_grows():
    ratios = [SPLIT_FULL[r] / SPLIT_BUS_RWA[r] for r in sorted(SPLIT_BUS_RWA)]
    assert all(r > 1 for r in ratios)
    assert all(b > a for a, b in zip(ratios, ratios[1:]))


def test_split_increasing_up_to_bus_resonance():
    grid = np.round(np.arange(0.025, 0.351, 0.025), 3)
    vals = [effective_coupling_split(BusParams.at(r)).lambda_eff_split for r in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.xfail(strict=True, reason="the doublet passes the lowest bus level near 0.35 omega_c; "
                                       "past it the splitting falls again")
def test_split_increasing_over_full_range():
    grid = np.round(np.arange(0.025, 0.401, 0.025), 3)
    vals = [effective_coupling_split(BusParams.at(r)).lambda_eff_split for r in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_small_coupling_scales_as_fourth_power():
    # the dominant path crosses four flux/resonator vertices
    lo = effective_coupling_split(BusParams.at(0.025)).lambda_eff_split
    hi = effective_coupling_split(BusParams.at(0.05)).lambda_eff_split
    assert hi / lo == pytest.approx(2 ** 4, rel=0.10)


@pytest.mark.xfail(strict=True, reason="quadratic scaling would need a two-vertex path; "
                                       "every connecting path has four")
def test_small_coupling_scales_quadratically():
    lo = effective_coupling_split(BusParams.at(0.025)).lambda_eff_split
    hi = effective_coupling_split(BusParams.at(0.05)).lambda_eff_split
    assert hi / lo == pytest.approx(2 ** 2, rel=0.10)


def test_fock_convergence_policy():
    assert converge_fock(BusParams.at(0.2)).n_ph == 3
    p = converge_fock(BusParams.at(0.32))
    assert p.n_ph == 4
    a = effective_coupling_sum(p).lambda_eff_sum
    b = effective_coupling_sum(p.replace(n_ph=5)).lambda_eff_sum
    assert abs(a - b) < 0.01 * abs(b)


def test_lamb_shifts_symmetric_bus():
    a, b = qubit_lamb_shifts(BusParams.at(0.3))
    assert a == pytest.approx(b, rel=1e-12)
    assert a < 0


# --- virtual paths ------------------------------------------------------------------------

def test_top_path_runs_through_every_bus_element():
    p = BusParams.at(0.3)
    paths = virtual_path_weights(p)
    top = paths[0]
    order = [tuple(np.flatnonzero(s[2:])) for s in top.intermediates]
    # C_1, f_1, C_3, f_2, C_2 with one excitation at a time and both data qubits down
    assert order == [(2,), (0,), (4,), (1,), (3,)]
    assert all(sum(s) == 1 and s[:2] == (0, 0) for s in top.intermediates)
    # closed form: lam^2 lambda_s^4 over five gaps of -2 omega_q
    assert top.amplitude == pytest.approx(p.lam ** 2 * p.lambda_s1 ** 4 / (-2.0) ** 5, rel=1e-12)
    assert all(abs(q.amplitude) <= abs(top.amplitude) for q in paths)


def test_rwa_paths_avoid_multi_excitation_bus_states():
    full = virtual_path_weights(BusParams.at(0.3), top=None)
    rwa = virtual_path_weights(BusParams.at(0.3), counter_rotating=False, top=None)
    assert any(sum(s[2:]) >= 2 for q in full for s in q.intermediates)
    assert len(rwa) == 1
    assert all(sum(s[2:]) <= 1 for q in rwa for s in q.intermediates)


def test_no_path_without_bus_coupling():
    assert virtual_path_weights(BusParams.at(0.0)) == []
