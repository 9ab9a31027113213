"""Logical subspace, two-qubit process tomography and the sqrt(iSWAP) fidelity.

Two-qubit operators use the basis order |00>, |01>, |10>, |11> with the
first label for q_a. A channel is stored as an array ``chan[i, j]`` holding
the 4x4 output for input ``|i><j|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bus import (
    BusParams,
    ModelVariant,
    build_direct_coupling,
    build_hamiltonian,
    coupling_operators,
    direct_space,
    full_space,
)
from .dynamics import DecoherenceParams, LindbladModel, lindblad_model, mesolve
from .errors import HybridizationError, InvalidArgumentError
from .spectral import Spectrum, computational_reference, diagonalize, effective_coupling_split
from .units import time_to_ns

D = 4
COMPUTATIONAL = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass
class LogicalSubspace:
    states: np.ndarray          # (N, 4) orthonormal columns
    eigen_indices: tuple[int, ...]  # dressed eigenstates spanning the logical states
    overlaps: np.ndarray        # |<logical|reference>|^2

    @property
    def projector(self) -> np.ndarray:
        return self.states @ self.states.conj().T


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def logical_subspace(spectrum: Spectrum, references: np.ndarray, min_overlap: float = 0.5) -> LogicalSubspace:
    """Dressed computational states closest to the bare ``references`` (N x 4 columns).

    |00> and |11> are single eigenstates. The near-degenerate |01>/|10> pair
    is the eigen-doublet with most weight on the two references, rotated
    within its span onto maximal overlap with them.
    """
    R = np.asarray(references, dtype=complex)
    amp = spectrum.states.conj().T @ R  # (n_eig, 4)
    weight = np.abs(amp) ** 2
    out = np.zeros_like(R)
    chosen = []
    for col in (0, 3):
        k = int(np.argmax(weight[:, col]))
        v = spectrum.states[:, k].astype(complex)
        phase = np.vdot(v, R[:, col])
        out[:, col] = v * (phase / abs(phase) if abs(phase) else 1.0)
        chosen.append(k)
    pair = np.argsort(weight[:, 1] + weight[:, 2])[-2:]
    if set(pair.tolist()) & set(chosen):
        raise HybridizationError("one-excitation doublet collides with |00> or |11> identification")
    Dm = spectrum.states[:, pair].astype(complex)
    out[:, 1:3] = Dm @ _polar_unitary(Dm.conj().T @ R[:, 1:3])
    chosen[1:1] = sorted(int(i) for i in pair)
    overlaps = np.abs(np.einsum("ni,ni->i", out.conj(), R)) ** 2
    if overlaps.min() < min_overlap:
        raise HybridizationError(f"logical state overlaps {np.round(overlaps, 4)} below {min_overlap}")
    return LogicalSubspace(out, tuple(chosen), overlaps)


def bus_references(params: BusParams, variant=ModelVariant.FULL) -> np.ndarray:
    return np.stack([computational_reference(params, occ, variant) for occ in COMPUTATIONAL], axis=1)


def ideal_sqrt_iswap() -> np.ndarray:
    s = 1 / np.sqrt(2)
    U = np.eye(4, dtype=complex)
    U[1:3, 1:3] = [[s, 1j * s], [1j * s, s]]
    return U


def unitary_channel(U: np.ndarray) -> np.ndarray:
    """chan[i, j] = U |i><j| U^dagger."""
    return np.einsum("ki,lj->ijkl", U, U.conj())


def process_channel(model: LindbladModel | Spectrum, subspace: LogicalSubspace, t_gate: float,
                    reduce: bool = True, **solver) -> np.ndarray:
    """Evolve the 16 operators |i><j| of the logical span for ``t_gate`` and project back.

    ``model`` is either a Spectrum (closed evolution, exact) or a dressed
    LindbladModel whose ``basis`` holds the retained eigenvectors. With
    ``reduce`` the model is first restricted to the dressed states the
    logical span can reach through its jump operators; at zero temperature
    that excludes everything above the logical manifold.
    """
    if t_gate < 0:
        raise InvalidArgumentError("t_gate must be non-negative")
    L = subspace.states
    if isinstance(model, Spectrum):
        c = model.states.conj().T @ L  # (n_eig, 4)
        phase = np.exp(-1j * model.energies * t_gate)
        U = c.conj().T @ (phase[:, None] * c)  # <L_k| e^{-iHt} |L_i>
        return unitary_channel(U)
    if model.basis is None:
        raise InvalidArgumentError("Lindblad model needs its dressed basis")
    c = model.basis.conj().T @ L  # (M, 4)
    lost = np.abs(np.linalg.norm(c, axis=0) - 1).max()
    if lost > 1e-8:
        raise InvalidArgumentError(f"logical states not contained in the retained basis (norm loss {lost:.1e})")
    if reduce:
        seeds = np.flatnonzero(np.abs(c).max(axis=1) > 1e-12)
        keep = model.reachable(seeds)
        model = model.restrict(keep)
        c = c[keep]
    rho0 = np.einsum("mi,nj->ijmn", c, c.conj()).reshape(16, *model.H.shape)
    traj = mesolve(model, rho0, [0.0, t_gate] if t_gate > 0 else [0.0], **solver)
    rho_t = traj.states[-1]
    out = np.einsum("mk,bmn,nl->bkl", c.conj(), rho_t, c)
    return out.reshape(4, 4, 4, 4)


def average_gate_fidelity(channel: np.ndarray, target: np.ndarray) -> float:
    """Haar-averaged <psi|U^dag E(|psi><psi|) U|psi> in closed form.

    Uses F = (d F_e + 1)/(d + 1) with the entanglement fidelity
    F_e = d^-2 sum_ij <i|U^dag E(|i><j|) U|j>; a trace-decreasing channel
    (leakage) simply lowers F_e.
    """
    d = target.shape[0]
    Fe = np.einsum("ki,ijkl,lj->", target.conj(), channel, target).real / d ** 2
    return float((d * Fe + 1) / (d + 1))


def z_phases(theta_a: float, theta_b: float) -> np.ndarray:
    """Diagonal of Rz(theta_a) x Rz(theta_b) with Rz(t) = diag(1, e^{it})."""
    return np.exp(1j * np.array([0.0, theta_b, theta_a, theta_a + theta_b]))


def apply_z_rotations(channel: np.ndarray, theta_a: float, theta_b: float) -> np.ndarray:
    r = z_phases(theta_a, theta_b)
    return channel * r[None, None, :, None] * r.conj()[None, None, None, :]


def optimize_phase_compensation(channel: np.ndarray, target: np.ndarray | None = None,
                                grid: int = 64) -> tuple[float, float, np.ndarray]:
    """Single-qubit z rotations after the channel that maximize the gate fidelity.

    Fidelity is a quadratic form in the phase vector, so a coarse grid over
    both angles is cheap; the best grid point is polished with Nelder-Mead.
    Angles are returned in [-pi, pi).
    """
    U = ideal_sqrt_iswap() if target is None else target
    # F_e(theta) = d^-2 sum_kl r_k conj(r_l) T[k, l]
    T = np.einsum("ki,ijkl,lj->kl", U.conj(), channel, U)

    def fe(ta, tb):
        r = z_phases(ta, tb)
        return (r @ T @ r.conj()).real

    angles = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    ta, tb = np.meshgrid(angles, angles, indexing="ij")
    ph = np.stack([np.zeros_like(ta), tb, ta, ta + tb], axis=-1)
    R = np.exp(1j * ph)
    vals = np.einsum("abk,kl,abl->ab", R, T, R.conj()).real
    ia, ib = np.unravel_index(np.argmax(vals), vals.shape)
    start = np.array([angles[ia], angles[ib]])
    res = minimize(lambda x: -fe(*x), start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
    best = res.x if -res.fun >= vals[ia, ib] else start
    theta_a, theta_b = (float((x + np.pi) % (2 * np.pi) - np.pi) for x in best)
    return theta_a, theta_b, apply_z_rotations(channel, theta_a, theta_b)


@dataclass
class FidelityResult:
    f_avg: float
    theta_a: float
    theta_b: float
    t_gate: float
    t_gate_ns: float
    leakage: float
    lambda_eff: float
    f_uncompensated: float


def leakage(channel: np.ndarray) -> float:
    """Mean population that leaves the logical span, over the four basis inputs."""
    return float(1 - np.mean([np.trace(channel[i, i]).real for i in range(D)]))


def sqrt_iswap_time(lambda_eff: float) -> float:
    """pi / (2 omega_R) with omega_R = 2 lambda_eff."""
    return np.pi / (4 * abs(lambda_eff))


def _finish(channel, t_gate, lambda_eff, omega_q_ghz) -> FidelityResult:
    target = ideal_sqrt_iswap()
    f0 = average_gate_fidelity(channel, target)
    ta, tb, comp = optimize_phase_compensation(channel, target)
    f = max(average_gate_fidelity(comp, target), f0)
    return FidelityResult(f, ta, tb, t_gate, time_to_ns(t_gate, omega_q_ghz), leakage(channel),
                          lambda_eff, f0)


def gate_pipeline(params: BusParams, dec: DecoherenceParams | None = None, M: int = 60,
                  t_gate: float | None = None, omega_q_ghz: float | None = None,
                  **solver) -> FidelityResult:
    """sqrt(iSWAP) through the bus: coupling -> gate time -> channel -> compensated fidelity."""
    ec = effective_coupling_split(params)
    lam = ec.split_sign * ec.lambda_eff_split
    t = sqrt_iswap_time(lam) if t_gate is None else t_gate
    ghz = omega_q_ghz or (dec.omega_q_ghz if dec else 4.0)
    spec = _full_spectrum(params)
    sub = logical_subspace(spec, bus_references(params))
    if dec is None:
        channel = process_channel(spec, sub, t)
    else:
        M = min(M, len(spec))
        model = lindblad_model(spec, coupling_operators(params), dec, M,
                               omega_c=params.omega_c, required=sub.eigen_indices)
        channel = process_channel(model, sub, t, **solver)
    return _finish(channel, t, lam, ghz)


def direct_pipeline(lambda_eff: float, dec: DecoherenceParams | None = None, omega_q: float = 1.0,
                    t_gate: float | None = None, omega_q_ghz: float | None = None,
                    **solver) -> FidelityResult:
    """Same gate with the ideal lambda_eff sx_a sx_b coupling and data-qubit noise only.

    ``lambda_eff`` is signed. Only a negative coupling produces sqrt(iSWAP)
    itself (a positive one gives its inverse, which z rotations after the gate
    cannot undo); the bus coupling is negative, so pass it through unchanged.
    """
    t = sqrt_iswap_time(lambda_eff) if t_gate is None else t_gate
    ghz = omega_q_ghz or (dec.omega_q_ghz if dec else 4.0)
    spec = diagonalize(build_direct_coupling(lambda_eff, omega_q))
    sub = logical_subspace(spec, np.eye(4))
    if dec is None:
        channel = process_channel(spec, sub, t)
    else:
        chans = coupling_operators(BusParams(omega_q=omega_q), space=direct_space())
        model = lindblad_model(spec, chans, dec, 4)
        channel = process_channel(model, sub, t, **solver)
    return _finish(channel, t, lambda_eff, ghz)


def _full_spectrum(params: BusParams) -> Spectrum:
    from .spectral import full_spectrum
    return full_spectrum(params)
