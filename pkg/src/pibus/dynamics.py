"""Unitary evolution and the zero-temperature dressed-basis Lindblad equation.

Bath operators are re-expressed between eigenstates of the full coupled
Hamiltonian. Relaxation keeps only the energy-lowering matrix elements
(T = 0); dephasing keeps the slow, near-diagonal part. Integration runs in
the interaction picture of the system Hamiltonian, so the adaptive
integrator only has to follow the weak dissipative drift.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .bus import DATA_LABELS, FLUX_LABELS, RESONATOR_LABELS, BusParams, Channel
from .errors import InvalidArgumentError, NumericalError
from .operators import dense
from .spectral import Spectrum, diagonalize
from .units import DEFAULT_OMEGA_Q_GHZ, angular_per_ns

RATE_CONVENTIONS = ("ordinary", "angular")


@dataclass(frozen=True)
class DecoherenceParams:
    """Coherence times in microseconds and the resonator quality factor.

    ``rate_convention`` fixes how a coherence time becomes a rate in units of
    omega_q. ``"ordinary"`` reads ``1/T`` as an ordinary frequency and applies
    the same 2*pi as every other GHz figure, giving ``gamma = 1/(T f_q)``;
    ``"angular"`` uses ``gamma = 1/(T * 2 pi f_q)``. The resonator rate is
    ``omega_c / Q`` either way.
    """

    data_t1_us: float = 70.0
    data_tphi_us: float = 92.0
    flux_t1_us: float = 20.0
    flux_tphi_us: float = 10.0
    resonator_q: float = 5e5
    omega_q_ghz: float = DEFAULT_OMEGA_Q_GHZ
    rate_convention: str = "ordinary"

    def __post_init__(self):
        for name in ("data_t1_us", "data_tphi_us", "flux_t1_us", "flux_tphi_us",
                     "resonator_q", "omega_q_ghz"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.rate_convention not in RATE_CONVENTIONS:
            raise InvalidArgumentError(f"rate_convention must be one of {RATE_CONVENTIONS}")

    def _rate(self, t_us: float) -> float:
        t_ns = t_us * 1e3
        if self.rate_convention == "ordinary":
            return 1.0 / (t_ns * self.omega_q_ghz)
        return 1.0 / (t_ns * angular_per_ns(self.omega_q_ghz))

    def rate(self, label: str, kind: str, omega_c: float = 3.0) -> float:
        """Rate (units of omega_q) for one bath channel.

        Dephasing acts through sigma_z at rate 1/(2 T_phi), which makes the
        0-1 coherence decay as exp(-t/T_phi).
        """
        if label in RESONATOR_LABELS:
            if kind != "relaxation":
                raise InvalidArgumentError("resonators only have a relaxation channel")
            return omega_c / self.resonator_q
        if label in DATA_LABELS:
            t1, tphi = self.data_t1_us, self.data_tphi_us
        elif label in FLUX_LABELS:
            t1, tphi = self.flux_t1_us, self.flux_tphi_us
        else:
            raise InvalidArgumentError(f"unknown channel label {label!r}")
        if kind == "relaxation":
            return self._rate(t1)
        if kind == "dephasing":
            return 0.5 * self._rate(tphi)
        raise InvalidArgumentError(f"unknown channel kind {kind!r}")


@dataclass
class LindbladModel:
    """Hamiltonian and weighted jump operators, all in one (truncated) basis."""

    H: np.ndarray
    jumps: list[tuple[np.ndarray, float]]
    truncation: int | None = None
    basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.H = dense(self.H)
        for L, rate in self.jumps:
            if rate < 0:
                raise InvalidArgumentError("jump rates must be non-negative")
            if L.shape != self.H.shape:
                raise InvalidArgumentError("jump operator shape does not match H")
        if self.truncation is None:
            self.truncation = self.H.shape[0]

    def reachable(self, seeds: Sequence[int], floor: float = 1e-14) -> list[int]:
        """Basis states a density matrix supported on ``seeds`` can populate.

        With a diagonal H this is the closure of ``seeds`` under the nonzero
        pattern of the jump operators. Outside it the state only couples back
        through fast-rotating cross terms of the anticommutator.
        """
        pattern = np.abs(self.H - np.diag(np.diag(self.H))) > floor
        for L, rate in self.jumps:
            if rate > 0:
                pattern |= np.abs(L) > floor
        keep = set(int(i) for i in seeds)
        stack = list(keep)
        while stack:
            k = stack.pop()
            for j in np.flatnonzero(pattern[:, k]):
                if int(j) not in keep:
                    keep.add(int(j))
                    stack.append(int(j))
        return sorted(keep)

    def restrict(self, keep: Sequence[int]) -> "LindbladModel":
        """Model on a subset of the basis states (jump operators restricted too)."""
        idx = np.asarray(keep, dtype=int)
        sub = np.ix_(idx, idx)
        jumps = [(L[sub], rate) for L, rate in self.jumps if np.any(L[sub] != 0)]
        basis = None if self.basis is None else self.basis[:, idx]
        return LindbladModel(self.H[sub], jumps, truncation=self.truncation, basis=basis)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, dim) kets or (T, [batch,] dim, dim) density matrices

    def populations(self, vector: np.ndarray) -> np.ndarray:
        """|<v|psi(t)>|^2 for kets, <v|rho(t)|v> for density matrices."""
        v = np.asarray(vector)
        if self.states.ndim == 2:
            return np.abs(self.states @ v.conj()) ** 2
        return np.einsum("i,...ij,j->...", v.conj(), self.states, v).real


def unitary_evolve(H, psi0: np.ndarray, times: Sequence[float],
                   spectrum: Spectrum | None = None) -> Trajectory:
    """Propagate a ket exactly through the eigen-decomposition of ``H``."""
    spec = spectrum if spectrum is not None else diagonalize(H)
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1) > 1e-10:
        raise InvalidArgumentError(f"initial state not normalized (norm {norm})")
    times = np.asarray(times, dtype=float)
    coeff = spec.states.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, spec.energies))
    states = (phases * coeff) @ spec.states.T
    return Trajectory(times, states)


def dressed_jump_operators(spectrum: Spectrum, channels: Sequence[Channel],
                           rates: DecoherenceParams, M: int, omega_c: float = 3.0,
                           required: Sequence[int] = (), slow_cutoff: float = 0.25,
                           floor: float = 1e-14) -> list[tuple[np.ndarray, float]]:
    """Express bath operators between the ``M`` lowest dressed states (T = 0).

    Relaxation channels keep ``<j|c|k>|j><k|`` for ``E_k - E_j > slow_cutoff``;
    dephasing channels keep the elements with ``|E_k - E_j| <= slow_cutoff``,
    i.e. the diagonal plus transitions inside near-degenerate manifolds such
    as the dressed |01>/|10> doublet. Both reduce to the bare sigma_-, a and
    sigma_z for an uncoupled system.
    """
    n = len(spectrum)
    if not 0 < M <= n:
        raise InvalidArgumentError(f"truncation M={M} outside 1..{n}")
    if any(i >= M for i in required):
        raise InvalidArgumentError(f"truncation M={M} drops required dressed states {sorted(required)}")
    B = spectrum.states[:, :M]
    E = spectrum.energies[:M]
    gap = E[None, :] - E[:, None]  # gap[j, k] = E_k - E_j
    down = gap > slow_cutoff
    slow = np.abs(gap) <= slow_cutoff
    out = []
    for ch in channels:
        rate = rates.rate(ch.label, ch.kind, omega_c)
        if rate == 0:
            continue
        C = B.conj().T @ (ch.operator @ B)
        L = np.where(down if ch.kind == "relaxation" else slow, C, 0.0)
        if np.abs(L).max(initial=0.0) > floor:
            out.append((L, rate))
    return out


def mesolve(model: LindbladModel, rho0: np.ndarray, times: Sequence[float],
            rtol: float = 1e-10, atol: float = 1e-12, method: str = "DOP853") -> Trajectory:
    """Integrate ``drho/dt = -i[H, rho] + sum_c gamma_c D[L_c] rho``.

    ``rho0`` may carry a leading batch axis; every slice is evolved with the
    same generator (the slices need not be physical states, which is how the
    process tomography pushes operator bases through). The integrator works
    in the interaction picture of ``H`` with adaptive step control.
    """
    E, U = np.linalg.eigh(model.H)
    rho0 = np.asarray(rho0, dtype=complex)
    batched = rho0.ndim == 3
    r0 = rho0 if batched else rho0[None]
    d = E.size
    if r0.shape[1:] != (d, d):
        raise InvalidArgumentError(f"rho0 shape {rho0.shape} does not match H ({d}x{d})")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0):
        raise InvalidArgumentError("times must be a non-empty ascending sequence")

    Ud = U.conj().T
    r0 = Ud @ r0 @ U
    jumps = [np.sqrt(rate) * (Ud @ L @ U) for L, rate in model.jumps if rate > 0]
    omega = E[:, None] - E[None, :]  # Bohr frequencies E_j - E_k

    if jumps:
        J = np.stack(jumps)
        Jd = J.conj().transpose(0, 2, 1)
        K = np.einsum("cij,cjk->ik", Jd, J)
        nb = r0.shape[0]

        def rhs(t, y):
            rho = y.reshape(nb, d, d)
            rot = np.exp(1j * omega * t)
            Jt = J * rot
            Kt = K * rot
            drho = -0.5 * (Kt @ rho + rho @ Kt.conj().T)
            for c in range(Jt.shape[0]):
                drho += Jt[c] @ rho @ Jt[c].conj().T
            return drho.reshape(-1)

        t0 = min(0.0, times[0])
        sol = solve_ivp(rhs, (t0, times[-1]), r0.reshape(-1), method=method,
                        t_eval=times, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise NumericalError(f"integration failed at t={sol.t[-1] if sol.t.size else t0}: {sol.message}")
        rho_i = sol.y.T.reshape(times.size, -1, d, d)
    else:
        rho_i = np.broadcast_to(r0, (times.size,) + r0.shape)

    phase = np.exp(-1j * omega[None, None] * times[:, None, None, None])
    states = U @ (rho_i * phase) @ Ud
    if not batched:
        states = states[:, 0]
    return Trajectory(times, states)


def lindblad_model(spectrum: Spectrum, channels: Sequence[Channel], rates: DecoherenceParams | None,
                   M: int, omega_c: float = 3.0, required: Sequence[int] = ()) -> LindbladModel:
    """Dressed-basis model on the ``M`` lowest eigenstates of a Hamiltonian."""
    jumps = [] if rates is None else dressed_jump_operators(
        spectrum, channels, rates, M, omega_c=omega_c, required=required)
    H = np.diag(spectrum.energies[:M]).astype(complex)
    return LindbladModel(H, jumps, truncation=M, basis=spectrum.states[:, :M])

