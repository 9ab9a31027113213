"""Three-junction flux qubit in a plane-wave basis, and the coupling switch.

The phases phi_+ and phi_- are expanded in e^{i(m phi_+ + n phi_-)}. The
potential

    U = -E_J [2 cos(phi_+) cos(phi_-) + alpha cos(2 pi f + 2 phi_+)]

only changes (m, n) by (+-1, +-1) or (+-2, 0), so m + n even is a closed
sector. That sector holds the physical single-valued wavefunctions in the
original junction phases and is the only one diagonalized.

Energies are in the units of ``E_C`` (GHz by default).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as la

from .bus import BusParams
from .errors import InvalidArgumentError, NumericalError
from .spectral import effective_coupling_sum, qubit_lamb_shifts

KINETIC_CONVENTIONS = ("derived", "literal")
F_ON = 0.5
F_OFF = 0.522


@dataclass(frozen=True)
class FluxQubitParams:
    E_C: float = 27.1
    E_J: float | None = None  # defaults to 35 E_C
    alpha: float = 0.8
    f: float = F_ON
    kinetic: str = "derived"

    def __post_init__(self):
        if self.E_J is None:
            object.__setattr__(self, "E_J", 35.0 * self.E_C)
        if not self.E_C > 0:
            raise InvalidArgumentError("E_C must be positive")
        if not self.E_J > 0:
            raise InvalidArgumentError("E_J must be positive")
        if not self.alpha > 0:
            raise InvalidArgumentError("alpha must be positive")
        if not 0.0 <= self.f <= 1.0:
            raise InvalidArgumentError("reduced flux f must lie in [0, 1]")
        if self.kinetic not in KINETIC_CONVENTIONS:
            raise InvalidArgumentError(f"kinetic must be one of {KINETIC_CONVENTIONS}")

    def at_flux(self, f: float) -> "FluxQubitParams":
        return replace(self, f=f)

    def kinetic_coefficients(self) -> tuple[float, float]:
        """Coefficients of P_+^2 and P_-^2.

        ``"derived"`` follows from the junction capacitances with
        E_C = e^2/2C: the phi_+ mode carries the larger (1 + 2 alpha) mass.
        ``"literal"`` swaps the masses and halves both coefficients.
        """
        c = self.E_C
        if self.kinetic == "derived":
            return 2 * c / (1 + 2 * self.alpha), 2 * c
        return c, c / (1 + 2 * self.alpha)


@dataclass(frozen=True)
class FluxSpectrum:
    levels: np.ndarray   # lowest eigenenergies, ascending
    dipole: float        # |<g| sin(2 pi f + 2 phi_+) |e>|
    f: float
    basis_size: int

    @property
    def omega_f(self) -> float:
        return float(self.levels[1] - self.levels[0])


def _plane_wave_index(K: int) -> list[tuple[int, int]]:
    return [(m, n) for m in range(-K, K + 1) for n in range(-K, K + 1) if (m + n) % 2 == 0]


def flux_hamiltonian(params: FluxQubitParams, basis_size: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian and the sin(2 pi f + 2 phi_+) operator in the truncated basis."""
    if basis_size < 1:
        raise InvalidArgumentError("basis_size must be >= 1")
    idx = _plane_wave_index(basis_size)
    pos = {s: i for i, s in enumerate(idx)}
    n = len(idx)
    cp, cm = params.kinetic_coefficients()
    ph = np.exp(2j * np.pi * params.f)
    H = np.zeros((n, n), dtype=complex)
    S = np.zeros((n, n), dtype=complex)
    for i, (m, k) in enumerate(idx):
        H[i, i] = cp * m * m + cm * k * k
        for dm in (1, -1):
            for dk in (1, -1):
                j = pos.get((m + dm, k + dk))
                if j is not None:
                    H[j, i] += -0.5 * params.E_J
        j = pos.get((m + 2, k))
        if j is not None:
            H[j, i] += -0.5 * params.E_J * params.alpha * ph
            S[j, i] += ph / 2j
        j = pos.get((m - 2, k))
        if j is not None:
            H[j, i] += -0.5 * params.E_J * params.alpha * np.conj(ph)
            S[j, i] += -np.conj(ph) / 2j
    return H, S


def _solve(params: FluxQubitParams, basis_size: int, n_levels: int):
    H, S = flux_hamiltonian(params, basis_size)
    E, V = la.eigh(H, subset_by_index=[0, max(n_levels, 2) - 1])
    dip = abs(np.vdot(V[:, 0], S @ V[:, 1]))
    return E, float(dip)


def flux_spectrum(params: FluxQubitParams, basis_size: int = 12, n_levels: int = 6,
                  rel_tol: float = 1e-4, check: bool = True) -> FluxSpectrum:
    """Lowest levels and |M| with a basis_size -> basis_size + 4 convergence check."""
    E, dip = _solve(params, basis_size, n_levels)
    if check:
        E2, _ = _solve(params, basis_size + 4, 2)
        scale = np.maximum(np.abs(E2[:2]), params.E_C)
        drift = np.abs(E[:2] - E2[:2]) / scale
        gap_drift = abs((E[1] - E[0]) - (E2[1] - E2[0])) / abs(E2[1] - E2[0])
        if drift.max() > rel_tol or gap_drift > rel_tol:
            raise NumericalError(
                f"flux spectrum not converged at basis_size={basis_size}: "
                f"level drift {drift.max():.2e}, gap drift {gap_drift:.2e}")
    return FluxSpectrum(np.asarray(E[:n_levels]), dip, params.f, basis_size)


def flux_sweep(params: FluxQubitParams, fluxes, basis_size: int = 12) -> list[FluxSpectrum]:
    return [flux_spectrum(params.at_flux(f), basis_size) for f in fluxes]


@dataclass(frozen=True)
class SwitchAnalysis:
    f_on: float
    f_off: float
    freq_ratio: float
    dipole_ratio: float
    lambda_eff_on: float
    lambda_eff_off: float           # both flux qubits off
    on_off_ratio: float
    lambda_eff_single: float        # only f_2 off
    on_off_ratio_single: float
    partner_shift: float            # shift of q_b minus shift of q_a, only f_2 off
    omega_f_on_ghz: float
    omega_f_off_ghz: float


def switched_params(bus: BusParams, freq_ratio: float, dipole_ratio: float,
                    which: tuple[int, ...] = (1, 2)) -> BusParams:
    """Bus with the listed flux qubits moved to the off point.

    Off means omega_f <- freq_ratio * omega_f and lambda_s <- dipole_ratio * lambda_s.
    """
    changes = {}
    for i in which:
        if i not in (1, 2):
            raise InvalidArgumentError("flux qubits are numbered 1 and 2")
        changes[f"omega_f{i}"] = getattr(bus, f"omega_f{i}") * freq_ratio
        changes[f"lambda_s{i}"] = getattr(bus, f"lambda_s{i}") * dipole_ratio
    return bus.replace(**changes)


def _ratio(on: float, off: float) -> float:
    return abs(on / off) if off != 0 else float("inf")


def switch_analysis(fq: FluxQubitParams, bus: BusParams, f_on: float = F_ON,
                    basis_size: int = 12, rwa: bool = False) -> SwitchAnalysis:
    """On/off behaviour of the bus when the flux qubits are biased to ``fq.f``.

    The off point enters the bus model only through the flux-qubit frequency
    and dipole ratios; every coupling is the summed second-order value.
    """
    on = flux_spectrum(fq.at_flux(f_on), basis_size)
    off = flux_spectrum(fq, basis_size)
    fr = off.omega_f / on.omega_f
    dr = off.dipole / on.dipole
    lam_on = effective_coupling_sum(bus, rwa=rwa).lambda_eff_sum
    lam_off = effective_coupling_sum(switched_params(bus, fr, dr), rwa=rwa).lambda_eff_sum
    single = switched_params(bus, fr, dr, which=(2,))
    lam_single = effective_coupling_sum(single, rwa=rwa).lambda_eff_sum
    shift_a, shift_b = qubit_lamb_shifts(single)
    return SwitchAnalysis(
        f_on=f_on, f_off=fq.f, freq_ratio=fr, dipole_ratio=dr,
        lambda_eff_on=lam_on, lambda_eff_off=lam_off, on_off_ratio=_ratio(lam_on, lam_off),
        lambda_eff_single=lam_single, on_off_ratio_single=_ratio(lam_on, lam_single),
        partner_shift=shift_b - shift_a,
        omega_f_on_ghz=on.omega_f, omega_f_off_ghz=off.omega_f)
