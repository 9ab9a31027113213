"""Eigenanalysis of the bus and the effective data-qubit coupling.

The effective XX coupling between the data qubits is obtained three ways:

* ``effective_coupling_sum`` -- second-order sum over bus eigenstates,
  ``sum_k g1_k g2_k / (omega_q - dE_k)`` with ``g_i_k = lam <k|X_i|0>``;
* ``effective_coupling_split`` -- half the splitting of the dressed
  ``|10>, |01>`` doublet of the full Hamiltonian;
* ``effective_coupling_sw`` -- first-order Schrieffer-Wolff reduction onto
  the bus ground state.
"""
from __future__ import annotations

import heapq
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .bus import (
    DATA_LABELS,
    BusParams,
    ModelVariant,
    build_direct_coupling,
    build_hamiltonian,
    bus_hamiltonian,
    bus_space,
    data_coupling_operator,
    data_qubit_energies,
    full_space,
)
from .errors import HybridizationError, InvalidArgumentError, NumericalError, ResonanceError
from .operators import CompositeSpace, dense

G_FLOOR = 1e-14


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and the matching eigenvectors (as columns)."""

    energies: np.ndarray
    states: np.ndarray
    space: CompositeSpace | None = None

    def __post_init__(self):
        self.energies.setflags(write=False)
        self.states.setflags(write=False)

    def __len__(self):
        return len(self.energies)

    def ket(self, k: int) -> np.ndarray:
        return self.states[:, k]

    def gaps(self) -> np.ndarray:
        return self.energies - self.energies[0]


def diagonalize(H, k: int | None = None, space: CompositeSpace | None = None,
                herm_tol: float = 1e-12) -> Spectrum:
    """Full dense decomposition, or the lowest ``k`` pairs by Lanczos for sparse input."""
    n = H.shape[0]
    if sp.issparse(H):
        asym = sla.norm(H - H.conj().T)
        scale = sla.norm(H)
    else:
        H = np.asarray(H)
        asym = np.linalg.norm(H - H.conj().T)
        scale = np.linalg.norm(H)
    if scale and asym / scale > herm_tol:
        raise InvalidArgumentError(f"Hamiltonian is not Hermitian (relative asymmetry {asym / scale:.2e})")
    if k is None or k >= n - 1 or not sp.issparse(H):
        m = dense(H)
        if np.isrealobj(m) or not np.abs(m.imag).any():
            m = m.real
        E, V = la.eigh(m)
        if k is not None:
            E, V = E[:k], V[:, :k]
    else:
        try:
            E, V = sla.eigsh(H, k=k, which="SA", tol=1e-12, maxiter=50 * n)
        except sla.ArpackNoConvergence as exc:
            raise NumericalError(
                f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} pairs found") from exc
        order = np.argsort(E)
        E, V = E[order], V[:, order]
    return Spectrum(np.ascontiguousarray(E), np.ascontiguousarray(V), space)


# ---------------------------------------------------------------------------
# bus spectrum and couplings

@lru_cache(maxsize=64)
def bus_spectrum(params: BusParams, variant: ModelVariant = ModelVariant.FULL) -> Spectrum:
    return diagonalize(bus_hamiltonian(params, ModelVariant(variant)), space=bus_space(params))


@lru_cache(maxsize=16)
def full_spectrum(params: BusParams, variant: ModelVariant = ModelVariant.FULL) -> Spectrum:
    return diagonalize(build_hamiltonian(params, ModelVariant(variant)), space=full_space(params))


def bus_couplings(params: BusParams, variant=ModelVariant.FULL) -> tuple[np.ndarray, np.ndarray]:
    """g_k^(i) = lam <k|X_i|0> for i = 1, 2 over every bus eigenstate k."""
    spec = bus_spectrum(params, ModelVariant(variant))
    space = spec.space
    ground = spec.ket(0)
    g = []
    for cav in ("C_1", "C_2"):
        x = space.op("quadrature", cav)
        g.append(params.lam * (spec.states.conj().T @ (x @ ground)).real)
    g1, g2 = g
    g1[np.abs(g1) < G_FLOOR] = 0.0
    g2[np.abs(g2) < G_FLOOR] = 0.0
    return g1, g2


def dressed_qubit_frequency(params: BusParams) -> float:
    """Data-qubit frequency shifted by its dispersive coupling to one resonator."""
    return params.omega_q - params.lam ** 2 / (params.omega_c + params.omega_q)


def qubit_lamb_shifts(params: BusParams, variant=ModelVariant.FULL) -> tuple[float, float]:
    """Second-order transition-frequency shifts of q_a and q_b from the bus.

    Includes both the rotating and counter-rotating virtual processes:
    ``sum_k g_k^2 [1/(omega_q - dE_k) + 1/(omega_q + dE_k)]``.
    """
    spec = bus_spectrum(params, ModelVariant(variant))
    dE = spec.gaps()[1:]
    g1, g2 = bus_couplings(params, variant)
    w = params.omega_q
    kernel = 1.0 / (w - dE) + 1.0 / (w + dE)
    return float(np.sum(g1[1:] ** 2 * kernel)), float(np.sum(g2[1:] ** 2 * kernel))


@dataclass
class EffectiveCoupling:
    lambda_s: float
    lambda_eff_sum: float | None = None
    lambda_eff_split: float | None = None
    lambda_eff_sw: float | None = None
    split_sign: int | None = None  # sign of E_plus - E_minus, i.e. of the coupling
    g_k_1: np.ndarray | None = field(default=None, repr=False)
    g_k_2: np.ndarray | None = field(default=None, repr=False)

    def values(self) -> dict[str, float]:
        out = {"sum": self.lambda_eff_sum, "split": self.lambda_eff_split, "sw": self.lambda_eff_sw}
        return {k: v for k, v in out.items() if v is not None}

    def max_relative_spread(self) -> float:
        """Largest pairwise |a - b| / max(|a|, |b|) over the populated magnitudes."""
        vals = [abs(v) for v in self.values().values()]
        worst = 0.0
        for i, a in enumerate(vals):
            for b in vals[i + 1:]:
                top = max(a, b)
                if top:
                    worst = max(worst, abs(a - b) / top)
        return worst


def effective_coupling_sum(params: BusParams, variant=ModelVariant.FULL, rwa: bool = False,
                           resonance_tol: float = 1e-9, dispersive_factor: float = 10.0) -> EffectiveCoupling:
    """Second-order effective coupling summed over all bus eigenstates.

    With ``rwa=True`` only the flip-flop path through each bus eigenstate is
    kept, ``sum_k g1 g2 / (omega_q - dE_k)``. The default adds the
    counter-rotating path through ``|11>|k>``, which contributes
    ``-g1 g2 / (omega_q + dE_k)``; at ``omega_c = 3 omega_q`` that term is
    not small and the complete sum tracks the exact splitting far better.

    The sign follows the operator phases of the model (negative for the
    default bus); the gate only depends on its magnitude.
    """
    spec = bus_spectrum(params, ModelVariant(variant))
    g1, g2 = bus_couplings(params, variant)
    dE = spec.gaps()
    det = params.omega_q - dE
    active = (np.abs(g1) > 0) | (np.abs(g2) > 0)
    active[0] = False
    resonant = active & (np.abs(det) < resonance_tol)
    if resonant.any():
        k = int(np.flatnonzero(resonant)[0])
        raise ResonanceError(f"bus eigenstate {k} (dE={dE[k]:.6g}) is resonant with omega_q")
    gmax = np.maximum(np.abs(g1), np.abs(g2))
    weak = active & (np.abs(det) < dispersive_factor * gmax)
    if weak.any():
        k = int(np.flatnonzero(weak)[0])
        warnings.warn(
            f"dispersive condition violated at bus eigenstate {k}: "
            f"|omega_q - dE|={abs(det[k]):.3g} vs g={gmax[k]:.3g}", stacklevel=2)
    kernel = 1.0 / np.where(active, det, 1.0)
    if not rwa:
        kernel = kernel - 1.0 / (params.omega_q + dE)
    terms = np.where(active, g1 * g2 * kernel, 0.0)
    return EffectiveCoupling(lambda_s=params.lambda_s1, lambda_eff_sum=float(terms.sum()),
                             g_k_1=g1, g_k_2=g2)


def computational_reference(params: BusParams, occupations: tuple[int, int],
                            variant=ModelVariant.FULL) -> np.ndarray:
    """|n_a, n_b> tensor the bus ground state, as a full-space vector."""
    bus0 = bus_spectrum(params, ModelVariant(variant)).ket(0)
    d = params.data_levels
    qa = np.zeros(d)
    qb = np.zeros(d)
    qa[occupations[0]] = 1.0
    qb[occupations[1]] = 1.0
    return np.kron(np.kron(qa, qb), bus0)


def doublet_half_splitting(spectrum: Spectrum, plus: np.ndarray, minus: np.ndarray,
                           min_overlap: float = 0.5) -> tuple[float, tuple[int, int], tuple[float, float]]:
    """Half the energy gap between the eigenstates closest to ``plus`` and ``minus``.

    An exactly degenerate pair (no coupling) gives zero; the eigensolver may
    then return any rotation of the doublet, so overlaps are not checked.
    """
    span = np.abs(spectrum.states.conj().T @ plus) ** 2 + np.abs(spectrum.states.conj().T @ minus) ** 2
    pair = np.argsort(span)[-2:]
    if span[pair].sum() > 2 * min_overlap and \
            abs(spectrum.energies[pair[0]] - spectrum.energies[pair[1]]) <= 1e-12 * max(1.0, np.abs(spectrum.energies).max()):
        return 0.0, (int(pair[1]), int(pair[0])), (float(span[pair[1]]), float(span[pair[0]]))
    op = np.abs(spectrum.states.conj().T @ plus) ** 2
    om = np.abs(spectrum.states.conj().T @ minus) ** 2
    ip, im = int(np.argmax(op)), int(np.argmax(om))
    if op[ip] < min_overlap or om[im] < min_overlap or ip == im:
        raise HybridizationError(
            f"doublet not identifiable: overlaps {op[ip]:.3f}, {om[im]:.3f} "
            f"(states {ip}, {im})")
    half = abs(spectrum.energies[ip] - spectrum.energies[im]) / 2
    return float(half), (ip, im), (float(op[ip]), float(om[im]))


def effective_coupling_split(params: BusParams | None, variant=ModelVariant.FULL,
                             lambda_eff: float | None = None) -> EffectiveCoupling:
    """Half the splitting of the symmetric/antisymmetric one-excitation doublet.

    The doublet is picked by overlap with ``(|10> +- |01>) |0~>_bus`` rather
    than by energy order, so it survives level crossings. For the direct
    model pass ``variant="direct"`` and ``lambda_eff``.
    """
    variant = ModelVariant(variant)
    if variant is ModelVariant.DIRECT:
        if lambda_eff is None:
            raise InvalidArgumentError("direct variant needs lambda_eff")
        omega_q = params.omega_q if params is not None else 1.0
        spec = diagonalize(build_direct_coupling(lambda_eff, omega_q))
        e10, e01 = np.eye(4)[2], np.eye(4)[1]
        lam_s = params.lambda_s1 if params is not None else 0.0
    else:
        spec = full_spectrum(params, variant)
        e10 = computational_reference(params, (1, 0), variant)
        e01 = computational_reference(params, (0, 1), variant)
        lam_s = params.lambda_s1
    half, (ip, im), _ = doublet_half_splitting(spec, (e10 + e01) / np.sqrt(2), (e10 - e01) / np.sqrt(2))
    sign = 1 if spec.energies[ip] >= spec.energies[im] else -1
    return EffectiveCoupling(lambda_s=lam_s, lambda_eff_split=half, split_sign=sign)


# ---------------------------------------------------------------------------
# Schrieffer-Wolff

@dataclass
class SchriefferWolffResult:
    h_eff: np.ndarray          # effective Hamiltonian in the basis below
    basis: np.ndarray          # orthonormal columns spanning range(P)
    generator: np.ndarray      # anti-Hermitian S on the full space
    commutator_residual: float  # ||[H0, S] - V|| / ||V||


def _range_basis(P: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    w, U = la.eigh((P + P.conj().T) / 2)
    return U[:, w > 0.5]


def schrieffer_wolff(H0, V, P, basis: np.ndarray | None = None,
                     tol: float = 1e-10, gap_tol: float = 1e-8) -> SchriefferWolffResult:
    """Lowest-order Schrieffer-Wolff reduction of ``H0 + V`` onto ``range(P)``.

    Solves ``[H0, S] = V`` for the block-off-diagonal generator in the
    sector-adapted eigenbasis of ``H0`` and returns
    ``P H0 P + 1/2 P [S, V] P`` expressed in ``basis`` (defaults to an
    eigenbasis of ``P``).
    """
    H0, V, P = dense(H0), dense(V), dense(P)
    n = H0.shape[0]
    Q = np.eye(n) - P
    h_scale = max(np.linalg.norm(H0), 1.0)
    if np.linalg.norm(H0 @ P - P @ H0) > tol * h_scale:
        raise InvalidArgumentError("H0 does not commute with P")
    v_scale = max(np.linalg.norm(V), 1.0)
    if np.linalg.norm(P @ V @ P) > tol * v_scale or np.linalg.norm(Q @ V @ Q) > tol * v_scale:
        raise InvalidArgumentError("V is not block-off-diagonal with respect to P")

    Bp = _range_basis(P) if basis is None else np.asarray(basis)
    Bq = _range_basis(Q)
    Ep, Up = la.eigh(Bp.conj().T @ H0 @ Bp)
    Eq, Uq = la.eigh(Bq.conj().T @ H0 @ Bq)
    Wp, Wq = Bp @ Up, Bq @ Uq
    Vpq = Wp.conj().T @ V @ Wq
    denom = Ep[:, None] - Eq[None, :]
    small = (np.abs(denom) < gap_tol) & (np.abs(Vpq) > G_FLOOR)
    if small.any():
        pairs = [(float(Ep[i]), float(Eq[j])) for i, j in zip(*np.nonzero(small))]
        raise ResonanceError(f"P/Q degeneracies with nonzero coupling: {pairs[:5]}")
    Spq = np.where(np.abs(Vpq) > 0, Vpq / np.where(small, 1.0, denom), 0.0)
    S = Wp @ Spq @ Wq.conj().T
    S = S - S.conj().T
    resid = np.linalg.norm(H0 @ S - S @ H0 - V) / v_scale
    if resid > 1e-8:
        raise NumericalError(f"generator does not solve [H0, S] = V (residual {resid:.2e})")
    comm = S @ V - V @ S
    h_eff = Bp.conj().T @ (H0 + 0.5 * comm) @ Bp
    return SchriefferWolffResult(h_eff, Bp, S, float(resid))


def _pi_connector_sw_blocks(params: BusParams, variant=ModelVariant.FULL, rwa: bool = False):
    """H0, V, P and the computational basis for the bus-ground-state projection.

    With ``rwa=True`` the coupling keeps only ``g_k sigma_- |k><0| + h.c.``;
    otherwise the full ``g_k sigma_x (|k><0| + |0><k|)`` is used.
    """
    spec = bus_spectrum(params, ModelVariant(variant))
    dq = params.data_levels
    nb = len(spec)
    # data-qubit product basis x bus eigenbasis: H_qb + H_Pi is diagonal there
    Eb = spec.energies
    eq = np.diag(data_qubit_energies(params))
    Iq = np.eye(dq)
    H0 = np.kron(np.kron(eq, Iq), np.eye(nb)) + np.kron(np.kron(Iq, eq), np.eye(nb)) \
        + np.kron(np.eye(dq * dq), np.diag(Eb))
    g1, g2 = bus_couplings(params, variant)
    xq = data_coupling_operator(dq)
    if rwa:
        xq = np.triu(xq)  # lowering part: sigma_-
    # bus coupling |k><0| + |0><k| with amplitudes g_k (k > 0)
    B1 = np.zeros((nb, nb))
    B2 = np.zeros((nb, nb))
    B1[1:, 0] = g1[1:]
    B2[1:, 0] = g2[1:]
    if rwa:
        Va = np.kron(np.kron(xq, Iq), B1) + np.kron(np.kron(Iq, xq), B2)
        V = Va + Va.T
    else:
        B1s, B2s = B1 + B1.T, B2 + B2.T
        V = np.kron(np.kron(xq, Iq), B1s) + np.kron(np.kron(Iq, xq), B2s)
    p_bus = np.zeros((nb, nb))
    p_bus[0, 0] = 1.0
    P = np.kron(np.eye(dq * dq), p_bus)
    basis = np.kron(np.eye(dq * dq), np.eye(nb)[:, :1])
    return H0, V, P, basis


def effective_coupling_sw(params: BusParams, variant=ModelVariant.FULL, rwa: bool = False) -> EffectiveCoupling:
    """XX coupling read off the |10> <-> |01> element of the Schrieffer-Wolff H_eff."""
    H0, V, P, basis = _pi_connector_sw_blocks(params, variant, rwa)
    res = schrieffer_wolff(H0, V, P, basis=basis)
    dq = params.data_levels
    i10, i01 = 1 * dq + 0, 0 * dq + 1
    return EffectiveCoupling(lambda_s=params.lambda_s1, lambda_eff_sw=float(res.h_eff[i10, i01].real))


def effective_coupling(params: BusParams, variant=ModelVariant.FULL, rwa: bool = False) -> EffectiveCoupling:
    """All three estimates of the effective coupling at one operating point."""
    out = effective_coupling_sum(params, variant, rwa=rwa)
    out.lambda_eff_split = effective_coupling_split(params, variant).lambda_eff_split
    out.split_sign = effective_coupling_split(params, variant).split_sign
    out.lambda_eff_sw = effective_coupling_sw(params, variant, rwa=rwa).lambda_eff_sw
    return out


def converge_fock(params: BusParams, rel_tol: float = 0.01, max_n_ph: int = 8) -> BusParams:
    """Smallest n_ph >= params.n_ph whose summed coupling moves < rel_tol at n_ph + 1."""
    p = params
    current = abs(effective_coupling_sum(p).lambda_eff_sum)
    while p.n_ph < max_n_ph:
        nxt = p.replace(n_ph=p.n_ph + 1)
        value = abs(effective_coupling_sum(nxt).lambda_eff_sum)
        if current == value or abs(value - current) < rel_tol * max(abs(value), abs(current)):
            return p
        p, current = nxt, value
    raise NumericalError(f"effective coupling not converged in Fock space up to n_ph={max_n_ph}")


# ---------------------------------------------------------------------------
# virtual paths

@dataclass(frozen=True)
class VirtualPath:
    states: tuple[tuple[int, ...], ...]  # product-basis occupations, initial .. final
    amplitude: float

    @property
    def intermediates(self) -> tuple[tuple[int, ...], ...]:
        return self.states[1:-1]


def _path_model(params: BusParams, counter_rotating: bool):
    """Full Hamiltonian split into its diagonal and off-diagonal product-basis parts."""
    if counter_rotating:
        H = build_hamiltonian(params, ModelVariant.FULL)
    else:
        # excitation-conserving model: RWA on both the bus and the data-qubit couplings
        space = full_space(params)
        H = build_hamiltonian(params.replace(lam=0.0), ModelVariant.BUS_RWA)
        for q, c in zip(DATA_LABELS, ("C_1", "C_2")):
            lower = np.triu(data_coupling_operator(params.data_levels))
            hop = space.embed(lower, q) @ space.op("create", c)
            H = H + params.lam * (hop + hop.T)
    H = sp.csr_matrix(H)
    return full_space(params), H.diagonal().real, sp.csr_matrix(H - sp.diags(H.diagonal()))


def virtual_path_weights(params: BusParams, order: int = 6, counter_rotating: bool = True,
                         top: int | None = 20) -> list[VirtualPath]:
    """Rank product-state paths |1,0>|0>_b -> |0,1>|0>_b by their perturbative amplitude.

    A path of ``order`` hops contributes ``prod(V_hop) / prod(E_init - E_m)``
    over its intermediate states. Intermediates may not revisit the initial
    or final state. Diagnostic only: it explains which bus states carry the
    coupling, it is not used to compute it.
    """
    space, diag, off = _path_model(params, counter_rotating)
    zeros = (0,) * 5
    start = space.flat_index((1, 0) + zeros)
    goal = space.flat_index((0, 1) + zeros)
    e0 = diag[start]
    n = space.total_dim
    adj = [off.indices[off.indptr[i]:off.indptr[i + 1]] for i in range(n)]
    vals = [off.data[off.indptr[i]:off.indptr[i + 1]] for i in range(n)]

    dist = np.full(n, np.iinfo(np.int64).max)
    dist[goal] = 0
    queue = deque([goal])
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if dist[j] > dist[i] + 1:
                dist[j] = dist[i] + 1
                queue.append(j)

    found: list[tuple[float, tuple[int, ...]]] = []

    def walk(node, path, amp, left):
        if left == 0:
            if node == goal:
                found.append((amp, tuple(path)))
            return
        for j, v in zip(adj[node], vals[node]):
            if dist[j] > left - 1:
                continue
            if left > 1:
                if j in (start, goal):
                    continue
                gap = e0 - diag[j]
                if abs(gap) < 1e-12:
                    continue
                walk(j, path + [j], amp * v / gap, left - 1)
            elif j == goal:
                walk(j, path + [j], amp * v, 0)

    if dist[start] <= order:
        walk(start, [start], 1.0, order)
    found.sort(key=lambda t: -abs(t[0]))
    if top is not None:
        found = found[:top]
    return [VirtualPath(tuple(tuple(int(x) for x in np.unravel_index(i, space.dims)) for i in p), float(a))
            for a, p in found]
