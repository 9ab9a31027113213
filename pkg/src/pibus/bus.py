"""Hamiltonians of the Pi-connector bus, its RWA variant and the direct-coupling model.

The composite space is ordered ``[q_a, q_b, f_1, f_2, C_1, C_2, C_3]``: the two
data qubits, the two flux qubits and the three resonators. Flux qubit ``f_1``
couples to ``C_1`` and ``C_3``, ``f_2`` to ``C_2`` and ``C_3``; data qubit
``q_a`` couples to ``C_1`` and ``q_b`` to ``C_2``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError
from .operators import CompositeSpace, local_operator, mode, qubit, qutrit

DATA_LABELS = ("q_a", "q_b")
FLUX_LABELS = ("f_1", "f_2")
RESONATOR_LABELS = ("C_1", "C_2", "C_3")
BUS_LABELS = FLUX_LABELS + RESONATOR_LABELS


class ModelVariant(str, Enum):
    FULL = "full"
    BUS_RWA = "bus_rwa"
    DIRECT = "direct"


@dataclass(frozen=True)
class BusParams:
    """Physical parameters of the Pi-connector in units of the data-qubit frequency.

    ``omega_f1``/``omega_f2`` default to ``omega_c`` (flux qubits on resonance
    with the bus). ``lambda_s1``/``lambda_s2`` are the flux-qubit/resonator
    couplings; ``lam`` is the data-qubit/resonator coupling.
    """

    omega_q: float = 1.0
    omega_c: float = 3.0
    omega_f1: float | None = None
    omega_f2: float | None = None
    lam: float = 0.05
    lambda_s1: float = 0.0
    lambda_s2: float = 0.0
    n_ph: int = 3
    data_levels: int = 2
    anharm_ratio: float = 0.8

    def __post_init__(self):
        if self.omega_f1 is None:
            object.__setattr__(self, "omega_f1", self.omega_c)
        if self.omega_f2 is None:
            object.__setattr__(self, "omega_f2", self.omega_c)
        for name in ("omega_q", "omega_c", "omega_f1", "omega_f2", "lam",
                     "lambda_s1", "lambda_s2", "anharm_ratio"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be a non-negative real, got {value!r}")
        if self.omega_q <= 0:
            raise InvalidArgumentError("omega_q must be positive")
        if int(self.n_ph) != self.n_ph or self.n_ph < 1:
            raise InvalidArgumentError(f"n_ph must be a positive integer, got {self.n_ph!r}")
        if self.data_levels not in (2, 3):
            raise InvalidArgumentError(f"data_levels must be 2 or 3, got {self.data_levels!r}")
        if self.lam >= self.omega_q:
            warnings.warn(f"lam={self.lam} >= omega_q={self.omega_q}: outside the dispersive regime",
                          stacklevel=3)

    @classmethod
    def at(cls, lambda_s_over_omega_c: float, **overrides) -> "BusParams":
        """Symmetric bus with both flux couplings set to a fraction of ``omega_c``."""
        base = cls(**overrides)
        ls = lambda_s_over_omega_c * base.omega_c
        return replace(base, lambda_s1=ls, lambda_s2=ls)

    @property
    def lambda_s(self) -> float:
        if self.lambda_s1 != self.lambda_s2:
            raise InvalidArgumentError("asymmetric bus: use lambda_s1/lambda_s2")
        return self.lambda_s1

    def replace(self, **changes) -> "BusParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def load_params(path: str | Path) -> BusParams:
    """Read BusParams fields from a JSON object; unknown keys are rejected."""
    data = json.loads(Path(path).read_text())
    known = {f.name for f in fields(BusParams)}
    unknown = set(data) - known
    if unknown:
        raise InvalidArgumentError(f"unknown BusParams keys: {sorted(unknown)}")
    return BusParams(**data)


def data_qubit_spec(params: BusParams, label: str):
    return qubit(label) if params.data_levels == 2 else qutrit(label)


def bus_space(params: BusParams) -> CompositeSpace:
    return CompositeSpace(
        [qubit(l) for l in FLUX_LABELS] + [mode(l, params.n_ph) for l in RESONATOR_LABELS]
    )


def full_space(params: BusParams) -> CompositeSpace:
    return CompositeSpace(
        [data_qubit_spec(params, l) for l in DATA_LABELS]
        + [qubit(l) for l in FLUX_LABELS]
        + [mode(l, params.n_ph) for l in RESONATOR_LABELS]
    )


def data_qubit_energies(params: BusParams) -> np.ndarray:
    """Diagonal of the bare data-qubit Hamiltonian; ground at -omega_q/2."""
    w = params.omega_q
    if params.data_levels == 2:
        return np.array([-w / 2, w / 2])
    return np.array([-w / 2, w / 2, w / 2 + params.anharm_ratio * w])


def data_coupling_operator(dim: int) -> np.ndarray:
    """sigma_x for a qubit; for a qutrit the 1<->2 element is the harmonic sqrt(2)."""
    return local_operator("quadrature", dim)


def _bus_terms(space: CompositeSpace, params: BusParams, variant: ModelVariant):
    v = ModelVariant(variant)
    H = 0.5 * params.omega_f1 * space.op("sigma_z", "f_1")
    H = H + 0.5 * params.omega_f2 * space.op("sigma_z", "f_2")
    for c in RESONATOR_LABELS:
        H = H + params.omega_c * space.op("number", c)
    for f, c, ls in (("f_1", "C_1", params.lambda_s1), ("f_2", "C_2", params.lambda_s2)):
        if ls == 0:
            continue
        if v is ModelVariant.FULL:
            H = H + ls * space.op("sigma_x", f) @ (space.op("quadrature", c) + space.op("quadrature", "C_3"))
        elif v is ModelVariant.BUS_RWA:
            for cc in (c, "C_3"):
                hop = space.op("sigma_plus", f) @ space.op("annihilate", cc)
                H = H + ls * (hop + hop.T)
        else:
            raise InvalidArgumentError(f"variant {v.value!r} has no bus")
    return H


def bus_hamiltonian(params: BusParams, variant: ModelVariant | str = ModelVariant.FULL):
    """H_Pi on the five bus subsystems alone."""
    return _bus_terms(bus_space(params), params, variant)


def build_hamiltonian(params: BusParams, variant: ModelVariant | str = ModelVariant.FULL):
    """Full Hamiltonian H_qb + H_Pi + H_int on the seven-subsystem space.

    ``bus_rwa`` drops the counter-rotating part of the flux-qubit/resonator
    coupling only; the data-qubit coupling keeps its sigma_x X form.
    """
    variant = ModelVariant(variant)
    if variant is ModelVariant.DIRECT:
        raise InvalidArgumentError("use build_direct_coupling for the direct model")
    space = full_space(params)
    dq = params.data_levels
    H = _bus_terms(space, params, variant)
    energies = np.diag(data_qubit_energies(params))
    for label, cav in zip(DATA_LABELS, ("C_1", "C_2")):
        H = H + space.embed(energies, label)
        if params.lam:
            H = H + params.lam * space.embed(data_coupling_operator(dq), label) @ space.op("quadrature", cav)
    return H


def direct_space() -> CompositeSpace:
    return CompositeSpace([qubit(l) for l in DATA_LABELS])


def build_direct_coupling(lambda_eff: float, omega_q: float = 1.0) -> np.ndarray:
    """Two data qubits coupled directly: (w/2)(sz_a + sz_b) + lambda_eff sx_a sx_b."""
    s = direct_space()
    return (0.5 * omega_q * (s.op("sigma_z", 0) + s.op("sigma_z", 1))
            + lambda_eff * s.op("sigma_x", 0) @ s.op("sigma_x", 1))


class Channel(NamedTuple):
    label: str
    operator: object
    kind: str  # "relaxation" | "dephasing"


def dephasing_operator(dim: int) -> np.ndarray:
    """sigma_z on a qubit; 2n - 1 on a qutrit so the 0-1 coherence dephases identically."""
    return np.diag(2.0 * np.arange(dim) - 1.0)


def coupling_operators(params: BusParams, space: CompositeSpace | None = None) -> list[Channel]:
    """Bath coupling operators: X-type relaxation and Z-type dephasing.

    Data and flux qubits get one of each; resonators get an X relaxation
    channel only. Operators are embedded in ``space`` (the full space by
    default, or the two-qubit direct-model space).
    """
    space = space or full_space(params)
    out = []
    for label in DATA_LABELS + FLUX_LABELS:
        if label not in space.labels:
            continue
        d = space.subsystems[space.index_of(label)].dim
        out.append(Channel(label, space.embed(data_coupling_operator(d), label), "relaxation"))
        out.append(Channel(label, space.embed(dephasing_operator(d), label), "dephasing"))
    for label in RESONATOR_LABELS:
        if label in space.labels:
            out.append(Channel(label, space.op("quadrature", label), "relaxation"))
    return out
