"""Tensor-product operator algebra for qubits, qutrits and truncated oscillators.

Levels are labelled by excitation number, so index 0 is always the ground
state. With that labelling ``sigma_z = diag(-1, 1)`` and ``H = w/2 sigma_z``
puts the ground state at ``-w/2``. Composite indices are row-major with the
first subsystem varying slowest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError

#: above this total dimension operators are built as CSR sparse matrices
DENSE_LIMIT = 4096

KINDS = ("two-level", "three-level", "bosonic")

OPERATOR_NAMES = (
    "sigma_x",
    "sigma_z",
    "sigma_plus",
    "sigma_minus",
    "annihilate",
    "create",
    "quadrature",
    "number",
    "identity",
)


@dataclass(frozen=True)
class SubsystemSpec:
    kind: str
    dim: int
    label: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown subsystem kind {self.kind!r}")
        if self.dim < 2:
            raise InvalidArgumentError(f"{self.label}: dim must be >= 2, got {self.dim}")
        if self.kind == "two-level" and self.dim != 2:
            raise InvalidArgumentError(f"{self.label}: two-level subsystem needs dim 2")
        if self.kind == "three-level" and self.dim != 3:
            raise InvalidArgumentError(f"{self.label}: three-level subsystem needs dim 3")


def qubit(label: str) -> SubsystemSpec:
    return SubsystemSpec("two-level", 2, label)


def qutrit(label: str) -> SubsystemSpec:
    return SubsystemSpec("three-level", 3, label)


def mode(label: str, n_ph: int) -> SubsystemSpec:
    """Bosonic mode truncated to Fock states ``0..n_ph``."""
    return SubsystemSpec("bosonic", n_ph + 1, label)


def local_operator(kind: str, dim: int) -> np.ndarray:
    """Return the ``dim x dim`` matrix of a named single-subsystem operator.

    Pauli operators act on levels {0, 1} and vanish elsewhere when ``dim > 2``.
    Ladder operators are the truncated harmonic ones, so ``quadrature`` on a
    qutrit also couples 1 <-> 2 with matrix element sqrt(2).
    """
    if kind not in OPERATOR_NAMES:
        raise InvalidArgumentError(f"unknown operator {kind!r}")
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise InvalidArgumentError(f"operator {kind!r} needs integer dim >= 2, got {dim!r}")
    out = np.zeros((dim, dim))
    if kind == "identity":
        return np.eye(dim)
    if kind == "sigma_x":
        out[0, 1] = out[1, 0] = 1.0
    elif kind == "sigma_z":
        out[0, 0], out[1, 1] = -1.0, 1.0
    elif kind == "sigma_plus":
        out[1, 0] = 1.0
    elif kind == "sigma_minus":
        out[0, 1] = 1.0
    else:
        a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
        if kind == "annihilate":
            out = a
        elif kind == "create":
            out = a.T.copy()
        elif kind == "quadrature":
            out = a + a.T
        else:  # number
            out = np.diag(np.arange(dim, dtype=float))
    return out


@dataclass(frozen=True)
class CompositeSpace:
    subsystems: tuple[SubsystemSpec, ...]
    total_dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        if not self.subsystems:
            raise InvalidArgumentError("a composite space needs at least one subsystem")
        labels = [s.label for s in self.subsystems]
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"duplicate subsystem labels in {labels}")
        object.__setattr__(self, "total_dim", int(np.prod(self.dims)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    @property
    def sparse(self) -> bool:
        return self.total_dim > DENSE_LIMIT

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidArgumentError(f"no subsystem labelled {label!r}") from None

    def embed(self, local, index: int | str):
        """Kronecker ``local`` into slot ``index`` with identities elsewhere."""
        if isinstance(index, str):
            index = self.index_of(index)
        if not 0 <= index < len(self.subsystems):
            raise InvalidArgumentError(f"subsystem index {index} out of range")
        local = np.asarray(local)
        d = self.subsystems[index].dim
        if local.shape != (d, d):
            raise InvalidArgumentError(
                f"local operator shape {local.shape} does not match subsystem "
                f"{self.subsystems[index].label!r} of dim {d}"
            )
        left = int(np.prod(self.dims[:index]))
        right = int(np.prod(self.dims[index + 1:]))
        op = sp.kron(sp.kron(sp.identity(left), sp.csr_matrix(local)), sp.identity(right),
                     format="csr")
        return op if self.sparse else op.toarray()

    def op(self, kind: str, index: int | str):
        """Embed the named local operator acting on one subsystem."""
        if isinstance(index, str):
            index = self.index_of(index)
        return self.embed(local_operator(kind, self.subsystems[index].dim), index)

    def identity(self):
        eye = sp.identity(self.total_dim, format="csr")
        return eye if self.sparse else eye.toarray()

    def zeros(self):
        if self.sparse:
            return sp.csr_matrix((self.total_dim, self.total_dim))
        return np.zeros((self.total_dim, self.total_dim))

    def flat_index(self, occupation: Sequence[int]) -> int:
        if len(occupation) != len(self.subsystems):
            raise InvalidArgumentError(
                f"expected {len(self.subsystems)} occupation numbers, got {len(occupation)}"
            )
        for n, s in zip(occupation, self.subsystems):
            if not 0 <= n < s.dim:
                raise InvalidArgumentError(f"occupation {n} out of range for {s.label} (dim {s.dim})")
        return int(np.ravel_multi_index(tuple(occupation), self.dims))

    def basis_ket(self, occupation: Sequence[int]) -> np.ndarray:
        ket = np.zeros(self.total_dim, dtype=complex)
        ket[self.flat_index(occupation)] = 1.0
        return ket


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def dense(op) -> np.ndarray:
    return op.toarray() if sp.issparse(op) else np.asarray(op)


def hermiticity_error(op) -> float:
    """Relative Frobenius norm of the anti-Hermitian part."""
    m = dense(op)
    norm = np.linalg.norm(m)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(m - m.conj().T) / norm)
