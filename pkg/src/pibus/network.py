"""Crosstalk bookkeeping for a register of N data qubits joined by buses.

Each pair (k, l) with k < l enters the interaction with weight k, the number
of bus paths through which qubit k reaches the later qubits. Treating the
first N - 1 qubits as one effective qubit, the residual coupling felt by the
last one when every bus is off is the sum of the weights on its pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError

MAX_EXPLICIT_N = 12
_SX = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))


@dataclass
class ArchitectureState:
    """N data qubits, a coupling value per pair, and which pairs are switched on."""

    N: int
    lambda_on: float
    lambda_off: float
    on_pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.N < 2:
            raise InvalidArgumentError("need at least two data qubits")
        pairs = set()
        for pair in self.on_pairs:
            k, l = sorted(pair)
            if k == l or not (1 <= k and l <= self.N):
                raise InvalidArgumentError(f"invalid pair {pair} for N={self.N}")
            pairs.add((k, l))
        self.on_pairs = frozenset(pairs)

    def coupling(self, k: int, l: int) -> float:
        """lambda_eff^{kl}; qubits are numbered 1..N and the map is symmetric."""
        if k == l:
            raise InvalidArgumentError("no self coupling")
        k, l = sorted((k, l))
        return self.lambda_on if (k, l) in self.on_pairs else self.lambda_off

    def coupling_matrix(self) -> np.ndarray:
        """N x N symmetric map with an empty diagonal."""
        out = np.zeros((self.N, self.N))
        for k in range(1, self.N + 1):
            for l in range(k + 1, self.N + 1):
                out[k - 1, l - 1] = out[l - 1, k - 1] = self.coupling(k, l)
        return out

    def coefficients(self) -> dict[tuple[int, int], float]:
        """Weight k * lambda^{kl} of every sx^(k) sx^(l) term."""
        return {(k, l): k * self.coupling(k, l)
                for k in range(1, self.N) for l in range(k + 1, self.N + 1)}


def _sx_on(i: int, N: int) -> sp.csr_matrix:
    ops = [_SX if j == i else sp.identity(2, format="csr") for j in range(1, N + 1)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), ops)


def interaction_hamiltonian(state: ArchitectureState) -> sp.csr_matrix:
    """Sparse 2^N operator sum_{k<l} k lambda^{kl} sx^(l) sx^(k), qubit 1 slowest."""
    if state.N > MAX_EXPLICIT_N:
        raise InvalidArgumentError(
            f"explicit construction limited to N <= {MAX_EXPLICIT_N}; use residual_on_last_qubit")
    N = state.N
    sx = [None] + [_sx_on(i, N) for i in range(1, N + 1)]
    H = sp.csr_matrix((2 ** N, 2 ** N))
    for (k, l), c in state.coefficients().items():
        if c != 0:
            H = H + c * (sx[l] @ sx[k])
    return H


def pair_coefficient(H: sp.spmatrix, k: int, l: int, N: int) -> float:
    """Coefficient of sx^(k) sx^(l) in ``H``, via Tr(H sx^(k) sx^(l)) / 2^N."""
    P = _sx_on(k, N) @ _sx_on(l, N)
    return float(H.multiply(P.T).sum().real / 2 ** N)


def residual_on_last_qubit(N: int, lambda_off: float) -> float:
    """lambda_off * N (N - 1) / 2."""
    if N < 2:
        raise InvalidArgumentError("need at least two data qubits")
    return lambda_off * N * (N - 1) / 2


def residual_from_hamiltonian(N: int, lambda_off: float) -> float:
    """Coefficient sum on the pairs involving qubit N, read off the explicit operator.

    Each pair (k, N) carries k lambda_off, so the single-effective-qubit
    reduction adds the first N - 1 path weights.
    """
    state = ArchitectureState(N, lambda_on=lambda_off, lambda_off=lambda_off)
    H = interaction_hamiltonian(state)
    return sum(pair_coefficient(H, k, N, N) for k in range(1, N))


def network_on_off_ratio(N: int, lambda_on: float, lambda_off: float) -> float:
    """|lambda_on| over the residual on qubit N; inf when there is no residual."""
    residual = residual_on_last_qubit(N, lambda_off)
    if residual == 0:
        return float("inf")
    with np.errstate(over="ignore"):
        ratio = abs(lambda_on / residual)
    return float(ratio)
