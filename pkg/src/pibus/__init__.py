"""Simulation of an ultrastrongly coupled quantum bus between two data qubits.

Submodules: ``operators`` (tensor-product algebra), ``bus`` (Hamiltonians and
bath operators), ``spectral`` (spectra and effective couplings), ``dynamics``
(unitary and Lindblad evolution), ``gates`` (sqrt(iSWAP) fidelity),
``fluxqubit`` (flux-qubit switch), ``network`` (crosstalk scaling) and
``cli``.
"""
from .bus import BusParams, ModelVariant, build_direct_coupling, build_hamiltonian, coupling_operators
from .dynamics import DecoherenceParams, LindbladModel, mesolve, unitary_evolve
from .errors import HybridizationError, InvalidArgumentError, NumericalError, ResonanceError
from .fluxqubit import FluxQubitParams, flux_spectrum, switch_analysis
from .gates import average_gate_fidelity, direct_pipeline, gate_pipeline, ideal_sqrt_iswap
from .spectral import (
    diagonalize,
    effective_coupling,
    effective_coupling_split,
    effective_coupling_sum,
    effective_coupling_sw,
)

__all__ = [
    "BusParams", "ModelVariant", "build_direct_coupling", "build_hamiltonian", "coupling_operators",
    "DecoherenceParams", "LindbladModel", "mesolve", "unitary_evolve",
    "HybridizationError", "InvalidArgumentError", "NumericalError", "ResonanceError",
    "FluxQubitParams", "flux_spectrum", "switch_analysis",
    "average_gate_fidelity", "direct_pipeline", "gate_pipeline", "ideal_sqrt_iswap",
    "diagonalize", "effective_coupling", "effective_coupling_split", "effective_coupling_sum",
    "effective_coupling_sw",
]
