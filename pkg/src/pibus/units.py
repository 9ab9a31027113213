"""Conversion between the internal unit (omega_q = 1) and laboratory units.

Frequencies quoted in GHz are ordinary frequencies, so the data-qubit
angular frequency is ``2*pi*omega_q_ghz`` rad/ns and one internal time unit
lasts ``1 / (2*pi*omega_q_ghz)`` ns.
"""
import math

DEFAULT_OMEGA_Q_GHZ = 4.0


def angular_per_ns(omega_q_ghz: float = DEFAULT_OMEGA_Q_GHZ) -> float:
    return 2 * math.pi * omega_q_ghz


def time_to_ns(t: float, omega_q_ghz: float = DEFAULT_OMEGA_Q_GHZ) -> float:
    return t / angular_per_ns(omega_q_ghz)


def ns_to_time(t_ns: float, omega_q_ghz: float = DEFAULT_OMEGA_Q_GHZ) -> float:
    return t_ns * angular_per_ns(omega_q_ghz)


def to_ghz(omega: float, omega_q_ghz: float = DEFAULT_OMEGA_Q_GHZ) -> float:
    """Internal angular frequency -> ordinary frequency in GHz."""
    return omega * omega_q_ghz
