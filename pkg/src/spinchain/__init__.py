"""Pulse-level simulation of quantum teleportation along a four-spin Ising chain."""
from .dynamics import (IntegrationError, IntegratorConfig, Pulse, StateVector, apply_program,
                       apply_pulse, probabilities, spin_expectations)
from .spin_model import ChainParams, ParameterError, energy, transition_frequency, transition_table
from .teleport import InputQubit, build_program, fidelity, protocol_targets, run_protocol
from .two_level import TwoLevelParams, analytic_evolution, rabi_2pik_halfpi, rabi_2pik_pi

__version__ = "0.1.0"
