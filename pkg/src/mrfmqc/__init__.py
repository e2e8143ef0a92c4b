"""Simulator of an MRFM nuclear-spin quantum computer with 125Te+ donors in 28Si.

Modules
-------
spinmodel
    Donor spin Hamiltonian, resonance frequencies, thermal statistics.
fields
    Tip and electron dipolar fields along the chain.
planner
    Frequency budget, pulse frequencies, protocol schedules.
dynamics
    Secular state-vector simulation of pulse schedules.
readout
    Threshold model of MRFM detection and the initialization loop.
cli
    ``mrfmqc budget | run | sweep``.
"""

from ._backend import BACKEND
from .dynamics import ChainState, apply_pulse, basis_probabilities, gate_fidelity, run_schedule, truth_table
from .fields import MachineGeometry, TipPosition
from .planner import (
    PulseSchedule,
    PulseSpec,
    frequency_budget,
    plan_initialization,
    plan_inverse_cn,
    plan_one_qubit_rotation,
    plan_standard_cn,
)
from .readout import DetectionModel, final_measurement, initialize_chain, probe_site
from .spinmodel import CODATA, DonorParams, Spin

__version__ = "0.1.0"
