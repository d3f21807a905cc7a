"""Grover amplitude amplification for Dicke and GHZ states of atoms in an optical cavity."""

from .symspace import (
    SymmetricState,
    SymDensityMatrix,
    dicke,
    css_state,
    ghz_state,
    rotation_matrix,
    apply_rotation,
    phase_flip,
    reflection_about,
    husimi_q,
)
from .planner import Dicke, GHZ, ProtocolPlan, plan, min_steps_dicke, min_steps_ghz
from .cavity import CavityParams, Wavepacket, reflection_amplitude, scatter_kernel
from .protocol import run_ideal, run_noisy, optimize, fit_exponent

__version__ = "0.1.0"
