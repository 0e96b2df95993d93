"""In/out scattering bookkeeping: free wavepackets, phase trajectories and a resonance block."""
from .oscillator import OscillatorTrajectory, oscillator_trajectory
from .resonance import (
    DecayFit,
    ResonanceParams,
    ResonanceResult,
    ResonanceSystem,
    build_resonance,
    decay_fit,
    golden_rule_rate,
    in_packet,
    resonance_evolve,
)
from .wavepacket import (
    Classification,
    Grid,
    Trajectory,
    TrajectoryPoint,
    TrajectoryTag,
    Wavepacket,
    classify,
    evolve_free,
    expect_R,
    gaussian_packet,
    superpose,
    time_expectation,
    zero_crossing,
)

__all__ = [
    "Classification",
    "DecayFit",
    "Grid",
    "OscillatorTrajectory",
    "ResonanceParams",
    "ResonanceResult",
    "ResonanceSystem",
    "Trajectory",
    "TrajectoryPoint",
    "TrajectoryTag",
    "Wavepacket",
    "build_resonance",
    "classify",
    "decay_fit",
    "evolve_free",
    "expect_R",
    "gaussian_packet",
    "golden_rule_rate",
    "in_packet",
    "oscillator_trajectory",
    "resonance_evolve",
    "superpose",
    "time_expectation",
    "zero_crossing",
]
