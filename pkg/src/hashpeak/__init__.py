"""System-dynamics model of bitcoin mining: supply schedule, hash-rate feedback
loop, delay calibration and post-halving projections."""

__version__ = "0.1.0"
