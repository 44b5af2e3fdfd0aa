"""Q cells: analytic outer bounds and calibrated estimates of SIR coverage manifolds."""

__version__ = "0.1.0"
