"""Adaptive trajectory-tracking control of a 2-DOF planar arm.

Simulation library and CLI for a family of adaptive controllers whose
reference dynamics raise the closed-loop order so the tracking channel
approaches linear behaviour, plus the diagnostics that certify it.
"""

__version__ = "0.1.0"
