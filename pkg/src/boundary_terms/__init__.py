"""Numerical audits of the boundary-corrected Ehrenfest and Hellmann-Feynman theorems.

Natural units are used throughout (hbar = m = e = c = 1) and the kinematic
momentum is ``p + A`` (charge +1).
"""

__version__ = "0.1.0"
