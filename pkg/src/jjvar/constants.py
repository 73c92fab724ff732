"""Physical constants (CODATA 2018 / SI exact values).

h, e and k_B are exact by the 2019 SI definition; hbar is derived as
h / (2*pi) so that h == 2*pi*hbar holds to machine precision.
"""

import math

PLANCK_H = 6.62607015e-34  # J s, exact
HBAR = PLANCK_H / (2.0 * math.pi)  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C, exact
BOLTZMANN_KB = 1.380649e-23  # J / K, exact

# h / (2 e^2): resistance of a single spin-degenerate channel at T = 1.
RESISTANCE_QUANTUM = PLANCK_H / (2.0 * ELEMENTARY_CHARGE**2)  # ohm

MEV_TO_JOULE = 1e-3 * ELEMENTARY_CHARGE
GHZ_TO_JOULE = 1e9 * PLANCK_H
