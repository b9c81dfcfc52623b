"""Bateman dual-oscillator toolkit.

Layers, each cross-checked against an independent oracle:

- :mod:`bateman.model`: parameters and derived constants,
- :mod:`bateman.dirac`: Poisson/Dirac bracket algebra (exact rational path),
- :mod:`bateman.classical`: RK4 trajectories vs analytic exponential modes,
- :mod:`bateman.closed_form`: Bogoliubov coefficients, occupations, energies,
- :mod:`bateman.fock`: truncated two-mode quantum engine (the quantum oracle),
- :mod:`bateman.reduced`: non-Markovian memory-kernel reduced dynamics,
- :mod:`bateman.geometry`: logarithmic spirals, time lattice, Koch scaling,
- :mod:`bateman.cli`: command-line interface with figure-rendering report.
"""

from .model import DerivedParams, ModelParams, derive_params, unit_params

__all__ = ["ModelParams", "DerivedParams", "derive_params", "unit_params"]
__version__ = "0.1.0"
