"""Localization of adaptive Clifford circuits on grid architectures.

Submodules:

* :mod:`gridlocal.grid` -- grid graphs and coordinates
* :mod:`gridlocal.pauli` -- symplectic Pauli algebra and Clifford conjugation
* :mod:`gridlocal.noise` -- local stochastic noise and the strength calculus
* :mod:`gridlocal.routing` -- edge-disjoint routing on 2D and 3D grids
* :mod:`gridlocal.circuit` -- adaptive circuit representation
* :mod:`gridlocal.stabsim` -- stabilizer simulation with symbolic outcomes
* :mod:`gridlocal.localize` -- ideal localization gadgets
* :mod:`gridlocal.ftarch` -- fault-tolerant architecture planning
* :mod:`gridlocal.cli` -- command-line entry point
"""

__version__ = "0.1.0"
