"""Exact spectra of displacement Hessians at Barenblatt profiles.

Subpackages and modules:

``exactpoly``    exact rational multivariate polynomials and the operators
``spectra``      eigenvalues, eigenfunctions, multiplicities and crossings
``profiles``     Barenblatt profiles and scaling constants
``weighted``     quadrature against the profile and the ``H`` inner product
``functionals``  entropy, Fisher information and their relation
``evolve``       one-dimensional evolution harness
``cli``          command-line front end
"""

__version__ = "0.1.0"
