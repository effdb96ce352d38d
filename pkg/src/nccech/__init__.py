"""Exact windowed computations for NC schemes over finite meet-posets.

Modules, bottom-up: :mod:`coeff` (fields, k[t]/t^n), :mod:`rewrite`
(homogeneous rewriting), :mod:`algebra`, :mod:`scheme`, :mod:`qcoh`,
:mod:`cech`, :mod:`deform`, :mod:`tilt`, and the :mod:`cli` front end.
"""

__version__ = "0.1.0"
