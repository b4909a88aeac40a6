"""Certified computations with algebraic cycles in cubical higher Chow complexes.

Modules: ``algebra`` (exact rational functions), ``cycles`` (terms and sums),
``boundary`` (faces, boundary, admissibility), ``rewrite`` (certified
identities), ``symbols`` ({t}_c sums), ``goncharov`` (the 22-term relation),
``script`` and ``cli`` (the proof-script language and command line).
"""

__version__ = "0.1.0"
