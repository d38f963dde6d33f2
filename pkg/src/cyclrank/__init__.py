"""Rank statistics of cyclic prime-degree fields.

Subpackages cover exact F_l linear algebra, power-residue characters,
Redei matrices and their rank statistics, finite modules over the
cyclotomic local ring with their natural measure, random-matrix rank
models, l-additive-system combinatorics, and prime-divisor statistics
of squarefree integers.  The ``cyclrank`` command line tool wires these
into seeded, reproducible experiments.
"""

__version__ = "0.1.0"
