"""cdqs-lab: a workbench for conditional disclosure of quantum secrets.

Represents CDS/CDQS/f-routing protocols as explicit finite-dimensional
quantum channels, certifies their correctness and security parameters via
convex optimization, and executes protocol transformations and
communication-complexity reductions as runnable simulations.
"""

__version__ = "0.1.0"
