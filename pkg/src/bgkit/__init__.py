"""bgkit: exact desk-scale verification of Bishop-Gromov style growth
bounds, entropy estimates, hyperbolicity constants, packing inequalities
and group-action invariants on discrete metric measure spaces."""

__version__ = "0.1.0"
