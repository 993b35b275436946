# afmflow: finite element minimization and dynamics of two-sublattice magnets
__version__ = "0.3.0"
