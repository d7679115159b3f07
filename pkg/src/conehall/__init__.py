"""conehall: topological invariants of gapped lattice states over conical covers."""

__version__ = "0.1.0"
