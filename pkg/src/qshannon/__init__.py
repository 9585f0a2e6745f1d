"""Quantum Shannon theory by typical subspaces: entropies, compression, cq channel coding, rate regions."""

__version__ = "0.1.0"
