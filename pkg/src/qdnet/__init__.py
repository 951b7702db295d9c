"""Quantum-dot energy-transfer network simulator and the stochastic
constraint, SAT, and bandit solvers built on top of it."""

__version__ = "0.1.0"
