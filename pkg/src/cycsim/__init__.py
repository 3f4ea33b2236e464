"""Desk-scale simulator for quantum search in cyclic-group state spaces:
reversible modular arithmetic gates, a discrete-log unitary, CRT search-space
reduction, a halting register-stripping program, and highest-order
multiple-quantum search circuits, all cross-checked against classical number
theory."""

__version__ = "0.1.0"
