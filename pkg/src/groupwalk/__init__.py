"""Desk-scale workbench for word problems over machine groups.

Layers, bottom up: finitely generated groups with decidable word problem
(`groups`, `grigorchuk`), the two-ones distance subshift (`subshift`),
the shift-and-multiply machine group acting on it with its reductions
(`kgroup`), counter machines and the staged guess-defeating construction
(`machines`), multi-head walking automata on G x Z (`automata`), and a
batch CLI (`cli`).
"""

__version__ = "0.1.0"

from . import automata, errors, grigorchuk, groups, kgroup, machines, subshift  # noqa: F401
