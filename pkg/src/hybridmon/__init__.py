"""Runtime monitor for hybrid process specifications.

Compiles data Petri nets and data-aware temporal constraints into guarded
finite-state automata over an interval-abstracted alphabet, labels their
product with four-valued verdicts, and recommends minimum-violation-cost
next events during live execution.
"""

__version__ = "0.1.0"
