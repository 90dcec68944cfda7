"""Reader-writer operational semantics workbench.

Interpreters for Imp, Imp² and Ref², a generic engine for stateful SOS
specifications with their derived reader-writer extension, and checkers
for trace, cost and termination equivalences.
"""

__version__ = "0.1.0"
