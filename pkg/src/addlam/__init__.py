"""A symbolic workbench for a non-deterministic call-by-value lambda
calculus with sums: reduction, two additive type systems (an equational
one and a rigid, tree-shaped one), and a translation into a polymorphic
lambda calculus with pairs."""

__version__ = "0.1.0"
