"""Brilliancy: mine annotated chess games, search game trees under two
evaluator strengths, extract tree-shape features, and train tiered
classifiers that predict which moves humans call brilliant."""

__version__ = "0.1.0"
