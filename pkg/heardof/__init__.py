# Heard-of analysis - Source Package
"""
Bounded, executable analysis of delivered and heard-of predicates
"""

__version__ = "0.1.0"
