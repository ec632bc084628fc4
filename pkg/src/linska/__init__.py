"""Secret key agreement for finite linear sources.

Exact capacities and communication complexity, scheme synthesis, source
reduction, and an exhaustive brute-force oracle over prime fields.
"""

__version__ = "0.1.0"
