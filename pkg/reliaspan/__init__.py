"""
ReliaSpan - Randomized reliable geometric spanners under oblivious vertex attacks
"""
__version__ = "1.0.0"
