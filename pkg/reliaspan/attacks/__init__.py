"""
ReliaSpan - Attacks Package Initialization
"""
from reliaspan.attacks.generators import Attack, AttackGenerator, AttackKind, generate

__all__ = ["Attack", "AttackGenerator", "AttackKind", "generate"]
