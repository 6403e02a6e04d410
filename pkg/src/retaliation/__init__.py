"""Economics of PoW double-spend attacks and the attacker/defender retaliation game."""

__version__ = "0.1.0"
