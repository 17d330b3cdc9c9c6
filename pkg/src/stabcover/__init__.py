"""Cayley graphs of finite abelian groups, their standard double covers, and
stability classification of connection sets.
"""

__version__ = "0.1.0"
