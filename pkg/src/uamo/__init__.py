"""Numerical laboratory for the quasi-periodically coined quantum walk.

Submodules: ``torus``, ``operators``, ``cocycles``, ``spectrum``,
``duality``, ``checks`` and the command-line front end ``cli``.
"""

__version__ = "0.1.0"
