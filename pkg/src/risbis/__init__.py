"""Max-min phase synthesis with directional suppression for transmissive RIS.

Main entry points: :func:`risbis.solver.solve` for the bisection solver,
:mod:`risbis.scenario` for scenario files and :mod:`risbis.experiments` for
the comparison studies.
"""

__version__ = "0.1.0"
