"""Bayesian optimization of quantum annealing schedules.

Subpackages and modules:

* :mod:`boanneal.schedule`    -- parametrized control functions u(t).
* :mod:`boanneal.surrogate`   -- Gaussian-process surrogate model.
* :mod:`boanneal.optimizer`   -- Bayesian optimization, SPSA, random search.
* :mod:`boanneal.pspin`       -- closed-system p-spin simulators.
* :mod:`boanneal.openquantum` -- adiabatic master equation with a bosonic bath.
* :mod:`boanneal.rydberg`     -- unit-disk graphs, MIS scoring, Rydberg dynamics.
* :mod:`boanneal.harness`     -- experiment configs, runner, aggregation, CSV export.
"""

__version__ = "0.1.0"
