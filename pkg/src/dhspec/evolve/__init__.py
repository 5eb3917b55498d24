"""One-dimensional evolution harness for the confined flows."""

from .grid import (Grid1D, State1D, fit_decay_rate, make_grid, moment, pushforward_perturb,
                   stationary_state, wasserstein_1d)
from .schemes import BACKEND, NewtonError, set_backend, step_fourth, step_pme

__all__ = [
    "BACKEND",
    "Grid1D",
    "NewtonError",
    "State1D",
    "fit_decay_rate",
    "make_grid",
    "moment",
    "pushforward_perturb",
    "set_backend",
    "stationary_state",
    "step_fourth",
    "step_pme",
    "wasserstein_1d",
]
