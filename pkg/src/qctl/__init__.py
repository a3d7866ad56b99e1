"""Coherent observer-based pole placement for linear quantum stochastic systems."""

from .completion import NoiseCompletion, complete_noise
from .dynamics import BACKEND, commutation_defect, simulate_means, step_response_metrics
from .placement import (PoleRegion, PoleSpec, place_observer_gain, place_state_feedback,
                        poles_in_region)
from .qsde import (DirectCoupling, ObserverController, QuadraturePlant,
                   check_controller_realizability, check_plant_realizability, is_controllable,
                   is_detectable)
from .quadrature import make_gamma, make_theta
from .synthesis import (ClosedLoopSystem, StructuredGain, SynthesisProblem, assemble_closed_loop,
                        synthesize, verify_separation)

__version__ = "0.1.0"
