"""
Scenario catalog.

Each scenario names the kind of run it performs and the verdicts attached
to it. Preset values live in the configuration defaults; the catalog only
describes what a scenario checks.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

from ..utils.errors import ConfigurationError


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Attributes:
        name: Preset name
        description: One line shown by the command line
        mode: 'integrate', 'reduction' or 'probe'
        checks: Verdicts evaluated after the run, in report order
    """

    name: str
    description: str
    mode: str = 'integrate'
    checks: Tuple[str, ...] = ()


CATALOG: Dict[str, ScenarioSpec] = {spec.name: spec for spec in (
    ScenarioSpec('custom', 'User-defined run with the maximum principle check',
                 checks=('max_principle',)),
    ScenarioSpec('stable_decay_1d', 'Stable 1-D decay under the maximum principle',
                 checks=('max_principle', 'extremum_rate')),
    ScenarioSpec('periodic_meanzero_decay_1d', 'Exponential decay of mean-zero periodic data',
                 checks=('max_principle', 'exponential_bound', 'decay_rate')),
    ScenarioSpec('line_nonneg_decay_1d', 'Algebraic decay of a nonnegative bump on the line',
                 checks=('max_principle', 'algebraic_bound', 'l1_conservation')),
    ScenarioSpec('slope_bound_1d', 'Slopes below one stay below one',
                 checks=('slope_bound', 'n2_sign')),
    ScenarioSpec('unstable_growth_1d', 'Linear growth rate and blow-up in the unstable regime',
                 checks=('growth_rate', 'blowup_guard')),
    ScenarioSpec('stable_decay_2d', 'Stable 2-D decay under the maximum principle',
                 checks=('max_principle',)),
    ScenarioSpec('periodic_meanzero_decay_2d', 'Exponential decay of mean-zero 2-D data',
                 checks=('max_principle', 'exponential_bound')),
    ScenarioSpec('line_nonneg_decay_2d', 'Algebraic decay of a nonnegative bump, large period',
                 checks=('algebraic_bound',)),
    ScenarioSpec('reduction_check', 'x1-only 2-D right-hand side against the 1-D one',
                 mode='reduction', checks=('reduction_gap',)),
    ScenarioSpec('velocity_probe', 'Velocity just above the crest against the 2-D rhs',
                 mode='probe', checks=('velocity_limit',)),
)}


def get_scenario(name: str) -> ScenarioSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown scenario {name!r}") from None
