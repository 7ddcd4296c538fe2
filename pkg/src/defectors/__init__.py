"""Evolution of defectors in a spatial iterated prisoner's dilemma.

Players on a torus carry 71-bit memory-3 strategies, play their eight
neighbours in a buyer/seller business game, and reproduce through a
genetic algorithm.  Compensating cheated cooperators turns the strong
dilemma into a weak one; the experiment harness tracks how many
defectors evolve under each payoff case.
"""

from ._kernels import backend_name
from .evolution import (EvolutionConfig, GenerationStats, Grid, SelectionScope,
                        evaluate_fitness, generation_stats, linear_scale, next_generation)
from .experiment import (ALL_CASES, CASE_I, CASE_IIA, CASE_IIB, CaseId, CaseSpec, RunConfig,
                         TimeSeries, average_runs, build_case, desk_config, init_population,
                         peak, run_simulation)
from .game import (DilemmaKind, MatchResult, PayoffConfig, PayoffMatrix, classify_dilemma,
                   payoff_matrix_from, play_match)
from .strategy import (Action, ClassificationThresholds, StrategyClass, classify,
                       cooperation_fraction, decide, decode_hex, encode_hex)

__version__ = "0.1.0"
