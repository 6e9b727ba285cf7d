"""Timed automaton games with parity objectives, solved through finite region games."""
from .gamefile import dumps, load_game, loads
from .model import (
    ConstraintError,
    Edge,
    GameState,
    NonConjunctiveGuard,
    TimedAutomatonGame,
    eval_constraint,
    format_constraint,
    parse_constraint,
    rescale_constants,
    tighten_upper,
    validate_game,
)
from .parity import FiniteParityGame, Solution, attractor, solve_spm, solve_zielonka, verify_strategy
from .reduction import build_finite_game, from_pgsolver, lift_priorities, regstates, to_pgsolver
from .regions import EnlargedGame, Region, SuccessorParams, jump, region_of, representative, time_successors
from .robust import (
    BoundedRobustParams,
    build_bounded_robust,
    compare_modes,
    jstates,
    solve_bounded_robust,
    solve_exact,
    solve_limit_robust,
)

__version__ = "0.1.0"
