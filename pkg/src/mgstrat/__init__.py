"""Win-stay/lose-shift strategy toolkit for two-choice minority games.

The package splits into small, layered modules:

- ``dist``    -- Poisson/binomial kernels, evaluated in log space
- ``solver``  -- cheat-proof switch-rate root finders
- ``payoff``  -- expected payoffs and the balanced-split infeasibility scan
- ``engine``  -- day-by-day crowd simulation
- ``stats``   -- inefficiency, autocorrelations, episode statistics
- ``kpr``     -- the cyclic strategy for N agents on N ranked restaurants
- ``cli``     -- ``mgstrat`` command-line front end
"""

__version__ = "0.1.0"

from .solver import (  # noqa: F401
    LambdaTable,
    NumericError,
    indifference_residual,
    lambda_gap,
    solve_lambda,
    solve_p_finite,
)
from .payoff import (  # noqa: F401
    CheatCheck,
    PayoffQuadruple,
    expected_payoffs,
    infeasibility_scan,
    verify_no_cheat,
)
from .engine import (  # noqa: F401
    PopulationState,
    StrategyConfig,
    Trajectory,
    classify,
    derive_rng,
    init_population,
    run,
    step,
)
from .stats import inefficiency_eta, s_autocorrelation, summarize  # noqa: F401
from .kpr import KPRRunResult, KPRState, kpr_run  # noqa: F401
