"""Numerical verification toolkit for sector-matrix inequalities."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .linalg import (  # noqa: E402
    DEFAULT_TOL,
    TolerancePolicy,
    Verdict,
    canonical_isometry,
    cartesian,
    hadamard,
    kronecker,
    load_matrix,
    dump_matrix,
    loewner_leq,
)
from .functions import (  # noqa: E402
    adjoint_mean,
    get_function,
    get_mean,
    kantorovich,
    operator_mean,
    principal_power,
)
from .sector import (  # noqa: E402
    GeneratorConfig,
    SectorMatrix,
    in_sector,
    power_bounds,
    random_sector,
    random_sector_pair_signed,
    sector_angle,
)
from .maps import parse_map  # noqa: E402
from .inequalities import CHECKERS, THEOREM_IDS, CheckOutcome, replay_witness  # noqa: E402
from .harness import (  # noqa: E402
    CampaignConfig,
    TrialReport,
    default_config,
    replay,
    run_campaign,
    shrink_counterexample,
)
