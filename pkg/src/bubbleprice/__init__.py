from bubbleprice._analysis import (
    BetaLadder,
    CrossCheckReport,
    DefectEstimate,
    McFbetaPricer,
    McNaivePricer,
    McRebatePricer,
    PdeFbetaPricer,
    PdeRebatePricer,
    RateFit,
    Reference,
    RungPrice,
    StudyResult,
    analytic_reference,
    cross_check,
    defect_study,
    fit_rate,
    proxy_reference,
    rate_study,
)
from bubbleprice._cli import main
from bubbleprice._config import RunConfig, load_config
from bubbleprice._contracts import contracts_of, ensures, requires
from bubbleprice._errors import (
    BubblePriceError,
    ConfigError,
    PostconditionError,
    PreconditionError,
    StabilityError,
)
from bubbleprice._mc import (
    McConfig,
    McEstimate,
    PathBatch,
    PathOutcome,
    ZeroHandling,
    hitting_probability,
    price_fbeta,
    price_naive,
    price_rebate,
    price_truncated,
    simulate_block,
    simulate_path,
)
from bubbleprice._models import (
    LocalVolModel,
    MartingaleClass,
    cev_expectation,
    cev_family,
    cev_price,
    classify_martingale,
    martingale_defect,
    norm_cdf,
    sigma_eval,
    uniqueness_integral_diverges,
)
from bubbleprice._payoffs import (
    Payoff,
    PayoffKind,
    RebateKind,
    RebateSpec,
    fbeta,
    payoff_eval,
    rate_exponent,
    rebate_eval,
    truncate_payoff,
)
from bubbleprice._pde import (
    BoundarySpec,
    GridSpec,
    PriceSurface,
    UpperKind,
    solve,
    solve_fbeta_pde,
    solve_naive_pde,
    solve_rebate_pde,
    solve_truncated_pde,
    surface_at,
)
from bubbleprice._rng import path_stream

__all__ = [
    "BetaLadder",
    "BoundarySpec",
    "BubblePriceError",
    "ConfigError",
    "CrossCheckReport",
    "DefectEstimate",
    "GridSpec",
    "LocalVolModel",
    "MartingaleClass",
    "McConfig",
    "McEstimate",
    "McFbetaPricer",
    "McNaivePricer",
    "McRebatePricer",
    "PathBatch",
    "PathOutcome",
    "Payoff",
    "PayoffKind",
    "PdeFbetaPricer",
    "PdeRebatePricer",
    "PostconditionError",
    "PreconditionError",
    "PriceSurface",
    "RateFit",
    "RebateKind",
    "RebateSpec",
    "Reference",
    "RunConfig",
    "RungPrice",
    "StabilityError",
    "StudyResult",
    "UpperKind",
    "ZeroHandling",
    "analytic_reference",
    "cev_expectation",
    "cev_family",
    "cev_price",
    "classify_martingale",
    "contracts_of",
    "cross_check",
    "defect_study",
    "ensures",
    "fbeta",
    "fit_rate",
    "hitting_probability",
    "load_config",
    "main",
    "martingale_defect",
    "norm_cdf",
    "path_stream",
    "payoff_eval",
    "price_fbeta",
    "price_naive",
    "price_rebate",
    "price_truncated",
    "proxy_reference",
    "rate_exponent",
    "rate_study",
    "rebate_eval",
    "requires",
    "sigma_eval",
    "simulate_block",
    "simulate_path",
    "solve",
    "solve_fbeta_pde",
    "solve_naive_pde",
    "solve_rebate_pde",
    "solve_truncated_pde",
    "surface_at",
    "truncate_payoff",
    "uniqueness_integral_diverges",
]
