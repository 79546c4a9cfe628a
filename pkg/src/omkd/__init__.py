"""Online primal-dual allocation for multiple knapsacks with departures."""
from .assignment import BatchAssignment, solve_batch_assignment
from .basic import BatchResult, Decision, Trace, run, select_resource, step
from .batch import residual_rewards, run_lb, step_batch
from .estimators import (
    GreedyAllocator,
    LoadBalancedAllocator,
    MultiDimAllocator,
    PrimalDualAllocator,
    check_instance,
)
from .generators import GeneratorConfig, adversarial_density_ramp, generate
from .instance import (
    DeclaredBounds,
    FluctuationStats,
    Instance,
    Offer,
    Request,
    Resource,
    fluctuation_stats,
    load_instance,
    pricing_stats,
    total_demand_fluctuation,
    value_density,
)
from .multidim import run_md, select_resource_md, step_md
from .oracle import (
    OfflineSolution,
    empirical_cr,
    exact_optimum,
    theoretical_cr_bound,
    verify_dual_certificate,
)
from .pricing import (
    PriceState,
    UpdateFactors,
    apply_update,
    closed_form_price,
    gamma_basic,
    gamma_md,
    posted_cost,
    update_factors,
)
from .validation import ValidationReport, validate_instance

__version__ = "0.1.0"
