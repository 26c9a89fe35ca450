"""Single-item auctions over economic networks with transaction costs."""
from .graph import (
    TradingChain,
    diffusion_critical_sequence,
    diffusion_critical_set,
    efficient_allocation,
    enumerate_all_chains,
    lowest_cost_chain,
    welfare_without,
)
from .mechanisms import (
    MECHANISMS,
    MechanismOutcome,
    run_csm,
    run_idm_tc,
    run_vcg,
    run_vickrey,
    threshold_neighbourhood,
    utilities,
)
from .network import (
    Agent,
    BidReport,
    EconomicNetwork,
    EffectiveNetwork,
    ReportProfile,
    ShareReport,
    apply_reports,
    buyer,
    intermediary,
    load_network,
    truthful_profile,
    validate_network,
)

__version__ = "0.1.0"
