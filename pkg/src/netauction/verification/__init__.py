from .fixtures import figure1_fixtures, figure1a, figure1a_with_be, figure1b, line_network, two_buyers
from .generator import GeneratorConfig, generate_network, instance_suite
from .harness import (
    AltBid,
    AltShare,
    DeviationReport,
    DeviationSpec,
    Withdraw,
    check_efficiency,
    check_incentives,
    classify_instance,
    compare_revenues,
    enumerate_deviations,
    verify_network,
)
