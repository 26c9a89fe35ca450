import json
from fractions import Fraction

import pytest

from netauction.network import (
    EconomicNetwork,
    apply_reports,
    buyer,
    dumps_network,
    intermediary,
    reachable,
    truthful_profile,
    validate_network,
)
from netauction.verification.fixtures import figure1_fixtures
from netauction.verification.generator import GeneratorConfig, generate_network, instance_suite
from netauction.verification.harness import (
    IC,
    WBB,
    AltShare,
    DeviationSpec,
    RevenueBoundError,
    Withdraw,
    bid_grid,
    brute_force_welfare,
    check_efficiency,
    check_incentives,
    classify_instance,
    compare_revenues,
    enumerate_deviations,
    verification_json,
    verify_network,
)

from conftest import truthful_eff


def test_share_deviations_are_the_power_set_plus_withdraw():
    net = EconomicNetwork.build(["I"], [intermediary("I", 0, ["X", "Y"]), buyer("X", 1), buyer("Y", 2)])
    specs = enumerate_deviations(net, "I")
    assert len(specs) == 5
    assert specs[-1] == DeviationSpec("I", Withdraw())


def test_bid_deviations_follow_the_grid(two_buyers):
    specs = enumerate_deviations(two_buyers, "X", range(11))
    assert len(specs) == 12
    assert sum(isinstance(s.deviation, Withdraw) for s in specs) == 1


def test_counterexample_deviation_is_enumerated(fig1a_be):
    specs = enumerate_deviations(fig1a_be, "A")
    assert DeviationSpec("A", AltShare(frozenset({"C", "D"}))) in specs


def test_bid_grid_covers_pivots(fig1b):
    grid = bid_grid(fig1b, "H", Fraction(1, 2))
    # H's chain costs 1; it stops winning once its welfare drops under G's 8
    assert {0, 10, 9, Fraction(17, 2), Fraction(19, 2)} <= set(grid)
    assert max(grid) > 12


def test_csm_figure_b_has_no_violations(fig1b):
    reports = check_incentives(fig1b, "csm")
    assert [r for r in reports if r.violations] == []
    assert {r.agent for r in reports} == set(fig1b.agents)


def test_idm_tc_counterexample_gain_is_one(fig1a_be):
    (report,) = [r for r in check_incentives(fig1a_be, "idm-tc") if r.violations]
    assert report.agent == "A" and report.property_violated == IC
    assert report.best_deviation_utility - report.truthful_utility == 1
    assert report.best_deviation == DeviationSpec("A", AltShare(frozenset({"C", "D"})))


def test_vcg_line_deficit(line):
    reports = check_incentives(line, "vcg")
    assert all(r.property_violated == WBB for r in reports)
    assert compare_revenues(line, check=False)["vcg"] == -8


def test_verification_report_json(fig1a_be):
    result = verify_network(fig1a_be, "idm-tc")
    doc = json.loads(verification_json([result]))
    assert doc["idm-tc"]["summary"] == {
        "ic_violations": 1, "ir_violations": 0, "wbb_violations": 0, "ties_skipped": 0, "no_trade_skipped": 0,
    }
    flagged = [r for r in doc["idm-tc"]["reports"] if r["property_violated"]]
    assert flagged == [{
        "mechanism": "idm-tc", "agent": "A", "truthful_utility": "0",
        "best_deviation": "share {C,D}", "best_deviation_utility": "1", "property_violated": "IC",
    }]


def test_tie_instances_are_not_counted_for_ic():
    tied = EconomicNetwork.build(["X", "Y"], [buyer("X", 4), buyer("Y", 4)])
    assert classify_instance(tied) == "tie"
    assert verify_network(tied, "csm").summary["ties_skipped"] == 1
    broke = EconomicNetwork.build(["I"], [intermediary("I", 5, ["H"]), buyer("H", 3)])
    assert classify_instance(broke) == "no_trade"


# -- efficiency ---------------------------------------------------------------

def test_efficiency_beats_a_nearest_buyer_rule():
    # the seller's own buyer (5) is nearest, but the buyer behind I is worth 9 - 1 = 8
    net = EconomicNetwork.build(["N", "I"], [buyer("N", 5), intermediary("I", 1, ["F"]), buyer("F", 9)])
    nearest = max(net.agents[b].bid for b in net.seller_neighbours if net.agents[b].is_buyer)
    assert brute_force_welfare(net) == 8 != nearest
    assert check_efficiency(net, "csm")
    assert not check_efficiency(net, "vickrey")


def test_efficiency_without_buyers():
    net = EconomicNetwork.build(["I"], [intermediary("I", 1, [])])
    assert check_efficiency(net, "csm")


@pytest.mark.parametrize("seed", range(20))
def test_csm_efficient_on_random_instances(seed):
    net = generate_network(GeneratorConfig(4, 4, Fraction(1, 2), 20, 5, False, seed))
    assert check_efficiency(net, "csm")


# -- revenue comparison --------------------------------------------------------

def test_compare_revenues_figures():
    net_a, net_b = figure1_fixtures()
    rev_b = compare_revenues(net_b)
    assert rev_b["csm"] == 4 and rev_b["vickrey"] == 1
    assert compare_revenues(net_a)["idm-tc"] == 4


def test_compare_revenues_two_buyers(two_buyers):
    assert set(compare_revenues(two_buyers).values()) == {3}


def test_revenue_bound_error_type():
    assert issubclass(RevenueBoundError, AssertionError)


# -- generator ------------------------------------------------------------------

def test_generator_is_deterministic():
    config = GeneratorConfig(4, 3, Fraction(1, 2), 20, 5, False, 7)
    assert dumps_network(generate_network(config)) == dumps_network(generate_network(config))
    other = GeneratorConfig(4, 3, Fraction(1, 2), 20, 5, False, 8)
    assert dumps_network(generate_network(config)) != dumps_network(generate_network(other))


@pytest.mark.parametrize("seed", range(15))
def test_generated_networks_are_clean_and_fully_reachable(seed):
    for tree in (False, True):
        net = generate_network(GeneratorConfig(5, 4, Fraction(1, 3), 20, 5, tree, seed, Fraction(1, 4)))
        assert validate_network(net) == []
        assert truthful_eff(net).participants == set(net.agents)


@pytest.mark.parametrize("seed", range(15))
def test_tree_mode_removal_disconnects_exactly_the_subtree(seed):
    net = generate_network(GeneratorConfig(5, 4, Fraction(1, 2), 20, 5, True, seed))
    assert net.is_tree()
    parent = {}
    for source in ["seller", *net.intermediaries()]:
        for target in net.neighbours(source):
            parent[target] = source
    eff = truthful_eff(net)
    for agent_id in net.intermediaries():
        subtree = set()
        for other in net.agents:
            up = other
            while up != "seller":
                if up == agent_id:
                    subtree.add(other)
                    break
                up = parent[up]
        cut = eff.restrict(removed={agent_id}).participants
        assert set(net.agents) - cut == subtree


def test_full_edge_probability_links_everything_forward():
    net = generate_network(GeneratorConfig(6, 4, Fraction(1), 20, 5, False, 3))
    inters = net.intermediaries()
    for pos, agent_id in enumerate(inters):
        assert set(inters[pos + 1:]) <= net.neighbours(agent_id)
    owned = set().union(*(net.neighbours(i) for i in inters)) | net.seller_neighbours
    assert set(net.buyers()) <= owned


def test_zero_edge_probability_hangs_everyone_off_the_seller():
    net = generate_network(GeneratorConfig(2, 2, Fraction(0), 20, 5, False, 1))
    eff = truthful_eff(net)
    direct = reachable(net.seller_neighbours, lambda a: ())
    assert eff.participants == direct == set(net.agents)


def test_generator_rejects_bad_config():
    with pytest.raises(ValueError):
        GeneratorConfig(edge_probability=Fraction(3, 2))
    with pytest.raises(ValueError):
        GeneratorConfig(n_buyers=-1)


def test_instance_suite_respects_size_and_seed():
    nets = instance_suite(30, max_agents=8, seed=11)
    assert all(1 <= len(n.agents) <= 8 and n.buyers() for n in nets)
    assert [dumps_network(n) for n in nets] == [dumps_network(n) for n in instance_suite(30, 8, 11)]
