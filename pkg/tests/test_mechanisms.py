from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from netauction.graph import diffusion_critical_set, efficient_allocation, welfare_without
from netauction.mechanisms import (
    MECHANISMS,
    csm_revenue_floor,
    get_mechanism,
    suffix_overlaps,
    run_csm,
    run_idm_tc,
    run_vcg,
    run_vickrey,
    threshold_details,
    threshold_neighbourhood,
    utilities,
)
from netauction.network import EconomicNetwork, ShareReport, apply_reports, buyer, truthful_profile
from netauction.verification.generator import GeneratorConfig, generate_network

from conftest import truthful_eff

seeds = st.integers(min_value=0, max_value=2**32)


def random_net(seed, tree=False):
    return generate_network(GeneratorConfig(3, 4, Fraction(1, 2), 12, 4, tree, seed, Fraction(1, 3)))


def payments(outcome):
    return {k: v for k, v in outcome.payments.items() if v != 0}


# -- worked examples ----------------------------------------------------------

def test_vickrey_examples(two_buyers, fig1b):
    out = run_vickrey(two_buyers, truthful_profile(two_buyers))
    assert (out.winner, payments(out), out.revenue) == ("X", {"X": 3}, 3)
    assert run_vickrey(fig1b, truthful_profile(fig1b)).revenue == 1
    single = EconomicNetwork.build(["H"], [buyer("H", 7)])
    out = run_vickrey(single, truthful_profile(single))
    assert out.winner == "H" and out.revenue == 0


def test_vickrey_without_direct_buyers(line):
    out = run_vickrey(line, truthful_profile(line))
    assert out.winner is None and out.revenue == 0


def test_vcg_examples(two_buyers, line):
    out = run_vcg(two_buyers, truthful_profile(two_buyers))
    assert payments(out) == {"X": 3}
    # buyer: 0 - (8 - 10) = 2; intermediary: 0 - (8 - (-2)) = -10
    out = run_vcg(line, truthful_profile(line))
    assert payments(out) == {"buyer": 2, "I": -10}
    assert out.revenue == -8


def test_vcg_losing_buyer_pays_nothing(fig1b):
    assert run_vcg(fig1b, truthful_profile(fig1b)).payments["F"] == 0


def test_idm_tc_figure_a(fig1a):
    out = run_idm_tc(fig1a, truthful_profile(fig1a))
    assert payments(out) == {"H": 9, "E": -2, "A": -3}
    assert out.revenue == 4


def test_idm_tc_direct_winner_is_second_price(two_buyers):
    assert payments(run_idm_tc(two_buyers, truthful_profile(two_buyers))) == {"X": 3}


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_idm_tc_tree_revenue_telescopes(seed):
    net = random_net(seed, tree=True)
    eff = truthful_eff(net)
    alloc = efficient_allocation(eff)
    out = run_idm_tc(net, truthful_profile(net))
    if alloc.winner is None:
        assert out.revenue == 0
        return
    first = alloc.chain.path[0]
    assert out.revenue == welfare_without(eff, diffusion_critical_set(eff, first))


def test_threshold_neighbourhoods_figure_b(fig1b):
    eff = truthful_eff(fig1b)
    assert threshold_neighbourhood(eff, "A") == {"E"}
    assert threshold_neighbourhood(eff, "E") == {"H"}
    assert fig1b.agents["A"].neighbours == {"C", "D", "E"}


def test_threshold_off_chain_is_whole_share_set(fig1b):
    eff = truthful_eff(fig1b)
    assert threshold_neighbourhood(eff, "B") == {"C", "F"}


def test_csm_figure_b(fig1b):
    out = run_csm(fig1b, truthful_profile(fig1b))
    assert payments(out) == {"A": -3, "E": -2, "H": 9}
    assert out.revenue == 4
    assert out.to_dict() == {
        "mechanism": "csm", "winner": "H", "chain": ["A", "E", "H"],
        "payments": {"A": "-3", "E": "-2", "H": "9"}, "revenue": "4", "welfare": "9",
    }


def test_csm_two_buyers(two_buyers):
    out = run_csm(two_buyers, truthful_profile(two_buyers))
    assert payments(out) == {"X": 3}


def test_csm_line(line):
    eff = truthful_eff(line)
    assert diffusion_critical_set(eff, "I") == {"I", "buyer"}
    assert threshold_neighbourhood(eff, "I") == {"buyer"}
    out = run_csm(line, truthful_profile(line))
    assert payments(out) == {"buyer": 2, "I": -2}
    assert out.revenue == 0


def test_utilities_use_true_values(fig1b):
    out = run_csm(fig1b, truthful_profile(fig1b))
    u = utilities(fig1b, out)
    assert u["H"] == 1 and u["E"] == 1 and u["A"] == 3
    assert all(u[a] == 0 for a in fig1b.agents if a not in {"A", "E", "H"})


def test_unknown_mechanism():
    with pytest.raises(KeyError):
        get_mechanism("english")
    assert get_mechanism("IDM_TC") is run_idm_tc


# -- invariants -----------------------------------------------------------------

def _random_profile(net, data):
    profile = truthful_profile(net)
    for agent_id in net.intermediaries():
        if profile.get(agent_id) is not None and net.agents[agent_id].neighbours and data.draw(st.booleans()):
            keep = data.draw(st.sets(st.sampled_from(sorted(net.agents[agent_id].neighbours))))
            profile = profile.replace(agent_id, ShareReport(frozenset(keep)))
    return profile


@given(seeds, st.data())
@settings(max_examples=60, deadline=None)
def test_outcome_invariants_for_every_mechanism(seed, data):
    net = random_net(seed)
    profile = _random_profile(net, data)
    eff = apply_reports(net, profile)
    for name, run in MECHANISMS.items():
        out = run(net, profile)
        assert out.revenue == sum(out.payments.values())
        winners = [a for a, r in out.allocation.items() if r == 1]
        assert len(winners) <= 1
        if winners:
            assert net.agents[winners[0]].is_buyer
            assert {a for a, r in out.allocation.items() if r == -1} == set(out.chain.intermediaries)
        else:
            assert set(out.allocation.values()) == {0}
        for agent_id in set(net.agents) - eff.participants:
            assert out.allocation[agent_id] == 0 and out.payments[agent_id] == 0


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_csm_charges_buyers_the_vcg_price(seed):
    net = random_net(seed)
    profile = truthful_profile(net)
    csm, vcg = run_csm(net, profile), run_vcg(net, profile)
    if csm.winner is None:
        return
    for agent_id in net.buyers():
        assert csm.payments[agent_id] == vcg.payments[agent_id]


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_csm_off_chain_agents_and_losers_get_zero(seed):
    net = random_net(seed)
    out = run_csm(net, truthful_profile(net))
    u = utilities(net, out)
    for agent_id, role in out.allocation.items():
        if role == 0:
            assert out.payments[agent_id] == 0
            assert u[agent_id] == 0


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_csm_revenue_ordering(seed):
    net = random_net(seed)
    profile = truthful_profile(net)
    csm = run_csm(net, profile).revenue
    floor = csm_revenue_floor(truthful_eff(net))
    assert csm >= floor >= run_vickrey(net, profile).revenue >= 0


def brute_threshold_size(eff, agent_id):
    """Size of the smallest withheld subset that changes the winner, or None."""
    winner = efficient_allocation(eff).winner
    shared = sorted(eff.links(agent_id))
    for size in range(1, len(shared) + 1):
        for subset in combinations(shared, size):
            if efficient_allocation(eff.restrict(withheld={agent_id: subset})).winner != winner:
                return size
    return None


@given(seeds)
@settings(max_examples=80, deadline=None)
def test_threshold_is_minimal(seed):
    eff = truthful_eff(random_net(seed))
    alloc = efficient_allocation(eff)
    for agent_id in eff.effective_links:
        if len(eff.links(agent_id)) > 6:
            continue
        result = threshold_details(eff, agent_id)
        best = brute_threshold_size(eff, agent_id)
        if best is None:
            assert not result.changed and result.withheld == eff.links(agent_id)
        else:
            assert result.changed and len(result.withheld) == best
            moved = efficient_allocation(eff.restrict(withheld={agent_id: result.withheld}))
            assert moved.winner != alloc.winner


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_chain_suffix_disjoint_from_new_chain(seed):
    assert suffix_overlaps(truthful_eff(random_net(seed))) == []
