"""Vickrey, VCG, IDM-TC and CSM over a reported economic network.

Every mechanism takes the true network (costs are public) plus a report
profile, closes the profile to its feasible form, and only ever looks at
the resulting effective network.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Mapping, NamedTuple, Optional

from .graph import (
    Allocation,
    TradingChain,
    diffusion_critical_sequence,
    diffusion_critical_set,
    efficient_allocation,
    welfare_without,
    welfare_withholding,
)
from .network import EconomicNetwork, EffectiveNetwork, ReportProfile, apply_reports
from .numbers import ZERO, format_rational


@dataclass(frozen=True, eq=False)
class MechanismOutcome:
    mechanism: str
    winner: Optional[str]
    chain: Optional[TradingChain]
    allocation: Mapping[str, int]
    payments: Mapping[str, Fraction]
    welfare: Fraction

    @property
    def revenue(self) -> Fraction:
        return sum(self.payments.values(), ZERO)

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "winner": self.winner,
            "chain": list(self.chain.path) if self.chain else None,
            "payments": {k: format_rational(v) for k, v in self.payments.items() if v != 0},
            "revenue": format_rational(self.revenue),
            "welfare": format_rational(self.welfare),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _outcome(name: str, eff: EffectiveNetwork, alloc: Allocation,
             payments: Dict[str, Fraction]) -> MechanismOutcome:
    allocation = {agent_id: 0 for agent_id in eff.base.agents}
    if alloc.winner is not None:
        for agent_id in alloc.chain.intermediaries:
            allocation[agent_id] = -1
        allocation[alloc.winner] = 1
    full = {agent_id: payments.get(agent_id, ZERO) for agent_id in eff.base.agents}
    return MechanismOutcome(name, alloc.winner, alloc.chain, allocation, full, alloc.welfare)


def reported_value(eff: EffectiveNetwork, agent_id: str, alloc: Allocation) -> Fraction:
    """``v_i`` under the reports: bid if winning, minus cost if on the chain."""
    if alloc.winner is None:
        return ZERO
    if agent_id == alloc.winner:
        return eff.effective_bids[agent_id]
    if agent_id in alloc.chain.intermediaries:
        return -eff.cost(agent_id)
    return ZERO


def utilities(net: EconomicNetwork, outcome: MechanismOutcome) -> Dict[str, Fraction]:
    """Quasilinear utility of every agent, valued at its *true* type."""
    result = {}
    for agent_id, agent in net.agents.items():
        role = outcome.allocation.get(agent_id, 0)
        if role == 1:
            value = agent.bid
        elif role == -1:
            value = -net.cost(agent_id)
        else:
            value = ZERO
        result[agent_id] = value - outcome.payments.get(agent_id, ZERO)
    return result


# -- Vickrey ----------------------------------------------------------------

def run_vickrey(net: EconomicNetwork, profile: ReportProfile) -> MechanismOutcome:
    """Second-price auction among the seller's own buyers; nobody forwards anything."""
    eff = apply_reports(net, profile)
    direct = sorted(
        ((eff.effective_bids[b], b) for b in eff.buyers() if b in net.seller_neighbours),
        key=lambda pair: (-pair[0], pair[1]),
    )
    if not direct:
        return _outcome("vickrey", eff, Allocation(None, None, ZERO), {})
    top_bid, winner = direct[0]
    price = direct[1][0] if len(direct) > 1 else ZERO
    alloc = Allocation(winner, TradingChain((winner,), ZERO), top_bid)
    return _outcome("vickrey", eff, alloc, {winner: price})


# -- VCG --------------------------------------------------------------------

def run_vcg(net: EconomicNetwork, profile: ReportProfile) -> MechanismOutcome:
    eff = apply_reports(net, profile)
    alloc = efficient_allocation(eff)
    payments = {
        agent_id: welfare_without(eff, {agent_id}) - (alloc.welfare - reported_value(eff, agent_id, alloc))
        for agent_id in sorted(eff.participants)
    }
    return _outcome("vcg", eff, alloc, payments)


# -- IDM-TC -------------------------------------------------------------------

def run_idm_tc(net: EconomicNetwork, profile: ReportProfile) -> MechanismOutcome:
    eff = apply_reports(net, profile)
    alloc = efficient_allocation(eff)
    if alloc.winner is None:
        return _outcome("idm-tc", eff, alloc, {})
    winner, chain = alloc.winner, alloc.chain
    critical = diffusion_critical_sequence(eff, winner)

    payments: Dict[str, Fraction] = {}
    for here, nxt in zip(critical, critical[1:]):
        payments[here] = (welfare_without(eff, diffusion_critical_set(eff, here))
                          - welfare_without(eff, diffusion_critical_set(eff, nxt))
                          - eff.cost(here))
    for agent_id in chain.intermediaries:
        if agent_id not in critical:
            payments[agent_id] = -eff.cost(agent_id)
    payments[winner] = welfare_without(eff, {winner}) + chain.transaction_cost
    return _outcome("idm-tc", eff, alloc, payments)


# -- CSM ----------------------------------------------------------------------

class Threshold(NamedTuple):
    """Result of the threshold-neighbourhood construction for one intermediary.

    ``changed`` is True only when withholding ``withheld`` moves the sale to
    ``new_winner`` (None meaning no trade); otherwise ``withheld`` is the whole
    reported share set.
    """
    withheld: FrozenSet[str]
    changed: bool
    new_winner: Optional[str]
    new_chain: Optional[TradingChain]


def threshold_details(eff: EffectiveNetwork, agent_id: str,
                      alloc: Optional[Allocation] = None) -> Threshold:
    shared = eff.links(agent_id)
    alloc = efficient_allocation(eff) if alloc is None else alloc
    if alloc.winner is None or agent_id not in alloc.chain.intermediaries:
        return Threshold(shared, False, alloc.winner, alloc.chain)

    withheld = set()
    chain = alloc.chain
    while True:
        withheld.add(chain.successor(agent_id))
        current = efficient_allocation(eff.restrict(withheld={agent_id: withheld}))
        if current.winner != alloc.winner:
            return Threshold(frozenset(withheld), True, current.winner, current.chain)
        if agent_id not in current.chain.intermediaries:
            return Threshold(shared, False, current.winner, current.chain)
        chain = current.chain


def threshold_neighbourhood(eff: EffectiveNetwork, agent_id: str) -> FrozenSet[str]:
    """Smallest part of the reported share set whose withholding changes the winner."""
    return threshold_details(eff, agent_id).withheld


def run_csm(net: EconomicNetwork, profile: ReportProfile) -> MechanismOutcome:
    eff = apply_reports(net, profile)
    alloc = efficient_allocation(eff)
    payments: Dict[str, Fraction] = {}
    if alloc.winner is None:
        return _outcome("csm", eff, alloc, payments)
    for agent_id in sorted(eff.participants):
        value = reported_value(eff, agent_id, alloc)
        if eff.is_intermediary(agent_id):
            withheld = threshold_details(eff, agent_id, alloc).withheld
            payments[agent_id] = (welfare_without(eff, diffusion_critical_set(eff, agent_id))
                                  - welfare_withholding(eff, agent_id, withheld)
                                  + value)
        else:
            payments[agent_id] = welfare_without(eff, {agent_id}) - alloc.welfare + value
    return _outcome("csm", eff, alloc, payments)


def csm_revenue_floor(eff: EffectiveNetwork) -> Fraction:
    """Welfare with the critical set of the first chain member whose threshold is a proper subset removed.

    Falls back to removing just the winner when no chain member qualifies.
    """
    alloc = efficient_allocation(eff)
    if alloc.winner is None:
        return ZERO
    for agent_id in alloc.chain.intermediaries:
        if threshold_details(eff, agent_id, alloc).withheld != eff.links(agent_id):
            return welfare_without(eff, diffusion_critical_set(eff, agent_id))
    return welfare_without(eff, {alloc.winner})


def suffix_overlaps(eff: EffectiveNetwork) -> List[str]:
    """Chain members whose winner-changing withholding reroutes through their own downstream chain.

    Empty when the downstream part of the winning chain is always disjoint
    from the new winner's chain.
    """
    alloc = efficient_allocation(eff)
    if alloc.winner is None:
        return []
    bad = []
    path = alloc.chain.path
    for position, agent_id in enumerate(alloc.chain.intermediaries):
        result = threshold_details(eff, agent_id, alloc)
        if not result.changed or result.new_chain is None:
            continue
        if set(path[position + 1:]) & set(result.new_chain.path):
            bad.append(agent_id)
    return bad


Mechanism = Callable[[EconomicNetwork, ReportProfile], MechanismOutcome]

MECHANISMS: Dict[str, Mechanism] = {
    "vickrey": run_vickrey,
    "vcg": run_vcg,
    "idm-tc": run_idm_tc,
    "csm": run_csm,
}


def canonical_name(name: str) -> str:
    key = name.lower().replace("_", "-")
    if key not in MECHANISMS:
        raise KeyError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISMS)}")
    return key


def get_mechanism(name: str) -> Mechanism:
    return MECHANISMS[canonical_name(name)]
