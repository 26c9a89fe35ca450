"""Brute-force strategic deviation checks.

For one agent at a time every alternative report is tried while the others
stay truthful, and the resulting utility is valued at the agent's true type.
Intermediaries try every subset of their neighbours; buyers try a bid grid
that hits every point where their utility can change.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from ..graph import chain_table, enumerate_all_chains, social_welfare
from ..mechanisms import MECHANISMS, canonical_name, get_mechanism, utilities
from ..network import (
    BidReport,
    EconomicNetwork,
    ReportProfile,
    ShareReport,
    apply_reports,
    truthful_profile,
)
from ..numbers import ZERO, format_rational, to_rational

SUBSET_CAP = 20
DEFAULT_RESOLUTION = Fraction(1, 2)

IC, IR, WBB = "IC", "IR", "WBB"
TIE, NO_TRADE = "tie", "no_trade"


class SubsetExplosion(Exception):
    """An intermediary has too many neighbours to enumerate every share set."""


class RevenueBoundError(AssertionError):
    """A revenue ordering that should always hold was broken."""


@dataclass(frozen=True)
class AltBid:
    value: Fraction


@dataclass(frozen=True)
class AltShare:
    neighbours: FrozenSet[str]


@dataclass(frozen=True)
class Withdraw:
    pass


Deviation = Union[AltBid, AltShare, Withdraw]


@dataclass(frozen=True)
class DeviationSpec:
    agent: str
    deviation: Deviation

    def describe(self) -> str:
        d = self.deviation
        if isinstance(d, AltBid):
            return f"bid {format_rational(d.value)}"
        if isinstance(d, AltShare):
            return "share {" + ",".join(sorted(d.neighbours)) + "}"
        return "withdraw"

    def report(self):
        d = self.deviation
        if isinstance(d, AltBid):
            return BidReport(d.value)
        if isinstance(d, AltShare):
            return ShareReport(d.neighbours)
        return None


@dataclass(frozen=True)
class DeviationReport:
    mechanism: str
    agent: str
    truthful_utility: Fraction
    best_deviation: Optional[DeviationSpec]
    best_deviation_utility: Fraction
    property_violated: Optional[str]
    violations: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "agent": self.agent,
            "truthful_utility": format_rational(self.truthful_utility),
            "best_deviation": self.best_deviation.describe() if self.best_deviation else None,
            "best_deviation_utility": format_rational(self.best_deviation_utility),
            "property_violated": self.property_violated,
        }


def full_type_profile(net: EconomicNetwork) -> ReportProfile:
    """Every agent reports its true type, informed or not; the closure sorts out reachability."""
    reports = {}
    for agent_id, agent in net.agents.items():
        if agent.is_buyer:
            reports[agent_id] = BidReport(agent.bid)
        else:
            reports[agent_id] = ShareReport(agent.neighbours or frozenset())
    return ReportProfile(reports)


def deviated_profile(net: EconomicNetwork, spec: DeviationSpec) -> ReportProfile:
    return full_type_profile(net).replace(spec.agent, spec.report())


def bid_grid(net: EconomicNetwork, agent_id: str, resolution=DEFAULT_RESOLUTION) -> List[Fraction]:
    """Candidate misreports for a buyer.

    A buyer's bid only moves its own chain welfare, so the outcome can only
    change where that welfare crosses zero or another buyer's. Those
    crossings (plus and minus ``resolution``), midpoints between neighbouring
    candidates, all bids, and one value above everything are enough to
    visit every piece of the utility function.
    """
    step = to_rational(resolution)
    eff = apply_reports(net, truthful_profile(net))
    table = chain_table(eff)
    points = {ZERO, net.agents[agent_id].bid}
    points.update(a.bid for a in net.agents.values() if a.is_buyer)
    if agent_id in table:
        base = table[agent_id].transaction_cost
        others = [w for b, w in social_welfare(eff).items() if b != agent_id]
        for pivot in [base, *(base + w for w in others)]:
            points.update({pivot, pivot - step, pivot + step})
    points = sorted(p for p in points if p >= 0)
    mids = [(a + b) / 2 for a, b in zip(points, points[1:])]
    top = points[-1] + max(step, Fraction(1))
    return sorted(set(points) | set(mids) | {top})


def enumerate_deviations(net: EconomicNetwork, agent_id: str,
                         bid_grid: Sequence = ()) -> List[DeviationSpec]:
    agent = net.agents[agent_id]
    specs: List[DeviationSpec] = []
    if agent.is_buyer:
        for value in sorted({to_rational(v) for v in bid_grid}):
            specs.append(DeviationSpec(agent_id, AltBid(value)))
    else:
        neighbours = sorted(agent.neighbours or ())
        if len(neighbours) > SUBSET_CAP:
            raise SubsetExplosion(f"{agent_id!r} has {len(neighbours)} neighbours (cap {SUBSET_CAP})")
        for size in range(len(neighbours) + 1):
            for subset in combinations(neighbours, size):
                specs.append(DeviationSpec(agent_id, AltShare(frozenset(subset))))
    specs.append(DeviationSpec(agent_id, Withdraw()))
    return specs


def classify_instance(net: EconomicNetwork) -> Optional[str]:
    """``"no_trade"``, ``"tie"`` (top welfare shared by two buyers, or equal to zero) or None."""
    eff = apply_reports(net, truthful_profile(net))
    welfare = sorted(social_welfare(eff).values(), reverse=True)
    if not welfare or welfare[0] < 0:
        return NO_TRADE
    if welfare[0] == 0 or (len(welfare) > 1 and welfare[0] == welfare[1]):
        return TIE
    return None


def check_incentives(net: EconomicNetwork, mechanism: str,
                     bid_grid_resolution=DEFAULT_RESOLUTION) -> List[DeviationReport]:
    """One report per truthfully participating agent."""
    name = canonical_name(mechanism)
    run = get_mechanism(name)
    truthful = run(net, truthful_profile(net))
    truth_u = utilities(net, truthful)
    truth_rev = truthful.revenue
    participants = sorted(apply_reports(net, truthful_profile(net)).participants)

    reports = []
    for agent_id in participants:
        agent = net.agents[agent_id]
        grid = bid_grid(net, agent_id, bid_grid_resolution) if agent.is_buyer else ()
        best_spec, best_u = None, None
        worst_share_u, worst_rev = None, truth_rev
        for spec in enumerate_deviations(net, agent_id, grid):
            outcome = run(net, deviated_profile(net, spec))
            u = utilities(net, outcome)[agent_id]
            if best_u is None or u > best_u:
                best_spec, best_u = spec, u
            if isinstance(spec.deviation, AltShare):
                worst_share_u = u if worst_share_u is None else min(worst_share_u, u)
            worst_rev = min(worst_rev, outcome.revenue)

        flags = []
        if best_u is not None and best_u > truth_u[agent_id]:
            flags.append(IC)
        if truth_u[agent_id] < 0 or (worst_share_u is not None and worst_share_u < 0):
            flags.append(IR)
        if worst_rev < 0:
            flags.append(WBB)
        reports.append(DeviationReport(
            mechanism=name,
            agent=agent_id,
            truthful_utility=truth_u[agent_id],
            best_deviation=best_spec,
            best_deviation_utility=best_u if best_u is not None else truth_u[agent_id],
            property_violated=flags[0] if flags else None,
            violations=tuple(flags),
        ))
    return reports


@dataclass
class VerificationReport:
    mechanism: str
    excluded: Optional[str]
    reports: List[DeviationReport] = field(default_factory=list)

    @property
    def summary(self) -> Dict[str, int]:
        def count(flag):
            return sum(flag in r.violations for r in self.reports)
        return {
            "ic_violations": 0 if self.excluded else count(IC),
            "ir_violations": count(IR),
            "wbb_violations": count(WBB),
            "ties_skipped": int(self.excluded == TIE),
            "no_trade_skipped": int(self.excluded == NO_TRADE),
        }

    @property
    def violation_count(self) -> int:
        s = self.summary
        return s["ic_violations"] + s["ir_violations"] + s["wbb_violations"]

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "excluded": self.excluded,
            "reports": [r.to_dict() for r in self.reports],
            "summary": self.summary,
        }


def verify_network(net: EconomicNetwork, mechanism: str,
                   bid_grid_resolution=DEFAULT_RESOLUTION) -> VerificationReport:
    reports = check_incentives(net, mechanism, bid_grid_resolution)
    return VerificationReport(canonical_name(mechanism), classify_instance(net), reports)


def verification_json(results: Iterable[VerificationReport]) -> str:
    """Reports grouped per mechanism, with summary counts added up."""
    grouped: Dict[str, dict] = {}
    for result in results:
        entry = grouped.setdefault(result.mechanism, {
            "reports": [],
            "summary": dict.fromkeys(result.summary, 0),
        })
        entry["reports"].extend(r.to_dict() for r in result.reports)
        for key, value in result.summary.items():
            entry["summary"][key] += value
    return json.dumps(grouped, indent=2)


def _verify_job(args):
    net, mechanism, resolution = args
    return verify_network(net, mechanism, resolution)


def verify_many(nets: Sequence[EconomicNetwork], mechanism: str,
                bid_grid_resolution=DEFAULT_RESOLUTION, workers: int = 1) -> List[VerificationReport]:
    """Verify independent instances, optionally across processes; order follows ``nets``."""
    jobs = [(net, mechanism, bid_grid_resolution) for net in nets]
    if workers <= 1:
        return [_verify_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_verify_job, jobs, chunksize=max(1, len(jobs) // (workers * 4))))


# -- efficiency and revenue ---------------------------------------------------

def brute_force_welfare(net: EconomicNetwork) -> Fraction:
    """Optimal welfare by enumerating every chain to every buyer."""
    eff = apply_reports(net, truthful_profile(net))
    best = ZERO
    for buyer_id in eff.buyers():
        for chain in enumerate_all_chains(eff, buyer_id):
            best = max(best, eff.effective_bids[buyer_id] - chain.transaction_cost)
    return best


def check_efficiency(net: EconomicNetwork, mechanism: str) -> bool:
    outcome = get_mechanism(mechanism)(net, truthful_profile(net))
    return outcome.welfare == brute_force_welfare(net)


def compare_revenues(net: EconomicNetwork, check: bool = True) -> Dict[str, Fraction]:
    """Truthful revenue of every mechanism.

    With ``check`` the orderings CSM >= Vickrey >= 0 and, on trees,
    IDM-TC >= Vickrey are enforced.
    """
    profile = truthful_profile(net)
    revenues = {name: run(net, profile).revenue for name, run in MECHANISMS.items()}
    if check:
        if not revenues["csm"] >= revenues["vickrey"] >= 0:
            raise RevenueBoundError(f"CSM {revenues['csm']} vs Vickrey {revenues['vickrey']}")
        if net.is_tree() and revenues["idm-tc"] < revenues["vickrey"]:
            raise RevenueBoundError(f"IDM-TC {revenues['idm-tc']} below Vickrey {revenues['vickrey']} on a tree")
    return revenues
