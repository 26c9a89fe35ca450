"""Economic network data model, validation and the feasibility closure.

A network is a seller plus agents. Buyers carry a bid; intermediaries carry
a public cost and a neighbour set they *may* forward the sale to. What the
agents actually declare is a :class:`ReportProfile`; :func:`apply_reports`
turns any such profile into the :class:`EffectiveNetwork` of agents the sale
information really reaches.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Union

from .numbers import ZERO, to_json_number, to_rational

SELLER = "seller"
BUYER = "buyer"
INTERMEDIARY = "intermediary"
KINDS = (BUYER, INTERMEDIARY)


class NetworkError(Exception):
    """Base for errors raised by the network model."""


class NetworkFormatError(NetworkError):
    """The network document could not be parsed."""


class InvalidReport(NetworkError):
    """A report is not something the agent is allowed to declare."""


@dataclass(frozen=True)
class Agent:
    id: str
    kind: str
    bid: Optional[Fraction] = None
    cost: Optional[Fraction] = None
    neighbours: Optional[FrozenSet[str]] = None

    @property
    def is_buyer(self) -> bool:
        return self.kind == BUYER

    @property
    def is_intermediary(self) -> bool:
        return self.kind == INTERMEDIARY


def buyer(id: str, bid) -> Agent:
    return Agent(id, BUYER, bid=to_rational(bid))


def intermediary(id: str, cost, neighbours: Iterable[str]) -> Agent:
    return Agent(id, INTERMEDIARY, cost=to_rational(cost), neighbours=frozenset(neighbours))


@dataclass(frozen=True, eq=False)
class EconomicNetwork:
    seller_neighbours: FrozenSet[str]
    agents: Mapping[str, Agent]

    @classmethod
    def build(cls, seller_neighbours: Iterable[str], agents: Iterable[Agent]) -> "EconomicNetwork":
        table: Dict[str, Agent] = {}
        for agent in agents:
            if agent.id in table:
                raise NetworkFormatError(f"duplicate agent id {agent.id!r}")
            table[agent.id] = agent
        return cls(frozenset(seller_neighbours), dict(sorted(table.items())))

    def __eq__(self, other):
        if not isinstance(other, EconomicNetwork):
            return NotImplemented
        return self.seller_neighbours == other.seller_neighbours and dict(self.agents) == dict(other.agents)

    def cost(self, agent_id: str) -> Fraction:
        agent = self.agents[agent_id]
        return agent.cost if agent.is_intermediary and agent.cost is not None else ZERO

    def buyers(self) -> List[str]:
        return [a.id for a in self.agents.values() if a.is_buyer]

    def intermediaries(self) -> List[str]:
        return [a.id for a in self.agents.values() if a.is_intermediary]

    def neighbours(self, agent_id: str) -> FrozenSet[str]:
        if agent_id == SELLER:
            return self.seller_neighbours
        return self.agents[agent_id].neighbours or frozenset()

    def with_link(self, source: str, target: str) -> "EconomicNetwork":
        """Copy of the network where ``source`` can also reach ``target``."""
        if source == SELLER:
            return EconomicNetwork.build(self.seller_neighbours | {target}, self.agents.values())
        agent = self.agents[source]
        if not agent.is_intermediary:
            raise NetworkError(f"{source!r} is not an intermediary")
        updated = Agent(agent.id, agent.kind, cost=agent.cost,
                        neighbours=(agent.neighbours or frozenset()) | {target})
        return EconomicNetwork.build(
            self.seller_neighbours, [updated if a.id == source else a for a in self.agents.values()])

    def is_tree(self) -> bool:
        """True when every agent has exactly one inbound link and all are reachable."""
        indegree = {agent_id: 0 for agent_id in self.agents}
        for source in [SELLER, *self.intermediaries()]:
            for target in self.neighbours(source):
                if target in indegree:
                    indegree[target] += 1
        if any(count != 1 for count in indegree.values()):
            return False
        return reachable(self.seller_neighbours, lambda a: self.neighbours(a)
                         if self.agents[a].is_intermediary else ()) == set(self.agents)


# -- validation ----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    agent: Optional[str] = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" at {self.agent!r}" if self.agent is not None else ""
        extra = f": {self.detail}" if self.detail else ""
        return f"{type(self).__name__}{where}{extra}"


class DanglingReference(Violation):
    """``detail`` holds the missing id; ``agent`` the referrer (None for the seller)."""


class ReservedId(Violation):
    pass


class EmptyId(Violation):
    pass


class UnknownKind(Violation):
    pass


class MissingField(Violation):
    pass


class UnexpectedField(Violation):
    pass


class NegativeBid(Violation):
    pass


class NegativeCost(Violation):
    pass


class BuyerHasNeighbours(Violation):
    pass


class SelfLink(Violation):
    pass


class SellerInNeighbours(Violation):
    pass


class OverlappingBuyerGroups(Violation):
    pass


def validate_network(net: EconomicNetwork, strict: bool = False) -> List[Violation]:
    """Every structural problem of ``net``; an empty list means it is usable.

    ``strict`` additionally rejects a buyer that sits in more than one
    intermediary's neighbour set.
    """
    problems: List[Violation] = []
    for agent_id in sorted(net.seller_neighbours):
        if agent_id == SELLER:
            problems.append(SellerInNeighbours(None, "seller lists itself"))
        elif agent_id not in net.agents:
            problems.append(DanglingReference(None, agent_id))

    owners: Dict[str, List[str]] = {}
    for key, agent in net.agents.items():
        if key != agent.id:
            problems.append(Violation(key, f"keyed under {key!r} but id is {agent.id!r}"))
        if not agent.id:
            problems.append(EmptyId(agent.id))
        elif agent.id == SELLER:
            problems.append(ReservedId(agent.id, f"{SELLER!r} names the seller"))
        if agent.kind not in KINDS:
            problems.append(UnknownKind(agent.id, repr(agent.kind)))
            continue
        if agent.is_buyer:
            if agent.bid is None:
                problems.append(MissingField(agent.id, "bid"))
            elif agent.bid < 0:
                problems.append(NegativeBid(agent.id, str(agent.bid)))
            if agent.cost is not None:
                problems.append(UnexpectedField(agent.id, "cost"))
            if agent.neighbours is not None:
                problems.append(BuyerHasNeighbours(agent.id))
            continue
        if agent.cost is None:
            problems.append(MissingField(agent.id, "cost"))
        elif agent.cost < 0:
            problems.append(NegativeCost(agent.id, str(agent.cost)))
        if agent.bid is not None:
            problems.append(UnexpectedField(agent.id, "bid"))
        if agent.neighbours is None:
            problems.append(MissingField(agent.id, "neighbours"))
            continue
        for other in sorted(agent.neighbours):
            if other == agent.id:
                problems.append(SelfLink(agent.id))
            elif other == SELLER:
                problems.append(SellerInNeighbours(agent.id))
            elif other not in net.agents:
                problems.append(DanglingReference(agent.id, other))
            elif net.agents[other].is_buyer:
                owners.setdefault(other, []).append(agent.id)

    if strict:
        for buyer_id, parents in sorted(owners.items()):
            if len(parents) > 1:
                problems.append(OverlappingBuyerGroups(buyer_id, ",".join(sorted(parents))))
    return problems


# -- reports ---------------------------------------------------------------

@dataclass(frozen=True)
class BidReport:
    bid: Fraction


@dataclass(frozen=True)
class ShareReport:
    neighbours: FrozenSet[str]


Report = Union[BidReport, ShareReport, None]
NIL: Report = None


@dataclass(frozen=True, eq=False)
class ReportProfile:
    """Declared reports; an absent key means nil."""
    reports: Mapping[str, Report] = field(default_factory=dict)

    def get(self, agent_id: str) -> Report:
        return self.reports.get(agent_id)

    def replace(self, agent_id: str, report: Report) -> "ReportProfile":
        updated = dict(self.reports)
        updated[agent_id] = report
        return ReportProfile(updated)

    def __eq__(self, other):
        if not isinstance(other, ReportProfile):
            return NotImplemented
        mine = {k: v for k, v in self.reports.items() if v is not None}
        theirs = {k: v for k, v in other.reports.items() if v is not None}
        return mine == theirs


def reachable(starts: Iterable[str], links) -> set:
    """Breadth-first closure; ``links(agent)`` yields its outgoing targets."""
    seen = set()
    queue = deque()
    for agent_id in sorted(starts):
        if agent_id not in seen:
            seen.add(agent_id)
            queue.append(agent_id)
    while queue:
        current = queue.popleft()
        for nxt in sorted(links(current)):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


@dataclass(frozen=True, eq=False)
class EffectiveNetwork:
    """The participating sub-network induced by a report profile.

    ``effective_links`` only ever points at participants, and only
    intermediaries appear as keys.
    """
    base: EconomicNetwork
    participants: FrozenSet[str]
    effective_links: Mapping[str, FrozenSet[str]]
    effective_bids: Mapping[str, Fraction]

    def cost(self, agent_id: str) -> Fraction:
        return self.base.cost(agent_id)

    def links(self, agent_id: str) -> FrozenSet[str]:
        if agent_id == SELLER:
            return self.base.seller_neighbours & self.participants
        return self.effective_links.get(agent_id, frozenset())

    def is_intermediary(self, agent_id: str) -> bool:
        return self.base.agents[agent_id].is_intermediary

    def buyers(self) -> List[str]:
        return sorted(self.effective_bids)

    def as_profile(self) -> ReportProfile:
        reports: Dict[str, Report] = {}
        for agent_id in sorted(self.participants):
            if agent_id in self.effective_bids:
                reports[agent_id] = BidReport(self.effective_bids[agent_id])
            else:
                reports[agent_id] = ShareReport(self.effective_links.get(agent_id, frozenset()))
        return ReportProfile(reports)

    def restrict(self, removed: Iterable[str] = (),
                 withheld: Optional[Mapping[str, Iterable[str]]] = None) -> "EffectiveNetwork":
        """Drop ``removed`` agents and cut ``withheld`` links, then re-close.

        Only ever shrinks the network, so recomputing the closure over the
        current links is equivalent to re-applying a full report profile.
        """
        gone = frozenset(removed)
        cuts = {k: frozenset(v) for k, v in (withheld or {}).items()}
        links = {
            agent_id: targets - gone - cuts.get(agent_id, frozenset())
            for agent_id, targets in self.effective_links.items() if agent_id not in gone
        }
        alive = reachable(
            (self.base.seller_neighbours & self.participants) - gone,
            lambda a: links.get(a, ()),
        )
        return _freeze(self.base, alive, links, self.effective_bids)


def _freeze(base, alive, links, bids) -> EffectiveNetwork:
    alive = frozenset(alive)
    return EffectiveNetwork(
        base=base,
        participants=alive,
        effective_links={k: frozenset(v & alive) for k, v in sorted(links.items()) if k in alive},
        effective_bids={k: bids[k] for k in sorted(bids) if k in alive},
    )


def truthful_profile(net: EconomicNetwork) -> ReportProfile:
    """Everyone bids their value and shares with every neighbour; unreachable agents are nil."""
    alive = reachable(net.seller_neighbours & set(net.agents),
                      lambda a: net.neighbours(a) if net.agents[a].is_intermediary else ())
    reports: Dict[str, Report] = {}
    for agent_id, agent in net.agents.items():
        if agent_id not in alive:
            reports[agent_id] = NIL
        elif agent.is_buyer:
            reports[agent_id] = BidReport(agent.bid)
        else:
            reports[agent_id] = ShareReport(agent.neighbours or frozenset())
    return ReportProfile(reports)


def check_report(net: EconomicNetwork, agent_id: str, report: Report) -> None:
    if agent_id not in net.agents:
        raise InvalidReport(f"report for unknown agent {agent_id!r}")
    if report is None:
        return
    agent = net.agents[agent_id]
    if agent.is_buyer:
        if not isinstance(report, BidReport):
            raise InvalidReport(f"buyer {agent_id!r} can only report a bid")
        if report.bid < 0:
            raise InvalidReport(f"negative bid {report.bid} from {agent_id!r}")
    else:
        if not isinstance(report, ShareReport):
            raise InvalidReport(f"intermediary {agent_id!r} can only report a share set")
        extra = report.neighbours - (agent.neighbours or frozenset())
        if extra:
            raise InvalidReport(f"{agent_id!r} shares with non-neighbours {sorted(extra)}")


def apply_reports(net: EconomicNetwork, raw: ReportProfile) -> EffectiveNetwork:
    """Feasibility closure of ``raw``.

    An agent participates when it has a non-nil report and some chain of
    participating intermediaries' share sets reaches it from the seller. A
    nil report always means "not taking part" (never informed, or withdrew),
    so the agent contributes neither a bid nor links.
    """
    for agent_id, report in raw.reports.items():
        check_report(net, agent_id, report)

    active = {a for a in net.agents if raw.get(a) is not None}
    links = {
        agent_id: frozenset(raw.get(agent_id).neighbours) & active
        for agent_id in active if net.agents[agent_id].is_intermediary
    }
    bids = {agent_id: raw.get(agent_id).bid for agent_id in active if net.agents[agent_id].is_buyer}
    alive = reachable(net.seller_neighbours & active, lambda a: links.get(a, ()))
    return _freeze(net, alive, links, bids)


# -- JSON ----------------------------------------------------------------

def network_from_dict(doc: Mapping) -> EconomicNetwork:
    """Parse the network document; shape errors raise, semantic ones are left to validation."""
    try:
        seller_neighbours = doc["seller_neighbours"]
        raw_agents = doc["agents"]
    except (KeyError, TypeError) as exc:
        raise NetworkFormatError(f"missing top-level field {exc}") from None
    if not isinstance(seller_neighbours, list) or not isinstance(raw_agents, list):
        raise NetworkFormatError("seller_neighbours and agents must be arrays")

    agents = []
    for entry in raw_agents:
        if not isinstance(entry, Mapping) or not isinstance(entry.get("id"), str):
            raise NetworkFormatError(f"agent entry without a string id: {entry!r}")
        try:
            bid = to_rational(entry["bid"]) if "bid" in entry else None
            cost = to_rational(entry["cost"]) if "cost" in entry else None
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(f"agent {entry['id']!r}: {exc}") from None
        neighbours = entry.get("neighbours")
        if neighbours is not None:
            if not isinstance(neighbours, list) or not all(isinstance(n, str) for n in neighbours):
                raise NetworkFormatError(f"agent {entry['id']!r}: neighbours must be a list of ids")
            neighbours = frozenset(neighbours)
        agents.append(Agent(entry["id"], entry.get("kind"), bid=bid, cost=cost, neighbours=neighbours))
    if not all(isinstance(n, str) for n in seller_neighbours):
        raise NetworkFormatError("seller_neighbours must be a list of ids")
    return EconomicNetwork.build(seller_neighbours, agents)


def network_to_dict(net: EconomicNetwork) -> dict:
    agents = []
    for agent in net.agents.values():
        entry: dict = {"id": agent.id, "kind": agent.kind}
        if agent.bid is not None:
            entry["bid"] = to_json_number(agent.bid)
        if agent.cost is not None:
            entry["cost"] = to_json_number(agent.cost)
        if agent.neighbours is not None:
            entry["neighbours"] = sorted(agent.neighbours)
        agents.append(entry)
    return {"seller_neighbours": sorted(net.seller_neighbours), "agents": agents}


def dumps_network(net: EconomicNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def loads_network(text: str) -> EconomicNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"invalid JSON: {exc}") from None
    return network_from_dict(doc)


def load_network(path) -> EconomicNetwork:
    with open(path, encoding="utf-8") as fh:
        return loads_network(fh.read())
