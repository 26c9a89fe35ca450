"""Trading chains, dominators and welfare over an effective network.

Costs sit on intermediaries, so the cheapest chain to an agent is a
node-weighted shortest path: entering a neighbour of ``u`` adds ``c_u``.
Equal-cost chains are ranked by their agent-id sequence, which makes every
result here deterministic.
"""
from __future__ import annotations

import heapq
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Tuple

from .network import SELLER, EffectiveNetwork, reachable
from .numbers import ZERO

DEFAULT_MAX_ENUM = 14


class InstanceTooLarge(Exception):
    """Brute-force enumeration refused because the instance exceeds the cap."""


@dataclass(frozen=True)
class TradingChain:
    path: Tuple[str, ...]
    transaction_cost: Fraction

    @property
    def terminal(self) -> str:
        return self.path[-1]

    @property
    def intermediaries(self) -> Tuple[str, ...]:
        return self.path[:-1]

    def successor(self, agent_id: str) -> str:
        return self.path[self.path.index(agent_id) + 1]


class Allocation(NamedTuple):
    winner: Optional[str]
    chain: Optional[TradingChain]
    welfare: Fraction


def max_enum() -> int:
    return int(os.environ.get("NETAUCTION_MAX_ENUM", DEFAULT_MAX_ENUM))


def chain_table(eff: EffectiveNetwork) -> Dict[str, TradingChain]:
    """Lowest-cost chain to every participant.

    Dijkstra keyed on ``(cost, path)``: with nonnegative node costs the
    first label settled for an agent is its cheapest chain, and among equal
    costs the lexicographically smallest one.
    """
    heap = [(ZERO, (a,)) for a in sorted(eff.links(SELLER))]
    heapq.heapify(heap)
    settled: Dict[str, TradingChain] = {}
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled[node] = TradingChain(path, cost)
        targets = eff.effective_links.get(node)
        if not targets:
            continue
        step = cost + eff.cost(node)
        for nxt in targets:
            if nxt not in settled:
                heapq.heappush(heap, (step, path + (nxt,)))
    return settled


def lowest_cost_chain(eff: EffectiveNetwork, target: str) -> Optional[TradingChain]:
    if target not in eff.participants:
        return None
    return chain_table(eff).get(target)


def enumerate_all_chains(eff: EffectiveNetwork, target: str,
                         cap: Optional[int] = None) -> List[TradingChain]:
    """Every simple chain from the seller to ``target`` (the brute-force oracle)."""
    cap = max_enum() if cap is None else cap
    if len(eff.participants) > cap:
        raise InstanceTooLarge(f"{len(eff.participants)} participants exceeds cap {cap}")
    if target not in eff.participants:
        return []

    found: List[TradingChain] = []

    def walk(path: List[str], cost: Fraction) -> None:
        node = path[-1]
        if node == target:
            found.append(TradingChain(tuple(path), cost))
            return
        step = cost + eff.cost(node)
        for nxt in sorted(eff.links(node)):
            if nxt not in path:
                path.append(nxt)
                walk(path, step)
                path.pop()

    for first in sorted(eff.links(SELLER)):
        walk([first], ZERO)
    return found


def _reach_without(eff: EffectiveNetwork, blocked: str) -> set:
    return reachable(eff.links(SELLER) - {blocked},
                     lambda a: () if a == blocked else eff.links(a) - {blocked})


def diffusion_critical_set(eff: EffectiveNetwork, agent_id: str) -> FrozenSet[str]:
    """Agents every chain to whom passes through ``agent_id``, plus the agent itself."""
    if agent_id not in eff.participants:
        return frozenset()
    return frozenset(eff.participants - _reach_without(eff, agent_id)) | {agent_id}


def dominator_tree(eff: EffectiveNetwork) -> Dict[str, str]:
    """Immediate dominator of each participant (the seller is the root).

    Iterative scheme of Cooper, Harvey and Kennedy over a reverse postorder.
    Used as a fast path; must agree with removal-reachability.
    """
    order: List[str] = []
    seen = {SELLER}
    stack = [(SELLER, iter(sorted(eff.links(SELLER))))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(sorted(eff.links(nxt)))))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    index = {node: i for i, node in enumerate(order)}

    preds: Dict[str, List[str]] = {node: [] for node in order}
    for node in order:
        for nxt in eff.links(node):
            preds[nxt].append(node)

    idom: Dict[str, str] = {SELLER: SELLER}

    def intersect(a: str, b: str) -> str:
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for node in order[1:]:
            done = [p for p in preds[node] if p in idom]
            new = done[0]
            for p in done[1:]:
                new = intersect(p, new)
            if idom.get(node) != new:
                idom[node] = new
                changed = True
    del idom[SELLER]
    return idom


def critical_sets_by_dominators(eff: EffectiveNetwork) -> Dict[str, FrozenSet[str]]:
    """``d_i`` for every participant at once, read off the dominator tree."""
    idom = dominator_tree(eff)
    result: Dict[str, set] = {node: {node} for node in idom}
    for node in idom:
        up = idom[node]
        while up != SELLER:
            result[up].add(node)
            up = idom[up]
    return {node: frozenset(members) for node, members in result.items()}


def diffusion_critical_sequence(eff: EffectiveNetwork, agent_id: str) -> List[str]:
    """Every agent critical for ``agent_id``, outermost first, ending with the agent."""
    if agent_id not in eff.participants:
        return []
    critical = [
        other for other in eff.participants
        if other == agent_id or agent_id not in _reach_without(eff, other)
    ]
    # nested critical sets: a larger set means closer to the seller
    sizes = {other: len(diffusion_critical_set(eff, other)) for other in critical}
    return sorted(critical, key=lambda other: (-sizes[other], other))


def efficient_allocation(eff: EffectiveNetwork) -> Allocation:
    """Welfare-maximising buyer and its chain; no trade when nothing reaches zero."""
    table = chain_table(eff)
    best: Optional[Tuple[Fraction, str]] = None
    for buyer_id in eff.buyers():
        chain = table.get(buyer_id)
        if chain is None:
            continue
        welfare = eff.effective_bids[buyer_id] - chain.transaction_cost
        if best is None or welfare > best[0]:
            best = (welfare, buyer_id)
    if best is None or best[0] < 0:
        return Allocation(None, None, ZERO)
    return Allocation(best[1], table[best[1]], best[0])


def social_welfare(eff: EffectiveNetwork) -> Dict[str, Fraction]:
    """``SW_i`` for every participating buyer."""
    table = chain_table(eff)
    return {b: eff.effective_bids[b] - table[b].transaction_cost for b in eff.buyers() if b in table}


def welfare_without(eff: EffectiveNetwork, removed: Iterable[str]) -> Fraction:
    return efficient_allocation(eff.restrict(removed=removed)).welfare


def welfare_withholding(eff: EffectiveNetwork, agent_id: str, withheld: Iterable[str]) -> Fraction:
    """Best welfare once ``agent_id`` stops sharing with ``withheld`` (it stays in the market)."""
    return efficient_allocation(eff.restrict(withheld={agent_id: withheld})).welfare
