"""Seeded random economic networks."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

from ..network import EconomicNetwork, buyer, intermediary, reachable
from ..numbers import to_rational


@dataclass(frozen=True)
class GeneratorConfig:
    n_buyers: int = 4
    n_intermediaries: int = 3
    edge_probability: Fraction = Fraction(1, 2)
    max_bid: Fraction = Fraction(20)
    max_cost: Fraction = Fraction(5)
    tree_mode: bool = False
    seed: int = 0
    # links from an intermediary back to an earlier one; 0 keeps the graph acyclic
    back_edge_probability: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n_buyers < 0 or self.n_intermediaries < 0:
            raise ValueError("agent counts must be nonnegative")
        for name in ("edge_probability", "back_edge_probability"):
            p = to_rational(getattr(self, name))
            if not 0 <= p <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, p)
        for name in ("max_bid", "max_cost"):
            value = to_rational(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, value)


def _amount(rng: random.Random, top: Fraction) -> Fraction:
    # whole units keep payments readable; fractional caps round down
    return Fraction(rng.randint(0, int(top)))


def _hit(rng: random.Random, p: Fraction) -> bool:
    return rng.random() < p


def generate_network(config: GeneratorConfig) -> EconomicNetwork:
    """Build a reproducible network where every agent is reachable under full sharing.

    General mode: intermediaries ``I0..`` link forward to later ones with the
    edge probability, and to each buyer of their own block with the same
    probability; block 0 buys straight from the seller, which also always
    knows ``I0``. Any agent left unreachable is attached to the seller.
    Tree mode: a uniform random labelled tree (Pruefer code) over the seller
    and intermediaries, rooted at the seller, with each buyer hung under a
    uniformly chosen node.
    """
    rng = random.Random(config.seed)
    inters = [f"I{k}" for k in range(config.n_intermediaries)]
    buyers = [f"B{k}" for k in range(config.n_buyers)]
    bids = {b: _amount(rng, config.max_bid) for b in buyers}
    costs = {i: _amount(rng, config.max_cost) for i in inters}
    links: Dict[str, set] = {i: set() for i in inters}
    seller: set = set()

    if config.tree_mode:
        nodes = ["seller", *inters]
        parent = _pruefer_parents(rng, len(nodes))
        for child, up in parent.items():
            (seller if up == 0 else links[nodes[up]]).add(nodes[child])
        for b in buyers:
            up = rng.randrange(len(nodes))
            (seller if up == 0 else links[nodes[up]]).add(b)
    else:
        owner = {b: rng.randrange(len(inters) + 1) for b in buyers}
        if inters:
            seller.add(inters[0])
        for pos, i in enumerate(inters):
            for later in inters[pos + 1:]:
                if _hit(rng, config.edge_probability):
                    links[i].add(later)
            for earlier in inters[:pos]:
                if _hit(rng, config.back_edge_probability):
                    links[i].add(earlier)
        for b in buyers:
            if owner[b] == 0:
                seller.add(b)
            elif _hit(rng, config.edge_probability):
                links[inters[owner[b] - 1]].add(b)
        for agent_id in [*inters, *buyers]:
            alive = reachable(seller, lambda a: links.get(a, ()))
            if agent_id not in alive:
                seller.add(agent_id)

    agents = [intermediary(i, costs[i], links[i]) for i in inters]
    agents += [buyer(b, bids[b]) for b in buyers]
    return EconomicNetwork.build(seller, agents)


def _pruefer_parents(rng: random.Random, n: int) -> Dict[int, int]:
    """Parent of every node but 0 in a uniform labelled tree on ``0..n-1`` rooted at 0."""
    if n <= 1:
        return {}
    if n == 2:
        return {1: 0}
    code = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in code:
        degree[x] += 1
    edges: List[tuple] = []
    for x in code:
        leaf = min(v for v in range(n) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [w for w in range(n) if degree[w] == 1]
    edges.append((u, v))

    adjacent: Dict[int, List[int]] = {v: [] for v in range(n)}
    for a, b in edges:
        adjacent[a].append(b)
        adjacent[b].append(a)
    parent: Dict[int, int] = {}
    stack = [0]
    seen = {0}
    while stack:
        node = stack.pop()
        for nxt in adjacent[node]:
            if nxt not in seen:
                seen.add(nxt)
                parent[nxt] = node
                stack.append(nxt)
    return parent


def instance_suite(count: int, max_agents: int = 8, seed: int = 0,
                   tree_mode: bool = False) -> List[EconomicNetwork]:
    """``count`` reproducible networks of mixed size, density and shape.

    Sizes range over 1..``max_agents`` agents with at least one buyer; half
    the general instances allow backward links, so cycles appear.
    """
    rng = random.Random(seed)
    nets = []
    for _ in range(count):
        n_buyers = rng.randint(1, min(5, max_agents))
        n_inters = rng.randint(0, max_agents - n_buyers)
        config = GeneratorConfig(
            n_buyers=n_buyers,
            n_intermediaries=n_inters,
            edge_probability=Fraction(rng.choice([1, 2, 3]), 4),
            max_bid=Fraction(20),
            max_cost=Fraction(5),
            tree_mode=tree_mode,
            seed=rng.getrandbits(64),
            back_edge_probability=Fraction(rng.choice([0, 1]), 4),
        )
        nets.append(generate_network(config))
    return nets
