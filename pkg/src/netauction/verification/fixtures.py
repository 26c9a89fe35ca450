"""Hand-built networks with known answers.

The two running-example networks are reconstructions: only the numbers the
worked examples pin down are fixed (H bids 10; A, E, B cost 0, 1, 10; F sits
behind B; the welfare values 4, 7, 8, 9; a direct second bid of 1). The
remaining buyers are chosen so every one of those numbers comes out exactly.

Layout of ``figure1a``::

    seller -> A(0), B(10), P=4, Q=1
    A -> C=5, D=7, E(1)
    E -> G=9, H=10
    B -> F=12

``figure1b`` adds the link B -> C, which makes the network a general graph
without moving any of the pinned values.
"""
from __future__ import annotations

from typing import Dict, Tuple

from ..network import EconomicNetwork, buyer, intermediary


def figure1a() -> EconomicNetwork:
    return EconomicNetwork.build(
        ["A", "B", "P", "Q"],
        [
            intermediary("A", 0, ["C", "D", "E"]),
            intermediary("B", 10, ["F"]),
            intermediary("E", 1, ["G", "H"]),
            buyer("C", 5),
            buyer("D", 7),
            buyer("F", 12),
            buyer("G", 9),
            buyer("H", 10),
            buyer("P", 4),
            buyer("Q", 1),
        ],
    )


def figure1b() -> EconomicNetwork:
    return figure1a().with_link("B", "C")


def figure1a_with_be() -> EconomicNetwork:
    """The tree example plus a link B -> E, where IDM-TC stops being truthful."""
    return figure1a().with_link("B", "E")


def figure1_fixtures() -> Tuple[EconomicNetwork, EconomicNetwork]:
    return figure1a(), figure1b()


def two_buyers() -> EconomicNetwork:
    return EconomicNetwork.build(["X", "Y"], [buyer("X", 5), buyer("Y", 3)])


def line_network() -> EconomicNetwork:
    """seller -> I (cost 2) -> buyer (bid 10)."""
    return EconomicNetwork.build(["I"], [intermediary("I", 2, ["buyer"]), buyer("buyer", 10)])


def diamond() -> EconomicNetwork:
    """Two routes to T: through U (cost 3) or V (cost 2)."""
    return EconomicNetwork.build(
        ["U", "V"],
        [intermediary("U", 3, ["T"]), intermediary("V", 2, ["T"]), buyer("T", 10)],
    )


def all_fixtures() -> Dict[str, EconomicNetwork]:
    return {
        "fig1a": figure1a(),
        "fig1b": figure1b(),
        "fig1a_be": figure1a_with_be(),
        "two_buyers": two_buyers(),
        "line": line_network(),
        "diamond": diamond(),
    }
