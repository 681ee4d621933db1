"""Deterministic round/message charges for repairs, and the run-wide ledger.

Messages are not simulated.  Each repair step is charged a closed-form cost:

=====================  ===========================  =================================
step                   rounds                       messages
=====================  ===========================  =================================
new cloud over m       ceil(log2 max(m,2)) + 2      m * ceil(log2 max(m,2)) + kappa*m
splice in one cloud    1                            2 * kappa
leader replacement     (within the splice round)    |C|
free-node lookup       1                            j (participants)
combine over N         ceil(log2 max(N,2)) + 3      kappa * N * ceil(log2 max(N,2))
=====================  ===========================  =================================

Steps of one repair run in parallel across clouds and are pipelined, so the
rounds of a repair are the maximum over its steps while messages add up.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def clog2(x: int) -> int:
    """ceil(log2(max(x, 2)))"""
    return (max(int(x), 2) - 1).bit_length()


def new_cloud_cost(m: int, kappa: int) -> tuple[int, int]:
    lg = clog2(m)
    return lg + 2, m * lg + kappa * m


def splice_cost(kappa: int) -> tuple[int, int]:
    return 1, 2 * kappa


def leader_replacement_cost(cloud_size: int) -> tuple[int, int]:
    return 0, cloud_size


def lookup_cost(participants: int) -> tuple[int, int]:
    return 1, participants


def combine_cost(n: int, kappa: int) -> tuple[int, int]:
    lg = clog2(n)
    return lg + 3, kappa * n * lg


@dataclass
class Charge:
    """Cost accumulated over the steps of a single repair."""

    rounds: int = 0
    messages: int = 0

    def add(self, cost: tuple[int, int]) -> None:
        self.rounds = max(self.rounds, cost[0])
        self.messages += cost[1]


@dataclass
class CostLedger:
    events: list[tuple[int, int]] = field(default_factory=list)
    deleted_degrees: list[int] = field(default_factory=list)
    total_rounds: int = 0
    total_messages: int = 0
    max_rounds: int = 0

    def record(self, rounds: int, messages: int, deleted_black_degree: int | None = None) -> None:
        self.events.append((rounds, messages))
        self.total_rounds += rounds
        self.total_messages += messages
        self.max_rounds = max(self.max_rounds, rounds)
        if deleted_black_degree is not None:
            self.deleted_degrees.append(deleted_black_degree)

    @property
    def deletions(self) -> int:
        return len(self.deleted_degrees)

    @property
    def amortized_baseline(self) -> float | None:
        """A(p): mean black-degree of the deleted nodes, None before any deletion."""
        if not self.deleted_degrees:
            return None
        return sum(self.deleted_degrees) / len(self.deleted_degrees)
