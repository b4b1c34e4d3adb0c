import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from synth.gates import Isa


@dataclass(frozen=True)
class Sentence:
    ids: tuple[str, ...]
    cost: Fraction

    @property
    def length(self) -> int:
        return len(self.ids)

    def label(self) -> str:
        return ",".join(self.ids)


def enumerate_sentences(isa: Isa) -> Iterator[Sentence]:
    # Infinite stream; equal totals are broken on the sorted id tuple.
    ids = isa.ids
    cost = {g.id: Fraction(g.cost) for g in isa.gates}
    # Heap entries extend only with ids at or after the last one, so every
    # multiset is generated exactly once.
    heap: list[tuple[Fraction, tuple[str, ...], int]] = []
    for index, gate_id in enumerate(ids):
        heapq.heappush(heap, (cost[gate_id], (gate_id,), index))
    while heap:
        total, sentence, last = heapq.heappop(heap)
        yield Sentence(ids=sentence, cost=total)
        for index in range(last, len(ids)):
            gate_id = ids[index]
            heapq.heappush(heap, (total + cost[gate_id], sentence + (gate_id,), index))
