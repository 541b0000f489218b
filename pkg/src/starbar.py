"""
星复杂度上界 S̄tar

先用满度顶点（度为 n-1）的星图覆盖，再把剩余边贪心地分解为完全二部块:
邻域相同的一组顶点 A 与其公共邻域 B 构成 (∪S_a) ∩ (∪S_b)，恰好覆盖 A×B，
代价 |A|+|B|-1 次运算。各项之间再用并连接。
每次计算都会对见证配方求值并核对，不一致时抛出 StarbarSoundnessError。
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from src.errors import DomainError, StarbarSoundnessError
from src.graph_core import Graph
from src.recipe import INTERSECT, UNION, Recipe, evaluate

logger = logging.getLogger(__name__)

FULL_STAR = 'full_star'
BICLIQUE = 'biclique'

# 空图 S_0 ∩ S_1 ∩ S_2
EMPTY_GRAPH_VALUE = 2
_EMPTY_WITNESS = Recipe((0, 1, INTERSECT, 2, INTERSECT))

T = TypeVar('T')


@dataclass(frozen=True)
class CoverTerm:
    kind: str
    left: Tuple[int, ...]
    right: Tuple[int, ...] = ()

    @classmethod
    def full_star(cls, hub: int) -> 'CoverTerm':
        return cls(FULL_STAR, (hub,))

    @classmethod
    def biclique(cls, left: Sequence[int], right: Sequence[int]) -> 'CoverTerm':
        return cls(BICLIQUE, tuple(left), tuple(right))

    @property
    def op_cost(self) -> int:
        if self.kind == FULL_STAR:
            return 0
        return len(self.left) + len(self.right) - 1

    def symbols(self) -> List:
        if self.kind == FULL_STAR:
            return [self.left[0]]
        return _union_chain(self.left) + _union_chain(self.right) + [INTERSECT]


@dataclass(frozen=True)
class StarBound:
    value: int
    witness: Optional[Recipe]
    terms: Tuple[CoverTerm, ...]
    degenerate: bool = False


def _union_chain(vertices: Sequence[int]) -> List:
    symbols: List = [vertices[0]]
    for v in vertices[1:]:
        symbols.extend((v, UNION))
    return symbols


def _mask_members(mask: int) -> List[int]:
    members = []
    while mask:
        low = mask & -mask
        members.append(low.bit_length() - 1)
        mask ^= low
    return members


def _cover_bicliques(rows: List[int]) -> List[CoverTerm]:
    """贪心选择每次运算覆盖边数最多的 (A, N(A))，平局取最小编号的类"""
    terms = []
    while True:
        classes: Dict[int, int] = {}
        for v, row in enumerate(rows):
            if row:
                classes[row] = classes.get(row, 0) | (1 << v)
        if not classes:
            return terms

        best = None
        best_edges = best_cost = 0
        # 按类中最小顶点编号遍历
        for neighbours, members in sorted(classes.items(), key=lambda item: (item[1] & -item[1]).bit_length()):
            a = members.bit_count()
            b = neighbours.bit_count()
            edges, cost = a * b, a + b - 1
            if best is None or edges * best_cost > best_edges * cost:
                best, best_edges, best_cost = (members, neighbours), edges, cost

        members, neighbours = best
        for v in _mask_members(members):
            rows[v] &= ~neighbours
        for v in _mask_members(neighbours):
            rows[v] &= ~members
        terms.append(CoverTerm.biclique(_mask_members(members), _mask_members(neighbours)))


def _verify(graph: Graph, bound: StarBound):
    result = evaluate(bound.witness, graph.n)
    if result.bits != graph.bits:
        raise StarbarSoundnessError(f"见证配方 {bound.witness} 的结果与原图不一致")
    if bound.witness.star_count != bound.value:
        raise StarbarSoundnessError(f"见证配方有 {bound.witness.star_count} 次运算，上界为 {bound.value}")


def star_upper_bound(graph: Graph) -> StarBound:
    """
    计算 S̄tar 上界及其见证配方

    空图直接取 2（n ≥ 3 时见证为 "0 1 & 2 &"）；n = 2 的空图无法用三个星图表示，
    返回 degenerate=True 且没有见证配方。
    """
    n = graph.n
    if n < 2:
        raise DomainError(f"S̄tar 要求 n ≥ 2: {n}")

    if graph.bits == 0:
        if n == 2:
            logger.debug("n = 2 的空图没有见证配方")
            return StarBound(EMPTY_GRAPH_VALUE, None, (), degenerate=True)
        bound = StarBound(EMPTY_GRAPH_VALUE, _EMPTY_WITNESS, ())
        _verify(graph, bound)
        return bound

    adjacency = graph.adjacency
    full = [v for v, row in enumerate(adjacency) if row.bit_count() == n - 1]
    covered = 0
    for hub in full:
        covered |= 1 << hub
    # 与满度顶点相连的边已被覆盖
    rows = [0 if (covered >> v) & 1 else row & ~covered for v, row in enumerate(adjacency)]

    terms = [CoverTerm.full_star(hub) for hub in full] + _cover_bicliques(rows)
    value = sum(term.op_cost for term in terms) + len(terms) - 1

    symbols = terms[0].symbols()
    for term in terms[1:]:
        symbols.extend(term.symbols())
        symbols.append(UNION)
    bound = StarBound(value, Recipe(tuple(symbols)), tuple(terms))
    _verify(graph, bound)
    return bound


def complement_min(graph: Graph, measure: Callable[[Graph], T]) -> T:
    """min(f(G), f(补图))"""
    return min(measure(graph), measure(~graph))


def starbar_min_complement(graph: Graph) -> int:
    return complement_min(graph, lambda g: star_upper_bound(g).value)
