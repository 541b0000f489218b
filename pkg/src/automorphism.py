"""
自同构群阶与典范标号

颜色细化得到等价划分，再做个体化-细化回溯:
- 第一阶段沿第一条路径回溯，在每一层寻找与第一片叶子等价的叶子，
  得到自同构生成元，群阶 = 各层轨道大小之积（轨道-稳定子）。
- 第二阶段在整棵搜索树上取字典序最小的 linkstring 作为典范形式，
  用已知自同构剪去同一轨道中的分支。
根划分中完全由孪生顶点组成的胞元直接拆成单点，贡献 |胞元|! 的群阶。
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from src.errors import BruteForceLimitError, DomainError, SearchBudgetExhausted
from src.graph_core import Graph, _upper_indices

logger = logging.getLogger(__name__)

Cells = List[List[int]]
Permutation = Tuple[int, ...]


@dataclass(frozen=True)
class Partition:
    """有序划分，每个胞元内的顶点按编号递增"""
    cells: Tuple[Tuple[int, ...], ...]

    @classmethod
    def unit(cls, n: int) -> 'Partition':
        return cls((tuple(range(n)),))

    @classmethod
    def of(cls, cells: Sequence[Sequence[int]]) -> 'Partition':
        return cls(tuple(tuple(sorted(c)) for c in cells))

    def is_discrete(self) -> bool:
        return all(len(c) == 1 for c in self.cells)

    def validate(self, n: int):
        members = [v for c in self.cells for v in c]
        if any(len(c) == 0 for c in self.cells):
            raise DomainError("划分中存在空胞元")
        if sorted(members) != list(range(n)):
            raise DomainError(f"不是 {n} 个顶点上的划分")

    def is_equitable(self, graph: Graph) -> bool:
        """同一胞元内的顶点到每个胞元的邻居数都相同"""
        adj = graph.adjacency
        masks = [_mask(c) for c in self.cells]
        for cell in self.cells:
            signatures = {tuple((adj[v] & m).bit_count() for m in masks) for v in cell}
            if len(signatures) > 1:
                return False
        return True


@dataclass(frozen=True)
class AutResult:
    canonical_perm: Permutation      # 顶点 v 的典范标号为 canonical_perm[v]
    canonical_graph: Graph
    aut_order: int
    search_nodes: int = 0
    generators: Tuple[Permutation, ...] = field(default=(), repr=False)

    @property
    def canonical_linkstring(self) -> int:
        return self.canonical_graph.bits

    @property
    def log2_aut(self) -> float:
        return math.log2(self.aut_order)


def _mask(cell: Sequence[int]) -> int:
    m = 0
    for v in cell:
        m |= 1 << v
    return m


def _refine(adj: Sequence[int], cells: Cells) -> Cells:
    """
    一维颜色细化，直到划分等价

    每轮按"到各胞元的邻居数"签名拆分胞元，子胞元按签名排序放回原位，
    排序只依赖胞元位置，与顶点编号无关。
    """
    while True:
        masks = [_mask(c) for c in cells]
        refined: Cells = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                refined.append(cell)
                continue
            groups: Dict[Tuple[int, ...], List[int]] = {}
            for v in cell:
                row = adj[v]
                signature = tuple((row & m).bit_count() for m in masks)
                groups.setdefault(signature, []).append(v)
            if len(groups) == 1:
                refined.append(cell)
            else:
                changed = True
                refined.extend(groups[sig] for sig in sorted(groups))
        cells = refined
        if not changed:
            return cells


def color_refine(graph: Graph, initial: Optional[Partition] = None) -> Partition:
    """返回细化 initial 的最粗等价划分"""
    initial = initial or Partition.unit(graph.n)
    initial.validate(graph.n)
    cells = [sorted(c) for c in initial.cells]
    return Partition.of(_refine(graph.adjacency, cells))


def _is_twin_cell(adj: Sequence[int], cell: Sequence[int]) -> bool:
    """胞元内任意两点都是孪生点（对外邻居相同，内部全连或全不连）"""
    m = _mask(cell)
    outside = {adj[v] & ~m for v in cell}
    if len(outside) != 1:
        return False
    inside = [adj[v] & m for v in cell]
    return all(x == 0 for x in inside) or all(x == m ^ (1 << v) for x, v in zip(inside, cell))


def _is_discrete(cells: Cells) -> bool:
    return all(len(c) == 1 for c in cells)


def _target(cells: Cells) -> int:
    """第一个最小的非单点胞元"""
    best = -1
    for index, cell in enumerate(cells):
        if len(cell) > 1 and (best < 0 or len(cell) < len(cells[best])):
            best = index
    return best


def _individualize(cells: Cells, target: int, v: int) -> Cells:
    rest = [x for x in cells[target] if x != v]
    return cells[:target] + [[v], rest] + cells[target + 1:]


def _shape(cells: Cells) -> Tuple[int, ...]:
    return tuple(len(c) for c in cells)


def _perm_between(source: Sequence[int], image: Sequence[int], n: int) -> Permutation:
    perm = [0] * n
    for a, b in zip(source, image):
        perm[a] = b
    return tuple(perm)


@dataclass
class _Frame:
    cells: Cells
    prefix: List[int]
    target: int
    next_index: int = 0
    tried: List[int] = field(default_factory=list)


class _CanonicalSearch:
    def __init__(self, graph: Graph, node_budget: int):
        self.graph = graph
        self.n = graph.n
        self.adj = graph.adjacency
        self.matrix = graph.to_matrix()
        self.upper = _upper_indices(graph.n)
        self.node_budget = node_budget
        self.nodes = 0
        self.generators: List[Permutation] = []

    def _visit(self):
        self.nodes += 1
        if self.nodes > self.node_budget:
            raise SearchBudgetExhausted(self.nodes, self.node_budget)

    def _leaf_key(self, order: Sequence[int]) -> bytes:
        # 位置 k 上的顶点获得新标号 k
        relabeled = self.matrix[np.ix_(order, order)]
        return relabeled[self.upper].tobytes()

    def _orbit_labels(self, prefix: Sequence[int]) -> List[int]:
        """只用逐点固定 prefix 的生成元计算轨道（并查集）"""
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gen in self.generators:
            if any(gen[p] != p for p in prefix):
                continue
            for v, w in enumerate(gen):
                if v != w:
                    a, b = find(v), find(w)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return [find(v) for v in range(self.n)]

    def _root(self) -> Tuple[Cells, int]:
        """根划分：细化后拆开孪生胞元，返回 (划分, 孪生贡献的群阶因子)"""
        cells = _refine(self.adj, [list(range(self.n))])
        factor = 1
        while True:
            shattered = False
            out: Cells = []
            for cell in cells:
                if len(cell) > 1 and _is_twin_cell(self.adj, cell):
                    factor *= math.factorial(len(cell))
                    out.extend([v] for v in cell)
                    shattered = True
                else:
                    out.append(cell)
            cells = out
            if not shattered:
                return cells, factor
            cells = _refine(self.adj, cells)

    def _seed_twin_generators(self, cells: Cells):
        # 非单点胞元中的孪生对换一定是自同构
        for cell in cells:
            if len(cell) < 2:
                continue
            classes: Dict[Tuple[int, int], List[int]] = {}
            for v in cell:
                row = self.adj[v]
                classes.setdefault((0, row), []).append(v)
                classes.setdefault((1, row | (1 << v)), []).append(v)
            for members in classes.values():
                for a, b in zip(members, members[1:]):
                    perm = list(range(self.n))
                    perm[a], perm[b] = b, a
                    self.generators.append(tuple(perm))

    def _find_equivalent(self, cells: Cells, depth: int, prefix: List[int]) -> Optional[Permutation]:
        """在子树中寻找与第一片叶子等价的叶子，找到则返回对应的自同构"""
        self._visit()
        cells = _refine(self.adj, cells)
        if depth >= len(self.path_shapes) or _shape(cells) != self.path_shapes[depth]:
            return None
        if _is_discrete(cells):
            order = [c[0] for c in cells]
            if self._leaf_key(order) == self.first_key:
                return _perm_between(self.first_order, order, self.n)
            return None
        target = _target(cells)
        labels = self._orbit_labels(prefix)
        tried: List[int] = []
        for x in cells[target]:
            if any(labels[x] == labels[y] for y in tried):
                continue
            tried.append(x)
            found = self._find_equivalent(_individualize(cells, target, x), depth + 1, prefix + [x])
            if found is not None:
                return found
        return None

    def _group_order(self, root: Cells) -> int:
        """第一阶段：沿第一条路径回溯，返回逐点固定孪生拆分点后的群阶"""
        path_cells = [root]
        path_targets: List[int] = []
        path_vertices: List[int] = []
        cells = root
        while not _is_discrete(cells):
            self._visit()
            target = _target(cells)
            v = cells[target][0]
            path_targets.append(target)
            path_vertices.append(v)
            cells = _refine(self.adj, _individualize(cells, target, v))
            path_cells.append(cells)

        self.first_order = [c[0] for c in cells]
        self.first_key = self._leaf_key(self.first_order)
        self.path_shapes = [_shape(c) for c in path_cells]

        order = 1
        for level in reversed(range(len(path_vertices))):
            prefix = path_vertices[:level]
            v = path_vertices[level]
            target = path_targets[level]
            for w in path_cells[level][target]:
                if w == v:
                    continue
                labels = self._orbit_labels(prefix)
                if labels[w] == labels[v]:
                    continue
                gamma = self._find_equivalent(
                    _individualize(path_cells[level], target, w), level + 1, prefix + [w])
                if gamma is not None:
                    self.generators.append(gamma)
            labels = self._orbit_labels(prefix)
            order *= sum(1 for x in labels if x == labels[v])
        return order

    def _best_leaf(self, root: Cells) -> List[int]:
        """第二阶段：字典序最小的叶子（显式栈，避免深递归）"""
        best_key: Optional[bytes] = None
        best_order: List[int] = []
        stack = [_Frame(root, [], _target(root))]
        while stack:
            frame = stack[-1]
            cell = frame.cells[frame.target]
            if frame.next_index >= len(cell):
                stack.pop()
                continue
            x = cell[frame.next_index]
            frame.next_index += 1
            labels = self._orbit_labels(frame.prefix)
            if any(labels[x] == labels[y] for y in frame.tried):
                continue
            frame.tried.append(x)
            self._visit()
            child = _refine(self.adj, _individualize(frame.cells, frame.target, x))
            prefix = frame.prefix + [x]
            if _is_discrete(child):
                order = [c[0] for c in child]
                key = self._leaf_key(order)
                if best_key is None or key < best_key:
                    best_key, best_order = key, order
                elif key == best_key:
                    self.generators.append(_perm_between(best_order, order, self.n))
            else:
                stack.append(_Frame(child, prefix, _target(child)))
        return best_order

    def run(self) -> AutResult:
        root, factor = self._root()
        if _is_discrete(root):
            order = [c[0] for c in root]
            aut_order = factor
        else:
            self._seed_twin_generators(root)
            aut_order = factor * self._group_order(root)
            order = self._best_leaf(root)

        perm = [0] * self.n
        for label, v in enumerate(order):
            perm[v] = label
        canonical_graph = self.graph.permute(perm)
        return AutResult(
            canonical_perm=tuple(perm),
            canonical_graph=canonical_graph,
            aut_order=aut_order,
            search_nodes=self.nodes,
            generators=tuple(self.generators)
        )


def canonical(graph: Graph, node_budget: Optional[int] = None) -> AutResult:
    """
    计算典范标号与精确的自同构群阶

    Args:
        graph: 待处理的图
        node_budget: 搜索节点预算，默认取配置值

    Raises:
        SearchBudgetExhausted: 预算耗尽时明确失败，不返回错误结果
    """
    budget = node_budget if node_budget is not None else Config.AUT_NODE_BUDGET
    result = _CanonicalSearch(graph, budget).run()
    logger.debug(f"n={graph.n} |Aut|={result.aut_order} 搜索节点={result.search_nodes}")
    return result


def aut_order(graph: Graph, node_budget: Optional[int] = None) -> int:
    return canonical(graph, node_budget).aut_order


def brute_force_aut(graph: Graph) -> int:
    """穷举全部 n! 个置换计数自同构，仅用作测试对照（n ≤ 8）"""
    n = graph.n
    if n > Config.BRUTE_FORCE_MAX_N:
        raise BruteForceLimitError(f"暴力自同构计数只支持 n ≤ {Config.BRUTE_FORCE_MAX_N}: {n}")
    adj = graph.adjacency
    edges = list(graph.edges())
    count = 0
    for perm in itertools.permutations(range(n)):
        if all(adj[perm[a]] >> perm[b] & 1 for a, b in edges):
            count += 1
    return count
