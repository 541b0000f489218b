"""
固定顶点集上的简单无向图

边集用长度为 n(n-1)/2 的位向量表示，第 k 位对应行优先上三角中的第 k 个顶点对:
顶点对 (i, j), i < j 的位置为 i*n - i(i+1)/2 + (j-i-1)。
graph6 使用列优先上三角，两种顺序之间的转换都是显式的。
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from src.errors import (DimensionError, DomainError, EdgeListParseError,
                        Graph6ParseError, VertexRangeError)

logger = logging.getLogger(__name__)

MAX_VERTICES = 1024

# graph6 字符取值范围
_G6_MIN = 63
_G6_MAX = 126
_G6_HEADER = '>>graph6<<'


def pair_count(n: int) -> int:
    """n 个顶点的顶点对数量"""
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    """
    顶点对 (i, j) 在位向量中的位置

    Args:
        i, j: 顶点编号，顺序无关
        n: 顶点数

    Returns:
        0 到 n(n-1)/2 - 1 之间的位置
    """
    if i == j:
        raise VertexRangeError(f"顶点对两端相同: ({i}, {j})")
    if not (0 <= i < n and 0 <= j < n):
        raise VertexRangeError(f"顶点编号越界: ({i}, {j})，顶点数 {n}")
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@lru_cache(maxsize=64)
def _upper_indices(n: int) -> Tuple[np.ndarray, np.ndarray]:
    # triu_indices 的顺序正好是行优先上三角
    return np.triu_indices(n, 1)


@lru_cache(maxsize=64)
def _graph6_indices(n: int) -> Tuple[np.ndarray, np.ndarray]:
    # tril_indices(n, -1) 给出 (j, i), j > i，按 j 再按 i 递增，即列优先上三角
    cols, rows = np.tril_indices(n, -1)
    return rows, cols


def _bits_to_array(bits: int, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=bool)
    raw = bits.to_bytes((length + 7) // 8, 'little')
    unpacked = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder='little')
    return unpacked[:length].astype(bool)


def _array_to_bits(values: np.ndarray) -> int:
    if values.size == 0:
        return 0
    packed = np.packbits(values.astype(np.uint8), bitorder='little')
    return int.from_bytes(packed.tobytes(), 'little')


@lru_cache(maxsize=4096)
def star_bits(n: int, hub: int) -> int:
    """星图 S_hub 的位向量"""
    bits = 0
    for other in range(n):
        if other != hub:
            bits |= 1 << pair_index(hub, other, n)
    return bits


@dataclass(frozen=True)
class Graph:
    """不可变的简单无向图，可在线程和进程之间安全共享"""
    n: int
    bits: int = 0

    def __post_init__(self):
        if not 1 <= self.n <= MAX_VERTICES:
            raise VertexRangeError(f"顶点数必须在 1 到 {MAX_VERTICES} 之间: {self.n}")
        if self.bits < 0 or self.bits >> pair_count(self.n):
            raise DimensionError(f"位向量超出 {self.n} 个顶点的容量")

    @classmethod
    def empty(cls, n: int) -> 'Graph':
        return cls(n, 0)

    @classmethod
    def complete(cls, n: int) -> 'Graph':
        return cls(n, (1 << pair_count(n)) - 1)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> 'Graph':
        bits = 0
        for i, j in edges:
            bits |= 1 << pair_index(i, j, n)
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'Graph':
        """由邻接矩阵构造，只读取上三角"""
        matrix = np.asarray(matrix, dtype=bool)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"邻接矩阵必须是方阵: {matrix.shape}")
        n = matrix.shape[0]
        return cls(n, _array_to_bits(matrix[_upper_indices(n)]))

    @property
    def pair_count(self) -> int:
        return pair_count(self.n)

    @property
    def edge_count(self) -> int:
        return self.bits.bit_count()

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.bits >> pair_index(i, j, self.n) & 1)

    def linkstring(self) -> str:
        """按位序输出的 0/1 串"""
        return ''.join('1' if v else '0' for v in self.pair_array())

    def pair_array(self) -> np.ndarray:
        return _bits_to_array(self.bits, self.pair_count)

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=bool)
        matrix[_upper_indices(self.n)] = self.pair_array()
        return matrix | matrix.T

    @cached_property
    def adjacency(self) -> Tuple[int, ...]:
        """每个顶点的邻居位掩码（第 v 位表示与 v 相邻）"""
        if self.n == 1:
            return (0,)
        packed = np.packbits(self.to_matrix(), axis=1, bitorder='little')
        return tuple(int.from_bytes(row.tobytes(), 'little') for row in packed)

    def degrees(self) -> List[int]:
        return [row.bit_count() for row in self.adjacency]

    def edges(self) -> Iterator[Tuple[int, int]]:
        rows, cols = _upper_indices(self.n)
        for k in np.flatnonzero(self.pair_array()):
            yield int(rows[k]), int(cols[k])

    def permute(self, perm: Sequence[int]) -> 'Graph':
        """重新标号：顶点 v 变为 perm[v]"""
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (self.n,) or not np.array_equal(np.sort(perm), np.arange(self.n)):
            raise DimensionError(f"不是 {self.n} 个顶点上的置换")
        inverse = np.argsort(perm)
        relabeled = self.to_matrix()[np.ix_(inverse, inverse)]
        return Graph(self.n, _array_to_bits(relabeled[_upper_indices(self.n)]))

    def _check_same_order(self, other: 'Graph'):
        if self.n != other.n:
            raise DimensionError(f"顶点数不一致: {self.n} 与 {other.n}")

    def __or__(self, other: 'Graph') -> 'Graph':
        self._check_same_order(other)
        return Graph(self.n, self.bits | other.bits)

    def __and__(self, other: 'Graph') -> 'Graph':
        self._check_same_order(other)
        return Graph(self.n, self.bits & other.bits)

    def __invert__(self) -> 'Graph':
        return Graph(self.n, ((1 << self.pair_count) - 1) ^ self.bits)


def star(n: int, hub: int) -> Graph:
    """中心为 hub 的星图，连接 hub 与其余 n-1 个顶点"""
    if n < 2:
        raise VertexRangeError(f"星图至少需要 2 个顶点: {n}")
    if not 0 <= hub < n:
        raise VertexRangeError(f"星图中心越界: {hub}，顶点数 {n}")
    return Graph(n, star_bits(n, hub))


def union(g: Graph, h: Graph) -> Graph:
    return g | h


def intersection(g: Graph, h: Graph) -> Graph:
    return g & h


def complement(g: Graph) -> Graph:
    return ~g


def _encode_size(n: int) -> str:
    if n <= 62:
        return chr(n + _G6_MIN)
    if n <= 258047:
        return '~' + ''.join(chr(((n >> shift) & 63) + _G6_MIN) for shift in (12, 6, 0))
    return '~~' + ''.join(chr(((n >> shift) & 63) + _G6_MIN) for shift in (30, 24, 18, 12, 6, 0))


def write_graph6(graph: Graph) -> str:
    """按标准 graph6 格式编码（不带 >>graph6<< 头）"""
    n = graph.n
    rows, cols = _graph6_indices(n)
    column_major = graph.to_matrix()[rows, cols].astype(np.uint8)
    padding = (-column_major.size) % 6
    if padding:
        column_major = np.concatenate([column_major, np.zeros(padding, dtype=np.uint8)])
    groups = column_major.reshape(-1, 6)
    values = groups @ np.array([32, 16, 8, 4, 2, 1], dtype=np.int64)
    return _encode_size(n) + ''.join(chr(int(v) + _G6_MIN) for v in values)


def parse_graph6(text: str) -> Graph:
    """
    解析一行 graph6 文本

    Raises:
        Graph6ParseError: 非法字符、载荷截断或多余数据，附带字节偏移
    """
    data = text.strip()
    base = 0
    if data.startswith(_G6_HEADER):
        data = data[len(_G6_HEADER):]
        base = len(_G6_HEADER)
    if not data:
        raise Graph6ParseError("空的 graph6 文本", base)
    for offset, char in enumerate(data):
        if not _G6_MIN <= ord(char) <= _G6_MAX:
            raise Graph6ParseError(f"非法字符 {char!r}", base + offset)

    values = [ord(c) - _G6_MIN for c in data]
    if values[0] != 63:
        n, pos = values[0], 1
    elif len(values) >= 2 and values[1] == 63:
        if len(values) < 8:
            raise Graph6ParseError("扩展顶点数头部被截断", base + len(values))
        n, pos = 0, 8
        for v in values[2:8]:
            n = (n << 6) | v
    else:
        if len(values) < 4:
            raise Graph6ParseError("顶点数头部被截断", base + len(values))
        n, pos = 0, 4
        for v in values[1:4]:
            n = (n << 6) | v

    if n < 1:
        raise Graph6ParseError("顶点数必须至少为 1", base)
    if n > MAX_VERTICES:
        raise Graph6ParseError(f"顶点数 {n} 超过上限 {MAX_VERTICES}", base)

    needed = math.ceil(pair_count(n) / 6)
    payload = values[pos:]
    if len(payload) < needed:
        raise Graph6ParseError(f"载荷被截断: 需要 {needed} 个字符，实际 {len(payload)}", base + len(values))
    if len(payload) > needed:
        raise Graph6ParseError("载荷之后存在多余数据", base + pos + needed)

    if n == 1:
        return Graph(1, 0)
    sextets = np.array(payload, dtype=np.uint8)[:, None]
    unpacked = ((sextets >> np.arange(5, -1, -1, dtype=np.uint8)) & 1).reshape(-1)[:pair_count(n)]
    matrix = np.zeros((n, n), dtype=bool)
    rows, cols = _graph6_indices(n)
    matrix[rows, cols] = unpacked.astype(bool)
    return Graph.from_matrix(matrix)


def write_edge_list(graph: Graph) -> str:
    """边列表: 首行 "n m"，之后每行 "i j"（从 0 开始编号）"""
    lines = [f"{graph.n} {graph.edge_count}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges())
    return '\n'.join(lines) + '\n'


def parse_edge_list(text: str) -> Graph:
    """解析边列表文本，空行被忽略"""
    lines = [(number, line.split()) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise EdgeListParseError("缺少 \"n m\" 头部", 1)
    number, header = lines[0]
    try:
        n, m = (int(v) for v in header)
    except ValueError:
        raise EdgeListParseError("头部必须是两个整数 \"n m\"", number) from None
    if len(lines) - 1 != m:
        raise EdgeListParseError(f"声明 {m} 条边，实际 {len(lines) - 1} 条", number)
    edges = []
    for number, fields in lines[1:]:
        try:
            i, j = (int(v) for v in fields)
        except ValueError:
            raise EdgeListParseError("每条边必须是两个整数", number) from None
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise EdgeListParseError(f"无效的顶点对 ({i}, {j})", number)
        edges.append((i, j))
    graph = Graph.from_edges(n, edges)
    if graph.edge_count != m:
        raise EdgeListParseError("边列表中存在重复的边", number)
    return graph


def er_random(n: int, p: float, seed: int) -> Graph:
    """
    Erdős–Rényi G(n, p) 随机图

    使用 NumPy 的 PCG64 位生成器（以整数种子初始化），按位序依次抽取
    n(n-1)/2 个 [0, 1) 均匀数，小于 p 的位置设为边。相同种子在各平台上
    生成相同的图。
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"边概率必须在 [0, 1] 内: {p}")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.random(pair_count(n))
    return Graph(n, _array_to_bits(draws < p))
