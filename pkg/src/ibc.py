"""
基于信息的图复杂度 C = ℓ - log2 ω

两种编码:
- linkstring: ℓ = n(n-1)/2，ω = n!/|Aut(G)|，对补图不变（默认）
- edgelist: ℓ = 2|E|⌈log2 n⌉，ω 还计入边的排列与端点顺序
两种编码都不包含描述 n 本身的头部，常数偏移在相关性和拟合中相互抵消。
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.automorphism import AutResult, canonical
from src.errors import DomainError
from src.graph_core import Graph

logger = logging.getLogger(__name__)

LINKSTRING = 'linkstring'
EDGELIST = 'edgelist'
ENCODINGS = (LINKSTRING, EDGELIST)


@dataclass(frozen=True)
class ComplexityValue:
    bits: float
    encoding: str
    ell: float
    log2_omega: float


def log2_factorial(k: int) -> float:
    """log2(k!)，逐项求和并用 fsum 做精确累加"""
    if k < 0:
        raise DomainError(f"阶乘参数不能为负: {k}")
    if k < 2:
        return 0.0
    return math.fsum(np.log2(np.arange(2, k + 1, dtype=np.float64)))


def _log2_relabelings(graph: Graph, aut: Optional[AutResult]) -> float:
    aut = aut or canonical(graph)
    # n!/|Aut| 是精确整数
    return math.log2(math.factorial(graph.n) // aut.aut_order)


def complexity_linkstring(graph: Graph, aut: Optional[AutResult] = None) -> ComplexityValue:
    ell = float(graph.pair_count)
    log2_omega = _log2_relabelings(graph, aut)
    return ComplexityValue(bits=ell - log2_omega, encoding=LINKSTRING, ell=ell, log2_omega=log2_omega)


def complexity_edgelist(graph: Graph, aut: Optional[AutResult] = None) -> ComplexityValue:
    if graph.n < 2:
        raise DomainError("边列表编码至少需要 2 个顶点")
    edges = graph.edge_count
    # ⌈log2 n⌉
    width = (graph.n - 1).bit_length()
    ell = float(2 * edges * width)
    log2_omega = log2_factorial(edges) + edges + _log2_relabelings(graph, aut)
    return ComplexityValue(bits=ell - log2_omega, encoding=EDGELIST, ell=ell, log2_omega=log2_omega)


def complexity(graph: Graph, encoding: str = LINKSTRING, aut: Optional[AutResult] = None) -> ComplexityValue:
    if encoding == LINKSTRING:
        return complexity_linkstring(graph, aut)
    if encoding == EDGELIST:
        return complexity_edgelist(graph, aut)
    raise DomainError(f"未知的编码: {encoding}")
