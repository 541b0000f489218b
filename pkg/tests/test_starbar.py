import pytest
import sys
import os

import numpy as np

# 添加项目根目录到路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import DomainError, StarbarSoundnessError
from src.graph_core import Graph, er_random, star
from src.recipe import Recipe, evaluate
from src.starbar import (BICLIQUE, FULL_STAR, CoverTerm, StarBound, _verify, complement_min,
                         star_upper_bound, starbar_min_complement)
from src.walker import enumerate_walk


def assert_sound(graph: Graph, bound: StarBound):
    assert evaluate(bound.witness, graph.n) == graph
    assert bound.witness.star_count == bound.value


class TestKnownValues:
    def test_complete_graph_overcounts_by_one(self):
        """测试 K_22 的上界为 21，比 ⋆(K_n) = n-2 多一"""
        bound = star_upper_bound(Graph.complete(22))
        assert bound.value == 21
        assert all(term.kind == FULL_STAR for term in bound.terms)
        assert_sound(Graph.complete(22), bound)

    def test_biclique_factoring(self):
        """测试 {1,3},{1,4},{2,3},{2,4} 合并为一项，贡献 3 次运算"""
        g = Graph.from_edges(5, [(1, 3), (1, 4), (2, 3), (2, 4)])
        bound = star_upper_bound(g)
        assert bound.value == 3
        assert bound.terms == (CoverTerm.biclique([1, 2], [3, 4]),)
        assert bound.terms[0].op_cost == 3
        assert bound.witness.to_text() == "1 2 | 3 4 | &"

    def test_single_edge_and_star(self):
        """测试 n=10 时单边为 1、星图为 0"""
        assert star_upper_bound(Graph.from_edges(10, [(3, 8)])).value == 1
        bound = star_upper_bound(star(10, 6))
        assert bound.value == 0
        assert bound.witness == Recipe((6,))

    def test_empty_graph(self):
        """测试空图取 2，见证为 "0 1 & 2 &" """
        bound = star_upper_bound(Graph.empty(7))
        assert bound.value == 2
        assert bound.witness.to_text() == "0 1 & 2 &"
        assert not bound.degenerate

    def test_two_vertex_empty_graph_is_degenerate(self):
        bound = star_upper_bound(Graph.empty(2))
        assert bound.degenerate
        assert bound.witness is None
        assert bound.value == 2

    def test_two_vertex_edge(self):
        assert star_upper_bound(Graph.complete(2)).value == 1

    def test_star_plus_edge(self):
        """测试满度星图与剩余边用并连接"""
        g = star(6, 0) | Graph.from_edges(6, [(2, 3)])
        bound = star_upper_bound(g)
        assert bound.value == 2
        assert_sound(g, bound)

    def test_requires_two_vertices(self):
        with pytest.raises(DomainError):
            star_upper_bound(Graph(1, 0))


class TestCoverTerm:
    def test_costs(self):
        assert CoverTerm.full_star(3).op_cost == 0
        assert CoverTerm.biclique([0, 1, 2], [5]).op_cost == 3
        assert CoverTerm.biclique([0], [5]).kind == BICLIQUE


class TestSoundness:
    @pytest.mark.parametrize("seed", range(30))
    def test_random_graphs(self, seed):
        """测试见证配方求值等于原图，运算数等于上界"""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 40))
        g = er_random(n, float(rng.random()), seed)
        assert_sound(g, star_upper_bound(g))

    def test_verification_detects_mismatch(self):
        """测试核对能发现错误的见证"""
        g = Graph.from_edges(4, [(0, 1)])
        bad = StarBound(1, Recipe((0, 2, '&')), ())
        with pytest.raises(StarbarSoundnessError):
            _verify(g, bad)

    def test_upper_bounds_star(self):
        """测试对遍历得到的全部同构类，上界不小于 ⋆"""
        table = enumerate_walk(5, 4)
        for record in table.records.values():
            assert star_upper_bound(record.canonical).value >= record.star


class TestComplementMin:
    def test_complete_graph(self):
        """测试 K_n 与空图取小为 2"""
        assert starbar_min_complement(Graph.complete(12)) == 2

    def test_symmetric(self):
        for seed in range(5):
            g = er_random(15, 0.4, seed)
            assert starbar_min_complement(g) == starbar_min_complement(~g)

    def test_constant_measure(self):
        assert complement_min(Graph.empty(4), lambda g: 7) == 7

    def test_generic_measure(self):
        assert complement_min(Graph.from_edges(4, [(0, 1)]), lambda g: g.edge_count) == 1
