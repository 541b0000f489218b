import math
import pytest
import sys
import os

import numpy as np
import pandas as pd
from scipy import stats

# 添加项目根目录到路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src import experiments
from src.errors import DataError, SearchBudgetExhausted, UndefinedCorrelationError
from src.experiments import (SAMPLE_COLUMNS, STATUS_BUDGET, STATUS_OK, WALK_COLUMNS, analyze,
                             binned_means, complexity_invariant_failures, contingency_table,
                             figures_report, fit, is_monotone, numeric_columns, read_csv,
                             reference_row_totals, sample_er_async, sample_er_row, table_cells,
                             table_deviations, table_rows, table_text, walk_rows, write_csv,
                             REFERENCE_STAR_STARBAR_22)
from src.graph_core import parse_graph6
from src.walker import enumerate_walk


class TestFit:
    def test_exact_line(self):
        """测试 y = 2x + 1"""
        x = np.arange(10, dtype=float)
        result = fit(x, 2 * x + 1)
        assert result.rho == pytest.approx(1.0)
        assert result.spearman == pytest.approx(1.0)
        assert result.slope == pytest.approx(2.0)
        assert result.intercept == pytest.approx(1.0)
        assert result.count == 10

    def test_constant_column(self):
        """测试常数列报错而不是返回 NaN"""
        with pytest.raises(UndefinedCorrelationError):
            fit([1, 2, 3], [5, 5, 5])
        with pytest.raises(UndefinedCorrelationError):
            fit([4, 4, 4], [1, 2, 3])

    def test_too_few_points(self):
        with pytest.raises(DataError):
            fit([1], [2])

    def test_affine_invariance(self):
        """测试 ρ 在正仿射变换下不变"""
        rng = np.random.default_rng(0)
        x = rng.normal(size=200)
        y = x + rng.normal(size=200)
        base = fit(x, y).rho
        assert fit(3 * x + 7, y).rho == pytest.approx(base, abs=1e-9)
        assert fit(x, 0.5 * y - 2).rho == pytest.approx(base, abs=1e-9)

    def test_spearman_is_pearson_on_ranks(self):
        """测试 Spearman 等于秩变换后的 Pearson"""
        rng = np.random.default_rng(1)
        x = rng.normal(size=100)
        y = np.exp(x) + rng.normal(scale=0.1, size=100)
        result = fit(x, y)
        ranked = fit(stats.rankdata(x), stats.rankdata(y))
        assert result.spearman == pytest.approx(ranked.rho, abs=1e-12)


class TestWalkCsv:
    def setup_method(self):
        self.table = enumerate_walk(3, 2)
        self.rows = walk_rows(self.table)

    def test_rows(self):
        """测试遍历表格联结各列"""
        assert len(self.rows) == 4
        assert [row['star'] for row in self.rows] == [0, 1, 1, 2]
        for row in self.rows:
            assert row['starbar'] >= row['star']
            assert set(WALK_COLUMNS) == set(row)

    def test_csv_roundtrip(self, tmp_path):
        """测试写出的 CSV 能被重新读取"""
        path = str(tmp_path / 'walk.csv')
        assert write_csv(self.rows, WALK_COLUMNS, path) == 4
        frame = read_csv(path)
        assert list(frame.columns) == WALK_COLUMNS
        assert [int(v) for v in frame['omega_star']] == [r['omega_star'] for r in self.rows]
        for text, row in zip(frame['canonical_g6'], self.rows):
            assert parse_graph6(text).n == 3
        x, y = numeric_columns(frame, 'c_linkstring_bits', 'c_star_bits')
        assert x == pytest.approx([r['c_linkstring_bits'] for r in self.rows], rel=1e-11)

    def test_contingency(self, tmp_path):
        """测试 n=3 的 (⋆, S̄tar) 列联表"""
        path = str(tmp_path / 'walk.csv')
        write_csv(self.rows, WALK_COLUMNS, path)
        table = contingency_table(read_csv(path), 'star', 'starbar')
        # K_3 由三个满度星图覆盖，上界为 2
        assert table_cells(table) == {(0, 0): 1, (1, 1): 1, (1, 2): 1, (2, 2): 1}
        rows = table_rows(table, 'star', 'starbar')
        assert {'star': 1, 'starbar': '*', 'count': 2} in rows
        assert {'star': '*', 'starbar': '*', 'count': 4} in rows
        assert '合计' in table_text(table, 'star', 'starbar')


class TestContingency:
    def test_empty_csv(self, tmp_path):
        """测试空 CSV 得到空表"""
        path = tmp_path / 'empty.csv'
        path.write_text('')
        table = contingency_table(read_csv(str(path)), 'star', 'starbar')
        assert table.empty
        assert table_rows(table, 'star', 'starbar') == []

    def test_non_integer_column(self):
        frame = pd.DataFrame({'a': ['1', '2.5'], 'b': ['1', '2']})
        with pytest.raises(DataError):
            contingency_table(frame, 'a', 'b')

    def test_missing_column(self):
        with pytest.raises(DataError):
            contingency_table(pd.DataFrame({'a': ['1']}), 'a', 'b')

    def test_reference_totals(self):
        """测试参考计数的行合计"""
        assert reference_row_totals(8) == [1, 2, 4, 6, 11, 23, 46, 108, 244]
        assert reference_row_totals(5) == [1, 2, 4, 6, 11, 23]

    def test_deviations(self):
        assert table_deviations(dict(REFERENCE_STAR_STARBAR_22), 8) == []
        cells = {(0, 0): 1, (1, 1): 2, (2, 2): 4}
        assert table_deviations(cells, 2) == []
        cells[(2, 3)] = 1
        assert table_deviations(cells, 2) == [{'star': 2, 'starbar': 3, 'expected': 0, 'actual': 1}]


class TestAnalyze:
    def test_svg_is_deterministic(self, tmp_path):
        """测试散点图输出对固定输入逐字节一致"""
        frame = pd.DataFrame({'x': ['1', '2', '3', '4'], 'y': ['2', '3.5', '7', '8']})
        first, second = tmp_path / 'a.svg', tmp_path / 'b.svg'
        analyze(frame, 'x', 'y', str(first), identity=True)
        analyze(frame, 'x', 'y', str(second), identity=True)
        content = first.read_bytes()
        assert b'<svg' in content
        assert content == second.read_bytes()

    def test_skips_flagged_rows(self):
        frame = pd.DataFrame({'x': ['1', '', '3', '4'], 'y': ['1', '2', '3', '5']})
        assert analyze(frame, 'x', 'y').count == 3

    def test_non_numeric(self):
        frame = pd.DataFrame({'x': ['1', 'a'], 'y': ['1', '2']})
        with pytest.raises(DataError):
            analyze(frame, 'x', 'y')

    def test_binned_means(self):
        """测试分箱均值的单调性"""
        x = np.linspace(0, 10, 200)
        means = binned_means(x, 3 * x + 1, bins=5)
        assert len(means) == 5
        assert means['count'].sum() == 200
        assert is_monotone(means['mean'])
        assert not is_monotone(pd.Series([1.0, 3.0, 2.0]))

    def test_figures_report(self, tmp_path):
        """测试四组相关图的报告"""
        frame = pd.DataFrame(walk_rows(enumerate_walk(4, 4))).astype(str)
        report = figures_report(frame, str(tmp_path))
        assert [entry['figure'] for entry in report] == [
            'star_vs_c', 'cstar_vs_c', 'star_vs_cstar', 'star_vs_starbar']
        star_vs_starbar = report[-1]
        assert star_vs_starbar['reference_rho'] is None
        assert -1 <= star_vs_starbar['rho'] <= 1
        assert (tmp_path / 'star_vs_starbar.svg').exists()


class TestErSampling:
    def test_empty_graphs(self):
        """测试 p = 0：空图，C = n(n-1)/2，补图取小的上界为 2"""
        row = sample_er_row(20, 0, seed=5, p_mode='fixed', p=0.0)
        assert row['edges'] == 0
        assert row['c_linkstring_bits'] == 190
        assert row['starbar_min_complement'] == 2
        assert row['status'] == STATUS_OK

    def test_complete_graphs(self):
        """测试 p = 1：上界 n-1，补图取小为 2"""
        row = sample_er_row(20, 3, seed=5, p_mode='fixed', p=1.0)
        assert row['starbar'] == 19
        assert row['starbar_min_complement'] == 2

    def test_uniform_mode_reproducible(self):
        assert sample_er_row(30, 4, seed=9) == sample_er_row(30, 4, seed=9)
        assert sample_er_row(30, 4, seed=9)['graph6'] != sample_er_row(30, 5, seed=9)['graph6']

    def test_budget_flags_row(self, monkeypatch):
        """测试自同构预算耗尽时该行被标记，C 列留空"""
        def exhausted(graph, node_budget=None):
            raise SearchBudgetExhausted(2, 1)

        monkeypatch.setattr(experiments, 'canonical', exhausted)
        row = sample_er_row(40, 0, seed=2, p_mode='fixed', p=0.5)
        assert row['status'] == STATUS_BUDGET
        assert row['c_linkstring_bits'] is None
        assert row['starbar'] >= 0

    def test_fixed_mode_needs_p(self):
        with pytest.raises(DataError):
            sample_er_row(10, 0, seed=1, p_mode='fixed', p=None)

    async def test_parallel_matches_serial(self):
        """测试多进程采样结果与顺序无关"""
        serial = await sample_er_async(12, 6, seed=3, workers=1)
        parallel = await sample_er_async(12, 6, seed=3, workers=2)
        assert serial == parallel
        assert [row['id'] for row in parallel] == list(range(6))

    async def test_invariants(self, tmp_path):
        rows = await sample_er_async(30, 10, seed=1)
        path = str(tmp_path / 'er.csv')
        write_csv(rows, SAMPLE_COLUMNS, path)
        frame = read_csv(path)
        assert complexity_invariant_failures(frame) == []
        result = analyze(frame, 'starbar', 'c_linkstring_bits')
        assert math.isfinite(result.rho) and math.isfinite(result.spearman)
