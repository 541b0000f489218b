import math
import pytest
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from config import Config
from main import main
from src.experiments import (analyze, complexity_invariant_failures, contingency_table, figures_report,
                             read_csv, table_cells, table_deviations)
from src.graph_core import Graph, parse_graph6, write_graph6
from src.ibc import complexity_linkstring
from src.utils import load_json_data


@pytest.fixture(autouse=True)
def no_log_file(monkeypatch):
    monkeypatch.setattr(Config, 'LOG_FILE', '')


def output_lines(capsys):
    return capsys.readouterr().out.strip().splitlines()


class TestWalkCommand:
    async def test_small_walk(self, capsys):
        """测试 walk --n 3 --max-star 2 输出 4 行"""
        assert await main(['walk', '--n', '3', '--max-star', '2']) == 0
        lines = output_lines(capsys)
        assert lines[0].startswith('canonical_g6,star,omega_star,c_star_bits,c_linkstring_bits,starbar,witness_recipe')
        assert len(lines) == 5

    async def test_threads_do_not_change_output(self, capsys):
        """测试不同线程数输出逐字节一致"""
        assert await main(['walk', '--n', '4', '--max-star', '3', '--threads', '1']) == 0
        single = capsys.readouterr().out
        assert await main(['walk', '--n', '4', '--max-star', '3', '--threads', '2']) == 0
        assert capsys.readouterr().out == single

    async def test_budget_exit_code(self, tmp_path):
        """测试配方预算耗尽时退出码为 4，元数据标记不完整"""
        out = str(tmp_path / 'walk.csv')
        code = await main(['walk', '--n', '6', '--max-star', '4', '--budget', '10', '--out', out])
        assert code == 4
        meta = load_json_data(f"{out}.meta.json")
        assert meta['complete'] is False
        assert meta['class_counts'] == [1, 2]

    async def test_invalid_range(self):
        assert await main(['walk', '--n', '3', '--max-star', '5']) == 3


class TestErCommand:
    async def test_sample(self, capsys, tmp_path):
        out = str(tmp_path / 'er.csv')
        assert await main(['er', '--n', '10', '--count', '4', '--seed', '1', '--out', out]) == 0
        with open(out, encoding='utf-8') as f:
            lines = f.read().strip().splitlines()
        assert lines[0].split(',')[:3] == ['id', 'graph6', 'n']
        assert len(lines) == 5

    async def test_fixed_mode_needs_p(self):
        assert await main(['er', '--n', '10', '--count', '1', '--p-mode', 'fixed']) == 3


class TestAnalyzeAndTable:
    async def test_analyze_exact_line(self, capsys, tmp_path):
        """测试 y = 2x + 1 的拟合输出"""
        path = tmp_path / 'line.csv'
        path.write_text("x,y\n0,1\n1,3\n2,5\n3,7\n")
        assert await main(['analyze', str(path), 'x', 'y', '--svg', str(tmp_path / 'line.svg')]) == 0
        lines = output_lines(capsys)
        assert lines[0] == 'rho,spearman,slope,intercept,count'
        assert lines[1] == '1,1,2,1,4'
        assert (tmp_path / 'line.svg').exists()

    async def test_analyze_constant_column(self, tmp_path):
        """测试常数列退出码为 3"""
        path = tmp_path / 'flat.csv'
        path.write_text("x,y\n0,1\n1,1\n2,1\n")
        assert await main(['analyze', str(path), 'x', 'y']) == 3

    async def test_table_empty_csv(self, capsys, tmp_path):
        path = tmp_path / 'empty.csv'
        path.write_text('')
        assert await main(['table', str(path), 'star', 'starbar']) == 0

    async def test_table_from_walk(self, capsys, tmp_path):
        walk = str(tmp_path / 'walk.csv')
        assert await main(['walk', '--n', '3', '--max-star', '2', '--out', walk]) == 0
        cells = str(tmp_path / 'cells.csv')
        assert await main(['table', walk, 'star', 'starbar', '--out', cells]) == 0
        with open(cells, encoding='utf-8') as f:
            content = f.read()
        assert content.startswith('star,starbar,count\n0,0,1\n')

    async def test_missing_file(self, tmp_path):
        assert await main(['table', str(tmp_path / 'missing.csv'), 'a', 'b']) == 3


class TestSingleGraphCommands:
    async def test_aut(self, capsys):
        assert await main(['aut', 'Bw']) == 0
        assert output_lines(capsys)[1].startswith('Bw,6,')

    async def test_complexity(self, capsys):
        assert await main(['complexity', 'Bw']) == 0
        assert output_lines(capsys)[1] == 'Bw,linkstring,3,0,3'

    async def test_eval(self, capsys):
        """测试对配方求值并输出位流"""
        assert await main(['eval', '0 1 &', '--n', '3', '--bits']) == 0
        lines = output_lines(capsys)
        assert lines[1].startswith('B_,1,1,')
        assert lines[2] == '101101000001011'

    async def test_eval_invalid_recipe(self):
        assert await main(['eval', '0 &', '--n', '3']) == 3

    async def test_starbar(self, capsys):
        """测试 K_22 的上界为 21"""
        assert await main(['starbar', write_graph6(Graph.complete(22))]) == 0
        fields = output_lines(capsys)[1].split(',')
        assert fields[1:3] == ['21', '2']

    async def test_bad_graph6(self):
        assert await main(['starbar', 'B w']) == 3

    async def test_no_graphs(self):
        assert await main(['aut']) == 3

    async def test_size(self, capsys):
        assert await main(['size', '--n', '22', '--max-star', '2']) == 0
        lines = output_lines(capsys)
        assert [line.split(',')[1] for line in lines[1:]] == ['1', '4', '40']

    async def test_usage_error(self):
        """测试用法错误的退出码为 2"""
        with pytest.raises(SystemExit) as excinfo:
            await main(['unknown'])
        assert excinfo.value.code == 2


class TestFullRuns:
    @pytest.mark.slow
    async def test_er_hundred_vertices(self, capsys, tmp_path):
        """测试 100 个顶点、200 个样本：不变量全部成立，ρ 与 Spearman 有限"""
        out = str(tmp_path / 'er100.csv')
        threads = str(os.cpu_count() or 1)
        assert await main(['er', '--n', '100', '--count', '200', '--p-mode', 'uniform', '--seed', '1',
                           '--threads', threads, '--out', out]) == 0
        frame = read_csv(out)
        assert len(frame) == 200
        assert set(frame['status']) == {'ok'}
        assert complexity_invariant_failures(frame) == []
        for text, value in zip(frame['graph6'], frame['c_linkstring_bits']):
            # 补图的 C 相同
            assert complexity_linkstring(~parse_graph6(text)).bits == pytest.approx(float(value), abs=1e-6)

        svg = tmp_path / 'er100.svg'
        capsys.readouterr()
        assert await main(['analyze', out, 'starbar', 'c_linkstring_bits', '--svg', str(svg), '--bins', '10']) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        rho, spearman = (float(v) for v in lines[1].split(',')[:2])
        assert math.isfinite(rho) and math.isfinite(spearman)
        assert lines[-1] in ('monotone,true', 'monotone,false')
        assert svg.exists()

    @pytest.mark.longrun
    async def test_walk_twenty_two_up_to_eight(self, capsys, tmp_path):
        """测试 22 个顶点、星数 ≤ 8：各层同构类数与参考一致，偏差报告列出全部不同的单元格"""
        out = str(tmp_path / 'walk22.csv')
        threads = str(os.cpu_count() or 1)
        assert await main(['walk', '--n', '22', '--max-star', '8', '--threads', threads, '--out', out]) == 0
        assert load_json_data(f"{out}.meta.json")['class_counts'] == [1, 2, 4, 6, 11, 23, 46, 108, 244]

        frame = read_csv(out)
        cells = table_cells(contingency_table(frame, 'star', 'starbar'))
        assert all(starbar >= star for star, starbar in cells)
        assert [cells[(s, s)] for s in range(5)] == [1, 2, 4, 6, 11]

        capsys.readouterr()
        assert await main(['table', out, 'star', 'starbar', '--reference']) == 0
        report = capsys.readouterr().out
        assert "行合计: [1, 2, 4, 6, 11, 23, 46, 108, 244]，参考: [1, 2, 4, 6, 11, 23, 46, 108, 244]" in report
        deviations = table_deviations(cells, 8)
        assert {'star': 8, 'starbar': 8, 'expected': 134, 'actual': 185} in deviations
        for d in deviations:
            assert f"({d['star']}, {d['starbar']}): 参考 {d['expected']}，实际 {d['actual']}" in report

        # 贪心分解比参考计数更紧，ρ 落在 0.90 之上
        rho = analyze(frame, 'starbar', 'star').rho
        assert rho == pytest.approx(0.9094, abs=1e-3)
        star_vs_starbar = figures_report(frame)[-1]
        assert star_vs_starbar['reference_rho'] == 0.850
        assert star_vs_starbar['deviation'] == pytest.approx(rho - 0.850)
