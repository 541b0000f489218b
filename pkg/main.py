import argparse
import asyncio
import logging
import sys
import time
from typing import List, Optional

import pandas as pd

from config import Config
from src.automorphism import canonical
from src.errors import DataError, StarComplexityError, WalkBudgetExceeded
from src.experiments import (P_MODE_FIXED, P_MODE_UNIFORM, SAMPLE_COLUMNS, STARBAR_COLUMNS, STATUS_OK,
                             WALK_COLUMNS, analyze, binned_means, complexity_invariant_failures,
                             contingency_table, figures_report, is_monotone, numeric_columns, read_csv,
                             reference_row_totals, sample_er_async, table_cells, table_deviations,
                             table_rows, table_text, walk_rows, write_csv, write_metadata)
from src.graph_core import Graph, parse_edge_list, parse_graph6, write_graph6
from src.ibc import ENCODINGS, LINKSTRING, complexity
from src.recipe import code_length, parse as parse_recipe, evaluate, serialize_bits
from src.starbar import star_upper_bound
from src.utils import format_duration, format_real, setup_logger
from src.walker import enumeration_size, proportional_cost, walk_async

logger = logging.getLogger(__name__)


def _read_text(path: str) -> str:
    try:
        if path == '-':
            return sys.stdin.read()
        with open(path, 'r', encoding='utf-8') as f:
            return f.read()
    except OSError as e:
        raise DataError(f"读取 {path} 失败: {e}") from e


def load_graphs(args) -> List[Graph]:
    """命令行中的 graph6 串、--input 文件（每行一个 graph6）或 --edge-list 文件"""
    graphs = [parse_graph6(text) for text in args.graphs]
    if args.input:
        graphs.extend(parse_graph6(line) for line in _read_text(args.input).splitlines() if line.strip())
    if args.edge_list:
        graphs.append(parse_edge_list(_read_text(args.edge_list)))
    if not graphs:
        raise DataError("没有输入图")
    return graphs


def _print_line(*fields):
    print(','.join(str(f) for f in fields))


async def cmd_walk(args):
    started = time.monotonic()
    shards = args.shards or args.threads * Config.WALK_SHARDS_PER_WORKER
    table = await walk_async(args.n, args.max_star, shards=shards, workers=args.threads,
                             recipe_budget=args.budget, node_budget=args.node_budget,
                             progress=args.progress)
    write_csv(walk_rows(table), WALK_COLUMNS, args.out)
    write_metadata(args.out, {
        'command': 'walk', 'n': args.n, 'max_star': args.max_star, 'complete': table.complete,
        'class_counts': table.class_counts(), 'recipes_planned': table.recipes_planned
    })
    logger.info(f"遍历完成，各星数同构类数 {table.class_counts()}，用时 {format_duration(time.monotonic() - started)}")
    if not table.complete:
        raise WalkBudgetExceeded(f"配方预算耗尽，只完成了 {table.levels_done} 个星数层，表格不完整")


async def cmd_er(args):
    if args.p_mode == P_MODE_FIXED and args.p is None:
        raise DataError("--p-mode fixed 需要 --p")
    started = time.monotonic()
    rows = await sample_er_async(args.n, args.count, args.seed, args.p_mode, args.p,
                                 workers=args.threads, node_budget=args.node_budget,
                                 progress=args.progress)
    write_csv(rows, SAMPLE_COLUMNS, args.out)
    flagged = sum(1 for row in rows if row['status'] != STATUS_OK)
    write_metadata(args.out, {
        'command': 'er', 'n': args.n, 'count': args.count, 'p_mode': args.p_mode, 'p': args.p,
        'seed': args.seed, 'flagged_rows': flagged
    })
    if flagged:
        logger.warning(f"{flagged} 个样本的自同构搜索预算耗尽")
    failures = complexity_invariant_failures(pd.DataFrame(rows))
    if failures:
        logger.error(f"以下样本的 C 超出 [0, n(n-1)/2]: {failures}")
    logger.info(f"采样完成，共 {len(rows)} 个图，用时 {format_duration(time.monotonic() - started)}")


async def cmd_analyze(args):
    frame = read_csv(args.csv)
    result = analyze(frame, args.x, args.y, args.svg, args.identity)
    _print_line('rho', 'spearman', 'slope', 'intercept', 'count')
    _print_line(format_real(result.rho), format_real(result.spearman), format_real(result.slope),
                format_real(result.intercept), result.count)
    if args.bins:
        x, y = numeric_columns(frame, args.x, args.y)
        means = binned_means(x, y, args.bins)
        print()
        print(means.to_csv(index=False, lineterminator='\n', float_format=lambda v: format_real(v)), end='')
        print(f"monotone,{str(is_monotone(means['mean'])).lower()}")


async def cmd_table(args):
    frame = read_csv(args.csv)
    table = contingency_table(frame, args.row, args.col)
    print(table_text(table, args.row, args.col))
    if args.out:
        write_csv(table_rows(table, args.row, args.col), [args.row, args.col, 'count'], args.out)
    if args.reference:
        cells = table_cells(table)
        max_star = max((r for r, _ in cells), default=0)
        totals = [sum(v for (r, _), v in cells.items() if r == s) for s in range(max_star + 1)]
        expected = reference_row_totals(max_star)
        print()
        print(f"行合计: {totals}，参考: {expected}")
        deviations = table_deviations(cells, max_star)
        if not deviations:
            print("与参考计数完全一致")
        for d in deviations:
            print(f"({d['star']}, {d['starbar']}): 参考 {d['expected']}，实际 {d['actual']}")


async def cmd_figures(args):
    frame = read_csv(args.csv)
    report = figures_report(frame, args.out_dir)
    write_csv(report, ['figure', 'x', 'y', 'rho', 'spearman', 'count', 'reference_rho', 'deviation', 'svg'], '-')


async def cmd_size(args):
    _print_line('s', 'enumeration_size', 'proportional_cost', 'code_length_bits')
    for s in range(args.max_star + 1):
        _print_line(s, enumeration_size(args.n, s), format_real(proportional_cost(args.n, s)),
                    format_real(code_length(s, args.n).bits))


async def cmd_aut(args):
    _print_line('graph6', 'aut_order', 'log2_aut', 'canonical_g6', 'search_nodes')
    for graph in load_graphs(args):
        result = canonical(graph, args.node_budget)
        _print_line(write_graph6(graph), result.aut_order, format_real(result.log2_aut),
                    write_graph6(result.canonical_graph), result.search_nodes)


async def cmd_complexity(args):
    _print_line('graph6', 'encoding', 'ell', 'log2_omega', 'c_bits')
    for graph in load_graphs(args):
        aut = canonical(graph, args.node_budget)
        value = complexity(graph, args.encoding, aut)
        _print_line(write_graph6(graph), value.encoding, format_real(value.ell),
                    format_real(value.log2_omega), format_real(value.bits))


async def cmd_eval(args):
    recipe = parse_recipe(args.recipe, args.n)
    graph = evaluate(recipe, args.n)
    _print_line('graph6', 'edges', 'star_count', 'code_length_bits', 'infix')
    _print_line(write_graph6(graph), graph.edge_count, recipe.star_count,
                format_real(code_length(recipe.star_count, args.n).bits), recipe.to_infix())
    if args.bits:
        print(serialize_bits(recipe, args.n))


async def cmd_starbar(args):
    rows = []
    for graph in load_graphs(args):
        bound = star_upper_bound(graph)
        complement_bound = star_upper_bound(~graph)
        rows.append({
            'graph6': write_graph6(graph),
            'starbar': bound.value,
            'starbar_min_complement': min(bound.value, complement_bound.value),
            'witness_recipe': bound.witness.to_text() if bound.witness else '',
        })
    write_csv(rows, STARBAR_COLUMNS, '-')


COMMANDS = {
    'walk': cmd_walk,
    'er': cmd_er,
    'analyze': cmd_analyze,
    'table': cmd_table,
    'figures': cmd_figures,
    'size': cmd_size,
    'aut': cmd_aut,
    'complexity': cmd_complexity,
    'eval': cmd_eval,
    'starbar': cmd_starbar,
}


def _add_graph_inputs(parser: argparse.ArgumentParser):
    parser.add_argument('graphs', nargs='*', help='graph6 文本')
    parser.add_argument('--input', help='每行一个 graph6 的文件，"-" 为标准输入')
    parser.add_argument('--edge-list', help='边列表文件')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='star-complexity', description='星复杂度与图信息复杂度工具')
    parser.add_argument('--log-level', default=None, help='日志级别，默认取 STARCX_LOG_LEVEL')
    parser.add_argument('--progress', action='store_true', help='显示进度条')
    parser.add_argument('--node-budget', type=int, default=None, help='自同构搜索节点预算')
    sub = parser.add_subparsers(dest='command', required=True)

    walk = sub.add_parser('walk', help='穷举遍历星数 ≤ max-star 的全部配方')
    walk.add_argument('--n', type=int, required=True)
    walk.add_argument('--max-star', type=int, required=True)
    walk.add_argument('--threads', type=int, default=1)
    walk.add_argument('--shards', type=int, default=None, help='分片数，默认为 threads × 4')
    walk.add_argument('--budget', type=int, default=None, help='配方数预算，0 表示不限')
    walk.add_argument('--out', default='-')

    er = sub.add_parser('er', help='Erdős–Rényi 随机图采样')
    er.add_argument('--n', type=int, required=True)
    er.add_argument('--count', type=int, required=True)
    er.add_argument('--p-mode', choices=(P_MODE_FIXED, P_MODE_UNIFORM), default=P_MODE_UNIFORM)
    er.add_argument('--p', type=float, default=None)
    er.add_argument('--seed', type=int, default=0)
    er.add_argument('--threads', type=int, default=1)
    er.add_argument('--out', default='-')

    an = sub.add_parser('analyze', help='相关系数与线性拟合')
    an.add_argument('csv')
    an.add_argument('x')
    an.add_argument('y')
    an.add_argument('--svg', default=None)
    an.add_argument('--identity', action='store_true', help='在图中画出恒等线')
    an.add_argument('--bins', type=int, default=0, help='分箱均值的箱数，0 表示不输出')

    table = sub.add_parser('table', help='两列整数的列联表')
    table.add_argument('csv')
    table.add_argument('row')
    table.add_argument('col')
    table.add_argument('--out', default=None)
    table.add_argument('--reference', action='store_true', help='与 22 顶点参考计数比较')

    figures = sub.add_parser('figures', help='对遍历 CSV 复现四组相关图')
    figures.add_argument('csv')
    figures.add_argument('--out-dir', default=None)

    size = sub.add_parser('size', help='各星数的配方数')
    size.add_argument('--n', type=int, required=True)
    size.add_argument('--max-star', type=int, required=True)

    aut = sub.add_parser('aut', help='自同构群阶与典范形式')
    _add_graph_inputs(aut)

    cx = sub.add_parser('complexity', help='信息复杂度 C')
    _add_graph_inputs(cx)
    cx.add_argument('--encoding', choices=ENCODINGS, default=LINKSTRING)

    ev = sub.add_parser('eval', help='对配方求值')
    ev.add_argument('recipe', help='逆波兰配方，如 "0 1 & 2 |"')
    ev.add_argument('--n', type=int, required=True)
    ev.add_argument('--bits', action='store_true', help='同时输出位流编码')

    sb = sub.add_parser('starbar', help='S̄tar 上界与见证配方')
    _add_graph_inputs(sb)
    return parser


async def main(argv: Optional[List[str]] = None) -> int:
    """主程序入口，返回退出码"""
    args = build_parser().parse_args(argv)
    setup_logger(args.log_level)
    if getattr(args, 'threads', 1) < 1:
        logger.error("--threads 必须至少为 1")
        return 2

    try:
        logger.debug(f"执行命令: {args.command}")
        await COMMANDS[args.command](args)
        return 0
    except StarComplexityError as e:
        logger.error(f"{args.command} 失败: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"程序执行失败: {str(e)}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
