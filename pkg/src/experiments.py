"""
实验与分析：遍历表格联结、ER 随机图采样、相关性与拟合、列联表、散点图
"""
import asyncio
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from config import Config
from src.automorphism import canonical
from src.errors import (DataError, DimensionError, DomainError, SearchBudgetExhausted,
                        StarbarSoundnessError, StarComplexityError, UndefinedCorrelationError)
from src.graph_core import er_random, parse_graph6, write_graph6
from src.ibc import complexity_edgelist, complexity_linkstring
from src.starbar import star_upper_bound
from src.utils import format_real, save_json_data
from src.walker import WalkTable

logger = logging.getLogger(__name__)

WALK_COLUMNS = [
    'canonical_g6', 'star', 'omega_star', 'c_star_bits', 'c_linkstring_bits', 'starbar',
    'witness_recipe', 'star_min_complement', 'starbar_min_complement', 'starbar_witness'
]
SAMPLE_COLUMNS = [
    'id', 'graph6', 'n', 'edges', 'p', 'log2_aut', 'c_linkstring_bits', 'c_edgelist_bits',
    'star', 'omega_star', 'c_star_bits', 'starbar', 'starbar_min_complement', 'seed', 'status'
]
STARBAR_COLUMNS = ['graph6', 'starbar', 'starbar_min_complement', 'witness_recipe']

P_MODE_FIXED = 'fixed'
P_MODE_UNIFORM = 'uniform'

STATUS_OK = 'ok'
STATUS_BUDGET = 'budget_exhausted'

# 22 个顶点、星数 ≤ 8 的全部图按 (⋆, S̄tar) 计数
REFERENCE_STAR_STARBAR_22 = {
    (0, 0): 1,
    (1, 1): 2,
    (2, 2): 4,
    (3, 3): 6,
    (4, 4): 11,
    (5, 5): 20, (5, 6): 3,
    (6, 6): 36, (6, 7): 6, (6, 8): 4,
    (7, 7): 70, (7, 8): 19, (7, 9): 13, (7, 10): 6,
    (8, 8): 134, (8, 9): 49, (8, 10): 33, (8, 11): 20, (8, 12): 7, (8, 13): 1,
}
REFERENCE_MAX_STAR = 8


@dataclass(frozen=True)
class FigureSpec:
    name: str
    x: str
    y: str
    identity: bool
    reference_rho: Dict[int, float]


FIGURES = (
    FigureSpec('star_vs_c', 'c_linkstring_bits', 'star', False, {10: 0.082, 22: -0.041}),
    FigureSpec('cstar_vs_c', 'c_linkstring_bits', 'c_star_bits', False, {10: 0.143, 22: -1.28e-3}),
    FigureSpec('star_vs_cstar', 'c_star_bits', 'star', False, {10: 0.638, 22: 0.611}),
    FigureSpec('star_vs_starbar', 'starbar', 'star', True, {10: 0.863, 22: 0.850}),
)


@dataclass(frozen=True)
class SampleRow:
    id: int
    graph6: str
    n: int
    edges: int
    p: Optional[float]
    log2_aut: Optional[float]
    c_linkstring_bits: Optional[float]
    c_edgelist_bits: Optional[float]
    star: Optional[int]
    omega_star: Optional[int]
    c_star_bits: Optional[float]
    starbar: int
    starbar_min_complement: int
    seed: Optional[int]
    status: str = STATUS_OK

    def to_dict(self) -> dict:
        return {column: getattr(self, column) for column in SAMPLE_COLUMNS}


@dataclass(frozen=True)
class FitResult:
    rho: float
    spearman: float
    slope: float
    intercept: float
    count: int


# ---------- CSV ----------

def format_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return format_real(float(value))
    return str(value)


def write_csv(rows: Iterable[dict], columns: Sequence[str], path: str) -> int:
    """
    写出 CSV：首行为表头，小数点为 "."，实数 12 位有效数字

    Args:
        path: 输出路径，"-" 表示标准输出

    Returns:
        写出的数据行数
    """
    frame = pd.DataFrame([[format_cell(row.get(c)) for c in columns] for row in rows], columns=list(columns))
    try:
        if path == '-':
            frame.to_csv(sys.stdout, index=False, lineterminator='\n')
        else:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            frame.to_csv(path, index=False, lineterminator='\n')
    except OSError as e:
        raise DataError(f"写入 {path} 失败: {e}") from e
    logger.info(f"写出 {len(frame)} 行到 {path}")
    return len(frame)


def write_metadata(path: str, meta: dict):
    """在 CSV 旁写一个 .meta.json，记录参数和表格是否完整"""
    if path != '-':
        save_json_data(meta, f"{path}.meta.json")


def read_csv(path: str) -> pd.DataFrame:
    """按字符串读取 CSV；空文件返回空表"""
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        logger.warning(f"{path} 为空")
        return pd.DataFrame()
    except OSError as e:
        raise DataError(f"读取 {path} 失败: {e}") from e


def numeric_columns(frame: pd.DataFrame, x_col: str, y_col: str) -> Tuple[np.ndarray, np.ndarray]:
    """取两列数值，跳过任一列为空的行（如预算耗尽的样本）"""
    for column in (x_col, y_col):
        if column not in frame.columns:
            raise DataError(f"CSV 中没有列 {column}")
    pair = frame[[x_col, y_col]]
    present = (pair[x_col] != '') & (pair[y_col] != '')
    skipped = int((~present).sum())
    if skipped:
        logger.warning(f"跳过 {skipped} 个缺少 {x_col}/{y_col} 的行")
    pair = pair[present]
    try:
        x = pd.to_numeric(pair[x_col]).to_numpy(dtype=np.float64)
        y = pd.to_numeric(pair[y_col]).to_numpy(dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise DataError(f"列 {x_col}/{y_col} 含有非数值数据: {e}") from e
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError(f"列 {x_col}/{y_col} 含有非有限实数")
    return x, y


def _integer_column(frame: pd.DataFrame, column: str) -> pd.Series:
    if column not in frame.columns:
        raise DataError(f"CSV 中没有列 {column}")
    values = frame[column][frame[column] != '']
    try:
        numbers = pd.to_numeric(values)
    except (ValueError, TypeError) as e:
        raise DataError(f"列 {column} 含有非数值数据: {e}") from e
    if not np.all(np.mod(numbers, 1) == 0):
        raise DataError(f"列 {column} 不是整数列")
    return numbers.astype(np.int64).rename(column)


# ---------- 遍历表格联结 ----------

def walk_rows(table: WalkTable) -> List[dict]:
    """为遍历表格的每个同构类补上 C、S̄tar 及补图取小的各列，按 (⋆, 典范位向量) 排序"""
    rows = []
    for record in table.sorted_records():
        graph = record.canonical
        bound = star_upper_bound(graph)
        if bound.value < record.star:
            raise StarbarSoundnessError(f"S̄tar={bound.value} 小于 ⋆={record.star}: {write_graph6(graph)}")
        complement_bound = star_upper_bound(~graph)
        rows.append({
            'canonical_g6': write_graph6(graph),
            'star': record.star,
            'omega_star': record.omega_star,
            'c_star_bits': record.c_star_bits,
            'c_linkstring_bits': complexity_linkstring(graph).bits,
            'starbar': bound.value,
            'witness_recipe': record.witness.to_text(),
            'star_min_complement': table.star_min_complement(record),
            'starbar_min_complement': min(bound.value, complement_bound.value),
            'starbar_witness': bound.witness.to_text() if bound.witness else '',
        })
    return rows


# ---------- ER 随机图采样 ----------

def _row_generator(seed: int, row_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, row_id])))


def sample_er_row(n: int, row_id: int, seed: int, p_mode: str = P_MODE_UNIFORM,
                  p: Optional[float] = None, node_budget: Optional[int] = None) -> dict:
    """
    生成并度量一个 ER 随机图

    每行的随机数由 (seed, id) 独立派生，结果与执行顺序和进程数无关。
    自同构搜索预算耗尽时该行标记为 budget_exhausted，C 相关列留空。
    """
    rng = _row_generator(seed, row_id)
    if p_mode == P_MODE_UNIFORM:
        prob = float(rng.random())
    elif p_mode == P_MODE_FIXED:
        if p is None or not 0.0 <= p <= 1.0:
            raise DomainError(f"固定模式需要 [0, 1] 内的边概率: {p}")
        prob = p
    else:
        raise DomainError(f"未知的概率模式: {p_mode}")
    graph_seed = int(rng.integers(0, 2 ** 63))
    graph = er_random(n, prob, graph_seed)

    bound = star_upper_bound(graph)
    complement_bound = star_upper_bound(~graph)
    row = SampleRow(
        id=row_id, graph6=write_graph6(graph), n=n, edges=graph.edge_count, p=prob,
        log2_aut=None, c_linkstring_bits=None, c_edgelist_bits=None,
        star=None, omega_star=None, c_star_bits=None,
        starbar=bound.value, starbar_min_complement=min(bound.value, complement_bound.value),
        seed=graph_seed, status=STATUS_BUDGET
    ).to_dict()

    try:
        aut = canonical(graph, node_budget)
        complement_aut = canonical(~graph, node_budget)
    except SearchBudgetExhausted as e:
        logger.warning(f"样本 {row_id}: {e}")
        return row

    if aut.aut_order != complement_aut.aut_order:
        raise StarComplexityError(f"样本 {row_id}: 图与补图的自同构群阶不一致")
    link = complexity_linkstring(graph, aut)
    if not -1e-9 <= link.bits <= graph.pair_count + 1e-9:
        raise StarComplexityError(f"样本 {row_id}: C={link.bits} 超出 [0, {graph.pair_count}]")
    row.update(
        log2_aut=aut.log2_aut,
        c_linkstring_bits=link.bits,
        c_edgelist_bits=complexity_edgelist(graph, aut).bits,
        status=STATUS_OK
    )
    return row


async def sample_er_async(n: int, count: int, seed: int, p_mode: str = P_MODE_UNIFORM,
                          p: Optional[float] = None, workers: int = 1,
                          node_budget: Optional[int] = None, progress: bool = False) -> List[dict]:
    """并行采样 count 个 ER 图，返回按 id 排序的行"""
    if n < 2:
        raise DomainError(f"ER 采样要求 n ≥ 2: {n}")
    if count < 0:
        raise DomainError(f"样本数不能为负: {count}")
    loop = asyncio.get_running_loop()
    bar = tqdm(total=count, desc=f"er n={n}", unit="graph", disable=not progress)
    try:
        if workers <= 1:
            rows = []
            for row_id in range(count):
                rows.append(sample_er_row(n, row_id, seed, p_mode, p, node_budget))
                bar.update(1)
            return rows
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [loop.run_in_executor(pool, sample_er_row, n, row_id, seed, p_mode, p, node_budget)
                       for row_id in range(count)]
            for future in futures:
                future.add_done_callback(lambda _: bar.update(1))
            return list(await asyncio.gather(*futures))
    finally:
        bar.close()


# ---------- 相关性与拟合 ----------

def fit(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """
    Pearson 相关系数、Spearman 秩相关系数和最小二乘直线

    Raises:
        UndefinedCorrelationError: 任一列方差为零
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"两列长度不一致: {x.size} 与 {y.size}")
    if x.size < 2:
        raise DataError(f"至少需要 2 个数据点: {x.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("某一列为常数，相关系数无定义")
    rho = float(np.clip(stats.pearsonr(x, y)[0], -1.0, 1.0))
    spearman = float(stats.spearmanr(x, y)[0])
    regression = stats.linregress(x, y)
    return FitResult(
        rho=rho,
        spearman=spearman,
        slope=float(regression.slope),
        intercept=float(regression.intercept),
        count=int(x.size)
    )


def plot_scatter(x: np.ndarray, y: np.ndarray, result: FitResult, path: str,
                 x_label: str, y_label: str, identity: bool = False):
    """散点 + 红色拟合线（限于数据范围），可选绿色恒等线；输出不含时间戳"""
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    lo, hi = float(x[0]), float(x[-1])
    rc = {'svg.hashsalt': Config.SVG_HASH_SALT, 'svg.fonttype': 'none'}
    with matplotlib.rc_context(rc):
        fig, ax = plt.subplots(figsize=(Config.SVG_WIDTH / 72, Config.SVG_HEIGHT / 72), dpi=72)
        ax.scatter(x, y, s=16, color='black', linewidths=0)
        ax.plot([lo, hi], [result.intercept + result.slope * lo, result.intercept + result.slope * hi],
                color='red', linewidth=1)
        if identity:
            ax.plot([lo, hi], [lo, hi], color='green', linewidth=1)
        ax.set_xticks([lo, hi], labels=[format_real(lo), format_real(hi)])
        y_lo, y_hi = float(y.min()), float(y.max())
        ax.set_yticks([y_lo, y_hi], labels=[format_real(y_lo), format_real(y_hi)])
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        ax.set_title(f"rho = {result.rho:.3f}")
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        try:
            fig.savefig(path, format='svg', metadata={'Date': None})
        except OSError as e:
            raise DataError(f"写入 {path} 失败: {e}") from e
        finally:
            plt.close(fig)
    logger.info(f"散点图已保存到 {path}")


def analyze(frame: pd.DataFrame, x_col: str, y_col: str, svg_path: Optional[str] = None,
            identity: bool = False) -> FitResult:
    x, y = numeric_columns(frame, x_col, y_col)
    result = fit(x, y)
    if svg_path:
        plot_scatter(x, y, result, svg_path, x_col, y_col, identity)
    return result


def binned_means(x: np.ndarray, y: np.ndarray, bins: int = 10) -> pd.DataFrame:
    """按 x 等宽分箱求 y 的均值，用于检查两者是否单调相关"""
    frame = pd.DataFrame({'x': x, 'y': y})
    frame['bin'] = pd.cut(frame['x'], bins=bins)
    grouped = frame.groupby('bin', observed=True)['y'].agg(['count', 'mean']).reset_index()
    grouped['x_low'] = grouped['bin'].map(lambda interval: interval.left).astype(float)
    grouped['x_high'] = grouped['bin'].map(lambda interval: interval.right).astype(float)
    return grouped[['x_low', 'x_high', 'count', 'mean']]


def is_monotone(means: pd.Series) -> bool:
    return bool(means.is_monotonic_increasing or means.is_monotonic_decreasing)


# ---------- 列联表 ----------

def contingency_table(frame: pd.DataFrame, row_col: str, col_col: str) -> pd.DataFrame:
    """两列整数的计数表；空 CSV 返回空表"""
    if frame.empty:
        return pd.DataFrame()
    rows = _integer_column(frame, row_col)
    cols = _integer_column(frame, col_col)
    rows, cols = rows.align(cols, join='inner')
    return pd.crosstab(rows, cols)


def table_cells(table: pd.DataFrame) -> Dict[Tuple[int, int], int]:
    """非零单元格"""
    cells = {}
    for row in table.index:
        for col in table.columns:
            count = int(table.at[row, col])
            if count:
                cells[(int(row), int(col))] = count
    return cells


def table_rows(table: pd.DataFrame, row_col: str, col_col: str) -> List[dict]:
    """稀疏长表：非零单元格，再加行、列边际（另一列记为 "*"）"""
    rows = [{row_col: r, col_col: c, 'count': v} for (r, c), v in sorted(table_cells(table).items())]
    if table.empty:
        return rows
    for r, total in table.sum(axis=1).items():
        rows.append({row_col: int(r), col_col: '*', 'count': int(total)})
    for c, total in table.sum(axis=0).items():
        rows.append({row_col: '*', col_col: int(c), 'count': int(total)})
    rows.append({row_col: '*', col_col: '*', 'count': int(table.to_numpy().sum())})
    return rows


def table_text(table: pd.DataFrame, row_col: str, col_col: str) -> str:
    if table.empty:
        return f"{row_col} \\ {col_col}: (空表)"
    full = table.copy()
    full['合计'] = full.sum(axis=1)
    full.loc['合计'] = full.sum(axis=0)
    text = full.astype(str).replace('0', '')
    text.index.name = f"{row_col} \\ {col_col}"
    text.columns.name = None
    return text.to_string()


def table_deviations(cells: Dict[Tuple[int, int], int], max_star: int) -> List[dict]:
    """与 22 顶点参考计数相比不同的单元格（只比较已遍历的星数行）"""
    limit = min(max_star, REFERENCE_MAX_STAR)
    keys = {k for k in REFERENCE_STAR_STARBAR_22 if k[0] <= limit} | {k for k in cells if k[0] <= limit}
    deviations = []
    for key in sorted(keys):
        expected = REFERENCE_STAR_STARBAR_22.get(key, 0)
        actual = cells.get(key, 0)
        if expected != actual:
            deviations.append({'star': key[0], 'starbar': key[1], 'expected': expected, 'actual': actual})
    return deviations


def reference_row_totals(max_star: int) -> List[int]:
    totals = [0] * (min(max_star, REFERENCE_MAX_STAR) + 1)
    for (star, _), count in REFERENCE_STAR_STARBAR_22.items():
        if star < len(totals):
            totals[star] += count
    return totals


# ---------- 图表复现 ----------

def walk_vertex_count(frame: pd.DataFrame) -> Optional[int]:
    if frame.empty or 'canonical_g6' not in frame.columns:
        return None
    return parse_graph6(frame['canonical_g6'].iloc[0]).n


def figures_report(frame: pd.DataFrame, out_dir: Optional[str] = None) -> List[dict]:
    """
    对遍历 CSV 计算四组相关系数，并与 10、22 顶点的参考值比较

    参考值依赖 C 的编码头部，这里只报告偏差，不作断言。
    """
    n = walk_vertex_count(frame)
    report = []
    for figure in FIGURES:
        svg = os.path.join(out_dir, f"{figure.name}.svg") if out_dir else None
        reference = figure.reference_rho.get(n)
        entry = {'figure': figure.name, 'x': figure.x, 'y': figure.y, 'rho': None, 'spearman': None,
                 'count': None, 'reference_rho': reference, 'deviation': None, 'svg': svg or ''}
        try:
            result = analyze(frame, figure.x, figure.y, svg, figure.identity)
        except UndefinedCorrelationError as e:
            logger.warning(f"{figure.name}: {e}")
            entry['svg'] = ''
            report.append(entry)
            continue
        entry.update(rho=result.rho, spearman=result.spearman, count=result.count)
        if reference is not None:
            entry['deviation'] = result.rho - reference
        report.append(entry)
    return report


def complexity_invariant_failures(frame: pd.DataFrame) -> List[int]:
    """C 不在 [0, n(n-1)/2] 内的样本 id"""
    failures = []
    for _, row in frame.iterrows():
        if row.get('status') != STATUS_OK:
            continue
        n = int(row['n'])
        value = float(row['c_linkstring_bits'])
        if not (math.isfinite(value) and -1e-9 <= value <= n * (n - 1) / 2 + 1e-9):
            failures.append(int(row['id']))
    return failures
