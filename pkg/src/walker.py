"""
星复杂度的穷举遍历

按星数 s = 0..max_s 升序枚举全部配方：树形（Catalan(s) 种）× 运算符（2^s 种）
× 按首次出现顺序编号的叶序列（受限增长串，最多 n 个不同值）。
一个受限增长串代表 n!/(n-u)! 个带标号的配方（u 为用到的不同星图数），
它们的结果两两同构，所以同构类的发现与最小星数不受影响，ω* 按倍数精确累加。

同一叶序列上的全部树形和运算符组合用区间动态规划一次求出，
结果按位向量合并计数，避免逐个配方求值。
"""
import asyncio
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from tqdm import tqdm

from config import Config
from src.automorphism import canonical
from src.cache_manager import CacheManager
from src.errors import BruteForceLimitError, DomainError
from src.graph_core import Graph, star_bits
from src.recipe import Recipe, code_length, evaluate
from src.utils import format_number

logger = logging.getLogger(__name__)

# 典范位向量 -> [ω*, 见证配方编码]
LevelResult = Dict[int, List]


@dataclass(frozen=True)
class WalkRecord:
    canonical: Graph
    star: int
    omega_star: int
    witness: Recipe
    c_star_bits: float

    @property
    def canonical_key(self) -> int:
        return self.canonical.bits


@dataclass
class WalkTable:
    n: int
    max_s: int
    records: Dict[int, WalkRecord] = field(default_factory=dict)
    complete: bool = True
    levels_done: int = 0
    recipes_planned: int = 0

    def class_counts(self) -> List[int]:
        """各星数上的同构类数量"""
        counts = [0] * (self.max_s + 1)
        for record in self.records.values():
            counts[record.star] += 1
        return counts[:self.levels_done] if not self.complete else counts

    def sorted_records(self) -> List[WalkRecord]:
        return sorted(self.records.values(), key=lambda r: (r.star, r.canonical_key))

    def find(self, graph: Graph) -> Optional[WalkRecord]:
        return self.records.get(canonical(graph).canonical_graph.bits)

    def star_min_complement(self, record: WalkRecord) -> int:
        """min(⋆(G), ⋆(补图))；补图不在表中时其星数必然更大"""
        other = self.find(~record.canonical)
        return record.star if other is None else min(record.star, other.star)


def catalan(s: int) -> int:
    return math.comb(2 * s, s) // (s + 1)


@lru_cache(maxsize=None)
def stirling2(length: int, k: int) -> int:
    """第二类 Stirling 数"""
    if length == k:
        return 1
    if k == 0 or k > length:
        return 0
    return k * stirling2(length - 1, k) + stirling2(length - 1, k - 1)


def rgs_count(length: int, cap: int) -> int:
    """长度为 length、最多 cap 个不同值的受限增长串个数"""
    return sum(stirling2(length, k) for k in range(1, min(cap, length) + 1))


def restricted_growth_strings(length: int, cap: int) -> Iterator[Tuple[int, ...]]:
    """按字典序生成受限增长串：首项为 0，每项至多比此前最大值大 1"""
    if length < 1:
        return
    prefix = [0]

    def extend(top: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for v in range(min(top + 2, cap)):
            prefix.append(v)
            yield from extend(max(top, v))
            prefix.pop()

    yield from extend(0)


def enumeration_size(n: int, s: int) -> int:
    """星数为 s 时约化后的配方个数 RGS(s+1, n) × Catalan(s) × 2^s"""
    if s < 0 or s > n:
        raise DomainError(f"只支持 0 ≤ s ≤ n: s={s}, n={n}")
    return rgs_count(s + 1, n) * catalan(s) * 2 ** s


def proportional_cost(n: int, s: int) -> float:
    """按 s ≤ n 时 s!·2^(s-1)、s > n 时 n!·n^(s-n)·2^(s-1) 的比例式估算配方数"""
    if s <= n:
        return math.factorial(s) * 2.0 ** (s - 1)
    return math.factorial(n) * float(n) ** (s - n) * 2.0 ** (s - 1)


class _RecipeAlgebra:
    """对给定叶序列，求出全部树形与运算符组合的结果 {位向量: [计数, 见证编码]}"""

    def __init__(self, n: int, memo_limit: int):
        self.n = n
        self.stars = [star_bits(n, h) for h in range(n)]
        self.memo: Dict[Tuple[int, ...], LevelResult] = {}
        self.memo_limit = memo_limit

    def results(self, labels: Tuple[int, ...]) -> LevelResult:
        cached = self.memo.get(labels)
        if cached is not None:
            return cached
        if len(labels) == 1:
            out = {self.stars[labels[0]]: [1, labels]}
        else:
            intersect, union = self.n, self.n + 1
            out = {}
            for k in range(1, len(labels)):
                left = self.results(labels[:k])
                right = self.results(labels[k:])
                for a, (ca, wa) in left.items():
                    for b, (cb, wb) in right.items():
                        c = ca * cb
                        for code, m in ((intersect, a & b), (union, a | b)):
                            entry = out.get(m)
                            if entry is None:
                                out[m] = [c, wa + wb + (code,)]
                            else:
                                entry[0] += c
        if len(self.memo) >= self.memo_limit:
            self.memo.clear()
        self.memo[labels] = out
        return out


# 工作进程内的状态，跨星数层复用
_ALGEBRAS: Dict[int, _RecipeAlgebra] = {}
_CANONICAL_CACHE: Optional[CacheManager] = None


def _algebra(n: int) -> _RecipeAlgebra:
    algebra = _ALGEBRAS.get(n)
    if algebra is None:
        algebra = _ALGEBRAS[n] = _RecipeAlgebra(n, Config.RECIPE_MEMO_LIMIT)
    return algebra


def canonical_key(n: int, bits: int, node_budget: Optional[int] = None) -> int:
    """带缓存的典范位向量"""
    global _CANONICAL_CACHE
    if _CANONICAL_CACHE is None:
        _CANONICAL_CACHE = CacheManager()
    hit = _CANONICAL_CACHE.get(n, bits)
    if hit is not None:
        return hit
    key = canonical(Graph(n, bits), node_budget).canonical_graph.bits
    _CANONICAL_CACHE.set(n, bits, key)
    return key


def _prefix_length(length: int, cap: int, shards: int) -> int:
    for p in range(1, length + 1):
        if rgs_count(p, cap) >= 4 * shards:
            return p
    return length


def shard_sequences(n: int, s: int, shard: int, shards: int) -> Iterator[Tuple[int, ...]]:
    """按固定长度前缀把受限增长串分组，第 g 组属于分片 g mod shards"""
    length = s + 1
    p = _prefix_length(length, n, shards)
    group = -1
    last = None
    for seq in restricted_growth_strings(length, n):
        prefix = seq[:p]
        if prefix != last:
            group += 1
            last = prefix
        if group % shards == shard:
            yield seq


def walk_shard(n: int, s: int, shard: int, shards: int, node_budget: Optional[int] = None) -> LevelResult:
    """
    枚举一个分片中星数为 s 的全部约化配方

    Returns:
        典范位向量 -> [带标号配方数, 字典序最小的见证编码]
    """
    algebra = _algebra(n)
    found: LevelResult = {}
    for seq in shard_sequences(n, s, shard, shards):
        multiplicity = math.perm(n, max(seq) + 1)
        for mask, (count, witness) in algebra.results(seq).items():
            key = canonical_key(n, mask, node_budget)
            entry = found.get(key)
            if entry is None:
                found[key] = [count * multiplicity, witness]
            else:
                entry[0] += count * multiplicity
                if witness < entry[1]:
                    entry[1] = witness
    return found


def merge_shard_results(results: Iterable[LevelResult]) -> LevelResult:
    """计数相加、见证取最小；满足结合律和交换律"""
    merged: LevelResult = {}
    for result in results:
        for key, (omega, witness) in result.items():
            entry = merged.get(key)
            if entry is None:
                merged[key] = [omega, witness]
            else:
                entry[0] += omega
                if witness < entry[1]:
                    entry[1] = witness
    return merged


def cstar(record: WalkRecord, n: int) -> float:
    """C* = 码长(⋆, n) - log2 ω*"""
    return code_length(record.star, n).bits - math.log2(record.omega_star)


def _record_level(table: WalkTable, s: int, level: LevelResult):
    n = table.n
    for key in sorted(level):
        omega, codes = level[key]
        existing = table.records.get(key)
        if existing is not None:
            if existing.star > s:
                raise RuntimeError(f"同构类在星数 {s} 出现，却记录为 {existing.star}")
            continue
        witness = Recipe.from_codes(codes, n)
        record = WalkRecord(
            canonical=Graph(n, key),
            star=s,
            omega_star=omega,
            witness=witness,
            c_star_bits=code_length(s, n).bits - math.log2(omega)
        )
        table.records[key] = record
    table.levels_done = s + 1


def _check_walk_args(n: int, max_s: int, shards: int, workers: int):
    if n < 2:
        raise DomainError(f"遍历要求 n ≥ 2: {n}")
    if not 0 <= max_s <= n:
        raise DomainError(f"遍历要求 0 ≤ max_s ≤ n: max_s={max_s}, n={n}")
    if shards < 1 or workers < 1:
        raise DomainError("分片数和工作进程数必须至少为 1")


async def walk_async(n: int, max_s: int, shards: int = 1, workers: int = 1,
                     recipe_budget: Optional[int] = None, node_budget: Optional[int] = None,
                     progress: bool = False) -> WalkTable:
    """
    按星数升序遍历，分片在进程池中并行执行

    结果与分片数、进程数无关。超出配方数预算时停止并把表格标记为不完整。
    """
    _check_walk_args(n, max_s, shards, workers)
    budget = Config.WALK_RECIPE_BUDGET if recipe_budget is None else recipe_budget
    table = WalkTable(n=n, max_s=max_s)
    loop = asyncio.get_running_loop()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    bar = tqdm(total=(max_s + 1) * shards, desc=f"walk n={n}", unit="shard", disable=not progress)
    try:
        for s in range(max_s + 1):
            size = enumeration_size(n, s)
            if budget and table.recipes_planned + size > budget:
                logger.warning(f"星数 {s} 需要 {format_number(size)} 个配方，超出预算 {format_number(budget)}，表格不完整")
                table.complete = False
                break
            table.recipes_planned += size
            logger.info(f"星数 {s}: {format_number(size)} 个约化配方，{shards} 个分片")

            if pool is None:
                results = []
                for shard in range(shards):
                    results.append(walk_shard(n, s, shard, shards, node_budget))
                    bar.update(1)
            else:
                futures = [loop.run_in_executor(pool, walk_shard, n, s, shard, shards, node_budget)
                           for shard in range(shards)]
                for future in futures:
                    future.add_done_callback(lambda _: bar.update(1))
                results = await asyncio.gather(*futures)

            _record_level(table, s, merge_shard_results(results))
            logger.info(f"星数 {s}: 新增 {table.class_counts()[s]} 个同构类")
    finally:
        bar.close()
        if pool is not None:
            pool.shutdown()
    return table


def enumerate_walk(n: int, max_s: int, shards: int = 1, workers: int = 1,
                   recipe_budget: Optional[int] = None, node_budget: Optional[int] = None,
                   progress: bool = False) -> WalkTable:
    return asyncio.run(walk_async(n, max_s, shards, workers, recipe_budget, node_budget, progress))


def all_programs(n: int, s: int) -> Iterator[Tuple[int, ...]]:
    """全部带标号的 s 运算符配方（编码形式），共 n^(s+1)·Catalan(s)·2^s 个"""
    prefix: List[int] = []

    def extend(pushes: int, ops: int, depth: int) -> Iterator[Tuple[int, ...]]:
        if pushes == s + 1 and ops == s:
            yield tuple(prefix)
            return
        if pushes < s + 1:
            for hub in range(n):
                prefix.append(hub)
                yield from extend(pushes + 1, ops, depth + 1)
                prefix.pop()
        if depth >= 2 and ops < s:
            for code in (n, n + 1):
                prefix.append(code)
                yield from extend(pushes, ops + 1, depth - 1)
                prefix.pop()

    yield from extend(0, 0, 0)


def brute_force_enumerate(n: int, max_s: int) -> WalkTable:
    """不做对称约化的遍历，作为 enumerate_walk 的对照（n ≤ 4, max_s ≤ 3）"""
    if not 2 <= n <= 4 or not 0 <= max_s <= 3:
        raise BruteForceLimitError(f"暴力遍历只支持 2 ≤ n ≤ 4 且 max_s ≤ 3: n={n}, max_s={max_s}")
    table = WalkTable(n=n, max_s=max_s)
    keys: Dict[int, int] = {}
    for s in range(max_s + 1):
        level: LevelResult = {}
        for codes in all_programs(n, s):
            bits = evaluate(Recipe.from_codes(codes, n), n).bits
            key = keys.get(bits)
            if key is None:
                key = keys[bits] = canonical(Graph(n, bits)).canonical_graph.bits
            entry = level.get(key)
            if entry is None:
                level[key] = [1, codes]
            else:
                entry[0] += 1
                if codes < entry[1]:
                    entry[1] = codes
        _record_level(table, s, level)
    return table
