"""
星图配方：逆波兰表示的栈程序

符号为顶点编号（压入对应星图）、"&"（交）和 "|"（并）。
数值编码中 0..n-1 为压栈，n 为交，n+1 为并，位流格式与遍历器的见证配方共用这一编码。
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

from src.errors import DomainError, RecipeError
from src.graph_core import Graph, star_bits

logger = logging.getLogger(__name__)

INTERSECT = '&'
UNION = '|'
OPERATORS = (INTERSECT, UNION)

Symbol = Union[int, str]


@dataclass(frozen=True)
class Recipe:
    symbols: Tuple[Symbol, ...]

    @property
    def star_count(self) -> int:
        """运算符个数，即该表示的星复杂度"""
        return sum(1 for s in self.symbols if s in OPERATORS)

    @property
    def push_count(self) -> int:
        return len(self.symbols) - self.star_count

    def hubs(self) -> List[int]:
        return [s for s in self.symbols if not isinstance(s, str)]

    def to_text(self) -> str:
        return ' '.join(str(s) for s in self.symbols)

    def to_infix(self) -> str:
        stack: List[str] = []
        for s in self.symbols:
            if isinstance(s, str):
                right = stack.pop()
                left = stack.pop()
                stack.append(f"({left} {s} {right})")
            else:
                stack.append(str(s))
        return stack[0]

    def to_codes(self, n: int) -> Tuple[int, ...]:
        return tuple(n if s == INTERSECT else n + 1 if s == UNION else s for s in self.symbols)

    @classmethod
    def from_codes(cls, codes: Sequence[int], n: int) -> 'Recipe':
        symbols = []
        for code in codes:
            if code == n:
                symbols.append(INTERSECT)
            elif code == n + 1:
                symbols.append(UNION)
            else:
                symbols.append(code)
        return cls(tuple(symbols))

    def __str__(self) -> str:
        return self.to_text()


def validate(symbols: Sequence[Symbol], n: int) -> Recipe:
    """
    检查栈纪律：每个真前缀的压栈数多于运算符数，总压栈数 = 运算符数 + 1

    Raises:
        RecipeError: 栈下溢、结束时栈深不为 1 或顶点越界，位置从 1 开始
    """
    depth = 0
    for position, s in enumerate(symbols, start=1):
        if isinstance(s, str):
            if s not in OPERATORS:
                raise RecipeError(f"未知的运算符 {s!r}", position)
            if depth < 2:
                raise RecipeError(f"运算符 {s!r} 处栈下溢", position)
            depth -= 1
        else:
            if not 0 <= s < n:
                raise RecipeError(f"星图编号 {s} 越界，顶点数 {n}", position)
            depth += 1
    if depth != 1:
        raise RecipeError(f"结束时栈中有 {depth} 个元素，应为 1", len(symbols))
    return Recipe(tuple(symbols))


def parse(text: str, n: int) -> Recipe:
    """解析以空白分隔的逆波兰文本，如 "0 1 & 2 |" """
    symbols: List[Symbol] = []
    for position, token in enumerate(text.split(), start=1):
        if token in OPERATORS:
            symbols.append(token)
        elif token.isdecimal():
            symbols.append(int(token))
        else:
            raise RecipeError(f"未知的符号 {token!r}", position)
    return validate(symbols, n)


def evaluate(recipe: Recipe, n: int) -> Graph:
    """栈机求值：压入 S_i，"&"/"|" 合并栈顶两个元素"""
    stack: List[int] = []
    for s in recipe.symbols:
        if s == INTERSECT:
            right = stack.pop()
            stack.append(stack.pop() & right)
        elif s == UNION:
            right = stack.pop()
            stack.append(stack.pop() | right)
        else:
            stack.append(star_bits(n, s))
    return Graph(n, stack[0])


@dataclass(frozen=True)
class CodeLength:
    bits: float
    s: int
    n: int
    extended: bool = False   # s = 0 时为连续延拓值


def code_length(s: int, n: int) -> CodeLength:
    """一个配方表示的理想码长 3 log2 max(s, n) + log2(n+2)(2s+1)"""
    if n < 2:
        raise DomainError(f"码长要求 n ≥ 2: {n}")
    if s < 0:
        raise DomainError(f"星数不能为负: {s}")
    bits = 3 * math.log2(max(s, n)) + math.log2(n + 2) * (2 * s + 1)
    return CodeLength(bits=bits, s=s, n=n, extended=(s == 0))


def _field_width(s: int, n: int) -> int:
    # 足以容纳 max(s, n) 的位宽
    return max(s, n).bit_length()


def _symbol_width(n: int) -> int:
    # ⌈log2(n+2)⌉
    return (n + 1).bit_length()


def serialize_bits(recipe: Recipe, n: int) -> str:
    """
    位流：w-1 个 1 加一个 0 的一元宽度前缀，两个 w 位字段 (n, s)，
    再接 2s+1 个 ⌈log2(n+2)⌉ 位符号
    """
    validate(recipe.symbols, n)
    s = recipe.star_count
    w = _field_width(s, n)
    sw = _symbol_width(n)
    parts = ['1' * (w - 1) + '0', format(n, f'0{w}b'), format(s, f'0{w}b')]
    parts.extend(format(code, f'0{sw}b') for code in recipe.to_codes(n))
    return ''.join(parts)


def deserialize_bits(bits: str) -> Tuple[Recipe, int]:
    """serialize_bits 的逆"""
    if any(c not in '01' for c in bits):
        raise RecipeError("位流中只能包含 0 和 1", 0)
    w = bits.find('0') + 1
    if w == 0:
        raise RecipeError("宽度前缀没有结束符", len(bits))
    pos = w
    if len(bits) < pos + 2 * w:
        raise RecipeError("头部字段被截断", len(bits))
    n = int(bits[pos:pos + w], 2)
    s = int(bits[pos + w:pos + 2 * w], 2)
    pos += 2 * w
    if n < 1:
        raise RecipeError("顶点数必须至少为 1", w)
    sw = _symbol_width(n)
    count = 2 * s + 1
    if len(bits) < pos + count * sw:
        raise RecipeError("符号字段被截断", len(bits))
    if len(bits) > pos + count * sw:
        raise RecipeError("位流末尾有多余数据", pos + count * sw)
    codes = []
    for k in range(count):
        code = int(bits[pos + k * sw:pos + (k + 1) * sw], 2)
        if code > n + 1:
            raise RecipeError(f"非法符号值 {code}", pos + k * sw)
        codes.append(code)
    recipe = Recipe.from_codes(codes, n)
    validate(recipe.symbols, n)
    if recipe.star_count != s:
        raise RecipeError(f"头部声明 {s} 个运算符，实际 {recipe.star_count}", w + w)
    return recipe, n
