"""统一的异常层次，每类异常携带命令行退出码。"""


class StarComplexityError(Exception):
    """所有领域异常的基类"""
    exit_code = 1


class DataError(StarComplexityError):
    """输入数据或参数不合法"""
    exit_code = 3


class VertexRangeError(DataError, ValueError):
    """顶点编号越界或顶点对无效"""


class DimensionError(DataError, ValueError):
    """两个图的顶点数不一致，或位向量超出容量"""


class DomainError(DataError, ValueError):
    """数值参数超出定义域"""


class Graph6ParseError(DataError, ValueError):
    """graph6 文本格式错误"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (字节偏移 {offset})")
        self.offset = offset


class EdgeListParseError(DataError, ValueError):
    """边列表文本格式错误"""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (第 {line} 行)")
        self.line = line


class RecipeError(DataError, ValueError):
    """配方文本或位流不合法"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (位置 {offset})")
        self.offset = offset


class UndefinedCorrelationError(DataError, ValueError):
    """某一列方差为零，相关系数无定义"""


class BruteForceLimitError(DataError, ValueError):
    """暴力枚举的规模超出允许范围"""


class BudgetExhausted(StarComplexityError):
    """计算资源预算耗尽（结果不可用，但绝不返回错误答案）"""
    exit_code = 4


class SearchBudgetExhausted(BudgetExhausted):
    """个体化-细化搜索节点数超出预算"""

    def __init__(self, nodes: int, budget: int):
        super().__init__(f"搜索预算耗尽: 已访问 {nodes} 个节点，预算 {budget}")
        self.nodes = nodes
        self.budget = budget


class WalkBudgetExceeded(BudgetExhausted):
    """配方遍历超出配方数预算，表格不完整"""


class StarbarSoundnessError(StarComplexityError, AssertionError):
    """上界见证配方与原图不一致（内部错误）"""
