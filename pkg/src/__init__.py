# 星复杂度与图信息复杂度工具
# 包含以下模块：
# - graph_core: 图的位向量表示、graph6 与边列表格式、ER 随机图
# - automorphism: 颜色细化与个体化-细化搜索，典范形式与自同构群阶
# - ibc: 基于信息的复杂度 C
# - recipe: 星图配方的解析、求值与码长
# - walker: 星复杂度的穷举遍历
# - starbar: 星复杂度上界 S̄tar
# - experiments: 采样、相关性、列联表与散点图
# - cache_manager: 典范形式缓存
# - utils: 工具函数

__version__ = "1.0.0"
