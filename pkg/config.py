import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # 日志配置（只有日志从环境变量读取）
    LOG_LEVEL = os.getenv('STARCX_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('STARCX_LOG_FILE', 'logs/star_complexity.log')

    # 自同构搜索配置，只能用 --node-budget 覆盖
    AUT_NODE_BUDGET = 10_000_000
    BRUTE_FORCE_MAX_N = 8

    # 配方遍历配置，预算只能用 --budget 覆盖
    WALK_RECIPE_BUDGET = 0  # 0 表示不限
    WALK_SHARDS_PER_WORKER = 4
    RECIPE_MEMO_LIMIT = 200_000
    CANONICAL_CACHE_SIZE = 500_000

    # 输出配置
    CSV_SIGNIFICANT_DIGITS = 12
    SVG_WIDTH = 800
    SVG_HEIGHT = 600
    SVG_HASH_SALT = 'star-complexity'
