import pytest
import sys
import os

# 添加项目根目录到路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.cache_manager import CacheManager


class TestCacheManager:
    def setup_method(self):
        self.cache = CacheManager(max_cache_size=2)

    def test_miss_then_hit(self):
        """测试未命中与命中计数"""
        assert self.cache.get(4, 0b101) is None
        self.cache.set(4, 0b101, 0b011)
        assert self.cache.get(4, 0b101) == 0b011
        assert self.cache.hits == 1
        assert self.cache.misses == 1

    def test_vertex_count_is_part_of_key(self):
        self.cache.set(4, 1, 7)
        assert self.cache.get(5, 1) is None

    def test_evicts_oldest(self):
        """测试超过容量时淘汰最旧的条目"""
        self.cache.set(3, 1, 1)
        self.cache.set(3, 2, 2)
        self.cache.set(3, 4, 4)
        assert self.cache.get_cache_size() == 2
        assert self.cache.get(3, 1) is None
        assert self.cache.get(3, 4) == 4

    def test_digest_collision_is_confirmed(self, monkeypatch):
        """测试摘要冲突时用完整键确认，不返回错误结果"""
        monkeypatch.setattr(self.cache, '_get_cache_key', lambda n, bits: b'same')
        self.cache.set(3, 1, 10)
        assert self.cache.get(3, 2) is None
        assert self.cache.collisions == 1

    def test_clear(self):
        self.cache.set(3, 1, 1)
        self.cache.clear()
        assert self.cache.get_cache_size() == 0
        assert self.cache.hits == 0
