import hashlib
import logging
from collections import OrderedDict
from typing import Optional, Tuple

from config import Config

logger = logging.getLogger(__name__)


class CacheManager:
    def __init__(self, max_cache_size: Optional[int] = None):
        """
        初始化典范形式缓存

        键为 (n, 位向量) 的 128 位摘要，命中时再用完整键确认，摘要冲突只会
        导致一次重新计算，不会返回错误的典范形式。

        Args:
            max_cache_size: 最大条目数，超过则淘汰最旧的条目
        """
        self.max_cache_size = max_cache_size or Config.CANONICAL_CACHE_SIZE
        self._entries: 'OrderedDict[bytes, Tuple[int, int, int]]' = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.collisions = 0

    def _get_cache_key(self, n: int, bits: int) -> bytes:
        """
        根据顶点数和位向量生成缓存键

        Returns:
            16 字节 BLAKE2b 摘要
        """
        payload = n.to_bytes(2, 'little') + bits.to_bytes((n * (n - 1) // 2 + 7) // 8, 'little')
        return hashlib.blake2b(payload, digest_size=16).digest()

    def get(self, n: int, bits: int) -> Optional[int]:
        """
        从缓存中获取典范位向量

        Returns:
            命中且完整键一致时返回典范位向量，否则返回 None
        """
        key = self._get_cache_key(n, bits)
        entry = self._entries.get(key)
        if entry is None:
            self.misses += 1
            return None
        if entry[0] != n or entry[1] != bits:
            self.collisions += 1
            logger.debug(f"缓存摘要冲突: n={n}")
            return None
        self.hits += 1
        return entry[2]

    def set(self, n: int, bits: int, canonical_bits: int) -> None:
        """将典范位向量存入缓存"""
        self._entries[self._get_cache_key(n, bits)] = (n, bits, canonical_bits)
        self._clean_oldest_cache()

    def _clean_oldest_cache(self) -> None:
        """当条目数超过限制时，淘汰最旧的条目"""
        while len(self._entries) > self.max_cache_size:
            self._entries.popitem(last=False)

    def clear(self) -> None:
        """清空所有缓存"""
        self._entries.clear()
        self.hits = self.misses = self.collisions = 0

    def get_cache_size(self) -> int:
        """获取当前缓存条目数"""
        return len(self._entries)
