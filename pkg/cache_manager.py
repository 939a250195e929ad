"""
Centralized cache management for the ED degree toolkit
Memoizes hulls, Minkowski sums, volumes and merged settings
"""

import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Optional

from constants import CACHE_MAX_ENTRIES
from logger import logger


class CacheManager:
    """Lock-protected memo cache with bounded size and hit statistics"""

    def __init__(self, max_entries: int = CACHE_MAX_ENTRIES):
        self._cache: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.RLock()
        self.max_entries = max_entries
        self._hits = 0
        self._misses = 0

    def set(self, key: Hashable, value: Any):
        """Store a value, evicting the oldest entry when full"""
        with self._lock:
            self._cache[key] = value
            self._cache.move_to_end(key)
            while len(self._cache) > self.max_entries:
                self._cache.popitem(last=False)

    def get(self, key: Hashable) -> Optional[Any]:
        """Get a cached value or None"""
        with self._lock:
            if key not in self._cache:
                self._misses += 1
                return None
            self._hits += 1
            self._cache.move_to_end(key)
            return self._cache[key]

    def get_or_compute(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        """Return the cached value, computing and storing it on a miss"""
        cached = self.get(key)
        if cached is not None:
            return cached
        # computed outside the lock; a concurrent duplicate computes the same pure value
        value = compute()
        self.set(key, value)
        return value

    def clear(self):
        """Clear all cache entries"""
        with self._lock:
            self._cache.clear()
            self._hits = 0
            self._misses = 0
        logger.debug("Cache cleared")

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics"""
        with self._lock:
            return {
                'total_entries': len(self._cache),
                'hits': self._hits,
                'misses': self._misses,
                'max_entries': self.max_entries,
            }


# Global cache manager instance
cache_manager = CacheManager()
