import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

import aiofiles

from cache_manager import cache_manager
from constants import DEFAULT_CONFIG_FILE, DEFAULT_SETTINGS, ENV_THREADS, ALGORITHMS
from error_handler import ProblemValidationError
from logger import logger


class ConfigManager:
    """Settings management: defaults <- eddeg.json <- environment"""

    def __init__(self, config_file: str = DEFAULT_CONFIG_FILE):
        self.config_file = Path(config_file)

    async def read_text(self, path) -> str:
        """Read a UTF-8 text file asynchronously"""
        path = Path(path)
        if not path.exists():
            logger.error(f"File not found: {path}")
            raise FileNotFoundError(f"File not found: {path}")
        async with aiofiles.open(path, 'r', encoding='utf-8') as f:
            return await f.read()

    async def load_settings(self, config_file: Optional[str] = None,
                            use_cache: bool = True) -> Dict[str, Any]:
        """Load merged settings with caching"""
        path = Path(config_file) if config_file else self.config_file
        cache_key = ("settings", str(path), os.environ.get(ENV_THREADS))

        if use_cache:
            cached = cache_manager.get(cache_key)
            if cached is not None:
                return copy.deepcopy(cached)

        settings = copy.deepcopy(DEFAULT_SETTINGS)

        if path.exists():
            content = await self.read_text(path)
            try:
                overrides = json.loads(content)
            except json.JSONDecodeError as e:
                raise ProblemValidationError(f"Invalid JSON in {path}: {e}") from e
            self._merge(settings, overrides, str(path))
            logger.debug(f"Settings loaded from {path}")
        elif config_file:
            logger.warning(f"Config file not found: {path}, using defaults")

        env_threads = os.environ.get(ENV_THREADS)
        if env_threads is not None and env_threads.strip():
            try:
                settings["threads"] = int(env_threads)
            except ValueError as e:
                raise ProblemValidationError(
                    f"{ENV_THREADS} must be an integer, got {env_threads!r}") from e

        self._validate(settings)

        if use_cache:
            cache_manager.set(cache_key, copy.deepcopy(settings))
        return settings

    def _merge(self, base: Dict[str, Any], overrides: Dict[str, Any], source: str):
        """Recursively merge overrides into base, rejecting unknown keys"""
        for key, value in overrides.items():
            if key not in base:
                raise ProblemValidationError(f"Unknown setting '{key}' in {source}")
            if isinstance(base[key], dict):
                if not isinstance(value, dict):
                    raise ProblemValidationError(f"Setting '{key}' in {source} must be an object")
                self._merge(base[key], value, source)
            else:
                base[key] = value

    def _validate(self, settings: Dict[str, Any]):
        """Validate merged settings"""
        if not isinstance(settings["threads"], int) or settings["threads"] < 0:
            raise ProblemValidationError("threads must be a nonnegative integer (0 = auto)")
        if settings["algorithm"] not in ALGORITHMS:
            raise ProblemValidationError(f"algorithm must be one of {ALGORITHMS}")
        for name, value in settings["tolerances"].items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise ProblemValidationError(f"tolerance '{name}' must be positive")
        if not 0 <= settings["max_failed_fraction"] <= 1:
            raise ProblemValidationError("max_failed_fraction must lie in [0, 1]")

    @staticmethod
    def resolve_threads(settings: Dict[str, Any]) -> int:
        """Worker count: 0 means one worker per CPU"""
        threads = settings.get("threads", 0)
        return threads if threads > 0 else (os.cpu_count() or 1)

    def clear_cache(self):
        """Clear configuration cache"""
        cache_manager.clear()
        logger.debug("Configuration cache cleared")


# Global config manager instance
config_manager = ConfigManager()
