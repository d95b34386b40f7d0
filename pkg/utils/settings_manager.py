import os
from typing import Dict, Optional

import psutil
from PyQt6.QtCore import QSettings

from constants import (
    DEFAULT_ESCALATION_ROUNDS,
    DEFAULT_GUARD_TERMS,
    DEFAULT_K,
    ENUMERATION_GUARD,
    SETTINGS_FILE,
    WORKERS_ENV,
)
from utils.errors import ConfigError


class SettingsManager:
    """Manages persisted precision and worker defaults"""

    def __init__(self, settings_file: Optional[str] = None):
        self.settings = QSettings(
            settings_file or SETTINGS_FILE, QSettings.Format.IniFormat
        )

    def _int_value(self, key: str, default: int) -> int:
        value = self.settings.value(key, default)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"Setting {key} is not an integer: {value!r}")

    def load_precision(self) -> Dict[str, int]:
        """Load K, guard terms, escalation rounds and the enumeration guard"""
        return {
            "K": self._int_value("precision/K", DEFAULT_K),
            "guard_terms": self._int_value(
                "precision/guard_terms", DEFAULT_GUARD_TERMS
            ),
            "max_rounds": self._int_value(
                "precision/escalation_rounds", DEFAULT_ESCALATION_ROUNDS
            ),
            "enumeration_guard": self._int_value(
                "precision/enumeration_guard", ENUMERATION_GUARD
            ),
        }

    def save_precision(self, precision: Dict[str, int]):
        """Save precision defaults"""
        keys = {
            "K": "precision/K",
            "guard_terms": "precision/guard_terms",
            "max_rounds": "precision/escalation_rounds",
            "enumeration_guard": "precision/enumeration_guard",
        }
        for name, key in keys.items():
            if name in precision:
                self.settings.setValue(key, int(precision[name]))
        self.settings.sync()

    def load_workers(self) -> int:
        """Worker count: environment, then settings, then physical cores"""
        env_value = os.environ.get(WORKERS_ENV)
        if env_value:
            try:
                workers = int(env_value)
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} is not an integer: {env_value!r}")
        else:
            default = psutil.cpu_count(logical=False) or 1
            workers = self._int_value("runner/workers", default)
        if workers < 1:
            raise ConfigError(f"Worker count must be positive, got {workers}")
        return workers

    def save_workers(self, workers: int):
        self.settings.setValue("runner/workers", int(workers))
        self.settings.sync()
