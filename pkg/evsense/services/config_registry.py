# Built-in registry of the 14 sensor configurations
import logging
from typing import Dict, List, Optional

from evsense.exceptions import UnknownConfigError
from evsense.models.sensor_models import SensorConfig

logger = logging.getLogger(__name__)

# The threshold pair counts as one setting: configurations vary th_p and th_n together
SETTINGS = ("threshold", "refractory", "fov")

# id, th_p, th_n, T_r [ms], F_v [deg], group, varied setting
# base uses T_r = 0.01 ms
_TABLE = [
    ("base", 0.5, 0.5, 0.01, 90.0, "base", None),
    ("e1", 0.25, 0.25, 0.01, 90.0, "threshold", "threshold"),
    ("e2", 0.75, 0.75, 0.01, 90.0, "threshold", "threshold"),
    ("e3", 1.0, 1.0, 0.01, 90.0, "threshold", "threshold"),
    ("e4", 0.5, 0.5, 10.0, 90.0, "refractory", "refractory"),
    ("e5", 0.5, 0.5, 25.0, 90.0, "refractory", "refractory"),
    ("e6", 0.5, 0.5, 50.0, 90.0, "refractory", "refractory"),
    ("e7", 0.5, 0.5, 0.01, 45.0, "fov", "fov"),
    ("e8", 0.5, 0.5, 0.01, 135.0, "fov", "fov"),
    ("e9", 0.5, 0.5, 0.01, 160.0, "fov", "fov"),
    ("e10", 0.25, 0.25, 50.0, 45.0, "mixed", None),
    ("e11", 1.0, 0.5, 25.0, 90.0, "mixed", None),
    ("e12", 0.7, 0.7, 20.0, 65.0, "mixed", None),
    ("e13", 0.3, 0.9, 15.0, 130.0, "mixed", None),
]


class ConfigRegistry:
    """Immutable id -> SensorConfig lookup, safe to share across threads"""

    def __init__(self, configs: Optional[List[SensorConfig]] = None):
        if configs is None:
            configs = [
                SensorConfig(id=cid, th_p=th_p, th_n=th_n, refractory_ms=t_r, fov_deg=f_v,
                             group=group, varied=varied)
                for cid, th_p, th_n, t_r, f_v, group, varied in _TABLE
            ]
        self._configs: Dict[str, SensorConfig] = {}
        for config in configs:
            if config.id in self._configs:
                raise ValueError(f"Duplicate configuration id '{config.id}'")
            self._configs[config.id] = config
        logger.debug(f"Configuration registry holds {len(self._configs)} entries")

    def ids(self) -> List[str]:
        return list(self._configs)

    def all(self) -> List[SensorConfig]:
        return list(self._configs.values())

    def __contains__(self, config_id: str) -> bool:
        return config_id in self._configs

    def get(self, config_id: str) -> SensorConfig:
        try:
            return self._configs[config_id]
        except KeyError:
            raise UnknownConfigError(config_id, self.ids()) from None

    def by_group(self, group: str) -> List[SensorConfig]:
        return [c for c in self._configs.values() if c.group == group]

    def match(self, config: SensorConfig) -> Optional[str]:
        """Registered id whose parameter tuple equals the given one, if any"""
        for registered in self._configs.values():
            if registered.parameters() == config.parameters():
                return registered.id
        return None

    def single_setting_neighbours(self, config_id: str, pool: List[str]) -> List[str]:
        """Configurations in pool that differ from config_id in exactly one setting"""
        target = self.get(config_id)
        return [
            other for other in pool
            if len(differing_settings(target, self.get(other))) == 1
        ]


def differing_settings(a: SensorConfig, b: SensorConfig) -> List[str]:
    """Settings (threshold, refractory, fov) in which two configurations differ"""
    settings = []
    if (a.th_p, a.th_n) != (b.th_p, b.th_n):
        settings.append("threshold")
    if a.refractory_ms != b.refractory_ms:
        settings.append("refractory")
    if a.fov_deg != b.fov_deg:
        settings.append("fov")
    return settings


def explicit_config(th_p: float, th_n: float, refractory_ms: float, fov_deg: float) -> SensorConfig:
    """Ad-hoc configuration from explicit values, reporting the registered id when parameters match"""
    config = SensorConfig(id="custom", th_p=th_p, th_n=th_n, refractory_ms=refractory_ms, fov_deg=fov_deg)
    matched = config_registry.match(config)
    if matched:
        logger.info(f"Explicit parameters match registered configuration '{matched}'")
        return config_registry.get(matched)
    return config


# Global registry instance
config_registry = ConfigRegistry()


def registry_get(config_id: str) -> SensorConfig:
    return config_registry.get(config_id)


def match_registry(config: SensorConfig) -> Optional[str]:
    return config_registry.match(config)
