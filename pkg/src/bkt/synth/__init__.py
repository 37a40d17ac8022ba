"""合成データ生成"""

from .generators import empirical_moments, gen, rotated_covariance
from .models import FAMILIES, PRESETS, Moments, ScenarioSpec, preset

__all__ = [
    "FAMILIES",
    "Moments",
    "PRESETS",
    "ScenarioSpec",
    "empirical_moments",
    "gen",
    "preset",
    "rotated_covariance",
]
