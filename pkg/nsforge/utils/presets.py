"""
Named parameter presets for runs
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from ..errors import ParameterError
from ..iteration.params import IterationParams

logger = logging.getLogger(__name__)


class PresetManager:
    """Registry of built-in and custom parameter sets"""

    PRESETS = {
        'desk': {
            'name': 'Desk',
            'description': 'One inductive step at beta = 3 on grids up to 4096',
            'params': {
                'lambda0': 8,
                'beta': 3,
                'eps_gamma': '1/3',
                'amplitude': '1/10000',
                'gap': 8,
                'q_max': 1,
                'lambda_cap': 64,
                'grid_max': 4096,
            },
        },

        'smoke': {
            'name': 'Smoke',
            'description': 'Base step and its diagnostics only',
            'params': {
                'lambda0': 8,
                'beta': 3,
                'eps_gamma': '1/3',
                'amplitude': '1/10000',
                'q_max': 0,
                'grid_max': 1024,
            },
        },

        'strict': {
            'name': 'Strict',
            'description': 'Desk parameters with the stress bound as a gate',
            'params': {
                'lambda0': 8,
                'beta': 3,
                'eps_gamma': '1/3',
                'amplitude': '1/10000',
                'gap': 8,
                'q_max': 1,
                'lambda_cap': 64,
                'grid_max': 4096,
                'enforce_stress_bound': True,
            },
        },

        'asymptotic': {
            'name': 'Asymptotic',
            'description': 'beta = 6 and gap 2^100; the frequency search cannot fit any grid',
            'params': {
                'lambda0': 8,
                'beta': 6,
                'eps_gamma': '1/3',
                'amplitude': '1/10000',
                'gap': 2 ** 100,
                'q_max': 1,
                'lambda_cap': 64,
                'grid_max': 8192,
                'enforce_stress_bound': True,
            },
        },
    }

    def __init__(self):
        self.custom_presets: Dict[str, Dict[str, Any]] = {}

    def get_available_presets(self) -> Dict[str, str]:
        """Preset ids with display names, custom ones included"""
        presets = {preset_id: data['name'] for preset_id, data in self.PRESETS.items()}
        presets.update({preset_id: data['name'] for preset_id, data in self.custom_presets.items()})
        return presets

    def get_preset(self, preset_id: str) -> Optional[Dict[str, Any]]:
        if preset_id in self.custom_presets:
            return copy.deepcopy(self.custom_presets[preset_id])
        if preset_id in self.PRESETS:
            return copy.deepcopy(self.PRESETS[preset_id])
        return None

    def params_for(self, preset_id: str, overrides: Optional[Dict[str, Any]] = None) -> IterationParams:
        """IterationParams from a preset with overrides applied on top"""
        preset = self.get_preset(preset_id)
        if preset is None:
            raise ParameterError(f"Unknown preset {preset_id!r}; available: {sorted(self.get_available_presets())}")
        values = dict(preset['params'])
        values.update(overrides or {})
        return IterationParams.from_dict(values)

    def create_custom_preset(self, preset_id: str, name: str, params: Dict[str, Any],
                             base: str = 'desk', description: str = "Custom preset"):
        """Register a preset; params are validated against the base preset"""
        merged = dict(self.PRESETS[base]['params']) if base in self.PRESETS else {}
        merged.update(params)
        IterationParams.from_dict(merged)
        self.custom_presets[preset_id] = {'name': name, 'description': description, 'params': merged}

    def delete_custom_preset(self, preset_id: str) -> bool:
        if preset_id in self.custom_presets:
            del self.custom_presets[preset_id]
            return True
        return False

    def export_preset(self, preset_id: str, file_path: Union[str, Path]) -> bool:
        """Write a preset to YAML, or JSON when the path ends in .json"""
        preset = self.get_preset(preset_id)
        if not preset:
            return False
        try:
            with open(file_path, 'w', encoding='utf-8') as f:
                if str(file_path).endswith('.json'):
                    json.dump(preset, f, indent=2, ensure_ascii=False)
                else:
                    yaml.safe_dump(preset, f, default_flow_style=False, sort_keys=False)
            return True
        except (OSError, yaml.YAMLError) as e:
            logger.error("Error exporting preset %s: %s", preset_id, e)
            return False

    def import_preset(self, file_path: Union[str, Path], preset_id: str) -> bool:
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f) if str(file_path).endswith('.json') else yaml.safe_load(f)
        except (OSError, ValueError, yaml.YAMLError) as e:
            logger.error("Error importing preset %s: %s", file_path, e)
            return False

        for field in ('name', 'params'):
            if not isinstance(data, dict) or field not in data:
                logger.error("Preset file %s is missing %r", file_path, field)
                return False
        try:
            IterationParams.from_dict(data['params'])
        except ParameterError as e:
            logger.error("Preset file %s has invalid parameters: %s", file_path, e)
            return False

        self.custom_presets[preset_id] = data
        return True


preset_manager = PresetManager()
