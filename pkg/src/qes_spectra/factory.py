import json
import logging
import re
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Optional

from .model import NumericsCfg, PotentialSpec, merge_numerics_dict

_PRESET_CONFIG_PATHS = [Path(__file__).parent / f"presets/"]
_PRESET_CONFIGS = {}  # directory (preset_name: config) of named problem presets


def _natural_key(string_):
    return [int(s) if s.isdigit() else s for s in re.split(r'(\d+)', string_.lower())]


def _rescan_preset_configs():
    global _PRESET_CONFIGS

    config_ext = ('.json',)
    config_files = []
    for config_path in _PRESET_CONFIG_PATHS:
        if config_path.is_file() and config_path.suffix in config_ext:
            config_files.append(config_path)
        elif config_path.is_dir():
            for ext in config_ext:
                config_files.extend(config_path.glob(f'*{ext}'))

    for cf in config_files:
        with open(cf, 'r') as f:
            preset_cfg = json.load(f)
            if all(a in preset_cfg for a in ('variant', 'm', 'zeta')):
                _PRESET_CONFIGS[cf.stem] = preset_cfg
            else:
                logging.warning(f'Skipping preset {cf}, it needs variant, m and zeta.')

    _PRESET_CONFIGS = {k: v for k, v in sorted(_PRESET_CONFIGS.items(), key=lambda x: _natural_key(x[0]))}


_rescan_preset_configs()  # initial populate of preset registry


def list_presets():
    """ enumerate available problem presets based on config files """
    return list(_PRESET_CONFIGS.keys())


def add_preset_config(path):
    """ add preset config path or file and update registry """
    if not isinstance(path, Path):
        path = Path(path)
    _PRESET_CONFIG_PATHS.append(path)
    _rescan_preset_configs()


def get_preset_config(preset_name):
    """ Fetch preset config from builtin (local library) presets.
    """
    if preset_name in _PRESET_CONFIGS:
        return deepcopy(_PRESET_CONFIGS[preset_name])
    else:
        return None


def _require_preset(preset_name: str) -> Dict[str, Any]:
    preset_cfg = get_preset_config(preset_name)
    if preset_cfg is None:
        raise RuntimeError(f'Preset {preset_name} not found; available presets = {list_presets()}.')
    return preset_cfg


def create_spec(
        preset: Optional[str] = None,
        variant: Optional[str] = None,
        zeta: Optional[float] = None,
        m: Optional[int] = None,
) -> PotentialSpec:
    """ Build a PotentialSpec from a preset, with explicit arguments taking precedence. """
    fields = {}
    if preset:
        preset_cfg = _require_preset(preset)
        fields = {k: preset_cfg[k] for k in ('variant', 'zeta', 'm')}
        logging.info(f'Loaded {preset} preset: {fields}.')
    overrides = {k: v for k, v in dict(variant=variant, zeta=zeta, m=m).items() if v is not None}
    fields.update(overrides)
    missing = [k for k in ('variant', 'zeta', 'm') if k not in fields]
    if missing:
        raise ValueError(f"Missing {', '.join(missing)} for PotentialSpec; pass them or use a preset.")
    return PotentialSpec(**fields)


def create_numerics_cfg(preset: Optional[str] = None, **overrides) -> NumericsCfg:
    base = NumericsCfg()
    if preset:
        base = NumericsCfg(**merge_numerics_dict(base, _require_preset(preset).get('numerics')))
    return NumericsCfg(**merge_numerics_dict(base, overrides))


def get_sweep_config(preset: str) -> Optional[Dict[str, Any]]:
    """ The preset's zeta sweep block (zeta_min, zeta_max, steps), if it has one. """
    return _require_preset(preset).get('sweep')
