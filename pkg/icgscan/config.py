"""
配置管理模块
~~~~~~~~~~

用户默认配置(YAML, 位于 $ICGSCAN_HOME, 默认 ~/.icgscan)，以及参数文件、
标定网格和合成心搏描述的加载
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import ValidationError

from .core import ConfigFileError, DelineationParams
from .synth import SyntheticBeatSpec

logger = logging.getLogger(__name__)

# 默认配置
DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'delineation': {
        'preset': 'physiological',  # default, physiological
        'overrides': {},
    },
    'evaluation': {
        'tolerance_ms': 30.0,
        'max_workers': 4,
        'sweep_lengths': [5, 9, 13, 17, 21, 25],
    },
    'synth': {
        'fs': 250.0,
        'seconds': 30.0,
        'seed': 0,
    },
    'output': {
        'format': 'text',  # text, json, html
    },
}

PRESETS = ('default', 'physiological')


def _config_home() -> str:
    return os.path.expanduser(os.environ.get('ICGSCAN_HOME', '~/.icgscan'))


class Config:
    """配置管理类，缺失的配置项回落到 DEFAULT_CONFIG"""

    def __init__(self, config_dir: Optional[str] = None):
        """初始化配置管理器

        Args:
            config_dir: 配置目录，为None时使用 $ICGSCAN_HOME 或 ~/.icgscan
        """
        self.config_dir = config_dir or _config_home()
        self.config_file = os.path.join(self.config_dir, 'config.yaml')
        self.config: Dict[str, Dict[str, Any]] = {}
        self._load_config()

    def _load_config(self) -> None:
        """加载配置文件，文件不存在或无法解析时使用默认配置"""
        self.config = copy.deepcopy(DEFAULT_CONFIG)
        if not os.path.exists(self.config_file):
            return
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                stored = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"failed to read {self.config_file}: {e}")
            return
        for section, values in stored.items():
            if isinstance(values, dict):
                self.config.setdefault(section, {}).update(values)

    def save_config(self) -> None:
        """保存配置到文件"""
        os.makedirs(self.config_dir, exist_ok=True)
        with open(self.config_file, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self.config, f, default_flow_style=False, allow_unicode=True)

    def get(self, section: str, key: str, default: Any = None) -> Any:
        """获取配置项

        Args:
            section: 配置节
            key: 配置键
            default: 默认值

        Returns:
            配置值，不存在时返回default
        """
        try:
            return self.config[section][key]
        except KeyError:
            return default

    def set(self, section: str, key: str, value: Any) -> None:
        """设置配置项并写回文件

        Args:
            section: 配置节
            key: 配置键
            value: 配置值
        """
        self.config.setdefault(section, {})[key] = value
        self.save_config()

    def delineation_params(self, preset: Optional[str] = None) -> DelineationParams:
        """由 delineation 配置节构造描记参数: 先取预设，再叠加 overrides

        Args:
            preset: 预设名称，为None时使用配置中的 delineation.preset

        Returns:
            校验后的描记参数

        Raises:
            ConfigFileError: 预设未知或覆盖项无效，错误信息包含配置文件路径
        """
        preset = preset or self.get('delineation', 'preset', 'physiological')
        overrides = self.get('delineation', 'overrides', {}) or {}
        try:
            return build_params(preset, overrides)
        except (ConfigFileError, ValidationError) as e:
            raise ConfigFileError(f"{self.config_file}: {_one_line(e)}") from e


def _one_line(error: Exception) -> str:
    return " ".join(str(error).split())


def build_params(preset: str = 'default', overrides: Optional[Dict[str, Any]] = None) -> DelineationParams:
    """按预设名称构造参数并应用覆盖项

    Args:
        preset: 'default' 或 'physiological'
        overrides: 参数名到取值的映射

    Returns:
        校验后的描记参数
    """
    if preset not in PRESETS:
        raise ConfigFileError(f"unknown preset '{preset}', expected one of {', '.join(PRESETS)}")
    base = DelineationParams.physiological() if preset == 'physiological' else DelineationParams()
    return base.with_overrides(**(overrides or {}))


def parse_params_text(text: str, source: str = '<params>') -> Dict[str, Any]:
    """解析扁平的 `key = value` (或 `key: value`) 参数文本

    `#` 之后为注释；取值用 yaml.safe_load 读取，数字和布尔值保持原类型。

    Args:
        text: 参数文本
        source: 出错时报告的来源名称

    Returns:
        参数名到取值的映射
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        separator = '=' if '=' in line else ':'
        key, sep, value = line.partition(separator)
        key = key.strip()
        if not sep or not key:
            raise ConfigFileError(f"{source}:{number}: expected key=value, got '{raw.strip()}'")
        try:
            values[key] = yaml.safe_load(value.strip()) if value.strip() else None
        except yaml.YAMLError as e:
            raise ConfigFileError(f"{source}:{number}: bad value for {key}: {_one_line(e)}") from e
    return values


def load_params(path: Union[str, Path], base: Optional[DelineationParams] = None) -> DelineationParams:
    """在 base 之上读取参数文件

    文件中的 `preset` 键先切换起点，其余键再覆盖。

    Args:
        path: 参数文件路径
        base: 起始参数，为None时使用默认参数

    Returns:
        校验后的描记参数

    Raises:
        ConfigFileError: 文件不可读、参数名未知或取值无效
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigFileError(f"cannot read parameters file {path}: {e.strerror}") from e

    values = parse_params_text(text, str(path))
    preset = values.pop('preset', None)
    if preset is not None:
        base = build_params(str(preset))
    base = base or DelineationParams()

    unknown = sorted(key for key in values if key not in DelineationParams.model_fields)
    if unknown:
        raise ConfigFileError(f"{path}: unknown parameters {', '.join(unknown)}")
    try:
        return base.with_overrides(**values)
    except ValidationError as e:
        raise ConfigFileError(f"{path}: {_one_line(e)}") from e


def _load_yaml_mapping(path: Union[str, Path], what: str) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigFileError(f"cannot read {what} {path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise ConfigFileError(f"{path}: invalid YAML: {_one_line(e)}") from e
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: {what} must be a mapping")
    return data


def load_grid(path: Union[str, Path]) -> Dict[str, List[Any]]:
    """读取标定网格: 参数名 -> 候选值列表 (标量视为单元素列表)"""

    data = _load_yaml_mapping(path, 'grid file')
    return {key: value if isinstance(value, list) else [value] for key, value in data.items()}


def load_synth_spec(path: Union[str, Path]) -> SyntheticBeatSpec:
    """读取合成心搏描述

    Args:
        path: YAML 文件路径

    Returns:
        合成心搏描述

    Raises:
        ConfigFileError: 文件不可读或字段无效
    """
    data = _load_yaml_mapping(path, 'synth spec')
    try:
        return SyntheticBeatSpec(**data)
    except ValidationError as e:
        raise ConfigFileError(f"{path}: {_one_line(e)}") from e


# 全局配置实例
config = Config()
