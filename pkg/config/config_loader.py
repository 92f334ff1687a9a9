"""
Configuration Loader for nullgeo

Loads and validates YAML run defaults with environment variable substitution.
"""

import os
import re
import yaml
from pathlib import Path
from typing import Any, Dict, Optional
from dataclasses import dataclass, field


@dataclass
class ToleranceConfig:
    """Residual tolerance ladder"""
    algebraic: float = 1e-8
    derivative: float = 1e-6
    curvature: float = 1e-4
    transfer: float = 1e-3
    finite_difference: float = 1e-5
    solver: float = 1e-10

    def for_tier(self, tier: str) -> float:
        return getattr(self, tier)


@dataclass
class NumericsConfig:
    """Step sizes and iteration limits"""
    fd_step: float = 1e-5
    derived_fd_step: float = 1e-3
    rank_tol: float = 1e-9
    holonomy_side: float = 1e-3
    kaehler_max_iterations: int = 50
    kaehler_tolerance: float = 1e-10


@dataclass
class GridConfig:
    """Sample grid defaults"""
    points_per_axis: int = 3
    random_points: int = 20
    seed: int = 7
    random_vectors: int = 3


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str = "INFO"
    directory: str = "logs/"
    run_log: bool = True


@dataclass
class ReportsConfig:
    """Report configuration"""
    default_format: str = "markdown"
    directory: str = "reports/"


@dataclass
class ExecutionConfig:
    """Suite execution configuration"""
    workers: int = 1


@dataclass
class NullGeoConfig:
    """Complete run configuration"""
    tolerances: ToleranceConfig
    numerics: NumericsConfig
    grid: GridConfig
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    reports: ReportsConfig = field(default_factory=ReportsConfig)
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)


class ConfigurationError(Exception):
    """Configuration validation error"""
    pass


class ConfigLoader:
    """Load and validate nullgeo configuration"""

    ENV_VAR_PATTERN = re.compile(r'\$\{([^}:]+)(?::([^}]+))?\}')

    VALID_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']
    VALID_FORMATS = ['markdown', 'json']

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration loader

        Args:
            config_path: Path to configuration file (default: config/nullgeo_config.yaml)
        """
        if config_path is None:
            config_path = Path(__file__).parent / "nullgeo_config.yaml"

        self.config_path = Path(config_path)
        self._raw_config: Optional[Dict[str, Any]] = None
        self._config: Optional[NullGeoConfig] = None

    def load(self) -> NullGeoConfig:
        """
        Load and validate configuration

        Returns:
            NullGeoConfig object

        Raises:
            ConfigurationError: If configuration is invalid
        """
        if not self.config_path.exists():
            raise ConfigurationError(f"Configuration file not found: {self.config_path}")

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                self._raw_config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML syntax: {e}")

        if not self._raw_config:
            raise ConfigurationError("Configuration file is empty")

        self._raw_config = self._substitute_env_vars(self._raw_config)

        try:
            self._config = self._build_config(self._raw_config)
        except ConfigurationError:
            raise
        except Exception as e:
            raise ConfigurationError(f"Configuration validation failed: {e}")

        return self._config

    def _substitute_env_vars(self, obj: Any) -> Any:
        """
        Recursively substitute environment variables in configuration

        Format: ${VAR_NAME} or ${VAR_NAME:default_value}
        """
        if isinstance(obj, dict):
            return {k: self._substitute_env_vars(v) for k, v in obj.items()}
        elif isinstance(obj, list):
            return [self._substitute_env_vars(item) for item in obj]
        elif isinstance(obj, str):
            return self._substitute_env_var_string(obj)
        else:
            return obj

    def _substitute_env_var_string(self, value: str) -> Any:
        def replacer(match):
            var_name = match.group(1)
            default_value = match.group(2)

            env_value = os.environ.get(var_name)

            if env_value is not None:
                return env_value
            elif default_value is not None:
                return default_value
            else:
                raise ConfigurationError(
                    f"Environment variable '{var_name}' is not set and no default provided"
                )

        substituted = self.ENV_VAR_PATTERN.sub(replacer, value)
        if substituted != value:
            # YAML typing of the substituted text
            return yaml.safe_load(substituted) if substituted.strip() else substituted
        return substituted

    def _positive(self, section: str, values: Dict[str, Any], name: str, default: float) -> float:
        value = float(values.get(name, default))
        if value <= 0:
            raise ConfigurationError(f"{section}.{name} must be positive, got {value}")
        return value

    def _build_config(self, raw: Dict[str, Any]) -> NullGeoConfig:
        """
        Build typed configuration objects from raw dictionary

        Args:
            raw: Raw configuration dictionary

        Returns:
            NullGeoConfig object
        """
        required_sections = ['tolerances', 'numerics', 'grid']
        for section in required_sections:
            if section not in raw:
                raise ConfigurationError(f"Missing required section: {section}")

        tol_raw = raw['tolerances'] or {}
        defaults = ToleranceConfig()
        tolerances = ToleranceConfig(**{
            name: self._positive('tolerances', tol_raw, name, getattr(defaults, name))
            for name in ('algebraic', 'derivative', 'curvature', 'transfer', 'finite_difference', 'solver')
        })

        num_raw = raw['numerics'] or {}
        numerics = NumericsConfig(
            fd_step=self._positive('numerics', num_raw, 'fd_step', 1e-5),
            derived_fd_step=self._positive('numerics', num_raw, 'derived_fd_step', 1e-3),
            rank_tol=self._positive('numerics', num_raw, 'rank_tol', 1e-9),
            holonomy_side=self._positive('numerics', num_raw, 'holonomy_side', 1e-3),
            kaehler_max_iterations=int(num_raw.get('kaehler_max_iterations', 50)),
            kaehler_tolerance=self._positive('numerics', num_raw, 'kaehler_tolerance', 1e-10),
        )
        if numerics.kaehler_max_iterations < 1:
            raise ConfigurationError("numerics.kaehler_max_iterations must be at least 1")

        grid_raw = raw['grid'] or {}
        grid = GridConfig(
            points_per_axis=int(grid_raw.get('points_per_axis', 3)),
            random_points=int(grid_raw.get('random_points', 20)),
            seed=int(grid_raw.get('seed', 7)),
            random_vectors=int(grid_raw.get('random_vectors', 3)),
        )
        if grid.points_per_axis < 1 or grid.random_points < 0 or grid.random_vectors < 1:
            raise ConfigurationError("Invalid grid sizes")

        logging_raw = raw.get('logging', {}) or {}
        logging = LoggingConfig(
            level=str(logging_raw.get('level', 'INFO')).upper(),
            directory=logging_raw.get('directory', 'logs/'),
            run_log=bool(logging_raw.get('run_log', True)),
        )
        if logging.level not in self.VALID_LEVELS:
            raise ConfigurationError(
                f"Invalid logging level: {logging.level}. "
                f"Must be one of: {', '.join(self.VALID_LEVELS)}"
            )

        reports_raw = raw.get('reports', {}) or {}
        reports = ReportsConfig(
            default_format=reports_raw.get('default_format', 'markdown'),
            directory=reports_raw.get('directory', 'reports/'),
        )
        if reports.default_format not in self.VALID_FORMATS:
            raise ConfigurationError(
                f"Invalid report format: {reports.default_format}. "
                f"Must be one of: {', '.join(self.VALID_FORMATS)}"
            )

        execution_raw = raw.get('execution', {}) or {}
        execution = ExecutionConfig(workers=max(1, int(execution_raw.get('workers', 1))))

        return NullGeoConfig(
            tolerances=tolerances,
            numerics=numerics,
            grid=grid,
            logging=logging,
            reports=reports,
            execution=execution,
        )

    def get_config(self) -> NullGeoConfig:
        """
        Raises:
            ConfigurationError: If configuration not loaded yet
        """
        if self._config is None:
            raise ConfigurationError("Configuration not loaded. Call load() first.")
        return self._config


def load_config(config_path: Optional[str] = None) -> NullGeoConfig:
    """
    Convenience function to load configuration

    Args:
        config_path: Path to configuration file (optional)

    Returns:
        NullGeoConfig object
    """
    loader = ConfigLoader(config_path)
    return loader.load()


if __name__ == '__main__':
    try:
        config = load_config()
        print("✓ Configuration loaded successfully")
        print(f"  Curvature tolerance: {config.tolerances.curvature}")
        print(f"  Grid: {config.grid.points_per_axis} per axis, {config.grid.random_points} random")
        print(f"  Log level: {config.logging.level}")
    except ConfigurationError as e:
        print(f"✗ Configuration error: {e}")
