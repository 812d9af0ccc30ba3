import copy
import logging

import yaml


class ConfigError(Exception):
    def __init__(self, error_code, message):
        super().__init__(message)
        self.error_code = error_code
        self.message = message


class Settings:
    _default_map = {
        "EXPERIMENT": "verify",
        "TORIC": {
            "nx": 2,
            "ny": 2,
            "scenario": "uniform",
            "lambdas": [
                0.0,
                0.25,
                0.5,
                0.75,
                1.0,
                1.25,
                1.5,
                1.75,
                2.0,
                2.25,
                2.5,
                2.75,
                3.0,
            ],
            "pair": None,
        },
        "SCHWINGER": {
            "s": 4,
            "layers": [1, 2, 3],
            "mu_grid": [-2.0, -1.5, -1.0, -0.7, -0.4, 0.0, 0.5, 1.0, 2.0],
            "j": 1.0,
            "w": 1.0,
            "cross_check": False,
        },
        "OPTIMIZER": {
            "implementation": "mbvqe.vqe.NelderMeadOptimizer",
            "max_iterations": 4000,
            "tolerance": 1e-10,
            "restarts": 3,
            "initial": None,
            "initial_step": 0.5,
            "snapshot_every": 100,
        },
        "SEED": 0,
        "OUTPUT_DIRECTORY": "mbvqe-out",
        "JOBS": 1,
        "VERIFY": {"suite": "all", "trials": 20},
        "LOG_FILE": None,
        "LOG_VERBOSE": False,
    }

    def __init__(self, config_file=None, overrides=None):
        config = {}
        if config_file is not None:
            try:
                with open(config_file, "r") as f:
                    config = yaml.safe_load(f) or {}
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError("config", "Cannot read {}: {}".format(config_file, e))
        if not isinstance(config, dict):
            raise ConfigError("config", "The configuration must be a mapping")
        self._check_keys(config)
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            section, _, option = key.partition(".")
            if option:
                config.setdefault(section, {})[option] = value
            else:
                config[key] = value
        self.config = config
        self.defaulted = self._defaulted()

    def _check_keys(self, config):
        unknown = set(config) - set(self._default_map)
        if unknown:
            raise ConfigError(
                "config", "Unknown configuration keys {}".format(sorted(unknown))
            )
        for section, default in self._default_map.items():
            if isinstance(default, dict) and section in config:
                if not isinstance(config[section], dict):
                    raise ConfigError("config", "{} must be a mapping".format(section))
                nested = set(config[section]) - set(default)
                if nested:
                    raise ConfigError(
                        "config",
                        "Unknown keys {} in {}".format(sorted(nested), section),
                    )

    def _defaulted(self):
        defaulted = []
        for section, default in self._default_map.items():
            if section not in self.config:
                defaulted.append(section)
            elif isinstance(default, dict):
                defaulted += [
                    "{}.{}".format(section, option)
                    for option in default
                    if option not in self.config[section]
                ]
        return defaulted

    def log_defaults(self):
        for key in self.defaulted:
            logging.info("Using default for {}".format(key))

    def __getattr__(self, item):
        if item not in self._default_map:
            raise AttributeError(item)
        default = copy.deepcopy(self._default_map[item])
        value = self.config.get(item)
        if isinstance(default, dict):
            default.update(value or {})
            return default
        return default if value is None else value

    def resolved(self):
        """The full configuration including defaults, as echoed into every output."""
        return {key: getattr(self, key) for key in self._default_map}
