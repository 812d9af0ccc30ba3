import argparse
import json
import logging
import sys

from mbvqe.graphstate import ansatz_state, decorate_all, to_dot
from mbvqe.mbqc import PatternError, compile_layers, resource_report, standardize
from mbvqe.models import (
    ModelError,
    Scenario,
    SchwingerParams,
    ToricLattice,
    logical_state,
)
from mbvqe.settings import ConfigError, Settings
from mbvqe.sim import SimulationError
from mbvqe.stabilizer import TableauError
from mbvqe.util import write_artifact
from mbvqe.verify import SUITES, run_suites
from mbvqe.vqe import (
    OptimizationError,
    OptimizerConfig,
    points_to_csv,
    run_schwinger,
    run_toric,
    trace_to_csv,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PROPERTY_FAILURE = 2

_LIBRARY_ERRORS = (
    TableauError,
    PatternError,
    SimulationError,
    ModelError,
    OptimizationError,
)


class RunConfig:
    """Typed, validated view of the settings; built before any computation."""

    experiments = ("toric", "schwinger", "compile", "verify")

    def __init__(self, settings: Settings):
        self.settings = settings
        self.experiment = settings.EXPERIMENT
        if self.experiment not in self.experiments:
            raise ConfigError("config", "Unknown experiment {}".format(self.experiment))
        try:
            self.seed = int(settings.SEED)
            self.jobs = int(settings.JOBS)
            toric = settings.TORIC
            self.lattice = ToricLattice(int(toric["nx"]), int(toric["ny"]))
            self.scenario = Scenario(toric["scenario"])
            self.lambdas = [float(v) for v in toric["lambdas"]]
            self.pair = tuple(toric["pair"]) if toric["pair"] is not None else None
            schwinger = settings.SCHWINGER
            self.params = SchwingerParams(
                int(schwinger["s"]), float(schwinger["j"]), float(schwinger["w"])
            )
            layers = schwinger["layers"]
            if not isinstance(layers, list):
                layers = [layers]
            self.layers = [int(k) for k in layers]
            self.mus = [float(v) for v in schwinger["mu_grid"]]
            self.cross_check = bool(schwinger["cross_check"])
            self.optimizer = OptimizerConfig(seed=self.seed, **settings.OPTIMIZER)
            self.optimizer.optimizer()
            self.suite = settings.VERIFY["suite"]
            self.trials = int(settings.VERIFY["trials"])
        except (ModelError, OptimizationError) as e:
            raise ConfigError("config", e.message)
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError("config", "Invalid configuration value: {}".format(e))
        if self.jobs < 1 or self.trials < 1 or any(k < 1 for k in self.layers):
            raise ConfigError("config", "Jobs, trials and layers must be positive")
        if self.suite != "all" and self.suite not in SUITES:
            raise ConfigError(
                "config",
                "Unknown suite {}; choose from all, {}".format(
                    self.suite, ", ".join(SUITES)
                ),
            )

    @property
    def output_directory(self):
        return self.settings.OUTPUT_DIRECTORY

    def echo(self):
        return self.settings.resolved()


def _targets(config: RunConfig):
    if config.experiment in ("toric", "schwinger"):
        return [config.experiment]
    return ["schwinger", "toric"]


def cmd_compile(config: RunConfig):
    """Write custom-state JSON and DOT files plus a resource report."""
    out = config.output_directory
    echo = config.echo()
    reports = {}
    if "schwinger" in _targets(config):
        s = config.params.s
        for k in config.layers:
            state = standardize(compile_layers(s, k))
            name = "schwinger_S{}_K{}".format(s, k)
            write_artifact(
                out, name + ".json", json.dumps(dict(state.serialize(), config=echo))
            )
            write_artifact(out, name + ".dot", to_dot(state, name))
            reports[name] = resource_report(state, layers=(s, k))
    if "toric" in _targets(config):
        lattice = config.lattice
        state, edges = decorate_all(ansatz_state(logical_state(lattice, 0, 0)))
        name = "toric_{}x{}".format(lattice.nx, lattice.ny)
        write_artifact(
            out, name + ".json", json.dumps(dict(state.serialize(), config=echo))
        )
        write_artifact(out, name + ".dot", to_dot(state, name))
        reports[name] = resource_report(state)
    write_artifact(
        out, "resources.json", json.dumps({"config": echo, "states": reports}, indent=2)
    )
    for name, report in reports.items():
        logging.info(
            "{}: {} qubits, {} rotated, {} eliminated".format(
                name,
                report["qubits"],
                report["rotated_measurements"],
                report["eliminated_measurements"],
            )
        )
    return EXIT_OK


def _write_sweep(out, name, sweep, echo):
    write_artifact(out, name + ".csv", points_to_csv(sweep.points, echo))
    for index, point in enumerate(sweep.points):
        write_artifact(
            out,
            "{}_point{}_trace.csv".format(name, index),
            trace_to_csv(point.trace, echo),
        )
    write_artifact(
        out,
        name + "_summary.json",
        json.dumps(dict(sweep.serialize(), config=echo), indent=2),
    )


def cmd_run(config: RunConfig):
    """Run the configured sweep and write per-point CSV, traces and a summary."""
    out = config.output_directory
    echo = config.echo()
    if config.experiment == "toric":
        sweep = run_toric(
            config.lattice,
            config.scenario,
            config.lambdas,
            config.optimizer,
            config.pair,
            config.jobs,
        )
        _write_sweep(out, "toric_{}".format(config.scenario.value), sweep, echo)
    elif config.experiment == "schwinger":
        for k in config.layers:
            sweep = run_schwinger(
                config.params,
                k,
                config.mus,
                config.optimizer,
                config.cross_check,
                config.jobs,
            )
            _write_sweep(out, "schwinger_K{}".format(k), sweep, echo)
    else:
        raise ConfigError(
            "config",
            "Experiment {} cannot be run; use toric or schwinger".format(
                config.experiment
            ),
        )
    return EXIT_OK


def cmd_verify(config: RunConfig):
    failures = run_suites(config.suite, config.trials, config.seed)
    for failure in failures:
        print(failure, file=sys.stderr)
    if failures:
        logging.error("{} property checks failed".format(len(failures)))
        return EXIT_PROPERTY_FAILURE
    logging.info("All property checks passed")
    return EXIT_OK


COMMANDS = {"compile": cmd_compile, "run": cmd_run, "verify": cmd_verify}


def _configure_logging(settings, verbose):
    logging_basic_config_params = {
        "format": "%(asctime)s:%(name)-10s:%(levelname)-8s:%(message)s",
        "datefmt": "%Y-%m-%d:%H:%M:%S",
    }
    if settings is not None and settings.LOG_FILE:
        logging_basic_config_params["filename"] = settings.LOG_FILE
        logging_basic_config_params["filemode"] = "a+"
    if verbose or (settings is not None and settings.LOG_VERBOSE):
        logging.basicConfig(level=logging.DEBUG, **logging_basic_config_params)
    else:
        logging.basicConfig(level=logging.INFO, **logging_basic_config_params)
    logging.debug("Debug logging enabled.")


def main(argv=None):
    parser = argparse.ArgumentParser(description="Measurement-based VQE simulator")
    parser.add_argument(
        "command",
        nargs="?",
        choices=sorted(COMMANDS),
        help="What to do; defaults to run or verify depending on EXPERIMENT.",
    )
    parser.add_argument("--config", help="Location of the configuration file.")
    parser.add_argument("--seed", type=int, help="Seed for every random draw.")
    parser.add_argument("--out", help="Output directory.")
    parser.add_argument("--jobs", type=int, help="Worker processes for grid points.")
    parser.add_argument("--suite", help="Property suite for verify.")
    parser.add_argument("--trials", type=int, help="Trials per property suite.")
    parser.add_argument("--verbose", help="Print out debug logs.", action="store_true")
    args = parser.parse_args(argv)

    overrides = {
        "SEED": args.seed,
        "OUTPUT_DIRECTORY": args.out,
        "JOBS": args.jobs,
        "VERIFY.suite": args.suite,
        "VERIFY.trials": args.trials,
    }
    settings = None
    try:
        settings = Settings(args.config, overrides)
        _configure_logging(settings, args.verbose)
        settings.log_defaults()
        config = RunConfig(settings)
    except ConfigError as e:
        _configure_logging(settings, args.verbose)
        logging.error("Invalid configuration: {}".format(e.message))
        print("error: {}".format(e.message), file=sys.stderr)
        return EXIT_INVALID

    command = args.command
    if command is None:
        command = config.experiment
        if config.experiment in ("toric", "schwinger"):
            command = "run"
    logging.info(
        "Running {} for experiment {} with seed {}".format(
            command, config.experiment, config.seed
        )
    )
    try:
        return COMMANDS[command](config)
    except ConfigError as e:
        print("error: {}".format(e.message), file=sys.stderr)
        return EXIT_INVALID
    except _LIBRARY_ERRORS as e:
        logging.error("{} error: {}".format(e.error_code, e.message))
        print("error: {}".format(e.message), file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        logging.exception("Unexpected failure")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
