import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from multiprocessing import Pool
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.algorithms.enums import Termination
from src.algorithms.schemas import AlgoConfig, Trajectory
from src.algorithms.service import run
from src.config import LOG, get_settings
from src.diagnostics.enums import RegimeTag
from src.diagnostics.initialization import init_weak
from src.diagnostics.service import classify, measured_contraction
from src.exceptions import ConfigError, SaddleError
from src.experiments.enums import InitMode, OutputFormat, SweepParameter
from src.experiments.schemas import ClassifySpec, ExperimentConfig, RunRecord
from src.problems.schemas import ProblemSpec
from src.problems.service import build_problem
from src.utils import dump_json

SUMMARY_FILE = "summary.json"
TRAJECTORY_DIR = "trajectories"


class RunJob(NamedTuple):
    index: int
    problem: ProblemSpec
    algorithm: AlgoConfig
    start: tuple[float, ...]
    classify: ClassifySpec
    parameter: Optional[SweepParameter]
    value: Optional[float]


def _dotted(err: dict, prefix: str = "") -> str:
    parts = [str(p) for p in err["loc"]]
    return ".".join([prefix, *parts] if prefix else parts)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        raise ConfigError(f"invalid value for '{_dotted(err)}': {err['msg']}") from e


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file '{path}' not found") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file '{path}' is not valid TOML: {e}") from e
    return parse_config(data)


def resolve_starts(config: ExperimentConfig, problem=None) -> np.ndarray:
    """Starting points, one per row, in a fixed order."""
    problem = problem or build_problem(config.problem)
    init = config.init
    if init.mode == InitMode.POINTS:
        if not init.points:
            return np.zeros((0, problem.dim))
        starts = np.asarray(init.points, dtype=float)
    elif init.mode == InitMode.GRID:
        starts = init.box.grid(init.resolution, init.offset)
    elif init.mode == InitMode.RANDOM:
        starts = init.box.sample(np.random.default_rng(config.seed), init.count)
    else:
        eta = config.algorithm.eta or 2.0 * max(problem.rho, 1.0)
        starts = init_weak(problem, init.z_prime, eta).stack()[None, :]
    if starts.size and starts.shape[1] != problem.dim:
        raise ConfigError(
            f"invalid value for 'init': starts have {starts.shape[1]} entries, problem expects {problem.dim}"
        )
    return starts


def _swept(config: ExperimentConfig, parameter: SweepParameter, value: float):
    if parameter == SweepParameter.A:
        if "a" not in config.problem.params:
            raise ConfigError(f"invalid value for 'sweep.parameter': problem '{config.problem.name.value}' has no 'a'")
        problem = ProblemSpec(name=config.problem.name, params={**config.problem.params, "a": value})
        return problem, config.algorithm
    fields = config.algorithm.model_dump(by_alias=True, exclude_none=True)
    fields[parameter.value] = value
    try:
        algorithm = AlgoConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(f"invalid value for 'sweep.values': {e.errors()[0]['msg']}") from e
    return config.problem, algorithm


def build_jobs(config: ExperimentConfig, sweep: bool = False) -> list[RunJob]:
    """Jobs ordered by (parameter value, start point)."""
    algorithm = config.algorithm
    if config.output.lyapunov and not algorithm.lyapunov:
        if algorithm.eta is None:
            raise ConfigError("invalid value for 'output.lyapunov': the Lyapunov column needs 'algorithm.eta'")
        algorithm = algorithm.model_copy(update={"lyapunov": True})
    base = config.model_copy(update={"algorithm": algorithm})

    if sweep:
        if config.sweep is None:
            raise ConfigError("invalid value for 'sweep': section missing")
        variants = [(config.sweep.parameter, v, *_swept(base, config.sweep.parameter, v)) for v in config.sweep.values]
    else:
        variants = [(None, None, base.problem, base.algorithm)]

    jobs = []
    for parameter, value, problem_spec, algo in variants:
        starts = resolve_starts(base.model_copy(update={"problem": problem_spec, "algorithm": algo}))
        for start in starts:
            jobs.append(
                RunJob(len(jobs), problem_spec, algo, tuple(start.tolist()), config.classify, parameter, value)
            )
    return jobs


def execute_job(job: RunJob) -> tuple[RunRecord, Trajectory]:
    """Top-level worker, safe to hand to a process pool."""
    problem = build_problem(job.problem)
    trajectory = run(problem, job.algorithm, np.asarray(job.start))
    label = classify(
        trajectory,
        grad_tol=job.classify.grad_tol,
        cycle_tol=job.classify.cycle_tol,
        burn_in=job.classify.burn_in,
        window=job.classify.window,
    )
    contraction = measured_contraction(trajectory) if label.tag == RegimeTag.CONVERGED else None
    record = RunRecord(
        index=job.index,
        parameter=job.parameter,
        value=job.value,
        start=list(job.start),
        regime=label,
        termination=trajectory.termination,
        iterations=trajectory.iterations,
        final_grad_norm=float(trajectory.grad_norm[-1]),
        final_point=trajectory.final.tolist(),
        contraction=contraction,
        message=trajectory.message,
    )
    return record, trajectory


def execute_jobs(jobs: list[RunJob], workers: int = 1) -> list[tuple[RunRecord, Trajectory]]:
    """Results come back in job order whatever the worker count."""
    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            return pool.map(execute_job, jobs)
    return [execute_job(job) for job in jobs]


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    n = trajectory.n
    Z = trajectory.iterates
    columns = {"iter": np.arange(len(Z))}
    for i in range(n):
        columns[f"x_{i}"] = Z[:, i]
    for j in range(Z.shape[1] - n):
        columns[f"y_{j}"] = Z[:, n + j]
    columns["grad_norm"] = trajectory.grad_norm
    columns["step_norm"] = trajectory.step_norm
    if trajectory.lyapunov is not None:
        columns["lyapunov"] = trajectory.lyapunov
    return pd.DataFrame(columns)


def write_trajectory(trajectory: Trajectory, directory: str, index: int, fmt: OutputFormat) -> str:
    os.makedirs(directory, exist_ok=True)
    frame = trajectory_frame(trajectory)
    name = f"traj_{index:04d}.{fmt.value}"
    path = os.path.join(directory, name)
    if fmt == OutputFormat.CSV:
        frame.to_csv(path, index=False, float_format="%.17g")
    else:
        with open(path, "w") as f:
            f.write(dump_json(frame.to_dict(orient="records")))
    return name


def run_experiment(
    config: ExperimentConfig, sweep: bool = False, workers: Optional[int] = None
) -> list[tuple[RunRecord, Trajectory]]:
    jobs = build_jobs(config, sweep=sweep)
    workers = workers or config.workers or get_settings().WORKERS
    LOG.info(f"experiment '{config.name}': {len(jobs)} trajectories on {workers} worker(s)")
    results = execute_jobs(jobs, workers)
    for record, _ in results:
        LOG.info(f"run {record.index}: {record.regime.tag.value} after {record.iterations} steps")
    return results


def write_results(
    results: list[tuple[RunRecord, Trajectory]], directory: str, formats: list[OutputFormat]
) -> list[RunRecord]:
    """Trajectory files plus the summary; the collector is the only writer."""
    os.makedirs(directory, exist_ok=True)
    records = []
    for record, trajectory in results:
        names = [
            write_trajectory(trajectory, os.path.join(directory, TRAJECTORY_DIR), record.index, fmt)
            for fmt in formats
        ]
        records.append(record.model_copy(update={"trajectory_file": f"{TRAJECTORY_DIR}/{names[0]}" if names else None}))
    with open(os.path.join(directory, SUMMARY_FILE), "w") as f:
        f.write(dump_json(records))
    return records


def _apply_overrides(
    config: ExperimentConfig,
    seed: Optional[int],
    lyapunov: bool,
    fmt: Optional[OutputFormat],
) -> ExperimentConfig:
    output = config.output
    if lyapunov:
        output = output.model_copy(update={"lyapunov": True})
    if fmt is not None:
        output = output.model_copy(update={"formats": [fmt]})
    update = {"output": output}
    if seed is not None:
        update["seed"] = seed
    return config.model_copy(update=update)


def _command(
    config_path: str,
    sweep: bool,
    out: Optional[str],
    workers: Optional[int],
    seed: Optional[int],
    lyapunov: bool,
    fmt: Optional[OutputFormat],
) -> int:
    try:
        config = _apply_overrides(load_config(config_path), seed, lyapunov, fmt)
        directory = out or config.output.directory or get_settings().OUTPUT_DIR
        results = run_experiment(config, sweep=sweep, workers=workers)
        records = write_results(results, directory, config.output.formats)
    except SaddleError as e:
        LOG.error(e.detail)
        return e.exit_code
    failed = [r.index for r in records if r.termination == Termination.FAILED]
    if failed:
        LOG.error(f"runs {failed} stopped on numerical failures")
        return 2
    LOG.info(f"wrote {len(records)} trajectories and {SUMMARY_FILE} to {directory}")
    return 0


def cmd_run(
    config_path: str,
    out: Optional[str] = None,
    workers: Optional[int] = None,
    seed: Optional[int] = None,
    lyapunov: bool = False,
    fmt: Optional[OutputFormat] = None,
) -> int:
    """One trajectory file per start plus a summary; returns the exit status."""
    return _command(config_path, False, out, workers, seed, lyapunov, fmt)


def cmd_sweep(
    config_path: str,
    out: Optional[str] = None,
    workers: Optional[int] = None,
    seed: Optional[int] = None,
    lyapunov: bool = False,
    fmt: Optional[OutputFormat] = None,
) -> int:
    """Repeat cmd_run for every value of the swept parameter; one summary row
    per (value, start)."""
    return _command(config_path, True, out, workers, seed, lyapunov, fmt)
