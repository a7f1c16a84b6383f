"""Run configuration: per-task parameter bundles and TOML loading."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .egct import EgctParams
from .errors import ConfigError
from .karma import KarmaParams
from .kernels import KernelSpec, gaussian, parse_kernel

TASKS = ("states", "communities", "subnets")


@dataclass(frozen=True)
class TaskConfig:
    karma: KarmaParams
    kernel: KernelSpec
    egct: EgctParams
    min_dwell: int = 5

    def to_dict(self):
        return {
            "kernel": str(self.kernel),
            **dataclasses.asdict(self.karma),
            **dataclasses.asdict(self.egct),
            "min_dwell": self.min_dwell,
        }


def default_task(task) -> TaskConfig:
    # Nodal kernels act on buff-sample windows; their Gaussian widths are a
    # per-sample width of 0.5 scaled by sqrt(buff), otherwise K is nearly I.
    # Sliding anchors at stride 1 put ~2*k_nn temporally adjacent features in
    # each neighbourhood, hence the larger k_nn and lower resolution for states.
    if task == "states":
        return TaskConfig(
            KarmaParams(N=30, m=2, rho=2, tau_f=60, tau_b=20, stride=1),
            gaussian(0.8),
            EgctParams(k_nn=30, louvain_resolution=0.15),
        )
    if task == "communities":
        return TaskConfig(
            KarmaParams(N=30, buff=20, m=3, rho=2, tau_f=50, tau_b=10),
            gaussian(2.2),
            EgctParams(k_nn=2, sigma_theta=4.0, louvain_resolution=0.5),
        )
    if task == "subnets":
        return TaskConfig(
            KarmaParams(N=20, buff=50, m=3, rho=3, tau_f=45, tau_b=5),
            gaussian(3.5),
            EgctParams(k_nn=2, sigma_theta=4.0, louvain_resolution=0.5),
        )
    raise ConfigError(f"unknown task {task!r}")


@dataclass(frozen=True)
class RunConfig:
    states: TaskConfig = field(default_factory=lambda: default_task("states"))
    communities: TaskConfig = field(default_factory=lambda: default_task("communities"))
    subnets: TaskConfig = field(default_factory=lambda: default_task("subnets"))
    seed: int = 0
    threads: int = 1

    def task(self, name) -> TaskConfig:
        return getattr(self, name)

    def with_seed(self, seed):
        return dataclasses.replace(
            self,
            seed=seed,
            **{t: dataclasses.replace(self.task(t), egct=dataclasses.replace(self.task(t).egct, seed=seed)) for t in TASKS},
        )

    def to_dict(self):
        return {"seed": self.seed, **{t: self.task(t).to_dict() for t in TASKS}}


_KARMA_FIELDS = {f.name for f in dataclasses.fields(KarmaParams)}
_EGCT_FIELDS = {f.name for f in dataclasses.fields(EgctParams)} - {"seed"}


def task_from_dict(name, raw, base: TaskConfig | None = None) -> TaskConfig:
    base = base or default_task(name)
    karma, egct, kernel, min_dwell = {}, {}, base.kernel, base.min_dwell
    for key, value in raw.items():
        where = f"[{name}].{key}"
        if key in _KARMA_FIELDS:
            karma[key] = value
        elif key in _EGCT_FIELDS:
            egct[key] = value
        elif key == "kernel":
            if not isinstance(value, str):
                raise ConfigError(f"{where}: kernel must be a string such as \"gaussian(0.8)\"")
            try:
                kernel = parse_kernel(value)
            except ConfigError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        elif key == "min_dwell":
            min_dwell = value
        else:
            raise ConfigError(f"{where}: unknown field")
    try:
        return TaskConfig(
            dataclasses.replace(base.karma, **karma),
            kernel,
            dataclasses.replace(base.egct, **egct),
            int(min_dwell),
        )
    except (ConfigError, TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def config_from_dict(raw) -> RunConfig:
    unknown = set(raw) - set(TASKS) - {"seed", "threads"}
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {', '.join(sorted(unknown))}")
    tasks = {}
    for t in TASKS:
        section = raw.get(t, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{t}] must be a table")
        tasks[t] = task_from_dict(t, section)
    seed = raw.get("seed", 0)
    threads = raw.get("threads", 1)
    if not isinstance(seed, int) or not isinstance(threads, int) or threads < 1:
        raise ConfigError("seed must be an integer and threads a positive integer")
    return RunConfig(**tasks, threads=threads).with_seed(seed)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw)
