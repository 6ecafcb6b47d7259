"""Experiment configuration: YAML loading, validation, and serialization.

Configs are nested key-trees with one section per solver component.  The
numeric defaults match the bundled experiment files; values that a config
file sets are validated eagerly and errors are reported together, each
prefixed with its key path (e.g. ``micro.m``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .macro import BOUNDARIES, Grid1D, MacroParams
from .micro import DIFFUSION_MODES, MicroParams
from .micromacro import TRANSFER_RULES
from .objectives import (
    BallUnion,
    Halfspace1D,
    IntervalUnion,
    ObjectiveFunction,
    PenalizedObjective,
)
from .penalty import KAPPA_RULES, PenaltyController

MODES = ("micro", "macro", "micromacro")
FEASIBLE_KINDS = ("balls", "intervals", "halfline")

REQUIRED_KEYS = ("mode", "objective", "n_steps", "n_particles", "seed", "output")


class ConfigError(ValueError):
    """Validation failure; ``errors`` holds one message per offending key."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class ObjectiveConfig:
    name: str
    dim: int


@dataclass(frozen=True)
class FeasibleConfig:
    kind: str
    balls: tuple = ()        # ((center tuple, radius_sq), ...)
    intervals: tuple = ()    # ((lo, hi), ...)
    bound: float = 0.0       # halfline: {x <= bound}


@dataclass(frozen=True)
class MicroConfig:
    m: float = 0.5
    lam: float = 1.0
    sigma: float = 1.0 / 3.0**0.5
    dt: float = 0.1
    alpha: float = 30.0
    diffusion: str = "anisotropic"
    init_box: tuple = (-3.0, 3.0)


@dataclass(frozen=True)
class MacroConfig:
    x_min: float = -3.0
    x_max: float = 3.0
    n_cells: int = 401
    T: float = 0.1
    cfl: float = 0.8
    boundary: str = "outflow"
    snapshot_every: int = 0  # 0 disables full-field snapshots


@dataclass(frozen=True)
class PenaltyConfig:
    beta0: float = 1.0
    kappa0: float = 5.0
    eta_kappa: float = 1.1
    eta_beta: float = 1.1


@dataclass(frozen=True)
class CouplingConfig:
    zeta0: float = 0.5
    zeta_min: float = 0.1
    zeta_max: float = 0.9
    t_star: int = 240
    transfer_rule: str = "conserve"


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    objective: ObjectiveConfig
    n_steps: int
    n_particles: int
    seed: int
    output: str
    feasible_set: FeasibleConfig | None = None
    micro: MicroConfig = field(default_factory=MicroConfig)
    macro: MacroConfig = field(default_factory=MacroConfig)
    penalty_micro: PenaltyConfig = field(default_factory=PenaltyConfig)
    penalty_macro: PenaltyConfig = field(default_factory=PenaltyConfig)
    failure_kappa_rule: str = "divide"
    coupling: CouplingConfig = field(default_factory=CouplingConfig)

    # -- builders for the runtime objects ---------------------------------

    def build_objective(self) -> ObjectiveFunction:
        return ObjectiveFunction(self.objective.name, self.objective.dim)

    def build_feasible_set(self):
        fs = self.feasible_set
        if fs is None:
            return None
        if fs.kind == "balls":
            return BallUnion([(np.asarray(c), r2) for c, r2 in fs.balls])
        if fs.kind == "intervals":
            return IntervalUnion(list(fs.intervals))
        return Halfspace1D(fs.bound)

    def build_penalized(self, scale: str = "micro") -> PenalizedObjective:
        beta0 = (self.penalty_micro if scale == "micro" else self.penalty_macro).beta0
        fs = self.build_feasible_set()
        beta = beta0 if fs is not None else 0.0
        return PenalizedObjective(self.build_objective(), fs, beta)

    def build_micro_params(self) -> MicroParams:
        c = self.micro
        return MicroParams(c.m, c.lam, c.sigma, c.dt, c.alpha, c.diffusion)

    def build_grid(self) -> Grid1D:
        return Grid1D(self.macro.x_min, self.macro.x_max, self.macro.n_cells)

    def build_macro_params(self) -> MacroParams:
        return MacroParams(gamma=1.0 - self.micro.m, m=self.micro.m, lam=self.micro.lam)

    def build_controller(self, scale: str = "micro") -> PenaltyController:
        c = self.penalty_micro if scale == "micro" else self.penalty_macro
        return PenaltyController(
            beta=c.beta0,
            kappa=c.kappa0,
            kappa0=c.kappa0,
            eta_kappa=c.eta_kappa,
            eta_beta=c.eta_beta,
            failure_kappa_rule=self.failure_kappa_rule,
        )


# -- validation helpers ----------------------------------------------------


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    """Accumulates key-path-prefixed validation errors."""

    def __init__(self):
        self.errors = []

    def fail(self, path, msg):
        self.errors.append(f"{path}: {msg}")

    def section(self, data, path, allowed):
        if not isinstance(data, dict):
            self.fail(path, "must be a mapping")
            return {}
        for key in data:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else str(key), "unknown key")
        return data

    def num(self, data, key, path, default=None, lo=None, hi=None,
            lo_open=False, hi_open=False):
        if key not in data:
            return default
        v = data[key]
        full = f"{path}.{key}" if path else key
        if not _is_num(v):
            self.fail(full, "must be a number")
            return default
        v = float(v)
        lo_bad = lo is not None and (v <= lo if lo_open else v < lo)
        hi_bad = hi is not None and (v >= hi if hi_open else v > hi)
        if lo_bad or hi_bad:
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            lo_s = "-inf" if lo is None else f"{lo:g}"
            hi_s = "inf" if hi is None else f"{hi:g}"
            self.fail(full, f"must lie in {left}{lo_s}, {hi_s}{right}")
            return default
        return v

    def integer(self, data, key, path, default=None, lo=None, hi=None):
        if key not in data:
            return default
        v = data[key]
        full = f"{path}.{key}" if path else key
        if not _is_int(v):
            self.fail(full, "must be an integer")
            return default
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            self.fail(full, f"must lie in [{lo}, {hi}]" if hi is not None else f"must be >= {lo}")
            return default
        return v

    def choice(self, data, key, path, options, default=None):
        if key not in data:
            return default
        v = data[key]
        full = f"{path}.{key}" if path else key
        if v not in options:
            self.fail(full, f"must be one of {list(options)}")
            return default
        return v


def _parse_feasible(data, dim, chk: _Checker):
    data = chk.section(data, "feasible_set", {"kind", "balls", "intervals", "bound"})
    kind = chk.choice(data, "kind", "feasible_set", FEASIBLE_KINDS)
    if kind is None:
        if "kind" not in data:
            chk.fail("feasible_set.kind", "missing required key")
        return None
    if kind == "balls":
        balls = data.get("balls")
        if not isinstance(balls, list) or not balls:
            chk.fail("feasible_set.balls", "must be a nonempty list of {center, radius_sq}")
            return None
        parsed = []
        for i, b in enumerate(balls):
            path = f"feasible_set.balls[{i}]"
            if not isinstance(b, dict) or set(b) != {"center", "radius_sq"}:
                chk.fail(path, "must be a mapping with keys center and radius_sq")
                continue
            center = b["center"]
            if (not isinstance(center, list) or len(center) != dim
                    or not all(_is_num(c) for c in center)):
                chk.fail(f"{path}.center", f"must be a list of {dim} numbers")
                continue
            r2 = b["radius_sq"]
            if not _is_num(r2) or r2 <= 0:
                chk.fail(f"{path}.radius_sq", "must be a positive number")
                continue
            parsed.append((tuple(float(c) for c in center), float(r2)))
        return FeasibleConfig(kind="balls", balls=tuple(parsed))
    if kind == "intervals":
        if dim != 1:
            chk.fail("feasible_set.kind", "intervals require a 1-dimensional objective")
        ivs = data.get("intervals")
        if not isinstance(ivs, list) or not ivs:
            chk.fail("feasible_set.intervals", "must be a nonempty list of [lo, hi] pairs")
            return None
        parsed = []
        for i, iv in enumerate(ivs):
            if (not isinstance(iv, list) or len(iv) != 2
                    or not all(_is_num(v) for v in iv) or iv[0] >= iv[1]):
                chk.fail(f"feasible_set.intervals[{i}]", "must be [lo, hi] with lo < hi")
                continue
            parsed.append((float(iv[0]), float(iv[1])))
        return FeasibleConfig(kind="intervals", intervals=tuple(parsed))
    # halfline
    if dim != 1:
        chk.fail("feasible_set.kind", "halfline requires a 1-dimensional objective")
    bound = chk.num(data, "bound", "feasible_set")
    if bound is None:
        chk.fail("feasible_set.bound", "missing required key")
        return None
    return FeasibleConfig(kind="halfline", bound=bound)


def _parse_penalty_scale(data, path, chk: _Checker) -> PenaltyConfig:
    d = PenaltyConfig()
    data = chk.section(data, path, {"beta0", "kappa0", "eta_kappa", "eta_beta"})
    return PenaltyConfig(
        beta0=chk.num(data, "beta0", path, d.beta0, lo=0, lo_open=True),
        kappa0=chk.num(data, "kappa0", path, d.kappa0, lo=0, lo_open=True),
        eta_kappa=chk.num(data, "eta_kappa", path, d.eta_kappa, lo=1, lo_open=True),
        eta_beta=chk.num(data, "eta_beta", path, d.eta_beta, lo=1, lo_open=True),
    )


def config_from_dict(data) -> ExperimentConfig:
    """Validate a parsed key-tree and build the config; raises ConfigError."""
    chk = _Checker()
    if data is None:
        data = {}
    top_allowed = {
        "mode", "objective", "feasible_set", "micro", "macro",
        "penalty", "coupling", "n_steps", "n_particles", "seed", "output",
    }
    data = chk.section(data, "", top_allowed)
    for key in REQUIRED_KEYS:
        if key not in data:
            chk.fail(key, "missing required key")

    mode = chk.choice(data, "mode", "", MODES)

    # objective
    obj = None
    if "objective" in data:
        od = chk.section(data.get("objective"), "objective", {"name", "dim"})
        name = chk.choice(od, "name", "objective", ("ackley", "rastrigin"))
        dim = chk.integer(od, "dim", "objective", lo=1)
        if "name" not in od:
            chk.fail("objective.name", "missing required key")
        if "dim" not in od:
            chk.fail("objective.dim", "missing required key")
        if name is not None and dim is not None:
            obj = ObjectiveConfig(name=name, dim=dim)

    dim = obj.dim if obj is not None else 1
    if obj is not None and mode in ("macro", "micromacro") and dim != 1:
        chk.fail("objective.dim", f"mode {mode!r} runs on a 1D grid; dim must be 1")

    feasible = None
    if data.get("feasible_set") is not None:
        feasible = _parse_feasible(data["feasible_set"], dim, chk)

    md = chk.section(data.get("micro", {}), "micro",
                     {"m", "lam", "sigma", "dt", "alpha", "diffusion", "init_box"})
    dm = MicroConfig()
    init_box = dm.init_box
    if "init_box" in md:
        ib = md["init_box"]
        if (not isinstance(ib, list) or len(ib) != 2
                or not all(_is_num(v) for v in ib) or ib[0] >= ib[1]):
            chk.fail("micro.init_box", "must be [lo, hi] with lo < hi")
        else:
            init_box = (float(ib[0]), float(ib[1]))
    micro = MicroConfig(
        m=chk.num(md, "m", "micro", dm.m, lo=0, hi=1, lo_open=True),
        lam=chk.num(md, "lam", "micro", dm.lam, lo=0, lo_open=True),
        sigma=chk.num(md, "sigma", "micro", dm.sigma, lo=0),
        dt=chk.num(md, "dt", "micro", dm.dt, lo=0, lo_open=True),
        alpha=chk.num(md, "alpha", "micro", dm.alpha, lo=0, lo_open=True),
        diffusion=chk.choice(md, "diffusion", "micro", DIFFUSION_MODES, dm.diffusion),
        init_box=init_box,
    )

    Md = chk.section(data.get("macro", {}), "macro",
                     {"x_min", "x_max", "n_cells", "T", "cfl", "boundary", "snapshot_every"})
    dM = MacroConfig()
    macro = MacroConfig(
        x_min=chk.num(Md, "x_min", "macro", dM.x_min),
        x_max=chk.num(Md, "x_max", "macro", dM.x_max),
        n_cells=chk.integer(Md, "n_cells", "macro", dM.n_cells, lo=3),
        T=chk.num(Md, "T", "macro", dM.T),
        cfl=chk.num(Md, "cfl", "macro", dM.cfl, lo=0, hi=1, lo_open=True),
        boundary=chk.choice(Md, "boundary", "macro", BOUNDARIES, dM.boundary),
        snapshot_every=chk.integer(Md, "snapshot_every", "macro", dM.snapshot_every, lo=0),
    )
    if macro.x_min >= macro.x_max:
        chk.fail("macro.x_min", "must be below macro.x_max")
    if macro.T == 0:
        chk.fail("macro.T", "must be nonzero (T = 0 loses strict hyperbolicity)")

    pd = chk.section(data.get("penalty", {}), "penalty",
                     {"micro", "macro", "failure_kappa_rule"})
    penalty_micro = _parse_penalty_scale(pd.get("micro", {}), "penalty.micro", chk)
    penalty_macro = _parse_penalty_scale(pd.get("macro", {}), "penalty.macro", chk)
    kappa_rule = chk.choice(pd, "failure_kappa_rule", "penalty", KAPPA_RULES, "divide")

    cd = chk.section(data.get("coupling", {}), "coupling",
                     {"zeta0", "zeta_min", "zeta_max", "t_star", "transfer_rule"})
    dc = CouplingConfig()
    coupling = CouplingConfig(
        zeta0=chk.num(cd, "zeta0", "coupling", dc.zeta0, lo=0, hi=1, lo_open=True, hi_open=True),
        zeta_min=chk.num(cd, "zeta_min", "coupling", dc.zeta_min, lo=0, hi=1, lo_open=True, hi_open=True),
        zeta_max=chk.num(cd, "zeta_max", "coupling", dc.zeta_max, lo=0, hi=1, lo_open=True, hi_open=True),
        t_star=chk.integer(cd, "t_star", "coupling", dc.t_star, lo=0),
        transfer_rule=chk.choice(cd, "transfer_rule", "coupling", TRANSFER_RULES, dc.transfer_rule),
    )
    if not coupling.zeta_min < coupling.zeta_max:
        chk.fail("coupling.zeta_min", "must be below coupling.zeta_max")
    elif not coupling.zeta_min <= coupling.zeta0 <= coupling.zeta_max:
        chk.fail("coupling.zeta0", "must lie in [zeta_min, zeta_max]")

    n_steps = chk.integer(data, "n_steps", "", lo=1)
    n_particles = chk.integer(data, "n_particles", "", lo=1)
    seed = chk.integer(data, "seed", "", lo=0, hi=2**64 - 1)

    output = data.get("output")
    if "output" in data and (not isinstance(output, str) or not output):
        chk.fail("output", "must be a nonempty path string")
        output = None

    if chk.errors:
        raise ConfigError(chk.errors)
    return ExperimentConfig(
        mode=mode,
        objective=obj,
        n_steps=n_steps,
        n_particles=n_particles,
        seed=seed,
        output=output,
        feasible_set=feasible,
        micro=micro,
        macro=macro,
        penalty_micro=penalty_micro,
        penalty_macro=penalty_macro,
        failure_kappa_rule=kappa_rule,
        coupling=coupling,
    )


def load_config(path) -> ExperimentConfig:
    """Read a YAML config file; raises ConfigError on parse or validation failure."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(["top level: must be a mapping"])
    return config_from_dict(data)


def load_bundled(name: str) -> ExperimentConfig:
    """Load one of the experiment configs shipped inside the package."""
    base = name if name.endswith(".yaml") else name + ".yaml"
    path = resources.files("swarmscale") / "configs" / base
    if not path.is_file():
        raise ConfigError([f"no bundled config named {name!r}"])
    return load_config(path)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain-scalar key-tree; load(config_to_dict(cfg)) reproduces cfg exactly."""
    out = {
        "mode": cfg.mode,
        "objective": {"name": cfg.objective.name, "dim": cfg.objective.dim},
        "n_steps": cfg.n_steps,
        "n_particles": cfg.n_particles,
        "seed": cfg.seed,
        "output": cfg.output,
        "micro": {
            "m": cfg.micro.m,
            "lam": cfg.micro.lam,
            "sigma": cfg.micro.sigma,
            "dt": cfg.micro.dt,
            "alpha": cfg.micro.alpha,
            "diffusion": cfg.micro.diffusion,
            "init_box": list(cfg.micro.init_box),
        },
        "macro": {
            "x_min": cfg.macro.x_min,
            "x_max": cfg.macro.x_max,
            "n_cells": cfg.macro.n_cells,
            "T": cfg.macro.T,
            "cfl": cfg.macro.cfl,
            "boundary": cfg.macro.boundary,
            "snapshot_every": cfg.macro.snapshot_every,
        },
        "penalty": {
            "micro": _penalty_dict(cfg.penalty_micro),
            "macro": _penalty_dict(cfg.penalty_macro),
            "failure_kappa_rule": cfg.failure_kappa_rule,
        },
        "coupling": {
            "zeta0": cfg.coupling.zeta0,
            "zeta_min": cfg.coupling.zeta_min,
            "zeta_max": cfg.coupling.zeta_max,
            "t_star": cfg.coupling.t_star,
            "transfer_rule": cfg.coupling.transfer_rule,
        },
    }
    if cfg.feasible_set is not None:
        fs = cfg.feasible_set
        if fs.kind == "balls":
            out["feasible_set"] = {
                "kind": "balls",
                "balls": [
                    {"center": list(c), "radius_sq": r2} for c, r2 in fs.balls
                ],
            }
        elif fs.kind == "intervals":
            out["feasible_set"] = {
                "kind": "intervals",
                "intervals": [list(iv) for iv in fs.intervals],
            }
        else:
            out["feasible_set"] = {"kind": "halfline", "bound": fs.bound}
    return out


def _penalty_dict(p: PenaltyConfig) -> dict:
    return {
        "beta0": p.beta0,
        "kappa0": p.kappa0,
        "eta_kappa": p.eta_kappa,
        "eta_beta": p.eta_beta,
    }


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)
