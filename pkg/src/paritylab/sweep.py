"""Deterministic grid runner: (model x P x kappa x seed) cells to CSV rows.

Every cell derives its random streams from (master_seed, model, P, kappa,
seed) alone, and BLAS is pinned to one thread inside the cell, so results are
byte-identical regardless of worker count or scheduling. Rows are appended
one fsync'd line at a time; a rerun against an existing CSV skips the cells
that already have rows (resume). canonical_csv_text gives the order- and
timing-independent projection used for comparisons.
"""

from __future__ import annotations

import difflib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import tomli
from threadpoolctl import threadpool_limits

from .diagnostics import empirical_mS, test_error
from .errors import ConfigError, DivergenceError, RunTimeout
from .meanfield import ArdConfig, MfConfig, mf_outer_solve, mf_predict
from .network import LrSchedule, SgldConfig, forward, train_sgld
from .nngp import krr_predict, mc_kernel, ridge_tau
from .presets import get_preset
from .rngs import stream, stream_key
from .tasks import (
    Dataset,
    Hyperparams,
    TaskSpec,
    gen_parity_dataset,
    gen_single_index_dataset,
)
from .theory import OnsetInputs, parity_constants, solve_scalar_fp

__all__ = [
    "HEADER",
    "MODELS",
    "SweepConfig",
    "SweepRecord",
    "SweepSummary",
    "load_config",
    "run_cell",
    "run_sweep",
    "canonical_csv_text",
]

HEADER = "schema=1,model,P,kappa,seed,m_S,test_mse,train_mse,steps_run,wall_seconds,status"
MODELS = ("sgld", "mf", "mf_ard", "nngp", "theory")
STATUSES = ("ok", "diverged", "timeout")


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class SweepRecord:
    """One cell's outcome; maps 1:1 onto a CSV row."""

    model: str
    P: int
    kappa: float
    seed: int
    m_S: float
    test_mse: float
    train_mse: float
    steps_run: int
    wall_seconds: float
    status: str

    def to_row(self) -> str:
        return ",".join(
            (
                self.model,
                str(self.P),
                _fmt(self.kappa),
                str(self.seed),
                _fmt(self.m_S),
                _fmt(self.test_mse),
                _fmt(self.train_mse),
                str(self.steps_run),
                _fmt(self.wall_seconds),
                self.status,
            )
        )

    @staticmethod
    def from_row(row: str) -> "SweepRecord":
        parts = row.split(",")
        if len(parts) != 10:
            raise ConfigError(f"malformed sweep row: {row!r}")
        return SweepRecord(
            model=parts[0],
            P=int(parts[1]),
            kappa=float(parts[2]),
            seed=int(parts[3]),
            m_S=float(parts[4]),
            test_mse=float(parts[5]),
            train_mse=float(parts[6]),
            steps_run=int(parts[7]),
            wall_seconds=float(parts[8]),
            status=parts[9],
        )


@dataclass(frozen=True)
class SgldCell:
    N: int
    gamma: float
    sigma_w: float
    sigma_a: float
    sigma_b: float
    with_bias: bool
    steps: int
    learning_rate_start: float
    learning_rate: float
    learning_rate_decay_steps: int
    log_every: int
    time_budget_s: Optional[float]


@dataclass(frozen=True)
class MfCell:
    N: int
    B: int
    gamma: float
    sigma_w: float
    sigma_a: float
    outer_steps: int
    k0: int
    k_min: int
    k_decay_steps: Optional[int]
    learning_rate_start: float
    learning_rate: float
    learning_rate_decay_steps: int
    time_budget_s: Optional[float]
    alpha0: float = 1.0
    beta0: Optional[float] = None
    ema: float = 0.5
    rho_max: float = 1e18


@dataclass(frozen=True)
class NngpCell:
    M: int
    sigma_w: float
    sigma_a: float
    tau_convention: str


@dataclass(frozen=True)
class TheoryCell:
    N: int
    gamma: float
    sigma_w: float
    sigma_a: float


@dataclass(frozen=True)
class SweepConfig:
    task: TaskSpec
    models: tuple
    P_grid: tuple
    kappa_grid: tuple
    seeds: int
    master_seed: int
    out: str
    workers: int
    eval_P: int
    checkpoint_dir: Optional[str] = None
    sgld: Optional[SgldCell] = None
    mf: Optional[MfCell] = None
    mf_ard: Optional[MfCell] = None
    nngp: Optional[NngpCell] = None
    theory: Optional[TheoryCell] = None


@dataclass(frozen=True)
class SweepSummary:
    cells: int
    ok: int
    failed: int
    skipped: int
    out: str


_TABLE_KEYS = {
    "task": ("kind", "d", "S", "hermite_degree"),
    "grid": ("models", "P", "kappa", "seeds"),
    "eval": ("P_eval",),
    "sgld": (
        "N",
        "gamma",
        "sigma_w",
        "sigma_a",
        "sigma_b",
        "with_bias",
        "steps",
        "learning_rate",
        "learning_rate_start",
        "learning_rate_decay_steps",
        "log_every",
        "time_budget_s",
    ),
    "mf": (
        "N",
        "B",
        "gamma",
        "sigma_w",
        "sigma_a",
        "outer_steps",
        "k0",
        "k_min",
        "k_decay_steps",
        "learning_rate",
        "learning_rate_start",
        "learning_rate_decay_steps",
        "time_budget_s",
    ),
    "nngp": ("M", "sigma_w", "sigma_a", "tau_convention"),
    "theory": ("N", "gamma", "sigma_w", "sigma_a"),
}
_TABLE_KEYS["mf_ard"] = _TABLE_KEYS["mf"] + ("alpha0", "beta0", "ema", "rho_max")
_TOP_KEYS = (
    "preset",
    "master_seed",
    "workers",
    "out",
    "checkpoint_dir",
) + tuple(_TABLE_KEYS)


def _reject_unknown(keys, allowed, where: str):
    for k in keys:
        if k not in allowed:
            hint = difflib.get_close_matches(k, allowed, n=1)
            suffix = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown key {k!r} in {where}{suffix}")


def _need(table: dict, key: str, types, where: str, pred=None, what: str = ""):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {where}")
    v = table[key]
    if isinstance(v, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ConfigError(f"{where}.{key} has the wrong type")
    if not isinstance(v, types):
        raise ConfigError(f"{where}.{key} has the wrong type")
    if pred is not None and not pred(v):
        raise ConfigError(f"{where}.{key} {what}, got {v!r}")
    return v


def _opt(table: dict, key: str, types, where: str, default=None, pred=None, what=""):
    if key not in table:
        return default
    return _need(table, key, types, where, pred, what)


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


_NUM = (int, float)


def _parse_sgld(t: dict) -> SgldCell:
    w = "[sgld]"
    _reject_unknown(t, _TABLE_KEYS["sgld"], w)
    return SgldCell(
        N=_need(t, "N", int, w, lambda v: v >= 1, "must be >= 1"),
        gamma=float(_need(t, "gamma", _NUM, w)),
        sigma_w=float(_need(t, "sigma_w", _NUM, w, lambda v: v > 0, "must be > 0")),
        sigma_a=float(_need(t, "sigma_a", _NUM, w, lambda v: v > 0, "must be > 0")),
        sigma_b=float(_opt(t, "sigma_b", _NUM, w, 1.0)),
        with_bias=_opt(t, "with_bias", bool, w, False),
        steps=_need(t, "steps", int, w, lambda v: v >= 0, "must be >= 0"),
        learning_rate_start=float(
            _need(t, "learning_rate_start", _NUM, w, lambda v: v > 0, "must be > 0")
        ),
        learning_rate=float(
            _need(t, "learning_rate", _NUM, w, lambda v: v > 0, "must be > 0")
        ),
        learning_rate_decay_steps=_need(
            t, "learning_rate_decay_steps", int, w, lambda v: v >= 1, "must be >= 1"
        ),
        log_every=_opt(t, "log_every", int, w, 1000, lambda v: v >= 1, "must be >= 1"),
        time_budget_s=_opt(t, "time_budget_s", _NUM, w),
    )


def _parse_mf(t: dict, ard: bool) -> MfCell:
    w = "[mf_ard]" if ard else "[mf]"
    _reject_unknown(t, _TABLE_KEYS["mf_ard" if ard else "mf"], w)
    return MfCell(
        N=_need(t, "N", int, w, lambda v: v >= 1, "must be >= 1"),
        B=_need(t, "B", int, w, lambda v: v >= 1, "must be >= 1"),
        gamma=float(_need(t, "gamma", _NUM, w)),
        sigma_w=float(_need(t, "sigma_w", _NUM, w, lambda v: v > 0, "must be > 0")),
        sigma_a=float(_need(t, "sigma_a", _NUM, w, lambda v: v > 0, "must be > 0")),
        outer_steps=_need(t, "outer_steps", int, w, lambda v: v >= 0, "must be >= 0"),
        k0=_opt(t, "k0", int, w, 12, lambda v: v >= 1, "must be >= 1"),
        k_min=_opt(t, "k_min", int, w, 2, lambda v: v >= 1, "must be >= 1"),
        k_decay_steps=_opt(
            t, "k_decay_steps", int, w, None, lambda v: v >= 1, "must be >= 1"
        ),
        learning_rate_start=float(
            _need(t, "learning_rate_start", _NUM, w, lambda v: v > 0, "must be > 0")
        ),
        learning_rate=float(
            _need(t, "learning_rate", _NUM, w, lambda v: v > 0, "must be > 0")
        ),
        learning_rate_decay_steps=_need(
            t, "learning_rate_decay_steps", int, w, lambda v: v >= 1, "must be >= 1"
        ),
        time_budget_s=_opt(t, "time_budget_s", _NUM, w),
        **(_parse_ard_fields(t, w) if ard else {}),
    )


def _parse_ard_fields(t: dict, w: str) -> dict:
    beta0 = _opt(t, "beta0", _NUM, w, None, lambda v: v > 0, "must be > 0")
    return {
        "alpha0": float(
            _opt(t, "alpha0", _NUM, w, 1.0, lambda v: v > 0, "must be > 0")
        ),
        "beta0": None if beta0 is None else float(beta0),
        "ema": float(
            _opt(t, "ema", _NUM, w, 0.5, lambda v: 0 < v <= 1, "must be in (0, 1]")
        ),
        "rho_max": float(
            _opt(t, "rho_max", _NUM, w, 1e18, lambda v: v > 0, "must be > 0")
        ),
    }


def _parse_nngp(t: dict) -> NngpCell:
    w = "[nngp]"
    _reject_unknown(t, _TABLE_KEYS["nngp"], w)
    return NngpCell(
        M=_opt(t, "M", int, w, 8192, lambda v: v >= 1, "must be >= 1"),
        sigma_w=float(_need(t, "sigma_w", _NUM, w, lambda v: v > 0, "must be > 0")),
        sigma_a=float(_need(t, "sigma_a", _NUM, w, lambda v: v > 0, "must be > 0")),
        tau_convention=_opt(
            t,
            "tau_convention",
            str,
            w,
            "main",
            lambda v: v in ("main", "half"),
            'must be "main" or "half"',
        ),
    )


def _parse_theory(t: dict) -> TheoryCell:
    w = "[theory]"
    _reject_unknown(t, _TABLE_KEYS["theory"], w)
    return TheoryCell(
        N=_need(t, "N", int, w, lambda v: v >= 1, "must be >= 1"),
        gamma=float(_need(t, "gamma", _NUM, w)),
        sigma_w=float(_need(t, "sigma_w", _NUM, w, lambda v: v > 0, "must be > 0")),
        sigma_a=float(_need(t, "sigma_a", _NUM, w, lambda v: v > 0, "must be > 0")),
    )


def load_config(
    path=None,
    text: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> SweepConfig:
    """Parse, merge with any preset, and fully validate a sweep config.

    Sources: a TOML file path or inline text, an optional preset name
    (CLI --preset wins over the file's own "preset" key), and a flat
    overrides mapping for master_seed / workers / out.
    """
    if path is not None and text is not None:
        raise ConfigError("pass either a config path or inline text, not both")
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomli.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
    elif text is not None:
        try:
            raw = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from exc

    _reject_unknown(raw, _TOP_KEYS, "the top level")
    preset_name = preset or raw.pop("preset", None)
    if preset_name is not None:
        if not isinstance(preset_name, str):
            raise ConfigError("preset must be a string")
        raw = _deep_merge(get_preset(preset_name), raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = val

    for tbl in ("task", "grid"):
        if tbl not in raw or not isinstance(raw.get(tbl), dict):
            raise ConfigError(f"missing required table [{tbl}]")
        _reject_unknown(raw[tbl], _TABLE_KEYS[tbl], f"[{tbl}]")

    t = raw["task"]
    kind = _need(t, "kind", str, "[task]")
    if kind not in ("parity", "single_index"):
        raise ConfigError(f'task.kind must be "parity" or "single_index", got {kind!r}')
    S = _need(t, "S", list, "[task]")
    task = TaskSpec(
        kind=kind,
        d=_need(t, "d", int, "[task]", lambda v: v >= 1, "must be >= 1"),
        S=tuple(S),
        hermite_degree=_opt(t, "hermite_degree", int, "[task]"),
    )

    g = raw["grid"]
    models = _need(g, "models", list, "[grid]")
    if not models:
        raise ConfigError("grid.models must be nonempty")
    for m in models:
        if m not in MODELS:
            hint = difflib.get_close_matches(str(m), MODELS, n=1)
            suffix = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown model {m!r} in grid.models{suffix}")
    if len(set(models)) != len(models):
        raise ConfigError("grid.models has duplicates")
    P_grid = _need(g, "P", list, "[grid]")
    if not P_grid:
        raise ConfigError("P_grid (grid.P) must be a nonempty list")
    if not all(isinstance(p, int) and p > 0 for p in P_grid):
        raise ConfigError("P_grid entries must be positive integers")
    kappa_grid = _need(g, "kappa", list, "[grid]")
    if not kappa_grid:
        raise ConfigError("kappa_grid (grid.kappa) must be a nonempty list")
    if not all(isinstance(k, _NUM) and not isinstance(k, bool) and k > 0 for k in kappa_grid):
        raise ConfigError("kappa_grid entries must be positive reals")
    seeds = _need(g, "seeds", int, "[grid]", lambda v: v >= 1, "must be >= 1")

    if "theory" in models and kind != "parity":
        raise ConfigError("the theory model requires a parity task")

    eval_tbl = raw.get("eval", {})
    _reject_unknown(eval_tbl, _TABLE_KEYS["eval"], "[eval]")
    eval_P = _opt(
        eval_tbl, "P_eval", int, "[eval]", 10000, lambda v: v >= 1, "must be >= 1"
    )

    cfg_kwargs = {}
    parsers = {
        "sgld": _parse_sgld,
        "mf": lambda tbl: _parse_mf(tbl, ard=False),
        "mf_ard": lambda tbl: _parse_mf(tbl, ard=True),
        "nngp": _parse_nngp,
        "theory": _parse_theory,
    }
    for name, parser in parsers.items():
        if name in raw:
            if not isinstance(raw[name], dict):
                raise ConfigError(f"[{name}] must be a table")
            cfg_kwargs[name] = parser(raw[name])
        elif name in models:
            raise ConfigError(f"model {name!r} is in grid.models but [{name}] is missing")

    return SweepConfig(
        task=task,
        models=tuple(models),
        P_grid=tuple(P_grid),
        kappa_grid=tuple(float(k) for k in kappa_grid),
        seeds=seeds,
        master_seed=_opt(raw, "master_seed", int, "the top level", 0),
        out=_opt(raw, "out", str, "the top level", "sweep.csv"),
        workers=_opt(
            raw, "workers", int, "the top level", 1, lambda v: v >= 1, "must be >= 1"
        ),
        eval_P=eval_P,
        checkpoint_dir=_opt(raw, "checkpoint_dir", str, "the top level"),
        **cfg_kwargs,
    )


def _gen_data(task: TaskSpec, P: int, rng) -> Dataset:
    if task.kind == "parity":
        return gen_parity_dataset(task, P, rng)
    return gen_single_index_dataset(task, P, rng)


def _cell_metrics(preds_eval, eval_data, preds_train, y_train):
    m_S, _ = empirical_mS(preds_eval, eval_data, eval_data.spec.S)
    test_mse, _ = test_error(preds_eval, eval_data, eval_data.spec.S)
    e = preds_train - y_train
    train_mse = float(e @ e) / y_train.shape[0]
    return m_S, test_mse, train_mse


def _checkpoint_path(cdir: str, model: str, P: int, kappa: float, seed: int) -> str:
    return os.path.join(cdir, f"{model}-P{P}-kappa{_fmt(kappa)}-seed{seed}.npz")


def run_cell(
    config: SweepConfig, model: str, P: int, kappa: float, seed: int
) -> SweepRecord:
    """Execute one grid cell; never raises for divergence/timeout outcomes."""
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")
    t0 = time.perf_counter()
    task = config.task
    ms = config.master_seed
    with threadpool_limits(limits=1):
        try:
            if model == "theory":
                cell = config.theory
                tc = parity_constants(task.k)
                inputs = OnsetInputs(
                    C=task.d * task.k / cell.sigma_w**2,
                    N=cell.N,
                    gamma=cell.gamma,
                    sigma_a=cell.sigma_a,
                    kappa=kappa,
                )
                m_star = solve_scalar_fp(inputs, tc)
                return SweepRecord(
                    model,
                    P,
                    kappa,
                    seed,
                    m_S=m_star,
                    test_mse=0.5 * (1.0 - m_star) ** 2,
                    train_mse=math.nan,
                    steps_run=0,
                    wall_seconds=time.perf_counter() - t0,
                    status="ok",
                )

            train = _gen_data(
                task, P, stream(ms, "cell", model, P, kappa, seed, "train-data")
            )
            eval_data = _gen_data(
                task,
                config.eval_P,
                stream(ms, "cell", model, P, kappa, seed, "eval-data"),
            )

            if model == "sgld":
                cell = config.sgld
                hyper = Hyperparams(
                    N=cell.N,
                    gamma=cell.gamma,
                    sigma_w=cell.sigma_w,
                    sigma_a=cell.sigma_a,
                    kappa=kappa,
                    sigma_b=cell.sigma_b,
                )
                run_cfg = SgldConfig(
                    hyper=hyper,
                    steps=cell.steps,
                    lr=LrSchedule(
                        cell.learning_rate_start,
                        cell.learning_rate,
                        cell.learning_rate_decay_steps,
                    ),
                    with_bias=cell.with_bias,
                    log_every=cell.log_every,
                    time_budget_s=cell.time_budget_s,
                )
                params, _ = train_sgld(
                    run_cfg, train, stream(ms, "cell", model, P, kappa, seed, "run")
                )
                m_S, test_mse, train_mse = _cell_metrics(
                    forward(params, eval_data.X), eval_data, forward(params, train.X), train.y
                )
                if config.checkpoint_dir:
                    from .checkpoint import save_checkpoint

                    save_checkpoint(
                        _checkpoint_path(config.checkpoint_dir, model, P, kappa, seed),
                        params,
                        cell.steps,
                    )
                return SweepRecord(
                    model, P, kappa, seed, m_S, test_mse, train_mse,
                    steps_run=cell.steps,
                    wall_seconds=time.perf_counter() - t0,
                    status="ok",
                )

            if model in ("mf", "mf_ard"):
                cell = config.mf if model == "mf" else config.mf_ard
                hyper = Hyperparams(
                    N=cell.N,
                    gamma=cell.gamma,
                    sigma_w=cell.sigma_w,
                    sigma_a=cell.sigma_a,
                    kappa=kappa,
                )
                ard = ArdConfig(
                    enabled=(model == "mf_ard"),
                    alpha0=cell.alpha0,
                    beta0=cell.beta0,
                    ema=cell.ema,
                    rho_max=cell.rho_max,
                )
                run_cfg = MfConfig(
                    hyper=hyper,
                    B=cell.B,
                    outer_steps=cell.outer_steps,
                    lr=LrSchedule(
                        cell.learning_rate_start,
                        cell.learning_rate,
                        cell.learning_rate_decay_steps,
                    ),
                    k0=cell.k0,
                    k_min=cell.k_min,
                    k_decay_steps=cell.k_decay_steps,
                    ard=ard,
                    time_budget_s=cell.time_budget_s,
                )
                state, _ = mf_outer_solve(
                    run_cfg, train, stream(ms, "cell", model, P, kappa, seed, "run")
                )
                m_S, test_mse, train_mse = _cell_metrics(
                    mf_predict(state, eval_data.X),
                    eval_data,
                    mf_predict(state, train.X),
                    train.y,
                )
                if config.checkpoint_dir:
                    from .checkpoint import save_checkpoint

                    save_checkpoint(
                        _checkpoint_path(config.checkpoint_dir, model, P, kappa, seed),
                        state,
                        cell.outer_steps,
                    )
                return SweepRecord(
                    model, P, kappa, seed, m_S, test_mse, train_mse,
                    steps_run=cell.outer_steps,
                    wall_seconds=time.perf_counter() - t0,
                    status="ok",
                )

            # nngp: one shared weight sample couples K and K_cross
            cell = config.nngp
            hyper = Hyperparams(
                N=1, gamma=0.5, sigma_w=cell.sigma_w, sigma_a=cell.sigma_a, kappa=kappa
            )
            wseed = stream_key(ms, "cell", model, P, kappa, seed, "weights")
            K = mc_kernel(train.X, train.X, hyper, None, cell.M, wseed)
            K_cross = mc_kernel(eval_data.X, train.X, hyper, None, cell.M, wseed)
            tau = ridge_tau(hyper, cell.tau_convention)
            preds_eval = krr_predict(K, K_cross, train.y, tau)
            preds_train = krr_predict(K, K, train.y, tau)
            m_S, test_mse, train_mse = _cell_metrics(
                preds_eval, eval_data, preds_train, train.y
            )
            return SweepRecord(
                model, P, kappa, seed, m_S, test_mse, train_mse,
                steps_run=0,
                wall_seconds=time.perf_counter() - t0,
                status="ok",
            )
        except DivergenceError as exc:
            return SweepRecord(
                model, P, kappa, seed,
                m_S=math.nan, test_mse=math.nan, train_mse=math.nan,
                steps_run=exc.step,
                wall_seconds=time.perf_counter() - t0,
                status="diverged",
            )
        except RunTimeout as exc:
            last = exc.trace[-1][0] if exc.trace else 0
            return SweepRecord(
                model, P, kappa, seed,
                m_S=math.nan, test_mse=math.nan, train_mse=math.nan,
                steps_run=int(last),
                wall_seconds=time.perf_counter() - t0,
                status="timeout",
            )


def _cell_key(model: str, P: int, kappa: float, seed: int):
    return (model, str(P), _fmt(kappa), str(seed))


def _read_existing(path: Path):
    done = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != HEADER:
            raise ConfigError(
                f"{path} exists but its header does not match the schema"
            )
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10:
                raise ConfigError(f"malformed row in {path}: {line!r}")
            done.add((parts[0], parts[1], parts[2], parts[3]))
    return done


def run_sweep(config: SweepConfig) -> SweepSummary:
    """Run all grid cells not already in the output CSV; append as they finish."""
    grid = [
        (m, P, kappa, s)
        for m in config.models
        for P in config.P_grid
        for kappa in config.kappa_grid
        for s in range(config.seeds)
    ]
    out = Path(config.out)
    done = set()
    if out.exists():
        done = _read_existing(out)
    else:
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(HEADER + "\n")
    if config.checkpoint_dir:
        Path(config.checkpoint_dir).mkdir(parents=True, exist_ok=True)

    todo = [c for c in grid if _cell_key(*c) not in done]
    ok = failed = 0

    def record_row(rec: SweepRecord):
        nonlocal ok, failed
        with open(out, "a", encoding="utf-8", newline="") as fh:
            fh.write(rec.to_row() + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        if rec.status == "ok":
            ok += 1
        else:
            failed += 1

    if config.workers <= 1 or len(todo) <= 1:
        for cellargs in todo:
            record_row(run_cell(config, *cellargs))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_cell, config, *c) for c in todo]
            for fut in as_completed(futures):
                record_row(fut.result())

    return SweepSummary(
        cells=len(grid),
        ok=ok,
        failed=failed,
        skipped=len(grid) - len(todo),
        out=str(out),
    )


def canonical_csv_text(path) -> str:
    """Order- and timing-independent projection of a sweep CSV.

    Rows are sorted by (model, P, kappa, seed) and wall_seconds is masked to
    0, so two files describing the same results compare byte-identical.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != HEADER:
            raise ConfigError(f"{path} does not carry the frozen sweep schema")
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10 or parts[9] not in STATUSES:
                raise ConfigError(f"malformed row in {path}: {line!r}")
            parts[8] = "0"
            rows.append(parts)
    rows.sort(key=lambda p: (p[0], int(p[1]), float(p[2]), int(p[3])))
    return "\n".join([HEADER] + [",".join(p) for p in rows]) + "\n"
