"""Experiment orchestration: config parsing, deterministic parallel
Monte Carlo execution, aggregation, and CSV/JSON serialization.

Determinism lives in the seed derivation, not the schedule: every trial
derives its randomness from (master seed, experiment kind, trial index),
so worker count and scheduling order never change a single record.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import observables, prng
from .errors import ConfigError, FailureBudgetError, SolverError
from .fields import (
    Box,
    ConstantBase,
    FieldSpec,
    TruncatedExponentialBase,
    UniformBase,
    _bulk_values_at,
    conditional_continuity_probe,
    empirical_mixing,
)
from .hamiltonian import HamiltonianSpec, InteractionSpec, assemble_trial
from .lattice import origin_cube
from .msa import MsaParams, singularity_trial
from .spectral import lowest_eigenvalue
from .stats import wilson_ci

SCHEMA_VERSION = 1
CSV_MAGIC = "andersonlab-csv"

KINDS = (
    "field-certify",
    "large-deviation",
    "lifshitz",
    "ct-check",
    "msa-initial",
    "eigen-decay",
    "dynloc",
    "spectral-edge",
)

#: Fraction of failed trials tolerated before the run itself fails.
FAILURE_BUDGET = 0.10

_TOP_KEYS = {"kind", "seed", "trials", "workers", "out", "quiet", "hamiltonian", "msa", "params"}
_HAM_KEYS = {"n", "d", "field", "interaction"}
_FIELD_KEYS = {"base", "a", "rate", "vmax", "value", "kernel"}
_INTERACTION_KEYS = {"r0", "u", "phi"}
_MSA_KEYS = {"N", "p", "L0_values", "alpha", "estar_override", "n", "grid_points"}
_PARAM_KEYS = {
    "field-certify": {"mixing_distances", "eps_values"},
    "large-deviation": {"E", "beta", "c"},
    "lifshitz": {"L_values", "C"},
    "ct-check": {"sizes", "eta_min", "eta_max"},
    "msa-initial": set(),
    "eigen-decay": {"L", "window_width", "max_pairs"},
    "dynloc": {"L", "s", "window_width", "K_radius", "times"},
    "spectral-edge": {"L_values"},
}

_DEFAULT_CT_SIZES = ((1, 1, 6), (1, 1, 10), (2, 1, 4), (1, 2, 4), (2, 2, 2), (3, 1, 2))
_DEFAULT_TIMES = (0.0, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class MsaSettings:
    N: int
    p: float
    L0_values: tuple[int, ...]
    alpha: float = 1.5
    estar_override: float | None = None
    n: int | None = None
    grid_points: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    trials: int
    workers: int
    out: str
    quiet: bool
    n: int
    d: int
    field_spec: FieldSpec
    interaction: InteractionSpec
    msa: MsaSettings | None
    params: dict
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def hamiltonian(self) -> HamiltonianSpec:
        return HamiltonianSpec(
            n=self.n, d=self.d, field=self.field_spec, interaction=self.interaction
        )


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------


def _check_unknown(table: dict, allowed: set, where: str, problems: list):
    for key in table:
        if key not in allowed:
            problems.append(f"unknown key '{key}' in {where}")


def _parse_field(table: dict, d: int, seed: int, problems: list) -> FieldSpec | None:
    _check_unknown(table, _FIELD_KEYS, "[hamiltonian.field]", problems)
    base_kind = table.get("base", "uniform")
    if base_kind == "uniform":
        base = UniformBase(a=float(table.get("a", 1.0)))
    elif base_kind == "texp":
        base = TruncatedExponentialBase(
            rate=float(table.get("rate", 1.0)), vmax=float(table.get("vmax", 10.0))
        )
    elif base_kind == "constant":
        base = ConstantBase(value=float(table.get("value", 0.0)))
    else:
        problems.append(f"unknown field base '{base_kind}'")
        return None
    kernel = {}
    for entry in table.get("kernel", [{"offset": [0] * d, "weight": 1.0}]):
        if not isinstance(entry, dict) or set(entry) != {"offset", "weight"}:
            problems.append("kernel entries must be {offset = [...], weight = ...}")
            return None
        kernel[tuple(int(c) for c in entry["offset"])] = float(entry["weight"])
    try:
        return FieldSpec(d=d, base=base, kernel=kernel, seed=seed)
    except ValueError as exc:
        problems.append(f"field: {exc}")
        return None


def _parse_interaction(table: dict, problems: list) -> InteractionSpec:
    _check_unknown(table, _INTERACTION_KEYS, "[hamiltonian.interaction]", problems)
    r0 = int(table.get("r0", 0))
    try:
        if "phi" in table:
            return InteractionSpec(r0=r0, phi=tuple(float(v) for v in table["phi"]))
        return InteractionSpec.constant(float(table.get("u", 0.0)), r0)
    except ValueError as exc:
        problems.append(f"interaction: {exc}")
        return InteractionSpec.none()


def _parse_msa(table: dict, problems: list) -> MsaSettings | None:
    _check_unknown(table, _MSA_KEYS, "[msa]", problems)
    try:
        l0_values = tuple(int(v) for v in table["L0_values"])
        settings = MsaSettings(
            N=int(table["N"]),
            p=float(table["p"]),
            L0_values=l0_values,
            alpha=float(table.get("alpha", 1.5)),
            estar_override=(
                float(table["estar_override"]) if "estar_override" in table else None
            ),
            n=int(table["n"]) if "n" in table else None,
            grid_points=int(table.get("grid_points", 1000)),
        )
    except KeyError as exc:
        problems.append(f"[msa] missing required key {exc}")
        return None
    except (TypeError, ValueError) as exc:
        problems.append(f"[msa]: {exc}")
        return None
    if settings.alpha <= 1:
        problems.append("[msa] alpha > 1 required")
    if settings.p <= 0:
        problems.append("[msa] p > 0 required")
    if any(l0 < 2 for l0 in settings.L0_values):
        problems.append("[msa] every L0 must be >= 2")
    return settings


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed config table; raises ConfigError listing every
    violation found."""
    problems: list[str] = []
    _check_unknown(raw, _TOP_KEYS, "top level", problems)

    kind = raw.get("kind")
    if kind not in KINDS:
        problems.append(f"kind must be one of {KINDS}, got {kind!r}")
        raise ConfigError(problems)

    seed = int(raw.get("seed", 0))
    trials = raw.get("trials")
    if not isinstance(trials, int) or trials < 1:
        problems.append("trials must be a positive integer")
        trials = 1
    workers = int(raw.get("workers", 1))
    if workers < 1:
        problems.append("workers must be >= 1")
        workers = 1
    out = str(raw.get("out", "runs"))
    quiet = bool(raw.get("quiet", False))

    ham = raw.get("hamiltonian", {})
    _check_unknown(ham, _HAM_KEYS, "[hamiltonian]", problems)
    n = int(ham.get("n", 1))
    d = int(ham.get("d", 1))
    if n < 1:
        problems.append("[hamiltonian] n must be >= 1")
    if d < 1:
        problems.append("[hamiltonian] d must be >= 1")

    field_seed = prng.hash_words(seed, KINDS.index(kind))
    field_spec = _parse_field(ham.get("field", {}), d, field_seed, problems)
    interaction = _parse_interaction(ham.get("interaction", {}), problems)

    msa = None
    if kind == "msa-initial":
        if "msa" not in raw:
            problems.append("msa-initial requires an [msa] table")
        else:
            msa = _parse_msa(raw["msa"], problems)
            if msa is not None and msa.n is not None and not 1 <= msa.n <= msa.N:
                problems.append("[msa] n must lie in [1, N]")
    elif "msa" in raw:
        problems.append("[msa] table only applies to kind = 'msa-initial'")

    params = dict(raw.get("params", {}))
    _check_unknown(params, _PARAM_KEYS[kind], "[params]", problems)
    problems.extend(_validate_params(kind, params))

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        trials=trials,
        workers=workers,
        out=out,
        quiet=quiet,
        n=n,
        d=d,
        field_spec=field_spec,
        interaction=interaction,
        msa=msa,
        params=params,
        raw=raw,
    )


def _validate_params(kind: str, params: dict) -> list[str]:
    problems = []
    need = {
        "large-deviation": ("E", "beta", "c"),
        "lifshitz": ("L_values",),
        "eigen-decay": ("L",),
        "dynloc": ("L", "s", "K_radius"),
        "spectral-edge": ("L_values",),
    }.get(kind, ())
    for key in need:
        if key not in params:
            problems.append(f"[params] missing required key '{key}' for {kind}")
    if kind == "lifshitz" or kind == "spectral-edge":
        vals = params.get("L_values", [])
        if not vals or any(int(v) < 1 for v in vals):
            problems.append("[params] L_values must be a nonempty list of L >= 1")
    if kind == "ct-check":
        for size in params.get("sizes", _DEFAULT_CT_SIZES):
            if len(size) != 3 or any(int(v) < 1 for v in size):
                problems.append(f"[params] bad ct-check size {size}")
        eta_max = float(params.get("eta_max", 1.0))
        if not 0 < eta_max <= 1.0:
            problems.append("[params] eta_max must lie in (0, 1]")
    if kind == "dynloc" and "s" in params and float(params["s"]) <= 0:
        problems.append("[params] dynloc s must be positive")
    return problems


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML parse error in {path}: {exc}"]) from exc


def validate_config(path) -> ExperimentConfig:
    """Parse and invariant-check a config file."""
    return parse_config(load_config(path))


# ---------------------------------------------------------------------------
# per-kind work lists and record runners
# ---------------------------------------------------------------------------


def _work_list(cfg: ExperimentConfig) -> list:
    if cfg.kind in ("lifshitz", "spectral-edge"):
        return [
            (int(big_l), t)
            for big_l in cfg.params["L_values"]
            for t in range(cfg.trials)
        ]
    if cfg.kind == "msa-initial":
        return [(int(l0), t) for l0 in cfg.msa.L0_values for t in range(cfg.trials)]
    if cfg.kind == "field-certify":
        return [0]
    return list(range(cfg.trials))


def _run_item(cfg: ExperimentConfig, item) -> list[dict]:
    return _RUNNERS[cfg.kind](cfg, item)


def _run_lifshitz(cfg: ExperimentConfig, item) -> list[dict]:
    big_l, trial = item
    c_const = float(cfg.params.get("C", 1.0))
    op = assemble_trial(cfg.hamiltonian, origin_cube(big_l, cfg.n, cfg.d), trial)
    e0 = lowest_eigenvalue(op)
    threshold = 2.0 * c_const * float(big_l) ** -0.5
    return [
        {
            "trial": trial,
            "L": big_l,
            "e0": e0,
            "threshold": threshold,
            "below": int(e0 <= threshold),
        }
    ]


def _run_spectral_edge(cfg: ExperimentConfig, item) -> list[dict]:
    big_l, trial = item
    op = assemble_trial(cfg.hamiltonian, origin_cube(big_l, cfg.n, cfg.d), trial)
    return [{"trial": trial, "L": big_l, "e0": lowest_eigenvalue(op)}]


def _run_msa(cfg: ExperimentConfig, item) -> list[dict]:
    l0, trial = item
    settings = cfg.msa
    params = MsaParams(N=settings.N, d=cfg.d, p=settings.p, L0=l0, alpha=settings.alpha)
    n = settings.n if settings.n is not None else settings.N
    rec = singularity_trial(
        cfg.hamiltonian,
        params,
        n,
        trial,
        grid_points=settings.grid_points,
        estar_override=settings.estar_override,
    )
    return [
        {
            "trial": trial,
            "n": n,
            "L": l0,
            "e0": rec.ground_energy,
            "certified": int(rec.certified),
            "singular": int(rec.singular),
            "hit_spectrum": int(rec.hit_spectrum),
            "chain_verified": int(rec.chain_verified),
        }
    ]


def _run_large_deviation(cfg: ExperimentConfig, trial: int) -> list[dict]:
    p = cfg.params
    energy, beta, c = float(p["E"]), float(p["beta"]), float(p["c"])
    big_l = int(math.floor((beta * energy) ** -0.5))
    if big_l < 2:
        raise ConfigError([f"beta*E gives L = {big_l} < 2"])
    region = Box.centered((0,) * cfg.d, big_l)
    vals = _bulk_values_at(
        cfg.field_spec, region.sites(), np.asarray([trial], dtype=np.int64)
    )
    cap = c / 3.0 * float(big_l) ** -2
    mean = float(np.minimum(vals[0], cap).mean())
    return [
        {
            "trial": trial,
            "L": big_l,
            "cube_mean": mean,
            "below": int(mean < energy / 2.0),
        }
    ]


def _run_ct_check(cfg: ExperimentConfig, trial: int) -> list[dict]:
    p = cfg.params
    sizes = [tuple(int(v) for v in s) for s in p.get("sizes", _DEFAULT_CT_SIZES)]
    eta_min = float(p.get("eta_min", 0.05))
    eta_max = float(p.get("eta_max", 1.0))
    n, d, big_l = sizes[trial % len(sizes)]
    # instances sweep over dimensions, so kernels from the config only
    # apply when the dimension matches; otherwise fall back to i.i.d.
    if d == cfg.d:
        fld = cfg.field_spec
    else:
        fld = FieldSpec.iid(d, cfg.field_spec.base, seed=cfg.field_spec.seed)
    spec = HamiltonianSpec(n=n, d=d, field=fld, interaction=cfg.interaction)
    op = assemble_trial(spec, origin_cube(big_l, n, d), trial)
    e0 = lowest_eigenvalue(op)
    u = prng.unit_from_words(cfg.seed, KINDS.index(cfg.kind), trial, 17)
    eta = eta_min + (eta_max - eta_min) * u
    energy = e0 - eta
    ratio = observables.combes_thomas_ratio(op, energy)
    return [
        {
            "trial": trial,
            "n": n,
            "d": d,
            "L": big_l,
            "dim": op.dim,
            "E": energy,
            "eta": eta,
            "ratio": ratio,
        }
    ]


def _run_eigen_decay(cfg: ExperimentConfig, trial: int) -> list[dict]:
    p = cfg.params
    big_l = int(p["L"])
    width = float(p.get("window_width", 0.1))
    max_pairs = int(p.get("max_pairs", 16))
    op = assemble_trial(cfg.hamiltonian, origin_cube(big_l, cfg.n, cfg.d), trial)
    e0 = lowest_eigenvalue(op)
    fits = observables.eigenfunction_decay(op, (e0, e0 + width))[:max_pairs]
    rows = []
    for pair, fit in enumerate(fits):
        center = ";".join(str(c) for c in fit.center.coords)
        for r, log_amp in zip(fit.shell_radii, fit.shell_log_amp):
            rows.append(
                {
                    "trial": trial,
                    "pair": pair,
                    "eigenvalue": fit.eigenvalue,
                    "center": center,
                    "fitted_rate": fit.fitted_rate,
                    "degenerate": int(fit.degenerate),
                    "r": int(r),
                    "log_amp": float(log_amp),
                }
            )
    return rows


def _run_dynloc(cfg: ExperimentConfig, trial: int) -> list[dict]:
    p = cfg.params
    big_l = int(p["L"])
    s = float(p["s"])
    width = float(p.get("window_width", 0.5))
    k_radius = int(p["K_radius"])
    times = [float(t) for t in p.get("times", _DEFAULT_TIMES)]
    op = assemble_trial(cfg.hamiltonian, origin_cube(big_l, cfg.n, cfg.d), trial)
    e0 = lowest_eigenvalue(op)
    sub = origin_cube(k_radius, cfg.n, cfg.d)
    dm = observables.dynamical_moment(op, (e0, e0 + width), s, sub, times)
    return [
        {
            "trial": trial,
            "t": float(t),
            "moment": float(v),
            "bound": dm.bound,
            "dim": op.dim,
        }
        for t, v in zip(dm.times, dm.values)
    ]


def _run_field_certify(cfg: ExperimentConfig, item) -> list[dict]:
    p = cfg.params
    radius = cfg.field_spec.radius
    distances = [int(v) for v in p.get("mixing_distances", (1, 2 * radius + 1))]
    eps_values = [float(v) for v in p.get("eps_values", (0.01,))]
    rows = []
    for dist in distances:
        value, se = empirical_mixing(cfg.field_spec, dist, cfg.trials)
        rows.append({"probe": "mixing", "param": float(dist), "value": value, "se": se})
    for eps in eps_values:
        value = conditional_continuity_probe(cfg.field_spec, eps, cfg.trials)
        rows.append({"probe": "continuity", "param": eps, "value": value, "se": 0.0})
    return rows


_RUNNERS = {
    "lifshitz": _run_lifshitz,
    "spectral-edge": _run_spectral_edge,
    "msa-initial": _run_msa,
    "large-deviation": _run_large_deviation,
    "ct-check": _run_ct_check,
    "eigen-decay": _run_eigen_decay,
    "dynloc": _run_dynloc,
    "field-certify": _run_field_certify,
}

_COLUMNS = {
    "lifshitz": ("trial", "L", "e0", "threshold", "below"),
    "spectral-edge": ("trial", "L", "e0"),
    "msa-initial": (
        "trial",
        "n",
        "L",
        "e0",
        "certified",
        "singular",
        "hit_spectrum",
        "chain_verified",
    ),
    "large-deviation": ("trial", "L", "cube_mean", "below"),
    "ct-check": ("trial", "n", "d", "L", "dim", "E", "eta", "ratio"),
    "eigen-decay": (
        "trial",
        "pair",
        "eigenvalue",
        "center",
        "fitted_rate",
        "degenerate",
        "r",
        "log_amp",
    ),
    "dynloc": ("trial", "t", "moment", "bound", "dim"),
    "field-certify": ("probe", "param", "value", "se"),
}

_SCALE_COLUMNS = {
    "lifshitz": ("L", "trials", "below_count", "estimate", "ci_low", "ci_high", "threshold"),
    "msa-initial": (
        "n",
        "L",
        "trials",
        "singular_count",
        "estimate",
        "ci_low",
        "ci_high",
        "shortcut_rate",
        "target",
    ),
    "spectral-edge": ("L", "trials", "min_e0", "mean_e0"),
}


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def aggregate(kind: str, records: list[dict], cfg: ExperimentConfig | None = None) -> dict:
    """Aggregates recomputable from the per-trial records alone."""
    agg: dict = {"n_records": len(records)}
    if kind in ("lifshitz", "msa-initial", "spectral-edge"):
        scales = []
        for big_l in sorted({r["L"] for r in records}):
            group = [r for r in records if r["L"] == big_l]
            row: dict = {"L": big_l, "trials": len(group)}
            if kind == "lifshitz":
                below = sum(r["below"] for r in group)
                lo, hi = wilson_ci(below, len(group))
                row.update(
                    below_count=below,
                    estimate=below / len(group),
                    ci_low=lo,
                    ci_high=hi,
                    threshold=group[0]["threshold"],
                )
            elif kind == "msa-initial":
                singular = sum(r["singular"] for r in group)
                lo, hi = wilson_ci(singular, len(group))
                n = group[0]["n"]
                target = None
                if cfg is not None and cfg.msa is not None:
                    target = float(big_l) ** (-2.0 * cfg.msa.p * 4.0 ** (cfg.msa.N - n))
                row.update(
                    n=n,
                    singular_count=singular,
                    estimate=singular / len(group),
                    ci_low=lo,
                    ci_high=hi,
                    shortcut_rate=sum(r["certified"] for r in group) / len(group),
                    target=target,
                )
            else:
                energies = [r["e0"] for r in group]
                row.update(min_e0=min(energies), mean_e0=sum(energies) / len(energies))
            scales.append(row)
        agg["scales"] = scales
    elif kind == "large-deviation":
        below = sum(r["below"] for r in records)
        lo, hi = wilson_ci(below, len(records)) if records else (0.0, 1.0)
        est = below / len(records) if records else 0.0
        d = cfg.d if cfg is not None else 1
        cube_size = (2 * records[0]["L"] + 1) ** d if records else 1
        agg.update(
            below_count=below,
            estimate=est,
            ci_low=lo,
            ci_high=hi,
            gamma_hat=(None if est <= 0 else -math.log(est) / cube_size),
        )
    elif kind == "ct-check":
        ratios = [r["ratio"] for r in records]
        agg.update(
            max_ratio=max(ratios) if ratios else None,
            certified_fraction=(
                sum(v <= 1.0 + 1e-12 for v in ratios) / len(ratios) if ratios else None
            ),
        )
    elif kind == "eigen-decay":
        rates = sorted(
            {
                (r["trial"], r["pair"]): r["fitted_rate"]
                for r in records
                if not r["degenerate"]
            }.values()
        )
        agg.update(
            pairs=len(rates),
            median_rate=(rates[len(rates) // 2] if rates else None),
        )
    elif kind == "dynloc":
        agg.update(
            sup_moment=max((r["moment"] for r in records), default=None),
            max_bound=max((r["bound"] for r in records), default=None),
        )
    return agg


# ---------------------------------------------------------------------------
# running and serialization
# ---------------------------------------------------------------------------


@dataclass
class EnsembleReport:
    kind: str
    schema_version: int
    config: dict
    records: list[dict]
    aggregates: dict
    n_failed: int
    failures: list[dict]
    runtime_seconds: float

    def csv_text(self) -> str:
        cols = _COLUMNS[self.kind]
        lines = [f"# {CSV_MAGIC} v{self.schema_version} {self.kind} trials"]
        lines.append(",".join(cols))
        for rec in self.records:
            lines.append(",".join(_csv_cell(rec[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def scales_csv_text(self) -> str | None:
        if self.kind not in _SCALE_COLUMNS or "scales" not in self.aggregates:
            return None
        cols = _SCALE_COLUMNS[self.kind]
        lines = [f"# {CSV_MAGIC} v{self.schema_version} {self.kind} scales"]
        lines.append(",".join(cols))
        for row in self.aggregates["scales"]:
            lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
        return "\n".join(lines) + "\n"

    def json_text(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "config": self.config,
            "aggregates": self.aggregates,
            "n_records": len(self.records),
            "n_failed": self.n_failed,
            "failures": self.failures,
            "runtime_seconds": self.runtime_seconds,
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"

    def write(self, out_dir, basename: str | None = None) -> list[str]:
        """Write CSV + JSON atomically; returns the paths written."""
        os.makedirs(out_dir, exist_ok=True)
        if basename is None:
            stamp = time.strftime("%Y%m%d-%H%M%S", time.gmtime())
            basename = f"{self.kind}-{stamp}-{time.time_ns() % 10**9:09d}"
        paths = []
        csv_path = os.path.join(out_dir, basename + ".csv")
        _atomic_write(csv_path, self.csv_text())
        paths.append(csv_path)
        scales = self.scales_csv_text()
        if scales is not None:
            scales_path = os.path.join(out_dir, basename + "-scales.csv")
            _atomic_write(scales_path, scales)
            paths.append(scales_path)
        json_path = os.path.join(out_dir, basename + ".json")
        _atomic_write(json_path, self.json_text())
        paths.append(json_path)
        return paths


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _split_evenly(seq: list, k: int) -> list[list]:
    size, rem = divmod(len(seq), k)
    chunks, start = [], 0
    for i in range(k):
        stop = start + size + (1 if i < rem else 0)
        if stop > start:
            chunks.append(seq[start:stop])
        start = stop
    return chunks


def _chunk_worker(args) -> tuple[list[dict], list[dict]]:
    raw, items = args
    cfg = parse_config(raw)
    records: list[dict] = []
    failures: list[dict] = []
    for item in items:
        try:
            records.extend(_run_item(cfg, item))
        except SolverError as exc:
            failures.append({"item": str(item), "error": str(exc)})
    return records, failures


def run_experiment(cfg: ExperimentConfig) -> EnsembleReport:
    """Dispatch trials (possibly across worker processes) and aggregate.

    Identical (config, seed) produce identical per-trial records for any
    worker count; output files are written separately via
    ``EnsembleReport.write`` (atomically, temp-then-rename).
    """
    start = time.monotonic()
    work = _work_list(cfg)
    records: list[dict] = []
    failures: list[dict] = []

    if cfg.workers <= 1 or len(work) <= 1:
        records, failures = _chunk_worker((cfg.raw, work))
    else:
        chunks = _split_evenly(work, min(cfg.workers * 4, len(work)))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            # chunk results come back in submission order, so records are
            # identical for every worker count
            for recs, fails in pool.map(
                _chunk_worker, [(cfg.raw, chunk) for chunk in chunks]
            ):
                records.extend(recs)
                failures.extend(fails)

    total_items = len(work)
    if total_items and len(failures) > FAILURE_BUDGET * total_items:
        raise FailureBudgetError(
            f"{len(failures)} of {total_items} trials failed "
            f"(budget {FAILURE_BUDGET:.0%})"
        )

    aggregates = aggregate(cfg.kind, records, cfg)
    return EnsembleReport(
        kind=cfg.kind,
        schema_version=SCHEMA_VERSION,
        config=cfg.raw,
        records=records,
        aggregates=aggregates,
        n_failed=len(failures),
        failures=failures,
        runtime_seconds=time.monotonic() - start,
    )
