"""Declarative sweeps, power-split optimization and oracle validation.

A spec file is TOML::

    [system]            # base configuration
    snr_db = 20.0
    a2 = 0.01
    m = 5.0             # every link, unless overridden per link
    c = 3.0             # m_s = c m + 1 unless m_s is given
    [system.sr]         # optional per-link overrides: m, m_s, c, gain
    m = 2.0

    [numerics]          # see NumericsPolicy
    [monte_carlo]       # n_samples, seed, workers

    [[sweep]]           # any number of blocks, one CSV each
    axis = "snr_db"
    values = [0, 10, 20]        # or range = [start, stop, step]
    methods = ["noma_exact", "oma_exact"]
    output = "out.csv"
    set = { m = 1.0 }           # block-level overrides of [system]

    [[optimize]]        # power-split search, one CSV each
    axis = "m_sr"
    values = [1, 2, 3]
    output = "opt.csv"

SNRs are in dB only here; they are converted to linear before any
library call.
"""

from __future__ import annotations

import copy
import csv
import io
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import optimize as sopt

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import capacity_noma, capacity_oma, oracles
from .errors import DomainError, FsnomaError
from .fading import FadingLink, LinkTriple
from .model import CapacityEstimate, NumericsPolicy, SystemConfig, db_to_linear, nats_to_capacity
from .oracles import McSettings
from .specfun import ContourControl, SeriesControl

__all__ = [
    "SpecError",
    "SweepBlock",
    "SweepSpec",
    "COLUMNS",
    "AXES",
    "METHOD_NAMES",
    "load_spec",
    "parse_spec",
    "build_config",
    "run_sweep",
    "write_csv",
    "optimize_a2",
    "run_optimize",
    "validate",
    "worker_count",
]

COLUMNS = ("axis_name", "axis_value", "method", "capacity_bits_s_hz", "error",
           "n_samples_or_terms", "wall_ms", "status")
OPT_COLUMNS = COLUMNS + ("a2_opt",)
AXES = ("snr_db", "a2", "a1", "m_all", "m_sr", "m_s_sr", "m_s_rd", "m_s_sd")
METHOD_NAMES = ("noma_exact", "noma_asym", "oma_exact", "oma_asym", "noma_mc", "oma_mc")
WORKERS_ENV = "FSNOMA_WORKERS"
_LINKS = ("sr", "rd", "sd")


class SpecError(DomainError):
    """Malformed or inconsistent spec file."""


# ------------------------------------------------------------- spec model

_DEFAULT_SYSTEM = {"snr_db": 20.0, "a2": 0.01, "m": 5.0, "c": 3.0}
_DEFAULT_NUMERICS = {
    "cap_tol": 1e-5, "quad_tol": 1e-8, "appell_rel_tol": 1e-12, "sum_nodes": 96,
    "series_max_terms": 100000, "series_rel_tol": 1e-10, "series_abs_tol": 1e-300,
    "contour_nodes": 2048, "contour_half_height": 40.0, "contour_shift": 0.0,
}
_DEFAULT_MC = {"n_samples": 1_000_000, "seed": 20190901, "workers": 1}


@dataclass(frozen=True)
class SweepBlock:
    """One grid: an axis, its values, the methods and a destination."""

    axis: str
    values: tuple
    methods: tuple
    output: str
    name: str = ""
    overrides: Mapping[str, Any] = field(default_factory=dict)
    kind: str = "sweep"


@dataclass
class SweepSpec:
    """Resolved spec file: base sections plus sweep/optimize blocks."""

    system: dict
    numerics: dict
    monte_carlo: dict
    blocks: list
    timing: bool = False
    source: str = ""

    def policy(self) -> NumericsPolicy:
        n = self.numerics
        return NumericsPolicy(
            series=SeriesControl(int(n["series_max_terms"]), float(n["series_rel_tol"]),
                                 float(n["series_abs_tol"])),
            contour=ContourControl(int(n["contour_nodes"]), float(n["contour_shift"]),
                                   float(n["contour_half_height"])),
            cap_tol=float(n["cap_tol"]), quad_tol=float(n["quad_tol"]),
            appell_rel_tol=float(n["appell_rel_tol"]), sum_nodes=int(n["sum_nodes"]))

    def mc(self) -> McSettings:
        m = self.monte_carlo
        return McSettings(int(m["n_samples"]), int(m["seed"]), int(m["workers"]))

    def resolved(self) -> dict:
        """Plain-data view of every setting, for echoing."""
        return {
            "system": self.system,
            "numerics": self.numerics,
            "monte_carlo": self.monte_carlo,
            "output": {"timing": self.timing},
            "blocks": [
                {"kind": b.kind, "name": b.name, "axis": b.axis, "values": list(b.values),
                 "methods": list(b.methods), "output": b.output, "set": dict(b.overrides)}
                for b in self.blocks
            ],
        }


def _merge(base: dict, extra: Mapping, where: str) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, Mapping):
            if k not in _LINKS:
                raise SpecError(f"unexpected table {where}.{k}")
            cur = dict(out.get(k, {}))
            for kk, vv in v.items():
                if kk not in ("m", "m_s", "c", "gain"):
                    raise SpecError(f"unknown link key {where}.{k}.{kk}")
                cur[kk] = vv
            out[k] = cur
        else:
            out[k] = v
    return out


def _check_keys(table: Mapping, allowed, where: str):
    bad = set(table) - set(allowed)
    if bad:
        raise SpecError(f"unknown key(s) in [{where}]: {', '.join(sorted(bad))}")


def _axis_values(blk: Mapping, where: str) -> tuple:
    if "values" in blk and "range" in blk:
        raise SpecError(f"{where}: give either values or range")
    if "range" in blk:
        r = blk["range"]
        if len(r) != 3 or not r[2] > 0:
            raise SpecError(f"{where}: range must be [start, stop, step] with step > 0")
        n = int(math.floor((r[1] - r[0]) / r[2] + 1e-9)) + 1
        vals = [round(r[0] + i * r[2], 12) for i in range(n)]
    else:
        vals = blk.get("values")
    if not vals:
        raise SpecError(f"{where}: axis values must be a non-empty list")
    vals = tuple(float(v) for v in vals)
    if any(not math.isfinite(v) for v in vals):
        raise SpecError(f"{where}: axis values must be finite")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise SpecError(f"{where}: axis values must be strictly increasing")
    return vals


def parse_spec(data: Mapping, source: str = "") -> SweepSpec:
    """Validate a decoded TOML mapping and fill in defaults."""
    _check_keys(data, ("system", "numerics", "monte_carlo", "output", "sweep", "optimize"), "top")
    system = _merge(_DEFAULT_SYSTEM, data.get("system", {}), "system")
    _check_keys(system, list(_DEFAULT_SYSTEM) + list(_LINKS), "system")
    numerics = dict(_DEFAULT_NUMERICS)
    _check_keys(data.get("numerics", {}), _DEFAULT_NUMERICS, "numerics")
    numerics.update(data.get("numerics", {}))
    mc = dict(_DEFAULT_MC)
    _check_keys(data.get("monte_carlo", {}), _DEFAULT_MC, "monte_carlo")
    mc.update(data.get("monte_carlo", {}))
    out = data.get("output", {})
    _check_keys(out, ("timing",), "output")
    blocks = []
    for kind in ("sweep", "optimize"):
        for i, blk in enumerate(data.get(kind, [])):
            where = f"{kind}[{i}]"
            _check_keys(blk, ("name", "axis", "values", "range", "methods", "output", "set"), where)
            axis = blk.get("axis")
            if axis not in AXES:
                raise SpecError(f"{where}: axis must be one of {', '.join(AXES)}")
            vals = _axis_values(blk, where)
            if kind == "sweep":
                methods = tuple(blk.get("methods", ()))
                if not methods or any(m not in METHOD_NAMES for m in methods):
                    raise SpecError(f"{where}: methods must be a non-empty subset of "
                                    f"{', '.join(METHOD_NAMES)}")
                if len(set(methods)) != len(methods):
                    raise SpecError(f"{where}: duplicate methods")
            else:
                methods = ("noma_max", "oma_exact")
                if axis in ("a1", "a2"):
                    raise SpecError(f"{where}: cannot optimize the power split while sweeping it")
            if axis == "a2" and any(not 0 < v < 0.5 for v in vals):
                raise SpecError(f"{where}: a2 values must lie in (0, 0.5)")
            if axis == "a1" and any(not 0.5 < v < 1 for v in vals):
                raise SpecError(f"{where}: a1 values must lie in (0.5, 1)")
            if "output" not in blk:
                raise SpecError(f"{where}: output path missing")
            overrides = blk.get("set", {})
            _check_keys(overrides, list(_DEFAULT_SYSTEM) + list(_LINKS), f"{where}.set")
            blocks.append(SweepBlock(axis, vals, methods, str(blk["output"]),
                                     str(blk.get("name", f"{kind}{i}")), dict(overrides), kind))
    spec = SweepSpec(system, numerics, mc, blocks, bool(out.get("timing", False)), source)
    try:
        spec.policy()
        spec.mc()
        build_config(spec.system)
    except FsnomaError as exc:
        raise SpecError(f"invalid base configuration: {exc}") from exc
    return spec


def load_spec(path: str | os.PathLike) -> SweepSpec:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from exc
    return parse_spec(data, str(path))


def apply_override(spec: SweepSpec, key: str, raw: str) -> None:
    """Apply ``section.key=value`` from the command line (value parsed as TOML)."""
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    parts = key.split(".")
    sections = {"system": spec.system, "numerics": spec.numerics, "monte_carlo": spec.monte_carlo}
    if parts[0] not in sections or len(parts) < 2:
        raise SpecError(f"override key must look like system.a2 or system.sr.m, got {key!r}")
    table = sections[parts[0]]
    if parts[0] == "numerics" and parts[1] not in _DEFAULT_NUMERICS:
        raise SpecError(f"unknown numerics key {parts[1]!r}")
    if parts[0] == "monte_carlo" and parts[1] not in _DEFAULT_MC:
        raise SpecError(f"unknown monte_carlo key {parts[1]!r}")
    if len(parts) == 3 and parts[1] in _LINKS:
        table.setdefault(parts[1], {})[parts[2]] = value
    elif len(parts) == 2:
        table[parts[1]] = value
    else:
        raise SpecError(f"cannot apply override {key!r}")


# ------------------------------------------------------- config building

def _link(system: Mapping, name: str) -> FadingLink:
    own = system.get(name, {})
    m = float(own.get("m", system["m"]))
    if "m_s" in own:
        m_s = float(own["m_s"])
    else:
        m_s = float(own.get("c", system["c"])) * m + 1.0
    return FadingLink(m, m_s, float(own.get("gain", 1.0)))


def build_config(system: Mapping) -> SystemConfig:
    """Turn a ``[system]`` table into a :class:`SystemConfig` (dB to linear here)."""
    links = LinkTriple(*(_link(system, n) for n in _LINKS))
    return SystemConfig(links, float(system["a2"]), db_to_linear(float(system["snr_db"])))


def _with_axis(system: dict, axis: str, value: float) -> dict:
    s = copy.deepcopy(system)
    if axis in ("snr_db", "a2"):
        s[axis] = value
    elif axis == "a1":
        s["a2"] = 1.0 - value
    elif axis == "m_all":
        s["m"] = value
        for n in _LINKS:
            if "m" in s.get(n, {}):
                s[n]["m"] = value
    elif axis == "m_sr":
        s.setdefault("sr", {})["m"] = value
    elif axis.startswith("m_s_"):
        s.setdefault(axis[4:], {})["m_s"] = value
    else:  # pragma: no cover - parse_spec rejects these
        raise SpecError(axis)
    return s


def block_system(spec: SweepSpec, blk: SweepBlock) -> dict:
    return _merge(spec.system, blk.overrides, blk.name)


def worker_count(default: int = 1) -> int:
    """Worker count, overridden by the ``FSNOMA_WORKERS`` environment variable."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return max(1, int(default))
    try:
        n = int(raw)
    except ValueError as exc:
        raise SpecError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise SpecError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def point_seed(master_seed: int, index: int) -> int:
    """Per-grid-point MC seed derived from ``(master_seed, index)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


# -------------------------------------------------------------- evaluation

def _evaluate(method: str, cfg: SystemConfig, pol: NumericsPolicy, mc: McSettings):
    """Returns (value, error, n, status)."""
    if method in ("noma_mc", "oma_mc"):
        fn = oracles.simulate_noma if method == "noma_mc" else oracles.simulate_oma
        r = fn(cfg, mc)
        return r.mean, r.ci95, r.n_samples, "ok"
    fn = {
        "noma_exact": capacity_noma.c_noma_exact,
        "noma_asym": capacity_noma.c_noma_asymptotic,
        "oma_exact": capacity_oma.c_oma_exact,
        "oma_asym": capacity_oma.c_oma_asymptotic,
    }[method]
    est: CapacityEstimate = fn(cfg, pol)
    status = "ok" if est.method != "quadrature" else "ok:quadrature-fallback"
    return est.value, est.error, est.n_terms, status


def _point_job(args):
    """Evaluate every method at one grid point (top-level for pickling)."""
    system, axis, value, methods, pol, mc, timing = args
    rows = []
    try:
        cfg = build_config(_with_axis(system, axis, value))
    except FsnomaError as exc:
        return [_row(axis, value, m, math.nan, math.nan, 0, None, f"error: {exc}") for m in methods]
    for m in methods:
        t0 = time.perf_counter()
        try:
            val, err, n, status = _evaluate(m, cfg, pol, mc)
        except FsnomaError as exc:
            val, err, n, status = math.nan, math.nan, 0, f"error: {type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1e3 if timing else None
        rows.append(_row(axis, value, m, val, err, n, ms, status))
    return rows


def _row(axis, value, method, val, err, n, ms, status) -> dict:
    return {"axis_name": axis, "axis_value": value, "method": method,
            "capacity_bits_s_hz": val, "error": err, "n_samples_or_terms": int(n),
            "wall_ms": ms, "status": status}


def _map(fn: Callable, jobs: Sequence, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_sweep(spec: SweepSpec, block: SweepBlock, workers: int | None = None) -> list:
    """Evaluate one sweep block; rows sorted by ``(axis_value, method)``."""
    if block.kind != "sweep":
        raise SpecError("run_sweep needs a sweep block")
    pol, mc = spec.policy(), spec.mc()
    system = block_system(spec, block)
    workers = worker_count(mc.n_workers) if workers is None else workers
    jobs = []
    for idx, v in enumerate(block.values):
        mci = McSettings(mc.n_samples, point_seed(mc.master_seed, idx), mc.n_workers)
        jobs.append((system, block.axis, v, block.methods, pol, mci, spec.timing))
    rows = [r for part in _map(_point_job, jobs, workers) for r in part]
    rows.sort(key=lambda r: (r["axis_value"], r["method"]))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: Sequence[Mapping], path: str | os.PathLike,
              columns: Sequence[str] = COLUMNS) -> None:
    """Write rows atomically (temporary file in the same directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path: str | os.PathLike) -> list:
    """Inverse of :func:`write_csv`: numeric columns come back as numbers."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            for k in ("axis_value", "capacity_bits_s_hz", "error", "a2_opt"):
                if k in r:
                    r[k] = float(r[k]) if r[k] != "" else None
            r["n_samples_or_terms"] = int(r["n_samples_or_terms"])
            r["wall_ms"] = float(r["wall_ms"]) if r["wall_ms"] != "" else None
            out.append(r)
    return out


# ------------------------------------------------------------ optimization

@dataclass(frozen=True)
class A2Optimum:
    a2: float
    estimate: CapacityEstimate
    grid: tuple
    grid_values: tuple


def optimize_a2(cfg: SystemConfig, pol: NumericsPolicy = NumericsPolicy(),
                bounds: tuple = (1e-3, 0.5 - 1e-3), grid_points: int = 32,
                xtol: float = 1e-5) -> A2Optimum:
    """Maximize the exact NOMA sum rate over the power split ``a2``.

    A coarse grid of ``grid_points`` values brackets the maximum, then
    golden-section search refines it. The returned capacity is never
    below the grid maximum.

    Raises
    ------
    FsnomaError
        If any probe evaluation fails; the message names the probe.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not 0 < lo < hi < 0.5:
        raise DomainError("bounds must satisfy 0 < lo < hi < 0.5")
    cache = {}

    def value(a2: float) -> float:
        a2 = float(a2)
        if a2 not in cache:
            try:
                cache[a2] = capacity_noma.c_noma_exact(cfg.with_(a2=a2), pol)
            except FsnomaError as exc:
                raise type(exc)(f"evaluation failed at a2={a2!r}: {exc}") from exc
        return cache[a2].value

    grid = np.linspace(lo, hi, grid_points)
    vals = [value(a) for a in grid]
    i = int(np.argmax(vals))
    best_a = float(grid[i])
    if 0 < i < len(grid) - 1 and vals[i] > max(vals[i - 1], vals[i + 1]):
        res = sopt.minimize_scalar(lambda a: -value(min(max(a, lo), hi)), method="golden",
                                   bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                   options={"xtol": xtol})
        cand = min(max(float(res.x), lo), hi)
    else:
        j = min(max(i, 1), len(grid) - 1)
        res = sopt.minimize_scalar(lambda a: -value(a), method="bounded",
                                   bounds=(grid[j - 1], grid[j]), options={"xatol": xtol})
        cand = float(res.x)
    if value(cand) > vals[i]:
        best_a = cand
    return A2Optimum(best_a, cache[best_a], tuple(float(g) for g in grid), tuple(vals))


def _opt_job(args):
    system, axis, value, pol, timing = args
    try:
        cfg = build_config(_with_axis(system, axis, value))
    except FsnomaError as exc:
        return [_row(axis, value, m, math.nan, math.nan, 0, None, f"error: {exc}")
                for m in ("noma_max", "oma_exact")]
    rows = []
    t0 = time.perf_counter()
    try:
        opt = optimize_a2(cfg, pol)
        r = _row(axis, value, "noma_max", opt.estimate.value, opt.estimate.error,
                 len(opt.grid), None, "ok")
        r["a2_opt"] = opt.a2
    except FsnomaError as exc:
        r = _row(axis, value, "noma_max", math.nan, math.nan, 0, None, f"error: {exc}")
    r["wall_ms"] = (time.perf_counter() - t0) * 1e3 if timing else None
    rows.append(r)
    t0 = time.perf_counter()
    try:
        e = capacity_oma.c_oma_exact(cfg, pol)
        r = _row(axis, value, "oma_exact", e.value, e.error, e.n_terms, None, "ok")
    except FsnomaError as exc:
        r = _row(axis, value, "oma_exact", math.nan, math.nan, 0, None, f"error: {exc}")
    r["wall_ms"] = (time.perf_counter() - t0) * 1e3 if timing else None
    rows.append(r)
    return rows


def run_optimize(spec: SweepSpec, block: SweepBlock, workers: int | None = None) -> list:
    """Optimized NOMA (``noma_max``) and OMA rows for each axis value."""
    if block.kind != "optimize":
        raise SpecError("run_optimize needs an optimize block")
    pol = spec.policy()
    system = block_system(spec, block)
    workers = worker_count(spec.mc().n_workers) if workers is None else workers
    jobs = [(system, block.axis, v, pol, spec.timing) for v in block.values]
    rows = [r for part in _map(_opt_job, jobs, workers) for r in part]
    rows.sort(key=lambda r: (r["axis_value"], r["method"]))
    return rows


# -------------------------------------------------------------- validation

@dataclass(frozen=True)
class Check:
    name: str
    closed: float
    quadrature: float | None
    mc: float | None
    tolerance: str
    passed: bool

    def line(self) -> str:
        f = lambda v: "" if v is None else repr(float(v))
        return ",".join([self.name, f(self.closed), f(self.quadrature), f(self.mc),
                         self.tolerance, "PASS" if self.passed else "FAIL"])


CHECK_HEADER = "name,closed,quadrature,mc,tolerance,result"


def _mc_ok(closed: float, mean: float, ci: float) -> bool:
    return abs(closed - mean) <= max(0.01 * abs(mean), ci)


def validate(cfg: SystemConfig, pol: NumericsPolicy, mc: McSettings) -> list:
    """Oracle-triangle checks; one :class:`Check` per registered check.

    NOMA terms: closed form vs quadrature (``cap_tol``) and vs Monte
    Carlo (``max(1 %, CI)``). OMA: each series integral vs quadrature
    in capacity units, and the capacity vs quadrature and Monte Carlo.
    The list of checks depends only on the configuration.
    """
    out = []
    tol = pol.cap_tol
    k = nats_to_capacity(1.0)
    quad = oracles.noma_terms_quadrature(cfg, pol)
    sim = oracles.simulate_noma(cfg, mc)
    parts = {"c11": capacity_noma.c11_exact(cfg, pol), "c12": capacity_noma.c12_exact(cfg, pol),
             "c2": capacity_noma.c2_exact(cfg, pol)}
    for name, est in parts.items():
        mean, ci = sim.per_term[name]
        out.append(Check(f"noma_{name}_vs_quadrature", est.value, quad[name], None, f"{tol:g}",
                         abs(est.value - quad[name]) <= tol))
        out.append(Check(f"noma_{name}_vs_mc", est.value, None, mean, f"max(1%,{ci:.3g})",
                         _mc_ok(est.value, mean, ci)))
    total = math.fsum([parts["c11"].value, -parts["c12"].value, parts["c2"].value])
    out.append(Check("noma_total_vs_mc", total, quad["total"], sim.mean,
                     f"max(1%,{sim.ci95:.3g})", _mc_ok(total, sim.mean, sim.ci95)))
    try:
        terms = capacity_oma.oma_terms(cfg, pol)
    except FsnomaError:
        terms = None
    if terms is not None:
        jq = oracles.oma_j_quadrature(cfg)
        scale = {"J2": terms.upsilon, "J3": terms.psi,
                 "J4": terms.psi * terms.upsilon}
        for name in ("J1", "J2", "J3", "J4"):
            series = getattr(terms, name)
            if series is None:
                continue
            s = k * scale.get(name, 1.0)
            out.append(Check(f"oma_{name}_vs_quadrature", s * series, s * jq[name], None,
                             f"{tol:g}", abs(s * (series - jq[name])) <= tol))
    oma = capacity_oma.c_oma_exact(cfg, pol)
    oq = oracles.oma_quadrature(cfg, pol)
    osim = oracles.simulate_oma(cfg, mc)
    out.append(Check("oma_total_vs_quadrature", oma.value, oq, None, f"{tol:g}",
                     abs(oma.value - oq) <= tol))
    out.append(Check("oma_total_vs_mc", oma.value, None, osim.mean, f"max(1%,{osim.ci95:.3g})",
                     _mc_ok(oma.value, osim.mean, osim.ci95)))
    return out
