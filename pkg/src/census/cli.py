"""Job runner: ``census <command> --job <file>``.

A job is a TOML document::

    command = "count"
    group = "gamma2"
    class = "A*B"
    t_max = 16

    [output]
    path = "ab.csv"
    format = "csv"

Exit codes: 0 success, 2 parse error, 3 invariant failure, 4 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analysis, chc, counting, verify
from .groups import free, heisenberg
from .groups.fuchsian import GroupSpec, ResourceCapError, SaturationError as BallSaturationError, gamma2, group_from_matrices
from .hyp_core import DomainError, KindError

COMMANDS = ("count", "equidist", "growth", "verify-laws", "chc-check")
FORMATS = ("csv", "json")
T_MAX_CAP = 24.0
N_MAX_CAP = {"free": 24, "heisenberg": 160}
CSV_HEADER = ("threshold", "count_direct", "count_geometric", "c_hat")
LAW_TOL = 1e-9
GAP_TOL = 1e-3
CHC_SPREAD_TOL = 1e-10

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_CAP = 0, 2, 3, 4


class JobParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class InlineGroup:
    name: str
    generators: tuple
    labels: tuple | None = None
    genus: int | None = None
    punctures: int | None = None
    torsion_free: bool = True
    free_basis: bool = False
    cusp_sinh_half_length: float | None = None


@dataclass(frozen=True)
class JobSpec:
    command: str
    group: str | InlineGroup | None = None
    class_: str | tuple | None = None
    basepoint: tuple = (0.0, 1.0)
    t_max: float | None = None
    n_max: int | None = None
    step: float = 0.5
    bins: int = 16
    margin: float | None = None
    seed: int = 0
    workers: int = 1
    samples: int = 10_000
    window: tuple | None = None
    compare: tuple | None = None
    horoball: float | None = None
    allow_large: bool = False
    output_path: str | None = None
    output_format: str = "json"

    @property
    def group_family(self) -> str:
        if isinstance(self.group, InlineGroup):
            return "fuchsian"
        name = (self.group or "").split(":")[0]
        return name if name in ("free", "heisenberg") else "fuchsian"


# -- parsing -----------------------------------------------------------------

# toml key -> (field, accepted python types)
_TOP_KEYS = {
    "command": ("command", (str,)),
    "group": ("group", (str, dict)),
    "class": ("class_", (str, list)),
    "basepoint": ("basepoint", (list,)),
    "t_max": ("t_max", (int, float)),
    "n_max": ("n_max", (int,)),
    "step": ("step", (int, float)),
    "bins": ("bins", (int,)),
    "margin": ("margin", (int, float, str)),
    "seed": ("seed", (int,)),
    "workers": ("workers", (int,)),
    "samples": ("samples", (int,)),
    "window": ("window", (list,)),
    "compare": ("compare", (list,)),
    "horoball": ("horoball", (int, float)),
    "allow_large": ("allow_large", (bool,)),
    "output": (None, (dict,)),
}
_OUTPUT_KEYS = {"path": (str,), "format": (str,)}
_GROUP_KEYS = {
    "name": (str,),
    "generators": (list,),
    "labels": (list,),
    "genus": (int,),
    "punctures": (int,),
    "torsion_free": (bool,),
    "free_basis": (bool,),
    "cusp_sinh_half_length": (int, float),
}
_FLOAT_FIELDS = {"t_max", "step", "margin", "horoball"}


def _line_of(text: str, key: str, section: str | None = None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[\s*([A-Za-z0-9_.-]+)\s*\]", line)
        if m:
            current = m.group(1)
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", line):
            return no
        if section is None and current is None and re.match(rf"^{re.escape(key)}\s*=", line):
            return no
    if section is not None:
        for no, raw in enumerate(text.splitlines(), 1):
            if re.match(rf"^\[\s*{re.escape(section)}\s*\]", raw.strip()):
                return no
    return None


def _type_ok(value, types) -> bool:
    if isinstance(value, bool) and bool not in types:
        return False
    return isinstance(value, types)


def _check(table: dict, allowed: dict, text: str, section: str | None) -> None:
    for key, value in table.items():
        if key not in allowed:
            raise JobParseError(f"unknown key {key!r}" + (f" in [{section}]" if section else ""), _line_of(text, key, section))
        types = allowed[key][1] if section is None else allowed[key]
        if not _type_ok(value, types):
            raise JobParseError(
                f"key {key!r} has type {type(value).__name__}, expected {'/'.join(t.__name__ for t in types)}",
                _line_of(text, key, section),
            )


def _inline_group(table: dict, text: str) -> InlineGroup:
    _check(table, _GROUP_KEYS, text, "group")
    if "generators" not in table:
        raise JobParseError("inline group needs 'generators'", _line_of(text, "generators", "group"))
    gens = table["generators"]
    if not all(isinstance(g, list) and len(g) == 4 and all(_type_ok(x, (int,)) for x in g) for g in gens):
        raise JobParseError("generators must be lists of four integers", _line_of(text, "generators", "group"))
    labels = table.get("labels")
    if labels is not None and (len(labels) != len(gens) or not all(isinstance(x, str) for x in labels)):
        raise JobParseError("one string label per generator", _line_of(text, "labels", "group"))
    return InlineGroup(
        name=table.get("name", "inline"),
        generators=tuple(tuple(g) for g in gens),
        labels=None if labels is None else tuple(labels),
        genus=table.get("genus"),
        punctures=table.get("punctures"),
        torsion_free=table.get("torsion_free", True),
        free_basis=table.get("free_basis", False),
        cusp_sinh_half_length=None if "cusp_sinh_half_length" not in table else float(table["cusp_sinh_half_length"]),
    )


def _number_pair(value, key: str, text: str, length: int | None = 2) -> tuple:
    if not all(_type_ok(x, (int, float)) for x in value) or (length is not None and len(value) != length):
        what = f"{length} numbers" if length else "numbers"
        raise JobParseError(f"{key} must be a list of {what}", _line_of(text, key))
    return tuple(float(x) for x in value)


def parse_job(text: str, command: str | None = None, overrides: dict | None = None) -> JobSpec:
    """Parse and validate a job; ``overrides`` use TOML key names."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise JobParseError(str(exc), int(m.group(1)) if m else None) from None
    for key, value in (overrides or {}).items():
        if value is not None:
            if key in ("path", "format"):
                raw.setdefault("output", {})[key] = value
            else:
                raw[key] = value
    if command is not None:
        if "command" in raw and raw["command"] != command:
            raise JobParseError(f"job is a {raw['command']!r} job, not {command!r}", _line_of(text, "command"))
        raw["command"] = command
    _check(raw, _TOP_KEYS, text, None)
    out = raw.pop("output", {})
    _check(out, _OUTPUT_KEYS, text, "output")
    if "command" not in raw:
        raise JobParseError("missing required key 'command'")
    if raw["command"] not in COMMANDS:
        raise JobParseError(f"unknown command {raw['command']!r}", _line_of(text, "command"))
    kw: dict = {}
    for key, value in raw.items():
        name = _TOP_KEYS[key][0]
        if key == "group" and isinstance(value, dict):
            value = _inline_group(value, text)
        elif key == "class" and isinstance(value, list):
            if len(value) != 4 or not all(_type_ok(x, (int,)) for x in value):
                raise JobParseError("inline class must be four integers", _line_of(text, "class"))
            value = tuple(value)
        elif key == "basepoint":
            value = _number_pair(value, key, text)
            if not value[1] > 0:
                raise JobParseError("basepoint must lie in the upper half-plane", _line_of(text, key))
        elif key == "window":
            value = _number_pair(value, key, text)
        elif key == "compare":
            value = _number_pair(value, key, text, None)
        elif key == "margin":
            if isinstance(value, str):
                if value != "auto":
                    raise JobParseError("margin must be a number or \"auto\"", _line_of(text, key))
                value = None
            else:
                value = float(value)
        elif name in _FLOAT_FIELDS:
            value = float(value)
        kw[name] = value
    if "format" in out:
        if out["format"] not in FORMATS:
            raise JobParseError(f"format must be one of {FORMATS}", _line_of(text, "format", "output"))
        kw["output_format"] = out["format"]
    if "path" in out:
        kw["output_path"] = out["path"]
    spec = JobSpec(**kw)
    _validate(spec, text)
    return spec


def _validate(spec: JobSpec, text: str) -> None:
    cmd = spec.command

    def need(key: str, value) -> None:
        if value is None:
            raise JobParseError(f"{cmd} job needs '{key}'")

    if spec.step <= 0:
        raise JobParseError("step must be positive", _line_of(text, "step"))
    if spec.bins < 1:
        raise JobParseError("bins must be at least 1", _line_of(text, "bins"))
    if spec.workers < 1:
        raise JobParseError("workers must be at least 1", _line_of(text, "workers"))
    if spec.samples < 1:
        raise JobParseError("samples must be at least 1", _line_of(text, "samples"))
    if spec.margin is not None and spec.margin < 0:
        raise JobParseError("margin must be nonnegative", _line_of(text, "margin"))
    if isinstance(spec.group, str):
        family, _, rank = spec.group.partition(":")
        if family in ("free", "heisenberg"):
            if not rank.isdigit() or int(rank) < (2 if family == "free" else 1):
                raise JobParseError(f"bad group {spec.group!r}", _line_of(text, "group"))
        elif spec.group != "gamma2":
            raise JobParseError(f"unknown group preset {spec.group!r}", _line_of(text, "group"))
    if cmd in ("count", "equidist", "growth"):
        need("group", spec.group)
        need("class", spec.class_)
    if cmd in ("count", "equidist") and spec.group_family != "fuchsian":
        raise JobParseError(f"{cmd} jobs need a Fuchsian group", _line_of(text, "group"))
    if cmd in ("count", "equidist") or (cmd == "growth" and spec.group_family == "fuchsian"):
        need("t_max", spec.t_max)
        if spec.t_max <= 0:
            raise JobParseError("t_max must be positive", _line_of(text, "t_max"))
        if spec.t_max > T_MAX_CAP and not spec.allow_large:
            raise JobParseError(
                f"t_max {spec.t_max} exceeds the safety cap {T_MAX_CAP}; set allow_large = true", _line_of(text, "t_max")
            )
    if cmd == "growth" and spec.group_family != "fuchsian":
        need("n_max", spec.n_max)
        cap = N_MAX_CAP[spec.group_family]
        if spec.n_max < 1:
            raise JobParseError("n_max must be positive", _line_of(text, "n_max"))
        if spec.n_max > cap and not spec.allow_large:
            raise JobParseError(f"n_max {spec.n_max} exceeds the safety cap {cap}", _line_of(text, "n_max"))
        if not isinstance(spec.class_, str):
            raise JobParseError("word-metric classes are given as words", _line_of(text, "class"))


def render(spec: JobSpec) -> str:
    """TOML text that parses back to ``spec``."""
    doc: dict = {"command": spec.command}
    if isinstance(spec.group, InlineGroup):
        g = {k: v for k, v in asdict(spec.group).items() if v is not None}
        g["generators"] = [list(x) for x in spec.group.generators]
        if spec.group.labels is not None:
            g["labels"] = list(spec.group.labels)
        doc["group"] = g
    elif spec.group is not None:
        doc["group"] = spec.group
    if spec.class_ is not None:
        doc["class"] = spec.class_ if isinstance(spec.class_, str) else list(spec.class_)
    doc["basepoint"] = list(spec.basepoint)
    for name in ("t_max", "n_max", "step", "bins", "seed", "workers", "samples", "horoball", "allow_large"):
        value = getattr(spec, name)
        if value is not None:
            doc[name] = value
    doc["margin"] = "auto" if spec.margin is None else spec.margin
    for name in ("window", "compare"):
        value = getattr(spec, name)
        if value is not None:
            doc[name] = list(value)
    out = {"format": spec.output_format}
    if spec.output_path is not None:
        out["path"] = spec.output_path
    doc["output"] = out
    return tomli_w.dumps(doc)


# -- running -------------------------------------------------------------------


@dataclass
class Report:
    command: str
    job: dict
    status: str = "ok"
    failures: list = field(default_factory=list)
    series: list | None = None
    histograms: dict | None = None
    fits: dict | None = None
    constants: dict | None = None
    checks: dict | None = None
    environment: dict = field(default_factory=dict)

    def fail(self, message: str) -> None:
        self.status = "failed"
        self.failures.append(message)

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def build_group(spec: JobSpec) -> GroupSpec:
    bp = complex(*spec.basepoint)
    if isinstance(spec.group, InlineGroup):
        g = spec.group
        lattice = {k: v for k, v in (("genus", g.genus), ("punctures", g.punctures)) if v is not None}
        return group_from_matrices(
            g.name,
            list(g.generators),
            list(g.labels) if g.labels else None,
            basepoint=bp,
            torsion_free=g.torsion_free,
            free_basis=g.free_basis,
            cusp_sinh_half_length=g.cusp_sinh_half_length,
            delta=1.0 if lattice else None,
            **lattice,
        )
    return gamma2(bp)


def _job_echo(spec: JobSpec) -> dict:
    # execution settings stay out of the report so it is byte-stable across them
    echo = tomllib.loads(render(spec))
    echo.pop("workers", None)
    echo.get("output", {}).pop("path", None)
    return echo


def _environment(spec: JobSpec, **extra) -> dict:
    env = {
        "threshold_tolerance": counting.THRESHOLD_TOL,
        "bfs_margin": counting.BFS_MARGIN,
        "bfs_quiet_layers": counting.BFS_LAYERS,
        "completeness_margin": "auto" if spec.margin is None else spec.margin,
    }
    env.update(extra)
    return env


def _default_window(spec: JobSpec, hi: float) -> tuple:
    if spec.window is not None:
        return spec.window
    return (max(0.0, hi - 6.0), hi)


def _series_rows(thresholds, direct, geometric, c_hat) -> list[dict]:
    return [
        {"threshold": t, "count_direct": a, "count_geometric": b, "c_hat": c}
        for t, a, b, c in zip(thresholds, direct, geometric, c_hat)
    ]


def _fit(series, window) -> dict:
    try:
        f = analysis.fit_growth_rate(series, window)
    except analysis.InsufficientDataError as exc:
        return {"window": list(window), "error": str(exc)}
    return {"window": list(f.window), "slope": f.slope, "intercept": f.intercept, "residual": f.residual, "points": f.points}


def _count_report(spec: JobSpec, report: Report, with_directions: bool):
    group = build_group(spec)
    delta = group.delta or 1.0
    kw = dict(margin=spec.margin, workers=spec.workers, directions=with_directions)
    if spec.horoball is not None:
        kw["horoball"] = spec.horoball
    direct, geo = counting.count_both(group, spec.class_, spec.t_max, spec.step, **kw)
    dser, sample = (direct if with_directions else (direct, None))
    c_hat = [n * math.exp(-delta * t / 2.0) for t, n in zip(dser.thresholds, dser.counts)]
    report.series = _series_rows(dser.thresholds, dser.counts, geo.counts, c_hat)
    window = _default_window(spec, dser.thresholds[-1])
    report.fits = {"growth": _fit(dser, window), "target_slope": delta / 2.0}
    rc = counting.resolve_class(group, spec.class_, **({"horoball": spec.horoball} if spec.horoball is not None else {}))
    consts: dict = {"kind": rc.inv.kind.value, "length": rc.inv.length, "angle": rc.inv.angle}
    try:
        emp = analysis.empirical_constant(dser, delta, window)
        consts["empirical"] = {"tail_mean": emp.tail_mean, "tail_min": emp.tail_min, "tail_max": emp.tail_max}
    except analysis.InsufficientDataError as exc:
        consts["empirical"] = {"error": str(exc)}
    if group.has_lattice_data:
        th = analysis.theoretical_constant(group, rc.inv, m=rc.power)
        consts["theoretical"] = {"value": th.value, "formula": th.formula, "inputs": th.inputs}
        if "tail_mean" in consts["empirical"]:
            consts["relative_deviation"] = consts["empirical"]["tail_mean"] / th.value - 1.0
    report.constants = consts
    report.environment = _environment(spec, radius=dser.meta["radius"], saturation=dser.meta["saturation"], engines_agree=True)
    return dser, sample


def run_count(spec: JobSpec, report: Report) -> None:
    _count_report(spec, report, with_directions=False)


def run_equidist(spec: JobSpec, report: Report) -> None:
    _, sample = _count_report(spec, report, with_directions=True)
    compare = spec.compare or tuple(t for t in (spec.t_max - 6.0, spec.t_max) if t > 0)
    hists, stats = {}, {}
    for t in compare:
        sub = sample.restrict(t)
        key = f"{t:g}"
        if not sub.angles:
            report.fail(f"no conjugates within threshold {key}")
            continue
        h = counting.direction_measure(sub, spec.bins)
        d = analysis.discrepancy_stats(h)
        hists[key] = {"counts": list(h.counts), "edges": list(h.edges), "total": h.total}
        stats[key] = {"tv": d.tv, "sup_cdf": d.sup_cdf, "chi2": d.chi2}
    report.histograms = hists
    keys = list(stats)
    trend = {}
    for stat in ("tv", "sup_cdf", "chi2"):
        vals = [stats[k][stat] for k in keys]
        trend[stat] = all(b < a for a, b in zip(vals, vals[1:]))
    report.checks = {"discrepancy": stats, "strictly_decreasing": trend}


def _free_rank(spec: JobSpec) -> int:
    return int(spec.group.split(":")[1])


def run_growth(spec: JobSpec, report: Report) -> None:
    family = spec.group_family
    if family == "fuchsian":
        run_count(spec, report)
        return
    rank = _free_rank(spec)
    if family == "free":
        labels = {chr(ord("a") + i): i + 1 for i in range(rank)}
        cls = free.cyclic_data(free.parse_word(spec.class_, labels))
        bfs = free.free_conj_series(rank, cls, spec.n_max)
        closed = [free.free_conj_count_closed(rank, cls, n) for n in range(spec.n_max + 1)]
        literal = [free.free_conj_count_literal(rank, cls, n) for n in range(spec.n_max + 1)]
        base = 2 * rank - 1
        c_hat = [c / base ** (n / 2.0) for n, c in enumerate(bfs)]
        report.series = _series_rows(list(range(spec.n_max + 1)), bfs, closed, c_hat)
        if bfs != closed:
            report.fail("exhaustive counts disagree with the closed form")
        series = counting.CountSeries(tuple(float(n) for n in range(spec.n_max + 1)), tuple(bfs))
        window = spec.window or (max(float(cls.length), spec.n_max - 6.0), float(spec.n_max))
        report.fits = {"growth": _fit(series, window), "target_slope": math.log(base) / 2.0}
        mism = [n for n in range(spec.n_max + 1) if literal[n] != bfs[n]]
        report.checks = {
            "class": {"core": list(cls.core), "length": cls.length, "m": cls.m, "power": cls.power},
            "closed_form_matches": bfs == closed,
            "literal_formula": literal,
            "literal_formula_matches": not mism,
            "literal_formula_mismatch_at": mism,
        }
        return
    hspec = heisenberg.HeisenbergSpec(rank)
    names = [f"x{i + 1}" for i in range(rank)] + [f"y{i + 1}" for i in range(rank)]
    if rank == 1:
        names = ["x", "y"]
    word = free.parse_word(spec.class_, {n: i + 1 for i, n in enumerate(names)})
    g0 = hspec.identity()
    for x in word:
        g = hspec.generators[abs(x) - 1]
        g0 = hspec.multiply(g0, g if x > 0 else hspec.invert(g))
    counts = heisenberg.heis_conj_series(hspec, g0, spec.n_max)
    ns = list(range(spec.n_max + 1))
    c_hat = [c / n**2 if n else 0.0 for n, c in zip(ns, counts)]
    report.series = _series_rows(ns, counts, [None] * len(ns), c_hat)
    doubling = {n: counts[2 * n] / counts[n] for n in ns if 2 * n <= spec.n_max and counts[n] > 0}
    lo = spec.window[0] if spec.window else min(10, spec.n_max)
    band = [c_hat[n] for n in ns if n >= lo]
    report.checks = {
        "element": {"a": list(g0.a), "z": g0.z},
        "ratio_n2_min": min(band) if band else None,
        "ratio_n2_max": max(band) if band else None,
        "doubling_ratios": {str(k): v for k, v in doubling.items()},
    }
    report.fits = {"growth": "polynomial", "degree": 2 * rank}


def run_verify_laws(spec: JobSpec, report: Report) -> None:
    laws = verify.check_all_laws(spec.seed, spec.samples)
    bounds = verify.check_bounds(spec.seed, spec.samples)
    report.checks = {
        "laws": {c.law: {"samples": c.samples, "max_rel_error": c.max_rel_error} for c in laws},
        "bounds": {"samples": bounds.samples, "violations": bounds.violations, "gap_error_at_s10": bounds.gap_error},
    }
    report.environment = {"law_tolerance": LAW_TOL, "gap_tolerance": GAP_TOL, "seed": spec.seed}
    for c in laws:
        if not c.max_rel_error <= LAW_TOL:
            report.fail(f"{c.law}: relative error {c.max_rel_error:.3e} > {LAW_TOL}")
    if bounds.violations:
        report.fail(f"{bounds.violations} bound violations")
    if not bounds.gap_error <= GAP_TOL:
        report.fail(f"bound gap error {bounds.gap_error:.3e} > {GAP_TOL}")


def chc_checks(seed: int = 0, points: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    s = 2.0
    sample = chc.random_horosphere_points(s, points, rng, scale=3.0)
    vert = chc.HeisTranslation.vertical(float(rng.uniform(0.5, 3.0)))
    vmin, vmax, _ = chc.displacement_on_horosphere(vert, s, sample)
    z = complex(np.exp(1j * rng.uniform(0, 2 * math.pi)))
    horiz = chc.HeisTranslation.horizontal([z], float(rng.uniform(-1, 1)))
    rot = chc.ParabolicMatrix.rotation(np.array([[np.exp(1j * rng.uniform(0.3, 3.0))]]), [0j])
    scales = (1.0, 10.0, 100.0)
    # horizontal samples orthogonal (in the symplectic sense) to z, where the linear term is largest
    nonvert = [chc.displacement_on_horosphere(horiz, s, [chc.horosphere_point(s, [1j * r * z])])[0] for r in scales]
    rotational = [chc.displacement_on_horosphere(rot, s, [chc.horosphere_point(s, [r])])[0] for r in scales]
    iso_err = 0.0
    for _ in range(200):
        p, q = chc.random_horosphere_points(float(rng.uniform(0.5, 4)), 2, rng, scale=2.0)
        zz = complex(rng.normal(), rng.normal())
        T = chc.HeisTranslation.horizontal([zz], float(rng.normal()))
        d0 = chc.ch_dist(p, q)
        iso_err = max(iso_err, abs(chc.ch_dist(chc.heis_apply(T, p), chc.heis_apply(T, q)) - d0))
    return {
        "vertical_spread": vmax - vmin,
        "vertical_value": vmin,
        "scales": list(scales),
        "nonvertical": nonvert,
        "rotational": rotational,
        "isometry_error": iso_err,
    }


def run_chc_check(spec: JobSpec, report: Report) -> None:
    res = chc_checks(spec.seed)
    report.checks = res
    report.environment = {"spread_tolerance": CHC_SPREAD_TOL, "seed": spec.seed}
    if not res["vertical_spread"] <= CHC_SPREAD_TOL:
        report.fail("vertical translation is not uniform on the horosphere")
    for key in ("nonvertical", "rotational"):
        v = res[key]
        if not all(b > a for a, b in zip(v, v[1:])):
            report.fail(f"{key} displacement does not grow with |w|")
    if not res["isometry_error"] <= 1e-10:
        report.fail("Heisenberg translations failed the isometry check")


_RUNNERS = {
    "count": run_count,
    "equidist": run_equidist,
    "growth": run_growth,
    "verify-laws": run_verify_laws,
    "chc-check": run_chc_check,
}


def run_job(spec: JobSpec) -> Report:
    report = Report(spec.command, _job_echo(spec))
    _RUNNERS[spec.command](spec, report)
    return report


# -- output ----------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.command == "equidist" and report.histograms:
        keys = list(report.histograms)
        w.writerow(["bin", "lower", "upper"] + [f"count_t{k}" for k in keys])
        first = report.histograms[keys[0]]
        for i in range(len(first["counts"])):
            row = [i, first["edges"][i], first["edges"][i + 1]] + [report.histograms[k]["counts"][i] for k in keys]
            w.writerow([_fmt(x) for x in row])
    elif report.series is not None:
        w.writerow(CSV_HEADER)
        for row in report.series:
            w.writerow([_fmt(row[k]) for k in CSV_HEADER])
    else:
        w.writerow(["check", "value"])
        for key, value in sorted(_flatten(report.checks or {}).items()):
            w.writerow([key, _fmt(value)])
    return buf.getvalue()


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, name + "."))
        elif isinstance(v, (list, tuple)):
            out[name] = " ".join(_fmt(x) for x in v)
        else:
            out[name] = v
    return out


def emit(report: Report, fmt: str = "json", path: str | Path | None = None, stream=None) -> list[Path]:
    """Write the report; equidistribution CSV output adds a summary JSON next to it."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    text = report_csv(report) if fmt == "csv" else report_json(report)
    if path is None:
        (stream or sys.stdout).write(text)
        return []
    p = Path(path)
    p.write_text(text, encoding="utf-8")
    written = [p]
    if fmt == "csv" and report.command == "equidist":
        summary = p.with_suffix(".summary.json")
        stats = (report.checks or {}).get("discrepancy", {})
        summary.write_text(json.dumps(_plain(stats), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        written.append(summary)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="census", description="Count conjugacy classes by displacement.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--job", required=True, help="TOML job file")
    parser.add_argument("--t-max", type=float, dest="t_max")
    parser.add_argument("--n-max", type=int, dest="n_max")
    parser.add_argument("--class", dest="class_")
    parser.add_argument("--group")
    parser.add_argument("--out")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--margin", help='number or "auto"')
    parser.add_argument("--workers", type=int)
    parser.add_argument("--allow-large", action="store_true", default=None, dest="allow_large")
    args = parser.parse_args(argv)

    margin = args.margin
    if margin is not None and margin != "auto":
        try:
            margin = float(margin)
        except ValueError:
            print(f"census: bad --margin {margin!r}", file=sys.stderr)
            return EXIT_PARSE
    overrides = {
        "t_max": args.t_max,
        "n_max": args.n_max,
        "class": args.class_,
        "group": args.group,
        "path": args.out,
        "format": args.format,
        "seed": args.seed,
        "margin": margin,
        "workers": args.workers,
        "allow_large": args.allow_large,
    }
    try:
        text = Path(args.job).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"census: cannot read job: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        spec = parse_job(text, args.command, overrides)
    except JobParseError as exc:
        print(f"census: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        report = run_job(spec)
    except (ResourceCapError, MemoryError) as exc:
        print(f"census: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (counting.SaturationError, BallSaturationError, counting.EngineMismatchError) as exc:
        print(f"census: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DomainError, KindError, ValueError) as exc:
        print(f"census: {spec.command} failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    try:
        emit(report, spec.output_format, spec.output_path)
    except OSError as exc:
        print(f"census: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if report.status != "ok":
        for msg in report.failures:
            print(f"census: invariant failure: {msg}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
