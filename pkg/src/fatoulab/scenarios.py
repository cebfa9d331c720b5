"""Scenario configs, the boundary-behaviour pipeline, and preset suites.

A scenario fixes a group, a measure, a boundary vertex, and apertures, and
asks one question: does the strong derivative of the measure at the vertex
exist exactly when its heat extension has parabolic limits there, with the
same value? The pipeline normalizes the vertex to the origin by group
translation, localizes the measure to a ball whose discarded tail is
checked to contribute vanishing heat, then runs both sides and compares:

* both sides converge and agree  -> verdict "equivalent";
* both sides fail to converge    -> verdict "both-diverge";
* one converges, the other not,
  or the values disagree         -> verdict "MISMATCH".

Configs are declarative JSON with a strict schema: unknown keys are
rejected everywhere, densities come from a named whitelist, and reports are
byte-reproducible (canonical JSON, no timestamps, provenance = config hash
+ package version + certified constants).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .errors import ConfigError
from . import groups as G
from . import kernels as K
from .measures import (
    AtomicMeasure,
    DensityMeasure,
    MixtureMeasure,
    restrict,
    strong_derivative,
    trace_to_csv,
    translate_measure,
)
from .extension import (
    HeatExtension,
    ParabolicRegion,
    limit_trace_to_csv,
    parabolic_limit,
    tail_vanishing_check,
)
from . import maximal as M

__all__ = [
    "SCHEMA_VERSION",
    "VERDICT_EQUIVALENT",
    "VERDICT_BOTH_DIVERGE",
    "VERDICT_MISMATCH",
    "Scenario",
    "ScenarioReport",
    "build_measure",
    "run_scenario",
    "run_suite",
    "preset_suite",
    "suite_names",
    "emit_report",
    "report_to_json",
]

SCHEMA_VERSION = 1
VERDICT_EQUIVALENT = "equivalent"
VERDICT_BOTH_DIVERGE = "both-diverge"
VERDICT_MISMATCH = "MISMATCH"

_GROUP_LABELS = ("euclidean:1", "euclidean:2", "euclidean:3", "heisenberg:1")


def _check_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _number(v, where: str, minimum=None, strict=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}: must be finite")
    if minimum is not None and (v <= minimum if strict else v < minimum):
        op = ">" if strict else ">="
        raise ConfigError(f"{where}: must be {op} {minimum}")
    return v


# ---------------------------------------------------------------------------
# measure construction (whitelisted density families)
# ---------------------------------------------------------------------------

_DEFAULT_BOX = {
    "euclidean:1": [[-2.0, 2.0]],
    "euclidean:2": [[-2.0, 2.0]] * 2,
    "euclidean:3": [[-2.0, 2.0]] * 3,
    "heisenberg:1": [[-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]],
}


def _density_fn(g: G.GroupDescriptor, family: str, params: dict, where: str):
    if family == "polynomial":
        _check_keys(params, {"constant", "quadratic"}, {"constant"}, where)
        c0 = _number(params["constant"], f"{where}.constant", minimum=0.0)
        c2 = _number(params.get("quadratic", 0.0), f"{where}.quadratic",
                     minimum=0.0)

        def fn(pts, _c0=c0, _c2=c2):
            rho = np.asarray(G.norm(g, pts))
            return _c0 + _c2 * rho ** 2

        return fn
    if family == "gaussian-bump":
        _check_keys(params, {"baseline", "amplitude", "width"},
                    {"baseline", "amplitude", "width"}, where)
        base = _number(params["baseline"], f"{where}.baseline", minimum=0.0)
        amp = _number(params["amplitude"], f"{where}.amplitude", minimum=0.0)
        width = _number(params["width"], f"{where}.width", minimum=0.0,
                        strict=True)

        def fn(pts, _b=base, _a=amp, _w=width):
            rho = np.asarray(G.norm(g, pts))
            return _b + _a * np.exp(-(rho / _w) ** 2)

        return fn
    if family == "log-oscillatory":
        _check_keys(params, {"baseline", "amplitude"},
                    {"baseline", "amplitude"}, where)
        base = _number(params["baseline"], f"{where}.baseline", minimum=0.0)
        amp = _number(params["amplitude"], f"{where}.amplitude", minimum=0.0)
        if amp > base:
            raise ConfigError(
                f"{where}: amplitude must not exceed baseline (nonnegativity)"
            )

        def fn(pts, _b=base, _a=amp):
            rho = np.asarray(G.norm(g, pts))
            return _b + _a * np.sin(np.log(1.0 / np.maximum(rho, 1e-300)))

        return fn
    raise ConfigError(f"{where}: unknown density family {family!r}")


def build_measure(g: G.GroupDescriptor, spec: dict, where: str = "measure"):
    """Construct a measure from a validated config fragment."""
    _check_keys(
        spec,
        {"type", "points", "weights", "family", "params", "box", "components"},
        {"type"},
        where,
    )
    kind = spec["type"]
    if kind == "atomic":
        _check_keys(spec, {"type", "points", "weights"},
                    {"type", "points", "weights"}, where)
        pts = np.asarray(spec["points"], dtype=float)
        w = np.asarray(spec["weights"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != g.total_dim:
            raise ConfigError(
                f"{where}.points: expected shape (k, {g.total_dim})"
            )
        return AtomicMeasure(g, pts, w)
    if kind == "density":
        _check_keys(spec, {"type", "family", "params", "box"},
                    {"type", "family"}, where)
        fam = spec["family"]
        params = spec.get("params", {})
        box = np.asarray(
            spec.get("box", _DEFAULT_BOX[g.label]), dtype=float
        )
        if box.shape != (g.total_dim, 2):
            raise ConfigError(f"{where}.box: expected shape ({g.total_dim}, 2)")
        fn = _density_fn(g, fam, params, f"{where}.params")
        return DensityMeasure(g, fn, box, label=f"{fam}")
    if kind == "mixture":
        _check_keys(spec, {"type", "components"}, {"type", "components"}, where)
        comps = spec["components"]
        if not isinstance(comps, list) or not comps:
            raise ConfigError(f"{where}.components: expected a non-empty list")
        return MixtureMeasure(
            g,
            [build_measure(g, c, f"{where}.components[{i}]")
             for i, c in enumerate(comps)],
        )
    raise ConfigError(f"{where}.type: unknown measure type {kind!r}")


# ---------------------------------------------------------------------------
# scenario config
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {
    "schema_version", "label", "group", "measure", "vertex", "apertures",
    "restrict_radius", "derivative", "limit", "expected_verdict",
    "expected_limit", "seed",
}
_DERIV_KEYS = {"tol", "window", "n_radii"}
_LIMIT_KEYS = {"tol", "window", "n_steps", "t_max"}


@dataclass(eq=False)
class Scenario:
    """Validated scenario ready to run."""

    label: str
    group: G.GroupDescriptor
    measure_spec: dict
    vertex: np.ndarray
    apertures: tuple
    restrict_radius: float | None
    derivative_opts: dict
    limit_opts: dict
    expected_verdict: str | None
    expected_limit: float | None
    seed: int
    config: dict = field(repr=False, default=None)
    config_sha256: str = ""

    @classmethod
    def from_config(cls, cfg: dict) -> "Scenario":
        _check_keys(cfg, _SCENARIO_KEYS,
                    {"schema_version", "label", "group", "measure"}, "config")
        if cfg["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(
                f"config.schema_version: expected {SCHEMA_VERSION}, "
                f"got {cfg['schema_version']!r}"
            )
        if not isinstance(cfg["label"], str) or not cfg["label"]:
            raise ConfigError("config.label: expected a non-empty string")
        if cfg["group"] not in _GROUP_LABELS:
            raise ConfigError(
                f"config.group: expected one of {_GROUP_LABELS}, "
                f"got {cfg['group']!r}"
            )
        g = G.get_group(cfg["group"])
        # build once now to validate the measure fragment eagerly
        build_measure(g, cfg["measure"])
        vertex = np.asarray(cfg.get("vertex", [0.0] * g.total_dim), dtype=float)
        if vertex.shape != (g.total_dim,):
            raise ConfigError(f"config.vertex: expected {g.total_dim} coords")
        if not np.all(np.isfinite(vertex)):
            raise ConfigError("config.vertex: coordinates must be finite")
        aps = cfg.get("apertures", [0.5, 1.0])
        if not isinstance(aps, list) or not aps:
            raise ConfigError("config.apertures: expected a non-empty list")
        apertures = tuple(
            _number(a, "config.apertures[]", minimum=0.0, strict=True)
            for a in aps
        )
        rr = cfg.get("restrict_radius")
        if rr is not None:
            rr = _number(rr, "config.restrict_radius", minimum=0.0, strict=True)
        dopts = dict(cfg.get("derivative", {}))
        _check_keys(dopts, _DERIV_KEYS, set(), "config.derivative")
        lopts = dict(cfg.get("limit", {}))
        _check_keys(lopts, _LIMIT_KEYS, set(), "config.limit")
        ev = cfg.get("expected_verdict")
        if ev is not None and ev not in (
            VERDICT_EQUIVALENT, VERDICT_BOTH_DIVERGE, VERDICT_MISMATCH
        ):
            raise ConfigError(f"config.expected_verdict: unknown verdict {ev!r}")
        el = cfg.get("expected_limit")
        if el is not None:
            el = _number(el, "config.expected_limit")
        seed = cfg.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("config.seed: expected an integer")
        canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
        sha = hashlib.sha256(canonical.encode()).hexdigest()
        return cls(
            label=cfg["label"],
            group=g,
            measure_spec=cfg["measure"],
            vertex=vertex,
            apertures=apertures,
            restrict_radius=rr,
            derivative_opts=dopts,
            limit_opts=lopts,
            expected_verdict=ev,
            expected_limit=el,
            seed=seed,
            config=cfg,
            config_sha256=sha,
        )


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ScenarioReport:
    label: str
    group_label: str
    verdict: str
    derivative: dict
    limits: dict          # aperture (str) -> summary dict
    tail: dict
    reductions: list
    agreement: dict
    provenance: dict
    expected_verdict: str | None
    expected_limit: float | None
    matches_expected: bool
    traces: dict = field(repr=False, default_factory=dict)


def run_scenario(scenario: Scenario | dict) -> ScenarioReport:
    """Run the full boundary-behaviour pipeline for one scenario."""
    if isinstance(scenario, dict):
        scenario = Scenario.from_config(scenario)
    g = scenario.group
    profile = K.profile_for(g)
    if profile.certificate is None:
        K.certify_gaussian(profile)
    mu = build_measure(g, scenario.measure_spec)
    reductions = []

    mu_v = translate_measure(mu, scenario.vertex)
    reductions.append({
        "op": "translate-vertex-to-origin",
        "vertex": scenario.vertex.tolist(),
    })

    radius = scenario.restrict_radius or 1.0 / g.quasi_triangle_const
    tail = tail_vanishing_check(mu_v, profile, radius)
    reductions.append({
        "op": "tail-heat-check",
        "radius": radius,
        "outer_mass": tail["outer_mass"],
        "vanishes": tail["vanishes"],
    })

    mu_loc = restrict(mu_v, G.Ball(np.zeros(g.total_dim), radius))
    reductions.append({"op": "restrict-to-ball", "radius": radius})

    dov = scenario.derivative_opts
    n_radii = int(dov.get("n_radii", 16))
    dtrace = strong_derivative(
        mu_loc,
        np.zeros(g.total_dim),
        radii=0.5 ** np.arange(n_radii) * min(0.5, radius / 2.0),
        window=int(dov.get("window", 5)),
        tol=float(dov.get("tol", 1e-2)),
    )

    u = HeatExtension(mu_loc, profile)
    lov = scenario.limit_opts
    limits, ltraces = {}, {}
    for alpha in scenario.apertures:
        region = ParabolicRegion(
            np.zeros(g.total_dim), aperture=alpha,
            t_max=float(lov.get("t_max", 0.25)),
        )
        lt = parabolic_limit(
            u, region,
            n_steps=int(lov.get("n_steps", 12)),
            window=int(lov.get("window", 5)),
            tol=float(lov.get("tol", 1e-2)),
        )
        key = repr(float(alpha))
        limits[key] = {
            "aperture": alpha,
            "estimate": lt.estimate,
            "oscillation": lt.oscillation,
            "converged": lt.converged,
        }
        ltraces[key] = lt

    deriv_conv = dtrace.converged
    parab_conv = all(v["converged"] for v in limits.values())
    agreement = {"threshold": None, "per_aperture": {}}
    if deriv_conv and parab_conv:
        agree_all = True
        for key, summ in limits.items():
            thr = max(1e-2, 2.0 * (dtrace.oscillation + summ["oscillation"]))
            delta = abs(summ["estimate"] - dtrace.estimate)
            ok = delta <= thr * max(1.0, abs(dtrace.estimate))
            agreement["per_aperture"][key] = {
                "delta": delta, "threshold": thr, "agree": bool(ok),
            }
            agree_all &= ok
        verdict = VERDICT_EQUIVALENT if agree_all else VERDICT_MISMATCH
    elif not deriv_conv and not parab_conv:
        verdict = VERDICT_BOTH_DIVERGE
    else:
        verdict = VERDICT_MISMATCH

    matches = True
    if scenario.expected_verdict is not None:
        matches &= verdict == scenario.expected_verdict
    if scenario.expected_limit is not None and deriv_conv:
        tol = max(2e-2, 5.0 * dtrace.oscillation)
        matches &= (
            abs(dtrace.estimate - scenario.expected_limit)
            <= tol * max(1.0, abs(scenario.expected_limit))
        )
    matches &= tail["vanishes"]

    provenance = {
        "schema_version": SCHEMA_VERSION,
        "config_sha256": scenario.config_sha256,
        "package_version": __version__,
        "seed": scenario.seed,
        "constants": {
            "quasi_triangle_const": g.quasi_triangle_const,
            "unit_ball_volume": g.unit_ball_volume,
            "gauss_c0": profile.certificate.c0,
        },
    }
    traces = {"derivative": trace_to_csv(dtrace)}
    for key, lt in ltraces.items():
        traces[f"limit-{key}"] = limit_trace_to_csv(lt)
    return ScenarioReport(
        label=scenario.label,
        group_label=g.label,
        verdict=verdict,
        derivative={
            "estimate": dtrace.estimate,
            "oscillation": dtrace.oscillation,
            "converged": dtrace.converged,
        },
        limits=limits,
        tail={
            "radius": tail["radius"],
            "outer_mass": tail["outer_mass"],
            "sup_at_smallest_t": float(tail["sup_values"][-1]),
            "vanishes": tail["vanishes"],
            "monotone": tail["monotone"],
        },
        reductions=reductions,
        agreement=agreement,
        provenance=provenance,
        expected_verdict=scenario.expected_verdict,
        expected_limit=scenario.expected_limit,
        matches_expected=bool(matches),
        traces=traces,
    )


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def report_to_json(report: ScenarioReport) -> str:
    """Canonical JSON for a scenario report (no timestamps, sorted keys)."""
    payload = {
        "label": report.label,
        "group": report.group_label,
        "verdict": report.verdict,
        "derivative": report.derivative,
        "limits": report.limits,
        "tail": report.tail,
        "reductions": report.reductions,
        "agreement": report.agreement,
        "provenance": report.provenance,
        "expected_verdict": report.expected_verdict,
        "expected_limit": report.expected_limit,
        "matches_expected": report.matches_expected,
    }
    return json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n"


def emit_report(report: ScenarioReport, out_dir: str) -> list[str]:
    """Write the JSON report and CSV traces; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    jpath = os.path.join(out_dir, f"{report.label}.json")
    with open(jpath, "w") as fh:
        fh.write(report_to_json(report))
    paths.append(jpath)
    for name, csv in report.traces.items():
        cpath = os.path.join(out_dir, f"{report.label}-{name}.csv")
        with open(cpath, "w") as fh:
            fh.write(csv)
        paths.append(cpath)
    return paths


# ---------------------------------------------------------------------------
# preset suites
# ---------------------------------------------------------------------------

def _scn(label, group, measure, expected_verdict, expected_limit=None,
         **extra):
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "label": label,
        "group": group,
        "measure": measure,
        "expected_verdict": expected_verdict,
    }
    if expected_limit is not None:
        cfg["expected_limit"] = expected_limit
    cfg.update(extra)
    return cfg


_EUCLIDEAN_SUITE = [
    _scn("eg-lebesgue-constant", "euclidean:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 2.0}},
         VERDICT_EQUIVALENT, 2.0),
    _scn("eg-quadratic", "euclidean:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 1.0, "quadratic": 1.0}},
         VERDICT_EQUIVALENT, 1.0),
    _scn("eg-oscillatory", "euclidean:1",
         {"type": "density", "family": "log-oscillatory",
          "params": {"baseline": 1.0, "amplitude": 0.9}},
         VERDICT_BOTH_DIVERGE),
    _scn("eg-remote-atom", "euclidean:1",
         {"type": "atomic", "points": [[0.8]], "weights": [1.0]},
         VERDICT_EQUIVALENT, 0.0),
    _scn("eg-atom-at-vertex", "euclidean:1",
         {"type": "atomic", "points": [[0.0]], "weights": [1.0]},
         VERDICT_BOTH_DIVERGE),
    _scn("eg-bump", "euclidean:1",
         {"type": "density", "family": "gaussian-bump",
          "params": {"baseline": 0.5, "amplitude": 1.0, "width": 0.5}},
         VERDICT_EQUIVALENT, 1.5),
    _scn("eg-translated-vertex", "euclidean:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 1.0, "quadratic": 1.0},
          "box": [[-3.0, 3.0]]},
         VERDICT_EQUIVALENT, 3.25, vertex=[1.5]),
    _scn("eg-plane-mixture", "euclidean:2",
         {"type": "mixture", "components": [
             {"type": "density", "family": "polynomial",
              "params": {"constant": 1.0},
              "box": [[-1.5, 1.5], [-1.5, 1.5]]},
             {"type": "atomic", "points": [[1.2, 0.0]], "weights": [2.0]},
         ]},
         VERDICT_EQUIVALENT, 1.0),
]

_HEISENBERG_SUITE = [
    _scn("hc-lebesgue", "heisenberg:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 1.0}},
         VERDICT_EQUIVALENT, 1.0),
    _scn("hc-quadratic", "heisenberg:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 1.0, "quadratic": 0.3333333333333333}},
         VERDICT_EQUIVALENT, 1.0),
    _scn("hc-remote-atom", "heisenberg:1",
         {"type": "atomic", "points": [[1.0, 0.0, 0.0]], "weights": [1.0]},
         VERDICT_EQUIVALENT, 0.0),
    _scn("hc-atom-at-vertex", "heisenberg:1",
         {"type": "atomic", "points": [[0.0, 0.0, 0.0]], "weights": [1.0]},
         VERDICT_BOTH_DIVERGE),
    _scn("hc-bump", "heisenberg:1",
         {"type": "density", "family": "gaussian-bump",
          "params": {"baseline": 0.5, "amplitude": 1.0, "width": 0.6}},
         VERDICT_EQUIVALENT, 1.5),
    _scn("hc-translated-vertex", "heisenberg:1",
         {"type": "density", "family": "polynomial",
          "params": {"constant": 1.0, "quadratic": 0.3333333333333333},
          "box": [[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]]},
         VERDICT_EQUIVALENT, 1.1401986642196623,
         vertex=[0.3, -0.2, 0.1]),
]

_PRESETS = {
    "euclidean-gehring": _EUCLIDEAN_SUITE,
    "heisenberg-core": _HEISENBERG_SUITE,
}

_MAXIMAL_CASES = [
    {"label": "ms-eu1-atoms", "group": "euclidean:1",
     "measure": {"type": "atomic",
                 "points": [[0.3], [-0.7], [1.4], [-0.2], [0.05]],
                 "weights": [0.5, 1.0, 0.25, 0.75, 1.5]},
     "points": [[0.0], [0.5]]},
    {"label": "ms-eu2-atoms", "group": "euclidean:2",
     "measure": {"type": "atomic",
                 "points": [[0.2, -0.3], [-0.6, 0.1], [1.0, 1.0],
                            [0.0, 0.8], [-0.4, -0.9]],
                 "weights": [1.0, 0.5, 2.0, 0.3, 0.7]},
     "points": [[0.0, 0.0], [0.3, 0.3]]},
    {"label": "ms-eu3-atoms", "group": "euclidean:3",
     "measure": {"type": "atomic",
                 "points": [[0.1, 0.2, -0.3], [-0.5, 0.4, 0.2],
                            [0.9, -0.8, 0.1], [0.0, 0.0, 1.1],
                            [-0.2, -0.2, -0.2]],
                 "weights": [1.0, 1.0, 0.5, 0.25, 2.0]},
     "points": [[0.0, 0.0, 0.0]]},
    {"label": "ms-h1-atoms", "group": "heisenberg:1",
     "measure": {"type": "atomic",
                 "points": [[0.3, 0.1, 0.05], [-0.4, 0.2, -0.1],
                            [0.8, -0.6, 0.2], [0.0, 0.9, 0.0],
                            [-0.1, -0.1, 0.3]],
                 "weights": [1.0, 0.8, 0.4, 1.2, 0.6]},
     "points": [[0.0, 0.0, 0.0], [0.2, -0.1, 0.0]]},
    {"label": "ms-eu1-density", "group": "euclidean:1",
     "measure": {"type": "density", "family": "polynomial",
                 "params": {"constant": 1.0, "quadratic": 0.5}},
     "points": [[0.0], [0.4]]},
    {"label": "ms-eu2-density", "group": "euclidean:2",
     "measure": {"type": "density", "family": "gaussian-bump",
                 "params": {"baseline": 0.2, "amplitude": 1.0, "width": 0.7}},
     "points": [[0.0, 0.0]]},
    {"label": "ms-h1-density", "group": "heisenberg:1",
     "measure": {"type": "density", "family": "polynomial",
                 "params": {"constant": 1.0}},
     "points": [[0.0, 0.0, 0.0]]},
]


def suite_names() -> list[str]:
    return sorted(_PRESETS) + ["maximal-sandwich", "kernel-battery"]


def preset_suite(name: str) -> list[dict]:
    """Scenario configs of a preset scenario suite."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown scenario suite {name!r}; available: {sorted(_PRESETS)}"
        )
    return [dict(cfg) for cfg in _PRESETS[name]]


def _n_workers() -> int:
    env = os.environ.get("FATOU_THREADS", "")
    try:
        n = int(env) if env else 1
    except ValueError:
        raise ConfigError(f"FATOU_THREADS must be an integer, got {env!r}")
    return max(1, n)


def _atoms_plus_noise(base_cfg: dict, k: int, seed: int) -> list[dict]:
    """Deterministic perturbed variants of an atomic measure config."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    out = []
    pts = np.asarray(base_cfg["measure"]["points"], dtype=float)
    w = np.asarray(base_cfg["measure"]["weights"], dtype=float)
    for i in range(k):
        jitter = 0.15 * rng.standard_normal(pts.shape)
        scale = np.exp(0.2 * rng.standard_normal(w.shape))
        cfg = dict(base_cfg)
        cfg["label"] = f"{base_cfg['label']}-v{i}"
        cfg["measure"] = {
            "type": "atomic",
            "points": (pts + jitter).tolist(),
            "weights": (w * scale).tolist(),
        }
        out.append(cfg)
    return out


def maximal_cases(n_atomic: int = 20, n_density: int = 5) -> list[dict]:
    """Deterministic case list for the maximal-sandwich suite."""
    atomic_bases = [c for c in _MAXIMAL_CASES if c["measure"]["type"] == "atomic"]
    density_bases = [c for c in _MAXIMAL_CASES if c["measure"]["type"] == "density"]
    cases = []
    i = 0
    while len(cases) < n_atomic:
        base = atomic_bases[i % len(atomic_bases)]
        variant = _atoms_plus_noise(base, 1, seed=1000 + i)[0]
        variant["label"] = f"{base['label']}-v{i}"
        cases.append(variant)
        i += 1
    out = cases[:n_atomic]
    j = 0
    dens = []
    while len(dens) < n_density:
        base = dict(density_bases[j % len(density_bases)])
        base = dict(base, label=f"{base['label']}-v{j}")
        dens.append(base)
        j += 1
    return out + dens


def run_maximal_case(cfg: dict, alphas=(0.5, 1.0, 2.0)) -> dict:
    """Maximal sandwich plus heat chain for one case config."""
    g = G.get_group(cfg["group"])
    mu = build_measure(g, cfg["measure"])
    profile = K.profile_for(g)
    reports = []
    ok = True
    for x in cfg["points"]:
        r = M.check_sandwich(mu, np.asarray(x, dtype=float), alphas=alphas)
        ok &= r["chain_ok"]
        reports.append(r)
    heat = M.check_heat_chain(
        mu, profile, np.asarray(cfg["points"][0], dtype=float),
        slack=0.02 if not M._is_atomic(mu) else 1e-9,
    )
    ok &= heat["chain_ok"]
    return {
        "label": cfg["label"],
        "group": cfg["group"],
        "passed": bool(ok),
        "sandwich": reports,
        "heat_chain": heat,
    }


def run_suite(name: str, out_dir: str | None = None) -> dict:
    """Run a preset suite; returns {suite, cases, passed}."""
    if name in _PRESETS:
        configs = preset_suite(name)
        workers = _n_workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                reports = list(ex.map(run_scenario, configs))
        else:
            reports = [run_scenario(c) for c in configs]
        cases = []
        n_mismatch = 0
        for rep in reports:
            if out_dir:
                emit_report(rep, out_dir)
            bad = rep.verdict == VERDICT_MISMATCH or not rep.matches_expected
            n_mismatch += bad
            cases.append({
                "label": rep.label,
                "verdict": rep.verdict,
                "expected": rep.expected_verdict,
                "passed": not bad,
            })
        return {
            "suite": name,
            "cases": cases,
            "n_mismatch": int(n_mismatch),
            "passed": n_mismatch == 0,
        }
    if name == "maximal-sandwich":
        results = [run_maximal_case(c) for c in maximal_cases()]
        passed = all(r["passed"] for r in results)
        cases = [{"label": r["label"], "passed": r["passed"]} for r in results]
        return {"suite": name, "cases": cases,
                "n_mismatch": sum(not r["passed"] for r in results),
                "passed": passed}
    if name == "kernel-battery":
        cases = []
        all_ok = True
        for label in _GROUP_LABELS:
            profile = K.profile_for(G.get_group(label))
            report = K.validate_profile(profile)
            cases.append({"label": label, "passed": report["passed"],
                          "checks": report["checks"]})
            all_ok &= report["passed"]
        return {"suite": name, "cases": cases,
                "n_mismatch": sum(not c["passed"] for c in cases),
                "passed": all_ok}
    raise ConfigError(f"unknown suite {name!r}; available: {suite_names()}")
