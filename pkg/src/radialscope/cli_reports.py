"""Configuration ingestion, pipeline orchestration and report emission.

A single JSON config drives the pipeline
locate -> linearize -> resonate -> normal-form -> expand, plus the
explicit-mode flow/Morse stages and the stationary-phase verification
when requested.  Reports are deterministic: identical configs produce
byte-identical files (canonical key order, rationals as "p/q" strings,
no timestamps).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema
import numpy as np

from . import __version__
from .scalars import GaussianRational, format_fraction
from .symalg import EXACT, WeightedPolynomial
from .radial import (CriticalPointSpec, NoRealRadialPointError, RadialPoint,
                     linearization_spectrum)
from .resonance import (enumerate_resonances, module_order,
                        scan_effectively_resonant_energies, second_index_set)
from .normalform import reduce_to_normal_form
from .expansion import (OscillatorSpec, exponent_data, expansion_template,
                        log_variable_recursion)
from .dynamics import (PotentialModel, heteroclinic_dag, locate_radial_points,
                       lyapunov_check, morse_sequence)
from .oscverify import (StationaryPhaseCase, gaussian_amplitude,
                        stationary_phase_check)

from .parallel import THREADS_ENV, parallel_map

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FORBIDDEN_ENERGY = 3
EXIT_NUMERICAL = 4

# Single source of documented defaults; reports embed the effective values.
DEFAULTS = {
    "maxDegree": 6,          # resonance / normal-form weighted-degree ceiling
    "K": 3,                  # oscillator levels per template
    "maxBetaPrime": 2,       # saddle monomial ceiling
    "reB": 0.0,              # user Re b (subprincipal constant input)
    "tol": 1e-10,            # generic numerical tolerance
    "floatResonanceTol": 1e-12,
    "scanGridPoints": 10000,
    "bisectTol": 1e-10,
    "flowTol": 1e-10,
    "seedEps": 1e-5,
    "ballRadius": 1e-3,
    "wStop": 1e-6,
    "holdTime": 5.0,
    "tMax": 60.0,
    "sign": 1,
    "seed": 20260810,
    "stationaryPhase": {
        "v0z": 0.0, "tau": 0.5, "center": None, "width": 0.3, "cut": 3.0,
        "xList": [1e-2, 10 ** -2.5, 1e-3, 10 ** -3.5, 1e-4],
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["mode"],
    "properties": {
        "mode": {"enum": ["abstract", "explicit"]},
        "criticalPoints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "value", "hessian"],
                "properties": {
                    "label": {"type": "string"},
                    "value": {"type": ["number", "string"]},
                    "hessian": {"type": "array", "minItems": 1,
                                "items": {"type": ["number", "string"]}},
                },
            },
        },
        "potential": {
            "type": "object",
            "required": ["n", "v0"],
            "properties": {
                "n": {"type": "integer"},
                "v0": {"type": "array",
                       "items": {"type": "array", "minItems": 3, "maxItems": 3,
                                 "items": {"type": "number"}}},
            },
        },
        "energy": {"type": ["number", "array", "string"]},
        "stages": {"type": "array", "items": {"type": "string"}},
        "options": {"type": "object"},
    },
}


class ConfigError(ValueError):
    pass


class NumericalStageError(RuntimeError):
    pass


def _parse_number(x):
    """Accept JSON numbers or "p/q" strings; strings stay exact."""
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad rational literal {x!r}") from exc
    return x


@dataclass
class AnalysisConfig:
    mode: str
    critical_points: list[CriticalPointSpec]
    potential: PotentialModel | None
    energy: object                      # scalar or (lo, hi)
    stages: list[str]
    options: dict
    raw: dict

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config schema violation: {exc.message}") from exc
        mode = data["mode"]
        cps = []
        for entry in data.get("criticalPoints", []):
            hess = tuple(_parse_number(h) for h in entry["hessian"])
            cps.append(CriticalPointSpec(label=entry["label"],
                                         value=_parse_number(entry["value"]),
                                         hessian=hess))
        potential = None
        if mode == "explicit":
            if "potential" not in data:
                raise ConfigError("explicit mode requires a potential")
            pot = data["potential"]
            try:
                potential = PotentialModel(n=pot["n"], v0_coeffs=pot["v0"])
            except NotImplementedError as exc:
                raise ConfigError(str(exc)) from exc
        elif not cps:
            raise ConfigError("abstract mode requires a nonempty criticalPoints list")

        energy = data.get("energy")
        if isinstance(energy, list):
            if len(energy) != 2 or not energy[0] < energy[1]:
                raise ConfigError("interval energy must be [lo, hi] with lo < hi")
            energy = (float(energy[0]), float(energy[1]))
        elif energy is not None:
            energy = _parse_number(energy)

        options = dict(DEFAULTS)
        sp_defaults = dict(DEFAULTS["stationaryPhase"])
        user_opts = data.get("options", {})
        sp_user = user_opts.get("stationaryPhase", {})
        options.update({k: v for k, v in user_opts.items() if k != "stationaryPhase"})
        sp_defaults.update(sp_user)
        options["stationaryPhase"] = sp_defaults
        for key in ("tol", "bisectTol", "flowTol", "wStop"):
            if options[key] <= 0:
                raise ConfigError(f"option {key} must be positive")

        stages = data.get("stages")
        if stages is None:
            stages = ["radial", "resonance", "normalform", "expansion"]
            if mode == "explicit":
                stages += ["flow", "morse"]
            if isinstance(energy, tuple):
                stages = ["scan"]
        return cls(mode=mode, critical_points=cps, potential=potential,
                   energy=energy, stages=stages, options=options, raw=data)

    @classmethod
    def from_file(cls, path: str) -> "AnalysisConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class AnalysisReport:
    config: AnalysisConfig
    per_energy: dict
    global_results: dict
    stage_errors: dict
    provenance: dict
    artifacts: dict = field(default_factory=dict)   # live objects for CSV emission

    @property
    def ok(self) -> bool:
        return not self.stage_errors

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "perEnergy": self.per_energy,
            "global": self.global_results,
            "stageErrors": self.stage_errors,
        }


def _point_stages(rp: RadialPoint, stages, options, errors, tag):
    """The per-radial-point pipeline: resonance, normal form, expansion."""
    out = {"radial": rp.to_json_dict()}
    threshold_blocked = rp.hessian_threshold
    perturbation = None
    if options.get("perturbation") is not None:
        perturbation = WeightedPolynomial.from_json_dict(options["perturbation"])

    if "resonance" in stages and not threshold_blocked:
        try:
            recs = enumerate_resonances(rp, options["maxDegree"],
                                        tol=options["floatResonanceTol"])
            rec_mod = module_order(rp)
            out["resonance"] = {
                "maxDegree": options["maxDegree"],
                "records": [r.to_json_dict() for r in recs],
                "secondIndexSet": [[list(a), list(b)] for a, b in second_index_set(rp)],
                "moduleOrders": [{"id": g.symbol_id, "sigma": float(g.eigenvalue),
                                  "s": float(g.order)} for g in rec_mod.generators],
            }
        except Exception as exc:  # noqa: BLE001 - stage isolation by contract
            errors[f"{tag}:resonance"] = str(exc)

    nf = None
    if "normalform" in stages and not threshold_blocked and rp.layout.is_real_block:
        try:
            mode = rp.mode
            p = rp.model_quadratic().p0(mode)
            if perturbation is not None:
                if perturbation.mode != mode:
                    raise ConfigError("perturbation mode must match the radial point data")
                p = p + perturbation
            nf = reduce_to_normal_form(p, rp, options["maxDegree"])
            out["normalForm"] = nf.to_json_dict()
        except Exception as exc:  # noqa: BLE001
            errors[f"{tag}:normalform"] = str(exc)

    if "expansion" in stages and not threshold_blocked:
        try:
            osc = None
            if options.get("oscillator") is not None:
                blocks = options["oscillator"]
                osc = {int(k): OscillatorSpec(**v) for k, v in blocks.items()} \
                    if all(isinstance(v, dict) for v in blocks.values()) \
                    else {j: OscillatorSpec(**blocks) for j in rp.layout.ythird_indices}
            elif rp.layout.ythird_indices:
                # default normalized block (mu^2 + a y^2)/|lambda|, which
                # reproduces the block eigenvalue ratios r(1-r) = a/w exactly;
                # overridable via options.oscillator (quantization ambiguity)
                from .radial import cp_hessian_sorted
                lam_abs = abs(float(rp.lam))
                hs = cp_hessian_sorted(rp)
                osc = {j: OscillatorSpec(p=1.0 / lam_abs, q=0.0,
                                         c=float(hs[j]) / 2.0 / lam_abs)
                       for j in rp.layout.ythird_indices}
            ed = exponent_data(rp, re_b=options["reB"], k_max=options["K"],
                               max_beta_prime=options["maxBetaPrime"],
                               oscillator_specs=osc)
            eff_r = None
            if nf is not None and not nf.r_eff_r.is_zero() and rp.mode == EXACT:
                eff_r = log_variable_recursion(rp, r_eff_r=nf.r_eff_r)
            tpl = expansion_template(rp, ed, k_max=options["K"],
                                     max_beta_prime=options["maxBetaPrime"], eff_r=eff_r)
            out["expansion"] = {"exponents": ed.to_json_dict(),
                                "template": tpl.to_json_dict()}
        except Exception as exc:  # noqa: BLE001
            errors[f"{tag}:expansion"] = str(exc)
    return out


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Execute the configured pipeline; stage failures are recorded per
    stage and leave completed stages intact."""
    errors: dict[str, str] = {}
    per_energy: dict = {}
    global_results: dict = {}
    artifacts: dict = {}
    options = config.options
    stages = config.stages

    if "scan" in stages:
        if not isinstance(config.energy, tuple):
            raise ConfigError("scan stage requires an interval energy [lo, hi]")
        cps = config.critical_points
        if config.potential is not None:
            cps = _explicit_critical_points(config.potential)
        scans = {}
        for cp in cps:
            if float(cp.value) >= config.energy[0]:
                errors[f"scan:{cp.label}"] = (
                    f"interval starts at {config.energy[0]} which is not above "
                    f"V0({cp.label}) = {float(cp.value)}")
                continue
            try:
                res = scan_effectively_resonant_energies(
                    cp, config.energy, sign=options["sign"],
                    grid_points=options["scanGridPoints"],
                    bisect_tol=options["bisectTol"])
                scans[cp.label] = res.to_json_dict()
            except Exception as exc:  # noqa: BLE001
                errors[f"scan:{cp.label}"] = str(exc)
        global_results["energyScan"] = scans

    point_stages = {"radial", "resonance", "normalform", "expansion"} & set(stages)
    if point_stages and not isinstance(config.energy, tuple) and config.energy is not None:
        sigma = config.energy
        key = repr(float(sigma))
        entry: dict = {}
        if config.mode == "abstract":
            def run_cp(cp):
                # a Hessian threshold is a forbidden energy and propagates
                # (exit 3); a critical value above sigma is ordinary data
                try:
                    rp = linearization_spectrum(cp, sigma, options["sign"])
                except NoRealRadialPointError as exc:
                    return cp.label, {"error": str(exc)}
                return cp.label, _point_stages(rp, stages, options, errors, cp.label)

            for label, data in parallel_map(run_cp, config.critical_points):
                entry[label] = data
        else:
            located = locate_radial_points(config.potential, float(sigma),
                                           tol=options["tol"])
            for node in located:
                if not node.outgoing:
                    entry[node.node_id] = {"radial": node.to_json_dict()}
                    continue
                data = _point_stages(node.record, stages, options, errors, node.node_id)
                data["radial"] = node.to_json_dict()
                entry[node.node_id] = data
        per_energy[key] = entry

    if ("flow" in stages or "morse" in stages) and config.mode == "explicit":
        if isinstance(config.energy, tuple) or config.energy is None:
            errors["flow"] = "flow/morse stages need a single energy"
        else:
            try:
                dag = heteroclinic_dag(
                    config.potential, float(config.energy),
                    eps=options["seedEps"], tol=options["flowTol"],
                    ball_radius=options["ballRadius"], w_stop=options["wStop"],
                    hold_time=options["holdTime"], t_max=options["tMax"])
                global_results["dag"] = dag.to_json_dict()
                artifacts["dag"] = dag
                global_results["lyapunov"] = [
                    lyapunov_check(config.potential, float(config.energy), n)
                    for n in dag.nodes if n.outgoing]
                if "morse" in stages:
                    ms = morse_sequence(dag)
                    global_results["morse"] = ms.to_json_dict()
                    if not ms.verified:
                        errors["morse"] = "; ".join(ms.issues)
            except Exception as exc:  # noqa: BLE001
                errors["flow"] = str(exc)

    if "stationaryPhase" in stages or "stationary-phase" in stages:
        sp = options["stationaryPhase"]
        try:
            center = sp["center"]
            if center is None:
                center = sp["v0z"] + 1.0 / (4.0 * sp["tau"] ** 2)
            amp = gaussian_amplitude(center, sp["width"], cut=sp["cut"])
            case = StationaryPhaseCase(v0z=sp["v0z"], tau=sp["tau"], amplitude=amp,
                                       x_list=tuple(sp["xList"]))
            res = stationary_phase_check(case)
            global_results["stationaryPhase"] = res.to_json_dict()
            artifacts["stationaryPhase"] = res
        except Exception as exc:  # noqa: BLE001
            errors["stationaryPhase"] = str(exc)

    provenance = {
        "tool": "radialscope",
        "version": __version__,
        "config": config.raw,
        "effectiveOptions": _jsonable(options),
        "seed": options["seed"],
    }
    return AnalysisReport(config=config, per_energy=per_energy,
                          global_results=global_results, stage_errors=errors,
                          provenance=provenance, artifacts=artifacts)


def _explicit_critical_points(pm: PotentialModel) -> list[CriticalPointSpec]:
    from .dynamics import _critical_angles
    cps = []
    for k, th in enumerate(_critical_angles(pm)):
        cps.append(CriticalPointSpec(label=f"cp{k}", value=pm.v0(th),
                                     hessian=(pm.v0_second(th),)))
    return cps


# -- emission --------------------------------------------------------------------------


def _jsonable(obj):
    """Normalize to plain JSON types: Fractions to "p/q", complex to re/im."""
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, GaussianRational):
        return {"re": format_fraction(obj.re), "im": format_fraction(obj.im)}
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True) + "\n"


def emit(report: AnalysisReport, formats: list[str], outdir: str) -> list[str]:
    """Write report files; returns the paths written.

    json -> report.json (canonical); csv -> one file per tabular series
    (per-edge trajectories and the stationary-phase prefactor curve,
    which double as plot data).  Outputs are byte-identical across runs
    with identical config.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []
    csv_tables = {}
    sp = report.artifacts.get("stationaryPhase")
    if sp is not None:
        csv_tables["stationary_phase.csv"] = sp.to_csv_rows()
    dag = report.artifacts.get("dag")
    if dag is not None:
        for i, edge in enumerate(dag.edges):
            csv_tables[f"trajectory_{i:03d}.csv"] = edge.trajectory.to_csv_rows()

    if "json" in formats:
        path = os.path.join(outdir, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report.to_json_dict()))
        written.append(path)
    if "csv" in formats:
        for name in sorted(csv_tables):
            path = os.path.join(outdir, name)
            with open(path, "w", encoding="utf-8") as fh:
                for row in csv_tables[name]:
                    fh.write(",".join("" if v is None else str(v) for v in row) + "\n")
            written.append(path)
    return written
