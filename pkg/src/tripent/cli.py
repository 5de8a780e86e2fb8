"""Command-line front end and the scenario functions behind it.

Subcommands::

    tripent fig2         closed-form bound vs exact E3F over a pump-radius sweep
    tripent shalm        energy-time bound for the three-photon timing figures
    tripent phase-match  effective pump momentum and Gaussian-state widths
    tripent simulate     sample, histogram and bound end to end
    tripent bound        bound from ad-hoc widths or entropies

Configuration comes from an INI file (``--config``) whose values are
overridden by command-line flags. Tables go out as CSV (with a leading
``# metadata:`` JSON comment line) or as JSON. Exit status is 0 on
success, 2 for configuration errors and 3 for numerical or validation
failures.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import (
    SHALM_SIGMA_OMEGA,
    SHALM_SIGMA_T,
    e3f_entropic_bound,
    e3f_variance_bound,
    energy_time_bound,
    gaussian_pipeline_bound,
    spdc_closed_form_bound,
)
from .core import BoundReport, CoefficientVectors, ExperimentParams, GHZ_LIKE_COEFFS, TripentError, \
    TripartiteGaussianState, ValidationError
from .sampler import (
    RefinementPolicy,
    adaptive_histogram,
    estimate_bound_from_samples,
    poisson_bound,
    sample_triplets,
    write_histogram_csv,
)
from .schmidt import exact_e3f
from .spdc import (
    PhaseMatchSolution,
    congruent_ln_extraordinary_index,
    effective_pump_momentum,
    gaussian_triphoton_state,
    poling_period,
    wavevector,
)

__all__ = [
    "ConfigError",
    "StageError",
    "CurveTable",
    "SweepSpec",
    "SamplerSpec",
    "ScenarioConfig",
    "SimulationResult",
    "fig2_curve",
    "shalm_scenario",
    "phase_match_table",
    "run_simulation",
    "load_config",
    "main",
]

SCENARIOS = ("fig2", "shalm", "phase-match", "simulate", "bound")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(TripentError):
    """Malformed or inconsistent configuration."""


class StageError(TripentError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage: str, error: Exception):
        super().__init__(f"{stage}: {error}")
        self.stage = stage


@dataclass
class CurveTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = [str(c) for c in self.columns]
        self.rows = [[float(v) for v in row] for row in self.rows]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError("table rows must match the column count")
            if not all(math.isfinite(v) for v in row):
                raise ValidationError("table entries must be finite")

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        buf.write("# metadata: " + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([repr(v) for v in row] for row in self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"columns": self.columns, "rows": self.rows, "metadata": self.metadata}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ConfigError(f"unknown format {fmt!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Pump-radius sweep, in millimetres."""

    variable: str = "sigma_p"
    min: float = 0.01
    max: float = 10.0
    points: int = 61
    scale: str = "log"

    def __post_init__(self):
        if self.variable != "sigma_p":
            raise ConfigError(f"only sigma_p can be swept, got {self.variable!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError("a sweep needs at least 2 points")
        if not self.min < self.max:
            raise ConfigError("sweep min must be below max")
        if self.scale not in ("linear", "log"):
            raise ConfigError("sweep scale must be 'linear' or 'log'")
        if self.scale == "log" and self.min <= 0:
            raise ConfigError("a log sweep needs a positive minimum")

    def values_mm(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, int(self.points))
        return np.linspace(self.min, self.max, int(self.points))


@dataclass(frozen=True)
class SamplerSpec:
    n: int = 1_000_000
    seed: int = 42
    policy: RefinementPolicy = RefinementPolicy()
    binning: str = "fixed"
    counts: str = "samples"
    n_bootstrap: int = 50

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("sample count must be a positive integer")
        if self.binning not in ("fixed", "adaptive"):
            raise ConfigError("binning must be 'fixed' or 'adaptive'")
        if self.counts not in ("samples", "poisson"):
            raise ConfigError("counts must be 'samples' or 'poisson'")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "fig2"
    params: ExperimentParams = ExperimentParams()
    sweep: SweepSpec = SweepSpec()
    sampler: SamplerSpec = SamplerSpec()
    out: Optional[str] = None
    format: str = "csv"
    total: bool = False
    # explicit principal variances (m^2) replace the SPDC-derived state
    state: Optional[TripartiteGaussianState] = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")


def _axes(total: bool) -> int:
    return 2 if total else 1


def fig2_curve(params: ExperimentParams = ExperimentParams(), sigma_p_range=None, total: bool = False,
               k_p_tilde: Optional[float] = None) -> CurveTable:
    """Closed-form bound, exact E3F and their gap across pump radii.

    Args:
        params: source parameters; ``pump_radius_sigma_p`` is replaced per row.
        sigma_p_range: pump radii in metres, or a :class:`SweepSpec` (mm).
        total: report both transverse axes (values doubled) instead of one.
        k_p_tilde: use this effective pump momentum instead of deriving it.
    """
    if sigma_p_range is None:
        sigma_p_range = SweepSpec()
    if isinstance(sigma_p_range, SweepSpec):
        radii = sigma_p_range.values_mm() * 1e-3
    else:
        radii = np.atleast_1d(np.asarray(sigma_p_range, dtype=float))
    if radii.size == 0:
        raise ValidationError("empty pump-radius sweep")
    if k_p_tilde is None:
        k_p_tilde = effective_pump_momentum(params).k_p_tilde
    phase = PhaseMatchSolution.from_k_p_tilde(k_p_tilde, params.crystal_length_Lz)
    k_tilde = phase.k_p_tilde
    scale = _axes(total)
    rows = []
    for sp in radii:
        try:
            row_params = params.replace(pump_radius_sigma_p=float(sp))
            bound = spdc_closed_form_bound(row_params, k_tilde).bound_gebits
            state = gaussian_triphoton_state(phase, float(sp))
            exact = exact_e3f(state.sigma_u_sq, state.sigma_v_sq)
        except TripentError as err:
            raise StageError(f"fig2 row sigma_p={sp:.6g} m", err) from err
        rows.append([sp * 1e3, scale * bound, scale * exact, scale * (exact - bound)])
    meta = {
        "scenario": "fig2",
        "version": __version__,
        "params": params.as_dict(),
        "k_p_tilde": k_tilde,
        "axes": "total" if total else "per_axis",
    }
    return CurveTable(["sigma_p_mm", "bound_gebits", "exact_gebits", "gap_gebits"], rows, meta)


def shalm_scenario(sigma_t: float = SHALM_SIGMA_T, sigma_omega: float = SHALM_SIGMA_OMEGA) -> BoundReport:
    """Energy-time bound from the published timing and pump-bandwidth figures."""
    return energy_time_bound(sigma_t, sigma_omega)


def phase_match_table(params: ExperimentParams = ExperimentParams()) -> CurveTable:
    """Effective pump momentum, Gaussian widths, and Sellmeier cross-check of the periods.

    The cross-check assumes degenerate cascades: the pump splits into
    ``1.5 lambda_p`` and ``3 lambda_p``, and the ``1.5 lambda_p`` photon then
    splits into two ``3 lambda_p`` photons. All beams are extraordinary in
    congruent lithium niobate.
    """
    phase = effective_pump_momentum(params)
    state = gaussian_triphoton_state(phase, params.pump_radius_sigma_p)
    lp = params.lambda_pump
    n = congruent_ln_extraordinary_index
    k = {lam: wavevector(lam, float(n(lam))) for lam in (lp, 1.5 * lp, 3 * lp)}
    period_1 = poling_period(k[lp], k[1.5 * lp], k[3 * lp])
    period_2 = poling_period(k[1.5 * lp], k[3 * lp], k[3 * lp])
    cols = ["k_pump", "k_poling_1", "k_poling_2", "k_p_tilde", "a_param", "sigma_u_sq", "sigma_v_sq",
            "sellmeier_n_pump", "sellmeier_period_1", "sellmeier_period_2"]
    row = [phase.k_pump, phase.k_poling_1, phase.k_poling_2, phase.k_p_tilde, phase.a_param,
           state.sigma_u_sq, state.sigma_v_sq, float(n(lp)), period_1, period_2]
    return CurveTable(cols, [row], {"scenario": "phase-match", "version": __version__, "params": params.as_dict()})


@dataclass
class SimulationResult:
    table: CurveTable
    report: BoundReport
    histograms: dict
    artifacts: dict


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except TripentError as err:
        raise StageError(name, err) from err


def run_simulation(config: ScenarioConfig, out_dir=None, stem: str = "simulation") -> SimulationResult:
    """Phase matching, Gaussian state, sampling, adaptive histograms, sampled bound.

    With ``out_dir`` set, writes ``<stem>.csv`` (the one-row result table),
    ``<stem>.position.csv`` and ``<stem>.momentum.csv`` (3D adaptive
    histograms), and ``<stem>.meta.json`` (report plus metadata). Identical
    configurations produce byte-identical files.
    """
    params = config.params
    spec = config.sampler
    if config.state is None:
        phase = _stage("phase-match", effective_pump_momentum, params)
        state = _stage("state", gaussian_triphoton_state, phase, params.pump_radius_sigma_p)
    else:
        state = config.state
    histograms = {}
    if spec.counts == "poisson":
        binning = spec.policy if spec.binning == "adaptive" else None
        report = _stage("bound", poisson_bound, state, spec.n, spec.seed, binning=binning)
    else:
        xs = _stage("sampling", sample_triplets, state, "position", spec.n, spec.seed)
        ks = _stage("sampling", sample_triplets, state, "momentum", spec.n, spec.seed)
        histograms["position"] = _stage("histogram", adaptive_histogram, xs, spec.policy)
        histograms["momentum"] = _stage("histogram", adaptive_histogram, ks, spec.policy)
        binning = spec.policy if spec.binning == "adaptive" else None
        report = _stage("bound", estimate_bound_from_samples, xs, ks, binning=binning,
                        n_bootstrap=spec.n_bootstrap)
    analytic = _stage("analytic", gaussian_pipeline_bound, state).bound_gebits
    exact = exact_e3f(state.sigma_u_sq, state.sigma_v_sq) if state.is_symmetric else float("nan")
    scale = _axes(config.total)
    cols = ["sigma_p_mm", "bound_gebits", "standard_error", "analytic_gebits", "n_samples", "seed"]
    row = [params.pump_radius_sigma_p * 1e3, scale * report.bound_gebits, scale * (report.standard_error or 0.0),
           scale * analytic, spec.n, spec.seed]
    if math.isfinite(exact):
        cols.insert(4, "exact_gebits")
        row.insert(4, scale * exact)
    meta = {
        "scenario": "simulate",
        "version": __version__,
        "params": params.as_dict(),
        "state": {"sigma_u_sq": state.sigma_u_sq, "sigma_v_sq": state.sigma_v_sq, "sigma_w_sq": state.sigma_w_sq},
        "sampler": {"n": spec.n, "seed": spec.seed, "binning": spec.binning, "counts": spec.counts,
                    "threshold": spec.policy.threshold, "max_depth": spec.policy.max_depth,
                    "leaf_budget": spec.policy.leaf_budget, "n_bootstrap": spec.n_bootstrap},
        "axes": "total" if config.total else "per_axis",
        "flags": list(report.flags),
        "leaves": {k: h.n_leaves for k, h in histograms.items()},
    }
    table = CurveTable(cols, [row], meta)
    artifacts = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{stem}.csv"
        path.write_text(table.to_csv(), encoding="utf-8", newline="")
        artifacts["table"] = path
        for name, hist in histograms.items():
            hpath = out_dir / f"{stem}.{name}.csv"
            write_histogram_csv(hist, hpath, {"domain": name, "seed": spec.seed})
            artifacts[f"histogram_{name}"] = hpath
        jpath = out_dir / f"{stem}.meta.json"
        jpath.write_text(json.dumps({"report": report.as_dict(), "metadata": meta}, sort_keys=True, indent=2) + "\n",
                         encoding="utf-8", newline="")
        artifacts["metadata"] = jpath
    return SimulationResult(table, report, histograms, artifacts)


# configuration ----------------------------------------------------------------

_PARAM_KEYS = {name: float for name in ("lambda_pump", "n_pump", "poling_period_1", "poling_period_2",
                                        "crystal_length_Lz", "pump_radius_sigma_p")}
_PARAM_KEYS.update(poling_sign_1=int, poling_sign_2=int)
_SECTIONS = {
    "scenario": {"name": str},
    "params": _PARAM_KEYS,
    "sweep": {"variable": str, "min": float, "max": float, "points": int, "scale": str},
    "sampler": {"n": int, "seed": int, "threshold": float, "max_depth": int, "leaf_budget": int,
                "binning": str, "counts": str, "n_bootstrap": int},
    "output": {"path": str, "format": str, "total": bool},
    "state": {"sigma_u_sq": float, "sigma_v_sq": float, "sigma_w_sq": float},
}


def _parse_value(kind, raw: str):
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(float(raw)) if float(raw).is_integer() else int(raw)
    return kind(raw.strip())


def load_config(path) -> dict:
    """Read an INI file into ``{section: {key: value}}`` with typed values.

    Keys are the ``ExperimentParams`` field names under ``[params]`` (SI
    units), sweep limits in millimetres under ``[sweep]``, and so on.
    Unknown sections or keys are configuration errors.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    out: dict = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                out[section][key] = _parse_value(_SECTIONS[section][key], raw)
            except ValueError as err:
                raise ConfigError(f"[{section}] {key}: {err}") from err
    return out


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    raw = load_config(args.config) if args.config else {}
    params_kw = dict(raw.get("params", {}))
    if args.sigma_p is not None:
        params_kw["pump_radius_sigma_p"] = args.sigma_p * 1e-3
    if args.crystal_length is not None:
        params_kw["crystal_length_Lz"] = args.crystal_length * 1e-3
    sampler_kw = dict(raw.get("sampler", {}))
    policy_kw = {k: sampler_kw.pop(k) for k in ("threshold", "max_depth", "leaf_budget") if k in sampler_kw}
    if args.samples is not None:
        sampler_kw["n"] = args.samples
    if args.seed is not None:
        sampler_kw["seed"] = args.seed
    output = raw.get("output", {})
    total = output.get("total", False) if args.total is None else args.total
    state = None
    if "state" in raw:
        st = raw["state"]
        try:
            state = TripartiteGaussianState(st["sigma_u_sq"], st["sigma_v_sq"], st.get("sigma_w_sq", st["sigma_v_sq"]))
        except KeyError as err:
            raise ConfigError(f"[state] needs {err}") from err
        except ValidationError as err:
            raise ConfigError(f"[state]: {err}") from err
    try:
        params = ExperimentParams(**params_kw)
        policy = RefinementPolicy(**policy_kw)
    except ValidationError as err:
        raise ConfigError(str(err)) from err
    return ScenarioConfig(
        scenario=args.command,
        params=params,
        sweep=SweepSpec(**raw.get("sweep", {})),
        sampler=SamplerSpec(policy=policy, **sampler_kw),
        out=args.out or output.get("path"),
        format=args.format or output.get("format", "csv"),
        total=total,
        state=state,
    )


def _report_table(report: BoundReport, scenario: str, extra_meta: Optional[dict] = None) -> CurveTable:
    cols = ["bound_gebits"]
    row = [report.bound_gebits]
    for name in ("h_x", "h_k", "sigma_x", "sigma_k"):
        value = getattr(report, name)
        if value is not None:
            cols.append(name)
            row.append(value)
    meta = {"scenario": scenario, "version": __version__, "report": report.as_dict()}
    meta.update(extra_meta or {})
    return CurveTable(cols, [row], meta)


def _triple(text: str):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError("expected exactly three comma-separated numbers")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI configuration file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--sigma-p", type=float, metavar="MM", help="pump radius in mm")
    common.add_argument("--crystal-length", type=float, metavar="MM", help="crystal length in mm")
    common.add_argument("--samples", type=int, metavar="N", help="triplets to sample")
    axes = common.add_mutually_exclusive_group()
    axes.add_argument("--per-axis", dest="total", action="store_false", default=None,
                      help="report one transverse axis (default)")
    axes.add_argument("--total", dest="total", action="store_true", help="report both transverse axes")

    parser = argparse.ArgumentParser(prog="tripent", description="Tripartite entanglement bounds for triphoton sources.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fig2", parents=[common], help="bound and exact E3F across pump radii")
    shalm = sub.add_parser("shalm", parents=[common], help="energy-time bound from timing figures")
    shalm.add_argument("--sigma-t", type=float, default=SHALM_SIGMA_T, metavar="S")
    shalm.add_argument("--sigma-omega", type=float, default=SHALM_SIGMA_OMEGA, metavar="RAD_PER_S")
    sub.add_parser("phase-match", parents=[common], help="effective pump momentum and state widths")
    sub.add_parser("simulate", parents=[common], help="sampled bound from simulated coincidences")
    bound = sub.add_parser("bound", parents=[common], help="bound from given widths or entropies")
    bound.add_argument("--sigma-x", type=float, help="std of the position combination")
    bound.add_argument("--sigma-k", type=float, help="std of the momentum combination")
    bound.add_argument("--h-x", type=float, help="entropy (bits) of the position combination")
    bound.add_argument("--h-k", type=float, help="entropy (bits) of the momentum combination")
    bound.add_argument("--eta", type=_triple, default=GHZ_LIKE_COEFFS.eta, help="e.g. 1,-0.5,-0.5")
    bound.add_argument("--beta", type=_triple, default=GHZ_LIKE_COEFFS.beta, help="e.g. 1,1,1")
    return parser


def _run(args: argparse.Namespace, config: ScenarioConfig) -> str:
    fmt = config.format
    if args.command == "fig2":
        return fig2_curve(config.params, config.sweep, total=config.total).render(fmt)
    if args.command == "shalm":
        report = shalm_scenario(args.sigma_t, args.sigma_omega)
        return _report_table(report, "shalm").render(fmt)
    if args.command == "phase-match":
        return phase_match_table(config.params).render(fmt)
    if args.command == "simulate":
        out_dir, stem = None, "simulation"
        if config.out:
            out_path = Path(config.out)
            out_dir, stem = out_path.parent, out_path.stem
        result = run_simulation(config, out_dir=out_dir, stem=stem)
        return result.table.render(fmt)
    coeffs = CoefficientVectors(args.eta, args.beta)
    if args.sigma_x is not None and args.sigma_k is not None:
        report = e3f_variance_bound(args.sigma_x, args.sigma_k, coeffs)
    elif args.h_x is not None and args.h_k is not None:
        report = e3f_entropic_bound(args.h_x, args.h_k, coeffs)
    else:
        raise ConfigError("bound needs --sigma-x/--sigma-k or --h-x/--h-k")
    return _report_table(report, "bound").render(fmt)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _build_config(args)
        text = _run(args, config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (TripentError, ValueError, ArithmeticError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    if config.out is None:
        sys.stdout.write(text)
    else:
        Path(config.out).write_text(text, encoding="utf-8", newline="")
    return EXIT_OK
