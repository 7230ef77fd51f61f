"""Experiment specs, sweeps, presets, and the runner that produces result rows.

A spec is one metric evaluated over an optional parameter sweep, optionally
repeated over variants (protocol or parameter overrides) so one CSV can carry
a whole figure's worth of curves.  Rows have a fixed twelve-column schema:
missing entries stay None and serialize as empty cells.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import analytic, montecarlo
from .analytic import CoverageBounds, DensityProfileKind
from .montecarlo import DEFAULT_R_SIM, DEFAULT_TRIALS
from .params import SystemParams
from .protocols import ProtocolKind

METRICS = ("opportunity", "coverage_primary", "coverage_secondary",
           "throughput", "density_profile")
MODES = ("analytic", "simulate", "both")

_PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(SystemParams))

RESULT_COLUMNS = ("protocol", "metric", "sweep_name", "sweep_value",
                  "analytic_value", "bound_lower", "bound_upper",
                  "simulated_mean", "simulated_stderr", "n_trials",
                  "n_rejected", "seed")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.variable != "Q_target" and self.variable not in _PARAM_FIELDS:
            raise ConfigError(f"unknown sweep variable {self.variable!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError("sweep grid must be non-empty")
        if not all(math.isfinite(v) for v in values):
            raise ConfigError("sweep grid must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Variant:
    """One curve within a spec: optional label, protocol and parameter overrides."""

    label: str | None = None
    protocol: ProtocolKind | None = None
    overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key in self.overrides:
            if key not in _PARAM_FIELDS:
                raise ConfigError(f"unknown override parameter {key!r}")


@dataclass(frozen=True)
class ProfileSpec:
    center: str = "typical_PR"
    population: str = "active_STs"
    r_max: float = 5.0
    n_bins: int = 20

    def __post_init__(self) -> None:
        if self.center not in montecarlo._CENTER_NAMES:
            raise ConfigError(f"unknown profile center {self.center!r}")
        if self.population not in montecarlo._POPULATION_NAMES:
            raise ConfigError(f"unknown profile population {self.population!r}")
        if not (self.r_max > 0 and self.n_bins >= 1):
            raise ConfigError("profile needs r_max > 0 and n_bins >= 1")


@dataclass(frozen=True)
class ExperimentSpec:
    params: SystemParams
    protocol: ProtocolKind
    metric: str
    mode: str = "both"
    sweep: SweepSpec | None = None
    variants: tuple[Variant, ...] = ()
    n_trials: int = DEFAULT_TRIALS
    seed: int = 0
    r_sim: float = DEFAULT_R_SIM
    profile: ProfileSpec | None = None

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be positive")
        if self.r_sim <= 0:
            raise ConfigError("r_sim must be positive")
        if self.metric == "density_profile":
            if self.sweep is not None:
                raise ConfigError("density_profile does not support sweeps")
            if self.profile is None:
                object.__setattr__(self, "profile", ProfileSpec())
        object.__setattr__(self, "variants", tuple(self.variants))


@dataclass(frozen=True)
class ResultRow:
    protocol: str
    metric: str
    sweep_name: str
    sweep_value: float | None
    analytic_value: float | None = None
    bound_lower: float | None = None
    bound_upper: float | None = None
    simulated_mean: float | None = None
    simulated_stderr: float | None = None
    n_trials: int | None = None
    n_rejected: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        populated = any(v is not None for v in
                        (self.analytic_value, self.bound_lower, self.bound_upper,
                         self.simulated_mean))
        if not populated:
            raise ValueError("result row carries no values")
        if (self.bound_lower is not None and self.bound_upper is not None
                and self.bound_lower > self.bound_upper + 1e-12):
            raise ValueError("result row bounds out of order")

    def as_dict(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in RESULT_COLUMNS}


# ---------------------------------------------------------------------------
# Serialization (JSON config <-> spec), keys match field names exactly.

def spec_to_dict(spec: ExperimentSpec) -> dict[str, Any]:
    params = {name: getattr(spec.params, name) for name in _PARAM_FIELDS}
    out: dict[str, Any] = {
        "params": params,
        "protocol": spec.protocol.value,
        "metric": spec.metric,
        "mode": spec.mode,
        "sweep": None if spec.sweep is None else
            {"variable": spec.sweep.variable, "values": list(spec.sweep.values)},
        "variants": [
            {"label": v.label,
             "protocol": None if v.protocol is None else v.protocol.value,
             "overrides": dict(v.overrides)}
            for v in spec.variants
        ],
        "n_trials": spec.n_trials,
        "seed": spec.seed,
        "r_sim": spec.r_sim,
        "profile": None if spec.profile is None else dataclasses.asdict(spec.profile),
    }
    return out


def _parse_protocol(name: Any) -> ProtocolKind:
    try:
        return ProtocolKind(str(name))
    except ValueError:
        raise ConfigError(f"unknown protocol {name!r}") from None


def spec_from_dict(doc: dict[str, Any]) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    known = {"params", "protocol", "metric", "mode", "sweep", "variants",
             "n_trials", "seed", "r_sim", "profile"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "protocol" not in doc or "metric" not in doc:
        raise ConfigError("config requires 'protocol' and 'metric'")
    try:
        params = SystemParams(**doc.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad params block: {exc}") from None
    sweep_doc = doc.get("sweep")
    sweep = None
    if sweep_doc is not None:
        if not isinstance(sweep_doc, dict) or set(sweep_doc) - {"variable", "values"}:
            raise ConfigError("sweep must be {'variable': ..., 'values': [...]}")
        sweep = SweepSpec(sweep_doc.get("variable", ""), tuple(sweep_doc.get("values", ())))
    variants = []
    for v in doc.get("variants", ()):
        if not isinstance(v, dict) or set(v) - {"label", "protocol", "overrides"}:
            raise ConfigError(f"bad variant entry: {v!r}")
        proto = v.get("protocol")
        variants.append(Variant(
            label=v.get("label"),
            protocol=None if proto is None else _parse_protocol(proto),
            overrides=dict(v.get("overrides", {})),
        ))
    profile_doc = doc.get("profile")
    if profile_doc is None:
        profile = None
    else:
        try:
            profile = ProfileSpec(**profile_doc)
        except TypeError as exc:
            raise ConfigError(f"bad profile block: {exc}") from None
    try:
        return ExperimentSpec(
            params=params,
            protocol=_parse_protocol(doc["protocol"]),
            metric=str(doc["metric"]),
            mode=str(doc.get("mode", "both")),
            sweep=sweep,
            variants=tuple(variants),
            n_trials=int(doc.get("n_trials", DEFAULT_TRIALS)),
            seed=int(doc.get("seed", 0)),
            r_sim=float(doc.get("r_sim", DEFAULT_R_SIM)),
            profile=profile,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Sweep application

def _apply_sweep_value(params: SystemParams, variable: str, value: float,
                       protocol: ProtocolKind) -> SystemParams:
    if variable != "Q_target":
        return params.replace(**{variable: value})
    if protocol is ProtocolKind.PRA:
        N = analytic.threshold_for_opportunity(value, params.mu_p, params.P_p, params.alpha)
        return params.replace(N_ra=N)
    if protocol is ProtocolKind.PTA:
        N = analytic.threshold_for_opportunity(value, params.mu_p, params.P_p, params.alpha)
        return params.replace(N_ta=N)
    if protocol in (ProtocolKind.ERR, ProtocolKind.ERT):
        D = analytic.exclusion_radius_for_opportunity(value, params.mu_p)
        return params.replace(D_excl=D)
    raise ConfigError(f"Q_target sweep undefined for protocol {protocol.value}")


def _point_seed(base: int, variant_index: int, point_index: int) -> int:
    # distinct, reproducible seed per (variant, sweep point)
    return base + 100_003 * variant_index + 1_009 * point_index


# ---------------------------------------------------------------------------
# Metric evaluation helpers; each returns row field fragments.

def _analytic_opportunity(params: SystemParams, protocol: ProtocolKind) -> float:
    if protocol in (ProtocolKind.PRA, ProtocolKind.PTA):
        N = params.require("N_ra" if protocol is ProtocolKind.PRA else "N_ta")
        return analytic.spatial_opportunity(params.mu_p, params.P_p, N, params.alpha)
    if protocol in (ProtocolKind.ERR, ProtocolKind.ERT):
        return analytic.exclusion_opportunity(params.mu_p, params.require("D_excl"))
    raise ConfigError(f"opportunity undefined for protocol {protocol.value}")


def _analytic_coverage_primary(params: SystemParams, protocol: ProtocolKind):
    """-> (value, bounds) with unused slot None."""
    if protocol is ProtocolKind.PRA:
        return analytic.coverage_primary_pra(params), None
    if protocol is ProtocolKind.PTA:
        return None, analytic.coverage_primary_pta_bounds(params)
    if protocol is ProtocolKind.ALL_ACTIVE:
        return analytic.coverage_primary_all_active(params), None
    if protocol is ProtocolKind.NONE_ACTIVE:
        return analytic.coverage_primary_no_secondaries(params), None
    return None, None  # exclusion protocols: simulation-only


def _analytic_coverage_secondary(params: SystemParams, protocol: ProtocolKind):
    if protocol is ProtocolKind.PRA:
        return None, CoverageBounds(analytic.coverage_secondary_pra_lower(params), 1.0), True
    if protocol is ProtocolKind.PTA:
        return None, analytic.coverage_secondary_pta_bounds(params), False
    if protocol is ProtocolKind.ALL_ACTIVE:
        return analytic.coverage_secondary_all_active(params), None, False
    return None, None, False


def _profile_kind_for(protocol: ProtocolKind, center: str, population: str):
    """Map a simulated profile configuration onto a closed-form tag.

    -> (kind, is_exact) or (None, False) when no formula applies.
    """
    table = {
        (ProtocolKind.PRA, "typical_PR", "active_STs"): (DensityProfileKind.ST_AROUND_PR_PRA, True),
        (ProtocolKind.PTA, "typical_PT", "active_STs"): (DensityProfileKind.ST_AROUND_PT_PTA, True),
        (ProtocolKind.PTA, "typical_PR", "active_STs"): (DensityProfileKind.ST_AROUND_PR_PTA_UPPER, False),
        (ProtocolKind.PRA, "typical_ST", "active_PRs"): (DensityProfileKind.PR_AROUND_ST_PRA, True),
        (ProtocolKind.PTA, "typical_ST", "active_PTs"): (DensityProfileKind.PT_AROUND_ST_PTA, True),
        (ProtocolKind.PRA, "typical_ST", "active_PTs"): (DensityProfileKind.PT_AROUND_ST_PRA_UPPER, False),
        (ProtocolKind.PRA, "typical_SR", "active_PTs"): (DensityProfileKind.PT_AROUND_SR_PRA_UPPER, False),
        (ProtocolKind.PTA, "typical_SR", "active_PTs"): (DensityProfileKind.PT_AROUND_SR_PTA_UPPER, False),
    }
    return table.get((protocol, center, population), (None, False))


def _emit(rows: list[ResultRow], *args, **kwargs) -> None:
    """Append a row unless it would carry no values at all, which happens in
    analytic-only mode for simulation-only protocols (no closed form)."""
    if any(kwargs.get(k) is not None for k in
           ("analytic_value", "bound_lower", "bound_upper", "simulated_mean")):
        rows.append(ResultRow(*args, **kwargs))


def _run_point(spec: ExperimentSpec, params: SystemParams, protocol: ProtocolKind,
               sweep_name: str, sweep_value: float | None, seed: int) -> list[ResultRow]:
    analytic_on = spec.mode in ("analytic", "both")
    simulate_on = spec.mode in ("simulate", "both")
    proto = protocol.value
    rows: list[ResultRow] = []

    if spec.metric == "opportunity":
        value = _analytic_opportunity(params, protocol) if analytic_on else None
        est = None
        if simulate_on:
            est = montecarlo.estimate_spatial_opportunity(
                params, protocol, spec.n_trials, seed, r_sim=spec.r_sim)
        _emit(rows,
            proto, "opportunity", sweep_name, sweep_value,
            analytic_value=value,
            simulated_mean=None if est is None else est.mean,
            simulated_stderr=None if est is None else est.stderr,
            n_trials=None if est is None else est.n_trials,
            n_rejected=None if est is None else est.n_rejected,
            seed=None if est is None else seed,
        )
        return rows

    if spec.metric == "coverage_primary":
        value = bounds = None
        if analytic_on:
            value, bounds = _analytic_coverage_primary(params, protocol)
        est = None
        if simulate_on:
            est = montecarlo.estimate_coverage_primary(
                params, protocol, spec.n_trials, seed, r_sim=spec.r_sim)
        _emit(rows,
            proto, "coverage_primary", sweep_name, sweep_value,
            analytic_value=value,
            bound_lower=None if bounds is None else bounds.lower,
            bound_upper=None if bounds is None else bounds.upper,
            simulated_mean=None if est is None else est.mean,
            simulated_stderr=None if est is None else est.stderr,
            n_trials=None if est is None else est.n_trials,
            n_rejected=None if est is None else est.n_rejected,
            seed=None if est is None else seed,
        )
        return rows

    if spec.metric == "coverage_secondary":
        if protocol is ProtocolKind.NONE_ACTIVE:
            raise ConfigError("coverage_secondary undefined under NONE_ACTIVE")
        value = bounds = None
        one_sided = False
        if analytic_on:
            value, bounds, one_sided = _analytic_coverage_secondary(params, protocol)
        est = None
        if simulate_on:
            est = montecarlo.estimate_coverage_secondary(
                params, protocol, spec.n_trials, seed, r_sim=spec.r_sim)
        _emit(rows,
            proto, "coverage_secondary", sweep_name, sweep_value,
            analytic_value=value,
            bound_lower=None if bounds is None else bounds.lower,
            bound_upper=None if bounds is None or one_sided else bounds.upper,
            simulated_mean=None if est is None else est.mean,
            simulated_stderr=None if est is None else est.stderr,
            n_trials=None if est is None else est.n_trials,
            n_rejected=None if est is None else est.n_rejected,
            seed=None if est is None else seed,
        )
        return rows

    if spec.metric == "throughput":
        an_p = an_s = None
        if analytic_on:
            an_p, an_s = _analytic_throughput(params, protocol)
        est_p = est_s = None
        if simulate_on:
            est_p, est_s = montecarlo.estimate_throughput(
                params, protocol, spec.n_trials, seed, r_sim=spec.r_sim)
        for suffix, an, est in (("primary", an_p, est_p), ("secondary", an_s, est_s)):
            value, lo, up = an if an is not None else (None, None, None)
            _emit(rows,
                proto, f"throughput_{suffix}", sweep_name, sweep_value,
                analytic_value=value, bound_lower=lo, bound_upper=up,
                simulated_mean=None if est is None else est.mean,
                simulated_stderr=None if est is None else est.stderr,
                n_trials=None if est is None else est.n_trials,
                n_rejected=None if est is None else est.n_rejected,
                seed=None if est is None else seed,
            )
        return rows

    # density_profile
    prof = spec.profile
    edges = np.linspace(0.0, prof.r_max, prof.n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    kind_tag, exact = (None, False)
    if analytic_on:
        kind_tag, exact = _profile_kind_for(protocol, prof.center, prof.population)
    profile = None
    if simulate_on:
        profile = montecarlo.estimate_conditional_density(
            params, protocol, prof.center, prof.population, edges,
            spec.n_trials, seed, r_sim=spec.r_sim)
    for i, r in enumerate(centers):
        value = upper = None
        if kind_tag is not None:
            v = float(analytic.conditional_density(kind_tag, r, params))
            if exact:
                value = v
            else:
                upper = v
        _emit(rows,
            proto, "density_profile", "bin_center", float(r),
            analytic_value=value, bound_upper=upper,
            simulated_mean=None if profile is None else float(profile.bin_density[i]),
            simulated_stderr=None if profile is None else float(profile.bin_stderr[i]),
            n_trials=None if profile is None else spec.n_trials,
            seed=None if profile is None else seed,
        )
    return rows


def _analytic_throughput(params: SystemParams, protocol: ProtocolKind):
    """-> ((value, lower, upper) or None) per network."""
    value_p, bounds_p = _analytic_coverage_primary(params, protocol)
    primary = None
    if value_p is not None:
        primary = (analytic.spatial_throughput("primary", params, value_p), None, None)
    elif bounds_p is not None:
        tb = analytic.spatial_throughput("primary", params, bounds_p)
        primary = (None, tb.lower, tb.upper)

    secondary = None
    if protocol is ProtocolKind.NONE_ACTIVE:
        secondary = (0.0, None, None)
    else:
        try:
            Q = 1.0 if protocol is ProtocolKind.ALL_ACTIVE else _analytic_opportunity(params, protocol)
        except ConfigError:
            Q = None
        if Q is not None:
            value_s, bounds_s, one_sided = _analytic_coverage_secondary(params, protocol)
            if value_s is not None:
                secondary = (analytic.spatial_throughput("secondary", params, value_s, opportunity=Q),
                             None, None)
            elif bounds_s is not None:
                tb = analytic.spatial_throughput("secondary", params, bounds_s, opportunity=Q)
                secondary = (None, tb.lower, None if one_sided else tb.upper)
    return primary, secondary


def run(spec: ExperimentSpec) -> list[ResultRow]:
    """Evaluate the spec: one row per sweep point (two for throughput, one per
    bin for density profiles), variants concatenated in declaration order.

    Rows that would carry no values are dropped; this happens in analytic mode
    for protocols that have no closed form for the requested metric."""
    variants = spec.variants or (Variant(),)
    rows: list[ResultRow] = []
    for vi, variant in enumerate(variants):
        protocol = variant.protocol or spec.protocol
        try:
            params0 = spec.params.replace(**variant.overrides) if variant.overrides else spec.params
        except ValueError as exc:
            raise ConfigError(f"bad variant overrides: {exc}") from None
        if spec.sweep is None:
            name = "point" if variant.label is None else f"point@{variant.label}"
            rows.extend(_run_point(spec, params0, protocol, name, None,
                                   _point_seed(spec.seed, vi, 0)))
            continue
        name = spec.sweep.variable if variant.label is None else \
            f"{spec.sweep.variable}@{variant.label}"
        for pi, value in enumerate(spec.sweep.values):
            try:
                params_i = _apply_sweep_value(params0, spec.sweep.variable, value, protocol)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            rows.extend(_run_point(spec, params_i, protocol, name, value,
                                   _point_seed(spec.seed, vi, pi)))
    return rows


# ---------------------------------------------------------------------------
# Presets: the standard comparison figures.

_Q_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)
_MU_GRID = tuple(np.round(np.linspace(0.005, 0.05, 10), 6))


def preset(name: str) -> ExperimentSpec:
    """Named experiment producing one figure's data."""
    base = SystemParams()
    if name == "fig3":
        variants = tuple(
            Variant(label=f"PpN{ratio}", protocol=proto,
                    overrides={"N_ra": base.P_p / ratio, "N_ta": base.P_p / ratio})
            for proto in (ProtocolKind.PRA, ProtocolKind.PTA)
            for ratio in (1, 5, 10)
        )
        return ExperimentSpec(base, ProtocolKind.PRA, "opportunity",
                              sweep=SweepSpec("mu_p", _MU_GRID), variants=variants)
    if name in ("fig4a", "fig4b", "fig5a", "fig5b"):
        lam = 0.01 if name.endswith("a") else 0.1
        metric = "coverage_primary" if name.startswith("fig4") else "coverage_secondary"
        return ExperimentSpec(
            base.replace(lambda_0=lam), ProtocolKind.PRA, metric,
            sweep=SweepSpec("Q_target", _Q_GRID),
            variants=(Variant(protocol=ProtocolKind.PRA),
                      Variant(protocol=ProtocolKind.PTA)),
            n_trials=20_000,
        )
    if name in ("fig6", "fig7"):
        variants = tuple(
            Variant(label=f"lam{lam}", protocol=proto, overrides={"lambda_0": lam})
            for lam in (0.01, 0.1)
            for proto in (ProtocolKind.PRA, ProtocolKind.PTA)
        )
        return ExperimentSpec(base, ProtocolKind.PRA, "throughput",
                              sweep=SweepSpec("Q_target", _Q_GRID),
                              variants=variants, n_trials=20_000)
    if name == "fig8":
        variants = tuple(
            Variant(label=f"lam{lam}", protocol=proto, overrides={"lambda_0": lam})
            for lam in (0.01, 0.1)
            for proto in (ProtocolKind.PRA, ProtocolKind.PTA,
                          ProtocolKind.ERR, ProtocolKind.ERT)
        )
        return ExperimentSpec(base, ProtocolKind.PRA, "throughput",
                              sweep=SweepSpec("Q_target", _Q_GRID),
                              variants=variants, n_trials=20_000)
    raise ConfigError(f"unknown preset {name!r}")


PRESET_NAMES = ("fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig6", "fig7", "fig8")
