"""Run configuration: structured `key = value` text with unit suffixes.

Frequencies given in Hz/kHz/MHz/GHz are ordinary frequencies and are
converted to rad/s on parse; `rad/s` values pass through unchanged. Lengths,
powers and times normalize to SI base units. Keys matching PhysicalParams
fields override the canonical preset; remaining keys configure numerics,
experiment selection and output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .params import (LAMBDA_EFF_DEFAULT, PhysicalParams, REFERENCE_DIMENSIONLESS,
                     from_lambda_eff, reference_preset)

TWO_PI = 2.0 * math.pi

# suffix -> multiplier into internal units (rad/s, m, W, s)
UNIT_FACTORS = {
    "Hz": TWO_PI,
    "kHz": TWO_PI * 1e3,
    "MHz": TWO_PI * 1e6,
    "GHz": TWO_PI * 1e9,
    "rad/s": 1.0,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "W": 1.0,
    "mW": 1e-3,
    "uW": 1e-6,
    "s": 1.0,
    "ms": 1e-3,
    "dimensionless": 1.0,
}

PHYSICAL_FIELDS = {f.name for f in fields(PhysicalParams)}


class ConfigError(ValueError):
    """Invalid configuration text or values (CLI exit code 1)."""


def _parse_scalar(raw: str, key: str):
    parts = raw.split()
    if len(parts) == 2 and parts[1] in UNIT_FACTORS:
        try:
            return float(parts[0]) * UNIT_FACTORS[parts[1]]
        except ValueError:
            raise ConfigError(f"bad numeric value for {key!r}: {raw!r}") from None
    if len(parts) == 2 and parts[1] not in UNIT_FACTORS:
        raise ConfigError(f"unknown unit {parts[1]!r} for {key!r}")
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if "," in raw:
        try:
            return [float(tok) for tok in raw.split(",") if tok.strip()]
        except ValueError:
            return raw
    try:
        f = float(raw)
    except ValueError:
        return raw
    if f == int(f) and ("." not in raw and "e" not in raw.lower()):
        return int(raw)
    return f


def parse_config_text(text: str) -> dict:
    """Parse `key = value [unit]` lines; '#' starts a comment."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"line {lineno}: empty key or value in {line!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _parse_scalar(raw, key)
    return out


EXPERIMENTS = ("fig1", "fig2", "fig3", "kbar-sweep", "coupled-check", "custom")

# SI evolution-time targets per experiment (seconds).
DEFAULT_T_FINAL = {
    "fig1": 4.19e-2,
    "fig2": 4.19e-2,
    "fig3": 2.09e-2,
    "kbar-sweep": 4.19e-2,
    "custom": 4.19e-2,
}


@dataclass
class RunConfig:
    """Everything an experiment runner needs, with reproducible defaults."""

    experiment: str = "custom"
    out_dir: str = "out"
    seed: int = 12345
    threads: int = 1

    # effective (dimensionless) parameters
    mu: float = REFERENCE_DIMENSIONLESS["mu"]
    mu1: float = REFERENCE_DIMENSIONLESS["mu1"]
    beta: float = REFERENCE_DIMENSIONLESS["beta"]
    gamma_eff: float = REFERENCE_DIMENSIONLESS["gamma_eff"]
    gamma: float = 1.0
    kbar: float = 1.0
    lambda_eff: float | None = None      # direct dimensionless modulation
    lambda_caption: float = 1.05e-5      # modulation numeral as published
    lambda_scale: float | None = None    # explicit factor: lambda_eff = caption*scale

    # time stepping
    steps_per_period: int = 256          # dtau = (pi/2)/steps_per_period
    t_final: float | None = None         # seconds; default per experiment
    tau_final: float | None = None       # dimensionless override
    strobe_stride: int = 1               # drive periods between recordings

    # quantum grid
    grid_n: int = 2048
    grid_x_min: float = -40.0
    grid_x_max: float = 40.0
    packet_x0: float = 0.0
    packet_p0: float = 0.0
    packet_dx: float | None = None       # default sqrt(kbar/2)

    # classical ensemble
    n_trajectories: int = 10_000
    ensemble_kind: str = "gaussian"
    uniform_lo: float = -4.0
    uniform_hi: float = 4.0

    # distribution emission
    dist_bins: int = 256
    dist_p_max: float = 32.0
    dist_tail_fraction: float = 0.2      # trailing strobe fraction averaged
    x_si_scale: float | None = None      # optional m-per-unit scale for CSVs
    p_si_scale: float | None = None      # optional kg*m/s-per-unit scale

    # poincare section
    poincare_n: int = 400
    poincare_periods: int = 512

    # fig2 space-time maps
    fig2_grid_n: int = 1024
    fig2_x_min: float = -20.0
    fig2_x_max: float = 20.0
    fig2_bins: int = 256
    fig2_stride: int = 4                 # periods between matrix rows

    # fig3 modulation sweep
    lambda_list: list[float] | None = None
    sweep_points: int = 41
    sweep_grid_n: int = 1024
    time_averaged: bool = False

    # kbar sweep
    kbar_list: list[float] = field(default_factory=lambda: [1.0, 0.5, 0.25])
    kbar_minisweep_points: int = 9

    # coupled-model checks
    coupled_variant: str = "q-operator"
    coupled_rtol: float = 1e-10
    coupled_periods: int = 10            # mirror periods
    delta_tilde: float | None = None     # rad/s; default mu * kappa

    # overrides applied to the canonical SI preset
    physical_overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {', '.join(EXPERIMENTS)}")
        if self.steps_per_period < 1:
            raise ConfigError("steps_per_period must be a positive integer")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.strobe_stride < 1 or self.fig2_stride < 1:
            raise ConfigError("strobe strides must be >= 1")
        if self.kbar_list != sorted(self.kbar_list, reverse=True):
            raise ConfigError("kbar_list must be descending")

    @property
    def resolved_lambda_eff(self) -> float:
        """Modulation precedence: direct value, then caption*scale, then default."""
        if self.lambda_eff is not None:
            return float(self.lambda_eff)
        if self.lambda_scale is not None:
            return float(self.lambda_caption * self.lambda_scale)
        return LAMBDA_EFF_DEFAULT

    @property
    def dtau(self) -> float:
        return (math.pi / 2.0) / self.steps_per_period

    def physical(self) -> PhysicalParams:
        """Canonical SI preset with any configured field overrides applied."""
        phys, _ = reference_preset(self.resolved_lambda_eff, self.kbar)
        if self.physical_overrides:
            phys = replace(phys, **self.physical_overrides)
        return phys

    def effective(self, lambda_eff: float | None = None, kbar: float | None = None):
        lam = self.resolved_lambda_eff if lambda_eff is None else lambda_eff
        return from_lambda_eff(lam, gamma=self.gamma, beta=self.beta,
                               mu=self.mu, mu1=self.mu1,
                               gamma_eff=self.gamma_eff,
                               kbar=self.kbar if kbar is None else kbar)

    def resolved_tau_final(self) -> float:
        """Evolution horizon in tau, from tau_final or t_final or the
        experiment default."""
        if self.tau_final is not None:
            return float(self.tau_final)
        t = self.t_final
        if t is None:
            t = DEFAULT_T_FINAL.get(self.experiment, DEFAULT_T_FINAL["custom"])
        omega_m = self.physical().mirror_frequency
        return omega_m * t / 4.0

    def n_periods(self) -> int:
        """Whole drive periods covering the horizon (strobes stay aligned)."""
        return max(1, round(self.resolved_tau_final() / (math.pi / 2.0)))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        kwargs: dict = {}
        overrides: dict = {}
        for key, value in data.items():
            if key in ("physical_overrides",):
                raise ConfigError(f"key {key!r} cannot be set directly")
            if key in PHYSICAL_FIELDS:
                overrides[key] = value
            elif key in known:
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        if "lambda_list" in kwargs and isinstance(kwargs["lambda_list"], (int, float)):
            kwargs["lambda_list"] = [float(kwargs["lambda_list"])]
        if "kbar_list" in kwargs and isinstance(kwargs["kbar_list"], (int, float)):
            kwargs["kbar_list"] = [float(kwargs["kbar_list"])]
        cfg = cls(physical_overrides=overrides, **kwargs)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        return cls.from_dict(parse_config_text(text))

    def to_flat_dict(self) -> dict:
        """All fields flattened for metadata emission."""
        out = {}
        for f in fields(self):
            if f.name == "physical_overrides":
                continue
            val = getattr(self, f.name)
            out[f.name] = val
        out["resolved_lambda_eff"] = self.resolved_lambda_eff
        out["resolved_tau_final"] = self.resolved_tau_final()
        out["n_periods"] = self.n_periods()
        for key, val in sorted(self.physical_overrides.items()):
            out[f"override.{key}"] = val
        return out
