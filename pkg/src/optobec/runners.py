"""Experiment runners: figure-style reproductions, sweeps and artifact emission.

Every runner writes headered CSV files (UTF-8, LF, repr-round-trip floats)
plus a flat key=value metadata file into its output directory and nowhere
else. Reruns with identical config and seed produce byte-identical CSVs,
independent of the worker count: sweep points are embarrassingly parallel
pure functions and results are written in task order from the main process.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analysis import (DistributionSnapshot, ObservableSeries, classical_tail_region,
                       detect_break_time, fit_exponential_tail, fit_power_law,
                       saturation_stats)
from .classical import (ClassicalEnsemble, HistogramRecorder, classify_section,
                        evolve as evolve_classical, matched_gaussian, poincare,
                        sample_ensemble)
from .config import DEFAULT_T_FINAL, RunConfig
from .potential import DRIVE_PERIOD, EffectivePotential
from .quantum import (DensityRecorder, Grid, evolve as evolve_quantum,
                      gaussian_packet, time_averaged_distribution)


@dataclass
class ArtifactSet:
    """Paths and headline metrics produced by one experiment run."""

    out_dir: str
    files: dict[str, str] = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


class _Emitter:
    """Collects artifact files; removes partial output if emission fails."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.files: dict[str, str] = {}

    def __enter__(self) -> "_Emitter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            for path in self.files.values():
                try:
                    os.unlink(path)
                except OSError:
                    pass

    def csv(self, name: str, header: list[str], rows) -> str:
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self.files[name] = path
        return path

    def matrix_csv(self, name: str, coords: np.ndarray, matrix: np.ndarray) -> str:
        header = [_fmt(float(c)) for c in coords]
        return self.csv(name, header, matrix)

    def metadata(self, name: str, entries: dict) -> str:
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in entries.items():
                fh.write(f"{key} = {_fmt(value)}\n")
        self.files[name] = path
        return path


def _base_metadata(cfg: RunConfig) -> dict:
    meta = {"code_version": __version__,
            "wall_clock_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    for key, value in cfg.to_flat_dict().items():
        meta[f"config.{key}"] = value
    return meta


def _t_si(cfg: RunConfig, taus: np.ndarray) -> np.ndarray:
    return 4.0 * taus / cfg.physical().mirror_frequency


def _series_rows(cfg: RunConfig, series: ObservableSeries, columns: list[str]):
    t_si = _t_si(cfg, series.tau)
    cols = [series.tau, t_si] + [series[c] for c in columns]
    return zip(*cols)


def _classical_bins(grid: Grid, rebin: int) -> np.ndarray:
    """Histogram edges matching the quantum grid cells coarsened by `rebin`."""
    edges = grid.x_min + grid.dx * rebin * np.arange(grid.n // rebin + 1)
    return edges


def _momentum_cells(grid: Grid, kbar: float, rebin: int,
                    p_max: float | None = None):
    """(centers, edges, keep-mask) of coarsened momentum cells, optionally
    windowed to |P| <= p_max."""
    p_sorted = np.sort(grid.momenta(kbar), kind="stable")
    centers = p_sorted.reshape(-1, rebin).mean(axis=1)
    width = grid.dp(kbar) * rebin
    if p_max is None:
        keep = np.ones(len(centers), dtype=bool)
    else:
        keep = np.abs(centers) <= p_max
    kept = centers[keep]
    edges = np.concatenate([kept - 0.5 * width, [kept[-1] + 0.5 * width]])
    return kept, edges, keep


def _dist_rows(dist: DistributionSnapshot, si_scale: float | None):
    if si_scale is None:
        return zip(dist.coords, dist.prob)
    return zip(dist.coords, dist.prob, dist.coords * si_scale)


def _dist_header(si_scale: float | None) -> list[str]:
    base = ["coordinate", "probability"]
    return base + (["coordinate_si"] if si_scale is not None else [])


def _tail_fits(meta: dict, prefix: str, dist_q: DistributionSnapshot,
               dist_cl: DistributionSnapshot) -> None:
    """Record outward tail fits of the quantum distribution, with the fit
    region anchored at the classical distribution's 95th percentile."""
    for side in ("right", "left"):
        region = classical_tail_region(dist_cl, side=side)
        key = f"{prefix}_{side}"
        try:
            fit = fit_exponential_tail(dist_q, region)
        except ValueError as exc:
            meta[f"tail.{key}.error"] = str(exc)
            continue
        meta[f"tail.{key}.slope"] = fit.estimate
        meta[f"tail.{key}.stderr"] = fit.stderr
        meta[f"tail.{key}.r_squared"] = fit.r_squared
        meta[f"tail.{key}.window_lo"] = fit.window[0]
        meta[f"tail.{key}.window_hi"] = fit.window[1]


SERIES_COLUMNS = ["X_mean", "P_mean", "dX", "dP", "H_mean", "H0_mean"]


def _quantum_run(cfg: RunConfig, lambda_eff: float, kbar: float, n_periods: int,
                 grid: Grid, record_stride: int = 1, observers: tuple = ()):
    eff = cfg.effective(lambda_eff, kbar)
    pot = EffectivePotential(eff)
    width = cfg.packet_dx if cfg.packet_dx is not None else math.sqrt(kbar / 2.0)
    packet = gaussian_packet(grid, cfg.packet_x0, cfg.packet_p0, width, kbar)
    series = evolve_quantum(packet, pot, n_periods * DRIVE_PERIOD, cfg.dtau,
                            record_every=cfg.steps_per_period * record_stride,
                            observers=observers)
    return packet, series


def _classical_run(cfg: RunConfig, lambda_eff: float, kbar: float, n_periods: int,
                   record_stride: int = 1, observers: tuple = (),
                   n_trajectories: int | None = None):
    eff = cfg.effective(lambda_eff, kbar)
    pot = EffectivePotential(eff)
    n = n_trajectories if n_trajectories is not None else cfg.n_trajectories
    if cfg.ensemble_kind == "gaussian":
        ens = matched_gaussian(n, cfg.seed, kbar,
                               mean=(cfg.packet_x0, cfg.packet_p0))
    else:
        ens = sample_ensemble(cfg.ensemble_kind, n, cfg.seed,
                              bounds=(cfg.uniform_lo, cfg.uniform_hi))
    series = evolve_classical(ens, pot, n_periods * DRIVE_PERIOD, cfg.dtau,
                              record_every=cfg.steps_per_period * record_stride,
                              observers=observers)
    return ens, series


def run_fig1(cfg: RunConfig) -> ArtifactSet:
    """Long-horizon classical/quantum comparison at the operating point.

    Emits dispersion and mean-energy series, time-averaged distributions in
    both representations for both dynamics, a Poincare section, and metadata
    carrying every fitted diagnostic.
    """
    t0 = time.time()
    lam = cfg.resolved_lambda_eff
    kbar = cfg.kbar
    n_per = cfg.n_periods()
    grid = Grid(cfg.grid_x_min, cfg.grid_x_max, cfg.grid_n)
    rebin_x = max(1, cfg.grid_n // cfg.dist_bins)
    rebin_p = max(1, cfg.grid_n // 1024)

    q_rec = DensityRecorder(grid, kbar, rebin_position=rebin_x,
                            rebin_momentum=rebin_p)
    packet, q_series = _quantum_run(cfg, lam, kbar, n_per, grid,
                                    record_stride=cfg.strobe_stride,
                                    observers=(q_rec,))

    x_edges = _classical_bins(grid, rebin_x)
    p_centers, p_edges, p_keep = _momentum_cells(grid, kbar, rebin_p,
                                                 cfg.dist_p_max)
    c_rec_x = HistogramRecorder(x_edges, None, kind="position")
    c_rec_p = HistogramRecorder(p_edges, None, kind="momentum")
    ens, c_series = _classical_run(cfg, lam, kbar, n_per,
                                   record_stride=cfg.strobe_stride,
                                   observers=(c_rec_x, c_rec_p))

    # time-averaged distributions over the trailing strobe fraction
    n_keep = max(1, int(round(cfg.dist_tail_fraction * len(q_rec.taus))))
    q_dist_x = time_averaged_distribution(q_rec.snapshots("position")[-n_keep:])
    q_mom_native = time_averaged_distribution(q_rec.snapshots("momentum")[-n_keep:])
    q_dist_p = DistributionSnapshot(coords=p_centers,
                                    prob=q_mom_native.prob[p_keep],
                                    kind="momentum")
    c_dist_x = c_rec_x.time_average(cfg.dist_tail_fraction)
    c_dist_p = c_rec_p.time_average(cfg.dist_tail_fraction)

    # mixed-phase-space section from the uniform square seeding
    sec_ens = sample_ensemble("uniform-square", cfg.poincare_n, cfg.seed + 1,
                              bounds=(cfg.uniform_lo, cfg.uniform_hi))
    pot = EffectivePotential(cfg.effective(lam, kbar))
    section = poincare(sec_ens, pot, cfg.poincare_periods, cfg.dtau)
    labels = classify_section(section)
    n_regular = int(np.sum(labels == "regular"))

    # diagnostics
    meta = _base_metadata(cfg)
    alpha = fit_power_law(c_series, "dP")
    meta["fit.alpha_dP_classical"] = alpha.estimate
    meta["fit.alpha_dP_classical.stderr"] = alpha.stderr
    meta["fit.alpha_dP_classical.r_squared"] = alpha.r_squared
    meta["fit.alpha_dP_classical.window_lo"] = alpha.window[0]
    meta["fit.alpha_dP_classical.window_hi"] = alpha.window[1]
    tau_end = float(c_series.tau[-1])
    for lo, hi in ((20.0, tau_end), (50.0, tau_end), (10.0, tau_end / 2.0)):
        alt = fit_power_law(c_series, "dP", window=(lo, hi))
        meta[f"fit.alpha_sensitivity[{lo:g},{hi:g}]"] = alt.estimate
    alpha_x = fit_power_law(c_series, "dX")
    meta["fit.alpha_dX_classical"] = alpha_x.estimate
    meta["fit.alpha_dX_classical.r_squared"] = alpha_x.r_squared

    tau_b = detect_break_time(q_series, c_series)
    meta["fit.tau_break"] = tau_b if tau_b is not None else "none"

    for col in ("dP", "dX", "H_mean", "H0_mean"):
        stats = saturation_stats(q_series, col)
        meta[f"saturation.quantum_{col}.mean"] = stats.mean
        meta[f"saturation.quantum_{col}.relative_sigma"] = stats.relative_sigma
        meta[f"saturation.quantum_{col}.residual_slope"] = stats.residual_slope
        meta[f"saturation.quantum_{col}.slope"] = stats.slope
    for col in ("dP", "dX"):
        stats = saturation_stats(c_series, col)
        meta[f"saturation.classical_{col}.slope"] = stats.slope

    meta["dispersion.final_dP_classical"] = float(c_series["dP"][-1])
    meta["dispersion.final_dP_quantum"] = float(q_series["dP"][-1])
    meta["dispersion.final_dX_classical"] = float(c_series["dX"][-1])
    meta["dispersion.final_dX_quantum"] = float(q_series["dX"][-1])
    meta["dispersion.ratio_dP"] = float(c_series["dP"][-1] / q_series["dP"][-1])
    meta["dispersion.ratio_dX"] = float(c_series["dX"][-1] / q_series["dX"][-1])

    _tail_fits(meta, "momentum", q_dist_p, c_dist_p)
    _tail_fits(meta, "position", q_dist_x, c_dist_x)

    meta["poincare.n_regular"] = n_regular
    meta["poincare.n_chaotic"] = int(len(labels) - n_regular)
    meta["quantum.max_step_norm_drift"] = q_series.metadata["max_step_norm_drift"]
    meta["quantum.total_norm_drift"] = q_series.metadata["total_norm_drift"]
    meta["si_scale.x"] = cfg.x_si_scale if cfg.x_si_scale is not None else "none"
    meta["si_scale.p"] = cfg.p_si_scale if cfg.p_si_scale is not None else "none"
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.csv("dispersions.csv",
               ["tau", "t_si", "dX_classical", "dP_classical",
                "dX_quantum", "dP_quantum"],
               zip(c_series.tau, _t_si(cfg, c_series.tau),
                   c_series["dX"], c_series["dP"],
                   q_series["dX"], q_series["dP"]))
        em.csv("mean_energy.csv",
               ["tau", "t_si", "H_quantum", "H0_quantum",
                "H_classical", "H0_classical"],
               zip(q_series.tau, _t_si(cfg, q_series.tau),
                   q_series["H_mean"], q_series["H0_mean"],
                   c_series["H_mean"], c_series["H0_mean"]))
        em.csv("distribution_position_quantum.csv",
               _dist_header(cfg.x_si_scale), _dist_rows(q_dist_x, cfg.x_si_scale))
        em.csv("distribution_position_classical.csv",
               _dist_header(cfg.x_si_scale), _dist_rows(c_dist_x, cfg.x_si_scale))
        em.csv("distribution_momentum_quantum.csv",
               _dist_header(cfg.p_si_scale), _dist_rows(q_dist_p, cfg.p_si_scale))
        em.csv("distribution_momentum_classical.csv",
               _dist_header(cfg.p_si_scale), _dist_rows(c_dist_p, cfg.p_si_scale))
        em.csv("poincare.csv",
               ["trajectory_id", "k_period", "X", "P"],
               ((i, k, section.X[k, i], section.P[k, i])
                for i in range(section.n_trajectories)
                for k in range(section.n_periods)))
        em.metadata("metadata.txt", meta)
        files = dict(em.files)

    metrics = {"alpha": alpha.estimate, "alpha_r_squared": alpha.r_squared,
               "tau_break": tau_b,
               "ratio_dP": meta["dispersion.ratio_dP"],
               "ratio_dX": meta["dispersion.ratio_dX"],
               "n_regular": n_regular,
               "n_chaotic": int(len(labels) - n_regular)}
    return ArtifactSet(cfg.out_dir, files, metrics)


def run_fig2(cfg: RunConfig) -> ArtifactSet:
    """Space-time probability maps: quantum/classical x momentum/position."""
    t0 = time.time()
    lam = cfg.resolved_lambda_eff
    kbar = cfg.kbar
    n_per = cfg.n_periods()
    grid = Grid(cfg.fig2_x_min, cfg.fig2_x_max, cfg.fig2_grid_n)
    rebin = max(1, cfg.fig2_grid_n // cfg.fig2_bins)

    q_rec = DensityRecorder(grid, kbar, rebin_position=rebin, rebin_momentum=rebin)
    _, q_series = _quantum_run(cfg, lam, kbar, n_per, grid,
                               record_stride=cfg.fig2_stride, observers=(q_rec,))

    x_edges = _classical_bins(grid, rebin)
    _, p_edges, _ = _momentum_cells(grid, kbar, rebin)
    c_rec_x = HistogramRecorder(x_edges, None, kind="position")
    c_rec_p = HistogramRecorder(p_edges, None, kind="momentum")
    _, c_series = _classical_run(cfg, lam, kbar, n_per,
                                 record_stride=cfg.fig2_stride,
                                 observers=(c_rec_x, c_rec_p))

    taus_q, x_coords, qx = q_rec.matrix("position")
    _, p_coords, qp = q_rec.matrix("momentum")
    taus_c, _, cx = c_rec_x.matrix()
    _, _, cp = c_rec_p.matrix()

    nb = qx.shape[1]
    band = slice(nb // 2 - nb // 8, nb // 2 + nb // 8)  # central 25% of bins
    q_band = float(qx[-1, band].sum())
    c_band = float(cx[-1, band].sum())

    meta = _base_metadata(cfg)
    meta["fig2.n_strobes"] = len(taus_q)
    meta["fig2.bins"] = nb
    meta["fig2.central_band_mass_quantum"] = q_band
    meta["fig2.central_band_mass_classical"] = c_band
    meta["fig2.central_band_ratio"] = q_band / c_band if c_band > 0 else float("inf")
    meta["quantum.max_step_norm_drift"] = q_series.metadata["max_step_norm_drift"]
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.matrix_csv("spacetime_position_quantum.csv", x_coords, qx)
        em.matrix_csv("spacetime_position_classical.csv", x_coords, cx)
        em.matrix_csv("spacetime_momentum_quantum.csv", p_coords, qp)
        em.matrix_csv("spacetime_momentum_classical.csv", p_coords, cp)
        em.csv("spacetime_taus.csv", ["tau", "t_si"],
               zip(taus_q, _t_si(cfg, taus_q)))
        em.metadata("metadata.txt", meta)
        files = dict(em.files)

    metrics = {"n_strobes": len(taus_q), "central_band_ratio":
               meta["fig2.central_band_ratio"]}
    return ArtifactSet(cfg.out_dir, files, metrics)


def _fig3_point(args) -> tuple:
    """One modulation-sweep point; pure function of (config, lambda_eff)."""
    cfg, lam = args
    n_per = cfg.n_periods()
    grid = Grid(cfg.grid_x_min, cfg.grid_x_max, cfg.sweep_grid_n)
    _, q_series = _quantum_run(cfg, lam, cfg.kbar, n_per, grid,
                               record_stride=cfg.strobe_stride)
    _, c_series = _classical_run(cfg, lam, cfg.kbar, n_per,
                                 record_stride=cfg.strobe_stride)
    if cfg.time_averaged:
        q_dx = float(q_series["dX"].mean())
        q_dp = float(q_series["dP"].mean())
        c_dx = float(c_series["dX"].mean())
        c_dp = float(c_series["dP"].mean())
    else:
        q_dx = float(q_series["dX"][-1])
        q_dp = float(q_series["dP"][-1])
        c_dx = float(c_series["dX"][-1])
        c_dp = float(c_series["dP"][-1])
    return (lam, c_dx, c_dp, q_dx, q_dp)


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def interior_minima(values: np.ndarray) -> list[int]:
    """Indices of strict interior local minima of a sampled curve."""
    v = np.asarray(values, dtype=float)
    return [i for i in range(1, len(v) - 1)
            if v[i] < v[i - 1] and v[i] < v[i + 1]]


def run_fig3(cfg: RunConfig) -> ArtifactSet:
    """Dispersion versus modulation strength at a fixed evolution time."""
    t0 = time.time()
    lam0 = cfg.resolved_lambda_eff
    lams = (list(cfg.lambda_list) if cfg.lambda_list
            else list(np.linspace(0.0, 2.0 * lam0, cfg.sweep_points)))
    if not lams:
        raise ValueError("fig3 requires a nonempty modulation list")
    rows = _pmap(_fig3_point, [(cfg, lam) for lam in lams], cfg.threads)

    lam_col = np.array([r[0] for r in rows])
    q_dp = np.array([r[4] for r in rows])
    c_dp = np.array([r[2] for r in rows])
    gaps = np.abs(c_dp - q_dp)
    minima = interior_minima(q_dp)

    meta = _base_metadata(cfg)
    meta["sweep.n_points"] = len(lams)
    meta["sweep.lambda_min"] = float(lam_col.min())
    meta["sweep.lambda_max"] = float(lam_col.max())
    meta["sweep.quantum_dP_minima_count"] = len(minima)
    meta["sweep.quantum_dP_minima_lambdas"] = [float(lam_col[i]) for i in minima]
    meta["sweep.median_gap_dP"] = float(np.median(gaps))
    meta["sweep.max_classical_decline"] = float(
        np.max(np.maximum.accumulate(c_dp) - c_dp))
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.csv("sweep.csv",
               ["lambda_eff", "dX_classical", "dP_classical",
                "dX_quantum", "dP_quantum", "gap_dP"],
               ((r[0], r[1], r[2], r[3], r[4], abs(r[2] - r[4])) for r in rows))
        em.metadata("metadata.txt", meta)
        files = dict(em.files)

    metrics = {"n_points": len(lams), "minima_count": len(minima),
               "median_gap": meta["sweep.median_gap_dP"],
               "max_classical_decline": meta["sweep.max_classical_decline"]}
    return ArtifactSet(cfg.out_dir, files, metrics)


def _grid_covering(cfg: RunConfig, kbar: float, n_base: int,
                   p_need: float) -> Grid:
    """Grid with enough points that the momentum axis reaches p_need at this
    kbar (the momentum span pi*kbar*n/L shrinks with kbar)."""
    length = cfg.grid_x_max - cfg.grid_x_min
    n = n_base
    while math.pi * kbar * n / length < p_need and n < (1 << 20):
        n *= 2
    return Grid(cfg.grid_x_min, cfg.grid_x_max, n)


def _kbar_main_point(args) -> tuple:
    """Final-time dispersion gap at one kbar (matched initial conditions)."""
    cfg, kbar = args
    n_per = cfg.n_periods()
    p_need = max(24.0, 2.0 * cfg.resolved_lambda_eff + 8.0)
    grid = _grid_covering(cfg, kbar, cfg.grid_n, p_need)
    _, q_series = _quantum_run(cfg, cfg.resolved_lambda_eff, kbar, n_per, grid)
    _, c_series = _classical_run(cfg, cfg.resolved_lambda_eff, kbar, n_per)
    return (kbar, float(q_series["dP"][-1]), float(c_series["dP"][-1]))


def _kbar_mini_point(args) -> tuple:
    """Quantum endpoint dispersion at (kbar, lambda) on the sweep horizon."""
    cfg, kbar, lam = args
    n_per = max(1, round((cfg.physical().mirror_frequency
                          * DEFAULT_T_FINAL["fig3"] / 4.0) / DRIVE_PERIOD))
    p_need = max(24.0, 2.0 * lam + 8.0)
    grid = _grid_covering(cfg, kbar, cfg.grid_n, p_need)
    _, q_series = _quantum_run(cfg, lam, kbar, n_per, grid)
    return (kbar, lam, float(q_series["dP"][-1]))


def run_kbar_sweep(cfg: RunConfig) -> ArtifactSet:
    """Quantum-classical gap and sweep-oscillation amplitude versus kbar."""
    t0 = time.time()
    kbars = list(cfg.kbar_list)
    if not kbars:
        raise ValueError("kbar sweep requires a nonempty kbar list")
    lam0 = cfg.resolved_lambda_eff

    main_rows = _pmap(_kbar_main_point, [(cfg, kb) for kb in kbars], cfg.threads)

    mini_rows = []
    if cfg.kbar_minisweep_points > 1:
        mini_lams = np.linspace(0.0, 2.0 * lam0, cfg.kbar_minisweep_points)
        tasks = [(cfg, kb, float(lm)) for kb in kbars for lm in mini_lams]
        mini_rows = _pmap(_kbar_mini_point, tasks, cfg.threads)

    osc: dict[float, float] = {}
    for kb in kbars:
        pts = np.array([r[2] for r in mini_rows if r[0] == kb])
        if len(pts) >= 3:
            x = np.arange(len(pts), dtype=float)
            slope, icpt = np.polyfit(x, pts, 1)
            osc[kb] = float(np.sqrt(np.mean((pts - (slope * x + icpt)) ** 2)))
        else:
            osc[kb] = float("nan")

    gaps = [abs(q - c) for _, q, c in main_rows]
    meta = _base_metadata(cfg)
    meta["kbar.gaps"] = gaps
    meta["kbar.monotone_nonincreasing"] = all(
        gaps[i + 1] <= gaps[i] for i in range(len(gaps) - 1))
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.csv("kbar_sweep.csv",
               ["kbar", "dP_quantum", "dP_classical", "gap_dP",
                "oscillation_amplitude"],
               ((kb, q, c, abs(q - c), osc[kb]) for kb, q, c in main_rows))
        if mini_rows:
            em.csv("kbar_minisweep.csv", ["kbar", "lambda_eff", "dP_quantum"],
                   mini_rows)
        em.metadata("metadata.txt", meta)
        files = dict(em.files)

    metrics = {"gaps": gaps,
               "monotone": meta["kbar.monotone_nonincreasing"]}
    return ArtifactSet(cfg.out_dir, files, metrics)


def run_coupled_check(cfg: RunConfig) -> ArtifactSet:
    """Mean-field and reduced-model runs validating the harmonic-mirror ansatz."""
    from dataclasses import replace as dc_replace

    from .coupled import (CoupledState, evolve_adiabatic, evolve_meanfield,
                          mirror_ansatz_residual)

    t0 = time.time()
    phys = cfg.physical()
    omega_m = phys.mirror_frequency
    delta_tilde = (cfg.delta_tilde if cfg.delta_tilde is not None
                   else cfg.mu * phys.cavity_decay)
    period = 2.0 * math.pi / omega_m
    t_final = cfg.coupled_periods * period
    dt = period / 64.0

    # decoupled limit: both oscillators must stay harmonic
    phys_dec = dc_replace(phys, mirror_coupling=0.0, condensate_coupling=0.0,
                          pump_coupling=0.0, pump_power=0.0)
    state0 = CoupledState(q=1.0, p=0.0, Q=0.5, P=0.0, c=0.0)
    dec = evolve_meanfield(state0, phys_dec, t_final, dt,
                           delta_tilde=delta_tilde, rtol=cfg.coupled_rtol)
    q_ref = np.cos(omega_m * dec.t)
    dec_residual = float(np.max(np.abs(dec.q - q_ref)))
    e_mirror = 0.5 * (dec.q**2 + dec.p**2)
    dec_energy_drift = float(np.max(np.abs(e_mirror - e_mirror[0])))

    # full mean-field run at the preset
    mf = evolve_meanfield(state0, phys, t_final, dt, delta_tilde=delta_tilde,
                          coupling_variant=cfg.coupled_variant,
                          rtol=cfg.coupled_rtol)

    # reduced-model run and mirror-ansatz sweep over the coupling strength
    adiabatic = evolve_adiabatic(CoupledState(q=1.0), phys, t_final, dt,
                                 delta_tilde=delta_tilde, rtol=cfg.coupled_rtol)
    scales = [0.2, 0.4, 0.6, 0.8, 1.0]
    residuals = []
    for s in scales:
        p_s = dc_replace(phys, mirror_coupling=s * phys.mirror_coupling)
        series = evolve_adiabatic(CoupledState(q=1.0), p_s, t_final, dt,
                                  delta_tilde=delta_tilde, rtol=cfg.coupled_rtol)
        res = mirror_ansatz_residual(series, 1.0, omega_m)
        residuals.append((s, s * phys.mirror_coupling, res.value, res.partial))

    meta = _base_metadata(cfg)
    meta["coupled.delta_tilde"] = delta_tilde
    meta["coupled.decoupled_mirror_residual"] = dec_residual
    meta["coupled.decoupled_energy_drift"] = dec_energy_drift
    meta["coupled.ansatz_residual_monotone"] = all(
        residuals[i + 1][2] >= residuals[i][2] for i in range(len(residuals) - 1))
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.csv("meanfield_series.csv",
               ["t", "q", "p", "Q", "P", "re_c", "im_c", "photon_number"],
               zip(mf.t, mf.q, mf.p, mf.Q, mf.P, mf.c.real, mf.c.imag,
                   mf.photon_number))
        em.csv("adiabatic_series.csv",
               ["t", "q", "p", "Q", "P", "photon_number"],
               zip(adiabatic.t, adiabatic.q, adiabatic.p, adiabatic.Q,
                   adiabatic.P, adiabatic.photon_number))
        em.csv("ansatz_residuals.csv",
               ["xi_scale", "xi", "residual", "partial"], residuals)
        em.metadata("metadata.txt", meta)
        files = dict(em.files)

    metrics = {"decoupled_residual": dec_residual,
               "residuals": [r[2] for r in residuals],
               "monotone": meta["coupled.ansatz_residual_monotone"]}
    return ArtifactSet(cfg.out_dir, files, metrics)


def run_custom(cfg: RunConfig) -> ArtifactSet:
    """Config-driven single classical + quantum pair with series output."""
    t0 = time.time()
    lam = cfg.resolved_lambda_eff
    kbar = cfg.kbar
    n_per = cfg.n_periods()
    grid = Grid(cfg.grid_x_min, cfg.grid_x_max, cfg.grid_n)
    _, q_series = _quantum_run(cfg, lam, kbar, n_per, grid,
                               record_stride=cfg.strobe_stride)
    _, c_series = _classical_run(cfg, lam, kbar, n_per,
                                 record_stride=cfg.strobe_stride)

    meta = _base_metadata(cfg)
    meta["quantum.max_step_norm_drift"] = q_series.metadata["max_step_norm_drift"]
    meta["runtime_seconds"] = time.time() - t0

    with _Emitter(cfg.out_dir) as em:
        em.csv("quantum_series.csv",
               ["tau", "t_si"] + SERIES_COLUMNS + ["norm"],
               _series_rows(cfg, q_series, SERIES_COLUMNS + ["norm"]))
        em.csv("classical_series.csv",
               ["tau", "t_si"] + SERIES_COLUMNS,
               _series_rows(cfg, c_series, SERIES_COLUMNS))
        em.metadata("metadata.txt", meta)
        files = dict(em.files)
    return ArtifactSet(cfg.out_dir, files,
                       {"final_dP_quantum": float(q_series["dP"][-1]),
                        "final_dP_classical": float(c_series["dP"][-1])})


RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "kbar-sweep": run_kbar_sweep,
    "coupled-check": run_coupled_check,
    "custom": run_custom,
}
