"""Replicated experiments with deterministic parallelism and fixed outputs.

Each replicate draws from its own counter-based stream keyed by
(master_seed, replicate_index), so results are independent of the worker
thread count and of completion order. Outputs are a replicates.csv (one
row per replicate, floats at 17 significant digits) and a summary.json
holding the config echo and one JSON object per statistical check.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import __version__
from .errors import ConfigError, NoRoot
from .haar import haar_columns, randomize_eigenspaces
from .linalg import SpectralDecomposition, resolvent_quadratic_form, sym_eig
from .mp import DiscreteLaw, MarchenkoPastur
from .processes import (
    cross_process_complex,
    cross_process_real,
    diag_process_complex,
    diag_process_real,
    weighted_spectral_cdf,
)
from .rand import RngStream, law_from_name, sample_matrix, sign_vector_family
from .spike import largest_eig_secular, projection_stat, theoretical_solution
from .stats import (
    TestReport,
    covariance_statistic,
    cross_independence_check,
    gaussian_moment_check,
    kolmogorov_cdf,
    ks_distance,
    make_report,
    weighted_ks_distance,
)

__all__ = ["ExperimentConfig", "ReplicateRecord", "run_experiment", "collect_records", "EXPERIMENTS"]

EXPERIMENTS = ("haar-bridge", "cov-bridge", "mp-check", "lambda-max", "spike-detect")

# Path sample grid shared by all bridge experiments.
T_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))
COV_GRID_TIMES = (0.25, 0.5, 0.75)

# Desk-scale thresholds, calibrated at the reference replicate counts:
# Monte Carlo band 1.36/sqrt(R) plus a finite-n allowance.
PIN_THRESHOLD = 1e-8
KS_THRESHOLD_HAAR = 0.06  # reference R = 2000
KS_THRESHOLD_COV = 0.08  # reference R = 1000
COV_DEV_THRESHOLD = 0.05
MP_KS_THRESHOLD = 0.05
SUPPORT_MARGIN = 0.1
LAMBDA_MAX_TOL = 0.1
SPIKE_EIG_TOL = 0.05
SPIKE_VAR_TOL = 0.15
SPIKE_NORM_RTOL = 0.05
SPIKE_SUBCRITICAL_TOL = 0.1
_ZERO_EIG_TOL = 1e-8


@dataclass
class ExperimentConfig:
    """Complete description of one experiment run."""

    experiment: str
    n: int
    s: int | None = None
    m: int = 2
    field: str | None = None
    law: str = "gaussian"
    theta: float | None = None
    y_override: float | None = None
    replicates: int = 1
    master_seed: int = 0
    output_path: str | None = None
    thread_count: int = 1
    zero_noise: bool = False

    def __post_init__(self):
        if self.field is None:
            self.field = "complex" if self.experiment == "haar-bridge" else "real"

    @property
    def y(self) -> float:
        if self.y_override is not None:
            return float(self.y_override)
        if self.s is None:
            raise ConfigError("need s (or y_override) to determine the aspect ratio")
        return self.n / self.s

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.replicates < 1:
            raise ConfigError("replicates must be at least 1")
        if self.thread_count < 1:
            raise ConfigError("thread_count must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must fit in an unsigned 64-bit integer")
        if self.field not in ("real", "complex"):
            raise ConfigError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.y_override is not None and self.y_override <= 0:
            raise ConfigError("y_override must be positive")
        exp = self.experiment
        if exp == "haar-bridge":
            if not 1 <= self.m <= self.n:
                raise ConfigError("need 1 <= m <= n")
        if exp in ("cov-bridge", "mp-check", "lambda-max") or (
            exp == "spike-detect" and not self.zero_noise
        ):
            if self.s is None or self.s < 1:
                raise ConfigError(f"{exp} requires a positive sample count s")
            law_from_name(self.law)  # validates the name
        if exp in ("cov-bridge", "spike-detect"):
            if exp == "spike-detect" and self.m < 2:
                raise ConfigError("spike-detect needs m >= 2 for probe directions")
            if self.m < 1:
                raise ConfigError("m must be positive")
            if self.n % (1 << self.m) != 0:
                raise ConfigError(f"sign vectors need n divisible by 2^m = {1 << self.m}")
        if exp == "cov-bridge":
            if self.field != "real":
                raise ConfigError("cov-bridge is a real-field experiment")
            if law_from_name(self.law).is_complex:
                raise ConfigError("cov-bridge requires a real entry law")
        if exp == "spike-detect":
            if self.theta is None or self.theta <= 0:
                raise ConfigError("spike-detect requires theta > 0")
            if not self.zero_noise and law_from_name(self.law).is_complex != (self.field == "complex"):
                raise ConfigError("entry law and field must agree for spike-detect")


@dataclass
class ReplicateRecord:
    """Scalar outputs of one replicate, keyed by column name."""

    index: int
    scalars: dict


def _process_labels(m: int, field: str) -> list[str]:
    labels = [f"diag{k + 1}" for k in range(m)]
    for j, k in combinations(range(1, m + 1), 2):
        if field == "complex":
            labels.append(f"cross{j}{k}_re")
            labels.append(f"cross{j}{k}_im")
        else:
            labels.append(f"cross{j}{k}")
    return labels


def _bridge_processes(columns, field: str):
    m = len(columns)
    procs = []
    if field == "complex":
        for k in range(m):
            procs.append((f"diag{k + 1}", diag_process_complex(columns[k])))
        for j, k in combinations(range(m), 2):
            re, im = cross_process_complex(columns[j], columns[k])
            procs.append((f"cross{j + 1}{k + 1}_re", re))
            procs.append((f"cross{j + 1}{k + 1}_im", im))
    else:
        for k in range(m):
            procs.append((f"diag{k + 1}", diag_process_real(columns[k])))
        for j, k in combinations(range(m), 2):
            procs.append((f"cross{j + 1}{k + 1}", cross_process_real(columns[j], columns[k])))
    return procs


def _record_processes(scalars: dict, procs) -> None:
    pin = 0.0
    for label, p in procs:
        scalars[f"sup_{label}"] = p.sup_abs()
        pin = max(pin, abs(float(p.values[-1])))
    for label, p in procs:
        for t in T_GRID:
            scalars[f"{label}_t{t:.2f}"] = p.evaluate(t)
    scalars["pin_max"] = pin


def pipeline_haar_bridge(cfg: ExperimentConfig, rng: RngStream) -> ReplicateRecord:
    """Bridge processes from the leading columns of a Haar matrix."""
    q = haar_columns(cfg.n, cfg.m, cfg.field, rng)
    procs = _bridge_processes([q[:, k] for k in range(cfg.m)], cfg.field)
    scalars = {"master_seed": cfg.master_seed}
    _record_processes(scalars, procs)
    return ReplicateRecord(index=rng.stream_index, scalars=scalars)


def _sample_cov_decomposition(cfg: ExperimentConfig, rng: RngStream) -> SpectralDecomposition:
    law = law_from_name(cfg.law)
    v = sample_matrix(law, cfg.n, cfg.s, rng)
    mat = (v @ v.conj().T) / cfg.s
    return randomize_eigenspaces(sym_eig(mat), rng=rng)


def pipeline_cov_bridge(cfg: ExperimentConfig, rng: RngStream) -> ReplicateRecord:
    """Bridge processes from sample covariance eigenvectors and sign vectors."""
    d = _sample_cov_decomposition(cfg, rng)
    xs = sign_vector_family(cfg.n, cfg.m)
    ys = [d.eigenvectors.T @ x for x in xs]
    procs = _bridge_processes(ys, "real")
    w = d.eigenvalues
    scalars = {
        "master_seed": cfg.master_seed,
        "lambda_max": float(w[-1]),
        "n_zero_eigs": int(np.sum(np.abs(w) <= _ZERO_EIG_TOL * (1.0 + abs(w[-1])))),
    }
    _record_processes(scalars, procs)
    return ReplicateRecord(index=rng.stream_index, scalars=scalars)


def pipeline_mp_check(cfg: ExperimentConfig, rng: RngStream) -> ReplicateRecord:
    """Empirical spectral distribution against the limit law."""
    law = law_from_name(cfg.law)
    v = sample_matrix(law, cfg.n, cfg.s, rng)
    d = sym_eig((v @ v.conj().T) / cfg.s)
    w = d.eigenvalues
    ref = MarchenkoPastur(cfg.y)
    a, b = ref.edges
    inside = (w >= a - SUPPORT_MARGIN) & (w <= b + SUPPORT_MARGIN)
    if ref.atom_mass > 0:
        inside |= np.abs(w) <= SUPPORT_MARGIN
    scalars = {
        "master_seed": cfg.master_seed,
        "lambda_min": float(w[0]),
        "lambda_max": float(w[-1]),
        "ks_mp": ks_distance(w, ref.cdf),
        "n_outside_support": int(np.sum(~inside)),
    }
    return ReplicateRecord(index=rng.stream_index, scalars=scalars)


def pipeline_lambda_max(cfg: ExperimentConfig, rng: RngStream) -> ReplicateRecord:
    """Largest sample covariance eigenvalue."""
    law = law_from_name(cfg.law)
    v = sample_matrix(law, cfg.n, cfg.s, rng)
    d = sym_eig((v @ v.conj().T) / cfg.s)
    scalars = {"master_seed": cfg.master_seed, "lambda_max": d.lambda_max}
    return ReplicateRecord(index=rng.stream_index, scalars=scalars)


@lru_cache(maxsize=64)
def _spike_limits(y: float, theta: float, zero_noise: bool):
    law = DiscreteLaw(np.array([0.0]), np.array([1.0])) if zero_noise else MarchenkoPastur(y)
    return law, theoretical_solution(law, theta)


def pipeline_spike(cfg: ExperimentConfig, rng: RngStream) -> ReplicateRecord:
    """Rank-one detection replicate: secular root, projections, overlap norm."""
    if cfg.zero_noise:
        dtype = np.complex128 if cfg.field == "complex" else np.float64
        d = SpectralDecomposition(np.zeros(cfg.n), np.eye(cfg.n, dtype=dtype))
    else:
        d = _sample_cov_decomposition(cfg, rng)
    vecs = sign_vector_family(cfg.n, cfg.m)
    spike_dir, probes = vecs[0], vecs[1:]
    law, sol = _spike_limits(0.0 if cfg.zero_noise else cfg.y, cfg.theta, cfg.zero_noise)
    scalars = {"master_seed": cfg.master_seed, "lambda_max_s": d.lambda_max}
    try:
        lam_top = largest_eig_secular(d, cfg.theta, spike_dir)
        no_root = 0
    except NoRoot:
        lam_top = math.nan
        no_root = 1
    discard = no_root
    if sol.is_supercritical and not cfg.zero_noise:
        # Replicates whose top noise eigenvalue strays past the midpoint
        # between the bulk edge and the detached limit are set aside.
        a_trunc = 0.5 * (law.upper_edge + sol.lambda1)
        if d.lambda_max > a_trunc:
            discard = 1
    scalars["lambda_top"] = lam_top
    scalars["no_root"] = no_root
    scalars["discard"] = discard
    for k, x in enumerate(probes, start=2):
        value = math.nan
        if not no_root:
            value = projection_stat(d, lam_top, spike_dir, x, cfg.field)
        if cfg.field == "complex":
            cval = complex(value) if not no_root else complex(math.nan, math.nan)
            scalars[f"proj{k}_re"] = cval.real
            scalars[f"proj{k}_im"] = cval.imag
        else:
            scalars[f"proj{k}"] = float(value) if not no_root else math.nan
    if no_root:
        scalars["resolvent_norm"] = math.nan
        scalars["gn_sup_dev"] = math.nan
    else:
        m2 = resolvent_quadratic_form(d, spike_dir, spike_dir, lam_top, 2)
        scalars["resolvent_norm"] = float(np.sqrt(np.real(m2)))
        gn = weighted_spectral_cdf(d, spike_dir)
        scalars["gn_sup_dev"] = weighted_ks_distance(
            d.eigenvalues, np.diff(gn.values), _law_cdf_fn(law)
        )
    return ReplicateRecord(index=rng.stream_index, scalars=scalars)


def _law_cdf_fn(law):
    if isinstance(law, MarchenkoPastur):
        return _mp_cdf_fast(law.y)
    return law.cdf


@lru_cache(maxsize=16)
def _mp_cdf_fast(y: float):
    """Vectorizable bulk CDF on fixed Gauss-Legendre nodes.

    Non-adaptive but spectrally accurate for the analytic transformed
    integrand; cross-checked against the adaptive path in the tests.
    """
    ref = MarchenkoPastur(y)
    a, b = ref.edges
    span = b - a
    nodes, wts = np.polynomial.legendre.leggauss(120)

    def cdf(x: float) -> float:
        if x < 0.0:
            return 0.0
        if x >= b:
            return 1.0
        if x <= a:
            return ref.atom_mass
        phi = math.asin(min(1.0, math.sqrt((x - a) / span)))
        half = 0.5 * phi
        pts = half * (nodes + 1.0)
        s2 = np.sin(pts) ** 2
        c2 = np.cos(pts) ** 2
        if a == 0.0:
            integ = span / (np.pi * y) * c2
        else:
            integ = span**2 / (np.pi * y) * s2 * c2 / (a + span * s2)
        return float(min(1.0, ref.atom_mass + half * np.dot(integ, wts)))

    return cdf


_PIPELINES = {
    "haar-bridge": pipeline_haar_bridge,
    "cov-bridge": pipeline_cov_bridge,
    "mp-check": pipeline_mp_check,
    "lambda-max": pipeline_lambda_max,
    "spike-detect": pipeline_spike,
}


def collect_records(cfg: ExperimentConfig) -> list[ReplicateRecord]:
    """Run all replicates, in parallel if configured, ordered by index."""
    cfg.validate()
    pipeline = _PIPELINES[cfg.experiment]

    def work(idx: int) -> ReplicateRecord:
        return pipeline(cfg, RngStream(cfg.master_seed, idx))

    indices = range(cfg.replicates)
    if cfg.thread_count <= 1:
        return [work(i) for i in indices]
    with ThreadPoolExecutor(max_workers=cfg.thread_count) as pool:
        return list(pool.map(work, indices))


def _column(records, name) -> np.ndarray:
    return np.array([r.scalars[name] for r in records], dtype=np.float64)


def _build_bridge_reports(cfg: ExperimentConfig, records) -> list[TestReport]:
    reps = len(records)
    labels = _process_labels(cfg.m, cfg.field if cfg.experiment == "haar-bridge" else "real")
    ks_thr = KS_THRESHOLD_HAAR if cfg.experiment == "haar-bridge" else KS_THRESHOLD_COV
    reports = [make_report("pinning", _column(records, "pin_max").max(), PIN_THRESHOLD, reps)]
    for lb in labels:
        stat = ks_distance(_column(records, f"sup_{lb}"), kolmogorov_cdf)
        reports.append(make_report(f"sup-law-ks:{lb}", stat, ks_thr, reps))
    if cfg.experiment == "haar-bridge":
        pairs = [(s, t) for s in COV_GRID_TIMES for t in COV_GRID_TIMES if s <= t]
        for lb in labels:
            samples = {t: _column(records, f"{lb}_t{t:.2f}") for t in COV_GRID_TIMES}
            stat = covariance_statistic(samples, pairs)
            reports.append(make_report(f"bridge-covariance:{lb}", stat, COV_DEV_THRESHOLD, reps))
    if len(labels) > 1:
        mid = [(_column(records, f"{a}_t0.50"), _column(records, f"{b}_t0.50"))
               for a, b in combinations(labels, 2)]
        reports.append(cross_independence_check(mid))
    return reports


def _build_reports(cfg: ExperimentConfig, records) -> list[TestReport]:
    reps = len(records)
    exp = cfg.experiment
    if exp in ("haar-bridge", "cov-bridge"):
        return _build_bridge_reports(cfg, records)
    if exp == "mp-check":
        ks = _column(records, "ks_mp")
        outside = _column(records, "n_outside_support")
        return [
            make_report("esd-ks", ks.max(), MP_KS_THRESHOLD, reps),
            make_report("support-containment", outside.sum(), 0.0, reps,
                        margin=SUPPORT_MARGIN),
        ]
    if exp == "lambda-max":
        mean = float(_column(records, "lambda_max").mean())
        target = MarchenkoPastur(cfg.y).upper_edge
        return [
            make_report("lambda-max-mean", abs(mean - target), LAMBDA_MAX_TOL, reps,
                        mean_lambda_max=mean, target=target),
        ]
    return _build_spike_reports(cfg, records)


def _build_spike_reports(cfg: ExperimentConfig, records) -> list[TestReport]:
    reps = len(records)
    law, sol = _spike_limits(0.0 if cfg.zero_noise else cfg.y, cfg.theta, cfg.zero_noise)
    no_root_count = int(_column(records, "no_root").sum())
    discard_count = int(_column(records, "discard").sum())
    kept = [r for r in records if not r.scalars["discard"]]
    reports = []
    common = dict(
        regime=sol.regime,
        threshold_theta_c=sol.threshold_theta_c,
        discard_count=discard_count,
        no_root_count=no_root_count,
        kept=len(kept),
    )
    if not kept:
        return [make_report("spike-eig-mean", math.inf, SPIKE_EIG_TOL, reps, **common)]
    lam_top = np.array([r.scalars["lambda_top"] for r in kept])
    if sol.is_supercritical:
        mean_top = float(lam_top.mean())
        reports.append(
            make_report("spike-eig-mean", abs(mean_top - sol.lambda1), SPIKE_EIG_TOL, reps,
                        mean_lambda_top=mean_top, lambda1=sol.lambda1, **common)
        )
        if cfg.field == "complex":
            projs = np.concatenate([
                [r.scalars[f"proj{k}_re"] for r in kept] + [r.scalars[f"proj{k}_im"] for r in kept]
                for k in range(2, cfg.m + 1)
            ])
            target_var = sol.limit_variance / 2.0
        else:
            projs = np.concatenate([[r.scalars[f"proj{k}"] for r in kept]
                                    for k in range(2, cfg.m + 1)])
            target_var = sol.limit_variance
        moment = gaussian_moment_check(projs, target_var, variance_tol=SPIKE_VAR_TOL)
        reports.append(TestReport(
            name="spike-gaussian-moments",
            statistic=moment.statistic,
            threshold=moment.threshold,
            replicates=moment.replicates,
            passed=moment.passed,
            details={**moment.details, **common},
        ))
        norms = np.array([r.scalars["resolvent_norm"] for r in kept])
        rel = abs(float(norms.mean()) / sol.limit_norm - 1.0)
        reports.append(
            make_report("spike-norm-mean", rel, SPIKE_NORM_RTOL, reps,
                        mean_norm=float(norms.mean()), limit_norm=sol.limit_norm, **common)
        )
        gn = np.array([r.scalars["gn_sup_dev"] for r in kept])
        reports.append(
            make_report("spectral-weight-cdf-dev", float(gn.mean()), 1.0, reps,
                        note="recorded diagnostic, loose bound", **common)
        )
    else:
        mean_top = float(lam_top.mean())
        reports.append(
            make_report("spike-eig-subcritical", abs(mean_top - law.upper_edge),
                        SPIKE_SUBCRITICAL_TOL, reps,
                        mean_lambda_top=mean_top, upper_edge=law.upper_edge, **common)
        )
    return reports


def _format_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _write_outputs(cfg: ExperimentConfig, records, reports) -> list[str]:
    os.makedirs(cfg.output_path, exist_ok=True)
    csv_path = os.path.join(cfg.output_path, "replicates.csv")
    columns = list(records[0].scalars.keys())
    for r in records:
        if list(r.scalars.keys()) != columns:
            raise ConfigError("replicate records disagree on schema")
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(["replicate"] + columns) + "\n")
        for r in records:
            cells = [str(r.index)] + [_format_cell(r.scalars[c]) for c in columns]
            fh.write(",".join(cells) + "\n")
    json_path = os.path.join(cfg.output_path, "summary.json")
    payload = {
        "version": __version__,
        "config": asdict(cfg),
        "replicates": len(records),
        "reports": [r.to_json_dict() for r in reports],
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return [csv_path, json_path]


def run_experiment(cfg: ExperimentConfig) -> tuple[list[TestReport], list[str]]:
    """Run every replicate, build the reports, and write outputs if asked.

    Returns the reports and the list of written file paths (empty when no
    output directory is configured).
    """
    cfg.validate()
    records = collect_records(cfg)
    reports = _build_reports(cfg, records)
    outputs = _write_outputs(cfg, records, reports) if cfg.output_path else []
    return reports, outputs
