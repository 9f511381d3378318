"""Experiment orchestration: sweeps, persistence, and replay.

Every command materializes an output directory holding ``config.json``
(the fully resolved configuration), ``summary.json`` (scalars, seed
provenance, and a timestamp), and fixed-schema CSV files.  All randomness
derives from the master seed through named sha256 streams, so re-running a
command with the same config and seed reproduces every CSV byte for byte
regardless of worker count; the timestamp and wall-clock fields live only
in the summary.

Seed derivation schemes (also recorded in each summary):

- disorder entries:    derive_seed(master, "disorder", law_index, N, replica)
- Brownian/init:       stream replica index = replica * thermal_samples + sample
- bootstrap resamples: derive_seed(master, "bootstrap", law_index, N)
- law validation:      derive_seed(master, "law-validate", law_index)
- norm samples:        derive_seed(master, "norm-sample", law_index, k)
- comparison-lab instances: derive_seed(master, "lindeberg-instance", index)
"""

from __future__ import annotations

import datetime as _dt
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .disorder import (
    StandardGaussian,
    condition_diagnostics,
    operator_norm_report,
    sample_matrix,
    validate_law,
)
from .dynamics import (
    SafeguardError,
    envelope_violated,
    simulate_coupled,
    simulate_frozen,
    simulate_full,
)
from .lindeberg import certificate_suite, gaussian_mc_check
from .model import ModelParams, grid_times, max_negative_curvature
from .observables import autocorrelation, girsanov_stats, marginal_w2_distance
from .streams import derive_seed

__all__ = [
    "NumericalFailure",
    "RunSummary",
    "run_simulate",
    "run_universality",
    "run_freeze_sweep",
    "run_validation",
    "run_lindeberg_suite",
    "replay",
]


class NumericalFailure(RuntimeError):
    """A numerical guarantee failed (safeguard, certificate, or replay)."""


@dataclass
class RunSummary:
    """In-memory record of one command.

    ``autocorr`` holds the full curve arrays; ``summary.json`` keeps only
    scalars (the curves are persisted to ``autocorr.csv``).  Every number
    is reachable from (config_hash, seed_provenance).
    """

    command: str
    config_hash: str
    master_seed: int
    wall_clock_seconds: float
    timestamp: str
    output_dir: str
    seed_provenance: dict
    autocorr: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    freeze: list = field(default_factory=list)
    phi_medians: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    lindeberg: dict | None = None
    validation: list = field(default_factory=list)
    safeguard_activations: int = 0


_SEED_SCHEMES = {
    "disorder": "sha256(master | 'disorder' | law_index | N | replica)",
    "brownian": "stream replica index = replica * thermal_samples + sample",
    "bootstrap": "sha256(master | 'bootstrap' | law_index | N)",
    "law_validate": "sha256(master | 'law-validate' | law_index)",
    "norm_sample": "sha256(master | 'norm-sample' | law_index | k)",
    "lindeberg": "sha256(master | 'lindeberg-instance' | index)",
}


# ---------------------------------------------------------------------------
# persistence helpers

def _fmt(value) -> str:
    # repr of a float is the shortest round-trip form; ints stay bare.
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    )


def _persist(cfg: ExperimentConfig, summary: RunSummary, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "config.json", cfg.as_dict())
    payload = {
        "command": summary.command,
        "config_hash": summary.config_hash,
        "master_seed": summary.master_seed,
        "wall_clock_seconds": summary.wall_clock_seconds,
        "timestamp": summary.timestamp,
        "seed_provenance": summary.seed_provenance,
        "safeguard_activations": summary.safeguard_activations,
    }
    if summary.gaps:
        payload["gaps"] = summary.gaps
    if summary.freeze:
        payload["freeze"] = summary.freeze
    if summary.phi_medians:
        payload["phi_medians"] = summary.phi_medians
    if summary.lindeberg is not None:
        payload["lindeberg"] = summary.lindeberg
    if summary.validation:
        payload["validation"] = summary.validation
    _write_json(out_dir / "summary.json", payload)

    if summary.autocorr:
        rows = []
        for block in summary.autocorr:
            for t, mean, err in zip(block["t"], block["mean"], block["stderr"]):
                rows.append(
                    (block["law"], block["n"], block["replica_count"], t, mean, err)
                )
        _write_csv(
            out_dir / "autocorr.csv",
            ["law", "N", "replica_count", "t", "mean", "stderr"],
            rows,
        )
    if summary.gaps:
        _write_csv(
            out_dir / "gaps.csv",
            ["law", "N", "sup_gap", "w2_surrogate", "noise_floor"],
            [
                (g["law"], g["n"], g["sup_gap"], g["w2_surrogate"], g["noise_floor"])
                for g in summary.gaps
            ],
        )
    if summary.freeze:
        _write_csv(
            out_dir / "freeze.csv",
            ["kappa", "N", "msd_mean", "msd_stderr", "envelope_violations"],
            [
                (f["kappa"], f["n"], f["msd_mean"], f["msd_stderr"],
                 f["envelope_violations"])
                for f in summary.freeze
            ],
        )
    if summary.norms:
        _write_csv(
            out_dir / "norms.csv",
            ["law", "N", "replica", "seed", "norm", "lower", "upper",
             "iterations", "restarted", "a2_event"],
            [
                (r["law"], r["n"], r["replica"], r["seed"], r["norm"], r["lower"],
                 r["upper"], r["iterations"], r["restarted"], r["a2_event"])
                for r in summary.norms
            ],
        )
    if summary.lindeberg is not None:
        _write_csv(
            out_dir / "lindeberg.csv",
            ["kind", "instance", "seed", "kappa", "n", "value", "reference",
             "spread", "passed"],
            summary.lindeberg["rows"],
        )


def _new_summary(command: str, cfg: ExperimentConfig, t0: float) -> RunSummary:
    return RunSummary(
        command=command,
        config_hash=cfg.config_hash(),
        master_seed=cfg.master_seed,
        wall_clock_seconds=time.perf_counter() - t0,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        output_dir=cfg.output_dir,
        seed_provenance={"master_seed": cfg.master_seed, "schemes": _SEED_SCHEMES},
    )


# ---------------------------------------------------------------------------
# scheduling

def _run_slots(tasks, threads: int) -> list:
    """Run callables on a worker pool; results land in submit-order slots."""
    if threads <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def _with_context(err: SafeguardError, label: str, n: int, replica: int):
    detail = f"{err.detail} [law={label}, N={n}, replica={replica}]"
    return SafeguardError(err.particle, err.step, err.value, detail)


def _reference_index(laws) -> int:
    for idx, law in enumerate(laws):
        if isinstance(law, StandardGaussian):
            return idx
    raise ConfigError("universality needs a gaussian law as the reference")


# ---------------------------------------------------------------------------
# simulation blocks

def _curve_block(
    cfg: ExperimentConfig,
    params: ModelParams,
    law,
    law_idx: int,
    label: str,
    threads: int,
    samples: int,
    keep_ensembles: bool,
):
    """Thermal-averaged autocorrelation per disorder draw for one (law, N).

    Returns (curves[replicas, G+1], ensembles or None, norm rows,
    safeguard activation count).  Ensembles are the sample-0 full runs,
    used for marginal pooling and optional path storage.
    """
    potential = cfg.potential_obj()
    initial = cfg.initial_obj()
    n = params.n_particles

    def one(rep: int):
        seed = derive_seed(cfg.master_seed, "disorder", law_idx, n, rep)
        mat = sample_matrix(law, n, seed)
        report = operator_norm_report(mat, beta=cfg.beta)
        curve = np.zeros(params.n_steps + 1)
        kept = None
        activations = 0
        for s in range(samples):
            try:
                ens = simulate_full(
                    params, potential, mat, initial,
                    replica=rep * samples + s,
                )
            except SafeguardError as err:
                raise _with_context(err, label, n, rep) from err
            curve += autocorrelation(ens)
            activations += ens.safeguard_activations
            if s == 0 and keep_ensembles:
                kept = ens
        norm_row = {
            "law": label,
            "n": n,
            "replica": rep,
            "seed": seed,
            "norm": report.value,
            "lower": report.lower,
            "upper": report.upper,
            "iterations": report.iterations,
            "restarted": report.restarted,
            "a2_event": report.upper <= cfg.a2,
        }
        return curve / samples, kept, norm_row, activations

    results = _run_slots([lambda rep=rep: one(rep) for rep in range(cfg.replicas)],
                         threads)
    curves = np.stack([r[0] for r in results])
    ensembles = [r[1] for r in results] if keep_ensembles else None
    norm_rows = [r[2] for r in results]
    activations = sum(r[3] for r in results)
    return curves, ensembles, norm_rows, activations


def _store_ensembles(out_dir: Path, label: str, n: int, ensembles) -> None:
    paths_dir = out_dir / "paths"
    paths_dir.mkdir(parents=True, exist_ok=True)
    for rep, ens in enumerate(ensembles):
        np.save(paths_dir / f"{label}_N{n}_rep{rep}.npy", ens.values)


def _bootstrap_gap(diff: np.ndarray, resamples: int, seed: int):
    """Paired bootstrap of sup_t |mean difference| over disorder draws.

    Returns (sup gap, bootstrap standard error, noise floor).  The floor is
    the 99th percentile of the same statistic after centering each time
    slice, i.e. the distribution of the sup under the no-signal null with
    the observed per-draw covariance.
    """
    reps = diff.shape[0]
    gap = float(np.abs(diff.mean(axis=0)).max())
    gen = np.random.Generator(np.random.Philox(key=seed))
    centered = diff - diff.mean(axis=0)
    sups = np.empty(resamples)
    floors = np.empty(resamples)
    for b in range(resamples):
        idx = gen.integers(0, reps, reps)
        sups[b] = np.abs(diff[idx].mean(axis=0)).max()
        floors[b] = np.abs(centered[idx].mean(axis=0)).max()
    return gap, float(sups.std(ddof=1)), float(np.quantile(floors, 0.99))


def _phi_median(cfg: ExperimentConfig, params: ModelParams, law, law_idx: int,
                label: str, samples: int) -> float:
    """Median interaction-tilt statistic over the first phi_replicas draws."""
    potential = cfg.potential_obj()
    initial = cfg.initial_obj()
    n = params.n_particles
    phis = []
    for rep in range(cfg.phi_replicas):
        seed = derive_seed(cfg.master_seed, "disorder", law_idx, n, rep)
        mat = sample_matrix(law, n, seed)
        try:
            frozen = simulate_frozen(
                params, potential, mat, initial, replica=rep * samples,
            )
        except SafeguardError as err:
            raise _with_context(err, label, n, rep) from err
        phis.append(girsanov_stats(frozen, mat, params, potential, c1=cfg.c1).phi)
    return float(np.median(phis))


# ---------------------------------------------------------------------------
# commands

def run_universality(
    cfg: ExperimentConfig,
    threads: int = 1,
    store_paths: bool = False,
    out_dir: str | Path | None = None,
) -> RunSummary:
    """Disorder-universality sweep over the configured laws and sizes.

    For each law and each N: draws ``replicas`` matrices, integrates the
    full dynamics with Brownian streams shared across laws (same replica
    index, same increments), and averages each draw's autocorrelation over
    ``thermal_samples`` independent driving samples.  Non-reference laws
    get a sup-t gap against the gaussian reference with a paired bootstrap
    standard error and noise floor, plus a pooled marginal transport
    surrogate.
    """
    t0 = time.perf_counter()
    laws = cfg.law_objs()
    labels = cfg.law_labels()
    if len(laws) < 2:
        raise ConfigError("universality needs at least two laws")
    ref_idx = _reference_index(laws)
    samples = cfg.thermal_samples
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)

    summary = _new_summary("universality", cfg, t0)
    curves_by_law: dict[int, dict] = {idx: {} for idx in range(len(laws))}
    gap_rows = []

    for n in cfg.n_sweep:
        params = ModelParams(
            n, cfg.beta, cfg.s_bound, cfg.horizon, cfg.kappa, cfg.substeps,
            cfg.master_seed,
        )
        times = grid_times(params)
        order = [ref_idx] + [i for i in range(len(laws)) if i != ref_idx]
        ref_ensembles = None
        block_results = {}
        for idx in order:
            curves, ensembles, norm_rows, acts = _curve_block(
                cfg, params, laws[idx], idx, labels[idx], threads, samples,
                keep_ensembles=True,
            )
            summary.safeguard_activations += acts
            block_results[idx] = (curves, norm_rows)
            if store_paths:
                _store_ensembles(out, labels[idx], n, ensembles)
            if idx == ref_idx:
                ref_ensembles = ensembles
            else:
                diff = curves - block_results[ref_idx][0]
                gap, stderr, floor = _bootstrap_gap(
                    diff, cfg.bootstrap_resamples,
                    derive_seed(cfg.master_seed, "bootstrap", idx, n),
                )
                w2 = marginal_w2_distance(ensembles, ref_ensembles)
                gap_rows.append({
                    "law": labels[idx], "n": n, "sup_gap": gap,
                    "sup_gap_stderr": stderr, "w2_surrogate": w2,
                    "noise_floor": floor,
                })
            curves_by_law[idx][n] = (curves, norm_rows)
        del ref_ensembles, block_results

        for idx in range(len(laws)):
            summary.phi_medians.append({
                "law": labels[idx], "n": n,
                "phi_median": _phi_median(cfg, params, laws[idx], idx,
                                          labels[idx], samples),
            })

    for idx in range(len(laws)):
        for n in cfg.n_sweep:
            curves, norm_rows = curves_by_law[idx][n]
            params = ModelParams(
                n, cfg.beta, cfg.s_bound, cfg.horizon, cfg.kappa, cfg.substeps,
                cfg.master_seed,
            )
            summary.autocorr.append({
                "law": labels[idx], "n": n, "replica_count": cfg.replicas,
                "t": grid_times(params), "mean": curves.mean(axis=0),
                "stderr": curves.std(axis=0, ddof=1) / np.sqrt(cfg.replicas),
            })
            summary.norms.extend(norm_rows)
    summary.gaps = sorted(gap_rows, key=lambda g: (labels.index(g["law"]), g["n"]))

    summary.wall_clock_seconds = time.perf_counter() - t0
    _persist(cfg, summary, out)
    return summary


def run_freeze_sweep(
    cfg: ExperimentConfig,
    threads: int = 1,
    store_paths: bool = False,
    out_dir: str | Path | None = None,
) -> RunSummary:
    """Coupling error of the piecewise-frozen scheme across kappa values.

    The total grid is held fixed at kappa * substeps from the base config,
    so every kappa in the sweep must divide it; each draw integrates the
    coupled pair and reports the mean-square coupling distance plus the
    drift-envelope check (counted on draws where the operator-norm event
    held, and only while the frozen path stays near its sub-interval
    anchors).
    """
    t0 = time.perf_counter()
    laws = cfg.law_objs()
    labels = cfg.law_labels()
    law, law_idx, label = laws[0], 0, labels[0]
    potential = cfg.potential_obj()
    initial = cfg.initial_obj()
    total = cfg.total_steps()
    n = cfg.n_particles
    c_dd = max_negative_curvature(potential)
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)

    for kappa in cfg.kappa_sweep:
        if total % kappa != 0:
            raise ConfigError(
                f"kappa_sweep entry {kappa} does not divide the total grid "
                f"{total} = kappa * substeps"
            )

    summary = _new_summary("freeze-sweep", cfg, t0)

    for kappa in cfg.kappa_sweep:
        params = ModelParams(
            n, cfg.beta, cfg.s_bound, cfg.horizon, kappa, total // kappa,
            cfg.master_seed,
        )
        times = grid_times(params)

        def one(rep: int, params=params, times=times, kappa=kappa):
            seed = derive_seed(cfg.master_seed, "disorder", law_idx, n, rep)
            mat = sample_matrix(law, n, seed)
            report = operator_norm_report(mat, beta=cfg.beta)
            try:
                full, frozen, stats = simulate_coupled(
                    params, potential, mat, initial, replica=rep,
                )
            except SafeguardError as err:
                raise _with_context(err, label, n, rep) from err
            a2_event = report.upper <= cfg.a2
            violated = a2_event and envelope_violated(
                stats, times, cfg.a2, c_dd, cfg.rho, n,
            )
            acts = full.safeguard_activations + frozen.safeguard_activations
            norm_row = {
                "law": label, "n": n, "replica": rep, "seed": seed,
                "norm": report.value, "lower": report.lower,
                "upper": report.upper, "iterations": report.iterations,
                "restarted": report.restarted, "a2_event": a2_event,
            }
            kept = (full, frozen) if store_paths else None
            return stats.msd, violated, norm_row, acts, kept

        results = _run_slots(
            [lambda rep=rep: one(rep) for rep in range(cfg.freeze_replicas)],
            threads,
        )
        msds = np.array([r[0] for r in results])
        violations = sum(1 for r in results if r[1])
        summary.freeze.append({
            "kappa": kappa, "n": n,
            "msd_mean": float(msds.mean()),
            "msd_stderr": float(msds.std(ddof=1) / np.sqrt(len(msds))),
            "envelope_violations": violations,
        })
        summary.norms.extend(r[2] for r in results)
        summary.safeguard_activations += sum(r[3] for r in results)
        if store_paths:
            paths_dir = out / "paths"
            paths_dir.mkdir(parents=True, exist_ok=True)
            for rep, r in enumerate(results):
                full, frozen = r[4]
                np.save(paths_dir / f"{label}_k{kappa}_rep{rep}_full.npy",
                        full.values)
                np.save(paths_dir / f"{label}_k{kappa}_rep{rep}_frozen.npy",
                        frozen.values)

    summary.wall_clock_seconds = time.perf_counter() - t0
    _persist(cfg, summary, out)
    return summary


def run_validation(
    cfg: ExperimentConfig,
    threads: int = 1,
    store_paths: bool = False,
    out_dir: str | Path | None = None,
) -> RunSummary:
    """Moment checks, growth diagnostics, and norm sampling per law.

    Emits one table row per check: PASS/FAIL for conditions with a sharp
    verdict (moments, finite exponential moment, norm concentration) and
    TREND for quantities the theory only tracks asymptotically.
    """
    t0 = time.perf_counter()
    laws = cfg.law_objs()
    labels = cfg.law_labels()
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)
    summary = _new_summary("validate", cfg, t0)

    for idx, (law, label) in enumerate(zip(laws, labels)):
        report = validate_law(
            law, seed=derive_seed(cfg.master_seed, "law-validate", idx),
        )
        def _verdict(word):
            return "FAIL" if any(word in f for f in report.failures) else "PASS"

        rows = [
            {"law": label, "check": "mean-zero",
             "status": _verdict("mean"), "value": report.mean},
            {"law": label, "check": "unit-variance",
             "status": _verdict("variance"), "value": report.variance},
            {"law": label, "check": "finite-exponential-moment",
             "status": "PASS" if report.exp_moment_finite else "FAIL",
             "value": None},
            {"law": label, "check": "third-abs-moment",
             "status": "INFO", "value": report.third_abs_moment},
        ]
        diag = None
        if report.passed:
            seeds = tuple(
                derive_seed(cfg.master_seed, "norm-sample", idx, k)
                for k in range(cfg.norm_samples)
            )
            diag = condition_diagnostics(
                law, cfg.n_particles, gamma=cfg.gamma, eps=cfg.eps, seeds=seeds,
            )
            # diagnostics sample at beta = 1, so these are N^{-1/2} ||J||
            raw = np.asarray(diag.norm_samples)
            rows.append({
                "law": label, "check": "norm-concentration",
                "status": "PASS" if np.all((raw >= 1.8) & (raw <= 2.3))
                else "FAIL",
                "value": float(raw.max()),
            })
            rows.append({
                "law": label, "check": "mgf-bounded",
                "status": "TREND", "value": diag.mgf_sup,
            })
            rows.append({
                "law": label, "check": "third-moment-scaling",
                "status": "TREND", "value": diag.third_moment_scaled,
            })
            for k, (seed, value) in enumerate(zip(seeds, diag.norm_samples)):
                scaled = cfg.beta * value
                summary.norms.append({
                    "law": label, "n": cfg.n_particles, "replica": k,
                    "seed": seed, "norm": scaled, "lower": scaled,
                    "upper": scaled, "iterations": 0, "restarted": False,
                    "a2_event": scaled <= cfg.a2,
                })
        else:
            rows.append({
                "law": label, "check": "norm-concentration",
                "status": "SKIPPED (law failed moment checks)", "value": None,
            })
        for note in report.notes:
            rows.append({"law": label, "check": "note", "status": "INFO",
                         "value": note})
        summary.validation.extend(rows)

    summary.wall_clock_seconds = time.perf_counter() - t0
    _persist(cfg, summary, out)
    return summary


def run_lindeberg_suite(
    cfg: ExperimentConfig,
    threads: int = 1,
    store_paths: bool = False,
    out_dir: str | Path | None = None,
) -> RunSummary:
    """Certificate suite plus Gaussian-identity Monte Carlo cross-checks.

    Any instance whose exact two-route difference exceeds its bound beyond
    tolerance fails the whole suite, naming the instance seed."""
    t0 = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)
    summary = _new_summary("lindeberg", cfg, t0)

    cert = certificate_suite(
        n_instances=cfg.lindeberg_instances, master_seed=cfg.master_seed,
        beta=cfg.beta, horizon=cfg.horizon, s_bound=cfg.s_bound,
    )
    mc = gaussian_mc_check(
        n_instances=cfg.gaussian_check_instances,
        n_samples=cfg.gaussian_check_samples, master_seed=cfg.master_seed,
        beta=cfg.beta, horizon=cfg.horizon, s_bound=cfg.s_bound,
    )

    rows = []
    worst_ratio = 0.0
    for r in cert:
        rows.append(("certificate", r.index, r.seed, r.kappa, r.n,
                     r.abs_diff, r.bound, r.slack, r.passed))
        if r.bound > 0:
            worst_ratio = max(worst_ratio, r.abs_diff / r.bound)
    for r in mc:
        rows.append(("gaussian-mc", r.index, r.seed, r.kappa, r.n,
                     r.exact, r.mc_estimate, r.mc_stderr, r.passed))

    summary.lindeberg = {
        "rows": rows,
        "certificate_pass": sum(1 for r in cert if r.passed),
        "certificate_total": len(cert),
        "gaussian_mc_pass": sum(1 for r in mc if r.passed),
        "gaussian_mc_total": len(mc),
        "worst_slack_ratio": worst_ratio,
    }
    summary.wall_clock_seconds = time.perf_counter() - t0
    _persist(cfg, summary, out)

    bad = next((r for r in cert if not r.passed), None)
    if bad is not None:
        raise NumericalFailure(
            f"comparison certificate violated on instance {bad.index} "
            f"(seed {bad.seed}): |diff| {bad.abs_diff!r} vs bound {bad.bound!r}"
        )
    bad = next((r for r in mc if not r.passed), None)
    if bad is not None:
        raise NumericalFailure(
            f"gaussian identity cross-check failed on instance {bad.index} "
            f"(seed {bad.seed}): z = {bad.z_score!r}"
        )
    return summary


def run_simulate(
    cfg: ExperimentConfig,
    threads: int = 1,
    store_paths: bool = False,
    out_dir: str | Path | None = None,
) -> RunSummary:
    """Plain ensemble runs at the configured size, one row block per law.

    Each replica is a single full-dynamics run (no thermal averaging);
    Brownian streams are shared across laws replica-by-replica.
    """
    t0 = time.perf_counter()
    laws = cfg.law_objs()
    labels = cfg.law_labels()
    out = Path(out_dir) if out_dir is not None else Path(cfg.output_dir)
    params = ModelParams(
        cfg.n_particles, cfg.beta, cfg.s_bound, cfg.horizon, cfg.kappa,
        cfg.substeps, cfg.master_seed,
    )
    summary = _new_summary("simulate", cfg, t0)
    summary.seed_provenance["schemes"] = dict(
        _SEED_SCHEMES, brownian="stream replica index = replica (single sample)",
    )

    for idx, (law, label) in enumerate(zip(laws, labels)):
        curves, ensembles, norm_rows, acts = _curve_block(
            cfg, params, law, idx, label, threads, samples=1,
            keep_ensembles=True,
        )
        summary.safeguard_activations += acts
        summary.autocorr.append({
            "law": label, "n": cfg.n_particles, "replica_count": cfg.replicas,
            "t": grid_times(params), "mean": curves.mean(axis=0),
            "stderr": curves.std(axis=0, ddof=1) / np.sqrt(cfg.replicas),
        })
        summary.norms.extend(norm_rows)
        if store_paths:
            _store_ensembles(out, label, cfg.n_particles, ensembles)

    summary.wall_clock_seconds = time.perf_counter() - t0
    _persist(cfg, summary, out)
    return summary


def replay(
    run_dir: str | Path,
    law: str,
    replica: int,
    particle: int | None = None,
    n: int | None = None,
    sample: int = 0,
) -> dict:
    """Re-derive one trajectory from a finished run directory.

    Reads config.json, re-checks the config hash recorded in summary.json,
    re-simulates the requested (law, N, replica, sample), and compares
    against the stored path when the run kept trajectories.  Returns a
    dict with the values, the fingerprint, and the match verdict; a stored
    path that fails to match raises NumericalFailure.
    """
    run_dir = Path(run_dir)
    try:
        stored_cfg = json.loads((run_dir / "config.json").read_text())
        stored_summary = json.loads((run_dir / "summary.json").read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read run directory {run_dir}: {exc}") from exc
    from .config import load_config

    cfg = load_config(overrides=stored_cfg)
    if cfg.config_hash() != stored_summary.get("config_hash"):
        raise NumericalFailure(
            f"config hash mismatch in {run_dir}: recomputed "
            f"{cfg.config_hash()} vs stored {stored_summary.get('config_hash')}"
        )

    labels = cfg.law_labels()
    if law not in labels:
        raise ConfigError(f"law {law!r} not in this run (has {labels})")
    idx = labels.index(law)
    n = cfg.n_particles if n is None else n
    if not 0 <= replica < max(cfg.replicas, cfg.freeze_replicas):
        raise ConfigError(f"replica {replica} out of range")
    if stored_summary.get("command") == "simulate":
        samples = 1
    else:
        samples = cfg.thermal_samples
    if not 0 <= sample < samples:
        raise ConfigError(f"sample {sample} out of range (run kept {samples})")

    params = ModelParams(
        n, cfg.beta, cfg.s_bound, cfg.horizon, cfg.kappa, cfg.substeps,
        cfg.master_seed,
    )
    seed = derive_seed(cfg.master_seed, "disorder", idx, n, replica)
    mat = sample_matrix(cfg.law_objs()[idx], n, seed)
    ens = simulate_full(
        params, cfg.potential_obj(), mat, cfg.initial_obj(),
        replica=replica * samples + sample,
    )

    import hashlib

    fingerprint = hashlib.sha256(np.ascontiguousarray(ens.values).tobytes())
    result = {
        "law": law, "n": n, "replica": replica, "sample": sample,
        "disorder_seed": seed, "fingerprint": fingerprint.hexdigest(),
        "stored_path": None, "matches_stored": None,
    }
    if particle is not None:
        if not 0 <= particle < n:
            raise ConfigError(f"particle {particle} out of range for N={n}")
        result["particle_values"] = ens.values[particle]

    stored = run_dir / "paths" / f"{law}_N{n}_rep{replica}.npy"
    if sample == 0 and stored.exists():
        reference = np.load(stored)
        result["stored_path"] = str(stored)
        result["matches_stored"] = bool(np.array_equal(reference, ens.values))
        if not result["matches_stored"]:
            raise NumericalFailure(
                f"replayed trajectory does not match stored {stored}"
            )
    result["values"] = ens.values
    return result
