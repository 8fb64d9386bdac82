"""Beam-pattern sweeps, metric tables and the comparison studies.

Power in dBm is ``10 log10(P / 1 mW)`` under the scenario's field-amplitude
convention; comparisons between methods only ever use dB differences.
"""

from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .baselines import QuantizedSearchSettings, exhaustive_oracle, solve_quantrand, solve_unconstrained
from .errors import ConfigError, InfeasibleError, SearchSpaceError
from .scenario import build_setup
from .solver import build_report, solve

log = logging.getLogger(__name__)

DESK_TRIALS = 20


def to_dbm(p):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p, dtype=float) / 1e-3)


def db_ratio(num, den):
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(num / den))


@dataclass
class BeamPattern:
    angles: np.ndarray  # (P, 2) theta, phi in degrees
    powers: np.ndarray
    config: np.ndarray

    @property
    def powers_db(self):
        return to_dbm(self.powers)

    def peak_angle(self):
        return tuple(self.angles[int(np.argmax(self.powers))])


def angle_grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def sweep_pattern(setup, omega, thetas, phis, r=None):
    """Received power over the outer product of ``thetas`` x ``phis`` (degrees)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if thetas.size == 0 or phis.size == 0:
        raise ConfigError("sweep grid is empty")
    omega = np.asarray(omega, dtype=float)
    if omega.size != setup.grid.size:
        raise ConfigError(f"phase vector has {omega.size} entries, surface has {setup.grid.size}")
    r = setup.scenario.observation_distance if r is None else r
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    angles = np.column_stack([tt.ravel(), pp.ravel()])
    pts = np.column_stack([np.full(len(angles), r), angles])
    x = np.exp(1j * omega)
    powers = np.empty(len(angles))
    for s in range(0, len(angles), 4096):
        G = setup.channels(pts[s:s + 4096])
        powers[s:s + 4096] = np.abs(G @ x) ** 2
    return BeamPattern(angles=angles, powers=powers, config=omega)


def default_sweep(setup, omega):
    sw = setup.scenario.sweep
    return sweep_pattern(setup, omega, angle_grid(sw.theta[0], sw.theta[1], sw.step), sw.phi)


@dataclass
class MetricsRow:
    method: str
    power_ratio: tuple
    variance: float
    peak_in_suppression: float  # watts, fine sweep over the regions
    min_ue_power: float
    max_sp_power: float  # watts, at the constraint sample points
    t_root: float = float("nan")
    status: str = "ok"

    @property
    def peak_in_suppression_db(self):
        return float(to_dbm(self.peak_in_suppression))

    @property
    def relative_gain(self):
        """``10 log10(min UE power / max suppression-sample power)`` in dB."""
        return relative_gain(self.min_ue_power, self.max_sp_power)


def relative_gain(min_ue_power, max_sp_power):
    if not max_sp_power > 0:
        return float("nan") if not min_ue_power > 0 else float("inf")
    return db_ratio(min_ue_power, max_sp_power)


def error_row(method, exc):
    nan = float("nan")
    return MetricsRow(method, (), nan, nan, nan, nan, nan, status=f"error: {exc}")


def region_peak(setup, omega, step=0.2):
    """Largest received power over a fine sweep of every suppression region."""
    best = 0.0
    for reg in setup.scenario.suppression_regions:
        s = min(step, reg.sample_spacing)
        pat = sweep_pattern(setup, omega, angle_grid(*reg.theta, s), angle_grid(*reg.phi, s),
                            r=reg.r)
        best = max(best, float(pat.powers.max()))
    return best


def sample_powers(setup, omega):
    if setup.suppression_channels.shape[0] == 0:
        return np.zeros(0)
    return np.abs(setup.suppression_channels @ np.exp(1j * np.asarray(omega))) ** 2


def metrics_for(setup, method, report, variance=0.0):
    p = report.received_powers
    sp = sample_powers(setup, report.omega_star)
    return MetricsRow(
        method=method,
        power_ratio=tuple(float(v) for v in p / p[-1]),
        variance=float(variance),
        peak_in_suppression=region_peak(setup, report.omega_star) if sp.size else float("nan"),
        min_ue_power=float(p.min()),
        max_sp_power=float(sp.max()) if sp.size else float("nan"),
        t_root=report.t_root,
    )


# -- solves shared by the studies --------------------------------------------

def solve_nonconstraint(setup, seed=None):
    sc = setup.scenario
    settings = sc.solver if seed is None else replace(sc.solver, rng_seed=int(seed))
    return solve_unconstrained(setup.unconstrained_instance(), settings)


def peak_reference(nc_report):
    """Peak: the weakest served-user power of the unconstrained solution."""
    return float(np.min(nc_report.received_powers))


def solve_bis(setup, peak=None, seed=None, thresholds=None):
    sc = setup.scenario
    settings = sc.solver if seed is None else replace(sc.solver, rng_seed=int(seed))
    inst = setup.instance(peak=peak, thresholds=thresholds)
    report = solve(inst, settings)
    report.method = "BIS"
    return report


def solve_quant(setup, peak=None, seed=None, bits=None):
    sc = setup.scenario
    q = sc.quantrand
    if seed is not None:
        q = replace(q, rng_seed=int(seed))
    if bits is not None:
        q = replace(q, bits=int(bits))
    return solve_quantrand(setup.instance(peak=peak), q)


def solve_oracle(setup, bits, peak=None):
    inst = setup.instance(peak=peak)
    res = exhaustive_oracle(inst, bits)
    rep = build_report(inst, res.best_omega, -res.best_value,
                       termination="exhaustive" if res.feasible else "exhaustive-infeasible",
                       epsilon=0.0, delta=0.0, lam_final=float("nan"), method=f"Oracle-{bits}bit")
    return rep


# -- studies ------------------------------------------------------------------

@dataclass
class SuppressionStudy:
    peak: float
    reports: dict
    rows: list
    patterns: dict = field(default_factory=dict)


def run_suppression_study(scenario, threshold_factors=None, seed=None, with_patterns=True):
    """Non-Constraint, BIS and QuantRand on one scenario, plus BIS at each of
    ``threshold_factors`` x Peak when given."""
    setup = build_setup(scenario)
    if not setup.suppression_points:
        raise ConfigError("suppression study needs at least one suppression region")
    nc = solve_nonconstraint(setup, seed)
    peak = peak_reference(nc)
    reports = {"Non-Constraint": nc}
    rows = [metrics_for(setup, "Non-Constraint", nc)]
    runs = [("BIS", None)]
    runs += [(f"BIS sigma={f:g}xPeak", f) for f in (threshold_factors or ())]
    for name, factor in runs:
        thr = None if factor is None else [factor * peak] * len(setup.suppression_points)
        try:
            rep = solve_bis(setup, peak=peak, seed=seed, thresholds=thr)
        except InfeasibleError as exc:
            rows.append(error_row(name, exc))
            continue
        reports[name] = rep
        rows.append(metrics_for(setup, name, rep))
    qr = solve_quant(setup, peak=peak, seed=seed)
    reports["QuantRand"] = qr
    rows.append(metrics_for(setup, "QuantRand", qr))
    patterns = {k: default_sweep(setup, r.omega_star) for k, r in reports.items()} if with_patterns else {}
    return SuppressionStudy(peak=peak, reports=reports, rows=rows, patterns=patterns)


def _aggregate(setup, method, reports):
    rows = [metrics_for(setup, method, r) for r in reports]
    ratios = np.array([r.power_ratio for r in rows])
    first = ratios[:, 0]
    var = float(np.var(first, ddof=1)) if len(rows) > 1 else 0.0
    mean = lambda k: float(np.mean([getattr(r, k) for r in rows]))
    return MetricsRow(method, tuple(float(v) for v in ratios.mean(axis=0)), var,
                      mean("peak_in_suppression"), mean("min_ue_power"), mean("max_sp_power"),
                      t_root=mean("t_root"))


def run_weighted_study(scenario, trials=None, seed=0, methods=("BIS", "QuantRand")):
    """Achieved power ratios ``P_k / P_K`` averaged over seeded trials.

    ``variance`` is the sample variance (ddof=1) of ``P_1 / P_K`` across
    trials.  Returns one :class:`MetricsRow` per method, BIS first.
    """
    if len(scenario.users) < 2:
        raise ConfigError("weighted study needs at least two users")
    trials = trials or scenario.study.trials
    setup = build_setup(scenario)
    peak = peak_reference(solve_nonconstraint(setup, seed)) if setup.needs_peak else None
    out = []
    for method in methods:
        reps = []
        for i in range(trials):
            if method == "BIS":
                reps.append(solve_bis(setup, peak=peak, seed=seed + i))
            elif method == "QuantRand":
                reps.append(solve_quant(setup, peak=peak, seed=seed + i))
            elif method == "Non-Constraint":
                reps.append(solve_nonconstraint(setup, seed + i))
            else:
                raise ConfigError(f"unknown method {method!r}")
        out.append(_aggregate(setup, method, reps))
    return out


def _trial_metrics(setup, seed, methods):
    nc = solve_nonconstraint(setup, seed)
    peak = peak_reference(nc)
    res = {}
    for m in methods:
        if m == "Non-Constraint":
            rep = nc
        elif m == "BIS":
            rep = solve_bis(setup, peak=peak, seed=seed)
        elif m == "QuantRand":
            rep = solve_quant(setup, peak=peak, seed=seed)
        else:
            raise ConfigError(f"unknown method {m!r}")
        sp = sample_powers(setup, rep.omega_star)
        res[m] = (float(rep.received_powers.min()), float(sp.max()))
    return res


METHODS = ("BIS", "Non-Constraint", "QuantRand")


def run_cdf_study(scenario, trials=None, seed=0, methods=METHODS):
    """Empirical CDFs of Min-UE and Max-SP over seeded trials.

    Returns ``{method: {"min_ue": sorted, "max_sp": sorted, "cdf": levels}}``.
    """
    trials = trials or scenario.study.trials
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    setup = build_setup(scenario)
    if not setup.suppression_points:
        raise ConfigError("CDF study needs a suppression region")
    per = {m: ([], []) for m in methods}
    for i in range(trials):
        for m, (ue, sp) in _trial_metrics(setup, seed + i, methods).items():
            per[m][0].append(ue)
            per[m][1].append(sp)
    levels = np.arange(1, trials + 1) / trials
    return {m: {"min_ue": np.sort(ue), "max_sp": np.sort(sp), "cdf": levels}
            for m, (ue, sp) in per.items()}


@dataclass
class RGPoint:
    n_units: int
    method: str
    trials: int
    rg_mean: float
    rg_std: float
    min_ue_mean: float
    max_sp_mean: float


def run_rg_study(scenario, n_grid=None, trials=None, seed=0, methods=METHODS):
    """Relative Gain versus the number of units of a linear surface.

    For each ``N`` the surface becomes ``1 x N``; every trial re-solves with a
    fresh seed and RG (dB) is averaged over trials.
    """
    n_grid = tuple(n_grid or scenario.study.n_grid)
    if list(n_grid) != sorted(n_grid):
        raise ConfigError("n_grid must be increasing")
    trials = trials or scenario.study.trials
    out = []
    for n in n_grid:
        setup = build_setup(scenario.with_grid(rows=1, cols=int(n)))
        acc = {m: [] for m in methods}
        for i in range(trials):
            for m, v in _trial_metrics(setup, seed + i, methods).items():
                acc[m].append(v)
        for m in methods:
            v = np.array(acc[m])
            rg = 10.0 * np.log10(v[:, 0] / v[:, 1])
            out.append(RGPoint(int(n), m, trials, float(rg.mean()),
                               float(rg.std(ddof=1)) if trials > 1 else 0.0,
                               float(v[:, 0].mean()), float(v[:, 1].mean())))
    return out


def run_compare(scenario, seed=None, oracle_bits=None):
    """One metrics row per method on a shared seed; failing methods become
    labelled error rows."""
    setup = build_setup(scenario)
    rows, reports = [], {}
    try:
        nc = solve_nonconstraint(setup, seed)
        reports["Non-Constraint"] = nc
        rows.append(metrics_for(setup, "Non-Constraint", nc))
        peak = peak_reference(nc)
    except Exception as exc:  # noqa: BLE001 - reported as a row
        rows.append(error_row("Non-Constraint", exc))
        peak = None
    jobs = [("BIS", lambda: solve_bis(setup, peak=peak, seed=seed)),
            ("QuantRand", lambda: solve_quant(setup, peak=peak, seed=seed))]
    if oracle_bits:
        jobs.append((f"Oracle-{oracle_bits}bit", lambda: solve_oracle(setup, oracle_bits, peak)))
    for name, job in jobs:
        try:
            rep = job()
        except (InfeasibleError, SearchSpaceError, ConfigError) as exc:
            rows.append(error_row(name, exc))
            continue
        reports[name] = rep
        rows.append(metrics_for(setup, name, rep))
    return rows, reports
