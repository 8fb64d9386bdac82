"""Result files: CSV tables with a header row plus a JSON sidecar.

Column names are part of the public interface (see README).  Linear powers
are written with full ``repr`` precision so dB columns can be re-derived
exactly from the linear ones.
"""

from dataclasses import asdict
import csv
import json
from pathlib import Path
import subprocess

import numpy as np

from . import __version__, kernels

PATTERN_COLUMNS = ("theta_deg", "phi_deg", "power_w", "power_dbm")
METRICS_COLUMNS = ("method", "status", "power_ratio", "variance", "peak_in_suppression_w",
                   "peak_in_suppression_dbm", "min_ue_power_w", "min_ue_power_dbm",
                   "max_sp_power_w", "max_sp_power_dbm", "relative_gain_db", "t_root")
CDF_COLUMNS = ("method", "metric", "rank", "cdf", "power_w", "power_dbm")
RG_COLUMNS = ("n_units", "method", "trials", "relative_gain_db_mean", "relative_gain_db_std",
              "min_ue_power_w_mean", "max_sp_power_w_mean")


def git_describe():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True, text=True,
                             timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _dbm(p):
    p = float(p)
    if np.isnan(p):
        return float("nan")
    return float("-inf") if p <= 0 else 10.0 * np.log10(p / 1e-3)


def write_sidecar(path, scenario, seed, command, extra=None):
    meta = {
        "command": command,
        "scenario": scenario.name,
        "scenario_hash": scenario.scenario_hash(),
        "seed": int(seed),
        "solver": asdict(scenario.solver),
        "quantrand": asdict(scenario.quantrand),
        "git_describe": git_describe(),
        "package_version": __version__,
        "kernel_backend": kernels.BACKEND,
    }
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


def write_table(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_report(path, report):
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def write_pattern(path, pattern):
    rows = [(t, p, w, _dbm(w)) for (t, p), w in zip(pattern.angles, pattern.powers)]
    write_table(path, PATTERN_COLUMNS, rows)


def write_metrics(path, rows):
    out = []
    for r in rows:
        out.append((r.method, r.status, ":".join(f"{v:.6g}" for v in r.power_ratio), r.variance,
                    r.peak_in_suppression, _dbm(r.peak_in_suppression), r.min_ue_power,
                    _dbm(r.min_ue_power), r.max_sp_power, _dbm(r.max_sp_power),
                    r.relative_gain, r.t_root))
    write_table(path, METRICS_COLUMNS, out)


def write_cdf(path, cdfs):
    rows = []
    for method, d in cdfs.items():
        for metric in ("min_ue", "max_sp"):
            for i, (c, p) in enumerate(zip(d["cdf"], d[metric])):
                rows.append((method, metric, i + 1, c, p, _dbm(p)))
    write_table(path, CDF_COLUMNS, rows)


def write_rg(path, points):
    write_table(path, RG_COLUMNS, [(p.n_units, p.method, p.trials, p.rg_mean, p.rg_std,
                                    p.min_ue_mean, p.max_sp_mean) for p in points])
