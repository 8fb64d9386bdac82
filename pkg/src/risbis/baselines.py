"""Reference methods: unconstrained max-min, quantized random coordinate
descent, and an exhaustive grid oracle for small surfaces."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SearchSpaceError
from .solver import SolverSettings, build_report, solve

TWO_PI = 2.0 * np.pi
MAX_ORACLE_LOG2 = 24


def solve_unconstrained(instance, settings=SolverSettings()):
    """Max-min synthesis with no suppression constraints ("Non-Constraint")."""
    if instance.Q != 0:
        raise ConfigError("solve_unconstrained expects an instance without constraints; "
                          "use instance.without_constraints()")
    report = solve(instance, settings)
    report.method = "Non-Constraint"
    return report


@dataclass(frozen=True)
class QuantizedSearchSettings:
    bits: int = 3
    max_sweeps: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.bits < 1:
            raise ConfigError("bits must be >= 1")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")


def _scaled_rows(instance):
    forms = instance.user_forms + instance.constraint_forms
    F = np.vstack([f.factor for f in forms])
    scales = np.array([f.scale for f in forms])
    return F, scales


def _scores(pw, K, sigma):
    """Rank candidate columns of ``pw``: feasible ones by min user power, the
    rest (below every feasible one) by smallest worst violation."""
    merit = pw[:K].min(axis=0)
    if pw.shape[0] == K:
        return merit
    viol = np.max(pw[K:] - sigma[:, None], axis=0)
    # merit >= 0 > -viol, so any feasible candidate outranks every infeasible one
    return np.where(viol <= 0, merit, -viol)


def solve_quantrand(instance, qsettings=QuantizedSearchSettings()):
    """Greedy random-order coordinate search over ``2**bits`` phase levels.

    Each visit sets one unit to the level that maximises the minimum weighted
    user power among candidates meeting every threshold; if no candidate for
    that unit is feasible, the one with the smallest worst violation wins.  The
    current level is kept on ties.  Stops after a sweep with no change or after
    ``max_sweeps`` sweeps.
    """
    L = 2 ** qsettings.bits
    levels = TWO_PI * np.arange(L) / L
    phasors = np.exp(1j * levels)
    rng = np.random.default_rng(qsettings.rng_seed)
    F, scales = _scaled_rows(instance)
    K, N = instance.K, instance.N
    sigma = np.asarray(instance.thresholds, dtype=float)

    idx = rng.integers(L, size=N)
    x = phasors[idx]
    a = F @ x
    termination = "sweep-limit"
    for _ in range(qsettings.max_sweeps):
        changed = False
        for n in rng.permutation(N):
            base = a - F[:, n] * x[n]
            cand = base[:, None] + F[:, n][:, None] * phasors[None, :]
            pw = scales[:, None] * np.abs(cand) ** 2
            score = _scores(pw, K, sigma)
            best = int(np.argmax(score))
            if score[best] > score[idx[n]]:
                idx[n] = best
                x[n] = phasors[best]
                a = cand[:, best]
                changed = True
        if not changed:
            termination = "sweep-converged"
            break
    omega = levels[idx]
    t_root = -float(np.min(instance.weighted_powers(omega)))
    return build_report(instance, omega, t_root, termination=termination, epsilon=0.0,
                        delta=0.0, lam_final=float("nan"), method="QuantRand")


@dataclass(frozen=True)
class OracleResult:
    best_omega: np.ndarray
    best_value: float
    feasible: bool
    bits: int


def exhaustive_oracle(instance, bits, chunk=1 << 16):
    """Best configuration on the ``2**bits``-level phase grid.

    Enumerates the grid with the first unit pinned to phase 0; by global-phase
    invariance (the grid is closed under shifts by one level) this loses no
    optimum.  Among feasible configurations the one with the largest minimum
    weighted user power wins, the lexicographically first on ties.  When no
    configuration is feasible, ``feasible`` is False and the configuration with
    the smallest worst violation is returned with ``best_value`` set to its
    min user power.
    """
    N = instance.N
    if N * bits > MAX_ORACLE_LOG2:
        raise SearchSpaceError(
            f"search space 2^{N * bits} exceeds the 2^{MAX_ORACLE_LOG2} oracle bound")
    L = 2 ** bits
    levels = TWO_PI * np.arange(L) / L
    phasors = np.exp(1j * levels)
    F, scales = _scaled_rows(instance)
    K = instance.K
    sigma = np.asarray(instance.thresholds, dtype=float)
    total = L ** (N - 1)

    best_feasible = (-np.inf, None)
    best_any = (np.inf, None)  # smallest violation
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        digits = np.zeros((N, codes.size), dtype=np.int64)
        rem = codes.copy()
        for n in range(N - 1, 0, -1):
            digits[n] = rem % L
            rem //= L
        a = F @ phasors[digits]
        pw = scales[:, None] * np.abs(a) ** 2
        merit = pw[:K].min(axis=0)
        viol = (np.max(pw[K:] - sigma[:, None], axis=0) if instance.Q
                else np.full(codes.size, -np.inf))
        feas = viol <= 0
        if np.any(feas):
            m = np.where(feas, merit, -np.inf)
            j = int(np.argmax(m))
            if m[j] > best_feasible[0]:
                best_feasible = (float(m[j]), digits[:, j].copy(), float(merit[j]))
        if best_feasible[1] is None:
            j = int(np.argmin(viol))
            if viol[j] < best_any[0]:
                best_any = (float(viol[j]), digits[:, j].copy(), float(merit[j]))
    if best_feasible[1] is not None:
        return OracleResult(levels[best_feasible[1]], best_feasible[0], True, bits)
    return OracleResult(levels[best_any[1]], best_any[2], False, bits)
