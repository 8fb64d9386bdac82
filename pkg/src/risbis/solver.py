"""Bisection solver for the constrained max-min phase problem.

Maximise ``min_k P_k(omega)/alpha_k`` subject to ``G_q(omega) <= sigma_q`` by
locating the root of the decreasing value function

    F(t) = min_omega max({-P_k/alpha_k - t}, {G_q - sigma_q})

with bisection.  Each evaluation replaces ``max`` by the smooth max of
:mod:`risbis.smoothing` (giving ``F_lam``) and minimises over ``omega`` with an
accelerated gradient method.  Sign tests follow the sandwich
``F(t) <= F_lam(t) <= F(t) + 1/(4 lam)``: ``F_lam < -1/(4 lam)`` proves
``F < 0`` and ``F_lam > 0`` proves ``F > 0``; anything in between doubles
``lam`` until ``lam > 1/(4 delta)``.

Internally every instance is rescaled so the strongest user's coherent bound
is 1; ``lam`` (and ``lambda0``) therefore act on that normalised problem, while
everything reported is converted back to the caller's units.
"""

from dataclasses import asdict, dataclass, field, replace
import logging
import math

import numpy as np

from . import kernels
from .errors import ConfigError, InfeasibleError
from .field import QuadraticForm

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProblemInstance:
    user_forms: tuple
    constraint_forms: tuple = ()
    thresholds: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "user_forms", tuple(self.user_forms))
        object.__setattr__(self, "constraint_forms", tuple(self.constraint_forms))
        object.__setattr__(self, "thresholds", tuple(float(s) for s in self.thresholds))
        if not self.user_forms:
            raise ConfigError("at least one served user is required")
        if len(self.constraint_forms) != len(self.thresholds):
            raise ConfigError("one threshold per constraint form is required")
        if any(not (s >= 0 and math.isfinite(s)) for s in self.thresholds):
            raise ConfigError("thresholds must be finite and non-negative")
        dims = {f.dimension for f in self.user_forms + self.constraint_forms}
        if len(dims) != 1:
            raise ConfigError(f"forms disagree on dimension: {sorted(dims)}")

    @property
    def N(self):
        return self.user_forms[0].dimension

    @property
    def K(self):
        return len(self.user_forms)

    @property
    def Q(self):
        return len(self.constraint_forms)

    def coherent_bound(self):
        """``max_k s_k (sum_n |h_kn|)^2``, an upper bound on every weighted user power."""
        return max(f.coherent_bound() for f in self.user_forms)

    def without_constraints(self):
        return ProblemInstance(self.user_forms)

    def rescaled(self, c):
        """Same problem with every power (and threshold) multiplied by ``c``."""
        users = [QuadraticForm(f.factor, f.scale * c) for f in self.user_forms]
        cons = [QuadraticForm(f.factor, f.scale * c) for f in self.constraint_forms]
        return ProblemInstance(users, cons, [s * c for s in self.thresholds])

    def arrays(self, t):
        """``(F, coef, offset)`` so the objective rows are ``coef*|F x|^2 - offset``."""
        forms = self.user_forms + self.constraint_forms
        F = np.ascontiguousarray(np.vstack([f.factor for f in forms]), dtype=complex)
        coef = np.array([-f.scale for f in self.user_forms] + [f.scale for f in self.constraint_forms])
        offset = np.array([float(t)] * self.K + list(self.thresholds))
        return F, coef, offset

    def weighted_powers(self, omega):
        return np.array([f(omega) for f in self.user_forms])

    def received_powers(self, omega):
        x = np.exp(1j * np.asarray(omega, dtype=float))
        return np.array([np.abs(f.factor @ x) ** 2 for f in self.user_forms])

    def constraint_values(self, omega):
        return np.array([f(omega) for f in self.constraint_forms])


@dataclass(frozen=True)
class SolverSettings:
    """Tunables for :func:`solve`.

    ``epsilon`` and ``delta`` are in the instance's power units; ``None``
    selects ``1e-4 * |b0 - a0|`` and ``1e-3 * min(sigma)`` respectively.
    ``lambda0`` applies to the normalised problem.
    """

    lambda0: float = 1.0
    epsilon: float | None = None
    delta: float | None = None
    max_inner_iters: int = 2000
    inner_grad_tolerance: float = 1e-8
    restarts: int = 8
    rng_seed: int = 0
    warm_start: bool = True
    max_expansions: int = 60

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ConfigError("lambda0 must be positive")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.max_inner_iters < 1:
            raise ConfigError("max_inner_iters must be >= 1")


@dataclass(frozen=True)
class TraceEntry:
    t: float
    value: float
    lam: float
    grad_norm: float
    stage: str
    decision: str


@dataclass(frozen=True)
class FLambdaEval:
    value: float
    omega: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool


@dataclass
class SolveReport:
    t_root: float
    omega_star: np.ndarray
    achieved_powers: np.ndarray
    received_powers: np.ndarray
    constraint_values: np.ndarray
    thresholds: np.ndarray
    max_violation: float
    termination: str
    epsilon: float
    delta: float
    lam_final: float
    bisection_trace: list = field(default_factory=list)
    method: str = "BIS"

    @property
    def min_power(self):
        """Weighted max-min value reached by ``omega_star``."""
        return float(np.min(self.achieved_powers))

    @property
    def bisection_steps(self):
        return sum(1 for e in self.bisection_trace if e.stage == "bisect")

    def to_dict(self):
        return {
            "method": self.method,
            "termination": self.termination,
            "t_root": self.t_root,
            "max_min_power": -self.t_root,
            "omega_star": [float(v) for v in self.omega_star],
            "achieved_powers": [float(v) for v in self.achieved_powers],
            "received_powers": [float(v) for v in self.received_powers],
            "constraint_values": [float(v) for v in self.constraint_values],
            "thresholds": [float(v) for v in self.thresholds],
            "max_violation": self.max_violation,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lam_final": self.lam_final,
            "bisection_trace": [asdict(e) for e in self.bisection_trace],
        }


def build_report(instance, omega, t_root, **kw):
    omega = np.mod(np.asarray(omega, dtype=float), TWO_PI)
    g = instance.constraint_values(omega)
    sig = np.asarray(instance.thresholds, dtype=float)
    viol = float(np.max(np.maximum(g - sig, 0.0))) if g.size else 0.0
    return SolveReport(
        t_root=float(t_root),
        omega_star=omega,
        achieved_powers=instance.weighted_powers(omega),
        received_powers=instance.received_powers(omega),
        constraint_values=g,
        thresholds=sig,
        max_violation=viol,
        **kw,
    )


def objective_vector(instance, omega, t):
    """``(f_1 - t, ..., f_K - t, g_1 - sigma_1, ..., g_Q - sigma_Q)`` with ``f_k = -P_k/alpha_k``."""
    F, coef, offset = instance.arrays(t)
    return kernels.objective_rows(np.ascontiguousarray(omega, dtype=float), F, coef, offset)


def objective_gradient(instance, omega, t, weights):
    """Gradient in ``omega`` of ``sum_i weights_i * objective_vector_i``.

    With ``weights`` equal to the smooth-max gradient at the current objective
    vector this is the chain-rule gradient of the smoothed objective.
    """
    F, coef, _ = instance.arrays(t)
    x = np.exp(1j * np.asarray(omega, dtype=float))
    a = F @ x
    w = np.asarray(weights, dtype=float) * coef * np.conj(a)
    return -2.0 * np.imag((w @ F) * x)


def smoothed_objective(instance, omega, t, lam):
    """Smooth max of the objective vector and its ``omega``-gradient."""
    F, coef, offset = instance.arrays(t)
    return kernels.smoothed_value_grad(np.ascontiguousarray(omega, dtype=float), F, coef, offset,
                                       float(lam))


def _initial_step(F, coef, lam):
    weight = float(np.sum(np.abs(coef) * np.sum(np.abs(F), axis=1) ** 2))
    return 1.0 / (2.0 * max(lam, 1.0) * weight)


def evaluate_F_lambda(instance, t, lam, settings=SolverSettings(), rng=None, warm=None):
    """Approximate ``F_lam(t)`` by multi-start accelerated gradient descent.

    Starting points are ``settings.restarts`` uniform draws on ``[0, 2 pi)^N``
    (from ``rng``, or a fresh generator seeded with ``settings.rng_seed``),
    preceded by ``warm`` when given.  Hitting ``max_inner_iters`` is not an
    error; the result is flagged ``converged=False``.
    """
    if not lam > 0:
        raise ConfigError("lam must be positive")
    if rng is None:
        rng = np.random.default_rng(settings.rng_seed)
    F, coef, offset = instance.arrays(t)
    starts = rng.uniform(0.0, TWO_PI, size=(settings.restarts, instance.N))
    if warm is not None:
        starts = np.vstack([np.asarray(warm, dtype=float)[None, :], starts])
    starts = np.ascontiguousarray(starts)
    om, val, gn, its, _ = kernels.multistart_minimize(
        starts, F, coef, offset, float(lam), _initial_step(F, coef, lam),
        int(settings.max_inner_iters), float(settings.inner_grad_tolerance))
    converged = gn < settings.inner_grad_tolerance or its < settings.max_inner_iters * len(starts)
    if not converged:
        log.warning("inner solver hit max_inner_iters at t=%g (grad norm %.3g)", t, gn)
    return FLambdaEval(value=float(val), omega=np.mod(om, TWO_PI), grad_norm=float(gn),
                       iterations=int(its), converged=bool(converged))


@dataclass
class Bracket:
    a: float
    b: float
    lam: float
    omega_b: np.ndarray | None
    trace: list


def _smooth_at(instance, omega, t, lam):
    return smoothed_objective(instance, omega, t, lam)[0]


def initial_bracket(instance, lam, settings=SolverSettings(), rng=None, delta=None):
    """Find ``a < b`` with ``F_lam(a) > 0`` and ``F_lam(b) < -1/(4 lam)``.

    ``a = -U - 1`` with ``U`` the coherent user bound, so every user row is
    positive and ``F_lam(a) > 0`` holds without evaluation.  ``b`` starts at 0
    and moves outward (``b <- 2b - a``) while the users are what keeps the
    smoothed max up; when the suppression rows dominate instead, ``lam`` is
    doubled.  Failure after ``max_expansions`` steps, or with the constraint
    rows still binding once ``lam > 1/(4 delta)``, raises
    :class:`InfeasibleError`.
    """
    if rng is None:
        rng = np.random.default_rng(settings.rng_seed)
    U = instance.coherent_bound()
    a = -U - 1.0
    b = 0.0
    trace = []
    warm = None
    for _ in range(settings.max_expansions):
        ev = evaluate_F_lambda(instance, b, lam, settings, rng=rng, warm=warm)
        warm = ev.omega if settings.warm_start else None
        ok = ev.value < -1.0 / (4.0 * lam)
        trace.append(TraceEntry(b, ev.value, lam, ev.grad_norm, "bracket",
                                "accept" if ok else "reject"))
        if ok:
            return Bracket(a=a, b=b, lam=lam, omega_b=ev.omega, trace=trace)
        y = objective_vector(instance, ev.omega, b)
        users_bind = instance.Q == 0 or np.max(y[:instance.K]) >= np.max(y[instance.K:])
        if users_bind:
            b = 2.0 * b - a
        else:
            if delta is not None and lam > 1.0 / (4.0 * delta):
                raise InfeasibleError(
                    "suppression constraints cannot be met within tolerance "
                    f"(max constraint excess {np.max(y[instance.K:]):.3e} at lam={lam:.3g})",
                    trace)
            lam *= 2.0
    raise InfeasibleError(
        f"no bracket with F_lam(b) < -1/(4 lam) after {settings.max_expansions} expansions",
        trace)


def solve(instance, settings=SolverSettings()):
    """Run the bisection method and return a :class:`SolveReport`.

    Raises :class:`InfeasibleError` when no initial bracket exists.
    """
    U = instance.coherent_bound()
    if not U > 0:
        raise ConfigError("served users receive no power for any phase choice")
    norm = instance.rescaled(1.0 / U)
    thresholds = np.asarray(instance.thresholds, dtype=float)
    if settings.delta is not None:
        delta = settings.delta
    elif thresholds.size and np.min(thresholds) > 0:
        delta = 1e-3 * float(np.min(thresholds))
    else:
        delta = 1e-9 * U
    delta_n = delta / U

    rng = np.random.default_rng(settings.rng_seed)
    lam = float(settings.lambda0)
    br = initial_bracket(norm, lam, settings, rng=rng, delta=delta_n)
    a, b, lam = br.a, br.b, br.lam
    eps = settings.epsilon if settings.epsilon is not None else 1e-4 * abs(b - a) * U
    eps_n = eps / U
    trace = list(br.trace)
    omega_b = br.omega_b
    omega_star = omega_b
    warm = omega_b if settings.warm_start else None
    termination = "bracket-converged"
    t = a + (b - a) / 2.0

    while abs(a - b) > eps_n:
        t = a + (b - a) / 2.0
        ev = evaluate_F_lambda(norm, t, lam, settings, rng=rng, warm=warm)
        if settings.warm_start:
            warm = ev.omega
        if ev.value < -1.0 / (4.0 * lam):
            b, omega_b = t, ev.omega
            decision = "b"
        elif ev.value > 0.0:
            a = t
            decision = "a"
        elif lam > 1.0 / (4.0 * delta_n):
            decision = "stop"
        else:
            decision = "lam"
        trace.append(TraceEntry(t, ev.value, lam, ev.grad_norm, "bisect", decision))
        if decision == "stop":
            termination = "delta-satisfied"
            omega_star = ev.omega
            break
        if decision == "lam":
            lam *= 2.0
            # C_{2 lam} <= C_lam pointwise, so the stored minimiser at b usually
            # certifies the bracket again without a fresh inner solve
            if _smooth_at(norm, omega_b, b, lam) >= -1.0 / (4.0 * lam):
                ev_b = evaluate_F_lambda(norm, b, lam, settings, rng=rng, warm=omega_b)
                ok = ev_b.value < -1.0 / (4.0 * lam)
                trace.append(TraceEntry(b, ev_b.value, lam, ev_b.grad_norm, "recheck",
                                        "accept" if ok else "reject"))
                if ok:
                    omega_b = ev_b.omega
                else:
                    log.warning("bracket end b=%g lost after lam doubling; re-expanding", b)
                    br = initial_bracket(norm, lam, settings, rng=rng, delta=delta_n)
                    a, b, lam, omega_b = br.a, br.b, br.lam, br.omega_b
                    trace.extend(br.trace)
        omega_star = omega_b

    # report in the caller's units
    scaled_trace = [TraceEntry(e.t * U, e.value * U, e.lam / U, e.grad_norm * U, e.stage,
                               e.decision) for e in trace]
    return build_report(instance, omega_star, t * U, termination=termination, epsilon=eps,
                        delta=delta, lam_final=lam / U, bisection_trace=scaled_trace)


def with_seed(settings, seed):
    return replace(settings, rng_seed=int(seed))
