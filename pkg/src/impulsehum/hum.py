"""Penalized HUM machinery: control operator, Gramian, CG solver, duality checks.

The minimal-norm impulse control is obtained by minimizing a penalized
quadratic functional over adjoint initial data, which is equivalent to the
operator equation

    (Lambda + eps I) f = -E(T) psi0,      Lambda = E(T-tau) B E(T-tau),

where E(t) is the discrete semigroup, B the interior restriction to the
control region, and all inner products the weighted one (Lambda + eps I is
self-adjoint positive definite only in that geometry).  The conjugate
gradient iteration below works matrix-free through two propagations per
application of Lambda.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .evolution import TimeScheme, evolve, solve_impulsive
from .mesh import Discretization, State, SubdomainMask, inner, norm, subdomain_norm


class CgBreakdownError(RuntimeError):
    """Raised when the CG curvature term loses positive definiteness."""


@dataclass(frozen=True)
class HumConfig:
    """Penalty, stopping rule and timing of one solve.

    ``kappa`` switches on the cost-weighted variant: the observation term is
    weighted by kappa^2 and the penalty becomes epsilon^2.  When left unset
    the solvers that need it default to kappa = 1/epsilon, a practical scale
    standing in for the non-constructive theoretical constant.
    """

    epsilon: float
    tau: float
    t_final: float
    tol: float = 1e-3
    max_iter: Optional[int] = None
    kappa: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        # tau == t_final is tolerated so the degenerate Gramian (identity
        # semigroup) stays testable; the impulse solvers require tau < t_final.
        if not 0.0 < self.tau <= self.t_final:
            raise ValueError(
                f"need 0 < tau <= t_final, got tau={self.tau}, t_final={self.t_final}"
            )
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if self.kappa is not None and not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")


@dataclass(frozen=True)
class HumSolution:
    """Minimizer, control and bookkeeping of one CG solve."""

    minimizer: State
    control: State
    final_state: State
    iterations: int
    residual_history: np.ndarray
    functional_history: np.ndarray
    control_norm: float
    final_norm: float
    initial_norm: float
    epsilon: float
    tol: float
    converged: bool
    kappa: Optional[float] = None


def control_op(v: State, mask: SubdomainMask) -> State:
    """Restrict to the control region: interior nodes of omega keep their
    value, everything else (including both boundary entries) is zeroed."""
    return mask.mask * np.asarray(v, dtype=float)


def gramian_apply(
    rho: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
) -> State:
    """Apply Lambda = E(T-tau) B E(T-tau) to ``rho``."""
    span = cfg.t_final - cfg.tau
    return evolve(control_op(evolve(rho, span, d, scheme), mask), span, d, scheme)


def _objective(
    theta0: State,
    psi0: State,
    obs_weight: float,
    penalty: float,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
) -> float:
    span = cfg.t_final - cfg.tau
    mid = evolve(theta0, span, d, scheme)
    end = evolve(mid, cfg.tau, d, scheme)
    return (
        0.5 * obs_weight * subdomain_norm(mid, mask, d) ** 2
        + 0.5 * penalty * inner(theta0, theta0, d)
        + inner(psi0, end, d)
    )


def penalized_objective(
    theta0: State,
    psi0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
) -> float:
    """Penalized HUM objective: half the observed energy at T - tau, plus
    (eps/2) times the squared weighted norm of the adjoint datum, plus the
    coupling with the datum to be controlled (two propagations)."""
    return _objective(theta0, psi0, 1.0, cfg.epsilon, cfg, d, mask, scheme)


def _run_cg(
    psi0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
    obs_weight: float,
    penalty: float,
    f0: Optional[State],
):
    """CG on (obs_weight * Lambda + penalty I) f = -E(T) psi0.

    Follows the printed iteration: g_0 = penalty f_0 + obs_weight Lambda f_0
    + E(T) psi0, descent directions w_k, step rho_k = |g_{k-1}|^2 /
    <gbar_k, w_{k-1}>, restart-free, stop on |g_k| / |g_0| <= tol.
    """
    span = cfg.t_final - cfg.tau

    def apply_op(v: State) -> State:
        lam = evolve(control_op(evolve(v, span, d, scheme), mask), span, d, scheme)
        return penalty * v + obs_weight * lam

    def objective(v: State) -> float:
        return _objective(v, psi0, obs_weight, penalty, cfg, d, mask, scheme)

    b = evolve(psi0, cfg.t_final, d, scheme)
    if f0 is None:
        f = np.zeros(d.grid.n_dof)
        g = b.copy()
    else:
        f = np.asarray(f0, dtype=float).copy()
        g = apply_op(f) + b

    g0_norm = norm(g, d)
    if g0_norm == 0.0:
        return f, np.array([0.0]), np.array([objective(f)]), 0, True

    max_iter = cfg.max_iter if cfg.max_iter is not None else 10 * d.grid.nx
    residuals = [1.0]
    functionals = [objective(f)]
    w = g.copy()
    g_norm = g0_norm
    converged = False
    iterations = 0
    for k in range(1, max_iter + 1):
        gbar = apply_op(w)
        denom = inner(gbar, w, d)
        if denom <= 0.0:
            raise CgBreakdownError(
                f"curvature <gbar, w> = {denom} is not positive at iteration {k}; "
                "the regularized Gramian lost positive definiteness"
            )
        rho = g_norm**2 / denom
        f = f - rho * w
        g = g - rho * gbar
        new_norm = norm(g, d)
        residuals.append(new_norm / g0_norm)
        functionals.append(objective(f))
        iterations = k
        if new_norm / g0_norm <= cfg.tol:
            converged = True
            break
        w = g + (new_norm**2 / g_norm**2) * w
        g_norm = new_norm
    return f, np.array(residuals), np.array(functionals), iterations, converged


def _package(
    psi0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
    f: State,
    residuals: np.ndarray,
    functionals: np.ndarray,
    iterations: int,
    converged: bool,
    control_scale: float,
    kappa: Optional[float],
) -> HumSolution:
    span = cfg.t_final - cfg.tau
    control = control_scale * control_op(evolve(f, span, d, scheme), mask)
    traj = solve_impulsive(psi0, control, cfg.tau, d, mask, scheme)
    final = traj.final_state
    return HumSolution(
        minimizer=f,
        control=control,
        final_state=final,
        iterations=iterations,
        residual_history=residuals,
        functional_history=functionals,
        control_norm=subdomain_norm(control, mask, d),
        final_norm=norm(final, d),
        initial_norm=norm(psi0, d),
        epsilon=cfg.epsilon,
        tol=cfg.tol,
        converged=converged,
        kappa=kappa,
    )


def cg_solve(
    psi0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
    f0: Optional[State] = None,
) -> HumSolution:
    """Minimal-norm impulse control via CG on (Lambda + eps I) f = -E(T) psi0.

    On convergence the control is the masked propagation of the minimizer and
    the reported final state comes from one impulsive forward solve.  If the
    iteration cap is hit the best iterate is returned with ``converged``
    False rather than raising, so partial sweeps stay reproducible.
    """
    if not cfg.tau < cfg.t_final:
        raise ValueError("cg_solve needs tau < t_final")
    f, res, fun, iters, conv = _run_cg(
        psi0, cfg, d, mask, scheme, obs_weight=1.0, penalty=cfg.epsilon, f0=f0
    )
    return _package(
        psi0, cfg, d, mask, scheme, f, res, fun, iters, conv,
        control_scale=1.0, kappa=None,
    )


def solve_cost_weighted(
    psi0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
    f0: Optional[State] = None,
) -> HumSolution:
    """Cost-weighted variant: CG on (kappa^2 Lambda + eps^2 I) f = -E(T) psi0
    with control kappa^2 B E(T-tau) f.

    At the exact minimizer the controlled final state equals -eps^2 times the
    minimizer, which makes the explicit cost bound checkable; see
    :func:`cost_bound_check`.
    """
    if not cfg.tau < cfg.t_final:
        raise ValueError("solve_cost_weighted needs tau < t_final")
    kappa = cfg.kappa if cfg.kappa is not None else 1.0 / cfg.epsilon
    f, res, fun, iters, conv = _run_cg(
        psi0, cfg, d, mask, scheme,
        obs_weight=kappa**2, penalty=cfg.epsilon**2, f0=f0,
    )
    return _package(
        psi0, cfg, d, mask, scheme, f, res, fun, iters, conv,
        control_scale=kappa**2, kappa=kappa,
    )


def duality_residual(
    psi0: State,
    h: State,
    zeta0: State,
    cfg: HumConfig,
    d: Discretization,
    mask: SubdomainMask,
    scheme: TimeScheme,
) -> float:
    """Absolute residual of the transposition identity.

    For any control h and auxiliary datum zeta0 the impulsive solution
    satisfies <B h, Z(T-tau)> + <psi0, Z(T)> - <Psi(T), zeta0> = 0 where Z is
    the free flow started from zeta0; the discrete residual is pure roundoff
    because the discrete semigroup is self-adjoint.
    """
    if not cfg.tau < cfg.t_final:
        raise ValueError("duality_residual needs tau < t_final")
    z_end = evolve(zeta0, cfg.t_final, d, scheme)
    z_mid = evolve(zeta0, cfg.t_final - cfg.tau, d, scheme)
    traj = solve_impulsive(psi0, h, cfg.tau, d, mask, scheme)
    term_control = inner(control_op(h, mask), z_mid, d)
    return abs(term_control + inner(psi0, z_end, d) - inner(traj.final_state, zeta0, d))


@dataclass(frozen=True)
class CostBoundReport:
    """Terms of the explicit control-cost inequality."""

    control_term: float
    final_term: float
    total: float
    initial_sq: float
    slack: float
    ok: bool


def cost_bound_check(solution: HumSolution, cfg: HumConfig) -> CostBoundReport:
    """Check (1/kappa^2) |h|_omega^2 + (1/eps^2) |Psi(T)|^2 <= |Psi0|^2.

    Only meaningful for solutions of :func:`solve_cost_weighted`; the slack
    is allowed a small negative margin proportional to the CG stopping
    tolerance.
    """
    if solution.kappa is None:
        raise ValueError("cost_bound_check needs a solution from solve_cost_weighted")
    control_term = solution.control_norm**2 / solution.kappa**2
    final_term = solution.final_norm**2 / cfg.epsilon**2
    total = control_term + final_term
    initial_sq = solution.initial_norm**2
    slack = initial_sq - total
    ok = slack >= -10.0 * cfg.tol * initial_sq
    return CostBoundReport(
        control_term=control_term,
        final_term=final_term,
        total=total,
        initial_sq=initial_sq,
        slack=slack,
        ok=ok,
    )


def solution_to_dict(sol: HumSolution) -> dict:
    return {
        "epsilon": sol.epsilon,
        "tol": sol.tol,
        "kappa": sol.kappa,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "control_norm": sol.control_norm,
        "final_norm": sol.final_norm,
        "initial_norm": sol.initial_norm,
        "residual_history": [float(r) for r in sol.residual_history],
        "functional_history": [float(v) for v in sol.functional_history],
    }


def write_solution_json(sol: HumSolution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_dict(sol), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_state_csv(x: np.ndarray, values: np.ndarray, path) -> None:
    """Two-column CSV (x, value) for control profiles and final states."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,value\n")
        for xi, vi in zip(x, values):
            fh.write(f"{float(xi)!r},{float(vi)!r}\n")
