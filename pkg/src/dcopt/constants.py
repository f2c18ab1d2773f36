"""Closed-form analysis constants and theoretically-derived hyperparameters.

Every named scalar (the kappa, phi, psi, eps, tau families) is evaluated
exactly from the graph spectrum, the smoothness constant, the compressor
contract, and the candidate scalars (gamma, tau_1, omega, alpha).  Regime
parameter selection builds on these constants.  Structural constraints
(gamma > kappa_2, tau_1 >= kappa_1, omega in (0, 1/r], stepsize caps, s0
floors) are enforced by construction; horizon thresholds such as
T > kappa_tilde_3, which only certify rate prefactors and are astronomically
conservative at desk scale, are evaluated and reported as feasibility flags
(raised only in strict mode).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .algorithm import GeometricSchedule, HyperParams, RecursiveSchedule
from .compressors import GLOBAL, LOCAL, AssumptionContract, NormContext, pnorm
from .errors import InfeasibleParams, OutOfRange


class ConstantTable(dict):
    """Named scalars with attribute access."""

    def __getattr__(self, name):
        try:
            return self[name]
        except KeyError as exc:
            raise AttributeError(name) from exc

    def as_dict(self):
        return {k: (None if v is None else float(v)) for k, v in self.items()}


def _kappa5_root(phi1, phi2, phi3, phi4) -> float:
    """Smaller positive root of alpha * min(phi1 - a phi2, phi3 - a phi4) = 1,
    +inf when no root exists."""
    best = math.inf
    for (lin, quad) in ((phi1, phi2), (phi3, phi4)):
        disc = lin * lin - 4.0 * quad
        if disc < 0 or quad <= 0:
            continue
        for root in ((lin - math.sqrt(disc)) / (2.0 * quad),
                     (lin + math.sqrt(disc)) / (2.0 * quad)):
            if root <= 0:
                continue
            # the root must lie on the active min branch
            if abs(root * min(phi1 - root * phi2, phi3 - root * phi4) - 1.0) < 1e-9:
                best = min(best, root)
    return best


def compute_constants(graph, ell: float, gamma: float, tau_1: float, omega: float,
                      alpha: float, contract: AssumptionContract, norms: NormContext,
                      T: int | None = None, l1_0: float | None = None,
                      s0: float | None = None, nu: float | None = None,
                      tau_0: float = 1.0, kappa_hat_3: float = 1.0) -> ConstantTable:
    """Evaluate the full constant table at one parameter point."""
    if gamma <= 0 or tau_1 <= 0 or omega <= 0 or alpha <= 0:
        raise OutOfRange("gamma, tau_1, omega, alpha must be positive")
    rho, rho2, n = graph.rho, graph.rho2, graph.n
    r, delta, C = contract.r, contract.delta, contract.C
    dh, dt = norms.d_hat, norms.d_tilde
    beta = tau_1 * gamma

    t = ConstantTable()
    t["beta"] = beta
    t["kappa_1"] = 4.0 / rho2
    t["kappa_2"] = max(2.0 + 2.0 * ell ** 2, 5.0 / rho2,
                       (16.0 * ell ** 2 * (t["kappa_1"] + 1.0) ** 2 / rho2) ** (1.0 / 3.0),
                       2.0 * math.sqrt(2.0) * ell / rho2)

    t["phi_1"] = 0.5 * (rho2 * beta - (3.0 * gamma + 2.0 + 2.0 * ell ** 2))
    t["phi_2"] = 3.0 * rho ** 2 * beta ** 2 - rho2 * beta * gamma \
        + (rho + 2.0) * gamma ** 2 + 1.0 + 2.5 * ell ** 2
    t["phi_3"] = gamma / 2.0 - 2.5 / rho2
    t["phi_4"] = 2.0 * rho * gamma ** 2 + rho / 2.0
    t["phi_5"] = 0.125 - (beta + gamma) ** 2 / gamma ** 5 * ell ** 2 / rho2 \
        - ell ** 2 / (2.0 * gamma ** 2 * rho2 ** 2)
    t["phi_6"] = (beta + gamma) / (2.0 * gamma ** 3) * ell ** 2 / rho2 \
        + ell ** 2 / (2.0 * gamma ** 2 * rho2 ** 2) \
        + ell ** 2 / (2.0 * rho2 ** 2) + ell ** 2 / 2.0 + ell / 2.0
    t["phi_7"] = (rho + 1.0) * gamma + 0.5 * rho * beta
    t["phi_8"] = 3.0 * rho ** 2 * beta ** 2 + (rho - 2.0 * rho2) * beta * gamma \
        + (rho + 2.0) * gamma ** 2 + 1.0

    t["kappa_hat_0"] = min(t["phi_1"] / t["phi_2"], t["phi_3"] / t["phi_4"],
                           t["phi_5"] / t["phi_6"])

    t["eps_1"] = (tau_1 * rho2 - 1.0) / (2.0 * tau_1 * rho2)
    t["eps_2"] = max((1.0 + tau_1 * rho2) / 2.0,
                     (1.0 + tau_1) / 2.0 + 1.0 / (2.0 * tau_1 * rho2 ** 2))
    t["eps_3"] = min(t["phi_1"] - alpha * t["phi_2"], t["phi_3"] - alpha * t["phi_4"])
    t["eps_4"] = min(t["eps_3"], 0.25)
    t["eps_5"] = omega * r * (delta - delta ** 2 / 2.0)

    t["psi_1"] = 2.0 * (t["phi_5"] + alpha * t["phi_6"])
    t["psi_2"] = t["phi_7"] + alpha * t["phi_8"]
    t["psi_3"] = 4.0 * (1.0 + 1.0 / t["eps_5"]) * dh ** 2 * beta ** 2 * rho ** 2
    # eps_1 <= 0 marks tau_1 below its admissible floor; the dependent
    # constants degenerate rather than the whole table failing to evaluate
    t["psi_4"] = 4.0 * (1.0 + 1.0 / t["eps_5"]) * dh ** 2 \
        * max(beta ** 2 * rho ** 2 + ell ** 2, gamma ** 2 * rho) / t["eps_1"] \
        if t["eps_1"] > 0 else math.inf

    t["tau_2"] = ((beta + gamma) / (2.0 * gamma ** 3)
                  + (beta + gamma) ** 2 / (alpha * gamma ** 5)) / rho2 + 0.5
    t["tau_3"] = ((alpha + 1.0) / (2.0 * alpha * gamma ** 2) + 0.5) / rho2 ** 2

    # gradient-dominated (local) family
    t["kappa_5"] = _kappa5_root(t["phi_1"], t["phi_2"], t["phi_3"], t["phi_4"])
    one_minus = 1.0 - 2.0 * t["eps_5"]
    t["kappa_6"] = math.sqrt((t["eps_5"] + 2.0 * t["eps_5"] ** 2) / (one_minus * t["psi_3"])) \
        if one_minus > 0 else math.inf
    t["kappa_tilde_0"] = min(t["kappa_hat_0"], t["kappa_5"],
                             t["kappa_6"] / (math.sqrt(n) * dt))
    if nu is not None:
        t["eps_6"] = min(nu / 2.0, t["eps_3"]) / t["eps_2"]
        t["psi_5"] = 2.0 * one_minus * t["psi_2"] / t["eps_6"] if t["eps_6"] > 0 else math.inf
    else:
        t["eps_6"] = None
        t["psi_5"] = None
    t["eps_7"] = (t["eps_5"] + 2.0 * t["eps_5"] ** 2) \
        - alpha ** 2 * n * dt ** 2 * one_minus * t["psi_3"]

    # horizon-dependent (local nonconvex) family
    t["eps_8"] = (t["eps_5"] + 2.0 * t["eps_5"] ** 2) / 2.0
    t["kappa_7"] = min(t["kappa_hat_0"], 1.0 / (2.0 * ell))
    if T is not None and s0 is not None and l1_0 is not None and C > 0:
        e8 = t["eps_8"]
        t["kappa_8"] = min(
            math.sqrt(e8 / (one_minus * t["psi_3"] * n * dt ** 2)),
            math.sqrt(e8 * C ** 2 * s0 ** 2 / (2.0 * t["psi_4"] * l1_0)) if l1_0 > 0 else math.inf,
            (e8 / (2.0 * one_minus * t["psi_2"] * t["psi_4"] * n * dt ** 2)) ** (1.0 / 3.0)
            / T ** (1.0 / 3.0),
        )
        t["kappa_tilde_0_prime"] = min(t["kappa_7"], t["kappa_8"])
        t["kappa_tilde_4"] = t["psi_4"] * l1_0 * alpha ** 2 / C ** 2 \
            + one_minus * t["psi_2"] * t["psi_4"] * n * dt ** 2 * s0 ** 2 * alpha ** 3 * T
        t["kappa_tilde_3"] = max(
            1.0 / (math.sqrt(n) * dt ** 2 * t["kappa_7"] ** 2),
            one_minus * t["psi_3"] / e8 * math.sqrt(n),
            (2.0 * t["psi_4"] * l1_0 / (e8 * C ** 2 * s0 ** 2 * n)) * math.sqrt(n) / dt ** 2,
            (4.0 * one_minus ** 2 * t["psi_2"] ** 2 * t["psi_4"] ** 2 / e8 ** 2)
            * math.sqrt(n) / dt ** 2,
            kappa_hat_3 * dt ** 2 / math.sqrt(n),
        )
        # exact-first-round constants
        t["kappa_0"] = (e8 / (2.0 * one_minus * t["psi_2"] * t["psi_4"])) ** (1.0 / 3.0)
        t["kappa_3"] = max(tau_0 ** 3 / (n * dt ** 2 * t["kappa_7"] ** 3),
                           (one_minus * t["psi_3"] * tau_0 ** 2 / e8) ** 1.5
                           * math.sqrt(n) * dt)
        t["kappa_4"] = 2.0 * t["psi_4"] * l1_0 / (C ** 2 * e8 * n)
    else:
        for name in ("kappa_8", "kappa_tilde_0_prime", "kappa_tilde_4",
                     "kappa_tilde_3", "kappa_0", "kappa_3", "kappa_4"):
            t[name] = None

    # gradient-dominated local regime
    if nu is not None and t["psi_5"] is not None and np.isfinite(t["psi_5"]):
        t["kappa_6_prime"] = math.sqrt((t["eps_5"] + 2.0 * t["eps_5"] ** 2)
                                       / (one_minus * t["psi_3"] + t["psi_4"] * t["psi_5"]))
        t["kappa_0_prime"] = min(t["kappa_hat_0"], t["kappa_5"],
                                 t["kappa_6_prime"] / (math.sqrt(n) * dt))
        t["kappa_9"] = math.sqrt(max(
            1.0 - alpha * (t["eps_6"] - one_minus * t["psi_2"] / t["psi_5"]), 0.0))
        t["kappa_10"] = math.sqrt(max(
            1.0 - (t["eps_5"] + 2.0 * t["eps_5"] ** 2)
            + alpha ** 2 * n * dt ** 2 * (one_minus * t["psi_3"] + t["psi_4"] * t["psi_5"]),
            0.0))
    else:
        for name in ("kappa_6_prime", "kappa_0_prime", "kappa_9", "kappa_10"):
            t[name] = None

    # globally-bounded family
    t["eps_9"] = omega * r * delta / 2.0
    t["eps_10"] = (1.0 - 2.0 * t["eps_9"]) * (1.0 + 1.0 / t["eps_9"])
    t["eps_11"] = t["eps_9"] + 2.0 * t["eps_9"] ** 2 \
        - 4.0 * t["eps_10"] * alpha ** 2 * beta ** 2 * rho ** 2
    t["eps_12"] = (t["eps_9"] + 2.0 * t["eps_9"] ** 2) / 2.0
    t["phi_2_prime"] = (3.0 + 4.0 * t["eps_10"]) * rho ** 2 * beta ** 2 \
        - rho2 * beta * gamma + (rho + 2.0) * gamma ** 2 + 1.0 \
        + (2.5 + 4.0 * t["eps_10"]) * ell ** 2
    t["phi_4_prime"] = (2.0 + 4.0 * t["eps_10"]) * rho * gamma ** 2 + 0.5 * rho
    t["phi_8_prime"] = (3.0 + 4.0 * t["eps_10"]) * rho ** 2 * beta ** 2 \
        + (rho - 2.0 * rho2) * beta * gamma + (rho + 2.0) * gamma ** 2 + 1.0
    t["eps_3_prime"] = min(t["phi_1"] - alpha * t["phi_2_prime"],
                           t["phi_3"] - alpha * t["phi_4_prime"])
    t["eps_4_prime"] = min(t["eps_3_prime"], 0.25)
    t["kappa_hat_0_prime"] = min(
        t["phi_1"] / t["phi_2_prime"], t["phi_3"] / t["phi_4_prime"],
        t["phi_5"] / t["phi_6"],
        (math.sqrt(t["phi_7"] ** 2 + 8.0 * t["eps_12"] * t["phi_8_prime"]) - t["phi_7"])
        / (2.0 * t["phi_8_prime"]))
    if nu is not None:
        t["eps_6_prime"] = min(nu / 2.0, t["eps_3_prime"],
                               (2.0 * t["eps_12"] - alpha * t["phi_7"]
                                - alpha ** 2 * t["phi_8_prime"]) / alpha) / t["eps_2"]
    else:
        t["eps_6_prime"] = None

    return t


def positivity_flags(table: ConstantTable, gamma: float, tau_1: float,
                     alpha: float) -> dict:
    """Structural feasibility of one parameter point."""
    return {
        "gamma_above_kappa_2": (gamma > table.kappa_2, gamma, table.kappa_2),
        "tau_1_at_least_kappa_1": (tau_1 >= table.kappa_1, tau_1, table.kappa_1),
        "alpha_below_kappa_hat_0": (alpha < table.kappa_hat_0, alpha, table.kappa_hat_0),
        "phi_1_positive": (table.phi_1 > 0, table.phi_1, 0.0),
        "phi_3_positive": (table.phi_3 > 0, table.phi_3, 0.0),
        "phi_5_positive": (table.phi_5 > 0, table.phi_5, 0.0),
    }


# ---------------------------------------------------------------------------
# regime parameter selection
# ---------------------------------------------------------------------------

REGIMES = ("T1_local_nonconvex", "T2_local_exact_first", "T3_local_PL",
           "T5_global_nonconvex", "T6_global_PL")


@dataclass
class ParamSelection:
    regime: str
    hyper: HyperParams
    init_mode: str
    x0: np.ndarray
    table: ConstantTable
    feasibility: dict
    norms: NormContext
    extras: dict = field(default_factory=dict)

    @property
    def all_feasible(self) -> bool:
        return all(ok for ok, _, _ in self.feasibility.values())


def initial_l1_bound(x0: np.ndarray, problem, graph, gamma: float, beta: float) -> float:
    """Upper bound on the initial Lyapunov value using the known lower bound
    in place of the (possibly unknown) optimal value."""
    n = graph.n
    xbar = x0.mean(axis=0)
    G0 = problem.gradients_at(xbar)
    W = G0 / gamma                   # v_0 = 0
    e1 = 0.5 * float(np.sum(x0 * (graph.E @ x0)))
    e2 = 0.5 * (beta + gamma) / gamma * float(np.sum(W * (graph.F @ W)))
    e3 = float(np.sum(x0 * ((graph.E @ graph.F) @ W)))
    e4 = n * (problem.f(xbar) - problem.f_low)
    return max(e1 + e2 + e3 + e4, 1e-12)


def _draw_x0(problem, graph, init_mode: str, x0_seed: int) -> np.ndarray:
    from . import rng as _rng
    gen = _rng.substream(x0_seed, _rng.X0, 0)
    if init_mode == "shared_x0":
        return np.tile(gen.standard_normal(problem.d), (graph.n, 1))
    return gen.standard_normal((graph.n, problem.d))


def theorem_params(regime: str, problem, graph, contract: AssumptionContract,
                   T: int | None = None, x0_seed: int = 0,
                   x0: np.ndarray | None = None, gamma_margin: float = 1.05,
                   tau1_margin: float = 1.05, omega: float | None = None,
                   tau_0: float = 1.0, epsilon: float = 0.99,
                   clamp_alpha: bool = False, safety: float = 0.9,
                   strict: bool = False) -> ParamSelection:
    """Produce a complete parameter set for one convergence regime.

    Structural constraints are satisfied by construction; horizon-style
    preconditions are evaluated and reported in ``feasibility``.  With
    ``clamp_alpha`` the stepsize is lowered to the admissible range
    min(kappa_7, kappa_8(T)) when the horizon-scaled value exceeds it, so
    the induction behind the region guarantee applies as proved.  With
    ``strict`` any False flag raises InfeasibleParams.
    """
    if regime not in REGIMES:
        raise InfeasibleParams(f"unknown regime {regime!r}")
    local_regime = regime.startswith(("T1", "T2", "T3"))
    if local_regime and contract.cls != LOCAL:
        raise InfeasibleParams(f"{regime} needs a local compressor contract")
    if not local_regime and contract.cls != GLOBAL:
        raise InfeasibleParams(f"{regime} needs a global compressor contract")
    if regime in ("T3_local_PL", "T6_global_PL") and problem.pl_nu is None:
        raise InfeasibleParams(f"{regime} needs a gradient-domination constant")
    if regime in ("T1_local_nonconvex", "T2_local_exact_first") and T is None:
        raise InfeasibleParams(f"{regime} needs the horizon T up front")

    n, d = graph.n, problem.d
    norms = NormContext(p=contract.p, d=d)
    dt = norms.d_tilde
    ell = problem.ell
    nu = problem.pl_nu
    init_mode = "exact_first_round" if regime == "T2_local_exact_first" else "standard"
    if x0 is None:
        x0 = _draw_x0(problem, graph, init_mode, x0_seed)

    omega = omega if omega is not None else 1.0 / contract.r
    if not 0 < omega <= 1.0 / contract.r:
        raise InfeasibleParams(f"omega must be in (0, 1/r], got {omega}")

    # gamma and tau_1 need only the graph spectrum
    probe = compute_constants(graph, ell, gamma=1.0, tau_1=1.0, omega=omega,
                              alpha=1e-12, contract=contract, norms=norms)
    gamma = gamma_margin * probe.kappa_2
    tau_1 = tau1_margin * probe.kappa_1
    if gamma <= probe.kappa_2:
        raise InfeasibleParams(f"gamma below kappa_2: {gamma} <= {probe.kappa_2} "
                               f"(gamma_margin must exceed 1)")
    if tau_1 < probe.kappa_1:
        raise InfeasibleParams(f"tau_1 below kappa_1: {tau_1} < {probe.kappa_1}")
    beta = tau_1 * gamma
    l1_0 = initial_l1_bound(x0, problem, graph, gamma, beta)

    def table_at(alpha, s0=None):
        return compute_constants(graph, ell, gamma, tau_1, omega, alpha, contract,
                                 norms, T=T, l1_0=l1_0, s0=s0, nu=nu, tau_0=tau_0)

    feas = {}
    extras = {"l1_0": l1_0}

    if regime in ("T1_local_nonconvex", "T2_local_exact_first"):
        if regime == "T1_local_nonconvex":
            alpha_display = 1.0 / (n ** 0.25 * dt * math.sqrt(T))
            s0 = max(pnorm(x0[i], contract.p) for i in range(n)) / contract.C
            s0 = max(s0, 1e-12)
        else:
            alpha_display = tau_0 / (n ** (1.0 / 3.0) * dt ** (2.0 / 3.0) * T ** (1.0 / 3.0))
            s0 = None  # depends on alpha below

        alpha = alpha_display
        for _ in range(4):
            s0_cur = s0
            tab = table_at(alpha, s0=s0 if s0 is not None else 1.0)
            if regime == "T2_local_exact_first":
                # tau_4 = kappa_4 makes the second stepsize cap collapse onto
                # alpha itself; a factor-2 margin keeps the cap non-binding
                tau_4 = 2.0 * max(tab.kappa_4, 1e-12)
                s0_cur = math.sqrt(tau_4 * n) * alpha
                tab = table_at(alpha, s0=s0_cur)
            limit = safety * tab.kappa_tilde_0_prime
            if clamp_alpha and alpha > limit:
                alpha = limit
            else:
                s0 = s0_cur
                break
            s0 = s0_cur

        tab = table_at(alpha, s0=s0)
        if regime == "T2_local_exact_first":
            extras["tau_4"] = 2.0 * max(tab.kappa_4, 1e-12)
            feas["tau_0_at_most_kappa_0"] = (tau_0 <= tab.kappa_0, tau_0, tab.kappa_0)
            feas["T_above_kappa_3"] = (T > tab.kappa_3, float(T), tab.kappa_3)
        else:
            feas["T_above_kappa_tilde_3"] = (T > tab.kappa_tilde_3, float(T),
                                             tab.kappa_tilde_3)
        feas["alpha_within_kappa_tilde_0_prime"] = (
            alpha < tab.kappa_tilde_0_prime, alpha, tab.kappa_tilde_0_prime)
        feas["recursive_admissible"] = (
            tab.kappa_tilde_4 <= tab.eps_8 * s0 ** 2, tab.kappa_tilde_4,
            tab.eps_8 * s0 ** 2)
        schedule = RecursiveSchedule(s0=s0, eps8=tab.eps_8, kappa4=tab.kappa_tilde_4,
                                     horizon=T)
        extras["alpha_display"] = alpha_display

    elif regime == "T3_local_PL":
        alpha = None
        for _ in range(32):
            cand = safety * table_at(alpha if alpha is not None else 1e-9).kappa_0_prime
            if alpha is not None and cand >= alpha:
                break
            alpha = cand
        tab = table_at(alpha)
        eps_lo = max(tab.kappa_9, tab.kappa_10)
        if not eps_lo < 1.0:
            raise InfeasibleParams("no geometric ratio in (max(kappa_9, kappa_10), 1)")
        eps = 0.5 * (1.0 + eps_lo)
        kappa_nu = _kappa_nu(x0, problem, graph, gamma, beta, nu)
        s0 = max(math.sqrt(kappa_nu / (n * dt ** 2 * tab.psi_5 * contract.C ** 2)),
                 max(pnorm(x0[i], contract.p) for i in range(n)) / contract.C)
        schedule = GeometricSchedule(s0=s0, rate=eps)
        feas["alpha_below_kappa_0_prime"] = (alpha < tab.kappa_0_prime, alpha,
                                             tab.kappa_0_prime)
        feas["epsilon_in_range"] = (eps_lo < eps < 1.0, eps, eps_lo)
        extras.update({"kappa_nu": kappa_nu, "epsilon": eps})

    else:  # T5 / T6 global regimes
        alpha = None
        for _ in range(8):
            cand = safety * table_at(alpha if alpha is not None else 1e-9).kappa_hat_0_prime
            if alpha is not None and cand >= alpha:
                break
            alpha = cand
        tab = table_at(alpha)
        if not 0.0 < epsilon < 1.0:
            raise InfeasibleParams(f"epsilon must be in (0,1), got {epsilon}")
        s0 = max(max(np.linalg.norm(x0[i]) for i in range(n)), 1e-12)
        schedule = GeometricSchedule(s0=s0, rate=epsilon)
        feas["alpha_below_kappa_hat_0_prime"] = (alpha < tab.kappa_hat_0_prime,
                                                 alpha, tab.kappa_hat_0_prime)
        if regime == "T6_global_PL":
            lo = max(1.0 - alpha * tab.eps_6_prime, epsilon ** 2)
            extras["eps_hat"] = 0.5 * (1.0 + lo) if lo < 1.0 else None
            feas["linear_factor_below_one"] = (lo < 1.0, lo, 1.0)

    feas.update(positivity_flags(tab, gamma, tau_1, alpha))
    if strict:
        bad = [k for k, (ok, _, _) in feas.items() if not ok]
        if bad:
            raise InfeasibleParams("infeasible constraints: " + ", ".join(bad))

    hyper = HyperParams(alpha=alpha, beta=beta, gamma=gamma, omega=omega,
                        schedule=schedule, tau_1=tau_1)
    return ParamSelection(regime=regime, hyper=hyper, init_mode=init_mode, x0=x0,
                          table=tab, feasibility=feas, norms=norms, extras=extras)


def _kappa_nu(x0, problem, graph, gamma, beta, nu) -> float:
    """Computable upper bound on the initial Lyapunov value under gradient
    domination: e1 + e2 + e3 at the initial state plus ||gbar0||^2 / (2 nu)."""
    n = graph.n
    xbar = x0.mean(axis=0)
    G0 = problem.gradients_at(xbar)
    W = G0 / gamma
    e1 = 0.5 * float(np.sum(x0 * (graph.E @ x0)))
    e2 = 0.5 * (beta + gamma) / gamma * float(np.sum(W * (graph.F @ W)))
    e3 = float(np.sum(x0 * ((graph.E @ graph.F) @ W)))
    gbar = problem.grad_f(xbar)
    return e1 + e2 + e3 + n * float(gbar @ gbar) / (2.0 * nu)
