"""The unified compression loop.

Each iteration k performs, for every agent i simultaneously:

    q_{i,k}   = C((x_{i,k} - xhat_{i,k-1}) / s_k)
    xhat_{i,k} = xhat_{i,k-1} + omega s_k q_{i,k}
    y_{i,k}   = y_{i,k-1} + omega s_k sum_j L_ij q_{j,k}
    x_{i,k+1} = x_{i,k} - alpha (beta y_{i,k} + gamma v_{i,k} + g_{i,k})
    v_{i,k+1} = v_{i,k} + alpha gamma y_{i,k}

The maintained y equals L xhat by induction, the dual mean stays zero, and
the iterate mean follows plain gradient descent on the average cost.  s_k is
consumed by step k and advanced afterwards.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .compressors import LOCAL, AssumptionContract, Compressor, pnorm
from .diagnostics import RunTrace
from .errors import ConfigError, DcoptError, InvalidScale, NonFiniteState

B1 = 32


# ---------------------------------------------------------------------------
# scaling schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantSchedule:
    s0: float
    mode = "constant"

    def value(self, k: int) -> float:
        return self.s0


@dataclass(frozen=True)
class GeometricSchedule:
    s0: float
    rate: float
    mode = "geometric"

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ConfigError(f"geometric rate must be in (0,1), got {self.rate}")

    def value(self, k: int) -> float:
        return self.s0 * self.rate ** k


@dataclass(frozen=True)
class RecursiveSchedule:
    """s_k^2 = (1 - eps8) s_{k-1}^2 + kappa4; fixed point kappa4 / eps8.

    The additive constant depends on the horizon, so the schedule carries the
    horizon it was derived for and the runner refuses to exceed it.
    """

    s0: float
    eps8: float
    kappa4: float
    horizon: int
    mode = "recursive"

    def __post_init__(self):
        if not 0.0 < self.eps8 < 1.0:
            raise ConfigError(f"eps8 must be in (0,1), got {self.eps8}")
        if self.kappa4 < 0:
            raise ConfigError(f"kappa4 must be >= 0, got {self.kappa4}")
        if self.horizon < 1:
            raise ConfigError("recursive schedule needs a fixed horizon >= 1")

    def value(self, k: int) -> float:
        decay = (1.0 - self.eps8) ** k
        return float(np.sqrt(decay * self.s0 ** 2 + self.kappa4 * (1.0 - decay) / self.eps8))


def scaling_value(schedule, k: int, T: int | None = None) -> float:
    """Evaluate s_k for any schedule kind."""
    if k < 0:
        raise ConfigError(f"iteration must be >= 0, got {k}")
    if isinstance(schedule, RecursiveSchedule) and T is not None and T > schedule.horizon:
        raise ConfigError(f"recursive schedule derived for horizon {schedule.horizon}, "
                          f"cannot run T={T}")
    return schedule.value(k)


@dataclass(frozen=True)
class HyperParams:
    alpha: float
    beta: float
    gamma: float
    omega: float
    schedule: object
    tau_1: float | None = None

    def __post_init__(self):
        if min(self.beta, self.gamma, self.omega) <= 0:
            raise ConfigError("beta, gamma, omega must all be positive")
        # alpha = 0 freezes the primal/dual pair while surrogates keep
        # tracking; useful as a diagnostic degenerate case
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")


@dataclass
class AlgorithmState:
    x: np.ndarray          # n x d primal iterates
    v: np.ndarray          # n x d dual variables
    x_hat: np.ndarray      # n x d surrogates from the last exchange
    y: np.ndarray          # n x d running Laplacian-weighted surrogate sums
    k: int
    s_k: float
    bits_cum: int


INIT_MODES = ("standard", "exact_first_round", "shared_x0")


def init_state(problem, graph, hyper: HyperParams, init_mode: str = "standard",
               x0_seed: int = 0, x0: np.ndarray | None = None,
               contract: AssumptionContract | None = None) -> AlgorithmState:
    """Initialize per Algorithm start conditions.

    standard           v = xhat = y = 0
    exact_first_round  one uncompressed exchange: xhat = x0, y = L x0,
                       charged n*d*32 bits
    shared_x0          all agents start from the same random point
    """
    if init_mode not in INIT_MODES:
        raise ConfigError(f"unknown init mode {init_mode!r}")
    n, d = graph.n, problem.d
    if x0 is None:
        gen = _rng.substream(x0_seed, _rng.X0, 0)
        if init_mode == "shared_x0":
            x0 = np.tile(gen.standard_normal(d), (n, 1))
        else:
            x0 = gen.standard_normal((n, d))
    else:
        x0 = np.array(x0, dtype=float)
        if x0.shape != (n, d):
            raise ConfigError(f"x0 must have shape {(n, d)}, got {x0.shape}")

    s0 = hyper.schedule.value(0)
    bits = 0
    if init_mode == "exact_first_round":
        x_hat = x0.copy()
        y = graph.laplacian @ x0
        bits = n * d * B1
    else:
        x_hat = np.zeros_like(x0)
        y = np.zeros_like(x0)
        if contract is not None and contract.cls == LOCAL:
            worst = max(pnorm(x0[i], contract.p) for i in range(n))
            if worst > contract.C * s0 * (1.0 + 1e-12):
                raise InvalidScale(
                    f"s0={s0} violates the local-class bound: need s0 >= "
                    f"max_i ||x_i0||_p / C = {worst / contract.C}")

    return AlgorithmState(x=x0, v=np.zeros_like(x0), x_hat=x_hat, y=y,
                          k=0, s_k=s0, bits_cum=bits)


def _compress_round(compressor: Compressor, U: np.ndarray, k: int,
                    executor: ThreadPoolExecutor | None):
    n = U.shape[0]
    Q = np.empty_like(U)
    bits = [0] * n

    def one(i):
        q, b = compressor.compress(U[i], iteration=k, agent=i)
        Q[i] = q
        bits[i] = b

    if executor is None:
        for i in range(n):
            one(i)
    else:
        list(executor.map(one, range(n)))
    return Q, sum(bits)


def step(state: AlgorithmState, problem, graph, compressor: Compressor,
         hyper: HyperParams, executor: ThreadPoolExecutor | None = None) -> AlgorithmState:
    """Advance one iteration; pure in (state, seeds)."""
    if state.s_k <= 0:
        raise ConfigError(f"s_k must be positive, got {state.s_k}")
    s, k = state.s_k, state.k
    with np.errstate(over="ignore", invalid="ignore"):
        U = (state.x - state.x_hat) / s
    if not np.all(np.isfinite(U)):
        raise NonFiniteState(f"non-finite compressor input at iteration {k}", iteration=k)
    Q, bits = _compress_round(compressor, U, k, executor)

    with np.errstate(over="ignore", invalid="ignore"):
        x_hat = state.x_hat + hyper.omega * s * Q
        y = state.y + hyper.omega * s * (graph.laplacian @ Q)
        G = problem.stacked_gradients(state.x)
        x = state.x - hyper.alpha * (hyper.beta * y + hyper.gamma * state.v + G)
        v = state.v + hyper.alpha * hyper.gamma * y

    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.all(np.isfinite(x_hat))):
        raise NonFiniteState(f"non-finite state at iteration {k}", iteration=k)
    return AlgorithmState(x=x, v=v, x_hat=x_hat, y=y, k=k + 1,
                          s_k=hyper.schedule.value(k + 1),
                          bits_cum=state.bits_cum + bits)


def run(problem, graph, compressor: Compressor, hyper: HyperParams, T: int,
        init_mode: str = "standard", x0_seed: int = 0, x0: np.ndarray | None = None,
        contract: AssumptionContract | None = None, parallel: bool = False,
        record_per_agent: bool = False, config_echo: dict | None = None) -> RunTrace:
    """Execute T iterations and record per-iteration diagnostics.

    The trace has T+1 rows; row k pairs x_k with the surrogate of the
    previous exchange.  ``parallel`` shards the per-agent compression over a
    thread pool; results are bit-identical to the sequential path because
    every random draw is keyed by (agent, iteration).
    """
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if isinstance(hyper.schedule, RecursiveSchedule) and T > hyper.schedule.horizon:
        raise ConfigError(f"recursive schedule derived for horizon "
                          f"{hyper.schedule.horizon}, cannot run T={T}")
    if contract is None and hasattr(compressor, "contract"):
        try:
            contract = compressor.contract(problem.d)
        except DcoptError:
            contract = None

    state = init_state(problem, graph, hyper, init_mode, x0_seed, x0, contract)
    n, d = graph.n, problem.d
    local = contract is not None and contract.cls == LOCAL
    p = contract.p if local else 2.0

    rows = T + 1
    tr = {name: np.zeros(rows) for name in
          ("f_bar", "grad_sq", "consensus", "e1", "e2", "e3", "e4", "e5", "s_k",
           "surr_pre_pmax", "surr_post_pmax", "surr_pre_l2sq", "surr_post_l2sq")}
    bits_cum = np.zeros(rows, dtype=np.int64)
    region_ok = np.ones(rows, dtype=bool)
    pa_pre = np.zeros((rows, n)) if record_per_agent else None
    pa_post = np.zeros((rows, n)) if record_per_agent else None

    f_ref = problem.f_star if problem.f_star is not None else problem.f_low
    e4_mode = "exact" if problem.f_star is not None else "lower_gap"
    E, F, EF = graph.E, graph.F, graph.E @ graph.F

    def record_pre(i_row, st):
        xbar = st.x.mean(axis=0)
        dev = st.x - xbar
        G0 = problem.gradients_at(xbar)
        gbar = G0.mean(axis=0)
        W = st.v + G0 / hyper.gamma
        diff = st.x - st.x_hat
        pre_p = np.array([pnorm(diff[i], p) for i in range(n)])
        tr["f_bar"][i_row] = problem.f(xbar)
        tr["grad_sq"][i_row] = float(gbar @ gbar)
        tr["consensus"][i_row] = float(np.sum(dev * dev)) / n
        tr["e1"][i_row] = 0.5 * float(np.sum(st.x * (E @ st.x)))
        tr["e2"][i_row] = 0.5 * (hyper.beta + hyper.gamma) / hyper.gamma \
            * float(np.sum(W * (F @ W)))
        tr["e3"][i_row] = float(np.sum(st.x * (EF @ W)))
        tr["e4"][i_row] = n * (tr["f_bar"][i_row] - f_ref)
        tr["e5"][i_row] = float(np.sum(diff * diff))
        tr["s_k"][i_row] = st.s_k
        tr["surr_pre_pmax"][i_row] = pre_p.max()
        tr["surr_pre_l2sq"][i_row] = tr["e5"][i_row]
        bits_cum[i_row] = st.bits_cum
        if local:
            region_ok[i_row] = pre_p.max() <= contract.C * st.s_k * (1.0 + 1e-12)
        if pa_pre is not None:
            pa_pre[i_row] = pre_p

    executor = ThreadPoolExecutor(max_workers=min(n, 8)) if parallel else None
    try:
        # diagnostics on a diverging state may transiently overflow; the step
        # itself raises NonFiniteState before the next round starts
        with np.errstate(over="ignore", invalid="ignore"):
            for it in range(T):
                record_pre(it, state)
                new_state = step(state, problem, graph, compressor, hyper, executor)
                post = state.x - new_state.x_hat
                post_p = np.array([pnorm(post[i], p) for i in range(n)])
                tr["surr_post_pmax"][it] = post_p.max()
                tr["surr_post_l2sq"][it] = float(np.sum(post * post))
                if pa_post is not None:
                    pa_post[it] = post_p
                state = new_state
            record_pre(T, state)
            tr["surr_post_pmax"][T] = np.nan
            tr["surr_post_l2sq"][T] = np.nan
            if pa_post is not None:
                pa_post[T] = np.nan
    finally:
        if executor is not None:
            executor.shutdown()

    echo = dict(config_echo or {})
    echo.setdefault("T", T)
    echo.setdefault("init_mode", init_mode)
    if local:
        echo.setdefault("contract_C", contract.C)
    return RunTrace(k=np.arange(rows), bits_cum=bits_cum, region_ok=region_ok,
                    e4_mode=e4_mode, per_agent_pre=pa_pre, per_agent_post=pa_post,
                    final_state=state, config=echo, **tr)
