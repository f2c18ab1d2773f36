"""Cost-function suites with certified smoothness constants.

Two families cover the assumptions needed by the simulator:

* quadratic least squares, f_i(x) = 0.5 ||A_i x - b_i||^2 — smooth, lower
  bounded by 0, and gradient dominated with nu = smallest positive
  eigenvalue of the average normal matrix; the optimum is known in closed
  form from the normal equations.

* regularized logistic loss with a smooth nonconvex penalty,
  f_i(x) = (1/m) sum_j log(1 + exp(-y_ij a_ij^T x)) + lam * sum_l x_l^2/(1+x_l^2)
  — smooth and nonnegative but not gradient dominated.

Per-agent data are drawn independently, so local gradients disagree at the
optimum (a genuinely heterogeneous instance).
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as _rng
from .errors import IndexOutOfRange, SingularSystem


@dataclass
class ProblemInstance:
    """Bundle of n local costs with gradient oracles and certificates."""

    n: int
    d: int
    ell: float                       # certified smoothness constant
    f_low: float                     # known lower bound on f*
    local_cost: Callable             # (i, x) -> float
    local_grad: Callable             # (i, x) -> ndarray
    pl_nu: float | None = None       # gradient-domination constant, if certified
    f_star: float | None = None      # exact optimal value, if known
    x_star: np.ndarray | None = None
    family: str = "custom"
    meta: dict = field(default_factory=dict)

    def _check(self, i: int):
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"agent index {i} outside [0, {self.n})")

    def cost(self, i: int, x: np.ndarray) -> float:
        self._check(i)
        return self.local_cost(i, np.asarray(x, dtype=float))

    def gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        self._check(i)
        return self.local_grad(i, np.asarray(x, dtype=float))

    def f(self, x: np.ndarray) -> float:
        """Global objective (1/n) sum_i f_i(x)."""
        return sum(self.cost(i, x) for i in range(self.n)) / self.n

    def grad_f(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the global objective at a single point."""
        g = np.zeros(self.d)
        for i in range(self.n):
            g += self.gradient(i, x)
        return g / self.n

    def stacked_gradients(self, X: np.ndarray) -> np.ndarray:
        """Row i is grad f_i(X[i]); X is n x d."""
        return np.stack([self.gradient(i, X[i]) for i in range(self.n)])

    def gradients_at(self, x: np.ndarray) -> np.ndarray:
        """Row i is grad f_i(x) for a shared point x."""
        return np.stack([self.gradient(i, x) for i in range(self.n)])


def gradient(problem: ProblemInstance, agent: int, x: np.ndarray) -> np.ndarray:
    """Exact analytic gradient of f_agent at x."""
    return problem.gradient(agent, x)


def make_quadratic(n: int, d: int, seed: int = 0,
                   condition_number: float = 10.0) -> ProblemInstance:
    """Least-squares instance with controlled per-agent spectra.

    Each A_i is d x d with singular values log-spaced in
    [1/sqrt(condition_number), 1], so ell = max_i rho(A_i^T A_i) = 1.
    """
    if n < 1 or d < 1 or condition_number < 1:
        raise SingularSystem(f"need n, d >= 1 and condition_number >= 1")
    gen = _rng.substream(seed, _rng.PROBLEM, 0)
    sigmas = np.logspace(-0.5 * np.log10(condition_number), 0.0, d)
    A = np.empty((n, d, d))
    b = np.empty((n, d))
    for i in range(n):
        U, _ = np.linalg.qr(gen.standard_normal((d, d)))
        V, _ = np.linalg.qr(gen.standard_normal((d, d)))
        A[i] = U @ np.diag(sigmas) @ V.T
        x_loc = gen.standard_normal(d)
        b[i] = A[i] @ x_loc

    H = np.einsum("ikj,ikl->jl", A, A) / n          # (1/n) sum A_i^T A_i
    rhs = np.einsum("ikj,ik->j", A, b) / n
    eigs = np.linalg.eigvalsh(H)
    if eigs[-1] <= 0 or eigs[0] <= 1e-12 * eigs[-1]:
        raise SingularSystem("aggregate normal matrix is rank deficient; retry with a new seed")
    x_star = np.linalg.solve(H, rhs)

    ell = float(max(np.linalg.eigvalsh(A[i].T @ A[i])[-1] for i in range(n)))
    nu = float(eigs[eigs > 1e-12 * eigs[-1]][0])

    def cost(i, x):
        r = A[i] @ x - b[i]
        return 0.5 * float(r @ r)

    def grad(i, x):
        return A[i].T @ (A[i] @ x - b[i])

    prob = ProblemInstance(n=n, d=d, ell=ell, f_low=0.0, local_cost=cost,
                           local_grad=grad, pl_nu=nu, family="quadratic",
                           meta={"condition_number": condition_number, "seed": seed})
    prob.x_star = x_star
    prob.f_star = prob.f(x_star)
    return prob


def make_nonconvex(n: int, d: int, seed: int = 0, lam: float = 0.1,
                   m: int = 20) -> ProblemInstance:
    """Heterogeneous regularized logistic instance (smooth, nonconvex, f >= 0).

    Rows are rescaled so rho((1/m) A_i^T A_i) = 1, giving the certified
    ell = 1/4 + 2 * lam.
    """
    if n < 1 or d < 1 or m < 1 or lam < 0:
        raise SingularSystem("need n, d, m >= 1 and lam >= 0")
    gen = _rng.substream(seed, _rng.PROBLEM, 1)
    A = gen.standard_normal((n, m, d))
    y = np.empty((n, m))
    for i in range(n):
        top = np.linalg.eigvalsh(A[i].T @ A[i] / m)[-1]
        A[i] /= np.sqrt(top)
        w = gen.standard_normal(d)
        y[i] = np.where(A[i] @ w + 0.3 * gen.standard_normal(m) >= 0, 1.0, -1.0)

    ell = 0.25 + 2.0 * lam

    def cost(i, x):
        z = -y[i] * (A[i] @ x)
        logistic = float(np.mean(np.logaddexp(0.0, z)))
        return logistic + lam * float(np.sum(x * x / (1.0 + x * x)))

    def grad(i, x):
        z = -y[i] * (A[i] @ x)
        sig = 1.0 / (1.0 + np.exp(-z))
        g = -(A[i].T @ (y[i] * sig)) / m
        return g + lam * 2.0 * x / (1.0 + x * x) ** 2

    return ProblemInstance(n=n, d=d, ell=ell, f_low=0.0, local_cost=cost,
                           local_grad=grad, family="nonconvex",
                           meta={"lam": lam, "m": m, "seed": seed})


def estimate_f_star(problem: ProblemInstance, restarts: int = 5, iters: int = 2000,
                    seed: int = 0) -> float:
    """Best value found by multi-start gradient descent; reporting only."""
    gen = _rng.substream(seed, _rng.PROBLEM, 2)
    best = np.inf
    step = 1.0 / problem.ell
    for _ in range(restarts):
        x = gen.standard_normal(problem.d)
        for _ in range(iters):
            x = x - step * problem.grad_f(x)
        best = min(best, problem.f(x))
    return float(best)
