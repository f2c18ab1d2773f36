"""Communication compressors and their assumption contracts.

Two contract classes are supported.  A *local* contract bounds the
p-norm error on the ball ||x||_p <= C:

    ||C(x)/r - x||_p <= C (1 - delta).

A *global* contract bounds the mean-square error everywhere:

    E ||C(x)/r - x||^2 <= (1 - delta) ||x||^2 + C.

Deterministic kinds (1-bit, saturating quantizer, top-k, norm-sign) carry
local contracts.  Stochastic kinds (unbiased k-bit dither, rand-k,
scalarization, uniform quantizer) carry global contracts, derived from a
noise-free base characterization: a *relative* base satisfies
E||C(x)/r - x||^2 <= (1-delta_r)||x||^2 and an *absolute* base satisfies
E||C(x)/r - x||^2 <= C_a.  Bounded additive noise and composition map
base characterizations to global contracts via the two lemma rules below.

All bit counts use b1 = 32 bits per exactly-transmitted scalar.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import (
    DimensionMismatch,
    IncompatibleContracts,
    OutOfRange,
    WrongClass,
)

B1 = 32

LOCAL = "local"
GLOBAL = "global"


@dataclass(frozen=True)
class AssumptionContract:
    """Contract constants (class, p, r, C, delta) for one compressor."""

    cls: str            # LOCAL or GLOBAL
    p: float            # norm index (np.inf allowed); 2 for global contracts
    r: float
    C: float
    delta: float

    def __post_init__(self):
        if self.cls not in (LOCAL, GLOBAL):
            raise OutOfRange(f"contract class must be local/global, got {self.cls!r}")
        if self.r <= 0 or not 0 < self.delta <= 1 or self.C < 0:
            raise OutOfRange(f"contract constants out of range: r={self.r}, "
                             f"C={self.C}, delta={self.delta}")
        # a local region of radius zero admits no compressor input at all
        if self.cls == LOCAL and self.C == 0:
            raise OutOfRange("local contracts need a positive region radius C")


@dataclass(frozen=True)
class NormContext:
    """Norm-equivalence constants: ||x||_p <= d_hat ||x||, ||x|| <= d_tilde ||x||_p."""

    p: float
    d: int

    @property
    def d_hat(self) -> float:
        return self.d ** (1.0 / self.p - 0.5) if self.p <= 2 else 1.0

    @property
    def d_tilde(self) -> float:
        return 1.0 if self.p <= 2 else self.d ** (0.5 - 1.0 / self.p)


def pnorm(x: np.ndarray, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(x))) if x.size else 0.0
    with np.errstate(over="ignore"):
        return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _sign_pos(x: np.ndarray) -> np.ndarray:
    # ties at zero take the nonnegative branch
    return np.where(x >= 0, 1.0, -1.0)


def _check_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatch("compressor input must be finite")
    return x


# ---------------------------------------------------------------------------
# lemma rules: noise wrapping and composition of global contracts
# ---------------------------------------------------------------------------

def lemma1_relative_params(delta_r: float, r_r: float, C_xi: float) -> AssumptionContract:
    """Global contract of a relative-error compressor with additive noise
    bounded by C_xi: r = r_r, C = (2-delta_r) C_xi^2 / (delta_r r_r^2),
    delta = delta_r / 2."""
    if not 0 < delta_r <= 1:
        raise OutOfRange(f"delta_r must be in (0,1], got {delta_r}")
    if r_r <= 0 or C_xi < 0:
        raise OutOfRange(f"need r_r > 0 and C_xi >= 0, got {r_r}, {C_xi}")
    C = (2.0 - delta_r) * C_xi ** 2 / (delta_r * r_r ** 2)
    return AssumptionContract(GLOBAL, 2.0, r_r, C, delta_r / 2.0)


def lemma1_absolute_params(C_a: float, r_a: float, C_xi: float) -> AssumptionContract:
    """Global contract of an absolute-error compressor with additive noise:
    r = r_a, C = 2 C_a + 2 C_xi^2 / r_a^2, delta = 1."""
    if C_a < 0 or r_a <= 0 or C_xi < 0:
        raise OutOfRange(f"need C_a >= 0, r_a > 0, C_xi >= 0, got {C_a}, {r_a}, {C_xi}")
    return AssumptionContract(GLOBAL, 2.0, r_a, 2.0 * C_a + 2.0 * C_xi ** 2 / r_a ** 2, 1.0)


def lemma2_compose_params(rel: AssumptionContract, abs_: AssumptionContract,
                          order: str) -> AssumptionContract:
    """Global contract of the composition of a noisy relative and a noisy
    absolute compressor.

    ``rel`` must come from :func:`lemma1_relative_params` (so delta = delta_r/2)
    and ``abs_`` from :func:`lemma1_absolute_params` (delta = 1).  ``order`` is
    ``rel_of_abs`` for rel(abs(x)/r_a) and ``abs_of_rel`` for abs(rel(x)).
    """
    if rel.cls != GLOBAL or abs_.cls != GLOBAL:
        raise IncompatibleContracts("composition inputs must be global contracts")
    if abs_.delta != 1.0:
        raise IncompatibleContracts("second argument must be an absolute-error contract")
    if not rel.delta <= 0.5:
        raise IncompatibleContracts("first argument must be a relative-error contract "
                                    "(delta = delta_r/2 <= 1/2)")
    delta_r = 2.0 * rel.delta
    C_rt, C_at, r_r, r_a = rel.C, abs_.C, rel.r, abs_.r
    head = (4.0 - delta_r) * C_rt / (4.0 - 2.0 * delta_r)
    if order == "rel_of_abs":
        C = head + (4.0 - delta_r) * (12.0 - delta_r) * C_at / (4.0 * delta_r)
        return AssumptionContract(GLOBAL, 2.0, r_r, C, delta_r / 8.0)
    if order == "abs_of_rel":
        C = head + (4.0 - delta_r) * C_at / (delta_r * r_r ** 2)
        return AssumptionContract(GLOBAL, 2.0, r_r * r_a, C, delta_r / 4.0)
    raise OutOfRange(f"order must be rel_of_abs or abs_of_rel, got {order!r}")


# ---------------------------------------------------------------------------
# compressor kinds
# ---------------------------------------------------------------------------

class Compressor:
    """Base interface.  Subclasses are pure given (x, iteration, agent, seed)."""

    kind = "base"
    deterministic = True
    role = None      # "relative" / "absolute" for global kinds
    r = 1.0

    def __init__(self, seed: int = 0, tag: int = 0):
        self.seed = seed
        self.tag = tag

    def compress(self, x, iteration: int = 0, agent: int = 0):
        """Return (q, bits) for one vector."""
        x = _check_vector(x)
        q = self._apply(x[None, :], self._rng(agent, iteration))[0]
        return q, self.bits(x)

    def bits(self, x: np.ndarray) -> int:
        raise NotImplementedError

    def contract(self, d: int) -> AssumptionContract:
        raise NotImplementedError

    # -- internals ----------------------------------------------------------
    def _rng(self, agent: int, iteration: int) -> np.random.Generator:
        return _rng.substream(self.seed, _rng.COMPRESSOR, self.tag, agent, iteration)

    def _apply(self, X: np.ndarray, gen: np.random.Generator) -> np.ndarray:
        """One compression draw per row of X."""
        raise NotImplementedError

    def sample_errors(self, x, trials: int, seed: int, tag: int = 0) -> np.ndarray:
        """Monte-Carlo draws of ||C(x)/r - x||^2 (vectorized over trials)."""
        x = _check_vector(x)
        gen = _rng.substream(seed, _rng.VERIFY, tag)
        X = np.broadcast_to(x, (trials, x.size)).copy()
        Q = self._apply(X, gen)
        diff = Q / self.r - x[None, :]
        return np.sum(diff * diff, axis=1)

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"

    def describe(self) -> str:
        return ""


class Identity(Compressor):
    """Pass-through baseline; charges full 32-bit precision per coordinate."""

    kind = "identity"
    role = "relative"

    def bits(self, x):
        return x.size * B1

    def contract(self, d):
        return AssumptionContract(GLOBAL, 2.0, 1.0, 0.0, 1.0)

    def local_contract(self, d, C: float = 1.0, p: float = np.inf):
        return AssumptionContract(LOCAL, p, 1.0, C, 1.0)

    def relative_delta(self, d):
        return 1.0

    def _apply(self, X, gen):
        return X.copy()


class OneBit(Compressor):
    """Sign compressor transmitting one bit per coordinate; output +-level/2."""

    kind = "one_bit"

    def __init__(self, level: float, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if level <= 0:
            raise OutOfRange(f"quantization level must be positive, got {level}")
        self.level = level

    def bits(self, x):
        return x.size

    def contract(self, d):
        # p = inf, r = 1, C = level, delta in (0, 1/2]; the largest valid delta
        return AssumptionContract(LOCAL, np.inf, 1.0, self.level, 0.5)

    def _apply(self, X, gen):
        return _sign_pos(X) * (self.level / 2.0)

    def describe(self):
        return f"level={self.level}"


class SaturatingQuantizer(Compressor):
    """Midtread uniform quantizer with hard saturation at +-level."""

    kind = "sat_quant"

    def __init__(self, level: float, step: float, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if level <= 0 or not 0 < step < 2 * level:
            raise OutOfRange(f"need level > 0 and step in (0, 2*level), got {level}, {step}")
        self.level = level
        self.step = step
        self._lo = math.floor(-level / step)
        self._hi = math.floor(level / step)

    def bits(self, x):
        levels = math.floor(self.level / self.step) + math.ceil(self.level / self.step) + 1
        return x.size * math.ceil(math.log2(levels))

    def contract(self, d):
        return AssumptionContract(LOCAL, np.inf, 1.0, self.level,
                                  1.0 - self.step / (2.0 * self.level))

    def _apply(self, X, gen):
        idx = np.clip(np.floor(X / self.step + 0.5), self._lo, self._hi)
        return self.step * idx

    def describe(self):
        return f"level={self.level}, step={self.step}"


class TopK(Compressor):
    """Keep the k largest-magnitude coordinates (ties broken by lowest index)."""

    kind = "top_k"

    def __init__(self, k: int, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if k < 1:
            raise OutOfRange(f"k must be >= 1, got {k}")
        self.k = k

    def bits(self, x):
        self._check_k(x.size)
        return self.k * B1

    def contract(self, d, C: float = 1.0):
        # advertised contract: p = 2, r = 1, any C > 0, delta = k/d
        self._check_k(d)
        return AssumptionContract(LOCAL, 2.0, 1.0, C, self.k / d)

    def sound_contract(self, d, C: float = 1.0):
        """Largest delta for which the unsquared p=2 error bound actually
        holds for all x in the ball: delta = 1 - sqrt(1 - k/d)."""
        self._check_k(d)
        return AssumptionContract(LOCAL, 2.0, 1.0, C, 1.0 - math.sqrt(1.0 - self.k / d))

    def _check_k(self, d):
        if self.k > d:
            raise DimensionMismatch(f"k={self.k} exceeds dimension {d}")

    def _apply(self, X, gen):
        self._check_k(X.shape[1])
        order = np.argsort(-np.abs(X), axis=1, kind="stable")
        Q = np.zeros_like(X)
        rows = np.arange(X.shape[0])[:, None]
        keep = order[:, :self.k]
        Q[rows, keep] = X[rows, keep]
        return Q

    def describe(self):
        return f"k={self.k}"


class NormSign(Compressor):
    """Transmit the max-norm plus one sign bit per coordinate."""

    kind = "norm_sign"

    def bits(self, x):
        return x.size + B1

    def contract(self, d, C: float = 1.0):
        return AssumptionContract(LOCAL, np.inf, 1.0, C, 0.5)

    def _apply(self, X, gen):
        m = np.max(np.abs(X), axis=1, keepdims=True)
        out = (m / 2.0) * _sign_pos(X)
        out[m[:, 0] == 0.0] = 0.0
        return out


class UnbiasedKBit(Compressor):
    """Dithered k-bit quantizer, unbiased via a uniform [0,1) dither."""

    kind = "unbiased_kbit"
    deterministic = False
    role = "relative"

    def __init__(self, kbits: int, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if kbits < 1:
            raise OutOfRange(f"kbits must be >= 1, got {kbits}")
        self.kbits = kbits

    def bits(self, x):
        return (self.kbits + 1) * x.size + B1

    def relative_delta(self, d):
        # E||C(x)-x||^2 <= (||x||_inf / 2^{k-1})^2 * d/4 <= (d / 4^k) ||x||^2
        delta = 1.0 - d / 4.0 ** self.kbits
        if delta <= 0:
            raise OutOfRange(f"unbiased {self.kbits}-bit quantizer has no relative "
                             f"contract for d={d} (needs 4^k > d)")
        return delta

    def contract(self, d):
        return AssumptionContract(GLOBAL, 2.0, 1.0, 0.0, self.relative_delta(d))

    def _apply(self, X, gen):
        m = np.max(np.abs(X), axis=1, keepdims=True)
        zeta = gen.uniform(size=X.shape)
        safe = np.where(m == 0.0, 1.0, m)
        scale = 2.0 ** (self.kbits - 1)
        q = (safe / scale) * _sign_pos(X) * np.floor(scale * np.abs(X) / safe + zeta)
        q[m[:, 0] == 0.0] = 0.0
        return q

    def describe(self):
        return f"kbits={self.kbits}"


class RandK(Compressor):
    """Pass k uniformly chosen distinct coordinates through, zero the rest."""

    kind = "rand_k"
    deterministic = False
    role = "relative"

    def __init__(self, k: int, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if k < 1:
            raise OutOfRange(f"k must be >= 1, got {k}")
        self.k = k

    def bits(self, x):
        if self.k > x.size:
            raise DimensionMismatch(f"k={self.k} exceeds dimension {x.size}")
        return self.k * B1

    def relative_delta(self, d):
        # unscaled pass-through: E||C(x)-x||^2 = (1 - k/d) ||x||^2 exactly
        if self.k > d:
            raise DimensionMismatch(f"k={self.k} exceeds dimension {d}")
        return self.k / d

    def contract(self, d):
        return AssumptionContract(GLOBAL, 2.0, 1.0, 0.0, self.relative_delta(d))

    def _apply(self, X, gen):
        if self.k > X.shape[1]:
            raise DimensionMismatch(f"k={self.k} exceeds dimension {X.shape[1]}")
        u = gen.uniform(size=X.shape)
        keep = np.argsort(u, axis=1, kind="stable")[:, :self.k]
        Q = np.zeros_like(X)
        rows = np.arange(X.shape[0])[:, None]
        Q[rows, keep] = X[rows, keep]
        return Q

    def describe(self):
        return f"k={self.k}"


class Scalarization(Compressor):
    """Project onto a shared random unit direction and transmit one scalar.

    The direction for iteration k is regenerated from (seed, iteration) alone,
    so every agent reproduces it without transmission.
    """

    kind = "scalarization"
    deterministic = False
    role = "relative"

    def bits(self, x):
        return B1

    def relative_delta(self, d):
        # E[psi psi^T] = I/d gives E||psi psi^T x - x||^2 = (1 - 1/d) ||x||^2
        return 1.0 / d

    def contract(self, d):
        return AssumptionContract(GLOBAL, 2.0, 1.0, 0.0, self.relative_delta(d))

    def direction(self, d: int, iteration: int) -> np.ndarray:
        gen = _rng.substream(self.seed, _rng.SCALARIZATION, self.tag, 0, iteration)
        return _rng.sphere_point(gen, d)

    def compress(self, x, iteration: int = 0, agent: int = 0):
        x = _check_vector(x)
        psi = self.direction(x.size, iteration)
        return psi * float(psi @ x), self.bits(x)

    def _apply(self, X, gen):
        G = gen.standard_normal(size=X.shape)
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        return G * np.sum(G * X, axis=1, keepdims=True)


class UniformQuantizer(Compressor):
    """Midtread uniform quantizer without saturation."""

    kind = "uniform_quant"
    role = "absolute"

    def __init__(self, step: float, seed: int = 0, tag: int = 0):
        super().__init__(seed, tag)
        if step <= 0:
            raise OutOfRange(f"step must be positive, got {step}")
        self.step = step

    def bits(self, x):
        levels = 2 * math.floor(np.max(np.abs(x), initial=0.0) / self.step) + 1
        return x.size * max(1, math.ceil(math.log2(levels)))

    def absolute_error(self, d):
        # per-coordinate rounding error <= step/2
        return d * self.step ** 2 / 4.0

    def contract(self, d):
        return AssumptionContract(GLOBAL, 2.0, 1.0, self.absolute_error(d), 1.0)

    def _apply(self, X, gen):
        return self.step * np.floor(X / self.step + 0.5)

    def describe(self):
        return f"step={self.step}"


class Noisy(Compressor):
    """Wrap a compressor with additive noise drawn uniformly from the
    Euclidean ball of radius noise_bound (so ||xi|| <= noise_bound a.s.)."""

    kind = "noisy"

    def __init__(self, base: Compressor, noise_bound: float, seed: int | None = None):
        if noise_bound < 0:
            raise OutOfRange(f"noise bound must be >= 0, got {noise_bound}")
        super().__init__(base.seed if seed is None else seed, base.tag)
        self.base = base
        self.noise_bound = noise_bound
        self.deterministic = False
        self.role = base.role
        self.r = base.r
        self.kind = f"noisy_{base.kind}"

    def bits(self, x):
        return self.base.bits(x)

    def contract(self, d):
        if self.role == "relative":
            return lemma1_relative_params(self.base.relative_delta(d), self.base.r,
                                          self.noise_bound)
        if self.role == "absolute":
            return lemma1_absolute_params(self.base.absolute_error(d), self.base.r,
                                          self.noise_bound)
        raise IncompatibleContracts(f"{self.base.kind} has no global base characterization")

    def compress(self, x, iteration: int = 0, agent: int = 0):
        q, bits = self.base.compress(x, iteration, agent)
        gen = _rng.substream(self.seed, _rng.NOISE, self.tag, agent, iteration)
        return q + _rng.ball_point(gen, q.size, self.noise_bound), bits

    def _apply(self, X, gen):
        Q = self.base._apply(X, gen)
        G = gen.standard_normal(size=Q.shape)
        G /= np.linalg.norm(G, axis=1, keepdims=True)
        radii = self.noise_bound * gen.uniform(size=(Q.shape[0], 1)) ** (1.0 / Q.shape[1])
        return Q + G * radii

    def describe(self):
        return f"{self.base!r}, noise={self.noise_bound}"


class Compose(Compressor):
    """Composition of one relative-type and one absolute-type compressor.

    With a relative outer stage the inner output is rescaled by its r before
    the outer compression, matching rel(abs(x)/r_a); with an absolute outer
    stage the relative output is passed through unscaled, abs(rel(x)).
    Bits are charged as the outer stage's formula on the inner output.
    """

    kind = "compose"
    deterministic = False

    def __init__(self, inner: Compressor, outer: Compressor):
        roles = (inner.role, outer.role)
        if roles == ("absolute", "relative"):
            self.order = "rel_of_abs"
            self.r = outer.r
        elif roles == ("relative", "absolute"):
            self.order = "abs_of_rel"
            self.r = inner.r * outer.r
        else:
            raise IncompatibleContracts(
                f"composition needs one relative and one absolute stage, got {roles}")
        super().__init__(inner.seed, inner.tag)
        # the stages must draw from distinct substreams, otherwise e.g. two
        # noise wrappers would inject the identical realization twice
        if outer.tag == inner.tag:
            outer.tag = inner.tag + 1
            if isinstance(outer, Noisy):
                outer.base.tag = outer.tag
        self.inner = inner
        self.outer = outer
        self.kind = f"compose_{outer.kind}_of_{inner.kind}"

    def bits(self, x):
        raise NotImplementedError("bits depend on the inner output; use compress")

    def contract(self, d):
        def noisy_parts(c):
            bound = c.noise_bound if isinstance(c, Noisy) else 0.0
            base = c.base if isinstance(c, Noisy) else c
            return base, bound

        if self.order == "rel_of_abs":
            rel_base, rel_noise = noisy_parts(self.outer)
            abs_base, abs_noise = noisy_parts(self.inner)
        else:
            rel_base, rel_noise = noisy_parts(self.inner)
            abs_base, abs_noise = noisy_parts(self.outer)
        rel = lemma1_relative_params(rel_base.relative_delta(d), rel_base.r, rel_noise)
        abs_ = lemma1_absolute_params(abs_base.absolute_error(d), abs_base.r, abs_noise)
        return lemma2_compose_params(rel, abs_, self.order)

    def compress(self, x, iteration: int = 0, agent: int = 0):
        mid, _ = self.inner.compress(x, iteration, agent)
        if self.order == "rel_of_abs":
            mid = mid / self.inner.r
        return self.outer.compress(mid, iteration, agent)

    def _apply(self, X, gen):
        mid = self.inner._apply(X, gen)
        if self.order == "rel_of_abs":
            mid = mid / self.inner.r
        return self.outer._apply(mid, gen)

    def describe(self):
        return f"{self.inner!r} -> {self.outer!r}"


def compose_kbit_of_uniform(kbits: int, step: float, noise_inner: float = 0.0,
                            noise_outer: float = 0.0, seed: int = 0) -> Compose:
    """Dithered k-bit quantizer applied to a uniformly quantized input."""
    inner = UniformQuantizer(step, seed=seed, tag=1)
    outer = UnbiasedKBit(kbits, seed=seed, tag=2)
    if noise_inner > 0:
        inner = Noisy(inner, noise_inner)
    if noise_outer > 0:
        outer = Noisy(outer, noise_outer)
    return Compose(inner, outer)


def compose_uniform_of_kbit(kbits: int, step: float, noise_inner: float = 0.0,
                            noise_outer: float = 0.0, seed: int = 0) -> Compose:
    """Uniform quantizer applied to a dithered k-bit quantized input."""
    inner = UnbiasedKBit(kbits, seed=seed, tag=1)
    outer = UniformQuantizer(step, seed=seed, tag=2)
    if noise_inner > 0:
        inner = Noisy(inner, noise_inner)
    if noise_outer > 0:
        outer = Noisy(outer, noise_outer)
    return Compose(inner, outer)


# ---------------------------------------------------------------------------
# contract verification
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    kind: str
    cls: str
    max_ratio: float
    passed: bool
    samples: int
    worst: dict


def _pball_samples(gen: np.random.Generator, p: float, d: int, C: float,
                   count: int) -> np.ndarray:
    if p == np.inf:
        return gen.uniform(-C, C, size=(count, d))
    # gamma method: uniform on the p-ball for finite p
    g = gen.gamma(1.0 / p, size=(count, d)) ** (1.0 / p)
    signs = np.where(gen.uniform(size=(count, d)) < 0.5, -1.0, 1.0)
    y = signs * g
    norms = np.sum(np.abs(y) ** p, axis=1, keepdims=True) ** (1.0 / p)
    radii = C * gen.uniform(size=(count, 1)) ** (1.0 / d)
    return y / norms * radii


def _boundary_cases(gen: np.random.Generator, p: float, d: int, C: float) -> list:
    cases = [np.zeros(d)]
    for j in range(min(d, 8)):
        e = np.zeros(d)
        e[j] = C
        cases.append(e.copy())
        cases.append(-e)
    ones = np.ones(d)
    alt = np.array([(-1.0) ** j for j in range(d)])
    for sigma in (ones, alt):
        x = C * sigma / pnorm(sigma, p)
        cases.extend([x, -x, 0.5 * x])
    if p == np.inf:
        for _ in range(8):
            sigma = np.where(gen.uniform(size=d) < 0.5, -1.0, 1.0)
            cases.append(C * sigma)
    return cases


def verify_local_assumption(compressor: Compressor, contract: AssumptionContract,
                            samples: int = 10_000, seed: int = 0,
                            d: int = 6) -> VerificationReport:
    """Check the local contract on random points of the p-ball of radius C
    plus deterministic boundary and corner cases."""
    if contract.cls != LOCAL:
        raise WrongClass("verify_local_assumption needs a local contract")
    if samples < 1:
        raise OutOfRange("samples must be >= 1")
    p, C, r, delta = contract.p, contract.C, contract.r, contract.delta
    gen = _rng.substream(seed, _rng.VERIFY, 0)
    points = list(_pball_samples(gen, p, d, C, samples))
    points += _boundary_cases(gen, p, d, C)
    bound = C * (1.0 - delta)

    max_ratio = 0.0
    worst = {}
    for i, x in enumerate(points):
        q, _ = compressor.compress(x, iteration=i)
        err = pnorm(q / r - x, p)
        ratio = err / bound if bound > 0 else (0.0 if err <= 1e-15 * max(C, 1.0) else np.inf)
        if ratio > max_ratio:
            max_ratio = ratio
            worst = {"x": x.tolist(), "error": err, "bound": bound}
    return VerificationReport(kind=compressor.kind, cls=LOCAL, max_ratio=float(max_ratio),
                              passed=bool(max_ratio <= 1.0 + 1e-12),
                              samples=len(points), worst=worst)


def verify_global_assumption(compressor: Compressor, contract: AssumptionContract,
                             samples: int = 16, trials_per_sample: int = 10_000,
                             seed: int = 0, d: int = 8) -> VerificationReport:
    """Monte-Carlo check of the global mean-square contract on points with
    radii spanning [0, 1e3]; pass needs mean <= bound + 3 standard errors
    at every point."""
    if contract.cls != GLOBAL:
        raise WrongClass("verify_global_assumption needs a global contract")
    if samples < 1 or trials_per_sample < 2:
        raise OutOfRange("need samples >= 1 and trials_per_sample >= 2")
    gen = _rng.substream(seed, _rng.VERIFY, 1)
    radii = np.concatenate([[0.0], np.logspace(-1, 3, max(samples - 1, 1))])
    points = []
    for i, rad in enumerate(radii):
        if rad == 0.0:
            points.append(np.zeros(d))
        elif i % 2 == 0:
            points.append(rad * _rng.sphere_point(gen, d))
        else:
            points.append(rad * np.ones(d) / math.sqrt(d))

    max_ratio = 0.0
    worst = {}
    for i, x in enumerate(points):
        errs = compressor.sample_errors(x, trials_per_sample, seed, tag=i)
        mean = float(np.mean(errs))
        se = float(np.std(errs, ddof=1) / math.sqrt(trials_per_sample))
        bound = (1.0 - contract.delta) * float(x @ x) + contract.C
        denom = bound + 3.0 * se
        ratio = mean / denom if denom > 0 else (0.0 if mean == 0.0 else np.inf)
        if ratio > max_ratio:
            max_ratio = ratio
            worst = {"radius": float(np.linalg.norm(x)), "mean": mean,
                     "bound": bound, "se": se}
    # 1e-12 relative headroom: contracts that hold with equality and zero
    # variance (e.g. rand-k on equal-magnitude inputs) land exactly on the
    # bound up to rounding
    return VerificationReport(kind=compressor.kind, cls=GLOBAL, max_ratio=float(max_ratio),
                              passed=bool(max_ratio <= 1.0 + 1e-12),
                              samples=len(points), worst=worst)
