"""Power series distribution families.

A power series distribution (PSD) has pmf ``f_theta(k) = b_k theta^k / b(theta)``
for ``k = 0, 1, 2, ...`` and ``0 <= theta < R``.  Four families are provided:
Poisson, Geometric, Negative Binomial with integer size ``r`` and the
Logarithmic series.  The Logarithmic family is stored in shifted form
(``b_k = 1 / (k + 1)``) so that every family lives on ``{0, 1, 2, ...}``;
``k = 0`` corresponds to the original value 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

import numpy as np
from scipy import integrate, special as sp

from . import _core

FAMILIES = ("poisson", "geometric", "negbinomial", "logarithmic")
FAMILY_CODES = {name: i for i, name in enumerate(FAMILIES)}


class DomainError(ValueError):
    """Parameter outside the admissible domain of a kernel."""


@dataclass(frozen=True)
class KernelSpec:
    family: str
    r: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "negbinomial":
            if int(self.r) != self.r or self.r < 1:
                raise ValueError("negbinomial size r must be a positive integer")
        elif self.r != 1:
            raise ValueError(f"size r only applies to negbinomial, got r={self.r}")

    @property
    def radius(self) -> float:
        return math.inf if self.family == "poisson" else 1.0

    @property
    def support_offset(self) -> int:
        return 1 if self.family == "logarithmic" else 0

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    @property
    def name(self) -> str:
        return f"negbinomial:{self.r}" if self.family == "negbinomial" else self.family

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Build a kernel from ``poisson``, ``geometric``, ``negbinomial:r`` or ``logarithmic``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "negbinomial":
            if not arg:
                raise ValueError("negbinomial needs a size, e.g. negbinomial:10")
            try:
                r = int(arg)
            except ValueError:
                raise ValueError(f"bad negbinomial size {arg!r}") from None
            return cls("negbinomial", r)
        if arg:
            raise ValueError(f"kernel {name!r} takes no parameter")
        return cls(name)

    def to_record(self) -> dict:
        return {"family": self.family, "r": self.r}

    @classmethod
    def from_record(cls, rec: dict) -> "KernelSpec":
        return cls(rec["family"], int(rec.get("r", 1)))

    def check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if np.any(np.isnan(theta)) or np.any(theta < 0) or np.any(theta >= self.radius):
            raise DomainError(f"theta must lie in [0, {self.radius}) for {self.name}")
        return theta

    # --- coefficients -------------------------------------------------

    def log_coeff(self, k) -> np.ndarray:
        """log b_k (after the offset shift)."""
        k = np.asarray(k, dtype=float)
        if self.family == "poisson":
            return -sp.gammaln(k + 1.0)
        if self.family == "geometric":
            return np.zeros_like(k)
        if self.family == "negbinomial":
            return sp.gammaln(k + self.r) - sp.gammaln(self.r) - sp.gammaln(k + 1.0)
        return -np.log(k + 1.0)

    def log_normalizer(self, theta) -> np.ndarray:
        """log b(theta)."""
        theta = np.asarray(theta, dtype=float)
        if self.family == "poisson":
            return theta.copy()
        if self.family == "geometric":
            return -np.log1p(-theta)
        if self.family == "negbinomial":
            return -self.r * np.log1p(-theta)
        # -log(1 - t) / t, with its Taylor series near 0
        small = theta < 1e-5
        t = np.where(small, 0.5, theta)
        big = np.log(-np.log1p(-t) / t)
        series = np.log1p(theta / 2.0 + theta**2 / 3.0 + theta**3 / 4.0)
        return np.where(small, series, big)

    def dlog_normalizer(self, theta) -> np.ndarray:
        """b'(theta) / b(theta)."""
        theta = np.asarray(theta, dtype=float)
        if self.family == "poisson":
            return np.ones_like(theta)
        if self.family == "geometric":
            return 1.0 / (1.0 - theta)
        if self.family == "negbinomial":
            return self.r / (1.0 - theta)
        small = theta < 1e-4
        t = np.where(small, 0.5, theta)
        big = 1.0 / ((1.0 - t) * -np.log1p(-t)) - 1.0 / t
        series = 0.5 + theta * (5.0 / 12.0)
        return np.where(small, series, big)

    def coeff_ratio(self, k):
        """b_{k+1} / b_k in closed form."""
        k = np.asarray(k, dtype=float)
        if self.family == "poisson":
            out = 1.0 / (k + 1.0)
        elif self.family == "geometric":
            out = np.ones_like(k)
        elif self.family == "negbinomial":
            out = (k + self.r) / (k + 1.0)
        else:
            out = (k + 1.0) / (k + 2.0)
        return out[()] if out.ndim == 0 else out

    @property
    def ratio_decreasing(self) -> bool:
        """Whether k -> b_{k+1}/b_k is nonincreasing (else nondecreasing)."""
        return self.family != "logarithmic"

    @property
    def ratio_limit(self) -> float:
        return 0.0 if self.family == "poisson" else 1.0


def log_pmf(kernel: KernelSpec, theta, k) -> np.ndarray:
    """Log pmf with broadcasting over ``theta`` and ``k``.

    ``theta = 0`` is handled exactly: the mass sits at ``k = 0``.
    """
    theta = np.asarray(theta, dtype=float)
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        klog = np.where(k == 0, 0.0, k * np.log(theta))
    return kernel.log_coeff(k) + klog - kernel.log_normalizer(theta)


def pmf(kernel: KernelSpec, theta, k):
    """PSD probability ``f_theta(k)``; rejects ``theta`` outside ``[0, R)``."""
    theta = kernel.check_theta(theta)
    if np.any(np.asarray(k) < 0):
        raise DomainError("k must be nonnegative")
    out = np.exp(log_pmf(kernel, theta, k))
    return out[()] if out.ndim == 0 else out


def coeff_ratio(kernel: KernelSpec, k):
    return kernel.coeff_ratio(k)


def _lerch_phi1(z, a):
    """``sum_{j >= 0} z^j / (j + a)`` for ``0 < z < 1``, ``a > 0``.

    ``hyp2f1`` is accurate where it returns a finite value but gives nan for
    large ``a`` with ``z`` near 1; those entries use
    ``a * Phi = int_0^inf e^{-u} / (1 - z e^{-u/a}) du``.
    """
    z, a = np.broadcast_arrays(np.asarray(z, dtype=float), np.asarray(a, dtype=float))
    out = np.atleast_1d(sp.hyp2f1(1.0, a, a + 1.0, z) / a).ravel()
    zf, af = z.ravel(), a.ravel()
    for i in np.flatnonzero(~np.isfinite(out)):
        lz, ai = math.log(zf[i]), af[i]
        val = integrate.quad(lambda u: math.exp(-u) / -math.expm1(lz - u / ai), 0.0, math.inf,
                             epsabs=0.0, epsrel=1e-13, limit=200)[0]
        out[i] = val / ai
    return out.reshape(z.shape)


def sf(kernel: KernelSpec, theta, K) -> np.ndarray:
    """Upper tail ``sum_{k > K} f_theta(k)`` computed without cancellation."""
    theta = np.asarray(theta, dtype=float)
    K = np.asarray(K, dtype=float)
    neg = K < 0
    Kc = np.where(neg, 0.0, K)
    if kernel.family == "poisson":
        out = sp.gammainc(Kc + 1.0, theta)
    elif kernel.family == "geometric":
        out = theta ** (Kc + 1.0)
    elif kernel.family == "negbinomial":
        out = sp.betainc(Kc + 1.0, kernel.r, theta)
    else:
        # sum_{j >= a} t^j / j / L  with a = K + 2 in original indexing
        a = Kc + 2.0
        L = -np.log1p(-np.where(theta > 0, theta, 0.5))
        lerch = _lerch_phi1(np.where(theta > 0, theta, 0.5), a)
        out = np.where(theta > 0, theta**a * lerch / L, 0.0)
    out = np.where(neg, 1.0, out)
    return np.clip(out, 0.0, 1.0)


def sample_kernel(kernel: KernelSpec, theta, count: int, seed) -> np.ndarray:
    """Draw ``count`` values from ``f_theta`` by sequential inversion."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    kernel.check_theta(theta)
    if count < 0:
        raise ValueError("count must be nonnegative")
    thetas = np.full(count, float(theta))
    return invert_psd(kernel, thetas, rng.random(count))


def invert_psd(kernel: KernelSpec, thetas: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-cdf draws, one per ``(theta_i, u_i)`` pair.

    The scan walks ``f(k+1) = f(k) * ratio(k) * theta`` and stops at the first
    ``k`` whose cumulative mass exceeds ``1 - 1e-15``.
    """
    thetas = np.ascontiguousarray(thetas, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    f0 = np.exp(log_pmf(kernel, thetas, 0.0))
    return _core.invert_psd(kernel.code, float(kernel.r), thetas, u, f0)


@dataclass(frozen=True)
class TheoryConstants:
    t0: float
    theta_tilde: float
    U: int
    W: int
    V: int
    A: float
    N0: int
    V_certified: bool = True

    def to_record(self) -> dict:
        return {
            "t0": self.t0,
            "theta_tilde": self.theta_tilde,
            "U": self.U,
            "W": self.W,
            "V": self.V,
            "A": self.A,
            "N0": self.N0,
            "V_certified": self.V_certified,
        }


def _sup_dlog(kernel: KernelSpec, theta_tilde: float) -> float:
    grid = np.linspace(0.0, theta_tilde, 2001)[1:]
    return float(np.max(kernel.dlog_normalizer(grid)))


def _scan_V(kernel: KernelSpec, run: int = 200, limit: int = 100_000) -> tuple[int, bool]:
    start = 1
    streak = 0
    lb0 = float(kernel.log_coeff(0.0))
    for k in range(1, limit):
        ok = float(kernel.log_coeff(float(k))) - lb0 >= -k * math.log(k) - 1e-12
        if ok:
            streak += 1
            if streak >= run:
                break
        else:
            streak = 0
            start = k + 1
    else:
        return start, False
    # b_k/b_0 decays at most like 1/(k+1) for the shifted logarithmic family and
    # is >= 1/k! for the others, both of which dominate k^{-k}.
    return start, True


def _first_W(kernel: KernelSpec, bound: float) -> int:
    if kernel.ratio_decreasing:
        w = 3
        while kernel.coeff_ratio(w) > bound:
            w += 1
            if w > 10_000_000:
                raise DomainError("no admissible W: ratio bound is never reached")
        return w
    if kernel.ratio_limit <= bound:
        return 3
    raise DomainError("no admissible W: ratio bound is never reached")


def theory_constants(kernel: KernelSpec, support_bound: float, delta0: float, eta0: float) -> TheoryConstants:
    """Constants t0, theta~, U, W, V, A and N(t0, theta~, delta0, eta0).

    ``support_bound`` is the upper end of the mixing support: ``M`` when the
    radius is infinite and ``q0 * R`` otherwise.
    """
    R = kernel.radius
    if not 0 < support_bound < R:
        raise DomainError(f"support_bound must lie in (0, {R})")
    if not 0 < delta0 <= support_bound:
        raise DomainError("delta0 must lie in (0, support_bound]")
    if not 0 < eta0 < 1:
        raise DomainError("eta0 must lie in (0, 1)")
    if math.isinf(R):
        t0 = 0.5
        theta_tilde = float(support_bound)
    else:
        q0 = support_bound / R
        t0 = (q0 + 1.0) / 2.0
        theta_tilde = q0 * R
    U = math.floor(round(theta_tilde * _sup_dlog(kernel, theta_tilde), 9)) + 1
    W = _first_W(kernel, t0 / theta_tilde)
    V, certified = _scan_V(kernel)
    fW = math.exp(float(log_pmf(kernel, theta_tilde, float(W))))
    inv = 1.0 / (t0 ** (W - 1) * (1.0 - t0))
    A = fW * inv
    b_ratio = math.exp(float(kernel.log_normalizer(delta0) - kernel.log_coeff(0.0))) / eta0
    m = max(U, V, W, b_ratio, 1.0 / delta0)
    with localcontext() as ctx:
        ctx.prec = 60
        e = (Decimal(math.log(t0 ** -0.5)) * Decimal(m)).exp()
        N0 = int(max(e, Decimal(inv)).to_integral_value(rounding="ROUND_FLOOR")) + 1
    return TheoryConstants(t0, theta_tilde, U, W, V, A, N0, certified)


def tail_bound(constants: TheoryConstants, K: int) -> float:
    """Upper bound ``A t0^K`` on the mixture tail beyond ``K``."""
    if K < max(constants.U, constants.W):
        raise ValueError(f"K={K} is below max(U, W)={max(constants.U, constants.W)}")
    return constants.A * constants.t0**K
