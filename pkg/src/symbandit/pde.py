"""Closed-form solutions of the two parabolic value equations.

The regret equation u_t + eps*u_xr + eps*u_xh + (1/2)(u_xrxr + u_xhxh)
+ eps^2*u_xhxr = q with q = +-eps by the sign of xi_r, terminal payoff
mu; and its pseudoregret analogue u_t + eps*u_xr + (1/2)u_xrxr = qbar
with qbar = -2*eps on xi_r < 0, terminal 2*eps*s2.

Solutions split into a smooth part (a drifted heat flow of the terminal
payoff, a folded-normal mean in one effective coordinate) and a steady
layer phi absorbing the source, minus its drifted heat smoothing
phi_hat. The layer family is indexed by a branch constant b: b = 1/eps
is the unique C^1 member, b = 1/(eps - eps^3) trades the kink at
xi_r = 0 for a cancellation of the second-derivative jump against the
drift. phi_hat has an explicit erf/exponential form, obtained by
splitting the defining integral at 0 and using Gaussian moment and
exponential-tilt identities; the tests gate it against adaptive
quadrature of the defining integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import SQRT_PI, SQRT_TWO_PI, check_gap, erf, erfc

SMALL_GAP_LIMIT_C = 1.0 / SQRT_PI  # limit of c(gamma) as gamma -> 0
SQRT2 = math.sqrt(2.0)

_BRANCH_TOL = 1e-14


@dataclass(frozen=True)
class ClosedForm:
    """Gap, branch constant b, and derived kappa = 2(1 + eps^2)."""

    eps: float
    b: float
    branch: str = field(init=False)

    def __post_init__(self) -> None:
        check_gap(self.eps)
        branch = "custom"
        if self.eps > 0.0:
            c1 = 1.0 / self.eps
            c0 = 1.0 / (self.eps - self.eps**3)
            if abs(self.b - c1) <= _BRANCH_TOL * abs(c1):
                branch = "C1"
            elif abs(self.b - c0) <= _BRANCH_TOL * abs(c0):
                branch = "C0"
        object.__setattr__(self, "branch", branch)

    @property
    def kappa(self) -> float:
        return 2.0 * (1.0 + self.eps * self.eps)

    @classmethod
    def c1(cls, eps: float) -> "ClosedForm":
        """The C^1 member, b = 1/eps."""
        if eps <= 0.0:
            raise ValueError(f"C1 branch needs eps > 0, got {eps}")
        return cls(eps=eps, b=1.0 / eps)

    @classmethod
    def c0(cls, eps: float) -> "ClosedForm":
        """The error-optimized C^0 member, b = 1/(eps - eps^3)."""
        if eps <= 0.0:
            raise ValueError(f"C0 branch needs eps > 0, got {eps}")
        return cls(eps=eps, b=1.0 / (eps - eps**3))

    @classmethod
    def make(cls, branch: str, eps: float) -> "ClosedForm":
        if branch == "C1":
            return cls.c1(eps)
        if branch == "C0":
            return cls.c0(eps)
        raise ValueError(f"branch must be 'C1' or 'C0', got {branch!r}")


def _require_negative_t(t: float) -> None:
    if t >= 0.0:
        raise ValueError(f"closed forms are defined for t < 0 only, got t={t}")


def folded_normal_mean(x: float) -> float:
    """E|x + Z| for standard normal Z: sqrt(2/pi) e^{-x^2/2} + x erf(x/sqrt2)."""
    return math.sqrt(2.0 / math.pi) * math.exp(-0.5 * x * x) + x * erf(x / SQRT2)


def _normal_cdf(x: float) -> float:
    return 0.5 * erfc(-x / SQRT2)


def _normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT_TWO_PI


def _exp_times_normal_cdf(c: float, w: float) -> float:
    """exp(c) * NormalCDF(w) without inf * 0 in the far tails.

    For w below the erfc underflow point the log of the cdf is replaced
    by its Mills-ratio expansion; the absolute error of the fallback is
    far below every tolerance used in this package.
    """
    if w > -25.0:
        return math.exp(c) * _normal_cdf(w) if c < 709.0 else math.inf
    log_cdf = (-0.5 * w * w - math.log(-w) - 0.5 * math.log(2.0 * math.pi)
               + math.log1p(-1.0 / (w * w) + 3.0 / (w * w * w * w)))
    total = c + log_cdf
    if total < -745.0:
        return 0.0
    return math.exp(total)


# ---------------------------------------------------------------------------
# Regret solution u = u_h + phi - phi_hat
# ---------------------------------------------------------------------------

def u_h(eta: float, xi_h: float, xi_r: float, t: float, cf: ClosedForm) -> float:
    """Smooth part: (eta + sqrt(-kappa t) E|z/sqrt(-t) + Z|) / 2.

    z = (xi_r + xi_h - 2 eps t)/sqrt(kappa); converges to the terminal
    payoff as t -> 0^-.
    """
    _require_negative_t(t)
    k = cf.kappa
    z = (xi_r + xi_h - 2.0 * cf.eps * t) / math.sqrt(k)
    return 0.5 * (eta + math.sqrt(-k * t) * folded_normal_mean(z / math.sqrt(-t)))


def phi_fn(xi_r: float, cf: ClosedForm) -> float:
    """Steady source layer: -xi_r on the left, xi_r + b e^{-2 eps xi_r} - b
    on the right, pinned to phi(0) = 0."""
    if xi_r <= 0.0:
        return -xi_r
    return xi_r + cf.b * math.exp(-2.0 * cf.eps * xi_r) - cf.b


def phi_deriv(xi_r: float, cf: ClosedForm, order: int = 1, side: int = 0) -> float:
    """One-sided derivatives of phi; `side` (+1/-1) is required at xi_r = 0."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if xi_r == 0.0 and side not in (1, -1):
        raise ValueError("phi is kinked at xi_r = 0; pass side=+1 or side=-1")
    right = xi_r > 0.0 or (xi_r == 0.0 and side == 1)
    if not right:
        if order == 1:
            return -1.0
        return 0.0
    e = math.exp(-2.0 * cf.eps * xi_r)
    core = cf.b * (-2.0 * cf.eps) ** order * e
    if order == 1:
        return 1.0 + core
    return core


def phi_hat(xi_r: float, t: float, cf: ClosedForm) -> float:
    """Drifted heat smoothing of phi, in closed form.

    With S ~ N(m, -t), m = xi_r - eps t: the |s|-like part contributes
    E|S| and the exponential branch tilts the Gaussian, shifting its
    mean to xi_r + eps t, whence

        phi_hat = sqrt(-t) E|m/sqrt(-t) + Z|
                  + b e^{-2 eps xi_r} NormalCDF((xi_r + eps t)/sqrt(-t))
                  - b NormalCDF(m/sqrt(-t)).
    """
    _require_negative_t(t)
    sigma = math.sqrt(-t)
    m = xi_r - cf.eps * t
    a = m / sigma
    folded = sigma * folded_normal_mean(a)
    tilt = _exp_times_normal_cdf(-2.0 * cf.eps * xi_r, (xi_r + cf.eps * t) / sigma)
    return folded + cf.b * tilt - cf.b * _normal_cdf(a)


def u_n(xi_r: float, t: float, cf: ClosedForm) -> float:
    """Non-smooth part phi - phi_hat; vanishes as t -> 0^-."""
    return phi_fn(xi_r, cf) - phi_hat(xi_r, t, cf)


def u_total(eta: float, xi_h: float, xi_r: float, t: float, cf: ClosedForm) -> float:
    """Full regret solution u = u_h + phi - phi_hat."""
    return u_h(eta, xi_h, xi_r, t, cf) + u_n(xi_r, t, cf)


def regret_source(xi_r: float, cf: ClosedForm) -> float:
    """Source q of the regret equation: +eps for xi_r > 0, -eps below."""
    if xi_r == 0.0:
        raise ValueError("source is discontinuous at xi_r = 0")
    return cf.eps if xi_r > 0.0 else -cf.eps


# ---------------------------------------------------------------------------
# Pseudoregret solution ubar = 2 eps s2 + bar_phi - bar_phi_hat
# ---------------------------------------------------------------------------

def bar_phi(xi_r: float, cf: ClosedForm) -> float:
    """Pseudoregret layer: -2 xi_r on the left, b e^{-2 eps xi_r} - b right."""
    if xi_r <= 0.0:
        return -2.0 * xi_r
    return cf.b * math.exp(-2.0 * cf.eps * xi_r) - cf.b


def bar_phi_deriv(xi_r: float, cf: ClosedForm, order: int = 1, side: int = 0) -> float:
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if xi_r == 0.0 and side not in (1, -1):
        raise ValueError("bar_phi is kinked at xi_r = 0; pass side=+1 or side=-1")
    right = xi_r > 0.0 or (xi_r == 0.0 and side == 1)
    if not right:
        if order == 1:
            return -2.0
        return 0.0
    e = math.exp(-2.0 * cf.eps * xi_r)
    return cf.b * (-2.0 * cf.eps) ** order * e


def bar_phi_hat(xi_r: float, t: float, cf: ClosedForm) -> float:
    """Drifted heat smoothing of bar_phi: 2 E[(-S)^+] plus the tilt terms."""
    _require_negative_t(t)
    sigma = math.sqrt(-t)
    m = xi_r - cf.eps * t
    a = m / sigma
    left = 2.0 * (-m * _normal_cdf(-a) + sigma * _normal_pdf(a))
    tilt = _exp_times_normal_cdf(-2.0 * cf.eps * xi_r, (xi_r + cf.eps * t) / sigma)
    return left + cf.b * tilt - cf.b * _normal_cdf(a)


def bar_u_n(xi_r: float, t: float, cf: ClosedForm) -> float:
    return bar_phi(xi_r, cf) - bar_phi_hat(xi_r, t, cf)


def bar_u_total(xi_r: float, s2: float, t: float, cf: ClosedForm) -> float:
    """Full pseudoregret solution ubar = 2 eps s2 + bar_phi - bar_phi_hat."""
    _require_negative_t(t)
    return 2.0 * cf.eps * s2 + bar_u_n(xi_r, t, cf)


def pseudoregret_source(xi_r: float, cf: ClosedForm) -> float:
    """Source qbar: 0 for xi_r > 0, -2 eps for xi_r < 0."""
    if xi_r == 0.0:
        raise ValueError("source is discontinuous at xi_r = 0")
    return 0.0 if xi_r > 0.0 else -2.0 * cf.eps


# ---------------------------------------------------------------------------
# Finite-difference residuals (smooth-region verification)
# ---------------------------------------------------------------------------

def pde_residual(
    eta: float, xi_h: float, xi_r: float, t: float, cf: ClosedForm, h: float = 1e-3
) -> float:
    """Central-difference residual of the regret equation at a smooth point.

    Requires |xi_r| > 2h (away from the kink) and t + 2h < 0; vanishes at
    O(h^2) plus roundoff.
    """
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    if abs(xi_r) <= 2.0 * h:
        raise ValueError(f"point too close to the kink: |xi_r|={abs(xi_r)} <= 2h")
    if t + 2.0 * h >= 0.0:
        raise ValueError(f"stencil would cross t = 0: t={t}, h={h}")

    def u(e, xh, xr, tt):
        return u_total(e, xh, xr, tt, cf)

    u0 = u(eta, xi_h, xi_r, t)
    u_t = (u(eta, xi_h, xi_r, t + h) - u(eta, xi_h, xi_r, t - h)) / (2.0 * h)
    u_xr = (u(eta, xi_h, xi_r + h, t) - u(eta, xi_h, xi_r - h, t)) / (2.0 * h)
    u_xh = (u(eta, xi_h + h, xi_r, t) - u(eta, xi_h - h, xi_r, t)) / (2.0 * h)
    u_xrxr = (u(eta, xi_h, xi_r + h, t) - 2.0 * u0 + u(eta, xi_h, xi_r - h, t)) / (h * h)
    u_xhxh = (u(eta, xi_h + h, xi_r, t) - 2.0 * u0 + u(eta, xi_h - h, xi_r, t)) / (h * h)
    u_xhxr = (
        u(eta, xi_h + h, xi_r + h, t)
        - u(eta, xi_h + h, xi_r - h, t)
        - u(eta, xi_h - h, xi_r + h, t)
        + u(eta, xi_h - h, xi_r - h, t)
    ) / (4.0 * h * h)
    q = regret_source(xi_r, cf)
    return (u_t + cf.eps * u_xr + cf.eps * u_xh + 0.5 * (u_xrxr + u_xhxh)
            + cf.eps**2 * u_xhxr - q)


def bar_pde_residual(
    xi_r: float, s2: float, t: float, cf: ClosedForm, h: float = 1e-3
) -> float:
    """Central-difference residual of the pseudoregret equation."""
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    if abs(xi_r) <= 2.0 * h:
        raise ValueError(f"point too close to the kink: |xi_r|={abs(xi_r)} <= 2h")
    if t + 2.0 * h >= 0.0:
        raise ValueError(f"stencil would cross t = 0: t={t}, h={h}")

    def u(xr, tt):
        return bar_u_total(xr, s2, tt, cf)

    u0 = u(xi_r, t)
    u_t = (u(xi_r, t + h) - u(xi_r, t - h)) / (2.0 * h)
    u_xr = (u(xi_r + h, t) - u(xi_r - h, t)) / (2.0 * h)
    u_xrxr = (u(xi_r + h, t) - 2.0 * u0 + u(xi_r - h, t)) / (h * h)
    q = pseudoregret_source(xi_r, cf)
    return u_t + cf.eps * u_xr + 0.5 * u_xrxr - q


# ---------------------------------------------------------------------------
# Leading-order prefactors and their maximizers
# ---------------------------------------------------------------------------

def prefactor_c(gamma: float) -> float:
    """Normalized origin value of the regret solution at gamma = eps sqrt(T).

    c(gamma) = e^{-g^2}/sqrt(pi) + g erf(g) + (1/g - g) erf(g/sqrt2)
               - sqrt(2/pi) e^{-g^2/2};
    evaluated through erfc complements past gamma = 8, where the direct
    form loses the 1/gamma answer to cancellation. The gamma -> 0 limit
    is SMALL_GAP_LIMIT_C.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    g = gamma
    if g <= 8.0:
        return (math.exp(-g * g) / SQRT_PI + g * erf(g)
                + (1.0 / g - g) * erf(g / SQRT2)
                - math.sqrt(2.0 / math.pi) * math.exp(-0.5 * g * g))
    return (1.0 / g
            + (math.exp(-g * g) / SQRT_PI - g * erfc(g))
            + ((g - 1.0 / g) * erfc(g / SQRT2)
               - math.sqrt(2.0 / math.pi) * math.exp(-0.5 * g * g)))


def prefactor_c_bar(gamma: float) -> float:
    """Pseudoregret analogue:
    cbar(gamma) = (1/g - g) erf(g/sqrt2) - sqrt(2/pi) e^{-g^2/2} + g."""
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    g = gamma
    if g <= 8.0:
        return ((1.0 / g - g) * erf(g / SQRT2)
                - math.sqrt(2.0 / math.pi) * math.exp(-0.5 * g * g) + g)
    return (1.0 / g + (g - 1.0 / g) * erfc(g / SQRT2)
            - math.sqrt(2.0 / math.pi) * math.exp(-0.5 * g * g))


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_prefactor(which: str) -> tuple[float, float]:
    """Argmax and max of c or cbar over gamma > 0.

    Coarse geometric scan over (1e-3, 10) to bracket an interior peak,
    then golden-section refinement; |gamma error| <= 1e-6 guaranteed by
    the bracket width. Fails loudly if the scan peak sits on the scan
    boundary.
    """
    if which == "c":
        f = prefactor_c
    elif which == "c_bar":
        f = prefactor_c_bar
    else:
        raise ValueError(f"which must be 'c' or 'c_bar', got {which!r}")
    n = 2000
    ratio = (10.0 / 1e-3) ** (1.0 / (n - 1))
    xs = [1e-3 * ratio**i for i in range(n)]
    vals = [f(x) for x in xs]
    k = max(range(n), key=vals.__getitem__)
    if k == 0 or k == n - 1:
        raise RuntimeError("coarse scan found no interior bracket for the maximizer")
    return golden_section_max(f, xs[k - 1], xs[k + 1], tol=1e-10)
