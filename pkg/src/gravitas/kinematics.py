"""Four-vector algebra, Mandelstam invariants, boosts, and phase-space sampling.

Conventions: metric signature (-,+,+,+), so an on-shell momentum satisfies
p.p = -m^2 and the invariants of elastic 2->2 scattering are

    s = -(p1 + p2)^2,   t = -(p1' - p1)^2,   u = -(p2' - p1)^2.

Natural units hbar = c = 1. All samplers take an explicit
``numpy.random.Generator`` so ensembles can be split over independent,
reproducible streams (see :func:`stream`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BelowThresholdError, ConfigShapeError, SuperluminalBoostError

TOL_ONSHELL = 1e-9
TOL_CONSERVATION = 1e-10
TOL_LORENTZ = 1e-10

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


def stream(master_seed: int, index: int = 0) -> np.random.Generator:
    """Independent, reproducible RNG stream: (master_seed, index) fixes output."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((master_seed, index))))


# ---------------------------------------------------------------------------
# four-vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourVector:
    e: float
    px: float
    py: float
    pz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.e, self.px, self.py, self.pz], dtype=float)

    @staticmethod
    def from_array(a: np.ndarray) -> "FourVector":
        return FourVector(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @staticmethod
    def on_shell(mass: float, p3: Sequence[float]) -> "FourVector":
        px, py, pz = (float(c) for c in p3)
        return FourVector(math.sqrt(mass * mass + px * px + py * py + pz * pz), px, py, pz)

    @property
    def p3(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz], dtype=float)

    def minkowski_sq(self) -> float:
        """p.p = -e^2 + |p3|^2; equals -m^2 on shell."""
        return minkowski_dot(self, self)

    def invariant_mass(self) -> float:
        return math.sqrt(max(-self.minkowski_sq(), 0.0))

    def __add__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.e + other.e, self.px + other.px,
                          self.py + other.py, self.pz + other.pz)

    def __sub__(self, other: "FourVector") -> "FourVector":
        return FourVector(self.e - other.e, self.px - other.px,
                          self.py - other.py, self.pz - other.pz)

    def __neg__(self) -> "FourVector":
        return FourVector(-self.e, -self.px, -self.py, -self.pz)


def minkowski_dot(a: FourVector, b: FourVector) -> float:
    """Minkowski inner product with signature (-,+,+,+)."""
    return -a.e * b.e + a.px * b.px + a.py * b.py + a.pz * b.pz


def minkowski_dot_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched Minkowski dot for arrays shaped (..., 4)."""
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def is_on_shell(v: FourVector, mass: float, tol: float = TOL_ONSHELL) -> bool:
    """|p^2 + m^2| <= tol * scale^2 with scale = max(m, e) (covers massless legs)."""
    scale2 = max(mass * mass, v.e * v.e)
    return abs(v.minkowski_sq() + mass * mass) <= tol * scale2 and v.e > 0


# ---------------------------------------------------------------------------
# Lorentz boosts
# ---------------------------------------------------------------------------

def boost_matrix(beta: Sequence[float]) -> np.ndarray:
    b = np.asarray(beta, dtype=float)
    b2 = float(b @ b)
    if b2 >= 1.0:
        raise SuperluminalBoostError(f"|beta|^2 = {b2} >= 1")
    if b2 == 0.0:
        return np.eye(4)
    g = 1.0 / math.sqrt(1.0 - b2)
    L = np.eye(4)
    L[0, 0] = g
    L[0, 1:] = g * b
    L[1:, 0] = g * b
    L[1:, 1:] += (g - 1.0) * np.outer(b, b) / b2
    return L


def boost(v: FourVector, beta: Sequence[float]) -> FourVector:
    """Active boost: a particle at rest acquires velocity ``beta``."""
    return FourVector.from_array(boost_matrix(beta) @ v.as_array())


def boost_arr(arr: np.ndarray, beta: Sequence[float]) -> np.ndarray:
    """Boost an array of momenta shaped (..., 4)."""
    return arr @ boost_matrix(beta).T


# ---------------------------------------------------------------------------
# kinematic configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KinematicConfig:
    """Incoming/outgoing momenta with declared rest masses per leg.

    Masses are listed incoming first, then outgoing. Construction validates
    total four-momentum conservation and the on-shell condition of every leg.
    """

    incoming: tuple[FourVector, ...]
    outgoing: tuple[FourVector, ...]
    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        legs = list(self.incoming) + list(self.outgoing)
        if len(legs) != len(self.masses):
            raise ConfigShapeError(
                f"{len(legs)} legs but {len(self.masses)} declared masses")
        p_in = np.sum([v.as_array() for v in self.incoming], axis=0)
        p_out = np.sum([v.as_array() for v in self.outgoing], axis=0)
        scale = max(float(np.max(np.abs(p_in))), float(np.max(np.abs(p_out))), 1e-300)
        if float(np.max(np.abs(p_in - p_out))) > TOL_CONSERVATION * scale:
            raise ConfigShapeError(
                f"four-momentum not conserved: in={p_in}, out={p_out}")
        for v, m in zip(legs, self.masses):
            if not is_on_shell(v, m):
                raise ConfigShapeError(
                    f"leg {v} off shell for declared mass {m}: p^2={v.minkowski_sq()}")

    @property
    def total_incoming(self) -> FourVector:
        tot = self.incoming[0]
        for v in self.incoming[1:]:
            tot = tot + v
        return tot

    def boosted(self, beta: Sequence[float]) -> "KinematicConfig":
        return KinematicConfig(
            incoming=tuple(boost(v, beta) for v in self.incoming),
            outgoing=tuple(boost(v, beta) for v in self.outgoing),
            masses=self.masses,
        )


def mandelstam(cfg: KinematicConfig) -> tuple[float, float, float]:
    """(s, t, u) of a 2->2 configuration; s + t + u = sum of squared masses."""
    if len(cfg.incoming) != 2 or len(cfg.outgoing) != 2:
        raise ConfigShapeError(
            f"mandelstam needs 2->2, got {len(cfg.incoming)}->{len(cfg.outgoing)}")
    p1, p2 = cfg.incoming
    p1p, p2p = cfg.outgoing
    s = -minkowski_dot(p1 + p2, p1 + p2)
    t = -minkowski_dot(p1p - p1, p1p - p1)
    u = -minkowski_dot(p2p - p1, p2p - p1)
    return s, t, u


def elastic_cm_config(m: float, p: float, theta: float, phi: float = 0.0) -> KinematicConfig:
    """Equal-mass elastic 2->2 scattering in the CM frame at angle theta."""
    e = math.hypot(m, p)
    st, ct = math.sin(theta), math.cos(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    p1 = FourVector(e, 0.0, 0.0, p)
    p2 = FourVector(e, 0.0, 0.0, -p)
    p1p = FourVector(e, p * st * cp, p * st * sp, p * ct)
    p2p = FourVector(e, -p * st * cp, -p * st * sp, -p * ct)
    return KinematicConfig((p1, p2), (p1p, p2p), (m, m, m, m))


# ---------------------------------------------------------------------------
# phase-space sampling
#
# Measure convention (no 2 pi factors): a weighted sample estimates
#   E[w f] = int prod_i d^3k_i / (2 E_i) delta^4(sum k_i - P) f .
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSpaceSample:
    momenta: tuple[FourVector, ...]
    weight: float

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError("phase-space weight must be nonnegative")


def _kallen(a: float, b: float, c: float) -> float:
    return a * a + b * b + c * c - 2 * (a * b + b * c + c * a)


def cm_momentum(s: float, m1: float, m2: float) -> float:
    """Magnitude of the back-to-back momentum of a two-body state of mass sqrt(s)."""
    lam = _kallen(s, m1 * m1, m2 * m2)
    if lam < 0:
        if lam > -1e-12 * s * s:
            return 0.0
        raise BelowThresholdError(f"s={s} below threshold ({m1}+{m2})^2")
    return math.sqrt(lam) / (2.0 * math.sqrt(s))


def _uniform_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    ct = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    st = np.sqrt(1.0 - ct * ct)
    return np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=1)


def two_body_batch(total: FourVector, m1: float, m2: float,
                   rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n two-body samples; returns momenta (n, 2, 4) and weights (n,)."""
    s = -total.minkowski_sq()
    if s < (m1 + m2) ** 2 * (1.0 - 1e-12):
        raise BelowThresholdError(
            f"total invariant mass^2 {s} below ({m1}+{m2})^2 = {(m1 + m2) ** 2}")
    s = max(s, (m1 + m2) ** 2)
    k = cm_momentum(s, m1, m2)
    roots = math.sqrt(s)

    nhat = _uniform_directions(rng, n)
    k1 = np.empty((n, 4))
    k2 = np.empty((n, 4))
    k1[:, 0] = math.hypot(m1, k)
    k2[:, 0] = math.hypot(m2, k)
    k1[:, 1:] = k * nhat
    k2[:, 1:] = -k * nhat

    beta = total.p3 / total.e
    if float(beta @ beta) > 0:
        k1 = boost_arr(k1, beta)
        k2 = boost_arr(k2, beta)

    # uniform directions have pdf 1/(4 pi); measure density is k/(4 sqrt(s))
    w = np.full(n, 4.0 * math.pi * k / (4.0 * roots))
    return np.stack([k1, k2], axis=1), w


def sample_two_body(total: FourVector, m1: float, m2: float,
                    rng: np.random.Generator) -> PhaseSpaceSample:
    """One point of two-body phase space, uniform on the CM sphere."""
    mom, w = two_body_batch(total, m1, m2, rng, 1)
    return PhaseSpaceSample(
        (FourVector.from_array(mom[0, 0]), FourVector.from_array(mom[0, 1])),
        float(w[0]))


def three_body_batch(total: FourVector, masses: Sequence[float],
                     rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sequential 1->2 splitting, flat in the intermediate invariant mass squared.

    total -> (a, I), then I -> (b, c). Returns momenta (n, 3, 4) ordered
    (a, b, c) and weights (n,).
    """
    ma, mb, mc = (float(m) for m in masses)
    s = -total.minkowski_sq()
    roots = math.sqrt(s)
    if roots < (ma + mb + mc) * (1.0 - 1e-12):
        raise BelowThresholdError(
            f"sqrt(s)={roots} below three-body threshold {ma + mb + mc}")

    m2_lo = (mb + mc) ** 2
    m2_hi = (roots - ma) ** 2
    if m2_hi <= m2_lo:
        # degenerate: everything at rest in the CM frame
        beta = total.p3 / total.e
        mom = np.empty((n, 3, 4))
        for i, m in enumerate((ma, mb, mc)):
            rest = np.zeros(4)
            rest[0] = m
            mom[:, i, :] = boost_arr(rest[None, :], beta) if float(beta @ beta) > 0 else rest
        return mom, np.zeros(n)

    m2 = rng.uniform(m2_lo, m2_hi, n)
    mI = np.sqrt(m2)

    # split total -> a + I in the total rest frame
    ka = np.array([cm_momentum(s, ma, mi) for mi in mI])
    nhat_a = _uniform_directions(rng, n)
    pa = np.empty((n, 4))
    pa[:, 0] = np.hypot(ma, ka)
    pa[:, 1:] = ka[:, None] * nhat_a
    pI = np.empty((n, 4))
    pI[:, 0] = np.hypot(mI, ka)
    pI[:, 1:] = -ka[:, None] * nhat_a

    # split I -> b + c in the I rest frame, then boost along I's velocity
    kbc = np.array([cm_momentum(mm, mb, mc) for mm in m2])
    nhat_b = _uniform_directions(rng, n)
    pb = np.empty((n, 4))
    pb[:, 0] = np.hypot(mb, kbc)
    pb[:, 1:] = kbc[:, None] * nhat_b
    pc = np.empty((n, 4))
    pc[:, 0] = np.hypot(mc, kbc)
    pc[:, 1:] = -kbc[:, None] * nhat_b
    beta_I = pI[:, 1:] / pI[:, 0:1]
    pb = _boost_rows(pb, beta_I)
    pc = _boost_rows(pc, beta_I)

    mom = np.stack([pa, pb, pc], axis=1)
    beta = total.p3 / total.e
    if float(beta @ beta) > 0:
        mom = boost_arr(mom, beta)

    # flat-m2 pdf times two uniform spheres against the exact measure density
    w = (m2_hi - m2_lo) * (4.0 * math.pi) ** 2 \
        * (ka / (4.0 * roots)) * (kbc / (4.0 * mI))
    return mom, w


def _boost_rows(p: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Boost each row p[i] by its own velocity beta[i]."""
    b2 = np.sum(beta * beta, axis=1)
    g = 1.0 / np.sqrt(1.0 - b2)
    bp = np.sum(beta * p[:, 1:], axis=1)
    e = g * (p[:, 0] + bp)
    with np.errstate(invalid="ignore", divide="ignore"):
        coef = np.where(b2 > 0, (g - 1.0) * bp / np.where(b2 > 0, b2, 1.0), 0.0)
    p3 = p[:, 1:] + (coef + g * p[:, 0])[:, None] * beta
    out = np.empty_like(p)
    out[:, 0] = e
    out[:, 1:] = p3
    return out


def sample_three_body(total: FourVector, masses: Sequence[float],
                      rng: np.random.Generator) -> PhaseSpaceSample:
    mom, w = three_body_batch(total, masses, rng, 1)
    return PhaseSpaceSample(tuple(FourVector.from_array(mom[0, i]) for i in range(3)),
                            float(w[0]))


# ---------------------------------------------------------------------------
# Lorentz-invariant measure identity
#   int d^3k / ((2 pi)^3 2 E_k) f = int d^4k delta(k^2 + mu^2) Theta(k^0) f
# checked with a Gaussian-regularized shell delta of width w in k^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureIdentityReport:
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    rhs_per_width: tuple[tuple[float, float, float], ...]  # (w, estimate, error)

    @property
    def discrepancy_sigmas(self) -> float:
        err = math.hypot(self.lhs_error, self.rhs_error)
        return abs(self.lhs - self.rhs) / err if err > 0 else math.inf


def check_invariant_measure_identity(
    test_fn: Callable[[np.ndarray], np.ndarray],
    mu: float,
    rng: np.random.Generator,
    n: int,
    kmax: float,
    width_ladder: Sequence[float] | None = None,
) -> MeasureIdentityReport:
    """Estimate both sides of the on-shell measure identity for ``test_fn``.

    ``test_fn`` maps an array of four-vectors (n, 4) to values (n,); it must
    be negligible for |k3| > kmax. The left side samples 3-momenta on shell;
    the right side samples 4-momenta with a Gaussian shell of width w in k^2,
    swept over ``width_ladder`` (default {1e-1, 1e-2, 1e-3} * mu^2) and
    Richardson-extrapolated linearly in w^2.
    """
    if width_ladder is None:
        width_ladder = [1e-1 * mu * mu, 1e-2 * mu * mu, 1e-3 * mu * mu]
    widths = sorted(width_ladder, reverse=True)

    # LHS: k3 uniform in a ball of radius kmax
    u = rng.random(n) ** (1.0 / 3.0)
    nhat = _uniform_directions(rng, n)
    k3 = (kmax * u)[:, None] * nhat
    e = np.sqrt(mu * mu + np.sum(k3 * k3, axis=1))
    k4 = np.concatenate([e[:, None], k3], axis=1)
    vol3 = 4.0 / 3.0 * math.pi * kmax**3
    vals = test_fn(k4) * vol3 / ((2.0 * math.pi) ** 3 * 2.0 * e)
    lhs = float(np.mean(vals))
    lhs_err = float(np.std(vals) / math.sqrt(n))

    # RHS: k3 in the ball, k0 from a proposal concentrated on the shell
    # (the delta has k0-width ~ w/(2E); a flat k0 proposal would almost
    # never hit it for small w). The integrand keeps the explicit
    # regularized delta; only the sampling density adapts.
    per_width = []
    for w in widths:
        u = rng.random(n) ** (1.0 / 3.0)
        nhat = _uniform_directions(rng, n)
        k3 = (kmax * u)[:, None] * nhat
        e_shell = np.sqrt(mu * mu + np.sum(k3 * k3, axis=1))
        prop_sigma = 4.0 * w / (2.0 * e_shell)
        k0 = e_shell + prop_sigma * rng.standard_normal(n)
        q = np.exp(-0.5 * ((k0 - e_shell) / prop_sigma) ** 2) \
            / (prop_sigma * math.sqrt(2.0 * math.pi))
        k4 = np.concatenate([k0[:, None], k3], axis=1)
        ksq = minkowski_dot_arr(k4, k4)
        delta = np.exp(-0.5 * ((ksq + mu * mu) / w) ** 2) / (w * math.sqrt(2.0 * math.pi))
        vals = np.where(k0 > 0,
                        test_fn(k4) * delta * vol3 / ((2.0 * math.pi) ** 3 * q),
                        0.0)
        per_width.append((w, float(np.mean(vals)), float(np.std(vals) / math.sqrt(n))))

    # linear-in-w^2 Richardson step from the two narrowest shells
    (w1, r1, e1), (w2, r2, e2) = per_width[-2], per_width[-1]
    x1, x2 = w1 * w1, w2 * w2
    rhs = r2 + (r2 - r1) * x2 / (x1 - x2)
    rhs_err = math.hypot(e2 * (1 + x2 / (x1 - x2)), e1 * x2 / (x1 - x2))
    return MeasureIdentityReport(lhs, lhs_err, rhs, rhs_err, tuple(per_width))
