"""Coupling and mass ledger shared by every amplitude.

Natural units hbar = c = 1 throughout; SI conversions live in
``gravitas.estimators`` only.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelParams:
    """Couplings and masses of the scattering model.

    g_newton     gravitational coupling (mass dimension -2)
    m            probe mass (the heavy, distinguishable matter particles)
    mu           mediator regulator mass; mu -> 0 recovers the 1/r potential
    lambda_probe photon-matter coupling (mass dimension 1)
    alpha_tilde  coupling of the particle-antiparticle box; kept independent
                 of g_newton*m**4 (no identification is assumed)
    eps_rel      pole displacement relative to max(m^2, mu^2); the absolute
                 epsilon used in propagators is ``eps_abs``
    """

    g_newton: float = 1.0
    m: float = 1.0
    mu: float = 1e-3
    lambda_probe: float = 1.0
    alpha_tilde: float = 1.0
    eps_rel: float = 1e-6
    pole_guard_rel: float = 1e-12

    def __post_init__(self) -> None:
        if self.g_newton <= 0:
            raise ValueError("g_newton must be positive")
        if self.m <= 0:
            raise ValueError("m must be positive")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.eps_rel <= 0:
            raise ValueError("eps_rel must be positive")
        if not self.mu < self.m:
            raise ValueError("require mu < m: the regulator is the light scale")

    @property
    def eps_abs(self) -> float:
        """Absolute pole displacement: eps_rel * max(m^2, mu^2)."""
        return self.eps_rel * max(self.m**2, self.mu**2)

    @property
    def pole_guard(self) -> float:
        """Distance from a pole below which evaluation raises PoleError."""
        return self.pole_guard_rel * max(self.m**2, self.mu**2)

    def with_eps(self, eps_rel: float) -> "ModelParams":
        return ModelParams(
            g_newton=self.g_newton,
            m=self.m,
            mu=self.mu,
            lambda_probe=self.lambda_probe,
            alpha_tilde=self.alpha_tilde,
            eps_rel=eps_rel,
            pole_guard_rel=self.pole_guard_rel,
        )
