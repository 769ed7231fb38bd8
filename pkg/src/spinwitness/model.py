"""Physics of the spin witness protocol: branch separations, gravitational and
Casimir-Polder couplings, interaction phases, the dephased two-qubit spin
state, and point-particle-approximation correction reports.

Conventions
-----------
Branch pairs are labelled LL, LR, RL, RR, with separations d, d-2*delta,
d+2*delta, d respectively: LR is the closest-approach pair and carries the
fastest positive phase rate. In the spin state |0> tags an L branch and |1>
an R branch, and the large phase accumulated by the closest pair multiplies
|10>, so that the witness I + X(x)Z + Y(x)Y certifies entanglement after a
few seconds in the gravity-only setting.

The "frequency" readings reported by :func:`frequency_readings` are angular
rates omega = coupling/hbar in s^-1 (for the default geometry this gives the
0.226 gravitational reading; the cycles-per-second reading would be 2*pi
smaller and matches nothing).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "PhysicalConstants",
    "DEFAULT_CONSTANTS",
    "ScenarioParams",
    "BranchSeparations",
    "CouplingTensor",
    "PhaseRates",
    "PEAReport",
    "PAIRS",
    "FASTEST_PAIR",
    "branch_separations",
    "coupling_tensor",
    "q_components",
    "cp_coupling",
    "phase_rates",
    "spin_state",
    "pea_corrections",
    "frequency_readings",
    "characteristic_time",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used by the model."""

    G: float = 6.674e-11      # m^3 kg^-1 s^-2
    hbar: float = 1.0546e-34  # J s
    c: float = 2.998e8        # m s^-1

    def __post_init__(self):
        if not (self.G > 0 and self.hbar > 0 and self.c > 0):
            raise ValueError("physical constants must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()

#: branch-pair labels in index order
PAIRS = ("LL", "LR", "RL", "RR")

#: the most rapidly oscillating coherence couples the LR and RL pairs
FASTEST_PAIR = ("LR", "RL")


@dataclass(frozen=True)
class ScenarioParams:
    """All physical inputs of a protocol scenario, in SI units.

    ``cp_scale`` multiplies the nominal Casimir-Polder coupling (1 = nominal);
    it exists for modified-coupling studies. ``gravity_on`` switches the
    gravitational interaction.

    The default sphere radius is 1e-6 m: the radius of a 1e-14 kg diamond
    microsphere, and the value consistent with the ~0.016 s^-1 CP rate of the
    default geometry.
    """

    mass: float = 1e-14                 # kg
    separation_d: float = 450e-6        # m
    half_split_delta: float = 125e-6    # m
    trap_omega: float = 1e3             # rad/s
    mean_occupation_nbar: float = 1e6   # dimensionless
    dephasing_gamma: float = 0.0        # 1/s
    sphere_radius_R: float = 1e-6       # m
    permittivity_eps: float = 5.7       # dimensionless
    gravity_on: bool = True
    cp_scale: float = 1.0
    constants: PhysicalConstants = field(default=DEFAULT_CONSTANTS)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("mass", "separation_d", "trap_omega", "sphere_radius_R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.half_split_delta < 0:
            raise ValueError("half_split_delta must be >= 0")
        if self.mean_occupation_nbar < 0:
            raise ValueError("mean_occupation_nbar must be >= 0")
        if self.dephasing_gamma < 0:
            raise ValueError("dephasing_gamma must be >= 0")
        if self.permittivity_eps < 1:
            raise ValueError("permittivity_eps must be >= 1")
        if self.cp_scale < 0:
            raise ValueError("cp_scale must be >= 0")
        if self.separation_d - 2 * self.half_split_delta <= 0:
            raise ValueError("branches touch: separation_d - 2*half_split_delta <= 0")

    _JSON_FIELDS = ("mass", "separation_d", "half_split_delta", "trap_omega",
                    "mean_occupation_nbar", "dephasing_gamma", "sphere_radius_R",
                    "permittivity_eps", "gravity_on", "cp_scale")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioParams":
        unknown = set(data) - set(cls._JSON_FIELDS)
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioParams":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self._JSON_FIELDS}

    def with_hypothesis(self, gravity_on: bool, cp_scale: float | None = None) -> "ScenarioParams":
        """Copy with the interaction flags of a hypothesis."""
        kwargs = {"gravity_on": gravity_on}
        if cp_scale is not None:
            kwargs["cp_scale"] = cp_scale
        return replace(self, **kwargs)


@dataclass(frozen=True)
class BranchSeparations:
    """Distances between the two particles for each branch pair."""

    values: dict

    def __getitem__(self, pair: str) -> float:
        return self.values[pair]

    @property
    def closest(self) -> float:
        return min(self.values.values())


def branch_separations(p: ScenarioParams) -> BranchSeparations:
    """d_LL = d_RR = d, d_LR = d - 2*delta (closest approach), d_RL = d + 2*delta."""
    d, delta = p.separation_d, p.half_split_delta
    return BranchSeparations({
        "LL": d, "LR": d - 2 * delta, "RL": d + 2 * delta, "RR": d,
    })


@dataclass(frozen=True)
class CouplingTensor:
    """Differences of inverse separations Q^(n)[ab, mn] = 1/d_ab^n - 1/d_mn^n,
    indexed by PAIRS order; antisymmetric with zero diagonal."""

    order: int
    values: np.ndarray

    def __getitem__(self, pairs) -> float:
        ab, mn = pairs
        return float(self.values[PAIRS.index(ab), PAIRS.index(mn)])

    @property
    def fastest(self) -> float:
        return self[FASTEST_PAIR]


def coupling_tensor(p: ScenarioParams, n: int) -> CouplingTensor:
    if n < 1:
        raise ValueError("order must be >= 1")
    seps = branch_separations(p)
    inv = np.array([1.0 / seps[pair] ** n for pair in PAIRS])
    return CouplingTensor(n, inv[:, None] - inv[None, :])


def q_components(p: ScenarioParams, n: int) -> np.ndarray:
    """The three independent components (LR-LL, LR-RL, LL-RL) of Q^(n).

    Used to check that couplings with different power laws are not
    proportional, so no rescaling of one coupling can mimic another.
    """
    q = coupling_tensor(p, n)
    return np.array([q[("LR", "LL")], q[("LR", "RL")], q[("LL", "RL")]])


def cp_coupling(p: ScenarioParams) -> float:
    """Casimir-Polder coupling alpha(R, eps) in J m^7, scaled by cp_scale.

    alpha = ((eps-1)/(eps+2))^2 * 23 hbar c R^6 / (4 pi); the potential between
    the spheres at separation r is -alpha / r^7.
    """
    c = p.constants
    eps, R = p.permittivity_eps, p.sphere_radius_R
    return ((eps - 1) / (eps + 2)) ** 2 * 23 * c.hbar * c.c * R ** 6 / (4 * np.pi) * p.cp_scale


class PhaseRates(NamedTuple):
    """Signed phase-accumulation rates of the two cross pairs, in rad/s."""

    omega_lr: float
    omega_rl: float


def phase_rates(p: ScenarioParams) -> PhaseRates:
    """omega_mn = [gravity_on * G m^2 (1/d_mn - 1/d) + alpha (1/d_mn^7 - 1/d^7)] / hbar.

    The closest pair (LR) gets the large positive rate; LL and RR pairs have
    zero rate by construction (their separation is d).
    """
    c = p.constants
    seps = branch_separations(p)
    d = p.separation_d
    grav = c.G * p.mass ** 2 if p.gravity_on else 0.0
    alpha = cp_coupling(p)

    def rate(pair):
        dm = seps[pair]
        return (grav * (1 / dm - 1 / d) + alpha * (1 / dm ** 7 - 1 / d ** 7)) / c.hbar

    return PhaseRates(rate("LR"), rate("RL"))


def spin_state(p: ScenarioParams, tau: float) -> np.ndarray:
    """Two-qubit spin state after free fall of duration ``tau``.

    The undamped state is the projector onto
    (|00> + e^{i phi_RL}|01> + e^{i phi_LR}|10> + |11>)/2 with
    phi_mn = omega_mn * tau; dephasing at rate gamma damps coherences by
    e^{-gamma tau} per mismatched qubit.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    w = phase_rates(p)
    amps = np.array([1.0,
                     np.exp(1j * w.omega_rl * tau),
                     np.exp(1j * w.omega_lr * tau),
                     1.0]) / 2.0
    rho = np.outer(amps, amps.conj())
    e1 = np.exp(-p.dephasing_gamma * tau)
    e2 = e1 * e1
    damp = np.array([[1, e1, e1, e2],
                     [e1, 1, e2, e1],
                     [e1, e2, 1, e1],
                     [e2, e1, e1, 1]])
    return rho * damp


@dataclass(frozen=True)
class PEAReport:
    """Corrections to treating the branches as point particles, for the
    fastest branch pair at a given fall time.

    ``phase_correction`` is the G^2 m^3 tau^3 |Q^(4)| / 6 hbar phase (rad);
    the decoherence factors are exp(-|theta|^2) at zero temperature and
    exp(-(nbar/2 + 1)|theta|^2) for an initial thermal state.
    """

    theta_magnitude: float
    phase_correction: float
    decoherence_factor_zeroT: float
    decoherence_factor_thermal: float
    kappa: float


def pea_corrections(p: ScenarioParams, tau: float) -> PEAReport:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    c = p.constants
    q2 = abs(coupling_tensor(p, 2).fastest)
    q4 = abs(coupling_tensor(p, 4).fastest)
    m, omega = p.mass, p.trap_omega
    phase_corr = c.G ** 2 * m ** 3 * tau ** 3 * q4 / (6 * c.hbar)
    # |theta|^2 = (G m Q2 tau)^2/2 * [(tau^2/4)(m w/hbar) + m/(hbar w)]
    theta_sq = (c.G * m * q2 * tau) ** 2 / 2 * (
        (tau ** 2 / 4) * (m * omega / c.hbar) + m / (c.hbar * omega))
    kappa = p.half_split_delta * np.sqrt(m * omega / (2 * c.hbar))
    return PEAReport(
        theta_magnitude=float(np.sqrt(theta_sq)),
        phase_correction=float(phase_corr),
        decoherence_factor_zeroT=float(np.exp(-theta_sq)),
        decoherence_factor_thermal=float(np.exp(-(p.mean_occupation_nbar / 2 + 1) * theta_sq)),
        kappa=float(kappa),
    )


class FrequencyReadings(NamedTuple):
    """Angular interaction rates (s^-1) of the fastest branch pair."""

    gravity: float
    casimir_polder: float


def frequency_readings(p: ScenarioParams) -> FrequencyReadings:
    c = p.constants
    q1 = abs(coupling_tensor(p, 1).fastest)
    q7 = abs(coupling_tensor(p, 7).fastest)
    grav = c.G * p.mass ** 2 * q1 / c.hbar if p.gravity_on else 0.0
    return FrequencyReadings(grav, cp_coupling(p) * q7 / c.hbar)


def characteristic_time(p: ScenarioParams) -> float:
    """Time for the fastest pair's phase to reach one radian: 1/(omega_LR - omega_RL)."""
    w = phase_rates(p)
    total = w.omega_lr - w.omega_rl
    if total <= 0:
        raise ValueError("no interaction: fastest-pair rate is zero")
    return 1.0 / total
