"""Joint spectral intensity of cavity four-wave-mixing photon pairs.

Two pump photons in the mu = 0 mode convert into a signal/idler pair in
modes -mu / +mu. The per-pair generation probability is modeled as

    C(mu) = eta_mu * eta_-mu * sinc^2(dphi) *
            Integral dOmega |A_mu(w_p + Omega)|^2 |A_-mu(w_p - Omega)|^2

where |A_mu(w)|^2 = gamma_mu / ((gamma_mu/2)^2 + (w - w_mu)^2) is the
cavity Lorentzian intensity lineshape (peak 4/gamma, area 2*pi), and the
round-trip phase mismatch is

    dphi = Dint(mu)*tau + Dint(-mu)*tau + Gamma*P_p

with tau the cavity round-trip time and Gamma*P_p the pump self-phase
modulation offset. A narrow CW pump is the default (delta model); a
Lorentzian pump line adds an outer average over the pump lineshape.

The overlap integral runs over a window centered on the two Lorentzian
centers in Omega (the only place the integrand has mass - the centers sit
many thousands of linewidths away from Omega = 0) and wide enough that
the neglected 1/Omega^4 tails stay far below the requested tolerance.

All frequencies are angular (rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .dispersion import ModeLadder, integrated_dispersion
from .errors import (
    IncompleteLadderError,
    InsufficientDataError,
    IntegrationError,
    ParameterError,
    ValidationError,
)

__all__ = [
    "PumpLine",
    "NonlinearPhaseParams",
    "JsiDiagonal",
    "JsiMap",
    "lorentzian_density",
    "sinc_sq",
    "phase_mismatch",
    "pair_overlap",
    "jsi_diagonal",
    "jsi_map",
    "round_trip_time_from_fsr",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PumpLine:
    """Pump spectral line: center [rad/s], FWHM linewidth [rad/s], model.

    model "delta" treats the pump as monochromatic (linewidth ignored);
    model "lorentzian" averages over a normalized Lorentzian lineshape.
    """

    center: float
    linewidth: float = 0.0
    model: str = "delta"

    def __post_init__(self):
        if self.model not in ("delta", "lorentzian"):
            raise ParameterError(f"unknown pump model {self.model!r}")
        if self.linewidth < 0:
            raise ValidationError("pump linewidth must be >= 0")
        if self.model == "lorentzian" and not (self.linewidth > 0):
            raise ValidationError("lorentzian pump model needs a positive linewidth")


@dataclass(frozen=True)
class NonlinearPhaseParams:
    """Round-trip time tau [s] and self-phase-modulation term Gamma*P_p.

    kerr_coefficient is the phase per watt of intracavity pump power per
    round trip [rad/W]; only the product with intracavity_power [W] enters
    the phase mismatch.
    """

    round_trip_time: float
    kerr_coefficient: float = 0.0
    intracavity_power: float = 0.0

    def __post_init__(self):
        if not (self.round_trip_time > 0):
            raise ValidationError("round_trip_time must be > 0")
        if self.kerr_coefficient < 0:
            raise ValidationError("kerr_coefficient must be >= 0")
        if self.intracavity_power < 0:
            raise ValidationError("intracavity_power must be >= 0")

    @property
    def spm_phase(self) -> float:
        return self.kerr_coefficient * self.intracavity_power


def round_trip_time_from_fsr(d1: float) -> float:
    """Cavity round-trip time as the reciprocal of the angular FSR: 2*pi/D1."""
    if not (d1 > 0):
        raise ParameterError("d1 must be > 0")
    return _TWO_PI / d1


def lorentzian_density(omega, omega_mu: float, gamma_mu: float):
    """Cavity intensity lineshape gamma / ((gamma/2)^2 + (omega-omega_mu)^2).

    Peaks at 4/gamma on resonance, falls to half at omega_mu +- gamma/2,
    and integrates to 2*pi. Units 1/(rad/s); vectorized over omega.
    """
    if not (gamma_mu > 0):
        raise ParameterError("gamma must be > 0")
    omega = np.asarray(omega, dtype=float)
    out = gamma_mu / ((0.5 * gamma_mu) ** 2 + (omega - omega_mu) ** 2)
    return out if out.ndim else float(out)


def sinc_sq(x):
    """(sin x / x)^2 with the removable singularity sinc(0) = 1."""
    x = np.asarray(x, dtype=float)
    s = np.sinc(x / np.pi)
    out = s * s
    return out if out.ndim else float(out)


def phase_mismatch(
    mu: int, dint: dict[int, float], params: NonlinearPhaseParams
) -> float:
    """Round-trip phase mismatch Dint(mu)*tau + Dint(-mu)*tau + Gamma*P_p.

    Requires both +mu and -mu in the integrated-dispersion map; this
    function never interpolates missing modes.
    """
    if mu not in dint or -mu not in dint:
        missing = [m for m in (mu, -mu) if m not in dint]
        raise IncompleteLadderError(
            f"integrated dispersion is missing mode(s) {missing}"
        )
    return (dint[mu] + dint[-mu]) * params.round_trip_time + params.spm_phase


def _overlap_quadrature(
    gamma_plus: float,
    gamma_minus: float,
    delta: float,
    rtol: float,
    subdivision_limit: int,
) -> float:
    """Integral of the two Lorentzian intensity lineshapes over Omega.

    Evaluated in coordinates centered between the two peaks, which sit at
    +-delta/2 with delta = omega_+mu + omega_-mu - 2*omega_p (the energy
    mismatch). The window extends past both peaks by
    max(40, 400*(1+|delta|/gamma_mean)) linewidths so the discarded
    1/u^4 tails are orders of magnitude below rtol.
    """
    if not (0 < rtol <= 1e-3):
        raise ParameterError(f"quadrature tolerance must be in (0, 1e-3], got {rtol}")
    u_plus = 0.5 * delta
    u_minus = -0.5 * delta
    h_plus = 0.5 * gamma_plus
    h_minus = 0.5 * gamma_minus
    gamma_mean = 0.5 * (gamma_plus + gamma_minus)
    margin = max(gamma_plus, gamma_minus) * max(
        40.0, 400.0 * (1.0 + abs(delta) / gamma_mean)
    )
    lo = min(u_plus, u_minus) - margin
    hi = max(u_plus, u_minus) + margin

    def integrand(u):
        return (gamma_plus * gamma_minus) / (
            (h_plus**2 + (u - u_plus) ** 2) * (h_minus**2 + (u - u_minus) ** 2)
        )

    out = quad(
        integrand,
        lo,
        hi,
        points=[u_plus, u_minus],
        epsabs=0.0,
        epsrel=rtol,
        limit=subdivision_limit,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    achieved = abserr / abs(value) if value else np.inf
    if len(out) > 3 or achieved > rtol:
        raise IntegrationError(
            f"overlap quadrature reached relative error {achieved:.2e} "
            f"(requested {rtol:.2e})",
            achieved_tolerance=achieved,
        )
    return float(value)


def _require_pair(ladder: ModeLadder, mu: int) -> tuple[float, float, float, float]:
    for m in (mu, -mu):
        if m not in ladder.entries:
            raise IncompleteLadderError(f"ladder is missing mode {m}")
        if m not in ladder.linewidths:
            raise IncompleteLadderError(f"ladder is missing the linewidth of mode {m}")
    return (
        ladder.entries[mu],
        ladder.entries[-mu],
        ladder.linewidths[mu],
        ladder.linewidths[-mu],
    )


def pair_overlap(
    mu: int,
    ladder: ModeLadder,
    pump: PumpLine,
    rtol: float = 1e-6,
    subdivision_limit: int = 200,
) -> float:
    """Spectral overlap of the +mu and -mu lineshapes for a delta pump.

    Adaptive quadrature of
    Integral |A_mu(w_p+Omega)|^2 |A_-mu(w_p-Omega)|^2 dOmega to ``rtol``
    relative tolerance. Maximized when omega_mu + omega_-mu = 2*omega_p
    (energy conservation); a Lorentzian pump line is handled one level up
    in :func:`jsi_diagonal`.
    """
    if pump.model != "delta":
        raise ParameterError(
            "pair_overlap integrates a single pump frequency; use jsi_diagonal "
            "for a lorentzian pump model"
        )
    omega_plus, omega_minus, gamma_plus, gamma_minus = _require_pair(ladder, mu)
    delta = omega_plus + omega_minus - 2.0 * pump.center
    return _overlap_quadrature(
        gamma_plus, gamma_minus, delta, rtol, subdivision_limit
    )


def _pump_averaged_overlap(
    mu: int,
    ladder: ModeLadder,
    pump: PumpLine,
    rtol: float,
    subdivision_limit: int,
) -> float:
    """Overlap averaged over a normalized Lorentzian pump lineshape.

    Substituting omega_p = center + (linewidth/2)*tan(theta) absorbs the
    pump line into the measure: the average becomes (1/pi) times the
    overlap integrated over theta in (-pi/2, pi/2), with no truncated
    tails regardless of how narrow or wide the pump is.
    """
    omega_plus, omega_minus, gamma_plus, gamma_minus = _require_pair(ladder, mu)
    delta0 = omega_plus + omega_minus - 2.0 * pump.center
    half_pump = 0.5 * pump.linewidth
    inner_rtol = rtol / 10.0

    def integrand(theta):
        v = half_pump * np.tan(theta)
        overlap = _overlap_quadrature(
            gamma_plus, gamma_minus, delta0 - 2.0 * v, inner_rtol, subdivision_limit
        )
        return overlap / np.pi

    theta_peak = float(np.arctan(0.5 * delta0 / half_pump)) if delta0 else 0.0
    out = quad(
        integrand,
        -0.5 * np.pi,
        0.5 * np.pi,
        points=sorted({0.0, theta_peak}),
        epsabs=0.0,
        epsrel=rtol,
        limit=subdivision_limit,
        full_output=1,
    )
    value, abserr = out[0], out[1]
    achieved = abserr / abs(value) if value else np.inf
    if len(out) > 3 or achieved > rtol:
        raise IntegrationError(
            f"pump-averaged overlap reached relative error {achieved:.2e} "
            f"(requested {rtol:.2e})",
            achieved_tolerance=achieved,
        )
    return float(value)


@dataclass(frozen=True)
class JsiDiagonal:
    """Predicted pair intensity per mode pair, with its factor breakdown.

    ``entries`` maps mu >= 1 to the intensity C(mu); ``normalization`` is
    "raw" or "peak" (peak-normalized copies have max entry exactly 1).
    The overlap, sinc_sq and delta_phi maps record the individual factors
    so reports can show which term drives the shape.
    """

    entries: dict[int, float]
    normalization: str = "raw"
    channel_efficiencies: dict[int, float] = field(default_factory=dict)
    overlap: dict[int, float] = field(default_factory=dict)
    sinc_sq: dict[int, float] = field(default_factory=dict)
    delta_phi: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.normalization not in ("raw", "peak"):
            raise ParameterError(f"unknown normalization {self.normalization!r}")
        for mu, value in self.entries.items():
            if mu < 1:
                raise ValidationError("diagonal entries are indexed by mu >= 1")
            if value < 0:
                raise ValidationError(f"intensity at mu={mu} is negative")
        for mu, eta in self.channel_efficiencies.items():
            if not (0 < eta <= 1):
                raise ValidationError(
                    f"channel efficiency at mu={mu} must be in (0, 1], got {eta}"
                )
        if self.normalization == "peak" and self.entries:
            if max(self.entries.values()) != 1.0:
                raise ValidationError("peak-normalized diagonal must have max 1")

    @property
    def mus(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))

    def normalized(self) -> "JsiDiagonal":
        """Peak-normalized copy (max entry exactly 1)."""
        peak = max(self.entries.values())
        if peak <= 0:
            raise ValidationError("cannot peak-normalize an all-zero diagonal")
        scaled = {mu: v / peak for mu, v in self.entries.items()}
        return replace(self, entries=scaled, normalization="peak")


def jsi_diagonal(
    ladder: ModeLadder,
    pump: PumpLine | None = None,
    params: NonlinearPhaseParams | None = None,
    efficiencies: dict[int, float] | None = None,
    mus=None,
    rtol: float = 1e-6,
    subdivision_limit: int = 200,
) -> JsiDiagonal:
    """Evaluate C(mu) = eta_mu eta_-mu sinc^2(dphi) Overlap(mu) per mode pair.

    ``pump`` defaults to a delta line at the pump-mode frequency;
    ``params`` defaults to tau = 2*pi/D1 with D1 taken from the median
    adjacent ladder spacing and no self-phase modulation. ``mus`` defaults
    to every mu >= 1 with both signs present in the ladder.
    """
    if pump is None:
        pump = PumpLine(center=ladder.omega0)
    if params is None:
        spacings = np.diff([ladder.entries[m] for m in ladder.mus])
        if spacings.size == 0:
            raise InsufficientDataError("ladder too small to infer a round-trip time")
        params = NonlinearPhaseParams(
            round_trip_time=round_trip_time_from_fsr(float(np.median(spacings)))
        )
    if mus is None:
        mus = sorted(
            m
            for m in ladder.entries
            if m >= 1
            and -m in ladder.entries
            and m in ladder.linewidths
            and -m in ladder.linewidths
        )
        if not mus:
            raise InsufficientDataError(
                "ladder has no +-mu pairs with linewidths on both signs"
            )
    else:
        mus = sorted(int(m) for m in mus)
        for m in mus:
            _require_pair(ladder, m)

    efficiencies = dict(efficiencies or {})
    for mu, eta in efficiencies.items():
        if not (0 < eta <= 1):
            raise ValidationError(
                f"channel efficiency at mu={mu} must be in (0, 1], got {eta}"
            )

    # Any d1 gives the same dphi: the linear term cancels in
    # Dint(mu) + Dint(-mu), so the natural 2*pi/tau anchor is used.
    dint = integrated_dispersion(ladder, _TWO_PI / params.round_trip_time)

    entries: dict[int, float] = {}
    overlaps: dict[int, float] = {}
    sincs: dict[int, float] = {}
    dphis: dict[int, float] = {}
    for mu in mus:
        dphi = phase_mismatch(mu, dint, params)
        s2 = sinc_sq(dphi)
        if pump.model == "delta":
            ov = pair_overlap(mu, ladder, pump, rtol, subdivision_limit)
        else:
            ov = _pump_averaged_overlap(mu, ladder, pump, rtol, subdivision_limit)
        eta = efficiencies.get(mu, 1.0) * efficiencies.get(-mu, 1.0)
        entries[mu] = eta * s2 * ov
        overlaps[mu] = ov
        sincs[mu] = s2
        dphis[mu] = dphi
    return JsiDiagonal(
        entries=entries,
        normalization="raw",
        channel_efficiencies=efficiencies,
        overlap=overlaps,
        sinc_sq=sincs,
        delta_phi=dphis,
    )


@dataclass(frozen=True)
class JsiMap:
    """Rectangular (signal mu, idler mu) intensity matrix.

    matrix[i, j] is the intensity for signal mode mus[i] and idler mode
    mus[j]; phase-matched pairs live on the diagonal i == j, every other
    cell holds the accidental floor.
    """

    mus: tuple[int, ...]
    matrix: np.ndarray
    floor: float

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if self.floor < 0:
            raise ValidationError("floor must be >= 0")
        if mat.shape != (len(self.mus), len(self.mus)):
            raise ValidationError("matrix shape must be (len(mus), len(mus))")
        if np.any(mat < self.floor):
            raise ValidationError("matrix entries must be >= floor")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "mus", tuple(int(m) for m in self.mus))


def jsi_map(diagonal: JsiDiagonal, floor: float = 0.0) -> JsiMap:
    """Embed a diagonal into a square map with a uniform accidental floor."""
    if floor < 0:
        raise ParameterError("floor must be >= 0")
    mus = diagonal.mus
    n = len(mus)
    matrix = np.full((n, n), float(floor))
    for i, mu in enumerate(mus):
        matrix[i, i] = diagonal.entries[mu] + floor
    return JsiMap(mus=mus, matrix=matrix, floor=float(floor))
