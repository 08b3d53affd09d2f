"""Relative-mode ladder and integrated-dispersion fitting.

Resonance angular frequencies are indexed by a signed integer mu with
mu = 0 at the pump mode and omega strictly increasing with mu (higher mu
means higher frequency, shorter wavelength). The integrated dispersion

    Dint(mu) = omega_mu - (omega_0 + mu * D1)

measures the deviation from a perfectly linear frequency grid anchored at
the pump; fitting omega_mu against {mu, mu^2/2, mu^3/6, ...} with the
intercept pinned to the measured omega_0 yields D1 (angular FSR), D2, D3.

All frequencies in this module are angular (rad/s). Anything exported for
humans (reports, plots) is divided by 2*pi and labeled in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as _C_LIGHT

from .errors import (
    AmbiguousLadderError,
    IllConditionedFitError,
    InsufficientDataError,
    ParameterError,
    PumpNotResonantError,
    ValidationError,
)
from .resonances import ResonanceSet

__all__ = [
    "ModeLadder",
    "DispersionFit",
    "build_mode_ladder",
    "integrated_dispersion",
    "fit_dispersion",
    "linewidth_crossover_mu",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModeLadder:
    """Resonance angular frequencies indexed by relative mode number.

    Fields
    ------
    entries : dict[int, float]
        mu -> omega_mu [rad/s]; must contain mu = 0 and be strictly
        increasing in mu. Gaps (missing dips) are simply absent keys.
    linewidths : dict[int, float]
        mu -> gamma_mu (FWHM, rad/s) for the modes where it is known.
    provenance : dict[int, int]
        mu -> index of the source dip in the originating ResonanceSet.
    """

    entries: dict[int, float]
    linewidths: dict[int, float] = field(default_factory=dict)
    provenance: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise ValidationError("mode ladder has no entries")
        if 0 not in self.entries:
            raise ValidationError("mode ladder must contain the pump mode mu = 0")
        mus = sorted(self.entries)
        omegas = [self.entries[m] for m in mus]
        if any(b <= a for a, b in zip(omegas, omegas[1:])):
            raise ValidationError(
                "omega must be strictly increasing with mu "
                "(higher mu = higher frequency)"
            )
        for mu, gamma in self.linewidths.items():
            if not (gamma > 0):
                raise ValidationError(f"linewidth at mu={mu} must be > 0")
        object.__setattr__(self, "entries", dict(self.entries))
        object.__setattr__(self, "linewidths", dict(self.linewidths))
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def pump_mode(self) -> tuple[int, float]:
        return 0, self.entries[0]

    @property
    def omega0(self) -> float:
        return self.entries[0]

    @property
    def mus(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))

    def wavelength_nm(self, mu: int) -> float:
        return _TWO_PI * _C_LIGHT / self.entries[mu] * 1e9

    def frequency_hz(self, mu: int) -> float:
        return self.entries[mu] / _TWO_PI

    def __len__(self) -> int:
        return len(self.entries)


def build_mode_ladder(
    resonance_set: ResonanceSet, pump_wavelength_nm: float
) -> ModeLadder:
    """Assign relative mode indices to fitted dips around the pump.

    mu = 0 goes to the dip nearest ``pump_wavelength_nm`` (which must lie
    within half a local FSR, estimated as the median adjacent spacing of
    the ~5 modes around the pump). Every other dip gets
    mu = round((omega - omega_0) / FSR_local); missing dips leave holes in
    the index set rather than shifting their neighbors.
    """
    if len(resonance_set) < 1:
        raise InsufficientDataError("cannot build a ladder from an empty set")
    # dips are wavelength-ascending; reverse to frequency-ascending
    dips = list(enumerate(resonance_set.dips))[::-1]
    omegas = np.array([_TWO_PI * d.center_frequency for _, d in dips])
    omega_pump = _TWO_PI * _C_LIGHT / (pump_wavelength_nm * 1e-9)

    i0 = int(np.argmin(np.abs(omegas - omega_pump)))
    if omegas.size >= 2:
        spacings = np.diff(omegas)
        lo = max(0, i0 - 5)
        local = spacings[lo : i0 + 5]
        fsr_local = float(np.median(local if local.size else spacings))
        if abs(omegas[i0] - omega_pump) > 0.5 * fsr_local:
            raise PumpNotResonantError(
                f"nearest dip is {abs(omegas[i0] - omega_pump) / _TWO_PI / 1e9:.3f} GHz "
                f"from the pump, more than half the local FSR "
                f"({fsr_local / _TWO_PI / 1e9:.3f} GHz)"
            )
    else:
        fsr_local = None  # single dip: accept it as the pump mode

    omega0 = float(omegas[i0])
    entries: dict[int, float] = {}
    linewidths: dict[int, float] = {}
    provenance: dict[int, int] = {}
    assigned: dict[int, int] = {}
    collisions = []
    for k, (dip_index, dip) in enumerate(dips):
        omega = float(omegas[k])
        mu = 0 if k == i0 else int(round((omega - omega0) / fsr_local))
        if mu in assigned:
            collisions.append((mu, assigned[mu], dip_index))
            continue
        assigned[mu] = dip_index
        entries[mu] = omega
        linewidths[mu] = _TWO_PI * dip.fwhm_frequency
        provenance[mu] = dip_index
    if collisions:
        detail = ", ".join(
            f"mu={mu}: dips #{a} and #{b}" for mu, a, b in collisions
        )
        raise AmbiguousLadderError(
            f"multiple dips round to the same mode index ({detail})",
            collisions=collisions,
        )
    return ModeLadder(entries=entries, linewidths=linewidths, provenance=provenance)


def integrated_dispersion(ladder: ModeLadder, d1: float) -> dict[int, float]:
    """Dint(mu) = omega_mu - (omega_0 + mu * d1) for every ladder entry.

    Exact elementwise evaluation; Dint(0) is identically 0.
    """
    if not (d1 > 0):
        raise ParameterError(f"d1 must be > 0, got {d1}")
    omega0 = ladder.omega0
    return {mu: (omega - omega0) - mu * d1 for mu, omega in sorted(ladder.entries.items())}


@dataclass(frozen=True)
class DispersionFit:
    """Polynomial dispersion coefficients (all angular, rad/s).

    ``coefficients`` holds (D1, D2, ..., D_order); d1/d2/d3 are the
    conventional aliases, with d3 = 0 for order-2 fits.
    """

    d1: float
    d2: float
    d3: float
    rms_residual: float
    fit_order: int
    mode_range: tuple[int, int]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not (self.d1 > 0):
            raise ValidationError("fitted d1 must be > 0")
        if self.fit_order < 2:
            raise ValidationError("fit order must be >= 2")
        if self.rms_residual < 0:
            raise ValidationError("rms residual must be >= 0")

    def model_omega(self, omega0: float, mus) -> np.ndarray:
        """Fitted ladder omega_0 + sum_k D_k mu^k / k! at the given indices."""
        mus = np.asarray(mus, dtype=float)
        out = np.full_like(mus, float(omega0))
        fact = 1.0
        for k, coef in enumerate(self.coefficients, start=1):
            fact *= k
            out = out + coef * mus**k / fact
        return out

    def dint(self, mus) -> np.ndarray:
        """Fitted integrated dispersion sum_{k>=2} D_k mu^k / k!."""
        mus = np.asarray(mus, dtype=float)
        out = np.zeros_like(mus)
        fact = 1.0
        for k, coef in enumerate(self.coefficients, start=1):
            fact *= k
            if k >= 2:
                out = out + coef * mus**k / fact
        return out


def fit_dispersion(ladder: ModeLadder, order: int = 3) -> DispersionFit:
    """Least-squares fit of omega_mu against {mu, mu^2/2, ..., mu^order/order!}.

    The intercept is pinned to the measured pump frequency omega_0 (it is
    subtracted, not fitted), which is what anchors Dint at the pump and
    removes one degeneracy. Requires at least order + 2 entries spanning
    both signs of mu.
    """
    if order < 2:
        raise ParameterError(f"fit order must be >= 2, got {order}")
    mus = np.array(sorted(ladder.entries), dtype=float)
    nonzero = mus[mus != 0]
    if nonzero.size == 0 or nonzero.min() > 0 or nonzero.max() < 0:
        raise IllConditionedFitError(
            "dispersion fit needs modes on both sides of the pump"
        )
    if mus.size < order + 2:
        raise InsufficientDataError(
            f"order-{order} fit needs at least {order + 2} modes, got {mus.size}"
        )
    omega0 = ladder.omega0
    y = np.array([ladder.entries[int(m)] for m in mus]) - omega0

    columns = []
    fact = 1.0
    for k in range(1, order + 1):
        fact *= k
        columns.append(mus**k / fact)
    design = np.stack(columns, axis=1)
    # column scaling keeps lstsq's rank estimate honest across mu^k spans
    scale = np.linalg.norm(design, axis=0)
    if np.any(scale == 0):
        raise IllConditionedFitError("degenerate design column (all-zero powers)")
    coef_scaled, _, rank, _ = np.linalg.lstsq(design / scale, y, rcond=None)
    if rank < order:
        raise IllConditionedFitError(
            f"design matrix rank {rank} < order {order}; mode coverage is degenerate"
        )
    coef = coef_scaled / scale
    # extended precision: residuals are jitter-scale (maybe kHz) riding on
    # optical-scale omegas, where float64 dot products alone cost ~1e-10
    residuals = y.astype(np.longdouble) - design.astype(np.longdouble) @ coef.astype(
        np.longdouble
    )
    rms = float(np.sqrt(np.mean(residuals**2)))
    d1 = float(coef[0])
    if not (d1 > 0):
        raise IllConditionedFitError(f"fitted D1 is not positive ({d1:.3e} rad/s)")
    d2 = float(coef[1]) if order >= 2 else 0.0
    d3 = float(coef[2]) if order >= 3 else 0.0
    return DispersionFit(
        d1=d1,
        d2=d2,
        d3=d3,
        rms_residual=rms,
        fit_order=order,
        mode_range=(int(mus.min()), int(mus.max())),
        coefficients=tuple(float(v) for v in coef),
    )


def linewidth_crossover_mu(dint: dict[int, float], linewidth: float) -> int:
    """Largest m such that |Dint(mu)| <= linewidth for every |mu| <= m.

    Both arguments angular (rad/s). Answers "out to how many modes does
    the frequency mismatch stay within one cavity linewidth" without
    asserting it for any particular range; returns 0 when even |mu| = 1
    exceeds the linewidth.
    """
    if not (linewidth > 0):
        raise ParameterError("linewidth must be > 0")
    m = 0
    while True:
        nxt = m + 1
        if nxt not in dint and -nxt not in dint:
            return m
        for mu in (nxt, -nxt):
            if mu in dint and abs(dint[mu]) > linewidth:
                return m
        m = nxt
