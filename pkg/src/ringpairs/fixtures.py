"""Reference fixtures: a synthetic device and a measured-style count table.

These are versioned, deterministic constructions used by the demos and
the test suite. The coincidence table is *derived*: it is built to
reproduce a set of published summary statistics for a 145-GHz silicon
nitride ring pumped at 1550.63 nm (mean accidental rate 10.5 cps at a
1 ns window, peak net coincidence rate 2.45e3 cps, pair 1 blocked by the
pump-rejection filter, pairs {2, 40, 41, 47} below the 5.61 cps
off-diagonal background, a pronounced sag around pair 20), not measured
mode by mode. Bump FIXTURE_VERSION when any construction changes.
"""

from __future__ import annotations

import numpy as np
from scipy.constants import c as _C_LIGHT

from .coincidences import ModePairCount
from .dispersion import ModeLadder
from .spectra import SyntheticSpec

__all__ = [
    "FIXTURE_VERSION",
    "REFERENCE_PUMP_NM",
    "REFERENCE_FSR_HZ",
    "REFERENCE_OFFDIAG_MAX_CPS",
    "reference_device_spec",
    "grid_ladder",
    "demo_coincidence_counts",
]

FIXTURE_VERSION = 1

REFERENCE_PUMP_NM = 1550.63
REFERENCE_FSR_HZ = 145e9
REFERENCE_OFFDIAG_MAX_CPS = 5.61

_TWO_PI = 2.0 * np.pi


def reference_device_spec(
    wl_start_nm: float = 1480.0,
    wl_stop_nm: float = 1640.0,
    fsr_hz: float = REFERENCE_FSR_HZ,
    pump_nm: float = REFERENCE_PUMP_NM,
    q_range: tuple[float, float] = (0.8e6, 1.6e6),
    depth_range: tuple[float, float] = (0.45, 0.9),
    step_pm: float = 0.2,
    baseline: float = 1.0,
    noise_sigma: float = 0.0,
    seed: int = 20,
    n_modes: int | None = None,
) -> SyntheticSpec:
    """Synthetic sweep of a ring with resonances on an exact frequency grid.

    Dips are placed at f_pump + k * fsr for every integer k whose
    wavelength falls inside the sweep (or the ``n_modes`` closest to the
    pump when given), with per-dip Q and depth drawn deterministically
    from ``seed``. The 0.2 pm default step keeps ~5+ samples across even
    the narrowest (Q ~ 1.6e6) dips.
    """
    f_pump = _C_LIGHT / (pump_nm * 1e-9)
    margin_nm = 0.25
    f_hi = _C_LIGHT / ((wl_start_nm + margin_nm) * 1e-9)
    f_lo = _C_LIGHT / ((wl_stop_nm - margin_nm) * 1e-9)
    k_min = int(np.ceil((f_lo - f_pump) / fsr_hz))
    k_max = int(np.floor((f_hi - f_pump) / fsr_hz))
    ks = np.arange(k_min, k_max + 1)
    if n_modes is not None:
        order = np.argsort(np.abs(ks))
        ks = np.sort(ks[order[:n_modes]])
    centers_nm = _C_LIGHT / (f_pump + ks * fsr_hz) * 1e9

    rng = np.random.default_rng(seed)
    qs = rng.uniform(q_range[0], q_range[1], ks.size)
    depths = rng.uniform(depth_range[0], depth_range[1], ks.size)
    fwhms_pm = centers_nm * 1e3 / qs

    resonances = tuple(
        (float(c), float(w), float(d))
        for c, w, d in zip(centers_nm, fwhms_pm, depths)
    )
    count = int(round((wl_stop_nm - wl_start_nm) / (step_pm * 1e-3))) + 1
    return SyntheticSpec(
        resonances=resonances,
        baseline=baseline,
        noise_sigma=noise_sigma,
        grid=(wl_start_nm, wl_stop_nm, count),
        seed=seed,
    )


def grid_ladder(
    n_modes: int = 47,
    d1: float = _TWO_PI * REFERENCE_FSR_HZ,
    d2: float = 0.0,
    d3: float = 0.0,
    pump_nm: float = REFERENCE_PUMP_NM,
    omega0: float | None = None,
    gamma: float = _TWO_PI * 132e6,
    gammas: dict[int, float] | None = None,
    displacements: dict[int, float] | None = None,
) -> ModeLadder:
    """Mode ladder on an analytic grid omega0 + mu*d1 + d2*mu^2/2 + d3*mu^3/6.

    ``displacements`` shifts individual modes (mu -> added rad/s), which
    is how measured-style irregularities are planted. ``gammas`` overrides
    the uniform linewidth per mode.
    """
    if omega0 is None:
        omega0 = _TWO_PI * _C_LIGHT / (pump_nm * 1e-9)
    displacements = displacements or {}
    gammas = gammas or {}
    entries: dict[int, float] = {}
    linewidths: dict[int, float] = {}
    for mu in range(-n_modes, n_modes + 1):
        omega = omega0 + mu * d1 + 0.5 * d2 * mu**2 + d3 * mu**3 / 6.0
        entries[mu] = omega + displacements.get(mu, 0.0)
        linewidths[mu] = gammas.get(mu, gamma)
    return ModeLadder(entries=entries, linewidths=linewidths)


def demo_coincidence_counts(
    t_c: float = 1e-9, accumulation_s: float = 10.0
) -> list[ModePairCount]:
    """Derived raw count table for mode pairs mu = 1..47 (see module docstring).

    Singles rates follow smooth ripples around 1.7e5 / 1.55e5 cps, scaled
    so the mean accidental rate N_s*N_i*t_c over all pairs is exactly
    10.5 cps. Raw coincidences are the designed net rates plus each
    pair's own accidentals, so subtracting ACC downstream recovers the
    designed diagonal: 0 at pair 1 (pump filter), below the 5.61 cps
    background at pairs {2, 40, 41, 47}, peak 2.45e3 cps at pair 3, and a
    sag around pair 20.

    Note: the published summaries also state CAR > 1 from pair 2 to 45,
    which is not jointly satisfiable with "pairs 2, 40, 41 below the
    off-diagonal background"; this table follows the classification rule.
    """
    mus = np.arange(1, 48)
    ns = 1.7e5 * (1.0 + 0.20 * np.cos(mus / 7.0))
    ni = 1.55e5 * (1.0 + 0.15 * np.sin(mus / 5.0 + 2.0))
    scale = np.sqrt(10.5 / (np.mean(ns * ni) * t_c))
    ns *= scale
    ni *= scale
    acc = ns * ni * t_c

    base = 2450.0 * np.exp(-(((mus - 3.0) / 18.0) ** 2)) + 9.0 * (
        1.0 - np.exp(-mus / 8.0)
    )
    sag = 1.0 - 0.7 * np.exp(-(((mus - 20.0) / 2.5) ** 2))
    net = base * sag
    pinned = {1: 0.0, 2: 4.2, 3: 2450.0, 40: 3.1, 41: 2.6, 47: 1.4}
    for mu, value in pinned.items():
        net[mu - 1] = value

    return [
        ModePairCount(
            mu=int(mu),
            cc_cps=float(net[i] + acc[i]),
            ns_cps=float(ns[i]),
            ni_cps=float(ni[i]),
            accumulation_s=accumulation_s,
        )
        for i, mu in enumerate(mus)
    ]
