"""Resonance-dip detection, Lorentzian fitting, Q factors and FSR.

The measured quantity is normalized transmission T(lam); every cavity
resonance shows up as a dip

    T(lam) = B * (1 - d * (dl/2)^2 / ((lam - lam0)^2 + (dl/2)^2))

with center lam0, full width at half depth dl, extinction depth d and
local baseline B. Dips are located against a rolling-median baseline,
fitted one window at a time by damped least squares with the analytic
Jacobian, and summarized as loaded Q factors (lam0/dl) and per-pair free
spectral ranges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as _C_LIGHT
from scipy.ndimage import median_filter
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .errors import (
    FitFailureError,
    InsufficientDataError,
    ParameterError,
    RejectedFitError,
    ValidationError,
)
from .spectra import SpectrumTrace

__all__ = [
    "ResonanceDip",
    "ResonanceSet",
    "QSummary",
    "quality_factor",
    "detect_dips",
    "fit_lorentzian_dip",
    "free_spectral_range",
    "q_statistics",
    "analyze_trace",
]


def quality_factor(center_wavelength_nm: float, fwhm_wavelength_pm: float) -> float:
    """Loaded quality factor Q = lam0 / dlam.

    Both arguments must be positive; the ratio is taken with both lengths
    expressed in pm, so Q is exactly center/width.
    """
    if not (center_wavelength_nm > 0):
        raise ParameterError(
            f"center wavelength must be > 0, got {center_wavelength_nm}"
        )
    if not (fwhm_wavelength_pm > 0):
        raise ParameterError(f"fwhm must be > 0, got {fwhm_wavelength_pm}")
    return center_wavelength_nm * 1e3 / fwhm_wavelength_pm


@dataclass(frozen=True)
class ResonanceDip:
    """One fitted Lorentzian dip.

    Units: center_wavelength [nm], center_frequency [Hz],
    fwhm_wavelength [pm], fwhm_frequency [Hz]; depth, q_factor and
    fit_residual (RMS of fit residuals) are dimensionless.
    """

    center_wavelength: float
    center_frequency: float
    fwhm_wavelength: float
    fwhm_frequency: float
    depth: float
    q_factor: float
    fit_residual: float

    def __post_init__(self):
        if not (self.fwhm_wavelength > 0):
            raise ValidationError("fwhm_wavelength must be > 0")
        if not (0 < self.depth <= 1):
            raise ValidationError(f"depth must be in (0, 1], got {self.depth}")

    @classmethod
    def from_wavelength_fit(
        cls,
        center_wavelength_nm: float,
        fwhm_wavelength_pm: float,
        depth: float,
        fit_residual: float = 0.0,
    ) -> "ResonanceDip":
        """Build a dip from wavelength-domain fit parameters.

        Derives center frequency (c/lam0), the first-order FWHM frequency
        conversion f0 * dlam / lam0, and the loaded Q.
        """
        f0 = _C_LIGHT / (center_wavelength_nm * 1e-9)
        return cls(
            center_wavelength=center_wavelength_nm,
            center_frequency=f0,
            fwhm_wavelength=fwhm_wavelength_pm,
            fwhm_frequency=f0 * (fwhm_wavelength_pm * 1e-3) / center_wavelength_nm,
            depth=depth,
            q_factor=quality_factor(center_wavelength_nm, fwhm_wavelength_pm),
            fit_residual=fit_residual,
        )


@dataclass(frozen=True)
class QSummary:
    """Max, mean and histogram of the fitted Q factors."""

    max: float
    mean: float
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class ResonanceSet:
    """Fitted dips sorted by wavelength with derived FSR and Q statistics."""

    dips: tuple[ResonanceDip, ...]
    fsr_hz: tuple[float, ...]
    q_summary: QSummary

    @classmethod
    def from_dips(cls, dips, q_bin_width: float = 1e5) -> "ResonanceSet":
        ordered = tuple(sorted(dips, key=lambda d: d.center_wavelength))
        if not ordered:
            raise InsufficientDataError("a resonance set needs at least one dip")
        centers = np.array([d.center_wavelength for d in ordered])
        if np.any(np.diff(centers) <= 0):
            raise ValidationError("dips must have distinct center wavelengths")
        # wavelength ascending means frequency descending, so adjacent
        # differences f_i - f_{i+1} are the (positive) per-pair FSRs
        freqs = np.array([d.center_frequency for d in ordered])
        fsr = tuple(float(v) for v in (freqs[:-1] - freqs[1:]))
        return cls(
            dips=ordered,
            fsr_hz=fsr,
            q_summary=_q_summary([d.q_factor for d in ordered], q_bin_width),
        )

    def __len__(self) -> int:
        return len(self.dips)


def _q_summary(qs, bin_width: float) -> QSummary:
    if not (bin_width > 0):
        raise ParameterError(f"bin width must be > 0, got {bin_width}")
    qs = np.asarray(qs, dtype=float)
    lo = np.floor(qs.min() / bin_width) * bin_width
    hi = np.ceil(qs.max() / bin_width) * bin_width
    if hi <= lo:
        hi = lo + bin_width
    nbins = int(round((hi - lo) / bin_width))
    counts, edges = np.histogram(qs, bins=nbins, range=(lo, hi))
    return QSummary(
        max=float(qs.max()),
        mean=float(qs.mean()),
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(n) for n in counts),
    )


def q_statistics(resonance_set: ResonanceSet, bin_width: float = 1e5) -> QSummary:
    """Exact max/mean over fitted Qs plus a histogram with the given bin width."""
    if len(resonance_set) < 1:
        raise InsufficientDataError("q_statistics needs at least one dip")
    return _q_summary([d.q_factor for d in resonance_set.dips], bin_width)


def free_spectral_range(
    resonance_set: ResonanceSet,
    wavelength_window_nm: tuple[float, float] | None = None,
) -> tuple[np.ndarray, float]:
    """Per-adjacent-pair FSRs [Hz] and their mean over a wavelength window.

    The window selects pairs by the midpoint of their two dip centers;
    ``None`` averages every pair.
    """
    if len(resonance_set) < 2:
        raise InsufficientDataError("free_spectral_range needs at least 2 dips")
    fsr = np.asarray(resonance_set.fsr_hz)
    if wavelength_window_nm is None:
        return fsr, float(fsr.mean())
    lo, hi = wavelength_window_nm
    centers = np.array([d.center_wavelength for d in resonance_set.dips])
    mid = 0.5 * (centers[:-1] + centers[1:])
    selected = fsr[(mid >= lo) & (mid <= hi)]
    if selected.size == 0:
        raise InsufficientDataError(
            f"no adjacent dip pairs inside window [{lo}, {hi}] nm"
        )
    return fsr, float(selected.mean())


def detect_dips(
    trace: SpectrumTrace,
    min_depth: float = 0.1,
    min_separation_pm: float = 50.0,
    expected_fwhm_pm: float = 1.0,
) -> list[tuple[int, int]]:
    """Locate candidate dip windows in a trace.

    The local baseline is a rolling median over 50x the expected FWHM,
    which rides over narrow dips but follows slow baseline drift. A sample
    qualifies as a dip center when its fractional depth below that
    baseline reaches ``min_depth``; centers closer than
    ``min_separation_pm`` are suppressed (strongest wins). Each returned
    half-open index window (start, stop) contains exactly one significant
    transmission minimum and the windows are disjoint and ordered.
    """
    if not (0 < min_depth < 1):
        raise ParameterError(f"min_depth must be in (0, 1), got {min_depth}")
    if not (min_separation_pm > 0):
        raise ParameterError("min_separation must be > 0")
    if not (expected_fwhm_pm > 0):
        raise ParameterError("expected_fwhm must be > 0")
    step_pm = trace.step_pm()
    if min_separation_pm < 2 * step_pm:
        raise ParameterError(
            f"min_separation {min_separation_pm} pm is below 2 grid steps "
            f"({2 * step_pm:.3g} pm)"
        )

    tr = trace.transmission
    base_win = int(round(50.0 * expected_fwhm_pm / step_pm))
    base_win = max(3, base_win | 1)  # odd size
    baseline = median_filter(tr, size=min(base_win, tr.size), mode="nearest")
    with np.errstate(divide="ignore", invalid="ignore"):
        depth_frac = np.where(baseline > 0, (baseline - tr) / baseline, 0.0)

    distance = max(1, int(round(min_separation_pm / step_pm)))
    peaks, _ = find_peaks(depth_frac, height=min_depth, distance=distance)
    if peaks.size == 0:
        return []

    windows: list[tuple[int, int]] = []
    n = tr.size
    for k, p in enumerate(peaks):
        level = 0.5 * depth_frac[p]
        left = p
        while left > 0 and depth_frac[left - 1] > level:
            left -= 1
        right = p
        while right < n - 1 and depth_frac[right + 1] > level:
            right += 1
        width = max(1, right - left)  # ~FWHM in samples
        half_extent = max(4, 8 * width)
        start = p - half_extent
        stop = p + half_extent + 1
        # stay clear of neighboring candidates and the array edges
        if k > 0:
            start = max(start, (peaks[k - 1] + p) // 2 + 1)
        if k + 1 < peaks.size:
            stop = min(stop, (p + peaks[k + 1]) // 2)
        start = max(0, start)
        stop = min(n, stop)
        if stop - start >= 5:
            windows.append((int(start), int(stop)))
    return windows


def _dip_residual_and_jac(x_pm: np.ndarray, tr: np.ndarray):
    """Residual and Jacobian closures for the dip model.

    Parameters are (u, w, d, B): center offset [pm], FWHM [pm], depth,
    baseline. Model: B * (1 - d * h^2 / ((x-u)^2 + h^2)) with h = w/2.
    """

    def residual(p):
        u, w, d, B = p
        h = 0.5 * w
        L = h * h / ((x_pm - u) ** 2 + h * h)
        return B * (1.0 - d * L) - tr

    def jac(p):
        u, w, d, B = p
        h = 0.5 * w
        dx = x_pm - u
        q = dx * dx + h * h
        L = h * h / q
        J = np.empty((x_pm.size, 4))
        J[:, 0] = -B * d * 2.0 * dx * h * h / (q * q)
        J[:, 1] = -B * d * h * dx * dx / (q * q)
        J[:, 2] = -B * L
        J[:, 3] = 1.0 - d * L
        return J

    return residual, jac


def fit_lorentzian_dip(
    trace: SpectrumTrace,
    window: tuple[int, int],
    max_evaluations: int = 200,
    xtol: float = 1e-10,
) -> ResonanceDip:
    """Least-squares Lorentzian fit of one dip window.

    Initialized from the window minimum (center), the half-depth crossing
    width (FWHM) and the window median (baseline); solved by damped least
    squares (MINPACK Levenberg-Marquardt) with the analytic Jacobian.
    Converged means relative parameter change below ``xtol`` within
    ``max_evaluations`` function evaluations.

    Raises
    ------
    RejectedFitError
        Window has no interior minimum, or the converged parameters are
        unphysical (width <= 0, depth outside (0, 1], baseline <= 0, or
        center outside the window).
    FitFailureError
        The solver stopped without meeting any convergence criterion;
        carries the last RMS residual.
    """
    start, stop = window
    wl = trace.wavelength_nm[start:stop]
    tr = trace.transmission[start:stop]
    if wl.size < 5:
        raise ParameterError(
            f"fit window needs at least 5 samples, got {wl.size}"
        )
    imin = int(np.argmin(tr))
    if imin == 0 or imin == wl.size - 1:
        raise RejectedFitError(
            "window has no interior transmission minimum (monotone data?)"
        )

    lam_ref = float(wl[imin])
    x_pm = (wl - lam_ref) * 1e3
    baseline0 = float(np.median(tr))
    if baseline0 <= 0:
        baseline0 = max(float(tr.max()), 1e-6)
    depth0 = float(np.clip(1.0 - tr[imin] / baseline0, 1e-3, 1.0))

    # half-depth crossings around the minimum
    level = baseline0 - 0.5 * (baseline0 - tr[imin])
    below = tr < level
    left = imin
    while left > 0 and below[left - 1]:
        left -= 1
    right = imin
    while right < wl.size - 1 and below[right + 1]:
        right += 1
    fwhm0 = float(x_pm[right] - x_pm[left])
    if fwhm0 <= 0:
        fwhm0 = float(x_pm[-1] - x_pm[0]) / 10.0

    residual, jac = _dip_residual_and_jac(x_pm, tr)
    result = least_squares(
        residual,
        x0=np.array([0.0, fwhm0, depth0, baseline0]),
        jac=jac,
        method="lm",
        xtol=xtol,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=max_evaluations,
    )
    rms = float(np.sqrt(np.mean(result.fun**2)))
    if result.status <= 0:
        raise FitFailureError(
            f"dip fit did not converge in {max_evaluations} evaluations "
            f"(rms residual {rms:.3e})",
            last_residual=rms,
        )
    u, fwhm_pm, depth, baseline = (float(v) for v in result.x)
    if fwhm_pm <= 0:
        raise RejectedFitError(f"fitted width {fwhm_pm:.3g} pm is not positive")
    if not (0 < depth <= 1):
        raise RejectedFitError(f"fitted depth {depth:.3g} outside (0, 1]")
    if baseline <= 0:
        raise RejectedFitError(f"fitted baseline {baseline:.3g} is not positive")
    if not (x_pm[0] <= u <= x_pm[-1]):
        raise RejectedFitError("fitted center fell outside the window")

    return ResonanceDip.from_wavelength_fit(
        center_wavelength_nm=lam_ref + u * 1e-3,
        fwhm_wavelength_pm=fwhm_pm,
        depth=depth,
        fit_residual=rms,
    )


def analyze_trace(
    trace: SpectrumTrace,
    min_depth: float = 0.1,
    min_separation_pm: float = 50.0,
    expected_fwhm_pm: float = 1.0,
    skip_failed_fits: bool = False,
) -> ResonanceSet:
    """Detect and fit every dip in a trace.

    With ``skip_failed_fits`` windows whose fit is rejected or fails are
    dropped instead of raising; useful on noisy sweeps.
    """
    windows = detect_dips(trace, min_depth, min_separation_pm, expected_fwhm_pm)
    dips = []
    for win in windows:
        try:
            dips.append(fit_lorentzian_dip(trace, win))
        except (RejectedFitError, FitFailureError):
            if not skip_failed_fits:
                raise
    if not dips:
        raise InsufficientDataError("no dips could be fitted in this trace")
    return ResonanceSet.from_dips(dips)
