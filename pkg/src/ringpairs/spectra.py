"""Transmission-spectrum ingest and synthesis.

A :class:`SpectrumTrace` is the raw input of the whole pipeline: sampled
normalized transmission versus wavelength, as produced by a swept tunable
laser and a power meter. Traces are loaded from two-column CSV files or
synthesized from a :class:`SyntheticSpec`, a declarative description of a
device as a set of Lorentzian dips on a constant baseline:

    T(lam) = baseline * (1 - sum_k d_k * (w_k/2)^2 / ((lam - c_k)^2 + (w_k/2)^2))

with centers c_k in nm, full widths w_k in pm and extinction depths d_k in
(0, 1]. The synthetic generator is deliberately the same closed form the
resonance fitter assumes, so generated traces double as ground truth for
round-trip tests of the fitting pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateAbscissaError,
    MalformedInputError,
    ParameterError,
    ValidationError,
)

__all__ = [
    "SpectrumTrace",
    "SyntheticSpec",
    "load_spectrum",
    "save_spectrum",
    "generate_synthetic",
    "lorentzian_dip_model",
]


@dataclass(frozen=True)
class SpectrumTrace:
    """Sampled transmission versus wavelength.

    Parameters
    ----------
    wavelength_nm : ndarray
        Strictly increasing sample wavelengths [nm], length >= 2.
    transmission : ndarray
        Normalized transmitted power, finite and >= 0, same length.
    meta : dict
        Free-form annotations (source file, sweep range, device id).
    """

    wavelength_nm: np.ndarray
    transmission: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        tr = np.asarray(self.transmission, dtype=float)
        if wl.ndim != 1 or tr.ndim != 1:
            raise ValidationError("wavelength and transmission must be 1-D arrays")
        if wl.size != tr.size:
            raise ValidationError(
                f"array length mismatch: {wl.size} wavelengths vs {tr.size} transmissions"
            )
        if wl.size < 2:
            raise ValidationError("a trace needs at least 2 samples")
        if not np.all(np.isfinite(wl)):
            raise ValidationError("wavelength array contains non-finite values")
        if not np.all(np.isfinite(tr)):
            raise ValidationError("transmission array contains non-finite values")
        if np.any(np.diff(wl) <= 0):
            if np.any(np.diff(wl) == 0) or np.unique(wl).size != wl.size:
                raise DuplicateAbscissaError("duplicate wavelength samples in trace")
            raise ValidationError("wavelength array must be strictly increasing")
        if np.any(tr < 0):
            raise ValidationError("transmission values must be >= 0")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "transmission", tr)

    def __len__(self) -> int:
        return int(self.wavelength_nm.size)

    @property
    def span_nm(self) -> tuple[float, float]:
        return float(self.wavelength_nm[0]), float(self.wavelength_nm[-1])

    def step_pm(self) -> float:
        """Median sample spacing [pm]."""
        return float(np.median(np.diff(self.wavelength_nm)) * 1e3)


@dataclass(frozen=True)
class SyntheticSpec:
    """Declarative description of a synthetic device sweep.

    Fields
    ------
    resonances : sequence of (center_nm, fwhm_pm, depth)
        Lorentzian dips; every fwhm > 0, every depth in (0, 1], every
        center inside the grid span.
    baseline : float
        Constant transmission level, > 0.
    noise_sigma : float
        Standard deviation of additive Gaussian noise, >= 0.
    grid : (start_nm, stop_nm, samples)
    seed : int
        Seed for the noise generator; generation is deterministic given it.
    """

    resonances: tuple[tuple[float, float, float], ...]
    baseline: float = 1.0
    noise_sigma: float = 0.0
    grid: tuple[float, float, int] = (1480.0, 1640.0, 160001)
    seed: int = 0

    def __post_init__(self):
        res = tuple(
            (float(c), float(w), float(d)) for c, w, d in self.resonances
        )
        object.__setattr__(self, "resonances", res)
        start, stop, count = self.grid
        start, stop, count = float(start), float(stop), int(count)
        object.__setattr__(self, "grid", (start, stop, count))
        if not (stop > start):
            raise ValidationError("grid stop must exceed grid start")
        if count < 2:
            raise ValidationError("grid needs at least 2 samples")
        if not (self.baseline > 0):
            raise ValidationError("baseline must be > 0")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be >= 0")
        for center, fwhm, depth in res:
            if not (fwhm > 0):
                raise ValidationError(f"resonance at {center} nm: fwhm must be > 0")
            if not (0 < depth <= 1):
                raise ValidationError(
                    f"resonance at {center} nm: depth must be in (0, 1], got {depth}"
                )
            if not (start <= center <= stop):
                raise ValidationError(
                    f"resonance center {center} nm outside grid span [{start}, {stop}] nm"
                )

    def wavelength_grid(self) -> np.ndarray:
        start, stop, count = self.grid
        return np.linspace(start, stop, count)

    def to_json(self) -> str:
        doc = {
            "resonances": [list(r) for r in self.resonances],
            "baseline": self.baseline,
            "noise_sigma": self.noise_sigma,
            "grid": list(self.grid),
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(
                f"invalid synthetic-spec JSON: {exc.msg}", line_number=exc.lineno
            ) from exc
        try:
            return cls(
                resonances=tuple(tuple(r) for r in doc["resonances"]),
                baseline=doc.get("baseline", 1.0),
                noise_sigma=doc.get("noise_sigma", 0.0),
                grid=tuple(doc.get("grid", (1480.0, 1640.0, 160001))),
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError) as exc:
            raise MalformedInputError(f"bad synthetic-spec fields: {exc}") from exc


def lorentzian_dip_model(
    wavelength_nm: np.ndarray,
    resonances,
    baseline: float = 1.0,
) -> np.ndarray:
    """Noiseless multi-dip transmission model evaluated on a wavelength axis.

    ``resonances`` is a sequence of (center_nm, fwhm_pm, depth) triples.
    """
    wl = np.asarray(wavelength_nm, dtype=float)
    total = np.zeros_like(wl)
    for center, fwhm_pm, depth in resonances:
        half_nm = 0.5 * fwhm_pm * 1e-3
        total += depth * half_nm**2 / ((wl - center) ** 2 + half_nm**2)
    return baseline * (1.0 - total)


def generate_synthetic(spec: SyntheticSpec) -> SpectrumTrace:
    """Synthesize a transmission trace from a :class:`SyntheticSpec`.

    Deterministic given ``spec.seed``. With ``noise_sigma == 0`` the trace
    equals the analytic dip model exactly at every grid point. Noise can
    push samples below zero; those are clamped at 0 (power readings are
    non-negative) and the clamp count is recorded in ``meta``.
    """
    wl = spec.wavelength_grid()
    model = lorentzian_dip_model(wl, spec.resonances, spec.baseline)
    if np.any(model < 0):
        raise ValidationError(
            "overlapping resonances drive the model transmission below zero; "
            "use smaller extinction depths"
        )
    meta = {
        "source": "synthetic",
        "seed": spec.seed,
        "noise_sigma": spec.noise_sigma,
        "resonance_count": len(spec.resonances),
    }
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        trace = model + rng.normal(0.0, spec.noise_sigma, wl.size)
        clipped = int(np.count_nonzero(trace < 0))
        if clipped:
            trace = np.maximum(trace, 0.0)
            meta["clipped_samples"] = clipped
    else:
        trace = model
    return SpectrumTrace(wavelength_nm=wl, transmission=trace, meta=meta)


def save_spectrum(trace: SpectrumTrace, path) -> None:
    """Write a trace as two-column CSV at full float precision.

    The written file reloads bitwise-identically through
    :func:`load_spectrum` (floats are printed with ``repr`` round-trip
    precision).
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("wavelength_nm,transmission\n")
        for wl, tr in zip(trace.wavelength_nm.tolist(), trace.transmission.tolist()):
            fh.write(f"{wl!r},{tr!r}\n")


def load_spectrum(path, format: str = "csv") -> SpectrumTrace:
    """Load and validate a transmission trace.

    CSV only: two numeric columns (wavelength_nm, transmission), optional
    header, '#'-prefixed comment lines skipped. Rows are sorted by
    wavelength if needed; duplicate wavelengths are rejected.
    """
    if format != "csv":
        raise ParameterError(
            f"unsupported spectrum format {format!r}; only 'csv' is supported"
        )
    wavelengths: list[float] = []
    transmissions: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise MalformedInputError(
                    f"{path}: line {lineno}: expected 2 comma-separated columns, "
                    f"got {len(parts)}",
                    line_number=lineno,
                )
            try:
                wl, tr = float(parts[0]), float(parts[1])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise MalformedInputError(
                    f"{path}: line {lineno}: non-numeric value {line!r}",
                    line_number=lineno,
                ) from None
            wavelengths.append(wl)
            transmissions.append(tr)
    wl_arr = np.asarray(wavelengths)
    tr_arr = np.asarray(transmissions)
    if wl_arr.size and np.any(np.diff(wl_arr) <= 0):
        order = np.argsort(wl_arr, kind="stable")
        wl_arr, tr_arr = wl_arr[order], tr_arr[order]
        if np.any(np.diff(wl_arr) == 0):
            dup = wl_arr[np.flatnonzero(np.diff(wl_arr) == 0)[0]]
            raise DuplicateAbscissaError(
                f"{path}: duplicate wavelength {dup!r} nm after sorting"
            )
    return SpectrumTrace(
        wavelength_nm=wl_arr, transmission=tr_arr, meta={"source": str(path)}
    )
