"""Report serialization for the pipeline stages.

All human-facing frequencies are ordinary (divided by 2*pi) and labeled
Hz; everything internal stays angular. JSON output is canonical so that
identical inputs produce byte-identical files: key order is fixed by
construction and floats are rounded to 12 significant digits before
encoding.
"""

from __future__ import annotations

import json

import numpy as np

from .coincidences import CorrelationReport
from .dispersion import DispersionFit, ModeLadder
from .errors import MalformedInputError
from .jsi import JsiDiagonal
from .resonances import ResonanceDip, ResonanceSet

__all__ = [
    "dumps_canonical",
    "write_json",
    "load_json",
    "resonance_report",
    "resonance_set_from_report",
    "dispersion_report",
    "ladder_from_report",
    "jsi_report",
    "correlation_report_doc",
]

_TWO_PI = 2.0 * np.pi
_SIG_DIGITS = 12


def _canon(obj):
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{_SIG_DIGITS}g}")
    return obj


def dumps_canonical(doc) -> str:
    """Serialize with fixed key order and 12-significant-digit floats."""
    return json.dumps(_canon(doc), indent=2, ensure_ascii=False) + "\n"


def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(doc))


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(
                f"{path}: invalid JSON: {exc.msg}", line_number=exc.lineno
            ) from exc


_DIP_FIELDS = (
    "center_wavelength",
    "center_frequency",
    "fwhm_wavelength",
    "fwhm_frequency",
    "depth",
    "q_factor",
    "fit_residual",
)


def resonance_report(rset: ResonanceSet, source: str | None = None) -> dict:
    """Resonance-analysis report: dips plus fsr and q_summary blocks."""
    doc = {
        "source": source,
        "dips": [
            {name: getattr(dip, name) for name in _DIP_FIELDS}
            for dip in rset.dips
        ],
        "fsr": {
            "per_pair_hz": list(rset.fsr_hz),
            "mean_hz": float(np.mean(rset.fsr_hz)) if rset.fsr_hz else None,
        },
        "q_summary": {
            "max": rset.q_summary.max,
            "mean": rset.q_summary.mean,
            "histogram": {
                "bin_edges": list(rset.q_summary.bin_edges),
                "counts": list(rset.q_summary.counts),
            },
            "mean_fwhm_hz": float(
                np.mean([d.fwhm_frequency for d in rset.dips])
            ),
        },
    }
    return doc


def resonance_set_from_report(doc: dict) -> ResonanceSet:
    try:
        dips = [ResonanceDip(**{k: d[k] for k in _DIP_FIELDS}) for d in doc["dips"]]
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"bad resonance report: {exc}") from exc
    return ResonanceSet.from_dips(dips)


def dispersion_report(
    ladder: ModeLadder,
    fit: DispersionFit,
    dint: dict[int, float],
    linewidth_crossover: int | None = None,
) -> dict:
    """Dispersion report; every frequency here is already divided by 2*pi."""
    doc = {
        "d1_hz": fit.d1 / _TWO_PI,
        "d2_hz": fit.d2 / _TWO_PI,
        "d3_hz": fit.d3 / _TWO_PI,
        "rms_residual_hz": fit.rms_residual / _TWO_PI,
        "mode_range": list(fit.mode_range),
        "fit_order": fit.fit_order,
        "dint": [
            {"mu": mu, "dint_hz": value / _TWO_PI}
            for mu, value in sorted(dint.items())
        ],
        "pump": {
            "mode_frequency_hz": ladder.omega0 / _TWO_PI,
            "mode_wavelength_nm": ladder.wavelength_nm(0),
        },
        "ladder": [
            {
                "mu": mu,
                "frequency_hz": ladder.entries[mu] / _TWO_PI,
                "linewidth_hz": ladder.linewidths.get(mu, 0.0) / _TWO_PI,
                "wavelength_nm": ladder.wavelength_nm(mu),
            }
            for mu in ladder.mus
        ],
    }
    if linewidth_crossover is not None:
        doc["linewidth_crossover_mu"] = linewidth_crossover
    return doc


def ladder_from_report(doc: dict) -> ModeLadder:
    try:
        entries = {
            int(row["mu"]): row["frequency_hz"] * _TWO_PI for row in doc["ladder"]
        }
        linewidths = {
            int(row["mu"]): row["linewidth_hz"] * _TWO_PI
            for row in doc["ladder"]
            if row.get("linewidth_hz", 0.0) > 0
        }
    except (KeyError, TypeError) as exc:
        raise MalformedInputError(f"bad dispersion report: {exc}") from exc
    return ModeLadder(entries=entries, linewidths=linewidths)


def jsi_report(
    diagonal: JsiDiagonal,
    pump_model: str,
    round_trip_time_s: float,
    spm_phase_rad: float,
    quadrature_rtol: float,
) -> dict:
    normalized = diagonal.normalized()
    return {
        "pump_model": pump_model,
        "round_trip_time_s": round_trip_time_s,
        "spm_phase_rad": spm_phase_rad,
        "quadrature_rtol": quadrature_rtol,
        "modes": [
            {
                "mu": mu,
                "c_raw": diagonal.entries[mu],
                "c_normalized": normalized.entries[mu],
                "sinc_sq": diagonal.sinc_sq[mu],
                "overlap": diagonal.overlap[mu],
                "delta_phi_rad": diagonal.delta_phi[mu],
            }
            for mu in diagonal.mus
        ],
    }


def correlation_report_doc(report: CorrelationReport, **extras) -> dict:
    doc = {
        "correlated_mus": list(report.correlated_mus),
        "total_pairs": report.total_pairs,
        "longest_continuous_run": report.longest_continuous_run,
        "signal_bandwidth_nm": report.signal_bandwidth_nm,
        "full_bandwidth_nm": report.full_bandwidth_nm,
        "threshold_cps": report.threshold_cps,
    }
    if report.optimistic_total_pairs is not None:
        doc["optimistic_total_pairs"] = report.optimistic_total_pairs
        doc["pessimistic_total_pairs"] = report.pessimistic_total_pairs
    doc.update(extras)
    return doc
