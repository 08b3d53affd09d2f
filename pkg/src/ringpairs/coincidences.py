"""Coincidence counting statistics: ACC, CAR, loss budgets, classification.

Rates are in counts per second throughout. The accidental coincidence
rate for a coincidence window t_c is ACC = N_s * N_i * t_c; measured
coincidences are reported either raw or after ACC subtraction, and a mode
pair counts as correlated when its net coincidence rate exceeds the
largest off-diagonal (non-phase-matched) rate observed in the map.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .dispersion import ModeLadder
from .errors import (
    DegenerateBudgetError,
    IncompleteLadderError,
    InsufficientDataError,
    MalformedInputError,
    ParameterError,
    ValidationError,
)

__all__ = [
    "ModePairCount",
    "LossBudget",
    "SubtractedCount",
    "CorrelationReport",
    "accidental_cc",
    "subtract_acc",
    "car",
    "apply_loss_budget",
    "classify_correlated",
    "bandwidth_report",
    "attach_bandwidths",
    "read_counts_csv",
    "write_counts_csv",
]


@dataclass(frozen=True)
class ModePairCount:
    """Counting record for one (+mu, -mu) mode pair.

    ``cc_cps`` may be raw or ACC-subtracted; ``acc_subtracted`` says which.
    """

    mu: int
    cc_cps: float
    ns_cps: float
    ni_cps: float
    accumulation_s: float = 10.0
    acc_subtracted: bool = False

    def __post_init__(self):
        if self.mu < 1:
            raise ValidationError("mode pair index mu must be >= 1")
        for name in ("cc_cps", "ns_cps", "ni_cps"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if not (self.accumulation_s > 0):
            raise ValidationError("accumulation_s must be > 0")


def accidental_cc(ns_cps: float, ni_cps: float, t_c: float) -> float:
    """Accidental coincidence rate N_s * N_i * t_c."""
    if ns_cps < 0 or ni_cps < 0 or t_c < 0:
        raise ParameterError("rates and coincidence window must be >= 0")
    return ns_cps * ni_cps * t_c


class SubtractedCount(NamedTuple):
    cc_cps: float
    clamped: bool


def subtract_acc(raw_cc_cps: float, acc_cps: float) -> SubtractedCount:
    """Net coincidence rate max(raw - acc, 0); the clamp is flagged.

    Negative net rates are unphysical, so they clamp to zero, but the flag
    keeps the information for downstream statistics.
    """
    if raw_cc_cps < 0 or acc_cps < 0:
        raise ParameterError("rates must be >= 0")
    net = raw_cc_cps - acc_cps
    if net < 0:
        return SubtractedCount(0.0, True)
    return SubtractedCount(net, False)


def car(cc_cps: float, acc_cps: float) -> float:
    """Coincidence-to-accidental ratio cc / acc."""
    if cc_cps < 0 or acc_cps < 0:
        raise ParameterError("rates must be >= 0")
    if acc_cps == 0:
        raise ParameterError(
            "accidental rate is zero: CAR is infinite (division domain error)"
        )
    return cc_cps / acc_cps


@dataclass(frozen=True)
class LossBudget:
    """Per-channel detection loss: fiber facet, filter chain, detector.

    dB entries are losses and must be <= 0; detector_efficiency is a bare
    probability in (0, 1].
    """

    facet_db: float
    filter_chain_db: float
    detector_efficiency: float

    def __post_init__(self):
        if self.facet_db > 0 or self.filter_chain_db > 0:
            raise ValidationError("dB loss entries must be <= 0")
        if not (0 < self.detector_efficiency <= 1):
            raise ValidationError("detector_efficiency must be in (0, 1]")

    @property
    def total_efficiency(self) -> float:
        return 10.0 ** ((self.facet_db + self.filter_chain_db) / 10.0) * (
            self.detector_efficiency
        )

    @property
    def total_db(self) -> float:
        eta = self.total_efficiency
        if eta == 0:
            raise DegenerateBudgetError("total efficiency underflowed to zero")
        return 10.0 * np.log10(eta)


def apply_loss_budget(
    detected_cps: float, budget: LossBudget, direction: str
) -> float:
    """Convert between detected and on-chip generated rates.

    direction "detected_to_generated" divides by the total channel
    efficiency, "generated_to_detected" multiplies. For pair rates the
    caller applies this once per channel.
    """
    if detected_cps < 0:
        raise ParameterError("rate must be >= 0")
    eta = budget.total_efficiency
    if eta == 0:
        raise DegenerateBudgetError("total efficiency is zero; cannot convert rates")
    if direction == "detected_to_generated":
        return detected_cps / eta
    if direction == "generated_to_detected":
        return detected_cps * eta
    raise ParameterError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class CorrelationReport:
    """Which mode pairs are correlated, plus run and bandwidth summaries."""

    correlated_mus: tuple[int, ...]
    total_pairs: int
    longest_continuous_run: int
    threshold_cps: float
    signal_bandwidth_nm: float | None = None
    full_bandwidth_nm: float | None = None
    optimistic_total_pairs: int | None = None
    pessimistic_total_pairs: int | None = None

    def __post_init__(self):
        if self.total_pairs != len(self.correlated_mus):
            raise ValidationError("total_pairs must equal len(correlated_mus)")
        if self.longest_continuous_run > self.total_pairs:
            raise ValidationError("longest run cannot exceed total pairs")


def _longest_run(mus) -> int:
    best = run = 0
    prev = None
    for mu in sorted(mus):
        run = run + 1 if prev is not None and mu == prev + 1 else 1
        best = max(best, run)
        prev = mu
    return best


def classify_correlated(
    diagonal,
    offdiag_max_cps: float,
    threshold_uncertainty_cps: float = 0.0,
) -> CorrelationReport:
    """Classify mode pairs as correlated against the off-diagonal maximum.

    A pair is correlated iff its (ACC-subtracted) cc_cps strictly exceeds
    ``offdiag_max_cps``. A nonzero ``threshold_uncertainty_cps`` also
    reports the pair counts at threshold -/+ uncertainty (optimistic /
    pessimistic), keeping the point-value classification honest.
    """
    counts = list(diagonal)
    if not counts:
        raise InsufficientDataError("classify_correlated needs a non-empty diagonal")
    if offdiag_max_cps < 0 or threshold_uncertainty_cps < 0:
        raise ParameterError("threshold and uncertainty must be >= 0")
    correlated = tuple(
        sorted(m.mu for m in counts if m.cc_cps > offdiag_max_cps)
    )
    report = CorrelationReport(
        correlated_mus=correlated,
        total_pairs=len(correlated),
        longest_continuous_run=_longest_run(correlated),
        threshold_cps=float(offdiag_max_cps),
    )
    if threshold_uncertainty_cps > 0:
        lo = max(0.0, offdiag_max_cps - threshold_uncertainty_cps)
        hi = offdiag_max_cps + threshold_uncertainty_cps
        report = replace(
            report,
            optimistic_total_pairs=sum(1 for m in counts if m.cc_cps > lo),
            pessimistic_total_pairs=sum(1 for m in counts if m.cc_cps > hi),
        )
    return report


def bandwidth_report(
    correlated_mus, ladder: ModeLadder
) -> tuple[float, float]:
    """Signal-band and full photon-pair bandwidths [nm].

    Signal photons sit on the -mu (long-wavelength) branch, idlers on +mu.
    Signal bandwidth spans lambda(-mu_max) to lambda(-mu_min) over the
    correlated set; full bandwidth spans lambda(-mu_max) to lambda(+mu_max).
    """
    mus = sorted(set(int(m) for m in correlated_mus))
    if not mus:
        raise InsufficientDataError("bandwidth_report needs at least one mode pair")
    if mus[0] < 1:
        raise ParameterError("correlated mode-pair indices must be >= 1")
    mu_min, mu_max = mus[0], mus[-1]
    needed = (-mu_max, -mu_min, mu_max)
    missing = [m for m in needed if m not in ladder.entries]
    if missing:
        raise IncompleteLadderError(f"ladder is missing mode(s) {sorted(missing)}")
    signal_bw = ladder.wavelength_nm(-mu_max) - ladder.wavelength_nm(-mu_min)
    full_bw = ladder.wavelength_nm(-mu_max) - ladder.wavelength_nm(mu_max)
    return float(signal_bw), float(full_bw)


def attach_bandwidths(
    report: CorrelationReport, ladder: ModeLadder
) -> CorrelationReport:
    """Return a copy of the report with its bandwidth fields filled in."""
    signal_bw, full_bw = bandwidth_report(report.correlated_mus, ladder)
    return replace(report, signal_bandwidth_nm=signal_bw, full_bandwidth_nm=full_bw)


def read_counts_csv(path) -> list[ModePairCount]:
    """Read mode-pair counts from CSV (mu, cc_cps, ns_cps, ni_cps[, accumulation_s]).

    Header row optional, '#' comments skipped. Rows are returned sorted by mu.
    """
    counts: list[ModePairCount] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (4, 5):
                raise MalformedInputError(
                    f"{path}: line {lineno}: expected 4 or 5 columns, got {len(parts)}",
                    line_number=lineno,
                )
            try:
                values = [float(p) for p in parts]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise MalformedInputError(
                    f"{path}: line {lineno}: non-numeric value {line!r}",
                    line_number=lineno,
                ) from None
            counts.append(
                ModePairCount(
                    mu=int(values[0]),
                    cc_cps=values[1],
                    ns_cps=values[2],
                    ni_cps=values[3],
                    accumulation_s=values[4] if len(values) == 5 else 10.0,
                )
            )
    return sorted(counts, key=lambda m: m.mu)


def write_counts_csv(counts, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("mu,cc_cps,ns_cps,ni_cps,accumulation_s\n")
        for m in sorted(counts, key=lambda m: m.mu):
            fh.write(
                f"{int(m.mu)},{float(m.cc_cps)!r},{float(m.ns_cps)!r},"
                f"{float(m.ni_cps)!r},{float(m.accumulation_s)!r}\n"
            )
