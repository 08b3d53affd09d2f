"""Command-line pipeline.

Five subcommands, each reading the previous stage's output so the
pipeline is resumable and each stage independently testable:

    synth      synthetic-device JSON -> spectrum CSV
    analyze    spectrum CSV -> resonance report JSON + transmission SVG
    dispersion resonance JSON -> dispersion/ladder JSON + SVG
    jsi        dispersion JSON -> JSI report JSON + SVG + map CSV
    report     counts CSV + dispersion JSON -> correlation report JSON + SVG

Exit codes: 0 success, 2 input/validation error, 3 pipeline error.
Outputs are deterministic: identical invocations (same seed) produce
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import coincidences as cstats
from . import plots
from . import reports
from .dispersion import (
    build_mode_ladder,
    fit_dispersion,
    integrated_dispersion,
    linewidth_crossover_mu,
)
from .errors import (
    IncompleteLadderError,
    InsufficientDataError,
    ParameterError,
    RingPairsError,
    ValidationError,
)
from .jsi import JsiDiagonal, NonlinearPhaseParams, PumpLine, jsi_diagonal, jsi_map
from .resonances import ResonanceSet, detect_dips, fit_lorentzian_dip
from .spectra import SpectrumTrace, SyntheticSpec, generate_synthetic, load_spectrum, save_spectrum

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PIPELINE = 3

_TWO_PI = 2.0 * np.pi

_INPUT_ERRORS = (
    ValidationError,
    ParameterError,
    InsufficientDataError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)


@dataclass(frozen=True)
class PipelineConfig:
    """Validated bundle of the options shared across pipeline stages."""

    input_path: str
    output_dir: str
    pump_wavelength_nm: float | None = None
    fit_order: int = 3
    quadrature_tolerance: float = 1e-6
    threshold_cps: float | None = None
    loss_budget: cstats.LossBudget | None = None
    seed: int | None = None

    def __post_init__(self):
        if not (0 < self.quadrature_tolerance <= 1e-3):
            raise ParameterError(
                f"quadrature tolerance must be in (0, 1e-3], got "
                f"{self.quadrature_tolerance}"
            )
        if self.fit_order < 2:
            raise ParameterError("fit order must be >= 2")


def _config(args) -> PipelineConfig:
    budget = None
    if getattr(args, "loss_facet_db", None) is not None:
        budget = cstats.LossBudget(
            facet_db=args.loss_facet_db,
            filter_chain_db=args.loss_filter_db,
            detector_efficiency=args.det_eff,
        )
    return PipelineConfig(
        input_path=getattr(args, "input", None) or getattr(args, "counts", ""),
        output_dir=args.output_dir,
        pump_wavelength_nm=getattr(args, "pump_nm", None),
        fit_order=getattr(args, "fit_order", 3),
        quadrature_tolerance=getattr(args, "tolerance", 1e-6),
        threshold_cps=getattr(args, "threshold_cps", None),
        loss_budget=budget,
        seed=getattr(args, "seed", None),
    )


def _out(cfg: PipelineConfig, name: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def cmd_synth(args) -> int:
    cfg = _config(args)
    with open(cfg.input_path, "r", encoding="utf-8") as fh:
        spec = SyntheticSpec.from_json(fh.read())
    if cfg.seed is not None:
        spec = replace(spec, seed=cfg.seed)
    trace = generate_synthetic(spec)
    path = _out(cfg, "spectrum.csv")
    save_spectrum(trace, path)
    print(f"wrote {path} ({len(trace)} samples, {len(spec.resonances)} dips)")
    return EXIT_OK


def _empty_resonance_doc(source: str) -> dict:
    return {
        "source": source,
        "dips": [],
        "fsr": {"per_pair_hz": [], "mean_hz": None},
        "q_summary": None,
    }


def cmd_analyze(args) -> int:
    cfg = _config(args)
    trace = load_spectrum(cfg.input_path)
    if args.reference:
        ref = load_spectrum(args.reference)
        if not np.array_equal(ref.wavelength_nm, trace.wavelength_nm):
            raise ValidationError(
                "reference spectrum is sampled on a different wavelength grid"
            )
        if np.any(ref.transmission <= 0):
            raise ValidationError("reference spectrum has non-positive samples")
        trace = SpectrumTrace(
            wavelength_nm=trace.wavelength_nm,
            transmission=trace.transmission / ref.transmission,
            meta={**trace.meta, "reference": os.path.basename(args.reference)},
        )
    windows = detect_dips(
        trace,
        min_depth=args.min_depth,
        min_separation_pm=args.min_separation_pm,
        expected_fwhm_pm=args.expected_fwhm_pm,
    )
    dips = []
    for win in windows:
        try:
            dips.append(fit_lorentzian_dip(trace, win))
        except RingPairsError:
            pass  # noisy or degenerate window: leave it out of the report
    source = os.path.basename(cfg.input_path)
    if dips:
        rset = ResonanceSet.from_dips(dips)
        doc = reports.resonance_report(rset, source=source)
    else:
        rset = None
        doc = _empty_resonance_doc(source)
    json_path = _out(cfg, "resonances.json")
    reports.write_json(json_path, doc)
    plots.plot_transmission(trace, rset, _out(cfg, "transmission.svg"))
    print(f"wrote {json_path} ({len(dips)} dips)")
    return EXIT_OK


def cmd_dispersion(args) -> int:
    cfg = _config(args)
    if cfg.pump_wavelength_nm is None:
        raise ParameterError("--pump-nm is required for the dispersion stage")
    rset = reports.resonance_set_from_report(reports.load_json(cfg.input_path))
    ladder = build_mode_ladder(rset, cfg.pump_wavelength_nm)
    fit = fit_dispersion(ladder, order=cfg.fit_order)
    dint = integrated_dispersion(ladder, fit.d1)
    crossover = None
    if args.linewidth_hz is not None:
        crossover = linewidth_crossover_mu(dint, _TWO_PI * args.linewidth_hz)
    doc = reports.dispersion_report(ladder, fit, dint, linewidth_crossover=crossover)
    json_path = _out(cfg, "dispersion.json")
    reports.write_json(json_path, doc)
    mus = np.array(ladder.mus)
    plots.plot_integrated_dispersion(
        dint,
        fit_dint_hz=(mus, fit.dint(mus) / _TWO_PI),
        path=_out(cfg, "dispersion.svg"),
    )
    print(
        f"wrote {json_path} (D1/2pi={fit.d1 / _TWO_PI / 1e9:.3f} GHz, "
        f"D2/2pi={fit.d2 / _TWO_PI / 1e6:.3f} MHz, "
        f"D3/2pi={fit.d3 / _TWO_PI / 1e3:.3f} kHz)"
    )
    return EXIT_OK


def cmd_jsi(args) -> int:
    cfg = _config(args)
    doc = reports.load_json(cfg.input_path)
    ladder = reports.ladder_from_report(doc)
    if args.round_trip_ps is not None:
        tau = args.round_trip_ps * 1e-12
    else:
        tau = 1.0 / doc["d1_hz"]  # 2*pi / D1 in angular terms
    # the CLI exposes the product Gamma*P_p as one phase offset in radians
    params = NonlinearPhaseParams(
        round_trip_time=tau,
        kerr_coefficient=args.spm_phase_rad,
        intracavity_power=1.0 if args.spm_phase_rad else 0.0,
    )
    pump = PumpLine(
        center=ladder.omega0,
        linewidth=_TWO_PI * (args.pump_fwhm_hz or 0.0),
        model=args.pump_model,
    )
    diagonal = jsi_diagonal(
        ladder, pump, params, rtol=cfg.quadrature_tolerance
    )
    json_path = _out(cfg, "jsi.json")
    reports.write_json(
        json_path,
        reports.jsi_report(
            diagonal,
            pump_model=pump.model,
            round_trip_time_s=tau,
            spm_phase_rad=params.spm_phase,
            quadrature_rtol=cfg.quadrature_tolerance,
        ),
    )
    jmap = jsi_map(diagonal.normalized(), floor=args.floor)
    map_path = _out(cfg, "jsi_map.csv")
    np.savetxt(
        map_path,
        jmap.matrix,
        fmt="%.12g",
        delimiter=",",
        header="signal mu rows x idler mu columns: " + ",".join(map(str, jmap.mus)),
    )
    plots.plot_jsi_diagonal(diagonal, _out(cfg, "jsi_diagonal.svg"))
    plots.plot_jsi_map(jmap, _out(cfg, "jsi_map.svg"))
    print(f"wrote {json_path} ({len(diagonal.mus)} mode pairs)")
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _config(args)
    counts = cstats.read_counts_csv(args.counts)
    if not counts:
        raise InsufficientDataError(f"counts file {args.counts} is empty")
    ladder = reports.ladder_from_report(reports.load_json(args.ladder))
    missing = sorted(
        {m for c in counts for m in (c.mu, -c.mu) if m not in ladder.entries}
    )
    if missing:
        raise IncompleteLadderError(
            f"ladder is missing mode(s) {missing} referenced by the counts file"
        )
    if cfg.threshold_cps is None:
        raise ParameterError("--threshold-cps is required for the report stage")

    t_c = args.coincidence_window_ns * 1e-9
    net_counts = []
    clamped_mus = []
    accs = []
    for c in counts:
        acc = cstats.accidental_cc(c.ns_cps, c.ni_cps, t_c)
        accs.append(acc)
        net, clamped = cstats.subtract_acc(c.cc_cps, acc)
        if clamped:
            clamped_mus.append(c.mu)
        net_counts.append(replace(c, cc_cps=net, acc_subtracted=True))

    classification = cstats.classify_correlated(
        net_counts, cfg.threshold_cps, threshold_uncertainty_cps=args.threshold_band_cps
    )
    if classification.correlated_mus:
        classification = cstats.attach_bandwidths(classification, ladder)

    extras = {
        "coincidence_window_s": t_c,
        "mean_acc_cps": float(np.mean(accs)),
        "max_cc_cps": float(max(c.cc_cps for c in net_counts)),
        "clamped_mus": clamped_mus,
    }
    if cfg.loss_budget is not None:
        eta = cfg.loss_budget.total_efficiency
        extras["loss_budget"] = {
            "facet_db": cfg.loss_budget.facet_db,
            "filter_chain_db": cfg.loss_budget.filter_chain_db,
            "detector_efficiency": cfg.loss_budget.detector_efficiency,
            "total_efficiency": eta,
            "total_db": cfg.loss_budget.total_db,
        }
        extras["on_chip"] = {
            "max_pair_cps": cstats.apply_loss_budget(
                extras["max_cc_cps"], cfg.loss_budget, "detected_to_generated"
            )
            / eta,  # pair rates take the channel loss once per photon
            "mean_signal_singles_cps": cstats.apply_loss_budget(
                float(np.mean([c.ns_cps for c in counts])),
                cfg.loss_budget,
                "detected_to_generated",
            ),
        }

    json_path = _out(cfg, "report.json")
    reports.write_json(
        json_path, reports.correlation_report_doc(classification, **extras)
    )

    measured = {c.mu: c.cc_cps for c in net_counts}
    if args.compare:
        jsi_doc = reports.load_json(args.compare)
        predicted = JsiDiagonal(
            entries={int(m["mu"]): m["c_raw"] for m in jsi_doc["modes"]},
            overlap={int(m["mu"]): m["overlap"] for m in jsi_doc["modes"]},
            sinc_sq={int(m["mu"]): m["sinc_sq"] for m in jsi_doc["modes"]},
            delta_phi={int(m["mu"]): m["delta_phi_rad"] for m in jsi_doc["modes"]},
        )
        plots.plot_jsi_diagonal(
            predicted, _out(cfg, "comparison.svg"), measured=measured
        )
    elif any(v > 0 for v in measured.values()):
        flat = JsiDiagonal(entries={mu: max(v, 0.0) for mu, v in measured.items()})
        plots.plot_jsi_diagonal(flat, _out(cfg, "diagonal.svg"))
    print(
        f"wrote {json_path} ({classification.total_pairs} correlated pairs, "
        f"longest run {classification.longest_continuous_run})"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringpairs",
        description="Ring-resonator spectrum analysis and photon-pair statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic spectrum CSV")
    p.add_argument("--input", required=True, help="synthetic-device JSON")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the JSON seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="detect and fit resonance dips")
    p.add_argument("--input", required=True, help="spectrum CSV")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--reference", default=None, help="baseline CSV to divide out")
    p.add_argument("--min-depth", type=float, default=0.1)
    p.add_argument("--min-separation-pm", type=float, default=50.0)
    p.add_argument("--expected-fwhm-pm", type=float, default=1.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dispersion", help="mode ladder and dispersion fit")
    p.add_argument("--input", required=True, help="resonance report JSON")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--pump-nm", type=float, required=True)
    p.add_argument("--fit-order", type=int, default=3)
    p.add_argument(
        "--linewidth-hz",
        type=float,
        default=None,
        help="report the mode index out to which |Dint| stays within this linewidth",
    )
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("jsi", help="predicted joint spectral intensity")
    p.add_argument("--input", required=True, help="dispersion report JSON")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--pump-model", choices=("delta", "lorentzian"), default="delta")
    p.add_argument("--pump-fwhm-hz", type=float, default=None)
    p.add_argument("--spm-phase-rad", type=float, default=0.0)
    p.add_argument("--round-trip-ps", type=float, default=None)
    p.add_argument("--floor", type=float, default=0.0, help="accidental floor for the map")
    p.set_defaults(func=cmd_jsi)

    p = sub.add_parser("report", help="coincidence classification report")
    p.add_argument("--counts", required=True, help="counts CSV (mu,cc,ns,ni)")
    p.add_argument("--ladder", required=True, help="dispersion report JSON")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--threshold-cps", type=float, default=None)
    p.add_argument("--threshold-band-cps", type=float, default=0.0)
    p.add_argument("--coincidence-window-ns", type=float, default=1.0)
    p.add_argument("--loss-facet-db", type=float, default=None)
    p.add_argument("--loss-filter-db", type=float, default=0.0)
    p.add_argument("--det-eff", type=float, default=1.0)
    p.add_argument("--compare", default=None, help="JSI report JSON to overlay")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RingPairsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
