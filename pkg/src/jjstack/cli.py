"""Command-line interface.

Subcommands: spectrum, fit-modes, fit-s11, dc-fit, peaks, geometry,
design. Every run writes one JSON result envelope (see fileio) to --out
or stdout; identical inputs produce byte-identical envelopes.

Exit codes:
    0  success
    1  unreadable or malformed input file, bad command line, output IO
    2  precondition violation (domain error in the inputs)
    3  fit non-convergence or an ambiguous fit

Errors are reported as one JSON record on stderr. Frequencies and rates
in payloads are cyclic (value/2pi) and carry a _hz suffix; raw SI values
use explicit unit suffixes (_ohm, _h, _f, _m, _rad).

Optional --plot PATH writes an SVG next to the numeric result; a plotting
failure is reported on stderr but never changes the exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.constants import e as ELEMENTARY_CHARGE

from . import plots
from .circuit import ChainParams, JunctionParams, derive_scales
from .design import DEFAULT_PLASMA_FREQ, DesignTarget, solve_design
from .errors import (
    AmbiguousOffset,
    FileFormatError,
    JJStackError,
    NonConvergence,
)
from .extraction import (
    DEFAULT_GAP_CORRECTION,
    SuperconductorGap,
    dc_linear_fit,
    fit_dispersion,
    fit_s11,
    impedance_from_fit,
)
from .fileio import (
    digest_file,
    digest_parameters,
    envelope_json,
    format_float,
    make_envelope,
    read_complex_trace,
    read_peaks,
    read_resistances,
    read_two_tone,
    sanitize,
)
from .geometry import (
    AREA_INDUCTANCE_CONSTANT,
    CLOG_ANGLE_DEFAULT,
    PyramidStack,
    area_reduction,
    inhomogeneity_report,
)
from .peaks import detect_peaks
from .spectrum import ORACLE_MAX_CELLS, mode_frequencies, oracle_modes

TWO_PI = 2.0 * math.pi


@dataclass
class _CmdResult:
    payload: dict
    parameters: dict
    digest: str
    csv: str | None = None
    plot_fn: Callable | None = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _offset_range(text: str):
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"offset must be an integer or lo..hi range, got {text!r}"
        ) from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad offset range {text!r}")
    return range(lo, hi + 1)


def _prominence(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"prominence must be 'auto' or a number, got {text!r}"
        ) from None


_BOUND_ALIASES = {"n": "n", "N": "big_n", "big_n": "big_n",
                  "lj": "l_j", "l_j": "l_j", "cg": "c_g", "c_g": "c_g"}


def _bounds(text: str):
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            key, interval = item.split("=", 1)
            lo, hi = interval.split(":", 1)
            out[_BOUND_ALIASES[key.strip()]] = (float(lo), float(hi))
        except (ValueError, KeyError):
            raise argparse.ArgumentTypeError(
                f"bounds must look like 'n=1:9,N=2:1000', got {item!r}"
            ) from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jjstack",
                     description="Stacked-junction transmission-line toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plot=True, fmt=False):
        p.add_argument("--out", help="write the JSON envelope here instead of stdout")
        p.add_argument("--seed", type=int, default=None,
                       help="echoed into the envelope (reserved for noise synthesis)")
        if plot:
            p.add_argument("--plot", help="also write an SVG figure to this path")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json",
                           help="payload serialization (csv: main table only)")

    p = sub.add_parser("spectrum", help="mode table of a chain")
    p.add_argument("--n", type=int, required=True, help="junctions per stack")
    p.add_argument("--N", dest="big_n", type=int, required=True, help="stacks in the chain")
    p.add_argument("--lj", type=float, required=True, help="junction inductance [H]")
    p.add_argument("--cj", type=float, required=True, help="junction capacitance [F]")
    p.add_argument("--cg", type=float, required=True, help="ground capacitance per stack [F]")
    p.add_argument("--modes", type=int, default=None, help="limit the table to the first k modes")
    common(p, fmt=True)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("fit-modes", help="fit the dispersion model to a peak list")
    p.add_argument("peaks_csv", help="peak list CSV (peak_freq_hz,prominence)")
    p.add_argument("--N", dest="big_n", type=int, required=True, help="stacks in the chain")
    p.add_argument("--offset", type=_offset_range, default=range(0, 6),
                   help="index-offset search, integer or lo..hi (default 0..5)")
    p.add_argument("--n", type=int, default=None,
                   help="junctions per stack (required with an anchor)")
    p.add_argument("--anchor-lj", type=float, default=None,
                   help="junction inductance anchor [H] (impedance route i)")
    p.add_argument("--anchor-cg", type=float, default=None,
                   help="ground capacitance anchor [F] (impedance route ii)")
    common(p)
    p.set_defaults(handler=_cmd_fit_modes)

    p = sub.add_parser("fit-s11", help="fit the reflection model to a complex trace")
    p.add_argument("trace_csv", help="complex trace CSV (freq_hz,s11_re,s11_im)")
    common(p)
    p.set_defaults(handler=_cmd_fit_s11)

    p = sub.add_parser("dc-fit", help="per-stack resistance slope and junction inductance")
    p.add_argument("resistances_csv", help="CSV (stack_count,resistance_ohm)")
    p.add_argument("--jcts-per-stack", type=int, required=True,
                   help="junctions per stack in the measured chains")
    p.add_argument("--delta-ev", type=float, default=180e-6,
                   help="superconducting gap [eV] (default bulk aluminum)")
    p.add_argument("--ab-factor", type=float, default=DEFAULT_GAP_CORRECTION,
                   help="empirical correction on the inferred inductance")
    common(p)
    p.set_defaults(handler=_cmd_dc_fit)

    p = sub.add_parser("peaks", help="detect peaks in a two-tone trace")
    p.add_argument("two_tone_csv", help="trace CSV (pump_freq_hz,response,unit)")
    p.add_argument("--prominence", type=_prominence, default="auto",
                   help="threshold in linear units, or 'auto' (5x diff MAD)")
    p.add_argument("--min-sep", type=float, default=None,
                   help="minimum peak separation [Hz] (default 2 median bins)")
    common(p, plot=False, fmt=True)
    p.set_defaults(handler=_cmd_peaks)

    p = sub.add_parser("geometry", help="clogged-stack layer areas and inductances")
    p.add_argument("--side", type=float, required=True, help="base aperture side [m]")
    p.add_argument("--pitch", type=float, required=True, help="layer vertical pitch [m]")
    p.add_argument("--layers", type=int, required=True, help="junction layers in the stack")
    p.add_argument("--angle", type=float, default=CLOG_ANGLE_DEFAULT,
                   help=f"clogging half-angle [rad] (default {CLOG_ANGLE_DEFAULT:.6f})")
    p.add_argument("--l-const", type=float, default=4.0,
                   help="area-inductance constant [nH*um^2] (default 4)")
    common(p, plot=False)
    p.set_defaults(handler=_cmd_geometry)

    p = sub.add_parser("design", help="propose chains for impedance/inductance targets")
    p.add_argument("--target-zc", type=float, required=True, help="target z_c [ohm]")
    p.add_argument("--target-ltot", type=float, required=True, help="target l_tot [H]")
    p.add_argument("--anchor-lj", type=float, default=None, help="fixed junction inductance [H]")
    p.add_argument("--anchor-cg", type=float, default=None, help="fixed ground capacitance [F]")
    p.add_argument("--bounds", type=_bounds, default={},
                   help="parameter bounds, e.g. 'n=1:9,N=2:1000,lj=1e-10:1e-8'")
    p.add_argument("--plasma-freq", type=float, default=DEFAULT_PLASMA_FREQ / TWO_PI,
                   help="plasma frequency fixing c_j [Hz] (default 15e9)")
    p.add_argument("--max-proposals", type=int, default=10)
    common(p, plot=False)
    p.set_defaults(handler=_cmd_design)

    return parser


# ----------------------------- handlers -----------------------------


def _cmd_spectrum(args) -> _CmdResult:
    chain = ChainParams(n=args.n, big_n=args.big_n,
                        junction=JunctionParams(l_j=args.lj, c_j=args.cj),
                        c_g=args.cg)
    scales = derive_scales(chain)
    spec = mode_frequencies(chain)
    oracle = oracle_modes(chain) if chain.big_n <= ORACLE_MAX_CELLS else None

    count = spec.frequencies.size
    if args.modes is not None:
        if args.modes < 1:
            raise ValueError(f"--modes must be >= 1, got {args.modes}")
        count = min(args.modes, count)

    rows = []
    for i in range(count):
        row = {
            "m": i + 1,
            "freq_hz": spec.frequencies[i] / TWO_PI,
            "bloch_phase_rad": spec.bloch_phases[i],
        }
        if oracle is not None:
            row["oracle_freq_hz"] = oracle[i] / TWO_PI
            row["rel_deviation"] = abs(spec.frequencies[i] - oracle[i]) / oracle[i]
        rows.append(row)

    payload = {
        "derived_scales": {
            "f_p_hz": scales.omega_p / TWO_PI,
            "f_g_hz": scales.omega_g / TWO_PI,
            "z_c_ohm": scales.z_c,
            "l_tot_h": scales.l_tot,
            "c_stray_f": scales.c_stray,
            "max_linear_impedance_ohm": math.pi * scales.z_c,
        },
        "mode_count": spec.frequencies.size,
        "modes": rows,
        "oracle_included": oracle is not None,
    }
    parameters = {
        "command": "spectrum", "n": args.n, "big_n": args.big_n,
        "l_j_h": args.lj, "c_j_f": args.cj, "c_g_f": args.cg,
        "modes": args.modes, "seed": args.seed,
    }
    csv_lines = ["m,freq_hz,oracle_freq_hz,rel_deviation"]
    for row in rows:
        csv_lines.append(",".join([
            str(row["m"]), format_float(row["freq_hz"]),
            format_float(row.get("oracle_freq_hz", math.nan)),
            format_float(row.get("rel_deviation", math.nan)),
        ]))

    def plot_fn(path):
        idx = [row["m"] for row in rows]
        plots.plot_spectrum(path, idx, [row["freq_hz"] for row in rows],
                            [row["oracle_freq_hz"] for row in rows] if oracle is not None else None)

    return _CmdResult(payload, parameters, digest_parameters(parameters),
                      csv="\n".join(csv_lines) + "\n", plot_fn=plot_fn)


def _cmd_fit_modes(args) -> _CmdResult:
    peaks = read_peaks(args.peaks_csv)
    fit = fit_dispersion(peaks, args.big_n, args.offset)
    sig_p, sig_g = fit.uncertainties()

    payload = {
        "f_p_hz": fit.omega_p / TWO_PI,
        "f_g_hz": fit.omega_g / TWO_PI,
        "sigma_f_p_hz": sig_p / TWO_PI,
        "sigma_f_g_hz": sig_g / TWO_PI,
        "index_offset": fit.index_offset,
        "residual_rms": fit.residual_rms,
        "predicted_missing_modes_hz": fit.predicted_missing_modes / TWO_PI,
        "big_n": fit.big_n,
        "peak_count": len(peaks),
    }

    anchors = [a for a in (args.anchor_lj, args.anchor_cg) if a is not None]
    if anchors and args.n is None:
        raise _UsageError("--n is required when an impedance anchor is given")
    routes = {}
    if args.anchor_lj is not None:
        routes["route_l_j"] = _impedance_payload(
            impedance_from_fit(fit, args.n, anchor_l_j=args.anchor_lj))
    if args.anchor_cg is not None:
        routes["route_c_g"] = _impedance_payload(
            impedance_from_fit(fit, args.n, anchor_c_g=args.anchor_cg))
    if len(routes) == 2:
        zc_i = routes["route_l_j"]["z_c_ohm"]
        zc_ii = routes["route_c_g"]["z_c_ohm"]
        routes["consistency_delta"] = abs(zc_i - zc_ii) / (0.5 * (zc_i + zc_ii))
    if routes:
        payload["impedance"] = routes

    parameters = {
        "command": "fit-modes", "big_n": args.big_n,
        "offset_search": [args.offset.start, args.offset.stop - 1],
        "n": args.n, "anchor_l_j_h": args.anchor_lj, "anchor_c_g_f": args.anchor_cg,
        "seed": args.seed,
    }

    def plot_fn(path):
        plots.plot_dispersion(path, peaks.freq_hz, fit)

    return _CmdResult(payload, parameters, digest_file(args.peaks_csv), plot_fn=plot_fn)


def _impedance_payload(est) -> dict:
    return {
        "z_c_ohm": est.z_c,
        "l_tot_h": est.l_tot,
        "l_j_h": est.l_j,
        "c_g_f": est.c_g,
        "c_j_f": est.c_j,
        "f_1_hz": est.omega_1 / TWO_PI,
        "max_linear_impedance_ohm": math.pi * est.z_c,
        "route": est.route,
    }


def _cmd_fit_s11(args) -> _CmdResult:
    freq_hz, s11 = read_complex_trace(args.trace_csv)
    fit = fit_s11(freq_hz, s11)
    kappa = fit.kappa_c + fit.kappa_i
    payload = {
        "f_0_hz": fit.omega_0 / TWO_PI,
        "kappa_c_hz": fit.kappa_c / TWO_PI,
        "kappa_i_hz": fit.kappa_i / TWO_PI,
        "kappa_total_hz": kappa / TWO_PI,
        "phi_0_rad": fit.phi_0,
        "fano_caveat": fit.fano_caveat,
        "residual_rms": fit.residual_rms,
        "linewidths_spanned": TWO_PI * (freq_hz[-1] - freq_hz[0]) / kappa,
        "q_table": [{
            "f_0_hz": fit.omega_0 / TWO_PI,
            "q_tot": fit.q_tot,
            "q_c": fit.q_c,
            "q_i_lower_bound": fit.q_i_lower_bound,
        }],
    }
    parameters = {"command": "fit-s11", "seed": args.seed}

    def plot_fn(path):
        plots.plot_s11(path, freq_hz, s11, fit)

    return _CmdResult(payload, parameters, digest_file(args.trace_csv), plot_fn=plot_fn)


def _cmd_dc_fit(args) -> _CmdResult:
    points = read_resistances(args.resistances_csv)
    gap = SuperconductorGap(delta=args.delta_ev * ELEMENTARY_CHARGE,
                            correction_factor=args.ab_factor)
    fit = dc_linear_fit(points, args.jcts_per_stack, gap)
    payload = {
        "slope_ohm_per_stack": fit.slope,
        "slope_stderr_ohm_per_stack": fit.slope_stderr,
        "per_junction_resistance_ohm": fit.per_junction_resistance,
        "l_j_h": fit.l_j,
        "junctions_per_stack": fit.junctions_per_stack,
        "point_count": len(points),
    }
    parameters = {
        "command": "dc-fit", "jcts_per_stack": args.jcts_per_stack,
        "delta_ev": args.delta_ev, "ab_factor": args.ab_factor, "seed": args.seed,
    }

    def plot_fn(path):
        plots.plot_dc(path, [k for k, _ in points], [r for _, r in points], fit.slope)

    return _CmdResult(payload, parameters, digest_file(args.resistances_csv),
                      plot_fn=plot_fn)


def _cmd_peaks(args) -> _CmdResult:
    trace = read_two_tone(args.two_tone_csv)
    found = detect_peaks(trace, prominence=args.prominence,
                         min_separation=args.min_sep)
    payload = {
        "count": len(found),
        "peaks": [{"freq_hz": f, "prominence": p}
                  for f, p in zip(found.freq_hz, found.prominences)],
        "span_hz": list(found.span),
    }
    parameters = {
        "command": "peaks", "prominence": args.prominence,
        "min_sep_hz": args.min_sep, "unit": trace.unit, "seed": args.seed,
    }
    csv_lines = ["peak_freq_hz,prominence"]
    for f, p in zip(found.freq_hz, found.prominences):
        csv_lines.append(f"{format_float(f)},{format_float(p)}")
    return _CmdResult(payload, parameters, digest_file(args.two_tone_csv),
                      csv="\n".join(csv_lines) + "\n")


def _cmd_geometry(args) -> _CmdResult:
    stack = PyramidStack(base_side=args.side, layer_pitch=args.pitch,
                         layer_count=args.layers, clog_angle=args.angle)
    constant = args.l_const * 1e-21  # nH*um^2 -> H*m^2
    layers, total, spread = inhomogeneity_report(stack, constant)
    rows = [{
        "k": k,
        "height_m": k * stack.layer_pitch,
        "area_m2": layers.areas[k],
        "l_j_h": layers.inductances[k],
    } for k in range(stack.layer_count)]
    top_height = (stack.layer_count - 1) * stack.layer_pitch
    payload = {
        "layers": rows,
        "total_inductance_h": total,
        "spread": spread,
        "area_reduction_base_to_top_m2": area_reduction(
            stack.base_side, top_height, stack.clog_angle),
    }
    parameters = {
        "command": "geometry", "side_m": args.side, "pitch_m": args.pitch,
        "layers": args.layers, "angle_rad": args.angle,
        "l_const_nh_um2": args.l_const, "seed": args.seed,
    }
    return _CmdResult(payload, parameters, digest_parameters(parameters))


def _cmd_design(args) -> _CmdResult:
    target = DesignTarget(z_c_target=args.target_zc,
                          l_tot_target=args.target_ltot,
                          constraints=args.bounds or None)
    proposals = solve_design(
        target,
        anchor_l_j=args.anchor_lj,
        anchor_c_g=args.anchor_cg,
        plasma_freq=TWO_PI * args.plasma_freq,
        max_proposals=args.max_proposals,
    )
    rows = [{
        "n": p.n,
        "big_n": p.big_n,
        "l_j_h": p.l_j,
        "c_g_f": p.c_g,
        "c_j_f": p.c_j,
        "z_c_ohm": p.achieved_z_c,
        "l_tot_h": p.achieved_l_tot,
        "f_1_hz": None if p.omega_1 is None else p.omega_1 / TWO_PI,
        "max_linear_impedance_ohm": p.max_linear_impedance,
        "e_j_over_e_c": p.e_j_over_e_c,
        "strategy_tag": p.strategy_tag,
    } for p in proposals]
    payload = {"proposals": rows, "count": len(rows)}
    parameters = {
        "command": "design", "z_c_target_ohm": args.target_zc,
        "l_tot_target_h": args.target_ltot,
        "anchor_l_j_h": args.anchor_lj, "anchor_c_g_f": args.anchor_cg,
        "bounds": {k: list(v) for k, v in (args.bounds or {}).items()},
        "plasma_freq_hz": args.plasma_freq,
        "max_proposals": args.max_proposals, "seed": args.seed,
    }
    return _CmdResult(payload, parameters, digest_parameters(parameters))


# ------------------------------- main -------------------------------


def _error_record(kind: str, message: str, details=None) -> None:
    record = {"error": kind, "message": message}
    if details:
        record["details"] = sanitize(details)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _error_record("UsageError", str(exc))
        return 1

    try:
        result = args.handler(args)
    except _UsageError as exc:
        _error_record("UsageError", str(exc))
        return 1
    except FileFormatError as exc:
        _error_record(type(exc).__name__, str(exc))
        return 1
    except OSError as exc:
        _error_record("IOError", str(exc))
        return 1
    except (NonConvergence, AmbiguousOffset) as exc:
        _error_record(type(exc).__name__, str(exc), getattr(exc, "details", None))
        return 3
    except (JJStackError, ValueError) as exc:
        _error_record(type(exc).__name__, str(exc))
        return 2

    envelope = make_envelope(result.parameters, result.payload, result.digest)
    if getattr(args, "format", "json") == "csv" and result.csv is not None:
        meta = {k: v for k, v in envelope.items() if k != "payload"}
        text = "# " + envelope_json(meta) + "\n" + result.csv
    else:
        text = envelope_json(envelope) + "\n"

    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        _error_record("IOError", str(exc))
        return 1

    plot_path = getattr(args, "plot", None)
    if plot_path and result.plot_fn is not None:
        try:
            result.plot_fn(plot_path)
        except Exception as exc:  # noqa: BLE001 - plots must never fail the run
            _error_record("PlotWarning", f"plot emission failed: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
