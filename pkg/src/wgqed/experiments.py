"""Reproducible experiment runner: sweeps, CSV artifacts and manifests.

Every experiment writes a manifest (config echo, library version, wall time),
per-point artifacts where meaningful, and a summary CSV.  All numeric output
uses 17 significant digits so reruns are byte identical.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import extract_gap_from_period, extract_two_qubit, fit_decay
from .dynamics import evolve_ide, evolve_modes, initial_qubit_excited
from .kernels import KernelSpec
from .markov import (
    SCHEMES,
    lamb_shift_self_consistent,
    lamb_shift_simplified,
    single_qubit_closed_form,
    two_qubit_params,
)
from .models import (
    EXPONENTIAL_CONTINUUM,
    PhotonicModel,
    QubitArray,
    build_modes,
    spectral_density,
)
from .scattering import resonances, scattering_amplitudes

EXPERIMENT_KINDS = (
    "single_qubit_cutoff_sweep",
    "two_qubit_distance_sweep",
    "ide_reference",
    "discrete_waveguide",
    "photonic_crystal",
    "scattering_spectrum",
    "lightcone_map",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    kind: str
    model: dict = field(default_factory=dict)
    qubits: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    outdir: Path = Path("out")
    raw_text: str = ""

    def num(self, key, default):
        return float(self.numerics.get(key, default))


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_trace_csv(path: Path, trace):
    S = trace.qubit_count
    header = ["t"]
    for s in range(S):
        header += [f"re_c{s + 1}", f"im_c{s + 1}"]
    if S == 2:
        header += ["p_plus", "p_minus"]
    rows = []
    pp = np.abs(trace.c_plus) ** 2 if S == 2 else None
    pm = np.abs(trace.c_minus) ** 2 if S == 2 else None
    for i, t in enumerate(trace.times):
        row = [t]
        for s in range(S):
            row += [trace.amplitudes[i, s].real, trace.amplitudes[i, s].imag]
        if S == 2:
            row += [pp[i], pm[i]]
        rows.append(row)
    write_csv(path, header, rows)


def _build_model(cfg: ExperimentConfig, **overrides) -> PhotonicModel:
    spec = dict(cfg.model)
    spec.update(overrides)
    kind = spec.pop("kind", None)
    if kind is None:
        raise ConfigError("model block needs a 'kind' entry")
    keymap = {
        "length": "length",
        "modes": "mode_count",
        "coupling": "coupling",
        "cutoff": "cutoff",
        "center": "center",
        "bandwidth": "bandwidth",
    }
    fields = {}
    for key, val in spec.items():
        if key in ("modes_list", "bandwidth_list"):
            continue
        if key not in keymap:
            raise ConfigError(f"unknown model key {key!r}")
        fields[keymap[key]] = int(val) if key == "modes" else float(val)
    try:
        model = PhotonicModel(kind=kind, **fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    if model.mode_count and model.mode_count % 2:
        raise ConfigError(f"model key 'modes' must be even, got {model.mode_count}")
    return model


def _sweep_values(cfg: ExperimentConfig) -> np.ndarray:
    sw = cfg.sweep
    if not sw:
        raise ConfigError("missing [sweep] block")
    try:
        start, stop = float(sw["start"]), float(sw["stop"])
        samples = int(sw["samples"])
    except KeyError as exc:
        raise ConfigError(f"sweep block missing {exc}") from exc
    if samples < 2:
        raise ConfigError("sweep needs at least 2 samples")
    if sw.get("scale", "linear") == "log":
        return np.geomspace(start, stop, samples)
    return np.linspace(start, stop, samples)


def _qubit_gap(cfg: ExperimentConfig) -> float:
    gaps = cfg.qubits.get("gaps", [1.0])
    gaps = [float(g) for g in np.atleast_1d(gaps)]
    if any(abs(g - gaps[0]) > 0 for g in gaps):
        raise ConfigError("sweep experiments assume equal qubit gaps")
    return gaps[0]


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- experiments


def _run_cutoff_sweep(cfg: ExperimentConfig, threads: int):
    gap = _qubit_gap(cfg)
    cutoffs = _sweep_values(cfg)
    if cfg.sweep.get("variable", "cutoff") != "cutoff":
        raise ConfigError("single_qubit_cutoff_sweep sweeps the variable 'cutoff'")
    rows = []
    for wc in cutoffs:
        model = _build_model(cfg, cutoff=wc)
        if model.kind != EXPONENTIAL_CONTINUUM:
            raise ConfigError("cutoff sweep needs the exponential_continuum model")
        dp, gam = lamb_shift_self_consistent(model, gap)
        d_cf, g_cf = single_qubit_closed_form(model.coupling, dp, wc)
        dp_s, gam_s = lamb_shift_simplified(model, gap)
        gam_none = spectral_density(model, gap)
        rows.append([wc, dp - gap, gam, d_cf, g_cf, dp_s - gap, gam_s, gam_none])
    header = [
        "omega_c",
        "delta_sc",
        "gamma_sc",
        "delta_cf",
        "gamma_cf",
        "delta_simplified",
        "gamma_simplified",
        "gamma_none",
    ]
    write_csv(cfg.outdir / "summary.csv", header, rows)
    return rows


def _ide_channel_fit(args):
    (model_args, gap, d, t_end, dt, fit_start, fit_stop) = args
    model = PhotonicModel(**model_args)
    spec = KernelSpec(model=model)
    out = {}
    for channel in ("plus", "minus"):
        tr = evolve_ide(spec, gap, channel, d=d, t_end=t_end, dt=dt, dt_out=0.5)
        fit = fit_decay(tr, window=(fit_start, fit_stop))
        out[channel] = (fit.rate, gap + fit.frequency, fit.residual_norm)
    return out


def _recombine(fit_pair):
    rate_p, gap_p, res_p = fit_pair["plus"]
    rate_m, gap_m, res_m = fit_pair["minus"]
    gamma = 0.5 * (rate_p + rate_m)
    gamma12 = 0.5 * (rate_p - rate_m)
    g12 = 0.5 * (gap_p - gap_m)
    dprime = 0.5 * (gap_p + gap_m)
    return gamma, gamma12, g12, dprime, max(res_p, res_m)


def _run_ide_reference(cfg: ExperimentConfig, threads: int):
    gap = _qubit_gap(cfg)
    model = _build_model(cfg)
    if model.kind != EXPONENTIAL_CONTINUUM:
        raise ConfigError("ide_reference needs the exponential_continuum model")
    variable = cfg.sweep.get("variable", "separation")
    t_end = cfg.num("t_end", 500.0)
    dt = cfg.num("dt", min(0.02 / gap, 0.2 / model.cutoff))
    fit_start = cfg.num("fit_start", 60.0)
    fit_stop = cfg.num("fit_stop", t_end)

    if variable == "cutoff":
        rows = []
        for wc in _sweep_values(cfg):
            m = _build_model(cfg, cutoff=wc)
            spec = KernelSpec(model=m)
            tr = evolve_ide(spec, gap, "single", t_end=t_end, dt=min(0.02 / gap, 0.2 / wc), dt_out=0.5)
            fit = fit_decay(tr, window=(fit_start, fit_stop))
            dp, gam = lamb_shift_self_consistent(m, gap)
            rows.append([wc, fit.frequency, fit.rate, dp - gap, gam, fit.residual_norm])
        write_csv(
            cfg.outdir / "summary.csv",
            ["omega_c", "delta_fit", "gamma_fit", "delta_sc", "gamma_sc", "residual"],
            rows,
        )
        return rows

    if variable != "separation":
        raise ConfigError("ide_reference sweeps 'separation' or 'cutoff'")
    seps = _sweep_values(cfg)
    margs = dict(kind=model.kind, coupling=model.coupling, cutoff=model.cutoff)
    tasks = [
        (margs, gap, float(d), t_end, dt, max(fit_start, float(d) + 20.0), fit_stop)
        for d in seps
    ]
    fits = _pmap(_ide_channel_fit, tasks, threads)
    rows = []
    for d, pair in zip(seps, fits):
        gamma, gamma12, g12, dprime, res = _recombine(pair)
        pred = two_qubit_params(model, gap, float(d), "self_consistent")
        rows.append(
            [d, gamma, gamma12, g12, pred.decay, pred.collective_decay, pred.coherent_coupling]
        )
    write_csv(
        cfg.outdir / "summary.csv",
        ["d", "gamma_fit", "gamma12_fit", "g12_fit", "gamma_pred", "gamma12_pred", "g12_pred"],
        rows,
    )
    return rows


def _mode_sweep_point(args):
    (model_args, gap, d, t_end, dt_out, rtol, x0) = args
    model = PhotonicModel(**model_args)
    qubits = QubitArray(gaps=[gap, gap], positions=[x0, x0 + d])
    modes = build_modes(model, qubits)
    init = initial_qubit_excited(0, 2, modes.mode_count)
    trace = evolve_modes(modes, qubits, init, t_end=t_end, dt_out=dt_out, rtol=rtol)
    params = extract_two_qubit(trace)
    return {
        "trace": trace,
        "gamma": params.decay,
        "gamma12": params.collective_decay,
        "g12": params.coherent_coupling,
        "dprime": params.shifted_gap,
    }


def _model_args(model: PhotonicModel) -> dict:
    return dict(
        kind=model.kind,
        coupling=model.coupling,
        length=model.length,
        mode_count=model.mode_count,
        cutoff=model.cutoff if model.kind == EXPONENTIAL_CONTINUUM else 0.0,
        center=model.center,
        bandwidth=model.bandwidth,
    )


def _run_distance_sweep(cfg: ExperimentConfig, threads: int, write_traces: bool = True):
    gap = _qubit_gap(cfg)
    model = _build_model(cfg)
    if cfg.sweep.get("variable", "separation") != "separation":
        raise ConfigError("two_qubit_distance_sweep sweeps the variable 'separation'")
    seps = _sweep_values(cfg)
    t_end = cfg.num("t_end", 0.85 * model.length)
    dt_out = cfg.num("dt_out", 0.25)
    rtol = cfg.num("rtol", 1e-9)
    x0 = float(cfg.qubits.get("positions", [0.0])[0])
    tasks = [(_model_args(model), gap, float(d), t_end, dt_out, rtol, x0) for d in seps]
    results = _pmap(_mode_sweep_point, tasks, threads)
    rows = []
    for d, res in zip(seps, results):
        pred = two_qubit_params(model, gap, float(d), "self_consistent")
        rows.append(
            [
                d,
                res["gamma"],
                res["gamma12"],
                res["g12"],
                pred.decay,
                pred.collective_decay,
                pred.coherent_coupling,
            ]
        )
        if write_traces:
            write_trace_csv(cfg.outdir / "traces" / f"trace_d{fmt(d)}.csv", res["trace"])
    write_csv(
        cfg.outdir / "summary.csv",
        ["d", "gamma_fit", "gamma12_fit", "g12_fit", "gamma_pred", "gamma12_pred", "g12_pred"],
        rows,
    )
    return rows


def _run_discrete_waveguide(cfg: ExperimentConfig, threads: int):
    gap = _qubit_gap(cfg)
    mode_counts = [int(n) for n in np.atleast_1d(cfg.model.get("modes_list", [cfg.model.get("modes", 800)]))]
    seps = _sweep_values(cfg)
    gap_rows = []
    for N in mode_counts:
        model = _build_model(cfg, modes=N)
        t_end = cfg.num("t_end", 0.85 * model.length)
        dt_out = cfg.num("dt_out", 0.25)
        rtol = cfg.num("rtol", 1e-9)
        tasks = [(_model_args(model), gap, float(d), t_end, dt_out, rtol, 0.0) for d in seps]
        results = _pmap(_mode_sweep_point, tasks, threads)
        rows = []
        for d, res in zip(seps, results):
            rows.append([d, res["gamma"], res["gamma12"], res["g12"], res["dprime"]])
        write_csv(
            cfg.outdir / f"params_N{N}.csv",
            ["d", "gamma", "gamma12", "g12", "delta_prime"],
            rows,
        )
        arr = np.asarray(rows, dtype=float)
        gap_zero, spread = extract_gap_from_period(arr[:, 0], arr[:, 2])
        dp_sc, gam_sc = lamb_shift_self_consistent(model, gap)
        gap_rows.append(
            [N, model.cutoff, gap_zero, spread, dp_sc, gam_sc, float(np.mean(arr[:, 1]))]
        )
    write_csv(
        cfg.outdir / "gaps.csv",
        ["N", "omega_c", "gap_from_zeros", "spread", "gap_sc", "gamma_sc", "gamma_mean"],
        gap_rows,
    )
    return gap_rows


def _run_photonic_crystal(cfg: ExperimentConfig, threads: int):
    gap = _qubit_gap(cfg)
    bandwidths = [float(j) for j in np.atleast_1d(cfg.model.get("bandwidth_list", [cfg.model.get("bandwidth", 0.5)]))]
    seps = _sweep_values(cfg)
    summary = []
    for J in bandwidths:
        model = _build_model(cfg, bandwidth=J)
        t_end = cfg.num("t_end", 150.0)
        dt_out = cfg.num("dt_out", 0.25)
        rtol = cfg.num("rtol", 1e-9)
        tasks = [(_model_args(model), gap, float(d), t_end, dt_out, rtol, 0.0) for d in seps]
        results = _pmap(_mode_sweep_point, tasks, threads)
        rows = [[d, r["gamma"], r["gamma12"], r["g12"]] for d, r in zip(seps, results)]
        write_csv(
            cfg.outdir / f"params_J{fmt(J)}.csv", ["d", "gamma", "gamma12", "g12"], rows
        )
        arr = np.asarray(rows, dtype=float)
        zero_gap, spread = extract_gap_from_period(arr[:, 0], arr[:, 2])
        summary.append([J, float(np.mean(arr[:, 1])), np.pi / zero_gap, spread])
    write_csv(
        cfg.outdir / "summary.csv",
        ["bandwidth", "gamma_mean", "zero_spacing", "spread"],
        summary,
    )
    return summary


def _run_scattering_spectrum(cfg: ExperimentConfig, threads: int):
    model = _build_model(cfg)
    gaps = [float(g) for g in np.atleast_1d(cfg.qubits.get("gaps", [1.0]))]
    positions = [float(x) for x in np.atleast_1d(cfg.qubits.get("positions", [0.0]))]
    qubits = QubitArray(gaps=gaps, positions=positions)
    if cfg.sweep.get("variable", "energy") != "energy":
        raise ConfigError("scattering_spectrum sweeps the variable 'energy'")
    energies = _sweep_values(cfg)
    rows = []
    for E in energies:
        res = scattering_amplitudes(model, qubits, float(E))
        row = [E]
        for s in range(qubits.count):
            row += [res.qubit_amps[s].real, res.qubit_amps[s].imag]
        row.append(float(np.sum(np.abs(res.qubit_amps) ** 2)))
        rows.append(row)
    header = ["E"]
    for s in range(qubits.count):
        header += [f"re_c{s + 1}", f"im_c{s + 1}"]
    header.append("abs_c_sq")
    write_csv(cfg.outdir / "spectrum.csv", header, rows)
    roots = resonances(model, qubits)
    write_csv(cfg.outdir / "resonances.csv", ["re_E", "im_E"], [[r.real, r.imag] for r in roots])
    return rows


def _run_lightcone_map(cfg: ExperimentConfig, threads: int):
    from .analysis import detect_light_cone

    gap = _qubit_gap(cfg)
    model = _build_model(cfg)
    seps = _sweep_values(cfg)
    t_end = cfg.num("t_end", 0.85 * model.length)
    dt_out = cfg.num("dt_out", 0.5)
    rtol = cfg.num("rtol", 1e-9)
    tasks = [(_model_args(model), gap, float(d), t_end, dt_out, rtol, 0.0) for d in seps]
    results = _pmap(_mode_sweep_point, tasks, threads)
    traces = [r["trace"] for r in results]
    flights = detect_light_cone(traces, threshold=cfg.num("threshold", 1e-4))
    rows = []
    for d, tr in zip(seps, traces):
        split = np.abs(np.abs(tr.c_plus) ** 2 - np.abs(tr.c_minus) ** 2)
        for t, s in zip(tr.times, split):
            rows.append([d, t, s])
    write_csv(cfg.outdir / "map.csv", ["d", "t", "split"], rows)
    write_csv(
        cfg.outdir / "flights.csv",
        ["d", "t_flight"],
        [[d, tf] for d, tf in zip(seps, flights)],
    )
    return rows


_RUNNERS = {
    "single_qubit_cutoff_sweep": _run_cutoff_sweep,
    "two_qubit_distance_sweep": _run_distance_sweep,
    "ide_reference": _run_ide_reference,
    "discrete_waveguide": _run_discrete_waveguide,
    "photonic_crystal": _run_photonic_crystal,
    "scattering_spectrum": _run_scattering_spectrum,
    "lightcone_map": _run_lightcone_map,
}


def run(cfg: ExperimentConfig, threads: int = 1):
    """Run one experiment; writes the manifest plus CSV artifacts, returns rows."""
    if cfg.kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    rows = _RUNNERS[cfg.kind](cfg, threads)
    wall = time.time() - started
    with open(cfg.outdir / "manifest.txt", "w") as fh:
        fh.write(f"library wgqed {__version__}\n")
        fh.write(f"experiment {cfg.kind}\n")
        fh.write(f"wall_seconds {wall:.3f}\n")
        fh.write("config:\n")
        for line in cfg.raw_text.splitlines():
            fh.write(f"  {line}\n")
    return rows


def compare_schemes(cfg: ExperimentConfig, threads: int = 1):
    """Per-separation error of every renormalization scheme against dynamics.

    The reference is the fitted parameters from the exact dynamics (memory
    solver for the continuum, mode solver otherwise); the output holds one
    row per (separation, scheme) with the absolute errors.
    """
    gap = _qubit_gap(cfg)
    model = _build_model(cfg)
    if cfg.kind not in ("ide_reference", "two_qubit_distance_sweep", "discrete_waveguide"):
        raise ConfigError("compare_schemes needs a two-qubit experiment kind")
    seps = _sweep_values(cfg)
    t_end = cfg.num("t_end", 500.0)
    if model.kind == EXPONENTIAL_CONTINUUM:
        dt = cfg.num("dt", min(0.02 / gap, 0.2 / model.cutoff))
        fit_stop = cfg.num("fit_stop", t_end)
        margs = dict(kind=model.kind, coupling=model.coupling, cutoff=model.cutoff)
        tasks = [
            (margs, gap, float(d), t_end, dt, max(cfg.num("fit_start", 60.0), float(d) + 20.0), fit_stop)
            for d in seps
        ]
        fits = [_recombine(p) for p in _pmap(_ide_channel_fit, tasks, threads)]
    else:
        dt_out = cfg.num("dt_out", 0.25)
        rtol = cfg.num("rtol", 1e-9)
        t_end = cfg.num("t_end", 0.85 * model.length)
        tasks = [(_model_args(model), gap, float(d), t_end, dt_out, rtol, 0.0) for d in seps]
        fits = [
            (r["gamma"], r["gamma12"], r["g12"], r["dprime"], 0.0)
            for r in _pmap(_mode_sweep_point, tasks, threads)
        ]
    rows = []
    for d, (gamma, gamma12, g12, _, _) in zip(seps, fits):
        for scheme in SCHEMES:
            pred = two_qubit_params(model, gap, float(d), scheme)
            rows.append(
                [
                    d,
                    scheme,
                    abs(pred.decay - gamma),
                    abs(pred.collective_decay - gamma12),
                    abs(pred.coherent_coupling - g12),
                ]
            )
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    write_csv(
        cfg.outdir / "schemes.csv", ["d", "scheme", "err_gamma", "err_gamma12", "err_g12"], rows
    )
    return rows
