"""Batch command-line front end.

Commands: model-sample, zeros, fourier, verify, propagate.  Options come
from a flat key=value config file overridden by command-line flags;
identical configs produce byte-identical outputs.

Exit codes: 0 success, 2 usage/config error, 3 sign-ambiguous
verification, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cyclic, models, reciprocity, zeros as zeros_mod
from .hilbert import TransformOptions, make_conjugate_pair
from .signals import (ComplexSignal, TimeGrid, to_polar, write_signal_csv,
                      write_polar_csv)
from .models import (TwoStateParams, PacketParams, ExpandingParams,
                     FrozenGaussianParams, NormDriftError)

USAGE_ERROR, SIGN_AMBIGUOUS, NUMERICAL_ERROR = 2, 3, 4

_FMT = "%.17g"

_MODEL_PARAMS = {
    "two_state": {"omega": 1.0, "g": None, "k_over_omega": None},
    "packet": {"m": 1.0, "delta": 1.0, "k_mom": 0.0, "x": 1.0},
    "expanding": {"c": 1.0, "omega0": 1.0, "m": 1.0, "x": 1.0,
                  "f1": None, "f2": None},
    "frozen_gaussian": {"m": 1.0, "omega": 1.0, "x0": 1.0, "x": 1.0},
    "zero_product": {"omega": 1.0, "zeros": "2"},
}


class ConfigError(ValueError):
    pass


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def _model_params(name: str, raw: dict) -> dict:
    if name not in _MODEL_PARAMS:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(_MODEL_PARAMS)}")
    params = dict(_MODEL_PARAMS[name])
    extra = {"eps", "substeps", "modulus_floor"}  # consumed by specific commands
    for key, value in raw.items():
        if key in extra:
            continue
        if key not in params:
            raise ConfigError(f"unknown parameter {key!r} for model {name!r}")
        params[key] = value
    return params


def _two_state(params: dict) -> TwoStateParams:
    if params.get("g") is not None and params.get("k_over_omega") is not None:
        raise ConfigError("give either g or k_over_omega, not both")
    omega = float(params["omega"])
    if params.get("k_over_omega") is not None:
        return TwoStateParams.from_ratio(omega, float(params["k_over_omega"]))
    if params.get("g") is None:
        raise ConfigError("two_state needs g or k_over_omega")
    return TwoStateParams(float(params["g"]), omega)


def _zero_product_values(params: dict, t: np.ndarray) -> np.ndarray:
    zk = [complex(z) for z in str(params["zeros"]).split(";") if z]
    if not zk:
        raise ConfigError("zero_product needs at least one zero")
    z = np.exp(1j * float(params["omega"]) * t)
    out = np.ones_like(z)
    for root in zk:
        out = out * (1.0 - z / root)
    return out


def _model_period(name: str, params: dict) -> float:
    if name == "two_state":
        return _two_state(params).period
    if name == "frozen_gaussian":
        return 2.0 * np.pi / float(params["omega"])
    if name == "zero_product":
        return 2.0 * np.pi / float(params["omega"])
    raise ConfigError(f"model {name!r} is not cyclic")


def _build_grid(spec: str, model: str, params: dict) -> TimeGrid:
    """Grid spec: 'n,period' (period may be the literal word to use the
    model's own), or 't0,dt,n'."""
    parts = [p.strip() for p in str(spec).split(",")]
    if len(parts) == 2:
        n = int(float(parts[0]))
        period = _model_period(model, params) if parts[1] == "period" else float(parts[1])
        return TimeGrid(0.0, period / n, n, period)
    if len(parts) == 3:
        t0, dt, n = float(parts[0]), float(parts[1]), int(float(parts[2]))
        return TimeGrid(t0, dt, n)
    raise ConfigError("grid must be 'n,period' or 't0,dt,n'")


def _sample(name: str, params: dict, grid: TimeGrid) -> ComplexSignal:
    t = grid.times()
    if name == "two_state":
        return ComplexSignal(grid, models.two_state_amplitude(_two_state(params), t),
                             "two_state_ground")
    if name == "packet":
        p = PacketParams(float(params["m"]), float(params["delta"]),
                         float(params["k_mom"]), float(params["x"]))
        return ComplexSignal(grid, np.exp(models.packet_log_amplitude(p, t)), "packet")
    if name == "expanding":
        p = ExpandingParams(float(params["c"]), float(params["omega0"]),
                            float(params["m"]), float(params["x"]))
        f1, f2 = params.get("f1"), params.get("f2")
        if f1 is None or f2 is None:
            f1, f2 = models.expanding_reference_fractions(p)
        lm = models.expanding_log_modulus(p, t)
        ph = models.expanding_phase(p, float(f1), float(f2), t)
        return ComplexSignal(grid, np.exp(lm + 1j * ph), "expanding")
    if name == "frozen_gaussian":
        p = FrozenGaussianParams(float(params["m"]), float(params["omega"]),
                                 float(params["x0"]), float(params["x"]))
        return ComplexSignal(grid, np.exp(models.frozen_gaussian_log(p, t)),
                             "frozen_gaussian")
    if name == "zero_product":
        return ComplexSignal(grid, _zero_product_values(params, t), "zero_product")
    raise ConfigError(f"unknown model {name!r}")


def _sym_period_grid(n: int, period: float) -> TimeGrid:
    """Symmetric one-period grid, offset half a cell so model zeros do not
    land exactly on samples."""
    dt = period / n
    return TimeGrid(-0.5 * period + 0.5 * dt, dt, n, period)


# ---------------------------------------------------------------------------
# commands


def cmd_model_sample(cfg) -> int:
    grid = _build_grid(cfg.grid, cfg.model, cfg.params)
    signal = _sample(cfg.model, cfg.params, grid)
    write_signal_csv(signal, cfg.out)
    print(f"wrote {grid.n} samples of {cfg.model} to {cfg.out}")
    return 0


def _zero_pipeline(cfg):
    params = cfg.params
    period = _model_period(cfg.model, params)
    if cfg.model == "two_state" and not _two_state(params).is_cyclic:
        raise ConfigError("not cyclic: k/omega must be an integer")
    n = int(float(cfg.grid.split(",")[0])) if cfg.grid else 4096
    grid = _sym_period_grid(n, period)
    signal = _sample(cfg.model, params, grid)
    poly = zeros_mod.fit_trig_polynomial(signal)
    zs = zeros_mod.classify(zeros_mod.find_zeros(poly), 1e-6)
    return signal, poly, zs


def cmd_zeros(cfg) -> int:
    _, poly, zs = _zero_pipeline(cfg)
    zeros_mod.write_zeros_csv(zs, cfg.out)
    drive_halfwidth = np.pi / float(cfg.params.get("omega", 1.0))
    window = zs.in_window(drive_halfwidth)
    count = sum(e.multiplicity for e in window)
    lower = sum(e.multiplicity for e in zs.entries if e.half_plane == "lower")
    print(f"degree {poly.degree} polynomial, reconstruction error {poly.reconstruction_error:.3e}")
    print(f"zeros per 2pi window: {count} ({len(window)} distinct); "
          f"strictly lower half: {lower}")
    print(f"wrote zero table to {cfg.out}")
    return 0


def cmd_fourier(cfg) -> int:
    signal, poly, zs = _zero_pipeline(cfg)
    n_max = int(cfg.n_max)
    polar = cyclic.detrend_cyclic_phase(
        to_polar(signal, cfg.params.get("modulus_floor")))
    interior = sum(e.multiplicity for e in zs.entries if e.half_plane == "upper")
    axis = tuple((e.t.real, e.multiplicity) for e in zs.entries
                 if e.half_plane == "axis")
    from_z = cyclic.coefficients_from_zeros(zs, n_max)
    from_s = cyclic.coefficients_from_samples(
        polar, n_max, secular_count=interior, axis_zeros=axis,
        log_scale=float(np.log(np.abs(poly.coeffs[0]))))
    cyclic.write_fourier_csv(from_z, f"{cfg.out}_from_zeros.csv")
    cyclic.write_fourier_csv(from_s, f"{cfg.out}_from_samples.csv")
    report = cyclic.compare(from_z, from_s, zs)
    summary = {
        "n_max": n_max,
        "max_abs_difference": report.max_abs,
        "l2_difference": report.l2,
        "tail_weighted_l2": report.weighted_l2,
        "axis_proximity": list(report.axis_proximity),
    }
    with open(f"{cfg.out}_comparison.json", "w", encoding="utf-8") as f:
        f.write(json.dumps(summary, sort_keys=True) + "\n")
    print(f"cross-method comparison: {report}")
    print(f"wrote {cfg.out}_from_zeros.csv, {cfg.out}_from_samples.csv, "
          f"{cfg.out}_comparison.json")
    return 0


_LINE_GRIDS = {"packet", "expanding"}


def _verify_dictionary(model: str, params: dict):
    if model == "packet":
        c = 4.0 * float(params["m"]) ** 2 * float(params["delta"]) ** 4
        return tuple(make_conjugate_pair(k, c=c)
                     for k in ("log_branch", "lorentzian", "arctan", "dispersive"))
    if model == "expanding":
        c = float(params["c"])
        return tuple(make_conjugate_pair(k, c=c)
                     for k in ("log_branch", "lorentzian", "arctan", "dispersive"))
    return ()


def cmd_verify(cfg) -> int:
    params = cfg.params
    if cfg.model in _LINE_GRIDS:
        grid = _build_grid(cfg.grid or "-200,0.0125,32001", cfg.model, params)
    else:
        n = int(float(cfg.grid.split(",")[0])) if cfg.grid else 4096
        grid = _sym_period_grid(n, _model_period(cfg.model, params))
    signal = _sample(cfg.model, params, grid)
    polar = to_polar(signal, params.get("modulus_floor"))
    if grid.period is None:
        polar = polar  # dictionary terms absorb trends on line grids
    sign = 0 if cfg.sign == "auto" else (1 if cfg.sign == "+" else -1)
    opts = TransformOptions(method=cfg.method,
                            exclusion_halfwidth=float(cfg.exclusion),
                            sign=sign if sign else 1)
    reports = reciprocity.verify(polar, opts, auto_sign=(sign == 0),
                                 dictionary=_verify_dictionary(cfg.model, params))
    payload = {d: json.loads(r.to_json()) for d, r in reports.items()}
    with open(f"{cfg.out}_report.json", "w", encoding="utf-8") as f:
        f.write(json.dumps(payload, sort_keys=True) + "\n")
    t = grid.times()
    for direction, rep in reports.items():
        with open(f"{cfg.out}_{direction}.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write("t,direct,reconstructed,residual,included\n")
            for k in range(grid.n):
                f.write(f"{_FMT % t[k]},{_FMT % rep.target[k]},"
                        f"{_FMT % rep.reconstruction[k]},{_FMT % rep.residuals[k]},"
                        f"{int(rep.included[k])}\n")
        print(f"{direction}: sign {rep.sign:+d}, normalized L2 residual "
              f"{rep.normalized_l2:.3e}, max {rep.residual_max:.3e}, "
              f"excluded {rep.excluded}")
    print(f"wrote {cfg.out}_report.json and plot data")
    return 0


def cmd_propagate(cfg) -> int:
    params = cfg.params
    if cfg.model != "two_state":
        raise ConfigError("propagate supports the two_state model")
    p = _two_state(params)
    eps = float(params.get("eps", 0.0))
    ham = models.perturbed_two_state(p, eps) if eps else models.two_state_hamiltonian(p)
    n = int(float(cfg.grid.split(",")[0])) if cfg.grid else 4096
    # the ground state is prepared at t = 0, so propagation starts there
    grid = TimeGrid(0.0, p.period / n, n, p.period)
    substeps = int(float(params.get("substeps", 8)))
    components = models.propagate(ham, np.array([1.0, 0.0], dtype=complex),
                                  grid, substeps=substeps,
                                  labels=("ground", "excited"))
    for comp in components:
        write_signal_csv(comp, f"{cfg.out}_{comp.label}.csv")
    ratio = models.adiabaticity_ratio(ham, grid)
    summary = {"adiabaticity_ratio": ratio, "eps": eps, "substeps": substeps}
    if cfg.cross_check and eps == 0.0:
        direct = models.two_state_amplitude(p, grid.times())
        summary["cross_check_sup_norm"] = float(
            np.max(np.abs(components[0].values - direct)))
    with open(f"{cfg.out}_summary.json", "w", encoding="utf-8") as f:
        f.write(json.dumps(summary, sort_keys=True) + "\n")
    print(f"adiabaticity ratio {ratio:.6g}")
    if "cross_check_sup_norm" in summary:
        print(f"cross-check sup-norm vs closed form: {summary['cross_check_sup_norm']:.3e}")
    print(f"wrote component signals and {cfg.out}_summary.json")
    return 0


# ---------------------------------------------------------------------------
# argument / config plumbing

_DEFAULTS = {
    "model": "two_state",
    "grid": "",
    "method": "spectral",
    "sign": "auto",
    "out": "phaserec_out",
    "format": "csv",
    "n_max": "16",
    "exclusion": "0.05",
    "cross_check": "0",
}


class _Config:
    def __init__(self, mapping: dict, params: dict):
        self.params = params
        for key, value in mapping.items():
            setattr(self, key, value)


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaserec",
        description="Reciprocity between log-modulus and phase of "
                    "time-dependent amplitudes: model sampling, complex "
                    "zeros, Fourier pairs, and verification.")
    parser.add_argument("command",
                        choices=["model-sample", "zeros", "fourier", "verify",
                                 "propagate"])
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--show-config", action="store_true",
                        help="print the effective configuration and exit")
    parser.add_argument("--model")
    parser.add_argument("--param", action="append", default=[],
                        metavar="K=V", help="model parameter (repeatable)")
    parser.add_argument("--grid", help="'n,period' or 't0,dt,n'")
    parser.add_argument("--method", choices=["spectral", "pv_quadrature"])
    parser.add_argument("--sign", choices=["auto", "+", "-"])
    parser.add_argument("--out")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--n-max", dest="n_max")
    parser.add_argument("--exclusion", help="exclusion half-width around axis zeros")
    parser.add_argument("--cross-check", dest="cross_check", action="store_const",
                        const="1", help="compare propagation to the closed form")
    return parser


def _assemble_config(args) -> _Config:
    mapping = dict(_DEFAULTS)
    params: dict = {}
    if args.config:
        for key, value in _read_config_file(args.config).items():
            if key in mapping:
                mapping[key] = value
            else:
                params[key] = _parse_value(value)
    for key in mapping:
        flag = getattr(args, key, None)
        if flag is not None:
            mapping[key] = flag
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param needs K=V, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = _parse_value(value.strip())
    params = _model_params(mapping["model"], params) | {
        k: v for k, v in params.items()
        if k in ("eps", "substeps", "modulus_floor")}
    return _Config(mapping, params)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _assemble_config(args)
        if args.show_config:
            for key in sorted(_DEFAULTS):
                print(f"{key} = {getattr(cfg, key)}")
            for key in sorted(cfg.params):
                if cfg.params[key] is not None:
                    print(f"{key} = {cfg.params[key]}")
            return 0
        handler = {
            "model-sample": cmd_model_sample,
            "zeros": cmd_zeros,
            "fourier": cmd_fourier,
            "verify": cmd_verify,
            "propagate": cmd_propagate,
        }[args.command]
        return handler(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except reciprocity.SignAmbiguousError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return SIGN_AMBIGUOUS
    except (NormDriftError, zeros_mod.RootConvergenceError,
            zeros_mod.AliasingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
