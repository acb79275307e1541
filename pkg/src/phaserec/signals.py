"""Uniform time grids, sampled complex amplitudes, and their polar form.

The polar form splits a complex amplitude into log-modulus and unwrapped
phase.  Slowly varying parts of either array (constants, secular drifts,
logarithmic growth) can be fitted and removed with ``subtract_trend``; the
removed terms are kept in a :class:`TrendRecord` so the operation is
invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

__all__ = [
    "TimeGrid",
    "ComplexSignal",
    "TrendTerm",
    "TrendRecord",
    "PolarDecomposition",
    "DegenerateSignalError",
    "UndersampledPhaseError",
    "TrendFitError",
    "to_polar",
    "subtract_trend",
    "write_signal_csv",
    "read_signal_csv",
    "write_polar_csv",
    "read_polar_csv",
]


class DegenerateSignalError(ValueError):
    """Signal is (numerically) zero everywhere; no polar form exists."""


class UndersampledPhaseError(ValueError):
    """Adjacent samples differ by about pi radians away from any amplitude
    zero, so branch continuation is ambiguous."""


class TrendFitError(ValueError):
    """Least-squares trend fit is rank deficient or ill conditioned."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform real-time grid.

    Parameters
    ----------
    t_start : float
        Time of the first sample.
    dt : float
        Sample spacing, strictly positive.
    n : int
        Number of samples, at least 2.
    period : float, optional
        Set only for cyclic signals.  Must equal ``n * dt`` (one full
        period sampled, endpoint excluded).
    """

    t_start: float
    dt: float
    n: int
    period: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n < 2:
            raise ValueError("need at least two samples")
        if self.period is not None:
            if abs(self.period - self.n * self.dt) > 1e-12 * abs(self.period):
                raise ValueError("period must equal n*dt exactly")

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    @property
    def fundamental(self) -> float:
        """Fundamental angular frequency 2*pi/period of a cyclic grid."""
        if self.period is None:
            raise ValueError("grid has no period")
        return TWO_PI / self.period


@dataclass(frozen=True)
class ComplexSignal:
    """Complex amplitude sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n,):
            raise ValueError("values length must equal grid.n")
        if not np.all(np.isfinite(values.real) & np.isfinite(values.imag)):
            raise ValueError("values must be finite")


# Trend basis functions by kind.  log_quadratic is a + b*log(t^2 + c) with a
# fixed, caller-declared c (the fit is linear in the coefficients only).
_TREND_KINDS = ("constant", "linear", "polynomial", "log_quadratic", "none")


def _trend_columns(kind: str, params: dict, t: np.ndarray) -> list[tuple[str, np.ndarray]]:
    if kind == "none":
        return []
    if kind == "constant":
        return [("1", np.ones_like(t))]
    if kind == "linear":
        return [("1", np.ones_like(t)), ("t", t)]
    if kind == "polynomial":
        deg = int(params.get("degree", 2))
        return [("1", np.ones_like(t))] + [
            (f"t^{k}" if k > 1 else "t", t**k) for k in range(1, deg + 1)
        ]
    if kind == "log_quadratic":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ValueError("log_quadratic needs c > 0")
        return [("1", np.ones_like(t)), (f"log(t^2+{c:g})", np.log(t * t + c))]
    raise ValueError(f"unknown trend kind {kind!r}; choose from {_TREND_KINDS}")


@dataclass(frozen=True)
class TrendTerm:
    """One fitted basis function: ``coefficient * basis(t)``."""

    target: str  # "log_modulus" or "phase"
    label: str
    coefficient: float
    kind: str
    params: tuple = ()

    def basis(self, t: np.ndarray) -> np.ndarray:
        p = dict(self.params)
        for lbl, col in _trend_columns(self.kind, p, np.asarray(t, dtype=float)):
            if lbl == self.label:
                return col
        raise ValueError(f"label {self.label!r} not produced by kind {self.kind!r}")


@dataclass(frozen=True)
class TrendRecord:
    """Subtracted analytic terms, re-addable at any real t."""

    terms: tuple[TrendTerm, ...] = ()

    def evaluate(self, target: str, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            if term.target == target:
                out = out + term.coefficient * term.basis(t)
        return out

    def linear_slope(self, target: str) -> float | None:
        """Coefficient of the plain-t term for `target`, if one was fitted."""
        slope = None
        for term in self.terms:
            if term.target == target and term.label == "t":
                slope = term.coefficient if slope is None else slope + term.coefficient
        return slope

    def extended(self, new_terms) -> "TrendRecord":
        return TrendRecord(self.terms + tuple(new_terms))


@dataclass(frozen=True)
class PolarDecomposition:
    """Log-modulus and unwrapped phase of a complex signal.

    ``zero_flags`` marks samples inside a declared modulus-floor
    neighborhood of an amplitude zero; the phase there is interpolated and
    the log-modulus may be meaningless.
    """

    grid: TimeGrid
    log_modulus: np.ndarray
    phase: np.ndarray
    trend: TrendRecord = field(default_factory=TrendRecord)
    zero_flags: np.ndarray = None
    label: str = ""

    def __post_init__(self):
        lm = np.asarray(self.log_modulus, dtype=float)
        ph = np.asarray(self.phase, dtype=float)
        if self.zero_flags is None:
            flags = np.zeros(self.grid.n, dtype=bool)
        else:
            flags = np.asarray(self.zero_flags, dtype=bool)
        object.__setattr__(self, "log_modulus", lm)
        object.__setattr__(self, "phase", ph)
        object.__setattr__(self, "zero_flags", flags)
        n = self.grid.n
        if lm.shape != (n,) or ph.shape != (n,) or flags.shape != (n,):
            raise ValueError("array lengths must equal grid.n")

    def reassemble(self) -> np.ndarray:
        """exp(log_modulus + i*phase), trend terms added back first."""
        t = self.grid.times()
        lm = self.log_modulus + self.trend.evaluate("log_modulus", t)
        ph = self.phase + self.trend.evaluate("phase", t)
        return np.exp(lm + 1j * ph)


def _wrap(x):
    """Wrap angles into [-pi, pi)."""
    return (x + np.pi) % TWO_PI - np.pi


def to_polar(signal: ComplexSignal, modulus_floor: float | None = None,
             branch_guard: float = 0.05) -> PolarDecomposition:
    """Polar decomposition with nearest-branch phase unwrapping.

    Parameters
    ----------
    signal : ComplexSignal
    modulus_floor : float, optional
        Samples with ``|value| < modulus_floor`` are flagged as lying in a
        zero neighborhood.  Defaults to ``1e-10 * max|values|``, which
        separates genuine zeros from round-off.
    branch_guard : float
        Unwrapping tolerance in radians: adjacent unflagged samples whose
        raw arguments differ by more than ``pi - branch_guard`` raise
        :class:`UndersampledPhaseError`.

    Notes
    -----
    The phase is continued sample-to-sample on the nearest branch.  Jumps
    of about +-pi may occur across flagged samples (odd-order real-axis
    zeros flip the amplitude's sign); the flagged samples themselves get a
    phase interpolated from their unflagged neighbors.
    """
    v = signal.values
    amax = float(np.max(np.abs(v)))
    if amax == 0.0:
        raise DegenerateSignalError("degenerate signal: all samples are zero")
    if modulus_floor is None:
        modulus_floor = 1e-10 * amax
    if not modulus_floor > 0:
        raise ValueError("modulus_floor must be positive")

    absv = np.abs(v)
    flags = absv < modulus_floor
    if np.sum(~flags) < 2:
        raise DegenerateSignalError("degenerate signal: fewer than two samples above floor")

    log_modulus = np.log(np.maximum(absv, 1e-300))

    # Unwrap through every sample whose argument is numerically defined
    # (flagged samples are small but usually not exactly zero; skipping
    # them risks a 2*pi slip across wide near-zero regions).  Only samples
    # that vanish outright are bridged by interpolation.
    usable = absv > 1e-250
    idx = np.flatnonzero(usable)
    raw = np.angle(v[idx])
    d = _wrap(np.diff(raw))
    # Ambiguity check only between grid-adjacent samples that are both
    # above the floor; near a flagged zero a +-pi branch jump is permitted
    # (odd-order real-axis zeros flip the amplitude's sign).
    adjacent = np.diff(idx) == 1
    both_clean = ~flags[idx[:-1]] & ~flags[idx[1:]]
    bad = adjacent & both_clean & (np.abs(d) > np.pi - branch_guard)
    if np.any(bad):
        k = idx[np.flatnonzero(bad)[0]]
        raise UndersampledPhaseError(
            f"undersampled phase: ~pi argument step at sample {k} with modulus above floor"
        )
    phase_usable = raw[0] + np.concatenate(([0.0], np.cumsum(d)))

    phase = np.interp(np.arange(signal.grid.n), idx, phase_usable)
    return PolarDecomposition(signal.grid, log_modulus, phase,
                              TrendRecord(), flags, signal.label)


def subtract_trend(polar: PolarDecomposition,
                   modulus_kinds=(), phase_kinds=(),
                   cond_limit: float = 1e12) -> PolarDecomposition:
    """Fit and remove declared analytic forms from log-modulus and phase.

    ``modulus_kinds`` and ``phase_kinds`` are sequences of either a kind
    name or a ``(kind, params)`` pair, with kinds drawn from
    ``constant, linear, polynomial, log_quadratic, none``.  The fit is
    linear least squares on the declared basis only; there is no automatic
    model selection.  Flagged samples carry zero weight.
    """
    t = polar.grid.times()
    ok = ~polar.zero_flags & np.isfinite(polar.log_modulus) & np.isfinite(polar.phase)

    def fit(target: str, values: np.ndarray, kinds) -> tuple[np.ndarray, list[TrendTerm]]:
        columns: list[tuple[str, np.ndarray, str, tuple]] = []
        seen = set()
        for spec in kinds:
            kind, params = (spec, {}) if isinstance(spec, str) else (spec[0], dict(spec[1]))
            for label, col in _trend_columns(kind, params, t):
                if label not in seen:
                    seen.add(label)
                    columns.append((label, col, kind, tuple(sorted(params.items()))))
        if not columns:
            return values, []
        a = np.stack([col for (_, col, _, _) in columns], axis=1)
        sol, _, rank, sv = np.linalg.lstsq(a[ok], values[ok], rcond=None)
        cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
        if rank < a.shape[1] or cond > cond_limit:
            raise TrendFitError(
                f"rank-deficient trend fit for {target}: rank {rank} of {a.shape[1]}, "
                f"condition {cond:.3e}"
            )
        terms = [
            TrendTerm(target, label, float(c), kind, params_t)
            for (label, _, kind, params_t), c in zip(columns, sol)
        ]
        return values - a @ sol, terms

    lm, mterms = fit("log_modulus", polar.log_modulus, modulus_kinds)
    ph, pterms = fit("phase", polar.phase, phase_kinds)
    return PolarDecomposition(polar.grid, lm, ph,
                              polar.trend.extended(mterms + pterms),
                              polar.zero_flags, polar.label)


# ---------------------------------------------------------------------------
# CSV schemas: signals are "t,re,im"; polar arrays are
# "t,log_modulus,phase,flagged".  Header row required, '.' decimal separator.

_FMT = "%.17g"


def write_signal_csv(signal: ComplexSignal, path) -> None:
    t = signal.grid.times()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("t,re,im\n")
        for k in range(signal.grid.n):
            f.write(f"{_FMT % t[k]},{_FMT % signal.values[k].real},{_FMT % signal.values[k].imag}\n")


def read_signal_csv(path, period: float | None = None, label: str = "") -> ComplexSignal:
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = np.atleast_1d(data["t"])
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=0, atol=1e-9 * abs(dt)):
        raise ValueError("non-uniform grid in CSV")
    grid = TimeGrid(float(t[0]), dt, t.size, period)
    return ComplexSignal(grid, np.atleast_1d(data["re"]) + 1j * np.atleast_1d(data["im"]), label)


def write_polar_csv(polar: PolarDecomposition, path) -> None:
    t = polar.grid.times()
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("t,log_modulus,phase,flagged\n")
        for k in range(polar.grid.n):
            f.write(
                f"{_FMT % t[k]},{_FMT % polar.log_modulus[k]},"
                f"{_FMT % polar.phase[k]},{int(polar.zero_flags[k])}\n"
            )


def read_polar_csv(path, period: float | None = None) -> PolarDecomposition:
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = np.atleast_1d(data["t"])
    dt = float(t[1] - t[0])
    grid = TimeGrid(float(t[0]), dt, t.size, period)
    return PolarDecomposition(grid, np.atleast_1d(data["log_modulus"]),
                              np.atleast_1d(data["phase"]),
                              TrendRecord(),
                              np.atleast_1d(data["flagged"]) > 0.5)
