"""Line and periodic conjugate (Hilbert) transforms, plus a dictionary of
analytic conjugate pairs used to handle non-decaying parts.

Sign convention
---------------
The line transform is ``H[f](t) = (1/pi) PV Int f(t')/(t' - t) dt'``.  In
the frequency domain this multiplies ``exp(i nu t)`` by ``i*sign(nu)``, so
``H[cos] = -sin`` and ``H[sin] = cos``; the periodic transform is the same
mapping on Fourier coefficients (equivalently the cotangent-kernel PV
integral over one period).  The residue-verified model pair is::

    H[ sqrt(c)/(t^2+c) ] = -t/(t^2+c)

For an amplitude whose zeros/singularities lie only in the closed *upper*
half t-plane the unwrapped phase satisfies ``arg = +H[log-modulus]`` and
``log-modulus = -H[arg]``; both signs flip when they lie only in the lower
half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signals import PolarDecomposition, TimeGrid

__all__ = [
    "TransformOptions",
    "ConjugatePair",
    "make_conjugate_pair",
    "PAIR_KINDS",
    "hilbert_line",
    "hilbert_periodic",
    "conjugate_with_tails",
    "DecayCheckError",
]


class DecayCheckError(ValueError):
    """Remainder fails the declared decay check at the window edge."""


@dataclass(frozen=True)
class TransformOptions:
    """Options shared by the transforms and the reciprocity verifier.

    method : "spectral" or "pv_quadrature" (line transforms only).
    window_halfwidth : half-width T of the sampling window, used in tail
        error estimates; taken from the grid when absent.
    exclusion_halfwidth : half-width delta of the neighborhoods around
        flagged amplitude zeros excluded from residual metrics.
    sign : +1 or -1, multiplies the transform output.
    """

    method: str = "spectral"
    window_halfwidth: float | None = None
    exclusion_halfwidth: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if self.method not in ("spectral", "pv_quadrature"):
            raise ValueError("method must be 'spectral' or 'pv_quadrature'")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.window_halfwidth is not None and not self.window_halfwidth > 0:
            raise ValueError("window_halfwidth must be positive")
        if self.exclusion_halfwidth < 0:
            raise ValueError("exclusion_halfwidth must be >= 0")


def _check_input(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("NaN or infinite input")
    return f


def _fft_multiplier(f: np.ndarray) -> np.ndarray:
    """Multiply positive frequencies by i, negative by -i, zero the mean."""
    spec = np.fft.rfft(f)
    spec *= 1j
    spec[0] = 0.0
    if f.size % 2 == 0:
        spec[-1] = 0.0  # Nyquist bin has no signed frequency
    return np.fft.irfft(spec, n=f.size)


def _pv_sum(f: np.ndarray, dt: float) -> np.ndarray:
    """Grid PV sum: (dt/pi) * [sum_{j!=i} f_j/((j-i) dt) + f'_i].

    The singular cell is skipped; because the 1/(t'-t) kernel is odd
    around t the pairing is midpoint-symmetric and O(dt^2) away from
    near-zero samples.  The local linear correction f'_i * dt accounts for
    the skipped cell.
    """
    n = f.size
    kern = np.zeros(2 * n - 1)
    m = np.arange(-(n - 1), n)
    nz = m != 0
    kern[nz] = 1.0 / (m[nz] * dt)
    # out[i] = sum_j f[j] * kern[(j - i) + n - 1] is a correlation; do it
    # with an FFT-based linear convolution against the reversed kernel.
    size = 1 << int(np.ceil(np.log2(3 * n)))
    conv = np.fft.irfft(np.fft.rfft(f, size) * np.fft.rfft(kern[::-1], size), size)
    corr = conv[n - 1:2 * n - 1]
    fp = np.gradient(f, dt)
    return (dt / np.pi) * (corr + fp)


def hilbert_line(f: np.ndarray, grid: TimeGrid, opts: TransformOptions = TransformOptions()) -> np.ndarray:
    """Line Hilbert transform of a decaying real array on a uniform grid.

    The spectral method periodizes the window implicitly, so the caller
    must have removed trends/growth first.  pv_quadrature evaluates the
    principal-value sum directly (O(dt^2), no periodization).
    """
    f = _check_input(f)
    if f.shape != (grid.n,):
        raise ValueError("array length must equal grid.n")
    if opts.method == "spectral":
        out = _fft_multiplier(f)
    else:
        out = _pv_sum(f, grid.dt)
    return opts.sign * out


def hilbert_periodic(f: np.ndarray, grid: TimeGrid, opts: TransformOptions = TransformOptions()) -> np.ndarray:
    """Conjugate-series transform of one full period of a real array.

    Cosine coefficients map to minus-sine coefficients of the same index
    and vice versa (``cos -> -sin``, ``sin -> +cos``); the mean maps to 0.
    Equivalent to the cotangent-kernel PV integral over one period, which
    is the conditionally convergent limit of the line transform for
    periodic inputs.
    """
    if grid.period is None:
        raise ValueError("grid has no period")
    f = _check_input(f)
    if f.shape != (grid.n,):
        raise ValueError("array length must equal grid.n")
    return opts.sign * _fft_multiplier(f)


# ---------------------------------------------------------------------------
# Conjugate-pair dictionary.  Each pair (u, v) satisfies H[u] = v with the
# raw (sign=+1) kernel above, possibly modulo an additive constant for
# non-decaying forward forms (noted per pair).


@dataclass(frozen=True)
class ConjugatePair:
    name: str
    params: dict = field(default_factory=dict)
    note: str = ""

    def forward(self, t: np.ndarray) -> np.ndarray:
        return _PAIR_FORMS[self.name][0](np.asarray(t, dtype=float), self.params)

    def conjugate(self, t: np.ndarray) -> np.ndarray:
        return _PAIR_FORMS[self.name][1](np.asarray(t, dtype=float), self.params)


def _lorentzian(t, p):
    c = p["c"]
    return np.sqrt(c) / (t * t + c)


def _dispersive(t, p):
    c = p["c"]
    return t / (t * t + c)


def _log_branch(t, p):
    c = p["c"]
    return 0.5 * np.log(t * t + c)


def _arctan(t, p):
    c = p["c"]
    return np.arctan(t / np.sqrt(c))


def _axis_log_modulus(t, p):
    # log|1 - exp(i*om*(t - t0))| for an amplitude zero on the real axis
    om = 2.0 * np.pi / p["period"]
    s = np.abs(np.sin(0.5 * om * (t - p["t0"])))
    return np.log(np.maximum(2.0 * s, 1e-300))


def _axis_sawtooth(t, p):
    # conjugate of the above: (pi - s)/2 with s = om*(t-t0) mod 2pi
    om = 2.0 * np.pi / p["period"]
    s = np.mod(om * (t - p["t0"]), 2.0 * np.pi)
    return 0.5 * (np.pi - s)


_PAIR_FORMS = {
    "lorentzian": (_lorentzian, lambda t, p: -_dispersive(t, p)),
    "dispersive": (_dispersive, _lorentzian),
    "log_branch": (_log_branch, _arctan),
    "arctan": (_arctan, lambda t, p: -_log_branch(t, p)),
    "axis_log_modulus": (_axis_log_modulus, _axis_sawtooth),
    "axis_sawtooth": (_axis_sawtooth, lambda t, p: -_axis_log_modulus(t, p)),
}

_PAIR_NOTES = {
    "lorentzian": "decays like 1/t^2; valid standalone",
    "dispersive": "decays like 1/t; valid standalone",
    "log_branch": "grows like log|t|; valid only in zero-sum combinations, conjugate modulo a constant",
    "arctan": "tends to +-pi/2; conjugate modulo a constant",
    "axis_log_modulus": "periodic, integrable log singularity at t0; series converges in the mean",
    "axis_sawtooth": "periodic, jump at t0; series converges in the mean",
}

PAIR_KINDS = tuple(_PAIR_FORMS)


def make_conjugate_pair(kind: str, **params) -> ConjugatePair:
    if kind not in _PAIR_FORMS:
        raise ValueError(f"unknown pair kind {kind!r}; choose from {PAIR_KINDS}")
    if kind in ("lorentzian", "dispersive", "log_branch", "arctan"):
        if "c" not in params or not params["c"] > 0:
            raise ValueError(f"{kind} needs parameter c > 0")
    else:
        if "t0" not in params or "period" not in params:
            raise ValueError(f"{kind} needs parameters t0 and period")
    return ConjugatePair(kind, dict(params), _PAIR_NOTES[kind])


def conjugate_with_tails(polar: PolarDecomposition, direction: str,
                         opts: TransformOptions = TransformOptions(),
                         terms: tuple = (),
                         decay_threshold: float | None = None):
    """Conjugate of log-modulus or phase with dictionary-handled growth.

    Fits the declared dictionary terms (plus a constant) to the source
    array, transforms the decaying remainder numerically, and adds back the
    analytic conjugates of the fitted terms.

    Parameters
    ----------
    direction : "modulus_to_phase" or "phase_to_modulus"
    terms : sequence of ConjugatePair (or (kind, params) specs)
    decay_threshold : float, optional
        Maximum allowed |remainder| at the window edges, relative to the
        source scale.  Default 1e-3.

    Returns
    -------
    (array, diagnostics) where diagnostics holds the fitted coefficients
    and a tail-truncation error estimate O(max|edge remainder| * ln(T)/T).
    """
    if direction not in ("modulus_to_phase", "phase_to_modulus"):
        raise ValueError("direction must be 'modulus_to_phase' or 'phase_to_modulus'")
    t = polar.grid.times()
    source = polar.log_modulus if direction == "modulus_to_phase" else polar.phase
    pairs = [p if isinstance(p, ConjugatePair) else make_conjugate_pair(p[0], **dict(p[1]))
             for p in terms]

    ok = ~polar.zero_flags & np.isfinite(source)
    cols = [np.ones_like(t)] + [p.forward(t) for p in pairs]
    a = np.stack(cols, axis=1)
    coef, _, rank, _ = np.linalg.lstsq(a[ok], source[ok], rcond=None)
    if rank < a.shape[1]:
        raise ValueError("rank-deficient dictionary fit")
    remainder = source - a @ coef

    scale = max(float(np.max(np.abs(source[ok]))), 1e-30)
    if decay_threshold is None:
        decay_threshold = 1e-3
    k = max(2, polar.grid.n // 100)
    edge = max(float(np.max(np.abs(remainder[:k]))), float(np.max(np.abs(remainder[-k:]))))
    if edge > decay_threshold * scale:
        raise DecayCheckError(
            f"remainder does not decay: |edge| = {edge:.3e} > {decay_threshold:.1e} * scale"
        )

    if not np.all(np.isfinite(remainder)):
        # flagged samples of a log-singular source: the remainder is smooth
        # there, so interpolation is accurate
        good = np.isfinite(remainder)
        remainder = np.interp(np.arange(t.size), np.flatnonzero(good), remainder[good])

    core = hilbert_line(remainder, polar.grid, TransformOptions(method=opts.method))
    analytic = np.zeros_like(t)
    for p, c in zip(pairs, coef[1:]):
        analytic = analytic + c * p.conjugate(t)

    halfwidth = opts.window_halfwidth or 0.5 * (t[-1] - t[0])
    tail = edge * np.log(max(halfwidth, 2.0)) / (np.pi * max(halfwidth, 1e-30))
    diagnostics = {
        "constant": float(coef[0]),
        "coefficients": {f"{p.name}:{p.params}": float(c) for p, c in zip(pairs, coef[1:])},
        "remainder_edge": edge,
        "tail_estimate": float(tail),
        "method": opts.method,
    }
    return opts.sign * (core + analytic), diagnostics
