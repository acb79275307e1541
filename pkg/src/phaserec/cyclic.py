"""Fourier coefficients of log-modulus (A_n) and phase (B_n) for cyclic
amplitudes, computed two independent ways: from the amplitude zeros and
from samples.

Convention
----------
Both constructions store the *root power-sum* convention

    A_0 = -sum_{|z|<1} m_k ln|z_k|
    A_n = [ sum_{|z|>=1} m_k z_k^-n  +  sum_{|z|<1} m_k z_k^n ] / n
    B_n = [ sum_{|z|>=1} m_k z_k^-n  -  sum_{|z|<1} m_k (z_k^n - 2(-1)^n) ] / n

which for n >= 1 is the negative of the raw projection coefficients of
log-modulus and detrended phase (the sample side is mapped into the same
convention: projections are negated and the phase's secular winding
contributes the 2*w*(-1)^n/n sawtooth correction), so the two provenances
are directly comparable term by term.  A_0 equals the mean of the
log-modulus over the period.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import PolarDecomposition, TrendRecord, TrendTerm, _wrap
from .zeros import ZeroSet

__all__ = [
    "FourierPair",
    "coefficients_from_zeros",
    "coefficients_from_samples",
    "detrend_cyclic_phase",
    "phase_winding",
    "compare",
    "ComparisonReport",
    "write_fourier_csv",
]


@dataclass(frozen=True)
class FourierPair:
    """A[0..n_max] cosine-side and B[1..n_max] sine-side coefficients.

    ``B`` is stored with index n-1 (no n = 0 term: the phase of a
    time-inversion-invariant amplitude is odd).  ``imag_residual`` is the
    largest imaginary part discarded from the zero-derived sums; conjugate
    symmetry of the zeros makes it vanish.
    """

    A: np.ndarray
    B: np.ndarray
    n_max: int
    provenance: str
    imag_residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        if self.A.shape != (self.n_max + 1,) or self.B.shape != (self.n_max,):
            raise ValueError("A needs n_max+1 entries and B needs n_max")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise ValueError("coefficients must be finite")


def coefficients_from_zeros(zs: ZeroSet, n_max: int,
                            imag_tol: float = 1e-10) -> FourierPair:
    """Zero-derived coefficients; axis zeros join the |z| >= 1 sums."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not zs.entries:
        raise ValueError("incomplete ZeroSet: no entries")
    plus = [(e.z, e.multiplicity) for e in zs.entries if e.half_plane in ("axis", "lower")]
    minus = [(e.z, e.multiplicity) for e in zs.entries if e.half_plane == "upper"]

    n = np.arange(1, n_max + 1)
    s_plus = np.zeros(n_max, dtype=complex)
    for z, m in plus:
        s_plus += m * z ** (-n.astype(float))
    s_minus = np.zeros(n_max, dtype=complex)
    m_minus = 0
    for z, m in minus:
        s_minus += m * z ** n
        m_minus += m

    a0 = -sum(m * np.log(abs(z)) for z, m in minus)
    a = (s_plus + s_minus) / n
    b = (s_plus - s_minus + 2.0 * m_minus * (-1.0) ** n) / n

    resid = float(max(np.max(np.abs(a.imag), initial=0.0),
                      np.max(np.abs(b.imag), initial=0.0)))
    scale = float(max(np.max(np.abs(a), initial=0.0), 1.0))
    if resid > imag_tol * scale:
        raise ValueError(
            f"imaginary residue {resid:.3e} of the zero sums exceeds tolerance; "
            "zero set is not closed under conjugation"
        )
    return FourierPair(np.concatenate([[a0], a.real]), b.real, n_max,
                       "from_zeros", resid)


def phase_winding(polar: PolarDecomposition) -> float:
    """Windings of the phase over one period (integer, or half-integer
    when sign-flipping axis zeros are present)."""
    if polar.grid.period is None:
        raise ValueError("grid has no period")
    t = polar.grid.times()
    ph = polar.phase + polar.trend.evaluate("phase", t)
    # continue the last sample back to the first on the nearest branch
    closing = _wrap(ph[0] - ph[-1])
    total = (ph[-1] + closing) - ph[0]
    w = total / (2.0 * np.pi)
    return round(2.0 * w) / 2.0


def detrend_cyclic_phase(polar: PolarDecomposition) -> PolarDecomposition:
    """Remove the exact secular part w*Omega*t of a cyclic phase.

    The slope is fixed by the integer (or half-integer) winding over the
    period, not by least squares: a least-squares line is contaminated by
    the odd harmonics of the periodic remainder.
    """
    if polar.grid.period is None:
        raise ValueError("grid has no period")
    w = phase_winding(polar)
    slope = w * polar.grid.fundamental
    t = polar.grid.times()
    ph = polar.phase - slope * t
    term = TrendTerm("phase", "t", float(slope), "linear")
    return PolarDecomposition(polar.grid, polar.log_modulus, ph,
                              polar.trend.extended([term]),
                              polar.zero_flags, polar.label)


def coefficients_from_samples(polar: PolarDecomposition, n_max: int,
                              secular_count: float | None = None,
                              axis_zeros: tuple = (),
                              log_scale: float = 0.0) -> FourierPair:
    """Sample-derived coefficients in the zero-sum convention.

    Requires a cyclic grid and a phase whose linear secular part has been
    removed and recorded in the trend (see :func:`detrend_cyclic_phase`).
    Flagged samples are excluded with quadrature-weight renormalization.

    The sine side is corrected for phase content that the detrending
    removed or that lives in recorded sign flips:

    * ``secular_count``: number of interior (|z| < 1) windings; each one
      contributes the sawtooth term ``2*(-1)^n / n``.  Defaults to the
      winding of the recorded linear trend, which is correct when the data
      is a plain zero product (no extra z^l prefactor, sign-flipping axis
      zeros only).
    * ``axis_zeros``: (t0, multiplicity) pairs of real-axis zeros whose
      phase ramp was absorbed by the detrending (even multiplicity leaves
      no jump in the data); each adds ``m*cos(n*Omega*t0)/n``.
    * ``log_scale``: log-modulus of the amplitude's overall prefactor,
      subtracted from A_0 so that A_0 describes the normalized zero
      product (pipelines pass log|c_0| of the fitted polynomial).

    Pipelines that already classified a ZeroSet should pass all three.
    """
    grid = polar.grid
    if grid.period is None:
        raise ValueError("grid has no period")
    if grid.n < 8 * n_max:
        raise ValueError(f"too few samples: need at least {8 * n_max}")
    om = grid.fundamental

    slope = polar.trend.linear_slope("phase")
    if slope is None:
        # accept an un-detrended phase only if it carries no secular winding
        if abs(phase_winding(polar)) > 0.25:
            raise ValueError("phase carries a secular winding; detrend it first")
        slope = 0.0
    if secular_count is None:
        secular_count = round(2.0 * slope / om) / 2.0

    t = grid.times()
    ok = (~polar.zero_flags & np.isfinite(polar.log_modulus)
          & np.isfinite(polar.phase))
    weight = np.where(ok, 1.0, 0.0)
    wsum = float(np.sum(weight))

    n = np.arange(1, n_max + 1)
    cosines = np.cos(np.outer(n, om * t))
    sines = np.sin(np.outer(n, om * t))

    a0 = float(np.sum(weight * polar.log_modulus) / wsum) - log_scale
    a = -2.0 * (cosines * (weight * polar.log_modulus)) @ np.ones(grid.n) / wsum
    b = -2.0 * (sines * (weight * polar.phase)) @ np.ones(grid.n) / wsum
    b = b + 2.0 * secular_count * (-1.0) ** n / n
    for t0, mult in axis_zeros:
        b = b + mult * np.cos(n * om * t0) / n

    return FourierPair(np.concatenate([[a0], a]), b, n_max, "from_samples")


@dataclass(frozen=True)
class ComparisonReport:
    dA: np.ndarray
    dB: np.ndarray
    rel_dA: np.ndarray
    rel_dB: np.ndarray
    max_abs: float
    l2: float
    weighted_l2: float
    axis_proximity: tuple = ()  # |z_k + 1| for the on-or-outside group

    def __str__(self):
        return (f"max|d| = {self.max_abs:.3e}, l2 = {self.l2:.3e}, "
                f"tail-weighted l2 = {self.weighted_l2:.3e}")


def compare(pair1: FourierPair, pair2: FourierPair,
            zero_set: ZeroSet | None = None) -> ComparisonReport:
    """Per-index differences between two coefficient pairs.

    The tail-down-weighted summary (weights 1/n) is the robust figure for
    axis-heavy zero sets, whose coefficient series converge only in the
    mean.  With a zero set supplied, the |z_k + 1| distances of the
    on-or-outside zeros are listed: differences scale with them when the
    near -1 mechanism is at work.
    """
    if pair1.n_max != pair2.n_max:
        raise ValueError("pairs must share n_max")
    dA = np.abs(pair1.A - pair2.A)
    dB = np.abs(pair1.B - pair2.B)
    denomA = np.maximum(np.maximum(np.abs(pair1.A), np.abs(pair2.A)), 1e-300)
    denomB = np.maximum(np.maximum(np.abs(pair1.B), np.abs(pair2.B)), 1e-300)
    alld = np.concatenate([dA, dB])
    n = np.arange(1, pair1.n_max + 1)
    wts = 1.0 / n
    weighted = np.sqrt((np.sum((wts * dA[1:]) ** 2) + np.sum((wts * dB) ** 2))
                       / np.sum(wts ** 2) / 2.0)
    prox = ()
    if zero_set is not None:
        prox = tuple(sorted(abs(e.z + 1.0) for e in zero_set.entries
                            if e.half_plane in ("axis", "lower")))
    return ComparisonReport(dA, dB, dA / denomA, dB / denomB,
                            float(np.max(alld)),
                            float(np.sqrt(np.mean(alld ** 2))),
                            float(weighted), prox)


def write_fourier_csv(pair: FourierPair, path) -> None:
    fmt = "%.17g"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("n,A_n,B_n,provenance\n")
        f.write(f"0,{fmt % pair.A[0]},,{pair.provenance}\n")
        for k in range(1, pair.n_max + 1):
            f.write(f"{k},{fmt % pair.A[k]},{fmt % pair.B[k - 1]},{pair.provenance}\n")
