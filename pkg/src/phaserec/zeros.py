"""Cyclic amplitudes as z-polynomials (z = exp(i*Omega*t)), their complex
zeros, and the half-plane / unit-circle classification.

A zero at z maps to t = -i*Ln(z)/Omega with the principal logarithm, so
Re t lies in the principal window (-pi/Omega, pi/Omega] and

    |z| < 1  <=>  Im t > 0  (upper half plane)
    |z| = 1  <=>  real-axis zero
    |z| > 1  <=>  Im t < 0  (lower half plane)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import ComplexSignal, DegenerateSignalError

__all__ = [
    "TrigPolynomial",
    "Zero",
    "ZeroSet",
    "AliasingError",
    "RootConvergenceError",
    "fit_trig_polynomial",
    "find_zeros",
    "classify",
    "perturbation_scan",
    "MigrationReport",
    "write_zeros_csv",
]


class AliasingError(ValueError):
    """Dropped-frequency energy exceeds the aliasing tolerance."""


class RootConvergenceError(RuntimeError):
    """Root iteration failed to certify residuals; partial results attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class TrigPolynomial:
    """Finite z-polynomial representation of a cyclic amplitude.

    phi(t) = sum_j coeffs[j] * z**(lowest + j),  z = exp(i*omega*t).

    ``coeffs[0]`` and ``coeffs[-1]`` are nonzero (tight degree).  When the
    amplitude is time-inversion invariant the coefficients are real up to
    round-off and ``real_coefficients`` is set.
    """

    omega: float
    lowest: int
    coeffs: np.ndarray
    real_coefficients: bool = False
    reconstruction_error: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if c.size < 1 or c[0] == 0 or c[-1] == 0:
            raise ValueError("coefficients must have nonzero ends (tight degree)")
        if not self.real_coefficients:
            if float(np.max(np.abs(c.imag))) <= 1e-12 * float(np.max(np.abs(c))):
                object.__setattr__(self, "real_coefficients", True)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def evaluate(self, t) -> np.ndarray:
        z = np.exp(1j * self.omega * np.asarray(t, dtype=complex))
        p = np.polynomial.polynomial.polyval(z, self.coeffs)
        return p * z**self.lowest


@dataclass(frozen=True)
class Zero:
    z: complex
    t: complex
    multiplicity: int
    half_plane: str  # "upper", "lower", or "axis"


@dataclass(frozen=True)
class ZeroSet:
    entries: tuple[Zero, ...]
    omega: float
    axis_tol: float

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def group(self, half_plane: str) -> tuple[Zero, ...]:
        return tuple(e for e in self.entries if e.half_plane == half_plane)

    def in_window(self, halfwidth: float, boundary_tol: float = 1e-6) -> tuple[Zero, ...]:
        """Zeros with Re t in the half-open window (-halfwidth, halfwidth].

        The window is shifted by ``boundary_tol`` so that a zero sitting on
        the +halfwidth edge counts once regardless of round-off, and its
        translate on the -halfwidth edge not at all.
        """
        lo, hi = -halfwidth + boundary_tol, halfwidth + boundary_tol
        return tuple(e for e in self.entries if lo < e.t.real <= hi)


def fit_trig_polynomial(signal: ComplexSignal, n_harmonics: int | None = None,
                        coeff_tol: float = 1e-12,
                        alias_tol: float = 1e-8) -> TrigPolynomial:
    """Discrete Fourier coefficients of one exactly sampled period.

    Coefficients are referred to absolute time (the grid's ``t_start`` is
    compensated), trimmed to a tight degree, and checked for aliasing:
    energy at dropped frequencies above ``alias_tol`` of the total raises
    :class:`AliasingError`.
    """
    grid = signal.grid
    if grid.period is None:
        raise ValueError("signal is not cyclic (grid has no period)")
    amax = float(np.max(np.abs(signal.values)))
    if amax == 0.0:
        raise DegenerateSignalError("degenerate signal: all samples are zero")
    om = grid.fundamental
    n = grid.n

    c = np.fft.fft(signal.values) / n
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)  # harmonic index per bin
    c = c * np.exp(-1j * m * om * grid.t_start)

    cmax = float(np.max(np.abs(c)))
    if n_harmonics is None:
        keep = np.abs(c) > coeff_tol * cmax
        if not np.any(keep):
            raise DegenerateSignalError("degenerate signal: no significant harmonics")
        n_keep = int(np.max(np.abs(m[keep])))
    else:
        n_keep = int(n_harmonics)
    if n < 4 * n_keep + 4:
        raise ValueError(f"need at least {4 * n_keep + 4} samples for {n_keep} harmonics")

    band = np.abs(m) <= n_keep
    total = float(np.sum(np.abs(c) ** 2))
    dropped = float(np.sum(np.abs(c[~band]) ** 2))
    if dropped > alias_tol * total:
        raise AliasingError(
            f"aliasing detected: dropped-frequency energy {dropped:.3e} "
            f"exceeds {alias_tol:.1e} of total {total:.3e}"
        )

    full = np.zeros(2 * n_keep + 1, dtype=complex)
    full[m[band] + n_keep] = c[band]

    sig = np.abs(full) > coeff_tol * cmax
    lo, hi = int(np.argmax(sig)), int(full.size - 1 - np.argmax(sig[::-1]))
    coeffs = full[lo:hi + 1].copy()
    lowest = lo - n_keep

    real_ok = float(np.max(np.abs(coeffs.imag))) <= 1e-10 * cmax
    if real_ok:
        coeffs = coeffs.real.astype(complex)

    fitted = np.polynomial.polynomial.polyval(
        np.exp(1j * om * grid.times()), coeffs
    ) * np.exp(1j * om * grid.times()) ** lowest
    err = float(np.max(np.abs(fitted - signal.values))) / amax

    return TrigPolynomial(om, lowest, coeffs, real_ok, err)


# ---------------------------------------------------------------------------
# Root finding: simultaneous Aberth-Ehrlich iteration with a
# companion-matrix eigenvalue fallback.  Final residuals are always
# certified on the undeflated polynomial.


def _aberth(coeffs: np.ndarray, max_iter: int = 200):
    """All roots of sum coeffs[j] x^j by Aberth-Ehrlich iteration."""
    c = coeffs / coeffs[-1]
    d = c.size - 1
    dc = c[1:] * np.arange(1, d + 1)
    radius = 1.0 + float(np.max(np.abs(c[:-1])))
    # deterministic, slightly irregular starting circle avoids symmetric stalls
    ang = 2.0 * np.pi * np.arange(d) / d + 0.3763902912
    x = radius * np.exp(1j * ang) * (1.0 + 0.05 * np.cos(3.0 * ang + 0.5))
    polyval = np.polynomial.polynomial.polyval
    converged = False
    for _ in range(max_iter):
        p = polyval(x, c)
        dp = polyval(x, dc)
        dp = np.where(dp == 0, 1e-300, dp)
        w = p / dp
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        s = np.sum(1.0 / diff, axis=1) - 1.0 / np.diagonal(diff)
        denom = 1.0 - w * s
        denom = np.where(denom == 0, 1e-300, denom)
        step = w / denom
        x = x - step
        if np.max(np.abs(step)) < 1e-14 * (1.0 + np.max(np.abs(x))):
            converged = True
            break
    for _ in range(3):  # Newton polish on the original polynomial
        p = polyval(x, c)
        dp = polyval(x, dc)
        dp = np.where(dp == 0, 1e-300, dp)
        x = x - p / dp
    return x, converged


def _cluster(roots: np.ndarray, radius_scale: float):
    """Merge roots within radius_scale*max(1,|z|) into (center, mult)."""
    order = np.lexsort((roots.imag, roots.real))
    rs = roots[order]
    used = np.zeros(rs.size, dtype=bool)
    clusters = []
    for i in range(rs.size):
        if used[i]:
            continue
        members = [rs[i]]
        used[i] = True
        for j in range(i + 1, rs.size):
            if used[j]:
                continue
            if abs(rs[j] - rs[i]) <= radius_scale * max(1.0, abs(rs[i])):
                members.append(rs[j])
                used[j] = True
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters


def find_zeros(p: TrigPolynomial, axis_tol: float = 1e-6,
               cluster_radius: float = 1e-6,
               residual_tol: float = 1e-8) -> ZeroSet:
    """All ``degree`` roots of the z-polynomial, mapped to the t-plane.

    Residuals are certified as |p(z_k)| <= residual_tol * max|c| *
    max(1,|z_k|)**degree for every returned zero; repeated roots are merged
    within the cluster radius and reported with multiplicities (clusters
    signal numerical trouble in these models, so they are surfaced, never
    hidden).
    """
    c = p.coeffs
    d = p.degree
    if d < 1:
        raise ValueError("degree must be >= 1")

    def solve(coeffs: np.ndarray) -> np.ndarray:
        deg = coeffs.size - 1
        # Pure even polynomial: solve in w = z^2 (half the degree) and map
        # back as +-sqrt(w); the cyclic models produce exactly this shape.
        if deg >= 2 and deg % 2 == 0:
            odd = coeffs[1::2]
            if float(np.max(np.abs(odd))) <= 1e-14 * float(np.max(np.abs(coeffs))):
                w = solve(coeffs[0::2])
                r = np.sqrt(w)
                return np.concatenate([r, -r])
        roots, ok = _aberth(coeffs)
        if not ok:
            roots = np.roots(coeffs[::-1])  # companion-matrix fallback
        return roots

    roots = solve(c)
    cmax = float(np.max(np.abs(c)))
    polyval = np.polynomial.polynomial.polyval

    def certified(zs: np.ndarray) -> np.ndarray:
        res = np.abs(polyval(zs, c))
        bound = residual_tol * cmax * np.maximum(1.0, np.abs(zs)) ** d
        return res <= bound

    if not np.all(certified(roots)):
        fallback = np.roots(c[::-1])
        if np.all(certified(fallback)):
            roots = fallback
        else:
            bad = int(np.sum(~certified(fallback)))
            raise RootConvergenceError(
                f"{bad} of {d} roots failed residual certification",
                partial=fallback,
            )

    clusters = _cluster(roots, cluster_radius)
    entries = []
    for z, mult in clusters:
        if p.real_coefficients and abs(z.imag) <= cluster_radius * max(1.0, abs(z)):
            # real-coefficient polynomials have exactly real roots here;
            # snapping keeps z on the negative real axis mapped to the
            # t = +pi/omega representative
            z = complex(z.real, 0.0)
        t = -1j * np.log(z) / p.omega
        entries.append(Zero(z, complex(t), mult, _half_plane(z, axis_tol)))
    entries.sort(key=lambda e: (e.t.real, e.t.imag))

    zs = ZeroSet(tuple(entries), p.omega, axis_tol)
    if zs.total_multiplicity != d:
        raise RootConvergenceError(
            f"cluster multiplicities sum to {zs.total_multiplicity}, expected {d}"
        )
    return zs


def _half_plane(z: complex, tol: float) -> str:
    r = abs(z)
    if abs(r - 1.0) <= tol:
        return "axis"
    return "upper" if r < 1.0 else "lower"


def classify(zs: ZeroSet, tol: float) -> ZeroSet:
    """Reassign half-plane classes with the given |z| tolerance.

    Axis ties belong with the on-or-outside group (|z| >= 1) wherever the
    zero-derived sums are formed downstream.
    """
    entries = tuple(
        Zero(e.z, e.t, e.multiplicity, _half_plane(e.z, tol)) for e in zs.entries
    )
    return ZeroSet(entries, zs.omega, tol)


@dataclass(frozen=True)
class MigrationReport:
    """Zero migration between a base and a perturbed polynomial."""

    moved: tuple  # (z_base, z_perturbed, |dz|) triples
    new: tuple    # (z, |z|, negligible) triples
    removed: tuple
    max_displacement_z: float
    max_displacement_t: float
    ambiguous: bool


def perturbation_scan(base: ZeroSet | TrigPolynomial,
                      perturbed: ZeroSet | TrigPolynomial,
                      eps_threshold: float = 1e-2) -> MigrationReport:
    """Match zeros of two polynomials by nearest neighbor in z.

    New zeros are flagged "asymptotically negligible" when |z| lies outside
    [eps_threshold, 1/eps_threshold]; such zeros contribute at most
    eps_threshold**n / n to either coefficient sum.
    """
    from scipy.optimize import linear_sum_assignment

    zb = base if isinstance(base, ZeroSet) else find_zeros(base)
    zp = perturbed if isinstance(perturbed, ZeroSet) else find_zeros(perturbed)

    b = np.concatenate([[e.z] * e.multiplicity for e in zb.entries])
    q = np.concatenate([[e.z] * e.multiplicity for e in zp.entries])
    tb = np.concatenate([[e.t] * e.multiplicity for e in zb.entries])
    tq = np.concatenate([[e.t] * e.multiplicity for e in zp.entries])

    nb, nq = b.size, q.size
    size = max(nb, nq)
    # pad with a large sentinel cost so unmatched entries fall out cleanly
    cost = np.full((size, size), 1e6)
    cost[:nb, :nq] = np.abs(b[:, None] - q[None, :])
    rows, cols = linear_sum_assignment(cost)

    t_period = 2.0 * np.pi / zb.omega
    moved, new, removed = [], [], []
    max_dz = 0.0
    max_dt = 0.0
    for r, cidx in zip(rows, cols):
        if r < nb and cidx < nq:
            dz = float(abs(b[r] - q[cidx]))
            moved.append((complex(b[r]), complex(q[cidx]), dz))
            max_dz = max(max_dz, dz)
            # real parts live on a circle of circumference t_period
            dre = (tb[r].real - tq[cidx].real + 0.5 * t_period) % t_period - 0.5 * t_period
            dim = tb[r].imag - tq[cidx].imag
            max_dt = max(max_dt, float(np.hypot(dre, dim)))
        elif r >= nb and cidx < nq:
            mag = float(abs(q[cidx]))
            negligible = mag <= eps_threshold or mag >= 1.0 / eps_threshold
            new.append((complex(q[cidx]), mag, negligible))
        elif r < nb and cidx >= nq:
            removed.append(complex(b[r]))

    # ambiguity: two base zeros matched into one perturbed cluster location
    ambiguous = False
    if moved:
        targets = np.array([m[1] for m in moved])
        d = np.abs(targets[:, None] - targets[None, :])
        np.fill_diagonal(d, np.inf)
        ambiguous = bool(np.any(d < 1e-12))

    return MigrationReport(tuple(moved), tuple(new), tuple(removed),
                           max_dz, max_dt, ambiguous)


def write_zeros_csv(zs: ZeroSet, path) -> None:
    """Zero table: re_t, im_t, re_z, im_z, multiplicity, class."""
    fmt = "%.17g"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("re_t,im_t,re_z,im_z,multiplicity,class\n")
        for e in zs.entries:
            f.write(
                f"{fmt % e.t.real},{fmt % e.t.imag},{fmt % e.z.real},"
                f"{fmt % e.z.imag},{e.multiplicity},{e.half_plane}\n"
            )
