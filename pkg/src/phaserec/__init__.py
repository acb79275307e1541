"""Reciprocity between the log-modulus and phase of time-dependent
complex amplitudes: polar decomposition, conjugate (Hilbert) transforms,
complex-plane zeros of cyclic amplitudes, zero-derived Fourier pairs,
closed-form model wavefunctions, and an end-to-end verifier."""

from .signals import (TimeGrid, ComplexSignal, PolarDecomposition,
                      TrendRecord, TrendTerm, to_polar, subtract_trend)
from .hilbert import (TransformOptions, ConjugatePair, make_conjugate_pair,
                      hilbert_line, hilbert_periodic, conjugate_with_tails)
from .zeros import (TrigPolynomial, Zero, ZeroSet, fit_trig_polynomial,
                    find_zeros, classify, perturbation_scan)
from .cyclic import (FourierPair, coefficients_from_zeros,
                     coefficients_from_samples, detrend_cyclic_phase, compare)
from .models import (TwoStateParams, ExpandingParams, PacketParams,
                     FrozenGaussianParams, MatrixHamiltonian,
                     two_state_amplitude, two_state_excited,
                     two_state_hamiltonian, perturbed_two_state,
                     expanding_log_modulus, expanding_phase,
                     expanding_reference_fractions, packet_log_amplitude,
                     frozen_gaussian_log, propagate, adiabaticity_ratio)
from .reciprocity import (ReciprocityReport, SignAmbiguousError, verify,
                          verify_split)

__version__ = "0.1.0"
