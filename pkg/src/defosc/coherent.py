"""Generalized coherent states built by two independent routes.

Annihilation-eigenstate route: solve A |alpha> = alpha |alpha> on the
number basis, which gives the one-step recurrence
``c_n f(n) sqrt(n) = alpha c_{n-1}``.  For the TPT deformation the
normalized coefficients have the closed form
``C0 alpha^n sqrt((2 lam)^n Gamma(2 lam) / (n! Gamma(2 lam + n)))``;
for the pseudoharmonic one,
``C0 alpha^n sqrt(Gamma(2 s + 1) / (n! Gamma(2 s + n + 1)))``.

Displacement route: apply exp(alpha A^dag - alpha* A) to the vacuum.
For affine deformations the operators close an su(1,1) algebra, so the
exponential disentangles into an ordered product
``exp(zeta sqrt(d) A^dag) (1-|zeta|^2)^(k + n) exp(-zeta* sqrt(d) A)``
with level scale d, lowest weight k, and
``zeta = e^{i phi} tanh(|alpha| / sqrt(d))``.  Acting on the vacuum this
yields the negative-binomial family
``(1-|zeta|^2)^(k) sqrt(Gamma(n + 2k) / (n! Gamma(2k))) zeta^n``,
which is exactly normalized over the infinite basis.

Both routes are implemented with distinct arithmetic so that their
agreement is a genuine cross-check rather than a tautology.

Coefficient recurrences are accumulated in log magnitude to avoid
overflow at large |alpha|; normalization constants are computed
numerically (the eigenstate normalization sum has no elementary closed
form).
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SizeMismatchError, TruncationError
from .fock import FockVector, OperatorMatrix, apply, ladder_matrices, matrix_exponential
from .models import DeformationFunction, Model, ModelParams

__all__ = [
    "Method",
    "CoherentStateResult",
    "PhotonStatistics",
    "annihilation_eigenstate",
    "tpt_ladder_coefficients",
    "closed_form_bg_coefficients",
    "zeta_from_alpha",
    "displacement_state_closed_form",
    "deformed_displacement_coefficients",
    "displacement_state_direct",
    "displacement_state_factored",
    "factored_displacement_matrices",
    "compare_states",
    "photon_statistics",
    "harmonic_limit_deviation",
    "glauber_coefficients",
    "max_auto_cutoff",
]

#: Environment variable capping the auto-doubled cutoff of
#: :func:`annihilation_eigenstate`.
MAX_CUTOFF_ENV = "DEFOSC_MAX_CUTOFF"
_DEFAULT_MAX_CUTOFF = 4096


def max_auto_cutoff() -> int:
    raw = os.environ.get(MAX_CUTOFF_ENV)
    if raw is None:
        return _DEFAULT_MAX_CUTOFF
    try:
        val = int(raw)
    except ValueError as exc:
        raise DomainError(f"{MAX_CUTOFF_ENV} must be an integer, got {raw!r}") from exc
    if val < 2:
        raise DomainError(f"{MAX_CUTOFF_ENV} must be >= 2, got {val}")
    return val


class Method(Enum):
    ANNIHILATION_EIGENSTATE = "annihilation-eigenstate"
    DISPLACEMENT_FACTORED = "displacement-factored"
    DISPLACEMENT_DIRECT = "displacement-direct"


@dataclass(frozen=True)
class CoherentStateResult:
    """A constructed coherent state plus its construction diagnostics."""

    state: FockVector
    method: Method
    parameter: complex
    normalization_constant: float
    tail_mass: float
    model: Optional[ModelParams] = None


def _coefficients_from_log(logmag: np.ndarray, phase_step: float) -> tuple[np.ndarray, float]:
    """Rescale log-magnitude coefficients; returns (normalized coeffs, log of 1/norm of the raw family)."""
    shift = float(np.max(logmag))
    mags = np.exp(logmag - shift)
    norm = float(np.linalg.norm(mags))
    n = np.arange(logmag.size)
    coeffs = (mags / norm) * np.exp(1j * phase_step * n)
    log_norm_const = -(shift + math.log(norm))
    return coeffs, log_norm_const


def annihilation_eigenstate(
    f: DeformationFunction,
    alpha: complex,
    cutoff: int,
    tail_tol: float = 1e-12,
    max_cutoff: Optional[int] = None,
) -> CoherentStateResult:
    """Eigenstate of the deformed annihilation operator A = a f(n).

    Coefficients follow c_n = alpha c_{n-1} / (sqrt(n) f(n)) from c_0 = 1
    and are then normalized.  If the relative weight of the last kept
    coefficient exceeds ``tail_tol`` the cutoff is doubled, up to
    ``max_cutoff`` (default: DEFOSC_MAX_CUTOFF or 4096).
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    if tail_tol <= 0:
        raise DomainError(f"tail_tol must be positive, got {tail_tol}")
    limit = max_auto_cutoff() if max_cutoff is None else max_cutoff
    alpha = complex(alpha)
    n_kept = cutoff
    while True:
        f.validate_positive(n_kept)
        if alpha == 0:
            state = FockVector.vacuum(n_kept)
            return CoherentStateResult(state, Method.ANNIHILATION_EIGENSTATE, alpha, 1.0, 0.0, f.params)
        n = np.arange(1, n_kept, dtype=float)
        steps = math.log(abs(alpha)) - 0.5 * np.log(n * f.fsq(n))
        logmag = np.concatenate(([0.0], np.cumsum(steps)))
        coeffs, log_nf = _coefficients_from_log(logmag, cmath.phase(alpha))
        tail = float(abs(coeffs[-1]) ** 2)
        if tail <= tail_tol:
            state = FockVector(coeffs, tail_mass=tail)
            return CoherentStateResult(
                state, Method.ANNIHILATION_EIGENSTATE, alpha, math.exp(log_nf), tail, f.params
            )
        if 2 * n_kept > limit:
            raise TruncationError(
                f"tail mass {tail:.3e} above tolerance {tail_tol:.1e} at cutoff "
                f"{n_kept}; doubling would exceed the cap {limit} "
                f"(raise {MAX_CUTOFF_ENV} to allow larger bases)"
            )
        n_kept *= 2


def tpt_ladder_coefficients(lam: float, alpha: complex, cutoff: int) -> FockVector:
    """Eigenstate of the TPT ladder operator b, built from its own amplitudes.

    Uses the recurrence c_n sqrt(n (2 lam + n - 1)/(2 lam)) = alpha c_{n-1}
    directly, i.e. the route through the eigenfunction-derived operators;
    kept separate from :func:`annihilation_eigenstate` so the agreement of
    the two constructions can be asserted rather than assumed.
    """
    if lam <= 0.5:
        raise DomainError(f"need lam > 1/2, got {lam}")
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    alpha = complex(alpha)
    if alpha == 0:
        return FockVector.vacuum(cutoff)
    n = np.arange(1, cutoff, dtype=float)
    amp = np.sqrt(n * (2.0 * lam + n - 1.0) / (2.0 * lam))
    logmag = np.concatenate(([0.0], np.cumsum(math.log(abs(alpha)) - np.log(amp))))
    coeffs, _ = _coefficients_from_log(logmag, cmath.phase(alpha))
    return FockVector(coeffs, tail_mass=float(abs(coeffs[-1]) ** 2))


def closed_form_bg_coefficients(p: ModelParams, alpha: complex, cutoff: int) -> FockVector:
    """Annihilation-eigenstate coefficients from their gamma-function closed form.

    TPT:            c_n = C0 alpha^n sqrt((2 lam)^n Gamma(2 lam) / (n! Gamma(2 lam + n)))
    pseudoharmonic: c_n = C0 alpha^n sqrt(Gamma(2 s + 1) / (n! Gamma(2 s + n + 1)))

    Evaluated through log-gamma, then normalized numerically.
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    alpha = complex(alpha)
    if alpha == 0:
        return FockVector.vacuum(cutoff)
    n = np.arange(cutoff, dtype=float)
    if p.model is Model.TPT:
        two_lam = 2.0 * p.lam
        half_log = n * math.log(two_lam) + gammaln(two_lam) - gammaln(n + 1.0) - gammaln(two_lam + n)
    elif p.model is Model.PSEUDOHARMONIC:
        two_s = 2.0 * p.s
        half_log = gammaln(two_s + 1.0) - gammaln(n + 1.0) - gammaln(two_s + n + 1.0)
    else:
        raise DomainError("closed-form coefficients exist for the TPT and pseudoharmonic models only")
    logmag = n * math.log(abs(alpha)) + 0.5 * half_log
    coeffs, _ = _coefficients_from_log(logmag, cmath.phase(alpha))
    return FockVector(coeffs, tail_mass=float(abs(coeffs[-1]) ** 2))


def zeta_from_alpha(alpha: complex, lambda_eff: float) -> complex:
    """Map the displacement amplitude to the unit-disk parameter.

    zeta = e^{i phi} tanh(|alpha| / sqrt(2 lambda_eff)) with
    alpha = |alpha| e^{i phi}.  lambda_eff is lam for the TPT model and
    1/2 for the pseudoharmonic one (level scale d = 2 lambda_eff).
    """
    if lambda_eff <= 0:
        raise DomainError(f"lambda_eff must be positive, got {lambda_eff}")
    alpha = complex(alpha)
    r = abs(alpha)
    if r == 0:
        return 0j
    zeta = (alpha / r) * math.tanh(r / math.sqrt(2.0 * lambda_eff))
    # tanh saturates to 1.0 in floating point for very large |alpha|; keep
    # the result strictly inside the unit disk
    while abs(zeta) >= 1.0:
        zeta *= 1.0 - 4.0 * np.finfo(float).eps
    return zeta


def _nb_log_amplitudes(r_index: float, zeta: complex, cutoff: int) -> np.ndarray:
    """Log magnitudes of the exact negative-binomial displacement family."""
    z = abs(zeta) ** 2
    n = np.arange(cutoff, dtype=float)
    return (
        0.5 * r_index * math.log1p(-z)
        + n * math.log(abs(zeta))
        + 0.5 * (gammaln(n + r_index) - gammaln(n + 1.0) - gammaln(r_index))
    )


def _r_index(p: ModelParams) -> float:
    # Exponent family of the displacement state: 2 lam (TPT), 2 s + 1 (pseudoharmonic).
    if p.model is Model.TPT:
        return 2.0 * p.lam
    if p.model is Model.PSEUDOHARMONIC:
        return 2.0 * p.s + 1.0
    raise DomainError("displacement closed form exists for the TPT and pseudoharmonic models only")


def displacement_state_closed_form(p: ModelParams, zeta: complex, cutoff: int) -> CoherentStateResult:
    """Displacement coherent state from its closed-form coefficients.

    c_n = (1-|zeta|^2)^(r/2) sqrt(Gamma(n + r) / (n! Gamma(r))) zeta^n with
    r = 2 lam (TPT) or 2 s + 1 (pseudoharmonic).  The infinite family is
    exactly normalized, so the reported tail mass is
    1 - sum_{n<cutoff} |c_n|^2; the stored vector is renormalized on the
    truncation.
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    zeta = complex(zeta)
    if abs(zeta) >= 1:
        raise DomainError("displacement parameter outside unit disk")
    r = _r_index(p)
    if zeta == 0:
        return CoherentStateResult(
            FockVector.vacuum(cutoff), Method.DISPLACEMENT_FACTORED, zeta, 1.0, 0.0, p
        )
    mags = np.exp(_nb_log_amplitudes(r, zeta, cutoff))
    finite = float(np.sum(mags**2))
    tail = max(0.0, 1.0 - finite)
    n = np.arange(cutoff)
    raw = mags * np.exp(1j * cmath.phase(zeta) * n)
    state = FockVector(raw / math.sqrt(finite), tail_mass=tail)
    c0 = (1.0 - abs(zeta) ** 2) ** (r / 2.0)
    return CoherentStateResult(state, Method.DISPLACEMENT_FACTORED, zeta, c0, tail, p)


def deformed_displacement_coefficients(f: DeformationFunction, zeta: complex, cutoff: int) -> np.ndarray:
    """Exact-family displacement coefficients built from the deformation itself.

    Vacuum image of the ordered-exponential product, written with generic
    f:  c_n = (1-|zeta|^2)^k * zeta^n * d^(n/2) * f(n)!/sqrt(n!)  where
    f(n)! = f(n) f(n-1) ... f(1).  Computed as a stepwise product so the
    arithmetic shares nothing with the gamma-function route.
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    zeta = complex(zeta)
    if abs(zeta) >= 1:
        raise DomainError("displacement parameter outside unit disk")
    k = f.bargmann_index
    d = f.su11_scale
    f.validate_positive(cutoff)
    n = np.arange(1, cutoff, dtype=float)
    ratios = zeta * np.sqrt(d * f.fsq(n) / n)
    coeffs = np.concatenate(([1.0 + 0j], np.cumprod(ratios)))
    return (1.0 - abs(zeta) ** 2) ** k * coeffs


def displacement_state_direct(
    f: DeformationFunction, alpha: complex, cutoff: int, tail_tol: float = 1e-9
) -> CoherentStateResult:
    """Vacuum image of exp(alpha A^dag - alpha* A) by dense matrix exponential.

    The deviation of the raw image norm from 1 is a truncation diagnostic
    (the generator is antihermitian, so the exact image is unit norm); the
    returned state is renormalized.
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    alpha = complex(alpha)
    lowering, raising = ladder_matrices(f, cutoff)
    gen = alpha * raising - np.conj(alpha) * lowering
    image = matrix_exponential(gen).entries[:, 0]
    norm = float(np.linalg.norm(image))
    tail = float(abs(image[-1]) ** 2) / norm**2
    if tail > tail_tol:
        raise TruncationError(
            f"direct displacement image has tail mass {tail:.3e} above tolerance "
            f"{tail_tol:.1e} at cutoff {cutoff}; increase the cutoff"
        )
    state = FockVector(image / norm, tail_mass=tail)
    return CoherentStateResult(state, Method.DISPLACEMENT_DIRECT, alpha, norm, tail, f.params)


def factored_displacement_matrices(
    f: DeformationFunction, alpha: complex, cutoff: int
) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Ordered factors of the disentangled displacement operator.

    Returns (raising factor, weight factor, lowering factor) whose product
    in that order equals exp(alpha A^dag - alpha* A) on the truncated
    basis:

        exp(zeta sqrt(d) A^dag) * diag((1-|zeta|^2)^(k+n)) * exp(-zeta* sqrt(d) A)

    with d the su(1,1) level scale of the deformation and k its lowest
    weight; for the TPT model the weight-factor diagonal is
    (1-|zeta|^2)^(lam+n).
    """
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    d = f.su11_scale
    k = f.bargmann_index
    zeta = zeta_from_alpha(alpha, d / 2.0)
    lowering, raising = ladder_matrices(f, cutoff)
    left = matrix_exponential(zeta * math.sqrt(d) * raising)
    n = np.arange(cutoff, dtype=float)
    weight = OperatorMatrix(np.diag(((1.0 - abs(zeta) ** 2) ** (k + n)).astype(complex)))
    right = matrix_exponential(-np.conj(zeta) * math.sqrt(d) * lowering)
    return left, weight, right


def displacement_state_factored(
    f: DeformationFunction, alpha: complex, cutoff: int, tail_tol: float = 1e-9
) -> CoherentStateResult:
    """Vacuum image of the ordered factor product (disentangled route)."""
    left, weight, right = factored_displacement_matrices(f, alpha, cutoff)
    vac = FockVector.vacuum(cutoff)
    image = apply(left, apply(weight, apply(right, vac)))
    norm = image.norm()
    tail = float(abs(image.coeffs[-1]) ** 2) / norm**2
    if tail > tail_tol:
        raise TruncationError(
            f"factored displacement image has tail mass {tail:.3e} above tolerance "
            f"{tail_tol:.1e} at cutoff {cutoff}; increase the cutoff"
        )
    state = FockVector(image.coeffs / norm, tail_mass=tail)
    zeta = zeta_from_alpha(alpha, f.su11_scale / 2.0)
    return CoherentStateResult(state, Method.DISPLACEMENT_FACTORED, zeta, norm, tail, f.params)


def compare_states(u: FockVector, v: FockVector) -> tuple[float, float]:
    """Phase-aligned maximum coefficient difference and infidelity.

    Physical states are rays, so v is rotated by the global phase that
    aligns its largest-|u| coefficient with u before differencing.
    Returns (max_n |u_n - v_n e^{i theta}|, 1 - |<u|v>|^2).
    """
    if u.cutoff != v.cutoff:
        raise SizeMismatchError(f"cutoffs differ: {u.cutoff} vs {v.cutoff}")
    for name, vec in (("u", u), ("v", v)):
        if abs(vec.norm() - 1.0) > 1e-9:
            raise DomainError(f"compare_states expects normalized inputs; |{name}| = {vec.norm()!r}")
    i = int(np.argmax(np.abs(u.coeffs)))
    if abs(v.coeffs[i]) > 0:
        rot = cmath.exp(1j * (cmath.phase(u.coeffs[i]) - cmath.phase(v.coeffs[i])))
    else:
        rot = 1.0
    diff = float(np.max(np.abs(u.coeffs - v.coeffs * rot)))
    fidelity = abs(complex(np.vdot(u.coeffs, v.coeffs))) ** 2
    return diff, max(0.0, 1.0 - fidelity)


@dataclass(frozen=True)
class PhotonStatistics:
    mean_n: float
    variance_n: float
    mandel_q: Optional[float]  # None when the mean occupation vanishes


def photon_statistics(v: FockVector) -> PhotonStatistics:
    """Mean occupation, variance, and Mandel Q = Var/<n> - 1 of a normalized state."""
    if abs(v.norm() - 1.0) > 1e-9:
        raise DomainError(f"photon_statistics expects a normalized state; norm = {v.norm()!r}")
    n = np.arange(v.cutoff, dtype=float)
    p = np.abs(v.coeffs) ** 2
    mean = float(np.sum(n * p))
    var = max(0.0, float(np.sum(n * n * p)) - mean**2)
    q = var / mean - 1.0 if mean > 0 else None
    return PhotonStatistics(mean, var, q)


def glauber_coefficients(alpha: complex, cutoff: int) -> FockVector:
    """Harmonic-oscillator coherent-state coefficients e^{-|a|^2/2} alpha^n / sqrt(n!),
    renormalized on the truncation."""
    if cutoff < 2:
        raise DomainError(f"need cutoff >= 2, got {cutoff}")
    alpha = complex(alpha)
    if alpha == 0:
        return FockVector.vacuum(cutoff)
    n = np.arange(cutoff, dtype=float)
    logmag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    coeffs, _ = _coefficients_from_log(logmag, cmath.phase(alpha))
    return FockVector(coeffs, tail_mass=float(abs(coeffs[-1]) ** 2))


def harmonic_limit_deviation(alpha: complex, lambdas: Sequence[float], cutoff: int) -> list[float]:
    """Max coefficient deviation of the TPT eigenstate family from the Glauber one.

    For each lam the TPT annihilation-eigenstate coefficients are compared
    against the harmonic ones at the same alpha; the deviation decreases
    toward zero as lam grows (at fixed alpha it scales like 1/lam).
    """
    glauber = glauber_coefficients(alpha, cutoff)
    out = []
    for lam in lambdas:
        state = closed_form_bg_coefficients(ModelParams.tpt(lam), alpha, cutoff)
        out.append(float(np.max(np.abs(state.coeffs - glauber.coeffs))))
    return out
