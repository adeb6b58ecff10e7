"""Key-rate bounds for coherent-state CV-QKD with trusted source noise.

Alice modulates coherent states with variance ``V_A`` on top of a trusted
source excess noise ``eps0``; the channel has transmittance ``T`` and
untrusted excess noise ``eps_c``.  Bob homodynes.  The lower bounds on the
direct and reverse reconciliation key rates are obtained by handing the
trusted noise to the eavesdropper, so that the Alice-Bob state can be
purified and the Holevo quantities follow from two-mode Gaussian entropies.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DomainError, PreconditionError
from .gaussian import (
    TOL,
    SymplecticSpectrum,
    TwoModeCovariance,
    discriminant_floor,
    entropy_from_spectrum,
    entropy_g,
    entropy_one_mode,
    spectrum_from_invariants,
)

SIGMA_Z = np.diag([1.0, -1.0])
Q_PROJECTOR = np.diag([1.0, 0.0])

# transmittance used as the T -> 1 limit when root-finding the noise limit
UNIT_T = 1.0 - 1e-10


@dataclass(frozen=True)
class SourceParams:
    """Alice's modulation variance and the trusted source excess noise (SNU)."""

    modulation_variance: float
    source_excess_noise: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.modulation_variance) or self.modulation_variance < 0:
            raise DomainError("modulation variance V_A must be finite and >= 0")
        if not math.isfinite(self.source_excess_noise) or self.source_excess_noise < 0:
            raise DomainError("source excess noise epsilon0 must be finite and >= 0")

    @classmethod
    def from_total_variance(cls, v: float, source_excess_noise: float = 0.0) -> "SourceParams":
        if not v >= 1:
            raise DomainError("total variance V must be >= 1")
        return cls(v - 1.0, source_excess_noise)

    @property
    def V(self) -> float:
        return self.modulation_variance + 1.0

    @property
    def eps0(self) -> float:
        return self.source_excess_noise


@dataclass(frozen=True)
class ChannelParams:
    """Channel transmittance and untrusted excess noise (SNU)."""

    transmittance: float
    excess_noise: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.transmittance < 1.0):
            raise DomainError("transmittance must lie strictly inside (0,1)")
        if not math.isfinite(self.excess_noise) or self.excess_noise < 0:
            raise DomainError("channel excess noise epsilon_c must be finite and >= 0")

    @property
    def T(self) -> float:
        return self.transmittance

    @property
    def eps_c(self) -> float:
        return self.excess_noise


@dataclass(frozen=True)
class KeyRateReport:
    mutual_info: float
    holevo_direct: float
    holevo_reverse: float
    k_direct: float
    k_reverse: float
    k_direct_asymptotic: float
    k_reverse_asymptotic: float
    prior_k_reverse: Optional[float] = None
    prior_k_reverse_asymptotic: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def chi_total(src: SourceParams, ch: ChannelParams) -> float:
    """Total input-referred added noise ``(1-T)/T + eps0 + eps_c``."""
    T = ch.T
    return (1.0 - T) / T + src.eps0 + ch.eps_c


def build_gamma_ab(src: SourceParams, ch: ChannelParams) -> TwoModeCovariance:
    """Covariance of the purified Alice-Bob state after the channel."""
    V, T = src.V, ch.T
    chi = chi_total(src, ch)
    gamma = TwoModeCovariance(
        V * np.eye(2),
        T * (V + chi) * np.eye(2),
        math.sqrt(T * (V * V - 1.0)) * SIGMA_Z,
    )
    gamma.check_physical(spectrum=_closed_spectrum(
        gamma, delta_gamma_ab_closed_form(src, ch), det_gamma_ab_closed_form(src, ch)))
    return gamma


def build_gamma_ab_conditioned_on_alice(src: SourceParams, ch: ChannelParams) -> TwoModeCovariance:
    """Alice-Bob covariance once Alice has heterodyned and kept the q outcome.

    Alice splits her mode on a balanced beam splitter, measures q on one arm
    and p on the other, and discards p when Bob reports a q measurement.  The
    resulting matrix does not depend on the measured value.
    """
    V, T = src.V, ch.T
    chi = chi_total(src, ch)
    a = np.diag([2.0 * V / (V + 1.0), (V + 1.0) / 2.0])
    b = np.diag([T * (1.0 + chi), T * (V + chi)])
    c = np.diag([
        math.sqrt(2.0 * T * (V - 1.0) / (V + 1.0)),
        -math.sqrt(T * (V * V - 1.0) / 2.0),
    ])
    gamma = TwoModeCovariance(a, b, c)
    gamma.check_physical(spectrum=_closed_spectrum(
        gamma, delta_gamma_conditioned_closed_form(src, ch), det_gamma_conditioned_closed_form(src, ch)))
    return gamma


def _closed_spectrum(gamma, delta, det) -> SymplecticSpectrum:
    return spectrum_from_invariants(delta, det, discriminant_floor(gamma, delta, det))


def spectrum_gamma_ab(src: SourceParams, ch: ChannelParams) -> SymplecticSpectrum:
    """Spectrum of the Alice-Bob covariance from its closed-form invariants."""
    return _closed_spectrum(build_gamma_ab(src, ch), delta_gamma_ab_closed_form(src, ch),
                            det_gamma_ab_closed_form(src, ch))


def spectrum_gamma_conditioned(src: SourceParams, ch: ChannelParams) -> SymplecticSpectrum:
    return _closed_spectrum(build_gamma_ab_conditioned_on_alice(src, ch),
                            delta_gamma_conditioned_closed_form(src, ch),
                            det_gamma_conditioned_closed_form(src, ch))


def det_gamma_ab_closed_form(src: SourceParams, ch: ChannelParams) -> float:
    T, V, chi = ch.T, src.V, chi_total(src, ch)
    return (T + T * chi * V) ** 2


def delta_gamma_ab_closed_form(src: SourceParams, ch: ChannelParams) -> float:
    T, V, chi = ch.T, src.V, chi_total(src, ch)
    return V * V - 2.0 * T * (V * V - 1.0) + (T * V + T * chi) ** 2


def det_gamma_conditioned_closed_form(src: SourceParams, ch: ChannelParams) -> float:
    T, V, chi = ch.T, src.V, chi_total(src, ch)
    return (T + T * chi) * (T + T * chi * V)


def delta_gamma_conditioned_closed_form(src: SourceParams, ch: ChannelParams) -> float:
    T, V, chi = ch.T, src.V, chi_total(src, ch)
    return 2.0 * T + T * T * chi * (1.0 + chi) + (T * T * chi + (1.0 - T) ** 2) * V


def mutual_information(src: SourceParams, ch: ChannelParams) -> float:
    """Shannon information between Alice's estimate and Bob's homodyne outcome.

    ``V_b = T(V + chi)`` and ``V_b|a = T(1 + chi)`` give
    ``I(a:b) = 1/2 log2((V + chi)/(1 + chi))``.
    """
    chi = chi_total(src, ch)
    return 0.5 * math.log2((src.V + chi) / (1.0 + chi))


def holevo_direct(src: SourceParams, ch: ChannelParams) -> float:
    """Holevo bound between Alice's data and the joint eavesdropper (E and Fred).

    Entropies use the closed-form determinants and invariants, which stay
    accurate at large modulation where the 4x4 determinant does not.
    """
    return entropy_from_spectrum(spectrum_gamma_ab(src, ch)) - entropy_from_spectrum(
        spectrum_gamma_conditioned(src, ch)
    )


def conditional_alice_given_bob_q(gamma: TwoModeCovariance) -> np.ndarray:
    """Alice's 2x2 covariance after Bob homodynes the q quadrature.

    ``A - C (Pi B Pi)^+ C^T`` with ``Pi = diag(1, 0)``.
    """
    pbp = Q_PROJECTOR @ gamma.b_block @ Q_PROJECTOR
    c = gamma.c_block
    return gamma.a_block - c @ np.linalg.pinv(pbp) @ c.T


def holevo_reverse(src: SourceParams, ch: ChannelParams) -> float:
    """Holevo bound between Bob's homodyne data and the joint eavesdropper.

    The eavesdropper's conditional entropy equals Alice's after Bob's
    measurement, because the global state is pure.
    """
    gamma = build_gamma_ab(src, ch)
    return entropy_from_spectrum(spectrum_gamma_ab(src, ch)) - entropy_one_mode(
        conditional_alice_given_bob_q(gamma)
    )


def key_rates(src: SourceParams, ch: ChannelParams) -> KeyRateReport:
    """All finite-modulation and asymptotic rates for one parameter point.

    Negative rates are returned as they are.  The prior-work baseline is only
    filled in for a noiseless channel.
    """
    info = mutual_information(src, ch)
    chi_d = holevo_direct(src, ch)
    chi_r = holevo_reverse(src, ch)
    prior = prior_asym = None
    if ch.eps_c == 0:
        prior = prior_k_reverse(src, ch)
        prior_asym = prior_k_reverse_asymptotic(src, ch)
    return KeyRateReport(
        mutual_info=info,
        holevo_direct=chi_d,
        holevo_reverse=chi_r,
        k_direct=info - chi_d,
        k_reverse=info - chi_r,
        k_direct_asymptotic=k_direct_asymptotic(src, ch),
        k_reverse_asymptotic=k_reverse_asymptotic(src, ch),
        prior_k_reverse=prior,
        prior_k_reverse_asymptotic=prior_asym,
    )


def k_direct_asymptotic(src: SourceParams, ch: ChannelParams) -> float:
    """Direct-reconciliation lower bound in the limit of large modulation.

    Raises DomainError if either entropy argument drops below 1, which marks a
    parameter point where the limiting expression is not valid.
    """
    T = ch.T
    chi = chi_total(src, ch)
    mix = T * T * chi + (1.0 - T) ** 2
    x_eve = T * chi / (1.0 - T)
    x_cond = math.sqrt((1.0 + chi) * chi) * T / math.sqrt(mix)
    for x in (x_eve, x_cond):
        if x < 1.0 - TOL:
            raise DomainError(
                f"entropy argument {x:.12g} < 1: outside the validity of the limit formula"
            )
    return (
        0.5 * math.log2(mix / (1.0 + chi))
        - math.log2(1.0 - T)
        - entropy_g(x_eve)
        + entropy_g(x_cond)
    )


def k_reverse_asymptotic(src: SourceParams, ch: ChannelParams) -> float:
    """Reverse-reconciliation lower bound in the limit of large modulation."""
    T = ch.T
    chi = chi_total(src, ch)
    return (
        0.5 * math.log2(chi / (1.0 + chi))
        - math.log2(1.0 - T)
        - entropy_g(T * chi / (1.0 - T))
    )


def _require_noiseless(ch: ChannelParams):
    if ch.eps_c != 0:
        raise PreconditionError(
            "prior-work key rate is only defined for a noiseless channel (epsilon_c = 0)"
        )


def prior_k_reverse(src: SourceParams, ch: ChannelParams) -> float:
    """Reverse-reconciliation baseline in which nobody controls the source noise.

    Only derived for a noiseless channel.
    """
    _require_noiseless(ch)
    T, V = ch.T, src.V
    chi = chi_total(src, ch)
    return -0.5 * math.log2((T / (V + src.eps0) + 1.0 - T) * T * (1.0 + chi))


def prior_k_reverse_asymptotic(src: SourceParams, ch: ChannelParams) -> float:
    _require_noiseless(ch)
    T = ch.T
    chi = chi_total(src, ch)
    return 0.5 * math.log2(1.0 / (T * (1.0 - T) * (1.0 + chi)))


@dataclass(frozen=True)
class NoiseLimit:
    closed_form: float
    bisection: float
    iterations: int

    @property
    def difference(self) -> float:
        return abs(self.closed_form - self.bisection)


def limiting_epsilon0_closed_form() -> float:
    return 0.5 * (math.sqrt(1.0 + 16.0 / math.e ** 2) - 1.0)


def limiting_epsilon0(maxiter: int = 200, xtol: float = 1e-13) -> NoiseLimit:
    """Largest trusted source noise for which reverse reconciliation survives T -> 1.

    The closed form is cross-checked by bisecting the large-modulation reverse
    rate, evaluated at ``T = 1 - 1e-10`` on a noiseless channel, over
    ``eps0 in [0, 1]``.
    """
    ch = ChannelParams(UNIT_T, 0.0)

    def rate(eps0):
        return k_reverse_asymptotic(SourceParams(0.0, eps0), ch)

    try:
        root, info = optimize.bisect(rate, 0.0, 1.0, xtol=xtol, maxiter=maxiter, full_output=True)
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"bisection for the noise limit failed: {exc}") from exc
    if not info.converged:
        raise ConvergenceError(f"bisection did not converge in {maxiter} iterations")
    return NoiseLimit(limiting_epsilon0_closed_form(), float(root), info.iterations)


def validate_eb_covariance_bound(src: SourceParams) -> bool:
    """Whether ``<QQ'> = sqrt(V^2 - 1)`` respects the uncertainty bound.

    The bound reads ``V^2 - 1 <= (V + eps0) V - V / (V + eps0)`` and is tight
    at ``eps0 = 0``, so the comparison allows relative roundoff.
    """
    return eb_bound_slack(src) >= -1e-12 * max(1.0, src.V * src.V)


def eb_bound_slack(src: SourceParams) -> float:
    """``(V + eps0) V - V/(V + eps0) - (V^2 - 1)``; non-negative when consistent."""
    V, e = src.V, src.eps0
    return V * e + 1.0 - V / (V + e)
