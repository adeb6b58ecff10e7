"""Two-mode Gaussian states: covariance matrices, symplectic spectra, entropies.

All variances are in shot-noise units (vacuum quadrature variance = 1) and all
entropies are in bits.  Quadratures are ordered ``(q_A, p_A, q_B, p_B)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PhysicalityError

TOL = 1e-9

# symplectic form for ordering (q_A, p_A, q_B, p_B)
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _det2(m: np.ndarray) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(frozen=True)
class TwoModeCovariance:
    """Covariance matrix ``[[A, C], [C^T, B]]`` of a two-mode Gaussian state.

    Construction checks symmetry of the local blocks, positive diagonals and
    positive definiteness of the assembled matrix.  Physicality (both
    symplectic eigenvalues >= 1) is checked by :meth:`check_physical`, since
    it needs the spectrum.
    """

    a_block: np.ndarray
    b_block: np.ndarray
    c_block: np.ndarray

    def __post_init__(self):
        for name in ("a_block", "b_block", "c_block"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (2, 2):
                raise DomainError(f"{name} must be 2x2, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise DomainError(f"{name} has non-finite entries")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        for name in ("a_block", "b_block"):
            m = getattr(self, name)
            if abs(m[0, 1] - m[1, 0]) > TOL * max(1.0, np.abs(m).max()):
                raise DomainError(f"{name} is not symmetric")
            if np.any(np.diag(m) <= 0):
                raise DomainError(f"{name} must have positive diagonal entries")
        if np.linalg.eigvalsh(self.matrix).min() <= 0:
            raise PhysicalityError("covariance matrix is not positive definite")

    @classmethod
    def from_matrix(cls, gamma) -> "TwoModeCovariance":
        gamma = np.asarray(gamma, dtype=float)
        if gamma.shape != (4, 4):
            raise DomainError(f"expected a 4x4 matrix, got shape {gamma.shape}")
        if not np.allclose(gamma, gamma.T, rtol=0, atol=TOL * max(1.0, np.abs(gamma).max())):
            raise DomainError("covariance matrix is not symmetric")
        return cls(gamma[:2, :2], gamma[2:, 2:], gamma[:2, 2:])

    @property
    def matrix(self) -> np.ndarray:
        a, b, c = self.a_block, self.b_block, self.c_block
        return np.block([[a, c], [c.T, b]])

    def det_direct(self) -> float:
        """Determinant of the assembled 4x4 matrix by LU factorisation."""
        return float(np.linalg.det(self.matrix))

    def delta_direct(self) -> float:
        """The local symplectic invariant ``det A + det B + 2 det C``."""
        return _det2(self.a_block) + _det2(self.b_block) + 2.0 * _det2(self.c_block)

    def check_physical(self, tol: float = TOL, spectrum=None) -> "SymplecticSpectrum":
        """Raise PhysicalityError unless both symplectic eigenvalues are >= 1 - tol.

        ``spectrum`` may carry a more accurate spectrum computed elsewhere
        (e.g. from closed-form invariants); by default it is computed here.
        """
        spec = symplectic_spectrum(self, tol=tol) if spectrum is None else spectrum
        if spec.s2 < 1.0 - tol:
            raise PhysicalityError(
                f"symplectic eigenvalue {spec.s2:.12g} < 1: not a physical state"
            )
        return spec


@dataclass(frozen=True)
class SymplecticSpectrum:
    s1: float
    s2: float
    delta: float
    det: float


def entropy_g(x, tol: float = TOL):
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue x.

    ``g(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2)``, with ``g(1) = 0``.
    Values in ``[1 - tol, 1]`` are treated as 1.  Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 1.0 - tol):
        raise DomainError(f"symplectic eigenvalue below 1: {np.min(x)!r}")
    x = np.maximum(x, 1.0)
    plus = (x + 1.0) / 2.0
    minus = (x - 1.0) / 2.0
    # g = log2(plus) + minus*log2(1 + 1/minus): no large-x cancellation
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(minus > 0, minus * np.log1p(1.0 / np.where(minus > 0, minus, 1.0)), 0.0)
    out = np.log2(plus) + tail / np.log(2.0)
    return float(out) if out.ndim == 0 else out


def discriminant_floor(gamma: TwoModeCovariance, delta: float, det: float) -> float:
    """Rounding-error scale of ``delta^2 - 4 det`` for this matrix.

    ``scale`` is delta with every product taken in absolute value, which
    bounds the rounding of delta and, times ``sqrt(det)``, that of det near a
    degenerate spectrum.
    """
    eps = np.finfo(float).eps
    blocks = (gamma.a_block, gamma.b_block, gamma.c_block)
    scale = sum(abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0]) for m in blocks) + abs(_det2(gamma.c_block))
    return 16.0 * eps * scale * (2.0 * abs(delta) + 4.0 * np.sqrt(abs(det)))


def spectrum_from_invariants(delta: float, det: float, floor: float = 0.0,
                             tol: float = TOL) -> SymplecticSpectrum:
    """Symplectic eigenvalues from ``delta`` and ``det``.

    ``s1,2^2 = (delta +/- sqrt(delta^2 - 4 det)) / 2``.  The smaller root is
    evaluated as ``det / s1^2``, the same quantity without the cancellation
    that ruins it at large variances.  A discriminant within ``floor`` of
    zero is taken as zero, so pure and other degenerate spectra come out
    exactly degenerate instead of split by roundoff amplified through the
    square root.
    """
    if det <= 0:
        raise PhysicalityError(f"non-positive determinant {det!r}")
    disc = delta * delta - 4.0 * det
    if abs(disc) <= floor:
        disc = 0.0
    elif disc < 0:
        if disc < -tol * max(1.0, delta * delta):
            raise DomainError(f"negative discriminant {disc!r}: unphysical input")
        disc = 0.0
    s1_sq = (delta + np.sqrt(disc)) / 2.0
    if s1_sq <= 0:
        raise PhysicalityError(f"non-positive invariant delta {delta!r}")
    s1 = float(np.sqrt(s1_sq))
    s2 = float(np.sqrt(det / s1_sq))
    s1, s2 = max(s1, s2), min(s1, s2)
    return SymplecticSpectrum(s1=s1, s2=s2, delta=float(delta), det=float(det))


def symplectic_spectrum(gamma: TwoModeCovariance, tol: float = TOL) -> SymplecticSpectrum:
    """Symplectic eigenvalues with delta and det evaluated directly from the matrix."""
    det = gamma.det_direct()
    delta = gamma.delta_direct()
    return spectrum_from_invariants(delta, det, discriminant_floor(gamma, delta, det), tol)


def entropy_from_spectrum(spec: SymplecticSpectrum, tol: float = TOL) -> float:
    return entropy_g(spec.s1, tol) + entropy_g(spec.s2, tol)


def symplectic_eigenvalues_numeric(gamma) -> np.ndarray:
    """Symplectic eigenvalues as moduli of the eigenvalues of ``i Omega gamma``.

    Brute-force route, independent of the invariant formula; returns the two
    distinct values sorted descending.
    """
    m = gamma.matrix if isinstance(gamma, TwoModeCovariance) else np.asarray(gamma, float)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ m)))[::-1]
    return ev[::2]


def entropy_two_mode(gamma: TwoModeCovariance, tol: float = TOL) -> float:
    """Von Neumann entropy in bits, ``g(s1) + g(s2)``."""
    return entropy_from_spectrum(symplectic_spectrum(gamma, tol=tol), tol)


def entropy_one_mode(block, tol: float = TOL) -> float:
    """Entropy of a single-mode Gaussian state from its 2x2 covariance."""
    d = _det2(np.asarray(block, dtype=float))
    if d <= 0:
        raise PhysicalityError(f"non-positive single-mode determinant {d!r}")
    return entropy_g(np.sqrt(d), tol)


def two_mode_squeezed(v: float) -> TwoModeCovariance:
    """Pure EPR covariance with local variance ``v`` and correlations ``+/-sqrt(v^2-1)``."""
    if v < 1:
        raise DomainError("variance of a two-mode squeezed state must be >= 1")
    c = np.sqrt(v * v - 1.0)
    return TwoModeCovariance(v * np.eye(2), v * np.eye(2), c * np.diag([1.0, -1.0]))
