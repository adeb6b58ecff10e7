"""Seeded Monte Carlo simulation of the prepare-and-measure and
entanglement-based versions of the protocol.

Draws are produced in fixed-size chunks; chunk ``i`` uses the generator
seeded by ``SeedSequence(seed, spawn_key=(i,))``, so a batch is
bit-reproducible for a given seed no matter how many workers produce it.

Column names (q quadrature; the p columns are the same with ``P``):

========  ==============================================================
``Q_A``   Alice's modulation value (P&M) or her estimate of ``Q`` (E-B)
``DQ_A``  trusted source noise injected by the neutral party (P&M only)
``dQ_A``  vacuum noise of the coherent state (P&M only)
``Qp``    quadrature of the mode Alice keeps (E-B only)
``Qp_A``  Alice's heterodyne outcome on ``Qp`` (E-B only)
``Q``     quadrature of the mode sent into the channel
``Q_B``   Bob's homodyne outcome at the channel output
========  ==============================================================
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CovarianceError, DegenerateError, DomainError
from .protocol import ChannelParams, SourceParams, chi_total, mutual_information

CHUNK = 1 << 17
MIN_MOMENT_SAMPLES = 100
Z_SINGLE = 4.0
Z_MULTI = 5.0


@dataclass(frozen=True)
class SampleBatch:
    scheme: str
    n: int
    seed: int
    columns: dict = field(repr=False)

    def __getitem__(self, name) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"no column {name!r} in {self.scheme} batch") from None


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    std_error: float
    n: int

    def z_against(self, target: float) -> float:
        return (self.value - target) / self.std_error


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _sample(draw_chunk, n, seed, workers):
    if n < 1:
        raise DomainError("sample count n must be >= 1")
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])
    jobs = [(_chunk_rng(seed, i), m) for i, m in enumerate(sizes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: draw_chunk(*job), jobs))
    else:
        parts = [draw_chunk(*job) for job in jobs]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def _channel(rng, signal, ch: ChannelParams, size):
    # sqrt(T) attenuation plus Gaussian noise of variance (1 - T) + T eps_c
    noise_var = (1.0 - ch.T) + ch.T * ch.eps_c
    return math.sqrt(ch.T) * signal + math.sqrt(noise_var) * rng.standard_normal(size)


def sample_pm(src: SourceParams, ch: ChannelParams, n: int, seed: int, workers=None) -> SampleBatch:
    """Prepare-and-measure scheme: Gaussian-modulated noisy coherent states."""
    sa = math.sqrt(src.modulation_variance)
    se = math.sqrt(src.eps0)

    def draw(rng, m):
        cols = {}
        for x in "QP":
            mod = sa * rng.standard_normal(m)
            fred = se * rng.standard_normal(m)
            vac = rng.standard_normal(m)
            cols[f"{x}_A"], cols[f"D{x}_A"], cols[f"d{x}_A"] = mod, fred, vac
            cols[x] = mod + vac + fred
            cols[f"{x}_B"] = _channel(rng, cols[x], ch, m)
        return cols

    return SampleBatch("pm", n, seed, _sample(draw, n, seed, workers))


def sample_eb(src: SourceParams, ch: ChannelParams, n: int, seed: int, workers=None,
              correlation_scale: float = 1.0) -> SampleBatch:
    """Entanglement-based scheme: Alice heterodynes her half of a noisy EPR pair.

    ``correlation_scale`` multiplies the cross-correlations ``<QQ'>`` and
    ``<PP'>``; anything other than 1 gives a deliberately wrong source, used
    as a negative control for the equivalence check.
    """
    V, e = src.V, src.eps0
    c = correlation_scale * math.sqrt(V * V - 1.0)
    cov = np.array([[V, c], [c, V + e]])
    if np.linalg.eigvalsh(cov).min() < -1e-12 * V:
        raise CovarianceError(f"(Q', Q) covariance {cov.tolist()} is not positive semidefinite")
    # Cholesky of [[V, c], [c, V + e]] by hand; the residual variance can round to -0
    l21 = c / math.sqrt(V)
    l22 = math.sqrt(max(V + e - l21 * l21, 0.0))
    gain = math.sqrt((V - 1.0) / (V + 1.0))

    def draw(rng, m):
        cols = {}
        for x, sign in (("Q", 1.0), ("P", -1.0)):
            z0 = rng.standard_normal(m)
            z1 = rng.standard_normal(m)
            kept = math.sqrt(V) * z0
            sent = sign * l21 * z0 + l22 * z1
            outcome = kept + rng.standard_normal(m)
            cols[f"{x}p"], cols[x], cols[f"{x}p_A"] = kept, sent, outcome
            cols[f"{x}_A"] = sign * gain * outcome
            cols[f"{x}_B"] = _channel(rng, sent, ch, m)
        return cols

    return SampleBatch("eb", n, seed, _sample(draw, n, seed, workers))


def second_moment(batch: SampleBatch, x: str, y: str | None = None) -> MomentEstimate:
    """Raw moment ``<xy>`` (``<x^2>`` if ``y`` is omitted)."""
    prod = batch[x] * batch[x if y is None else y]
    n = prod.size
    se = float(prod.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return MomentEstimate(float(prod.mean()), se, n)


def _regression(batch, target, given):
    y, x = batch[target], batch[given]
    n = y.size
    if n < MIN_MOMENT_SAMPLES:
        raise DomainError(f"need at least {MIN_MOMENT_SAMPLES} samples, got {n}")
    sxx = float(np.mean(x * x))
    if sxx < 1e-12:
        raise DegenerateError(f"variance of {given!r} vanishes; use the unconditional variance")
    slope = float(np.mean(x * y)) / sxx
    return y, y - slope * x


def empirical_conditional_variance(batch: SampleBatch, target: str, given: str) -> MomentEstimate:
    """Plug-in ``<y^2> - <xy>^2 / <x^2>`` with a linearised-jackknife error.

    The estimator equals the mean squared residual of the regression of
    ``target`` on ``given``; at the optimum the slope does not contribute to
    the influence function, so the error is that of a sample mean of the
    squared residuals.
    """
    _, resid = _regression(batch, target, given)
    r2 = resid * resid
    n = r2.size
    return MomentEstimate(float(r2.mean()), float(r2.std(ddof=1) / math.sqrt(n)), n)


def empirical_mutual_information(batch: SampleBatch, a: str, b: str) -> MomentEstimate:
    """Gaussian plug-in ``1/2 log2(V_b / V_b|a)`` in bits."""
    y, resid = _regression(batch, b, a)
    y2, r2 = y * y, resid * resid
    vb, vcond = float(y2.mean()), float(r2.mean())
    if vcond <= 1e-12 * vb:
        raise DegenerateError(f"{b!r} is a deterministic function of {a!r}: information diverges")
    influence = ((y2 - vb) / vb - (r2 - vcond) / vcond) / (2.0 * math.log(2.0))
    n = y.size
    return MomentEstimate(0.5 * math.log2(vb / vcond), float(influence.std(ddof=1) / math.sqrt(n)), n)


def eb_bound_slack(batch: SampleBatch) -> MomentEstimate:
    """Empirical ``<Q^2><Q'^2> - <Q'^2>/<P^2> - <QQ'>^2`` with a delta-method error.

    Non-negative for a source that respects the uncertainty relation used to
    fix ``<QQ'>``.
    """
    q, qp, p = batch["Q"], batch["Qp"], batch["P"]
    qq, pp, qqp, ppp = q * q, qp * qp, q * qp, p * p
    sq, sqp, sx, sp = qq.mean(), pp.mean(), qqp.mean(), ppp.mean()
    value = sq * sqp - sqp / sp - sx * sx
    influence = (
        sqp * (qq - sq)
        + sq * (pp - sqp)
        - 2.0 * sx * (qqp - sx)
        - (pp - sqp) / sp
        + sqp * (ppp - sp) / sp ** 2
    )
    n = q.size
    return MomentEstimate(float(value), float(influence.std(ddof=1) / math.sqrt(n)), n)


@dataclass(frozen=True)
class Comparison:
    name: str
    observed: float
    expected: float
    z: float
    threshold: float

    @property
    def passed(self) -> bool:
        return abs(self.z) < self.threshold


@dataclass(frozen=True)
class ValidationReport:
    comparisons: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    @property
    def failures(self) -> list:
        return [c for c in self.comparisons if not c.passed]


def _moments(batch: SampleBatch) -> dict:
    out = {}
    for x in "QP":
        a, s, b = f"{x}_A", x, f"{x}_B"
        out[f"<{a}^2>"] = second_moment(batch, a)
        out[f"<{s}^2>"] = second_moment(batch, s)
        out[f"<{a}{s}>"] = second_moment(batch, a, s)
        out[f"V({s}|{a})"] = empirical_conditional_variance(batch, s, a)
        out[f"<{b}^2>"] = second_moment(batch, b)
        out[f"<{a}{b}>"] = second_moment(batch, a, b)
        out[f"V({b}|{a})"] = empirical_conditional_variance(batch, b, a)
    return out


def equivalence_check(src: SourceParams, ch: ChannelParams, n: int, seed: int,
                      correlation_scale: float = 1.0, min_samples: int = 100_000,
                      workers=None) -> ValidationReport:
    """Compare first and second moments of the P&M and E-B schemes.

    Both schemes are sampled from independent streams derived from ``seed``.
    Each moment pair gets a two-sample z-score; the check passes iff every
    ``|z| < 5``.
    """
    if n < min_samples:
        raise DomainError(f"equivalence check needs n >= {min_samples}, got {n}")
    pm_seed, eb_seed = (int(s.generate_state(1, np.uint64)[0])
                        for s in np.random.SeedSequence(seed).spawn(2))
    pm = _moments(sample_pm(src, ch, n, pm_seed, workers))
    eb = _moments(sample_eb(src, ch, n, eb_seed, workers, correlation_scale))
    rows = []
    for name, m_pm in pm.items():
        m_eb = eb[name]
        z = (m_pm.value - m_eb.value) / math.hypot(m_pm.std_error, m_eb.std_error)
        rows.append(Comparison(name, m_eb.value, m_pm.value, z, Z_MULTI))
    return ValidationReport(rows)


def theory_check(batch: SampleBatch, src: SourceParams, ch: ChannelParams) -> ValidationReport:
    """Empirical moments of a batch against the analytic channel model (|z| < 4)."""
    T, V, chi = ch.T, src.V, chi_total(src, ch)
    est = [
        ("V(Q|Q_A)", empirical_conditional_variance(batch, "Q", "Q_A"), 1.0 + src.eps0),
        ("<Q_B^2>", second_moment(batch, "Q_B"), T * (V + chi)),
        ("V(Q_B|Q_A)", empirical_conditional_variance(batch, "Q_B", "Q_A"), T * (1.0 + chi)),
        ("I(Q_A:Q_B)", empirical_mutual_information(batch, "Q_A", "Q_B"), mutual_information(src, ch)),
    ]
    return ValidationReport([Comparison(name, m.value, target, m.z_against(target), Z_SINGLE)
                             for name, m, target in est])
