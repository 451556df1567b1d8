"""Exact restricted-isometry oracles and recovery certification.

At desk scale the restricted isometry constants can be computed exactly
by enumerating supports and taking extreme eigenvalues of the associated
Gram blocks.  Combining the exact joint constant with the recovery
threshold yields an actionable certificate: when it holds, every
sufficiently sparse signal/corruption pair is the unique minimizer of
the penalized program with zero noise.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetError, DimensionError
from .linop import materialize

ENUM_BUDGET = 10 ** 6

# Supports whose deviation is within this slack of the maximum count as
# ties; the lexicographically smallest is reported.
_TIE_TOL = 1e-14

_CHUNK = 4096


@dataclass(frozen=True)
class RipReport:
    """Exact isometry constant with the support pair achieving it."""

    delta: float
    witness_signal_support: tuple
    witness_corruption_support: tuple
    eig_min: float
    eig_max: float
    supports_enumerated: int


@dataclass(frozen=True)
class ThresholdReport:
    """Recovery-threshold evaluation for given sparsity levels and weight."""

    eta: float
    threshold: float
    delta_2s2k: float = None
    satisfied: bool = None


def _combo_array(n, r):
    if r == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.array(list(combinations(range(n), r)), dtype=np.intp)


def _check_budget(count, budget):
    if count > budget:
        raise BudgetError(
            f"{count} support pairs exceed the enumeration budget of {budget}")


def _pair_deviations(gram, sig_combos, cor_combos, n):
    """Extreme-eigenvalue deviations for every (S, K) pair, in lex order.

    Returns (devs, eig_mins, eig_maxs) flat arrays of length
    len(sig_combos) * len(cor_combos); the pair at flat index t is
    (sig_combos[t // nK], cor_combos[t % nK]).
    """
    n_sig = sig_combos.shape[0]
    n_cor = cor_combos.shape[0]
    total = n_sig * n_cor
    d = sig_combos.shape[1] + cor_combos.shape[1]
    devs = np.empty(total)
    emin = np.empty(total)
    emax = np.empty(total)
    if d == 0:
        devs[:] = 0.0
        emin[:] = 1.0
        emax[:] = 1.0
        return devs, emin, emax
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        t = np.arange(start, stop)
        idx = np.concatenate(
            [sig_combos[t // n_cor], n + cor_combos[t % n_cor]], axis=1)
        sub = gram[idx[:, :, None], idx[:, None, :]]
        ev = np.linalg.eigvalsh(sub)
        emin[start:stop] = ev[:, 0]
        emax[start:stop] = ev[:, -1]
        devs[start:stop] = np.maximum(ev[:, -1] - 1.0, 1.0 - ev[:, 0])
    return devs, emin, emax


def _as_dense(a):
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError("expected a dense 2-D matrix")
    return m


def exact_skrip(a_matrix, h_matrix, s, k, budget=ENUM_BUDGET):
    """Exact joint isometry constant of [A, H] over (s, k)-sparse pairs.

    Enumerates every signal support S (|S| = s) and corruption support K
    (|K| = k), forms the Gram of the stacked submatrix [A_S, H_K] and
    records the worst deviation of its eigenvalues from 1.  The first
    support pair (in lexicographic order) within 1e-14 of the maximum is
    reported as the witness.
    """
    a = _as_dense(a_matrix)
    h = _as_dense(h_matrix)
    if h.shape[0] != a.shape[0] or h.shape[0] != h.shape[1]:
        raise DimensionError("H must be square with as many rows as A")
    m, n = a.shape
    if s > n or k > m:
        raise DimensionError("sparsity exceeds matrix dimensions")
    count = math.comb(n, s) * math.comb(m, k)
    _check_budget(count, budget)

    theta = np.concatenate([a, h], axis=1)
    gram = theta.conj().T @ theta
    sig = _combo_array(n, s)
    cor = _combo_array(m, k)
    devs, emin, emax = _pair_deviations(gram, sig, cor, n)

    delta = float(devs.max())
    witness = int(np.flatnonzero(devs >= delta - _TIE_TOL)[0])
    wi, wj = divmod(witness, cor.shape[0])
    return RipReport(
        delta=delta,
        witness_signal_support=tuple(int(i) for i in sig[wi]),
        witness_corruption_support=tuple(int(i) for i in cor[wj]),
        eig_min=float(emin[witness]),
        eig_max=float(emax[witness]),
        supports_enumerated=count,
    )


def exact_rip(a_matrix, s, budget=ENUM_BUDGET):
    """Exact standard restricted isometry constant by enumeration."""
    a = _as_dense(a_matrix)
    n = a.shape[1]
    if s > n:
        raise DimensionError("sparsity exceeds column count")
    _check_budget(math.comb(n, s), budget)

    gram = a.conj().T @ a
    sig = _combo_array(n, s)
    cor = np.zeros((1, 0), dtype=np.intp)
    devs, emin, emax = _pair_deviations(gram, sig, cor, n)

    delta = float(devs.max())
    witness = int(np.flatnonzero(devs >= delta - _TIE_TOL)[0])
    return RipReport(
        delta=delta,
        witness_signal_support=tuple(int(i) for i in sig[witness]),
        witness_corruption_support=(),
        eig_min=float(emin[witness]),
        eig_max=float(emax[witness]),
        supports_enumerated=sig.shape[0],
    )


def rip_split(a_matrix, h_matrix, s, k, budget=ENUM_BUDGET):
    """Two-part upper bound on the joint constant: (delta1, delta2).

    delta1 is the standard isometry constant of A at sparsity s; delta2
    is the largest spectral norm of a k x s cross block H_K* A_S, which
    equals twice the worst signal/corruption inner product over the unit
    sphere.  The joint constant never exceeds delta1 + delta2.
    """
    a = _as_dense(a_matrix)
    h = _as_dense(h_matrix)
    m, n = a.shape
    count = math.comb(n, s) * math.comb(m, k)
    _check_budget(count, budget)

    delta1 = exact_rip(a, s, budget).delta
    if s == 0 or k == 0:
        return delta1, 0.0

    cross = h.conj().T @ a
    sig = _combo_array(n, s)
    cor = _combo_array(m, k)
    n_cor = cor.shape[0]
    worst = 0.0
    for start in range(0, count, _CHUNK):
        stop = min(start + _CHUNK, count)
        t = np.arange(start, stop)
        blocks = cross[cor[t % n_cor][:, :, None], sig[t // n_cor][:, None, :]]
        sv = np.linalg.svd(blocks, compute_uv=False)
        worst = max(worst, float(sv[:, 0].max()))
    return delta1, worst


def recovery_threshold(s, k, lambda_reg):
    """Largest admissible joint isometry constant for exact recovery.

    eta balances the two sparsity levels under the penalty weight; the
    threshold is 1/sqrt(1 + (1/(2 sqrt 2) + sqrt(eta))^2), strictly
    decreasing in eta with eta >= 2 always.
    """
    if s < 1 or k < 1 or lambda_reg <= 0:
        raise DimensionError("need s, k >= 1 and lambda_reg > 0")
    lk = lambda_reg ** 2 * k
    eta = (s + lk) / min(s, lk)
    threshold = 1.0 / math.sqrt(1.0 + (1.0 / (2.0 * math.sqrt(2.0)) + math.sqrt(eta)) ** 2)
    return ThresholdReport(eta=float(eta), threshold=float(threshold))


def certify_uniqueness(model, s, k, lambda_reg, budget=ENUM_BUDGET):
    """Certificate that every (s, k)-sparse pair is exactly recoverable.

    Materializes the model, computes the exact joint constant at doubled
    sparsity levels and compares it against the recovery threshold.  A
    satisfied certificate means the penalized program with zero noise
    bound returns the ground truth for every s-sparse signal combined
    with every k-sparse corruption.
    """
    a = materialize(model.A)
    h = materialize(model.H)
    report = exact_skrip(a, h, 2 * s, 2 * k, budget)
    base = recovery_threshold(s, k, lambda_reg)
    return ThresholdReport(
        eta=base.eta,
        threshold=base.threshold,
        delta_2s2k=report.delta,
        satisfied=bool(report.delta < base.threshold),
    )


def _log_clamped(v):
    return max(math.log(v), 1.0)


def sample_bound_modulated_frame(s, k, n_tilde, mu_b, delta,
                                 c_signal=1.0, c_corruption=1.0):
    """Informational measurement bounds for the tight-frame model.

    Returns (m_signal, m_corruption).  Logarithms are natural and
    clamped below at 1 so unit sparsities do not zero the bound.  The
    absolute constants are unknown; defaults of 1 make this a relative
    calculator, not a prescription.
    """
    ls, lk, ln = _log_clamped(s), _log_clamped(k), _log_clamped(n_tilde)
    m_signal = c_signal * delta ** -2 * s * n_tilde * mu_b ** 2 * ls ** 2 * ln ** 2
    m_corruption = c_corruption * delta ** -2 * k * lk ** 2 * ln ** 2
    return float(m_signal), float(m_corruption)


@dataclass(frozen=True)
class SubsampledBounds:
    """All conditions of the subsampled-basis guarantee, evaluated."""

    m_signal: float
    m_signal_terms: tuple
    m_corruption: float
    m_upper: float


def sample_bound_subsampled(s, k, n, mu_g, delta, c_coherence=1.0, c_log4=1.0,
                            c_min_rows=1.0, c_corruption=1.0, c_upper=1.0):
    """Informational bounds for the randomly subsampled orthonormal model.

    The signal condition is the max of three terms (coherence-scaled,
    log^4, and a row-count floor); the corruption condition mirrors the
    coherence term with k; the final condition is an UPPER bound on m.
    With unknown constants the raw numbers are not prescriptive, which
    the upper bound makes obvious at small delta.
    """
    ls, lk, ln = _log_clamped(s), _log_clamped(k), _log_clamped(n)
    terms = (
        c_coherence * delta ** -2 * s * n * mu_g ** 2 * ls ** 2 * ln ** 2,
        c_log4 * delta ** 2 * s * ln ** 4,
        2.0 * c_min_rows * ln,
    )
    m_corruption = c_corruption * delta ** -2 * k * n * mu_g ** 2 * lk ** 2 * ln ** 2
    m_upper = c_upper * delta ** 2 * n
    return SubsampledBounds(
        m_signal=float(max(terms)),
        m_signal_terms=tuple(float(t) for t in terms),
        m_corruption=float(m_corruption),
        m_upper=float(m_upper),
    )


def skrip_support_extremes(a_matrix, h_matrix, s, k, budget=ENUM_BUDGET):
    """Per-support extreme eigenvalues, for heat maps.

    Yields (signal_support, corruption_support, eig_min, eig_max) in
    lexicographic order.
    """
    a = _as_dense(a_matrix)
    h = _as_dense(h_matrix)
    m, n = a.shape
    count = math.comb(n, s) * math.comb(m, k)
    _check_budget(count, budget)
    theta = np.concatenate([a, h], axis=1)
    gram = theta.conj().T @ theta
    sig = _combo_array(n, s)
    cor = _combo_array(m, k)
    _, emin, emax = _pair_deviations(gram, sig, cor, n)
    n_cor = cor.shape[0]
    for t in range(count):
        wi, wj = divmod(t, n_cor)
        yield (tuple(int(i) for i in sig[wi]), tuple(int(i) for i in cor[wj]),
               float(emin[t]), float(emax[t]))
