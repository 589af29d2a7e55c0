"""Rank certificates for the optimality of linear relay strategies.

Any linear relay matrix turns the relayed channel into an ordinary two-user
interference channel whose cross links are ``f_ij + g_ij``: a fixed
composite of the physical channels plus a term the relay controls.  The sum
DoF of that channel is capped by ``2m`` minus the sum of the cross-link
ranks, and that rank sum provably cannot be pushed below
``2m - max(n, l)`` no matter how the relay mixes.  This module builds the
required invertible transformation, assembles the relay-dependent terms
from the partitioned mixing matrix, and probes the rank lower bound over
structured and random mixing matrices, including the constructive plan that
attains it.
"""

from dataclasses import dataclass

import numpy as np

from .channel import (AntennaConfig, ChannelInstance, complex_gaussian_matrix,
                      derive_seed, extend_channel)
from .errors import DegenerateChannelError, DimensionMismatchError
from .linalg import (DEFAULT_TOL, TolerancePolicy, null_space_basis,
                     numerical_rank, pseudo_inverse, rank_at_scale,
                     spectral_norm)
from .scheme import build_plan, closed_form_streams


def pad_relay(ch: ChannelInstance, seed: int) -> ChannelInstance:
    """Grow the relay to max(n, l) antennas on both sides with generic entries.

    Extra antennas can only help, so certificates computed on the padded
    channel bound the original.  Original entries are kept bit-identical;
    only the new rows of h01/h02 or the new columns of h10/h20 are drawn
    (from ``seed``).  A channel with n = l is returned unchanged.
    """
    cfg = ch.config
    if cfg.n == cfg.l:
        return ch
    target = max(cfg.n, cfg.l)
    pad_rx = target - cfg.n   # extra listening antennas
    pad_tx = target - cfg.l   # extra talking antennas
    mats = dict(ch.matrices())
    if pad_rx:
        for name in ("h01", "h02"):
            extra = complex_gaussian_matrix(seed, f"pad_{name}", pad_rx, cfg.m)
            mats[name] = np.vstack([mats[name], extra])
    if pad_tx:
        for name in ("h10", "h20"):
            extra = complex_gaussian_matrix(seed, f"pad_{name}", cfg.m, pad_tx)
            mats[name] = np.hstack([mats[name], extra])
    new_cfg = AntennaConfig(m=cfg.m, n=target, l=target, extension=cfg.extension)
    return ChannelInstance(config=new_cfg, seed=ch.seed, **mats)


@dataclass(frozen=True)
class TransformedChannel:
    """Invertible receiver/transmitter transforms and their composites.

    ``hj0_prime`` stacks the pseudo-inverse of the leading relay->receiver
    block over the rows annihilating it; ``h0j_prime`` adjoins the
    pseudo-inverse of the leading transmitter->relay block with the columns
    it annihilates.  Both are square and (generically) nonsingular, so
    applying them loses nothing.  ``f_ij`` are the transformed direct and
    cross composites; only the relay terms assembled by
    :func:`relay_cross_terms` depend on the mixing matrix.
    """

    m: int
    n: int
    l: int
    h10_prime: np.ndarray
    h20_prime: np.ndarray
    h01_prime: np.ndarray
    h02_prime: np.ndarray
    f11: np.ndarray
    f12: np.ndarray
    f21: np.ndarray
    f22: np.ndarray
    # partition helpers for the relay-dependent terms, per receiver i and
    # transmitter j: p_i = pinv(hi0_lead) @ hi0_tail, q_i = null_rows_i @ hi0_tail,
    # r_j = h0j_tail @ pinv(h0j_lead), s_j = h0j_tail @ null_cols_j
    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    @property
    def block_dims(self) -> dict:
        m, n, l = self.m, self.n, self.l
        return {
            "lead_tx": min(l, m), "tail_tx": max(l - m, 0),
            "lead_rx": min(n, m), "tail_rx": max(n - m, 0),
        }


def transform_channel(ch: ChannelInstance,
                      tol: TolerancePolicy = DEFAULT_TOL) -> TransformedChannel:
    """Build the square transforms and composites; requires n = l (pad first)."""
    cfg = ch.config
    if cfg.n != cfg.l:
        raise DimensionMismatchError(
            f"transform requires n = l, got n={cfg.n}, l={cfg.l}; pad the relay first")
    m, n, l = cfg.m, cfg.n, cfg.l
    lead_tx = min(l, m)
    lead_rx = min(n, m)

    primes_rx = {}
    helpers = {}
    for i, hi0 in ((1, ch.h10), (2, ch.h20)):
        lead = hi0[:, :lead_tx]
        tail = hi0[:, lead_tx:]
        pinv_lead = pseudo_inverse(lead, tol)
        # rows spanning the left null space of the leading block
        null_rows = null_space_basis(lead.conj().T, tol).conj().T
        prime = np.vstack([pinv_lead, null_rows])
        if prime.shape != (m, m) or numerical_rank(prime, tol) < m:
            raise DegenerateChannelError(
                f"receiver-{i} transform is singular or misshaped {prime.shape}")
        primes_rx[i] = prime
        helpers[f"p{i}"] = pinv_lead @ tail
        helpers[f"q{i}"] = null_rows @ tail

    primes_tx = {}
    for j, h0j in ((1, ch.h01), (2, ch.h02)):
        lead = h0j[:lead_rx, :]
        tail = h0j[lead_rx:, :]
        pinv_lead = pseudo_inverse(lead, tol)
        null_cols = null_space_basis(lead, tol)
        prime = np.hstack([pinv_lead, null_cols])
        if prime.shape != (m, m) or numerical_rank(prime, tol) < m:
            raise DegenerateChannelError(
                f"transmitter-{j} transform is singular or misshaped {prime.shape}")
        primes_tx[j] = prime
        helpers[f"r{j}"] = tail @ pinv_lead
        helpers[f"s{j}"] = tail @ null_cols

    direct = {(1, 1): ch.h11, (1, 2): ch.h12, (2, 1): ch.h21, (2, 2): ch.h22}
    f = {(i, j): primes_rx[i] @ direct[(i, j)] @ primes_tx[j]
         for i in (1, 2) for j in (1, 2)}
    return TransformedChannel(
        m=m, n=n, l=l,
        h10_prime=primes_rx[1], h20_prime=primes_rx[2],
        h01_prime=primes_tx[1], h02_prime=primes_tx[2],
        f11=f[(1, 1)], f12=f[(1, 2)], f21=f[(2, 1)], f22=f[(2, 2)],
        p1=helpers["p1"], p2=helpers["p2"], q1=helpers["q1"], q2=helpers["q2"],
        r1=helpers["r1"], r2=helpers["r2"], s1=helpers["s1"], s2=helpers["s2"],
    )


def _partition_mixing(tc: TransformedChannel, a: np.ndarray):
    dims = tc.block_dims
    lt, lr = dims["lead_tx"], dims["lead_rx"]
    if a.shape != (tc.l, tc.n):
        raise DimensionMismatchError(
            f"mixing matrix has shape {a.shape}, expected ({tc.l}, {tc.n})")
    return a[:lt, :lr], a[:lt, lr:], a[lt:, :lr], a[lt:, lr:]


def relay_cross_terms(tc: TransformedChannel, a: np.ndarray):
    """Relay-dependent parts (g12, g21) of the transformed cross links.

    Assembled blockwise from the partitioned mixing matrix; blocks with a
    zero dimension multiply out to zero contributions, matching the
    dimension-zero product convention.  Equals
    ``hi0_prime @ hi0 @ a @ h0j @ h0j_prime`` for each cross pair.
    """
    a11, a12, a21, a22 = _partition_mixing(tc, np.asarray(a, dtype=np.complex128))

    def g(p, q, r, s):
        inner = a21 + a22 @ r
        top = np.hstack([a11 + a12 @ r + p @ inner, (a12 + p @ a22) @ s])
        bottom = np.hstack([q @ inner, q @ a22 @ s])
        return np.vstack([top, bottom])

    g12 = g(tc.p1, tc.q1, tc.r2, tc.s2)
    g21 = g(tc.p2, tc.q2, tc.r1, tc.s1)
    return g12, g21


def cross_rank_sum(tc: TransformedChannel, a: np.ndarray,
                   tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Sum of the two transformed cross-link ranks for a mixing matrix.

    Rank thresholds are anchored to the larger of the summed matrix's scale
    and the fixed composite's scale: a mixing matrix that neutralizes a
    cross link leaves a matrix of roundoff-sized entries, which must count
    as rank zero rather than be re-normalized to full rank.
    """
    g12, g21 = relay_cross_terms(tc, a)
    return (rank_at_scale(tc.f12 + g12, spectral_norm(tc.f12), tol)
            + rank_at_scale(tc.f21 + g21, spectral_norm(tc.f21), tol))


@dataclass(frozen=True)
class RankBoundReport:
    """Outcome of probing the cross-rank lower bound over mixing matrices."""

    config: AntennaConfig
    samples: int
    min_rank_sum: int
    bound: int
    violations: tuple
    scheme_rank_sum: int
    scheme_extended: bool

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_jsonable(self) -> dict:
        return {
            "config": {"m": self.config.m, "n": self.config.n, "l": self.config.l},
            "samples": self.samples,
            "min_rank_sum": self.min_rank_sum,
            "bound": self.bound,
            "violations": list(self.violations),
            "scheme_rank_sum": self.scheme_rank_sum,
            "scheme_extended": self.scheme_extended,
        }


def _random_mixing(size: int, seed: int, kind: int) -> np.ndarray:
    """Full-rank, rank-one, or random-rank-deficient square mixing matrix."""
    if kind == 0:
        return complex_gaussian_matrix(seed, "mix_full", size, size)
    if kind == 1:
        left = complex_gaussian_matrix(seed, "mix_left", size, 1)
        right = complex_gaussian_matrix(seed, "mix_right", 1, size)
        return left @ right
    rank = 1 + seed % max(size - 1, 1)
    left = complex_gaussian_matrix(seed, "mix_left", size, rank)
    right = complex_gaussian_matrix(seed, "mix_right", rank, size)
    return left @ right


def scheme_mixing_matrix(padded: ChannelInstance,
                         tol: TolerancePolicy = DEFAULT_TOL):
    """The constructive plan's mixing matrix on a padded (n = l) channel.

    Returns ``(a, extended)``; when the stream count is half-integral the
    plan lives on the two-slot extension and ``a`` has doubled dimensions.
    """
    extended = closed_form_streams(padded.config).denominator != 1
    plan = build_plan(padded, corner=1, tol=tol)
    return plan.a, extended


def rank_bound_check(ch: ChannelInstance, samples: int, seed: int,
                     tol: TolerancePolicy = DEFAULT_TOL) -> RankBoundReport:
    """Probe ``cross_rank_sum >= 2m - max(n, l)`` over a mixing-matrix sample set.

    The set always contains the zero matrix, the identity, and the
    constructive plan's matrix; the remaining ``samples - 3`` draws rotate
    through full-rank, rank-one and random-rank-deficient matrices with
    per-sample derived seeds.  Violations are reported with the offending
    sample's seed, never raised.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    cfg = ch.config
    bound = 2 * cfg.m - max(cfg.n, cfg.l)
    padded = pad_relay(ch, derive_seed(seed, "pad"))
    tc = transform_channel(padded, tol)
    size = padded.config.n

    scheme_a, scheme_extended = scheme_mixing_matrix(padded, tol)
    if scheme_extended:
        # the plan lives on the two-slot extension; report its rank sum per use
        tc_ext = transform_channel(extend_channel(padded, 2), tol)
        scheme_sum = cross_rank_sum(tc_ext, scheme_a, tol) // 2
    else:
        scheme_sum = cross_rank_sum(tc, scheme_a, tol)

    structured = [("zero", np.zeros((size, size), dtype=np.complex128)),
                  ("identity", np.eye(size, dtype=np.complex128))]
    if not scheme_extended:
        structured.append(("scheme", scheme_a))

    observed = []
    violations = []
    if scheme_extended and scheme_sum < bound:
        violations.append("scheme")
    count = 0
    for label, a in structured:
        if count >= samples:
            break
        value = cross_rank_sum(tc, a, tol)
        observed.append(value)
        if value < bound:
            violations.append(label)
        count += 1
    idx = 0
    while count < samples:
        sample_seed = derive_seed(seed, "mix", idx)
        a = _random_mixing(size, sample_seed, idx % 3)
        value = cross_rank_sum(tc, a, tol)
        observed.append(value)
        if value < bound:
            violations.append(sample_seed)
        count += 1
        idx += 1

    return RankBoundReport(
        config=cfg, samples=samples,
        min_rank_sum=min(min(observed), scheme_sum),
        bound=bound, violations=tuple(violations),
        scheme_rank_sum=scheme_sum, scheme_extended=scheme_extended,
    )
