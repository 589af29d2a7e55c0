"""Construction and verification of interference-neutralizing beamforming plans.

A plan fixes transmit beamformers V1, V2 and a relay mixing matrix
A = T U so that, at each receiver, as many interfering streams as possible
arrive with their direct path exactly cancelled by the relay path.  Two
mechanisms are combined:

* separate neutralization: a stream's pair (relay direction t, transmit
  direction v) is drawn from the null space of the stacked map
  [relay->receiver | transmitter->receiver], killing that stream at the
  non-intended receiver;
* alignment at the relay: when the relay transmits through more antennas
  than it listens with, pairs of streams (one per user) can share a single
  received direction at the relay and be neutralized at both receivers
  with one forwarded symbol.

The relay factor U is the Moore-Penrose pseudo-inverse of the received
directions of the streams it must decode, so that U recovers exactly one
(noisy) symbol combination per forwarded direction.
"""

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import (ChannelInstance, complex_gaussian_matrix, derive_seed,
                      extend_channel, matrix_from_pairs, matrix_to_pairs)
from .errors import (ChannelFormatError, DegenerateChannelError,
                     DimensionMismatchError, NeedsExtensionError)
from .linalg import (DEFAULT_TOL, TolerancePolicy, null_space_basis,
                     numerical_rank, pseudo_inverse, rank_at_scale,
                     spectral_norm)

MAX_DRAW_RETRIES = 8


@dataclass(frozen=True)
class StreamAllocation:
    """Stream counts: k1 aligned pairs, k2 separately neutralized per user.

    The corner user sends the full ``max(d1, d2)`` streams; the other user
    sends ``k1 + k2``, all of which get neutralized at the corner receiver.
    """

    k1: int
    k2: int
    d1: int
    d2: int
    corner: int

    def __post_init__(self):
        if self.corner not in (1, 2):
            raise ValueError(f"corner must be 1 or 2, got {self.corner}")
        if min(self.k1, self.k2, self.d1, self.d2) < 0:
            raise ValueError("stream counts must be nonnegative")
        if min(self.d1, self.d2) != self.k1 + self.k2:
            raise ValueError("the smaller stream count must equal k1 + k2")
        d_corner = self.d1 if self.corner == 1 else self.d2
        if d_corner != max(self.d1, self.d2):
            raise ValueError("the corner user must carry the larger stream count")

    @property
    def neutralized(self) -> int:
        return self.k1 + self.k2

    @property
    def relay_streams(self) -> int:
        """Linear combinations the relay decodes and forwards."""
        return self.k1 + 2 * self.k2


def closed_form_streams(config) -> Fraction:
    """Neutralizable interfering streams per user for an antenna configuration.

    min(l, m, n/2) when the relay listens with at least as many antennas as
    it talks; min(l/2, n, m) otherwise.  Half-integral values demand the
    two-slot extended channel.
    """
    m, n, l = Fraction(config.m), Fraction(config.n), Fraction(config.l)
    if l <= n:
        return min(l, m, n / 2)
    return min(l / 2, n, m)


def allocate_streams(config, corner: int = 1) -> StreamAllocation:
    """Pick (k1, k2, d1, d2) for a configuration and corner user.

    For l <= n alignment at the relay is impossible, so k1 = 0 and k2 is the
    closed-form stream count.  For l > n the split is found by exhaustive
    enumeration of the feasibility constraints (relay decoding, alignment
    capacity, receiver dimensions), maximizing k1 + k2 with ties broken
    toward more aligned pairs.
    """
    if corner not in (1, 2):
        raise ValueError(f"corner must be 1 or 2, got {corner}")
    m, n, l = config.m, config.n, config.l
    total = closed_form_streams(config)
    if total.denominator != 1:
        raise NeedsExtensionError(
            f"(m={m}, n={n}, l={l}) supports {total} neutralized streams per user;"
            " extend the channel over two slots first")
    k_total = int(total)
    if l <= n:
        k1, k2 = 0, k_total
    else:
        best = (-1, -1)
        # the alignment system's null space contains max(l - 2m, 0) vectors
        # with zero transmit parts (relay directions invisible to both
        # receivers); only the remainder can carry aligned stream pairs
        usable = max(l - n, 0) - max(l - 2 * m, 0)
        k1_cap = min(max(usable, 0), n, m)
        k2_cap = min(n // 2, l, m)
        for c1 in range(k1_cap + 1):
            for c2 in range(k2_cap + 1):
                if c1 + c2 <= m and c1 + 2 * c2 <= n and (c1 + c2, c1) > best:
                    best = (c1 + c2, c1)
        k1 = best[1]
        k2 = best[0] - best[1]
        if best[0] != k_total:
            raise AssertionError(
                f"enumeration reached {best[0]} streams, expected {k_total}")
    d_corner, d_other = m, k_total
    d1, d2 = (d_corner, d_other) if corner == 1 else (d_other, d_corner)
    return StreamAllocation(k1=k1, k2=k2, d1=d1, d2=d2, corner=corner)


@dataclass(frozen=True)
class BeamformingPlan:
    """Transmit beamformers, relay factors and the stream allocation."""

    v1: np.ndarray
    v2: np.ndarray
    t: np.ndarray
    u: np.ndarray
    a: np.ndarray
    allocation: StreamAllocation

    def __post_init__(self):
        al = self.allocation
        m = self.v1.shape[0]
        if self.v2.shape[0] != m:
            raise DimensionMismatchError("v1 and v2 must have equal row counts")
        if self.v1.shape[1] != al.d1 or self.v2.shape[1] != al.d2:
            raise DimensionMismatchError("beamformer widths disagree with allocation")
        r = al.relay_streams
        if self.t.shape[1] != r or self.u.shape[0] != r:
            raise DimensionMismatchError("relay factor widths disagree with allocation")
        if self.a.shape != (self.t.shape[0], self.u.shape[1]):
            raise DimensionMismatchError("a must be t rows by u columns")
        diff = spectral_norm(self.a - self.t @ self.u)
        scale = max(spectral_norm(self.a), spectral_norm(self.t) * spectral_norm(self.u))
        if diff > DEFAULT_TOL.residual_rel_tol * scale:
            raise ValueError("a does not factor as t @ u within tolerance")

    @property
    def m(self) -> int:
        return self.v1.shape[0]


@dataclass(frozen=True)
class VerificationReport:
    """Numerical witnesses of a plan's decodability on a given channel."""

    max_neutralization_residual: float
    relay_decode_rank: int
    rx1_desired_rank: int
    rx2_joint_rank: int
    decodable_rx1: bool
    decodable_rx2: bool
    achieved_pair: tuple

    @property
    def all_ok(self) -> bool:
        return self.decodable_rx1 and self.decodable_rx2

    def to_jsonable(self) -> dict:
        d1, d2 = self.achieved_pair
        return {
            "max_neutralization_residual": self.max_neutralization_residual,
            "relay_decode_rank": self.relay_decode_rank,
            "rx1_desired_rank": self.rx1_desired_rank,
            "rx2_joint_rank": self.rx2_joint_rank,
            "decodable_rx1": self.decodable_rx1,
            "decodable_rx2": self.decodable_rx2,
            "achieved_pair": [f"{d1.numerator}/{d1.denominator}",
                              f"{d2.numerator}/{d2.denominator}"],
        }


def channel_for_plan(ch: ChannelInstance, plan: BeamformingPlan) -> ChannelInstance:
    """Return ``ch``, extended over two slots when the plan was built that way."""
    if plan.m == ch.config.m:
        return ch
    if ch.config.extension == 1 and plan.m == 2 * ch.config.m:
        return extend_channel(ch, 2)
    raise DimensionMismatchError(
        f"plan built for m={plan.m} does not match channel m={ch.config.m}")


def effective_channels(ch: ChannelInstance, plan: BeamformingPlan):
    """Per-receiver effective stream matrices including all relay paths.

    Column for stream (i, d) at receiver j is
    ``h_ji v_id + h_j0 a h_0i v_id``, so residual leakage of non-neutralized
    streams through the relay's decoded combinations shows up exactly.
    """
    ch = channel_for_plan(ch, plan)
    a = plan.a
    e1 = np.hstack([(ch.h11 + ch.h10 @ a @ ch.h01) @ plan.v1,
                    (ch.h12 + ch.h10 @ a @ ch.h02) @ plan.v2])
    e2 = np.hstack([(ch.h21 + ch.h20 @ a @ ch.h01) @ plan.v1,
                    (ch.h22 + ch.h20 @ a @ ch.h02) @ plan.v2])
    return e1, e2


def selected_relay_columns(ch: ChannelInstance, plan: BeamformingPlan) -> np.ndarray:
    """Received directions of the streams the relay decodes, in forward order.

    Aligned pairs contribute one shared column (both users arrive on it);
    separately neutralized streams contribute one column per user.
    """
    ch = channel_for_plan(ch, plan)
    al = plan.allocation
    k1, k2 = al.k1, al.k2
    cols = []
    if k1:
        cols.append(ch.h01 @ plan.v1[:, :k1])
    if k2:
        cols.append(ch.h01 @ plan.v1[:, k1:k1 + k2])
        cols.append(ch.h02 @ plan.v2[:, k1:k1 + k2])
    if not cols:
        return np.zeros((ch.config.n, 0), dtype=np.complex128)
    return np.hstack(cols)


def verify_plan(ch: ChannelInstance, plan: BeamformingPlan,
                tol: TolerancePolicy = DEFAULT_TOL) -> VerificationReport:
    """Measure neutralization residuals and decodability ranks of a plan.

    Failures are reported in the flags, never raised.  Receiver i is
    decodable when the relay's decoded directions are independent and the
    desired columns contribute full fresh rank on top of whatever subspace
    the interference actually occupies, all within the antenna count.  The
    residual is measured over the columns the plan claims to neutralize.
    """
    ch = channel_for_plan(ch, plan)
    al = plan.allocation
    m = ch.config.m
    d = {1: al.d1, 2: al.d2}
    offset = {1: 0, 2: al.d1}
    e = dict(zip((1, 2), effective_channels(ch, plan)))
    v = {1: plan.v1, 2: plan.v2}
    h_cross = {(1, 2): ch.h12, (2, 1): ch.h21}
    h_from_relay = {1: ch.h10, 2: ch.h20}
    h_to_relay = {1: ch.h01, 2: ch.h02}
    k = al.neutralized

    worst = {1: 0.0, 2: 0.0}
    for i in (1, 2):
        j = 3 - i
        for dd in range(min(k, d[j])):
            col = e[i][:, offset[j] + dd]
            beam = v[j][:, dd]
            direct = h_cross[(i, j)] @ beam
            relayed = h_from_relay[i] @ (plan.a @ (h_to_relay[j] @ beam))
            scale = float(np.linalg.norm(direct) + np.linalg.norm(relayed))
            resid = float(np.linalg.norm(col))
            worst[i] = max(worst[i], resid / scale if scale > 0.0 else resid)

    g_sel = selected_relay_columns(ch, plan)
    relay_rank = numerical_rank(g_sel, tol) if g_sel.size else 0
    relay_ok = relay_rank == al.relay_streams

    desired_rank = {}
    joint_rank = {}
    decodable = {}
    for i in (1, 2):
        j = 3 - i
        # sub-block ranks are judged against the whole effective matrix's
        # scale, so exactly-neutralized (tiny) columns contribute nothing
        full_scale = spectral_norm(e[i])
        desired = e[i][:, offset[i]:offset[i] + d[i]]
        interference = e[i][:, offset[j]:offset[j] + d[j]]
        desired_rank[i] = rank_at_scale(desired, full_scale, tol)
        interference_dim = rank_at_scale(interference, full_scale, tol)
        joint_rank[i] = rank_at_scale(e[i], full_scale, tol)
        need = d[i] + interference_dim
        decodable[i] = joint_rank[i] == need and need <= m and relay_ok

    ext = ch.config.extension
    return VerificationReport(
        max_neutralization_residual=max(worst[1], worst[2]),
        relay_decode_rank=relay_rank,
        rx1_desired_rank=desired_rank[1],
        rx2_joint_rank=joint_rank[2],
        decodable_rx1=decodable[1],
        decodable_rx2=decodable[2],
        achieved_pair=(Fraction(al.d1, ext), Fraction(al.d2, ext)),
    )


def _neutralizing_basis(ch: ChannelInstance, user: int, tol: TolerancePolicy) -> np.ndarray:
    """Null basis of the stacked relay/direct map killing ``user`` at the
    other receiver; columns are stacked (t, v) pairs of length l + m."""
    if user == 1:
        stacked = np.hstack([ch.h20, ch.h21])
    else:
        stacked = np.hstack([ch.h10, ch.h12])
    return null_space_basis(stacked, tol)


def _mixed_columns(basis: np.ndarray, count: int, seed: int, what: str) -> np.ndarray:
    """Generic unit-norm combinations of null-basis columns.

    Any combination still solves the homogeneous system exactly.  Plain
    basis columns are not usable directly: on a two-slot extended channel
    the computed basis is slot-pure, which can collapse either the relay's
    decoding space or the weaker receiver's joint space.  Seeded generic
    mixing gives every picked direction full slot support.
    """
    if basis.shape[1] < count:
        raise DegenerateChannelError(
            f"{what}: null space has dimension {basis.shape[1]}, need {count}")
    if count == 0:
        return basis[:, :0]
    mix = complex_gaussian_matrix(seed, "mix", basis.shape[1], count)
    cols = basis @ mix
    norms = np.linalg.norm(cols, axis=0)
    if np.any(norms < 1e-12):
        raise DegenerateChannelError(f"{what}: degenerate null-space combination")
    return cols / norms


def _completion_columns(m: int, count: int, seed: int) -> np.ndarray:
    """Random unit-norm columns for the corner user's free streams.

    Deliberately not orthogonalized against the neutralized columns: on an
    extended channel those have structured slot support and an orthogonal
    complement would inherit it, collapsing the weaker receiver's joint
    decoding space.  Generic columns keep every rank condition full almost
    surely.
    """
    rnd = complex_gaussian_matrix(seed, "completion", m, count)
    if count:
        rnd = rnd / np.linalg.norm(rnd, axis=0)
    return rnd


def _assemble(ch, alloc, attempt_parts, tol):
    """Retry loop shared by both constructions.

    ``attempt_parts(seed)`` returns (v1_core, v2_core, t_cols, g_cols) for
    one seeded draw of null-space combinations.  The channel itself is
    never perturbed; on a failed rank check only the seeded choices are
    redrawn, a bounded number of times.
    """
    m = ch.config.m
    k = alloc.neutralized
    last = None
    for attempt in range(MAX_DRAW_RETRIES + 1):
        seed = derive_seed(ch.seed, "draw", attempt)
        v1_core, v2_core, t_cols, g_cols = attempt_parts(seed)
        g_sel = (np.hstack(g_cols) if g_cols
                 else np.zeros((ch.config.n, 0), dtype=np.complex128))
        t = (np.hstack(t_cols) if t_cols
             else np.zeros((ch.config.l, 0), dtype=np.complex128))
        u = pseudo_inverse(g_sel, tol)
        a = t @ u
        core = v1_core if alloc.corner == 1 else v2_core
        full = np.hstack([core, _completion_columns(m, m - k,
                                                    derive_seed(seed, "completion"))])
        v1, v2 = (full, v2_core) if alloc.corner == 1 else (v1_core, full)
        plan = BeamformingPlan(v1=v1, v2=v2, t=t, u=u, a=a, allocation=alloc)
        report = verify_plan(ch, plan, tol)
        if report.all_ok:
            return plan
        last = report
    raise DegenerateChannelError(
        "rank checks failed after redrawing beam combinations "
        f"{MAX_DRAW_RETRIES} times (last report: relay rank "
        f"{last.relay_decode_rank}, residual {last.max_neutralization_residual:.2e})")


def build_separate_plan(ch: ChannelInstance, alloc: StreamAllocation,
                        tol: TolerancePolicy = DEFAULT_TOL) -> BeamformingPlan:
    """Plan using only per-receiver neutralization (relay listens enough: l <= n)."""
    cfg = ch.config
    if cfg.l > cfg.n:
        raise ValueError("separate construction requires l <= n")
    if alloc.k1 != 0:
        raise ValueError("separate construction cannot align streams (k1 must be 0)")
    k = alloc.k2
    l = cfg.l
    bases = {user: _neutralizing_basis(ch, user, tol) for user in (1, 2)}

    def parts(seed):
        t_cols, g_cols, v_core = [], [], {}
        for user, to_relay in ((1, ch.h01), (2, ch.h02)):
            cols = _mixed_columns(bases[user], k, derive_seed(seed, "user", user),
                                  f"user {user} neutralization")
            v_core[user] = cols[l:, :]
            if k:
                t_cols.append(cols[:l, :])
                g_cols.append(to_relay @ cols[l:, :])
        return v_core[1], v_core[2], t_cols, g_cols

    return _assemble(ch, alloc, parts, tol)


def build_aligned_plan(ch: ChannelInstance, alloc: StreamAllocation,
                       tol: TolerancePolicy = DEFAULT_TOL) -> BeamformingPlan:
    """Plan aligning k1 stream pairs at the relay (l > n), plus k2 separate pairs.

    Each aligned triple (t, v1, v2) solves the stacked system that kills
    user 1 at receiver 2, user 2 at receiver 1, and makes both streams
    arrive on one shared direction at the relay; the relay then decodes and
    forwards the stream sum.
    """
    cfg = ch.config
    if cfg.l <= cfg.n:
        raise ValueError("aligned construction requires l > n")
    m, n, l = cfg.m, cfg.n, cfg.l
    k1, k2 = alloc.k1, alloc.k2

    zmm = np.zeros((m, m), dtype=np.complex128)
    znl = np.zeros((n, l), dtype=np.complex128)
    system = np.block([
        [ch.h20, ch.h21, zmm],
        [ch.h10, zmm, ch.h12],
        [znl, ch.h01, -ch.h02],
    ])
    aligned_basis = null_space_basis(system, tol)
    bases = {user: _neutralizing_basis(ch, user, tol) for user in (1, 2)}

    def parts(seed):
        triples = _mixed_columns(aligned_basis, k1, derive_seed(seed, "aligned"),
                                 "aligned pairs")
        t_al = triples[:l, :]
        v1_al = triples[l:l + m, :]
        v2_al = triples[l + m:, :]
        na = {}
        for user, to_relay in ((1, ch.h01), (2, ch.h02)):
            cols = _mixed_columns(bases[user], k2, derive_seed(seed, "user", user),
                                  f"user {user} neutralization")
            na[user] = (cols[:l, :], cols[l:, :], to_relay @ cols[l:, :])
        v1_core = np.hstack([v1_al, na[1][1]])
        v2_core = np.hstack([v2_al, na[2][1]])
        t_cols, g_cols = [], []
        if k1:
            t_cols.append(t_al)
            g_cols.append(ch.h01 @ v1_al)
        if k2:
            t_cols.extend([na[1][0], na[2][0]])
            g_cols.extend([na[1][2], na[2][2]])
        return v1_core, v2_core, t_cols, g_cols

    return _assemble(ch, alloc, parts, tol)


def build_plan(ch: ChannelInstance, corner: int = 1,
               tol: TolerancePolicy = DEFAULT_TOL) -> BeamformingPlan:
    """Dispatch to the applicable construction, extending the channel when
    the closed-form stream count is half-integral.

    The returned plan may live on the two-slot extension of ``ch``;
    :func:`verify_plan` and :func:`effective_channels` re-derive that
    extension deterministically, and reported stream pairs are always per
    channel use.
    """
    work = ch
    if closed_form_streams(ch.config).denominator != 1:
        work = extend_channel(ch, 2)
    alloc = allocate_streams(work.config, corner)
    if work.config.l <= work.config.n:
        return build_separate_plan(work, alloc, tol)
    return build_aligned_plan(work, alloc, tol)


def write_plan(plan: BeamformingPlan) -> str:
    """Serialize a plan to JSON; a is stored even though it equals t @ u."""
    al = plan.allocation
    doc = {
        "allocation": {"k1": al.k1, "k2": al.k2, "d1": al.d1, "d2": al.d2,
                       "corner": al.corner},
        "V1": matrix_to_pairs(plan.v1),
        "V2": matrix_to_pairs(plan.v2),
        "T": matrix_to_pairs(plan.t),
        "U": matrix_to_pairs(plan.u),
        "A": matrix_to_pairs(plan.a),
    }
    return json.dumps(doc)


def read_plan(text: str, tol: TolerancePolicy = DEFAULT_TOL) -> BeamformingPlan:
    """Parse a serialized plan, checking shapes and the a = t @ u factorization."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"invalid JSON: {exc}") from exc
    for field in ("allocation", "V1", "V2", "T", "U", "A"):
        if field not in doc:
            raise ChannelFormatError(f"missing field '{field}'")
    al_doc = doc["allocation"]
    try:
        alloc = StreamAllocation(k1=int(al_doc["k1"]), k2=int(al_doc["k2"]),
                                 d1=int(al_doc["d1"]), d2=int(al_doc["d2"]),
                                 corner=int(al_doc["corner"]))
    except KeyError as exc:
        raise ChannelFormatError(f"missing field 'allocation.{exc.args[0]}'") from exc
    mats = {name: matrix_from_pairs(doc[name], name)
            for name in ("V1", "V2", "T", "U", "A")}
    tfac, ufac, afac = mats["T"], mats["U"], mats["A"]
    r = alloc.relay_streams
    if r == 0:
        # zero-width factors serialize without shape information
        tfac = tfac.reshape(afac.shape[0], 0)
        ufac = ufac.reshape(0, afac.shape[1])
    diff = spectral_norm(afac - tfac @ ufac)
    scale = max(spectral_norm(afac), spectral_norm(tfac) * spectral_norm(ufac))
    limit = tol.residual_rel_tol * scale
    if diff > limit:
        raise ChannelFormatError("field 'A': does not equal T @ U within tolerance")
    return BeamformingPlan(v1=mats["V1"], v2=mats["V2"], t=tfac, u=ufac,
                           a=afac, allocation=alloc)
