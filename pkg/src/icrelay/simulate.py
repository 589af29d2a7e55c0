"""Finite-SNR rate evaluation and Monte-Carlo DoF slope estimation.

Rates are closed-form for a given channel and plan: transmit powers are
split evenly over unit-norm beam columns, the relay's forwarded noise is
whitened exactly at each receiver, and a zero-forcing receiver projects out
the surviving interference subspace before inverting its desired columns.
The DoF estimate is the least-squares slope of sum rate against log2 of the
transmit power over fresh channel draws, which converges to the stream
counts the plan achieves.
"""

from dataclasses import dataclass

import numpy as np

from .channel import AntennaConfig, derive_seed, sample_channel
from .errors import (DegenerateChannelError, PowerHeadroomError,
                     UnstableConfigurationError)
from .linalg import DEFAULT_TOL, TolerancePolicy
from .scheme import build_plan, channel_for_plan, verify_plan


@dataclass(frozen=True)
class SnrSweep:
    """Ascending SNR grid (dB, unit noise) with a trial count and seed."""

    snr_points_db: tuple
    trials: int
    seed: int

    def __post_init__(self):
        pts = tuple(float(x) for x in self.snr_points_db)
        object.__setattr__(self, "snr_points_db", pts)
        if len(pts) < 3:
            raise ValueError("need at least 3 SNR points for a slope")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("SNR points must be strictly ascending")
        if pts[-1] - pts[0] < 20.0:
            raise ValueError("SNR span must cover at least 20 dB")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def powers(self) -> tuple:
        return tuple(10.0 ** (db / 10.0) for db in self.snr_points_db)


def _unit_columns(v: np.ndarray) -> np.ndarray:
    if v.shape[1] == 0:
        return v
    norms = np.linalg.norm(v, axis=0)
    return v / norms


def _inverse_sqrt(q: np.ndarray) -> np.ndarray:
    w, vec = np.linalg.eigh(q)
    return vec @ np.diag(1.0 / np.sqrt(w)) @ vec.conj().T


def rates_at_snr(ch, plan, p: float, tol: TolerancePolicy = DEFAULT_TOL):
    """Achievable per-user rates (bits/channel use) at transmit power ``p``.

    Each user spreads ``p`` evenly over its streams; both back off by the
    largest factor in (0, 1] keeping the relay's output within ``p``.  The
    relay's forwarded noise colors the receiver noise, which is whitened
    exactly before zero-forcing.  ``p`` must exceed the relay's pure
    noise-forwarding power.
    """
    ch = channel_for_plan(ch, plan)
    al = plan.allocation
    m = ch.config.m
    d = {1: al.d1, 2: al.d2}
    a = plan.a

    noise_fwd = float(np.trace(a @ a.conj().T).real)
    if p <= noise_fwd:
        raise PowerHeadroomError(
            f"power {p:.3g} cannot cover relay noise forwarding {noise_fwd:.3g}")

    beams = {1: _unit_columns(plan.v1), 2: _unit_columns(plan.v2)}
    to_relay = {1: ch.h01, 2: ch.h02}
    stream_power = {i: (p / d[i] if d[i] else 0.0) for i in (1, 2)}

    sig_cov = np.zeros((ch.config.n, ch.config.n), dtype=np.complex128)
    for i in (1, 2):
        if d[i]:
            g = to_relay[i] @ beams[i]
            sig_cov += stream_power[i] * (g @ g.conj().T)
    sig_fwd = float(np.trace(a @ sig_cov @ a.conj().T).real)
    beta = min(1.0, (p - noise_fwd) / sig_fwd) if sig_fwd > 0.0 else 1.0

    from_relay = {1: ch.h10, 2: ch.h20}
    direct = {(1, 1): ch.h11, (1, 2): ch.h12, (2, 1): ch.h21, (2, 2): ch.h22}

    rates = {}
    for j in (1, 2):
        i = 3 - j
        desired = (direct[(j, j)] + from_relay[j] @ a @ to_relay[j]) @ beams[j]
        desired = np.sqrt(beta * stream_power[j]) * desired
        cross = (direct[(j, i)] + from_relay[j] @ a @ to_relay[i]) @ beams[i]
        # the first k streams of the interfering user are neutralized here;
        # only the corner user's remaining streams survive
        cross = np.sqrt(beta * stream_power[i]) * cross[:, al.neutralized:]
        if d[j] == 0:
            rates[j] = 0.0
            continue
        q = np.eye(m, dtype=np.complex128) + from_relay[j] @ a @ a.conj().T @ from_relay[j].conj().T
        white = _inverse_sqrt(q)
        dw = white @ desired
        cw = white @ cross
        # zero-force the interference subspace (possibly rank-deficient when
        # it is aligned), then invert the projected desired columns
        if cw.shape[1]:
            ub, sb, _ = np.linalg.svd(cw, full_matrices=False)
            keep = sb > tol.rank_rel_tol * sb[0] if sb[0] > 0.0 else sb > 0
            basis = ub[:, keep]
            dw = dw - basis @ (basis.conj().T @ dw)
        gram_inv = np.linalg.inv(dw.conj().T @ dw)
        total = 0.0
        for idx in range(d[j]):
            sinr = 1.0 / gram_inv[idx, idx].real
            total += np.log2(1.0 + max(sinr, 0.0))
        rates[j] = total / ch.config.extension
    return rates[1], rates[2]


@dataclass(frozen=True)
class SlopeEstimate:
    """Least-squares DoF slope with per-user breakdown and spread."""

    sum_dof: float
    per_user: tuple
    stderr: float
    trials_used: int
    excluded: int
    rows: tuple  # (snr_db, trial, r1, r2) per evaluated point

    def to_jsonable(self) -> dict:
        return {
            "sum_dof": self.sum_dof,
            "per_user": list(self.per_user),
            "stderr": self.stderr,
            "trials_used": self.trials_used,
            "excluded": self.excluded,
        }


def slope_estimate(config: AntennaConfig, sweep: SnrSweep, corner: int = 1,
                   tol: TolerancePolicy = DEFAULT_TOL) -> SlopeEstimate:
    """Estimate the DoF of a configuration from rate slopes over fresh channels.

    Each trial draws a channel from a derived seed, builds and verifies a
    plan, and evaluates rates over the sweep.  Trials that fail verification
    (or lack relay power headroom at the lowest point) are excluded and
    counted; more than 20 percent exclusions aborts with
    :class:`UnstableConfigurationError`.
    """
    powers = sweep.powers
    x = np.log2(powers)
    kept_sum = []
    kept_r1 = []
    kept_r2 = []
    rows = []
    excluded = 0
    for t in range(sweep.trials):
        ch = sample_channel(config, derive_seed(sweep.seed, "trial", t))
        try:
            plan = build_plan(ch, corner, tol)
        except DegenerateChannelError:
            excluded += 1
            continue
        report = verify_plan(ch, plan, tol)
        if not report.all_ok:
            excluded += 1
            continue
        try:
            pair = [rates_at_snr(ch, plan, p, tol) for p in powers]
        except PowerHeadroomError:
            excluded += 1
            continue
        r1 = np.array([r[0] for r in pair])
        r2 = np.array([r[1] for r in pair])
        kept_r1.append(r1)
        kept_r2.append(r2)
        kept_sum.append(r1 + r2)
        for db, (a, b) in zip(sweep.snr_points_db, pair):
            rows.append((db, t, float(a), float(b)))
    if excluded > 0.2 * sweep.trials or not kept_sum:
        raise UnstableConfigurationError(
            f"{excluded} of {sweep.trials} trials failed verification")

    def fit(y):
        return float(np.polyfit(x, y, 1)[0])

    trial_slopes = np.array([fit(y) for y in kept_sum])
    sum_slope = fit(np.mean(kept_sum, axis=0))
    slope1 = fit(np.mean(kept_r1, axis=0))
    slope2 = fit(np.mean(kept_r2, axis=0))
    if len(trial_slopes) > 1:
        stderr = float(np.std(trial_slopes, ddof=1) / np.sqrt(len(trial_slopes)))
    else:
        stderr = 0.0
    return SlopeEstimate(sum_dof=sum_slope, per_user=(slope1, slope2),
                         stderr=stderr, trials_used=len(kept_sum),
                         excluded=excluded, rows=tuple(rows))
