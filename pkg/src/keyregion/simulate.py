"""Configuration, Monte-Carlo / exact runs and reports for the binning scheme.

Random streams: the codebook uses ``SeedSequence(seed, spawn_key=(0,))`` and
Monte-Carlo batch ``b`` (fixed size :data:`BATCH`) uses
``SeedSequence(seed, spawn_key=(1, b))`` for its source, channel and
tie-break draws, so results do not depend on how batches are scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from . import binning as bn
from .discrete import DiscreteCompoundModel, TestChannelPair, inner_point

BATCH = 500
RATE_FIELDS = ("r_v", "r_jv1", "r_ju1", "r_s", "r_u3")
WILSON_Z = 1.959963984540054


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int
    rates: dict
    delta: float = 0.15
    seed: int = 0
    trials: int = 10_000
    mode: str = "monte_carlo"
    max_codebook_cells: int = bn.MAX_CODEBOOK_CELLS
    max_enumeration: int = bn.MAX_ENUMERATION

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        missing = [f for f in RATE_FIELDS if f not in self.rates]
        if missing:
            raise ConfigError(f"rates missing field(s): {', '.join(missing)}")
        bad = [f for f in RATE_FIELDS if not self.rates[f] >= 0]
        if bad:
            raise ConfigError(f"rates must be >= 0: {', '.join(bad)}")
        if self.mode not in ("exact", "monte_carlo"):
            raise ConfigError(f"mode must be 'exact' or 'monte_carlo', got {self.mode!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        object.__setattr__(self, "rates", {f: float(self.rates[f]) for f in RATE_FIELDS})

    @property
    def r_u(self) -> float:
        r = self.rates
        return r["r_ju1"] + r["r_s"] + r["r_u3"]

    @property
    def sizes(self) -> bn.IndexSizes:
        return bn.IndexSizes.from_rates(self.n, **self.rates)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SimConfig":
        missing = [f for f in ("n", "rates") if f not in d]
        if missing:
            raise ConfigError(f"config missing field(s): {', '.join(missing)}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def load(cls, path) -> "SimConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def rates_from_test_channel(m: DiscreteCompoundModel, t: TestChannelPair, margin: float = 0.1) -> dict:
    """Codebook rates set ``margin`` bits inside the inner point of ``t``.

    Mirrors the construction: ``R_v = I(Xt;V) + m``, helper bins at
    ``+2m`` / ``+3m`` above their conditional informations, key rate ``m``
    below the inner key rate and the eavesdropper-confusion layer ``m``
    below ``max_l I(Z;U|V)``.  Negative results are floored at 0.
    """
    terms = inner_point(m, t).terms
    q, r = t.u_given_xt.rows, t.v_given_u.rows
    p_xt = m.p_x.probs @ m.enrollment.rows
    p_tv = p_xt[:, None] * (q @ r)
    i_xt_v = _mi(p_tv)
    rates = {
        "r_v": i_xt_v + margin,
        "r_jv1": terms["max_k_I_XtV_given_Y"] + 2 * margin,
        "r_ju1": terms["max_k_I_XtU_given_VY"] + 3 * margin,
        "r_s": terms["min_k_I_YU_given_V"] - terms["max_l_I_ZU_given_V"] - margin,
        "r_u3": terms["max_l_I_ZU_given_V"] - margin,
    }
    return {k: max(v, 0.0) for k, v in rates.items()}


def _mi(p: np.ndarray) -> float:
    h = bn._plugin_h
    return max(h(p.sum(axis=1)) + h(p.sum(axis=0)) - h(p), 0.0)


def wilson_interval(successes: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z / den * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, centre - half), min(1.0, centre + half)


def tv_to_uniform(p: np.ndarray) -> float:
    p = np.asarray(p, float)
    return 0.5 * float(np.abs(p - 1.0 / p.size).sum())


def _plugin_mi(*cols: np.ndarray, given: np.ndarray | None = None) -> float:
    """Plug-in ``I(A;B)`` or ``I(A;B|C)`` from integer-coded samples."""

    def h(*xs):
        if not xs:
            return 0.0
        _, c = np.unique(np.stack(xs, axis=1), axis=0, return_counts=True)
        return bn._plugin_h(c / c.sum())

    a, b = cols
    c = () if given is None else (given,)
    return max(h(a, *c) + h(b, *c) - h(a, b, *c) - h(*c), 0.0)


@dataclass
class SimReport:
    mode: str
    n: int
    delta: float
    sizes: dict
    storage_bits: float
    error_prob_per_k: list
    key_tv_uniform: float
    secrecy_leak_per_l: list
    privacy_leak_per_l: list
    error_ci_per_k: list = field(default_factory=list)
    event_counts: dict = field(default_factory=dict)
    trials: int = 0

    @property
    def max_error(self) -> float:
        return max(self.error_prob_per_k)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _sequence_codes(seqs: np.ndarray, alphabet: int) -> np.ndarray:
    w = alphabet ** np.arange(seqs.shape[1] - 1, -1, -1, dtype=np.int64)
    return seqs.astype(np.int64) @ w


def codebook_for(m: DiscreteCompoundModel, t: TestChannelPair, cfg: SimConfig) -> bn.BinningCodebook:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    return bn.build_codebook(m, t, cfg.n, cfg.sizes, rng, cfg.max_codebook_cells)


def _run_exact(cb: bn.BinningCodebook, cfg: SimConfig) -> SimReport:
    m = cb.model
    cap = cfg.max_enumeration
    for k in range(m.K):
        bn._check_enumeration(cb, m.decoder_states[k].n_out, cap)
    for l in range(m.L):
        bn._check_enumeration(cb, m.eve_states[l].n_out, cap)
    enc = bn.encoder_table(cb, cfg.delta)
    errors = [bn.exact_error_probability(cb, k, cfg.delta, cap, enc) for k in range(m.K)]
    p_xt = bn._power(m.p_x.probs, cb.n) @ bn._power(m.enrollment.rows, cb.n)
    p_s = p_xt @ enc.sum(axis=(1, 2))
    return SimReport(
        mode="exact",
        n=cb.n,
        delta=cfg.delta,
        sizes=asdict(cb.sizes),
        storage_bits=cb.sizes.storage_bits,
        error_prob_per_k=errors,
        key_tv_uniform=tv_to_uniform(p_s),
        secrecy_leak_per_l=[bn.exact_leakage(cb, l, "secrecy", cfg.delta, cap, enc) for l in range(m.L)],
        privacy_leak_per_l=[bn.exact_leakage(cb, l, "privacy", cfg.delta, cap, enc) for l in range(m.L)],
    )


def _run_monte_carlo(cb: bn.BinningCodebook, cfg: SimConfig) -> SimReport:
    m = cb.model
    s = cb.sizes
    n, delta = cb.n, cfg.delta
    wrong = np.zeros(m.K, dtype=np.int64)
    events = {f"E{i}": [0] * m.K if i > 2 else 0 for i in range(1, 6)}
    keys, helpers = [], []
    xs = []
    zs = [[] for _ in range(m.L)]
    for b, lo in enumerate(range(0, cfg.trials, BATCH)):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1, b)))
        size = min(BATCH, cfg.trials - lo)
        x = bn._sample_rows(rng, m.p_x.probs[None], np.zeros((size, n), dtype=np.int64))
        xt = bn._sample_rows(rng, m.enrollment.rows, x)
        v_ok, hits = bn.encoder_hits(cb, xt, delta)
        events["E1"] += int((~v_ok.any(axis=1)).sum())
        events["E2"] += int((v_ok.any(axis=1) & ~hits.any(axis=1)).sum())
        jv1, jv2, ju1, ju2, ju3 = cb.split(bn.pick_hits(hits, rng))
        keys.append(ju2)
        helpers.append(jv1 * s.u1 + ju1)
        xs.append(_sequence_codes(x, len(m.p_x)))
        v_true = cb.v_words[jv1, jv2]
        u_true = cb.u_words[ju1, ju2, ju3, jv1, jv2]
        for k, w in enumerate(m.decoder_states):
            y = bn._sample_rows(rng, w.rows, x)
            r = bn.decode_batch(cb, y, jv1, ju1, delta, k)
            wrong[k] += int((r.key != ju2).sum())
            tab = cb.joints
            events["E3"][k] += int((~bn.typical([y, u_true, v_true], tab["p_yuv"][k], delta)).sum())
            v_hits = bn.typical([y[:, None], cb.v_words[jv1]], tab["p_yv"][k], delta)
            v_hits[np.arange(size), jv2] = False
            events["E4"][k] += int(v_hits.any(axis=1).sum())
            cand = cb.u_words[ju1, :, :, jv1, jv2]
            u_hits = bn.typical([y[:, None, None], cand, v_true[:, None, None]], tab["p_yuv"][k], delta)
            u_hits[np.arange(size), ju2, ju3] = False
            events["E5"][k] += int(u_hits.reshape(size, -1).any(axis=1).sum())
        for l, w in enumerate(m.eve_states):
            zs[l].append(_sequence_codes(bn._sample_rows(rng, w.rows, x), w.n_out))
    key = np.concatenate(keys)
    helper = np.concatenate(helpers)
    x_code = np.concatenate(xs)
    hist = np.bincount(key, minlength=s.u2) / len(key)
    secrecy, privacy = [], []
    for l in range(m.L):
        z = np.concatenate(zs[l])
        jz = helper * (int(z.max()) + 1) + z
        secrecy.append(_plugin_mi(key, jz))
        privacy.append(_plugin_mi(x_code, helper, given=z))
    return SimReport(
        mode="monte_carlo",
        n=n,
        delta=delta,
        sizes=asdict(s),
        storage_bits=s.storage_bits,
        error_prob_per_k=[int(c) / cfg.trials for c in wrong],
        key_tv_uniform=tv_to_uniform(hist),
        secrecy_leak_per_l=secrecy,
        privacy_leak_per_l=privacy,
        error_ci_per_k=[list(wilson_interval(int(c), cfg.trials)) for c in wrong],
        event_counts=events,
        trials=cfg.trials,
    )


def run_trials(m: DiscreteCompoundModel, t: TestChannelPair, cfg: SimConfig) -> SimReport:
    """Build the seeded codebook and measure it exactly or by sampling.

    Monte-Carlo leakages are plug-in estimates from the sampled tuples and
    are strongly biased upward when the sequence alphabet is large relative
    to the number of trials; exact mode gives the true values.
    """
    cb = codebook_for(m, t, cfg)
    if cfg.mode == "exact":
        return _run_exact(cb, cfg)
    return _run_monte_carlo(cb, cfg)
