"""Two-layer random binning at desk-scale block lengths.

Indices are 0-based throughout: the "all ones" fallback of the encoder is
the all-zero tuple here, and a failed decoder returns key 0.

Codeword layout::

    v_words[j_v1, j_v2, :]                    ~ P_V^n
    u_words[j_u1, j_u2, j_u3, j_v1, j_v2, :]  ~ P_{U|V}^n given v_words[j_v1, j_v2]

Helper data is ``(j_v1, j_u1)`` and the key is ``j_u2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .discrete import DiscreteCompoundModel, TestChannelPair

MAX_CODEBOOK_CELLS = 2**24
MAX_ENUMERATION = 2**26
SIZE_SLACK = 1e-9


class ResourceCapError(RuntimeError):
    """A codebook or enumeration would exceed its configured cap."""


def set_size(n: int, rate: float) -> int:
    """``ceil(2^(n R))`` for ``R >= 0``; negative rates give a single index."""
    return max(1, math.ceil(2.0 ** (n * max(rate, 0.0)) - SIZE_SLACK))


@dataclass(frozen=True)
class IndexSizes:
    v1: int
    v2: int
    u1: int
    u2: int
    u3: int

    @classmethod
    def from_rates(cls, n: int, r_v: float, r_jv1: float, r_ju1: float, r_s: float, r_u3: float) -> "IndexSizes":
        return cls(set_size(n, r_jv1), set_size(n, r_v - r_jv1), set_size(n, r_ju1), set_size(n, r_s), set_size(n, r_u3))

    @property
    def n_v(self) -> int:
        return self.v1 * self.v2

    @property
    def n_u(self) -> int:
        """u-words per v-word."""
        return self.u1 * self.u2 * self.u3

    @property
    def storage_bits(self) -> float:
        return math.log2(self.v1 * self.u1)


def sequence_joints(m: DiscreteCompoundModel, t: TestChannelPair) -> dict:
    """Single-letter tables the coder tests typicality against."""
    q, r = t.u_given_xt.rows, t.v_given_u.rows
    p_x_xtuv = np.einsum("xt,tu,uv->xtuv", m.p_x.probs[:, None] * m.enrollment.rows, q, r)
    p_xtuv = p_x_xtuv.sum(axis=0)
    p_uv = p_xtuv.sum(axis=0)
    p_v = p_uv.sum(axis=0)
    # rows indexed by v; unreachable v values never get drawn
    u_given_v = np.where(p_v > 0, p_uv / np.where(p_v > 0, p_v, 1.0), 1.0 / p_uv.shape[0]).T
    p_x_uv = p_x_xtuv.sum(axis=1)
    p_yuv = [np.einsum("xy,xuv->yuv", w.rows, p_x_uv) for w in m.decoder_states]
    return {
        "p_v": p_v,
        "u_given_v": u_given_v,
        "p_xtv": p_xtuv.sum(axis=1),
        "p_xtuv": p_xtuv,
        "p_yv": [p.sum(axis=1) for p in p_yuv],
        "p_yuv": p_yuv,
    }


def typical(seqs, p: np.ndarray, delta: float) -> np.ndarray:
    """Strong typicality of aligned symbol strings against the joint ``p``.

    ``seqs`` holds one integer array per axis of ``p``, broadcastable to a
    common shape ``(..., n)``.  A tuple of strings is typical when every
    empirical cell frequency lies within ``delta * p`` of ``p``; cells with
    ``p = 0`` must be empty.
    """
    code = 0
    for s, size in zip(seqs, p.shape):
        code = code * size + np.asarray(s, dtype=np.int64)
    n = code.shape[-1]
    ok = None
    for c, pc in enumerate(p.ravel()):
        freq = np.count_nonzero(code == c, axis=-1) / n
        cell = np.abs(freq - pc) <= delta * pc + 1e-12
        ok = cell if ok is None else ok & cell
    return ok


def _sample_rows(rng: np.random.Generator, rows: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """One draw from ``rows[i]`` for every entry ``i`` of ``inputs``."""
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(inputs.shape)
    return (u[..., None] > cdf[inputs]).sum(axis=-1).astype(np.int8)


@dataclass(frozen=True)
class BinningCodebook:
    n: int
    sizes: IndexSizes
    v_words: np.ndarray
    u_words: np.ndarray
    model: DiscreteCompoundModel
    channels: TestChannelPair
    joints: dict

    @property
    def v_flat(self) -> np.ndarray:
        return self.v_words.reshape(self.sizes.n_v, self.n)

    @property
    def u_by_v(self) -> np.ndarray:
        """u-words grouped as ``[v index, u index, :]`` with flat C-order indices."""
        s = self.sizes
        return np.moveaxis(self.u_words, (3, 4), (0, 1)).reshape(s.n_v, s.n_u, self.n)

    def split(self, flat: np.ndarray):
        """Flat tuple index over ``(v, u)`` to ``(j_v1, j_v2, j_u1, j_u2, j_u3)``."""
        s = self.sizes
        iv, iu = np.divmod(flat, s.n_u)
        jv1, jv2 = np.divmod(iv, s.v2)
        ju1, rest = np.divmod(iu, s.u2 * s.u3)
        ju2, ju3 = np.divmod(rest, s.u3)
        return jv1, jv2, ju1, ju2, ju3


def build_codebook(
    m: DiscreteCompoundModel,
    t: TestChannelPair,
    n: int,
    sizes: IndexSizes,
    rng: np.random.Generator,
    max_cells: int = MAX_CODEBOOK_CELLS,
) -> BinningCodebook:
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    cells = sizes.n_v * n * (1 + sizes.n_u)
    if cells > max_cells:
        raise ResourceCapError(f"codebook needs {cells} symbol cells, cap is {max_cells}; lower n or the rates")
    j = sequence_joints(m, t)
    v = _sample_rows(rng, j["p_v"][None], np.zeros((sizes.v1, sizes.v2, n), dtype=np.int64))
    owners = np.broadcast_to(v, (sizes.u1, sizes.u2, sizes.u3) + v.shape)
    u = _sample_rows(rng, j["u_given_v"], owners)
    v.setflags(write=False)
    u.setflags(write=False)
    return BinningCodebook(n, sizes, v, u, m, t, j)


def _check_len(seq: np.ndarray, n: int):
    if seq.shape[-1] != n:
        raise ValueError(f"sequence length {seq.shape[-1]} does not match block length {n}")


def encoder_hits(cb: BinningCodebook, xt: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Typicality hits for a batch ``xt`` of shape ``(T, n)``.

    Returns ``(v_ok, hits)``: ``v_ok[T, n_v]`` marks typical v-words and
    ``hits[T, n_v * n_u]`` marks full tuples passing both tests.
    """
    xt = np.atleast_2d(xt)
    _check_len(xt, cb.n)
    j = cb.joints
    v = cb.v_flat
    v_ok = typical([xt[:, None, :], v[None]], j["p_xtv"], delta)
    u_ok = typical([xt[:, None, None, :], cb.u_by_v[None], v[None, :, None, :]], j["p_xtuv"], delta)
    hits = (v_ok[:, :, None] & u_ok).reshape(len(xt), -1)
    return v_ok, hits


def pick_hits(hits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform choice among each row's hits; rows with none fall back to 0."""
    counts = hits.sum(axis=1)
    rank = np.floor(rng.random(len(hits)) * np.maximum(counts, 1)).astype(np.int64)
    cum = np.cumsum(hits, axis=1)
    chosen = (cum <= rank[:, None]).sum(axis=1)
    return np.where(counts > 0, chosen, 0)


def enroll(cb: BinningCodebook, xt_seq, delta: float, rng: np.random.Generator | None = None):
    """Encode one enrollment sequence.

    Returns ``((j_v1, j_u1), j_u2, (j_v1, j_v2, j_u1, j_u2, j_u3))``.
    """
    xt = np.asarray(xt_seq)
    if xt.ndim != 1:
        raise ValueError("enroll takes a single sequence")
    _, hits = encoder_hits(cb, xt[None], delta)
    rng = np.random.default_rng(0) if rng is None else rng
    idx = tuple(int(a[0]) for a in cb.split(pick_hits(hits, rng)))
    return (idx[0], idx[2]), idx[3], idx


@dataclass(frozen=True)
class DecodeResult:
    key: np.ndarray
    ok: np.ndarray
    v_hits: np.ndarray
    u_hits: np.ndarray


def decode_batch(cb: BinningCodebook, y: np.ndarray, jv1: np.ndarray, ju1: np.ndarray, delta: float, k: int = 0) -> DecodeResult:
    """Two-stage unique-typicality decoding for a batch of observations."""
    y = np.atleast_2d(y)
    _check_len(y, cb.n)
    jv1 = np.asarray(jv1, dtype=np.int64)
    ju1 = np.asarray(ju1, dtype=np.int64)
    j = cb.joints
    cand_v = cb.v_words[jv1]
    v_ok = typical([y[:, None, :], cand_v], j["p_yv"][k], delta)
    v_hits = v_ok.sum(axis=1)
    jv2 = np.argmax(v_ok, axis=1)
    v_hat = cb.v_words[jv1, jv2]
    cand_u = cb.u_words[ju1, :, :, jv1, jv2]
    u_ok = typical([y[:, None, None, :], cand_u, v_hat[:, None, None, :]], j["p_yuv"][k], delta)
    u_hits = u_ok.reshape(len(y), -1).sum(axis=1)
    ju2 = np.argmax(u_ok.reshape(len(y), -1), axis=1) // cb.sizes.u3
    ok = (v_hits == 1) & (u_hits == 1)
    return DecodeResult(np.where(ok, ju2, 0), ok, v_hits, u_hits)


def authenticate(cb: BinningCodebook, y_seq, helper, delta: float, k: int = 0) -> tuple[int, bool]:
    """Key estimate and success flag; a failure returns key 0."""
    y = np.asarray(y_seq)
    if y.ndim != 1:
        raise ValueError("authenticate takes a single sequence")
    r = decode_batch(cb, y[None], [helper[0]], [helper[1]], delta, k)
    return int(r.key[0]), bool(r.ok[0])


# --- exact enumeration -----------------------------------------------------


def all_sequences(alphabet: int, n: int) -> np.ndarray:
    """Every length-``n`` string in lexicographic order, shape ``(alphabet^n, n)``."""
    return np.indices((alphabet,) * n).reshape(n, -1).T.astype(np.int8)


def _power(mat: np.ndarray, n: int) -> np.ndarray:
    return reduce(np.kron, [mat] * n)


def _check_enumeration(cb: BinningCodebook, other: int, cap: int):
    nx = len(cb.model.p_x)
    need = nx**cb.n * max(cb.model.n_xt**cb.n, other**cb.n)
    if need > cap:
        raise ResourceCapError(f"exact enumeration needs {need} joint states, cap is {cap}")


def encoder_table(cb: BinningCodebook, delta: float) -> np.ndarray:
    """``P(j_v1, j_u1, j_u2 | xt^n)`` with the tie-break averaged out.

    Shape ``(|Xt|^n, v1, u1, u2)``.
    """
    s = cb.sizes
    xt = all_sequences(cb.model.n_xt, cb.n)
    out = np.zeros((len(xt), s.v1, s.u1, s.u2))
    for lo in range(0, len(xt), 256):
        _, hits = encoder_hits(cb, xt[lo:lo + 256], delta)
        counts = hits.sum(axis=1)
        w = np.where(counts[:, None] > 0, hits / np.maximum(counts, 1)[:, None], 0.0)
        w[counts == 0, 0] = 1.0
        full = w.reshape(-1, s.v1, s.v2, s.u1, s.u2, s.u3)
        out[lo:lo + 256] = full.sum(axis=(2, 5))
    return out


def _source_to_enrollment(cb: BinningCodebook) -> np.ndarray:
    """``P(x^n, xt^n)`` as a matrix."""
    return _power(cb.model.p_x.probs, cb.n)[:, None] * _power(cb.model.enrollment.rows, cb.n)


def _plugin_h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _cmi_from_table(p: np.ndarray) -> float:
    """``I(A;B|C)`` from a 3-d table indexed ``[a, b, c]``."""
    v = _plugin_h(p.sum(axis=1)) + _plugin_h(p.sum(axis=0)) - _plugin_h(p) - _plugin_h(p.sum(axis=(0, 1)))
    return max(v, 0.0) if v > -1e-10 else v


def exact_leakage(
    cb: BinningCodebook,
    l: int,
    which: str,
    delta: float,
    cap: int = MAX_ENUMERATION,
    enc: np.ndarray | None = None,
) -> float:
    """Exact ``I(S; J, Z^n)`` (secrecy) or ``I(X^n; J | Z^n)`` (privacy) in bits."""
    if which not in ("secrecy", "privacy"):
        raise ValueError(f"which must be 'secrecy' or 'privacy', got {which!r}")
    w = cb.model.eve_states[l].rows
    _check_enumeration(cb, w.shape[1], cap)
    enc = encoder_table(cb, delta) if enc is None else enc
    a = _source_to_enrollment(cb)
    wz = _power(w, cb.n)
    s = cb.sizes
    if which == "secrecy":
        p_jsz = (a @ enc.reshape(len(enc), -1)).T @ wz  # [(j, s), z]
        p = p_jsz.reshape(s.v1 * s.u1, s.u2, -1).transpose(1, 0, 2)  # [s, j, z]
        p_s = p.sum(axis=(1, 2))
        # I(S; J,Z) = H(S) + H(J,Z) - H(S,J,Z)
        v = _plugin_h(p_s) + _plugin_h(p.sum(axis=0)) - _plugin_h(p)
        return max(v, 0.0)
    p_xj = a @ enc.sum(axis=3).reshape(len(enc), -1)  # [x, j]
    cells = p_xj.size * wz.shape[1]
    if cells > cap:
        raise ResourceCapError(f"privacy table needs {cells} cells, cap is {cap}")
    p = p_xj[:, :, None] * wz[:, None, :]
    return _cmi_from_table(p)


def decode_table(cb: BinningCodebook, k: int, delta: float) -> np.ndarray:
    """Decoded key for every ``(y^n, j_v1, j_u1)``, shape ``(|Y|^n, v1, u1)``."""
    s = cb.sizes
    ys = all_sequences(cb.model.decoder_states[k].n_out, cb.n)
    jv1, ju1 = np.divmod(np.arange(s.v1 * s.u1), s.u1)
    out = np.empty((len(ys), s.v1 * s.u1), dtype=np.int64)
    step = max(1, 4096 // len(jv1))
    for lo in range(0, len(ys), step):
        blk = ys[lo:lo + step]
        yy = np.repeat(blk, len(jv1), axis=0)
        r = decode_batch(cb, yy, np.tile(jv1, len(blk)), np.tile(ju1, len(blk)), delta, k)
        out[lo:lo + len(blk)] = r.key.reshape(len(blk), -1)
    return out.reshape(len(ys), s.v1, s.u1)


def exact_error_probability(
    cb: BinningCodebook,
    k: int,
    delta: float,
    cap: int = MAX_ENUMERATION,
    enc: np.ndarray | None = None,
) -> float:
    """Exact ``P(S_hat != S)`` for decoder state ``k`` and this codebook."""
    w = cb.model.decoder_states[k].rows
    _check_enumeration(cb, w.shape[1], cap)
    enc = encoder_table(cb, delta) if enc is None else enc
    s = cb.sizes
    d = decode_table(cb, k, delta)
    wrong = (d[:, :, :, None] != np.arange(s.u2)).reshape(len(d), -1).astype(float)  # [y, (j, s)]
    a = _source_to_enrollment(cb)
    p_x_js = a @ enc.reshape(len(enc), -1)
    p_x_wrong = _power(w, cb.n) @ wrong
    return float(np.clip((p_x_js * p_x_wrong).sum(), 0.0, 1.0))
