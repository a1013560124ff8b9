"""Inner and outer bound points for discrete compound sources.

A test-channel pair ``(P(U|Xt), P(V|U))`` fixes one candidate point of each
bound.  The inner bound takes the worst decoder and best eavesdropper state
*inside* each term; the outer bound is evaluated per state pair ``(k, l)``
and intersected afterwards (see :mod:`keyregion.search`).

Two evaluation paths exist on purpose: :func:`inner_point` and
:func:`outer_point` go through the generic named-axis joint, while
:class:`ChannelEvaluator` works on small marginal tables and is what the
search loop calls tens of thousands of times.  Tests hold them equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .gaussian import RateTriple
from .info import (
    CondDist,
    DistributionError,
    FiniteDist,
    compose_chain,
    conditional_mutual_information,
    mutual_information,
    product_channel,
)

Kind = Literal["gs", "cs"]
RS_CLAMP = 1e-12


@dataclass(frozen=True)
class DiscreteCompoundModel:
    """Source, enrollment channel and compound decoder/eavesdropper channels.

    Multi-antenna outputs must already be flattened into a single finite
    alphabet per state.
    """

    p_x: FiniteDist
    enrollment: CondDist
    decoder_states: tuple[CondDist, ...]
    eve_states: tuple[CondDist, ...]

    def __post_init__(self):
        p_x = self.p_x if isinstance(self.p_x, FiniteDist) else FiniteDist(self.p_x)
        enr = self.enrollment if isinstance(self.enrollment, CondDist) else CondDist(self.enrollment)
        dec = tuple(c if isinstance(c, CondDist) else CondDist(c) for c in self.decoder_states)
        eve = tuple(c if isinstance(c, CondDist) else CondDist(c) for c in self.eve_states)
        if not dec or not eve:
            raise DistributionError("need at least one decoder state and one eavesdropper state")
        nx = len(p_x)
        for what, c in [("enrollment", enr), *[("decoder", c) for c in dec], *[("eavesdropper", c) for c in eve]]:
            if c.n_in != nx:
                raise DistributionError(f"{what} channel has {c.n_in} input symbols, source has {nx}")
        object.__setattr__(self, "p_x", p_x)
        object.__setattr__(self, "enrollment", enr)
        object.__setattr__(self, "decoder_states", dec)
        object.__setattr__(self, "eve_states", eve)

    @property
    def n_xt(self) -> int:
        return self.enrollment.n_out

    @property
    def K(self) -> int:
        return len(self.decoder_states)

    @property
    def L(self) -> int:
        return len(self.eve_states)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiscreteCompoundModel":
        missing = [k for k in ("p_x", "enrollment", "decoder_states", "eve_states") if k not in d]
        if missing:
            raise DistributionError(f"model is missing field(s): {', '.join(missing)}")
        return cls(
            FiniteDist(d["p_x"]),
            CondDist(d["enrollment"]),
            tuple(CondDist(c) for c in d["decoder_states"]),
            tuple(CondDist(c) for c in d["eve_states"]),
        )

    def to_dict(self) -> dict:
        return {
            "p_x": self.p_x.probs.tolist(),
            "enrollment": self.enrollment.rows.tolist(),
            "decoder_states": [c.rows.tolist() for c in self.decoder_states],
            "eve_states": [c.rows.tolist() for c in self.eve_states],
        }

    @classmethod
    def load(cls, path) -> "DiscreteCompoundModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class TestChannelPair:
    u_given_xt: CondDist
    v_given_u: CondDist

    __test__ = False  # not a pytest class

    def __post_init__(self):
        u = self.u_given_xt if isinstance(self.u_given_xt, CondDist) else CondDist(self.u_given_xt)
        v = self.v_given_u if isinstance(self.v_given_u, CondDist) else CondDist(self.v_given_u)
        if v.n_in != u.n_out:
            raise DistributionError(f"P(V|U) expects {v.n_in} U symbols, P(U|Xt) produces {u.n_out}")
        object.__setattr__(self, "u_given_xt", u)
        object.__setattr__(self, "v_given_u", v)

    @property
    def n_u(self) -> int:
        return self.u_given_xt.n_out

    @property
    def n_v(self) -> int:
        return self.v_given_u.n_out

    @classmethod
    def from_dict(cls, d: Mapping) -> "TestChannelPair":
        missing = [k for k in ("u_given_xt", "v_given_u") if k not in d]
        if missing:
            raise DistributionError(f"test channels missing field(s): {', '.join(missing)}")
        return cls(CondDist(d["u_given_xt"]), CondDist(d["v_given_u"]))

    def to_dict(self) -> dict:
        return {"u_given_xt": self.u_given_xt.rows.tolist(), "v_given_u": self.v_given_u.rows.tolist()}

    @classmethod
    def load(cls, path) -> "TestChannelPair":
        with open(path) as f:
            return cls.from_dict(json.load(f))


INNER_TERMS = (
    "min_k_I_YU_given_V",
    "max_l_I_ZU_given_V",
    "max_k_I_XtU_given_VY",
    "max_k_I_XtV_given_Y",
    "I_XtU_given_X",
    "min_k_I_YV",
    "min_l_I_ZV",
)
OUTER_TERMS = ("I_YU_given_V", "I_ZU_given_V", "I_XtU_given_Y", "I_XU_given_Y", "I_YV", "I_ZV")


@dataclass(frozen=True)
class BoundPoint:
    triple: RateTriple
    terms: dict[str, float]
    channels: TestChannelPair | None = field(default=None, compare=False, repr=False)


def _clamped(r_s: float, r_j_gs: float, r_l: float, kind: Kind) -> RateTriple:
    # an empty key constraint (r_s < 0) still certifies (0, r_j, r_l) via constant U
    r_s = r_s if r_s > RS_CLAMP else 0.0
    r_j_gs = max(r_j_gs, 0.0)
    r_j = r_j_gs + r_s if kind == "cs" else r_j_gs
    return RateTriple(r_s, r_j, max(r_l, 0.0))


def inner_triple(terms: Mapping[str, float], kind: Kind = "gs") -> RateTriple:
    r_s = terms["min_k_I_YU_given_V"] - terms["max_l_I_ZU_given_V"]
    r_j = terms["max_k_I_XtU_given_VY"] + terms["max_k_I_XtV_given_Y"]
    r_l = r_j - terms["I_XtU_given_X"] + terms["min_k_I_YV"] - terms["min_l_I_ZV"]
    return _clamped(r_s, r_j, r_l, kind)


def outer_triple(terms: Mapping[str, float], kind: Kind = "gs") -> RateTriple:
    r_s = terms["I_YU_given_V"] - terms["I_ZU_given_V"]
    r_l = terms["I_XU_given_Y"] + terms["I_YV"] - terms["I_ZV"]
    return _clamped(r_s, terms["I_XtU_given_Y"], r_l, kind)


def _check_kind(kind):
    if kind not in ("gs", "cs"):
        raise ValueError(f"kind must be 'gs' or 'cs', got {kind!r}")


def _check_compatible(m: DiscreteCompoundModel, t: TestChannelPair):
    if t.u_given_xt.n_in != m.n_xt:
        raise DistributionError(f"P(U|Xt) expects {t.u_given_xt.n_in} Xt symbols, model has {m.n_xt}")


def _state_joint(m: DiscreteCompoundModel, t: TestChannelPair, y: CondDist, z: CondDist):
    return compose_chain(m.p_x, m.enrollment, t.u_given_xt, t.v_given_u, product_channel(y, z))


def _y_terms(j) -> dict[str, float]:
    return {
        "I_YU_given_V": conditional_mutual_information(j, "Y", "U", "V"),
        "I_XtU_given_VY": conditional_mutual_information(j, "Xt", "U", ("V", "Y")),
        "I_XtV_given_Y": conditional_mutual_information(j, "Xt", "V", "Y"),
        "I_XtU_given_Y": conditional_mutual_information(j, "Xt", "U", "Y"),
        "I_XU_given_Y": conditional_mutual_information(j, "X", "U", "Y"),
        "I_YV": mutual_information(j, "Y", "V"),
    }


def _z_terms(j) -> dict[str, float]:
    return {
        "I_ZU_given_V": conditional_mutual_information(j, "Z", "U", "V"),
        "I_ZV": mutual_information(j, "Z", "V"),
    }


def _trivial(n: int) -> CondDist:
    return CondDist.constant(n, 1)


def inner_point(m: DiscreteCompoundModel, t: TestChannelPair, kind: Kind = "gs") -> BoundPoint:
    """Extreme point of the inner bound for one test-channel pair."""
    _check_kind(kind)
    _check_compatible(m, t)
    nx = len(m.p_x)
    ys = [_y_terms(_state_joint(m, t, y, _trivial(nx))) for y in m.decoder_states]
    zs = [_z_terms(_state_joint(m, t, _trivial(nx), z)) for z in m.eve_states]
    j0 = _state_joint(m, t, _trivial(nx), _trivial(nx))
    terms = {
        "min_k_I_YU_given_V": min(d["I_YU_given_V"] for d in ys),
        "max_l_I_ZU_given_V": max(d["I_ZU_given_V"] for d in zs),
        "max_k_I_XtU_given_VY": max(d["I_XtU_given_VY"] for d in ys),
        "max_k_I_XtV_given_Y": max(d["I_XtV_given_Y"] for d in ys),
        "I_XtU_given_X": conditional_mutual_information(j0, "Xt", "U", "X"),
        "min_k_I_YV": min(d["I_YV"] for d in ys),
        "min_l_I_ZV": min(d["I_ZV"] for d in zs),
    }
    return BoundPoint(inner_triple(terms, kind), terms, t)


def outer_point(m: DiscreteCompoundModel, k: int, l: int, t: TestChannelPair, kind: Kind = "gs") -> BoundPoint:
    """Per-state-pair outer constraint point for one test-channel pair."""
    _check_kind(kind)
    _check_compatible(m, t)
    if not 0 <= k < m.K:
        raise IndexError(f"decoder state {k} out of range [0, {m.K})")
    if not 0 <= l < m.L:
        raise IndexError(f"eavesdropper state {l} out of range [0, {m.L})")
    j = _state_joint(m, t, m.decoder_states[k], m.eve_states[l])
    y = _y_terms(j)
    z = _z_terms(j)
    terms = {name: {**y, **z}[name] for name in OUTER_TERMS}
    return BoundPoint(outer_triple(terms, kind), terms, t)


def default_caps(m: DiscreteCompoundModel, outer: bool = False) -> tuple[int, int]:
    """Cardinality bounds (|U|, |V|) sufficient for the inner or outer bound."""
    n, kl = m.n_xt, m.K + m.L
    u = (n + 2 * kl + 1) * (n + kl + 1)
    v = n + 2 * kl + 1 if outer else n + 6
    return u, v


# --- fast path -------------------------------------------------------------


def _H(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _cmi(h_ac, h_bc, h_abc, h_c) -> float:
    v = h_ac + h_bc - h_abc - h_c
    return 0.0 if -1e-10 <= v < 0 else v


class ChannelEvaluator:
    """Term evaluation on marginal tables; reuses per-state source tables."""

    def __init__(self, m: DiscreteCompoundModel):
        self.m = m
        px = m.p_x.probs
        self.p_x_xt = px[:, None] * m.enrollment.rows
        self.h_x_xt = _H(self.p_x_xt)
        self.h_x = _H(px)
        self.y_tables = [self._tables(px, w.rows) for w in m.decoder_states]
        self.z_tables = [self._tables(px, w.rows) for w in m.eve_states]

    def _tables(self, px, w):
        p_x_y = px[:, None] * w
        p_xt_y = self.p_x_xt.T @ w
        return {
            "w": w,
            "p_xt_y": p_xt_y,
            "h_y": _H(p_x_y.sum(axis=0)),
            "h_xy": _H(p_x_y),
            "h_xty": _H(p_xt_y),
        }

    @staticmethod
    def _obs_terms(tab, q, r, p_x_u=None) -> dict[str, float]:
        """Terms for one observation channel; decoder-only terms need ``p_x_u``."""
        p_xt_y = tab["p_xt_y"]
        p_u_y = q.T @ p_xt_y
        p_uvy = p_u_y[:, None, :] * r[:, :, None]
        p_vy = p_uvy.sum(axis=0)
        p_uv = p_uvy.sum(axis=2)
        h_v = _H(p_uv.sum(axis=0))
        h_uv, h_vy, h_uvy = _H(p_uv), _H(p_vy), _H(p_uvy)
        h_y = tab["h_y"]
        out = {
            "I_YU_given_V": _cmi(h_uv, h_vy, h_uvy, h_v),
            "I_YV": _cmi(h_y, h_v, h_vy, 0.0),
        }
        if p_x_u is None:
            return out
        h_xty = tab["h_xty"]
        h_uy = _H(p_u_y)
        p_xtuy = p_xt_y[:, None, :] * q[:, :, None]
        h_xtvy = _H(p_xt_y[:, None, :] * (q @ r)[:, :, None])
        h_xtuvy = _H(p_xtuy[:, :, None, :] * r[None, :, :, None])
        h_xuy = _H(p_x_u[:, :, None] * tab["w"][:, None, :])
        out["I_XtV_given_Y"] = _cmi(h_xty, h_vy, h_xtvy, h_y)
        out["I_XtU_given_VY"] = _cmi(h_xtvy, h_uvy, h_xtuvy, h_vy)
        out["I_XtU_given_Y"] = _cmi(h_xty, h_uy, _H(p_xtuy), h_y)
        out["I_XU_given_Y"] = _cmi(tab["h_xy"], h_uy, h_xuy, h_y)
        return out

    def _p_x_u(self, q):
        return self.p_x_xt @ q

    def inner_terms(self, q: np.ndarray, r: np.ndarray) -> dict[str, float]:
        p_x_u = self._p_x_u(q)
        ys = [self._obs_terms(tab, q, r, p_x_u) for tab in self.y_tables]
        zs = [self._obs_terms(tab, q, r) for tab in self.z_tables]
        h_x_xt_u = _H(self.p_x_xt[:, :, None] * q[None, :, :])
        return {
            "min_k_I_YU_given_V": min(d["I_YU_given_V"] for d in ys),
            "max_l_I_ZU_given_V": max(d["I_YU_given_V"] for d in zs),
            "max_k_I_XtU_given_VY": max(d["I_XtU_given_VY"] for d in ys),
            "max_k_I_XtV_given_Y": max(d["I_XtV_given_Y"] for d in ys),
            "I_XtU_given_X": _cmi(self.h_x_xt, _H(p_x_u), h_x_xt_u, self.h_x),
            "min_k_I_YV": min(d["I_YV"] for d in ys),
            "min_l_I_ZV": min(d["I_YV"] for d in zs),
        }

    def outer_terms(self, q: np.ndarray, r: np.ndarray, k: int, l: int) -> dict[str, float]:
        y = self._obs_terms(self.y_tables[k], q, r, self._p_x_u(q))
        z = self._obs_terms(self.z_tables[l], q, r)
        return {
            "I_YU_given_V": y["I_YU_given_V"],
            "I_ZU_given_V": z["I_YU_given_V"],
            "I_XtU_given_Y": y["I_XtU_given_Y"],
            "I_XU_given_Y": y["I_XU_given_Y"],
            "I_YV": y["I_YV"],
            "I_ZV": z["I_YV"],
        }
