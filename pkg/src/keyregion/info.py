"""Exact information measures on finite distributions.

Everything here works on dense numpy tables and returns values in bits.
Joint distributions carry named axes so that callers can ask for
``I(A;B|C)`` by variable name instead of by axis position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SUM_TOL = 1e-12
CLAMP_TOL = 1e-10
MAX_JOINT_CELLS = 10**8


class DistributionError(ValueError):
    pass


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteDist:
    probs: np.ndarray

    def __post_init__(self):
        p = _freeze(self.probs)
        if p.ndim != 1 or p.size == 0:
            raise DistributionError("FiniteDist needs a non-empty 1-d vector")
        if np.any(p < 0):
            raise DistributionError("negative probability mass")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DistributionError(f"masses sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class CondDist:
    """Row-stochastic matrix: ``rows[i, j] = P(out=j | in=i)``."""

    rows: np.ndarray

    def __post_init__(self):
        r = _freeze(self.rows)
        if r.ndim != 2 or 0 in r.shape:
            raise DistributionError("CondDist needs a non-empty 2-d matrix")
        if np.any(r < 0):
            raise DistributionError("negative probability mass")
        bad = np.abs(r.sum(axis=1) - 1.0) > SUM_TOL
        if np.any(bad):
            raise DistributionError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "rows", r)

    @property
    def n_in(self) -> int:
        return self.rows.shape[0]

    @property
    def n_out(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def identity(cls, n: int) -> "CondDist":
        return cls(np.eye(n))

    @classmethod
    def constant(cls, n_in: int, n_out: int = 1) -> "CondDist":
        """Output independent of input (uniform over ``n_out`` symbols)."""
        return cls(np.full((n_in, n_out), 1.0 / n_out))

    @classmethod
    def bsc(cls, p: float) -> "CondDist":
        return cls(np.array([[1 - p, p], [p, 1 - p]]))


@dataclass(frozen=True)
class JointDist:
    table: np.ndarray
    axes: tuple[str, ...]

    def __post_init__(self):
        t = _freeze(self.table)
        axes = tuple(self.axes)
        if t.ndim != len(axes):
            raise DistributionError(f"{t.ndim}-d table but {len(axes)} axis labels")
        if len(set(axes)) != len(axes):
            raise DistributionError(f"duplicate axis labels in {axes}")
        if t.size > MAX_JOINT_CELLS:
            raise DistributionError(f"joint has {t.size} cells, cap is {MAX_JOINT_CELLS}")
        if np.any(t < 0):
            raise DistributionError("negative probability mass")
        if abs(t.sum() - 1.0) > SUM_TOL:
            raise DistributionError(f"joint sums to {t.sum()!r}, not 1")
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "axes", axes)

    def _index(self, names: Sequence[str]) -> tuple[int, ...]:
        try:
            return tuple(self.axes.index(a) for a in names)
        except ValueError:
            unknown = [a for a in names if a not in self.axes]
            raise KeyError(f"unknown axes {unknown}; have {self.axes}") from None

    def marginal(self, names: Sequence[str]) -> np.ndarray:
        """Marginal table over ``names``, axes in the order given."""
        keep = self._index(names)
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        m = self.table.sum(axis=drop)
        # after summing, remaining axes are in original order
        order = sorted(keep)
        return np.transpose(m, [order.index(i) for i in keep])

    def entropy(self, names: Sequence[str]) -> float:
        if not names:
            return 0.0
        return _h(self.marginal(names))


def _h(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _clamp(v: float) -> float:
    if -CLAMP_TOL <= v < 0:
        return 0.0
    return v


def entropy(d: FiniteDist) -> float:
    if not isinstance(d, FiniteDist):
        d = FiniteDist(d)
    return _h(d.probs)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise DistributionError(f"binary entropy needs p in [0,1], got {p}")
    return _h(np.array([p, 1.0 - p]))


def _axis_sets(j: JointDist, *groups) -> list[tuple[str, ...]]:
    out = []
    for g in groups:
        g = (g,) if isinstance(g, str) else tuple(g)
        j._index(g)
        out.append(g)
    seen: set[str] = set()
    for g in out:
        if seen & set(g):
            raise ValueError(f"axis sets overlap: {out}")
        seen |= set(g)
    return out


def mutual_information(j: JointDist, axes_a, axes_b) -> float:
    a, b = _axis_sets(j, axes_a, axes_b)
    return _clamp(j.entropy(a) + j.entropy(b) - j.entropy(a + b))


def conditional_mutual_information(j: JointDist, axes_a, axes_b, axes_c) -> float:
    a, b, c = _axis_sets(j, axes_a, axes_b, axes_c)
    if not c:
        return mutual_information(j, a, b)
    v = j.entropy(a + c) + j.entropy(b + c) - j.entropy(a + b + c) - j.entropy(c)
    return _clamp(v)


CHAIN_AXES = ("V", "U", "Xt", "X", "Y", "Z")


def compose_chain(
    p_x: FiniteDist,
    xt_given_x: CondDist,
    u_given_xt: CondDist,
    v_given_u: CondDist,
    yz_given_x,
) -> JointDist:
    """Joint over (V, U, Xt, X, Y, Z) for the chain V - U - Xt - X - (Y, Z).

    ``yz_given_x`` is a 3-d array indexed ``[x, y, z]``; see
    :func:`product_channel` to build it from separate Y and Z channels.
    """
    px = p_x.probs
    yz = np.asarray(yz_given_x, dtype=float)
    if yz.ndim != 3:
        raise DistributionError("yz_given_x must be indexed [x, y, z]")
    nx = px.size
    if xt_given_x.n_in != nx or yz.shape[0] != nx:
        raise DistributionError("channel input size does not match |X|")
    if u_given_xt.n_in != xt_given_x.n_out:
        raise DistributionError("P(U|Xt) input size does not match |Xt|")
    if v_given_u.n_in != u_given_xt.n_out:
        raise DistributionError("P(V|U) input size does not match |U|")
    if not np.allclose(yz.sum(axis=(1, 2)), 1.0, atol=SUM_TOL, rtol=0):
        raise DistributionError("P(Y,Z|X) rows do not sum to 1")
    shape = (v_given_u.n_out, u_given_xt.n_out, xt_given_x.n_out, nx) + yz.shape[1:]
    if int(np.prod(shape)) > MAX_JOINT_CELLS:
        raise DistributionError(f"joint shape {shape} exceeds {MAX_JOINT_CELLS} cells")
    table = np.einsum(
        "uv,tu,xt,x,xyz->vutxyz",
        v_given_u.rows,
        u_given_xt.rows,
        xt_given_x.rows,
        px,
        yz,
        optimize=True,
    )
    return JointDist(table, CHAIN_AXES)


def product_channel(y_given_x: CondDist, z_given_x: CondDist) -> np.ndarray:
    """P(Y,Z|X) with Y and Z conditionally independent given X."""
    if y_given_x.n_in != z_given_x.n_in:
        raise DistributionError("Y and Z channels disagree on |X|")
    return np.einsum("xy,xz->xyz", y_given_x.rows, z_given_x.rows)


def gaussian_scalar_mi(sigma_x2: float, nu: float) -> float:
    """I(X; nu X + N), N ~ N(0, nu): one half log2(sigma_x2 * nu + 1)."""
    if sigma_x2 < 0 or nu < 0:
        raise ValueError("variance and power gain must be non-negative")
    return 0.5 * float(np.log2(sigma_x2 * nu + 1.0))
