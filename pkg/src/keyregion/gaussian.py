"""Closed-form key/storage/leakage regions for compound Gaussian channels.

The source is ``X ~ N(0, sigma_x2)``; decoder state ``k`` observes
``Y_k = H_k X + N`` and eavesdropper state ``l`` observes
``Z_l = Ht_l X + N`` with white unit-variance noise.  Every rate depends on
the gain vectors only through their power gains ``H^T H``, and the region is
traced by a single parameter ``alpha`` in (0, 1] (the fraction of source
variance not captured by the auxiliary variable).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

Kind = Literal["gs", "cs"]
KINDS = ("gs", "cs")

ALPHA_MIN = 1e-6
BISECT_TOL = 1e-9


class ModelError(ValueError):
    pass


class NonDegradedError(ValueError):
    """Worst decoder power gain is below the best eavesdropper power gain."""


@dataclass(frozen=True)
class RateTriple:
    r_s: float
    r_j: float
    r_l: float

    def __post_init__(self):
        for name in ("r_s", "r_j", "r_l"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"{name} must be non-negative, got {v}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r_s, self.r_j, self.r_l)


def _gain_list(gains, what: str) -> tuple[np.ndarray, ...]:
    out = []
    for g in gains:
        a = np.atleast_1d(np.asarray(g, dtype=float))
        if a.ndim != 1 or a.size == 0:
            raise ModelError(f"{what} gain vectors must be non-empty 1-d")
        a.setflags(write=False)
        out.append(a)
    if not out:
        raise ModelError(f"need at least one {what} state")
    if len({a.size for a in out}) != 1:
        raise ModelError(f"{what} gain vectors must share one dimension")
    return tuple(out)


@dataclass(frozen=True)
class CompoundGaussianModel:
    sigma_x2: float
    decoder_gains: tuple[np.ndarray, ...]
    eve_gains: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (np.isfinite(self.sigma_x2) and self.sigma_x2 > 0):
            raise ModelError(f"sigma_x2 must be positive, got {self.sigma_x2}")
        object.__setattr__(self, "sigma_x2", float(self.sigma_x2))
        object.__setattr__(self, "decoder_gains", _gain_list(self.decoder_gains, "decoder"))
        object.__setattr__(self, "eve_gains", _gain_list(self.eve_gains, "eavesdropper"))

    @property
    def omega_y(self) -> int:
        return self.decoder_gains[0].size

    @property
    def omega_z(self) -> int:
        return self.eve_gains[0].size

    @classmethod
    def from_dict(cls, d: dict) -> "CompoundGaussianModel":
        missing = [k for k in ("sigma_x2", "decoder_gains", "eve_gains") if k not in d]
        if missing:
            raise ModelError(f"model is missing field(s): {', '.join(missing)}")
        try:
            return cls(float(d["sigma_x2"]), d["decoder_gains"], d["eve_gains"])
        except (TypeError, ValueError) as e:
            raise ModelError(str(e)) from e

    def to_dict(self) -> dict:
        return {
            "sigma_x2": self.sigma_x2,
            "decoder_gains": [g.tolist() for g in self.decoder_gains],
            "eve_gains": [g.tolist() for g in self.eve_gains],
        }

    @classmethod
    def load(cls, path) -> "CompoundGaussianModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def power_gain(h) -> float:
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if h.size == 0:
        raise ValueError("empty gain vector")
    return float(h @ h)


def saddle_indices(m: CompoundGaussianModel) -> tuple[int, int]:
    """(worst decoder state, best eavesdropper state); ties go to the lowest index."""
    ny = [power_gain(h) for h in m.decoder_gains]
    nz = [power_gain(h) for h in m.eve_gains]
    return int(np.argmin(ny)), int(np.argmax(nz))


def saddle_gains(m: CompoundGaussianModel) -> tuple[float, float]:
    k, l = saddle_indices(m)
    return power_gain(m.decoder_gains[k]), power_gain(m.eve_gains[l])


def degradedness_check(m: CompoundGaussianModel) -> bool:
    nu_y, nu_z = saddle_gains(m)
    return nu_y >= nu_z


def _check_alpha(alpha: float):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def _snrs(m: CompoundGaussianModel) -> tuple[float, float]:
    if not degradedness_check(m):
        raise NonDegradedError(
            "worst decoder power gain is below the best eavesdropper gain; "
            "only R_S = 0 is achievable"
        )
    nu_y, nu_z = saddle_gains(m)
    return m.sigma_x2 * nu_y, m.sigma_x2 * nu_z


# Rate expressions in terms of the decoder/eve SNRs s_y = sigma^2 nu_y, s_z = sigma^2 nu_z.

def _key_rate(s_y, s_z, alpha):
    return 0.5 * np.log2(((s_y + 1) * (alpha * s_z + 1)) / ((alpha * s_y + 1) * (s_z + 1)))


def _helper_rate(s, alpha):
    # shared shape of the GS storage, CS storage (with s = s_z) and leakage bounds
    return 0.5 * np.log2((alpha * s + 1) / (alpha * (s + 1)))


def _nonneg(v) -> float:
    # rounding can push an exact zero to -1e-17
    return max(float(v), 0.0)


def gs_rate_point(m: CompoundGaussianModel, alpha: float) -> RateTriple:
    _check_alpha(alpha)
    s_y, s_z = _snrs(m)
    r_j = _nonneg(_helper_rate(s_y, alpha))
    return RateTriple(_nonneg(_key_rate(s_y, s_z, alpha)), r_j, r_j)


def cs_rate_point(m: CompoundGaussianModel, alpha: float) -> RateTriple:
    _check_alpha(alpha)
    s_y, s_z = _snrs(m)
    return RateTriple(
        _nonneg(_key_rate(s_y, s_z, alpha)),
        _nonneg(_helper_rate(s_z, alpha)),
        _nonneg(_helper_rate(s_y, alpha)),
    )


def rate_point(m: CompoundGaussianModel, alpha: float, kind: Kind = "gs") -> RateTriple:
    if kind == "gs":
        return gs_rate_point(m, alpha)
    if kind == "cs":
        return cs_rate_point(m, alpha)
    raise ValueError(f"kind must be 'gs' or 'cs', got {kind!r}")


def alpha_from_storage(m: CompoundGaussianModel, r_j: float, kind: Kind = "gs") -> float:
    """Invert the storage bound: the alpha whose boundary point stores ``r_j`` bits.

    For CS the storage bound has the same form with the eavesdropper SNR.
    """
    if r_j < 0:
        raise ValueError(f"storage rate must be non-negative, got {r_j}")
    s_y, s_z = _snrs(m)
    s = s_y if kind == "gs" else s_z
    t = 2.0 ** (2.0 * r_j)
    return 1.0 / (t + (t - 1.0) * s)


def key_rate_vs_storage(m: CompoundGaussianModel, r_j: float, kind: Kind = "gs") -> float:
    """Largest key rate achievable with ``r_j`` bits of helper data per symbol."""
    if r_j < 0:
        raise ValueError(f"storage rate must be non-negative, got {r_j}")
    s_y, s_z = _snrs(m)
    if kind == "cs":
        return float(_key_rate(s_y, s_z, alpha_from_storage(m, r_j, "cs")))
    t = 2.0 ** (-2.0 * r_j)
    return 0.5 * float(np.log2((s_y * (1 - t) + s_z * t + 1) / (s_z + 1)))


def asymptotic_key_rate(m: CompoundGaussianModel) -> float:
    s_y, s_z = _snrs(m)
    return 0.5 * float(np.log2((s_y + 1) / (s_z + 1)))


def _first_below(f, target: float, tol: float = BISECT_TOL) -> float:
    """Smallest alpha in (0, 1] with f(alpha) <= target, for f decreasing in alpha."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def _last_above(f, target: float, tol: float = BISECT_TOL) -> float:
    """Largest alpha in (0, 1] with f(alpha) >= target, for f decreasing in alpha."""
    if f(1.0) >= target:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def membership(m: CompoundGaussianModel, t: RateTriple, kind: Kind = "gs") -> bool:
    """Whether ``t`` lies in the region (union over alpha) for ``kind``.

    All three boundary rates decrease in alpha, so the key constraint holds on
    (0, a_key] and the storage/leakage constraints on [a_j, 1] and [a_l, 1].
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be 'gs' or 'cs', got {kind!r}")
    if not degradedness_check(m):
        return t.r_s <= 0.0
    if t.r_s <= 0.0:
        return True
    if t.r_s >= asymptotic_key_rate(m):
        return False
    s_y, s_z = _snrs(m)
    s_j = s_y if kind == "gs" else s_z
    a_key = _last_above(lambda a: _key_rate(s_y, s_z, a), t.r_s)
    a_j = _first_below(lambda a: _helper_rate(s_j, a), t.r_j)
    a_l = _first_below(lambda a: _helper_rate(s_y, a), t.r_l)
    return max(a_j, a_l) <= a_key + 2 * BISECT_TOL


@dataclass(frozen=True)
class AlphaCurve:
    kind: str
    alphas: np.ndarray
    triples: tuple[RateTriple, ...] = field(repr=False)

    @property
    def samples(self) -> list[tuple[float, RateTriple]]:
        return list(zip(self.alphas.tolist(), self.triples))

    def as_array(self) -> np.ndarray:
        """Columns alpha, r_s, r_j, r_l."""
        return np.column_stack([self.alphas, np.array([t.as_tuple() for t in self.triples])])

    def to_csv(self) -> str:
        lines = ["alpha,r_s,r_j,r_l"]
        for row in self.as_array():
            lines.append(",".join(f"{v:.6g}" for v in row))
        return "\n".join(lines) + "\n"


def alpha_grid(n_points: int = 200, alpha_min: float = ALPHA_MIN) -> np.ndarray:
    if n_points < 2:
        raise ValueError("need at least 2 curve points")
    a = np.logspace(np.log10(alpha_min), 0.0, n_points)
    a[-1] = 1.0
    return a


def trace_curve(m: CompoundGaussianModel, kind: Kind = "gs", n_points: int = 200) -> AlphaCurve:
    alphas = alpha_grid(n_points)
    triples = tuple(rate_point(m, float(a), kind) for a in alphas)
    return AlphaCurve(kind, alphas, triples)


# --- covariance normalization and the vector/scalar identities ---


@dataclass(frozen=True)
class FullCovariance:
    """Covariance over (X, Y_1..Y_K, Z_1..Z_L) stacked in that order."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ModelError("covariance must be square")
        if not np.allclose(s, s.T, atol=1e-12 * max(1.0, np.abs(s).max())):
            raise ModelError("covariance must be symmetric")
        try:
            np.linalg.cholesky(s)
        except np.linalg.LinAlgError:
            raise ModelError("covariance is not positive definite") from None
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)


def _blocks(dims: Sequence[int], start: int) -> list[slice]:
    out = []
    for d in dims:
        out.append(slice(start, start + d))
        start += d
    return out


def normalize_covariance(c: FullCovariance, y_dims: Sequence[int], z_dims: Sequence[int]) -> CompoundGaussianModel:
    """Whiten each observation's noise so that it reads ``A X + N(0, I)``.

    Per block, the noise covariance is the Schur complement
    ``S_Y - S_YX S_XY / sigma_x2``; with its Cholesky factor ``C`` the
    equivalent gain is ``C^-1 S_YX / sigma_x2``.
    """
    s = c.sigma
    if 1 + sum(y_dims) + sum(z_dims) != s.shape[0]:
        raise ModelError(f"block dims {list(y_dims)} + {list(z_dims)} do not cover a {s.shape[0]}x{s.shape[0]} covariance")
    sx2 = s[0, 0]

    def gain(b: slice) -> np.ndarray:
        cross = s[b, 0]
        noise = s[b, b] - np.outer(cross, cross) / sx2
        chol = np.linalg.cholesky(noise)
        return np.linalg.solve(chol, cross / sx2)

    ys = _blocks(y_dims, 1)
    zs = _blocks(z_dims, 1 + sum(y_dims))
    return CompoundGaussianModel(sx2, [gain(b) for b in ys], [gain(b) for b in zs])


def induced_covariance(m: CompoundGaussianModel) -> np.ndarray:
    """Covariance of (X, Y_1..Y_K, Z_1..Z_L) implied by a normalized model."""
    g = np.concatenate([np.array([1.0])] + list(m.decoder_gains) + list(m.eve_gains))
    sigma = m.sigma_x2 * np.outer(g, g)
    sigma[1:, 1:] += np.eye(g.size - 1)
    return sigma


def gaussian_block_mi(sigma: np.ndarray, block: slice) -> float:
    """I(X; block) in bits for jointly Gaussian (X, ...) from determinants."""
    idx = np.r_[0, np.arange(block.start, block.stop)]
    sub = sigma[np.ix_(idx, idx)]
    _, ld_joint = np.linalg.slogdet(sub)
    _, ld_y = np.linalg.slogdet(sigma[block, block])
    return 0.5 * (np.log(sigma[0, 0]) + ld_y - ld_joint) / np.log(2)


def vector_gaussian_mi(sigma_x2: float, h) -> float:
    """I(X; h X + N(0, I)) from the observation covariance determinant."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    _, ld = np.linalg.slogdet(sigma_x2 * np.outer(h, h) + np.eye(h.size))
    return 0.5 * ld / np.log(2)


def scalarize(m: CompoundGaussianModel) -> tuple[list[float], list[float]]:
    """Per-state power gains of the scalar sufficient statistics."""
    return [power_gain(h) for h in m.decoder_gains], [power_gain(h) for h in m.eve_gains]


def wa_identity_check(a: float, h) -> tuple[float, float]:
    """Both sides of det(a h h^T + I) = a h^T h + 1."""
    h = np.atleast_1d(np.asarray(h, dtype=float))
    lhs = float(np.linalg.det(a * np.outer(h, h) + np.eye(h.size)))
    rhs = a * float(h @ h) + 1.0
    return lhs, rhs


def single_antenna_region(sigma_x2: float, h: float, h_tilde: float, alpha: float) -> tuple[RateTriple, RateTriple]:
    """(GS, CS) boundary triples written with correlation coefficients."""
    _check_alpha(alpha)
    if h * h < h_tilde * h_tilde:
        raise NonDegradedError("eavesdropper gain exceeds decoder gain")
    if alpha == 1.0:
        return RateTriple(0.0, 0.0, 0.0), RateTriple(0.0, 0.0, 0.0)
    rho_y = sigma_x2 * h * h / (sigma_x2 * h * h + 1)
    rho_z = sigma_x2 * h_tilde * h_tilde / (sigma_x2 * h_tilde * h_tilde + 1)
    r_s = 0.5 * np.log2((alpha * rho_z + 1 - rho_z) / (alpha * rho_y + 1 - rho_y))
    r_y = 0.5 * np.log2((alpha * rho_y + 1 - rho_y) / alpha)
    r_z = 0.5 * np.log2((alpha * rho_z + 1 - rho_z) / alpha)
    r_s, r_y, r_z = (max(float(v), 0.0) for v in (r_s, r_y, r_z))
    return RateTriple(r_s, r_y, r_y), RateTriple(r_s, r_z, r_y)
