"""Built-in Gaussian cases and the deterministic identity suite.

Every check draws from its own fixed-seed generator, so verdicts never
depend on the caller.  ``perturb`` names one check whose computed side is
nudged by a relative 1e-6; it exists so tests can confirm each check is
able to fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import gaussian as g
from .info import gaussian_scalar_mi

SIGMA_X2 = 5.0
FIG3_CASES = {
    "case1": g.CompoundGaussianModel(SIGMA_X2, [[0.95]], [[0.8]]),
    "case2": g.CompoundGaussianModel(SIGMA_X2, [[0.95, 0.95, 0.95]], [[0.8]]),
    "case3": g.CompoundGaussianModel(SIGMA_X2, [[0.95, 0.95, 0.95]], [[0.8, 0.8, 0.5, 0.5]]),
}
NUDGE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28} worst={self.worst:.3e} tol={self.tol:.0e}"


def random_degraded_model(rng: np.random.Generator, max_states: int = 3, max_dim: int = 4) -> g.CompoundGaussianModel:
    """Random compound model whose weakest decoder beats the strongest eavesdropper."""
    k, l = rng.integers(1, max_states + 1, size=2)
    dy, dz = rng.integers(1, max_dim + 1, size=2)
    ys = rng.normal(size=(k, dy))
    zs = rng.normal(size=(l, dz))
    weakest = min(float(h @ h) for h in ys)
    strongest = max(float(h @ h) for h in zs)
    zs *= np.sqrt(rng.uniform(0.05, 0.95) * weakest / strongest)
    return g.CompoundGaussianModel(float(rng.uniform(0.5, 10.0)), list(ys), list(zs))


def random_pd(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim))
    return a @ a.T + dim * 0.1 * np.eye(dim)


def _nudge(v, on: bool):
    return v * (1 + NUDGE) + NUDGE if on else v


def check_weinstein_aronszajn(on=False, count=1000) -> float:
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(count):
        h = rng.normal(size=rng.integers(1, 9))
        lhs, rhs = g.wa_identity_check(float(rng.uniform(0, 10)), h)
        worst = max(worst, abs(_nudge(lhs, on) - rhs) / abs(rhs))
    return worst


def check_scalarization(on=False, count=1000) -> float:
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(count):
        h = rng.normal(size=rng.integers(1, 9))
        s = float(rng.uniform(0.1, 10))
        vec = g.vector_gaussian_mi(s, h)
        worst = max(worst, abs(_nudge(vec, on) - gaussian_scalar_mi(s, g.power_gain(h))))
    return worst


def check_single_antenna(on=False, count=100) -> float:
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(count):
        h = float(rng.uniform(0.2, 2.0))
        ht = float(h * rng.uniform(0.0, 1.0))
        s = float(rng.uniform(0.5, 10))
        a = float(rng.uniform(1e-3, 1.0))
        m = g.CompoundGaussianModel(s, [[h]], [[ht]])
        gs, cs = g.single_antenna_region(s, h, ht, a)
        for mine, ref in ((gs, g.gs_rate_point(m, a)), (cs, g.cs_rate_point(m, a))):
            diff = np.subtract(mine.as_tuple(), ref.as_tuple())
            worst = max(worst, float(np.abs(_nudge(diff, on)).max()))
    return worst


def check_normalization(on=False, count=100) -> float:
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(count):
        # states of one side share an antenna count
        y_dims = [int(rng.integers(1, 4))] * int(rng.integers(1, 3))
        z_dims = [int(rng.integers(1, 4))] * int(rng.integers(1, 3))
        sigma = random_pd(rng, 1 + sum(y_dims) + sum(z_dims))
        m = g.normalize_covariance(g.FullCovariance(sigma), y_dims, z_dims)
        blocks = g._blocks(y_dims, 1) + g._blocks(z_dims, 1 + sum(y_dims))
        gains = list(m.decoder_gains) + list(m.eve_gains)
        for b, h in zip(blocks, gains):
            orig = g.gaussian_block_mi(sigma, b)
            worst = max(worst, abs(_nudge(g.vector_gaussian_mi(m.sigma_x2, h), on) - orig))
    return worst


def check_gs_cs_identities(on=False, count=1000) -> float:
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(count):
        m = random_degraded_model(rng)
        a = float(10 ** rng.uniform(-6, 0))
        gs, cs = g.gs_rate_point(m, a), g.cs_rate_point(m, a)
        d1 = cs.r_j - gs.r_j - _nudge(gs.r_s, on)
        d2 = cs.r_l - gs.r_l
        worst = max(worst, abs(d1), abs(d2))
    return worst


def check_alpha_round_trip(on=False, count=1000) -> float:
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(count):
        m = random_degraded_model(rng)
        a = float(10 ** rng.uniform(-6, 0))
        for kind in g.KINDS:
            r_j = g.rate_point(m, a, kind).r_j
            back = g.alpha_from_storage(m, r_j, kind)
            worst = max(worst, abs(_nudge(back, on) - a))
    return worst


def check_monotone_in_alpha(on=False, count=50) -> float:
    """Largest increase of any rate along increasing alpha grids."""
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(count):
        m = random_degraded_model(rng)
        for kind in g.KINDS:
            arr = g.trace_curve(m, kind, 100).as_array()[:, 1:]
            if on:
                arr[-1] = arr[-2] + NUDGE
            worst = max(worst, float(np.diff(arr, axis=0).max()))
    return worst


CHECKS: dict[str, tuple[Callable[..., float], float]] = {
    "weinstein_aronszajn": (check_weinstein_aronszajn, 1e-12),
    "scalarization": (check_scalarization, 1e-12),
    "single_antenna": (check_single_antenna, 1e-12),
    "normalization": (check_normalization, 1e-10),
    "gs_cs_identities": (check_gs_cs_identities, 1e-10),
    "alpha_round_trip": (check_alpha_round_trip, 1e-9),
    "monotone_in_alpha": (check_monotone_in_alpha, 0.0),
}


def run_selfcheck(perturb: str | None = None) -> list[CheckResult]:
    if perturb is not None and perturb not in CHECKS:
        raise KeyError(f"unknown check {perturb!r}; have {sorted(CHECKS)}")
    out = []
    for name, (fn, tol) in CHECKS.items():
        worst = fn(on=(name == perturb))
        out.append(CheckResult(name, bool(worst <= tol), float(worst), tol))
    return out
