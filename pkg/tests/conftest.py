import itertools

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from keyregion.discrete import DiscreteCompoundModel, TestChannelPair
from keyregion.info import CondDist

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_rows(rng, n_in, n_out, conc=1.0):
    return rng.dirichlet(np.full(n_out, conc), size=n_in)


def random_model(rng, nx=2, nxt=2, ny=2, nz=2, K=1, L=1):
    return DiscreteCompoundModel(
        rng.dirichlet(np.full(nx, 2.0)),
        random_rows(rng, nx, nxt),
        [random_rows(rng, nx, ny) for _ in range(K)],
        [random_rows(rng, nx, nz) for _ in range(L)],
    )


def random_channels(rng, nxt=2, nu=2, nv=2):
    return TestChannelPair(random_rows(rng, nxt, nu), random_rows(rng, nu, nv))


def bsc_model(p_y=0.1, p_z=0.3):
    return DiscreteCompoundModel([0.5, 0.5], CondDist.identity(2), [CondDist.bsc(p_y)], [CondDist.bsc(p_z)])


def brute_cmi(p, a, b, c=()):
    """I(A;B|C) by the defining sum over every cell of a named-axis table."""
    axes = {name: i for i, name in enumerate(p["axes"])}
    t = p["table"]

    def marg(names):
        keep = sorted(axes[n] for n in names)
        drop = tuple(i for i in range(t.ndim) if i not in keep)
        return t.sum(axis=drop, keepdims=True)

    pabc = marg(a + b + c)
    pac, pbc, pc = marg(a + c), marg(b + c), marg(c) if c else np.ones([1] * t.ndim)
    total = 0.0
    for idx in itertools.product(*[range(s) for s in t.shape]):
        if t[idx] == 0:
            continue

        def at(m):
            return m[tuple(0 if m.shape[i] == 1 else idx[i] for i in range(t.ndim))]

        total += t[idx] * np.log2(at(pabc) * at(pc) / (at(pac) * at(pbc)))
    return total


def explicit_joint(m, t, k, l):
    """P(X, Xt, U, V, Y, Z) filled in cell by cell."""
    px, e = m.p_x.probs, m.enrollment.rows
    q, r = t.u_given_xt.rows, t.v_given_u.rows
    y, z = m.decoder_states[k].rows, m.eve_states[l].rows
    shape = (len(px), e.shape[1], q.shape[1], r.shape[1], y.shape[1], z.shape[1])
    p = np.zeros(shape)
    for x, xt, u, v, b, c in itertools.product(*map(range, shape)):
        p[x, xt, u, v, b, c] = px[x] * e[x, xt] * q[xt, u] * r[u, v] * y[x, b] * z[x, c]
    return {"table": p, "axes": ("X", "Xt", "U", "V", "Y", "Z")}


def brute_terms(m, t):
    """Inner-bound terms from explicit joints of every state pair."""
    per = {(k, l): explicit_joint(m, t, k, l) for k in range(m.K) for l in range(m.L)}
    ks, ls = range(m.K), range(m.L)
    return {
        "min_k_I_YU_given_V": min(brute_cmi(per[k, 0], ("Y",), ("U",), ("V",)) for k in ks),
        "max_l_I_ZU_given_V": max(brute_cmi(per[0, l], ("Z",), ("U",), ("V",)) for l in ls),
        "max_k_I_XtU_given_VY": max(brute_cmi(per[k, 0], ("Xt",), ("U",), ("V", "Y")) for k in ks),
        "max_k_I_XtV_given_Y": max(brute_cmi(per[k, 0], ("Xt",), ("V",), ("Y",)) for k in ks),
        "I_XtU_given_X": brute_cmi(per[0, 0], ("Xt",), ("U",), ("X",)),
        "min_k_I_YV": min(brute_cmi(per[k, 0], ("Y",), ("V",)) for k in ks),
        "min_l_I_ZV": min(brute_cmi(per[0, l], ("Z",), ("V",)) for l in ls),
    }


@st.composite
def distributions(draw, min_size=1, max_size=6):
    n = draw(st.integers(min_size, max_size))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3))
    p = np.array(w) / sum(w)
    return p


@st.composite
def seeds(draw):
    return draw(st.integers(0, 2**31 - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
