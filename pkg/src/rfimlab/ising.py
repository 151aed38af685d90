"""RFIM Hamiltonian, exact ground states, exact small-region Gibbs sums,
the Γ-function, and Monte-Carlo magnetization / correlation length.

The Hamiltonian convention: H^±(σ) = −(Σ_{u∼v∈Ω} σ_u σ_v ± Σ_{u∈Ω, v∉Ω, u∼v} σ_u
+ Σ_{u∈Ω} εh_u σ_u), every unordered edge counted once.  Ground states come
from the standard binary-labeling min-cut reduction; spins are read off the
source side of the residual graph, so tie handling is deterministic.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import _kernels, rng
from .errors import DomainError, SizeCapError
from .field import DisorderField, box_sites, sample_field

GIBBS_SITE_CAP = 20

_BC_SIGNS = {"plus": 1, "minus": -1}


def bc_sign(bc):
    try:
        return _BC_SIGNS[bc]
    except KeyError:
        raise DomainError("boundary condition must be 'plus' or 'minus'") from None


@dataclass(frozen=True)
class Region:
    """A finite domain Ω together with a ± boundary condition."""

    omega: frozenset
    bc: str = "plus"

    def __post_init__(self):
        bc_sign(self.bc)
        object.__setattr__(self, "omega", frozenset(self.omega))


@dataclass
class SpinConfig:
    spins: dict
    energy: float


@dataclass
class GibbsSummary:
    beta: float
    free_energy_plus: float
    free_energy_minus: float
    site_magnetizations_plus: dict
    site_magnetizations_minus: dict


@dataclass
class MagnetizationEstimate:
    N: int
    epsilon: float
    beta: float
    samples: int
    m_hat: float
    std_error: float
    per_sample: list = dataclass_field(default_factory=list, repr=False)


class _Structure:
    """Cached geometry of a site set: order, interior edges, outside counts."""

    __slots__ = ("sites", "index", "pair_i", "pair_j", "k_out", "xs", "ys")

    def __init__(self, omega):
        self.sites = sorted(omega)
        self.index = {v: i for i, v in enumerate(self.sites)}
        pi, pj = [], []
        k_out = []
        for i, (x, y) in enumerate(self.sites):
            k = 0
            for w in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                j = self.index.get(w)
                if j is None:
                    k += 1
                elif w > (x, y):
                    pi.append(i)
                    pj.append(j)
            k_out.append(k)
        self.pair_i = np.array(pi, dtype=np.int64)
        self.pair_j = np.array(pj, dtype=np.int64)
        self.k_out = np.array(k_out, dtype=np.float64)
        self.xs = np.array([v[0] for v in self.sites], dtype=np.int64)
        self.ys = np.array([v[1] for v in self.sites], dtype=np.int64)


_structure_cache = {}


def _structure(omega):
    key = frozenset(omega)
    st = _structure_cache.get(key)
    if st is None:
        st = _Structure(key)
        if len(_structure_cache) > 32:
            _structure_cache.clear()
        _structure_cache[key] = st
    return st


def _check_in_box(st, fld):
    if len(st.xs) and (np.abs(st.xs).max() > fld.N or np.abs(st.ys).max() > fld.N):
        raise DomainError("region extends outside the field's box")


def _energy(st, spins, f_eff):
    pair = float(np.sum(spins[st.pair_i] * spins[st.pair_j])) if len(st.pair_i) else 0.0
    return -(pair + float(np.dot(f_eff, spins)))


def _effective_field(st, fld, sign):
    return fld.epsilon * fld.values_at(st.xs, st.ys) + sign * st.k_out


def hamiltonian(spins, region, fld):
    """H^{bc}(σ, Ω, εh) for spins given as a {site: ±1} mapping."""
    st = _structure(region.omega)
    if set(spins) != set(st.sites):
        raise DomainError("spin domain differs from the region")
    _check_in_box(st, fld)
    s = np.array([float(spins[v]) for v in st.sites])
    return _energy(st, s, _effective_field(st, fld, bc_sign(region.bc)))


def _ground_spins(st, f_eff):
    """Exact minimizer via max-flow; returns a ±1 float array over st.sites."""
    n = len(st.sites)
    s_node, t_node = n, n + 1
    # interior edges: one arc pair per unordered edge, capacity 2 both ways
    ne = len(st.pair_i)
    pos = f_eff > 0.0
    neg = f_eff < 0.0
    n_pos = int(np.sum(pos))
    n_neg = int(np.sum(neg))
    n_arcs = 2 * (ne + n_pos + n_neg)
    arc_to = np.empty(n_arcs, dtype=np.int32)
    arc_from = np.empty(n_arcs, dtype=np.int32)
    cap = np.empty(n_arcs, dtype=np.float64)
    arc_to[0:2 * ne:2] = st.pair_j
    arc_from[0:2 * ne:2] = st.pair_i
    arc_to[1:2 * ne:2] = st.pair_i
    arc_from[1:2 * ne:2] = st.pair_j
    cap[0:2 * ne] = 2.0
    base = 2 * ne
    idx_pos = np.nonzero(pos)[0].astype(np.int32)
    arc_to[base:base + 2 * n_pos:2] = idx_pos
    arc_from[base:base + 2 * n_pos:2] = s_node
    arc_to[base + 1:base + 2 * n_pos:2] = s_node
    arc_from[base + 1:base + 2 * n_pos:2] = idx_pos
    cap[base:base + 2 * n_pos:2] = 2.0 * f_eff[idx_pos]
    cap[base + 1:base + 2 * n_pos:2] = 0.0
    base += 2 * n_pos
    idx_neg = np.nonzero(neg)[0].astype(np.int32)
    arc_to[base:base + 2 * n_neg:2] = t_node
    arc_from[base:base + 2 * n_neg:2] = idx_neg
    arc_to[base + 1:base + 2 * n_neg:2] = idx_neg
    arc_from[base + 1:base + 2 * n_neg:2] = t_node
    cap[base:base + 2 * n_neg:2] = -2.0 * f_eff[idx_neg]
    cap[base + 1:base + 2 * n_neg:2] = 0.0

    order = np.argsort(arc_from, kind="stable").astype(np.int32)
    counts = np.bincount(arc_from, minlength=n + 2)
    adj_start = np.zeros(n + 3, dtype=np.int32)
    np.cumsum(counts, out=adj_start[1:n + 3])
    side = np.zeros(n + 2, dtype=np.uint8)
    _kernels.max_flow_side(adj_start, order, arc_to, arc_from, cap,
                           s_node, t_node, side)
    return np.where(side[:n] == 1, 1.0, -1.0)


def ground_state(region, fld):
    """Exact H^{bc} minimizer on the region (unique a.s. for generic fields)."""
    st = _structure(region.omega)
    if not st.sites:
        raise DomainError("region must be nonempty")
    _check_in_box(st, fld)
    f_eff = _effective_field(st, fld, bc_sign(region.bc))
    s = _ground_spins(st, f_eff)
    spins = {v: int(s[i]) for i, v in enumerate(st.sites)}
    return SpinConfig(spins, _energy(st, s, f_eff))


def _spin_matrix(n):
    configs = np.arange(1 << n, dtype=np.int64)
    return ((configs[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int8) * 2 - 1


def _gibbs_energies(st, fld):
    """E^+(σ), E^-(σ) over all 2^n configurations, plus the spin matrix."""
    n = len(st.sites)
    S = _spin_matrix(n)
    pair = np.zeros(len(S), dtype=np.float64)
    for i, j in zip(st.pair_i, st.pair_j):
        pair += S[:, i] * S[:, j]
    h = fld.epsilon * fld.values_at(st.xs, st.ys)
    e_field = np.zeros(len(S), dtype=np.float64)
    e_k = np.zeros(len(S), dtype=np.float64)
    for i in range(n):
        col = S[:, i].astype(np.float64)
        e_field += h[i] * col
        e_k += st.k_out[i] * col
    return -(pair + e_field + e_k), -(pair + e_field - e_k), S


def _free_energy_and_mags(E, S, beta):
    if math.isinf(beta):
        k = int(np.argmin(E))
        return float(E[k]), S[k].astype(np.float64)
    a = -beta * E
    amax = float(np.max(a))
    w = np.exp(a - amax)
    Z = float(np.sum(w))
    F = -(amax + math.log(Z)) / beta
    mags = (w @ S.astype(np.float64)) / Z
    return F, mags


def gibbs_exact(beta, region, fld):
    """Exact free energies and site magnetizations under both boundaries.

    Full 2^|Ω| enumeration with log-sum-exp; capped at 20 sites.  The region's
    own bc tag is irrelevant here since both ± summaries are returned.
    """
    st = _structure(region.omega if isinstance(region, Region) else region)
    if len(st.sites) > GIBBS_SITE_CAP:
        raise SizeCapError("gibbs_exact is capped at %d sites" % GIBBS_SITE_CAP)
    _check_in_box(st, fld)
    if not st.sites:
        return GibbsSummary(beta, 0.0, 0.0, {}, {})
    E_plus, E_minus, S = _gibbs_energies(st, fld)
    Fp, mp = _free_energy_and_mags(E_plus, S, beta)
    Fm, mm = _free_energy_and_mags(E_minus, S, beta)
    return GibbsSummary(
        beta, Fp, Fm,
        {v: float(mp[i]) for i, v in enumerate(st.sites)},
        {v: float(mm[i]) for i, v in enumerate(st.sites)},
    )


def delta_free_energy(beta, B, fld):
    """ΔF(B) = F⁺(B) − F⁻(B); ground-energy difference at β = ∞."""
    B = frozenset(B)
    if not B:
        return 0.0
    if math.isinf(beta):
        ep = ground_state(Region(B, "plus"), fld).energy
        em = ground_state(Region(B, "minus"), fld).energy
        return ep - em
    g = gibbs_exact(beta, Region(B), fld)
    return g.free_energy_plus - g.free_energy_minus


def gamma(A, omega, fld, beta):
    """Γ(A, Ω, f) = ΔF(Ω∖A, f)."""
    A = frozenset(A)
    omega = frozenset(omega)
    if not A <= omega:
        raise DomainError("gamma requires A ⊆ Ω")
    return delta_free_energy(beta, omega - A, fld)


def gamma_increment(A, B, omega, fld, beta):
    """G(A, B, Ω, f) = Γ(A∪B, Ω, f) − Γ(A, Ω, f)."""
    A = frozenset(A)
    B = frozenset(B)
    if A & B:
        raise DomainError("gamma_increment requires disjoint A, B")
    return gamma(A | B, omega, fld, beta) - gamma(A, omega, fld, beta)


def magnetization_sample(N, epsilon, beta, field_seed):
    """Origin magnetizations (m_plus, m_minus) for one disorder draw."""
    fld = sample_field(N, field_seed, epsilon)
    origin = (0, 0)
    if math.isinf(beta):
        st = _structure(frozenset(box_sites(N)))
        i0 = st.index[origin]
        sp = _ground_spins(st, _effective_field(st, fld, 1))
        sm = _ground_spins(st, _effective_field(st, fld, -1))
        m_plus, m_minus = float(sp[i0]), float(sm[i0])
    else:
        g = gibbs_exact(beta, Region(frozenset(box_sites(N))), fld)
        m_plus = g.site_magnetizations_plus[origin]
        m_minus = g.site_magnetizations_minus[origin]
    m = 0.5 * (m_plus - m_minus)
    if not (-1e-9 <= m <= 1.0 + 1e-9):
        raise AssertionError("per-sample magnetization %.17g outside [0,1]" % m)
    return m_plus, m_minus


def _mag_one_sample(N, epsilon, beta, master_seed, k):
    m_plus, m_minus = magnetization_sample(
        N, epsilon, beta, rng.derive_seed(master_seed, k))
    return k, m_plus, m_minus


def _mag_chunk(args):
    N, epsilon, beta, master_seed, ks = args
    return [_mag_one_sample(N, epsilon, beta, master_seed, k) for k in ks]


def magnetization_mc(N, epsilon, beta, samples, master_seed, workers=None):
    """Monte-Carlo m̂ over per-sample fields keyed on (master_seed, k).

    Sample k uses seed ``derive_seed(master_seed, k)``; results are reduced
    in sample order, so any worker count yields identical output.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    if not math.isinf(beta) and (2 * N + 1) ** 2 > GIBBS_SITE_CAP:
        raise SizeCapError("finite-beta magnetization needs |Λ_N| <= %d"
                           % GIBBS_SITE_CAP)
    ks = list(range(samples))
    if workers and workers > 1 and samples > 1:
        chunks = [ks[c::workers] for c in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = pool.map(_mag_chunk,
                             [(N, epsilon, beta, master_seed, c) for c in chunks])
            rows = [r for part in parts for r in part]
        rows.sort(key=lambda r: r[0])
    else:
        rows = [_mag_one_sample(N, epsilon, beta, master_seed, k) for k in ks]
    ms = np.array([0.5 * (mp - mm) for _, mp, mm in rows])
    m_hat = float(np.mean(ms))
    if samples > 1:
        stderr = float(math.sqrt(np.var(ms, ddof=1) / samples))
    else:
        stderr = 0.0
    return MagnetizationEstimate(N, epsilon, beta, samples, m_hat, stderr,
                                 per_sample=rows)


def correlation_length(beta, m_target, epsilon, samples, N_max, master_seed,
                       workers=None):
    """ψ search: smallest tested N whose CI upper bound clears m_target.

    Doubles N from 1 until the estimate passes (m̂ + 2·stderr ≤ m_target),
    then bisects down to the smallest passing integer among tested values.
    Returns ``(psi, trace)`` with trace entries ``(N, m_hat, std_error)``;
    psi is the string "exceeded" if no N ≤ N_max passes.
    """
    if not 0.0 < m_target < 1.0:
        raise DomainError("m_target must lie in (0, 1)")
    trace = []

    def measure(N):
        est = magnetization_mc(N, epsilon, beta, samples, master_seed, workers)
        trace.append((N, est.m_hat, est.std_error))
        return est.m_hat + 2.0 * est.std_error <= m_target

    lo = None  # largest failing N seen
    N = 1
    hi = None
    while N <= N_max:
        if measure(N):
            hi = N
            break
        lo = N
        N *= 2
    if hi is None:
        if lo is not None and lo < N_max:
            if measure(N_max):
                hi = N_max
        if hi is None:
            return "exceeded", trace
    if lo is None:
        return hi, trace
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if measure(mid):
            hi = mid
        else:
            lo = mid
    return hi, trace
