"""Discrete Hölder norms with respect to the singular metric ``mu``.

The norm of ``U`` adds, for each weighted derivative ``x_n U_nn``,
``sqrt(x_n) U_ni``, ``U_ij`` (tangential), ``U_i``, ``U_t`` and ``U``, its sup
and its ``mu``-Hölder quotient.  Both are estimated on random point pairs:
half drawn independently over the domain, half inside small ``mu``-balls.
Pairs come in fixed-size blocks, each seeded from ``(seed, block)``, so a
larger pair count always extends the smaller sample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..grids import RadialProfile
from ..params import FlowParams
from ..transforms.hodograph import pressure_interface_radius
from ..transforms.pressure import pressure_speed, to_pressure
from .metric import mu_distance_arrays

PAIRS_DEFAULT = 100_000
ALPHA_DEFAULT = 0.25
BLOCK = 1024


@dataclass
class Box:
    """Sampling domain ``[xp_lo, xp_hi]^(n-1) x [xn_lo, xn_hi] x [t_lo, t_hi]``."""

    xp_lo: float
    xp_hi: float
    xn_lo: float
    xn_hi: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if self.xn_lo < 0 or self.xn_hi < self.xn_lo or self.xp_hi < self.xp_lo or self.t_hi < self.t_lo:
            raise ValueError("malformed sampling box")


def jet_terms(jet: dict, xn: np.ndarray) -> dict[str, np.ndarray]:
    """The weighted derivative terms of the ``C^{2+alpha}_mu`` norm from a jet.

    ``jet`` holds ``U`` (k,), ``Ui`` (k, n), ``Uij`` (k, n, n) and ``Ut`` (k,);
    the last coordinate is the degenerate one.
    """
    n = jet["Ui"].shape[1]
    out = {"xn*U_nn": xn * jet["Uij"][:, n - 1, n - 1]}
    sq = np.sqrt(xn)
    for i in range(n - 1):
        out[f"sqrt(xn)*U_n{i + 1}"] = sq * jet["Uij"][:, n - 1, i]
    for i in range(n - 1):
        for j in range(i, n - 1):
            out[f"U_{i + 1}{j + 1}"] = jet["Uij"][:, i, j]
    for i in range(n):
        out[f"U_{i + 1}"] = jet["Ui"][:, i]
    out["U_t"] = jet["Ut"]
    out["U"] = jet["U"]
    return out


class FieldSampler:
    """Base class: subclasses provide ``n``, ``box`` and ``jet(xp, xn, t)``."""

    n: int
    box: Box

    def jet(self, xp: np.ndarray, xn: np.ndarray, t: np.ndarray) -> dict:
        raise NotImplementedError

    def terms(self, xp, xn, t) -> dict[str, np.ndarray]:
        return jet_terms(self.jet(xp, xn, t), np.asarray(xn, dtype=float))

    def draw(self, rng: np.random.Generator, count: int):
        b = self.box
        xp = rng.uniform(b.xp_lo, b.xp_hi, size=(count, self.n - 1))
        xn = rng.uniform(b.xn_lo, b.xn_hi, size=count)
        t = rng.uniform(b.t_lo, b.t_hi, size=count)
        return xp, xn, t

    def nearby(self, rng: np.random.Generator, xp, xn, t):
        """Partners inside a ``mu``-ball of log-uniform radius, clipped to the box."""
        b = self.box
        k = len(xn)
        scale = max(b.xp_hi - b.xp_lo, np.sqrt(b.xn_hi) - np.sqrt(b.xn_lo), np.sqrt(b.t_hi - b.t_lo), 1e-12)
        ell = scale * 10.0 ** rng.uniform(-3.0, -1.0, size=k)
        dirs = rng.normal(size=(k, self.n + 1))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        xp2 = np.clip(xp + (ell[:, None] * dirs[:, : self.n - 1]), b.xp_lo, b.xp_hi)
        sq = np.clip(np.sqrt(xn) + ell * dirs[:, self.n - 1], np.sqrt(b.xn_lo), np.sqrt(b.xn_hi))
        dt = (ell * dirs[:, self.n]) ** 2 * np.sign(dirs[:, self.n])
        t2 = np.clip(t + dt, b.t_lo, b.t_hi)
        return xp2, sq**2, t2


class FunctionSampler(FieldSampler):
    """Sampler from a closed-form jet ``jet(xp, xn, t) -> dict``."""

    def __init__(self, jet, n: int, box: Box):
        self._jet = jet
        self.n = n
        self.box = box

    def jet(self, xp, xn, t):
        return self._jet(np.asarray(xp, dtype=float), np.asarray(xn, dtype=float), np.asarray(t, dtype=float))


def polynomial_jet(coeffs: dict, n: int):
    """Jet of a polynomial ``sum c * x_1^a1 ... x_n^an t^b`` given as ``{(a1..an, b): c}``."""

    def monomial(x, t, powers, b, dx=None, dt=0):
        val = np.ones(len(t))
        coef = 1.0
        pw = list(powers)
        for j in dx or ():
            coef *= pw[j]
            pw[j] -= 1
        bb = b
        for _ in range(dt):
            coef *= bb
            bb -= 1
        if coef == 0 or min(pw) < 0 or bb < 0:
            return np.zeros(len(t))
        for j in range(n):
            val = val * x[:, j] ** pw[j]
        return coef * val * t**bb

    def jet(xp, xn, t):
        x = np.column_stack([xp, xn])
        k = len(t)
        out = {"U": np.zeros(k), "Ui": np.zeros((k, n)), "Uij": np.zeros((k, n, n)), "Ut": np.zeros(k)}
        for (powers, b), c in coeffs.items():
            out["U"] += c * monomial(x, t, powers, b)
            out["Ut"] += c * monomial(x, t, powers, b, dt=1)
            for i in range(n):
                out["Ui"][:, i] += c * monomial(x, t, powers, b, dx=(i,))
                for j in range(n):
                    out["Uij"][:, i, j] += c * monomial(x, t, powers, b, dx=(i, j))
        return out

    return jet


class DerivativeSampler(FieldSampler):
    """``D_x^gamma D_t^s U`` of a base sampler by central differences of its jet."""

    def __init__(self, base: FieldSampler, gamma: tuple[int, ...], s: int = 0, h: float = 1e-4):
        self.base = base
        self.gamma = tuple(gamma)
        self.s = s
        self.h = h
        self.n = base.n
        self.box = base.box

    def _apply(self, fn, direction: int, xp, xn, t):
        h = self.h
        if direction == self.n:  # time
            return {k: (a - b) / (2 * h) for (k, a), b in
                    zip(fn(xp, xn, t + h).items(), fn(xp, xn, t - h).values())}
        if direction == self.n - 1:
            lo = np.maximum(xn - h, 0.0)
            hi = lo + 2 * h
            return {k: (a - b) / (2 * h) for (k, a), b in
                    zip(fn(xp, hi, t).items(), fn(xp, lo, t).values())}
        e = np.zeros(self.n - 1)
        e[direction] = h
        return {k: (a - b) / (2 * h) for (k, a), b in
                zip(fn(xp + e, xn, t).items(), fn(xp - e, xn, t).values())}

    def jet(self, xp, xn, t):
        fn = self.base.jet
        dirs = [i for i, c in enumerate(self.gamma) for _ in range(c)] + [self.n] * self.s
        for d in dirs:
            fn = (lambda f, d: (lambda a, b, c: self._apply(f, d, a, b, c)))(fn, d)
        return fn(xp, xn, t)


class RadialPressureSampler(FieldSampler):
    """Pressure of a radial trajectory in the chart ``x' = arc length``, ``x_n = rho - r(t)``.

    ``r(t)`` is the interface radius located by linear extrapolation of the
    pressure.  Spatial derivatives are the Cartesian Hessian in the
    normal/tangent frame; ``U_t`` is the time difference at fixed chart
    coordinates (from the pressure equation when only one snapshot is given).
    Values are tabulated on a uniform ``x_n`` grid and interpolated
    bilinearly in ``(x_n, t)``.
    """

    def __init__(self, states: list[RadialProfile], params: FlowParams, xn_max: float = 0.2,
                 xn_min: float | None = None, arc: float = 0.5):
        if not states:
            raise ValueError("need at least one snapshot")
        self.n = params.n
        self.params = params
        dr = states[0].dr
        xn_min = min(5.0 * dr, 0.5 * xn_max) if xn_min is None else xn_min
        self.xn = np.arange(0.0, xn_max + 0.5 * dr, dr)
        self.times = np.array([s.time for s in states])
        rows = []
        for s in states:
            gf = to_pressure(s, params)
            g = gf.g
            r0 = pressure_interface_radius(gf)
            rho = s.rho
            g_r = np.gradient(g, dr)
            g_rr = np.full_like(g, np.nan)
            g_rr[1:-1] = (g[2:] - 2 * g[1:-1] + g[:-2]) / dr**2
            with np.errstate(divide="ignore", invalid="ignore"):
                tang = np.where(rho > 0, g_r / np.where(rho > 0, rho, 1.0), g_rr)
            q = r0 + self.xn
            gt_eq = pressure_speed(gf, params)
            rows.append([np.interp(q, rho, f, left=np.nan, right=np.nan) for f in (g, g_r, g_rr, tang, gt_eq)])
        self.table = np.array(rows)  # (time, field, xn)
        if len(states) > 1:
            self.table[:, 4, :] = np.gradient(self.table[:, 0, :], self.times, axis=0)
        self.box = Box(0.0, arc, xn_min, xn_max, float(self.times.min()), float(self.times.max()))

    def _interp(self, xn, t):
        xi = np.clip((xn - self.xn[0]) / (self.xn[1] - self.xn[0]), 0, len(self.xn) - 1 - 1e-9)
        i0 = xi.astype(int)
        fx = xi - i0
        if len(self.times) == 1:
            tab = self.table[0]
            return tab[:, i0] * (1 - fx) + tab[:, i0 + 1] * fx
        ti = np.interp(t, self.times, np.arange(len(self.times)))
        j0 = np.minimum(ti.astype(int), len(self.times) - 2)
        ft = ti - j0
        out = 0.0
        for dj, wt in ((0, 1 - ft), (1, ft)):
            tab = self.table[j0 + dj]  # (k, field, xn)
            k = np.arange(len(xn))
            out = out + wt * (tab[k, :, i0] * (1 - fx)[:, None] + tab[k, :, i0 + 1] * fx[:, None]).T
        return out

    def jet(self, xp, xn, t):
        xn = np.asarray(xn, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), xn.shape)
        g, g_r, g_rr, tang, g_t = self._interp(xn, t)
        k, n = len(xn), self.n
        Ui = np.zeros((k, n))
        Ui[:, n - 1] = g_r
        Uij = np.zeros((k, n, n))
        for i in range(n - 1):
            Uij[:, i, i] = tang
        Uij[:, n - 1, n - 1] = g_rr
        return {"U": g, "Ui": Ui, "Uij": Uij, "Ut": g_t}


@dataclass
class HolderReport:
    alpha: float
    terms: dict = field(default_factory=dict)
    norm: float = 0.0
    pairs: int = 0
    skipped: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "norm": self.norm, "pairs": self.pairs, "skipped": self.skipped,
                "seed": self.seed, "terms": self.terms}


def _pair_blocks(sampler: FieldSampler, pairs: int, seed: int):
    done = 0
    for b in itertools.count():
        if done >= pairs:
            return
        k = min(BLOCK, pairs - done)
        rng = np.random.default_rng([seed, b])
        xp, xn, t = sampler.draw(rng, BLOCK)
        half = BLOCK // 2
        xp2, xn2, t2 = sampler.draw(rng, BLOCK)
        lxp, lxn, lt = sampler.nearby(rng, xp, xn, t)
        xp2[half:], xn2[half:], t2[half:] = lxp[half:], lxn[half:], lt[half:]
        yield (xp[:k], xn[:k], t[:k]), (xp2[:k], xn2[:k], t2[:k])
        done += k


def holder_norm_c2alpha_mu(sampler: FieldSampler, alpha: float = ALPHA_DEFAULT, pairs: int = PAIRS_DEFAULT,
                           seed: int = 0) -> HolderReport:
    """Sampled ``C^{2+alpha}_mu`` report: sup and ``mu``-quotient of every weighted term."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    sups: dict[str, float] = {}
    quots: dict[str, float] = {}
    skipped = 0
    used = 0
    for (xp, xn, t), (xp2, xn2, t2) in _pair_blocks(sampler, pairs, seed):
        a = sampler.terms(xp, xn, t)
        b = sampler.terms(xp2, xn2, t2)
        mu = mu_distance_arrays(xp, xn, t, xp2, xn2, t2)
        ok = mu > 0
        for name in a:
            ok &= np.isfinite(a[name]) & np.isfinite(b[name])
        skipped += int(np.count_nonzero(~ok))
        used += int(np.count_nonzero(ok))
        if not ok.any():
            continue
        for name in a:
            va, vb = a[name][ok], b[name][ok]
            sups[name] = max(sups.get(name, 0.0), float(np.max(np.abs(va))), float(np.max(np.abs(vb))))
            q = np.abs(va - vb) / mu[ok] ** alpha
            quots[name] = max(quots.get(name, 0.0), float(np.max(q)))
    terms = {name: {"sup": sups[name], "quotient": quots[name]} for name in sups}
    norm = float(sum(v["sup"] + v["quotient"] for v in terms.values()))
    return HolderReport(alpha, terms, norm, used, skipped, seed)


def multi_indices(n: int, m: int):
    """All ``(gamma, s)`` with ``|gamma| + 2 s <= m``."""
    out = []
    for s in range(m // 2 + 1):
        for order in range(m - 2 * s + 1):
            for gamma in itertools.product(range(order + 1), repeat=n):
                if sum(gamma) == order:
                    out.append((gamma, s))
    return out


def holder_norm_higher(sampler: FieldSampler, m: int, alpha: float = ALPHA_DEFAULT, pairs: int = PAIRS_DEFAULT,
                       seed: int = 0, h: float = 1e-4) -> HolderReport:
    """Sum of ``C^{2+alpha}_mu`` reports of ``D_x^gamma D_t^s U`` over ``|gamma| + 2s <= m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return holder_norm_c2alpha_mu(sampler, alpha, pairs, seed)
    terms = {}
    total = 0.0
    used = skipped = 0
    for gamma, s in multi_indices(sampler.n, m):
        sub = sampler if (sum(gamma) == 0 and s == 0) else DerivativeSampler(sampler, gamma, s, h)
        rep = holder_norm_c2alpha_mu(sub, alpha, pairs, seed)
        key = "D" + "".join(map(str, gamma)) + f"_t{s}"
        terms[key] = rep.terms
        total += rep.norm
        used += rep.pairs
        skipped += rep.skipped
    return HolderReport(alpha, terms, total, used, skipped, seed)
