"""Wave-form doubling of the half-Laplacian evolution problem.

Applying the half-Laplacian once more turns u_t = -eps*(-Delta)^{1/2} u +
Lop(u) + f into a second-order problem in time; with v = u_t - f it splits
into the first-order system

    u_t = v + f
    v_t = (-eps^2 Delta - Lop^2) u + 2 Lop v + Lop(f) - eps H[f_x]

    u(x,0) = u0,   v(x,0) = -eps H[u0'](x) + Lop(u0)(x).

Singular integrals appear only in the initial state and in the source data,
never during time stepping, so H[u0'] and H[f_x] are evaluated once per
spatial profile here and cached by the all-at-once assembly.
"""

from dataclasses import dataclass

import numpy as np

from . import hilbert as ht
from .spatial import ADVECTION, SCALAR, ZERO, DiscreteSystem

__all__ = [
    "LineProfile",
    "profile_from_catalog",
    "odd_reflection",
    "SourceTerm",
    "SourceSpec",
    "ZERO_SOURCE",
    "DoubledState",
    "doubled_initial_state",
    "doubled_source",
    "rhs",
]

HILBERT_METHODS = ("exact", "weideman", "quadrature")


@dataclass(frozen=True)
class LineProfile:
    """A spatial profile on the real line with its transform data.

    ``value``/``dx`` are vectorized callables; ``hilbert_dx`` evaluates
    H[f'] = (H f)' and may be None when only approximate transforms exist.
    ``hilbert`` (H of the profile itself) is optional, used by oracles.
    ``center`` marks where the profile's structure lives: the spectral fit
    works in coordinates centered there, since its tangent nodes only
    resolve features near the origin.  ``tail`` is lim x*f'(x) for the fit.
    """

    value: object
    dx: object = None
    hilbert: object = None
    hilbert_dx: object = None
    tail: float = 0.0
    center: float = 0.0

    def __call__(self, x):
        return self.value(x)

    def hilbert_dx_evaluator(self, method: str, weideman_n: int = 256):
        """Vectorized H[f'] evaluator obtained by the requested route."""
        if method not in HILBERT_METHODS:
            raise ValueError(f"unknown hilbert method {method!r}")
        if method == "exact":
            if self.hilbert_dx is None:
                raise ht.UnsupportedFunctionError(
                    "profile has no closed-form transform; use method='weideman'")
            return self.hilbert_dx
        if self.dx is None:
            raise ht.UnsupportedFunctionError("profile needs a derivative evaluator")
        if method == "quadrature":
            return lambda x: np.array(
                [ht.hilbert_quadrature_oracle(self.dx, xi) for xi in np.atleast_1d(x)])
        c = self.center
        centered = lambda t: np.asarray(self.dx(t + c))
        if np.iscomplexobj(centered(np.zeros(1))):
            fit_r = ht.weideman_fit(lambda t: centered(t).real, weideman_n,
                                    tail=self.tail)
            fit_i = ht.weideman_fit(lambda t: centered(t).imag, weideman_n,
                                    tail=self.tail)
            return lambda x: (ht.weideman_eval(fit_r, np.asarray(x) - c).real
                              + 1j * ht.weideman_eval(fit_i, np.asarray(x) - c).real)
        fit = ht.weideman_fit(centered, weideman_n, tail=self.tail)
        return lambda x: ht.weideman_eval(fit, np.asarray(x) - c).real


def profile_from_catalog(f: ht.CatalogFunction) -> LineProfile:
    return LineProfile(value=f, dx=f.derivative, hilbert=f.hilbert,
                       hilbert_dx=f.hilbert_derivative, center=f.shift)


@dataclass(frozen=True)
class _OddReflection(LineProfile):
    """f(x) - f(2c - x): the odd image of a base profile about x = c.

    Sampled on [0, 2c) this is the odd periodic extension of f restricted to
    (0, c), up to the decaying tails of f.  Transform evaluators compose from
    the base profile's via H[phi(2c - .)](x) = -(H phi)(2c - x), so the
    spectral fit happens once, in the base profile's own frame.
    """

    base: LineProfile = None
    fold: float = 0.0

    def hilbert_dx_evaluator(self, method: str, weideman_n: int = 256):
        ev = self.base.hilbert_dx_evaluator(method, weideman_n)
        c2 = 2.0 * self.fold
        return lambda x: ev(np.asarray(x)) - ev(c2 - np.asarray(x))


def odd_reflection(p: LineProfile, center: float) -> LineProfile:
    c2 = 2.0 * center
    value = lambda x: p.value(x) - p.value(c2 - x)
    dx = None if p.dx is None else (lambda x: p.dx(x) + p.dx(c2 - x))
    hil = None if p.hilbert is None else (lambda x: p.hilbert(x) + p.hilbert(c2 - x))
    hdx = None
    if p.hilbert_dx is not None:
        hdx = lambda x: p.hilbert_dx(x) - p.hilbert_dx(c2 - x)
    return _OddReflection(value=value, dx=dx, hilbert=hil, hilbert_dx=hdx,
                          tail=0.0, center=p.center, base=p, fold=center)


@dataclass(frozen=True)
class SourceTerm:
    """One separable source contribution T(t) * F(x)."""

    time: object
    space: LineProfile


@dataclass(frozen=True)
class SourceSpec:
    """Source f(x,t) as a sum of separable terms (possibly empty)."""

    terms: tuple = ()

    @property
    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def value(self, x, t):
        if self.is_zero:
            return np.zeros(np.shape(x))
        return sum(term.time(t) * term.space.value(x) for term in self.terms)

    def dx(self, x, t):
        return sum(term.time(t) * term.space.dx(x) for term in self.terms)


ZERO_SOURCE = SourceSpec()


@dataclass(frozen=True)
class DoubledState:
    """The pair (u, v) on the grid unknowns."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be vectors of equal length")

    def stack(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    @classmethod
    def unstack(cls, x: np.ndarray) -> "DoubledState":
        n = x.size // 2
        return cls(u=x[:n], v=x[n:])


def _hilbert_dx_values(profile: LineProfile, x, method: str, weideman_n: int = 256):
    """H[f'] of a profile at points x, by the requested route."""
    return np.asarray(profile.hilbert_dx_evaluator(method, weideman_n)(x))


def _real_if_real(eps: complex):
    return eps.real if eps.imag == 0.0 else eps


def _apply_lop(sys: DiscreteSystem, values, dx_values):
    if sys.op.variant == ZERO:
        return np.zeros_like(np.asarray(values))
    if sys.op.variant == SCALAR:
        return sys.op.delta * np.asarray(values)
    return sys.op.delta * np.asarray(dx_values)


def doubled_initial_state(u0, sys: DiscreteSystem, hmode: str = "exact",
                          weideman_n: int = 256) -> DoubledState:
    """Sample u0 and build v0 = -eps*H[u0'] + Lop(u0) on the grid nodes."""
    if isinstance(u0, ht.CatalogFunction):
        u0 = profile_from_catalog(u0)
    x = sys.grid.nodes
    u = np.asarray(u0.value(x))
    hdu = _hilbert_dx_values(u0, x, hmode, weideman_n)
    if sys.op.variant == ADVECTION and u0.dx is None:
        lop_u = 0.5 * (sys.Q @ u)   # matrix-applied fallback, Q = 2*Lop_h
    else:
        dxv = u0.dx(x) if u0.dx is not None else None
        lop_u = _apply_lop(sys, u, dxv)
    v = -_real_if_real(sys.epsilon) * hdu + lop_u
    dtype = complex if np.iscomplexobj(v) or np.iscomplexobj(u) else float
    return DoubledState(u=u.astype(dtype), v=np.asarray(v).astype(dtype))


def source_block_values(src: SourceSpec, sys: DiscreteSystem, hmode: str = "exact",
                        weideman_n: int = 256):
    """Per-term spatial vectors (F, Lop(F) - eps*H[F']) cached on the nodes.

    Time stepping only rescales these by T(t); no singular integral is
    evaluated after this point.
    """
    x = sys.grid.nodes
    eps = _real_if_real(sys.epsilon)
    cached = []
    for term in src.terms:
        F = np.asarray(term.space.value(x))
        hdx = _hilbert_dx_values(term.space, x, hmode, weideman_n)
        dxv = term.space.dx(x) if term.space.dx is not None else None
        vblock = _apply_lop(sys, F, dxv) - eps * hdx
        cached.append((term.time, F, np.asarray(vblock)))
    return cached


def doubled_source(src: SourceSpec, sys: DiscreteSystem, t: float,
                   hmode: str = "exact", _cache=None) -> np.ndarray:
    """Stacked source G(t) = [f(.,t), Lop(f) - eps*H[f_x]](t) of size 2n."""
    n = sys.n
    dtype = complex if sys.epsilon.imag != 0 else float
    if src.is_zero:
        return np.zeros(2 * n, dtype=dtype)
    cached = source_block_values(src, sys, hmode) if _cache is None else _cache
    ublock = sum(time_fn(t) * F for time_fn, F, _ in cached)
    vblock = sum(time_fn(t) * Fv for time_fn, _, Fv in cached)
    return np.concatenate([ublock, vblock])


def rhs(sys: DiscreteSystem, state: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Right-hand side D @ state + g of the doubled evolution."""
    state = np.asarray(state)
    if state.shape != (sys.dim,) or np.shape(g) != (sys.dim,):
        raise ValueError(f"state and source must have size {sys.dim}")
    return sys.apply_D(state) + g
