"""Reaction terms f on [0, 1] and the checks that decide whether they invade."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

KINDS = ("kpp", "ignition", "bistable", "tristable", "custom")

QUAD_INTERVALS = 10_000
SIGN_DEADBAND = 1e-10


class InvalidParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ReactionTerm:
    """Immutable nonlinearity f, extended by zero outside [0, 1].

    ``_f`` and ``_df`` are scalar functions valid on [0, 1]; the public
    methods accept scalars or arrays and apply the zero extension.
    """

    kind: str
    param_items: tuple = ()
    _f: Callable[[float], float] = field(default=None, repr=False, compare=False)
    _df: Callable[[float], float] = field(default=None, repr=False, compare=False)
    _fv: Callable | None = field(default=None, repr=False, compare=False)

    @property
    def params(self) -> dict:
        return dict(self.param_items)

    @property
    def id(self) -> str:
        if self.kind == "kpp":
            return "kpp"
        if self.kind == "custom":
            return self.params.get("name", "custom")
        inner = ",".join(f"{k}={v:g}" for k, v in self.param_items)
        return f"{self.kind}({inner})"

    def scalar(self, s: float) -> float:
        """Fast scalar path used by the phase-plane integrators."""
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return self._f(s)

    def evaluate(self, s):
        arr = np.asarray(s, dtype=float)
        inside = (arr > 0.0) & (arr < 1.0)
        if self._fv is not None:
            vals = np.where(inside, self._fv(np.clip(arr, 0.0, 1.0)), 0.0)
        else:
            flat = arr.ravel()
            vals = np.array([self._f(x) if 0.0 < x < 1.0 else 0.0 for x in flat]).reshape(arr.shape)
        if np.ndim(s) == 0:
            return float(vals)
        return vals

    __call__ = evaluate

    def derivative(self, s):
        arr = np.asarray(s, dtype=float)
        flat = arr.ravel()
        vals = np.array([self._df(x) if 0.0 <= x <= 1.0 else 0.0 for x in flat]).reshape(arr.shape)
        if np.ndim(s) == 0:
            return float(vals)
        return vals

    def max_abs_derivative(self, n: int = 2001) -> float:
        return float(np.max(np.abs(self.derivative(np.linspace(0.0, 1.0, n)))))

    def max_abs_value(self, n: int = 2001) -> float:
        return float(np.max(np.abs(self.evaluate(np.linspace(0.0, 1.0, n)))))


@dataclass(frozen=True)
class HypothesisReport:
    has_theta: bool
    theta: float | None
    integral_positive_all_t: bool
    integral_0_1: float

    @property
    def invasion_property(self) -> bool:
        return self.has_theta and self.integral_positive_all_t


def _bump(a, b, sign, amp):
    # sign*(s-a)(b-s)/h with slopes +-1 at both ends; amp rescales the peak to amp*h/4
    h = b - a

    def f(s):
        u = (s - a) * (b - s)
        return sign * u / h * (1.0 + (amp - 1.0) * 4.0 * u / (h * h))

    def df(s):
        u = (s - a) * (b - s)
        du = b + a - 2.0 * s
        return sign * du / h * (1.0 + (amp - 1.0) * 8.0 * u / (h * h))

    return f, df


def _tristable(alpha, beta, gamma, amp1, amp2):
    nodes = (0.0, alpha, beta, gamma, 1.0)
    signs = (-1.0, 1.0, -1.0, 1.0)
    amps = (1.0, amp1, 1.0, amp2)
    pieces = [_bump(nodes[i], nodes[i + 1], signs[i], amps[i]) for i in range(4)]

    def locate(s):
        if s < alpha:
            return 0
        if s < beta:
            return 1
        if s < gamma:
            return 2
        return 3

    def f(s):
        return pieces[locate(s)][0](s)

    def df(s):
        return pieces[locate(s)][1](s)

    def fv(s):
        idx = np.searchsorted(np.array(nodes[1:4]), s, side="right")
        out = np.zeros_like(s, dtype=float)
        for i in range(4):
            out = np.where(idx == i, pieces[i][0](s), out)
        return out

    return f, df, fv


def make_builtin(kind: str, params: dict | None = None) -> ReactionTerm:
    params = dict(params or {})
    kind = kind.lower()
    if kind == "kpp":
        if params:
            raise InvalidParameterError("kpp takes no parameters")
        return ReactionTerm(
            "kpp", (), lambda s: s * (1.0 - s), lambda s: 1.0 - 2.0 * s, lambda s: s * (1.0 - s)
        )
    if kind == "bistable":
        a = float(params.get("a", 0.25))
        if not 0.0 < a < 1.0:
            raise InvalidParameterError(f"bistable threshold must lie in (0,1), got {a}")

        def fb(s):
            return s * (1.0 - s) * (s - a)

        def dfb(s):
            return -3.0 * s * s + 2.0 * (1.0 + a) * s - a

        return ReactionTerm("bistable", (("a", a),), fb, dfb, fb)
    if kind == "ignition":
        alpha = float(params.get("alpha", 0.2))
        if not 0.0 < alpha < 1.0:
            raise InvalidParameterError(f"ignition threshold must lie in (0,1), got {alpha}")
        k = 1.0 / (1.0 - alpha) ** 2

        def fi(s):
            d = s - alpha
            return k * d * d * (1.0 - s) if d > 0 else 0.0

        def dfi(s):
            d = s - alpha
            return k * (2.0 * d * (1.0 - s) - d * d) if d > 0 else 0.0

        def fiv(s):
            d = np.maximum(s - alpha, 0.0)
            return k * d * d * (1.0 - s)

        return ReactionTerm("ignition", (("alpha", alpha),), fi, dfi, fiv)
    if kind == "tristable":
        alpha = float(params.get("alpha", 0.2))
        beta = float(params.get("beta", 0.5))
        gamma = float(params.get("gamma", 0.7))
        amp1 = float(params.get("amp1", 1.0))
        amp2 = float(params.get("amp2", 1.0))
        if not 0.0 < alpha < beta < gamma < 1.0:
            raise InvalidParameterError("tristable needs 0 < alpha < beta < gamma < 1")
        if amp1 <= 0.0 or amp2 <= 0.0:
            raise InvalidParameterError("tristable amplitudes must be positive")
        f, df, fv = _tristable(alpha, beta, gamma, amp1, amp2)
        items = (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("amp1", amp1), ("amp2", amp2))
        return ReactionTerm("tristable", items, f, df, fv)
    if kind == "custom":
        raise InvalidParameterError("use make_custom for user-supplied nonlinearities")
    raise InvalidParameterError(f"unknown reaction kind {kind!r}")


def make_custom(func, dfunc=None, name: str = "custom", vectorized: bool = True) -> ReactionTerm:
    """Wrap a user function defined on [0, 1]; the derivative defaults to central differences."""
    if abs(func(0.0)) > 1e-12 or abs(func(1.0)) > 1e-12:
        raise InvalidParameterError("custom reaction must vanish at 0 and 1")
    if dfunc is None:
        h = 1e-6

        def dfunc(s):
            lo = max(s - h, 0.0)
            hi = min(s + h, 1.0)
            return (func(hi) - func(lo)) / (hi - lo)

    return ReactionTerm(
        "custom", (("name", name),), lambda s: float(func(s)), dfunc, func if vectorized else None
    )


def rescaled(f: ReactionTerm, lo: float, hi: float, name: str | None = None) -> ReactionTerm:
    """g(s) = f(lo + (hi-lo) s) / (hi-lo): the reaction seen by (u-lo)/(hi-lo)."""
    width = hi - lo
    if width <= 0.0:
        raise InvalidParameterError("empty rescaling interval")

    def g(s):
        return f.scalar(lo + width * s) / width

    def dg(s):
        return f._df(lo + width * s)

    def gv(s):
        return f.evaluate(lo + width * s) / width

    label = name or f"{f.id}[{lo:g},{hi:g}]"
    return ReactionTerm("custom", (("name", label),), g, dg, gv)


_ID_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_reaction(spec: str) -> ReactionTerm:
    """Build a builtin from ids such as ``"bistable(a=0.25)"``."""
    m = _ID_RE.match(spec.lower())
    if not m:
        raise InvalidParameterError(f"cannot parse reaction id {spec!r}")
    kind, inner = m.group(1), m.group(2)
    params = {}
    if inner:
        for part in inner.split(","):
            if not part.strip():
                continue
            key, _, value = part.partition("=")
            if not _:
                raise InvalidParameterError(f"bad parameter {part!r} in {spec!r}")
            params[key.strip()] = float(value)
    return make_builtin(kind, params)


def _simpson_tail_integrals(f: ReactionTerm, n: int = QUAD_INTERVALS):
    """Nodes t_k (even k) and the integrals of f over [t_k, 1] by composite Simpson."""
    s = np.linspace(0.0, 1.0, n + 1)
    y = f.evaluate(s)
    h = 1.0 / n
    panels = h / 3.0 * (y[0:-1:2] + 4.0 * y[1::2] + y[2::2])
    tails = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    return s[::2], tails


def integral(f: ReactionTerm) -> float:
    _, tails = _simpson_tail_integrals(f)
    return float(tails[0])


def integral_sign(f: ReactionTerm) -> int:
    value = integral(f)
    if abs(value) < SIGN_DEADBAND:
        return 0
    return 1 if value > 0 else -1


def _find_theta(f: ReactionTerm, n: int = QUAD_INTERVALS):
    s = np.linspace(0.0, 1.0, n + 1)
    y = f.evaluate(s)
    nonpos = np.nonzero(y[:-1] <= 0.0)[0]
    last = int(nonpos[-1])
    if last == n - 1:
        return None
    if last == 0:
        # f > 0 on the whole of (0,1): any level works, take the middle one
        return 0.5
    lo, hi = s[last], s[last + 1]
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f.scalar(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return float(hi)


def check_hypotheses(f: ReactionTerm) -> HypothesisReport:
    theta = _find_theta(f)
    nodes, tails = _simpson_tail_integrals(f)
    if theta is not None:
        window = nodes <= theta
    else:
        window = nodes < 1.0
    positive = bool(np.min(tails[window]) > SIGN_DEADBAND)
    return HypothesisReport(theta is not None, theta, positive, float(tails[0]))

