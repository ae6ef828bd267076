"""Degree distributions and the closed-form quantities built on them.

A :class:`DegreeModel` describes the law of a vertex degree ``D``.  The
functions below turn its first two moments into the branching ratio
``a = E[D^2]/E[D] - 1``, the critical red rate ``Lambda(a)``, the
Molloy-Reed value ``E[D(D-2)]`` and the range constant ``C``.  Infinite
moments are represented by ``math.inf`` and propagate through every formula
that accepts them.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate, special

__all__ = [
    "DomainError",
    "DegreeModel",
    "TheoryReport",
    "parse_model",
    "branching_ratio",
    "lambda_crit",
    "molloy_reed",
    "size_biased_offspring",
    "c_lambda",
    "survival_bound",
    "range_const",
    "open_probability",
    "theory_report",
]

PMF_TOL = 1e-12
MOMENT_TOL = 1e-10
# largest k evaluated by the exact alternating sum
EXACT_SUM_MAX_K = 25


class DomainError(ValueError):
    """A formula was evaluated outside the region where it is defined."""


@dataclass(frozen=True)
class DegreeModel:
    """Law of a nonnegative integer degree.

    ``kind`` is one of ``regular``, ``poisson``, ``geometric``, ``negbin``,
    ``zeta``, ``powerlaw`` or ``explicit``.  The last two are backed by a
    finite pmf table over ``0..len(table)-1``.  ``zeta`` with parameters
    ``(s, offset)`` is the law of ``X - offset`` where ``P(X = x)`` is
    proportional to ``x**-s`` on ``x >= 1``; it is the untruncated power law.

    Use the classmethod constructors rather than the raw initializer.
    """

    kind: str
    params: tuple = ()
    table: tuple[float, ...] | None = None
    declared_second_moment: float | None = field(default=None, compare=False)

    # -- constructors -----------------------------------------------------

    @classmethod
    def regular(cls, d: int) -> "DegreeModel":
        if d < 0 or int(d) != d:
            raise DomainError(f"regular degree must be a nonnegative integer, got {d}")
        return cls("regular", (int(d),))

    @classmethod
    def poisson(cls, mu: float) -> "DegreeModel":
        if not mu >= 0:
            raise DomainError(f"poisson mean must be >= 0, got {mu}")
        return cls("poisson", (float(mu),))

    @classmethod
    def geometric(cls, p: float) -> "DegreeModel":
        """``P(D = k) = p (1-p)^k`` for ``k >= 0``."""
        if not 0 < p <= 1:
            raise DomainError(f"geometric parameter must lie in (0, 1], got {p}")
        return cls("geometric", (float(p),))

    @classmethod
    def negbin(cls, r: int, p: float) -> "DegreeModel":
        """Failures before the ``r``-th success; ``negbin(1, p)`` is ``geometric(p)``."""
        if r < 1 or int(r) != r or not 0 < p <= 1:
            raise DomainError(f"bad negative binomial parameters r={r}, p={p}")
        return cls("negbin", (int(r), float(p)))

    @classmethod
    def zeta(cls, s: float, offset: int = 0) -> "DegreeModel":
        if not s > 1:
            raise DomainError(f"zeta exponent must exceed 1, got {s}")
        return cls("zeta", (float(s), int(offset)))

    @classmethod
    def powerlaw(cls, tau: float, cutoff: int | None = None) -> "DegreeModel":
        """``P(D = k)`` proportional to ``k**-tau`` on ``1 <= k <= cutoff``.

        Without a cutoff this is the zeta law on the positive integers.
        """
        if cutoff is None:
            return cls.zeta(tau)
        if cutoff < 1:
            raise DomainError(f"power-law cutoff must be >= 1, got {cutoff}")
        k = np.arange(1, int(cutoff) + 1, dtype=float)
        w = k ** (-float(tau))
        table = np.concatenate([[0.0], w / w.sum()])
        return cls("powerlaw", (float(tau), int(cutoff)), _as_table(table))

    @classmethod
    def explicit(
        cls,
        pmf: Mapping[int, float] | Sequence[float],
        second_moment: float | None = None,
    ) -> "DegreeModel":
        """Finite pmf table, given as ``{k: p}`` or a sequence indexed by ``k``.

        ``second_moment=math.inf`` declares the table a finite stand-in for a
        heavy-tailed law; a finite declaration must match the table.
        """
        if isinstance(pmf, Mapping):
            if not pmf:
                raise DomainError("empty pmf")
            if min(pmf) < 0:
                raise DomainError("degrees must be nonnegative")
            arr = np.zeros(max(pmf) + 1)
            for k, p in pmf.items():
                arr[int(k)] += p
        else:
            arr = np.asarray(pmf, dtype=float)
        if arr.size == 0 or np.any(arr < 0) or np.any(arr > 1):
            raise DomainError("pmf values must lie in [0, 1]")
        if abs(math.fsum(arr) - 1.0) > PMF_TOL:
            raise DomainError(f"pmf sums to {math.fsum(arr)!r}, not 1")
        model = cls("explicit", (), _as_table(arr), second_moment)
        if second_moment is not None and math.isfinite(second_moment):
            exact = _table_moment(model.table, 2)
            if abs(exact - second_moment) > MOMENT_TOL * max(1.0, abs(exact)):
                raise DomainError(
                    f"declared second moment {second_moment} disagrees with pmf ({exact})"
                )
        return model

    # -- moments and pmf --------------------------------------------------

    @property
    def mean(self) -> float:
        k = self.kind
        if k == "regular":
            return float(self.params[0])
        if k == "poisson":
            return self.params[0]
        if k == "geometric":
            p = self.params[0]
            return (1 - p) / p
        if k == "negbin":
            r, p = self.params
            return r * (1 - p) / p
        if k == "zeta":
            s, off = self.params
            ex = special.zeta(s - 1) / special.zeta(s) if s > 2 else math.inf
            return ex - off
        return _table_moment(self.table, 1)

    @property
    def second_moment(self) -> float:
        k = self.kind
        if self.declared_second_moment is not None:
            return float(self.declared_second_moment)
        if k == "regular":
            return float(self.params[0]) ** 2
        if k == "poisson":
            mu = self.params[0]
            return mu + mu * mu
        if k == "geometric":
            p = self.params[0]
            q = 1 - p
            return q * (1 + q) / (p * p)
        if k == "negbin":
            r, p = self.params
            m = r * (1 - p) / p
            return r * (1 - p) / (p * p) + m * m
        if k == "zeta":
            s, off = self.params
            if s <= 3:
                return math.inf
            zs = special.zeta(s)
            ex = special.zeta(s - 1) / zs
            ex2 = special.zeta(s - 2) / zs
            return ex2 - 2 * off * ex + off * off
        return _table_moment(self.table, 2)

    def pmf(self, k: int) -> float:
        if k < 0:
            return 0.0
        kind = self.kind
        if kind == "regular":
            return 1.0 if k == self.params[0] else 0.0
        if kind == "poisson":
            mu = self.params[0]
            if mu == 0:
                return 1.0 if k == 0 else 0.0
            return math.exp(k * math.log(mu) - mu - math.lgamma(k + 1))
        if kind == "geometric":
            p = self.params[0]
            return p * (1 - p) ** k
        if kind == "negbin":
            r, p = self.params
            return math.comb(k + r - 1, k) * p**r * (1 - p) ** k
        if kind == "zeta":
            s, off = self.params
            x = k + off
            return x ** (-s) / special.zeta(s) if x >= 1 else 0.0
        return self.table[k] if k < len(self.table) else 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. degrees as an int64 array."""
        kind = self.kind
        if kind == "regular":
            return np.full(size, self.params[0], dtype=np.int64)
        if kind == "poisson":
            return rng.poisson(self.params[0], size).astype(np.int64)
        if kind == "geometric":
            return rng.geometric(self.params[0], size).astype(np.int64) - 1
        if kind == "negbin":
            r, p = self.params
            return rng.negative_binomial(r, p, size).astype(np.int64)
        if kind == "zeta":
            s, off = self.params
            return rng.zipf(s, size).astype(np.int64) - off
        table = np.asarray(self.table)
        return rng.choice(table.size, size=size, p=table).astype(np.int64)

    @property
    def label(self) -> str:
        """Mini-grammar form accepted by :func:`parse_model` (tables excepted)."""
        if self.kind == "powerlaw":
            return f"powerlaw:{self.params[0]:g}:{self.params[1]}"
        if self.kind == "zeta" and self.params[1] == 0:
            return f"powerlaw:{self.params[0]:g}"
        if self.kind == "explicit":
            return "explicit"
        return ":".join([self.kind, *(f"{p:g}" for p in self.params)])


def _as_table(arr) -> tuple[float, ...]:
    arr = np.asarray(arr, dtype=float)
    nz = np.flatnonzero(arr)
    end = nz[-1] + 1 if nz.size else 1
    return tuple(float(x) for x in arr[:end])


def _table_moment(table, order: int) -> float:
    return math.fsum(k**order * p for k, p in enumerate(table))


def parse_model(spec: str) -> DegreeModel:
    """Parse ``name:arg[:arg...]`` or a path to a two-column ``k p`` text file.

    Recognised names: ``regular:d``, ``poisson:mu``, ``geometric:p``,
    ``negbin:r:p``, ``powerlaw:tau[:cutoff]``.
    """
    spec = spec.strip()
    if os.path.isfile(spec):
        data = np.loadtxt(spec, ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{spec}: expected two columns (k, probability)")
        ks = data[:, 0]
        if np.any(ks != np.round(ks)):
            raise DomainError(f"{spec}: degrees must be integers")
        pmf: dict[int, float] = {}
        for k, p in zip(ks.astype(int), data[:, 1]):
            pmf[int(k)] = pmf.get(int(k), 0.0) + float(p)
        return DegreeModel.explicit(pmf)
    name, *args = spec.split(":")
    try:
        if name == "regular" and len(args) == 1:
            return DegreeModel.regular(int(args[0]))
        if name == "poisson" and len(args) == 1:
            return DegreeModel.poisson(float(args[0]))
        if name == "geometric" and len(args) == 1:
            return DegreeModel.geometric(float(args[0]))
        if name == "negbin" and len(args) == 2:
            return DegreeModel.negbin(int(args[0]), float(args[1]))
        if name == "powerlaw" and len(args) in (1, 2):
            cutoff = int(args[1]) if len(args) == 2 else None
            return DegreeModel.powerlaw(float(args[0]), cutoff)
    except ValueError as exc:
        raise DomainError(f"bad model spec {spec!r}: {exc}") from exc
    raise DomainError(f"unrecognised model spec {spec!r}")


# -- closed forms -----------------------------------------------------------


def _require_mean(model: DegreeModel) -> float:
    mean = model.mean
    if not 0 < mean < math.inf:
        raise DomainError(f"mean degree {mean} outside (0, inf): no giant component possible")
    return mean


def branching_ratio(model: DegreeModel) -> float:
    """``a = E[D^2]/E[D] - 1``; infinite when the second moment is."""
    mean = _require_mean(model)
    m2 = model.second_moment
    if math.isinf(m2):
        return math.inf
    return m2 / mean - 1


def lambda_crit(a: float) -> float:
    """Critical red rate ``2a - 1 - 2 sqrt(a^2 - a)`` with ``Lambda(inf) = 0``.

    Evaluated as ``1 / (sqrt(a) + sqrt(a - 1))**2``, the same number without
    the cancellation that ruins the textbook form for large ``a``.
    """
    if math.isinf(a) and a > 0:
        return 0.0
    if not a >= 1:
        raise DomainError(f"Lambda(a) is undefined for a = {a} < 1")
    return 1.0 / (math.sqrt(a) + math.sqrt(a - 1.0)) ** 2


def molloy_reed(model: DegreeModel) -> float:
    """``E[D(D-2)]``, reported as ``inf`` for an infinite second moment."""
    m2 = model.second_moment
    if math.isinf(m2):
        return math.inf
    return m2 - 2 * model.mean


def size_biased_offspring(model: DegreeModel) -> DegreeModel:
    """Law of ``D* - 1`` where ``P(D* = i) = i P(D = i) / E[D]``."""
    mean = _require_mean(model)
    kind = model.kind
    if kind == "regular":
        return DegreeModel.regular(model.params[0] - 1)
    if kind == "poisson":
        return model
    if kind == "geometric":
        return DegreeModel.negbin(2, model.params[0])
    if kind == "negbin":
        return DegreeModel.negbin(model.params[0] + 1, model.params[1])
    if kind == "zeta":
        s, off = model.params
        if off != 0:
            raise DomainError("size-biasing a shifted zeta law is not supported")
        return DegreeModel.zeta(s - 1, 1)
    table = model.table
    out = [(j + 1) * table[j + 1] / mean for j in range(len(table) - 1)]
    return DegreeModel("explicit", (), _as_table(out or [1.0]))


def c_lambda(lam: float) -> float:
    """``sum_i (2i + 1) lam^i = (1 + lam) / (1 - lam)^2`` for ``0 <= lam < 1``."""
    if not 0 <= lam < 1:
        raise DomainError(f"C_lambda diverges for lambda = {lam}")
    return (1 + lam) / (1 - lam) ** 2


def survival_bound(lam: float, k: int) -> float:
    """Upper bound on the probability that red reaches vertex ``k`` of a path."""
    if not 0 < lam < 1:
        raise DomainError(f"path survival bound needs 0 < lambda < 1, got {lam}")
    if k < 1:
        raise DomainError(f"path length must be >= 1, got {k}")
    return c_lambda(lam) * (4 * lam / (1 + lam) ** 2) ** k * k ** -1.5


def range_const(model: DegreeModel) -> float:
    """Uniform bound on the expected red range for ``lambda <= Lambda``.

    ``1 + 3 E[D]^2 / (E[D^2] - E[D]) * (1 + Lambda) / (1 - Lambda)^2``.
    Returns ``inf`` if ``Lambda`` rounds to 1 for ``a`` barely above 1.
    """
    a = branching_ratio(model)
    if not 1 < a < math.inf:
        raise DomainError(f"range constant needs 1 < a < inf, got a = {a}")
    mean, m2 = model.mean, model.second_moment
    lam = lambda_crit(a)
    gap = (1.0 - lam) ** 2
    if gap == 0.0:
        return math.inf
    return 1 + 3 * mean * mean / (m2 - mean) * (1 + lam) / gap


@lru_cache(maxsize=4096)
def _open_probability_exact(k: int, lam: Fraction) -> Fraction:
    # sum_j C(k, j) (-1)^j k / (k + j lam), in exact rationals
    return sum(
        (Fraction((-1) ** j * math.comb(k, j) * k) / (k + j * lam) for j in range(k + 1)),
        Fraction(0),
    )


def _open_probability_quad(k: int, lam: float) -> float:
    def integrand(x: float) -> float:
        e = -math.expm1(-lam * x)
        if e <= 0.0:
            return 0.0
        return math.exp(k * math.log(e) + math.log(k) - k * x)

    # the integrand peaks where k e^{-lam x} ~ 1; split there so quad sees it
    peak = math.log(max(k, 2)) / lam
    lo, _ = integrate.quad(integrand, 0.0, peak, epsabs=1e-15, epsrel=1e-12, limit=200)
    hi, _ = integrate.quad(integrand, peak, math.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
    return lo + hi


def open_probability(k: int, lam: float) -> float:
    """``P(max of k Exp(lam) < min of k Exp(1))``.

    Exact rational evaluation of the alternating sum for ``k <= 25``,
    adaptive quadrature beyond.  ``k = 0`` returns 1 by convention.
    """
    if k < 0:
        raise DomainError(f"degree must be >= 0, got {k}")
    if not lam > 0:
        raise DomainError(f"lambda must be > 0, got {lam}")
    if k == 0:
        return 1.0
    if k <= EXACT_SUM_MAX_K and math.isfinite(lam):
        return float(_open_probability_exact(k, Fraction(lam)))
    if math.isinf(lam):
        return 1.0
    return _open_probability_quad(k, lam)


@dataclass(frozen=True)
class TheoryReport:
    """Closed-form summary of a degree model.

    ``lambda_crit`` and ``range_const_C`` are ``None`` where undefined; the
    reason is recorded in ``notes``.
    """

    a: float
    lambda_crit: float | None
    molloy_reed: float
    range_const_C: float | None
    mean_D: float
    second_moment_D: float
    notes: tuple[str, ...] = ()

    @property
    def C_lambda(self) -> Callable[[float], float]:
        return c_lambda


def theory_report(model: DegreeModel) -> TheoryReport:
    a = branching_ratio(model)
    mr = molloy_reed(model)
    notes = []
    lam = C = None
    if not mr > 0:
        notes.append(
            "Molloy-Reed criterion E[D(D-2)] > 0 fails: no giant component, Lambda not reported"
        )
    else:
        lam = lambda_crit(a)
        if math.isinf(a):
            notes.append("infinite second moment: Lambda = 0 and C undefined")
        else:
            C = range_const(model)
    return TheoryReport(
        a=a,
        lambda_crit=lam,
        molloy_reed=mr,
        range_const_C=C,
        mean_D=model.mean,
        second_moment_D=model.second_moment,
        notes=tuple(notes),
    )
