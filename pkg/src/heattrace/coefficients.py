"""Expansion coefficients b_{n,l}, b_m and a_n of the regularized heat trace.

The building blocks:

  * sign assignments s: {0..n-1} -> {+1,-1} and multi-indices alpha of
    length n, enumerated in a fixed canonical order (binary counting for
    signs, colex for multi-indices) so every reduction is reproducible;

  * the linear change of variables behind the product map
    rho_{n,s}(w) = prod_l rho(phi_inverse(s.w)_l); on the w_n-axis every
    factor collapses to rho(w_n / 2) and mixed partials reduce, via an exact
    multivariate Leibniz expansion, to finite sums of products
    prod_l rho^(k_l)(w_n/2) with dyadic-rational weights;

  * the cell constants

      c_{alpha,s} = int_R dxi (1+xi^2)^{-3/2}
                    prod_j int_0^inf dt (sqrt2 (cosh t + i xi s(j)))^{-(alpha_j+1)},

    evaluated as written: a 1D adaptive integral over xi whose integrand
    multiplies 1D adaptive cosh-integrals (the t-integrals factor per j at
    fixed xi, so this is the same absolutely convergent multi-dimensional
    integral after Fubini — and it keeps every order n <= 5 cheap);

  * the assembly
      b_{n,l} = sum_{|alpha|=l} sum_s c_{alpha,s} int rho_ns_axis_derivative dy,
      b_m     = (1/8) sum_{n+l=m} (-2pi)^{-(n+1)} b_{n,l},
      a_n     = b_n / Gamma(n/2 + 1).
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .potentials import Potential, eval as potential_eval, support, to_dict
from .quadrature import Axis, IntegralResult, QuadratureSpec, integrate_1d
from .specfun import gamma_half

MAX_ORDER = 5


# --- combinatorial enumeration ----------------------------------------------

@dataclass(frozen=True)
class SignAssignment:
    """A map s: {0,...,n-1} -> {+1,-1}; entry j is s(j)."""

    n: int
    signs: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sign assignments exist only for n >= 1")
        if len(self.signs) != self.n or any(s not in (-1, 1) for s in self.signs):
            raise ValueError(f"signs must be {self.n} entries of +-1, got {self.signs!r}")

    def flipped(self) -> "SignAssignment":
        return SignAssignment(self.n, tuple(-s for s in self.signs))


@dataclass(frozen=True)
class MultiIndex:
    """alpha = (alpha_0, ..., alpha_{n-1}) of nonnegative integers."""

    n: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("multi-indices exist only for n >= 1")
        if len(self.entries) != self.n or any(a < 0 for a in self.entries):
            raise ValueError(f"entries must be {self.n} nonnegative integers, "
                             f"got {self.entries!r}")

    def weight(self) -> int:
        return sum(self.entries)


def sign_assignments(n: int) -> list[SignAssignment]:
    """All 2^n sign maps, ordered by binary counting (bit j=0 means s(j)=+1)."""
    out = []
    for i in range(2 ** n):
        out.append(SignAssignment(n, tuple(-1 if (i >> j) & 1 else 1
                                           for j in range(n))))
    return out


def multi_indices(n: int, weight: int) -> list[MultiIndex]:
    """All alpha with |alpha| = weight, in colex order."""
    combos = [t for t in itertools.product(range(weight + 1), repeat=n)
              if sum(t) == weight]
    combos.sort(key=lambda t: tuple(reversed(t)))
    return [MultiIndex(n, t) for t in combos]


# --- the variable change and the product map ---------------------------------

JACOBIAN_PHI_INVERSE = 0.5


def phi_inverse(w, signs: SignAssignment | None = None) -> np.ndarray:
    """Invert the shear w_l = s(l)(y_l - y_{l+1}), w_n = y_0 + y_n.

    Writes what_m = s(m) w_m for m < n and what_n = w_n, then
    y_l = (1/2) [sum_{m=l}^{n} what_m - sum_{m=0}^{l-1} what_m].
    For n = 0 (length-1 input) no signs are involved and y_0 = w_0/2.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or len(w) < 1:
        raise ValueError("w must be a vector of length n+1 >= 1")
    n = len(w) - 1
    if n == 0:
        if signs is not None:
            raise ValueError("n = 0 takes no sign assignment")
        return w / 2.0
    if signs is None or signs.n != n:
        raise ValueError(f"need a sign assignment of length {n}")
    what = np.append(np.asarray(signs.signs, dtype=float) * w[:n], w[n])
    tail = np.cumsum(what[::-1])[::-1]          # tail[l] = sum_{m>=l} what_m
    head = np.concatenate(([0.0], np.cumsum(what[:-1])))[:n + 1]
    return 0.5 * (tail - head)


def rho_ns(p: Potential, signs: SignAssignment, w) -> float:
    """The product rho_{n,s}(w) = prod_l rho(phi_inverse(s.w)_l), n >= 1."""
    y = phi_inverse(w, signs)
    return float(np.prod(potential_eval(p, y, 0)))


def _leibniz_terms(n: int, signs: tuple[int, ...], alpha: tuple[int, ...],
                   _cache: dict = {}) -> tuple[tuple[float, tuple[int, ...]], ...]:
    """Expand the mixed partial of prod_{l=0}^{n} rho(L_l(w)) on the w_n axis.

    Each factor sees the linear form L_l with dL_l/dw_j = (1/2) s(j) sigma_{lj}
    (sigma_{lj} = +1 if j >= l else -1), so distributing the alpha_j derivative
    units over the n+1 factors gives terms  coeff * prod_l rho^(k_l)(w_n/2).
    Returns merged (coeff, (k_0..k_n)) pairs; coefficients are exact dyadics.
    """
    key = (n, signs, alpha)
    if key in _cache:
        return _cache[key]
    terms: dict[tuple[int, ...], float] = {}
    per_j = []
    for j, aj in enumerate(alpha):
        splits = []
        for comp in itertools.product(range(aj + 1), repeat=n + 1):
            if sum(comp) != aj:
                continue
            mult = math.factorial(aj)
            w = 1.0
            for l, c in enumerate(comp):
                mult //= math.factorial(c)
                sigma = 1.0 if j >= l else -1.0
                w *= (0.5 * signs[j] * sigma) ** c
            splits.append((mult * w, comp))
        per_j.append(splits)
    for combo in itertools.product(*per_j):
        coeff = 1.0
        orders = [0] * (n + 1)
        for mult_w, comp in combo:
            coeff *= mult_w
            for l, c in enumerate(comp):
                orders[l] += c
        key_o = tuple(orders)
        terms[key_o] = terms.get(key_o, 0.0) + coeff
    out = tuple(sorted(((c, o) for o, c in terms.items() if c != 0.0),
                       key=lambda t: t[1]))
    _cache[key] = out
    return out


def rho_ns_axis_derivative(p: Potential, n: int, s: SignAssignment,
                           alpha: MultiIndex, w_n):
    """d_alpha rho_{n,s} at (0, ..., 0, w_n): exact Leibniz expansion.

    Vectorized over w_n.  Every term is a product prod_l rho^(k_l)(w_n/2).
    """
    if alpha.n != n or s.n != n:
        raise ValueError(f"alpha and s must both have length n={n}")
    terms = _leibniz_terms(n, s.signs, alpha.entries)
    half = np.asarray(w_n, dtype=float) / 2.0
    needed = {k for _, orders in terms for k in orders}
    deriv = {k: potential_eval(p, half, k) for k in needed}
    acc = 0.0
    for coeff, orders in terms:
        prod = coeff
        for k in orders:
            prod = prod * deriv[k]
        acc = acc + prod
    return acc if np.ndim(w_n) else float(acc)


# --- cell constants c_{alpha,s} ----------------------------------------------

_H_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15, max_subdivisions=200)


def _h_factor(m: int, v: float, cache: dict) -> tuple[complex, float, int]:
    """h_m(v) = int_0^inf dt (sqrt2 (cosh t + i v))^{-(m+1)}, with rel. error."""
    if v < 0.0:                                   # h_m(-v) = conj h_m(v)
        val, rel, evals = _h_factor(m, -v, cache)
        return np.conj(val), rel, evals
    key = (m, v)
    hit = cache.get(key)
    if hit is not None:
        return hit[0], hit[1], 0                  # already counted once
    power = -(m + 1)

    def f(t):
        c = np.cosh(np.minimum(t, 700.0))
        return (np.sqrt(2.0) * (c + 1j * v)) ** power

    r = integrate_1d(f, Axis.half_line(), _H_SPEC)
    rel = r.est_error / max(abs(r.value), 1e-300)
    cache[key] = (r.value, rel)
    return r.value, rel, r.evaluations


@dataclass(frozen=True)
class CoefficientCell:
    """One computed c_{alpha,s}: real value, plus the honesty bookkeeping."""

    n: int
    alpha: tuple[int, ...] | None
    s: tuple[int, ...] | None
    value: float
    imag_part: float
    est_error: float
    evaluations: int
    converged: bool


def c_coefficient(n: int, alpha: MultiIndex | None = None,
                  s: SignAssignment | None = None,
                  spec: QuadratureSpec | None = None) -> CoefficientCell:
    """The constant c_{alpha,s} for order n (n = 0 needs no alpha or s)."""
    spec = spec or QuadratureSpec()
    if n == 0:
        if alpha is not None or s is not None:
            raise ValueError("n = 0 takes neither alpha nor signs")
        r = integrate_1d(lambda xi: (1.0 + xi * xi) ** -1.5, Axis.full_line(), spec)
        return CoefficientCell(0, None, None, float(np.real(r.value)), 0.0,
                               r.est_error, r.evaluations, r.converged)
    if alpha is None or s is None or alpha.n != n or s.n != n:
        raise ValueError(f"need alpha and signs of length n={n}")

    cache: dict = {}
    state = {"rel": 0.0, "evals": 0}

    def f(xi):
        out = np.empty(len(xi), dtype=complex)
        for i, x in enumerate(xi):
            acc = (1.0 + x * x) ** -1.5
            rel = 0.0
            for aj, sj in zip(alpha.entries, s.signs):
                h, hrel, hevals = _h_factor(aj, sj * x, cache)
                acc = acc * h
                rel += hrel
                state["evals"] += hevals
            out[i] = acc
            state["rel"] = max(state["rel"], rel)
        return out

    r = integrate_1d(f, Axis.full_line(), spec)
    value = complex(r.value)
    err = r.est_error + state["rel"] * abs(value)
    return CoefficientCell(n, alpha.entries, s.signs, value.real, value.imag,
                           err, r.evaluations + state["evals"], r.converged)


# --- coefficient assembly -----------------------------------------------------

def _axis_derivative_integral(p: Potential, n: int, s: SignAssignment,
                              alpha: MultiIndex, spec: QuadratureSpec) -> IntegralResult:
    """int dy  d_alpha rho_{n,s}(0,...,0,y): the y/2 argument fixes the range."""
    lo, hi = support(p)
    return integrate_1d(lambda y: rho_ns_axis_derivative(p, n, s, alpha, y),
                        Axis.finite(2.0 * lo, 2.0 * hi), spec)


def b_nl(p: Potential, n: int, l: int, spec: QuadratureSpec | None = None,
         _cells: dict | None = None) -> IntegralResult:
    """The block coefficient b_{n,l}; real by the xi -> -xi symmetry of c."""
    spec = spec or QuadratureSpec()
    if n < 0 or l < 0:
        raise ValueError("n and l must be nonnegative")
    if n == 0:
        if l > 0:
            return IntegralResult(0.0, 0.0, 0, True)
        r = integrate_1d(lambda y: 2.0 * potential_eval(p, y / 2.0, 0),
                         Axis.finite(*(2.0 * b for b in support(p))), spec)
        return r
    total = 0.0
    err = 0.0
    evals = 0
    ok = True
    for alpha in multi_indices(n, l):
        for s in sign_assignments(n):
            if _cells is not None:
                cell = _cells[(n, alpha.entries, s.signs)]
            else:
                cell = c_coefficient(n, alpha, s, spec)
            y = _axis_derivative_integral(p, n, s, alpha, spec)
            total += cell.value * float(np.real(y.value))
            err += abs(cell.est_error * y.value) + abs(cell.value) * y.est_error
            evals += cell.evaluations + y.evaluations
            ok = ok and cell.converged and y.converged
    return IntegralResult(total, err, evals, ok)


def b_m(p: Potential, m: int, spec: QuadratureSpec | None = None,
        _bnl: dict | None = None) -> float:
    """b_m = (1/8) sum_{n+l=m} (-2 pi)^{-(n+1)} b_{n,l}."""
    if not 0 <= m <= MAX_ORDER:
        raise ValueError(f"m must lie in 0..{MAX_ORDER}, got {m}")
    acc = 0.0
    for n in range(m + 1):
        r = _bnl[(n, m - n)] if _bnl is not None else b_nl(p, n, m - n, spec)
        acc += (-2.0 * math.pi) ** -(n + 1) * r.value
    return acc / 8.0


def a_n(p: Potential, n: int, spec: QuadratureSpec | None = None,
        _bm: float | None = None) -> float:
    """Heat-trace coefficient a_n = b_n / Gamma(n/2 + 1)."""
    bn = _bm if _bm is not None else b_m(p, n, spec)
    return bn / gamma_half(n + 2)


def closed_form_b0_b1(p: Potential, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """(b_0, b_1) from plain integrals of rho and rho^2, bypassing the engine:

        b_0 = -(1/(4 pi)) int rho,      b_1 = (sqrt2 / 64) int rho^2.
    """
    from .potentials import integrate_power
    i1 = integrate_power(p, 1, spec).value
    i2 = integrate_power(p, 2, spec).value
    return (-i1 / (4.0 * math.pi), math.sqrt(2.0) / 64.0 * i2)


# --- the assembled table ------------------------------------------------------

@dataclass
class CoefficientTable:
    """All computed cells and coefficients for one potential, canonical order."""

    potential: dict
    spec: dict
    max_order: int
    c: list[dict] = field(default_factory=list)
    bnl: list[dict] = field(default_factory=list)
    bm: list[dict] = field(default_factory=list)
    an: list[dict] = field(default_factory=list)

    def bm_value(self, m: int) -> float:
        for row in self.bm:
            if row["m"] == m:
                return row["value"]
        raise KeyError(f"table holds no b_m for m={m} (max_order={self.max_order})")

    def an_value(self, n: int) -> float:
        for row in self.an:
            if row["n"] == n:
                return row["value"]
        raise KeyError(f"table holds no a_n for n={n}")

    @property
    def converged(self) -> bool:
        return all(row["converged"] for row in self.c + self.bnl)

    def failed_cells(self) -> list[dict]:
        out = []
        for row in self.c:
            if not row["converged"]:
                out.append({"kind": "c", "n": row["n"], "alpha": row["alpha"],
                            "s": row["s"]})
        for row in self.bnl:
            if not row["converged"]:
                out.append({"kind": "bnl", "n": row["n"], "l": row["l"]})
        return out

    # -- serialization ---------------------------------------------------

    def to_json(self) -> str:
        blob = {
            "potential": self.potential,
            "spec": self.spec,
            "max_order": self.max_order,
            "c": self.c,
            "bnl": self.bnl,
            "bm": self.bm,
            "an": self.an,
            "converged": self.converged,
            "failed": self.failed_cells(),
        }
        return json.dumps(blob, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        blob = json.loads(text)
        table = cls(potential=blob["potential"], spec=blob["spec"],
                    max_order=blob["max_order"], c=blob["c"], bnl=blob["bnl"],
                    bm=blob["bm"], an=blob["an"])
        for row in table.c + table.bnl:             # restore tuple-ness lost to JSON
            if row.get("alpha") is not None:
                row["alpha"] = tuple(row["alpha"])
            if row.get("s") is not None:
                row["s"] = tuple(row["s"])
        return table

    def to_csv(self) -> str:
        lines = ["section,n,l,m,alpha,signs,value,err"]
        for row in self.c:
            alpha = ";".join(map(str, row["alpha"])) if row["alpha"] else ""
            signs = "".join("+" if s > 0 else "-" for s in row["s"]) if row["s"] else ""
            lines.append(f"c,{row['n']},{row['l']},,{alpha},{signs},"
                         f"{row['value']!r},{row['err']!r}")
        for row in self.bnl:
            lines.append(f"bnl,{row['n']},{row['l']},,,,{row['value']!r},{row['err']!r}")
        for row in self.bm:
            lines.append(f"bm,,,{row['m']},,,{row['value']!r},")
        for row in self.an:
            lines.append(f"an,{row['n']},,,,,{row['value']!r},")
        return "\n".join(lines) + "\n"


def compute_table(p: Potential, max_order: int,
                  spec: QuadratureSpec | None = None,
                  threads: int = 1) -> CoefficientTable:
    """Compute every c cell, b_{n,l}, b_m and a_n for n+l, m <= max_order.

    Cells are independent and may be computed on a thread pool; the table
    itself is assembled in canonical enumeration order afterwards, so the
    output is identical for every thread count.
    """
    if not 0 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must lie in 0..{MAX_ORDER}, got {max_order}")
    spec = spec or QuadratureSpec()

    jobs = []                                       # canonical cell list
    for m in range(max_order + 1):
        for n in range(1, m + 1):
            for alpha in multi_indices(n, m - n):
                for s in sign_assignments(n):
                    jobs.append((n, alpha, s))

    def run(job):
        n, alpha, s = job
        return c_coefficient(n, alpha, s, spec)

    if threads > 1 and jobs:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    cells = {(n, alpha.entries, s.signs): cell
             for (n, alpha, s), cell in zip(jobs, results)}

    table = CoefficientTable(potential=to_dict(p), spec=asdict(spec),
                             max_order=max_order)
    for (n, entries, signs), cell in cells.items():
        table.c.append({"n": n, "alpha": entries, "s": signs, "l": sum(entries),
                        "value": cell.value, "imag": cell.imag_part,
                        "err": cell.est_error, "converged": cell.converged})

    bnl_map = {}
    for m in range(max_order + 1):
        for n in range(m + 1):
            r = b_nl(p, n, m - n, spec, _cells=cells if n else None)
            bnl_map[(n, m - n)] = r
            table.bnl.append({"n": n, "l": m - n, "value": float(np.real(r.value)),
                              "err": r.est_error, "converged": r.converged})
    for m in range(max_order + 1):
        table.bm.append({"m": m, "value": b_m(p, m, spec, _bnl=bnl_map)})
    for n in range(max_order + 1):
        table.an.append({"n": n, "value": a_n(p, n, spec,
                                              _bm=table.bm[n]["value"])})
    return table
