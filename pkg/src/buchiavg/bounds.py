"""Log-space certificates for the analytic bounds on reverse-reachable-set sizes.

Each certificate evaluates the closed-form quantities of one bound at a
parameter point and records a verdict per inequality. Logarithms are
natural throughout; values that would underflow a double ((9/10)^k,
n^{-3x}, ...) are compared as logarithms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import mpmath
from scipy.optimize import brentq

from .errors import DomainError, InputError
from .models import DegreeSpec

SMALL_K_FACTOR = 30.0
TOL = 1e-12


@dataclass
class BoundCertificate:
    """Named quantities and inequality verdicts for one parameter point."""

    name: str
    params: dict[str, object]
    quantities: dict[str, float] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def check(self, label: str, ok: bool) -> None:
        self.verdicts[label] = bool(ok)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {k: str(v) for k, v in self.params.items()},
            "quantities": dict(self.quantities),
            "verdicts": dict(self.verdicts),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"certificate = {self.name}"]
        lines += [f"param.{k} = {v}" for k, v in self.params.items()]
        lines += [f"{k} = {v:.12g}" for k, v in self.quantities.items()]
        lines += [f"{'PASS' if ok else 'FAIL'} {k}" for k, ok in self.verdicts.items()]
        return "\n".join(lines)


def log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0 else x * math.log(y)


def log_fraction(value: Fraction) -> float:
    """Natural log of a positive rational without converting it to a float."""
    value = Fraction(value)
    if value <= 0:
        return -math.inf
    return math.log(value.numerator) - math.log(value.denominator)


def _logsumexp(values: Iterable[float]) -> float:
    values = list(values)
    top = max(values)
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


# ------------------------------------------------------- R(k_1..k_x) bounds


def r_upper_bound(spec: DegreeSpec, comp: Sequence[int], exact: bool = False):
    """Two upper bounds on R(k_1..k_x) for k <= n - d_max.

    bound1 = Π (1 - (1 - k/(n-d_i))^{d_i})^{k_i-t_i}
    bound2 = Π (d_i k / (n - d_max))^{k_i-t_i}
    With `exact` the bounds are Fractions, otherwise floats from logs.
    """
    comp = tuple(int(c) for c in comp)
    if len(comp) != spec.x or any(
        not e.targets <= c <= e.count for c, e in zip(comp, spec.entries)
    ):
        raise InputError(f"composition {comp} does not fit {spec}")
    n, k = spec.n, sum(comp)
    if k > n - spec.d_max:
        raise DomainError(f"k={k} exceeds n - d_max = {n - spec.d_max}")
    if exact:
        b1 = Fraction(1)
        b2 = Fraction(1)
        for e, c in zip(spec.entries, comp):
            b1 *= (1 - (1 - Fraction(k, n - e.degree)) ** e.degree) ** (c - e.targets)
            b2 *= Fraction(e.degree * k, n - spec.d_max) ** (c - e.targets)
        return b1, b2
    log1 = log2 = 0.0
    for e, c in zip(spec.entries, comp):
        free = c - e.targets
        if free == 0:
            continue
        ratio = k / (n - e.degree)
        inner = 1.0 if ratio >= 1 else -math.expm1(e.degree * math.log1p(-ratio))
        log1 += free * math.log(inner) if inner > 0 else -math.inf
        log2 += free * math.log(e.degree * k / (n - spec.d_max))
    return math.exp(log1), math.exp(log2)


# ----------------------------------------------------------------- small k


def small_k_range(spec: DegreeSpec, c1: float | None = None) -> tuple[float, float]:
    c1 = 0.04 / spec.d_max if c1 is None else c1
    return SMALL_K_FACTOR * spec.x * math.log(spec.n), c1 * spec.n


def small_k_certificate(
    spec: DegreeSpec, k: int, c1: float | None = None, enforce_range: bool = True
) -> BoundCertificate:
    """Chain a <= b <= envelope <= (9/10)^k <= n^{-3x} for 30·x·ln n <= k <= c1·n.

    `enforce_range=False` evaluates the same closed forms outside the
    range; the verdicts are then informational only.
    """
    c1 = 0.04 / spec.d_max if c1 is None else c1
    n, t, x, dmax = spec.n, spec.t, spec.x, spec.d_max
    lo, hi = small_k_range(spec, c1)
    in_range = lo <= k <= hi and t <= c1 * n
    if enforce_range and not in_range:
        raise DomainError(
            f"small-k bounds need {lo:.1f} <= k <= {hi:.1f} and t <= c1·n; got k={k}, t={t}"
        )
    if not t <= k <= n:
        raise DomainError(f"k={k} must lie in [t, n]")
    cert = BoundCertificate(
        "small-k", {"spec": spec, "k": k, "c1": c1, "in_range": in_range}
    )
    free = [(e.count - e.targets) * e.degree * math.exp(e.degree * k / n) for e in spec.entries]
    L = math.fsum(free)
    spread = math.fsum((e.count - e.targets) * e.degree for e in spec.entries) / n
    ratio = L / (n - dmax)
    log_base = math.log(ratio) + 1 - spread
    log_env = -t * math.log(ratio) + k * log_base
    # continuous maximiser of b: k_i - t_i proportional to (a_i - t_i) d_i e^{d_i k/n}
    log_b = 0.0
    for e, weight in zip(spec.entries, free):
        excess = weight / L * (k - t)
        log_b += _xlogy(excess, math.e * (e.count - e.targets) / excess) if excess else 0.0
        log_b -= k / n * e.degree * (e.count - e.targets - excess)
        log_b += _xlogy(excess, e.degree * k / (n - dmax))
    cert.quantities.update(
        L=L,
        L_over_n_minus_dmax=ratio,
        base=math.exp(log_base),
        log_envelope=log_env,
        log_b_at_maximiser=log_b,
        log_nine_tenths_pow_k=k * math.log(0.9),
        log_n_pow_minus_3x=-3 * x * math.log(n),
        log_alpha_bound=x * math.log(n) + log_env,
    )
    cert.check("b_at_maximiser <= envelope", log_b <= log_env + TOL * max(1.0, abs(log_env)))
    cert.check("base <= 9/10", log_base <= math.log(0.9))
    cert.check("L/(n-d_max) >= 1", ratio >= 1)
    cert.check("envelope <= (9/10)^k", log_env <= k * math.log(0.9))
    cert.check("(9/10)^k <= n^-3x", k * math.log(0.9) <= -3 * x * math.log(n))
    cert.check("n^x * envelope <= n^-2x", x * math.log(n) + log_env <= -2 * x * math.log(n))
    return cert


# ----------------------------------------------------------------- large k


def large_k_range(
    spec: DegreeSpec, c1: float | None = None, c2: float | None = None
) -> tuple[float, float]:
    c1 = 0.04 / spec.d_max if c1 is None else c1
    c2 = 1 - math.exp(-2) if c2 is None else c2
    return c1 * spec.n, c2 * spec.n


def _class_log_f(w: float, u: float, d: int, s: float) -> float:
    """log f(d_i) per unit n, with u = s_i - y_i and w = p_i - y_i."""
    rest = w - u
    val = _xlogy(u, w / u) if u > 0 else 0.0
    val += _xlogy(rest, w / rest) if rest > 0 else 0.0
    val += d * rest * math.log1p(-s)
    val += u * math.log(-math.expm1(d * math.log1p(-s))) if u > 0 else 0.0
    return val


def composition_maximiser(spec: DegreeSpec, s: float) -> list[float]:
    """Fractions u_i = s_i - y_i maximising Σ log f(d_i) subject to
    Σ u_i = s - y; stationarity gives u_i = w_i q_i / (q_i + μ)."""
    n = spec.n
    w = [(e.count - e.targets) / n for e in spec.entries]
    need = s - spec.t / n
    if spec.x == 1:
        return [need]
    q = [-math.expm1(e.degree * math.log1p(-s)) / math.exp(e.degree * math.log1p(-s)) for e in spec.entries]

    def excess(log_mu: float) -> float:
        mu = math.exp(log_mu)
        return math.fsum(wi * qi / (qi + mu) for wi, qi in zip(w, q)) - need

    lo, hi = -60.0, 60.0
    log_mu = brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15)
    mu = math.exp(log_mu)
    return [wi * qi / (qi + mu) for wi, qi in zip(w, q)]


def large_k_certificate(
    spec: DegreeSpec, k: int, c1: float | None = None, c2: float | None = None
) -> BoundCertificate:
    """a <= (n+1)^x·Term1·Term2 with Term1 <= η^n, η < 1, for c1·n <= k <= c2·n.

    Term1 is evaluated at the real-valued composition that maximises it,
    so the verdicts cover every integer composition of k.
    """
    c1 = 0.04 / spec.d_max if c1 is None else c1
    c2 = 1 - math.exp(-2) if c2 is None else c2
    n, t, x = spec.n, spec.t, spec.x
    lo, hi = c1 * n, c2 * n
    if not (lo <= k <= hi) or t > c2 * n or k < t:
        raise DomainError(f"large-k bounds need {lo:.1f} <= k <= {hi:.1f}, t <= k; got k={k}")
    s = k / n
    cert = BoundCertificate("large-k", {"spec": spec, "k": k, "c1": c1, "c2": c2})
    us = composition_maximiser(spec, s)
    log_f = []
    log_term2 = 0.0
    log_cap = 0.0
    for e, u in zip(spec.entries, us):
        wi = (e.count - e.targets) / n
        log_f.append(_class_log_f(wi, u, e.degree, s))
        d = e.degree
        shifted = -math.expm1(d * math.log1p(-s / (1 - d / n)))
        plain = -math.expm1(d * math.log1p(-s))
        log_term2 += n * u * (math.log(shifted) - math.log(plain))
        log_cap += (1 - s) ** (d - 1) / plain * 2 * s * d * d * u
    log_eta = math.fsum(log_f)
    log_term1 = n * log_eta
    log_a = x * math.log(n + 1) + log_term1 + log_cap
    cert.quantities.update(
        s=s,
        eta=math.exp(log_eta),
        log_term1=log_term1,
        log_term2=log_term2,
        log_term2_cap=log_cap,
        log_a_bound=log_a,
        log_n_pow_minus_3x=-3 * x * math.log(n),
    )
    for e, lf in zip(spec.entries, log_f):
        cert.quantities[f"f(d={e.degree})"] = math.exp(lf)
        cert.check(f"f(d={e.degree}) <= 1", lf <= TOL)
    cert.check("Term1^(1/n) = eta < 1", log_eta < 0)
    cert.check("Term2 <= cap", log_term2 <= log_cap + TOL)
    cert.check("(n+1)^x*Term1*Term2 <= n^-3x", log_a <= -3 * x * math.log(n))
    return cert


# ------------------------------------------------------------ very large k


def very_large_k_certificate(spec: DegreeSpec, ell: int) -> BoundCertificate:
    """a <= (x·e·ℓ/n)^ℓ for ℓ = n - k with d_min+1 <= ℓ <= n/e², split at
    ℓ = d_max+1 into the n^{-(2+x)} case and the h/n² case."""
    n, x, dmin, dmax = spec.n, spec.x, spec.d_min, spec.d_max
    if ell < dmin + 1:
        raise DomainError(
            f"ℓ={ell} < d_min+1: fewer outside vertices than an out-neighbourhood needs"
        )
    if ell > n / math.e**2:
        raise DomainError(f"ℓ={ell} exceeds n/e² = {n / math.e ** 2:.1f}")
    cert = BoundCertificate("very-large-k", {"spec": spec, "ell": ell, "k": n - ell})

    def log_a(m: float) -> float:
        return m * math.log(x * math.e * m / n)

    la = log_a(ell)
    log_h = (dmax + 1) * math.log(x * math.e * (dmax + 1))
    cert.quantities.update(
        log_a_bound=la,
        a_bound=math.exp(la),
        h=math.exp(log_h),
        log_a_at_dmax_plus_2=log_a(dmax + 2),
        log_a_at_n_over_e2=log_a(n / math.e**2),
    )
    if ell > dmax + 1:
        cert.quantities["log_n_pow_minus_dmax_plus_1"] = -(dmax + 1) * math.log(n)
        cert.check("a_bound < n^-(2+x)", la < -(2 + x) * math.log(n))
        cert.check("n^x * a_bound <= 1/n^2", x * math.log(n) + la <= -2 * math.log(n))
    else:
        log_alpha = (ell - dmin) * math.log(n) + log_h - ell * math.log(n)
        cert.quantities["alpha_bound"] = math.exp(log_alpha)
        cert.quantities["h_over_n2"] = math.exp(log_h - 2 * math.log(n))
        cert.check("a_bound <= h*n^-ell", la <= log_h - ell * math.log(n) + TOL)
        cert.check("alpha <= h/n^2", log_alpha <= log_h - 2 * math.log(n) + TOL)
    return cert


# --------------------------------------------------------------------- G(n,p)

EXACT_GNP_MAX_N = 200


def gnp_certificate(n: int, p) -> BoundCertificate:
    """t_i/g_i chain giving R(n,p) >= 1 - 1.5/n, plus the (3/4)^n tail at p = 1/2.

    Rational p with n <= 200 is evaluated exactly; anything else in logs.
    The t_{n-i} = (n-i)/i·t_i symmetry is checked on its integer content,
    which is exact for every p.
    """
    from .exact import r_np_exact

    if n < 2:
        raise DomainError("n must be at least 2")
    if not 0 < p < 1:
        raise DomainError("p must lie strictly between 0 and 1")
    exact = isinstance(p, (Fraction, int)) and n <= EXACT_GNP_MAX_N
    log_q = math.log1p(-float(p))
    cert = BoundCertificate("gnp", {"n": n, "p": p, "exact": exact})

    row = [1]  # C(n-1, j), built by exact multiplicative steps
    for j in range(1, n):
        row.append(row[-1] * (n - j) // j)
    # t_{n-i}/t_i: the (1-p) exponents i(n-i) coincide, leaving integer binomials
    sym = all(i * row[n - i - 1] == (n - i) * row[i - 1] for i in range(1, n))
    cert.check("t_(n-i) = (n-i)/i * t_i", sym)

    half = n // 2
    if exact:
        q = 1 - Fraction(p)
        t = [math.comb(n - 1, i - 1) * q ** (i * (n - i)) for i in range(1, n)]
        g = [math.comb(n, i) * q ** (i * (n - i)) for i in range(2, half + 1)]
        t1, total = t[0], sum(t, Fraction(0))
        cert.check("t_(n-i) = (n-i)/i * t_i [rational]", all(
            t[n - i - 1] == Fraction(n - i, i) * t[i - 1] for i in range(1, n)
        ))
        cert.check("g_i <= t_1 for 2 <= i <= n/2", all(gi <= t1 for gi in g))
        cert.check("t_1 <= 1/n^2", t1 <= Fraction(1, n * n))
        cert.check("sum t_i <= 1.5/n", total <= Fraction(3, 2 * n))
        log_t1, log_total = log_fraction(t1), log_fraction(total)
        log_gmax = max((log_fraction(gi) for gi in g), default=-math.inf)
    else:
        log_t = [log_comb(n - 1, i - 1) + i * (n - i) * log_q for i in range(1, n)]
        log_g = [log_comb(n, i) + i * (n - i) * log_q for i in range(2, half + 1)]
        log_t1, log_total = log_t[0], _logsumexp(log_t)
        log_gmax = max(log_g, default=-math.inf)
        slack = 1e-12 * abs(log_t1)
        cert.check("g_i <= t_1 for 2 <= i <= n/2", log_gmax <= log_t1 + slack)
        cert.check("t_1 <= 1/n^2", log_t1 <= -2 * math.log(n) + slack)
        cert.check("sum t_i <= 1.5/n", log_total <= math.log(1.5 / n) + slack)
    cert.quantities.update(
        c_effective=float(p) * n / math.log(n),
        log_t1=log_t1,
        log_max_g=log_gmax,
        log_sum_t=log_total,
    )
    if p == Fraction(1, 2):
        log_tail = n * math.log(0.75)
        log_chain = math.log(1.5 * n) + log_t1
        cert.quantities["log_three_quarters_pow_n"] = log_tail
        cert.check("sum t_i <= 1.5 n t_1", log_total <= log_chain + 1e-12)
        cert.check("1.5 n t_1 < (3/4)^n", log_chain < log_tail)
        if n <= EXACT_GNP_MAX_N:
            miss = 1 - r_np_exact(n, Fraction(1, 2))
            cert.quantities["one_minus_R"] = float(miss)
            cert.check("1 - R(n,1/2) < (3/4)^n [exact]", miss < Fraction(3, 4) ** n)
    return cert


# ------------------------------------------------------------------ Stirling


def stirling_check(ell: int, j: int) -> BoundCertificate:
    """C(ℓ,j) <= (eℓ/j)^j and C(ℓ,j) <= (ℓ+1)(ℓ/j)^j (ℓ/(ℓ-j))^{ℓ-j}."""
    if not 1 <= j <= ell:
        raise DomainError(f"need 1 <= j <= ℓ, got j={j}, ℓ={ell}")
    exact = math.comb(ell, j)
    with mpmath.workdps(50):
        rhs1 = (mpmath.e * ell / j) ** j
        tail = mpmath.mpf(1) if j == ell else (mpmath.mpf(ell) / (ell - j)) ** (ell - j)
        rhs2 = (ell + 1) * (mpmath.mpf(ell) / j) ** j * tail
        ok1 = mpmath.mpf(exact) <= rhs1
        ok2 = mpmath.mpf(exact) <= rhs2
        cert = BoundCertificate("stirling", {"l": ell, "j": j})
        cert.quantities.update(binom=float(exact), rhs1=float(rhs1), rhs2=float(rhs2))
    cert.check("C(l,j) <= (e*l/j)^j", ok1)
    cert.check("C(l,j) <= (l+1)(l/j)^j(l/(l-j))^(l-j)", ok2)
    return cert


# ------------------------------------------------------------ thresholds


def smallest_holding_n(check: Callable[[int], bool], grid: Sequence[int]) -> int | None:
    """Smallest grid point from which `check` holds at every later grid point."""
    found = None
    for n in reversed(sorted(grid)):
        if not check(n):
            break
        found = n
    return found
