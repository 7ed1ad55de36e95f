"""Weighted-graded polynomial algebra on boundary contact coordinates.

Polynomials live in the variables (nu, y_1..y_{n-1}, mu_1..mu_{n-1}) where
nu carries weight 2 and y, mu carry weight 1.  The grade of a monomial
nu^a y^alpha mu^beta is 2a + |alpha| + |beta| - 2, so the quadratic model
sits at grade 0 and the rescaled bracket is grade-additive.

The bracket implemented here is

    {{a, b}} = W_a(b) + (d_nu a) * b,

with W_a the Legendre field of a,

    W_a = -(d_nu a)(mu . d_mu) + (mu . d_mu a - a) d_nu
          + sum_j (d_{mu_j} a d_{y_j} - d_{y_j} a d_{mu_j}).

This is antisymmetric, grade-additive and reproduces the monomial
eigenvalue table of the quadratic model, which fixes the convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from .scalars import GaussianRational, as_complex, format_fraction, is_exact, parse_fraction

MonomialKey = tuple[int, tuple[int, ...], tuple[int, ...]]

EXACT = "exact"
FLOATING = "floating"


class ModeMismatchError(ValueError):
    """Raised when exact and floating polynomials are combined."""


@dataclass(frozen=True)
class VariableLayout:
    """Dimension and block partition of the boundary contact coordinates.

    The y/mu index pairs 1..n-1 are split into three blocks:
    y' = 1..s-1 (negative real eigenvalue ratios), y'' = s..m-1 (ratios in
    (0, 1/2)) and y''' = m..n-1 (complex ratio pairs).  Indices here are
    1-based to match the block boundaries s and m; the *_indices helpers
    return 0-based positions into exponent tuples.

    For y''' blocks, `complex_frames[j]` optionally records the complex
    2x2 matrix expressing the eigen-coordinates (e_j, f_j) in terms of
    (y_j, mu_j); the polynomial ring itself stays real-coordinate based.
    """

    n: int
    s: int | None = None
    m: int | None = None
    complex_frames: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("layout requires n >= 2")
        s = self.n if self.s is None else self.s
        m = self.n if self.m is None else self.m
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "m", m)
        if not (1 <= s <= m <= self.n):
            raise ValueError(f"block boundaries must satisfy 1 <= s <= m <= n, got s={s}, m={m}, n={self.n}")

    @property
    def nvars(self) -> int:
        """Number of y (equivalently mu) variables."""
        return self.n - 1

    @property
    def yprime_indices(self) -> range:
        return range(0, self.s - 1)

    @property
    def ysecond_indices(self) -> range:
        return range(self.s - 1, self.m - 1)

    @property
    def ythird_indices(self) -> range:
        return range(self.m - 1, self.n - 1)

    @property
    def is_real_block(self) -> bool:
        return self.m == self.n

    def block_of(self, j: int) -> str:
        """Block name ('yprime' | 'ysecond' | 'ythird') of 0-based index j."""
        if j in self.yprime_indices:
            return "yprime"
        if j in self.ysecond_indices:
            return "ysecond"
        if j in self.ythird_indices:
            return "ythird"
        raise IndexError(f"index {j} outside 0..{self.nvars - 1}")

    def split(self, exps: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """Split an exponent tuple into (prime, second, third) parts."""
        return (
            tuple(exps[j] for j in self.yprime_indices),
            tuple(exps[j] for j in self.ysecond_indices),
            tuple(exps[j] for j in self.ythird_indices),
        )


def weighted_degree(key: MonomialKey) -> int:
    a, alpha, beta = key
    return 2 * a + sum(alpha) + sum(beta)


def grade(key: MonomialKey) -> int:
    return weighted_degree(key) - 2


def monomial_sort_key(key: MonomialKey):
    """Canonical term order: (grade, a, alpha lex, beta lex)."""
    return (grade(key), key[0], key[1], key[2])


@dataclass(frozen=True)
class WeightedMonomial:
    """One term of a WeightedPolynomial, in the (a, alpha, beta) basis."""

    coeff: object
    a: int
    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    @property
    def weighted_degree(self) -> int:
        return weighted_degree((self.a, self.alpha, self.beta))

    @property
    def grade(self) -> int:
        return self.weighted_degree - 2


class WeightedPolynomial:
    """Sparse polynomial in (nu, y, mu) with the weight-2 grading on nu.

    Immutable by convention: all operations return new instances.  Terms
    with zero coefficient are never stored.
    """

    __slots__ = ("layout", "mode", "_terms")

    def __init__(self, layout: VariableLayout, mode: str = EXACT,
                 terms: Mapping[MonomialKey, object] | None = None):
        if mode not in (EXACT, FLOATING):
            raise ValueError(f"unknown mode {mode!r}")
        self.layout = layout
        self.mode = mode
        clean: dict[MonomialKey, object] = {}
        if terms:
            for key, coeff in terms.items():
                a, alpha, beta = key
                if len(alpha) != layout.nvars or len(beta) != layout.nvars:
                    raise ValueError("exponent tuple length does not match layout")
                if a < 0 or any(e < 0 for e in alpha) or any(e < 0 for e in beta):
                    raise ValueError("negative exponent")
                c = self._coerce(coeff)
                if c:
                    existing = clean.get(key)
                    clean[key] = c if existing is None else existing + c
                    if not clean[key]:
                        del clean[key]
        self._terms = clean

    # -- construction helpers -------------------------------------------------

    def _coerce(self, coeff):
        if self.mode == EXACT:
            return GaussianRational.coerce(coeff)
        if isinstance(coeff, GaussianRational):
            return complex(coeff)
        return complex(coeff)

    @classmethod
    def zero(cls, layout: VariableLayout, mode: str = EXACT) -> "WeightedPolynomial":
        return cls(layout, mode)

    @classmethod
    def monomial(cls, layout: VariableLayout, coeff, a: int = 0,
                 alpha: tuple[int, ...] | None = None,
                 beta: tuple[int, ...] | None = None,
                 mode: str = EXACT) -> "WeightedPolynomial":
        alpha = tuple(alpha) if alpha is not None else (0,) * layout.nvars
        beta = tuple(beta) if beta is not None else (0,) * layout.nvars
        return cls(layout, mode, {(a, alpha, beta): coeff})

    @classmethod
    def nu(cls, layout: VariableLayout, mode: str = EXACT) -> "WeightedPolynomial":
        return cls.monomial(layout, 1, a=1, mode=mode)

    @classmethod
    def y(cls, layout: VariableLayout, j: int, mode: str = EXACT) -> "WeightedPolynomial":
        alpha = tuple(1 if k == j else 0 for k in range(layout.nvars))
        return cls.monomial(layout, 1, alpha=alpha, mode=mode)

    @classmethod
    def mu(cls, layout: VariableLayout, j: int, mode: str = EXACT) -> "WeightedPolynomial":
        beta = tuple(1 if k == j else 0 for k in range(layout.nvars))
        return cls.monomial(layout, 1, beta=beta, mode=mode)

    # -- inspection ------------------------------------------------------------

    def terms(self) -> Iterator[WeightedMonomial]:
        """Terms in the canonical (grade, a, alpha, beta) order."""
        for key in sorted(self._terms, key=monomial_sort_key):
            yield WeightedMonomial(self._terms[key], *key)

    def coefficient(self, a: int, alpha, beta):
        key = (a, tuple(alpha), tuple(beta))
        if key in self._terms:
            return self._terms[key]
        return GaussianRational(0) if self.mode == EXACT else 0j

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def grades(self) -> list[int]:
        return sorted({grade(key) for key in self._terms})

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def homogeneous_grade(self) -> int | None:
        """The single grade of a homogeneous polynomial (None for 0)."""
        gs = self.grades()
        if not gs:
            return None
        if len(gs) > 1:
            raise ValueError("polynomial is not weighted-homogeneous")
        return gs[0]

    def __eq__(self, other):
        if not isinstance(other, WeightedPolynomial):
            return NotImplemented
        return (self.mode == other.mode and self.layout.n == other.layout.n
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.mode, self.layout.n, frozenset(self._terms.items())))

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for t in self.terms():
            factors = []
            if t.a:
                factors.append("nu" + (f"^{t.a}" if t.a > 1 else ""))
            for j, e in enumerate(t.alpha):
                if e:
                    factors.append(f"y{j + 1}" + (f"^{e}" if e > 1 else ""))
            for j, e in enumerate(t.beta):
                if e:
                    factors.append(f"mu{j + 1}" + (f"^{e}" if e > 1 else ""))
            body = "*".join(factors) if factors else "1"
            parts.append(f"({t.coeff})*{body}")
        return " + ".join(parts)

    __repr__ = __str__

    # -- ring operations --------------------------------------------------------

    def _check_compatible(self, other: "WeightedPolynomial"):
        if self.mode != other.mode:
            raise ModeMismatchError(f"cannot combine {self.mode} and {other.mode} polynomials")
        if self.layout.n != other.layout.n:
            raise ValueError("layouts have different dimension")

    def map_coeffs(self, fn: Callable) -> "WeightedPolynomial":
        return WeightedPolynomial(self.layout, self.mode,
                                  {k: fn(c) for k, c in self._terms.items()})

    def __add__(self, other: "WeightedPolynomial") -> "WeightedPolynomial":
        self._check_compatible(other)
        out = dict(self._terms)
        for key, coeff in other._terms.items():
            cur = out.get(key)
            coeff = coeff if cur is None else cur + coeff
            if coeff:
                out[key] = coeff
            elif cur is not None:
                del out[key]
        return WeightedPolynomial(self.layout, self.mode, out)

    def __neg__(self) -> "WeightedPolynomial":
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other: "WeightedPolynomial") -> "WeightedPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "WeightedPolynomial":
        if not isinstance(other, WeightedPolynomial):
            return self.scale(other)
        self._check_compatible(other)
        out: dict[MonomialKey, object] = {}
        for (a1, al1, be1), c1 in self._terms.items():
            for (a2, al2, be2), c2 in other._terms.items():
                key = (a1 + a2,
                       tuple(x + y for x, y in zip(al1, al2)),
                       tuple(x + y for x, y in zip(be1, be2)))
                c = c1 * c2
                cur = out.get(key)
                c = c if cur is None else cur + c
                if c:
                    out[key] = c
                elif cur is not None:
                    del out[key]
        return WeightedPolynomial(self.layout, self.mode, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "WeightedPolynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers")
        out = WeightedPolynomial.monomial(self.layout, 1, mode=self.mode)
        for _ in range(exponent):
            out = out * self
        return out

    def scale(self, scalar) -> "WeightedPolynomial":
        s = self._coerce(scalar)
        if not s:
            return WeightedPolynomial.zero(self.layout, self.mode)
        return self.map_coeffs(lambda c: c * s)

    def chop(self, tol: float = 0.0) -> "WeightedPolynomial":
        """Drop floating terms with |coeff| <= tol (no-op in exact mode)."""
        if self.mode == EXACT or tol <= 0:
            return self
        return WeightedPolynomial(self.layout, self.mode,
                                  {k: c for k, c in self._terms.items() if abs(c) > tol})

    # -- calculus ----------------------------------------------------------------

    def diff_nu(self) -> "WeightedPolynomial":
        out = {}
        for (a, alpha, beta), c in self._terms.items():
            if a:
                out[(a - 1, alpha, beta)] = c * a
        return WeightedPolynomial(self.layout, self.mode, out)

    def diff_y(self, j: int) -> "WeightedPolynomial":
        out = {}
        for (a, alpha, beta), c in self._terms.items():
            e = alpha[j]
            if e:
                new_alpha = alpha[:j] + (e - 1,) + alpha[j + 1:]
                out[(a, new_alpha, beta)] = c * e
        return WeightedPolynomial(self.layout, self.mode, out)

    def diff_mu(self, j: int) -> "WeightedPolynomial":
        out = {}
        for (a, alpha, beta), c in self._terms.items():
            e = beta[j]
            if e:
                new_beta = beta[:j] + (e - 1,) + beta[j + 1:]
                out[(a, alpha, new_beta)] = c * e
        return WeightedPolynomial(self.layout, self.mode, out)

    def euler_mu(self) -> "WeightedPolynomial":
        """mu . d_mu, i.e. each term scaled by its total mu-degree."""
        out = {}
        for key, c in self._terms.items():
            d = sum(key[2])
            if d:
                out[key] = c * d
        return WeightedPolynomial(self.layout, self.mode, out)

    # -- grading -------------------------------------------------------------------

    def grade_part(self, l: int) -> "WeightedPolynomial":
        return WeightedPolynomial(self.layout, self.mode,
                                  {k: c for k, c in self._terms.items() if grade(k) == l})

    def truncate_grade(self, max_grade: int) -> "WeightedPolynomial":
        return WeightedPolynomial(self.layout, self.mode,
                                  {k: c for k, c in self._terms.items() if grade(k) <= max_grade})

    # -- serialization ----------------------------------------------------------------

    def to_json_dict(self) -> dict:
        terms = []
        for t in self.terms():
            entry = {"a": t.a, "alpha": list(t.alpha), "beta": list(t.beta)}
            if self.mode == EXACT:
                entry["re"] = format_fraction(t.coeff.re)
                entry["im"] = format_fraction(t.coeff.im)
            else:
                entry["re"] = t.coeff.real
                entry["im"] = t.coeff.imag
            terms.append(entry)
        return {"mode": self.mode, "n": self.layout.n,
                "blocks": [self.layout.s, self.layout.m], "terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "WeightedPolynomial":
        layout = VariableLayout(n=data["n"], s=data["blocks"][0], m=data["blocks"][1])
        mode = data["mode"]
        terms = {}
        for entry in data["terms"]:
            key = (entry["a"], tuple(entry["alpha"]), tuple(entry["beta"]))
            if mode == EXACT:
                coeff = GaussianRational(parse_fraction(entry["re"]), parse_fraction(entry["im"]))
            else:
                coeff = complex(entry["re"], entry["im"])
            terms[key] = coeff
        return cls(layout, mode, terms)

    @classmethod
    def from_json(cls, text: str) -> "WeightedPolynomial":
        return cls.from_json_dict(json.loads(text))


def grade_components(p: WeightedPolynomial) -> dict[int, WeightedPolynomial]:
    """Split p into its weighted-homogeneous components, keyed by grade."""
    out: dict[int, dict] = {}
    for key, coeff in p._terms.items():
        out.setdefault(grade(key), {})[key] = coeff
    return {l: WeightedPolynomial(p.layout, p.mode, terms) for l, terms in sorted(out.items())}


def legendre_field_apply(a: WeightedPolynomial, b: WeightedPolynomial) -> WeightedPolynomial:
    """W_a(b) for the Legendre field of a (see module docstring)."""
    a._check_compatible(b)
    da_nu = a.diff_nu()
    result = -(da_nu * b.euler_mu())
    result = result + (a.euler_mu() - a) * b.diff_nu()
    for j in range(a.layout.nvars):
        result = result + a.diff_mu(j) * b.diff_y(j) - a.diff_y(j) * b.diff_mu(j)
    return result


def bracket(a: WeightedPolynomial, b: WeightedPolynomial) -> WeightedPolynomial:
    """The rescaled Poisson bracket {{a, b}} = W_a(b) + (d_nu a) b.

    Antisymmetric and grade-additive: for homogeneous inputs the result is
    homogeneous of grade(a) + grade(b).
    """
    a._check_compatible(b)
    return legendre_field_apply(a, b) + a.diff_nu() * b


def ad_exponential(b: WeightedPolynomial, p: WeightedPolynomial, max_grade: int) -> WeightedPolynomial:
    """Pullback of p by the time-1 flow of the Hamilton field of x^{-1} b.

    Computes sum_k (1/k!) ad_b^k(p) with ad_b(q) = {{q, b}}, truncated
    beyond `max_grade`.  Requires b homogeneous of grade >= 1 so that the
    series terminates under truncation; b = 0 returns p unchanged.
    """
    if b.is_zero():
        return p.truncate_grade(max_grade)
    l = b.homogeneous_grade()
    if l is None or l < 1:
        raise ValueError(f"generator must be homogeneous of grade >= 1, got grade {l}")
    result = p.truncate_grade(max_grade)
    term = p.truncate_grade(max_grade)
    k = 0
    while not term.is_zero():
        k += 1
        term = bracket(term, b).truncate_grade(max_grade)
        if b.mode == EXACT:
            term = term.scale(Fraction(1, k))
        else:
            term = term.scale(1.0 / k)
        result = result + term
    return result


@dataclass(frozen=True)
class ModelQuadratic:
    """The grade-0 model p0 = lam * (-nu + sum r_j y_j mu_j + sum Q_j).

    `r_list[j]` is the eigenvalue ratio of the j-th block (Fraction or
    float for real blocks; complex with real part 1/2 for y''' blocks).
    `quad_blocks[j] = (p, q, c)` gives the elliptic quadratic
    Q_j = p mu_j^2 + 2 q y_j mu_j + c y_j^2 on a y''' block.
    """

    lam: object
    r_list: tuple
    layout: VariableLayout
    quad_blocks: Mapping[int, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("model requires lam != 0")
        if len(self.r_list) != self.layout.nvars:
            raise ValueError("r_list length must be n - 1")
        for j in self.layout.ythird_indices:
            if j not in self.quad_blocks:
                raise ValueError(f"y''' index {j} needs an elliptic quadratic block")
            p, q, c = self.quad_blocks[j]
            if not p * c - q * q > 0:
                raise ValueError(f"quadratic block {j} is not elliptic")

    @property
    def is_exact(self) -> bool:
        return is_exact(self.lam) and all(is_exact(r) for r in self.r_list)

    @property
    def mode(self) -> str:
        return EXACT if self.is_exact else FLOATING

    def p0(self, mode: str | None = None) -> WeightedPolynomial:
        mode = mode or self.mode
        layout = self.layout
        poly = -WeightedPolynomial.nu(layout, mode)
        for j in range(layout.nvars):
            if j in layout.ythird_indices:
                p, q, c = self.quad_blocks[j]
                qj = (WeightedPolynomial.mu(layout, j, mode) * WeightedPolynomial.mu(layout, j, mode)).scale(p) \
                    + (WeightedPolynomial.y(layout, j, mode) * WeightedPolynomial.mu(layout, j, mode)).scale(2 * q) \
                    + (WeightedPolynomial.y(layout, j, mode) * WeightedPolynomial.y(layout, j, mode)).scale(c)
                poly = poly + qj
            else:
                poly = poly + (WeightedPolynomial.y(layout, j, mode)
                               * WeightedPolynomial.mu(layout, j, mode)).scale(self.r_list[j])
        return poly.scale(self.lam)

    def eigenvalue(self, key: MonomialKey):
        """R_{a,alpha,beta} = lam (a - 1 + sum alpha_j r_j + sum beta_j (1 - r_j))."""
        a, alpha, beta = key
        acc = a - 1
        for j in range(self.layout.nvars):
            if alpha[j]:
                acc = acc + alpha[j] * self.r_list[j]
            if beta[j]:
                acc = acc + beta[j] * (1 - self.r_list[j])
        return self.lam * acc


def iter_monomials(nvars: int, max_weighted_degree: int,
                   min_weighted_degree: int = 0) -> Iterator[MonomialKey]:
    """All (a, alpha, beta) with weighted degree in the given range."""
    def exponent_tuples(length: int, total_max: int):
        if length == 0:
            yield ()
            return
        for head in range(total_max + 1):
            for tail in exponent_tuples(length - 1, total_max - head):
                yield (head,) + tail

    for w in range(min_weighted_degree, max_weighted_degree + 1):
        for a in range(w // 2 + 1):
            rem = w - 2 * a
            for da in range(rem + 1):
                for alpha in exponent_tuples(nvars, da):
                    if sum(alpha) != da:
                        continue
                    for beta in exponent_tuples(nvars, rem - da):
                        if sum(beta) == rem - da:
                            yield (a, alpha, beta)


def eigen_action_table(model: ModelQuadratic, layout: VariableLayout | None = None,
                       max_grade: int = 4) -> dict[MonomialKey, object]:
    """Eigenvalue R_{a,alpha,beta} for every monomial of grade <= max_grade.

    On a real-block model with e_j = y_j, f_j = mu_j the table is exact:
    {{p0, nu^a y^alpha mu^beta}} = R_{a,alpha,beta} nu^a y^alpha mu^beta.
    With y''' blocks present the identity holds after re-expressing the
    same-grade quadratic defect in the complex eigenbasis.
    """
    layout = layout or model.layout
    return {key: model.eigenvalue(key)
            for key in iter_monomials(layout.nvars, max_grade + 2)}
