"""Minimal sparse multivariate polynomials over exact scalars.

Used for the blown-up log-variable recursion and its certificate, where
the ring is Q[y_1..y_k, X, X^{-1}, T] (X a root of the boundary defining
function, T = log x).  Exponents are integer tuples; designated Laurent
variables may carry negative exponents.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping



class MultiPoly:
    """Sparse polynomial: dict of exponent tuples -> exact coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        self.terms: dict[tuple, object] = {}
        if terms:
            for exps, coeff in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent tuple length mismatch")
                if coeff:
                    cur = self.terms.get(exps)
                    val = coeff if cur is None else cur + coeff
                    if val:
                        self.terms[tuple(exps)] = val
                    elif exps in self.terms:
                        del self.terms[exps]

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "MultiPoly":
        exps = [0] * nvars
        exps[j] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.nvars == other.nvars \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for exps, c in other.terms.items():
            cur = out.get(exps)
            val = c if cur is None else cur + c
            if val:
                out[exps] = val
            elif exps in out:
                del out[exps]
        return MultiPoly(self.nvars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        out: dict[tuple, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                cur = out.get(key)
                c = c if cur is None else cur + c
                if c:
                    out[key] = c
                elif cur is not None:
                    del out[key]
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def scale(self, scalar) -> "MultiPoly":
        if not scalar:
            return MultiPoly(self.nvars)
        return MultiPoly(self.nvars, {e: c * scalar for e, c in self.terms.items()})

    def diff(self, j: int) -> "MultiPoly":
        out = {}
        for exps, c in self.terms.items():
            e = exps[j]
            if e:
                key = exps[:j] + (e - 1,) + exps[j + 1:]
                out[key] = c * e
        return MultiPoly(self.nvars, out)

    def integrate_zero_to(self, j: int) -> "MultiPoly":
        """Definite integral over variable j from 0 to (the same variable).

        Valid for polynomial dependence (no negative powers of j):
        c * v^k -> c * v^{k+1} / (k + 1).
        """
        out = {}
        for exps, c in self.terms.items():
            e = exps[j]
            if e < 0:
                raise ValueError("cannot integrate a Laurent power")
            key = exps[:j] + (e + 1,) + exps[j + 1:]
            out[key] = c * Fraction(1, e + 1)
        return MultiPoly(self.nvars, out)

    def substitute(self, j: int, value: "MultiPoly") -> "MultiPoly":
        """Replace variable j by a polynomial (nonnegative powers of j only)."""
        result = MultiPoly.zero(self.nvars)
        powers: dict[int, MultiPoly] = {0: MultiPoly.constant(self.nvars, Fraction(1))}

        def power(k: int) -> MultiPoly:
            if k not in powers:
                powers[k] = power(k - 1) * value
            return powers[k]

        for exps, c in self.terms.items():
            e = exps[j]
            if e < 0:
                raise ValueError("cannot substitute into a Laurent power")
            base = MultiPoly(self.nvars, {exps[:j] + (0,) + exps[j + 1:]: c})
            result = result + base * power(e)
        return result

    def degree_in(self, j: int) -> int:
        return max((exps[j] for exps in self.terms), default=0)

    def map_vars(self, mapping: Iterable[int], new_nvars: int) -> "MultiPoly":
        """Re-embed into a ring with new_nvars variables; mapping[j] is the new index."""
        mapping = list(mapping)
        out = {}
        for exps, c in self.terms.items():
            key = [0] * new_nvars
            for j, e in enumerate(exps):
                if e:
                    key[mapping[j]] += e
            out[tuple(key)] = c
        return MultiPoly(new_nvars, out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms):
            c = self.terms[exps]
            body = "*".join(f"v{j}^{e}" for j, e in enumerate(exps) if e) or "1"
            parts.append(f"({c})*{body}")
        return " + ".join(parts)

    __repr__ = __str__
