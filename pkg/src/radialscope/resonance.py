"""Resonant multiindices, their effective classification, and energy scans.

A multiindex (a, alpha, beta) of weighted degree >= 3 is resonant when

    R = lam (a - 1 + sum_j alpha_j r_j + sum_j beta_j (1 - r_j)) = 0.

Resonant indices split into the effectively resonant sets

    I'  : a = 0, alpha'' = beta'' = alpha''' = beta''' = 0, |beta'| = 1,
    I'' : a = 0, alpha' = beta' = alpha''' = beta''' = 0,

which alter leading asymptotics; everything else resonant is effectively
nonresonant and absorbable.  Energies at which I' or I'' is nonempty form
a discrete set, located here by a sign-change scan plus bisection over
the finitely many defining functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from scipy.optimize import brentq

from .parallel import parallel_map
from .scalars import GaussianRational, as_complex
from .symalg import (EXACT, MonomialKey, WeightedPolynomial, bracket,
                     iter_monomials, weighted_degree)
from .radial import (CriticalPointSpec, HessianThresholdError, RadialPoint,
                     hessian_thresholds)

EFF_R1 = "effR1"
EFF_R2 = "effR2"
EFF_NONRES = "effNonres"

DEFAULT_FLOAT_TOL = 1e-12
DEFAULT_GRID = 10_000
DEFAULT_BISECT_TOL = 1e-10


class InvalidInputError(ValueError):
    pass


class InvalidIntervalError(ValueError):
    pass


@dataclass(frozen=True)
class ResonanceRecord:
    idx: MonomialKey
    eigenvalue: object
    klass: str

    @property
    def degree(self) -> int:
        return weighted_degree(self.idx)

    def to_json_dict(self) -> dict:
        ev = as_complex(self.eigenvalue)
        return {"a": self.idx[0], "alpha": list(self.idx[1]), "beta": list(self.idx[2]),
                "eigenvalue": {"re": ev.real, "im": ev.imag}, "class": self.klass}


def normalized_eigenvalue(idx: MonomialKey, rp: RadialPoint):
    """R / lam = a - 1 + sum alpha_j r_j + sum beta_j (1 - r_j)."""
    a, alpha, beta = idx
    acc = a - 1
    for j, r in enumerate(rp.r_list):
        if alpha[j]:
            acc = acc + alpha[j] * r
        if beta[j]:
            acc = acc + beta[j] * (1 - r)
    return acc


def is_resonant(idx: MonomialKey, rp: RadialPoint, tol: float = DEFAULT_FLOAT_TOL) -> bool:
    if weighted_degree(idx) < 3:
        return False
    rho = normalized_eigenvalue(idx, rp)
    if rp.mode == EXACT:
        return rho == 0
    return abs(as_complex(rho)) <= tol


def classify_resonance(idx: MonomialKey, rp: RadialPoint,
                       tol: float = DEFAULT_FLOAT_TOL) -> str:
    """Classify a resonant index as effR1 (I'), effR2 (I'') or effNonres."""
    if not is_resonant(idx, rp, tol):
        raise InvalidInputError(f"index {idx} is not resonant for this radial point")
    a, alpha, beta = idx
    ap, asec, athird = rp.layout.split(alpha)
    bp, bsec, bthird = rp.layout.split(beta)
    if a == 0 and not any(athird) and not any(bthird):
        if not any(asec) and not any(bsec) and sum(bp) == 1:
            return EFF_R1
        if not any(ap) and not any(bp):
            return EFF_R2
    return EFF_NONRES


def enumerate_resonances(rp: RadialPoint, max_degree: int,
                         tol: float = DEFAULT_FLOAT_TOL) -> list[ResonanceRecord]:
    """All resonant (a, alpha, beta) with weighted degree in [3, max_degree].

    Exact-mode radial points use exact zero tests; floating mode accepts
    |R / lam| <= tol.  Complete with respect to brute force by construction
    (this *is* the brute-force scan; the finiteness bounds enter only in
    the energy scan).
    """
    if rp.hessian_threshold:
        raise HessianThresholdError("resonance enumeration refused at a Hessian threshold")
    if max_degree < 3:
        raise InvalidInputError("max_degree must be >= 3")
    out = []
    for idx in iter_monomials(rp.n - 1, max_degree, min_weighted_degree=3):
        if is_resonant(idx, rp, tol):
            out.append(ResonanceRecord(idx=idx,
                                       eigenvalue=rp.lam * normalized_eigenvalue(idx, rp),
                                       klass=classify_resonance(idx, rp, tol)))
    out.sort(key=lambda rec: (rec.degree, rec.idx))
    return out


def near_resonances(rp: RadialPoint, max_degree: int,
                    tol: float = DEFAULT_FLOAT_TOL) -> list[MonomialKey]:
    """Floating-mode indices with tol < |R / lam| <= 10 tol, reported separately."""
    if rp.mode == EXACT:
        return []
    out = []
    for idx in iter_monomials(rp.n - 1, max_degree, min_weighted_degree=3):
        rho = abs(as_complex(normalized_eigenvalue(idx, rp)))
        if tol < rho <= 10 * tol:
            out.append(idx)
    return out


# -- energy scan ------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyScanResult:
    interval: tuple[float, float]
    eff_res_energies: tuple        # of (sigma, idx, residual)
    thresholds: tuple              # of (sigma, hessian_index)
    settings: dict = field(default_factory=dict, compare=False)

    @property
    def min_gap(self) -> float | None:
        sigmas = sorted([s for s, _, _ in self.eff_res_energies] + [s for s, _ in self.thresholds])
        if len(sigmas) < 2:
            return None
        return min(b - a for a, b in zip(sigmas, sigmas[1:]))

    def to_json_dict(self) -> dict:
        roots = [{"sigma": s, "kind": "effres",
                  "witness": {"a": idx[0], "alpha": list(idx[1]), "beta": list(idx[2])},
                  "residual": res}
                 for s, idx, res in self.eff_res_energies]
        roots += [{"sigma": s, "kind": "threshold", "witness": {"hessianIndex": j},
                   "residual": 0.0}
                  for s, j in self.thresholds]
        roots.sort(key=lambda r: (r["sigma"], r["kind"]))
        return {"interval": list(self.interval), "roots": roots,
                "minGap": self.min_gap, "settings": self.settings}


def _r_real(h: float, w: float) -> float:
    """Real branch r = 1/2 - sqrt(1/4 - (h/2)/w); caller guarantees realness."""
    disc = 0.25 - (h / 2.0) / w
    return 0.5 - disc ** 0.5


def _exponent_tuples(length: int, total: int) -> Iterator[tuple[int, ...]]:
    if length == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for tail in _exponent_tuples(length - 1, total - head):
            yield (head,) + tail


def scan_effectively_resonant_energies(cp: CriticalPointSpec,
                                       interval: tuple[float, float],
                                       sign: int = +1,
                                       grid_points: int = DEFAULT_GRID,
                                       bisect_tol: float = DEFAULT_BISECT_TOL) -> EnergyScanResult:
    """Locate effectively resonant energies and Hessian thresholds in an interval.

    Finds all zeros of the finitely many functions

        sum_j alpha'_j r'_j(sigma) - r'_k(sigma)                    (I' family)
        sum_j (alpha''_j r''_j(sigma) + beta''_j (1 - r''_j)) - 1   (I'' family)

    over the multiindex families bounded by |alpha'| <= |r'_k| / min |r'_j|
    and |alpha''| <= 1 / min r''_j, |beta''| <= 1, by a sign-change scan on
    a grid followed by bisection.  The interval is split at the Hessian
    thresholds, across which the y''/y''' block structure changes.
    """
    lo, hi = float(interval[0]), float(interval[1])
    v0 = float(cp.value)
    if not (v0 < lo < hi):
        raise InvalidIntervalError(
            f"interval [{lo}, {hi}] must be compact and strictly above V0 = {v0}")

    hvals = [float(h) for h in cp.hessian]
    order = sorted(range(len(hvals)), key=lambda i: hvals[i])
    hsorted = [hvals[i] for i in order]
    neg_pos = [j for j, h in enumerate(hsorted) if h < 0]

    thr_all = hessian_thresholds(cp)
    thresholds = []
    for h_idx, h in enumerate(cp.hessian):
        if float(h) > 0:
            t = v0 + 2.0 * float(h)
            if lo <= t <= hi:
                thresholds.append((t, h_idx))
    thresholds.sort()

    cuts = sorted({lo, hi} | {t for t, _ in thresholds})
    pad = max((hi - lo) * 1e-9, 1e-12)
    subintervals = []
    for a, b in zip(cuts, cuts[1:]):
        aa = a + (pad if any(abs(a - t) < pad for t, _ in thresholds) else 0.0)
        bb = b - (pad if any(abs(b - t) < pad for t, _ in thresholds) else 0.0)
        if aa < bb:
            subintervals.append((aa, bb))

    roots: list[tuple[float, MonomialKey, float]] = []
    nvars = len(hvals)

    def embed(positions: Sequence[int], values: Sequence[int]) -> tuple[int, ...]:
        out = [0] * nvars
        for p, v in zip(positions, values):
            out[p] = v
        return tuple(out)

    for (a_end, b_end) in subintervals:
        wa, wb = a_end - v0, b_end - v0
        # y'' membership is constant on a threshold-free subinterval
        sec_pos = [j for j, h in enumerate(hsorted) if h > 0 and wa > 2.0 * h and wb > 2.0 * h]

        families = []
        if neg_pos:
            rp_lo = {j: _r_real(hsorted[j], wa) for j in neg_pos}
            rp_hi = {j: _r_real(hsorted[j], wb) for j in neg_pos}
            min_abs = min(min(abs(rp_lo[j]), abs(rp_hi[j])) for j in neg_pos)
            for k in neg_pos:
                max_abs_k = max(abs(rp_lo[k]), abs(rp_hi[k]))
                bound = int(max_abs_k / min_abs + 1e-9)
                for total in range(2, bound + 1):
                    for av in _exponent_tuples(len(neg_pos), total):
                        alpha = embed(neg_pos, av)
                        beta = embed([k], [1])
                        idx = (0, alpha, beta)

                        def g(sig, av=av, k=k):
                            w = sig - v0
                            return (sum(av[i] * _r_real(hsorted[j], w)
                                        for i, j in enumerate(neg_pos))
                                    - _r_real(hsorted[k], w))

                        families.append((idx, g))
        if sec_pos:
            rs_lo = {j: _r_real(hsorted[j], wa) for j in sec_pos}
            rs_hi = {j: _r_real(hsorted[j], wb) for j in sec_pos}
            min_r = min(min(rs_lo[j], rs_hi[j]) for j in sec_pos)
            amax = int(1.0 / min_r + 1e-9)
            for btotal in (0, 1):
                for bv in _exponent_tuples(len(sec_pos), btotal):
                    for atotal in range(max(0, 3 - btotal), amax + 1):
                        for av in _exponent_tuples(len(sec_pos), atotal):
                            idx = (0, embed(sec_pos, av), embed(sec_pos, bv))

                            def g(sig, av=av, bv=bv):
                                w = sig - v0
                                return sum(av[i] * _r_real(hsorted[j], w)
                                           + bv[i] * (1.0 - _r_real(hsorted[j], w))
                                           for i, j in enumerate(sec_pos)) - 1.0

                            families.append((idx, g))

        if not families:
            continue
        npts = max(grid_points, 2)
        step = (b_end - a_end) / npts
        grid = [a_end + i * step for i in range(npts + 1)]

        def scan_family(pair):
            idx, g = pair
            found = []
            vals = [g(s) for s in grid]
            for i in range(npts):
                va, vb = vals[i], vals[i + 1]
                if va == 0.0:
                    found.append((grid[i], idx, 0.0))
                elif va * vb < 0.0:
                    root = brentq(g, grid[i], grid[i + 1], xtol=bisect_tol * 1e-4)
                    found.append((root, idx, abs(g(root))))
            if vals[-1] == 0.0:
                found.append((grid[-1], idx, 0.0))
            return found

        for found in parallel_map(scan_family, families):
            roots.extend(found)

    dedup: dict[tuple, tuple[float, MonomialKey, float]] = {}
    for s, idx, res in roots:
        key = (round(s / bisect_tol), idx)
        if key not in dedup or res < dedup[key][2]:
            dedup[key] = (s, idx, res)
    eff = sorted(dedup.values())

    return EnergyScanResult(
        interval=(lo, hi),
        eff_res_energies=tuple(eff),
        thresholds=tuple(thresholds),
        settings={"gridPoints": grid_points, "bisectTol": bisect_tol, "sign": sign},
    )


# -- J'' and module order ------------------------------------------------------------


def second_index_set(rp: RadialPoint) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The finite set J'' = {(alpha'', beta''): sum r'' a + (1-r'') b in (1,2)}.

    Exponents are over the y'' block only, in sorted-block order.
    """
    if rp.hessian_threshold:
        raise HessianThresholdError("J'' undefined at a Hessian threshold")
    sec = list(rp.layout.ysecond_indices)
    if not sec:
        return []
    rvals = [float(rp.r_list[j]) for j in sec]
    rmin = min(min(rvals), 0.5)
    bound = int(2.0 / rmin) + 1
    out = []
    for atotal in range(0, bound + 1):
        for av in _exponent_tuples(len(sec), atotal):
            for btotal in range(0, bound + 1):
                for bv in _exponent_tuples(len(sec), btotal):
                    if sum(av) + sum(bv) == 0:
                        continue
                    val = sum(av[i] * rp.r_list[j] + bv[i] * (1 - rp.r_list[j])
                              for i, j in enumerate(sec))
                    fval = float(val) if not isinstance(val, GaussianRational) else float(val.re)
                    if rp.mode == EXACT:
                        inside = Fraction(1) < val < Fraction(2)
                    else:
                        inside = 1.0 < fval < 2.0
                    if inside:
                        out.append((av, bv))
    out.sort()
    return out


@dataclass(frozen=True)
class ModuleGenerator:
    symbol_id: str
    eigenvalue: object      # normalized eigenvalue sigma_i (real part for y''')
    order: object           # s_i = min(1, sigma_i)


@dataclass(frozen=True)
class ModuleOrderRecord:
    """Test-module generators with their truncated decay orders.

    Generators follow the boundary symbols x^{-1} f'_j, x^{-r''_j} e''_j,
    x^{-(1-r''_j)} f''_j, x^{-1/2} e'''_j, x^{-1/2} f'''_j and x^{-1} p0;
    s_i = min(1, sigma_i) where sigma_i is the normalized eigenvalue.
    """

    rp: RadialPoint
    generators: tuple[ModuleGenerator, ...]

    def index_of(self, symbol_id: str) -> int:
        for i, g in enumerate(self.generators):
            if g.symbol_id == symbol_id:
                return i
        raise KeyError(symbol_id)

    def s_sum(self, alpha: Sequence[int]):
        if len(alpha) != len(self.generators):
            raise InvalidInputError("multiindex length must match generator count")
        total = 0
        for g, e in zip(self.generators, alpha):
            if e:
                total = total + g.order * e
        return total


def module_order(rp: RadialPoint) -> ModuleOrderRecord:
    gens = []
    lay = rp.layout
    for j in lay.yprime_indices:
        gens.append(ModuleGenerator(f"f'_{j + 1}", 1 - rp.r_list[j], 1))
    for j in lay.ysecond_indices:
        gens.append(ModuleGenerator(f"e''_{j + 1}", rp.r_list[j], rp.r_list[j]))
        gens.append(ModuleGenerator(f"f''_{j + 1}", 1 - rp.r_list[j], 1 - rp.r_list[j]))
    for j in lay.ythird_indices:
        half = Fraction(1, 2) if rp.mode == EXACT else 0.5
        gens.append(ModuleGenerator(f"e'''_{j + 1}", half, half))
        gens.append(ModuleGenerator(f"f'''_{j + 1}", half, half))
    one = Fraction(1) if rp.mode == EXACT else 1.0
    gens.append(ModuleGenerator("p0", one, one))
    return ModuleOrderRecord(rp=rp, generators=tuple(gens))


def s_alpha(rec: ModuleOrderRecord, alpha: Sequence[int]):
    """(s(alpha), s~(alpha)) = (min(sum s_i alpha_i, 1), remainder)."""
    total = rec.s_sum(alpha)
    one = Fraction(1) if rec.rp.mode == EXACT else 1.0
    s = total if total < one else one
    return s, total - s


def module_multiindex(idx: MonomialKey, rec: ModuleOrderRecord) -> tuple[int, ...]:
    """Generator multiindex of the module product induced by nu^a y^alpha mu^beta.

    nu maps to the p0 generator, y''/mu'' and y'''/mu''' to their e/f
    generators, mu' to f'; y' factors are order-zero coefficients and do
    not contribute.
    """
    a, alpha, beta = idx
    lay = rec.rp.layout
    counts = [0] * len(rec.generators)
    counts[rec.index_of("p0")] = a
    for j in range(lay.nvars):
        blk = lay.block_of(j)
        if blk == "yprime":
            if beta[j]:
                counts[rec.index_of(f"f'_{j + 1}")] += beta[j]
        elif blk == "ysecond":
            if alpha[j]:
                counts[rec.index_of(f"e''_{j + 1}")] += alpha[j]
            if beta[j]:
                counts[rec.index_of(f"f''_{j + 1}")] += beta[j]
        else:
            if alpha[j]:
                counts[rec.index_of(f"e'''_{j + 1}")] += alpha[j]
            if beta[j]:
                counts[rec.index_of(f"f'''_{j + 1}")] += beta[j]
    return tuple(counts)


@dataclass
class ModuleClosureReport:
    pairs_checked: int
    violations: list
    eigen_relations_ok: bool

    @property
    def closed(self) -> bool:
        return not self.violations


def module_closure_check(rp: RadialPoint, max_degree: int = 3) -> ModuleClosureReport:
    """Symbolic closure check of the test module under the rescaled bracket.

    For every pair of generator products A^alpha, A^beta with
    |alpha| + |beta| <= max_degree, the bracket of their symbols is
    re-expanded in monomials; each monomial's induced generator product
    gamma must satisfy s~(gamma) <= s~(alpha) + s~(beta).  Real-block
    radial points only.
    """
    if not rp.layout.is_real_block:
        raise InvalidInputError("symbolic closure check requires a real-block model")
    rec = module_order(rp)
    mode = rp.mode
    lay = rp.layout
    model = rp.model_quadratic()
    p0 = model.p0(mode)

    symbols: list[WeightedPolynomial] = []
    for g in rec.generators:
        if g.symbol_id == "p0":
            symbols.append(p0)
        else:
            kind, _, num = g.symbol_id.partition("_")
            j = int(num) - 1
            if kind.startswith("e"):
                symbols.append(WeightedPolynomial.y(lay, j, mode))
            else:
                symbols.append(WeightedPolynomial.mu(lay, j, mode))

    ngen = len(symbols)
    violations = []
    pairs = 0

    def products(max_total: int):
        for total in range(1, max_total + 1):
            for counts in _exponent_tuples(ngen, total):
                if sum(counts) == total:
                    yield counts

    def symbol_power(counts):
        poly = None
        for sym, e in zip(symbols, counts):
            for _ in range(e):
                poly = sym if poly is None else poly * sym
        return poly

    # eigen relations {{p0, gen}} = R * gen for single generators
    eigen_ok = True
    for g, sym in zip(rec.generators, symbols):
        if g.symbol_id == "p0":
            continue
        got = bracket(p0, sym)
        key = next(iter(sym.terms()))
        expect = sym.scale(model.eigenvalue((key.a, key.alpha, key.beta)))
        if mode == EXACT:
            eigen_ok = eigen_ok and (got - expect).is_zero()
        else:
            eigen_ok = eigen_ok and all(abs(t.coeff) < 1e-10 for t in (got - expect).terms())

    for ca in products(max_degree - 1):
        for cb in products(max_degree - sum(ca)):
            pairs += 1
            _, st_a = s_alpha(rec, ca)
            _, st_b = s_alpha(rec, cb)
            budget = st_a + st_b
            br = bracket(symbol_power(ca), symbol_power(cb))
            for term in br.terms():
                gamma = module_multiindex((term.a, term.alpha, term.beta), rec)
                _, st_g = s_alpha(rec, gamma)
                if st_g > budget + (0 if mode == EXACT else 1e-12):
                    violations.append({"alpha": ca, "beta": cb,
                                       "monomial": (term.a, term.alpha, term.beta),
                                       "s_tilde": float(st_g), "budget": float(budget)})
    return ModuleClosureReport(pairs_checked=pairs, violations=violations,
                               eigen_relations_ok=eigen_ok)
