"""Conjugate evaluation and the duality-side verification path: grid
submodularity checks, the restricted functions induced by an exchange
context, and exact integer Fenchel-gap certification.

Scalar conjugate evaluation is the single authored route; numpy enters
only as exact int64 bookkeeping for quadratic pair loops over integer
grids and for chunked scans of dual boxes (corpus magnitudes keep every
intermediate far below 2^63).
"""

import random
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import (
    NEG_INF,
    Falsification,
    PriceVector,
    SetFn,
    elements_of,
    ext_add,
    leq_for,
    max_over,
    price_sums,
    restrict_by_size,
)
from .exchange import ExchangeContext
from .reporting import failed_report, passed_report

DEFAULT_BOX = (-3, 3)
DEFAULT_SAMPLES = 10_000

# Grids up to this many points get the exhaustive all-pairs treatment.
EXHAUSTIVE_GRID_LIMIT = 7**4


@dataclass(frozen=True)
class ConjugateEval:
    """Value and argmax of max_Z { f(Z) - p(Z) }; the argmax is the
    smallest bitmask among maximizers."""

    price: PriceVector
    value: object
    argmax_mask: int

    @property
    def argmax(self):
        return elements_of(self.argmax_mask)


def conjugate(f, p):
    """Exact maximum of f(Z) - p(Z) over all 2^n subsets."""
    if not f.dom_masks:
        raise ValueError("the effective domain is empty")
    if p.n != f.n:
        raise ValueError(f"price vector has {p.n} entries, function has n={f.n}")
    sums = price_sums(p.entries, f.n)
    vals = f.values
    best = None
    best_mask = 0
    for m in f.dom_masks:
        v = vals[m] - sums[m]
        if best is None or v > best:
            best = v
            best_mask = m
    return ConjugateEval(p, best, best_mask)


def conjugate_sized(f, k, p):
    """Conjugate of the size-capped function: subsets larger than k are
    excluded from the maximum."""
    capped = restrict_by_size(f, k)
    if not capped.dom_masks:
        raise ValueError(f"no feasible subset of size <= {k}")
    return conjugate(capped, p)


def integer_grid(n, lo=-3, hi=3):
    """All integer price vectors in [lo, hi]^n, lexicographic order."""
    return tuple(PriceVector(q) for q in product(range(lo, hi + 1), repeat=n))


def _feasible_caps(f):
    """Size caps k for which the size-capped conjugate is defined."""
    s, _ = f.dom_size_range()
    return range(s, f.n + 1)


# ---------------------------------------------------------------------------
# Grid machinery. Integer boxes are closed under join/meet, so exhaustive
# checks precompute one conjugate value per grid point and do the pair
# sweep on int64 index arrays.


def _box_points(n, lo, hi):
    side = np.arange(lo, hi + 1, dtype=np.int64)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([side] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _grid_conjugates(f, pts):
    out = np.empty(len(pts), dtype=np.int64)
    for i, row in enumerate(pts):
        out[i] = conjugate(f, PriceVector(tuple(int(x) for x in row))).value
    return out


def _encode(pts, lo, powers):
    return (pts - lo) @ powers


class _GridCheck:
    """Shared state for one exhaustive box sweep."""

    def __init__(self, f, lo, hi):
        self.f = f
        self.lo = lo
        self.pts = _box_points(f.n, lo, hi)
        width = hi - lo + 1
        self.powers = width ** np.arange(f.n - 1, -1, -1, dtype=np.int64)
        self._cache = {}

    def conjugates(self, k=None):
        """Grid conjugate values for f (k=None) or its size-k cap."""
        if k not in self._cache:
            g = self.f if k is None else restrict_by_size(self.f, k)
            self._cache[k] = _grid_conjugates(g, self.pts)
        return self._cache[k]

    def point(self, idx):
        return [int(x) for x in self.pts[idx]]


def _pair_payload(grid, i, j, k, inequality):
    payload = {
        "inequality": inequality,
        "p": grid.point(i),
        "q": grid.point(j),
    }
    if k is not None:
        payload["k"] = k
    return payload


def _sweep_submodular(grid, gv, k, inequality):
    """g(p) + g(q) >= g(p v q) + g(p ^ q) over all grid pairs; returns a
    counterexample payload or the number of pairs checked."""
    pts, powers, lo = grid.pts, grid.powers, grid.lo
    checked = 0
    for i in range(len(pts)):
        joins = _encode(np.maximum(pts[i], pts[i:]), lo, powers)
        meets = _encode(np.minimum(pts[i], pts[i:]), lo, powers)
        slack = gv[i] + gv[i:] - gv[joins] - gv[meets]
        checked += len(slack)
        bad = np.nonzero(slack < 0)[0]
        if len(bad):
            return _pair_payload(grid, i, i + int(bad[0]), k, inequality), checked
    return None, checked


def _sweep_cross(grid, tgv, gv, k):
    """sized(p) + plain(q) >= sized(p ^ q) + plain(p v q), ordered pairs."""
    pts, powers, lo = grid.pts, grid.powers, grid.lo
    checked = 0
    for i in range(len(pts)):
        joins = _encode(np.maximum(pts[i], pts), lo, powers)
        meets = _encode(np.minimum(pts[i], pts), lo, powers)
        slack = tgv[i] + gv - tgv[meets] - gv[joins]
        checked += len(slack)
        bad = np.nonzero(slack < 0)[0]
        if len(bad):
            return _pair_payload(grid, i, int(bad[0]), k, "cross_submodular"), checked
    return None, checked


def _sweep_quotient(grid, tgv, gv, k):
    """sized(p) - sized(q) >= g(p) - g(q) over comparable pairs p >= q."""
    pts = grid.pts
    checked = 0
    for i in range(len(pts)):
        below = np.nonzero((pts <= pts[i]).all(axis=1))[0]
        slack = (tgv[i] - tgv[below]) - (gv[i] - gv[below])
        checked += len(slack)
        bad = np.nonzero(slack < 0)[0]
        if len(bad):
            return _pair_payload(grid, i, int(below[bad[0]]), k, "strong_quotient"), checked
    return None, checked


def _explicit_pairs_check(f, grid_vectors, checker):
    """Generic path for caller-supplied grids (joins/meets may leave the
    grid, so conjugates are memoized per price vector)."""
    memo = {}

    def g(p, k=None):
        key = (p.entries, k)
        if key not in memo:
            memo[key] = (conjugate(f, p) if k is None else conjugate_sized(f, k, p)).value
        return memo[key]

    return checker(g)


def _box_or_sample_policy(f, grid, box):
    # The fast box sweep is exact int64 bookkeeping, so real-mode default
    # grids fall through to the tolerance-aware sampled path.
    lo, hi = box
    if grid is not None:
        return "explicit", None
    npoints = (hi - lo + 1) ** f.n
    if f.mode == "int" and npoints <= EXHAUSTIVE_GRID_LIMIT:
        return "box", (lo, hi)
    return "sampled", (lo, hi)


def check_conjugate_submodular(f, grid=None, *, box=DEFAULT_BOX, seed=0,
                               samples=DEFAULT_SAMPLES, instance_id=""):
    """Submodularity of the conjugate on a price grid, both for the plain
    conjugate and for every feasible size cap.

    With ``grid=None`` the integer box is swept exhaustively when small
    enough, otherwise ``samples`` seeded pairs are drawn (the size cap is
    sampled alongside the pair).
    """
    if not f.dom_masks:
        raise ValueError("the effective domain is empty")
    leq = leq_for(f.mode)
    caps = list(_feasible_caps(f))
    kind, lohi = _box_or_sample_policy(f, grid, box)

    if kind == "explicit":
        vectors = list(grid)
        checked = 0
        for k, tag in [(None, "submodular")] + [(k, "submodular_sized") for k in caps]:
            def run(g):
                nonlocal checked
                for a in range(len(vectors)):
                    for b in range(a, len(vectors)):
                        p, q = vectors[a], vectors[b]
                        checked += 1
                        lhs = g(p.join(q), k) + g(p.meet(q), k)
                        if not leq(lhs, g(p, k) + g(q, k)):
                            return {"inequality": tag, "k": k,
                                    "p": list(p.entries), "q": list(q.entries)}
                return None
            counter = _explicit_pairs_check(f, vectors, run)
            if counter:
                return failed_report("duality_grid", instance_id, counter,
                                     triples=checked)
        return passed_report("duality_grid", instance_id, triples=checked)

    lo, hi = lohi
    if kind == "box":
        gridc = _GridCheck(f, lo, hi)
        total = 0
        counter, checked = _sweep_submodular(gridc, gridc.conjugates(), None, "submodular")
        total += checked
        if counter is None:
            for k in caps:
                counter, checked = _sweep_submodular(
                    gridc, gridc.conjugates(k), k, "submodular_sized")
                total += checked
                if counter:
                    break
        if counter:
            return failed_report("duality_grid", instance_id, counter, triples=total)
        return passed_report("duality_grid", instance_id, triples=total)

    # Sampled pairs for larger ground sets.
    rng = random.Random(seed)
    capped = {k: restrict_by_size(f, k) for k in caps}
    checked = 0
    for _ in range(samples):
        p = PriceVector(tuple(rng.randint(lo, hi) for _ in range(f.n)))
        q = PriceVector(tuple(rng.randint(lo, hi) for _ in range(f.n)))
        jn, mt = p.join(q), p.meet(q)
        checked += 2
        if not leq(conjugate(f, jn).value + conjugate(f, mt).value,
                   conjugate(f, p).value + conjugate(f, q).value):
            counter = {"inequality": "submodular", "p": list(p.entries),
                       "q": list(q.entries)}
            return failed_report("duality_grid", instance_id, counter,
                                 triples=checked, regime="sampled", seed=seed)
        k = caps[rng.randrange(len(caps))]
        fk = capped[k]
        if not leq(conjugate(fk, jn).value + conjugate(fk, mt).value,
                   conjugate(fk, p).value + conjugate(fk, q).value):
            counter = {"inequality": "submodular_sized", "k": k,
                       "p": list(p.entries), "q": list(q.entries)}
            return failed_report("duality_grid", instance_id, counter,
                                 triples=checked, regime="sampled", seed=seed)
    return passed_report("duality_grid", instance_id, triples=checked,
                         regime="sampled", seed=seed)


def check_cross_submodular(f, k, grid=None, *, box=DEFAULT_BOX, seed=0,
                           samples=DEFAULT_SAMPLES, instance_id=""):
    """Mixed submodularity between the size-capped and plain conjugates:
    sized(p) + plain(q) >= sized(p ^ q) + plain(p v q) over grid pairs."""
    if not f.dom_masks:
        raise ValueError("the effective domain is empty")
    if not restrict_by_size(f, k).dom_masks:
        raise ValueError(f"no feasible subset of size <= {k}")
    leq = leq_for(f.mode)
    kind, lohi = _box_or_sample_policy(f, grid, box)

    if kind == "explicit":
        vectors = list(grid)
        fk = restrict_by_size(f, k)
        checked = 0
        counter = None
        for p in vectors:
            for q in vectors:
                checked += 1
                lhs = conjugate(fk, p.meet(q)).value + conjugate(f, p.join(q)).value
                if not leq(lhs, conjugate(fk, p).value + conjugate(f, q).value):
                    counter = {"inequality": "cross_submodular", "k": k,
                               "p": list(p.entries), "q": list(q.entries)}
                    break
            if counter:
                break
        if counter:
            return failed_report("duality_grid", instance_id, counter, triples=checked)
        return passed_report("duality_grid", instance_id, triples=checked)

    lo, hi = lohi
    if kind == "box":
        gridc = _GridCheck(f, lo, hi)
        counter, checked = _sweep_cross(gridc, gridc.conjugates(k),
                                        gridc.conjugates(), k)
        if counter:
            return failed_report("duality_grid", instance_id, counter, triples=checked)
        return passed_report("duality_grid", instance_id, triples=checked)

    rng = random.Random(seed)
    fk = restrict_by_size(f, k)
    checked = 0
    for _ in range(samples):
        p = PriceVector(tuple(rng.randint(lo, hi) for _ in range(f.n)))
        q = PriceVector(tuple(rng.randint(lo, hi) for _ in range(f.n)))
        checked += 1
        lhs = conjugate(fk, p.meet(q)).value + conjugate(f, p.join(q)).value
        if not leq(lhs, conjugate(fk, p).value + conjugate(f, q).value):
            counter = {"inequality": "cross_submodular", "k": k,
                       "p": list(p.entries), "q": list(q.entries)}
            return failed_report("duality_grid", instance_id, counter,
                                 triples=checked, regime="sampled", seed=seed)
    return passed_report("duality_grid", instance_id, triples=checked,
                         regime="sampled", seed=seed)


def check_strong_quotient(f, k, grid=None, *, box=DEFAULT_BOX, seed=0,
                          samples=DEFAULT_SAMPLES, instance_id=""):
    """Monotone quotient relation on comparable pairs p >= q:
    sized(p) - sized(q) >= plain(p) - plain(q)."""
    if not f.dom_masks:
        raise ValueError("the effective domain is empty")
    if not restrict_by_size(f, k).dom_masks:
        raise ValueError(f"no feasible subset of size <= {k}")
    leq = leq_for(f.mode)
    kind, lohi = _box_or_sample_policy(f, grid, box)

    if kind == "explicit":
        vectors = list(grid)
        fk = restrict_by_size(f, k)
        checked = 0
        for p in vectors:
            for q in vectors:
                if not p.dominates(q):
                    continue
                checked += 1
                lhs = conjugate(f, p).value - conjugate(f, q).value
                rhs = conjugate(fk, p).value - conjugate(fk, q).value
                if not leq(lhs, rhs):
                    counter = {"inequality": "strong_quotient", "k": k,
                               "p": list(p.entries), "q": list(q.entries)}
                    return failed_report("duality_grid", instance_id, counter,
                                         triples=checked)
        return passed_report("duality_grid", instance_id, triples=checked)

    lo, hi = lohi
    if kind == "box":
        gridc = _GridCheck(f, lo, hi)
        counter, checked = _sweep_quotient(gridc, gridc.conjugates(k),
                                           gridc.conjugates(), k)
        if counter:
            return failed_report("duality_grid", instance_id, counter, triples=checked)
        return passed_report("duality_grid", instance_id, triples=checked)

    rng = random.Random(seed)
    fk = restrict_by_size(f, k)
    checked = 0
    for _ in range(samples):
        pairs = [sorted((rng.randint(lo, hi), rng.randint(lo, hi))) for _ in range(f.n)]
        q = PriceVector(tuple(a for a, _ in pairs))
        p = PriceVector(tuple(b for _, b in pairs))
        checked += 1
        lhs = conjugate(f, p).value - conjugate(f, q).value
        rhs = conjugate(fk, p).value - conjugate(fk, q).value
        if not leq(lhs, rhs):
            counter = {"inequality": "strong_quotient", "k": k,
                       "p": list(p.entries), "q": list(q.entries)}
            return failed_report("duality_grid", instance_id, counter,
                                 triples=checked, regime="sampled", seed=seed)
    return passed_report("duality_grid", instance_id, triples=checked,
                         regime="sampled", seed=seed)


# ---------------------------------------------------------------------------
# Restrictions induced by an exchange context.


@dataclass(frozen=True)
class RestrictionTriple:
    """The two sides of a multiple exchange as functions of the adopted
    set J on the ground set Y \\ X (reindexed 1..|Y0|, ascending):

        x_side(J)       = f((X \\ I) u J)
        x_side_sized(J) = x_side(J) with |J| capped at |I|
        y_side(J)       = f((Y \\ J) u I)
    """

    x_side: SetFn
    x_side_sized: SetFn
    y_side: SetFn
    ctx: ExchangeContext


def build_restrictions(f, ctx):
    """Materialize the three restricted functions for an exchange context.

    X and Y must lie in the effective domain. All three domains are
    provably nonempty for exchange-valid functions; an empty one raises
    Falsification.
    """
    if f.values[ctx.x_mask] is NEG_INF or f.values[ctx.y_mask] is NEG_INF:
        raise ValueError("X and Y must lie in the effective domain")
    y0 = ctx.y0_mask
    bits = [1 << (e - 1) for e in elements_of(y0)]
    m = len(bits)
    spread = [0]
    for b in bits:
        spread += [g | b for g in spread]
    xbase = ctx.x_mask & ~ctx.i_mask
    ybase = ctx.y_mask | ctx.i_mask
    fvals = f.values
    x_side = SetFn(m, [fvals[xbase | g] for g in spread], f.mode)
    y_side = SetFn(m, [fvals[ybase & ~g] for g in spread], f.mode)
    x_sized = restrict_by_size(x_side, ctx.i_mask.bit_count())
    for name, fn in (("x_side", x_side), ("x_side_sized", x_sized), ("y_side", y_side)):
        if not fn.dom_masks:
            raise Falsification(
                f"{name} restriction has empty domain for X={ctx.X}, Y={ctx.Y}, I={ctx.I}"
            )
    return RestrictionTriple(x_side, x_sized, y_side, ctx)


# ---------------------------------------------------------------------------
# Fenchel gap.


@dataclass(frozen=True)
class FenchelResult:
    """Outcome of the primal/dual comparison for a pair of functions.

    gap is dual - primal (None when the primal is NEG_INF); boundary is
    set when the best dual point touches the search box, which signals
    that the box may be too small. ``certified`` means int mode with an
    exactly attained gap of zero.
    """

    primal: object
    dual: object
    gap: object
    attaining_q: PriceVector | None
    box: int
    boundary: bool
    certified: bool
    mode: str

    def to_dict(self):
        return {
            "primal": None if self.primal is NEG_INF else self.primal,
            "dual": None if self.dual is NEG_INF else self.dual,
            "gap": self.gap,
            "attaining_q": list(self.attaining_q.entries) if self.attaining_q else None,
            "box": self.box,
            "boundary": self.boundary,
            "certified": self.certified,
            "mode": self.mode,
        }


def _spread(f):
    finite = [f.values[m] for m in f.dom_masks]
    return max(finite) - min(finite)


def _dom_arrays(f, negate=False):
    masks = np.array(f.dom_masks, dtype=np.int64)
    vals = np.array([f.values[m] for m in f.dom_masks],
                    dtype=np.int64 if f.mode == "int" else np.float64)
    return masks, -vals if negate else vals


def _indicator_matrix(n):
    masks = np.arange(1 << n, dtype=np.int64)
    return np.stack([(masks >> j) & 1 for j in range(n)], axis=0)


def _shell_points(n, r, cache):
    """Integer points of the box [-r, r]^n with max-norm exactly r, in
    lexicographic order."""
    key = (n, r)
    if key in cache:
        return cache[key]
    if r == 0:
        pts = np.zeros((1, n), dtype=np.int64)
    elif n == 1:
        pts = np.array([[-r], [r]], dtype=np.int64)
    else:
        blocks = []
        for q1 in range(-r, r + 1):
            inner = _box_points(n - 1, -r, r) if abs(q1) == r \
                else _shell_points(n - 1, r, cache)
            col = np.full((len(inner), 1), q1, dtype=np.int64)
            blocks.append(np.hstack([col, inner]))
        pts = np.vstack(blocks)
    cache[key] = pts
    return pts


_CHUNK = 50_000


def fenchel_gap(f1, f2, box=None):
    """Primal max of f1 + f2 against the dual scan of g1(q) + g2(-q) over
    the integer box [-L, L]^n.

    The box defaults to spread(f1) + spread(f2) + 1, which contains an
    attaining point whenever one exists. Points are scanned shell by
    shell outward from the origin; in int mode the scan stops at the
    first q attaining the primal (weak duality makes it the minimum).
    In real mode the result is a weak-duality report only (best dual
    found, no attainment certificate).
    """
    if f1.n != f2.n:
        raise ValueError(f"ground sets differ: {f1.n} vs {f2.n}")
    if f1.mode != f2.mode:
        raise ValueError(f"mode mismatch: {f1.mode!r} vs {f2.mode!r}")
    if not f1.dom_masks or not f2.dom_masks:
        raise ValueError("the effective domain is empty")
    n = f1.n
    mode = f1.mode
    primal = max_over(ext_add(a, b) for a, b in zip(f1.values, f2.values))
    if box is None:
        spread_sum = _spread(f1) + _spread(f2)
        box = int(np.ceil(spread_sum)) + 1 if mode == "real" else spread_sum + 1
    exact = mode == "int"

    if n == 0:
        dual = f1.values[0] + f2.values[0]
        gap = None if primal is NEG_INF else dual - primal
        return FenchelResult(primal, dual, gap, PriceVector(()), box, False,
                             exact and gap == 0, mode)

    masks1, vals1 = _dom_arrays(f1)
    masks2, vals2 = _dom_arrays(f2)
    ind = _indicator_matrix(n)
    cache = {}
    best = None
    best_q = None
    best_shell = None
    target = primal if (exact and primal is not NEG_INF) else None

    for r in range(box + 1):
        pts = _shell_points(n, r, cache)
        for start in range(0, len(pts), _CHUNK):
            chunk = pts[start:start + _CHUNK]
            psum = chunk @ ind  # (rows, 2^n) subset prices
            g1 = (vals1 - psum[:, masks1]).max(axis=1)
            g2 = (vals2 + psum[:, masks2]).max(axis=1)
            d = g1 + g2
            if target is not None:
                hits = np.nonzero(d == target)[0]
                if len(hits):
                    q = PriceVector(tuple(int(x) for x in chunk[hits[0]]))
                    return FenchelResult(primal, target, 0, q, box, r == box,
                                         True, mode)
            idx = int(np.argmin(d))
            if best is None or d[idx] < best:
                best = d[idx]
                best_q = tuple(chunk[idx])
                best_shell = r

    dual = int(best) if exact else float(best)
    boundary = best_shell == box
    if primal is NEG_INF:
        gap = None
        attaining = None
        certified = False
    else:
        gap = dual - primal
        attaining = PriceVector(tuple(int(x) for x in best_q)) if exact and gap == 0 else None
        certified = exact and gap == 0
    return FenchelResult(primal, dual, gap, attaining, box, boundary, certified, mode)


def check_lemma6_bound(f, ctx, *, box=3, samples=DEFAULT_SAMPLES, seed=0,
                       instance_id=""):
    """For the restricted pair of an exchange context, every integer q in
    the box satisfies sized_x_conj(q) + y_conj(-q) >= f(X) + f(Y)."""
    triple = build_restrictions(f, ctx)
    target = f.values[ctx.x_mask] + f.values[ctx.y_mask]
    m = triple.y_side.n
    leq = leq_for(f.mode)
    npoints = (2 * box + 1) ** m
    exhaustive = npoints <= 100_000
    rng = random.Random(seed)
    checked = 0

    def qs():
        if exhaustive:
            yield from product(range(-box, box + 1), repeat=m)
        else:
            for _ in range(samples):
                yield tuple(rng.randint(-box, box) for _ in range(m))

    for q in qs():
        qv = PriceVector(q)
        checked += 1
        lhs = conjugate(triple.x_side_sized, qv).value + conjugate(triple.y_side, -qv).value
        if not leq(target, lhs):
            counter = {"q": list(q), "bound": _none_if_neg_inf(target), "value": lhs,
                       "X": list(ctx.X), "Y": list(ctx.Y), "I": list(ctx.I)}
            return failed_report("lemma6_bound", instance_id, counter,
                                 triples=checked,
                                 regime="exhaustive" if exhaustive else "sampled",
                                 seed=None if exhaustive else seed)
    return passed_report("lemma6_bound", instance_id, triples=checked,
                         regime="exhaustive" if exhaustive else "sampled",
                         seed=None if exhaustive else seed)


def _none_if_neg_inf(v):
    return None if v is NEG_INF else v
