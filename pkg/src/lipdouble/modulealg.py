"""Ring contexts, families, module presentations and the ideals built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exactalg.matrix import PolyMatrix, minors, rank_q
from .exactalg.poly import Poly, PolyRing, to_q
from .groebner import groebner_basis, radical_membership

__all__ = [
    "RingContext",
    "VarietyFamily",
    "ModulePresentation",
    "Ideal",
    "PointError",
    "jacobian_modules",
    "minors_ideal",
    "generic_rank",
    "cosupport_ideal",
    "rho_ideal",
    "rank_at_point",
    "check_point",
]


class PointError(ValueError):
    """A point does not lie on the variety."""


@dataclass(frozen=True, eq=False)
class RingContext:
    """Fiber variables ``z``, parameters ``y``, auxiliary variables and the relations of X."""

    z: tuple
    y: tuple = ()
    aux: tuple = ()
    relations: tuple = ()
    irreducible: bool = True

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(self.z))
        object.__setattr__(self, "y", tuple(self.y))
        object.__setattr__(self, "aux", tuple(self.aux))
        ring = PolyRing(self.z + self.y + self.aux)
        object.__setattr__(self, "ring", ring)
        rels = tuple(ring.convert(r) if isinstance(r, Poly) else ring.parse(r) for r in self.relations)
        object.__setattr__(self, "relations", tuple(r for r in rels if r))

    @classmethod
    def ambient(cls, z: Sequence[str], y: Sequence[str] = ()) -> RingContext:
        return cls(tuple(z), tuple(y))

    def parse(self, text) -> Poly:
        if isinstance(text, Poly):
            return self.ring.convert(text)
        if isinstance(text, str):
            return self.ring.parse(text)
        return self.ring.const(text)

    def with_relations(self, rels: Sequence) -> RingContext:
        return RingContext(self.z, self.y, self.aux, tuple(self.relations) + tuple(rels), self.irreducible)

    def m_y(self) -> Ideal:
        """Ideal of the fiber variables (cuts out the parameter axis)."""
        return Ideal(self, [self.ring.var(v) for v in self.z])

    def origin(self) -> dict:
        return {v: mpq(0) for v in self.ring.names}

    def relation_gb(self):
        return groebner_basis(list(self.relations), ring=self.ring)


@dataclass(frozen=True, eq=False)
class VarietyFamily:
    """X defined by F = 0 in (z, y)-space; parameters y, fibers over the y-axis."""

    context: RingContext
    F: tuple

    @classmethod
    def from_polys(cls, z: Sequence[str], y: Sequence[str], F: Sequence, aux: Sequence[str] = (), extra_relations: Sequence = ()) -> VarietyFamily:
        base = RingContext(tuple(z), tuple(y), tuple(aux))
        Fp = tuple(base.parse(f) for f in F)
        if len(Fp) > len(tuple(z)):
            raise ValueError("more equations than fiber variables")
        ctx = RingContext(base.z, base.y, base.aux, Fp + tuple(base.parse(r) for r in extra_relations))
        return cls(ctx, Fp)

    @property
    def ring(self) -> PolyRing:
        return self.context.ring

    @property
    def p(self) -> int:
        return len(self.F)


@dataclass(frozen=True, eq=False)
class ModulePresentation:
    """Submodule of O_X^p generated by the columns of ``matrix``."""

    context: RingContext
    matrix: PolyMatrix

    @classmethod
    def from_columns(cls, context: RingContext, columns: Sequence[Sequence], p: int | None = None) -> ModulePresentation:
        cols = [[context.parse(x) for x in c] for c in columns]
        if p is None:
            if not cols:
                raise ValueError("rank p required for an empty generator list")
            p = len(cols[0])
        return cls(context, PolyMatrix.from_columns(context.ring, cols, p))

    @property
    def p(self) -> int:
        return self.matrix.rows

    @property
    def r(self) -> int:
        return self.matrix.cols

    def columns(self) -> list[list[Poly]]:
        return self.matrix.columns()

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.matrix.entries)

    def times_ideal(self, ideal: Sequence[Poly]) -> ModulePresentation:
        """Generators g*h for g in the ideal generators and h in the module's."""
        cols = [[g * x for x in c] for g in ideal for c in self.columns()]
        return ModulePresentation(self.context, PolyMatrix.from_columns(self.context.ring, cols, self.p))

    def with_column(self, h: Sequence[Poly]) -> ModulePresentation:
        cols = [list(h)] + self.columns()
        return ModulePresentation(self.context, PolyMatrix.from_columns(self.context.ring, cols, self.p))


@dataclass(frozen=True, eq=False)
class Ideal:
    context: RingContext
    gens: list = field(default_factory=list)

    def nonzero(self) -> list[Poly]:
        return [g for g in self.gens if g]

    def is_unit(self) -> bool:
        gens = self.nonzero() + list(self.context.relations)
        return bool(gens) and groebner_basis(gens, ring=self.context.ring).is_unit()

    def __iter__(self):
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)


def jacobian_modules(fam: VarietyFamily) -> tuple[ModulePresentation, ModulePresentation, ModulePresentation]:
    """(JM, JM_Y, J_zM): all partials, parameter partials, fiber partials."""
    ctx = fam.context
    zc = [[f.diff(v) for f in fam.F] for v in ctx.z]
    yc = [[f.diff(v) for f in fam.F] for v in ctx.y]
    p = fam.p
    mk = lambda cols: ModulePresentation(ctx, PolyMatrix.from_columns(ctx.ring, cols, p))
    return mk(zc + yc), mk(yc), mk(zc)


def minors_ideal(M: ModulePresentation, k: int) -> Ideal:
    if not 1 <= k <= min(M.p, M.r):
        raise ValueError(f"minor size {k} out of range 1..{min(M.p, M.r)}")
    seen = []
    for _, _, d in minors(M.matrix, k):
        if d and d not in seen and -d not in seen:
            seen.append(d)
    return Ideal(M.context, seen)


def _not_vanishing_on_X(f: Poly, ctx: RingContext, gb_cache: dict) -> bool:
    if f.is_zero():
        return False
    if "gb" not in gb_cache:
        gb_cache["gb"] = ctx.relation_gb()
    if gb_cache["gb"].reduce(f).is_zero():
        return False
    return not radical_membership(f, list(ctx.relations))


def generic_rank(M: ModulePresentation) -> int:
    """Largest k with a k x k minor not vanishing identically on X."""
    cache: dict = {}
    best = 0
    for k in range(1, min(M.p, M.r) + 1):
        ds = sorted((d for _, _, d in minors(M.matrix, k) if d), key=lambda d: (len(d.terms), d.total_degree()))
        if any(_not_vanishing_on_X(d, M.context, cache) for d in ds):
            best = k
        else:
            break
    return best


def cosupport_ideal(M: ModulePresentation) -> Ideal:
    """J_k(M) + I(X) with k the generic rank; its zero set is the cosupport."""
    k = generic_rank(M)
    ctx = M.context
    if k == 0:
        return Ideal(ctx, [ctx.ring.one])
    return Ideal(ctx, minors_ideal(M, k).gens + list(ctx.relations))


def rho_ideal(M: ModulePresentation, chart: int) -> Ideal:
    """Contractions of the generators with the affine chart T_chart = 1 (1-based)."""
    p = M.p
    if not 1 <= chart <= p:
        raise ValueError(f"chart {chart} out of range 1..{p}")
    ctx = M.context
    taus = [f"tau{j}" for j in range(1, p + 1) if j != chart]
    for t in taus:
        if t in ctx.ring.index:
            raise ValueError(f"chart variable {t} clashes with a context variable")
    ext = RingContext(ctx.z, ctx.y, ctx.aux + tuple(taus), ctx.relations, ctx.irreducible)
    R = ext.ring
    gens = []
    for col in M.columns():
        acc = R.convert(col[chart - 1])
        for j in range(1, p + 1):
            if j != chart:
                acc = acc + R.convert(col[j - 1]) * R.var(f"tau{j}")
        gens.append(acc)
    return Ideal(ext, gens)


def check_point(ctx: RingContext, pt: Mapping[str, object]) -> dict:
    """Complete a point with zeros for unspecified variables and check it lies on X."""
    full = {v: to_q(pt.get(v, 0)) for v in ctx.ring.names}
    for extra in pt:
        if extra not in ctx.ring.index:
            raise PointError(f"unknown coordinate {extra!r}")
    for r in ctx.relations:
        if r.evaluate(full) != 0:
            raise PointError(f"point violates relation {r}")
    return full


def rank_at_point(M: ModulePresentation, pt: Mapping[str, object]) -> int:
    full = check_point(M.context, pt)
    if M.r == 0:
        return 0
    return rank_q(M.matrix.evaluate(full))

