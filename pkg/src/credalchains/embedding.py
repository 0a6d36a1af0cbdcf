"""Conditional embedding and explicit joint models on product frames.

A conditional model for a link parent -> child is one mass function on the
child frame per parent state.  Each of them lifts to the product frame as

  m(parent_i x V  union  (all other parents) x child) = m_i(V),

and combining the lifts with Dempster's rule (always conflict-free) yields
the conditional mass on the product.  Combining that with the vacuously
extended parent mass gives the joint, whose focal sets are exactly the
unions of one child-set per parent state in a focal set of the parent mass,
with mass equal to the corresponding product.

The explicit constructions here blow up exponentially in the chain length
and are meant for verification at small sizes; ``mass_step`` is the
equivalent linear-size step used by production inference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, StructuralError
from .intervals import TOL_INTERNAL, Frame
from .mass import MassFunction, ProductFrame, combine_dempster, marginalize_to, vacuous_extend


@dataclass(frozen=True)
class ConditionalMassTable:
    """One child-frame mass function per parent state."""

    parent: Frame
    child: Frame
    masses: tuple[MassFunction, ...]

    def __post_init__(self):
        if len(self.masses) != self.parent.size:
            raise StructuralError("need exactly one mass function per parent state")
        for m in self.masses:
            if m.frame != self.child:
                raise StructuralError("conditional mass on the wrong frame")
        object.__setattr__(self, "masses", tuple(self.masses))


def _embedded_single(table: ConditionalMassTable, i: int, product: ProductFrame) -> MassFunction:
    n, m = table.parent.size, table.child.size
    child_block = (1 << m) - 1
    others = 0
    for h in range(n):
        if h != i:
            others |= child_block << (h * m)
    out = {}
    for v, w in table.masses[i].items():
        out[(v << (i * m)) | others] = w
    return MassFunction(product, out)


def embed_conditional(table: ConditionalMassTable) -> MassFunction:
    """Conditional mass on parent x child via conditional embedding."""
    product = ProductFrame((table.parent, table.child))
    combined = _embedded_single(table, 0, product)
    for i in range(1, table.parent.size):
        combined, k = combine_dempster(combined, _embedded_single(table, i, product))
        if k > TOL_INTERNAL:
            raise DomainError(f"embedded conditionals produced conflict k={k}")
    return combined


def joint(m_prior: MassFunction, m_cond: MassFunction) -> MassFunction:
    """Joint mass on parent x child from a parent mass and an embedded conditional."""
    if not isinstance(m_cond.frame, ProductFrame) or len(m_cond.frame.factors) != 2:
        raise StructuralError("conditional mass must live on a two-factor product")
    if m_prior.frame != m_cond.frame.factors[0]:
        raise StructuralError("prior frame is not the parent of the conditional")
    lifted = vacuous_extend(m_prior, m_cond.frame, positions=(0,))
    combined, k = combine_dempster(lifted, m_cond)
    if k > TOL_INTERNAL:
        raise DomainError(f"joint construction produced conflict k={k}")
    return combined


def mass_step(m_parent: MassFunction, cond_masses: Sequence[MassFunction]) -> MassFunction:
    """Marginal mass on the child after one chain step (local computation).

    Equivalent to building the joint explicitly and marginalizing to the
    child, but runs over focal sets of the parent marginal only: for each
    parent focal V, the child marginal receives the union-convolution of the
    conditional masses of the states in V.
    """
    parent = m_parent.frame
    if not isinstance(parent, Frame):
        raise StructuralError("parent mass must live on a plain frame")
    if len(cond_masses) != parent.size:
        raise StructuralError("need one conditional mass per parent state")
    child = cond_masses[0].frame
    for cm in cond_masses:
        if cm.frame != child:
            raise StructuralError("conditional masses on inconsistent frames")
    out: dict[int, float] = {}
    for v, w in m_parent.items():
        dist = {0: w}
        for i in range(parent.size):
            if not (v >> i) & 1:
                continue
            nxt: dict[int, float] = {}
            for part, p in dist.items():
                for t, q in cond_masses[i].items():
                    key = part | t
                    nxt[key] = nxt.get(key, 0.0) + p * q
            dist = nxt
        for part, p in dist.items():
            out[part] = out.get(part, 0.0) + p
    return MassFunction(child, out)


def full_chain_joint(
    prior: MassFunction, links: Sequence[Sequence[MassFunction]]
) -> MassFunction:
    """Marginal at the last chain node via the explicit full joint.

    Builds the product-frame joint over all nodes, marginalizes to the last
    frame, and cross-checks the result against the stepwise ``mass_step``
    propagation; the two must agree to within 1e-12.  Guarded to small
    instances (at most 4 nodes of at most 4 states) because the joint has
    exponentially many focal sets.
    """
    frames = [prior.frame]
    for link in links:
        frames.append(link[0].frame)
    if len(frames) > 4 or any(f.size > 4 for f in frames):
        raise DomainError("full joint construction is limited to <= 4 nodes of <= 4 states")
    running = prior
    running_factors = [prior.frame]
    for link in links:
        parent = running_factors[-1]
        child = link[0].frame
        table = ConditionalMassTable(parent, child, tuple(link))
        embedded = embed_conditional(table)
        target_factors = tuple(running_factors) + (child,)
        target = ProductFrame(target_factors)
        if len(running_factors) == 1:
            lifted = vacuous_extend(running, target, positions=(0,))
        else:
            lifted = vacuous_extend(running, target, positions=tuple(range(len(running_factors))))
        cond_lifted = vacuous_extend(
            embedded, target, positions=(len(running_factors) - 1, len(running_factors))
        )
        running, k = combine_dempster(lifted, cond_lifted)
        if k > TOL_INTERNAL:
            raise DomainError(f"chain joint produced conflict k={k}")
        running_factors.append(child)
    marginal = marginalize_to(running, (len(running_factors) - 1,))

    stepwise = prior
    for link in links:
        stepwise = mass_step(stepwise, link)
    if not marginal.allclose(stepwise, tol=1e-12):
        raise DomainError("full joint and stepwise propagation disagree")
    return marginal
