"""Bundled example instances shared by the CLI and the verification suite."""

from __future__ import annotations

from . import actions, groups, measures, spaces
from .exact import rational


def lattice_instance(k=2):
    """Z^k lattice with its full translation action and counting measure."""
    action = actions.LeftTranslationAction(groups.FreeAbelianFamily(k))
    origin = action.family.identity()
    return action.space, action, measures.counting_measure(action, origin)


def free_instance(k=2):
    """Free-group Cayley tree with left translation and counting measure."""
    action = actions.LeftTranslationAction(groups.FreeFamily(k))
    return action.space, action, measures.counting_measure(action, ())


def atom_instance():
    action = actions.LeftTranslationAction(groups.TrivialFamily())
    return action.space, action, measures.counting_measure(action, ())


def torus_instance(m, k=2):
    """Z^k lattice with the (m Z)^k sublattice translation action."""
    space = spaces.CayleySpace(groups.FreeAbelianFamily(k))
    matrix = [[m if i == j else 0 for j in range(k)] for i in range(k)]
    action = actions.LatticeTranslationAction(space, matrix)
    origin = (0,) * k
    return space, action, measures.counting_measure(action, origin)


def glued_line_instance(r0="1", eps="1/10", window=None):
    """The hairy-line family: hair length r0/2 glued at every eps*k.

    This is the family whose counting measure defeats every concentric
    growth bound as eps shrinks; the natural first radius to probe is
    r0 + eps at a hair tip.
    """
    r0, eps = rational(r0), rational(eps)
    if window is None:
        # enough hairs to scan ratios out to ~3 r0 around a tip
        window = int(4 * r0 / eps) + 4
    space = spaces.GluedLineSpace(eps, r0 / 2, window)
    action = actions.GluedLineShiftAction(space)
    measure = measures.counting_measure(action, space.tip(0))
    return space, action, measure


def line_translation_instance(m):
    """Z acting on the integer line by translation by m."""
    space = spaces.CayleySpace(groups.FreeAbelianFamily(1))
    action = actions.LatticeTranslationAction(space, [[m]])
    return space, action, measures.counting_measure(action, (0,))
