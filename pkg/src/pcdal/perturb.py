"""Invertible spatial transforms used to perturb inputs and realign predictions.

Kinds: identity, flip_h (reverse the width axis), flip_v (reverse the height
axis), flip_hv (both), rot90/rot180/rot270 (in-plane rotations, clockwise when
row 0 is at the top and column 0 at the left). A Perturbation may chain several
kinds (applied left to right, serialized "rot90+flip_v") so composed variants
are expressible as single set members. For rank-3 volumes the acting plane is
configurable and defaults to (height, width).
"""

from dataclasses import dataclass

import numpy as np

from .errors import LayoutError, ShapeError

KINDS = ("identity", "flip_h", "flip_v", "flip_hv", "rot90", "rot180", "rot270")

_INVERSE = {
    "identity": "identity",
    "flip_h": "flip_h",
    "flip_v": "flip_v",
    "flip_hv": "flip_hv",
    "rot90": "rot270",
    "rot180": "rot180",
    "rot270": "rot90",
}

_ROT_STEPS = {"rot90": -1, "rot180": 2, "rot270": 1}  # np.rot90 counts ccw


@dataclass(frozen=True)
class Perturbation:
    kinds: tuple = ("identity",)
    plane: tuple = ("height", "width")

    def __post_init__(self):
        kinds = self.kinds
        if isinstance(kinds, str):
            kinds = tuple(kinds.split("+"))
        else:
            kinds = tuple(kinds)
        if not kinds:
            raise ValueError("empty perturbation chain")
        for k in kinds:
            if k not in KINDS:
                raise ValueError(f"unknown perturbation kind {k!r}")
        object.__setattr__(self, "kinds", kinds)
        plane = tuple(self.plane)
        if len(plane) != 2 or plane[0] == plane[1]:
            raise LayoutError(f"plane must name two distinct axes, got {plane}")
        for name in plane:
            if name not in ("depth", "height", "width"):
                raise LayoutError(f"unknown plane axis {name!r}")
        object.__setattr__(self, "plane", plane)

    @property
    def name(self):
        return "+".join(self.kinds)

    def __str__(self):
        return self.name


def parse_perturbation(name, plane=("height", "width")):
    return Perturbation(name, plane)


def inverse(p: Perturbation) -> Perturbation:
    """The perturbation undoing p; chains invert in reverse order."""
    return Perturbation(tuple(_INVERSE[k] for k in reversed(p.kinds)), p.plane)


def _plane_axes(p, roles, rank):
    roles.validate(rank)
    axes = []
    for role_name in p.plane:
        ax = roles.axis_for(role_name)
        if ax is None:
            raise LayoutError(f"perturbation needs a {role_name} axis but none is set")
        axes.append(ax)
    return axes[0], axes[1]


def _apply_kind(kind, arr, v_ax, h_ax):
    # v_ax plays the height role of the plane, h_ax the width role
    if kind == "identity":
        return arr
    if kind == "flip_h":
        return np.flip(arr, axis=h_ax)
    if kind == "flip_v":
        return np.flip(arr, axis=v_ax)
    if kind == "flip_hv":
        return np.flip(np.flip(arr, axis=h_ax), axis=v_ax)
    if arr.shape[v_ax] != arr.shape[h_ax]:
        raise ShapeError(
            f"{kind} needs square plane extents, got "
            f"{arr.shape[v_ax]}x{arr.shape[h_ax]}"
        )
    return np.rot90(arr, _ROT_STEPS[kind], axes=(v_ax, h_ax))


def apply(p: Perturbation, t, roles) -> np.ndarray:
    """Transform the spatial plane of `t`; the class axis is never touched."""
    arr = np.asarray(t)
    v_ax, h_ax = _plane_axes(p, roles, arr.ndim)
    for kind in p.kinds:
        arr = _apply_kind(kind, arr, v_ax, h_ax)
    return np.ascontiguousarray(arr)


def realign(p: Perturbation, prediction, roles) -> np.ndarray:
    """Undo p on a prediction produced from a p-perturbed input.

    A prediction with no spatial axes (classification) has nothing to undo and
    passes through unchanged.
    """
    if all(roles.axis_for(name) is None for name in ("depth", "height", "width")):
        return np.asarray(prediction)
    return apply(inverse(p), prediction, roles)


class PerturbationSet:
    """Ordered perturbation collection; identity first, no duplicates."""

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("perturbation set is empty")
        if members[0].kinds != ("identity",):
            raise ValueError("perturbation set must start with identity")
        seen = set()
        for m in members:
            key = (m.kinds, m.plane)
            if key in seen:
                raise ValueError(f"duplicate perturbation {m.name}")
            seen.add(key)
        self.members = members

    @classmethod
    def default(cls, plane=("height", "width")):
        return cls.from_names(["identity", "flip_h", "flip_v", "flip_hv"], plane)

    @classmethod
    def from_names(cls, names, plane=("height", "width")):
        return cls([Perturbation(n, plane) for n in names])

    @property
    def names(self):
        return tuple(m.name for m in self.members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]
