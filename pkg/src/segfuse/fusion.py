"""Per-pixel hard voting over aligned prediction maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyStack, MemberShapeMismatch
from .labelcore import LabelMap


@dataclass(frozen=True)
class VoteStack:
    members: tuple
    member_ids: tuple = ()

    def __post_init__(self):
        members = tuple(self.members)
        ids = tuple(self.member_ids) or tuple(f"member{i}" for i in range(len(members)))
        if not members:
            raise EmptyStack("a vote stack needs at least one member")
        if len(ids) != len(members):
            raise ValueError(f"{len(members)} members but {len(ids)} member ids")
        first = members[0]
        for mid, m in zip(ids, members):
            if m.shape != first.shape:
                raise MemberShapeMismatch(
                    f"member {mid!r} is {m.width}x{m.height}, expected {first.width}x{first.height}"
                )
            if m.ignore_index != first.ignore_index:
                raise MemberShapeMismatch(f"member {mid!r} uses a different ignore index")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "member_ids", ids)

    def __len__(self):
        return len(self.members)


def _plurality(stack: VoteStack):
    votes = np.stack([m.data for m in stack.members])
    best_label = votes[0].copy()
    best_count = np.zeros(votes.shape[1:], dtype=np.int32)
    # ascending label order + strict ">" means the smallest label wins a tie
    for label in np.unique(votes):
        count = (votes == label).sum(axis=0, dtype=np.int32)
        better = count > best_count
        best_label[better] = label
        best_count[better] = count[better]
    return best_label, best_count


def hard_vote(stack: VoteStack) -> LabelMap:
    """Plurality label per pixel; ties go to the smallest label.

    The ignore index votes like any other label, so a pixel that every
    member ignores stays ignored. Voter order never affects the result.
    """
    label, _ = _plurality(stack)
    return LabelMap(label, stack.members[0].ignore_index)


def agreement_map(stack: VoteStack) -> np.ndarray:
    """Fraction of members that voted for the winning label, per pixel."""
    _, count = _plurality(stack)
    return count / len(stack)
