"""Set algebra over per-view visibility: innovation sets, view similarity,
and the deduplicated innovation of a whole segment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def pairwise_innovation(ids_a: np.ndarray, ids_b: np.ndarray) -> np.ndarray:
    """Voxels visible in A but not in B (sorted ids)."""
    return np.setdiff1d(ids_a, ids_b, assume_unique=True)


def similarity(ids_a: np.ndarray, ids_b: np.ndarray) -> int:
    """Number of voxels the two views share."""
    return int(np.intersect1d(ids_a, ids_b, assume_unique=True).size)


@dataclass(frozen=True)
class SegmentInnovation:
    """Innovation of a segment: reference view plus the extra voxels its
    members need, each voxel counted once."""

    reference: int
    members: tuple
    phi: np.ndarray

    @property
    def size(self) -> int:
        return int(self.phi.shape[0])


def segment_innovation(cache, reference: int, members) -> SegmentInnovation:
    """Union of the members' visible sets minus the reference's.

    A voxel missing from the reference is included once no matter how many
    member views need it. The reference must be a member.
    """
    members = tuple(int(m) for m in members)
    if reference not in members:
        raise ValueError("reference view must belong to the segment")
    ref_ids = cache.ids(reference)
    union = [cache.ids(m) for m in members if m != reference]
    if not union:
        phi = np.empty(0, dtype=ref_ids.dtype)
    else:
        phi = np.setdiff1d(
            np.unique(np.concatenate(union)), ref_ids, assume_unique=True
        )
    return SegmentInnovation(reference=reference, members=members, phi=phi)
