"""SVD-based numerical rank with margin diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_RTOL = 1e-8
# a gap narrower than this factor on either side of the cut is flagged
MARGIN_WARN = 10.0


@dataclass(frozen=True)
class RankInfo:
    rank: int
    sigma_max: float
    smallest_kept: float  # relative to sigma_max; nan when rank == 0
    largest_dropped: float  # relative to sigma_max; 0 when nothing dropped
    rtol: float

    @property
    def tight(self) -> bool:
        """True when a singular value sits within ``MARGIN_WARN`` of the cut."""
        if self.rank and self.smallest_kept < MARGIN_WARN * self.rtol:
            return True
        return self.largest_dropped > self.rtol / MARGIN_WARN

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "sigma_max": self.sigma_max,
            "smallest_kept_rel": self.smallest_kept,
            "largest_dropped_rel": self.largest_dropped,
            "rtol": self.rtol,
            "tight": self.tight,
        }


def numerical_rank(mat, rtol: float = RANK_RTOL) -> RankInfo:
    """Count singular values above ``rtol * sigma_max``."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.size == 0:
        return RankInfo(0, 0.0, float("nan"), 0.0, rtol)
    s = np.linalg.svd(mat, compute_uv=False)
    smax = float(s[0])
    if smax <= 1e-300:
        return RankInfo(0, 0.0, float("nan"), 0.0, rtol)
    rel = s / smax
    rank = int(np.sum(rel > rtol))
    kept = float(rel[rank - 1]) if rank else float("nan")
    dropped = float(rel[rank]) if rank < rel.size else 0.0
    return RankInfo(rank, smax, kept, dropped, rtol)


def null_space(mat, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``mat``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    ncols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(mat, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 1e-300 else 0
    return vt[rank:].T.copy()


def orthonormal_complement(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    basis = np.asarray(basis, dtype=np.float64)
    return null_space(basis.T, rtol=1e-12)
