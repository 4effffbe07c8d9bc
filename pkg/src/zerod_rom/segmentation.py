"""
Branch segmentation: automatic stenosis detection and n-segment fitting of
cross-sectional area profiles
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import argrelextrema

from .exceptions import TooFewSamples

logger = logging.getLogger(__name__)

DEFAULT_STENOSIS_THRESHOLD = 1.1


class BranchProfile(BaseModel):
    """Cross-sectional area sampled along the branch path"""
    model_config = ConfigDict(frozen=True)

    branch_id: int
    path: Tuple[float, ...] = Field(..., description="Path length in cm, strictly increasing from 0")
    area: Tuple[float, ...] = Field(..., description="Cross-sectional area in cm^2")

    @model_validator(mode="after")
    def _check_samples(self) -> "BranchProfile":
        if len(self.path) < 2:
            raise ValueError(f"branch {self.branch_id} needs at least 2 samples")
        if len(self.path) != len(self.area):
            raise ValueError(f"branch {self.branch_id}: path and area differ in length")
        if self.path[0] != 0.0:
            raise ValueError(f"branch {self.branch_id}: path must start at 0, got {self.path[0]}")
        if any(b <= a for a, b in zip(self.path, self.path[1:])):
            raise ValueError(f"branch {self.branch_id}: path lengths must be strictly increasing")
        if any(a <= 0.0 for a in self.area):
            raise ValueError(f"branch {self.branch_id}: areas must be positive")
        return self

    @classmethod
    def from_pairs(cls, branch_id: int, samples: Sequence[Sequence[float]]) -> "BranchProfile":
        return cls(
            branch_id=branch_id,
            path=tuple(float(s) for s, _ in samples),
            area=tuple(float(a) for _, a in samples),
        )

    @property
    def length(self) -> float:
        return self.path[-1]

    @property
    def n_samples(self) -> int:
        return len(self.path)


class SegmentRole(str, Enum):
    PROXIMAL = "proximal"
    STENOSIS = "stenosis"
    DISTAL = "distal"
    PLAIN = "plain"


@dataclass(frozen=True)
class Segment:
    """
    Stretch of a branch represented by one vessel element. Stenosis segments
    also carry the healthy area S0 and the stenosed area Ss.
    """
    s_start: float
    s_end: float
    area_start: float
    area_end: float
    role: SegmentRole = SegmentRole.PLAIN
    area_proximal: Optional[float] = None
    area_stenosis: Optional[float] = None

    @property
    def length(self) -> float:
        return self.s_end - self.s_start

    @property
    def mean_radius(self) -> float:
        return 0.5 * (np.sqrt(self.area_start / np.pi) + np.sqrt(self.area_end / np.pi))

    @property
    def effective_area(self) -> float:
        return float(np.pi * self.mean_radius ** 2)


@dataclass
class Segmentation:
    branch_id: int
    segments: List[Segment] = field(default_factory=list)
    sse: float = 0.0
    ratio: Optional[float] = None
    minimum_at: Optional[float] = None

    @property
    def stenoses(self) -> List[Segment]:
        return [s for s in self.segments if s.role == SegmentRole.STENOSIS]


def _plain(profile: BranchProfile) -> Segmentation:
    return Segmentation(
        branch_id=profile.branch_id,
        segments=[Segment(0.0, profile.length, profile.area[0], profile.area[-1])],
    )


def detect_stenosis(profile: BranchProfile, threshold: float = DEFAULT_STENOSIS_THRESHOLD) -> Segmentation:
    """
    Split a branch around its most severe stenosis

    Relative extrema are searched on the profile with runs of equal samples
    collapsed to their first index. Each interior minimum S_s is paired with the
    nearest preceding maximum S0; branch ends count as maxima only.

    Args:
        profile: Area profile of the branch
        threshold: Minimum S0/S_s for a narrowing to count as a stenosis

    Returns:
        Proximal/stenosis/distal segments bounded by the maxima flanking the
        selected minimum, or one plain segment if no stenosis qualifies
    """
    area = np.asarray(profile.area)
    path = np.asarray(profile.path)
    keep = np.concatenate(([0], np.nonzero(np.diff(area) != 0.0)[0] + 1))
    compressed = area[keep]
    m = compressed.size
    if m < 3:
        return _plain(profile)

    minima = argrelextrema(compressed, np.less)[0]
    maxima = list(argrelextrema(compressed, np.greater)[0])
    if compressed[0] > compressed[1]:
        maxima.insert(0, 0)
    if compressed[-1] > compressed[-2]:
        maxima.append(m - 1)

    best: Optional[Tuple[float, int, int, int]] = None
    for j in minima:
        before = [p for p in maxima if p < j]
        after = [q for q in maxima if q > j]
        if not before or not after:
            continue
        p, q = before[-1], after[0]
        ratio = compressed[p] / compressed[j]
        if ratio >= threshold and (best is None or ratio > best[0]):
            best = (ratio, p, int(j), q)

    if best is None:
        return _plain(profile)

    ratio, p, j, q = best
    n = area.size
    # plateau maxima are cut at their first sample on both sides
    lo = keep[p]
    hi = keep[q]
    s0 = float(compressed[p])
    ss = float(compressed[j])
    logger.info(
        f"Branch {profile.branch_id}: stenosis at s={path[keep[j]]:.4g} cm, "
        f"S0/Ss={ratio:.4g}, split at s={path[lo]:.4g} and s={path[hi]:.4g}"
    )

    pieces = [
        (0, lo, SegmentRole.PROXIMAL),
        (lo, hi, SegmentRole.STENOSIS),
        (hi, n - 1, SegmentRole.DISTAL),
    ]
    segments = []
    for a, b, role in pieces:
        if b <= a:
            logger.warning(f"Branch {profile.branch_id}: dropped empty {role.value} segment")
            continue
        segments.append(
            Segment(
                s_start=float(path[a]),
                s_end=float(path[b]),
                area_start=float(area[a]),
                area_end=float(area[b]),
                role=role,
                area_proximal=s0 if role == SegmentRole.STENOSIS else None,
                area_stenosis=ss if role == SegmentRole.STENOSIS else None,
            )
        )
    return Segmentation(
        branch_id=profile.branch_id,
        segments=segments,
        ratio=float(ratio),
        minimum_at=float(path[keep[j]]),
    )


def piece_sse(profile: BranchProfile, start: int, stop: int) -> float:
    """
    Squared deviation of samples start..stop (inclusive) from the chord joining
    the samples at both ends. Adjacent pieces share their breakpoint sample.
    """
    if stop - start < 2:
        return 0.0
    path = np.asarray(profile.path[start:stop + 1])
    area = np.asarray(profile.area[start:stop + 1])
    run = path[-1] - path[0]
    # scaled by the run so that samples on the chord give exactly zero
    resid = ((area - area[0]) * run - (area[-1] - area[0]) * (path - path[0])) / run
    return float(np.dot(resid, resid))


def fit_segments(
    profile: BranchProfile,
    n: int,
    threshold: Optional[float] = DEFAULT_STENOSIS_THRESHOLD
) -> Segmentation:
    """
    Split a branch into n segments with breakpoints at sample locations

    The fit is continuous and piecewise linear, passing through the samples at
    the breakpoints. Breakpoints minimize its total squared error (dynamic
    programming, earlier breakpoints win ties).

    Args:
        profile: Area profile of the branch
        n: Number of segments
        threshold: Area ratio to the upstream neighbour above which a segment is
            marked as a stenosis; None disables marking

    Returns:
        Segmentation with n segments and the total squared error
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n_samples = profile.n_samples
    if n_samples < n + 1:
        raise TooFewSamples(
            f"Branch {profile.branch_id} has {n_samples} samples, {n + 1} needed for {n} segments"
        )

    last = n_samples - 1
    cost = {}

    def sse(i: int, j: int) -> float:
        key = (i, j)
        if key not in cost:
            cost[key] = piece_sse(profile, i, j)
        return cost[key]

    if n > 1:
        # best[k][j]: least error of k pieces covering samples 0..j
        best = {1: {j: sse(0, j) for j in range(1, last)}}
        back = {}
        for k in range(2, n):
            best[k] = {}
            back[k] = {}
            for j in range(k, last):
                value, arg = None, None
                for i in range(k - 1, j):
                    candidate = best[k - 1][i] + sse(i, j)
                    if value is None or candidate < value:
                        value, arg = candidate, i
                best[k][j] = value
                back[k][j] = arg
        total, b_last = None, None
        for i in range(n - 1, last):
            candidate = best[n - 1][i] + sse(i, last)
            if total is None or candidate < total:
                total, b_last = candidate, i
        breaks = [b_last]
        for k in range(n - 1, 1, -1):
            breaks.append(back[k][breaks[-1]])
        breaks = [0] + breaks[::-1] + [last]
    else:
        total = sse(0, last)
        breaks = [0, last]

    path = profile.path
    area = profile.area
    segments = [
        Segment(path[a], path[b], area[a], area[b])
        for a, b in zip(breaks, breaks[1:])
    ]
    if threshold is not None:
        segments = _mark_stenoses(segments, threshold)
    logger.debug(f"Branch {profile.branch_id}: {n} segments, breakpoints {breaks[1:-1]}, SSE {total:.4g}")
    return Segmentation(branch_id=profile.branch_id, segments=segments, sse=float(total))


def _mark_stenoses(segments: List[Segment], threshold: float) -> List[Segment]:
    marked = [segments[0]]
    for upstream, seg in zip(segments, segments[1:]):
        s0 = upstream.effective_area
        ss = seg.effective_area
        if s0 / ss >= threshold:
            seg = Segment(
                seg.s_start, seg.s_end, seg.area_start, seg.area_end,
                role=SegmentRole.STENOSIS, area_proximal=s0, area_stenosis=ss,
            )
        marked.append(seg)
    return marked
