"""
Structural edits to a wavelet basis

Splitting replaces a function by its mask-weighted children one scale
finer (AWR), combining adds a zero-weight product of two functions over
disjoint dimensions (IBFDD), and the multiscale controller (MAWB)
alternates between the two. Every edit leaves Q(s, a) unchanged at the
instant it is applied.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .basis import BasisSet, FunctionKind, support_volume
from .exceptions import StructuralEditError
from .relevance import RelevanceStats, criterion, record, rho
from .wavelet import WaveletAtom, clipped_length

if TYPE_CHECKING:
    from models import AdaptiveConfig

logger = logging.getLogger(__name__)

SPLIT = 'split'
COMBINE = 'combine'

ParentPair = Tuple[int, int]


@dataclass
class CandidateConjunction:
    """A potential product feature and its relevance statistics"""
    parents: ParentPair
    atoms: Tuple[WaveletAtom, ...]
    stats: RelevanceStats

    @property
    def key(self):
        return (FunctionKind.WAVELET.value, self.atoms)


@dataclass
class StructuralEdit:
    kind: str
    source_ids: Tuple[int, ...]
    new_ids: Tuple[int, ...]
    score: float
    size_after: int
    step: int = -1
    episode: int = -1


def choose_split_dim(function, max_scale: Optional[int] = None) -> Optional[int]:
    """Coarsest atom below the scale cap, ties to the lowest dimension"""
    eligible = [
        atom for atom in function.atoms
        if max_scale is None or atom.scale < max_scale
    ]
    if not eligible:
        return None
    return min(eligible, key=lambda atom: (atom.scale, atom.dim)).dim


def _split_children(function, dim: int) -> List[Tuple[float, Tuple[WaveletAtom, ...]]]:
    """Children in the domain, as (mask coefficient, atoms) pairs"""
    parent = function.atom_for(dim)
    others = tuple(atom for atom in function.atoms if atom.dim != dim)
    children = []
    for coeff, child in parent.children():
        # Zero everywhere on [0, 1]; its weight contribution vanishes there
        if clipped_length(child) <= 0.0:
            continue
        atoms = tuple(sorted(others + (child,), key=lambda a: a.dim))
        children.append((coeff, atoms))
    return children


def split_growth(basis: BasisSet, fid: int, dim: int) -> int:
    """Net change in basis size if fid were split along dim"""
    function = basis.function(fid)
    fresh = sum(
        1 for _, atoms in _split_children(function, dim)
        if basis.find((FunctionKind.WAVELET.value, atoms)) is None
    )
    return fresh - 1


def split_feature(
    basis: BasisSet,
    fid: int,
    dim: int,
    max_scale: Optional[int] = None,
) -> List[int]:
    """
    Replace a function by its children along one dimension

    Each child carries the parent's weights and traces times its mask
    coefficient. A child identical to an existing function is merged into
    it instead of being inserted twice.

    Args:
        basis: Basis to edit in place
        fid: Id of the wavelet function to split
        dim: Dimension whose atom is refined
        max_scale: Optional cap on atom scale

    Returns:
        Ids of the functions now carrying the children (new or merged)
    """
    function = basis.function(fid)
    if function.kind != FunctionKind.WAVELET:
        raise StructuralEditError(f'cannot split {function.kind.value} function {fid}')
    atom = function.atom_for(dim)
    if atom is None:
        raise StructuralEditError(f'function {fid} has no atom in dimension {dim}')
    if max_scale is not None and atom.scale >= max_scale:
        raise StructuralEditError(
            f'function {fid} is already at scale {atom.scale} in dimension {dim} (cap {max_scale})'
        )

    pos = basis.position(fid)
    parent_weights = basis.weights[:, pos].copy()
    parent_traces = basis.traces[:, pos].copy()
    children = _split_children(function, dim)
    basis.remove_function(fid)

    child_ids = []
    for coeff, atoms in children:
        key = (FunctionKind.WAVELET.value, atoms)
        existing = basis.find(key)
        if existing is not None:
            basis.accumulate(existing, coeff * parent_weights, coeff * parent_traces)
            child_ids.append(existing)
        else:
            child_ids.append(basis.add_function(
                FunctionKind.WAVELET,
                atoms=atoms,
                weights=coeff * parent_weights,
                traces=coeff * parent_traces,
            ))
    logger.info(f'Split function {fid} along dim {dim} (scale {atom.scale} -> {atom.scale + 1}) into {child_ids}')
    return child_ids


def combine_features(basis: BasisSet, parent_a: int, parent_b: int) -> int:
    """Add the zero-weight product of two functions over disjoint dimensions"""
    fa, fb = basis.function(parent_a), basis.function(parent_b)
    if fa.kind != FunctionKind.WAVELET or fb.kind != FunctionKind.WAVELET:
        raise StructuralEditError('only wavelet functions can be combined')
    if fa.dims & fb.dims:
        raise StructuralEditError(
            f'functions {parent_a} and {parent_b} share dimensions {sorted(fa.dims & fb.dims)}'
        )
    return basis.add_function(FunctionKind.WAVELET, atoms=fa.atoms + fb.atoms)


def new_stats(basis: BasisSet, fid: int, eps: float) -> RelevanceStats:
    return RelevanceStats(omega=support_volume(basis.function(fid)), eps=eps)


def _purge_candidates(basis: BasisSet, candidates: Dict[ParentPair, CandidateConjunction]):
    """Drop candidates whose parents left the basis or whose product already exists"""
    stale = [
        key for key, cand in candidates.items()
        if cand.parents[0] not in basis
        or cand.parents[1] not in basis
        or basis.find(cand.key) is not None
    ]
    for key in stale:
        del candidates[key]


def awr_check(
    basis: BasisSet,
    stats: Dict[int, RelevanceStats],
    config: 'AdaptiveConfig',
    candidates: Optional[Dict[ParentPair, CandidateConjunction]] = None,
) -> Optional[StructuralEdit]:
    """
    Split the function with the largest criterion C if C exceeds tau_split

    Only functions with an atom below max_scale compete. Children receive
    fresh statistics and the parent's are discarded. The basis size cap
    turns the edit into a logged no-op.
    """
    scored = [
        (criterion(stats[f.id]), f)
        for f in basis.functions
        if f.kind == FunctionKind.WAVELET
        and f.id in stats
        and choose_split_dim(f, config.max_scale) is not None
    ]
    if not scored:
        logger.debug(f'AWR: no tracked function below the scale cap {config.max_scale}')
        return None
    best_c, best = max(scored, key=lambda item: (item[0], -item[1].id))
    if not best_c > config.tau_split:
        logger.debug(f'AWR: max C {best_c:.6g} (function {best.id}) not above tau_split')
        return None

    dim = choose_split_dim(best, config.max_scale)
    if len(basis) + split_growth(basis, best.id, dim) > config.max_features:
        logger.warning(f'AWR: splitting function {best.id} would exceed {config.max_features} functions')
        return None

    child_ids = split_feature(basis, best.id, dim, config.max_scale)
    stats.pop(best.id, None)
    for cid in child_ids:
        if cid not in stats:
            stats[cid] = new_stats(basis, cid, config.eps)
    if candidates is not None:
        _purge_candidates(basis, candidates)
    return StructuralEdit(
        kind=SPLIT,
        source_ids=(best.id,),
        new_ids=tuple(child_ids),
        score=best_c,
        size_after=len(basis),
    )


def ibfdd_check(
    basis: BasisSet,
    candidates: Dict[ParentPair, CandidateConjunction],
    config: 'AdaptiveConfig',
    stats: Optional[Dict[int, RelevanceStats]] = None,
) -> Optional[StructuralEdit]:
    """
    Promote the candidate with the largest |rho| if it exceeds tau_combine

    The product enters with zero weight and zero trace for every action.
    """
    _purge_candidates(basis, candidates)
    if not candidates:
        return None
    key, best = max(
        candidates.items(),
        key=lambda item: (abs(rho(item[1].stats)), -item[0][0], -item[0][1]),
    )
    score = abs(rho(best.stats))
    if not score > config.tau_combine:
        logger.debug(f'IBFDD: max |rho| {score:.6g} (parents {key}) not above tau_combine')
        return None
    if len(basis) >= config.max_features:
        logger.warning(f'IBFDD: basis is at the cap of {config.max_features} functions, no conjunction')
        return None

    fid = basis.add_function(FunctionKind.WAVELET, atoms=best.atoms)
    del candidates[key]
    if stats is not None:
        stats[fid] = new_stats(basis, fid, config.eps)
    logger.info(f'Combined functions {key[0]} and {key[1]} into {fid} (|rho|={score:.6g})')
    return StructuralEdit(
        kind=COMBINE,
        source_ids=key,
        new_ids=(fid,),
        score=score,
        size_after=len(basis),
    )


def mawb_step(
    basis: BasisSet,
    stats: Dict[int, RelevanceStats],
    candidates: Dict[ParentPair, CandidateConjunction],
    config: 'AdaptiveConfig',
    step_count: int,
    enable_split: bool = True,
    enable_combine: bool = True,
) -> Optional[StructuralEdit]:
    """
    Run at most one structural check every check_interval steps

    Checks are numbered from 0 at step check_interval. Even-numbered checks
    try IBFDD before AWR, odd-numbered ones AWR first, so the first check
    looks for a conjunction.
    """
    if step_count <= 0 or step_count % config.check_interval:
        return None
    check_index = step_count // config.check_interval - 1

    def try_split():
        return awr_check(basis, stats, config, candidates) if enable_split else None

    def try_combine():
        return ibfdd_check(basis, candidates, config, stats if enable_split else None) if enable_combine else None

    order = (try_combine, try_split) if check_index % 2 == 0 else (try_split, try_combine)
    for check in order:
        edit = check()
        if edit is not None:
            edit.step = step_count
            return edit
    return None


@dataclass
class AdaptiveController:
    """
    Owns the relevance statistics and candidate pool for one basis

    enable_split turns on AWR, enable_combine IBFDD; both give MAWB.
    """
    basis: BasisSet
    config: 'AdaptiveConfig'
    enable_split: bool = True
    enable_combine: bool = True
    stats: Dict[int, RelevanceStats] = field(default_factory=dict)
    candidates: Dict[ParentPair, CandidateConjunction] = field(default_factory=dict)
    edits: List[StructuralEdit] = field(default_factory=list)

    def __post_init__(self):
        if self.enable_split:
            for f in self.basis.functions:
                if f.kind == FunctionKind.WAVELET and f.id not in self.stats:
                    self.stats[f.id] = new_stats(self.basis, f.id, self.config.eps)

    @classmethod
    def for_scheme(cls, scheme: str, basis: BasisSet, config: 'AdaptiveConfig') -> 'AdaptiveController':
        flags = {'awr': (True, False), 'ibfdd': (False, True), 'mawb': (True, True)}
        if scheme not in flags:
            raise ValueError(f'scheme {scheme!r} has no adaptive controller')
        split, combine = flags[scheme]
        return cls(basis, config, enable_split=split, enable_combine=combine)

    def observe(self, positions: Sequence[int], values: Sequence[float], delta: float):
        """
        Fold one TD error into the statistics of the active features

        Args:
            positions: Basis positions active at s_t
            values: Their feature values
            delta: TD error of the transition from s_t
        """
        eps = self.config.eps
        functions = self.basis.functions
        active = [(functions[p], float(v)) for p, v in zip(positions, values)]

        if self.enable_split:
            for f, v in active:
                stats = self.stats.get(f.id)
                if stats is not None:
                    record(stats, v, delta)

        if self.enable_combine:
            for i in range(len(active)):
                fa, va = active[i]
                if fa.kind != FunctionKind.WAVELET:
                    continue
                for j in range(i + 1, len(active)):
                    fb, vb = active[j]
                    if fb.kind != FunctionKind.WAVELET or fa.dims & fb.dims:
                        continue
                    pair = (fa.id, fb.id) if fa.id < fb.id else (fb.id, fa.id)
                    cand = self.candidates.get(pair)
                    if cand is None:
                        atoms = tuple(sorted(fa.atoms + fb.atoms, key=lambda a: a.dim))
                        if self.basis.find((FunctionKind.WAVELET.value, atoms)) is not None:
                            continue
                        omega = float(np.prod([clipped_length(a) for a in atoms]))
                        cand = CandidateConjunction(pair, atoms, RelevanceStats(omega=omega, eps=eps))
                        self.candidates[pair] = cand
                    record(cand.stats, va * vb, delta)

    def step(self, step_count: int) -> Optional[StructuralEdit]:
        edit = mawb_step(
            self.basis, self.stats, self.candidates, self.config, step_count,
            enable_split=self.enable_split, enable_combine=self.enable_combine,
        )
        if edit is not None:
            self.edits.append(edit)
        return edit

    @property
    def is_static(self) -> bool:
        """True when neither threshold can ever be crossed"""
        split_off = not self.enable_split or math.isinf(self.config.tau_split)
        combine_off = not self.enable_combine or math.isinf(self.config.tau_combine)
        return split_off and combine_off

    def relevance_rows(self) -> List[Dict[str, float]]:
        rows = []
        for fid, stats in sorted(self.stats.items()):
            rows.append({
                'id': fid,
                'T': stats.T,
                'rho': stats.rho,
                'obs': stats.obs,
                'criterion': stats.criterion,
            })
        return rows


__all__ = [
    'SPLIT',
    'COMBINE',
    'CandidateConjunction',
    'StructuralEdit',
    'AdaptiveController',
    'choose_split_dim',
    'split_growth',
    'split_feature',
    'combine_features',
    'awr_check',
    'ibfdd_check',
    'mawb_step'
]
