"""
Feature sets for linear value-function approximation

Fixed coupled (tensor-product) and decoupled B-spline wavelet bases, the
Fourier baseline, sparse evaluation that exploits compact support, and a
line-oriented text format for saving and resuming bases.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    BasisSizeError,
    DimensionMismatchError,
    FeatureKindError,
    StructuralEditError,
    UnknownFeatureError,
)
from .wavelet import (
    DILATION,
    NORMALIZATION_CONSTANTS,
    WaveletAtom,
    clipped_length,
    eval_atom,
    eval_bspline_raw_orders,
    translation_range,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_BASIS_SIZE = 10 ** 6

# Largest double below 1.0; states are clamped into [0, 1)
UPPER_STATE_BOUND = float(np.nextafter(1.0, 0.0))


class FunctionKind(str, Enum):
    WAVELET = 'wavelet'
    FOURIER = 'fourier'


FeatureKey = Tuple[str, tuple]


class FunctionSpec(NamedTuple):
    """What to register for one function in a bulk BasisSet.extend"""
    kind: FunctionKind
    atoms: Tuple[WaveletAtom, ...] = ()
    coeffs: Tuple[int, ...] = ()
    fid: Optional[int] = None


@dataclass(frozen=True)
class BasisFunction:
    """
    A product of wavelet atoms over distinct dimensions, or a Fourier term

    Dimensions without an atom contribute a factor of 1. Fourier terms
    evaluate cos(pi * c . s).
    """
    id: int
    kind: FunctionKind
    atoms: Tuple[WaveletAtom, ...] = ()
    coeffs: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == FunctionKind.WAVELET:
            if not self.atoms:
                raise ValueError('wavelet function needs at least one atom')
            dims = [atom.dim for atom in self.atoms]
            if len(set(dims)) != len(dims):
                raise ValueError(f'atoms must have distinct dimensions, got {dims}')
            object.__setattr__(self, 'atoms', tuple(sorted(self.atoms, key=lambda a: a.dim)))
        elif self.kind == FunctionKind.FOURIER:
            if any(c < 0 for c in self.coeffs):
                raise ValueError(f'fourier coefficients must be >= 0, got {self.coeffs}')

    @property
    def key(self) -> FeatureKey:
        """Identity of the function independent of its id"""
        if self.kind == FunctionKind.WAVELET:
            return (self.kind.value, self.atoms)
        return (self.kind.value, self.coeffs)

    @property
    def dims(self) -> frozenset:
        return frozenset(atom.dim for atom in self.atoms)

    def atom_for(self, dim: int) -> Optional[WaveletAtom]:
        for atom in self.atoms:
            if atom.dim == dim:
                return atom
        return None

    def support_box(self, d: int) -> List[Tuple[float, float]]:
        """Per-dimension support; the whole real line where no atom acts"""
        if self.kind == FunctionKind.FOURIER:
            return [(0.0, 1.0)] * d
        box = [(-math.inf, math.inf)] * d
        for atom in self.atoms:
            box[atom.dim] = atom.support
        return box

    def value(self, s: Sequence[float]) -> float:
        if self.kind == FunctionKind.FOURIER:
            return float(np.cos(np.pi * np.dot(self.coeffs, s)))
        result = 1.0
        for atom in self.atoms:
            result *= eval_atom(atom, s[atom.dim])
        return result


def support_volume(f: BasisFunction) -> float:
    """
    Measure of the region where f is nonzero, clipped to the unit box

    Raises:
        FeatureKindError: for Fourier terms, which have global support
    """
    if f.kind != FunctionKind.WAVELET:
        raise FeatureKindError(f'support volume is undefined for {f.kind.value} function {f.id}')
    volume = 1.0
    for atom in f.atoms:
        volume *= clipped_length(atom)
    return volume


@dataclass
class _EvaluationCache:
    """Column-packed view of the basis used by the vectorised evaluators"""
    wavelet_pos: np.ndarray
    has: np.ndarray
    order: np.ndarray
    dilation: np.ndarray
    trans: np.ndarray
    factor: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    fourier_pos: np.ndarray
    fourier_coeffs: np.ndarray


class BasisSet:
    """
    Ordered collection of basis functions with per-action weights and traces

    weights and traces have shape (n_actions, len(functions)) at all times.
    Function ids are append-only and never reused.
    """

    def __init__(self, d: int, n_actions: int = 1, max_size: int = DEFAULT_MAX_BASIS_SIZE):
        if d < 1:
            raise ValueError(f'state dimension must be >= 1, got {d}')
        if n_actions < 1:
            raise ValueError(f'need at least one action, got {n_actions}')
        self.d = d
        self.n_actions = n_actions
        self.max_size = max_size
        self.functions: List[BasisFunction] = []
        self.weights = np.zeros((n_actions, 0))
        self.traces = np.zeros((n_actions, 0))
        self._next_id = 0
        self._positions: Dict[int, int] = {}
        self._keys: Dict[FeatureKey, int] = {}
        self._cache: Optional[_EvaluationCache] = None

    def __len__(self) -> int:
        return len(self.functions)

    def __contains__(self, fid: int) -> bool:
        return fid in self._positions

    def __repr__(self) -> str:
        return f'BasisSet(d={self.d}, actions={self.n_actions}, size={len(self)})'

    @property
    def ids(self) -> List[int]:
        return [f.id for f in self.functions]

    @property
    def next_id(self) -> int:
        return self._next_id

    def position(self, fid: int) -> int:
        try:
            return self._positions[fid]
        except KeyError:
            raise UnknownFeatureError(f'unknown function id {fid}') from None

    def function(self, fid: int) -> BasisFunction:
        return self.functions[self.position(fid)]

    def find(self, key: FeatureKey) -> Optional[int]:
        """Id of the function with this identity, if present"""
        return self._keys.get(key)

    # Structural edits

    def add_function(
        self,
        kind: FunctionKind,
        atoms: Iterable[WaveletAtom] = (),
        coeffs: Iterable[int] = (),
        weights: Optional[np.ndarray] = None,
        traces: Optional[np.ndarray] = None,
        fid: Optional[int] = None,
    ) -> int:
        """
        Append a function and its weight/trace columns

        Args:
            kind: Function kind
            atoms: Wavelet atoms (wavelet kind)
            coeffs: Integer coefficient vector (fourier kind)
            weights: Per-action weights, zeros if omitted
            traces: Per-action traces, zeros if omitted
            fid: Explicit id, only used when restoring a saved basis

        Returns:
            The new function id
        """
        column_w = np.zeros(self.n_actions) if weights is None else np.asarray(weights, dtype=float)
        column_e = np.zeros(self.n_actions) if traces is None else np.asarray(traces, dtype=float)
        column_w = column_w.reshape(self.n_actions, 1)
        column_e = column_e.reshape(self.n_actions, 1)

        fid = self._register(kind, atoms, coeffs, fid)
        self.weights = np.concatenate([self.weights, column_w], axis=1)
        self.traces = np.concatenate([self.traces, column_e], axis=1)
        self._cache = None
        return fid

    def extend(self, specs: Iterable[FunctionSpec], weights: Optional[np.ndarray] = None) -> List[int]:
        """
        Append many functions with a single resize of the weight and trace arrays

        Args:
            specs: Functions to register, in order
            weights: Optional (n_actions, len(specs)) block; zeros if omitted

        Returns:
            The new function ids

        Functions registered before a failing one stay in the basis with
        their columns, so shapes are consistent when the error propagates.
        """
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            if weights.ndim != 2 or weights.shape[0] != self.n_actions:
                raise ValueError(f'weight block must have {self.n_actions} rows, got shape {weights.shape}')
        new_ids: List[int] = []
        try:
            for spec in specs:
                new_ids.append(self._register(spec.kind, spec.atoms, spec.coeffs, spec.fid))
        finally:
            block = np.zeros((self.n_actions, len(new_ids)))
            if weights is not None:
                block[:] = weights[:, :len(new_ids)]
            self.weights = np.concatenate([self.weights, block], axis=1)
            self.traces = np.concatenate([self.traces, np.zeros_like(block)], axis=1)
            self._cache = None
        return new_ids

    def _register(
        self,
        kind: FunctionKind,
        atoms: Iterable[WaveletAtom],
        coeffs: Iterable[int],
        fid: Optional[int],
    ) -> int:
        """Validate a function and record it; the caller owns its weight and trace columns"""
        if len(self.functions) >= self.max_size:
            raise BasisSizeError(f'basis already holds the maximum of {self.max_size} functions')
        if fid is None:
            fid = self._next_id
        elif fid in self._positions or fid < 0:
            raise StructuralEditError(f'function id {fid} is already used or invalid')
        function = BasisFunction(id=fid, kind=FunctionKind(kind), atoms=tuple(atoms), coeffs=tuple(coeffs))
        self._validate_dims(function)
        if function.key in self._keys:
            raise StructuralEditError(
                f'function {function.key} already present as id {self._keys[function.key]}'
            )

        self._positions[fid] = len(self.functions)
        self._keys[function.key] = fid
        self.functions.append(function)
        self._next_id = max(self._next_id, fid + 1)
        return fid

    def remove_function(self, fid: int) -> BasisFunction:
        pos = self.position(fid)
        function = self.functions.pop(pos)
        self.weights = np.delete(self.weights, pos, axis=1)
        self.traces = np.delete(self.traces, pos, axis=1)
        del self._keys[function.key]
        self._positions = {f.id: i for i, f in enumerate(self.functions)}
        self._cache = None
        return function

    def accumulate(self, fid: int, weights: np.ndarray, traces: np.ndarray):
        """Add weight and trace mass onto an existing function"""
        pos = self.position(fid)
        self.weights[:, pos] += weights
        self.traces[:, pos] += traces

    def _validate_dims(self, function: BasisFunction):
        if function.kind == FunctionKind.WAVELET:
            bad = [a.dim for a in function.atoms if a.dim >= self.d]
            if bad:
                raise DimensionMismatchError(f'atom dimensions {bad} exceed state dimension {self.d}')
        elif len(function.coeffs) != self.d:
            raise DimensionMismatchError(
                f'fourier coefficients have length {len(function.coeffs)}, expected {self.d}'
            )

    # Evaluation

    def _build_cache(self) -> _EvaluationCache:
        wavelet_pos = [i for i, f in enumerate(self.functions) if f.kind == FunctionKind.WAVELET]
        fourier_pos = [i for i, f in enumerate(self.functions) if f.kind == FunctionKind.FOURIER]
        shape = (len(wavelet_pos), self.d)
        has = np.zeros(shape, dtype=bool)
        order = np.zeros(shape, dtype=int)
        dilation = np.ones(shape)
        trans = np.zeros(shape)
        factor = np.ones(shape)
        lo = np.full(shape, -np.inf)
        hi = np.full(shape, np.inf)
        for row, pos in enumerate(wavelet_pos):
            for atom in self.functions[pos].atoms:
                col = atom.dim
                has[row, col] = True
                order[row, col] = atom.order
                dilation[row, col] = float(DILATION ** atom.scale)
                trans[row, col] = atom.translation
                factor[row, col] = 2.0 ** (atom.scale / 2.0) * NORMALIZATION_CONSTANTS[atom.order]
                lo[row, col], hi[row, col] = atom.support
        if fourier_pos:
            coeffs = np.array([self.functions[p].coeffs for p in fourier_pos], dtype=float)
        else:
            coeffs = np.zeros((0, self.d))
        return _EvaluationCache(
            wavelet_pos=np.array(wavelet_pos, dtype=int),
            has=has, order=order, dilation=dilation, trans=trans, factor=factor,
            lo=lo, hi=hi,
            fourier_pos=np.array(fourier_pos, dtype=int),
            fourier_coeffs=coeffs,
        )

    @property
    def cache(self) -> _EvaluationCache:
        if self._cache is None:
            self._cache = self._build_cache()
        return self._cache

    def prepare_state(self, s: Sequence[float]) -> np.ndarray:
        """Validate the state's dimension and clamp it into [0, 1)"""
        s = np.asarray(s, dtype=float).reshape(-1)
        if s.shape[0] != self.d:
            raise DimensionMismatchError(f'state has dimension {s.shape[0]}, basis expects {self.d}')
        return np.clip(s, 0.0, UPPER_STATE_BOUND)

    def _wavelet_rows(self, s: np.ndarray, rows: np.ndarray) -> np.ndarray:
        c = self.cache
        t = s * c.dilation[rows] - c.trans[rows]
        raw = eval_bspline_raw_orders(c.order[rows], t)
        return np.where(c.has[rows], c.factor[rows] * raw, 1.0).prod(axis=1)

    def dense_features(self, s: Sequence[float]) -> np.ndarray:
        """Value of every function at s, in basis order"""
        s = self.prepare_state(s)
        c = self.cache
        phi = np.zeros(len(self.functions))
        if c.wavelet_pos.size:
            phi[c.wavelet_pos] = self._wavelet_rows(s, np.arange(c.wavelet_pos.size))
        if c.fourier_pos.size:
            phi[c.fourier_pos] = np.cos(np.pi * c.fourier_coeffs.dot(s))
        return phi

    def active(self, s: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Positions and values of the functions that are nonzero at s

        Wavelet rows are first filtered by their support boxes so only
        functions whose support contains s are evaluated.
        """
        s = self.prepare_state(s)
        c = self.cache
        positions = []
        values = []
        if c.wavelet_pos.size:
            inside = np.all(~c.has | ((s >= c.lo) & (s < c.hi)), axis=1)
            rows = np.flatnonzero(inside)
            if rows.size:
                vals = self._wavelet_rows(s, rows)
                keep = vals != 0.0
                positions.append(c.wavelet_pos[rows[keep]])
                values.append(vals[keep])
        if c.fourier_pos.size:
            vals = np.cos(np.pi * c.fourier_coeffs.dot(s))
            positions.append(c.fourier_pos)
            values.append(vals)
        if not positions:
            return np.zeros(0, dtype=int), np.zeros(0)
        return np.concatenate(positions), np.concatenate(values)

    def active_features(self, s: Sequence[float]) -> List[Tuple[int, float]]:
        """Sparse (id, value) list of the functions nonzero at s"""
        positions, values = self.active(s)
        return [(self.functions[p].id, float(v)) for p, v in zip(positions, values)]

    def q_values(self, s: Sequence[float]) -> np.ndarray:
        positions, values = self.active(s)
        return self.weights[:, positions].dot(values)

    def value(self, s: Sequence[float], action: int) -> float:
        positions, values = self.active(s)
        return float(self.weights[action, positions].dot(values))

    def reset_traces(self):
        self.traces[:] = 0.0

    def feature_alpha_scale(self, fourier_scaling: bool = True) -> np.ndarray:
        """Per-feature learning-rate factor: 1/||c|| for Fourier terms (1 for c = 0)"""
        scale = np.ones(len(self.functions))
        if not fourier_scaling:
            return scale
        for i, f in enumerate(self.functions):
            if f.kind == FunctionKind.FOURIER:
                norm = float(np.linalg.norm(f.coeffs))
                if norm > 0:
                    scale[i] = 1.0 / norm
        return scale

    def copy(self) -> 'BasisSet':
        clone = BasisSet(self.d, self.n_actions, self.max_size)
        clone.functions = list(self.functions)
        clone.weights = self.weights.copy()
        clone.traces = self.traces.copy()
        clone._next_id = self._next_id
        clone._positions = dict(self._positions)
        clone._keys = dict(self._keys)
        return clone

    # Persistence

    def to_lines(self, metadata: Optional[str] = None) -> List[str]:
        """Text form of the basis; an optional comment line goes first"""
        lines = [] if metadata is None else [metadata]
        lines.append(f'# basis d={self.d} actions={self.n_actions} next_id={self._next_id}')
        for pos, f in enumerate(self.functions):
            if f.kind == FunctionKind.WAVELET:
                payload = ';'.join('({},{},{},{})'.format(*a.as_tuple()) for a in f.atoms)
            else:
                payload = ','.join(str(c) for c in f.coeffs)
            weights = ','.join(repr(float(w)) for w in self.weights[:, pos])
            lines.append(f'{f.id}\t{f.kind.value}\t{payload}\t{weights}')
        return lines

    @classmethod
    def from_lines(cls, lines: Iterable[str], max_size: int = DEFAULT_MAX_BASIS_SIZE) -> 'BasisSet':
        lines = [line.rstrip('\n') for line in lines if line.strip()]
        header_at = next((i for i, line in enumerate(lines) if line.startswith('# basis')), None)
        if header_at is None or not all(line.startswith('#') for line in lines[:header_at]):
            raise ValueError('missing basis header line')
        header = dict(item.split('=') for item in lines[header_at].split()[2:])
        basis = cls(int(header['d']), int(header['actions']), max_size)

        specs, columns = [], []
        for line in lines[header_at + 1:]:
            fid, kind, payload, weights = line.split('\t')
            columns.append([float(w) for w in weights.split(',')])
            if kind == FunctionKind.WAVELET.value:
                atoms = tuple(
                    WaveletAtom(*(int(v) for v in chunk.strip('()').split(',')))
                    for chunk in payload.split(';')
                )
                specs.append(FunctionSpec(FunctionKind.WAVELET, atoms=atoms, fid=int(fid)))
            else:
                coeffs = tuple(int(c) for c in payload.split(','))
                specs.append(FunctionSpec(FunctionKind.FOURIER, coeffs=coeffs, fid=int(fid)))
        block = np.array(columns, dtype=float).T if columns else None
        basis.extend(specs, weights=block)
        basis._next_id = max(basis._next_id, int(header['next_id']))
        return basis

    def dump(self, path: Union[str, Path], metadata: Optional[str] = None):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text('\n'.join(self.to_lines(metadata)) + '\n', encoding='utf-8')
        logger.info(f'Saved basis with {len(self)} functions to {path}')

    @classmethod
    def load(cls, path: Union[str, Path], max_size: int = DEFAULT_MAX_BASIS_SIZE) -> 'BasisSet':
        path = Path(path)
        with path.open(encoding='utf-8') as f:
            basis = cls.from_lines(f, max_size)
        logger.info(f'Loaded basis with {len(basis)} functions from {path}')
        return basis


def _translation_order(order: int, scale: int) -> List[int]:
    """Nonnegative translations ascending, then the boundary ones -1, -2, ..."""
    return sorted(translation_range(order, scale), key=lambda k: (k < 0, abs(k)))


def _check_size(count: int, max_size: int, what: str):
    if count > max_size:
        raise BasisSizeError(f'{what} basis would have {count} functions, cap is {max_size}')


def build_fixed_coupled(
    d: int,
    order: int,
    scale: int,
    n_actions: int = 1,
    max_size: int = DEFAULT_MAX_BASIS_SIZE,
) -> BasisSet:
    """
    Full tensor-product wavelet basis: (order + 2^scale)^d functions

    Args:
        d: State dimension
        order: B-spline order
        scale: Dyadic scale j
        n_actions: Number of per-action weight vectors
        max_size: Refuse to build bases larger than this

    Returns:
        Zero-initialised BasisSet
    """
    translations = _translation_order(order, scale)
    _check_size(len(translations) ** d, max_size, 'coupled')
    basis = BasisSet(d, n_actions, max_size)
    basis.extend(
        FunctionSpec(FunctionKind.WAVELET, atoms=tuple(WaveletAtom(order, scale, k, dim) for dim, k in enumerate(combo)))
        for combo in itertools.product(translations, repeat=d)
    )
    logger.info(f'Built coupled basis: d={d}, order={order}, scale={scale}, size={len(basis)}')
    return basis


def build_decoupled(
    d: int,
    order: int,
    scale: int,
    n_actions: int = 1,
    max_size: int = DEFAULT_MAX_BASIS_SIZE,
) -> BasisSet:
    """Per-dimension atoms only, (order + 2^scale) * d functions, no bias term"""
    translations = _translation_order(order, scale)
    _check_size(len(translations) * d, max_size, 'decoupled')
    basis = BasisSet(d, n_actions, max_size)
    basis.extend(
        FunctionSpec(FunctionKind.WAVELET, atoms=(WaveletAtom(order, scale, k, dim),))
        for dim in range(d)
        for k in translations
    )
    logger.info(f'Built decoupled basis: d={d}, order={order}, scale={scale}, size={len(basis)}')
    return basis


def build_fourier(
    d: int,
    order: int,
    n_actions: int = 1,
    max_size: int = DEFAULT_MAX_BASIS_SIZE,
) -> BasisSet:
    """All (order + 1)^d cosine terms with coefficients in 0..order"""
    if d < 1 or order < 0:
        raise ValueError(f'fourier basis needs d >= 1 and order >= 0, got d={d}, order={order}')
    _check_size((order + 1) ** d, max_size, 'fourier')
    basis = BasisSet(d, n_actions, max_size)
    basis.extend(
        FunctionSpec(FunctionKind.FOURIER, coeffs=coeffs)
        for coeffs in itertools.product(range(order + 1), repeat=d)
    )
    logger.info(f'Built fourier basis: d={d}, order={order}, size={len(basis)}')
    return basis


__all__ = [
    'DEFAULT_MAX_BASIS_SIZE',
    'UPPER_STATE_BOUND',
    'FunctionKind',
    'BasisFunction',
    'BasisSet',
    'FunctionSpec',
    'support_volume',
    'build_fixed_coupled',
    'build_decoupled',
    'build_fourier'
]
