"""
B-spline father wavelets of orders 0-2

Evaluation of the raw cardinal splines, their L2-normalised dyadic
dilations/translations (atoms), supports and two-scale refinement masks.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .exceptions import UnsupportedOrderError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SUPPORTED_ORDERS = (0, 1, 2)

# Dyadic refinement only
DILATION = 2

# 1 / sqrt(integral of raw spline squared); the integrals are 1, 2/3 and 11/20
NORMALIZATION_CONSTANTS = {
    0: 1.0,
    1: math.sqrt(3.0 / 2.0),
    2: math.sqrt(20.0 / 11.0),
}


def _check_order(order: int) -> int:
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(
            f'B-spline order {order} is not implemented (supported: {SUPPORTED_ORDERS})'
        )
    return int(order)


@dataclass(frozen=True, order=True)
class WaveletAtom:
    """
    One dilated and translated B-spline along a single state dimension

    Identity is the tuple (order, scale, translation, dim), so atoms can be
    used as dictionary keys when deduplicating split products.
    """
    order: int
    scale: int
    translation: int
    dim: int

    def __post_init__(self):
        _check_order(self.order)
        if self.scale < 0:
            raise ValueError(f'scale must be >= 0, got {self.scale}')
        if self.dim < 0:
            raise ValueError(f'dim must be >= 0, got {self.dim}')

    @property
    def support(self) -> Tuple[float, float]:
        return atom_support(self)

    def children(self) -> List[Tuple[float, 'WaveletAtom']]:
        """Mask-weighted children one scale finer, in translation order"""
        mask = refinement_mask(self.order)
        return [
            (coeff, WaveletAtom(self.order, self.scale + 1, 2 * self.translation + t, self.dim))
            for t, coeff in enumerate(mask.coeffs)
        ]

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.order, self.scale, self.translation, self.dim)


@dataclass(frozen=True)
class RefinementMask:
    """Coefficients of the two-scale relation for normalised atoms"""
    order: int
    m: int
    coeffs: Tuple[float, ...]


def _raw_order0(x: np.ndarray) -> np.ndarray:
    return np.where((x >= 0.0) & (x < 1.0), 1.0, 0.0)


def _raw_order1(x: np.ndarray) -> np.ndarray:
    return np.where(
        (x >= 0.0) & (x < 1.0), x,
        np.where((x >= 1.0) & (x < 2.0), 2.0 - x, 0.0)
    )


def _raw_order2(x: np.ndarray) -> np.ndarray:
    # Final piece is 0.5 * (3 - x)^2; the cubic variant breaks continuity
    return np.where(
        (x >= 0.0) & (x < 1.0), 0.5 * x * x,
        np.where(
            (x >= 1.0) & (x < 2.0), 0.75 - (x - 1.5) ** 2,
            np.where((x >= 2.0) & (x < 3.0), 0.5 * (3.0 - x) ** 2, 0.0)
        )
    )


_RAW_PIECES = {0: _raw_order0, 1: _raw_order1, 2: _raw_order2}


def eval_bspline_raw(order: int, x: ArrayLike) -> ArrayLike:
    """
    Evaluate the unnormalised cardinal B-spline of the given order

    Args:
        order: Spline order (0, 1 or 2)
        x: Scalar or array of abscissae

    Returns:
        Spline value(s); zero outside [0, order + 1)
    """
    _check_order(order)
    values = _RAW_PIECES[order](np.asarray(x, dtype=float))
    if np.ndim(values) == 0:
        return float(values)
    return values


def eval_bspline_raw_orders(orders: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorised raw evaluation where each entry carries its own order"""
    orders = np.asarray(orders)
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(orders, x).shape)
    orders, x = np.broadcast_arrays(orders, x)
    for order, piece in _RAW_PIECES.items():
        mask = orders == order
        if mask.any():
            out[mask] = piece(x[mask])
    return out


def normalization_constant(order: int) -> float:
    """Scale factor giving the raw spline unit L2 norm"""
    return NORMALIZATION_CONSTANTS[_check_order(order)]


def eval_atom(atom: WaveletAtom, x: ArrayLike) -> ArrayLike:
    """
    Evaluate 2^(j/2) * nu_n * phi_n(2^j x - k)

    The 2^(j/2) factor keeps every atom at unit L2 norm.
    """
    factor = 2.0 ** (atom.scale / 2.0) * NORMALIZATION_CONSTANTS[atom.order]
    t = np.asarray(x, dtype=float) * float(DILATION ** atom.scale) - atom.translation
    values = factor * _RAW_PIECES[atom.order](t)
    if np.ndim(values) == 0:
        return float(values)
    return values


def refinement_mask(order: int) -> RefinementMask:
    """
    Two-scale coefficients c_t = 2^(-n-1/2) * C(n+1, t), t = 0..n+1

    With these, atom(n, j, k) equals sum_t c_t * atom(n, j+1, 2k+t) pointwise.
    """
    order = _check_order(order)
    scale = 2.0 ** (-order - 0.5)
    coeffs = tuple(scale * math.comb(order + 1, t) for t in range(order + 2))
    return RefinementMask(order=order, m=DILATION, coeffs=coeffs)


def atom_support(atom: WaveletAtom) -> Tuple[float, float]:
    """Closed support interval [k / 2^j, (k + n + 1) / 2^j]"""
    width = float(DILATION ** atom.scale)
    return (atom.translation / width, (atom.translation + atom.order + 1) / width)


def translation_range(order: int, scale: int) -> range:
    """Translations -n <= k < 2^j whose atoms meet [0, 1]"""
    _check_order(order)
    return range(-order, DILATION ** scale)


def clipped_length(atom: WaveletAtom) -> float:
    """Length of the atom's support intersected with [0, 1]"""
    lo, hi = atom_support(atom)
    return max(0.0, min(hi, 1.0) - max(lo, 0.0))


__all__ = [
    'SUPPORTED_ORDERS',
    'DILATION',
    'NORMALIZATION_CONSTANTS',
    'WaveletAtom',
    'RefinementMask',
    'eval_bspline_raw',
    'eval_bspline_raw_orders',
    'normalization_constant',
    'eval_atom',
    'refinement_mask',
    'atom_support',
    'translation_range',
    'clipped_length'
]
