"""Tensor-product Gauss-Legendre rules on symmetric boxes."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid description: nodes per axis and half-width of the box ``[-R, R]^d``.

    ``truncation_radius=None`` lets the caller pick a radius from the weight
    parameter (see :func:`default_radius`).
    """

    nodes_per_axis: int = 64
    truncation_radius: Optional[float] = None

    def __post_init__(self):
        if self.nodes_per_axis < 16:
            raise InvalidArgumentError("nodes_per_axis must be >= 16")
        if self.truncation_radius is not None and not self.truncation_radius > 0:
            raise InvalidArgumentError("truncation_radius must be positive")

    def radius(self, a, tail=30.0):
        if self.truncation_radius is not None:
            return self.truncation_radius
        return default_radius(a, tail)

    def refined(self):
        return QuadratureSpec(2 * self.nodes_per_axis, self.truncation_radius)


def default_radius(a, tail=30.0):
    """Radius where ``exp(-a R^2) = exp(-tail)``."""
    return math.sqrt(tail / a)


def gauss_legendre(n, R):
    """Nodes and weights of the ``n``-point rule mapped to ``[-R, R]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return R * x, R * w


def tensor_grid(n, R, d):
    """Tensor-product rule on ``[-R, R]^d``.

    Returns
    -------
    nodes : (n**d, d) ndarray
    weights : (n**d,) ndarray
    """
    x, w = gauss_legendre(n, R)
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return nodes, weights


def composite_gauss_legendre(m, R, panel_width=4.0):
    """``m``-point rule on each of ``ceil(2R / panel_width)`` equal panels of ``[-R, R]``."""
    panels = max(1, math.ceil(2 * R / panel_width))
    x, w = np.polynomial.legendre.leggauss(m)
    h = R / panels  # half-width of one panel
    mids = -R + h * (2 * np.arange(panels) + 1)
    nodes = (mids[:, None] + h * x[None, :]).ravel()
    weights = np.tile(h * w, panels)
    return nodes, weights


def composite_tensor_grid(m, R, d, panel_width=4.0):
    """Tensor product of :func:`composite_gauss_legendre` rules."""
    x, w = composite_gauss_legendre(m, R, panel_width)
    mesh = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in mesh], axis=-1)
    wmesh = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wmesh], axis=-1), axis=-1)
    return nodes, weights
