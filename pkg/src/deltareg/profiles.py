"""Scaled radial profiles on [0, S]: piecewise polynomials and cosine series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre, integrate_panels

__all__ = ["PolyPiece", "RadialProfile", "poly_profile", "cosine_profile"]


@dataclass(frozen=True)
class PolyPiece:
    lo: float
    hi: float
    coeffs: tuple  # monomial coefficients in r, ascending


@dataclass(frozen=True)
class RadialProfile:
    """Radial kernel profile eta(r) on [0, support], zero beyond.

    Either a list of monomial-polynomial pieces or a single cosine series
    sum_k c_k cos(k pi r / support) over the whole support.
    """

    pieces: tuple = ()
    cos_coeffs: tuple = ()
    support: float = 1.0

    def __post_init__(self):
        if bool(self.pieces) == bool(self.cos_coeffs):
            raise ValueError("profile needs either polynomial pieces or cosine coefficients")

    @property
    def is_polynomial(self) -> bool:
        return bool(self.pieces)

    @property
    def breakpoints(self) -> tuple:
        """Piece edges in [0, support], including 0 and the support radius."""
        if self.is_polynomial:
            edges = [self.pieces[0].lo] + [p.hi for p in self.pieces]
            return tuple(edges)
        return (0.0, self.support)

    def _piece_masks(self, r: np.ndarray):
        # boundary points belong to the inner piece
        for piece in self.pieces:
            mask = (r >= piece.lo) & (r <= piece.hi)
            if piece.lo > 0.0:
                mask &= r > piece.lo
            yield piece, mask

    def eval(self, r):
        """Profile value at |r| (even in r), exactly 0 outside the support."""
        scalar = np.isscalar(r) or np.ndim(r) == 0
        r = np.atleast_1d(np.abs(np.asarray(r, dtype=float)))
        out = np.zeros_like(r)
        if self.is_polynomial:
            for piece, mask in self._piece_masks(r):
                out[mask] = np.polyval(piece.coeffs[::-1], r[mask])
        else:
            mask = r <= self.support
            rm = r[mask]
            acc = np.zeros_like(rm)
            for k, c in enumerate(self.cos_coeffs):
                acc += c * np.cos(k * np.pi * rm / self.support)
            out[mask] = acc
        return float(out[0]) if scalar else out

    def deriv(self, r, order: int = 1):
        """Derivative of the one-sided profile at r in [0, support]."""
        scalar = np.isscalar(r) or np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        if self.is_polynomial:
            for piece, mask in self._piece_masks(r):
                c = np.asarray(piece.coeffs, dtype=float)
                for _ in range(order):
                    c = c[1:] * np.arange(1, c.size)
                if c.size:
                    out[mask] = np.polyval(c[::-1], r[mask])
        else:
            mask = r <= self.support
            rm = r[mask]
            acc = np.zeros_like(rm)
            for k, c in enumerate(self.cos_coeffs):
                w = k * np.pi / self.support
                phase = order % 4
                if phase == 0:
                    term = np.cos(w * rm)
                elif phase == 1:
                    term = -np.sin(w * rm)
                elif phase == 2:
                    term = -np.cos(w * rm)
                else:
                    term = np.sin(w * rm)
                acc += c * w**order * term
            out[mask] = acc
        return float(out[0]) if scalar else out

    def moment(self, power: int, order: int | None = None) -> float:
        """integral over [0, support] of eta(r) * r^power dr by exact-degree Gauss panels."""
        if order is None:
            if self.is_polynomial:
                deg = max(len(p.coeffs) - 1 for p in self.pieces) + power
                order = deg // 2 + 2
            else:
                order = 32
        rule = gauss_legendre(order)
        return integrate_panels(lambda r: self.eval(r) * r**power, self.breakpoints, rule)

    def scaled(self, factor: float) -> "RadialProfile":
        """Profile multiplied by a constant."""
        if self.is_polynomial:
            pieces = tuple(
                PolyPiece(p.lo, p.hi, tuple(factor * c for c in p.coeffs)) for p in self.pieces
            )
            return RadialProfile(pieces=pieces, support=self.support)
        return RadialProfile(
            cos_coeffs=tuple(factor * c for c in self.cos_coeffs), support=self.support
        )


def poly_profile(coeffs, support: float = 1.0) -> RadialProfile:
    """Single-piece polynomial profile on [0, support] from ascending monomial coefficients."""
    return RadialProfile(pieces=(PolyPiece(0.0, support, tuple(coeffs)),), support=support)


def cosine_profile(coeffs, support: float = 1.0) -> RadialProfile:
    """Cosine-series profile sum_k c_k cos(k pi r / support) on [0, support]."""
    return RadialProfile(cos_coeffs=tuple(coeffs), support=support)
