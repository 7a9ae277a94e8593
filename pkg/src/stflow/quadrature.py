"""Symmetric quadrature rules on reference d-simplices.

Reference simplex: vertices at the origin and the unit vectors; volume
1/d!.  Points are returned in reference coordinates (shape (n, d)),
weights include the 1/d! volume factor so that summing weights times
function values approximates the integral over the reference simplex.
"""

from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

import numpy as np

from .errors import UnsupportedRule

__all__ = ["quadrature_rule", "simplex_monomial_integral", "gauss_legendre_01"]


def simplex_monomial_integral(alpha, d):
    """Exact integral of prod(xi_i^alpha_i) over the reference d-simplex."""
    alpha = list(alpha)
    num = 1
    for a in alpha:
        num *= factorial(a)
    return num / factorial(sum(alpha) + d)


def _degree1(d):
    pts = np.full((1, d), 1.0 / (d + 1))
    wts = np.array([1.0 / factorial(d)])
    return pts, wts


def _degree2(d):
    # d+1 symmetric points: barycentric (a, b, ..., b) with
    # a - b = 1/sqrt(d+2); exact for all quadratics.
    delta = 1.0 / np.sqrt(d + 2.0)
    b = (1.0 - delta) / (d + 1.0)
    a = b + delta
    bary = np.full((d + 1, d + 1), b) + (a - b) * np.eye(d + 1)
    pts = bary[:, 1:]
    wts = np.full(d + 1, 1.0 / (factorial(d) * (d + 1)))
    return pts, wts


def _grundmann_moeller(d, k):
    # Grundmann-Moeller rule of degree 2k+1 on the d-simplex.
    s = 2 * k + 1
    pts = []
    wts = []
    for i in range(k + 1):
        coeff = (
            (-1.0) ** i
            * 2.0 ** (-2 * k)
            * (d + s - 2.0 * i) ** s
            / (factorial(i) * factorial(d + s - i))
        )
        for combo in combinations_with_replacement(range(d + 1), k - i):
            beta = np.zeros(d + 1, dtype=int)
            for idx in combo:
                beta[idx] += 1
            bary = (2.0 * beta + 1.0) / (d + s - 2.0 * i)
            pts.append(bary[1:])
            wts.append(coeff)
    return np.array(pts), np.array(wts)


@lru_cache(maxsize=None)
def _rule_cached(d, degree):
    if degree == 1:
        pts, wts = _degree1(d)
    elif degree == 2:
        pts, wts = _degree2(d)
    elif degree == 3:
        pts, wts = _grundmann_moeller(d, 1)
    else:
        raise UnsupportedRule(f"no degree-{degree} rule on the {d}-simplex")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def quadrature_rule(d, degree):
    """Points and weights exact for polynomials up to `degree` on the d-simplex."""
    if d not in (1, 2, 3, 4):
        raise UnsupportedRule(f"simplex dimension must be 1..4, got {d}")
    if degree not in (1, 2, 3):
        raise UnsupportedRule(f"degree must be 1..3, got {degree}")
    return _rule_cached(d, degree)


@lru_cache(maxsize=None)
def gauss_legendre_01(n):
    """n-point Gauss-Legendre rule on [0, 1]; used for the prism time direction."""
    x, w = np.polynomial.legendre.leggauss(n)
    pts = 0.5 * (x + 1.0)
    wts = 0.5 * w
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts
