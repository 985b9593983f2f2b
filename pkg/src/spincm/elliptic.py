"""Weierstrass elliptic functions sigma, zeta, wp and the two-variable kernel
l(w, z) = -sigma(w+z) / (sigma(w) sigma(z)).

Everything is computed from the Jacobi theta function theta_1 with argument
reduction to the fundamental cell, so evaluations stay accurate for any
argument: theta series converge superexponentially there and the
quasi-periodicity factors are exact closed forms.  g2 and g3 come from theta
constants, not lattice sums.

Conventions: half-periods omega1, omega2 with Im(omega2/omega1) > 0; the
lattice is 2*omega1*Z + 2*omega2*Z.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import PoleError, StructuralError

POLE_TOL = 1e-12
_MAX_TERMS = 64
_REL_CUTOFF = 1e-18


class Lattice:
    """Period lattice with cached theta constants.

    Parameters
    ----------
    omega1, omega2 : complex
        Half-periods.  Im(omega2/omega1) must be positive.
    """

    def __init__(self, omega1: complex, omega2: complex):
        omega1 = complex(omega1)
        omega2 = complex(omega2)
        if omega1 == 0:
            raise StructuralError("omega1 must be nonzero")
        tau = omega2 / omega1
        if tau.imag <= 0:
            raise StructuralError(
                f"Im(omega2/omega1) = {tau.imag:g} must be positive")
        self.omega1 = omega1
        self.omega2 = omega2
        self.tau = tau
        self.nome = cmath.exp(1j * math.pi * tau)

        # theta_1 odd derivatives at v = 0:  theta_1'(0), theta_1'''(0)
        tp0 = 0.0 + 0.0j
        tppp0 = 0.0 + 0.0j
        for n in range(_MAX_TERMS):
            base = 2.0 * (-1) ** n * self.nome ** ((n + 0.5) ** 2)
            odd = 2 * n + 1
            tp0 += base * odd
            tppp0 -= base * odd ** 3
            if abs(base) < _REL_CUTOFF * max(1.0, abs(tp0)):
                break
        self._theta1p0 = tp0
        self.eta1 = -(math.pi ** 2) * tppp0 / (12.0 * omega1 * tp0)
        # Legendre relation eta1*omega2 - eta2*omega1 = i pi / 2
        self.eta2 = (self.eta1 * omega2 - 0.5j * math.pi) / omega1

        th2 = 0.0 + 0.0j
        th3 = 1.0 + 0.0j
        th4 = 1.0 + 0.0j
        for n in range(_MAX_TERMS):
            t2 = 2.0 * self.nome ** ((n + 0.5) ** 2)
            th2 += t2
            t34 = 2.0 * self.nome ** ((n + 1) ** 2)
            th3 += t34
            th4 += (-1) ** (n + 1) * t34
            if abs(t2) + abs(t34) < _REL_CUTOFF:
                break
        scale = (math.pi / (2.0 * omega1)) ** 2 / 3.0
        e1 = scale * (th3 ** 4 + th4 ** 4)
        e2 = scale * (th2 ** 4 - th4 ** 4)
        e3 = -scale * (th2 ** 4 + th3 ** 4)
        self.branch_points = (e1, e2, e3)
        self.g2 = 2.0 * (e1 ** 2 + e2 ** 2 + e3 ** 2)
        self.g3 = 4.0 * e1 * e2 * e3

        # real 2x2 system for argument reduction
        self._period_matrix = np.array(
            [[2 * omega1.real, 2 * omega2.real],
             [2 * omega1.imag, 2 * omega2.imag]])
        self._period_inv = np.linalg.inv(self._period_matrix)

    # -- internals ------------------------------------------------------

    def _theta1(self, v: complex) -> tuple[complex, complex, complex, complex]:
        """theta_1 and its first three v-derivatives at v."""
        th = d1 = d2 = d3 = 0.0 + 0.0j
        budget = 0
        for n in range(_MAX_TERMS):
            odd = 2 * n + 1
            coeff = 2.0 * (-1) ** n * self.nome ** ((n + 0.5) ** 2)
            s = cmath.sin(odd * v)
            c = cmath.cos(odd * v)
            th += coeff * s
            d1 += coeff * odd * c
            d2 -= coeff * odd ** 2 * s
            d3 -= coeff * odd ** 3 * c
            size = abs(coeff) * (abs(s) + abs(c))
            if size < _REL_CUTOFF * max(1.0, abs(th), abs(d1)):
                budget += 1
                if budget >= 2:
                    break
            else:
                budget = 0
        return th, d1, d2, d3

    def reduce(self, z: complex) -> tuple[complex, int, int]:
        """Write z = z0 + 2m*omega1 + 2n*omega2 with z0 in the centered cell."""
        z = complex(z)
        ab = self._period_inv @ np.array([z.real, z.imag])
        m = int(round(ab[0]))
        n = int(round(ab[1]))
        z0 = z - 2 * m * self.omega1 - 2 * n * self.omega2
        return z0, m, n

    def lattice_distance(self, z: complex) -> float:
        """Absolute distance from z to the nearest lattice point."""
        z0, _, _ = self.reduce(z)
        best = abs(z0)
        for dm in (-1, 0, 1):
            for dn in (-1, 0, 1):
                best = min(best, abs(z0 - 2 * dm * self.omega1 - 2 * dn * self.omega2))
        return best

    def _require_regular(self, z: complex, what: str) -> tuple[complex, int, int]:
        z0, m, n = self.reduce(z)
        if self.lattice_distance(z) < POLE_TOL:
            raise PoleError(f"{what} evaluated within {POLE_TOL:g} of a lattice point")
        return z0, m, n

    # -- public evaluations ----------------------------------------------

    def sigma(self, z: complex) -> complex:
        z0, m, n = self.reduce(z)
        v = math.pi * z0 / (2.0 * self.omega1)
        th, _, _, _ = self._theta1(v)
        base = (2.0 * self.omega1 / math.pi) * cmath.exp(
            self.eta1 * z0 * z0 / (2.0 * self.omega1)) * th / self._theta1p0
        if m == 0 and n == 0:
            return base
        eps = -1.0 if (m + n + m * n) % 2 else 1.0
        eta = 2 * m * self.eta1 + 2 * n * self.eta2
        half = m * self.omega1 + n * self.omega2
        return eps * base * cmath.exp(eta * (z0 + half))

    def zeta(self, z: complex) -> complex:
        z0, m, n = self._require_regular(z, "zeta")
        v = math.pi * z0 / (2.0 * self.omega1)
        th, d1, _, _ = self._theta1(v)
        val = self.eta1 * z0 / self.omega1 + (math.pi / (2.0 * self.omega1)) * d1 / th
        return val + 2 * m * self.eta1 + 2 * n * self.eta2

    def wp(self, z: complex) -> complex:
        z0, _, _ = self._require_regular(z, "wp")
        v = math.pi * z0 / (2.0 * self.omega1)
        th, d1, d2, _ = self._theta1(v)
        lg2 = d2 / th - (d1 / th) ** 2
        return -self.eta1 / self.omega1 - (math.pi / (2.0 * self.omega1)) ** 2 * lg2

    def wp_prime(self, z: complex) -> complex:
        z0, _, _ = self._require_regular(z, "wp_prime")
        v = math.pi * z0 / (2.0 * self.omega1)
        th, d1, d2, d3 = self._theta1(v)
        r1 = d1 / th
        lg3 = d3 / th - 3.0 * (d2 / th) * r1 + 2.0 * r1 ** 3
        return -((math.pi / (2.0 * self.omega1)) ** 3) * lg3

    def zeta_derivative(self, z: complex, k: int) -> complex:
        """k-th z-derivative of zeta for 0 <= k <= 4.

        Uses zeta' = -wp and the Weierstrass differential equation for the
        higher orders (wp'' = 6 wp^2 - g2/2, wp''' = 12 wp wp'), so every
        order is analytic, no finite differences.
        """
        if k == 0:
            return self.zeta(z)
        if k == 1:
            return -self.wp(z)
        if k == 2:
            return -self.wp_prime(z)
        p = self.wp(z)
        if k == 3:
            return -(6.0 * p * p - 0.5 * self.g2)
        if k == 4:
            return -12.0 * p * self.wp_prime(z)
        raise ValueError(f"zeta_derivative supports k <= 4, got {k}")

    def __repr__(self) -> str:
        return f"Lattice(omega1={self.omega1:g}, omega2={self.omega2:g})"


def sigma(lattice: Lattice, z: complex) -> complex:
    """Weierstrass sigma function (entire, odd, sigma'(0) = 1)."""
    return lattice.sigma(z)


def zeta(lattice: Lattice, z: complex) -> complex:
    """Weierstrass zeta function, zeta = sigma'/sigma."""
    return lattice.zeta(z)


def wp(lattice: Lattice, z: complex) -> complex:
    """Weierstrass elliptic function, wp = -zeta'."""
    return lattice.wp(z)


def wp_prime(lattice: Lattice, z: complex) -> complex:
    """Derivative of wp."""
    return lattice.wp_prime(z)


def l_kernel(lattice: Lattice, w: complex, z: complex) -> complex:
    """Two-variable kernel l(w, z) = -sigma(w+z) / (sigma(w) sigma(z)).

    Symmetric in its arguments, with a simple pole of residue -1 in z at the
    lattice.  Poles occur where sigma(w) or sigma(z) vanish, and only there;
    w + z on the lattice gives a regular zero, so it is not guarded.
    """
    if lattice.lattice_distance(w) < POLE_TOL:
        raise PoleError("l_kernel: first argument within pole tolerance of the lattice")
    if lattice.lattice_distance(z) < POLE_TOL:
        raise PoleError("l_kernel: second argument within pole tolerance of the lattice")
    return -lattice.sigma(w + z) / (lattice.sigma(w) * lattice.sigma(z))
