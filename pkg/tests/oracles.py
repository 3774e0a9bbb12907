"""High-precision reference implementations used only by the test suite.

Two independent routes:

* ``ml_exact_series``: the defining Taylor series in exact mpf arithmetic.
  Trustworthy wherever it converges in reasonable precision; used for
  small and moderate arguments.
* ``ml_ray_quad``: residue plus branch-cut integral evaluated with
  mpmath's adaptive quadrature for arguments of the form
  alpha * (-i*t)**beta.  Independent of both the package quadrature and
  the exact series; used where the series would need extreme precision.
"""

from __future__ import annotations

import mpmath as mp


def ml_exact_series(beta, gamma, z, dps: int = 60, terms: int = 4000) -> complex:
    """Taylor series with exact-mpf order arithmetic."""
    with mp.workdps(dps):
        b = mp.mpf(repr(beta))
        g = mp.mpf(repr(gamma))
        zz = mp.mpc(z)
        total = mp.mpc(0)
        zp = mp.mpc(1)
        for j in range(terms):
            term = zp / mp.gamma(b * j + g)
            total += term
            zp *= zz
            if abs(term) < mp.mpf(10) ** (-dps) * (1 + abs(total)) and j > 8:
                break
        return complex(total)


def ml_ray_quad(beta, gamma, alpha, t, dps: int = 40) -> complex:
    """Residue + branch-cut quadrature for E_{beta,gamma}(alpha*(-i*t)**beta).

    Exact integral representation; mp.quad supplies the numerics over the
    substituted variable x = r**beta, with panel breaks near |c|.
    """
    with mp.workdps(dps):
        b = mp.mpf(repr(beta))
        g = mp.mpf(repr(gamma))
        tt = mp.mpf(repr(t))
        c = mp.mpc(alpha) * (-mp.j) ** b
        val = mp.mpc(0)
        if abs(mp.arg(c)) < b * mp.pi:
            ss = c ** (1 / b)
            val += mp.e ** (ss * tt) * ss ** (1 - g) / b
        s1 = mp.sinpi(1 + b - g)
        s2 = mp.sinpi(1 - g)
        r1 = c * mp.e ** (1j * b * mp.pi)
        r2 = c * mp.e ** (-1j * b * mp.pi)

        def f(x):
            return (
                mp.e ** (-(x ** (1 / b)) * tt)
                * x ** ((1 - g) / b)
                * (c * s1 - x * s2)
                / ((x - r1) * (x - r2))
            )

        q = mp.quad(f, [0, abs(c) / 2, abs(c), 2 * abs(c), mp.inf])
        val -= q / (b * mp.pi)
        return complex(val * tt ** (1 - g))


def ml_reference(beta, gamma, z, dps: int = 60) -> complex:
    """Series reference with a precision bump for strongly cancelling sums."""
    growth = abs(complex(z)) ** (1.0 / float(beta))
    need = int(dps + 0.5 * growth)
    return ml_exact_series(beta, gamma, z, dps=need)
