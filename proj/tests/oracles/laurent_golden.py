"""Pole coefficients of 1/wp at z = 0, from a sympy Laurent expansion of
1/(a_1 z^(k-1) + ... + a_p z^(k-p)) (m only shifts the exponent)."""
import sympy as sp

z = sp.symbols("z")
CASES = [
    [sp.Rational(7, 10), 1],
    [sp.Rational(1, 2) + sp.I / 3, -2 + sp.I],
    [1, -sp.Rational(3, 2), 2 + sp.I],
]

for a in CASES:
    p = len(a)
    poly = sum(a[p - 1 - j] * z ** j for j in range(p))
    ser = sp.series(a[-1] / poly, z, 0, p + 3).removeO()
    coeffs = [sp.nsimplify(ser.coeff(z, n)) for n in range(p + 3)]
    # mu_i = c_{p-i}
    mus = [complex(sp.N(coeffs[p - i], 20)) for i in range(1, p)]
    print("a =", [complex(sp.N(x)) for x in a])
    print("  c =", [complex(sp.N(c, 20)) for c in coeffs])
    print("  mu_1..mu_{p-1} =", mus)
