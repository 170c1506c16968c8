"""Golden values for the m-th model solution, evaluated directly from the
sinh/cosh closed forms at 40 digits (independent of the polynomial path used
in the library)."""
import mpmath as mp

mp.mp.dps = 40


def fields(m, t, z1, z2):
    r = mp.sqrt(z1 * z1 + z2 * z2)
    th = mp.asinh(t / r)
    n = m + 1
    x2 = t * t + r * r
    rho = n * mp.sinh(th) / mp.sinh(n * th)
    kap = mp.cosh(n * th) / mp.cosh(th)
    alpha = -rho * kap / (2 * t)
    phase = ((z1 + 1j * z2) / r) ** m
    phi = -rho / (2 * t) * phase  # times (sigma1 - i sigma2)
    f = n / 2 * (1 - mp.tanh(th) / mp.tanh(n * th)) / (r * r)
    A1 = -f * z2
    A2 = f * z1
    h = n * mp.sinh(th) * mp.cosh(th) / (mp.sinh(n * th) * mp.cosh(n * th))
    B = n / (2 * x2) * mp.tanh(th) / mp.tanh(n * th) * (1 - h)
    Ecoef = -n / (2 * x2) / mp.tanh(n * th) * (1 - h) / mp.sqrt(x2)
    E1 = -Ecoef * z2
    E2 = Ecoef * z1
    return dict(alpha=alpha, phi=phi, A1=A1, A2=A2, B=B, E1=E1, E2=E2)


if __name__ == "__main__":
    for (m, t, z1, z2) in [(2, 1, 1, 0), (1, 0.7, 0.3, 0.4), (3, 2.0, -0.5, 1.5)]:
        v = fields(m, mp.mpf(t), mp.mpf(z1), mp.mpf(z2))
        print(m, t, z1, z2)
        for k, x in v.items():
            if isinstance(x, mp.mpc):
                print(f"  {k}: {mp.nstr(x.real, 17)} {mp.nstr(x.imag, 17)}")
            else:
                print(f"  {k}: {mp.nstr(x, 17)}")
