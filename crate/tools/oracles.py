"""Independent high-precision reference values used by the Rust test suite.

Every number frozen into a test as a derived expectation is produced here with
mpmath at 40 significant digits, without sharing any code path with the crate.
Run: python3 tools/oracles.py
"""
import mpmath as mp

mp.mp.dps = 40

H = mp.mpf("6.62607015e-34")
HBAR = H / (2 * mp.pi)
KB = mp.mpf("1.380649e-23")
C = mp.mpf("299792458")
AMU = mp.mpf("1.66053906660e-27")


def talbot_time(mass_amu, pitch):
    return mass_amu * AMU * pitch**2 / H


def sigma_x(mass_amu, omega_hz, t_com):
    m = mass_amu * AMU
    return mp.sqrt(KB * t_com / (4 * mp.pi**2 * m * omega_hz**2))


def sph_jn(n, z):
    return mp.sqrt(mp.pi / (2 * z)) * mp.besselj(n + mp.mpf(1) / 2, z)


def sph_yn(n, z):
    return mp.sqrt(mp.pi / (2 * z)) * mp.bessely(n + mp.mpf(1) / 2, z)


def mie_s1_s2(x, m, theta, nterms=60):
    """Brute-force Mie series from spherical Bessel functions (no recurrences)."""
    x = mp.mpf(x)
    m = mp.mpc(m)
    mx = m * x
    mu = mp.cos(theta)
    s1 = mp.mpc(0)
    s2 = mp.mpc(0)
    for n in range(1, nterms + 1):
        psi = lambda z: z * sph_jn(n, z)
        xi = lambda z: z * (sph_jn(n, z) + 1j * sph_yn(n, z))
        dpsi = lambda z: mp.diff(psi, z)
        dxi = lambda z: mp.diff(xi, z)
        psi_mx = psi(mx)
        dpsi_mx = dpsi(mx)
        a = (m * psi_mx * dpsi(x) - psi(x) * dpsi_mx) / (m * psi_mx * dxi(x) - xi(x) * dpsi_mx)
        b = (psi_mx * dpsi(x) - m * psi(x) * dpsi_mx) / (psi_mx * dxi(x) - m * xi(x) * dpsi_mx)
        # angular functions from associated Legendre polynomials
        if abs(mu) == 1:
            pin = mp.mpf(n * (n + 1)) / 2 * (mu ** (n + 1))
            taun = mp.mpf(n * (n + 1)) / 2 * (mu ** n)
        else:
            st = mp.sqrt(1 - mu**2)
            pin = -mp.legenp(n, 1, mu) / st
            taun = -mp.diff(lambda t: mp.legenp(n, 1, mp.cos(t)), theta)
        # convention: P_n^1 with Condon-Shortley phase, hence the sign flips
        w = mp.mpf(2 * n + 1) / (n * (n + 1))
        s1 += w * (a * pin + b * taun)
        s2 += w * (a * taun + b * pin)
    return s1, s2


def j1(z):
    if z == 0:
        return mp.mpf(0)
    return mp.sin(z) / z**2 - mp.cos(z) / z


def csl_integral(ratio):
    return mp.quad(lambda a: mp.e ** (-a**2) * j1(a * ratio) ** 2, mp.linspace(0, 14, 60))


def csl_one_minus_f(ratio, x_over_rc):
    num = mp.quad(
        lambda a: mp.e ** (-a**2) * j1(a * ratio) ** 2 * (1 - mp.si(a * x_over_rc) / (a * x_over_rc)),
        mp.linspace(0, 14, 200),
    )
    return num / csl_integral(ratio)


def main():
    print("talbot_time 1e8 u, 177 nm:", mp.nstr(talbot_time(mp.mpf("1e8"), mp.mpf("177e-9")), 17))
    print("sigma_x 1e8 u, 200 kHz, 20 mK:", mp.nstr(sigma_x(mp.mpf("1e8"), mp.mpf("2e5"), mp.mpf("0.02")), 17))

    for th in [mp.mpf(0), mp.pi / 6, mp.pi / 2, 2 * mp.pi / 3, mp.pi]:
        s1, s2 = mie_s1_s2("0.5", "1.5", th)
        print("mie x=0.5 m=1.5 theta=%s: S1=%s S2=%s" % (mp.nstr(th, 17), mp.nstr(s1, 17), mp.nstr(s2, 17)))
    s1, s2 = mie_s1_s2("2.0", mp.mpc("1.5", "0.1"), mp.pi / 3)
    print("mie x=2 m=1.5+0.1i theta=pi/3: S1=%s S2=%s" % (mp.nstr(s1, 17), mp.nstr(s2, 17)))

    print("csl integral ratio=1:", mp.nstr(csl_integral(mp.mpf(1)), 17))
    print("csl integral ratio=5:", mp.nstr(csl_integral(mp.mpf(5)), 17))
    print("csl 1-f ratio=1 x/rc=1:", mp.nstr(csl_one_minus_f(mp.mpf(1), mp.mpf(1)), 17))
    print("csl 1-f ratio=0.3 x/rc=2:", mp.nstr(csl_one_minus_f(mp.mpf("0.3"), mp.mpf(2)), 17))

    print("pointlike f at x=2rc:", mp.nstr(mp.sqrt(mp.pi) / 2 * mp.erf(1), 17))
    print("R1 meas sigma=10nm D=265.5nm:", mp.nstr(mp.e ** (-((2 * mp.pi * 10 / mp.mpf("265.5")) ** 2) / 2), 17))

    p = [mp.mpf(1) / 3] * 3
    q = [mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.2")]
    print("KL 3-node bits:", mp.nstr(sum(qi * mp.log(qi / pi, 2) for qi, pi in zip(q, p)), 17))

    # hard-sphere collision rate, H2 at 20 K, 1e-15 hPa, Si sphere of 1e8 u
    m = mp.mpf("1e8") * AMU
    radius = (3 * m / (4 * mp.pi * 2329)) ** (mp.mpf(1) / 3)
    pg = mp.mpf("1e-15") * 100
    t = mp.mpf(20)
    mgas = mp.mpf("2.016") * AMU
    rate = pg / (KB * t) * mp.sqrt(8 * KB * t / (mp.pi * mgas)) * mp.pi * radius**2
    print("radius 1e8 u Si:", mp.nstr(radius, 17))
    print("collision rate:", mp.nstr(rate, 17))

    # GRW point CSL reduction for n = 1 with t1 = 2 tT, t2 = tT, d = 177 nm
    tt = talbot_time(mp.mpf("1e8"), mp.mpf("177e-9"))
    t1, t2 = 2 * tt, tt
    d = mp.mpf("177e-9")
    D = d * (t1 + t2) / t1
    x1 = H * t2 / (m * D)
    rc = mp.mpf("1e-7")
    lam = mp.mpf("1e-16")
    ratio = radius / rc
    a_pref = 36 / mp.sqrt(mp.pi) * mp.mpf("1e8") ** 2 * (rc / radius) ** 2
    gamma = a_pref * lam * csl_integral(ratio)
    omf = csl_one_minus_f(ratio, x1 / rc)
    print("GRW gamma:", mp.nstr(gamma, 17), "x1:", mp.nstr(x1, 17), "1-f:", mp.nstr(omf, 17))
    print("GRW R1:", mp.nstr(mp.e ** (-gamma * omf * (t1 + t2)), 17))

    # blackbody absorption rate closed form (constant permittivity)
    eps = mp.mpc("11.7", "0.1")
    vol = 4 * mp.pi / 3 * radius**3
    chi = 3 * vol * (eps - 1) / (eps + 2)
    a = HBAR * C / (KB * t)
    print("bb abs rate 20K eps 11.7+0.1i:", mp.nstr(C * chi.imag / mp.pi**2 * mp.pi**4 / 15 / a**4, 17))
    print("bb sca rate 20K:", mp.nstr(C * abs(chi) ** 2 / (6 * mp.pi**3) * 720 * mp.zeta(7) / a**7, 17))


if __name__ == "__main__":
    main()
