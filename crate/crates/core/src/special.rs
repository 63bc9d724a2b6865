//! Special functions: integer-order Bessel functions, the spherical Bessel
//! function j1, the sine integral and the resolution kernels built from it.

use std::f64::consts::FRAC_PI_2;

/// Bessel functions of the first kind `J_0(x) ..= J_{n_max}(x)`.
///
/// Miller's backward recurrence normalised with `J_0 + 2 sum J_{2k} = 1`;
/// stable for every order including `n_max < |x|`.
pub fn bessel_j_orders(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (n_max as f64).max(ax);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if k - 1 <= n_max {
            out[k - 1] = j_cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            sum += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    sum += j_cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_orders(x, order)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Spherical Bessel function of the first kind, order one.
pub fn spherical_j1(z: f64) -> f64 {
    if z.abs() < 1.0 {
        // z * sum_k (-z^2/2)^k / (k! (2k+3)!!)
        let h = -0.5 * z * z;
        let mut term = 1.0 / 3.0;
        let mut sum = term;
        for k in 1..16 {
            term *= h / (k as f64 * (2 * k + 3) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        z * sum
    } else {
        let (s, c) = z.sin_cos();
        s / (z * z) - c / z
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let si = if ax == 0.0 {
        0.0
    } else if ax < 4.0 {
        let x2 = ax * ax;
        let mut term = ax;
        let mut sum = ax;
        let mut k = 0;
        loop {
            k += 1;
            let kk = (2 * k) as f64;
            term *= -x2 / (kk * (kk + 1.0));
            let add = term / (kk + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // continued fraction for E1(i x), modified Lentz
        let tiny = 1e-300;
        let mut b = (1.0, ax);
        let mut c = (1.0 / tiny, 0.0);
        let mut d = cinv(b);
        let mut h = d;
        for i in 2..2000 {
            let a = -((i - 1) * (i - 1)) as f64;
            b.0 += 2.0;
            d = cinv(cadd(cscale(d, a), b));
            c = cadd(b, cscale(cinv(c), a));
            let del = cmul(c, d);
            h = cmul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < 1e-16 {
                break;
            }
        }
        let (s, co) = ax.sin_cos();
        let h = cmul((co, -s), h);
        FRAC_PI_2 + h.1
    };
    si.copysign(x)
}

/// `1 - Si(y)/y`, accurate as `y -> 0` where it behaves like `y^2/18`.
pub fn one_minus_si_ratio(y: f64) -> f64 {
    let ay = y.abs();
    if ay < 2.0 {
        // sum_{k>=1} (-1)^{k+1} y^{2k} / ((2k+1)(2k+1)!)
        let y2 = ay * ay;
        let mut fact = 1.0; // (2k+1)!
        let mut pow = 1.0;
        let mut sum = 0.0;
        for k in 1..30 {
            let kk = (2 * k) as f64;
            fact *= kk * (kk + 1.0);
            pow *= -y2;
            let term = -pow / ((kk + 1.0) * fact);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - sine_integral(ay) / ay
    }
}

/// `1 - [Si(2y)/y - sinc^2(y)]`, the complement of the Rayleigh-scattering
/// resolution kernel; behaves like `y^2/9` near zero.
pub fn one_minus_scattering_kernel(y: f64) -> f64 {
    let ay = y.abs();
    if ay < 1.0 {
        // sum_{k>=1} (-1)^k 2^{2k+1} y^{2k} [1/(2k+2)! - 1/((2k+1)(2k+1)!)]
        let mut sum = 0.0;
        let mut pow = 2.0; // 2^{2k+1} y^{2k} (-1)^k
        let mut fact_odd = 1.0; // (2k+1)!
        for k in 1..30 {
            let kk = (2 * k) as f64;
            pow *= -4.0 * ay * ay;
            fact_odd *= kk * (kk + 1.0);
            let fact_even = fact_odd * (kk + 2.0);
            let term = pow * (1.0 / fact_even - 1.0 / ((kk + 1.0) * fact_odd));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let s = sinc(ay);
        1.0 - sine_integral(2.0 * ay) / ay + s * s
    }
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

type C = (f64, f64);

fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cscale(a: C, s: f64) -> C {
    (a.0 * s, a.1 * s)
}

fn cinv(a: C) -> C {
    let n = a.0 * a.0 + a.1 * a.1;
    (a.0 / n, -a.1 / n)
}
