//! Bessel functions of the first kind of orders 0..=3 for real arguments.
//!
//! Three regimes:
//! * `x <= SERIES_MAX`: ascending power series of `J_n(x) / x^n` (no cancellation
//!   worth worrying about at this size of argument),
//! * `SERIES_MAX < x < HANKEL_MIN`: Miller backward recurrence normalised by
//!   `J_0 + 2 sum J_2k = 1`,
//! * `x >= HANKEL_MIN`: Hankel asymptotic expansion truncated at its smallest
//!   term, with forward recurrence for orders 2 and 3.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_MAX: f64 = 5.0;
const HANKEL_MIN: f64 = 25.0;

/// `J_n(x) / x^n` for n = 0..=3 (each entire in `x^2`, so finite at the origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBessel {
    pub j0: f64,
    pub j1_x: f64,
    pub j2_x2: f64,
    pub j3_x3: f64,
}

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    scaled_bessel(x).j0
}

/// Bessel function of the first kind, order 1. Odd in `x`.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_MAX {
        series(ax, 1)
    } else if ax < HANKEL_MIN {
        miller(ax)[1]
    } else {
        hankel(ax, 1)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `J_0(x), J_1(x)/x, J_2(x)/x^2, J_3(x)/x^3` evaluated together.
pub fn scaled_bessel(x: f64) -> ScaledBessel {
    let x = x.abs();
    if x <= SERIES_MAX {
        let y = 0.25 * x * x;
        ScaledBessel {
            j0: series_scaled(y, 0),
            j1_x: series_scaled(y, 1),
            j2_x2: series_scaled(y, 2),
            j3_x3: series_scaled(y, 3),
        }
    } else if x < HANKEL_MIN {
        let j = miller(x);
        ScaledBessel {
            j0: j[0],
            j1_x: j[1] / x,
            j2_x2: j[2] / (x * x),
            j3_x3: j[3] / (x * x * x),
        }
    } else {
        let (sx, cx) = x.sin_cos();
        let j0 = hankel_with(x, 0, sx, cx);
        let j1 = hankel_with(x, 1, sx, cx);
        let j2 = 2.0 * j1 / x - j0;
        let j3 = 4.0 * j2 / x - j1;
        ScaledBessel {
            j0,
            j1_x: j1 / x,
            j2_x2: j2 / (x * x),
            j3_x3: j3 / (x * x * x),
        }
    }
}

/// `J_n(x)/x^n = 2^-n sum_k (-y)^k / (k! (n+k)!)`, `y = x^2/4`.
fn series_scaled(y: f64, n: u32) -> f64 {
    let mut term = 1.0;
    for k in 1..=n {
        term /= 2.0 * k as f64;
    }
    let mut sum = term;
    for k in 1..60 {
        let kf = k as f64;
        term *= -y / (kf * (kf + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn series(x: f64, n: u32) -> f64 {
    series_scaled(0.25 * x * x, n) * x.powi(n as i32)
}

/// Miller's algorithm; returns `[J_0, J_1, J_2, J_3](x)`.
fn miller(x: f64) -> [f64; 4] {
    let mut top = (1.5 * x) as usize + 40;
    if top % 2 == 1 {
        top += 1;
    }
    let mut out = [0.0; 4];
    let mut next = 0.0; // j_{k+1}
    let mut cur = 1e-250; // j_k
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=top).rev() {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        if k <= 3 {
            out[k] = cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

fn hankel(x: f64, nu: u32) -> f64 {
    let (sx, cx) = x.sin_cos();
    hankel_with(x, nu, sx, cx)
}

/// `J_nu(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi)`, `chi = x - (nu/2 + 1/4) pi`.
/// `cos chi` and `sin chi` are assembled from `sin x`, `cos x` so that the large
/// argument reduction is done by libm on the exact `x`.
fn hankel_with(x: f64, nu: u32, sx: f64, cx: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) * inv8x / k as f64;
        let mag = a.abs();
        if mag > last || mag < 1e-17 {
            break;
        }
        last = mag;
        // k odd -> Q terms, k even -> P terms, signs alternate within each.
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    // phi = (nu/2 + 1/4) pi
    let (cphi, sphi) = if nu.is_multiple_of(2) {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else {
        (-FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    };
    let (cphi, sphi) = if nu % 4 >= 2 {
        (-cphi, -sphi)
    } else {
        (cphi, sphi)
    };
    let cchi = cx * cphi + sx * sphi;
    let schi = sx * cphi - cx * sphi;
    (2.0 / (PI * x)).sqrt() * (p * cchi - q * schi)
}
