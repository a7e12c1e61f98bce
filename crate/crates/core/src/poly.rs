//! Real roots of real polynomials by Sturm sequences and bisection.

/// Coefficients in ascending order, `p(x) = Σ cₖ xᵏ`.
fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn trim(mut p: Vec<f64>, tol: f64) -> Vec<f64> {
    while p.len() > 1 && p.last().unwrap().abs() <= tol {
        p.pop();
    }
    p
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Remainder of `a / b`.
fn remainder(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db];
    while r.len() > db && r.len() > 1 {
        let dr = r.len() - 1;
        let f = r[dr] / lead;
        for (k, &bk) in b.iter().enumerate() {
            r[dr - db + k] -= f * bk;
        }
        r.pop();
    }
    r
}

fn sturm_sequence(p: &[f64]) -> Vec<Vec<f64>> {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let mut seq = vec![p.to_vec(), derivative(p)];
    loop {
        let n = seq.len();
        if seq[n - 1].len() <= 1 {
            break;
        }
        let r: Vec<f64> = remainder(&seq[n - 2], &seq[n - 1])
            .iter()
            .map(|c| -c)
            .collect();
        let r = trim(r, 1e-13 * scale);
        if r.len() == 1 && r[0].abs() <= 1e-13 * scale {
            break;
        }
        seq.push(r);
    }
    seq
}

fn sign_changes(seq: &[Vec<f64>], x: f64) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for p in seq {
        let v = eval(p, x);
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Distinct real roots of `p` in `(lo, hi]`, ascending.
pub fn real_roots_in(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let p = trim(p.to_vec(), 1e-15 * scale);
    if p.len() < 2 {
        return Vec::new();
    }
    let seq = sturm_sequence(&p);
    let mut out = Vec::new();
    isolate(
        &p,
        &seq,
        lo,
        hi,
        sign_changes(&seq, lo),
        sign_changes(&seq, hi),
        &mut out,
        0,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn isolate(
    p: &[f64],
    seq: &[Vec<f64>],
    a: f64,
    b: f64,
    va: usize,
    vb: usize,
    out: &mut Vec<f64>,
    depth: u32,
) {
    let n = va.saturating_sub(vb);
    if n == 0 {
        return;
    }
    if n == 1 || depth > 200 || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
        out.push(refine(p, seq, a, b, va));
        return;
    }
    let mid = 0.5 * (a + b);
    let vm = sign_changes(seq, mid);
    isolate(p, seq, a, mid, va, vm, out, depth + 1);
    isolate(p, seq, mid, b, vm, vb, out, depth + 1);
}

/// Bisection on a single-root bracket `(a, b]`, by sign where `p` changes sign
/// and by Sturm count otherwise (even multiplicity).
fn refine(p: &[f64], seq: &[Vec<f64>], mut a: f64, mut b: f64, va: usize) -> f64 {
    let fb = eval(p, b);
    if fb == 0.0 {
        return b;
    }
    let sign_change = eval(p, a) * fb < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let left = if sign_change {
            let fm = eval(p, mid);
            if fm == 0.0 {
                return mid;
            }
            fm * fb > 0.0
        } else {
            sign_changes(seq, mid) < va
        };
        if left {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Cauchy bound: every root satisfies `|x| <= 1 + max |cₖ / c_n|`.
pub fn root_bound(p: &[f64]) -> f64 {
    let n = p.len() - 1;
    let lead = p[n].abs();
    1.0 + p[..n].iter().fold(0.0f64, |m, c| m.max(c.abs() / lead))
}
