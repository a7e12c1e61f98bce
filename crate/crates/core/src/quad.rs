//! Fixed Gauss–Legendre rules and an adaptive Gauss–Kronrod (10/21) integrator
//! for complex, vector-valued integrands.

use num_complex::Complex64;

/// Abscissae and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_629_586,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights belonging to XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss–Kronrod 21-point panel; returns the Kronrod value and |K21 - G10|.
pub fn gk21<const N: usize, F>(f: &F, a: f64, b: f64) -> ([Complex64; N], f64)
where
    F: Fn(f64) -> [Complex64; N],
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron = [Complex64::new(0.0, 0.0); N];
    let mut gauss = [Complex64::new(0.0, 0.0); N];

    let fc = f(mid);
    for i in 0..N {
        kron[i] = fc[i] * WGK[10];
    }
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        for i in 0..N {
            let s = f1[i] + f2[i];
            kron[i] += s * wk;
            if j % 2 == 1 {
                gauss[i] += s * WG[j / 2];
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..N {
        kron[i] *= half;
        gauss[i] *= half;
        err = err.max((kron[i] - gauss[i]).norm());
    }
    (kron, err)
}

/// Tolerances and panelling for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute error target per panel.
    pub abs_tol: f64,
    /// Relative error target per panel.
    pub rel_tol: f64,
    /// Intervals are first cut into panels no longer than this.
    pub panel_len: f64,
    /// Maximum bisection depth below a panel.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            panel_len: 2.0,
            max_depth: 30,
        }
    }
}

impl QuadratureConfig {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }
}

fn adapt<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    whole: ([Complex64; N], f64),
    tol: f64,
    rel: f64,
    depth: u32,
) -> ([Complex64; N], f64)
where
    F: Fn(f64) -> [Complex64; N],
{
    let (val, err) = whole;
    let scale = val.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if err <= tol.max(rel * scale) || depth == 0 || (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
        return (val, err);
    }
    let mid = 0.5 * (a + b);
    let left = gk21(f, a, mid);
    let right = gk21(f, mid, b);
    let (lv, le) = adapt(f, a, mid, left, 0.5 * tol, rel, depth - 1);
    let (rv, re) = adapt(f, mid, b, right, 0.5 * tol, rel, depth - 1);
    let mut out = lv;
    for i in 0..N {
        out[i] += rv[i];
    }
    (out, le + re)
}

/// Adaptive integral of `f` over [a, b] (a <= b) with the interval pre-split at
/// every point of `breaks` that falls strictly inside and into panels no longer
/// than `cfg.panel_len`.
pub fn integrate<const N: usize, F>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> ([Complex64; N], f64)
where
    F: Fn(f64) -> [Complex64; N],
{
    let mut total = [Complex64::new(0.0, 0.0); N];
    let mut total_err = 0.0;
    if b <= a {
        return (total, total_err);
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(b);
    for seg in cuts.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let pieces = ((s1 - s0) / cfg.panel_len).ceil().max(1.0) as usize;
        let h = (s1 - s0) / pieces as f64;
        for k in 0..pieces {
            let lo = s0 + k as f64 * h;
            let hi = if k + 1 == pieces { s1 } else { lo + h };
            let first = gk21(f, lo, hi);
            let (v, e) = adapt(f, lo, hi, first, cfg.abs_tol, cfg.rel_tol, cfg.max_depth);
            for i in 0..N {
                total[i] += v[i];
            }
            total_err += e;
        }
    }
    (total, total_err)
}

/// Real scalar convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> f64 {
    let g = |x: f64| [Complex64::new(f(x), 0.0)];
    integrate(&g, a, b, &[], cfg).0[0].re
}
