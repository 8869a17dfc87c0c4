//! Deterministic Monte-Carlo statistics: fixed-order pairwise reductions,
//! standard errors, seed derivation and least-squares fits.

/// Pairwise (cascade) summation in a fixed order; bit-stable regardless of
/// how replicas were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Sample mean with standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    /// `|mean - target| <= max(abs_tol, z * stderr)`.
    pub fn within(&self, target: f64, z: f64, abs_tol: f64) -> bool {
        (self.mean - target).abs() <= (z * self.stderr).max(abs_tol)
    }
}

pub fn mean_stderr(xs: &[f64]) -> MeanStderr {
    let n = xs.len();
    if n == 0 {
        return MeanStderr {
            mean: 0.0,
            stderr: 0.0,
            n: 0,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return MeanStderr {
            mean,
            stderr: 0.0,
            n,
        };
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    MeanStderr {
        mean,
        stderr: (var / n as f64).sqrt(),
        n,
    }
}

/// Least-squares line through `(x_i, y_i)`: returns `(slope, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `log y` against `log x` (fitted scaling exponent).
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly).0
}

/// Empirical `E[x^2] / (E[x])^2` from samples of a nonnegative quantity
/// (hypercontractivity ratio when fed samples of `|Z|^2`).
pub fn moment_ratio(sq_samples: &[f64]) -> f64 {
    let m1 = pairwise_sum(sq_samples) / sq_samples.len() as f64;
    let fourth: Vec<f64> = sq_samples.iter().map(|x| x * x).collect();
    let m2 = pairwise_sum(&fourth) / sq_samples.len() as f64;
    m2 / (m1 * m1)
}

/// Replica seed derivation: FNV-1a over `(master, label, replica)` so that
/// adding experiments never perturbs existing streams.
pub fn derive_seed(master: u64, label: &str, replica: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h = (h ^ b as u64).wrapping_mul(PRIME);
        }
    };
    eat(&master.to_le_bytes());
    eat(label.as_bytes());
    eat(&replica.to_le_bytes());
    h
}
