//! Closed-form and truncated-sum evaluation of the renormalization
//! constants: the heat-trace `g_t`, the mollified counterterm `f_n(t)`, the
//! homogenization variance `sigma^2`, Littlewood-Paley block variances of
//! the potential, and the divergent square-variance partial sums.
//!
//! Every truncated lattice sum runs shell-by-shell in ascending `|k|_inf`
//! order (bit-stable) and reports a certified Gaussian tail bound obtained
//! by comparison with radial integrals.

use crate::besov::DyadicPartition;
use crate::gaussian::{Mollifier, RadialProfile};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Cutoff (lattice radius in `|k|_inf`) and dimension of a truncated sum.
#[derive(Debug, Clone, Copy)]
pub struct SumSpec {
    pub cutoff: usize,
    pub dim: usize,
}

impl SumSpec {
    pub fn new(cutoff: usize, dim: usize) -> Result<Self> {
        if cutoff == 0 || !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "sum spec needs cutoff >= 1 and dim in 1..=3, got K={cutoff}, d={dim}"
            )));
        }
        Ok(Self { cutoff, dim })
    }
}

/// A truncated sum together with an upper bound on the dropped tail.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ValueWithTail {
    pub value: f64,
    pub tail_bound: f64,
}

/// Iterate shells `m = 0..=K`, applying `f(k)` to every lattice point with
/// `|k|_inf = m`, in a fixed deterministic order.
fn sum_shells(spec: SumSpec, mut f: impl FnMut(&[i64]) -> f64) -> f64 {
    let k = spec.cutoff as i64;
    let mut total = 0.0;
    match spec.dim {
        1 => {
            for m in 0..=k {
                if m == 0 {
                    total += f(&[0]);
                } else {
                    total += f(&[m]) + f(&[-m]);
                }
            }
        }
        2 => {
            for m in 0..=k {
                let mut shell = 0.0;
                for a in -m..=m {
                    for b in -m..=m {
                        if a.abs().max(b.abs()) == m {
                            shell += f(&[a, b]);
                        }
                    }
                }
                total += shell;
            }
        }
        _ => {
            for m in 0..=k {
                let mut shell = 0.0;
                for a in -m..=m {
                    for b in -m..=m {
                        for c in -m..=m {
                            if a.abs().max(b.abs()).max(c.abs()) == m {
                                shell += f(&[a, b, c]);
                            }
                        }
                    }
                }
                total += shell;
            }
        }
    }
    total
}

/// Tail bound for `sum_{|k|_inf > K} e^{-a |k|^2}` by comparison with
/// `int_K^inf r^{d-1} e^{-a r^2} dr`: points on shell `m` number at most
/// `c_d m^{d-1}` and satisfy `|k|^2 >= m^2`. Requires the summand profile
/// to be decreasing from the cutoff on; otherwise the bound is infinite.
fn gaussian_tail(spec: SumSpec, a: f64) -> f64 {
    let k = spec.cutoff as f64;
    match spec.dim {
        // sum_{m > K} 2 e^{-a m^2} <= 2 int_K^inf e^{-a x^2} dx <= e^{-aK^2}/(aK)
        1 => (-a * k * k).exp() / (a * k),
        // sum_{m > K} 8 m e^{-a m^2} <= 8 int_K^inf (x+1) e^{-a x^2} dx
        //   <= (4 e^{-aK^2} / a)(1 + 1/K), valid once 2aK(K+1) > 1
        2 => {
            if 2.0 * a * k * (k + 1.0) <= 1.0 {
                f64::INFINITY
            } else {
                (4.0 * (-a * k * k).exp() / a) * (1.0 + 1.0 / k)
            }
        }
        // shell count <= 27 m^2 for m >= 1:
        // sum <= 27 int_K^inf (x+1)^2 e^{-a x^2} dx <= 27 e^{-aK^2} (K+2)^2/(2aK)
        _ => {
            if 2.0 * a * k <= 1.0 {
                f64::INFINITY
            } else {
                27.0 * (-a * k * k).exp() * (k + 2.0) * (k + 2.0) / (2.0 * a * k)
            }
        }
    }
}

/// Heat trace `g_t = (2 pi)^{-d} sum_{k in Z^d} e^{-t |k|^2}`; the PAM
/// counterterm density in d = 2. Decreasing in `t`, divergent time
/// integral at 0.
pub fn heat_trace_gt(t: f64, spec: SumSpec) -> Result<ValueWithTail> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat trace needs t > 0, got {t}"
        )));
    }
    let d = spec.dim;
    let norm = TWO_PI.powi(-(d as i32));
    let value = norm
        * sum_shells(spec, |k| {
            let ksq: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            (-t * ksq).exp()
        });
    let tail = norm * gaussian_tail(spec, t);
    Ok(ValueWithTail {
        value,
        tail_bound: tail,
    })
}

/// `int_delta^1 g_s ds`, evaluated mode-by-mode in closed form:
/// `(2 pi)^{-d} [ sum_{k != 0} (e^{-delta |k|^2} - e^{-|k|^2})/|k|^2 + (1 - delta) ]`.
/// Grows like `log(1/delta)/(4 pi)` in d = 2: the computational content of
/// the divergence of `int_0 g_s ds`.
pub fn heat_trace_time_integral(delta: f64, spec: SumSpec) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < delta < 1, got {delta}"
        )));
    }
    let d = spec.dim;
    let norm = TWO_PI.powi(-(d as i32));
    let sum = sum_shells(spec, |k| {
        let ksq: f64 = k.iter().map(|&x| (x * x) as f64).sum();
        if ksq == 0.0 {
            0.0
        } else {
            ((-delta * ksq).exp() - (-ksq).exp()) / ksq
        }
    });
    Ok(norm * (sum + (1.0 - delta)))
}

/// Mollified PAM counterterm
///
/// `f_n(t) = (2 pi)^{-2} sum_{k != 0} |F phi(k/n)|^2 (1 - e^{-t|k|^2}) / |k|^2
///           + (2 pi)^{-2} t`,
///
/// the expectation `E[X_n(t, x) xi_n(x)]` under the unit white-noise
/// normalization. Zero at `t = 0`, increasing in both `t` and `n`.
pub fn pam_counterterm_fn(t: f64, n: u32, mollifier: Mollifier, spec: SumSpec) -> Result<ValueWithTail> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "counterterm needs t >= 0, got {t}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("mollification level must be >= 1".into()));
    }
    let norm = TWO_PI.powi(-(spec.dim as i32));
    let value = norm
        * sum_shells(spec, |k| {
            let ksq: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            if ksq == 0.0 {
                return 0.0;
            }
            let damp = mollifier.hat(ksq.sqrt() / n as f64);
            damp * damp * (1.0 - (-t * ksq).exp()) / ksq
        })
        + norm * t;
    // |F phi(k/n)|^2 / |k|^2 <= e^{-|k|^2/n^2} / K^2 beyond the cutoff.
    let kk = (spec.cutoff * spec.cutoff) as f64;
    let tail = norm * gaussian_tail(spec, 1.0 / (n as f64 * n as f64)) / kk;
    Ok(ValueWithTail {
        value,
        tail_bound: tail,
    })
}

/// Outcome of the homogenization variance: the integral
/// `sigma^2 = (2 pi)^{-d/2} int R(k)/|k|^2 dk` is finite only for
/// `beta > 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSqLimit {
    Finite { value: f64, error_estimate: f64 },
    Divergent,
}

/// Radial quadrature of `sigma^2` with the convention fixed by the Gaussian
/// representation of `V_eps` (see `gaussian::sample_potential`):
///
/// `sigma^2 = (2 pi)^{-d/2} omega_{d-1} int_0^inf r^{beta-3} Rtilde(r) dr`.
pub fn sigma_sq_limit(rtilde: RadialProfile, beta: f64, dim: usize) -> Result<SigmaSqLimit> {
    if !(beta > 0.0) || !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "sigma^2 needs beta > 0 and dim in 1..=3, got beta={beta}, d={dim}"
        )));
    }
    if beta <= 2.0 {
        return Ok(SigmaSqLimit::Divergent);
    }
    let omega = match dim {
        1 => 2.0,
        2 => TWO_PI,
        _ => 2.0 * TWO_PI,
    };
    let r0 = rtilde.value(0.0);
    let delta = 0.1f64;
    let rmax = 14.0f64;
    // Split off the integrable singularity at 0 analytically.
    let head = r0 * delta.powf(beta - 2.0) / (beta - 2.0);
    let (i1, e1) = adaptive_simpson(
        |r| {
            if r == 0.0 {
                0.0
            } else {
                r.powf(beta - 3.0) * (rtilde.value(r) - r0)
            }
        },
        0.0,
        delta,
        1e-12,
    );
    let (i2, e2) = adaptive_simpson(|r| r.powf(beta - 3.0) * rtilde.value(r), delta, rmax, 1e-12);
    // Gaussian tail beyond rmax: r^{beta-3} e^{-r^2/2} <= e^{-r^2/4} sup(..)
    let tail = (-rmax * rmax / 4.0).exp() * (rmax.powf(beta - 3.0).max(1.0)) * 2.0 / rmax;
    let norm = TWO_PI.powf(-(dim as f64) / 2.0) * omega;
    Ok(SigmaSqLimit::Finite {
        value: norm * (head + i1 + i2),
        error_estimate: norm * (e1 + e2 + tail),
    })
}

/// Time-dependent lattice variance `sigma^2_eps(t) = E[|d/dx X^eps|^2(t,x)]`
/// under the same convention:
///
/// `(2 pi)^{-d/2} eps^{d+2-2 alpha} sum_{q != 0} [1-e^{-t q^2}]^2 R(eps q) / (eps q)^2`.
pub fn sigma_sq_eps(
    t: f64,
    eps: f64,
    alpha: f64,
    beta: f64,
    rtilde: RadialProfile,
    spec: SumSpec,
) -> Result<f64> {
    crate::gaussian::potential_mode_check(eps, beta)?;
    let d = spec.dim as f64;
    let norm = TWO_PI.powf(-d / 2.0) * eps.powf(d + 2.0 - 2.0 * alpha);
    Ok(norm
        * sum_shells(spec, |q| {
            let qsq: f64 = q.iter().map(|&x| (x * x) as f64).sum();
            if qsq == 0.0 {
                return 0.0;
            }
            let r = eps * qsq.sqrt();
            let wave = 1.0 - (-t * qsq).exp();
            wave * wave * r.powf(beta - d) * rtilde.value(r) / (r * r)
        }))
}

/// Deterministic block variance of the sampled potential on the grid the
/// partition lives on:
///
/// `E|Delta_i V_eps(x)|^2 = (2 pi)^{-d/2} eps^{d-2 alpha}
///  sum_{q != 0} rho_i(q)^2 R(eps q)`,
///
/// exactly the lattice sum seen by `gaussian::sample_potential`.
pub fn potential_block_variance(
    i: i64,
    eps: f64,
    alpha: f64,
    beta: f64,
    rtilde: RadialProfile,
    partition: &DyadicPartition,
) -> Result<f64> {
    crate::gaussian::potential_mode_check(eps, beta)?;
    let grid = partition.grid();
    let d = grid.dim() as f64;
    let rho = partition.multiplier(i);
    let prefactor = TWO_PI.powf(d / 2.0) * eps.powf(d - 2.0 * alpha);
    let mut total = 0.0;
    for flat in 0..grid.len() {
        if grid.is_nyquist(flat) || rho[flat] == 0.0 {
            continue;
        }
        let ksq = grid.k_sq(flat);
        if ksq == 0.0 {
            continue;
        }
        let r = eps * ksq.sqrt();
        // Per-mode variance of V_hat times the synthesis weight (2 pi)^{-d}.
        total += rho[flat] * rho[flat] * prefactor * r.powf(beta - d) * rtilde.value(r)
            / TWO_PI.powf(d);
    }
    Ok(total)
}

/// Partial sums of the divergent OU square variance
///
/// `(1/2) sum_{l+m=k, |l|,|m| <= N} (1 - e^{-2 l^2 t})(1 - e^{-2 m^2 t})`;
///
/// strictly increasing and asymptotically linear in `N` for `t > 0`.
pub fn ou_square_variance_partial(k: i64, t: f64, n: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "the k = 0 mode is treated separately; need k != 0".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need t >= 0, got {t}")));
    }
    let n = n as i64;
    let mut total = 0.0;
    for l in -n..=n {
        let m = k - l;
        if m.abs() <= n {
            let a = 1.0 - (-2.0 * (l * l) as f64 * t).exp();
            let b = 1.0 - (-2.0 * (m * m) as f64 * t).exp();
            total += a * b;
        }
    }
    Ok(0.5 * total)
}

/// `sum_{l+m=k} 1/(l^2+m^2)` truncated at `|l| <= N`; behaves like
/// `pi / |k|`, the bound used by the Ito-trick moment estimates.
pub fn inverse_k_sum(k: i64, n: usize) -> f64 {
    let n = n as i64;
    let mut total = 0.0;
    for l in -n..=n {
        let m = k - l;
        let denom = (l * l + m * m) as f64;
        if denom > 0.0 {
            total += 1.0 / denom;
        }
    }
    total
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

/// Plain recursive adaptive Simpson; returns `(integral, error_estimate)`.
fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let err = (left + right - whole).abs() / 15.0;
        if depth == 0 || err < tol {
            (left + right + (left + right - whole) / 15.0, err)
        } else {
            let (li, le) = rec(f, a, m, left, tol / 2.0, depth - 1);
            let (ri, re) = rec(f, m, b, right, tol / 2.0, depth - 1);
            (li + ri, le + re)
        }
    }
    let whole = simpson(&f, a, b);
    rec(&f, a, b, whole, tol, 28)
}

/// One named constant of the committed fixture table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConstantRow {
    pub name: String,
    pub params: String,
    pub value: f64,
    pub tail_bound: f64,
}

/// The canonical fixture table: every [deterministic] constant the solver
/// tests pin. Regenerated by `parapde oracle regen`, compared bit-for-bit.
pub fn constants_table() -> Result<Vec<ConstantRow>> {
    let mut rows = Vec::new();
    let spec2 = SumSpec::new(8, 2)?;
    for t in [0.25, 0.5, 1.0] {
        let g = heat_trace_gt(t, spec2)?;
        rows.push(ConstantRow {
            name: "heat_trace_gt".into(),
            params: format!("t={t};K=8;d=2"),
            value: g.value,
            tail_bound: g.tail_bound,
        });
    }
    let spec32 = SumSpec::new(32, 2)?;
    for n in [2u32, 4, 8, 16] {
        let f = pam_counterterm_fn(0.5, n, Mollifier::Gaussian, spec32)?;
        rows.push(ConstantRow {
            name: "pam_counterterm_fn".into(),
            params: format!("t=0.5;n={n};K=32;d=2"),
            value: f.value,
            tail_bound: f.tail_bound,
        });
    }
    for (dim, beta) in [(1usize, 2.5f64), (2, 2.5), (3, 2.5)] {
        if let SigmaSqLimit::Finite {
            value,
            error_estimate,
        } = sigma_sq_limit(RadialProfile::Gaussian, beta, dim)?
        {
            rows.push(ConstantRow {
                name: "sigma_sq_limit".into(),
                params: format!("beta={beta};d={dim};Rtilde=gaussian"),
                value,
                tail_bound: error_estimate,
            });
        }
    }
    for n in [64usize, 128] {
        rows.push(ConstantRow {
            name: "ou_square_variance_partial".into(),
            params: format!("k=1;t=0.4;N={n}"),
            value: ou_square_variance_partial(1, 0.4, n)?,
            tail_bound: 0.0,
        });
    }
    Ok(rows)
}
