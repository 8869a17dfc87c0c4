//! Seeded Gaussian field samplers: space white noise, the exact
//! Ornstein-Uhlenbeck transition, spatial mollification, and the rescaled
//! random potential of the homogenization problem.
//!
//! Every sampler is a pure function of `(seed, replica)`: modes are drawn
//! in a fixed canonical order from a counter-based stream, so replicated
//! Monte-Carlo runs are replayable bit for bit on any thread.

use crate::spectral::{SpectralField, TorusGrid};
use crate::stats::derive_seed;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Per-mode variance convention for spatial white noise.
///
/// The convention `eta(phi) ~ N(0, |phi|^2 / 2)` — the invariant law of
/// the mode-wise OU process — gives `E|xi_hat(k)|^2 = 1/2` (`Half`, the
/// default); the convention `E[xi_hat(k) xi_hat(k')] = delta_{k+k'=0}`
/// that the PAM renormalization constants are derived under gives
/// `E|xi_hat(k)|^2 = 1` (`Unit`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseNormalization {
    Half,
    Unit,
}

impl NoiseNormalization {
    pub fn mode_variance(self) -> f64 {
        match self {
            NoiseNormalization::Half => 0.5,
            NoiseNormalization::Unit => 1.0,
        }
    }
}

/// Spatial mollifier profile; `hat(z)` is the full-space Fourier transform
/// of the unit-mass kernel, so `hat(0) = 1` always.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mollifier {
    /// `F phi (z) = exp(-|z|^2 / 2)`; gives a closed-form counterterm.
    Gaussian,
}

impl Mollifier {
    pub fn hat(self, z: f64) -> f64 {
        match self {
            Mollifier::Gaussian => (-0.5 * z * z).exp(),
        }
    }
}

/// Radial profile `Rtilde` of the potential spectrum `R(k) = |k|^{beta - d}
/// Rtilde(|k|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `Rtilde(r) = exp(-r^2 / 2)`.
    Gaussian,
}

impl RadialProfile {
    pub fn value(self, r: f64) -> f64 {
        match self {
            RadialProfile::Gaussian => (-0.5 * r * r).exp(),
        }
    }

    pub fn sup(self) -> f64 {
        1.0
    }
}

/// Draw a standard complex Gaussian with `E|g|^2 = var` (real and imaginary
/// parts independent `N(0, var/2)`).
fn complex_gaussian(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Fill a field with independent Hermitian-paired complex Gaussians of
/// per-mode variance `var(flat)`; the `k = 0` mode is real with variance
/// `var(0)`. Draws run over the canonical half lattice in flat order.
fn sample_hermitian_gaussian(
    grid: TorusGrid,
    rng: &mut ChaCha8Rng,
    var: impl Fn(usize) -> f64,
) -> SpectralField {
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for flat in 0..grid.len() {
        if grid.is_nyquist(flat) {
            continue;
        }
        let c = grid.conjugate_index(flat);
        if c == flat {
            let x: f64 = rng.sample(StandardNormal);
            coeffs[flat] = Complex64::new(var(flat).sqrt() * x, 0.0);
        } else if flat < c {
            let g = complex_gaussian(rng, var(flat));
            coeffs[flat] = g;
            coeffs[c] = g.conj();
        }
    }
    SpectralField::from_coeffs(grid, coeffs, true).expect("hermitian by construction")
}

/// Space white noise: i.i.d. complex mode amplitudes with Hermitian
/// symmetry and `E|xi_hat(k)|^2` given by the normalization flag.
pub fn sample_space_white_noise(
    grid: TorusGrid,
    seed: u64,
    replica: u64,
    norm: NoiseNormalization,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "space-white-noise", replica));
    let v = norm.mode_variance();
    sample_hermitian_gaussian(grid, &mut rng, |_| v)
}

/// Synthetic field of prescribed Besov regularity: `fhat(k) ~ |k|^{-alpha -
/// d/2} g(k)` with standard complex Gaussian `g`. Used by the norm
/// batteries and fitted-constant tests.
pub fn sample_regularity_field(
    grid: TorusGrid,
    alpha: f64,
    seed: u64,
    replica: u64,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "regularity-field", replica));
    let d = grid.dim() as f64;
    let decay = move |flat: usize| -> f64 {
        let ksq = grid.k_sq(flat);
        if ksq == 0.0 {
            0.0
        } else {
            ksq.sqrt().powf(-2.0 * alpha - d)
        }
    };
    sample_hermitian_gaussian(grid, &mut rng, decay)
}

/// Coefficient-wise mollification: mode `k` is damped by `F phi(k / n)`.
/// `n -> infinity` recovers the input on any fixed band.
pub fn mollify(xi: &SpectralField, n: u32, profile: Mollifier) -> Result<SpectralField> {
    if n == 0 {
        return Err(Error::InvalidArgument("mollification level must be >= 1".into()));
    }
    let grid = xi.grid();
    Ok(xi.apply_multiplier(|flat| profile.hat(grid.k_sq(flat).sqrt() / n as f64)))
}

/// State of the Fourier-mode Ornstein-Uhlenbeck process
/// `dX(e_k) = -k^2 X(e_k) dt + i k d beta(k)`.
///
/// `mode_damping`, when set, scales the noise amplitude of mode `k` (used
/// for spatially mollified space-time noise); the `k = 0` mode never moves
/// because the forcing is a spatial derivative.
#[derive(Debug, Clone)]
pub struct OuState {
    pub time: f64,
    pub field: SpectralField,
    rng: ChaCha8Rng,
    mode_damping: Option<Vec<f64>>,
}

impl OuState {
    /// Start from zero at `t = 0`.
    pub fn new_zero(grid: TorusGrid, seed: u64, replica: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "ou-path", replica));
        Self {
            time: 0.0,
            field: SpectralField::zeros(grid),
            rng,
            mode_damping: None,
        }
    }

    /// Start from the stationary law: space white noise of variance 1/2.
    pub fn new_stationary(grid: TorusGrid, seed: u64, replica: u64) -> Self {
        let mut state = Self::new_zero(grid, seed, replica);
        let v = NoiseNormalization::Half.mode_variance();
        let mut init = sample_hermitian_gaussian(grid, &mut state.rng, |_| v);
        // The k = 0 mode carries no noise; keep it at zero for a mean-free
        // stationary start.
        init.set_mode_pair(&vec![0; grid.dim()], Complex64::default());
        state.field = init;
        state
    }

    /// Start from a given field (e.g. a coupled experiment).
    pub fn from_field(field: SpectralField, seed: u64, replica: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "ou-path", replica));
        Self {
            time: 0.0,
            field,
            rng,
            mode_damping: None,
        }
    }

    /// Damp the driving noise of mode `k` by `damping(flat)`; the exact OU
    /// decay is untouched.
    pub fn with_mode_damping(mut self, damping: Vec<f64>) -> Self {
        assert_eq!(damping.len(), self.field.grid().len());
        self.mode_damping = Some(damping);
        self
    }

    /// Exact transition over `dt`: per mode `k != 0`
    ///
    /// `X <- e^{-k^2 dt} X + G_k`, `E|G_k|^2 = (1 - e^{-2 k^2 dt}) / 2`,
    ///
    /// Hermitian-paired, no discretization error.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ou step requires dt > 0, got {dt}"
            )));
        }
        let grid = self.field.grid();
        let incr = ou_noise_increment(grid, &mut self.rng, dt, self.mode_damping.as_deref());
        let decayed = self.field.heat_propagate(dt)?;
        self.field = &decayed + &incr;
        self.time += dt;
        Ok(())
    }
}

/// The exact Gaussian increment of the mode-wise OU transition:
/// `E|G_k|^2 = damping(k)^2 (1 - e^{-2 k^2 dt}) / 2`, zero at `k = 0`.
/// Shared by the OU path, the Galerkin Burgers stepper and the SBE
/// enhancement so matched-noise couplings consume identical draws.
pub fn ou_noise_increment(
    grid: TorusGrid,
    rng: &mut ChaCha8Rng,
    dt: f64,
    damping: Option<&[f64]>,
) -> SpectralField {
    sample_hermitian_gaussian(grid, rng, |flat| {
        let ksq = grid.k_sq(flat);
        if ksq == 0.0 {
            return 0.0;
        }
        let base = (1.0 - (-2.0 * ksq * dt).exp()) / 2.0;
        match damping {
            Some(d) => d[flat] * d[flat] * base,
            None => base,
        }
    })
}

/// One exact OU transition (cloning wrapper over [`OuState::step`]).
pub fn ou_step(state: &OuState, dt: f64) -> Result<OuState> {
    let mut next = state.clone();
    next.step(dt)?;
    Ok(next)
}

/// Rescaled Gaussian potential
///
/// `V_eps(x) = eps^{d/2 - alpha} (2 pi)^{-d/4} sum_{k in eps Z^d, k != 0}
///  e^{i <x, k/eps>} sqrt(R(k)) g(k)`
///
/// with `R(k) = |k|^{beta - d} Rtilde(|k|)`, sampled directly on the grid
/// modes `q = k / eps`. `eps` must be the reciprocal of a positive integer
/// so the rescaled lattice lands on integer modes.
pub fn sample_potential(
    grid: TorusGrid,
    eps: f64,
    alpha: f64,
    beta: f64,
    rtilde: RadialProfile,
    seed: u64,
    replica: u64,
) -> Result<SpectralField> {
    potential_mode_check(eps, beta)?;
    let d = grid.dim() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let prefactor_sq = two_pi.powf(d / 2.0) * eps.powf(d - 2.0 * alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "potential", replica));
    let var = move |flat: usize| -> f64 {
        let ksq = grid.k_sq(flat);
        if ksq == 0.0 {
            return 0.0;
        }
        let r = eps * ksq.sqrt();
        prefactor_sq * r.powf(beta - d) * rtilde.value(r)
    };
    Ok(sample_hermitian_gaussian(grid, &mut rng, var))
}

pub(crate) fn potential_mode_check(eps: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spectral exponent beta must be positive, got {beta}"
        )));
    }
    if !(eps > 0.0) || ((1.0 / eps) - (1.0 / eps).round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "eps must be the reciprocal of a positive integer, got {eps}"
        )));
    }
    Ok(())
}

/// Gradient of the solution to `L X = V_eps`, `X(0) = 0`, at time `t`,
/// sampled from the same Gaussian amplitudes as [`sample_potential`]
/// (per-mode multiplier `i k (1 - e^{-t|k|^2}) / |k|^2` on the potential).
pub fn sample_potential_gradient_x(
    grid: TorusGrid,
    t: f64,
    axis: usize,
    eps: f64,
    alpha: f64,
    beta: f64,
    rtilde: RadialProfile,
    seed: u64,
    replica: u64,
) -> Result<SpectralField> {
    let v = sample_potential(grid, eps, alpha, beta, rtilde, seed, replica)?;
    let x = v.apply_multiplier(|flat| {
        let ksq = grid.k_sq(flat);
        if ksq == 0.0 {
            0.0
        } else {
            (1.0 - (-t * ksq).exp()) / ksq
        }
    });
    x.derivative(axis)
}
