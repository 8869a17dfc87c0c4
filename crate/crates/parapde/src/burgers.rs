//! Spectral Galerkin simulator for the 1d stochastic Burgers equation
//!
//! `dv(k) = -k^2 v(k) dt + b_k(v) dt + i k d beta(k)`, `|k| <= N`,
//!
//! with the exact convolution drift `b_k(v) = i k (2 pi)^{-1/2}
//! sum_{l+m=k} 1_{|l|,|m| <= N} v(l) v(m)`, plus the drift-process
//! accumulator and the Ito-trick auxiliary functional.
//!
//! The stepper is exponential Euler: the linear part and the noise are the
//! exact OU transition, the drift is frozen over each step, so stationarity
//! defects come from the nonlinearity alone.

use crate::gaussian::ou_noise_increment;
use crate::spectral::{SpectralField, TorusGrid};
use crate::stats::derive_seed;
use crate::{Error, Result};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Galerkin state: modes `v(k)` for `|k| <= band` on a 1d grid, plus time.
#[derive(Debug, Clone)]
pub struct GalerkinState {
    pub band: usize,
    pub time: f64,
    pub field: SpectralField,
}

/// Smallest even grid whose resolvable band is `n`.
pub fn grid_for_band(n: usize) -> Result<TorusGrid> {
    TorusGrid::new(1, (2 * (n + 1)).max(4))
}

/// The simulator: state plus its deterministic noise stream.
#[derive(Debug, Clone)]
pub struct BurgersSim {
    pub state: GalerkinState,
    rng: ChaCha8Rng,
    mode_damping: Option<Vec<f64>>,
    track_ou_tail: bool,
}

impl BurgersSim {
    /// Zero initial condition.
    pub fn new_zero(band: usize, seed: u64, replica: u64) -> Result<Self> {
        let grid = grid_for_band(band)?;
        Ok(Self {
            state: GalerkinState {
                band,
                time: 0.0,
                field: SpectralField::zeros(grid),
            },
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, "burgers", replica)),
            mode_damping: None,
            track_ou_tail: false,
        })
    }

    /// Stationary start: `v(k) ~ N_C(0, 1/2)` for `0 < |k| <= band`, drawn
    /// from the simulator's own stream.
    pub fn new_stationary(band: usize, seed: u64, replica: u64) -> Result<Self> {
        let mut sim = Self::new_zero(band, seed, replica)?;
        let grid = sim.state.field.grid();
        // An "infinite dt" OU increment is exactly the invariant law.
        let init = ou_noise_increment(grid, &mut sim.rng, 1e6, None);
        sim.state.field = init.project_modes(band as i64)?;
        Ok(sim)
    }

    /// Start from a given field (matched-noise couplings).
    pub fn from_field(field: SpectralField, band: usize, seed: u64, replica: u64) -> Self {
        Self {
            state: GalerkinState {
                band,
                time: 0.0,
                field,
            },
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, "burgers", replica)),
            mode_damping: None,
            track_ou_tail: false,
        }
    }

    /// Damp the noise per mode (spatially mollified forcing).
    pub fn with_mode_damping(mut self, damping: Vec<f64>) -> Self {
        assert_eq!(damping.len(), self.state.field.grid().len());
        self.mode_damping = Some(damping);
        self
    }

    /// Also evolve the grid modes above the Galerkin band. They receive no
    /// drift (the projected nonlinearity vanishes there), so they decouple
    /// into exact OU processes; useful for regularity diagnostics. If the
    /// current state is banded and nonzero, the tail is drawn stationary.
    pub fn with_ou_tail(mut self) -> Self {
        self.track_ou_tail = true;
        let grid = self.state.field.grid();
        if self.state.field.l2_norm() > 0.0 && self.state.field.band() <= self.state.band {
            let full = ou_noise_increment(grid, &mut self.rng, 1e6, None);
            let tail_only = &full - &full.project_modes(self.state.band as i64).expect("valid band");
            self.state.field = &self.state.field + &tail_only;
        }
        self
    }

    /// One exponential-Euler step with the exact OU noise increment.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let b = burgers_drift(&self.state)?;
        let drifted = SpectralField::duhamel_step(&self.state.field, &b, dt)?;
        let noise = ou_noise_increment(
            self.state.field.grid(),
            &mut self.rng,
            dt,
            self.mode_damping.as_deref(),
        );
        let noise = if self.track_ou_tail {
            noise
        } else {
            noise.project_modes(self.state.band as i64)?
        };
        self.state.field = &drifted + &noise;
        self.state.time += dt;
        Ok(())
    }

    /// Deterministic step (noise disabled): isolates the drift and the
    /// dissipation for energy-identity and order checks.
    pub fn step_deterministic(&mut self, dt: f64) -> Result<()> {
        let b = burgers_drift(&self.state)?;
        self.state.field = SpectralField::duhamel_step(&self.state.field, &b, dt)?;
        self.state.time += dt;
        Ok(())
    }
}

/// Exact convolution drift via dealiased product, derivative and Galerkin
/// projection; Hermitian because `v` is.
pub fn burgers_drift(state: &GalerkinState) -> Result<SpectralField> {
    let v = state.field.project_modes(state.band as i64)?;
    let sq = v.dealiased_product(&v)?;
    sq.derivative(0)?.project_modes(state.band as i64)
}

/// `sum_{|k| <= N} v(-k) b_k(v)`: vanishes identically (the cancellation
/// behind the energy identity `A_t = A_0 + M_t`).
pub fn drift_pairing(state: &GalerkinState) -> Result<Complex64> {
    let b = burgers_drift(state)?;
    let grid = state.field.grid();
    let mut acc = Complex64::default();
    for flat in 0..grid.len() {
        if grid.is_nyquist(flat) {
            continue;
        }
        let c = grid.conjugate_index(flat);
        acc += state.field.coeff_flat(c) * b.coeff_flat(flat);
    }
    Ok(acc)
}

/// Trapezoidal accumulator for `N_t(e_k) = int_0^t d/dx (Pi_N u_s)^2 (e_k) ds`.
#[derive(Debug, Clone)]
pub struct DriftAccumulator {
    pub integral: SpectralField,
    pub time: f64,
    last: Option<SpectralField>,
}

impl DriftAccumulator {
    pub fn new(grid: TorusGrid) -> Self {
        Self {
            integral: SpectralField::zeros(grid),
            time: 0.0,
            last: None,
        }
    }

    /// Feed the drift evaluated at the next grid time; the first call only
    /// records the left endpoint.
    pub fn push(&mut self, drift: &SpectralField, dt: f64) -> Result<()> {
        if let Some(prev) = &self.last {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument("accumulator needs dt > 0".into()));
            }
            let acc = &self.integral + &(&prev.scale(0.5) + &drift.scale(0.5)).scale(dt);
            self.integral = acc;
            self.time += dt;
        }
        self.last = Some(drift.clone());
        Ok(())
    }
}

/// Ito-trick auxiliary functional
///
/// `F(rho)(e_k) = -i k sum_{l+m=k, |l|,|m| <= cutoff} H_{l,m}(rho) / (l^2+m^2)`
///
/// with `H_{l,m}(rho) = rho(e_l) rho(e_m) - (1/2) delta_{l+m=0}`; well
/// defined as the cutoff grows even though the square itself is not.
pub fn ito_aux_f(rho: &SpectralField, k: i64, cutoff: usize) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "the Ito auxiliary functional needs k != 0".into(),
        ));
    }
    if rho.grid().dim() != 1 {
        return Err(Error::InvalidArgument("ito_aux_f is one-dimensional".into()));
    }
    let band = rho.grid().max_mode().min(cutoff) as i64;
    let mut acc = Complex64::default();
    for l in -band..=band {
        let m = k - l;
        if m.abs() > band {
            continue;
        }
        let mut h = rho.coeff(&[l]) * rho.coeff(&[m]);
        if l + m == 0 {
            h -= 0.5;
        }
        acc += h / ((l * l + m * m) as f64);
    }
    Ok(Complex64::new(0.0, -(k as f64)) * acc)
}

/// Run the fine and the `2 dt` coarse stepper on the same Brownian path:
/// the coarse increment over a doubled step is `e^{-k^2 dt} G_1 + G_2` in
/// terms of the two fine increments. Returns `(v_fine(T), v_coarse(T))`.
pub fn coupled_refinement_pair(
    band: usize,
    dt: f64,
    steps: usize,
    seed: u64,
    replica: u64,
) -> Result<(SpectralField, SpectralField)> {
    assert!(steps % 2 == 0, "need an even number of fine steps");
    let mut fine = BurgersSim::new_stationary(band, seed, replica)?;
    let mut coarse = fine.state.clone();
    let grid = fine.state.field.grid();
    for _ in 0..steps / 2 {
        let b1 = burgers_drift(&fine.state)?;
        let g1 = ou_noise_increment(grid, &mut fine.rng, dt, None)
            .project_modes(band as i64)?;
        fine.state.field = &SpectralField::duhamel_step(&fine.state.field, &b1, dt)? + &g1;
        fine.state.time += dt;

        let b2 = burgers_drift(&fine.state)?;
        let g2 = ou_noise_increment(grid, &mut fine.rng, dt, None)
            .project_modes(band as i64)?;
        fine.state.field = &SpectralField::duhamel_step(&fine.state.field, &b2, dt)? + &g2;
        fine.state.time += dt;

        let bc = burgers_drift(&coarse)?;
        let gc = &g1.heat_propagate(dt)? + &g2;
        coarse.field = &SpectralField::duhamel_step(&coarse.field, &bc, 2.0 * dt)? + &gc;
        coarse.time += 2.0 * dt;
    }
    Ok((fine.state.field, coarse.field))
}
