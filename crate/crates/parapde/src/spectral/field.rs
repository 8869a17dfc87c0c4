use super::fft::dft_all_axes;
use super::grid::TorusGrid;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Complex Fourier coefficients of a field on the torus.
///
/// The coefficient layout is DFT order, row-major over axes. `real` records
/// that the field is the transform of a real function, in which case the
/// Hermitian symmetry `fhat(-k) = fhat(k)^*` holds exactly (it is restored
/// after every value-space construction).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    real: bool,
}

/// A field together with its time stamp.
#[derive(Debug, Clone)]
pub struct TimeSlice {
    pub time: f64,
    pub field: SpectralField,
}

impl TimeSlice {
    pub fn new(time: f64, field: SpectralField) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time must be finite and nonnegative, got {time}"
            )));
        }
        Ok(Self { time, field })
    }
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
            real: true,
        }
    }

    /// Build from raw coefficients. Enforces the Nyquist-zero invariant and,
    /// if `real` is requested, validates Hermitian symmetry.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let mut field = Self { grid, coeffs, real };
        field.zero_nyquist();
        if real {
            let defect = field.hermitian_defect();
            let scale = field.max_abs().max(1.0);
            if defect > 1e-10 * scale {
                return Err(Error::InvalidArgument(format!(
                    "coefficients violate Hermitian symmetry (defect {defect:.3e})"
                )));
            }
            field.hermitize();
        }
        Ok(field)
    }

    /// Forward transform of real grid samples (`M^d` values, row-major).
    pub fn from_values_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut field = Self::forward(grid, buf);
        field.real = true;
        field.hermitize();
        Ok(field)
    }

    /// Forward transform of complex grid samples.
    pub fn from_values_complex(grid: TorusGrid, values: &[Complex64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self::forward(grid, values.to_vec()))
    }

    fn forward(grid: TorusGrid, mut buf: Vec<Complex64>) -> Self {
        dft_all_axes(&mut buf, grid.modes_per_axis(), grid.dim(), true);
        let scale = TWO_PI.powf(grid.dim() as f64 / 2.0) / grid.len() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        let mut field = Self {
            grid,
            coeffs: buf,
            real: false,
        };
        field.zero_nyquist();
        field
    }

    /// Inverse transform to complex grid samples.
    pub fn values_complex(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        dft_all_axes(&mut buf, self.grid.modes_per_axis(), self.grid.dim(), false);
        let scale = TWO_PI.powf(-(self.grid.dim() as f64) / 2.0);
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform to real grid samples (real part; exact for fields
    /// carrying the `real` flag).
    pub fn values_real(&self) -> Vec<f64> {
        self.values_complex().iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs[self.grid.flat_index(k)]
    }

    pub fn coeff_flat(&self, flat: usize) -> Complex64 {
        self.coeffs[flat]
    }

    /// Set a single coefficient; clears the real flag (use `set_mode_pair`
    /// to stay in the real subspace).
    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) {
        let idx = self.grid.flat_index(k);
        self.coeffs[idx] = value;
        self.real = false;
        self.zero_nyquist();
    }

    /// Set `fhat(k) = value` and `fhat(-k) = value^*`, preserving reality.
    pub fn set_mode_pair(&mut self, k: &[i64], value: Complex64) {
        let idx = self.grid.flat_index(k);
        self.coeffs[idx] = value;
        let cidx = self.grid.conjugate_index(idx);
        if cidx == idx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[cidx] = value.conj();
        }
        self.zero_nyquist();
    }

    /// Constant field with spatial value `c` (`fhat(0) = c (2 pi)^{d/2}`).
    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        let d = grid.dim() as f64;
        f.coeffs[0] = Complex64::new(c * TWO_PI.powf(d / 2.0), 0.0);
        f
    }

    /// Single complex mode `a e_k^*` (not real unless `k = 0`).
    pub fn single_mode(grid: TorusGrid, k: &[i64], amplitude: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        f.real = false;
        f.coeffs[grid.flat_index(k)] = amplitude;
        f.zero_nyquist();
        f
    }

    /// Real field `a e_k^* + a^* e_{-k}^*`.
    pub fn mode_pair(grid: TorusGrid, k: &[i64], amplitude: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        f.set_mode_pair(k, amplitude);
        f
    }

    fn zero_nyquist(&mut self) {
        let g = self.grid;
        for flat in 0..self.coeffs.len() {
            if g.is_nyquist(flat) {
                self.coeffs[flat] = Complex64::default();
            }
        }
    }

    /// Restore exact Hermitian symmetry by conjugate averaging.
    pub fn hermitize(&mut self) {
        let g = self.grid;
        for flat in 0..self.coeffs.len() {
            if g.is_nyquist(flat) {
                continue;
            }
            let c = g.conjugate_index(flat);
            if c == flat {
                self.coeffs[flat] = Complex64::new(self.coeffs[flat].re, 0.0);
            } else if c > flat {
                let avg = 0.5 * (self.coeffs[flat] + self.coeffs[c].conj());
                self.coeffs[flat] = avg;
                self.coeffs[c] = avg.conj();
            }
        }
        self.real = true;
    }

    /// Largest deviation from `fhat(-k) = fhat(k)^*`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for flat in 0..self.coeffs.len() {
            let c = g.conjugate_index(flat);
            if c >= flat {
                let d = (self.coeffs[flat] - self.coeffs[c].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `sum_k |fhat(k)|^2`; by Parseval this is the grid quadrature of
    /// `int |f|^2 dx`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Sup of `|f|` over grid points.
    pub fn sup_norm(&self) -> f64 {
        self.values_complex()
            .iter()
            .map(|c| if self.real { c.re.abs() } else { c.norm() })
            .fold(0.0, f64::max)
    }

    /// Spatial mean `(2 pi)^{-d} int f dx = fhat(0) / (2 pi)^{d/2}`.
    pub fn spatial_mean(&self) -> f64 {
        let d = self.grid.dim() as f64;
        (self.coeffs[0] * TWO_PI.powf(-d / 2.0)).re
    }

    /// Largest `|k|_inf` carrying a nonzero coefficient.
    pub fn band(&self) -> usize {
        let g = self.grid;
        let mut band = 0usize;
        for flat in 0..self.coeffs.len() {
            if self.coeffs[flat] != Complex64::default() {
                band = band.max(g.k_inf(flat) as usize);
            }
        }
        band
    }

    /// Galerkin projection onto `|k|_inf <= n`; idempotent.
    pub fn project_modes(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!(
                "projection band must be nonnegative, got {n}"
            )));
        }
        let mut out = self.clone();
        for flat in 0..out.coeffs.len() {
            if self.grid.k_inf(flat) > n {
                out.coeffs[flat] = Complex64::default();
            }
        }
        Ok(out)
    }

    /// Spectral derivative along `axis`: multiplier `i k_axis` (so that
    /// `d/dx sin = cos` under the synthesis `f = sum fhat(k) e_k^*`).
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for dim {}",
                self.grid.dim()
            )));
        }
        let g = self.grid;
        let m = g.modes_per_axis();
        let mut out = self.clone();
        for flat in 0..out.coeffs.len() {
            let k = match (g.dim(), axis) {
                (1, _) => g.wavenumber(flat),
                (2, 0) => g.wavenumber(flat / m),
                (2, _) => g.wavenumber(flat % m),
                _ => unreachable!(),
            };
            out.coeffs[flat] *= Complex64::new(0.0, k as f64);
        }
        out.zero_nyquist();
        Ok(out)
    }

    /// Laplacian, multiplier `-|k|^2`.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for flat in 0..out.coeffs.len() {
            out.coeffs[flat] *= -self.grid.k_sq(flat);
        }
        out
    }

    /// Heat semigroup `P_t`: multiplier `exp(-t |k|^2)`.
    pub fn heat_propagate(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "heat propagation time must be >= 0, got {t}"
            )));
        }
        let mut out = self.clone();
        for flat in 0..out.coeffs.len() {
            out.coeffs[flat] *= (-t * self.grid.k_sq(flat)).exp();
        }
        Ok(out)
    }

    /// One exponential-integrator step for `Lu = source` with the source
    /// frozen on `[t, t+dt]`:
    ///
    /// `out(k) = e^{-|k|^2 dt} state(k) + (1 - e^{-|k|^2 dt}) / |k|^2 source(k)`
    ///
    /// and `out(0) = state(0) + dt source(0)`. Exact when the source is
    /// constant in time.
    pub fn duhamel_step(state: &Self, source: &Self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duhamel step requires dt > 0, got {dt}"
            )));
        }
        if state.grid != source.grid {
            return Err(Error::GridMismatch(
                "duhamel_step: state and source grids differ".into(),
            ));
        }
        let g = state.grid;
        let mut out = state.clone();
        out.real = state.real && source.real;
        for flat in 0..out.coeffs.len() {
            let ksq = g.k_sq(flat);
            if ksq == 0.0 {
                out.coeffs[flat] = state.coeffs[flat] + dt * source.coeffs[flat];
            } else {
                let decay = (-ksq * dt).exp();
                out.coeffs[flat] =
                    decay * state.coeffs[flat] + ((1.0 - decay) / ksq) * source.coeffs[flat];
            }
        }
        Ok(out)
    }

    /// Exact dealiased product. Both inputs are synthesized on a grid of
    /// twice the resolution, multiplied pointwise and transformed back; the
    /// retained band `|k|_inf <= M/2 - 1` then carries the exact discrete
    /// convolution `(2 pi)^{-d/2} sum_l fhat(k-l) ghat(l)` with no
    /// wraparound. Errors if the inputs could alias even on the padded grid.
    pub fn dealiased_product(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "dealiased_product: operand grids differ".into(),
            ));
        }
        let padded = self.grid.padded();
        let have = padded.max_mode();
        let need = self.band() + other.band();
        if need > have {
            return Err(Error::AliasHeadroom { need, have });
        }
        let fa = self.embed(padded);
        let fb = other.embed(padded);
        let va = fa.values_complex();
        let vb = fb.values_complex();
        let prod: Vec<Complex64> = va.iter().zip(&vb).map(|(a, b)| a * b).collect();
        let wide = Self::forward(padded, prod);
        let mut out = wide.restrict(self.grid);
        if self.real && other.real {
            out.hermitize();
        }
        Ok(out)
    }

    /// Re-embed the coefficients on a larger grid (zero-padding in k).
    pub fn embed(&self, target: TorusGrid) -> Self {
        debug_assert_eq!(target.dim(), self.grid.dim());
        debug_assert!(target.modes_per_axis() >= self.grid.modes_per_axis());
        let mut out = Self::zeros(target);
        out.real = self.real;
        for flat in 0..self.coeffs.len() {
            if self.coeffs[flat] != Complex64::default() {
                let ks = self.grid.wavenumbers_of(flat);
                out.coeffs[target.flat_index(&ks)] = self.coeffs[flat];
            }
        }
        out
    }

    /// Keep only the modes resolvable on `target` (Galerkin restriction).
    pub fn restrict(&self, target: TorusGrid) -> Self {
        debug_assert_eq!(target.dim(), self.grid.dim());
        debug_assert!(target.modes_per_axis() <= self.grid.modes_per_axis());
        let mut out = Self::zeros(target);
        out.real = self.real;
        let max = target.max_mode() as i64;
        for flat in 0..out.coeffs.len() {
            if target.is_nyquist(flat) {
                continue;
            }
            let ks = target.wavenumbers_of(flat);
            if ks.iter().all(|k| k.abs() <= max) {
                out.coeffs[flat] = self.coeffs[self.grid.flat_index(&ks)];
            }
        }
        out
    }

    /// Apply a coefficient-wise real multiplier `w(k)`; preserves reality
    /// when `w` is even, which holds for every radial multiplier used here.
    pub fn apply_multiplier(&self, w: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for flat in 0..out.coeffs.len() {
            out.coeffs[flat] *= w(flat);
        }
        out
    }

    /// Gridpoint composition `F(f)`: synthesize, apply `F` to the samples,
    /// transform back. Requires a real field.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !self.real {
            return Err(Error::InvalidArgument(
                "map_values requires a real field".into(),
            ));
        }
        let vals: Vec<f64> = self.values_real().iter().map(|&v| f(v)).collect();
        Self::from_values_real(self.grid, &vals)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= a;
        }
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "axpy: operand grids differ");
        let mut out = self.clone();
        out.real = self.real && other.real;
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
        out
    }
}

impl std::ops::Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

/// Serialized form: sparse `(flat index, re, im)` triples, row-major over
/// the mode lattice in DFT order. This is the on-disk fixture format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldRecord {
    pub dim: usize,
    pub modes_per_axis: usize,
    pub real: bool,
    pub coeffs: Vec<(usize, f64, f64)>,
}

impl SpectralField {
    pub fn to_record(&self) -> FieldRecord {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(i, c)| (i, c.re, c.im))
            .collect();
        FieldRecord {
            dim: self.grid.dim(),
            modes_per_axis: self.grid.modes_per_axis(),
            real: self.real,
            coeffs,
        }
    }

    pub fn from_record(rec: &FieldRecord) -> Result<Self> {
        let grid = TorusGrid::new(rec.dim, rec.modes_per_axis)?;
        let mut coeffs = vec![Complex64::default(); grid.len()];
        for &(idx, re, im) in &rec.coeffs {
            if idx >= coeffs.len() {
                return Err(Error::Parse(format!(
                    "coefficient index {idx} out of range for grid of {} points",
                    coeffs.len()
                )));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Parse("non-finite coefficient".into()));
            }
            if coeffs[idx] != Complex64::default() {
                return Err(Error::Parse(format!("duplicate coefficient index {idx}")));
            }
            coeffs[idx] = Complex64::new(re, im);
        }
        Self::from_coeffs(grid, coeffs, rec.real)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("field records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: FieldRecord = serde_json::from_str(s)?;
        Self::from_record(&rec)
    }
}
