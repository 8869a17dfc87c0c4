//! Dyadic partition of unity, Littlewood-Paley blocks, Besov norms, Bony
//! paraproducts, the commutator `C(f,g,h)` and paralinearization.
//!
//! The partition is built from the smooth bump `exp(-1/t)` step with the
//! standard geometry: `chi` is 1 on `|x| <= 3/4` and vanishes for
//! `|x| >= 4/3`, `rho(x) = chi(x/2) - chi(x)` lives in the annulus
//! `3/4 <= |x| <= 8/3`, and `rho_j = rho(2^{-j} .)`. Because `rho_j` is
//! tabulated as the telescoping difference `chi(2^{-j-1}|k|) - chi(2^{-j}|k|)`
//! the partition-of-unity identity holds to the last bit on every lattice
//! mode, and all support statements are exact zeros.

use crate::spectral::{SpectralField, TorusGrid};
use crate::{Error, Result};
use num_complex::Complex64;

/// Inner radius of the annulus supporting `rho`.
pub const ANNULUS_INNER: f64 = 0.75;
/// Outer radius of the annulus supporting `rho` (`8/3`).
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
/// Radius of the ball supporting `chi` (`4/3`).
pub const BALL_RADIUS: f64 = 4.0 / 3.0;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity step: 0 for `t <= 0`, 1 for `t >= 1`, strictly monotone between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        let b = bump(1.0 - t);
        a / (a + b)
    }
}

/// Radial profile of the low-frequency cutoff `chi`.
pub fn chi_profile(r: f64) -> f64 {
    1.0 - smooth_step((r - ANNULUS_INNER) / (BALL_RADIUS - ANNULUS_INNER))
}

/// Tabulated dyadic partition of unity on the mode lattice of one grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: TorusGrid,
    j_max: usize,
    /// `rho_{-1} = chi` evaluated at every lattice mode.
    chi: Vec<f64>,
    /// `rho_j(k) = chi(2^{-j-1}|k|) - chi(2^{-j}|k|)` for `j = 0..=j_max`.
    rho: Vec<Vec<f64>>,
}

/// The three Bony parts of a product: `fg = less + greater + resonant`.
#[derive(Debug, Clone)]
pub struct BonyDecomposition {
    /// `f < g` (f at lower frequencies).
    pub less: SpectralField,
    /// `f > g`.
    pub greater: SpectralField,
    /// `f o g`, the diagonal `|i - j| <= 1`.
    pub resonant: SpectralField,
}

/// All Littlewood-Paley blocks of a field, `j = -1 ..= j_max`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<SpectralField>,
}

/// Block values of one field synthesized on the dealiasing (doubled) grid,
/// with prefix sums so `S_j f` comes for free; see [`DyadicPartition::table`].
#[derive(Debug, Clone)]
pub struct PaddedBlockTable {
    padded: TorusGrid,
    real: bool,
    /// Value tables of `Delta_j f`, index `j + 1`.
    blocks: Vec<Vec<Complex64>>,
    /// `prefix[t] = sum_{idx <= t} blocks[idx]`, so `S_j f = prefix[j]`.
    prefix: Vec<Vec<Complex64>>,
}

impl PaddedBlockTable {
    /// Values of the full field on the padded grid.
    pub fn total(&self) -> &[Complex64] {
        self.prefix.last().expect("at least the chi block exists")
    }

    pub fn padded_grid(&self) -> TorusGrid {
        self.padded
    }
}

impl BlockDecomposition {
    /// `Delta_j f`; indexing is `j + 1`.
    pub fn block(&self, j: i64) -> &SpectralField {
        &self.blocks[(j + 1) as usize]
    }

    pub fn sum(&self) -> SpectralField {
        let mut acc = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            acc = &acc + b;
        }
        acc
    }
}

impl DyadicPartition {
    /// Tabulate the partition on the lattice of `grid`. The block count is
    /// the smallest `j_max` with `chi(2^{-j_max-1} k) = 1` at every lattice
    /// mode, so the blocks resolve the whole grid.
    pub fn new(grid: TorusGrid) -> Result<Self> {
        if grid.modes_per_axis() < 8 {
            return Err(Error::Config(format!(
                "grid with M = {} cannot host the j = 0 annulus; need M >= 8",
                grid.modes_per_axis()
            )));
        }
        let k_corner = (grid.dim() as f64).sqrt() * (grid.max_mode() as f64) + 1e-12;
        let mut j_max = 0usize;
        while ANNULUS_INNER * 2f64.powi(j_max as i32 + 1) < k_corner {
            j_max += 1;
        }
        let npts = grid.len();
        let radius: Vec<f64> = (0..npts).map(|flat| grid.k_sq(flat).sqrt()).collect();
        let chi: Vec<f64> = radius.iter().map(|&r| chi_profile(r)).collect();
        let mut rho = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let lo = 2f64.powi(-(j as i32));
            let hi = 2f64.powi(-(j as i32) - 1);
            rho.push(
                radius
                    .iter()
                    .map(|&r| chi_profile(r * hi) - chi_profile(r * lo))
                    .collect(),
            );
        }
        Ok(Self {
            grid,
            j_max,
            chi,
            rho,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Multiplier values of `rho_j` (`j = -1` is `chi`).
    pub fn multiplier(&self, j: i64) -> &[f64] {
        if j == -1 {
            &self.chi
        } else {
            &self.rho[j as usize]
        }
    }

    /// `Delta_j f = rho_j(D) f`.
    pub fn block(&self, f: &SpectralField, j: i64) -> SpectralField {
        let m = self.multiplier(j);
        f.apply_multiplier(|flat| m[flat])
    }

    /// `S_j f = sum_{i <= j-1} Delta_i f`; its multiplier is exactly
    /// `chi(2^{-j} .)` by telescoping.
    pub fn low_pass(&self, f: &SpectralField, j: i64) -> SpectralField {
        if j < 0 {
            return SpectralField::zeros(self.grid);
        }
        let scale = 2f64.powi(-(j as i32));
        let grid = self.grid;
        f.apply_multiplier(|flat| chi_profile(grid.k_sq(flat).sqrt() * scale))
    }

    pub fn decompose(&self, f: &SpectralField) -> BlockDecomposition {
        let mut blocks = Vec::with_capacity(self.j_max + 2);
        for j in -1..=(self.j_max as i64) {
            blocks.push(self.block(f, j));
        }
        BlockDecomposition { blocks }
    }

    /// Lattice estimate of the Besov norm `B^alpha_{p,q}`. `p` and `q` are
    /// in `[1, inf]`; pass `f64::INFINITY` for the sup cases.
    pub fn besov_norm(&self, f: &SpectralField, alpha: f64, p: f64, q: f64) -> f64 {
        let cell = self.grid.cell_volume();
        let mut terms = Vec::with_capacity(self.j_max + 2);
        for j in -1..=(self.j_max as i64) {
            let block = self.block(f, j);
            let lp = lp_norm(&block.values_complex(), p, cell, block.is_real());
            terms.push(2f64.powf(j as f64 * alpha) * lp);
        }
        if q.is_infinite() {
            terms.into_iter().fold(0.0, f64::max)
        } else {
            terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }

    /// Inverse-transform every block of `f` onto the dealiasing grid. All
    /// paraproduct machinery runs off these tables: pairwise products are
    /// pointwise in value space (alias-free by the factor-2 padding) and
    /// each output costs one forward transform.
    pub fn table(&self, f: &SpectralField) -> Result<PaddedBlockTable> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch(
                "field does not live on the partition's grid".into(),
            ));
        }
        let padded = self.grid.padded();
        let mut blocks = Vec::with_capacity(self.j_max + 2);
        for j in -1..=(self.j_max as i64) {
            blocks.push(self.block(f, j).embed(padded).values_complex());
        }
        // prefix[t] = sum of block values up to index t; S_j f = prefix[j].
        let len = padded.len();
        let mut prefix = Vec::with_capacity(blocks.len());
        let mut acc = vec![Complex64::default(); len];
        for b in &blocks {
            for (a, v) in acc.iter_mut().zip(b) {
                *a += v;
            }
            prefix.push(acc.clone());
        }
        Ok(PaddedBlockTable {
            padded,
            real: f.is_real(),
            blocks,
            prefix,
        })
    }

    /// One forward transform of accumulated padded values, restricted to
    /// the base grid.
    fn finish(&self, vals: Vec<Complex64>, real: bool) -> SpectralField {
        let padded = self.grid.padded();
        let wide = SpectralField::from_values_complex(padded, &vals)
            .expect("padded buffer has the padded grid's length");
        let mut out = wide.restrict(self.grid);
        if real {
            out.hermitize();
        }
        out
    }

    /// `f < g` from tables: `sum_j S_{j-1} f Delta_j g` accumulated in
    /// value space.
    pub fn less_from(&self, f: &PaddedBlockTable, g: &PaddedBlockTable) -> SpectralField {
        let jm = self.j_max as i64;
        let mut vals = vec![Complex64::default(); f.prefix[0].len()];
        for j in 1..=jm {
            let s = &f.prefix[(j - 1) as usize];
            let b = &g.blocks[(j + 1) as usize];
            for ((v, a), w) in vals.iter_mut().zip(s).zip(b) {
                *v += a * w;
            }
        }
        self.finish(vals, f.real && g.real)
    }

    /// `f o g` from tables: the diagonal `|i - j| <= 1`.
    pub fn resonant_from(&self, f: &PaddedBlockTable, g: &PaddedBlockTable) -> SpectralField {
        let jm = self.j_max as i64;
        let mut vals = vec![Complex64::default(); f.prefix[0].len()];
        for j in -1..=jm {
            let bf = &f.blocks[(j + 1) as usize];
            for i in (j - 1).max(-1)..=(j + 1).min(jm) {
                let bg = &g.blocks[(i + 1) as usize];
                for ((v, a), w) in vals.iter_mut().zip(bf).zip(bg) {
                    *v += a * w;
                }
            }
        }
        self.finish(vals, f.real && g.real)
    }

    /// Exact dealiased product from tables (the reconstructed totals).
    pub fn product_from(&self, f: &PaddedBlockTable, g: &PaddedBlockTable) -> SpectralField {
        let tf = f.total();
        let tg = g.total();
        let vals: Vec<Complex64> = tf.iter().zip(tg).map(|(a, b)| a * b).collect();
        self.finish(vals, f.real && g.real)
    }

    /// Full Bony decomposition from tables.
    pub fn bony_from(&self, f: &PaddedBlockTable, g: &PaddedBlockTable) -> BonyDecomposition {
        BonyDecomposition {
            less: self.less_from(f, g),
            greater: self.less_from(g, f),
            resonant: self.resonant_from(f, g),
        }
    }

    /// Full Bony decomposition. The parts sum to the exact dealiased
    /// product because the blocks partition the lattice exactly and every
    /// pairwise product is alias-free.
    pub fn bony(&self, f: &SpectralField, g: &SpectralField) -> Result<BonyDecomposition> {
        let tf = self.table(f)?;
        let tg = self.table(g)?;
        Ok(self.bony_from(&tf, &tg))
    }

    /// Paraproduct `f < g` alone.
    pub fn less(&self, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
        let tf = self.table(f)?;
        let tg = self.table(g)?;
        Ok(self.less_from(&tf, &tg))
    }

    /// Resonant part `f o g` alone.
    pub fn resonant(&self, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
        let tf = self.table(f)?;
        let tg = self.table(g)?;
        Ok(self.resonant_from(&tf, &tg))
    }

    /// Commutator `C(f, g, h) = ((f < g) o h) - f (g o h)` from tables.
    pub fn commutator_from(
        &self,
        f: &PaddedBlockTable,
        g: &PaddedBlockTable,
        h: &PaddedBlockTable,
    ) -> Result<SpectralField> {
        let fg = self.less_from(f, g);
        let tfg = self.table(&fg)?;
        let first = self.resonant_from(&tfg, h);
        let gh = self.resonant_from(g, h);
        let tgh = self.table(&gh)?;
        let second = self.product_from(f, &tgh);
        Ok(&first - &second)
    }

    /// Commutator `C(f, g, h) = ((f < g) o h) - f (g o h)`.
    pub fn commutator(
        &self,
        f: &SpectralField,
        g: &SpectralField,
        h: &SpectralField,
    ) -> Result<SpectralField> {
        let tf = self.table(f)?;
        let tg = self.table(g)?;
        let th = self.table(h)?;
        self.commutator_from(&tf, &tg, &th)
    }

    /// Paralinearization remainder `R_F(f) = F(f) - F'(f) < f`, with `F(f)`
    /// and `F'(f)` evaluated at the grid points.
    pub fn paralinearize(
        &self,
        f: &SpectralField,
        func: impl Fn(f64) -> f64,
        dfunc: impl Fn(f64) -> f64,
    ) -> Result<SpectralField> {
        let ff = f.map_values(&func)?;
        let df = f.map_values(&dfunc)?;
        let para = self.less(&df, f)?;
        Ok(&ff - &para)
    }

    /// Multiplier table as CSV rows `j,k_index,value` (plot/fixture export).
    pub fn multipliers_csv(&self) -> String {
        let mut out = String::from("j,k_index,value\n");
        for j in -1..=(self.j_max as i64) {
            let m = self.multiplier(j);
            for (idx, v) in m.iter().enumerate() {
                if *v != 0.0 {
                    out.push_str(&format!("{j},{idx},{v}\n"));
                }
            }
        }
        out
    }
}

/// Grid `L^p` norm of sampled values; `p = inf` is the max norm.
pub fn lp_norm(values: &[num_complex::Complex64], p: f64, cell_volume: f64, real: bool) -> f64 {
    let abs = |c: &num_complex::Complex64| if real { c.re.abs() } else { c.norm() };
    if p.is_infinite() {
        values.iter().map(abs).fold(0.0, f64::max)
    } else {
        (values.iter().map(|c| abs(c).powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
    }
}

/// Parabolic time-Hoelder estimator: the max over dyadic time-pair
/// quotients `||f(t_j) - f(t_i)||_inf / |t_j - t_i|^{alpha/2}` on a uniform
/// time grid. An estimator of the `C^{alpha/2} L^inf` seminorm used only as
/// a monitoring diagnostic (the true sup runs over all pairs).
pub fn time_holder_estimate(path: &[SpectralField], dt: f64, alpha: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut gap = 1usize;
    while gap < path.len() {
        for i in (0..path.len() - gap).step_by(gap) {
            let diff = (&path[i + gap] - &path[i]).sup_norm();
            worst = worst.max(diff / (gap as f64 * dt).powf(alpha / 2.0));
        }
        gap *= 2;
    }
    worst
}

/// Grid Hoelder quotient norm `sup |f| + sup |f(x)-f(y)| / d(x,y)^alpha`;
/// O(M^2d) pairs, intended for desk-scale equivalence checks.
pub fn grid_holder_norm(f: &SpectralField, alpha: f64) -> f64 {
    let grid = f.grid();
    let m = grid.modes_per_axis();
    let vals = f.values_real();
    let step = 2.0 * std::f64::consts::PI / m as f64;
    let torus_d = |i: usize, j: usize| -> f64 {
        let raw = (i as f64 - j as f64).abs() * step;
        raw.min(2.0 * std::f64::consts::PI - raw)
    };
    let mut quot = 0.0f64;
    match grid.dim() {
        1 => {
            for i in 0..m {
                for j in (i + 1)..m {
                    let d = torus_d(i, j);
                    quot = quot.max((vals[i] - vals[j]).abs() / d.powf(alpha));
                }
            }
        }
        _ => {
            let n = vals.len();
            for a in 0..n {
                for b in (a + 1)..n {
                    let (ai, aj) = (a / m, a % m);
                    let (bi, bj) = (b / m, b % m);
                    let dx = torus_d(ai, bi);
                    let dy = torus_d(aj, bj);
                    let d = (dx * dx + dy * dy).sqrt();
                    quot = quot.max((vals[a] - vals[b]).abs() / d.powf(alpha));
                }
            }
        }
    }
    let sup = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    sup + quot
}
