use crate::{Error, Result};

/// Uniform grid on the torus `T^d = (R / 2 pi Z)^d`, `d` in `{1, 2}`.
///
/// Each axis carries `M` points `x_j = 2 pi j / M` and resolves the
/// wavenumbers `|k| <= M/2 - 1`; the unpaired Nyquist row `k = -M/2` is
/// always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    dim: usize,
    modes_per_axis: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, modes_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if modes_per_axis < 4 || modes_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "modes_per_axis must be even and >= 4, got {modes_per_axis}"
            )));
        }
        Ok(Self { dim, modes_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes_per_axis
    }

    /// Total number of lattice points, `M^d`.
    pub fn len(&self) -> usize {
        self.modes_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest resolvable wavenumber per axis, `M/2 - 1`.
    pub fn max_mode(&self) -> usize {
        self.modes_per_axis / 2 - 1
    }

    /// Signed wavenumber of axis index `i` in DFT storage order
    /// `0, 1, .., M/2 - 1, -M/2, .., -1`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let m = self.modes_per_axis as i64;
        let i = i as i64;
        if i <= m / 2 - 1 {
            i
        } else {
            i - m
        }
    }

    /// Axis index storing wavenumber `k` (requires `|k| <= M/2`).
    pub fn index_of(&self, k: i64) -> usize {
        let m = self.modes_per_axis as i64;
        debug_assert!(k.abs() <= m / 2);
        k.rem_euclid(m) as usize
    }

    /// Flat index of the lattice point with wavenumbers `k` (row-major).
    pub fn flat_index(&self, k: &[i64]) -> usize {
        debug_assert_eq!(k.len(), self.dim);
        let mut idx = 0;
        for &ki in k {
            idx = idx * self.modes_per_axis + self.index_of(ki);
        }
        idx
    }

    /// Wavenumbers of the flat lattice index (row-major).
    pub fn wavenumbers_of(&self, mut flat: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = self.wavenumber(flat % self.modes_per_axis);
            flat /= self.modes_per_axis;
        }
        out
    }

    /// `|k|^2` of the flat lattice index.
    pub fn k_sq(&self, flat: usize) -> f64 {
        match self.dim {
            1 => {
                let k = self.wavenumber(flat);
                (k * k) as f64
            }
            _ => {
                let m = self.modes_per_axis;
                let k0 = self.wavenumber(flat / m);
                let k1 = self.wavenumber(flat % m);
                (k0 * k0 + k1 * k1) as f64
            }
        }
    }

    /// `|k|_inf` of the flat lattice index.
    pub fn k_inf(&self, flat: usize) -> i64 {
        self.wavenumbers_of(flat)
            .iter()
            .map(|k| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// True if any axis index equals the Nyquist row `M/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let m = self.modes_per_axis;
        match self.dim {
            1 => flat == m / 2,
            _ => flat / m == m / 2 || flat % m == m / 2,
        }
    }

    /// Flat index of the point with all wavenumbers negated.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let ks = self.wavenumbers_of(flat);
        let neg: Vec<i64> = ks.iter().map(|&k| -k).collect();
        // Nyquist rows are self-paired only through the zero constraint.
        if self.is_nyquist(flat) {
            flat
        } else {
            self.flat_index(&neg)
        }
    }

    /// Quadrature weight of one grid cell, `(2 pi / M)^d`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.modes_per_axis as f64).powi(self.dim as i32)
    }

    /// Grid with the same dimension and doubled resolution (for dealiasing).
    pub fn padded(&self) -> TorusGrid {
        TorusGrid {
            dim: self.dim,
            modes_per_axis: 2 * self.modes_per_axis,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_layout_is_symmetric_except_nyquist() {
        let g = TorusGrid::new(1, 16).unwrap();
        assert_eq!(g.wavenumber(0), 0);
        assert_eq!(g.wavenumber(7), 7);
        assert_eq!(g.wavenumber(8), -8);
        assert_eq!(g.wavenumber(15), -1);
        for k in -7i64..=7 {
            assert_eq!(g.wavenumber(g.index_of(k)), k);
        }
        assert!(g.is_nyquist(8));
    }

    #[test]
    fn flat_index_round_trip_2d() {
        let g = TorusGrid::new(2, 8).unwrap();
        for flat in 0..g.len() {
            let ks = g.wavenumbers_of(flat);
            assert_eq!(g.flat_index(&ks), flat);
        }
    }

    #[test]
    fn conjugate_index_is_involutive() {
        let g = TorusGrid::new(2, 8).unwrap();
        for flat in 0..g.len() {
            let c = g.conjugate_index(flat);
            assert_eq!(g.conjugate_index(c), flat);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(3, 16).is_err());
        assert!(TorusGrid::new(1, 15).is_err());
        assert!(TorusGrid::new(2, 2).is_err());
    }
}
