//! Torus grids, Fourier transforms, spectral multipliers, heat propagation,
//! Duhamel integration and exact dealiased products.
//!
//! Conventions (fixed once, verified by grid tests):
//!
//! * Characters `e_k(x) = exp(-i<k,x>) / (2pi)^{d/2}`; the coefficient of a
//!   field is the pairing `fhat(k) = <f, e_k>` and synthesis runs over the
//!   conjugate basis, `f = sum_k fhat(k) e_k^*`.
//! * Under this convention the derivative along an axis is the multiplier
//!   `fhat(k) -> (i k_axis) fhat(k)`, so that `d/dx sin = cos` on the grid.
//! * The heat semigroup is `fhat(k) -> exp(-t |k|^2) fhat(k)`.
//! * Products of band-limited fields are computed on a zero-padded grid of
//!   twice the resolution, so the discrete convolution
//!   `(2pi)^{-d/2} sum_l fhat(k-l) ghat(l)` is exact on the retained band
//!   and aliasing is structurally impossible.
//!
//! The Nyquist row (index `M/2` on any axis) has no partner under
//! `k -> -k` and is forced to zero everywhere.

mod fft;
mod field;
mod grid;

pub use field::{FieldRecord, SpectralField, TimeSlice};
pub use grid::TorusGrid;
