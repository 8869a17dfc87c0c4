//! Thin deterministic wrapper around rustfft: per-thread plan cache and
//! row/column sweeps for the 2d transform. Concurrent calls on distinct
//! inputs are bit-identical to sequential calls because every thread plans
//! and executes independently.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

fn transpose(buf: &mut [Complex64], scratch: &mut Vec<Complex64>, m: usize) {
    scratch.clear();
    scratch.extend_from_slice(buf);
    for i in 0..m {
        for j in 0..m {
            buf[j * m + i] = scratch[i * m + j];
        }
    }
}

/// Unnormalized DFT over every axis of a row-major `m^dim` array.
/// Forward uses the kernel `exp(-2 pi i jk / m)`, inverse the conjugate.
pub fn dft_all_axes(buf: &mut [Complex64], m: usize, dim: usize, forward: bool) {
    let fft = plan(m, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    match dim {
        1 => {
            debug_assert_eq!(buf.len(), m);
            fft.process_with_scratch(buf, &mut scratch);
        }
        2 => {
            debug_assert_eq!(buf.len(), m * m);
            let mut tbuf = Vec::with_capacity(m * m);
            for row in buf.chunks_exact_mut(m) {
                fft.process_with_scratch(row, &mut scratch);
            }
            transpose(buf, &mut tbuf, m);
            for row in buf.chunks_exact_mut(m) {
                fft.process_with_scratch(row, &mut scratch);
            }
            transpose(buf, &mut tbuf, m);
        }
        _ => unreachable!("grid dimensions are validated at construction"),
    }
}
