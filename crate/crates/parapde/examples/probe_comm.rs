use parapde::besov::DyadicPartition;
use parapde::gaussian::{mollify, sample_regularity_field, Mollifier};
use parapde::spectral::TorusGrid;
use parapde::stats::mean_stderr;

fn main() {
    let grid = TorusGrid::new(1, 128).unwrap();
    let part = DyadicPartition::new(grid).unwrap();
    let (a, b, c) = (0.9, 0.4, -0.6);
    let level = b + c - 0.1;
    let reps = 24u64;
    for n in [4u32, 8, 16, 32, 64] {
        let mut norms = Vec::new();
        for r in 0..reps {
            let f = mollify(&sample_regularity_field(grid, a, 60, 3 * r), n, Mollifier::Gaussian).unwrap();
            let g = mollify(&sample_regularity_field(grid, b, 60, 3 * r + 1), n, Mollifier::Gaussian).unwrap();
            let h = mollify(&sample_regularity_field(grid, c, 60, 3 * r + 2), n, Mollifier::Gaussian).unwrap();
            let comm = part.commutator(&f, &g, &h).unwrap();
            norms.push(part.besov_norm(&comm, level, f64::INFINITY, f64::INFINITY));
        }
        println!("n={n:2}: mean ||C||_{{beta+gamma-eps}} = {:.5}", mean_stderr(&norms).mean);
    }
}
