//! Property tests for the structural invariants: transform round trips,
//! Hermitian symmetry and Parseval under operation chains, partition
//! exactness, and serialization round trips.

use num_complex::Complex64;
use parapde::besov::DyadicPartition;
use parapde::config::ExperimentConfig;
use parapde::report::ExperimentReport;
use parapde::spectral::{SpectralField, TorusGrid};
use proptest::prelude::*;

fn arb_grid() -> impl Strategy<Value = TorusGrid> {
    (1usize..=2, 0usize..=2).prop_map(|(dim, e)| {
        let m = 8 << e; // 8, 16, 32
        TorusGrid::new(dim, m).unwrap()
    })
}

fn arb_field(grid: TorusGrid) -> impl Strategy<Value = SpectralField> {
    let free: Vec<usize> = (0..grid.len())
        .filter(|&flat| !grid.is_nyquist(flat) && grid.conjugate_index(flat) >= flat)
        .collect();
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), free.len()).prop_map(move |amps| {
        let mut f = SpectralField::zeros(grid);
        for (&flat, (re, im)) in free.iter().zip(amps) {
            let ks = grid.wavenumbers_of(flat);
            f.set_mode_pair(&ks, Complex64::new(re, im));
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip_is_identity(f in arb_grid().prop_flat_map(arb_field)) {
        let vals = f.values_real();
        let back = SpectralField::from_values_real(f.grid(), &vals).unwrap();
        prop_assert!((&back - &f).max_abs() <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn operation_chains_preserve_reality_and_parseval(
        f in arb_grid().prop_flat_map(arb_field),
        t in 0.0f64..0.5,
    ) {
        let g = f.heat_propagate(t).unwrap().derivative(0).unwrap();
        let h = g.dealiased_product(&f).unwrap();
        prop_assert!(h.is_real());
        prop_assert!(h.hermitian_defect() <= 1e-12 * h.max_abs().max(1.0));
        let quad: f64 = h
            .values_real()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            * h.grid().cell_volume();
        prop_assert!((h.l2_norm_sq() - quad).abs() <= 1e-10 * quad.max(1.0));
    }

    #[test]
    fn heat_semigroup_composes_exactly(
        f in arb_grid().prop_flat_map(arb_field),
        s in 0.0f64..0.4,
        t in 0.0f64..0.4,
    ) {
        let a = f.heat_propagate(s).unwrap().heat_propagate(t).unwrap();
        let b = f.heat_propagate(s + t).unwrap();
        prop_assert!((&a - &b).max_abs() <= 1e-13 * f.max_abs().max(1.0));
    }

    #[test]
    fn bony_parts_reassemble_the_product(f_g in arb_grid().prop_flat_map(|g| (arb_field(g), arb_field(g)))) {
        let (f, g) = f_g;
        if f.grid().modes_per_axis() >= 8 {
            let part = DyadicPartition::new(f.grid()).unwrap();
            let bony = part.bony(&f, &g).unwrap();
            let sum = &(&bony.less + &bony.greater) + &bony.resonant;
            let prod = f.dealiased_product(&g).unwrap();
            prop_assert!((&sum - &prod).max_abs() <= 1e-10 * prod.max_abs().max(1.0));
        }
    }

    #[test]
    fn field_json_round_trips(f in arb_grid().prop_flat_map(arb_field)) {
        let back = SpectralField::from_json(&f.to_json()).unwrap();
        prop_assert!((&back - &f).max_abs() == 0.0);
    }

    #[test]
    fn report_round_trips_in_both_formats(
        rows in proptest::collection::vec(
            ("[a-z][a-z0-9-]{0,8}", "[a-z][a-z0-9=;.-]{0,12}", -1.0e6f64..1.0e6, 0.0f64..10.0, 0u64..100),
            0..8,
        )
    ) {
        let mut report = ExperimentReport::new(3);
        for (experiment, statistic, value, stderr, n) in rows {
            report.push(&experiment, "", &statistic, value, stderr, n);
        }
        let csv = ExperimentReport::from_csv(&report.to_csv()).unwrap();
        prop_assert_eq!(&csv.rows, &report.rows);
        let json = ExperimentReport::from_json(&report.to_json()).unwrap();
        prop_assert_eq!(&json.rows, &report.rows);
    }

    #[test]
    fn config_parser_never_panics_and_round_trips_keys(text in ".{0,256}") {
        // Parsing arbitrary text must never panic; successful parses give
        // well-formed canonical parameter strings.
        if let Ok(cfg) = ExperimentConfig::parse_str(&text) {
            let _ = cfg.params_string();
        }
    }
}
