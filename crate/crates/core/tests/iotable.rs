mod common;

use gsc_core::iotable::{
    coefficients, leontief, load_wiot_dir, validate_balance, write_wiot_file, FINAL_FILE,
    GROSS_OUTPUT_FILE, INTERMEDIATE_FILE, VALUE_ADDED_FILE,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leontief_inverts_i_minus_a(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::productive_matrix(&mut rng, n, 0.9);
        let b = leontief(&gsc_core::iotable::CoefficientMatrix::new(a.clone()).unwrap()).unwrap();
        let product = (DMatrix::identity(n, n) - a) * b.matrix();
        prop_assert!((product - DMatrix::identity(n, n)).abs().max() < 1e-10);
        prop_assert!(b.matrix().iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn coefficients_ignore_table_scale(seed in any::<u64>(), factor in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::balanced_wiot(&mut rng, 2, 2);
        let a = coefficients(&w).into_inner();
        let scaled = coefficients(&w.scaled(factor)).into_inner();
        prop_assert!((a - scaled).abs().max() < 1e-12);
    }

    #[test]
    fn generated_tables_balance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::balanced_wiot(&mut rng, 3, 2);
        prop_assert!(validate_balance(&w, 1e-9).passed);
    }
}

#[test]
fn directory_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w = common::balanced_wiot(&mut rng, 2, 3);
    let dir = tempfile::tempdir().unwrap();
    for file in [
        INTERMEDIATE_FILE,
        FINAL_FILE,
        VALUE_ADDED_FILE,
        GROSS_OUTPUT_FILE,
    ] {
        let f = std::fs::File::create(dir.path().join(file)).unwrap();
        write_wiot_file(&w, file, f).unwrap();
    }
    let back = load_wiot_dir(dir.path()).unwrap();
    assert_eq!(back.nations(), w.nations());
    assert_eq!(back.sectors(), w.sectors());
    assert!((back.intermediate() - w.intermediate()).abs().max() < 1e-9);
    assert!((back.gross_output() - w.gross_output()).abs().max() < 1e-9);
}
