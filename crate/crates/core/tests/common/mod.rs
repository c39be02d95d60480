//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use gsc_core::equilibrium::WorldEconomy;
use gsc_core::iotable::WiotTable;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Nonnegative `n × n` matrix whose column sums do not exceed `max_col_sum`.
pub fn productive_matrix<R: Rng>(rng: &mut R, n: usize, max_col_sum: f64) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
    for mut col in a.column_iter_mut() {
        let target = max_col_sum * rng.random::<f64>();
        let s = col.sum();
        if s > 0.0 {
            col *= target / s;
        }
    }
    a
}

/// Balanced table built from random coefficients and final demand, with
/// gross output solved by Gauss–Seidel so it is independent of the
/// library's Leontief inverse.
pub fn balanced_wiot<R: Rng>(rng: &mut R, nations: usize, sectors: usize) -> WiotTable {
    let n = nations * sectors;
    let a = productive_matrix(rng, n, 0.7);
    let f = DMatrix::from_fn(n, nations, |_, _| 1.0 + 9.0 * rng.random::<f64>());
    let demand: DVector<f64> = DVector::from_fn(n, |i, _| f.row(i).sum());
    let mut x = demand.clone();
    for _ in 0..500 {
        x = &demand + &a * &x;
    }
    let t = &a * DMatrix::from_diagonal(&x);
    let v = DVector::from_fn(n, |j, _| x[j] - t.column(j).sum());
    let x = DVector::from_fn(n, |i, _| t.row(i).sum() + f.row(i).sum());
    WiotTable::new(
        (0..nations).map(|i| format!("N{i}")).collect(),
        (0..sectors).map(|k| format!("S{k}")).collect(),
        t,
        f,
        v,
        x,
    )
    .expect("generated table is valid")
}

pub fn random_economy<R: Rng>(rng: &mut R, j: usize) -> WorldEconomy {
    let theta = 2.0 + 6.0 * rng.random::<f64>();
    let tau = (0..j)
        .map(|a| {
            (0..j)
                .map(|b| {
                    if a == b {
                        1.0
                    } else {
                        1.0 + 1.5 * rng.random::<f64>()
                    }
                })
                .collect()
        })
        .collect();
    WorldEconomy {
        countries: j,
        labor: (0..j).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect(),
        t1: (0..j).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect(),
        t2: (0..j).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect(),
        tau,
        alpha2: 0.2 + 0.6 * rng.random::<f64>(),
        theta,
        sigma: 1.2 + (theta - 0.5) * 0.8 * rng.random::<f64>(),
        gamma: 0.3 + 0.7 * rng.random::<f64>(),
        names: None,
        stages: 2,
    }
}
