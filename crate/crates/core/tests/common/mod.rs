#![allow(dead_code)]

use sqcflow_core::catalog::{self, CatalogEntry};
use sqcflow_core::Point;

pub fn p(v: &[f64]) -> Point<f64> {
    Point::from_f64(v).unwrap()
}

/// Every catalog entry, with and without known constants.
pub fn all_entries() -> Vec<CatalogEntry<f64>> {
    let mut v = catalog::modulus_entries::<f64>().unwrap();
    v.push(catalog::sin_quadratic());
    v.push(catalog::pl_without_uniqueness());
    v.push(catalog::cubic());
    v.push(catalog::linear(p(&[1.0, -2.0])).unwrap());
    v.push(catalog::shifted_half_square(p(&[0.3, -1.2])).unwrap());
    v.push(catalog::quadratic_fraction_example(1.0).unwrap());
    v
}
