//! Bessel values against a high-precision reference table.

use std::f64::consts::PI;

use conewave::bessel::{bessel_j, BesselOrder};

#[test]
fn random_orders_and_arguments_match_high_precision_table() {
    let data = include_str!("data/besselj_reference.csv");
    let mut worst = 0.0f64;
    for line in data.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (nu, x, expect) = (f[0], f[1], f[2]);
        let got = bessel_j(BesselOrder::new(nu).unwrap(), x).unwrap();
        // Relative error, except close to zeros where the local envelope sets
        // the scale.
        let env = (2.0 / (PI * x.max(nu).max(1.0))).sqrt();
        let scale = expect.abs().max(1e-3 * env).max(1e-290);
        let err = (got - expect).abs() / scale;
        worst = worst.max(err);
        assert!(err < 1e-10, "J_{nu}({x}) = {got:e}, expected {expect:e}, err {err:.2e}");
    }
    eprintln!("worst scaled error {worst:.3e}");
    assert!(worst < 1e-10);
}
