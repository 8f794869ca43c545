mod common;

use xizeros::numerics::PrecisionContext;
use xizeros::product_identities::zero_sum;
use xizeros::transform::AlephParam;
use xizeros::zeros::{count_zeros_in_box, scan_real_zeros, Rect, ZeroTable};

#[test]
fn zeros_are_twice_zeta_ordinates() {
    let ctx = PrecisionContext::with_target_digits(20).unwrap();
    let table = scan_real_zeros(&AlephParam::new(0.0).unwrap(), 0.0, 80.0, &ctx).unwrap();
    let oracle: Vec<f64> = common::riemann_ordinates(40.0)
        .iter()
        .map(|g| 2.0 * g)
        .collect();
    let got: Vec<f64> = table
        .real_zeros()
        .iter()
        .map(|z| z.location.to_f64())
        .collect();
    assert_eq!(got.len(), oracle.len(), "{got:?} vs {oracle:?}");
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-8, "{g} vs {o}");
    }
    for z in table.real_zeros() {
        assert!(z.certified_digits >= 15);
        let (lo, hi) = (z.bracket.0.to_f64(), z.bracket.1.to_f64());
        assert!(lo <= z.location.to_f64() && z.location.to_f64() <= hi && hi - lo <= 1e-6);
    }
}

#[test]
fn partial_sums_against_oracle_zeros() {
    let ctx = PrecisionContext::with_target_digits(20).unwrap();
    let table = scan_real_zeros(&AlephParam::new(0.0).unwrap(), 0.0, 80.0, &ctx).unwrap();
    let s = zero_sum(&table, 2).unwrap();
    let oracle: f64 = common::riemann_ordinates(40.0)
        .iter()
        .map(|g| (2.0 * g).powi(-2))
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .nth(2)
        .unwrap();
    assert!((s.partial_sums[2].to_f64() - oracle).abs() < 1e-12);
}

#[test]
fn csv_round_trip_is_exact() {
    let ctx = PrecisionContext::with_target_digits(25).unwrap();
    let table = scan_real_zeros(&AlephParam::new(0.0).unwrap(), 20.0, 45.0, &ctx).unwrap();
    let csv = table.to_csv_string();
    let back = ZeroTable::read_csv(csv.as_bytes()).unwrap();
    assert_eq!(back.to_csv_string(), csv);
    // the printed digits are what round-trips: a second import is identical
    assert_eq!(
        ZeroTable::read_csv(back.to_csv_string().as_bytes()).unwrap(),
        back
    );
    for (a, b) in table.real_zeros().iter().zip(back.real_zeros()) {
        assert!((a.location.to_f64() - b.location.to_f64()).abs() < 1e-20);
        assert_eq!(a.certified_digits, b.certified_digits);
    }
}

#[test]
fn counts_are_additive_across_a_split() {
    let ctx = PrecisionContext::with_target_digits(20).unwrap();
    let a = AlephParam::new(0.0).unwrap();
    let whole = count_zeros_in_box(&a, &Rect::new(20.0, 55.0, -1.5, 1.5).unwrap(), &ctx).unwrap();
    let left = count_zeros_in_box(&a, &Rect::new(20.0, 37.3, -1.5, 1.5).unwrap(), &ctx).unwrap();
    let right = count_zeros_in_box(&a, &Rect::new(37.3, 55.0, -1.5, 1.5).unwrap(), &ctx).unwrap();
    assert_eq!(whole.count, 3);
    assert_eq!(left.count + right.count, whole.count);
}
