mod common;

use rug::{Complex, Float};
use xizeros::numerics::PrecisionContext;
use xizeros::product_identities::{estimate_order, ORDER_RADII};
use xizeros::transform::{eval_m, eval_xi, heat_flow_residual, AlephParam};

fn ctx() -> PrecisionContext {
    PrecisionContext::with_target_digits(30).unwrap()
}

#[test]
fn oracles_reproduce_classical_constants() {
    assert!((common::gamma_quarter(128).to_f64() - 3.625_609_908_221_908).abs() < 1e-14);
    assert!((common::zeta_half(128).to_f64() + 1.460_354_508_809_586_8).abs() < 1e-14);
    let g = common::riemann_ordinates(26.0);
    assert_eq!(g.len(), 3);
    assert!((g[0] - 14.134_725_141_734_69).abs() < 1e-9, "{g:?}");
}

#[test]
fn origin_matches_xi_half() {
    let ctx = ctx();
    let bits = ctx.working_bits();
    let m0 = eval_m(&AlephParam::new(0.0).unwrap(), &Complex::new(bits), &ctx)
        .unwrap()
        .value;
    let oracle = common::xi_half_over_8(bits);
    let diff = Float::with_val(bits, m0.value().real() - &oracle).abs();
    // both are good to far more than 25 digits
    assert!(diff < 1e-25, "diff {diff}");
    assert!(m0.radius().to_f64() < 1e-25);
}

#[test]
fn real_arguments_match_simpson() {
    let ctx = PrecisionContext::with_target_digits(20).unwrap();
    let bits = ctx.working_bits();
    for aleph in [-1.0, 0.0, 2.5] {
        let a = AlephParam::new(aleph).unwrap();
        for r in [0.5, 3.0, 12.0] {
            let m = eval_m(&a, &Complex::with_val(bits, (r, 0)), &ctx).unwrap();
            let oracle = common::m_real_simpson(aleph, r);
            let got = m.value.value().real().to_f64();
            assert!(
                (got - oracle).abs() < 1e-12 * oracle.abs().max(1.0),
                "M({aleph},{r}): {got} vs {oracle}"
            );
            let x = eval_xi(&a, &Complex::with_val(bits, (r, 0)), &ctx).unwrap();
            let oracle = common::xi_real_simpson(aleph, r);
            let got = x.value.value().real().to_f64();
            assert!(
                (got - oracle).abs() < 1e-12,
                "Xi({aleph},{r}): {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn heat_flow_minus_sign() {
    let ctx = PrecisionContext::with_target_digits(24).unwrap();
    for (aleph, lambda) in [(0.0, 5.0), (1.0, 0.0), (-0.5, 12.0)] {
        let lam = Float::with_val(ctx.working_bits(), lambda);
        let h = heat_flow_residual(&AlephParam::new(aleph).unwrap(), &lam, &ctx).unwrap();
        let minus = h.res_minus.to_f64();
        let plus = h.res_plus.to_f64();
        assert!(minus < 1e-8, "({aleph},{lambda}) res_minus {minus}");
        assert!(plus > 1e3 * minus, "({aleph},{lambda}) res_plus {plus}");
    }
}

/// The prescribed order estimator at these radii: slope of
/// ln ln(M(r)/M(0)) on ln r, recomputed here in f64 from Simpson values.
#[test]
fn order_estimate_matches_independent_fit() {
    let ctx = ctx();
    let est = estimate_order(&AlephParam::new(0.0).unwrap(), &ctx).unwrap();
    let m0 = common::m_real_simpson(0.0, 0.0);
    let xs: Vec<f64> = ORDER_RADII.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = ORDER_RADII
        .iter()
        .map(|&r| (common::m_real_simpson(0.0, r) / m0).ln().ln())
        .collect();
    let oracle = common::slope(&xs, &ys);
    assert!(
        (est.to_f64() - oracle).abs() < 1e-6,
        "{} vs {oracle}",
        est.to_f64()
    );
    // the finite-radius slope is far from the asymptotic order 1
    assert!((1.75..1.85).contains(&oracle));
}
