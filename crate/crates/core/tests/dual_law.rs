//! Two-book impact law evaluated with the solved crossover function.

use llob_core::dual::{crossover, impact_dual, DualBookParams};
use llob_core::integral::{impact, DirectScaling, ScalingTable};
use llob_core::params::{BookParams, MetaorderSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

fn table() -> &'static ScalingTable {
    static T: OnceLock<ScalingTable> = OnceLock::new();
    T.get_or_init(|| ScalingTable::build(200, 1e-10).unwrap())
}

fn books() -> DualBookParams {
    let slow = BookParams::new(1e-4, 1e-3, 0.03).unwrap();
    let fast = BookParams::new(1.0, 100.0, 10.0).unwrap();
    DualBookParams::new(slow, fast)
}

#[test]
fn linear_in_volume_far_below_crossover() {
    let p = books();
    let c = crossover(&p);
    let f = DirectScaling::default();
    for t in [c.t_dagger, 3.0 * c.t_dagger, 30.0 * c.t_dagger] {
        let q = 1e-3 * c.eta_star * p.fast.transaction_rate() * t;
        let a = impact_dual(&p, &MetaorderSpec::buy(q, t).unwrap(), &f).impact;
        let b = impact_dual(&p, &MetaorderSpec::buy(q / 4.0, t).unwrap(), &f).impact;
        assert!((a / b / 4.0 - 1.0).abs() < 0.02, "T {t}: {a} {b}");
    }
}

#[test]
fn duration_free_far_above_crossover() {
    let p = books();
    let c = crossover(&p);
    let f = DirectScaling::default();
    let t0 = 2.0 * c.t_dagger;
    let q = 1e3 * c.eta_star * p.fast.transaction_rate() * (10.0 * t0);
    let reference = impact_dual(&p, &MetaorderSpec::buy(q, t0).unwrap(), &f).impact;
    for k in [2.0, 5.0, 10.0] {
        let i = impact_dual(&p, &MetaorderSpec::buy(q, k * t0).unwrap(), &f).impact;
        assert!((i / reference - 1.0).abs() < 0.02, "T {}: {i} vs {reference}", k * t0);
    }
}

#[test]
fn above_t_dagger_is_the_slow_single_book_law_in_fast_units() {
    // With eta = Q / (J_f T), eta / eta* = Q / (J_s T): the slow book alone.
    let p = books();
    let c = crossover(&p);
    for (q, t) in [(1e-5, 10.0 * c.t_dagger), (0.3, 2.0 * c.t_dagger), (5.0, 100.0 * c.t_dagger)] {
        let spec = MetaorderSpec::buy(q, t).unwrap();
        let dual = impact_dual(&p, &spec, table()).impact;
        let single = impact(&p.slow, &spec, table());
        assert!((dual / single - 1.0).abs() < 1e-12, "{dual} {single}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn continuous_at_t_dagger_with_solved_f(
        d_s in 1e-6..1e-2f64, lam_s in 1e-4..1e-1f64, nu_f in 1.0..1e3f64, lam_f in 0.1..100.0f64, q in 1e-6..1.0f64,
    ) {
        let p = DualBookParams::new(BookParams::new(d_s, 1e-3, lam_s).unwrap(), BookParams::new(1.0, nu_f, lam_f).unwrap());
        let c = crossover(&p);
        let at = impact_dual(&p, &MetaorderSpec::buy(q, c.t_dagger).unwrap(), table()).impact;
        let below = impact_dual(&p, &MetaorderSpec::buy(q, c.t_dagger.next_down()).unwrap(), table()).impact;
        prop_assert!((at / below - 1.0).abs() <= 1e-12, "{at} {below}");
    }
}
