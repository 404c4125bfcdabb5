//! Two-book finite-difference runs against the single-book solver and the
//! two-book impact law.

use llob_core::dual::{crossover, dual_grid, impact_dual, run_dual_pde, run_dual_pde_with, DualBookParams};
use llob_core::integral::DirectScaling;
use llob_core::params::{BookParams, MetaorderSpec};
use llob_core::pde::{run_metaorder, Coefficients, Grid};

#[test]
fn identical_books_act_as_one_book() {
    let book = BookParams::new(1.0, 0.02, 0.1).unwrap();
    let doubled = book.with_lam(0.2).unwrap();
    let spec = MetaorderSpec::buy(0.5, 1.0).unwrap();
    let grid = Grid::for_metaorder(&book, &spec, 4000).unwrap();
    let dt = grid.max_stable_dt(1.0);
    let single = run_metaorder(&doubled, &spec, grid, dt).unwrap();
    let dual = run_dual_pde(&DualBookParams::new(book, book), &spec, grid, dt).unwrap();
    assert!((dual.slow_share - 0.5).abs() < 1e-12);
    for (a, b) in single.prices.iter().zip(&dual.prices).skip(1) {
        assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    }
    assert!((dual.impact / single.impact - 1.0).abs() < 1e-9);
}

#[test]
fn empty_slow_book_leaves_fast_book_alone() {
    let fast = BookParams::new(1.0, 2.0, 3.0).unwrap();
    let spec = MetaorderSpec::buy(0.4, 1.0).unwrap();
    let grid = Grid::for_metaorder(&fast, &spec, 2000).unwrap();
    let dt = grid.max_stable_dt(1.0);
    let single = run_metaorder(&fast, &spec, grid, dt).unwrap();
    let empty = Coefficients::new(0.01, 0.001, 0.0).unwrap();
    let dual = run_dual_pde_with(&empty, &Coefficients::from(&fast), &spec, grid, dt).unwrap();
    assert_eq!(dual.slow_share, 0.0);
    assert_eq!(dual.prices, single.prices);
}

#[test]
fn no_metaorder_no_motion() {
    let p = DualBookParams::new(BookParams::new(1e-3, 1e-3, 0.01).unwrap(), BookParams::new(1.0, 50.0, 5.0).unwrap());
    let spec = MetaorderSpec::buy(0.0, 1.0).unwrap();
    let grid = dual_grid(&p, &spec, 1000).unwrap();
    let run = run_dual_pde(&p, &spec, grid, grid.max_stable_dt(1.0)).unwrap();
    assert!(run.prices.iter().all(|&x| x.abs() < 1e-12));
}

#[test]
fn slow_fast_regime_follows_dual_law() {
    // J_s / J_f = 1e-2, nu_s T = 1e-3, nu_f T = 100, T > T†, eta* < eta < 1.
    let slow = BookParams::from_liquidity(10.0, 0.01, 1e-3).unwrap();
    let fast = BookParams::from_liquidity(1.0, 1.0, 100.0).unwrap();
    let p = DualBookParams::new(slow, fast);
    let spec = MetaorderSpec::buy(0.1, 1.0).unwrap();
    let c = crossover(&p);
    assert!(spec.duration() > c.t_dagger);
    let probe = dual_grid(&p, &spec, 100).unwrap();
    let grid = dual_grid(&p, &spec, (2.0 * probe.x_max() / 0.004) as usize).unwrap();
    let run = run_dual_pde(&p, &spec, grid, grid.max_stable_dt(1.0)).unwrap();
    let theory = impact_dual(&p, &spec, &DirectScaling::default());
    assert!(theory.warnings.is_empty() && run.warnings.is_empty());
    assert!((run.impact / theory.impact - 1.0).abs() < 0.15, "pde {} theory {}", run.impact, theory.impact);
    assert!(run.slow_share > 0.9);
}
