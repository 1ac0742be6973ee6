use std::f64::consts::PI;

use orlicz_lab::measure::{Axis, ScalarField, WeightSpec, WeightedDomain};
use orlicz_lab::operator::{solve_problem, EllipticOperatorSpec};

fn nodal_error(dom: &WeightedDomain, u: &ScalarField, exact: impl Fn(&[f64]) -> f64) -> f64 {
    (0..dom.len()).map(|i| (u.values()[i] - exact(dom.node(i))).abs()).fold(0.0, f64::max)
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn radial_manufactured_solution() {
    // u = cos(πr/2) on the unit ball in R³: -Δu = (π/2)² u + (π/r) sin(πr/2).
    let k = PI / 2.0;
    let errors: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&cells| {
            let dom = WeightedDomain::ball(3, 1.0, cells, &WeightSpec::uniform()).unwrap();
            let f = ScalarField::from_fn(&dom, |x| k * k * (k * x[0]).cos() + 2.0 * k * (k * x[0]).sin() / x[0]).unwrap();
            let u = solve_problem(&EllipticOperatorSpec::uniform(&dom).unwrap(), &f, 1e-12).unwrap();
            nodal_error(&dom, &u, |x| (k * x[0]).cos())
        })
        .collect();
    for p in orders(&errors) {
        assert!(p > 1.8, "orders {:?} from errors {errors:?}", orders(&errors));
    }
}

#[test]
fn degenerate_radial_operator_converges() {
    // -div(|x|^α ∇u) = |x|^α on the unit ball in R³: u = (1 - r²) / (2(3 + α)).
    for alpha in [0.5, 1.0, 2.0] {
        let errors: Vec<f64> = [32, 64, 128, 256]
            .iter()
            .map(|&cells| {
                let dom = WeightedDomain::ball(3, 1.0, cells, &WeightSpec::Power { alpha }).unwrap();
                let spec = EllipticOperatorSpec::a2_degenerate(&dom, alpha).unwrap();
                let u = solve_problem(&spec, &ScalarField::constant(&dom, 1.0), 1e-12).unwrap();
                nodal_error(&dom, &u, |x| (1.0 - x[0] * x[0]) / (2.0 * (3.0 + alpha)))
            })
            .collect();
        for p in orders(&errors) {
            assert!(p > 0.9, "α = {alpha}: orders {:?}", orders(&errors));
        }
        assert!(errors[3] < 1e-3, "α = {alpha}: {errors:?}");
    }
}

#[test]
fn box_manufactured_solution() {
    // u = sin(πx) sin(πy) on the unit square.
    let errors: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&cells| {
            let axis = Axis { lo: 0.0, hi: 1.0, cells };
            let dom = WeightedDomain::boxed(vec![axis, axis], &WeightSpec::uniform()).unwrap();
            let exact = |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin();
            let f = ScalarField::from_fn(&dom, |x| 2.0 * PI * PI * exact(x)).unwrap();
            let u = solve_problem(&EllipticOperatorSpec::uniform(&dom).unwrap(), &f, 1e-12).unwrap();
            nodal_error(&dom, &u, exact)
        })
        .collect();
    for p in orders(&errors) {
        assert!(p > 1.8, "orders {:?}", orders(&errors));
    }
}

#[test]
fn diagonal_coefficient_on_a_box() {
    // -(2 u_xx + u_yy) = (2 + 1) π² sin(πx) sin(πy) has the same solution.
    let cells = 48;
    let axis = Axis { lo: 0.0, hi: 1.0, cells };
    let dom = WeightedDomain::boxed(vec![axis, axis], &WeightSpec::uniform()).unwrap();
    let exact = |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let q: Vec<f64> = (0..dom.len()).flat_map(|_| [2.0, 1.0]).collect();
    let spec = EllipticOperatorSpec::custom(&dom, q, 2).unwrap();
    let f = ScalarField::from_fn(&dom, |x| 3.0 * PI * PI * exact(x)).unwrap();
    let u = solve_problem(&spec, &f, 1e-12).unwrap();
    assert!(nodal_error(&dom, &u, exact) < 2e-3);
}

#[test]
fn graded_mesh_matches_uniform_mesh() {
    let uniform = WeightedDomain::ball(3, 1.0, 512, &WeightSpec::uniform()).unwrap();
    let graded = WeightedDomain::ball_with_edges(
        3,
        orlicz_lab::measure::graded_radial_edges(1.0, 1e-3, 64).unwrap(),
        &WeightSpec::uniform(),
    )
    .unwrap();
    let centre = |dom: &WeightedDomain| {
        let f = ScalarField::from_fn(dom, |x| (-(x[0] / 0.3).powi(2)).exp()).unwrap();
        solve_problem(&EllipticOperatorSpec::uniform(dom).unwrap(), &f, 1e-12).unwrap().values()[0]
    };
    let (a, b) = (centre(&uniform), centre(&graded));
    assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
}
