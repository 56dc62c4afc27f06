//! Identities that tie the modules together.

use nonlocal_core::flow::{crossing_number, fredholm_index, weighted_front_path, FlowOptions, OperatorPath};
use nonlocal_core::kernel::{BaseKernel, KernelModel};
use nonlocal_core::nonlinearity::Nonlinearity;
use nonlocal_core::oracle::{assemble_weighted, numerical_index, InhomogeneousOperator};
use nonlocal_core::symbol::{roots_in_rectangle, CharacteristicFunction, Rectangle};
use nonlocal_core::wavetrain::{find_axis_root, grid_residual, ReducedData, WaveProblem};
use nonlocal_core::{Complex64, RMatrix};

fn s(a: f64) -> RMatrix {
    RMatrix::from_element(1, 1, a)
}

fn exp1() -> KernelModel {
    KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap()
}

fn front(a_minus: f64, a_plus: f64) -> InhomogeneousOperator {
    InhomogeneousOperator::steady_state(
        exp1(),
        move |x| s(a_minus + (a_plus - a_minus) * 0.5 * (1.0 + x.tanh())),
        s(a_minus),
        s(a_plus),
    )
    .unwrap()
}

fn limit_path(a_minus: f64, a_plus: f64, eta: f64) -> OperatorPath {
    weighted_front_path(|a| CharacteristicFunction::steady_state(a, exp1()), s(a_minus), s(a_plus), eta, 0.6).unwrap()
}

#[test]
fn index_from_flow_equals_grid_oracle_in_both_directions() {
    // a decaying weight turns the neutral pair at a = 2 into one extra
    // kernel direction at either end; a growing weight into a cokernel one
    for (am, ap, eta, expected) in [(0.5, 2.0, 0.3, 1), (2.0, 0.5, 0.3, 1), (0.5, 2.0, -0.3, -1), (0.5, 0.7, 0.3, 0)] {
        let flow = fredholm_index(&limit_path(am, ap, eta), &FlowOptions::default()).unwrap();
        let grid = assemble_weighted(&front(am, ap), 30.0, 450, eta).unwrap();
        let oracle = numerical_index(&grid, 1e3).unwrap();
        assert_eq!(flow, expected, "flow index for {am} -> {ap}, eta {eta}");
        assert_eq!(oracle.index, expected, "oracle index for {am} -> {ap}, eta {eta}: {oracle:?}");
    }
}

#[test]
fn crossing_number_is_minus_the_index() {
    let p = limit_path(0.5, 2.0, 0.3);
    let (c, ledger) = crossing_number(&p, &FlowOptions::default()).unwrap();
    assert_eq!(c, ledger.total());
    assert_eq!(c, -fredholm_index(&p, &FlowOptions::default()).unwrap());
}

#[test]
fn wavetrain_frequency_is_the_axis_root_of_the_symbol() {
    for a in [1.5, 2.0, 3.0] {
        let p = WaveProblem::new(s(a), exp1(), Nonlinearity::quadratic(), 16).unwrap();
        let rd = ReducedData::compute(&p, (0.2, 2.0)).unwrap();
        assert!((rd.omega_star - (a - 1.0).sqrt()).abs() < 1e-10);
        let roots = roots_in_rectangle(&p.characteristic(), &Rectangle::new(-0.3, 0.3, 0.05, 2.0).unwrap(), 1e-13).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].nu - Complex64::new(0.0, rd.omega_star)).norm() < 1e-10);
        assert_eq!(find_axis_root(&p.characteristic(), (0.2, 2.0), 16).unwrap(), rd.omega_star);
    }
}

#[test]
fn zero_amplitude_wavetrain_solves_the_linear_equation_on_a_grid() {
    let p = WaveProblem::new(s(2.0), exp1(), Nonlinearity::quadratic(), 16).unwrap();
    let rd = ReducedData::compute(&p, (0.5, 1.5)).unwrap();
    let mut c = RMatrix::zeros(17, 1);
    c[(1, 0)] = 1e-3;
    // the linear part alone leaves only the quadratic term u^2 ~ 1e-6 as residual
    let r = grid_residual(&p, rd.omega_star, &c, 0.002);
    assert!(r < 2e-6 && r > 1e-8, "{r}");
}
