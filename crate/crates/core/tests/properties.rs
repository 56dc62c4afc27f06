use nonlocal_core::flow::{crossing_number, smoothstep, FlowOptions, OperatorPath};
use nonlocal_core::kernel::{BaseKernel, KernelModel};
use nonlocal_core::nonlinearity::Nonlinearity;
use nonlocal_core::quadrature::adaptive_gk;
use nonlocal_core::symbol::{count_roots, hyperbolicity_check, CharacteristicFunction, Rectangle};
use nonlocal_core::{Complex64, RMatrix};
use nalgebra::DVector;
use proptest::prelude::*;

fn s(a: f64) -> RMatrix {
    RMatrix::from_element(1, 1, a)
}

fn base_kernel() -> impl Strategy<Value = BaseKernel> {
    prop_oneof![
        (0.3f64..2.0).prop_map(|sigma| BaseKernel::Gaussian { sigma }),
        (0.5f64..3.0).prop_map(|rate| BaseKernel::TwoSidedExponential { rate }),
        (-1.5f64..1.5).prop_map(|center| BaseKernel::ShiftedGaussianBump { center }),
    ]
}

fn even_kernel() -> impl Strategy<Value = BaseKernel> {
    prop_oneof![
        (0.3f64..2.0).prop_map(|sigma| BaseKernel::Gaussian { sigma }),
        (0.5f64..3.0).prop_map(|rate| BaseKernel::TwoSidedExponential { rate }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_symbol_matches_quadrature(base in base_kernel(), re in -0.4f64..0.4, im in -2.0f64..2.0) {
        let nu = Complex64::new(re * base.strip_half_width().min(2.0), im);
        // the weight e^{-nu x} slows the decay, so integrate well past the
        // unweighted truncation interval
        let (lo, hi) = base.support();
        let mid = 0.5 * (lo + hi);
        let (lo, hi) = (mid + 3.0 * (lo - mid), mid + 3.0 * (hi - mid));
        let mut edges = vec![lo];
        edges.extend(base.kinks().iter().copied().filter(|k| *k > lo && *k < hi));
        edges.push(hi);
        let quad: Complex64 = edges
            .windows(2)
            .map(|w| adaptive_gk(w[0], w[1], 1e-14, 4000, |x| base.value(x) * (-nu * x).exp()).value)
            .sum();
        let exact = base.symbol(nu);
        prop_assert!((quad - exact).norm() <= 1e-9 * exact.norm().max(1e-3));
    }

    #[test]
    fn even_kernels_give_reflection_and_conjugation_symmetry(
        base in even_kernel(), a in 0.2f64..3.0, re in -0.3f64..0.3, im in -3.0f64..3.0,
    ) {
        let k = KernelModel::scalar(base, 1.0).unwrap();
        let cf = CharacteristicFunction::steady_state(s(a), k).unwrap();
        prop_assert!(cf.is_reflection_symmetric());
        let nu = Complex64::new(re * base.strip_half_width().min(2.0), im);
        let d = cf.eval_d(nu).unwrap();
        prop_assert!((cf.eval_d(-nu).unwrap() - d).norm() < 1e-12 * d.norm().max(1.0));
        prop_assert!((cf.eval_d(nu.conj()).unwrap() - d.conj()).norm() < 1e-12 * d.norm().max(1.0));
    }

    #[test]
    fn root_counts_add_over_a_split(a in 1.1f64..4.0, frac in 0.15f64..0.85) {
        // roots +-i sqrt(a - 1) lie on the axis, away from the horizontal cut unless a = 1 + y^2
        let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap();
        let cf = CharacteristicFunction::steady_state(s(a), k).unwrap();
        let root = (a - 1.0).sqrt();
        let y = -2.3 + frac * 4.6;
        prop_assume!((y.abs() - root).abs() > 0.02);
        let whole = count_roots(&cf, &Rectangle::new(-0.5, 0.5, -2.3, 2.3).unwrap()).unwrap();
        let lower = count_roots(&cf, &Rectangle::new(-0.5, 0.5, -2.3, y).unwrap()).unwrap();
        let upper = count_roots(&cf, &Rectangle::new(-0.5, 0.5, y, 2.3).unwrap()).unwrap();
        prop_assert_eq!(whole, lower + upper);
        prop_assert_eq!(whole, if root < 2.3 { 2 } else { 0 });
    }

    #[test]
    fn polynomial_jacobian_matches_differences(c2 in -2.0f64..2.0, c3 in -2.0f64..2.0, u in -1.5f64..1.5) {
        let n = Nonlinearity::polynomial(vec![0.0, 0.0, c2, c3]).unwrap();
        let h = 1e-6;
        let fd = (n.value(&DVector::from_element(1, u + h))[0] - n.value(&DVector::from_element(1, u - h))[0]) / (2.0 * h);
        let j = n.jacobian(&DVector::from_element(1, u))[(0, 0)];
        prop_assert!((fd - j).abs() < 1e-7 * j.abs().max(1.0));
    }
}

fn scalar_path(a0: f64, a1: f64, shift: f64, rho: (f64, f64)) -> OperatorPath {
    let (r0, r1) = rho;
    OperatorPath::new(r0, r1, 0.6, move |r| {
        let t = (r - r0) / (r1 - r0);
        let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0)?;
        Ok(CharacteristicFunction::steady_state(s(a0 + (a1 - a0) * smoothstep(t)), k)?.with_shift(shift))
    })
    .unwrap()
}

fn hyperbolic(a: f64, shift: f64) -> bool {
    let k = KernelModel::scalar(BaseKernel::TwoSidedExponential { rate: 1.0 }, 1.0).unwrap();
    let cf = CharacteristicFunction::steady_state(s(a), k).unwrap().with_shift(shift);
    hyperbolicity_check(&cf, cf.auto_ell_max().unwrap(), 2001).unwrap().min_abs > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn crossing_numbers_reverse_and_concatenate(
        a0 in 0.5f64..3.0, a1 in 0.5f64..3.0, a2 in 0.5f64..3.0, shift in 0.2f64..0.35,
    ) {
        prop_assume!(hyperbolic(a0, shift) && hyperbolic(a1, shift) && hyperbolic(a2, shift));
        let opts = FlowOptions::default();
        let p = scalar_path(a0, a1, shift, (0.0, 1.0));
        let q = scalar_path(a1, a2, shift, (1.0, 2.0));
        let cp = crossing_number(&p, &opts).unwrap().0;
        let cq = crossing_number(&q, &opts).unwrap().0;
        prop_assert_eq!(crossing_number(&p.reversed(), &opts).unwrap().0, -cp);
        prop_assert_eq!(crossing_number(&p.concat(&q).unwrap(), &opts).unwrap().0, cp + cq);
        // only the two endpoints matter: a crossing happens iff 1 - shift^2 lies between them
        let c = 1.0 - shift * shift;
        let expected = if (a0 - c) * (a1 - c) < 0.0 { 1 } else { 0 };
        prop_assert_eq!(cp.abs(), expected);
    }
}
