mod common;

use ks_core::linalg::vdot;
use ks_core::measurement::{equal_signs, probabilities};
use ks_core::observables::{
    chi_states, eigenprojector, expectation, from_canonical, product_ket, psi1, to_canonical, ProductObservable,
};
use ks_core::optics::{
    build_fig2, build_fig3_joint, builtin_device, propagate, JointPair, PairVariant, TransferCheck, BUILTIN_DEVICES,
};
use ks_core::state::{inner_product, spin_basis_coeffs, Axis, PathSpinState, SpinVector};
use ks_core::{OutcomeLabel, Sign};
use num_complex::Complex;
use proptest::prelude::*;

fn amp() -> impl Strategy<Value = Complex<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

fn spin() -> impl Strategy<Value = SpinVector<f64>> {
    (amp(), amp()).prop_map(|(a, b)| SpinVector::new(a, b))
}

/// Random normalized state on `{u, d}`.
fn ud_state() -> impl Strategy<Value = PathSpinState<f64>> {
    (spin(), spin())
        .prop_filter("nonzero", |(a, b)| a.norm_sqr() + b.norm_sqr() > 1e-6)
        .prop_map(|(a, b)| PathSpinState::new([("u", a), ("d", b)]).unwrap())
}

fn sandwich(m: &ks_core::Matrix64, s: &PathSpinState<f64>) -> f64 {
    let v = to_canonical(s).unwrap();
    vdot(&v, &m.apply(&v)).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn states_are_normalized(s in ud_state()) {
        let n = inner_product(&s, &s);
        prop_assert!((n.re - 1.0).abs() <= 1e-9);
        prop_assert!(n.im.abs() <= 1e-12);
    }

    #[test]
    fn inner_product_hermitian(a in ud_state(), b in ud_state()) {
        let ab = inner_product(&a, &b);
        let ba = inner_product(&b, &a);
        prop_assert!((ab - ba.conj()).norm() <= 1e-12);
    }

    #[test]
    fn x_basis_change_is_involution(v in spin()) {
        let (p, m) = spin_basis_coeffs(&v, Axis::X);
        let (a, b) = spin_basis_coeffs(&SpinVector::new(p, m), Axis::X);
        prop_assert!((a - v.plus_z).norm() <= 1e-12 && (b - v.minus_z).norm() <= 1e-12);
    }

    #[test]
    fn pruning_keeps_probabilities(s in ud_state(), dust in 0.0f64..1e-7) {
        let with_dust = PathSpinState::new(
            s.branches().iter().map(|(m, v)| (m.clone(), *v))
                .chain([("extra".into(), SpinVector::real(dust, 0.0))]),
        ).unwrap();
        let pruned = with_dust.pruned();
        prop_assert!((with_dust.overlap(&pruned) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn propagation_preserves_norm(s in ud_state()) {
        for name in &BUILTIN_DEVICES[1..] {
            let out = propagate(&builtin_device(name).unwrap(), &s).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn joint_device_matches_projectors(s in ud_state()) {
        let g = build_fig3_joint(JointPair::Z1X2X1Z2);
        let dist = probabilities(&g, &s).unwrap();
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                let pq = &eigenprojector::<f64>(ProductObservable::Z1X2, a)
                    * &eigenprojector::<f64>(ProductObservable::X1Z2, b);
                let label = OutcomeLabel::new([("Z1X2", a), ("X1Z2", b)]);
                prop_assert!((dist.probability(&label) - sandwich(&pq, &s)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn other_joint_device_matches_projectors(s in ud_state()) {
        let g = build_fig3_joint(JointPair::Z1Z2X1X2);
        let dist = probabilities(&g, &s).unwrap();
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                let pq = &eigenprojector::<f64>(ProductObservable::Z1Z2, a)
                    * &eigenprojector::<f64>(ProductObservable::X1X2, b);
                let label = OutcomeLabel::new([("Z1Z2", a), ("X1X2", b)]);
                prop_assert!((dist.probability(&label) - sandwich(&pq, &s)).abs() <= 1e-9);
            }
        }
    }

    /// The three χ expansions give the same joint-device statistics for
    /// any superposition, including a global phase.
    #[test]
    fn erasure_depends_only_on_ray(alpha in amp(), beta in amp(), phase in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(alpha.norm_sqr() + beta.norm_sqr() > 1e-6);
        use Axis::{X, Z};
        use Sign::{Minus as M, Plus as P};
        let k = |pa, ps, sa, ss| product_ket::<f64>((pa, ps), (sa, ss));
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (z_pm, z_mp) = chi_states::<f64>();
        let x_pm = PathSpinState::superpose([(h, &k(Z, P, X, P)), (-h, &k(Z, M, X, M))]).unwrap();
        let x_mp = PathSpinState::superpose([(h, &k(Z, P, X, M)), (h, &k(Z, M, X, P))]).unwrap();
        let p_pm = PathSpinState::superpose([(h, &k(X, M, Z, P)), (h, &k(X, P, Z, M))]).unwrap();
        let p_mp = PathSpinState::superpose([(h, &k(X, P, Z, P)), (-h, &k(X, M, Z, M))]).unwrap();

        let g = build_fig3_joint(JointPair::Z1X2X1Z2);
        let rot = Complex::from_polar(1.0, phase);
        let reference = probabilities(&g, &PathSpinState::superpose([(alpha, &z_pm), (beta, &z_mp)]).unwrap()).unwrap();
        for (a, b) in [(&x_pm, &x_mp), (&p_pm, &p_mp)] {
            let s = PathSpinState::superpose([(alpha * rot, a), (beta * rot, b)]).unwrap();
            let d = probabilities(&g, &s).unwrap();
            for (label, p) in reference.entries() {
                prop_assert!((d.probability(label) - p).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn transfer_check_agrees(s in ud_state()) {
        let g = build_fig2(PairVariant::D);
        let tc = TransferCheck::<f64>::build(&g).unwrap();
        let a = propagate(&g, &s).unwrap();
        let b = tc.apply(&s).unwrap();
        prop_assert!(a.max_component_diff(&b) <= 1e-9);
    }

    /// Any state with ⟨Z1Z2⟩ = ⟨X1X2⟩ = 1 never shows equal Z1X2, X1Z2 signs.
    #[test]
    fn step_one_ensemble_forbids_equal_signs(s in ud_state()) {
        let proj = &eigenprojector::<f64>(ProductObservable::Z1Z2, Sign::Plus)
            * &eigenprojector::<f64>(ProductObservable::X1X2, Sign::Plus);
        let v = proj.apply(&to_canonical(&s).unwrap());
        prop_assume!(v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
        let filtered = from_canonical(&v).unwrap();
        prop_assert!((expectation(ProductObservable::Z1Z2, &filtered).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!((expectation(ProductObservable::X1X2, &filtered).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!(filtered.same_ray(&psi1(), 1e-9));
        let d = probabilities(&build_fig3_joint(JointPair::Z1X2X1Z2), &filtered).unwrap();
        prop_assert!(d.probability_where(|l| equal_signs(l) == Some(true)) <= 1e-9);
    }
}

#[test]
fn pair_devices_respect_eigenstate_labels() {
    for variant in PairVariant::ALL {
        let g = build_fig2(variant);
        let (path_name, spin_name) = variant.observable_names();
        let path_axis = if path_name == "Z1" { Axis::Z } else { Axis::X };
        let spin_axis = if spin_name == "Z2" { Axis::Z } else { Axis::X };
        for ps in Sign::BOTH {
            for ss in Sign::BOTH {
                let s = product_ket::<f64>((path_axis, ps), (spin_axis, ss));
                let out = propagate(&g, &s).unwrap();
                for m in g.output_modes() {
                    let l = g.label_of(m).unwrap();
                    let matches = l.get(path_name) == Some(ps) && l.get(spin_name) == Some(ss);
                    let w = out.mode_weight(m);
                    if matches {
                        assert!((w - 1.0).abs() <= 1e-12, "{variant:?} {m}");
                    } else {
                        assert!(w <= 1e-24, "{variant:?} {m}: {w}");
                    }
                }
            }
        }
        // an eigenstate of the path observable alone still lands on matching path labels
        for ps in Sign::BOTH {
            let base = product_ket::<f64>((path_axis, ps), (Axis::Z, Sign::Plus));
            let tilted = PathSpinState::superpose([
                (Complex::new(0.6, 0.0), &base),
                (
                    Complex::new(0.0, 0.8),
                    &product_ket::<f64>((path_axis, ps), (Axis::Z, Sign::Minus)),
                ),
            ])
            .unwrap();
            let d = probabilities(&g, &tilted).unwrap();
            assert!(d.probability_where(|l| l.get(path_name) != Some(ps)) <= 1e-12);
        }
    }
}

#[test]
fn every_builtin_is_unitary() {
    for name in BUILTIN_DEVICES {
        let tc = TransferCheck::<f64>::build(&builtin_device(name).unwrap()).unwrap();
        assert!(tc.unitarity_defect() <= 1e-12, "{name}");
    }
}

#[test]
fn single_precision_pipeline() {
    let s = psi1::<f32>();
    let d = probabilities(&build_fig3_joint(JointPair::Z1X2X1Z2), &s).unwrap();
    assert!(d.probability_where(|l| equal_signs(l) == Some(true)) < 1e-6);
    let tc = TransferCheck::<f32>::build(&build_fig3_joint(JointPair::Z1X2X1Z2)).unwrap();
    assert!(tc.unitarity_defect() < 1e-5);
}
