//! Property tests over the module invariants.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use supertube::bogoliubov::{drift_term, spectrum_beta};
use supertube::geometry::{dot, wavevector, LatticeVector, PhysicalParams};
use supertube::pairseries::{phi_limit, root_identity_residual};
use supertube::potential::{FourierTable, PotentialSpec};
use supertube::variational::{build_block_limit, eigen_block, MatrixVariant};

fn params() -> PhysicalParams {
    PhysicalParams::new(1.0, 1.0, 10.0, 1.0, 1).unwrap()
}

fn limit_table(v0: f64, p: PhysicalParams) -> FourierTable {
    let a = 0.25 * p.l1.min(p.l2);
    let amp = v0 * p.volume() / (4.0 / 3.0 * PI * a * a * a);
    FourierTable::limit(PotentialSpec::tophat(amp, a).unwrap(), p).unwrap()
}

fn lattice(max: i32) -> impl Strategy<Value = LatticeVector> {
    (-max..=max, -max..=max, -max..=max).prop_map(|(a, b, c)| LatticeVector::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wavevector_additive(a in lattice(20), b in lattice(20)) {
        let p = params();
        let ka = wavevector(a, &p);
        let kb = wavevector(b, &p);
        let kab = wavevector(a + b, &p);
        for i in 0..3 {
            prop_assert!((kab[i] - (ka[i] + kb[i])).abs() <= 1e-12 * (1.0 + ka[i].abs() + kb[i].abs()));
        }
    }

    #[test]
    fn transverse_longitudinal_orthogonal(n2 in -20i32..=20, n3 in -20i32..=20, n1 in -20i32..=20) {
        let p = params();
        let t = wavevector(LatticeVector::transverse(n2, n3), &p);
        let l = wavevector(LatticeVector::longitudinal(n1), &p);
        prop_assert_eq!(dot(t, l), 0.0);
    }

    #[test]
    fn dispersion_even_and_drift_antisymmetric(
        l in lattice(5),
        p_mode in -3i32..=3,
        v0 in 0.05f64..2.0,
    ) {
        prop_assume!(!l.is_zero());
        let pr = params();
        let table = limit_table(v0, pr);
        let p = LatticeVector::longitudinal(p_mode);
        let b0p = spectrum_beta(LatticeVector::ZERO, l, &table).unwrap();
        let b0m = spectrum_beta(LatticeVector::ZERO, -l, &table).unwrap();
        prop_assert_eq!(b0p, b0m);
        let bp = spectrum_beta(p, l, &table).unwrap();
        let bm = spectrum_beta(p, -l, &table).unwrap();
        prop_assert!(((bp + bm) - 2.0 * b0p).abs() <= 1e-11 * (1.0 + b0p.abs()));
        // ε(λ) >= 0, zero only at λ = 0
        prop_assert!(b0p + drift_term(LatticeVector::ZERO, l, &pr) >= 0.0);
        prop_assert!(b0p > 0.0);
    }

    #[test]
    fn phi_root_identity_and_bound(
        k2n in (-4i32..=4, -4i32..=4),
        l in lattice(6),
        v0 in 0.05f64..3.0,
    ) {
        let p = params();
        let k2 = LatticeVector::transverse(k2n.0, k2n.1);
        let phi = phi_limit(k2, l, v0, &p);
        prop_assert!(root_identity_residual(k2, l, v0, &p, phi.value) <= 1e-11);
        prop_assert!(phi.value.norm() <= 0.5 + 1e-12);
        // evenness in l
        let phi_neg = phi_limit(k2, -l, v0, &p);
        prop_assert_eq!(phi.value, phi_neg.value);
    }

    #[test]
    fn block_eigenvalues_pair_up(
        k1m in -2i32..=2,
        k2n in (-2i32..=2, -2i32..=2),
        l in lattice(3),
        v0 in 0.1f64..1.5,
    ) {
        let p = params();
        let k2 = LatticeVector::transverse(k2n.0, k2n.1);
        prop_assume!(l != -k2);
        let block = build_block_limit(
            LatticeVector::longitudinal(k1m), k2, l, v0, &p, MatrixVariant::Corrected,
        ).unwrap();
        let branches = eigen_block(&block, &p).unwrap();
        let sum: Complex64 = branches.iter().map(|b| b.lambda_tilde).sum();
        let scale = branches.iter().map(|b| b.lambda_tilde.norm()).fold(1.0, f64::max);
        prop_assert!(sum.norm() <= 1e-9 * scale);
        prop_assert_eq!(block.m.trace(), Complex64::new(0.0, 0.0));
    }
}
