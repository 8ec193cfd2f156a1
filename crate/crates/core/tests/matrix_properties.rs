use chancoh::harness::random_channel;
use chancoh::matrix::{dephase, hermitian_eigenvalues, kron, partial_trace_b, trace_norm, von_neumann_entropy};
use chancoh::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

fn complex_entries(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im)), n)
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_entries(n * n).prop_map(move |v| {
        let m = ComplexMatrix::new(n, n, v).unwrap();
        m.add(&m.adjoint()).scale(0.5)
    })
}

fn density(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_entries(n * n).prop_map(move |v| {
        let g = ComplexMatrix::new(n, n, v).unwrap();
        let p = g.matmul(&g.adjoint());
        let t = p.trace().re;
        p.scale(1.0 / t)
    })
}

fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
    random_channel(n, n, 1, seed).unwrap().kraus()[0].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_norm_is_the_sum_of_singular_values(n in 1usize..6, m in hermitian(5)) {
        let m = m.block(0, 0, n, n);
        let svd: f64 = to_nalgebra(&m).svd(false, false).singular_values.iter().sum();
        prop_assert!((trace_norm(&m).unwrap() - svd).abs() < 1e-9);
    }

    #[test]
    fn eigenvalues_match_nalgebra(m in hermitian(4)) {
        let mut ours = hermitian_eigenvalues(&m);
        let mut theirs: Vec<f64> = to_nalgebra(&m).symmetric_eigenvalues().iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(m in hermitian(4), seed in any::<u64>()) {
        let u = haar_unitary(4, seed);
        let rotated = u.sandwich(&m);
        prop_assert!((trace_norm(&rotated).unwrap() - trace_norm(&m).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn dephasing_never_lowers_entropy(rho in density(4)) {
        let before = von_neumann_entropy(&rho).unwrap();
        let after = von_neumann_entropy(&dephase(&rho)).unwrap();
        prop_assert!(after >= before - 1e-9);
    }

    #[test]
    fn partial_trace_of_a_product(a in hermitian(2), b in hermitian(3)) {
        let reduced = partial_trace_b(&kron(&a, &b), 2, 3).unwrap();
        prop_assert!(reduced.max_abs_diff(&a.scale_complex(b.trace())) < 1e-10);
    }

    #[test]
    fn kron_mixed_product(a in hermitian(2), b in hermitian(2), c in hermitian(2), d in hermitian(2)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}

#[test]
fn trace_norm_of_a_fixed_indefinite_matrix() {
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -2.0]]).unwrap();
    // eigenvalues 2 and -3
    assert!((trace_norm(&m).unwrap() - 5.0).abs() < 1e-12);
}
