use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use pamcert::bloch::{depolarize, generators, inflate, state_from_bloch, BlochVector, HermitianOperator};

fn hermitian(d: usize, entries: &[f64]) -> HermitianOperator {
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    let mut k = 0;
    for i in 0..d {
        m[(i, i)] = Complex64::new(entries[k], 0.0);
        k += 1;
        for j in i + 1..d {
            let z = Complex64::new(entries[k], entries[k + 1]);
            k += 2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).unwrap()
}

fn operator() -> impl Strategy<Value = HermitianOperator> {
    (2usize..=4).prop_flat_map(|d| prop::collection::vec(-1.0f64..1.0, d * d).prop_map(move |e| hermitian(d, &e)))
}

fn pair() -> impl Strategy<Value = (HermitianOperator, HermitianOperator)> {
    (2usize..=4).prop_flat_map(|d| {
        (prop::collection::vec(-1.0f64..1.0, d * d), prop::collection::vec(-1.0f64..1.0, d * d))
            .prop_map(move |(a, b)| (hermitian(d, &a), hermitian(d, &b)))
    })
}

proptest! {
    #[test]
    fn expansion_reconstructs_operator(a in operator()) {
        let d = a.dim();
        let r = a.bloch_vector();
        let cd = ((d * (d - 1)) as f64 / 2.0).sqrt();
        let mut rebuilt = HermitianOperator::identity(d).scale(a.trace() / d as f64);
        for (g, ri) in generators(d).unwrap().iter().zip(&r.coords) {
            rebuilt = rebuilt.add(&g.scale(cd * ri / d as f64)).unwrap();
        }
        prop_assert!(rebuilt.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn trace_product_in_bloch_form((a, b) in pair()) {
        let d = a.dim() as f64;
        let expected = a.trace() * b.trace() / d + (d - 1.0) / d * a.bloch_vector().dot(&b.bloch_vector());
        prop_assert!((a.trace_product(&b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn channel_is_self_dual((a, b) in pair(), t in 0.01f64..=1.0) {
        let lhs = depolarize(&a, t).unwrap().trace_product(&b).unwrap();
        let rhs = a.trace_product(&depolarize(&b, t).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn inflate_inverts_depolarize(a in operator(), t in 0.01f64..=1.0) {
        prop_assert!(inflate(&depolarize(&a, t).unwrap(), t).unwrap().max_abs_diff(&a) < 1e-10);
        prop_assert!((depolarize(&a, t).unwrap().trace() - a.trace()).abs() < 1e-12);
    }

    #[test]
    fn qubit_states_are_physical(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let n = (x * x + y * y + z * z).sqrt().max(1.0);
        let rho = state_from_bloch(&BlochVector::qubit([x / n, y / n, z / n])).unwrap();
        prop_assert!(rho.min_eigenvalue() > -1e-12);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}
