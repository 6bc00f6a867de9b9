use num_complex::Complex64;
use proptest::prelude::*;

use ffrestrict::fourier::{dft_with, TransformMethod};
use ffrestrict::{balanced_abs, index_to_point, point_to_index, Exponent, Field, GridFn, Point};

const SMALL_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 31, 101];

fn grid_strategy() -> impl Strategy<Value = GridFn> {
    (prop::sample::select(SMALL_PRIMES.to_vec()), 1usize..=3)
        .prop_filter("keep grids small", |(p, n)| p.pow(*n as u32) <= 4000)
        .prop_flat_map(|(p, n)| {
            let len = p.pow(n as u32) as usize;
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |vals| {
                let field = Field::new(p).unwrap();
                GridFn::from_values(&field, n, vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                    .unwrap()
            })
        })
}

fn sq_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(64)
    })]

    #[test]
    fn plancherel(f in grid_strategy()) {
        let len = f.len() as f64;
        let lhs = sq_norm(f.dft().values());
        let rhs = len * sq_norm(f.values());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
    }

    #[test]
    fn inverse_undoes_forward(f in grid_strategy()) {
        let len = f.len() as f64;
        let back = f.dft().idft();
        let scale = sq_norm(f.values()).sqrt() * len;
        let err: f64 = back.values().iter().zip(f.values()).map(|(b, a)| (b - a * len).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn sweep_matches_double_sum(f in grid_strategy()) {
        let oracle = dft_with(&f, TransformMethod::Naive);
        let scale = sq_norm(oracle.values()).sqrt().max(1e-300);
        for m in [TransformMethod::Direct, TransformMethod::Fft] {
            let got = dft_with(&f, m);
            let err: f64 = got.values().iter().zip(oracle.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * scale);
        }
    }

    #[test]
    fn index_round_trip(p in prop::sample::select(SMALL_PRIMES.to_vec()), n in 1usize..=4, seed in any::<u64>()) {
        let field = Field::new(p).unwrap();
        let len = field.grid_len(n);
        prop_assume!(len.is_ok());
        let len = len.unwrap();
        let idx = (seed % len as u64) as usize;
        let pt = index_to_point(idx, n, &field).unwrap();
        prop_assert_eq!(pt.dim(), n);
        prop_assert_eq!(point_to_index(&pt, &field).unwrap(), idx);
        let again = Point::new(pt.coords().to_vec(), &field).unwrap();
        prop_assert_eq!(again, pt);
    }

    #[test]
    fn balanced_abs_is_distance_to_zero(p in prop::sample::select(SMALL_PRIMES.to_vec()), v in any::<u64>()) {
        let v = v % p;
        let b = balanced_abs(v, p);
        prop_assert!(b <= p / 2);
        prop_assert_eq!(b, v.min(p - v));
        prop_assert_eq!(b, balanced_abs((p - v) % p, p));
    }

    #[test]
    fn exponent_duality(q in 1.001f64..1e6) {
        let e = Exponent::Finite(q);
        let d = e.dual();
        prop_assert!((e.reciprocal() + d.reciprocal() - 1.0).abs() <= 1e-12);
        match d.dual() {
            Exponent::Finite(back) => prop_assert!((back - q).abs() <= 1e-9 * q),
            Exponent::Infinite => prop_assert!(false, "dual of a finite exponent above 1 is finite"),
        }
        let text = e.to_string();
        let parsed: Exponent = text.parse().unwrap();
        prop_assert_eq!(parsed, e);
    }
}

#[test]
fn exponent_endpoints() {
    assert_eq!(Exponent::Finite(1.0).dual(), Exponent::Infinite);
    assert_eq!(Exponent::Infinite.dual(), Exponent::Finite(1.0));
    assert_eq!(Exponent::Infinite.reciprocal(), 0.0);
    assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
    assert!(Exponent::lebesgue(0.5).is_err());
}
