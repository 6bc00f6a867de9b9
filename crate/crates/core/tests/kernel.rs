use ffrestrict::measures::{combined_measure, cube_set, random_set, spectral_report, uniform_measure, Measure};
use ffrestrict::stein_tomas::{convolution_inequality_probe, kernel_bounds, kernel_k};
use ffrestrict::{convolve, lq_norm, Exponent, Field, GridFn};

fn combined(p: u64, n: usize, seed: u64) -> Measure {
    let f = Field::new(p).unwrap();
    let a = cube_set(&f, n, 0.6 * n as f64, 0.4).unwrap();
    let e = random_set(&f, n, 0.6 * n as f64, seed).unwrap();
    combined_measure(&a, &e).unwrap()
}

#[test]
fn kernel_mirrors_the_spectrum() {
    for mu in [combined(211, 1, 1), combined(31, 2, 2)] {
        let k = kernel_k(&mu).unwrap();
        let hat = mu.fourier();
        assert!(k.values()[0].norm() <= 1e-12);
        let field = mu.field();
        for x in 1..mu.len() {
            let pt = field.index_to_point(x, mu.dim()).unwrap();
            let neg: Vec<i64> = pt.coords().iter().map(|&c| -(c as i64)).collect();
            let nx = field.point_to_index(&ffrestrict::Point::reduced(&neg, field)).unwrap();
            assert!((k.values()[x].norm() - hat.values()[nx].norm()).abs() <= 1e-12);
        }
    }
}

#[test]
fn one_to_infinity_endpoint_is_attained() {
    let mu = combined(401, 1, 6);
    let k = kernel_k(&mu).unwrap();
    let sup = k.max_abs();
    let delta = GridFn::delta(mu.field(), 1, 0).unwrap();
    let out = convolve(&delta, &k).unwrap();
    let lhs = lq_norm(&out, Exponent::Infinite).unwrap();
    assert!((lhs - sup).abs() <= 1e-12 * sup.max(1.0));

    let rep = spectral_report(&mu).unwrap();
    let probe = convolution_inequality_probe(&mu, &rep, 9.0, 30, 2).unwrap();
    assert!(probe.max_endpoint_ratio <= 1.0 + 1e-12);
    assert!(probe.c_two_empirical <= probe.c_two_endpoint * (1.0 + 1e-12));
    assert!(probe.max_ratio <= probe.ceiling * (1.0 + 1e-12));
}

#[test]
fn normalized_endpoints_are_at_most_one() {
    for (p, seed) in [(211u64, 1u64), (809, 2), (3001, 3)] {
        let mu = combined(p, 1, seed);
        let rep = spectral_report(&mu).unwrap();
        let kb = kernel_bounds(&mu, &rep).unwrap();
        assert!(kb.c_infty <= 1.0 + 1e-9, "p={p}: {}", kb.c_infty);
        assert!(kb.c_two <= 1.0 + 1e-9, "p={p}: {}", kb.c_two);
    }
    let uni = uniform_measure(&Field::new(13).unwrap(), 2).unwrap();
    let rep = spectral_report(&uni).unwrap();
    let kb = kernel_bounds(&uni, &rep).unwrap();
    assert!(kb.sup_k <= 1e-12);
    assert_eq!(kb.c_infty, 0.0);
    let probe = convolution_inequality_probe(&uni, &rep, 4.0, 5, 0).unwrap();
    assert!(probe.ratios.iter().all(|&r| r <= 1e-12));
}
