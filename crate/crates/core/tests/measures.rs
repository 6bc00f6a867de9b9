use ffrestrict::measures::{
    bohr_box, bohr_set, combined_measure, cube_set, paraboloid_set, random_set, spectral_report, uniform_measure,
    MeasureKind, PointSet, SetMeta,
};
use ffrestrict::{Exponent, Field};

#[test]
fn random_set_sizes_concentrate() {
    let field = Field::new(101).unwrap();
    let delta = 101f64.powf(0.6 - 1.0);
    let sizes: Vec<usize> = (0..100).map(|s| random_set(&field, 1, 0.6, s).unwrap().len()).collect();
    assert!(sizes.iter().all(|&k| (4..=64).contains(&k)), "{sizes:?}");
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    let expect = 101.0 * delta;
    // standard error of the mean over 100 binomial draws
    let se = (101.0 * delta * (1.0 - delta) / 100.0).sqrt();
    assert!((mean - expect).abs() <= 4.0 * se, "mean {mean} vs {expect}");
}

#[test]
fn random_set_inclusion_rate_per_point_is_uniform() {
    let field = Field::new(31).unwrap();
    let delta = 31f64.powf(0.7 - 1.0);
    let trials = 400u64;
    let mut hits = vec![0u32; 31];
    for s in 0..trials {
        for &x in random_set(&field, 1, 0.7, 1000 + s).unwrap().members() {
            hits[x] += 1;
        }
    }
    let sd = (trials as f64 * delta * (1.0 - delta)).sqrt();
    for (x, &h) in hits.iter().enumerate() {
        assert!((h as f64 - trials as f64 * delta).abs() <= 5.0 * sd, "point {x}: {h}");
    }
}

#[test]
fn random_set_is_reproducible() {
    let field = Field::new(61).unwrap();
    let a = random_set(&field, 2, 1.1, 99).unwrap();
    let b = random_set(&field, 2, 1.1, 99).unwrap();
    assert_eq!(a.members(), b.members());
    let mut text = Vec::new();
    a.write_text(&mut text).unwrap();
    let back = PointSet::read_text(text.as_slice()).unwrap();
    assert_eq!(back.members(), a.members());
}

#[test]
fn combined_measure_weights() {
    let field = Field::new(101).unwrap();
    let a = cube_set(&field, 1, 0.6, 0.4).unwrap();
    let e = random_set(&field, 1, 0.6, 7).unwrap();
    let mu = combined_measure(&a, &e).unwrap();
    let total = (a.len() + e.len()) as f64;
    assert!(mu.is_probability());
    assert_eq!(mu.meta().kind, MeasureKind::Combined);
    let overlap = a.intersection_size(&e).unwrap();
    assert_eq!(mu.meta().overlap, Some(overlap));
    assert_eq!(mu.support_size(), a.len() + e.len() - overlap);
    assert!(mu.max_weight() <= 2.0 / total + 1e-15);
    for &w in mu.weights() {
        assert!([0.0, 1.0 / total, 2.0 / total].iter().any(|t| (w - t).abs() < 1e-15));
    }
}

#[test]
fn cube_sides() {
    let f101 = Field::new(101).unwrap();
    let a = cube_set(&f101, 1, 0.6, 0.4).unwrap();
    let SetMeta::Cube { side, .. } = *a.meta() else { panic!() };
    // 101^{0.4} ≈ 6.34
    assert_eq!(side, 6);
    assert_eq!(a.members(), &[1, 2, 3, 4, 5, 6]);
    let f13 = Field::new(13).unwrap();
    assert_eq!(cube_set(&f13, 2, 1.0, 1.0).unwrap().len(), 4);
}

#[test]
fn bohr_set_extremes() {
    let f = Field::new(7).unwrap();
    let whole = PointSet::whole_space(&f, 2).unwrap();
    assert_eq!(bohr_set(&whole, 0.1).unwrap().members(), &[0]);
    let single = PointSet::new(&f, 2, [0]).unwrap();
    assert_eq!(bohr_set(&single, 0.1).unwrap().len(), 49);

    let f101 = Field::new(101).unwrap();
    let a = cube_set(&f101, 1, 0.6, 0.4).unwrap();
    let star = bohr_set(&a, 0.1).unwrap();
    for xi in [100usize, 0, 1] {
        assert!(star.contains(xi));
    }
    let bx = bohr_box(&f101, 1, 6).unwrap();
    assert_eq!(bx.members(), &[0, 1, 100]);
}

#[test]
fn flat_spectra_report_infinite_decay() {
    let f = Field::new(11).unwrap();
    let rep = spectral_report(&uniform_measure(&f, 2).unwrap()).unwrap();
    assert_eq!(rep.beta_eff, Exponent::Infinite);
    assert!((rep.alpha_eff - 2.0).abs() < 1e-12);

    let par = ffrestrict::measures::indicator_measure(&paraboloid_set(&f, 3).unwrap()).unwrap();
    let rep = spectral_report(&par).unwrap();
    // |μ̂(ξ)| = p^{(n-1)/2} / p^{n-1} off zero, so β = n - 1
    match rep.beta_eff {
        Exponent::Finite(b) => assert!((b - 2.0).abs() < 1e-9, "{b}"),
        Exponent::Infinite => panic!("paraboloid spectrum is not flat"),
    }
    assert!((rep.alpha_eff - 2.0).abs() < 1e-12);
}
