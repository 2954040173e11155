use pmmlab::missingness::DEFAULT_THRESHOLD;
use pmmlab::{ampute, gen_bivariate_normal, make_stream, missing_fraction, Mechanism};
use proptest::prelude::*;
use statrs::function::erf::erf;

fn phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

#[test]
fn mar_missing_fraction_matches_normal_tail() {
    let d = gen_bivariate_normal(&mut make_stream(1, 0), 1_000_000, 0.8).unwrap();
    let out = ampute(&d, &Mechanism::default_mar(), &mut make_stream(1, 1)).unwrap();
    let frac = missing_fraction(&out);
    assert!((frac - phi(1.0)).abs() < 0.002, "{frac}");
}

#[test]
fn mcar_missing_fraction() {
    let d = gen_bivariate_normal(&mut make_stream(2, 0), 1_000_000, 0.8).unwrap();
    let out = ampute(&d, &Mechanism::default_mcar(), &mut make_stream(2, 1)).unwrap();
    assert!((missing_fraction(&out) - 0.84).abs() < 0.002);
}

#[test]
fn mcar_depends_on_stream() {
    let d = gen_bivariate_normal(&mut make_stream(3, 0), 500, 0.4).unwrap();
    let a = ampute(&d, &Mechanism::default_mcar(), &mut make_stream(3, 1)).unwrap();
    let b = ampute(&d, &Mechanism::default_mcar(), &mut make_stream(3, 1)).unwrap();
    let c = ampute(&d, &Mechanism::default_mcar(), &mut make_stream(3, 2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

proptest! {
    #[test]
    fn mar_mask_is_a_function_of_x(seed in any::<u64>(), n in 1usize..300, threshold in -2.0f64..2.0) {
        let d = gen_bivariate_normal(&mut make_stream(seed, 0), n, 0.8).unwrap();
        let mech = Mechanism::mar(threshold).unwrap();
        let out = ampute(&d, &mech, &mut make_stream(seed, 1)).unwrap();
        for i in 0..n {
            prop_assert_eq!(out.is_missing(i), d.x()[i] > threshold);
        }
    }

    #[test]
    fn ampute_preserves_x_and_observed_y(seed in any::<u64>(), n in 1usize..300, p in 0.0f64..=1.0, mar in any::<bool>()) {
        let d = gen_bivariate_normal(&mut make_stream(seed, 0), n, 0.5).unwrap();
        let mech = if mar { Mechanism::mar(DEFAULT_THRESHOLD).unwrap() } else { Mechanism::mcar(p).unwrap() };
        let out = ampute(&d, &mech, &mut make_stream(seed, 1)).unwrap();
        prop_assert_eq!(out.x(), d.x());
        for (a, b) in out.y().iter().zip(d.y()) {
            if let Some(v) = a {
                prop_assert_eq!(Some(*v), *b);
            }
        }
    }
}
