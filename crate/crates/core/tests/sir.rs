use minsir::error::Error;
use minsir::fading::KappaMuShadowedParams;
use minsir::montecarlo::{simulate_sir, McConfig};
use minsir::quad::integrate_to_infinity;
use minsir::sir::{
    gamma_moment_match, sir_cdf, sir_cdf_betaprime, sir_cdf_direct, sir_cdf_inverse, sir_cdf_via_ccdf,
    sir_pdf, Reference, SirModel,
};
use minsir::special::TruncationControl;
use proptest::prelude::*;

fn ctl() -> TruncationControl {
    TruncationControl::default()
}

fn link(kappa: f64, mu: f64, m: f64) -> KappaMuShadowedParams {
    KappaMuShadowedParams::unit(kappa, mu, m).unwrap()
}

fn case1() -> SirModel {
    SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 2.0, 1.0); 3]).unwrap()
}

fn case2() -> SirModel {
    SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 2.0, 1.0), link(2.0, 1.0, 1.0)]).unwrap()
}

fn case3() -> SirModel {
    SirModel::single(link(2.0, 2.0, 1.0), link(2.0, 1.0, 1.0))
}

#[test]
fn zero_maps_to_zero() {
    for m in [case1(), case2(), case3()] {
        assert_eq!(sir_cdf(&m, 0.0, &ctl()).unwrap(), 0.0);
    }
}

#[test]
fn rayleigh_ratio_with_unequal_means() {
    let model = SirModel::single(
        KappaMuShadowedParams::rayleigh(2.0).unwrap(),
        KappaMuShadowedParams::rayleigh(0.5).unwrap(),
    );
    for z in [0.1, 1.0, 7.5] {
        let exact = z * 0.5 / (2.0 + z * 0.5);
        assert!((sir_cdf(&model, z, &ctl()).unwrap() - exact).abs() < 1e-12);
    }
}

#[test]
fn density_of_case3_normalizes() {
    let m = case3();
    let r = integrate_to_infinity(|z| sir_pdf(&m, z, &ctl()).unwrap_or(0.0), 0.0, 1e-10, 1e-10, 4000)
        .unwrap();
    assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
}

#[test]
fn density_is_derivative_of_cdf() {
    let h = 1e-4;
    for m in [case1(), case2(), case3()] {
        let fd = (sir_cdf(&m, 0.8 + h, &ctl()).unwrap() - sir_cdf(&m, 0.8 - h, &ctl()).unwrap()) / (2.0 * h);
        let f = sir_pdf(&m, 0.8, &ctl()).unwrap();
        assert!((fd - f).abs() < 1e-3 * f, "{fd} vs {f}");
    }
}

#[test]
fn both_series_forms_agree() {
    for m in [case1(), case2(), case3()] {
        for z in [0.05, 0.2, 0.5, 1.0, 2.0] {
            let a = sir_cdf_direct(&m, z, Reference::Canonical, &ctl()).unwrap();
            let b = sir_cdf_via_ccdf(&m, z, Reference::Canonical, &ctl()).unwrap();
            assert!((a - b).abs() < 1e-8, "z={z}: {a} vs {b}");
        }
    }
}

#[test]
fn first_interferer_reference() {
    // with interferer 1 carrying the larger θ the classical form has negative
    // y-variables; it still converges while θ ratios stay below 2
    let m = SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 1.5, 1.0), link(2.0, 2.0, 1.0)]).unwrap();
    for z in [0.1, 0.5, 1.0] {
        let a = sir_cdf_direct(&m, z, Reference::Interferer(0), &ctl()).unwrap();
        let b = sir_cdf(&m, z, &ctl()).unwrap();
        assert!((a - b).abs() < 1e-9, "z={z}: {a} vs {b}");
    }
    // a θ ratio of 2 puts the classical form on the edge of its region
    let edge = SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 1.0, 1.0), link(2.0, 2.0, 1.0)]).unwrap();
    assert!(matches!(
        sir_cdf_direct(&edge, 0.1, Reference::Interferer(0), &ctl()),
        Err(Error::OutOfConvergenceRegion { .. })
    ));
    assert!(sir_cdf_direct(&m, 1.0, Reference::Interferer(2), &ctl()).is_err());
}

#[test]
fn interferer_order_does_not_matter() {
    let a = case2();
    let b = SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 1.0, 1.0), link(2.0, 2.0, 1.0)]).unwrap();
    for z in [0.05, 0.3, 1.0, 3.0] {
        let (fa, fb) = (sir_cdf(&a, z, &ctl()).unwrap(), sir_cdf(&b, z, &ctl()).unwrap());
        assert!((fa - fb).abs() < 1e-8);
    }
}

#[test]
fn inverse_round_trips() {
    for m in [case2(), case3()] {
        for z in [0.05, 0.5, 2.0] {
            let p = sir_cdf(&m, z, &ctl()).unwrap();
            let back = sir_cdf_inverse(&m, p, &ctl()).unwrap();
            assert!((back - z).abs() < 1e-8 * z, "z={z}: {back}");
        }
    }
}

#[test]
fn lower_quantile_matches_order_statistics() {
    let m = case2();
    let q = sir_cdf_inverse(&m, 0.05, &ctl()).unwrap();
    let n = 10_000_000usize;
    let mut s = simulate_sir(&m, &McConfig::new(17, n)).unwrap();
    s.sort_by(f64::total_cmp);
    // distribution-free 99% interval for the 5% quantile from binomial order statistics
    let half = 2.576 * (n as f64 * 0.05 * 0.95).sqrt();
    let lo = s[(n as f64 * 0.05 - half).floor() as usize];
    let hi = s[(n as f64 * 0.05 + half).ceil() as usize];
    assert!(lo <= q && q <= hi, "{q} not in [{lo}, {hi}]");
}

#[test]
fn moment_matched_shapes() {
    let g = gamma_moment_match(&KappaMuShadowedParams::unit(0.0, 2.0, 5.0).unwrap());
    assert_eq!(g.shape, 2.0);
    let h = |k: f64| gamma_moment_match(&KappaMuShadowedParams::unit(k, 2.0, 3.0).unwrap()).shape;
    assert!(h(1.0 + 1e-6) > h(1.0));
    let h = |k: f64| gamma_moment_match(&KappaMuShadowedParams::unit(k, 3.0, 1.0).unwrap()).shape;
    assert!(h(1.0 + 1e-6) < h(1.0));
}

#[test]
fn beta_prime_approximation() {
    let sig = gamma_moment_match(&link(3.0, 2.0, 1.0));
    let int = gamma_moment_match(&link(2.0, 2.0, 1.0));
    assert_eq!(sir_cdf_betaprime(&sig, &int, 0.0).unwrap(), 0.0);
    let exact = sir_cdf(&SirModel::single(link(3.0, 2.0, 1.0), link(2.0, 2.0, 1.0)), 1.0, &ctl()).unwrap();
    let approx = sir_cdf_betaprime(&sig, &int, 1.0).unwrap();
    assert!((exact - approx).abs() < 0.03, "{exact} vs {approx}");
}

#[test]
fn beta_prime_is_exact_for_exponential_links() {
    let s = KappaMuShadowedParams::rayleigh(1.7).unwrap();
    let i = KappaMuShadowedParams::rayleigh(0.4).unwrap();
    let m = SirModel::single(s, i);
    for z in [0.1, 1.0, 4.0] {
        let bp = sir_cdf_betaprime(&gamma_moment_match(&s), &gamma_moment_match(&i), z).unwrap();
        assert!((bp - sir_cdf(&m, z, &ctl()).unwrap()).abs() < 1e-12);
    }
}

fn arb_link() -> impl Strategy<Value = KappaMuShadowedParams> {
    (0.0f64..4.0, 0.5f64..3.0, 0.5f64..4.0, 0.5f64..2.0)
        .prop_map(|(k, mu, m, x)| KappaMuShadowedParams::new(k, mu, m, x).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cdf_is_a_distribution_function(
        signal in arb_link(),
        interferers in proptest::collection::vec(arb_link(), 1..3),
    ) {
        let m = SirModel::new(signal, interferers).unwrap();
        let mut last = 0.0;
        for i in 0..25 {
            let z = 10f64.powf(-2.0 + i as f64 * 0.15);
            let f = sir_cdf(&m, z, &ctl()).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= last - 1e-10, "z={z}: {f} < {last}");
            last = f;
        }
    }

    #[test]
    fn permutation_invariance(
        signal in arb_link(),
        a in arb_link(),
        b in arb_link(),
        z in 0.05f64..5.0,
    ) {
        let m1 = SirModel::new(signal, vec![a, b]).unwrap();
        let m2 = SirModel::new(signal, vec![b, a]).unwrap();
        let (f1, f2) = (sir_cdf(&m1, z, &ctl()).unwrap(), sir_cdf(&m2, z, &ctl()).unwrap());
        prop_assert!((f1 - f2).abs() < 1e-8, "{f1} vs {f2}");
    }
}
