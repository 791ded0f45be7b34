//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits nonzero if any criterion fails.

use std::time::Instant;

use minsir::evt::{
    asymptotic_min_law, convergence_diagnostic, exact_min_cdf, weibull_min_cdf, ZGrid,
};
use minsir::fading::KappaMuShadowedParams;
use minsir::montecarlo::{simulate_min_sir, simulate_sir, EmpiricalCdf, McConfig};
use minsir::policy::{
    asymptotic_outage, db_to_linear, ergodic_multicast_rate, expected_direction, gamma0_from_rate,
    observation_monotonicity_check, observed_direction, solve_power_policy, MeanConvention, Parameter,
    PowerPolicyProblem, Quantity, RateProblem, Scenario,
};
use minsir::quad::integrate_to_infinity;
use minsir::sir::{sir_cdf, sir_cdf_inverse, sir_pdf, SirModel};
use minsir::special::TruncationControl;

type Outcome = (bool, String);

fn ctl() -> TruncationControl {
    TruncationControl::default()
}

fn link(kappa: f64, mu: f64, m: f64) -> KappaMuShadowedParams {
    KappaMuShadowedParams::unit(kappa, mu, m).unwrap()
}

fn reference_models() -> Vec<(&'static str, SirModel)> {
    vec![
        ("case 1", SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 2.0, 1.0); 3]).unwrap()),
        (
            "case 2",
            SirModel::new(link(2.0, 3.0, 1.0), vec![link(2.0, 2.0, 1.0), link(2.0, 1.0, 1.0)]).unwrap(),
        ),
        ("case 3", SirModel::single(link(2.0, 2.0, 1.0), link(2.0, 1.0, 1.0))),
    ]
}

/// 200 log-spaced points spanning the bulk of the law around its median.
fn bulk_grid(model: &SirModel) -> Vec<f64> {
    let med = sir_cdf_inverse(model, 0.5, &ctl()).unwrap();
    (1..=200).map(|i| med * 20f64.powf((i as f64 - 100.0) / 50.0)).collect()
}

/// Uniform grid on (0, 3·a].
fn min_grid(a: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| 3.0 * a * i as f64 / points as f64).collect()
}

fn closed_form_reductions() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (xs, xi) in [(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)] {
        let m = SirModel::single(
            KappaMuShadowedParams::rayleigh(xs).unwrap(),
            KappaMuShadowedParams::rayleigh(xi).unwrap(),
        );
        for z in [0.01, 0.1, 0.5, 1.0, 3.0, 20.0] {
            worst = worst.max((sir_cdf(&m, z, &ctl()).unwrap() - z * xi / (xs + z * xi)).abs());
        }
    }
    let unit = SirModel::single(
        KappaMuShadowedParams::rayleigh(1.0).unwrap(),
        KappaMuShadowedParams::rayleigh(1.0).unwrap(),
    );
    for k in [1usize, 2, 5, 20, 100] {
        for z in [0.001, 0.05, 0.1, 1.0] {
            let exact = 1.0 - (1.0f64 + z).powi(-(k as i32));
            worst = worst.max((exact_min_cdf(&unit, k, z, &ctl()).unwrap() - exact).abs());
        }
    }
    for k in [2usize, 5, 20, 100] {
        let a = asymptotic_min_law(&unit, k, &ctl()).unwrap().scale;
        worst = worst.max((a - 1.0 / (k as f64 - 1.0)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-10 && secs < 1.0, format!("max error {worst:.2e}, {secs:.3} s"))
}

fn oracle_equivalence() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (name, m)) in reference_models().into_iter().enumerate() {
        let seed = 100 + i as u64;
        let e = EmpiricalCdf::new(simulate_sir(&m, &McConfig::new(seed, 1_000_000)).unwrap()).unwrap();
        let d = e.sup_distance(&bulk_grid(&m), |z| sir_cdf(&m, z, &ctl())).unwrap();
        let a = asymptotic_min_law(&m, 20, &ctl()).unwrap().scale;
        let e20 = EmpiricalCdf::new(simulate_min_sir(&m, 20, &McConfig::new(seed + 50, 1_000_000)).unwrap()).unwrap();
        let d20 = e20.sup_distance(&min_grid(a, 200), |z| exact_min_cdf(&m, 20, z, &ctl())).unwrap();
        ok &= d < 0.005 && d20 < 0.005;
        parts.push(format!("{name}: F {d:.4}, K=20 {d20:.4}"));
    }
    (ok, parts.join("; "))
}

fn weibull_limit_at_twenty() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m) in reference_models() {
        let law = asymptotic_min_law(&m, 20, &ctl()).unwrap();
        let sup = min_grid(law.scale, 300)
            .into_iter()
            .map(|z| (exact_min_cdf(&m, 20, z, &ctl()).unwrap() - weibull_min_cdf(&law, z)).abs())
            .fold(0.0, f64::max);
        ok &= sup < 0.03;
        parts.push(format!("{name}: sup {sup:.4}"));
    }
    (ok, format!("{} (threshold 0.03)", parts.join("; ")))
}

fn convergence_rate() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for mu in [1.0, 2.0, 3.0] {
        let m = SirModel::single(link(2.0, mu, 1.0), link(2.0, 2.0, 1.0));
        let d = convergence_diagnostic(&m, &[5, 10, 20, 40, 80], &ZGrid::default(), &ctl()).unwrap();
        let decreasing = d.errors.windows(2).all(|w| w[1] < w[0]);
        let window = d.slope <= -0.2 && d.slope >= -1.2 && d.slope <= -1.0 / mu + 0.3;
        ok &= decreasing && window;
        parts.push(format!("mu={mu}: slope {:.3}, decreasing {decreasing}", d.slope));
    }
    (ok, parts.join("; "))
}

fn base_policy(p_primary_db: f64, p0: f64) -> PowerPolicyProblem {
    PowerPolicyProblem {
        p_primary: db_to_linear(p_primary_db),
        gamma0: gamma0_from_rate(0.03),
        p0,
        ps_max: db_to_linear(20.0),
        m_users: 10,
        primary_model: SirModel::single(link(3.0, 2.0, 1.0), link(2.0, 2.0, 1.0)),
    }
}

fn policy_correctness() -> Outcome {
    let trials = 100_000;
    let mut identity: f64 = 0.0;
    let mut worst_sigmas: f64 = 0.0;
    let mut points = 0;
    for p0 in [0.05, 0.1] {
        for pp_db in [0.0, 4.0, 8.0, 12.0, 16.0, 20.0] {
            let p = base_policy(pp_db, p0);
            let pol = solve_power_policy(&p, &ctl()).unwrap();
            if pol.ps_plus > p.ps_max {
                continue;
            }
            points += 1;
            identity = identity.max((asymptotic_outage(&p, pol.ps_plus, &ctl()).unwrap() - p0).abs());
            let sims = simulate_min_sir(&p.primary_model, p.m_users, &McConfig::new(500 + points, trials)).unwrap();
            let threshold = p.gamma0 * pol.ps_bar / p.p_primary;
            let outage = sims.iter().filter(|&&g| g <= threshold).count() as f64 / trials as f64;
            let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
            worst_sigmas = worst_sigmas.max((outage - p0).abs() / sigma);
        }
    }
    (
        identity <= 1e-10 && worst_sigmas <= 3.0,
        format!(
            "{points} uncapped points: identity error {identity:.1e}, worst simulated outage offset {worst_sigmas:.1} sigma (limit 3)"
        ),
    )
}

fn monotonicity_table() -> Outcome {
    let baseline = Scenario {
        policy: base_policy(14.0, 0.1),
        l_users: 10,
        secondary_model: SirModel::single(link(2.0, 2.0, 1.0), link(3.0, 3.0, 1.0)),
    };
    // every link with m > μ, for the other κ branch
    let shadowed = Scenario {
        policy: PowerPolicyProblem {
            primary_model: SirModel::single(link(3.0, 1.0, 10.0), link(2.0, 1.0, 2.0)),
            ..base_policy(14.0, 0.1)
        },
        l_users: 10,
        secondary_model: SirModel::single(link(2.0, 1.0, 3.0), link(3.0, 1.0, 2.0)),
    };
    let kappa = [Parameter::KappaP, Parameter::KappaPs, Parameter::KappaS, Parameter::KappaSp];
    let mut failures = Vec::new();
    let mut rows = 0;
    for q in [Quantity::SecondaryPower, Quantity::RatePerUser] {
        for p in Parameter::ALL {
            let bases: &[&Scenario] = if kappa.contains(&p) { &[&baseline, &shadowed] } else { &[&baseline] };
            for base in bases {
                let want = expected_direction(base, p, q).expect("m differs from mu on both bases");
                rows += 1;
                let conv = MeanConvention::default();
                if !observation_monotonicity_check(base, p, q, want, conv, &ctl()).unwrap() {
                    let got = observed_direction(base, p, q, conv, &ctl()).unwrap();
                    failures.push(format!("{p:?} -> {q:?}: expected {want:?}, observed {got:?}"));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{rows} rows checked")
    } else {
        format!("{} of {rows} rows disagree: {}", failures.len(), failures.join("; "))
    };
    (failures.is_empty(), detail)
}

fn multicast_rate() -> Outcome {
    let policy = PowerPolicyProblem {
        primary_model: SirModel::single(link(2.0, 3.0, 1.0), link(2.0, 2.0, 1.0)),
        ..base_policy(14.0, 0.1)
    };
    let ps = solve_power_policy(&policy, &ctl()).unwrap().ps_bar;
    let gap = |l: usize| {
        let r = RateProblem {
            l_users: l,
            p_secondary: ps,
            p_primary: policy.p_primary,
            secondary_model: SirModel::single(link(2.0, 2.0, 1.0), link(3.0, 3.0, 1.0)),
        };
        let quad = ergodic_multicast_rate(&r, &ctl()).unwrap() / l as f64;
        let sims = EmpiricalCdf::new(simulate_min_sir(&r.secondary_model, l, &McConfig::new(700 + l as u64, 1_000_000)).unwrap()).unwrap();
        let c = ps / policy.p_primary;
        let mc = sims.mean_of(|x| (c * x).ln_1p() / std::f64::consts::LN_2);
        (quad - mc).abs()
    };
    let (g10, g20, g40) = (gap(10), gap(20), gap(40));
    (
        g20 < 0.05 && g40 < g10,
        format!("gap L=10 {g10:.4}, L=20 {g20:.4}, L=40 {g40:.4}"),
    )
}

fn numerical_hygiene() -> Outcome {
    let h = 1e-4;
    let mut worst_fd: f64 = 0.0;
    for (_, m) in reference_models() {
        for z in [0.3, 0.8, 2.0] {
            let fd = (sir_cdf(&m, z + h, &ctl()).unwrap() - sir_cdf(&m, z - h, &ctl()).unwrap()) / (2.0 * h);
            let f = sir_pdf(&m, z, &ctl()).unwrap();
            worst_fd = worst_fd.max((fd - f).abs() / f);
        }
    }
    let mut worst_norm: f64 = 0.0;
    for (_, m) in reference_models() {
        let r = integrate_to_infinity(|z| sir_pdf(&m, z, &ctl()).unwrap_or(0.0), 0.0, 1e-10, 1e-10, 4000).unwrap();
        worst_norm = worst_norm.max((r.value - 1.0).abs());
    }
    let signal = link(2.0, 3.0, 1.0);
    let ints = [link(2.0, 2.0, 1.0), link(2.0, 1.0, 1.0), link(1.0, 1.5, 4.0)];
    let orders = [[0, 1, 2], [2, 1, 0], [1, 2, 0]];
    let mut worst_perm: f64 = 0.0;
    for z in [0.05, 0.3, 1.0, 3.0] {
        let vals: Vec<f64> = orders
            .iter()
            .map(|o| {
                let m = SirModel::new(signal, o.iter().map(|&i| ints[i]).collect()).unwrap();
                sir_cdf(&m, z, &ctl()).unwrap()
            })
            .collect();
        for v in &vals {
            worst_perm = worst_perm.max((v - vals[0]).abs());
        }
    }
    let m = &reference_models()[0].1;
    let runs: Vec<Vec<f64>> = [1, 3, 8, 64]
        .iter()
        .map(|&c| simulate_min_sir(m, 4, &McConfig::new(9, 50_000).with_chunks(c)).unwrap())
        .collect();
    let deterministic = runs.iter().all(|r| r.iter().zip(&runs[0]).all(|(a, b)| a.to_bits() == b.to_bits()));
    (
        worst_fd < 1e-3 && worst_norm < 1e-6 && worst_perm < 1e-8 && deterministic,
        format!(
            "difference quotient {worst_fd:.1e}, normalization {worst_norm:.1e}, permutation {worst_perm:.1e}, bit-identical chunks {deterministic}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form reductions", closed_form_reductions),
        ("Monte Carlo oracle equivalence", oracle_equivalence),
        ("Weibull limit at K = 20", weibull_limit_at_twenty),
        ("convergence-rate diagnostic", convergence_rate),
        ("power policy correctness", policy_correctness),
        ("monotonicity table", monotonicity_table),
        ("multicast rate at desk scale", multicast_rate),
        ("numerical hygiene", numerical_hygiene),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += usize::from(!ok);
        println!(
            "[{}] criterion {}: {name}: {detail} ({:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
