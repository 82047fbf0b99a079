//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test` as a harness-less target.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gchan_core::fockoracle::{self as fock, FockOperator};
use gchan_core::interpbound::{self, MapFamily, SuiteConfig};
use gchan_core::matcore::c;
use gchan_core::{sampling, thermal, ChannelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Ratio `||Phi(omega_E)||_p / ||omega_E||_p` computed entirely in the Fock basis.
fn oracle_ratio(k2: f64, mu: f64, e: f64, p: f64) -> f64 {
    let n = fock::thermal_cutoff(e);
    let ch = fock::single_mode_channel(k2, mu, n).unwrap();
    let rho = fock::thermal_matrix(e, n);
    let out = fock::apply_channel(&ch, &rho).unwrap();
    fock::schatten_norm_numeric(&out, p) / fock::schatten_norm_numeric(&rho, p)
}

fn attenuator() -> Outcome {
    let params = ChannelParams::single_mode(c(0.8), 0.18);
    let norm = params.schatten_norm_analytic(2.0).unwrap().to_f64();
    let ratio = thermal::norm_ratio(&params, 1e4, 2.0).unwrap();
    let oracle = oracle_ratio(0.64, 0.18, 100.0, 2.0);
    let target = (201.0_f64 / 129.0).sqrt();
    let pass = (norm - 1.25).abs() < 1e-12 && rel(ratio, 1.25) <= 2e-4 && (oracle - target).abs() <= 1e-6;
    check(
        pass,
        format!(
            "norm {norm:.15}, ratio(E=1e4) rel err {:.2e}, oracle(E=100) - sqrt(201/129) = {:.2e}",
            rel(ratio, 1.25),
            oracle - target
        ),
    )
}

fn amplifier() -> Outcome {
    let params = ChannelParams::single_mode(c(2f64.sqrt()), 0.5);
    let mut pass = true;
    let mut worst_extrap = 0.0_f64;
    let mut worst_oracle = f64::NEG_INFINITY;
    for p in [1.5, 2.0, 3.0] {
        let norm = params.schatten_norm_analytic(p).unwrap().to_f64();
        let expected = 2f64.powf(-(1.0 - 1.0 / p));
        pass &= (norm - expected).abs() < 1e-12;
        // the ratio approaches its limit like 1/E; Richardson removes that term
        let e = 1e5;
        let r1 = thermal::norm_ratio(&params, e, p).unwrap();
        let r2 = thermal::norm_ratio(&params, 2.0 * e, p).unwrap();
        let extrapolated = 2.0 * r2 - r1;
        worst_extrap = worst_extrap.max(rel(extrapolated, norm));

        let n = fock::thermal_cutoff(1.0);
        let ch = fock::single_mode_channel(2.0, 0.5, n).unwrap();
        let rho = fock::thermal_matrix(1.0, n);
        let out = fock::apply_channel(&ch, &rho).unwrap();
        let eps = ch.tail_bound();
        let numeric = fock::schatten_norm_numeric(&out, p);
        let analytic = thermal::output_schatten_norm(&params, 1.0, p).unwrap();
        // allowance: amplifier tail plus a few ulps of rounding
        worst_oracle = worst_oracle.max((numeric - analytic).abs() - (eps + 1e-14));
    }
    pass &= worst_extrap <= 1e-3 && worst_oracle <= 0.0;
    check(
        pass,
        format!(
            "norm 2^(-1/p') for p in {{1.5,2,3}}, extrapolation rel err {worst_extrap:.2e}, \
             oracle excess over eps {worst_oracle:.2e}"
        ),
    )
}

fn multiplicativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_analytic = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    for _ in 0..20 {
        let (k2a, mua) = sampling::random_single_mode(&mut rng, (0.1, 4.0), 0.5);
        let (k2b, mub) = sampling::random_single_mode(&mut rng, (0.1, 4.0), 0.5);
        let a = ChannelParams::single_mode(c(k2a.sqrt()), mua);
        let b = ChannelParams::single_mode(c(k2b.sqrt()), mub);
        let ab = a.tensor(&b);
        for p in [1.5, 2.0, 3.0] {
            let joint = ab.schatten_norm_analytic(p).unwrap().to_f64();
            let product =
                a.schatten_norm_analytic(p).unwrap().to_f64() * b.schatten_norm_analytic(p).unwrap().to_f64();
            worst_analytic = worst_analytic.max(rel(joint, product));
        }

        let n = fock::thermal_cutoff(1.0);
        let cha = fock::single_mode_channel(k2a, mua, n).unwrap();
        let chb = fock::single_mode_channel(k2b, mub, n).unwrap();
        let chab = fock::tensor_channel(&cha, &chb);
        let rho = fock::thermal_matrix(1.0, n);
        let rho2 = fock::thermal_product(&[1.0, 1.0], &[n, n]).unwrap();
        let out_a = fock::apply_channel(&cha, &rho).unwrap();
        let out_b = fock::apply_channel(&chb, &rho).unwrap();
        let out_ab = fock::apply_channel(&chab, &rho2).unwrap();
        let p = 2.0;
        let in1 = fock::schatten_norm_numeric(&rho, p);
        let joint = fock::schatten_norm_numeric(&out_ab, p) / fock::schatten_norm_numeric(&rho2, p);
        let product =
            fock::schatten_norm_numeric(&out_a, p) / in1 * (fock::schatten_norm_numeric(&out_b, p) / in1);
        worst_oracle = worst_oracle.max((joint - product).abs());
    }
    check(
        worst_analytic <= 1e-12 && worst_oracle <= 1e-8,
        format!("20 pairs: analytic rel err {worst_analytic:.2e}, oracle factorization err {worst_oracle:.2e}"),
    )
}

fn entropy_gain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let levels = 12;
    let states: Vec<FockOperator> = (0..100)
        .map(|_| FockOperator::dense(vec![levels], sampling::random_density(&mut rng, levels)).unwrap())
        .collect();
    let entropies: Vec<f64> = states.iter().map(|s| fock::entropy_numeric(s).unwrap()).collect();
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_limit = 0.0_f64;
    for _ in 0..10 {
        let (k2, mu) = sampling::random_single_mode(&mut rng, (0.1, 4.0), 0.5);
        let ch = fock::single_mode_channel(k2, mu, levels).unwrap();
        let bound = k2.ln();
        for (rho, s_in) in states.iter().zip(&entropies) {
            let out = fock::apply_channel(&ch, rho).unwrap();
            let gain = fock::entropy_numeric(&out).unwrap() - s_in;
            worst_margin = worst_margin.min(gain - bound);
            if gain < bound - 1e-4 {
                violations += 1;
            }
        }
        let params = ChannelParams::single_mode(c(k2.sqrt()), mu);
        let limit = thermal::entropy_gain(&params, 1e4).unwrap();
        worst_limit = worst_limit.max((limit - bound).abs());
    }
    check(
        violations == 0 && worst_limit <= 1e-3,
        format!(
            "1000 state/channel pairs: {violations} violations, min margin {worst_margin:.3e}; \
             |gain(1e4) - ln K^2| max {worst_limit:.2e}"
        ),
    )
}

fn phi_of_identity() -> Outcome {
    let mut worst = 0.0_f64;
    for eta in [0.5, 0.64] {
        let diag = fock::phi_of_identity_diag(eta, 400).unwrap();
        for &d in &diag[..=100] {
            worst = worst.max((d - 1.0 / eta).abs());
        }
    }
    check(worst <= 1e-6, format!("max |Phi(I)_mm - 1/eta| for m <= 100: {worst:.2e}"))
}

fn interpolation_suite() -> Outcome {
    let mut total = 0;
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for (family, seed) in [(MapFamily::Cp, 1), (MapFamily::CoPositive, 2)] {
        let config = SuiteConfig {
            seed,
            d_max: 8,
            n_maps: 500,
            p_grid: vec![1.1, 1.5, 2.0, 3.0, 10.0, 1000.0],
            family,
            ..SuiteConfig::default()
        };
        let report = interpbound::run_suite(&config).unwrap();
        total += report.maps.len();
        violations += report.violation_count;
        min_slack = min_slack.min(report.min_slack);
    }
    check(
        violations == 0 && total == 1000,
        format!("{total} maps x 6 exponents: {violations} violations, min slack {min_slack:.2e}"),
    )
}

fn divergence_slope() -> Outcome {
    let grid = [1e2, 1e3, 1e4];
    let mut worst = 0.0_f64;
    let mut slopes = Vec::new();
    for params in [ChannelParams::identity(1), ChannelParams::single_mode(c(0.8), 0.18)] {
        let ys: Vec<f64> = grid
            .iter()
            .map(|&e| thermal::cross_norm_ratio(&params, e, 2.0, 1.0).unwrap())
            .collect();
        let slope = thermal::loglog_slope(&grid, &ys).unwrap();
        worst = worst.max(rel(slope, 0.5));
        slopes.push(slope);
    }
    check(
        worst <= 0.05,
        format!("slopes {:.5} (identity), {:.5} (attenuator); max rel err {worst:.2e}", slopes[0], slopes[1]),
    )
}

fn dual_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0_f64;
    for i in 0..200 {
        let params = sampling::random_cp_channel(&mut rng, 1 + i % 4, 1.0);
        let e = 10f64.powf(rng.random_range(-2.0..3.0));
        for p in thermal::DEFAULT_P_GRID {
            let det = thermal::output_schatten_norm(&params, e, p).unwrap();
            let spec = thermal::output_schatten_norm_spectral(&params, e, p).unwrap();
            worst = worst.max(rel(det, spec));
        }
    }
    check(worst <= 1e-10, format!("200 channels, s <= 4: max rel diff {worst:.2e}"))
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn gchan(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gchan"))
        .args(args)
        .output()
        .expect("gchan binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn json_field(text: &str, path: &[&str]) -> Option<serde_json::Value> {
    let mut v: serde_json::Value = serde_json::from_str(text).ok()?;
    for key in path {
        v = match key.parse::<usize>() {
            Ok(i) => v.get(i)?.clone(),
            Err(_) => v.get(key)?.clone(),
        };
    }
    Some(v)
}

fn cli_examples() -> Outcome {
    let dir = examples_dir();
    let ex = |name: &str| dir.join(name).display().to_string();
    let mut failures = Vec::new();
    let mut expect = |label: &str, ok: bool| {
        if !ok {
            failures.push(label.to_string());
        }
    };

    let (code, out) = gchan(&["norm", &ex("attenuator.json"), "--p", "2"]);
    let norm = json_field(&out, &["rows", "0", "norm"]).and_then(|v| v.as_f64());
    expect("norm attenuator", code == 0 && norm.is_some_and(|x| (x - 1.25).abs() < 1e-12));
    let (code, out) = gchan(&["norm", &ex("identity.json"), "--p", "3"]);
    let norm = json_field(&out, &["rows", "0", "norm"]).and_then(|v| v.as_f64());
    expect("norm identity", code == 0 && norm == Some(1.0));
    let (code, out) = gchan(&["norm", &ex("singular.json"), "--p", "2"]);
    let norm = json_field(&out, &["rows", "0", "norm"]);
    expect("norm singular", code == 0 && norm == Some("unbounded".into()));
    let (code, _) = gchan(&["norm", &ex("not-cp.json"), "--p", "2"]);
    expect("norm not-cp exit 2", code == 2);

    for name in ["identity.json", "attenuator.json", "amplifier.json", "classical-noise.json", "two-mode.json"] {
        let (code, out) = gchan(&["oracle", &ex(name), "--E", "1", "--p", "2"]);
        let pass = json_field(&out, &["rows", "0", "pass"]);
        expect(&format!("oracle {name}"), code == 0 && pass == Some(true.into()));
        let (code, _) = gchan(&["entropy", &ex(name), "--E-grid", "0,1,100,10000"]);
        expect(&format!("entropy {name}"), code == 0);
        let (code, _) = gchan(&["converge", &ex(name), "--E-grid", "1,10,100,10000", "--p-grid", "1.5,2,3"]);
        expect(&format!("converge {name}"), code == 0);
    }
    let (code, _) = gchan(&["oracle", &ex("singular.json")]);
    expect("oracle singular rejected as input", code == 1);

    let (code, out) = gchan(&["converge", &ex("attenuator.json"), "--p", "2", "--E-grid", "1,10,100,10000"]);
    let last = json_field(&out, &["rows", "3", "rel_dist"]).and_then(|v| v.as_f64());
    expect("converge attenuator", code == 0 && last.is_some_and(|x| x <= 2e-4));

    let (code, out) = gchan(&["converge", &ex("attenuator.json"), "--q", "1", "--p", "2", "--E-grid", "100,1000,10000"]);
    let slope = json_field(&out, &["fits", "0", "fitted_slope"]).and_then(|v| v.as_f64());
    expect("converge divergence", code == 0 && slope.is_some_and(|s| (s - 0.5).abs() <= 0.025));

    let (code, out) = gchan(&["entropy", &ex("attenuator.json"), "--E-grid", "10000"]);
    let gain = json_field(&out, &["rows", "0", "entropy_gain"]).and_then(|v| v.as_f64());
    expect("entropy attenuator", code == 0 && gain.is_some_and(|g| (g + 0.446287).abs() <= 1e-4));

    let (code, out) = gchan(&["interp", "--n-maps", "1", "--family", "identity"]);
    let slack = json_field(&out, &["max_slack"]).and_then(|v| v.as_f64());
    expect("interp identity", code == 0 && slack == Some(0.0));

    let detail = if failures.is_empty() {
        "all example channel specs behave as documented".to_string()
    } else {
        format!("failed: {}", failures.join(", "))
    };
    check(failures.is_empty(), detail)
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 attenuator norm and convergence", Duration::from_secs(10), attenuator),
        ("2 amplifier norm and convergence", Duration::from_secs(10), amplifier),
        ("3 multiplicativity", Duration::from_secs(60), multiplicativity),
        ("4 entropy gain bound", Duration::from_secs(120), entropy_gain),
        ("5 attenuator image of the identity", Duration::from_secs(30), phi_of_identity),
        ("6 interpolation bound on positive maps", Duration::from_secs(600), interpolation_suite),
        ("7 q < p growth slope", Duration::from_secs(5), divergence_slope),
        ("8 determinant vs spectrum norms", Duration::from_secs(30), dual_paths),
        ("9 CLI example channels", Duration::from_secs(60), cli_examples),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{name}] {} ({:.2} s of {} s{})",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
