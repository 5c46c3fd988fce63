mod common;

use std::process::{Command, Output};

use cloudgame::cli::{load_scenario, ResultTable};
use cloudgame::game1::solve_game1;
use cloudgame::game23::solve_game2;
use common::fixture;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloudgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

/// Parses the rows of a CSV block that follows `# label`.
fn block(text: &str, label: &str) -> Vec<Vec<String>> {
    let start = text.find(&format!("# {label}\n")).unwrap_or_else(|| panic!("no block {label}"));
    text[start..]
        .lines()
        .skip(2)
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn sweep_column(text: &str, column: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn result_table_round_trips_at_printed_precision() {
    let market = load_scenario(&fixture("triopoly.json"), true).unwrap().scenario;
    let eq = solve_game2(&market, &Default::default()).unwrap();
    let out = run(&["solve", &path("triopoly.json"), "--game", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let table = ResultTable::parse(&stdout(&out)).unwrap();
    for (parsed, exact) in table.profile().prices.iter().chain(&table.profile().qos).zip(
        eq.profile.prices.iter().chain(&eq.profile.qos),
    ) {
        assert_eq!(format!("{parsed:.11e}"), format!("{exact:.11e}"));
    }
}

#[test]
fn strict_mode_rejects_typos_and_lenient_mode_warns() {
    let dir = tempfile::tempdir().unwrap();
    let typo = dir.path().join("typo.json");
    let text = std::fs::read_to_string(fixture("monopoly.json")).unwrap();
    std::fs::write(&typo, text.replace("\"price_max\"", "\"price_mx\": 1, \"price_max\"")).unwrap();
    let typo = typo.display().to_string();

    let strict = run(&["--strict", "solve", &typo, "--game", "1", "--qos", "1"]);
    assert_eq!(strict.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("providers.0.price_mx"));

    let lenient = run(&["solve", &typo, "--game", "1", "--qos", "1"]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning: ignoring unknown key"));
}

#[test]
fn validation_errors_name_each_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("duopoly.json")).unwrap();
    // breaks row dominance for provider 0 and the price cap of provider 1
    let text = text
        .replace("[[0.0, 0.5], [0.5, 0.0]]", "[[0.0, 2.5], [0.5, 0.0]]")
        .replacen("\"price_max\": 50.0 }\n  ]", "\"price_max\": 1.0 }\n  ]", 1);
    std::fs::write(&bad, text).unwrap();
    let out = run(&["solve", bad.to_str().unwrap(), "--game", "1", "--qos", "0,0"]);
    assert_eq!(out.status.code(), Some(65));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("provider 0: own price sensitivity"), "{err}");
    assert!(err.contains("provider 1: price_max"), "{err}");
}

#[test]
fn sensitivity_matches_sweep_differences() {
    let out = run(&["sensitivity", &path("rise_then_fall.json"), "--qos", "1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let price_qos = block(&text, "price_qos");
    let d01: f64 = price_qos[0][2].parse().unwrap();
    let d11: f64 = price_qos[1][2].parse().unwrap();

    let h = 1e-4;
    let (from, to) = (format!("{}", 3.0 - h), format!("{}", 3.0 + h));
    let sweep = run(&[
        "sweep", &path("rise_then_fall.json"), "--game", "1", "--qos", "1,3", "--axis", "qos[1]",
        "--from", &from, "--to", &to, "--steps", "3",
    ]);
    assert_eq!(sweep.status.code(), Some(0));
    let text = stdout(&sweep);
    for (column, analytic) in [("price_0", d01), ("price_1", d11)] {
        let p = sweep_column(&text, column);
        let fd = (p[2] - p[0]) / (2.0 * h);
        // sweep output carries 12 significant digits
        assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0), "{column}: {fd} vs {analytic}");
    }

    let critical = block(&stdout(&run(&["sensitivity", &path("rise_then_fall.json"), "--qos", "0,0"])), "critical_qos");
    let s0: f64 = critical[0][2].parse().unwrap();
    assert!((s0 - 2.0).abs() < 0.05, "critical qos {s0}");
    assert_eq!(critical[1][1], "", "no critical point for 1 against 0");
}

#[test]
fn rival_qos_sweep_rises_then_falls_across_the_critical_point() {
    let out = run(&[
        "sweep", &path("rise_then_fall.json"), "--game", "1", "--qos", "0,0", "--axis", "qos[1]",
        "--from", "0", "--to", "10", "--steps", "41",
    ]);
    let text = stdout(&out);
    let s = sweep_column(&text, "qos[1]");
    let p = sweep_column(&text, "price_0");
    let peak = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert!(peak > 0 && peak < p.len() - 1);
    assert!((s[peak] - 2.0).abs() <= 0.25 + 1e-12, "peak at {}", s[peak]);
    assert!(p[..=peak].windows(2).all(|w| w[1] > w[0]));
    assert!(p[peak..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn own_cost_sweep_raises_own_price_and_cuts_demand() {
    let out = run(&[
        "sweep", &path("triopoly.json"), "--game", "1", "--qos", "0.2,0.5,0.1", "--axis",
        "providers[1].cost_per_capacity", "--from", "0.5", "--to", "3", "--steps", "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let price = sweep_column(&text, "price_1");
    let demand = sweep_column(&text, "demand_1");
    assert!(price.windows(2).all(|w| w[1] > w[0]));
    assert!(demand.windows(2).all(|w| w[1] < w[0]));
    // rivals' prices follow, weakly
    assert!(sweep_column(&text, "price_0").windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn fixed_price_sweep_gives_increasing_concave_qos() {
    let out = run(&[
        "sweep", &path("monopoly.json"), "--game", "3", "--prices", "4", "--axis", "prices[0]",
        "--from", "2", "--to", "10", "--steps", "81",
    ]);
    let text = stdout(&out);
    let price = sweep_column(&text, "prices[0]");
    let qos = sweep_column(&text, "qos_0");
    assert!(qos.windows(2).all(|w| w[1] >= w[0]));
    let above: Vec<f64> = price.iter().zip(&qos).filter(|(p, _)| **p > 2.2).map(|(_, s)| *s).collect();
    // printed at 12 digits, so allow for rounding in the second difference
    assert!(above.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-10));
    assert!(text.contains("\n2,unique,1,2,0,"));
}

#[test]
fn sweep_marks_failed_points_and_keeps_order() {
    let out = run(&[
        "sweep", &path("monopoly.json"), "--game", "1", "--qos", "1", "--axis", "providers[0].price_max",
        "--from", "5", "--to", "8", "--steps", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].starts_with("5,infeasible,,"), "{}", rows[0]);
    assert!(rows[1].starts_with("6,infeasible,,"), "{}", rows[1]);
    assert!(rows[2].starts_with("7,unique,1,6.69314718056,"), "{}", rows[2]);
    assert!(rows[3].starts_with("8,unique,"), "{}", rows[3]);
}

#[test]
fn halving_the_price_step_quarters_the_grid_bound() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("g1.csv").display().to_string();
    run(&["solve", &path("duopoly.json"), "--game", "1", "--qos", "0.3,0.1", "--out", &result]);
    let bound = |step: &str| -> (f64, f64) {
        let out = run(&["verify", &path("duopoly.json"), "--result", &result, "--price-step", step]);
        assert_eq!(out.status.code(), Some(0));
        let meta = stdout(&out);
        let field = |k: &str| -> f64 {
            let start = meta.find(&format!("{k}=")).unwrap() + k.len() + 1;
            meta[start..].split([',', '\n']).next().unwrap().parse().unwrap()
        };
        (field("epsilon"), field("bound"))
    };
    let (e1, b1) = bound("0.01");
    let (e2, b2) = bound("0.005");
    assert!((b1 / b2 - 4.0).abs() < 1e-9, "{b1} / {b2}");
    // y·Δp² with y = 2
    assert!((b1 - 2e-4).abs() < 1e-15);
    assert!(e1 <= b1 && e2 <= b2);
}

#[test]
fn verify_flags_a_perturbed_profile() {
    let eq = solve_game1(&load_scenario(&fixture("duopoly.json"), true).unwrap().scenario, &[0.0, 0.0]).unwrap();
    let prices = format!("{},{}", eq.profile.prices[0] + 0.25, eq.profile.prices[1]);
    let out = run(&["verify", &path("duopoly.json"), "--game", "1", "--prices", &prices, "--qos", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let gain: f64 = row[5].parse().unwrap();
    // profit is quadratic in own price with curvature −2y = −4: gain ≈ 2·0.25²
    assert!((gain - 0.125).abs() < 1e-3, "gain {gain}");
    assert_eq!(row[7], "false");
    // provider 1 is best-responding to a profile that is off the equilibrium
    assert_eq!(text.lines().nth(3).unwrap().split(',').nth(7), Some("false"));
}

#[test]
fn provision_handles_zero_demand_and_percentiles() {
    let dir = tempfile::tempdir().unwrap();
    let result = dir.path().join("r.csv");
    std::fs::write(
        &result,
        "# game=3,uniqueness=unique,iterations=1,converged=true,selected_rule=none\n\
         provider,price,qos,demand,capacity,profit,price_foc_residual,qos_foc_residual\n\
         0,2,0.5,0,0.666666666667,-0.666666666667,0,0\n",
    )
    .unwrap();
    let result = result.display().to_string();
    let out = run(&["provision", &path("monopoly.json"), "--result", &result]);
    assert_eq!(out.status.code(), Some(0));
    // μ = κ/(r̄t − s) = 1/1.5, utilisation 0
    assert!(stdout(&out).contains("\n0,0.5,0,0.666666666667,0,0.666666666667,1.5\n"), "{}", stdout(&out));

    let pct = run(&["provision", &path("monopoly.json"), "--result", &result, "--phi", "0.95"]);
    let text = stdout(&pct);
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[5] / (1.0 / 1.5) - 20f64.ln()).abs() < 1e-10, "capacity cost {}", row[5]);
}

#[test]
fn provision_inline_solve_matches_queueing_formula() {
    let out = run(&["provision", &path("monopoly.json"), "--game", "1", "--qos", "1"]);
    let text = stdout(&out);
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let lambda = 4.0 + 2f64.ln();
    assert!((row[3] - (lambda + 1.0)).abs() < 1e-10);
    assert!((row[4] - lambda / (lambda + 1.0)).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["solve", &path("monopoly.json") as &str, "--game", "4"],
        vec!["solve", &path("monopoly.json"), "--game", "3"],
        vec!["solve", &path("duopoly.json"), "--game", "1", "--qos", "0"],
        vec!["verify", &path("duopoly.json"), "--prices", "3,3"],
        vec!["sweep", &path("duopoly.json"), "--game", "2", "--axis", "qos[0]", "--from", "0", "--to", "1", "--steps", "2"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(64), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
