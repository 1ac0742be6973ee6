//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orlicz_lab::degiorgi::{dual, epsilon_for, exponent_triple, induction_verify, tau0_threshold};
use orlicz_lab::experiments::{self, ScenarioConfig, ScenarioKind, ScenarioResult};
use orlicz_lab::experiments::data::{graded_ball, Profile};
use orlicz_lab::measure::{ScalarField, WeightSpec, WeightedDomain};
use orlicz_lab::operator::{solve_problem, test_family, EllipticOperatorSpec};
use orlicz_lab::orlicz::{holder_pairing, indicator_norm, luxemburg_norm, norm_chain_check};
use orlicz_lab::young::{ConjugateForm, YoungParams};

type Outcome = Result<String, String>;

fn config(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ScenarioConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn scenario(kind: ScenarioKind, cfg: &str) -> Result<ScenarioResult, String> {
    experiments::run(kind, &config(cfg)).map_err(|e| e.to_string())
}

/// Passes when every assertion whose name contains one of `keys` passes.
fn check_assertions(res: &ScenarioResult, keys: &[&str]) -> Outcome {
    let picked: Vec<_> = res.assertions.iter().filter(|a| keys.iter().any(|k| a.name.contains(k))).collect();
    if picked.is_empty() {
        return Err(format!("no assertions matching {keys:?}"));
    }
    let failed: Vec<String> = picked
        .iter()
        .filter(|a| !a.pass)
        .map(|a| format!("{} ({} {} {})", a.name, a.value, a.relation, a.limit))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} checks", picked.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn c1_indicator_kernel() -> Outcome {
    let mut worst = 0.0f64;
    for (p, q) in [(1.5, 2.0), (2.0, 3.0), (3.0, 1.0)] {
        let a = YoungParams::new(p, q).unwrap();
        for mass in [1e-4, 1e-2, 1.0] {
            let edges = if mass < 1.0 { vec![0.0, mass, 1.0] } else { vec![0.0, 1.0] };
            let dom = WeightedDomain::interval_with_edges(edges, &WeightSpec::uniform()).unwrap();
            let ind = ScalarField::indicator(&dom, |x| x[0] < mass);
            let direct = luxemburg_norm(&ind, &ConjugateForm::numeric(a), &dom).unwrap().value;
            let closed = indicator_norm(&a, mass).unwrap();
            worst = worst.max((direct - closed).abs() / closed);
        }
    }
    let half = indicator_norm(&YoungParams::new(2.0, 0.0).unwrap(), 1.0).unwrap();
    if worst <= 1e-8 && (half - 0.5).abs() <= 1e-10 {
        Ok(format!("max relative gap {worst:.2e}, (2,0) at mass 1 gives {half}"))
    } else {
        Err(format!("max relative gap {worst:.2e}, (2,0) at mass 1 gives {half}"))
    }
}

fn random_domain(rng: &mut ChaCha8Rng) -> WeightedDomain {
    let cells = rng.gen_range(2..40);
    if rng.gen_bool(0.5) {
        let weights: Vec<f64> = (0..cells).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
        WeightedDomain::interval(0.0, rng.gen_range(0.1..5.0), cells, &WeightSpec::Samples(weights)).unwrap()
    } else {
        let weight = if rng.gen_bool(0.5) { WeightSpec::uniform() } else { WeightSpec::Power { alpha: rng.gen_range(0.0..2.0) } };
        WeightedDomain::ball(rng.gen_range(3..5), rng.gen_range(0.2..3.0), cells, &weight).unwrap()
    }
}

fn random_field(rng: &mut ChaCha8Rng, dom: &WeightedDomain) -> ScalarField {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    let values = (0..dom.len())
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { scale * rng.gen_range(-1.0..1.0) })
        .collect();
    ScalarField::from_values(dom, values).unwrap()
}

fn c2_holder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut tightest = 0.0f64;
    for _ in 0..1000 {
        let dom = random_domain(&mut rng);
        let f = random_field(&mut rng, &dom);
        let g = random_field(&mut rng, &dom);
        let a = YoungParams::new(rng.gen_range(1.05..4.0), rng.gen_range(0.0..3.0)).unwrap();
        let rep = holder_pairing(&f, &g, &a, &dom).map_err(|e| e.to_string())?;
        if rep.lhs > rep.rhs * (1.0 + 1e-9) {
            violations += 1;
        }
        if rep.rhs > 0.0 {
            tightest = tightest.max(rep.lhs / rep.rhs);
        }
    }
    let msg = format!("{violations} violations in 1000 trials, largest lhs/rhs {tightest:.4}");
    if violations == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_norm_chain() -> Outcome {
    let dom = WeightedDomain::ball(3, 1.0, 256, &WeightSpec::uniform()).unwrap();
    let mut corpus: Vec<(WeightedDomain, ScalarField)> = Vec::new();
    for p in [Profile::Constant, Profile::Bump, Profile::Peak, Profile::Shell, Profile::Truncated { k: 3 }] {
        corpus.push((dom.clone(), p.field(&dom).unwrap()));
    }
    for psi in test_family(&dom) {
        corpus.push((dom.clone(), psi));
    }
    let graded = |p: Profile| graded_ball(3, 1.0, p.cutoff().unwrap(), 32, &WeightSpec::uniform()).unwrap();
    for k in 1..=12 {
        let p = Profile::Truncated { k };
        let d = graded(p);
        let f = p.field(&d).unwrap();
        corpus.push((d, f));
    }
    for depth in [2.0, 4.0, 8.0, 16.0] {
        let p = Profile::Spike { depth };
        let d = graded(p);
        let f = p.field(&d).unwrap();
        corpus.push((d, f));
    }
    let pairs = [((1.5, 1.0), (2.0, 2.0)), ((1.5, 2.0), (3.0, 2.0)), ((1.2, 1.0), (2.5, 3.0)), ((1.0, 1.0), (1.5, 2.0))];
    let mut worst = [0.0f64; 3];
    for (d, f) in &corpus {
        for &(a, b) in &pairs {
            let rep = norm_chain_check(f, a, b, d).map_err(|e| e.to_string())?;
            for (w, c) in worst.iter_mut().zip(rep.constants) {
                *w = w.max(c);
            }
        }
    }
    let msg = format!("{} fields x {} pairs, largest constants {:.3} {:.3} {:.3}", corpus.len(), pairs.len(), worst[0], worst[1], worst[2]);
    if worst.iter().all(|c| *c <= 10.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_solver_convergence() -> Outcome {
    let start = Instant::now();
    let meshes = [16usize, 32, 64, 128, 256];
    let mut report = Vec::new();
    let mut ok = true;
    for (label, exact_max) in [("interval", 0.125), ("ball", 1.0 / 6.0)] {
        let mut errors = Vec::new();
        let mut max_gap = 0.0f64;
        for &cells in &meshes {
            let (dom, exact): (WeightedDomain, fn(f64) -> f64) = if label == "interval" {
                (WeightedDomain::interval(0.0, 1.0, cells, &WeightSpec::uniform()).unwrap(), |x| x * (1.0 - x) / 2.0)
            } else {
                (WeightedDomain::ball(3, 1.0, cells, &WeightSpec::uniform()).unwrap(), |r| (1.0 - r * r) / 6.0)
            };
            let spec = EllipticOperatorSpec::uniform(&dom).unwrap();
            let u = solve_problem(&spec, &ScalarField::constant(&dom, 1.0), 1e-12).map_err(|e| e.to_string())?;
            let err = (0..cells).map(|i| (u.values()[i] - exact(dom.node(i)[0])).abs()).fold(0.0, f64::max);
            errors.push(err);
            max_gap = max_gap.max((u.max() - exact_max).abs());
        }
        let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= min_order >= 1.9 && max_gap < 1e-3;
        report.push(format!("{label}: max gap {max_gap:.1e}, min order {min_order:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    let msg = format!("{} in {secs:.2}s", report.join(", "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_gamma_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut wg, mut ws) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let sigma = 1.0 + rng.gen_range(f64::EPSILON..=9.0);
        let theta = rng.gen_range(f64::EPSILON..1.0);
        let t = exponent_triple(sigma, theta).map_err(|e| e.to_string())?;
        wg = wg.max((t.gamma(sigma) - 1.0).abs());
        ws = ws.max((t.holder_sum() - 1.0).abs());
    }
    // σ = 3: min{1/2, 1/4, 2/3} = 1/4, so θ = 1/2 gives β = 1/8.
    let spot = exponent_triple(3.0, 0.5).unwrap();
    let spot_ok = (spot.beta - 0.125).abs() < 1e-15
        && (spot.b - 5.25).abs() < 1e-12
        && (spot.b_bar - 1.35).abs() < 1e-12
        && (spot.p - 14.538).abs() < 1e-3;
    let msg = format!("max |Γ-1| {wg:.1e}, max |sum-1| {ws:.1e}, spot (b, b̄, p) = ({}, {}, {:.4})", spot.b, spot.b_bar, spot.p);
    if wg <= 1e-12 && ws <= 1e-12 && spot_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_induction() -> Outcome {
    let mut strong_fail = 0;
    let mut weak_fail = 0;
    let mut cases = 0;
    for i in 0..10 {
        let sigma = 1.2 + 4.8 * i as f64 / 9.0;
        for j in 0..10 {
            let q = dual(sigma) * (1.05 + 2.95 * j as f64 / 9.0);
            let eps = epsilon_for(sigma, q).unwrap();
            for c in [1.0, 0.37] {
                let tau0 = tau0_threshold(c, eps).unwrap();
                for m0 in [2.0, 4.0, 10.0] {
                    cases += 1;
                    let r = induction_verify(m0, 100_000, sigma, q, eps, tau0, c).map_err(|e| e.to_string())?;
                    strong_fail += usize::from(!r.holds);
                    let w = induction_verify(m0, 100_000, sigma, q, eps, tau0 / 100.0, c).map_err(|e| e.to_string())?;
                    weak_fail += usize::from(!w.holds);
                }
            }
        }
    }
    let msg = format!("{cases} cases: {strong_fail} failures at τ0, {weak_fail} at τ0/100");
    if strong_fail == 0 && weak_fail >= 1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_main0() -> Outcome {
    let res = scenario(ScenarioKind::Main0, "ball3d.cfg")?;
    let table = &res.tables[0];
    let levels = table.series("constant", "level").len();
    if levels < 3 || table.rows.len() < 15 {
        return Err(format!("expected 3 levels x 5 members, got {} rows", table.rows.len()));
    }
    let drift = res
        .assertions
        .iter()
        .filter(|a| a.name.contains("drift"))
        .map(|a| a.value)
        .fold(0.0, f64::max);
    let worst_bound = table.rows.iter().map(|r| r.values[table.column("bound_ratio").unwrap()]).fold(0.0, f64::max);
    check_assertions(&res, &["drift", "tau0 * |f|_A"])
        .map(|m| format!("{m}; largest drift {:.2}%, largest max u / bound {worst_bound:.3}", 100.0 * drift))
}

fn c8_main1() -> Outcome {
    let res = scenario(ScenarioKind::Main1, "spikes.cfg")?;
    let a = |name: &str| res.assertion(name).map_or(f64::NAN, |a| a.value);
    check_assertions(&res, &["spike family"]).map(|m| {
        format!(
            "{m}; bump span {:.3e}, ratio band {:.3}, plain growth {:.2}x",
            a("spike family: entropy bump span"),
            a("spike family: band of max u / bump-corrected bound"),
            a("spike family: growth of max u / |f|_sigma'")
        )
    })
}

fn c9_counterexample() -> Outcome {
    let res = scenario(ScenarioKind::Counterexample, "counterexample.cfg")?;
    let t = &res.tables[0];
    let u0 = |k: usize| t.rows[k - 1].values[t.column("u0_green").unwrap()];
    check_assertions(&res, &["threshold", "u_k(0)", "u_16(0)", "discrete u(0)"])
        .map(|m| format!("{m}; u_16(0) - u_8(0) = {:.4}; {}", u0(16) - u0(8), res.notes.join("; ")))
}

fn c10_expint() -> Outcome {
    let cfg = config("expint.cfg");
    if cfg.gamma_factor != 2.0 {
        return Err(format!("expint.cfg must use gamma_factor 2, has {}", cfg.gamma_factor));
    }
    let res = scenario(ScenarioKind::Expint, "expint.cfg")?;
    let t = &res.tables[0];
    let worst = t
        .rows
        .iter()
        .map(|r| r.values[t.column("integral").unwrap()] / r.values[t.column("budget").unwrap()])
        .fold(0.0, f64::max);
    check_assertions(&res, &["budget", "v(Ω)"]).map(|m| format!("{m}; largest integral / budget {worst:.3}"))
}

fn c11_scaling() -> Outcome {
    let res = scenario(ScenarioKind::Main1, "spikes.cfg")?;
    let t = res.table("scaling").ok_or("no scaling table")?;
    let lit = t.column("rhs_literal_scale").unwrap();
    let spread: Vec<String> = t.rows.iter().map(|r| format!("{} N={}: {:.3}", r.label, r.values[0], r.values[lit])).collect();
    check_assertions(&res, &["N="]).map(|m| format!("{m}; literal N*RHS(f/N)/RHS(f): {}", spread.join(", ")))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 indicator norm kernel", c1_indicator_kernel),
        ("2 Hölder with factor 2", c2_holder),
        ("3 norm chain constants", c3_norm_chain),
        ("4 solver convergence", c4_solver_convergence),
        ("5 exponent identities", c5_gamma_identities),
        ("6 De Giorgi induction", c6_induction),
        ("7 L∞ bound by the Orlicz norm", c7_main0),
        ("8 entropy-bump sharpening", c8_main1),
        ("9 counterexample", c9_counterexample),
        ("10 exponential integrability", c10_expint),
        ("11 scaling soundness", c11_scaling),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                println!("FAIL criterion {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
