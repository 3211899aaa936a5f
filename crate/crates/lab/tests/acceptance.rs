//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Failures listed in `KNOWN_UNATTAINABLE` are printed as FAIL but do not fail
//! the process when they fail for the recorded reason.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use mcflow::config::RunConfig;
use mcflow::core::driver::{evaluate, run_scenario, MonitorOutcome, RunRecord, Silent};
use mcflow::core::flow::FlowState;
use mcflow::core::functionals::{pointwise_density_rate, Verdict};
use mcflow::core::geometry::{compute_geometry, Clock, End, Representation, Snapshot};
use mcflow::core::profiles::RadialProfile;
use mcflow::core::scenarios::{
    admissibility_report, build_scenario, graph_analytic, hyperboloid_analytic, hyperboloid_closed_form,
    hyperboloid_parameters, radial_grid, revolution_closed_form, Monitor, ScenarioParams, Status,
};

/// Criterion 4 cannot hold for revolution_sinlog as stated: the rescaled
/// surface leaves the ball of radius 5, so the annulus 1 <= |x| <= 5 is empty.
const KNOWN_UNATTAINABLE: &[u32] = &[4];

struct Criterion {
    id: u32,
    title: &'static str,
    pass: bool,
    /// Set when a failure is the recorded, expected one.
    known: bool,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion { id, title, pass: true, known: false, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, note: String) {
        self.pass &= ok;
        self.notes.push(format!("[{}] {note}", if ok { "ok" } else { "x" }));
    }

    fn note(&mut self, note: String) {
        self.notes.push(format!("[..] {note}"));
    }
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str, overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::load(&scenarios().join(name), &o).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn execute(cfg: &RunConfig) -> (RunRecord, Vec<MonitorOutcome>, f64) {
    let t = Instant::now();
    let rec = run_scenario(&cfg.scenario, &cfg.plan, &cfg.expectations, &mut Silent).expect("run");
    let out = evaluate(&cfg.scenario, &rec, &cfg.expectations);
    (rec, out, t.elapsed().as_secs_f64())
}

fn outcome(out: &[MonitorOutcome], m: Monitor) -> &MonitorOutcome {
    out.iter().find(|o| o.monitor == m).unwrap_or_else(|| panic!("monitor {} not run", m.name()))
}

/// Worst relative error of the measured `d/dt log(ρ dμ)` on the shrinking
/// unit circle against `-(1/R + R/(2t+1))²`, `R² = 1 - 2t`, for `t ≤ 0.36`.
fn circle_rate_error(nodes: usize, dt: f64) -> (f64, f64) {
    let t0 = Instant::now();
    let sc = build_scenario("circle", &ScenarioParams { nodes, ..ScenarioParams::default() }).unwrap();
    let mut st = FlowState::new(sc.snapshot.clone(), sc.spec.with_cfl(0.5)).unwrap();
    let mut snaps = vec![st.snapshot.clone()];
    let steps = (0.37 / dt).round() as usize;
    for k in 1..=steps {
        st.advance_to(k as f64 * dt).unwrap();
        snaps.push(st.snapshot.clone());
    }
    let mut worst: f64 = 0.0;
    for label in [0, nodes / 4, nodes / 2, 3 * nodes / 4] {
        for r in pointwise_density_rate(&snaps, label).unwrap() {
            if r.clock > 0.36 + 1e-12 {
                continue;
            }
            let big_r = (1.0 - 2.0 * r.clock).sqrt();
            let exact = -(1.0 / big_r + big_r / (2.0 * r.clock + 1.0)).powi(2);
            worst = worst.max(((r.measured - exact) / exact).abs());
        }
    }
    (worst, t0.elapsed().as_secs_f64())
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "circle density rate against the closed form");
    let (coarse, secs) = circle_rate_error(256, 0.01);
    let (fine, _) = circle_rate_error(512, 0.005);
    c.check(coarse <= 5e-2, format!("256 nodes, dt 0.01: worst relative error {coarse:.3e} <= 5e-2"));
    c.check(fine <= 0.5 * coarse, format!("512 nodes, dt 0.005: {fine:.3e} <= half of coarse (ratio {:.2})", coarse / fine));
    c.check(secs <= 10.0, format!("baseline runtime {secs:.2} s <= 10 s"));
    c
}

fn hyperboloid_criteria() -> [Criterion; 4] {
    let cfg = load("hyperboloid.cfg", &[]);
    let (rec, out, secs) = execute(&cfg);
    let h = rec.spacing;

    let mut c2 = Criterion::new(2, "hyperboloid weighted mass monotone, derivative identity");
    let mono = outcome(&out, Monitor::WeightedMass);
    c2.check(mono.verdict == Verdict::Pass, format!("weighted mass non-increasing, worst step {:.3e} (tol 1e-6 relative)", mono.value));
    let ident = outcome(&out, Monitor::DerivativeIdentity);
    c2.check(ident.verdict == Verdict::Pass, format!("slope vs -deficit mismatch {:.3e} <= 5e-2", ident.value));
    c2.check(rec.termination.is_none(), format!("reached s = {} without termination", cfg.scenario.spec.control.horizon));
    c2.check(secs <= 300.0, format!("runtime {secs:.2} s <= 300 s ({} nodes, mu = {})", rec.initial.len(), cfg.scenario.mu));

    let mut c3 = Criterion::new(3, "hyperboloid converges to the shooting expander");
    let def = outcome(&out, Monitor::DeficitVanishing);
    c3.check(def.verdict == Verdict::Pass, format!("unweighted deficit on |x| <= 5, [0,1] -> [2,3]: ratio {:.3e} <= 0.1 ({})", def.value, def.detail));
    let m = outcome(&out, Monitor::ExpanderMatch);
    c3.check(m.verdict == Verdict::Pass, format!("sup |u - u_expander| on r <= 5: {:.3e} <= 1e-2 ({})", m.value, m.detail));

    let mut c5 = Criterion::new(5, "sign preservation in the mu-rescaled hyperboloid run");
    let min_res = rec.samples.iter().map(|r| r.signs.min_residual).fold(f64::INFINITY, f64::min);
    let max_xn = rec.samples.iter().map(|r| r.signs.max_normal_part).fold(f64::NEG_INFINITY, f64::max);
    let tol = 10.0 * h * h;
    c5.check(min_res >= -tol, format!("min(H + <x,nu>) = {min_res:.3e} >= -10h^2 = {:.3e}", -tol));
    c5.check(max_xn <= tol, format!("max <x,nu> = {max_xn:.3e} <= 10h^2 = {tol:.3e}"));
    c5.note(format!("{} samples, mu = {}", rec.samples.len(), cfg.scenario.mu));

    let mut c8 = Criterion::new(8, "Gaussian density factorization and its sign");
    let fact = outcome(&out, Monitor::Factorization);
    c8.check(fact.verdict == Verdict::Pass, format!("hyperboloid(1,1): sup relative rate mismatch {:.3e} <= 5e-2", fact.value));
    let cfg19 = load("hyperboloid_nondecreasing.cfg", &[]);
    let adm = admissibility_report(&cfg19.scenario.snapshot, cfg19.params.q0).unwrap();
    let cond = &adm.nondecreasing_condition;
    c8.check(cond.status == Status::Holds, format!("hyperboloid(2,1): -<x0 - q0, nu> >= mu H >= 0 holds node-wise (largest mu {:.3})", cond.value));
    let (rec19, out19, _) = execute(&cfg19);
    let min_rate = rec19.samples.iter().filter_map(|r| r.factorization_min).fold(f64::INFINITY, f64::min);
    c8.check(min_rate >= 0.0, format!("hyperboloid(2,1): smallest measured rate of e^(-|x|^2/2) dmu is {min_rate:.3e} >= 0"));
    let gm = outcome(&out19, Monitor::GaussianMass);
    c8.check(gm.verdict == Verdict::Pass, format!("hyperboloid(2,1): Gaussian mass non-decreasing (worst step {:.3e})", gm.value));
    let f19 = outcome(&out19, Monitor::Factorization);
    c8.note(format!("hyperboloid(2,1): sup relative rate mismatch {:.3e}", f19.value));

    [c2, c3, c5, c8]
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new(4, "non-convergence reproduced on eh_graph and revolution_sinlog");
    let mut sinlog_empty = false;
    for (file, name) in [("eh_graph.cfg", "eh_graph"), ("unattainable/revolution_sinlog_fixed_annulus.cfg", "revolution_sinlog")] {
        let cfg = load(file, &[]);
        let e = &cfg.expectations;
        let (_, out, _) = execute(&cfg);
        c.check(e.floor >= 0.05 && e.annulus == [1.0, 5.0], format!("{name}: frozen floor {} on annulus {:?}", e.floor, e.annulus));
        let f = outcome(&out, Monitor::ResidualFloor);
        c.check(f.verdict == Verdict::Pass, format!("{name}: residual floor {} (window minimum {:.3e}; {})", f.verdict.as_str(), f.value, f.detail));
        let d = outcome(&out, Monitor::DeficitVanishing);
        c.check(d.verdict == Verdict::Fail, format!("{name}: deficit_vanishing {} as expected FAIL ({})", d.verdict.as_str(), d.detail));
        if name == "revolution_sinlog" {
            sinlog_empty = f.verdict == Verdict::Inconclusive && f.detail.contains("empty");
        }
    }
    let search = load("revolution_sinlog.cfg", &[]);
    let (_, out, _) = execute(&search);
    let f = outcome(&out, Monitor::ResidualFloor);
    let d = outcome(&out, Monitor::DeficitVanishing);
    c.note(format!("revolution_sinlog with annulus search: residual floor {} ({}); deficit_vanishing {}", f.verdict.as_str(), f.detail, d.verdict.as_str()));
    // only the sinlog half may fail, and only because its annulus is empty
    let eh_ok = c.notes.iter().take(3).all(|n| n.starts_with("[ok]"));
    c.known = !c.pass && eh_ok && sinlog_empty;
    c
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new(6, "Type III bounds on graphs, Type I singularity on the circle");
    for file in ["plane_graph.cfg", "eh_graph.cfg", "revolution_sinlog.cfg"] {
        let cfg = load(file, &[]);
        let (rec, out, _) = execute(&cfg);
        let o = outcome(&out, Monitor::TypeIii);
        c.check(
            o.verdict == Verdict::Pass && rec.termination.is_none(),
            format!("{}: max t|A|^2 = {:.4e} <= frozen {:.3e} to s = {}", cfg.scenario.kind.name(), o.value, o.threshold, cfg.scenario.spec.control.horizon),
        );
    }
    let cfg = load("circle.cfg", &["monitors.list=type_i"]);
    let (_, out, _) = execute(&cfg);
    let o = outcome(&out, Monitor::TypeI);
    c.check(o.verdict == Verdict::Pass, format!("circle: {}; (T - t) max|A|^2 = {:.4} <= {}", o.detail, o.value, o.threshold));
    c
}

fn hyperboloid_from_points(h: f64) -> Snapshot {
    let taus = hyperboloid_parameters(1.0, 1.0, 8.0, h);
    let pts = taus.iter().map(|&t| [t.sinh(), t.cosh()]).collect();
    compute_geometry(Representation::revolution(2, pts, End::Axis, End::Free).unwrap(), 0.0, Clock::Rescaled).unwrap()
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7, "geometry against closed forms");
    let taus: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
    let snap = hyperboloid_analytic(2, 1.0, 1.0, &taus).unwrap();
    let mut worst: f64 = 0.0;
    for (t, g) in taus.iter().zip(snap.geometry()) {
        let (h, xn) = hyperboloid_closed_form(1.0, 1.0, t.cosh());
        worst = worst.max((g.mean_curvature - h).abs()).max((g.normal_part - xn).abs());
    }
    c.check(worst <= 1e-8, format!("hyperboloid(1,1) analytic jets: max error {worst:.2e} <= 1e-8"));

    let prof = RadialProfile::SinLog { slope: 6.0 };
    let r: Vec<f64> = (1..=4000).map(|i| i as f64 * 0.005).collect();
    let snap = graph_analytic(2, prof, &r).unwrap();
    let mut worst: f64 = 0.0;
    let mut min_h = f64::INFINITY;
    for (&x, g) in r.iter().zip(snap.geometry()) {
        let (h, xn) = revolution_closed_form(prof.jet(x), x);
        worst = worst.max((g.mean_curvature - h).abs()).max((g.normal_part - xn).abs());
        min_h = min_h.min(g.mean_curvature);
    }
    c.check(worst <= 1e-8, format!("r sin log r + 6r analytic jets: max error {worst:.2e} <= 1e-8"));
    c.check(min_h > 0.0, format!("r sin log r + 6r: H > 0 on the grid (min {min_h:.3e})"));

    let hyp_err = |h: f64| {
        let s = hyperboloid_from_points(h);
        s.points()
            .iter()
            .zip(s.geometry())
            .filter(|(p, _)| p[0] <= 5.0)
            .map(|(p, g)| {
                let (hh, xn) = hyperboloid_closed_form(1.0, 1.0, p[1]);
                (g.mean_curvature - hh).abs().max((g.normal_part - xn).abs())
            })
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [0.05, 0.025, 0.0125].iter().map(|&h| hyp_err(h)).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    c.check(orders.iter().all(|&o| o >= 1.9), format!("hyperboloid from nodes, h = 0.05/0.025/0.0125: errors {}, orders {}", fmt_list(&e, "e"), fmt_list(&orders, "f")));

    let sl_err = |h: f64| {
        let r = radial_grid(20.0, h);
        let u: Vec<f64> = r.iter().map(|&x| prof.value(x)).collect();
        let s = compute_geometry(Representation::radial_graph(2, &r, &u).unwrap(), 0.0, Clock::Rescaled).unwrap();
        s.points()
            .iter()
            .zip(s.geometry())
            .filter(|(p, _)| p[0] >= 1.5 && p[0] <= 15.0)
            .map(|(p, g)| {
                let (hh, xn) = revolution_closed_form(prof.jet(p[0]), p[0]);
                (g.mean_curvature - hh).abs().max((g.normal_part - xn).abs())
            })
            .fold(0.0, f64::max)
    };
    let e: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&h| sl_err(h)).collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    c.check(orders.iter().all(|&o| o >= 1.9), format!("r sin log r + 6r from nodes on 1.5 <= r <= 15: errors {}, orders {}", fmt_list(&e, "e"), fmt_list(&orders, "f")));
    c
}

fn fmt_list(v: &[f64], style: &str) -> String {
    let items: Vec<String> = v.iter().map(|x| if style == "e" { format!("{x:.2e}") } else { format!("{x:.2}") }).collect();
    format!("[{}]", items.join(", "))
}

/// Doubling the truncation radius; reported, not judged.
fn sensitivity() -> Vec<String> {
    let mut lines = Vec::new();
    let base = load("hyperboloid.cfg", &[]);
    let wide = load("hyperboloid.cfg", &["scenario.r_max=40"]);
    let (a, oa, _) = execute(&base);
    let (b, ob, _) = execute(&wide);
    let (ma, mb) = (a.samples.last().map_or(f64::NAN, |r| r.weighted_mass), b.samples.last().map_or(f64::NAN, |r| r.weighted_mass));
    lines.push(format!("hyperboloid: final weighted mass {ma:.10} (R_max 20) vs {mb:.10} (R_max 40), relative change {:.2e}", ((ma - mb) / mb).abs()));
    for m in [Monitor::DeficitVanishing, Monitor::ExpanderMatch, Monitor::DerivativeIdentity, Monitor::Factorization] {
        lines.push(format!("hyperboloid {}: {:.4e} vs {:.4e}", m.name(), outcome(&oa, m).value, outcome(&ob, m).value));
    }
    for file in ["eh_graph.cfg", "revolution_sinlog.cfg"] {
        let (_, oa, _) = execute(&load(file, &[]));
        let (_, ob, _) = execute(&load(file, &["scenario.r_max=40"]));
        for m in [Monitor::ResidualFloor, Monitor::DeficitVanishing, Monitor::TypeIii] {
            let (x, y) = (outcome(&oa, m), outcome(&ob, m));
            lines.push(format!(
                "{} {}: {} {:.4e} vs {} {:.4e}",
                file.trim_end_matches(".cfg"),
                m.name(),
                x.verdict.as_str(),
                x.value,
                y.verdict.as_str(),
                y.value
            ));
        }
    }
    lines
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut all = vec![criterion_1()];
    let [c2, c3, c5, c8] = hyperboloid_criteria();
    all.extend([c2, c3, criterion_4(), c5, criterion_6(), criterion_7(), c8]);
    all.sort_by_key(|c| c.id);

    let mut unexpected = 0;
    for c in &all {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let tag = if !c.pass && c.known && KNOWN_UNATTAINABLE.contains(&c.id) { " (known: see decisions ledger)" } else { "" };
        println!("criterion {}: {verdict} - {}{tag}", c.id, c.title);
        for n in &c.notes {
            println!("    {n}");
        }
        if !c.pass && !(c.known && KNOWN_UNATTAINABLE.contains(&c.id)) {
            unexpected += 1;
        }
    }
    println!("truncation sensitivity (R_max 20 vs 40):");
    for l in sensitivity() {
        println!("    {l}");
    }
    let passed = all.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria PASS in {:.1} s; {unexpected} unexpected failure(s)", all.len(), started.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
