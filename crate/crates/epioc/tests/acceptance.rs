//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned in code; a failing check lists the measured
//! value next to the expected band.

use epioc::analysis::{
    classify_stability, closed_form_r0, critical_control, find_equilibria, next_generation_r0,
    offspring_quantity, EquilibriumKind, Stability, RESIDUAL_TOL,
};
use epioc::integrators::{constant_controls, integrate_grid, Method};
use epioc::models::ModelDefinition;
use epioc::ocp::benchmarks::{tumor_payoff_demo, LinExpProblem, TumorPayoffProblem};
use epioc::ocp::direct::{solve_direct, to_mayer, transcribe, DirectConfig, Scheme};
use epioc::ocp::indirect::{
    single_shooting, sweep, ShootingConfig, SweepConfig, TerminalCondition,
};
use epioc::ocp::{trajectory_objective, OcProblem, OcSolution};
use epioc::presets;
use epioc::scenario::{
    normalize_scenario, ControlSpec, ModelId, ParameterSet, Scenario, StateVector,
};
use epioc::strategies::{simulate_schedule, ControlSchedule};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion {
            name,
            failures: Vec::new(),
            checks: 0,
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        self.checks += 1;
        if !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn within(&mut self, label: &str, value: f64, target: f64, rel_tol: f64) {
        let ok = (value - target).abs() <= rel_tol * target.abs();
        self.check(
            label,
            ok,
            format!("{value:.6e} vs {target:.6e} +- {:.0}%", rel_tol * 100.0),
        );
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("{}: PASS ({} checks)", self.name, self.checks);
        } else {
            println!(
                "{}: FAIL ({}/{} checks failed)",
                self.name,
                self.failures.len(),
                self.checks
            );
            for f in &self.failures {
                println!("    {f}");
            }
            panic!("{} failed", self.name);
        }
    }
}

fn sweep_solution(s: &Scenario, tol: f64, max_iter: usize, relaxation: f64) -> OcSolution {
    let oc = OcProblem::from_scenario(s).expect("oc problem");
    let config = SweepConfig {
        tol,
        max_iter,
        relaxation,
    };
    sweep(&oc.problem, &oc.grid, &oc.initial, &config).expect("sweep")
}

fn direct_solution(s: &Scenario, intervals: Option<usize>) -> OcSolution {
    let oc = OcProblem::from_scenario(s).expect("oc problem");
    let mayer = to_mayer(&oc.problem);
    let nlp =
        transcribe(&mayer, &oc.grid, &oc.initial, Scheme::Euler, oc.grid.h()).expect("transcribe");
    let config = DirectConfig {
        tol: 1e-6,
        max_iter: 3000,
        control_intervals: intervals,
        ..DirectConfig::default()
    };
    solve_direct(&nlp, &config).expect("direct solve")
}

#[test]
fn c01_reproduction_numbers() {
    let mut c = Criterion::new("C1 basic reproduction numbers");
    let cases = [
        ("trachoma SIS", presets::trachoma(), 2.76, 0.01),
        ("influenza SIR", presets::influenza(), 3.652, 0.001),
        (
            "Cape Verde SEIR+ASEI",
            presets::cape_verde_seir_asei(),
            2.396,
            0.005,
        ),
        ("epidemic scenario", presets::vaccine_epidemic(), 2.46, 0.01),
        ("endemic scenario", presets::vaccine_endemic(), 1.29, 0.01),
    ];
    for (label, s, target, abs_tol) in cases {
        let controls = s.model.neutral_controls();
        let r = closed_form_r0(s.model, &s.params, &controls).expect("closed form");
        c.check(
            label,
            (r.value - target).abs() <= abs_tol,
            format!("R0 = {:.4} vs {target} +- {abs_tol}", r.value),
        );
    }
    c.finish();
}

#[test]
fn c02_critical_adulticide() {
    let mut c = Criterion::new("C2 critical adulticide level");
    let s = presets::cape_verde_seir_asei();
    let cstar = critical_control(s.model, &s.params, &[0.0], "c", (0.0, 1.0)).expect("bisection");
    c.check(
        "bisection value",
        (cstar - 0.156961).abs() <= 1e-4,
        format!("c* = {cstar:.6} vs 0.156961 +- 1e-4"),
    );
    for (level, expected) in [(0.0, Stability::Unstable), (0.157, Stability::Stable)] {
        let controls = [level];
        let eq = find_equilibria(s.model, &s.params, &controls).expect("equilibria");
        let brdfe = eq
            .iter()
            .find(|e| e.kind == EquilibriumKind::Brdfe)
            .expect("BRDFE");
        let classified =
            classify_stability(s.model, &s.params, &controls, brdfe).expect("classify");
        c.check(
            &format!("BRDFE at c = {level}"),
            classified.stability == Some(expected),
            format!(
                "{:?} (leading Re = {:.3e})",
                classified.stability,
                classified.leading_eigenvalue_real_part.unwrap()
            ),
        );
    }
    c.finish();
}

#[test]
fn c03_pulse_budget_table() {
    let mut c = Criterion::new("C3 insecticide budget table");
    let s = presets::cape_verde_seir_asei();
    let cases = [(6.0, 14.0), (7.0, 12.0), (10.0, 9.0), (15.0, 6.0), (30.0, 3.0)];
    for (period, expected) in cases {
        let schedule = ControlSchedule::pulse(period, 1.0 / period, 1.0);
        let (_, metrics) = simulate_schedule(&s, &[schedule]).expect("simulate");
        c.check(
            &format!("{period}-day pulse"),
            (metrics.total_control_amount[0] - expected).abs() < 1e-12,
            format!("amount = {} vs {expected}", metrics.total_control_amount[0]),
        );
    }
    let (_, metrics) =
        simulate_schedule(&s, &[ControlSchedule::constant(0.157)]).expect("simulate");
    c.check(
        "constant 0.157",
        (metrics.total_control_amount[0] - 13.188).abs() < 1e-12,
        format!("amount = {}", metrics.total_control_amount[0]),
    );
    c.finish();
}

#[test]
fn c04_transcription_sizes() {
    let mut c = Criterion::new("C4 transcription sizes");
    let s = presets::dengue_goodwill();
    let oc = OcProblem::from_scenario(&s).unwrap();
    let mayer = to_mayer(&oc.problem);
    let reference = [
        (Scheme::Euler, 0.5, 727.0, 519.0),
        (Scheme::Euler, 0.25, 1455.0, 1039.0),
        (Scheme::Euler, 0.125, 2911.0, 2079.0),
        (Scheme::Rk2, 0.5, 728.0, 520.0),
        (Scheme::Rk2, 0.25, 1456.0, 1040.0),
        (Scheme::Rk2, 0.125, 2912.0, 2080.0),
    ];
    for (scheme, h, vars, constraints) in reference {
        let nlp = transcribe(&mayer, &oc.grid, &oc.initial, scheme, h).expect("transcribe");
        let dv = (nlp.n_vars as f64 - vars).abs() / vars;
        let dc = (nlp.n_constraints as f64 - constraints).abs() / constraints;
        c.check(
            &format!("{scheme:?} h={h} vars"),
            dv <= 0.02,
            format!("{} vs {vars} ({:.2}%)", nlp.n_vars, dv * 100.0),
        );
        c.check(
            &format!("{scheme:?} h={h} constraints"),
            dc <= 0.02,
            format!("{} vs {constraints} ({:.2}%)", nlp.n_constraints, dc * 100.0),
        );
    }
    c.finish();
}

#[test]
fn c05_goodwill_direct_objective() {
    let mut c = Criterion::new("C5 seasonal-model direct solve");
    let sol = direct_solution(&presets::dengue_goodwill(), None);
    c.check(
        "converged",
        sol.converged,
        format!("pg iterations = {}", sol.iterations),
    );
    // the reference value is the transcribed NLP cost
    let nlp_objective = sol.solver_objective();
    c.check(
        "objective in [1e-3, 6e-3]",
        (1e-3..=6e-3).contains(&nlp_objective),
        format!("J = {nlp_objective:.4e}"),
    );
    c.finish();
}

#[test]
fn c06_cape_verde_case_a() {
    let mut c = Criterion::new("C6 Cape Verde case A objectives");
    let s = presets::cape_verde_seir_asei();
    let indirect = sweep_solution(&s, 1e-4, 300, 0.5);
    c.check("sweep converged", indirect.converged, String::new());
    c.within("sweep objective", indirect.objective, 0.0445, 0.15);
    // transversality and monotone accepted objectives
    let terminal = indirect.trajectory.costates.as_ref().unwrap().last().unwrap();
    c.check(
        "terminal costate row",
        terminal.iter().all(|v| v.abs() <= 1e-12),
        format!("max |lambda(tf)| = {:.2e}", terminal.iter().fold(0.0_f64, |a, v| a.max(v.abs()))),
    );
    let monotone = indirect
        .objective_history
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
    c.check("sweep objective monotone", monotone, String::new());

    let direct = direct_solution(&s, Some(10));
    c.check("direct converged", direct.converged, String::new());
    c.within("direct objective", direct.objective, 0.0470, 0.15);
    let gap = (direct.objective - indirect.objective).abs() / indirect.objective;
    c.check(
        "solver agreement",
        gap <= 0.15,
        format!("relative gap = {:.2}%", gap * 100.0),
    );
    c.finish();
}

#[test]
fn c07_vaccination_cost_table() {
    let mut c = Criterion::new("C7 vaccination cost table");
    let epi = presets::vaccine_epidemic();
    let end = presets::vaccine_endemic();

    let epi_sweep = sweep_solution(&epi, 1e-4, 500, 0.3);
    let epi_direct = direct_solution(&epi, Some(10));
    let end_sweep = sweep_solution(&end, 1e-6, 800, 0.3);
    let end_direct = direct_solution(&end, Some(10));
    for (label, sol) in [
        ("epidemic sweep", &epi_sweep),
        ("epidemic direct", &epi_direct),
        ("endemic sweep", &end_sweep),
        ("endemic direct", &end_direct),
    ] {
        c.check(
            &format!("{label} converged"),
            sol.converged,
            format!("iterations = {}", sol.iterations),
        );
    }

    c.check(
        "epidemic ordering indirect <= direct",
        epi_sweep.objective <= epi_direct.objective,
        format!("{:.6e} vs {:.6e}", epi_sweep.objective, epi_direct.objective),
    );
    c.check(
        "endemic ordering indirect <= direct",
        end_sweep.objective <= end_direct.objective,
        format!("{:.6e} vs {:.6e}", end_sweep.objective, end_direct.objective),
    );

    c.within("epidemic direct objective", epi_direct.objective, 0.075, 0.25);
    c.within("epidemic indirect objective", epi_sweep.objective, 0.061, 0.25);
    c.within("endemic direct objective", end_direct.objective, 0.00189, 0.35);
    c.within("endemic indirect objective", end_sweep.objective, 0.00081, 0.50);

    // pure simulations: no control and full-capacity control
    let oc = OcProblem::from_scenario(&epi).unwrap();
    let n = normalize_scenario(&epi).unwrap();
    let (traj0, _) = simulate_schedule(&n, &[ControlSchedule::constant(0.0)]).unwrap();
    let j0 = trajectory_objective(&oc.problem, &traj0);
    c.within("epidemic no-control objective", j0, 0.3233, 0.10);
    let upper = match &epi.control {
        ControlSpec::Optimize { upper, .. } => upper[0],
        _ => unreachable!(),
    };
    let (traj1, _) = simulate_schedule(&n, &[ControlSchedule::constant(upper)]).unwrap();
    let j1 = trajectory_objective(&oc.problem, &traj1);
    c.within("epidemic upper-control objective", j1, 147.825, 0.05);
    c.finish();
}

#[test]
fn c08_analytic_benchmarks() {
    let mut c = Criterion::new("C8 analytic benchmarks");
    let p = LinExpProblem;
    let grid = epioc::scenario::TimeGrid {
        t0: 0.0,
        tf: 2.0,
        n_steps: 2000, // h = 1e-3
    };
    let shot = single_shooting(
        &p,
        &grid,
        &[p.x0()],
        &[0.0],
        &TerminalCondition::Transversality,
        &ShootingConfig::default(),
    )
    .expect("shooting");
    let traj = &shot.trajectory;
    let controls = traj.controls.as_ref().unwrap();
    let costates = traj.costates.as_ref().unwrap();
    let mut err_u: f64 = 0.0;
    let mut err_x: f64 = 0.0;
    let mut err_l: f64 = 0.0;
    for (i, t) in traj.times.iter().enumerate() {
        err_u = err_u.max((controls[i][0] - p.u_star(*t)).abs());
        err_x = err_x.max((traj.states[i][0] - p.x_star(*t)).abs());
        err_l = err_l.max((costates[i][0] - p.lambda_star(*t)).abs());
    }
    c.check("u error < 1e-4", err_u < 1e-4, format!("{err_u:.2e}"));
    c.check("x error < 1e-4", err_x < 1e-4, format!("{err_x:.2e}"));
    c.check("lambda error < 1e-4", err_l < 1e-4, format!("{err_l:.2e}"));
    c.check(
        "lambda(2) = 0 within 1e-8",
        costates.last().unwrap()[0].abs() <= 1e-8,
        format!("{:.2e}", costates.last().unwrap()[0]),
    );

    // the sweep lands on the same objective
    let swept = sweep(
        &p,
        &grid,
        &[p.x0()],
        &SweepConfig {
            tol: 1e-10,
            max_iter: 500,
            relaxation: 0.5,
        },
    )
    .expect("sweep");
    let rel = (swept.objective - shot.objective).abs() / shot.objective.abs();
    c.check(
        "sweep vs shooting objective",
        rel <= 1e-6,
        format!("relative difference {rel:.2e}"),
    );

    // payoff benchmark
    let tp = TumorPayoffProblem { alpha: 1.0, tf: 1.0 };
    let sol = tumor_payoff_demo(1.0, 1.0, 1.0).expect("payoff demo");
    let traj = &sol.trajectory;
    let controls = traj.controls.as_ref().unwrap();
    let costates = traj.costates.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    for (i, t) in traj.times.iter().enumerate() {
        worst = worst.max((costates[i][0] - tp.lambda_star(*t)).abs());
        worst = worst.max((traj.states[i][0] - tp.x_star(1.0, *t)).abs());
        worst = worst.max((controls[i][0] - tp.u_star(*t)).abs());
    }
    c.check(
        "payoff benchmark < 1e-5",
        worst < 1e-5,
        format!("max error {worst:.2e}"),
    );
    c.finish();
}

// ---------------------------------------------------------------------------
// criterion 9: property suites

fn jitter_params(
    model: ModelId,
    base: &ParameterSet,
    rng: &mut StdRng,
    zeroed: &[&str],
) -> ParameterSet {
    let mut p = ParameterSet::default();
    for name in model.required_params() {
        if zeroed.contains(name) {
            p.set(name, 0.0);
            continue;
        }
        let v = base
            .try_get(name)
            .unwrap_or_else(|| panic!("missing base value for {name}"));
        let factor = (rng.gen_range(-0.3_f64..0.3)).exp();
        let mut value = v * factor;
        if matches!(*name, "beta_mh" | "beta_hm" | "p" | "q" | "sigma" | "psi") {
            value = value.min(1.0);
        }
        if *name == "N_h" {
            value = v; // population scale stays fixed
        }
        p.set(name, value);
    }
    p
}

fn svir_base(kind: ModelId) -> ParameterSet {
    let epi = presets::vaccine_epidemic();
    let mut p = ParameterSet::default();
    for name in kind.required_params() {
        let v = match *name {
            "p" => 0.3,
            "psi" => 0.2,
            "sigma" => 0.4,
            "theta" => 0.05,
            other => epi.params.get(other),
        };
        p.set(name, v);
    }
    p
}

fn classic_base(model: ModelId) -> ParameterSet {
    match model {
        ModelId::Sis | ModelId::SirNoDemo => {
            ParameterSet::from_pairs(&[("beta", 0.9), ("gamma", 0.4)])
        }
        ModelId::SirDemo => {
            ParameterSet::from_pairs(&[("beta", 1.2), ("gamma", 0.5), ("mu", 0.02)])
        }
        ModelId::Seir => ParameterSet::from_pairs(&[
            ("beta", 1.2),
            ("gamma", 0.4),
            ("mu", 0.02),
            ("nu", 0.3),
        ]),
        ModelId::Mseir => ParameterSet::from_pairs(&[
            ("beta", 1.2),
            ("delta", 0.2),
            ("gamma", 0.4),
            ("mu", 0.02),
            ("nu", 0.3),
        ]),
        ModelId::Seit => ParameterSet::from_pairs(&[
            ("beta1", 1.0),
            ("beta2", 0.4),
            ("mu", 0.02),
            ("nu", 0.25),
            ("q", 0.7),
            ("r1", 0.1),
            ("r2", 0.3),
        ]),
        _ => unreachable!(),
    }
}

/// Models with a closed-form R0, their base parameters and the coverage
/// names pinned to zero (the vaccinated closed forms follow a
/// transmission-cycle convention rather than the spectral radius).
fn r0_test_set() -> Vec<(ModelId, ParameterSet, Vec<&'static str>)> {
    let mut set: Vec<(ModelId, ParameterSet, Vec<&'static str>)> = vec![
        (ModelId::Sis, classic_base(ModelId::Sis), vec![]),
        (ModelId::SirNoDemo, classic_base(ModelId::SirNoDemo), vec![]),
        (ModelId::SirDemo, classic_base(ModelId::SirDemo), vec![]),
        (ModelId::Seir, classic_base(ModelId::Seir), vec![]),
        (ModelId::Mseir, classic_base(ModelId::Mseir), vec![]),
        (ModelId::Seit, classic_base(ModelId::Seit), vec![]),
        (
            ModelId::SirAsi,
            presets::cape_verde_sir_asi().params,
            vec![],
        ),
        (
            ModelId::SirAsiVaccineControl,
            presets::vaccine_epidemic().params,
            vec![],
        ),
        (ModelId::SvirPediatric, svir_base(ModelId::SvirPediatric), vec!["p"]),
        (ModelId::SvirMass, svir_base(ModelId::SvirMass), vec!["psi"]),
        (
            ModelId::SvirImperfect,
            svir_base(ModelId::SvirImperfect),
            vec!["psi"],
        ),
        (ModelId::SvirWaning, svir_base(ModelId::SvirWaning), vec!["psi"]),
    ];
    // the SEIR+ASEI closed form is exact at zero adulticide
    set.push((
        ModelId::SeirAsei,
        presets::cape_verde_seir_asei().params,
        vec![],
    ));
    set
}

#[test]
fn c09_property_suites() {
    let mut c = Criterion::new("C9 property suites");
    let mut rng = StdRng::seed_from_u64(20120914);

    // integrator order regression on y' = y
    {
        let f = |_t: f64, x: &[f64], _u: &[f64], dx: &mut [f64]| dx[0] = x[0];
        let slope = |method: Method| -> f64 {
            let mut log_h = Vec::new();
            let mut log_e = Vec::new();
            for p in 4..=10 {
                let n = 1usize << p;
                let grid = epioc::scenario::TimeGrid {
                    t0: 0.0,
                    tf: 1.0,
                    n_steps: n,
                };
                let traj =
                    integrate_grid(&f, &grid, &[1.0], &constant_controls(&[], n + 1), method)
                        .unwrap();
                log_h.push((1.0 / n as f64).ln());
                log_e.push((traj.final_state()[0] - 1.0_f64.exp()).abs().ln());
            }
            let n = log_h.len() as f64;
            let mx = log_h.iter().sum::<f64>() / n;
            let my = log_e.iter().sum::<f64>() / n;
            let num: f64 = log_h.iter().zip(&log_e).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = log_h.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        };
        for (method, expected, tol) in [
            (Method::Euler, 1.0, 0.1),
            (Method::Rk2, 2.0, 0.15),
            (Method::Rk4, 4.0, 0.2),
        ] {
            let s = slope(method);
            c.check(
                &format!("{method:?} order"),
                (s - expected).abs() <= tol,
                format!("slope {s:.3} vs {expected} +- {tol}"),
            );
        }
    }

    // next-generation vs closed form, equilibrium residuals and stability
    // signs over 50 random draws per model
    for (model, base, zeroed) in r0_test_set() {
        let mut worst_rel: f64 = 0.0;
        let mut worst_res: f64 = 0.0;
        let mut sign_ok = true;
        let mut draws = 0;
        while draws < 50 {
            let p = jitter_params(model, &base, &mut rng, &zeroed);
            if p.validate_for(model).is_err() {
                continue;
            }
            let controls = model.neutral_controls();
            if model.is_host_vector() {
                match offspring_quantity(model, &p, &controls) {
                    Ok(m) if m > 0.0 => {}
                    _ => continue,
                }
            }
            let closed = match closed_form_r0(model, &p, &controls) {
                Ok(r) => r.value,
                Err(_) => continue,
            };
            if closed <= 0.0 {
                continue;
            }
            draws += 1;
            let eq = find_equilibria(model, &p, &controls).expect("equilibria");
            for point in &eq {
                let scale = point.state.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
                worst_res = worst_res.max(point.residual / scale);
            }
            let dfe = eq
                .iter()
                .find(|e| e.kind == EquilibriumKind::Brdfe)
                .or_else(|| eq.iter().find(|e| e.kind == EquilibriumKind::TrivialDfe))
                .expect("disease-free point");
            let ng = next_generation_r0(model, &p, &controls, dfe).expect("next generation");
            worst_rel = worst_rel.max((ng.value - closed).abs() / closed);

            if (ng.value - 1.0).abs() > 1e-3 {
                let classified = classify_stability(model, &p, &controls, dfe).unwrap();
                let stable_side = ng.value < 1.0;
                let observed_unstable = classified.stability == Some(Stability::Unstable);
                if stable_side == observed_unstable {
                    sign_ok = false;
                }
            }
        }
        c.check(
            &format!("{model} NGM vs closed form"),
            worst_rel < 1e-10,
            format!("worst relative difference {worst_rel:.2e}"),
        );
        c.check(
            &format!("{model} equilibrium residuals"),
            worst_res < RESIDUAL_TOL,
            format!("worst residual {worst_res:.2e}"),
        );
        c.check(&format!("{model} stability sign"), sign_ok, String::new());
    }

    // adjoint systems match finite differences of -H
    {
        let oc_models: Vec<(Scenario, Vec<(f64, f64)>)> = vec![
            (presets::dengue_goodwill(), vec![(0.0, 1.0); 2]),
            (presets::rubella(), vec![(0.0, 0.9)]),
            (presets::cape_verde_seir_asei(), vec![(0.0, 1.0)]),
            (
                presets::cape_verde_sir_asi(),
                vec![(0.0, 1.0), (0.0, 1.0), (0.01, 1.0)],
            ),
            (presets::vaccine_epidemic(), vec![(0.0, 0.9)]),
        ];
        for (s, bounds) in oc_models {
            let def = ModelDefinition::for_scenario(&s);
            let dim = s.model.state_dim();
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let t = rng.gen_range(s.grid.t0..s.grid.tf);
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.2)).collect();
                let l: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u: Vec<f64> = bounds
                    .iter()
                    .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                    .collect();
                let adjoint = def
                    .adjoint_rhs(&s.params, &s.weights, t, &x, &l, &u)
                    .expect("adjoint");
                // relative to the gradient scale: finite differences cannot
                // certify components that are vanishingly small next to it
                let floor =
                    1e-3 * adjoint.iter().fold(0.0_f64, |a, v| a.max(v.abs())) + 1e-12;
                let h_scale = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                for j in 0..dim {
                    let h = h_scale * x[j].abs().max(1.0);
                    xp[j] = x[j] + h;
                    xm[j] = x[j] - h;
                    let hp = def.hamiltonian(&s.params, &s.weights, t, &xp, &l, &u).unwrap();
                    let hm = def.hamiltonian(&s.params, &s.weights, t, &xm, &l, &u).unwrap();
                    xp[j] = x[j];
                    xm[j] = x[j];
                    let fd = -(hp - hm) / (2.0 * h);
                    let denom = adjoint[j].abs().max(fd.abs()).max(floor);
                    worst = worst.max((adjoint[j] - fd).abs() / denom);
                }
            }
            c.check(
                &format!("{} adjoint vs finite differences", s.model),
                worst < 1e-5,
                format!("worst relative difference {worst:.2e}"),
            );
        }
    }

    // discrete-adjoint gradient of the reduced objective
    {
        let s = presets::dengue_goodwill();
        let oc = OcProblem::from_scenario(&s).unwrap();
        let mayer = to_mayer(&oc.problem);
        let nlp = transcribe(&mayer, &oc.grid, &oc.initial, Scheme::Euler, 0.25).unwrap();
        let controls: Vec<Vec<f64>> = (0..nlp.nodes())
            .map(|_| vec![rng.gen_range(0.05..0.5), rng.gen_range(0.05..0.5)])
            .collect();
        let grad = nlp.reduced_gradient(&controls);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let node = rng.gen_range(0..nlp.nodes() - 1);
            let comp = rng.gen_range(0..2);
            let eps = 1e-6;
            let mut up = controls.clone();
            let mut dn = controls.clone();
            up[node][comp] += eps;
            dn[node][comp] -= eps;
            let fd = (nlp.reduced_objective(&up) - nlp.reduced_objective(&dn)) / (2.0 * eps);
            let denom = fd.abs().max(grad[node][comp].abs()).max(1e-8);
            worst = worst.max((grad[node][comp] - fd).abs() / denom);
        }
        c.check(
            "discrete adjoint vs finite differences",
            worst < 1e-5,
            format!("worst relative difference {worst:.2e}"),
        );
    }

    // human-population conservation along rk4
    for s in [
        presets::cape_verde_seir_asei_absolute(),
        presets::cape_verde_sir_asi_absolute(),
    ] {
        let def = ModelDefinition::for_scenario(&s);
        let field = def.field(&s.params);
        let grid = epioc::scenario::TimeGrid {
            t0: 0.0,
            tf: 365.0,
            n_steps: 3650,
        };
        let controls = constant_controls(&s.model.neutral_controls(), grid.n_steps + 1);
        let traj = integrate_grid(&field, &grid, &s.initial, &controls, Method::Rk4).unwrap();
        let human_dim = if s.model == ModelId::SeirAsei { 4 } else { 3 };
        let nh = s.params.get("N_h");
        let worst = traj
            .states
            .iter()
            .map(|row| (row[..human_dim].iter().sum::<f64>() - nh).abs() / nh)
            .fold(0.0_f64, f64::max);
        c.check(
            &format!("{} human conservation", s.model),
            worst < 1e-6,
            format!("worst relative drift {worst:.2e}"),
        );
    }

    // nonnegativity of rk45 trajectories on every preset
    for (name, s) in presets::list() {
        let schedules: Vec<ControlSchedule> = s
            .model
            .neutral_controls()
            .iter()
            .map(|l| ControlSchedule::constant(*l))
            .collect();
        let (traj, _) = simulate_schedule(&s, &schedules).expect(name);
        let scale = traj.max_abs_state().max(1.0);
        let min = traj
            .states
            .iter()
            .flat_map(|row| row.iter())
            .fold(f64::INFINITY, |a, v| a.min(*v));
        c.check(
            &format!("{name} nonnegativity"),
            min >= -1e-9 * scale,
            format!("min component {min:.2e} at scale {scale:.2e}"),
        );
    }

    // vaccination threshold monotonicity
    {
        let base = svir_base(ModelId::SvirPediatric);
        let r0_at = |model: ModelId, name: &str, v: f64| -> f64 {
            let mut p = svir_base(model);
            p.set(name, v);
            closed_form_r0(model, &p, &[]).unwrap().value
        };
        let mut dec_p = true;
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let r = r0_at(ModelId::SvirPediatric, "p", i as f64 / 10.0);
            if r >= prev {
                dec_p = false;
            }
            prev = r;
        }
        c.check("R0^p decreasing in p", dec_p, String::new());

        let mut dec_psi = true;
        prev = f64::INFINITY;
        for i in 0..=10 {
            let r = r0_at(ModelId::SvirMass, "psi", 0.01 + i as f64 * 0.09);
            if r >= prev {
                dec_psi = false;
            }
            prev = r;
        }
        c.check("R0^psi decreasing in psi", dec_psi, String::new());

        let mut inc_sigma = true;
        prev = f64::NEG_INFINITY;
        for i in 0..=10 {
            let r = r0_at(ModelId::SvirImperfect, "sigma", i as f64 / 10.0);
            if r <= prev {
                inc_sigma = false;
            }
            prev = r;
        }
        c.check("R0^sigma increasing in sigma", inc_sigma, String::new());

        let mut p_imp = svir_base(ModelId::SvirImperfect);
        p_imp.set("sigma", 0.0);
        let r_imp = closed_form_r0(ModelId::SvirImperfect, &p_imp, &[]).unwrap().value;
        let r_mass = closed_form_r0(ModelId::SvirMass, &svir_base(ModelId::SvirMass), &[])
            .unwrap()
            .value;
        c.check(
            "R0^sigma at sigma=0 equals R0^psi",
            (r_imp - r_mass).abs() < 1e-14,
            format!("{r_imp} vs {r_mass}"),
        );

        let mut all_equal = true;
        for theta in [0.0, 0.05, 0.2, 0.7] {
            let mut p = svir_base(ModelId::SvirWaning);
            p.set("theta", theta);
            let r = closed_form_r0(ModelId::SvirWaning, &p, &[]).unwrap().value;
            if (r - r_mass).abs() > 1e-14 {
                all_equal = false;
            }
        }
        c.check("R0^theta equals R0^psi for all theta", all_equal, String::new());
        let _ = base;
    }
    c.finish();
}

#[test]
fn c10_control_effect_checks() {
    let mut c = Criterion::new("C10 qualitative control effects");

    // quarter-coverage adulticide collapses the outbreak peak
    {
        let s = presets::cape_verde_sir_asi();
        let sweep_vals =
            epioc::strategies::parameter_sweep(&s, "c_m", &[0.0, 0.25]).expect("sweep");
        let (off, on) = (sweep_vals[0].1.peak_infected, sweep_vals[1].1.peak_infected);
        c.check(
            "adulticide 0.25 cuts peak by > 90%",
            on < 0.1 * off,
            format!("peaks {off:.4e} -> {on:.4e}"),
        );
    }

    // newborn vaccination cannot influence a fast outbreak
    {
        let epi = presets::vaccine_epidemic();
        let mut peaks = Vec::new();
        for p in [0.0, 1.0] {
            let mut params = ParameterSet::default();
            for name in ModelId::SvirPediatric.required_params() {
                let v = if *name == "p" { p } else { epi.params.get(name) };
                params.set(name, v);
            }
            let s = Scenario {
                model: ModelId::SvirPediatric,
                normalized: false,
                time_unit: epioc::scenario::TimeUnit::Days,
                params,
                initial: StateVector(vec![
                    479990.0, 0.0, 10.0, 0.0, 1_440_000.0, 1_440_000.0, 0.0,
                ]),
                grid: epioc::scenario::TimeGrid {
                    t0: 0.0,
                    tf: 365.0,
                    n_steps: 1460,
                },
                control: ControlSpec::Constant { levels: vec![] },
                weights: Default::default(),
                solver: Default::default(),
                notes: vec![],
            };
            let (_, m) = simulate_schedule(&s, &[]).expect("svir simulate");
            peaks.push(m.peak_infected);
        }
        let diff = (peaks[0] - peaks[1]).abs() / peaks[0];
        c.check(
            "pediatric coverage changes epidemic peak by < 5%",
            diff < 0.05,
            format!("peaks {:.1} vs {:.1} ({:.2}%)", peaks[0], peaks[1], diff * 100.0),
        );

        // mass vaccination of 5% per day crushes the same outbreak
        let mut params = ParameterSet::default();
        for name in ModelId::SvirMass.required_params() {
            let v = if *name == "psi" { 0.05 } else { epi.params.get(name) };
            params.set(name, v);
        }
        let s = Scenario {
            model: ModelId::SvirMass,
            normalized: false,
            time_unit: epioc::scenario::TimeUnit::Days,
            params,
            initial: StateVector(vec![
                479990.0, 0.0, 10.0, 0.0, 1_440_000.0, 1_440_000.0, 0.0,
            ]),
            grid: epioc::scenario::TimeGrid {
                t0: 0.0,
                tf: 365.0,
                n_steps: 1460,
            },
            control: ControlSpec::Constant { levels: vec![] },
            weights: Default::default(),
            solver: Default::default(),
            notes: vec![],
        };
        let (_, m) = simulate_schedule(&s, &[]).expect("svir mass simulate");
        c.check(
            "mass vaccination 0.05 cuts peak by > 95%",
            m.peak_infected < 0.05 * peaks[0],
            format!("peak {:.1} vs no-vaccine {:.1}", m.peak_infected, peaks[0]),
        );
    }
    c.finish();
}
