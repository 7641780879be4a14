//! The acceptance battery: each criterion is a self-contained check with a
//! pinned tolerance, runnable from the CLI and from the test suite.

use super::envs::{builtin_environments, environment_by_name, Environment, SideInfoTier};
use super::oracle;
use crate::inclusion::{contract_sample, DataPoint, Dataset, DiffInclusion, SideInfo};
use crate::interval::{
    monomial_ext, monomial_point, weighted_norm_ext, Interval, IntervalMatrix, IntervalVector,
};
use crate::lp::{self, Constraint, LinearProgram, LpStatus, Relation};
use crate::reach;
use crate::scp::{self, EpisodeConfig, Selector, TrustRegion};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Clone, Debug, serde::Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:<24} {}  ({:.2}s)  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Interval,
    Contraction,
    Reach,
    Scp,
    Theorem3,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "interval" => Some(Suite::Interval),
            "contraction" => Some(Suite::Contraction),
            "reach" => Some(Suite::Reach),
            "scp" => Some(Suite::Scp),
            "theorem3" => Some(Suite::Theorem3),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn criteria(&self) -> Vec<usize> {
        match self {
            Suite::Interval => vec![1],
            Suite::Contraction => vec![2, 3, 5],
            Suite::Reach => vec![4],
            Suite::Scp => vec![6, 9],
            Suite::Theorem3 => vec![7, 8],
            Suite::All => (1..=9).collect(),
        }
    }
}

pub fn run_criterion(id: usize) -> CriterionReport {
    match id {
        1 => criterion_1_interval_soundness(),
        2 => criterion_2_contraction_optimality(),
        3 => criterion_3_inclusion_soundness(),
        4 => criterion_4_reach_containment(),
        5 => criterion_5_monotonicity(),
        6 => criterion_6_scp_vs_oracle(),
        7 => criterion_7_suboptimality_bound(),
        8 => criterion_8_end_to_end_episode(),
        9 => criterion_9_lp_correctness(),
        _ => panic!("unknown criterion {id}"),
    }
}

pub fn run_suite(suite: Suite) -> Vec<CriterionReport> {
    suite.criteria().into_iter().map(run_criterion).collect()
}

fn report(
    id: usize,
    name: &'static str,
    started: Instant,
    passed: bool,
    detail: String,
) -> CriterionReport {
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// Random interval with endpoints in [-scale, scale], occasionally thin.
fn random_interval(rng: &mut ChaCha8Rng, scale: f64) -> Interval {
    let a: f64 = rng.random_range(-scale..scale);
    if rng.random_range(0..8) == 0 {
        return Interval::point(a);
    }
    let b: f64 = rng.random_range(-scale..scale);
    Interval::new(a.min(b), a.max(b))
}

fn point_in(rng: &mut ChaCha8Rng, iv: Interval) -> f64 {
    if iv.is_point() {
        iv.lo()
    } else {
        let t: f64 = rng.random_range(0.0..=1.0);
        (iv.lo() + t * iv.width()).clamp(iv.lo(), iv.hi())
    }
}

/// Criterion 1: exact pointwise results lie inside interval results for
/// every primitive, over 1e5 random instances each.
pub fn criterion_1_interval_soundness() -> CriterionReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    const TRIALS: usize = 100_000;
    let mut violations = 0usize;
    let mut checked = 0usize;

    for _ in 0..TRIALS {
        let a = random_interval(&mut rng, 50.0);
        let b = random_interval(&mut rng, 50.0);
        let x = point_in(&mut rng, a);
        let y = point_in(&mut rng, b);
        if !(a + b).contains(x + y) {
            violations += 1;
        }
        if !(a - b).contains(x - y) {
            violations += 1;
        }
        if !(a * b).contains(x * y) {
            violations += 1;
        }
        checked += 3;
        if !b.contains(0.0) {
            if !a.checked_div(b).unwrap().contains(x / y) {
                violations += 1;
            }
            checked += 1;
        }
        if !a.sq().contains(x * x) {
            violations += 1;
        }
        checked += 1;
        if a.lo() >= 0.0 {
            if !a.sqrt().contains(x.sqrt()) {
                violations += 1;
            }
            checked += 1;
        }
        // inclusion monotonicity spot check on the product
        let a2 = a.inflate(0.1, 0.01);
        let b2 = b.inflate(0.1, 0.01);
        if !(a * b).subset_of(&(a2 * b2)) {
            violations += 1;
        }
        checked += 1;
    }

    // weighted norm and monomial extensions against interior sampling
    for _ in 0..TRIALS / 10 {
        let dim = rng.random_range(1..=3usize);
        let v: IntervalVector = (0..dim).map(|_| random_interval(&mut rng, 5.0)).collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..3.0)).collect();
        let norm = weighted_norm_ext(&v, &w).unwrap();
        let alpha: Vec<u32> = (0..dim).map(|_| rng.random_range(0..=3u32)).collect();
        let mono = monomial_ext(&v, &alpha).unwrap();
        for _ in 0..10 {
            let pt: Vec<f64> = v.iter().map(|iv| point_in(&mut rng, *iv)).collect();
            let exact_norm = pt
                .iter()
                .zip(&w)
                .map(|(x, wi)| (wi * x).powi(2))
                .sum::<f64>()
                .sqrt();
            if !norm.contains(exact_norm) {
                violations += 1;
            }
            if !mono.contains(monomial_point(&pt, &alpha)) {
                violations += 1;
            }
            checked += 2;
        }
    }

    let passed = violations == 0 && started.elapsed().as_secs_f64() < 10.0;
    report(
        1,
        "interval_soundness",
        started,
        passed,
        format!("{checked} containment checks, {violations} violations"),
    )
}

/// Criterion 2: the data-consistency contraction equals the brute-force
/// hull on random scalar instances with up to two control terms.
pub fn criterion_2_contraction_optimality() -> CriterionReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    const INSTANCES: usize = 200;
    const STEP: f64 = 1e-3;
    let mut failures = 0usize;
    let mut worst: f64 = 0.0;

    for trial in 0..INSTANCES {
        let d = 1 + (trial % 2);
        let mk_box = |rng: &mut ChaCha8Rng| {
            let c: f64 = rng.random_range(-1.5..1.5);
            let w: f64 = rng.random_range(0.2..1.8);
            Interval::new(c - 0.5 * w, c + 0.5 * w)
        };
        let f_box = mk_box(&mut rng);
        let g_boxes: Vec<Interval> = (0..d).map(|_| mk_box(&mut rng)).collect();
        // control magnitude in [0.5, 2], occasionally exactly zero
        let u: f64 = if trial % 17 == 0 {
            0.0
        } else {
            let mag: f64 = rng.random_range(0.5..2.0);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        };
        let exponents: Vec<Vec<u32>> = (1..=d as u32).map(|e| vec![e]).collect();
        let monos: Vec<f64> = exponents.iter().map(|a| monomial_point(&[u], a)).collect();
        // consistent observation from interior points
        let f_true = point_in(&mut rng, f_box);
        let g_true: Vec<f64> = g_boxes.iter().map(|b| point_in(&mut rng, *b)).collect();
        let xdot =
            f_true + g_true.iter().zip(&monos).map(|(g, m)| g * m).sum::<f64>();

        let side = SideInfo::lipschitz(
            vec![1.0],
            exponents.clone(),
            1e6,
            vec![1.0],
            vec![vec![1.0]; d],
        );
        let dp = DataPoint::new(vec![0.0], vec![xdot], vec![u]);
        let f_enc = IntervalVector::new(vec![f_box]);
        let g_enc = IntervalMatrix::new(d, 1, g_boxes.clone());
        let (cf, cg) = contract_sample(&dp, &f_enc, &g_enc, &side).expect("consistent instance");

        // brute force: grid the free values, solve the last control term
        let mut hull_f: Option<(f64, f64)> = None;
        let mut hull_g: Vec<Option<(f64, f64)>> = vec![None; d];
        let absorb = |hull: &mut Option<(f64, f64)>, v: f64| {
            *hull = Some(match hull {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        };
        let grid = |b: Interval| -> Vec<f64> {
            let steps = (b.width() / STEP).ceil().max(1.0) as usize;
            (0..=steps)
                .map(|i| b.lo() + b.width() * i as f64 / steps as f64)
                .collect()
        };
        if d == 1 {
            if monos[0] != 0.0 {
                for f in grid(f_box) {
                    let g = (xdot - f) / monos[0];
                    if g_boxes[0].contains(g) {
                        absorb(&mut hull_f, f);
                        absorb(&mut hull_g[0], g);
                    }
                }
            } else if f_box.contains(xdot) {
                absorb(&mut hull_f, xdot);
                absorb(&mut hull_g[0], g_boxes[0].lo());
                absorb(&mut hull_g[0], g_boxes[0].hi());
            }
        } else if monos[1] != 0.0 {
            for f in grid(f_box) {
                for g1 in grid(g_boxes[0]) {
                    let g2 = (xdot - f - g1 * monos[0]) / monos[1];
                    if g_boxes[1].contains(g2) {
                        absorb(&mut hull_f, f);
                        absorb(&mut hull_g[0], g1);
                        absorb(&mut hull_g[1], g2);
                    }
                }
            }
        } else if f_box.contains(xdot) {
            absorb(&mut hull_f, xdot);
            for p in 0..d {
                absorb(&mut hull_g[p], g_boxes[p].lo());
                absorb(&mut hull_g[p], g_boxes[p].hi());
            }
        }

        // tolerance: grid resolution propagated through the solve, plus ulps
        let sens = if d == 2 && monos[1] != 0.0 {
            (1.0 + monos[0].abs()) / monos[1].abs()
        } else if monos[0] != 0.0 {
            1.0 / monos[0].abs()
        } else {
            1.0
        };
        let tol = STEP * (2.0 + sens) + 1e-12;
        let mut check = |enc: Interval, hull: Option<(f64, f64)>| {
            let (lo, hi) = hull.expect("instance is consistent");
            let err = (enc.lo() - lo).abs().max((enc.hi() - hi).abs());
            worst = worst.max(err / tol);
            if err > tol {
                failures += 1;
            }
        };
        check(cf[0], hull_f);
        for p in 0..d {
            if monos[p] != 0.0 || d == 1 {
                check(cg.get(p, 0), hull_g[p]);
            }
        }
    }

    let passed = failures == 0 && started.elapsed().as_secs_f64() < 30.0;
    report(
        2,
        "contraction_optimality",
        started,
        passed,
        format!("{INSTANCES} instances, {failures} failures, worst err/tol {worst:.3}"),
    )
}

/// Seeded excitation trajectory through the true system. Controls are
/// resampled when a step would leave the state domain; if the trajectory
/// still gets cornered the whole run restarts with a derived seed.
pub fn generate_trajectory_data(
    env: &Environment,
    steps: usize,
    seed: u64,
) -> (Dataset, Vec<Vec<f64>>) {
    'restart: for attempt in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 0x9e37));
        let mut data = Dataset::new();
        let mut x = env.x0.clone();
        let mut states = vec![x.clone()];
        for k in 0..steps {
            let mut accepted = None;
            for _ in 0..50 {
                let u = env.sample_control(&mut rng);
                let next = scp::Plant::step(env, &x, &u, env.dt);
                if env.x_dom.contains_point(&next) {
                    accepted = Some((u, next));
                    break;
                }
            }
            let Some((u, next)) = accepted else {
                continue 'restart;
            };
            let xdot = env.deriv(&x, &u);
            data.push(k as f64 * env.dt, DataPoint::new(x.clone(), xdot, u))
                .unwrap();
            x = next;
            states.push(x.clone());
        }
        return (data, states);
    }
    panic!("could not generate an in-domain excitation trajectory for {}", env.name);
}

/// Criterion 3: after a 50-sample episode, the inclusion contains the true
/// derivative at random probes, for every environment.
pub fn criterion_3_inclusion_soundness() -> CriterionReport {
    let started = Instant::now();
    let mut violations = 0usize;
    let mut probes_run = 0usize;
    let mut names = String::new();

    for env in builtin_environments() {
        let (data, _) = generate_trajectory_data(&env, 50, 303);
        let di = DiffInclusion::from_dataset(
            &data,
            env.side_info(SideInfoTier::LipschitzOnly),
            env.x_dom.clone(),
            env.u_dom.clone(),
        )
        .expect("trajectory data must be consistent");
        let mut rng = ChaCha8Rng::seed_from_u64(304);
        for _ in 0..1000 {
            let x = env.sample_state(&mut rng, 0.0);
            let u = env.sample_control(&mut rng);
            let truth = env.deriv(&x, &u);
            let h = di
                .eval_point_control(&IntervalVector::point(&x), &u)
                .expect("evaluation inside the domain");
            probes_run += 1;
            if !h.contains_point(&truth) {
                violations += 1;
            }
        }
        names.push_str(env.name);
        names.push(' ');
    }

    let passed = violations == 0 && started.elapsed().as_secs_f64() < 60.0;
    report(
        3,
        "inclusion_soundness",
        started,
        passed,
        format!("{probes_run} probes over [{}], {violations} violations", names.trim()),
    )
}

/// Criterion 4: high-accuracy flow endpoints stay inside the one-step
/// reachable box for random boxes, controls and step sizes.
pub fn criterion_4_reach_containment() -> CriterionReport {
    let started = Instant::now();
    let mut violations = 0usize;
    let mut enclosure_failures = 0usize;
    let mut total = 0usize;

    for env in builtin_environments() {
        let (data, _) = generate_trajectory_data(&env, 50, 404);
        let di = DiffInclusion::from_dataset(
            &data,
            env.side_info(SideInfoTier::LipschitzOnly),
            env.x_dom.clone(),
            env.u_dom.clone(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(405);
        for _ in 0..1000 {
            // draw until the rough enclosure certifies inside the domain;
            // boxes too close to the boundary cannot be certified and are
            // redrawn (the flow-in-domain assumption fails there)
            let (r, u, dt, step) = loop {
                let center = env.sample_state(&mut rng, 0.25);
                let n = env.state_dim();
                let r: IntervalVector = (0..n)
                    .map(|i| {
                        let h: f64 = rng.random_range(0.0..0.05);
                        Interval::new(center[i] - h, center[i] + h)
                    })
                    .collect();
                let u = env.sample_control(&mut rng);
                let dt: f64 = rng.random_range(0.005..=0.05);
                match reach::reach_step(&di, &r, &IntervalVector::point(&u), dt) {
                    Ok(s) => break (r, u, dt, s),
                    Err(_) => {
                        enclosure_failures += 1;
                        assert!(enclosure_failures < 4000, "too many enclosure failures");
                    }
                }
            };
            let _ = dt;
            total += 1;
            // oracle endpoints from the box center and random interior starts
            for trial in 0..3 {
                let x0: Vec<f64> = if trial == 0 {
                    r.mid()
                } else {
                    r.iter().map(|iv| point_in(&mut rng, *iv)).collect()
                };
                let rhs = |_t: f64, s: &[f64]| env.deriv(s, &u);
                let endpoint = oracle::rk45(&rhs, 0.0, &x0, dt, 1e-10, 1e-12).unwrap();
                let inside = endpoint.iter().zip(step.next.iter()).all(|(v, iv)| {
                    let slack = 1e-9 * (1.0 + v.abs());
                    *v >= iv.lo() - slack && *v <= iv.hi() + slack
                });
                if !inside {
                    violations += 1;
                }
            }
        }
    }

    let passed = violations == 0 && started.elapsed().as_secs_f64() < 120.0;
    report(
        4,
        "reach_containment",
        started,
        passed,
        format!(
            "{total} steps x3 endpoints, {violations} violations ({enclosure_failures} boundary draws redrawn)"
        ),
    )
}

/// Criterion 5: enclosure widths are non-increasing in the dataset prefix
/// (exact comparison) and in the side-information tier (fixpoint-polished,
/// 1e-9 slack), at fixed probe sets.
pub fn criterion_5_monotonicity() -> CriterionReport {
    let started = Instant::now();
    let mut violations = 0usize;
    let mut checks = 0usize;

    for env in builtin_environments() {
        let (data, _) = generate_trajectory_data(&env, 50, 505);
        let mut rng = ChaCha8Rng::seed_from_u64(506);
        let probes: Vec<IntervalVector> = (0..100)
            .map(|_| IntervalVector::point(&env.sample_state(&mut rng, 0.0)))
            .collect();
        let side = env.side_info(SideInfoTier::LipschitzOnly);

        // (a) dataset prefix growth, incremental refinement, exact
        let mut di = DiffInclusion::from_dataset(
            &Dataset::new(),
            side.clone(),
            env.x_dom.clone(),
            env.u_dom.clone(),
        )
        .unwrap();
        let mut prev: Vec<Vec<f64>> = Vec::new();
        for k in 1..=data.len() {
            let prefix = data.prefix(k);
            di.absorb(&prefix).unwrap();
            let mut cur = Vec::with_capacity(probes.len());
            for a in &probes {
                let (f, g) = di.value_enclosures(a).unwrap();
                let mut widths = f.widths();
                widths.extend(g.widths());
                cur.push(widths);
            }
            if !prev.is_empty() {
                for (pw, cw) in prev.iter().zip(&cur) {
                    for (p, c) in pw.iter().zip(cw) {
                        checks += 1;
                        if *c > *p {
                            violations += 1;
                        }
                    }
                }
            }
            prev = cur;
        }

        // (b) side-information tiers on the full dataset
        let mut tier_widths: Vec<Vec<Vec<f64>>> = Vec::new();
        for tier in SideInfoTier::ALL {
            let side = env.side_info(tier);
            let mut di = DiffInclusion::from_dataset(
                &data,
                side.clone(),
                env.x_dom.clone(),
                env.u_dom.clone(),
            )
            .unwrap();
            di.envelopes
                .sweep_to_fixpoint(&data, data.len(), &side, 1e-13, 500)
                .unwrap();
            let mut widths = Vec::with_capacity(probes.len());
            for a in &probes {
                let (f, g) = di.value_enclosures(a).unwrap();
                let mut w = f.widths();
                w.extend(g.widths());
                widths.push(w);
            }
            tier_widths.push(widths);
        }
        for t in 1..tier_widths.len() {
            for (pw, cw) in tier_widths[t - 1].iter().zip(&tier_widths[t]) {
                for (p, c) in pw.iter().zip(cw) {
                    checks += 1;
                    if *c > *p + 1e-9 * (1.0 + p) {
                        violations += 1;
                    }
                }
            }
        }
    }

    let passed = violations == 0;
    report(
        5,
        "monotonicity",
        started,
        passed,
        format!("{checks} width comparisons, {violations} violations"),
    )
}

/// Priming samples that pin the double integrator's unknown cofactors.
fn primed_double_integrator(tier: SideInfoTier) -> DiffInclusion {
    let env = environment_by_name("double_integrator").unwrap();
    let mut data = Dataset::new();
    for (i, (x, u)) in [
        (vec![0.3, 0.5], 1.0),
        (vec![-0.2, -0.4], -0.8),
        (vec![0.1, 0.7], 0.5),
    ]
    .into_iter()
    .enumerate()
    {
        let xdot = env.deriv(&x, &[u]);
        data.push(i as f64 * env.dt, DataPoint::new(x, xdot, vec![u]))
            .unwrap();
    }
    DiffInclusion::from_dataset(
        &data,
        env.side_info(tier),
        env.x_dom.clone(),
        env.u_dom.clone(),
    )
    .unwrap()
}

/// Criterion 6: with exact point enclosures on the double integrator, the
/// receding-horizon solve matches the finite-horizon Riccati optimum.
pub fn criterion_6_scp_vs_oracle() -> CriterionReport {
    let started = Instant::now();
    let env = environment_by_name("double_integrator").unwrap();
    let di = primed_double_integrator(SideInfoTier::KnownTerms);
    let dt = 0.05;
    let horizon = 3;
    let stages = horizon + 1;

    // the selected next-state map on point enclosures is the exact
    // zero-order-hold discretization
    let a_d = vec![vec![1.0, dt], vec![0.0, 1.0]];
    let b_d = vec![vec![0.5 * dt * dt], vec![dt]];
    let q = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let r = vec![vec![0.5]];

    let sel = Selector::uniform(0.5, 2).unwrap();
    let tr = TrustRegion::defaults_for(&env.u_dom);
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..20 {
        let x0 = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let iterate =
            scp::scp_solve(&x0, &di, &env.cost, &sel, &tr, horizon, dt).expect("scp solve");
        let total: f64 = iterate.stage_costs.iter().sum();
        let (_, c_star) = oracle::finite_horizon_lqr(&a_d, &b_d, &q, &r, &x0, stages);
        let gap = (total - c_star).abs();
        worst = worst.max(gap);
        if gap > 1e-4 {
            failures += 1;
        }
    }

    let passed = failures == 0 && started.elapsed().as_secs_f64() < 60.0;
    report(
        6,
        "scp_vs_oracle",
        started,
        passed,
        format!("20 initial states, worst |gap| {worst:.2e}"),
    )
}

/// Criterion 7: the measured optimality gap respects the width-based
/// certificate in every trial, and the certificate shrinks with data.
pub fn criterion_7_suboptimality_bound() -> CriterionReport {
    let started = Instant::now();
    let mut failures = 0usize;
    let mut trials = 0usize;
    let mut worst_margin: f64 = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    // the certificate is an episodic quantity: it is evaluated at states the
    // trial has visited, where the tube is certifiable
    let envs = ["pendulum", "duffing"];
    let sizes = [10usize, 30, 50];
    let mut inclusions: Vec<Vec<DiffInclusion>> = Vec::new();
    let mut visited: Vec<Vec<Vec<f64>>> = Vec::new();
    for name in envs {
        let env = environment_by_name(name).unwrap();
        let (data, states) = generate_trajectory_data(&env, 50, 708);
        let side = env.side_info(SideInfoTier::LipschitzOnly);
        let mut per_size = Vec::new();
        for k in sizes {
            let prefix = data.prefix(k);
            let di = DiffInclusion::from_dataset(
                &prefix,
                side.clone(),
                env.x_dom.clone(),
                env.u_dom.clone(),
            )
            .unwrap();
            per_size.push(di);
        }
        inclusions.push(per_size);
        visited.push(states);
    }

    for t in 0..100usize {
        let env_idx = t % 2;
        let horizon = 1 + (t / 2) % 3;
        let env = environment_by_name(envs[env_idx]).unwrap();
        let size_idx = (t / 6) % 3;
        let di = &inclusions[env_idx][size_idx];
        let x_j = visited[env_idx][rng.random_range(0..=sizes[size_idx])].clone();
        trials += 1;

        let step_result = (|| -> Result<(f64, f64, f64), String> {
            let (_, c_star, oracle_tol) =
                oracle::optimal_oracle(&env, &env.cost, &x_j, horizon, env.dt)
                    .map_err(|e| e.to_string())?;
            let sel = Selector::uniform(0.5, env.state_dim()).map_err(|e| e.to_string())?;
            let tr = TrustRegion::defaults_for(&env.u_dom);
            let iterate = scp::scp_solve(&x_j, di, &env.cost, &sel, &tr, horizon, env.dt)
                .map_err(|e| e.to_string())?;
            let c_hat = scp::plan_cost(di, &sel, &env.cost, &x_j, &iterate.controls, env.dt)
                .map_err(|e| e.to_string())?;
            let tube = reach::reach_over_controls(
                di,
                &IntervalVector::point(&x_j),
                &env.u_dom,
                env.dt,
                horizon,
            )
            .map_err(|e| e.to_string())?;
            let widths: Vec<Vec<f64>> = tube.iter().map(IntervalVector::widths).collect();
            let bound = reach::suboptimality_bound(&widths, env.cost.lc);
            Ok(((c_star - c_hat).abs(), bound, oracle_tol))
        })();
        match step_result {
            Ok((gap, bound, oracle_tol)) => {
                let slack = 1e-6 + oracle_tol * 0.1;
                worst_margin = worst_margin.min(bound - gap);
                if gap > bound + slack {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }

    // certificate decreases monotonically with data (both environments)
    let mut mono_violations = 0usize;
    for name in envs {
        let env = environment_by_name(name).unwrap();
        let (data, _) = generate_trajectory_data(&env, 50, 709);
        let side = env.side_info(SideInfoTier::LipschitzOnly);
        let x_j = env.x0.clone();
        let mut di = DiffInclusion::from_dataset(
            &Dataset::new(),
            side,
            env.x_dom.clone(),
            env.u_dom.clone(),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let prefix = data.prefix(k);
            di.absorb(&prefix).unwrap();
            if k < 5 {
                continue;
            }
            let tube = reach::reach_over_controls(
                &di,
                &IntervalVector::point(&x_j),
                &env.u_dom,
                env.dt,
                2,
            );
            let bound = match tube {
                Ok(t) => {
                    let widths: Vec<Vec<f64>> = t.iter().map(IntervalVector::widths).collect();
                    reach::suboptimality_bound(&widths, env.cost.lc)
                }
                Err(_) => f64::INFINITY,
            };
            if bound > prev * (1.0 + 1e-9) + 1e-9 {
                mono_violations += 1;
            }
            prev = prev.min(bound);
        }
    }

    let passed =
        failures == 0 && mono_violations == 0 && started.elapsed().as_secs_f64() < 300.0;
    report(
        7,
        "suboptimality_bound",
        started,
        passed,
        format!(
            "{trials} trials, {failures} gap violations, {mono_violations} monotonicity violations, tightest margin {worst_margin:.3}"
        ),
    )
}

/// Zero-control baseline stage costs for an environment.
pub fn zero_control_baseline(env: &Environment, steps: usize) -> Vec<f64> {
    let u0 = vec![0.0; env.control_dim()];
    let schedule = vec![u0.clone(); steps];
    let traj = oracle::ode_oracle(env, &env.x0, &schedule, env.dt, steps).unwrap();
    (0..steps)
        .map(|q| env.cost.eval(&traj[q], &u0, &traj[q + 1]))
        .collect()
}

/// Default episode configuration for an environment (seeded excitation on;
/// exploration is what makes the control terms identifiable at all).
pub fn default_episode_config(env: &Environment, steps: usize, seed: u64) -> EpisodeConfig {
    EpisodeConfig {
        steps,
        horizon: 2,
        dt: env.dt,
        theta: 0.5,
        p_excite: 0.1,
        seed,
        drop_inconsistent: false,
        tr: TrustRegion::defaults_for(&env.u_dom),
        with_bound: true,
    }
}

/// Criterion 8: a full 200-step pendulum episode with complete side
/// information beats half the zero-control baseline in the final quarter,
/// at interactive per-step cost.
pub fn criterion_8_end_to_end_episode() -> CriterionReport {
    let started = Instant::now();
    let env = environment_by_name("pendulum").unwrap();
    let steps = 200;
    let cfg = default_episode_config(&env, steps, 808);
    let mut data = Dataset::new();
    let mut di = DiffInclusion::from_dataset(
        &data,
        env.side_info(SideInfoTier::Constraints),
        env.x_dom.clone(),
        env.u_dom.clone(),
    )
    .unwrap();
    let log = match scp::run_episode(&env, &env.x0, &mut di, &mut data, &env.cost, &cfg) {
        Ok(l) => l,
        Err(e) => {
            return report(
                8,
                "end_to_end_episode",
                started,
                false,
                format!("episode failed: {e}"),
            )
        }
    };

    let baseline = zero_control_baseline(&env, steps);
    let from = steps - steps / 4;
    let base_tail: f64 = baseline[from..].iter().sum::<f64>() / (steps - from) as f64;
    let ctrl_tail = log.final_quarter_mean_stage_cost();
    let median_ms = log.median_step_millis();

    let passed = ctrl_tail <= 0.5 * base_tail && median_ms < 100.0;
    report(
        8,
        "end_to_end_episode",
        started,
        passed,
        format!(
            "final-quarter stage cost {ctrl_tail:.4} vs baseline {base_tail:.4} (ratio {:.3}), median step {median_ms:.1} ms",
            ctrl_tail / base_tail
        ),
    )
}

/// Criterion 9: simplex agrees with the vertex-enumeration oracle on random
/// boxed LPs, and the receding-horizon subproblem is never infeasible.
pub fn criterion_9_lp_correctness() -> CriterionReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut mismatches = 0usize;
    let mut status_mismatches = 0usize;
    const LPS: usize = 1000;

    for _ in 0..LPS {
        let n = rng.random_range(1..=6usize);
        let rows = rng.random_range(0..=8usize);
        let lp = LinearProgram {
            objective: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            constraints: (0..rows)
                .map(|_| Constraint {
                    row: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    relation: if rng.random_range(0..4) == 0 {
                        Relation::Eq
                    } else {
                        Relation::Le
                    },
                    rhs: rng.random_range(-0.5..1.5),
                })
                .collect(),
            bounds: (0..n)
                .map(|_| {
                    let lo: f64 = rng.random_range(-3.0..0.0);
                    let hi: f64 = rng.random_range(0.0..3.0);
                    Interval::new(lo, hi)
                })
                .collect(),
        };
        let sol = lp::solve(&lp).expect("simplex must not break down");
        let vertex = oracle::lp_vertex_oracle(&lp);
        match (sol.status, vertex) {
            (LpStatus::Optimal, Some((obj, _))) => {
                if (sol.objective_value - obj).abs() > 1e-7 * (1.0 + obj.abs()) {
                    mismatches += 1;
                }
            }
            (LpStatus::Infeasible, None) => {}
            _ => status_mismatches += 1,
        }
    }

    // the subproblem stays feasible across an episode's worth of solves
    let env = environment_by_name("duffing").unwrap();
    let mut data = Dataset::new();
    let mut di = DiffInclusion::from_dataset(
        &data,
        env.side_info(SideInfoTier::KnownTerms),
        env.x_dom.clone(),
        env.u_dom.clone(),
    )
    .unwrap();
    let mut cfg = default_episode_config(&env, 40, 910);
    cfg.with_bound = false;
    let episode_ok =
        scp::run_episode(&env, &env.x0, &mut di, &mut data, &env.cost, &cfg).is_ok();

    let passed = mismatches == 0 && status_mismatches == 0 && episode_ok;
    report(
        9,
        "lp_correctness",
        started,
        passed,
        format!(
            "{LPS} random LPs: {mismatches} objective mismatches, {status_mismatches} status mismatches; episode subproblems feasible: {episode_ok}"
        ),
    )
}
