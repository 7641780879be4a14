//! Receding-horizon control by trust-region sequential linearization over
//! the data-driven reachable sets.

use crate::inclusion::{DataPoint, Dataset, DiffInclusion, InclusionError};
use crate::interval::{monomial_grad, monomial_point, IntervalVector};
use crate::lp::{self, LpError, LpStatus, NormChoice, StageLin};
use crate::reach::{self, ReachError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum ScpError {
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Inclusion(#[from] InclusionError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("plant fault: {0}")]
    Plant(String),
}

/// Picks a concrete trajectory point inside a reachable box:
/// `theta * hi + (1 - theta) * lo`, componentwise.
#[derive(Clone, Debug)]
pub struct Selector {
    theta: Vec<f64>,
}

impl Selector {
    pub fn new(theta: Vec<f64>) -> Result<Self, ScpError> {
        if theta.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(ScpError::Config(
                "selector parameters must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { theta })
    }

    pub fn uniform(theta: f64, n: usize) -> Result<Self, ScpError> {
        Self::new(vec![theta; n])
    }

    pub fn select_next_state(&self, r: &IntervalVector) -> Vec<f64> {
        assert_eq!(r.dim(), self.theta.len());
        r.iter()
            .zip(&self.theta)
            .map(|(iv, &t)| {
                let v = t * iv.hi() + (1.0 - t) * iv.lo();
                v.clamp(iv.lo(), iv.hi())
            })
            .collect()
    }
}

type CostFn = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &[f64], &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) + Send + Sync;

/// The known stage cost `c(x, u, x_next)`, its gradient (analytic when
/// supplied, central finite differences otherwise) and its declared
/// 2-norm Lipschitz constant over the domain.
#[derive(Clone)]
pub struct CostModel {
    pub cost: Arc<CostFn>,
    pub grad: Option<Arc<GradFn>>,
    pub lc: f64,
}

impl std::fmt::Debug for CostModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CostModel")
            .field("analytic_grad", &self.grad.is_some())
            .field("lc", &self.lc)
            .finish()
    }
}

impl CostModel {
    pub fn new(cost: Arc<CostFn>, grad: Option<Arc<GradFn>>, lc: f64) -> Self {
        Self { cost, grad, lc }
    }

    pub fn eval(&self, x: &[f64], u: &[f64], xn: &[f64]) -> f64 {
        (self.cost)(x, u, xn)
    }

    /// Gradient w.r.t. (x, u, x_next); finite differences use step
    /// `1e-6 * (1 + |v|)` per coordinate.
    pub fn gradients(&self, x: &[f64], u: &[f64], xn: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        if let Some(g) = &self.grad {
            return g(x, u, xn);
        }
        let fd = |vals: &[f64], which: usize| -> Vec<f64> {
            let mut out = vec![0.0; vals.len()];
            for i in 0..vals.len() {
                let h = 1e-6 * (1.0 + vals[i].abs());
                let mut hi = vals.to_vec();
                let mut lo = vals.to_vec();
                hi[i] += h;
                lo[i] -= h;
                let (fhi, flo) = match which {
                    0 => ((self.cost)(&hi, u, xn), (self.cost)(&lo, u, xn)),
                    1 => ((self.cost)(x, &hi, xn), (self.cost)(x, &lo, xn)),
                    _ => ((self.cost)(x, u, &hi), (self.cost)(x, u, &lo)),
                };
                out[i] = (fhi - flo) / (2.0 * h);
            }
            out
        };
        (fd(x, 0), fd(u, 1), fd(xn, 2))
    }
}

/// Trust-region state and solver settings.
#[derive(Clone, Debug, Serialize)]
pub struct TrustRegion {
    pub radius0: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub rho_accept: f64,
    pub rho_good: f64,
    pub shrink: f64,
    pub grow: f64,
    pub lambda: f64,
    pub max_iters: usize,
    pub convergence_tol: f64,
    #[serde(skip)]
    pub trust_norm: NormChoice,
    #[serde(skip)]
    pub penalty_norm: NormChoice,
}

impl TrustRegion {
    /// Defaults scaled to the control box: initial radius a quarter of the
    /// largest control width.
    pub fn defaults_for(u_dom: &IntervalVector) -> Self {
        let wd = u_dom
            .widths()
            .into_iter()
            .fold(0.0f64, f64::max)
            .max(1e-6);
        let radius0 = 0.25 * wd;
        Self {
            radius0,
            r_min: 1e-4 * radius0,
            r_max: wd,
            rho_accept: 0.1,
            rho_good: 0.7,
            shrink: 0.5,
            grow: 2.0,
            lambda: 1e3,
            max_iters: 30,
            convergence_tol: 1e-6,
            trust_norm: NormChoice::Inf,
            penalty_norm: NormChoice::One,
        }
    }

    pub fn validate(&self) -> Result<(), ScpError> {
        let ok = self.shrink > 0.0
            && self.shrink < 1.0
            && self.grow > 1.0
            && self.rho_accept > 0.0
            && self.rho_accept < self.rho_good
            && self.rho_good < 1.0
            && self.r_min > 0.0
            && self.r_min <= self.radius0
            && self.radius0 <= self.r_max
            && self.lambda >= 0.0
            && self.max_iters >= 1;
        if ok {
            Ok(())
        } else {
            Err(ScpError::Config("invalid trust-region parameters".into()))
        }
    }
}

/// Solution of one receding-horizon solve.
#[derive(Clone, Debug, Serialize)]
pub struct ScpIterate {
    /// Planned states `x^{j+1} ... x^{j+N+1}`.
    pub states: Vec<Vec<f64>>,
    /// Planned controls `u^j ... u^{j+N}`.
    pub controls: Vec<Vec<f64>>,
    /// Realized (nonlinear) cost of the plan, including the penalty term.
    pub realized: f64,
    /// Linearized cost of the last accepted LP step.
    pub linear: f64,
    /// Stage costs without the penalty term.
    pub stage_costs: Vec<f64>,
    /// Per-stage selector mismatch norms at the solution.
    pub slack_norms: Vec<f64>,
    pub iterations: usize,
    pub accepted: usize,
    pub radius_final: f64,
    /// Every iteration was rejected down to the minimum radius; the
    /// initialization is returned unchanged.
    pub no_progress: bool,
}

/// Midpoint linearization of the selected next-state map around a reference
/// point: `x_next ~ h0 + A dx + B du`.
pub fn linearize(
    di: &DiffInclusion,
    sel: &Selector,
    x_s: &[f64],
    u_s: &[f64],
    dt: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>), ScpError> {
    let n = di.state_dim();
    let m = di.control_dim();
    let xp = IntervalVector::point(x_s);
    let up = IntervalVector::point(u_s);

    let (jf, jg) = reach::jacobian_enclosures(di, &xp, &up)?;
    let monos: Vec<f64> = di
        .side
        .exponents
        .iter()
        .map(|alpha| monomial_point(u_s, alpha))
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            let mut entry = jf.get(k, l);
            for (p, &mono) in monos.iter().enumerate() {
                entry = entry + jg[p].get(k, l).scale(mono);
            }
            a[k][l] = entry.scale(dt).mid() + if k == l { 1.0 } else { 0.0 };
        }
    }

    let (_, g_enc) = di.value_enclosures(&xp)?;
    let grads: Vec<Vec<f64>> = di
        .side
        .exponents
        .iter()
        .map(|alpha| monomial_grad(u_s, alpha))
        .collect();
    let mut b = vec![vec![0.0; m]; n];
    for k in 0..n {
        for l in 0..m {
            let mut entry = crate::interval::Interval::zero();
            for p in 0..di.side.term_count() {
                entry = entry + g_enc.get(p, k).scale(dt).scale(grads[p][l]);
            }
            b[k][l] = entry.mid();
        }
    }

    let step = reach::reach_step(di, &xp, &up, dt)?;
    let h0 = sel.select_next_state(&step.next);
    Ok((a, b, h0))
}

/// Nonlinear realized cost of a candidate plan: stage costs plus the
/// penalty-weighted selector mismatch, with a fresh reachability step per
/// stage.
#[allow(clippy::too_many_arguments)]
pub fn realized_cost(
    x_j: &[f64],
    states: &[Vec<f64>],
    controls: &[Vec<f64>],
    cm: &CostModel,
    di: &DiffInclusion,
    sel: &Selector,
    lambda: f64,
    dt: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>), ScpError> {
    assert_eq!(states.len(), controls.len());
    let mut total = 0.0;
    let mut stage_costs = Vec::with_capacity(states.len());
    let mut slacks = Vec::with_capacity(states.len());
    let mut xq: Vec<f64> = x_j.to_vec();
    for (x_next, u) in states.iter().zip(controls) {
        let step = reach::reach_step(di, &IntervalVector::point(&xq), &IntervalVector::point(u), dt)?;
        let h_theta = sel.select_next_state(&step.next);
        let slack: f64 = x_next
            .iter()
            .zip(&h_theta)
            .map(|(a, b)| (a - b).abs())
            .sum();
        let c = cm.eval(&xq, u, x_next);
        stage_costs.push(c);
        slacks.push(slack);
        total += c + lambda * slack;
        xq = x_next.clone();
    }
    Ok((total, stage_costs, slacks))
}

/// Total stage cost of a control plan under the surrogate model: the
/// selector map is rolled forward from `x_j` and the stage costs summed
/// (no penalty term).
pub fn plan_cost(
    di: &DiffInclusion,
    sel: &Selector,
    cm: &CostModel,
    x_j: &[f64],
    controls: &[Vec<f64>],
    dt: f64,
) -> Result<f64, ScpError> {
    let states = rollout(di, sel, x_j, controls, dt)?;
    let mut total = 0.0;
    let mut x = x_j.to_vec();
    for (u, xn) in controls.iter().zip(&states) {
        total += cm.eval(&x, u, xn);
        x = xn.clone();
    }
    Ok(total)
}

/// Rolls the selector map forward from `x_j` under the given controls.
fn rollout(
    di: &DiffInclusion,
    sel: &Selector,
    x_j: &[f64],
    controls: &[Vec<f64>],
    dt: f64,
) -> Result<Vec<Vec<f64>>, ScpError> {
    let mut xq = x_j.to_vec();
    let mut states = Vec::with_capacity(controls.len());
    for u in controls {
        let step = reach::reach_step(di, &IntervalVector::point(&xq), &IntervalVector::point(u), dt)?;
        xq = sel.select_next_state(&step.next);
        states.push(xq.clone());
    }
    Ok(states)
}

/// Rolls a control plan through the selector map and totals its stage
/// costs in one pass. The returned states satisfy `x_next = h(x, u)` by
/// construction, so the penalty term of the realized cost is zero.
fn eval_plan(
    di: &DiffInclusion,
    sel: &Selector,
    cm: &CostModel,
    x_j: &[f64],
    controls: &[Vec<f64>],
    dt: f64,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, f64), ScpError> {
    let states = rollout(di, sel, x_j, controls, dt)?;
    let mut stage_costs = Vec::with_capacity(controls.len());
    let mut total = 0.0;
    let mut x = x_j.to_vec();
    for (u, xn) in controls.iter().zip(&states) {
        let c = cm.eval(&x, u, xn);
        stage_costs.push(c);
        total += c;
        x = xn.clone();
    }
    Ok((states, stage_costs, total))
}

/// Solves the N-step problem from `x_j` by sequential linearization with a
/// trust region on the stacked control deviation. Returns the best accepted
/// plan; accepted realized costs are non-increasing by construction.
pub fn scp_solve(
    x_j: &[f64],
    di: &DiffInclusion,
    cm: &CostModel,
    sel: &Selector,
    tr: &TrustRegion,
    horizon: usize,
    dt: f64,
) -> Result<ScpIterate, ScpError> {
    tr.validate()?;
    if !di.x_dom.contains_point(x_j) {
        return Err(ScpError::Config(
            "initial state outside the state domain".into(),
        ));
    }
    let stages = horizon + 1;
    let u_mid = di.u_dom.mid();
    // iterates are kept dynamics-feasible: states always come from rolling
    // the selector map under the controls, so the realized cost carries no
    // penalty term and the zero step satisfies L = J exactly
    let mut controls = vec![u_mid; stages];
    let (mut states, mut stage_costs, mut j_cur) =
        eval_plan(di, sel, cm, x_j, &controls, dt)?;
    let mut l_last = j_cur;
    let mut radius = tr.radius0;
    let mut accepted = 0usize;
    let mut iterations = 0usize;
    let mut hit_r_min = false;

    while iterations < tr.max_iters {
        iterations += 1;
        // linearize around the current iterate
        let mut stage_data = Vec::with_capacity(stages);
        for q in 0..stages {
            let x_ref: &[f64] = if q == 0 { x_j } else { &states[q - 1] };
            let (a, b, h0) = linearize(di, sel, x_ref, &controls[q], dt)?;
            let cost = cm.eval(x_ref, &controls[q], &states[q]);
            let (grad_x, grad_u, grad_xnext) = cm.gradients(x_ref, &controls[q], &states[q]);
            stage_data.push(StageLin {
                a,
                b,
                h0,
                x_next_ref: states[q].clone(),
                u_ref: controls[q].clone(),
                cost,
                grad_x,
                grad_u,
                grad_xnext,
            });
        }
        let (lp_prob, layout) = lp::build_subproblem(
            &stage_data,
            radius,
            tr.lambda,
            &di.x_dom,
            &di.u_dom,
            tr.trust_norm,
            tr.penalty_norm,
        )?;
        let sol = lp::solve(&lp_prob)?;
        if sol.status != LpStatus::Optimal {
            return Err(ScpError::Config(format!(
                "linear subproblem unexpectedly {:?}",
                sol.status
            )));
        }
        let l_new = sol.objective_value + lp::subproblem_cost_const(&stage_data);

        let predicted = j_cur - l_new;
        if predicted <= tr.convergence_tol * (1.0 + j_cur.abs()) {
            // the linear model sees no further improvement
            break;
        }
        let cand_controls: Vec<Vec<f64>> = (0..stages)
            .map(|q| {
                layout
                    .du(&sol.x, q)
                    .iter()
                    .zip(&controls[q])
                    .map(|(d, s)| d + s)
                    .collect()
            })
            .collect();
        let (cand_states, sc_new, j_new) = eval_plan(di, sel, cm, x_j, &cand_controls, dt)?;
        let rho = (j_cur - j_new) / predicted;
        if rho >= tr.rho_accept {
            let improvement = j_cur - j_new;
            states = cand_states;
            controls = cand_controls;
            j_cur = j_new;
            stage_costs = sc_new;
            l_last = l_new;
            accepted += 1;
            if rho >= tr.rho_good {
                radius = (radius * tr.grow).min(tr.r_max);
            }
            if improvement < tr.convergence_tol * (1.0 + j_cur.abs()) {
                break;
            }
        } else {
            radius *= tr.shrink;
            if radius < tr.r_min {
                hit_r_min = true;
                break;
            }
        }
    }

    let slack_norms = vec![0.0; stages];
    Ok(ScpIterate {
        states,
        controls,
        realized: j_cur,
        linear: l_last,
        stage_costs,
        slack_norms,
        iterations,
        accepted,
        radius_final: radius,
        no_progress: hit_r_min && accepted == 0,
    })
}

/// The controlled system as the episode driver sees it: a derivative sensor
/// and a true one-step evolution.
pub trait Plant {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    /// Derivative sample reported when control `u` is applied at `x`.
    fn derivative(&self, x: &[f64], u: &[f64]) -> Vec<f64>;
    /// True state after holding `u` for `dt` starting at `x`.
    fn step(&self, x: &[f64], u: &[f64], dt: f64) -> Vec<f64>;
}

#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub steps: usize,
    pub horizon: usize,
    pub dt: f64,
    pub theta: f64,
    pub p_excite: f64,
    pub seed: u64,
    pub drop_inconsistent: bool,
    pub tr: TrustRegion,
    /// Compute the width-based suboptimality certificate each step (adds a
    /// full-control-set tube per step).
    pub with_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Realized plan cost J of the accepted iterate.
    pub j_cost: f64,
    /// Linearized cost L of the last accepted LP step.
    pub l_cost: f64,
    pub radius: f64,
    /// Suboptimality certificate from the control-set tube (NaN when off).
    pub bound: f64,
    /// Widths of the one-step reachable box under the applied control.
    pub widths: Vec<f64>,
    /// Stage cost realized on the true system.
    pub stage_cost: f64,
    pub millis: f64,
    pub excited: bool,
    pub no_progress: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpisodeLog {
    pub records: Vec<StepRecord>,
    /// Sum of stage costs realized on the true system.
    pub total_cost: f64,
    /// Samples dropped as inconsistent (only with drop_inconsistent).
    pub dropped_samples: usize,
    pub seed: u64,
}

impl EpisodeLog {
    /// Mean realized stage cost over the last quarter of the episode.
    pub fn final_quarter_mean_stage_cost(&self) -> f64 {
        let n = self.records.len();
        if n == 0 {
            return 0.0;
        }
        let from = n - (n / 4).max(1);
        let tail = &self.records[from..];
        tail.iter().map(|r| r.stage_cost).sum::<f64>() / tail.len() as f64
    }

    pub fn median_step_millis(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let mut ms: Vec<f64> = self.records.iter().map(|r| r.millis).collect();
        ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ms[ms.len() / 2]
    }
}

/// Runs a closed-loop episode: plan, (optionally) excite, observe the
/// derivative, refine the inclusion, advance the true system. The dataset
/// and the refined inclusion are returned with the log.
pub fn run_episode(
    plant: &dyn Plant,
    x0: &[f64],
    di: &mut DiffInclusion,
    data: &mut Dataset,
    cm: &CostModel,
    cfg: &EpisodeConfig,
) -> Result<EpisodeLog, ScpError> {
    if cfg.dt <= 0.0 {
        return Err(ScpError::Config("time step must be positive".into()));
    }
    let n = di.state_dim();
    if plant.state_dim() != n || plant.control_dim() != di.control_dim() {
        return Err(ScpError::Plant("plant dimensions disagree".into()));
    }
    let sel = Selector::uniform(cfg.theta, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x0.to_vec();
    let mut log = EpisodeLog {
        records: Vec::with_capacity(cfg.steps),
        total_cost: 0.0,
        dropped_samples: 0,
        seed: cfg.seed,
    };
    let t_start = data.times().last().map_or(0.0, |&t| t + cfg.dt);

    for step_idx in 0..cfg.steps {
        let wall = Instant::now();
        if !di.x_dom.contains_point(&x) {
            return Err(ScpError::Plant(format!(
                "state left the declared domain at step {step_idx}"
            )));
        }
        let iterate = scp_solve(&x, di, cm, &sel, &cfg.tr, cfg.horizon, cfg.dt)?;
        let excited = rng.random::<f64>() < cfg.p_excite;
        let u: Vec<f64> = if excited {
            di.u_dom
                .iter()
                .map(|iv| rng.random_range(iv.lo()..=iv.hi()))
                .collect()
        } else {
            iterate.controls[0].clone()
        };

        let bound = if cfg.with_bound {
            // the certificate is diagnostic: when the full-control-set tube
            // cannot be validated at current enclosure widths, the bound is
            // simply unavailable for this step
            match reach::reach_over_controls(
                di,
                &IntervalVector::point(&x),
                &di.u_dom,
                cfg.dt,
                cfg.horizon,
            ) {
                Ok(tube) => {
                    let widths: Vec<Vec<f64>> = tube.iter().map(IntervalVector::widths).collect();
                    reach::suboptimality_bound(&widths, cm.lc)
                }
                Err(ReachError::AtStep { .. } | ReachError::EnclosureFailure { .. }) => {
                    f64::INFINITY
                }
                Err(e) => return Err(ScpError::Reach(e)),
            }
        } else {
            f64::NAN
        };
        let planned = reach::reach_step(
            di,
            &IntervalVector::point(&x),
            &IntervalVector::point(&u),
            cfg.dt,
        )?;

        // the derivative sample depends on the applied control, so the new
        // data point only becomes available after the choice
        let xdot = plant.derivative(&x, &u);
        let t = t_start + (step_idx as f64) * cfg.dt;
        data.push(t, DataPoint::new(x.clone(), xdot, u.clone()))
            .map_err(ScpError::Inclusion)?;
        match di.absorb(data) {
            Ok(()) => {}
            Err(e @ InclusionError::InconsistentData { .. }) if cfg.drop_inconsistent => {
                data.pop();
                log.dropped_samples += 1;
                let _ = e;
            }
            Err(e) => return Err(ScpError::Inclusion(e)),
        }

        let x_next = plant.step(&x, &u, cfg.dt);
        let stage_cost = cm.eval(&x, &u, &x_next);
        log.total_cost += stage_cost;
        log.records.push(StepRecord {
            step: step_idx,
            t,
            x: x.clone(),
            u,
            j_cost: iterate.realized,
            l_cost: iterate.linear,
            radius: iterate.radius_final,
            bound,
            widths: planned.next.widths(),
            stage_cost,
            millis: wall.elapsed().as_secs_f64() * 1e3,
            excited,
            no_progress: iterate.no_progress,
        });
        x = x_next;
    }
    Ok(log)
}
