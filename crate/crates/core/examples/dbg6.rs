use reachctrl::harness::{environment_by_name, finite_horizon_lqr, SideInfoTier};
use reachctrl::inclusion::{DataPoint, Dataset, DiffInclusion};
use reachctrl::scp::{self, Selector, TrustRegion};

fn main() {
    let env = environment_by_name("double_integrator").unwrap();
    let mut data = Dataset::new();
    for (i, (x, u)) in [
        (vec![0.3, 0.5], 1.0),
        (vec![-0.2, -0.4], -0.8),
        (vec![0.1, 0.7], 0.5),
    ].into_iter().enumerate() {
        let xdot = env.deriv(&x, &[u]);
        data.push(i as f64 * env.dt, DataPoint::new(x, xdot, vec![u])).unwrap();
    }
    let di = DiffInclusion::from_dataset(&data, env.side_info(SideInfoTier::KnownTerms),
        env.x_dom.clone(), env.u_dom.clone()).unwrap();

    // check enclosure widths at a probe
    let probe = reachctrl::interval::IntervalVector::point(&[0.4, -0.3]);
    let (f, g) = di.value_enclosures(&probe).unwrap();
    println!("f widths: {:?}", f.widths());
    println!("g widths: {:?}", g.widths());
    println!("f mid: {:?} g mid: {:?}", f.mid(), g.get(0,0));

    let dt = env.dt;
    let horizon = 3;
    let x0 = [0.4, -0.3];
    let sel = Selector::uniform(0.5, 2).unwrap();
    let tr = TrustRegion::defaults_for(&env.u_dom);
    let it = scp::scp_solve(&x0, &di, &env.cost, &sel, &tr, horizon, dt).unwrap();
    println!("scp: iters={} accepted={} r_final={:.2e} no_progress={}", it.iterations, it.accepted, it.radius_final, it.no_progress);
    println!("scp controls: {:?}", it.controls);
    println!("scp stage cost total: {}", it.stage_costs.iter().sum::<f64>());
    println!("scp realized J: {}  L: {}", it.realized, it.linear);

    let a_d = vec![vec![1.0, dt], vec![0.0, 1.0]];
    let b_d = vec![vec![0.5*dt*dt], vec![dt]];
    let q = vec![vec![1.0,0.0],vec![0.0,1.0]];
    let r = vec![vec![0.5]];
    let (u_lqr, c_lqr) = finite_horizon_lqr(&a_d, &b_d, &q, &r, &x0, horizon+1);
    println!("lqr: cost={} controls={:?}", c_lqr, u_lqr);

    // brute force on the surrogate: plan_cost over a fine grid via Nelder-ish scan
    let cost_of = |us: &[f64]| {
        let controls: Vec<Vec<f64>> = us.iter().map(|&u| vec![u]).collect();
        scp::plan_cost(&di, &sel, &env.cost, &x0, &controls, dt).unwrap()
    };
    // coordinate descent from LQR controls
    let mut best: Vec<f64> = u_lqr.iter().map(|u| u[0]).collect();
    let mut bc = cost_of(&best);
    let mut step = 0.2;
    for _ in 0..60 {
        let mut improved = false;
        for i in 0..best.len() {
            for delta in [-step, step] {
                let mut cand = best.clone();
                cand[i] += delta;
                let c = cost_of(&cand);
                if c < bc { bc = c; best = cand; improved = true; }
            }
        }
        if !improved { step *= 0.5; if step < 1e-9 { break; } }
    }
    println!("surrogate brute: cost={} controls={:?}", bc, best);
    println!("cost of lqr controls on surrogate: {}", cost_of(&u_lqr.iter().map(|u| u[0]).collect::<Vec<_>>()));
}
