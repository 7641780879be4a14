//! Ground-truth environments with polynomial control dependence, their
//! declared side information per tier, and the registration audit that
//! checks every declared bound against the truth by dense sampling.

use crate::expr::Expr;
use crate::inclusion::{
    CellRef, ConstraintSpec, KnownFn, KnownTerms, Relation, SideInfo,
};
use crate::interval::{monomial_point, Interval, IntervalVector};
use crate::scp::{CostModel, Plant};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Which side information an inclusion is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SideInfoTier {
    /// Lipschitz and magnitude bounds only.
    LipschitzOnly,
    /// Plus factored partial knowledge of the dynamics.
    KnownTerms,
    /// Plus algebraic constraints.
    Constraints,
}

impl SideInfoTier {
    pub const ALL: [SideInfoTier; 3] = [
        SideInfoTier::LipschitzOnly,
        SideInfoTier::KnownTerms,
        SideInfoTier::Constraints,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lipschitz" | "lipschitz_only" => Some(Self::LipschitzOnly),
            "known_terms" => Some(Self::KnownTerms),
            "constraints" => Some(Self::Constraints),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::LipschitzOnly => "lipschitz_only",
            Self::KnownTerms => "known_terms",
            Self::Constraints => "constraints",
        }
    }
}

/// Reference cofactor truths for auditing a factored declaration.
#[derive(Clone)]
pub struct FactorTruth {
    pub f: Vec<Arc<VecFn>>,
    pub g: Vec<Vec<Arc<VecFn>>>,
}

/// A ground-truth system in the polynomial-control class, with everything
/// the acceptance batteries need: true fields, domains, a stage cost, and
/// declared side information per tier.
#[derive(Clone)]
pub struct Environment {
    pub name: &'static str,
    pub exponents: Vec<Vec<u32>>,
    pub x_dom: IntervalVector,
    pub u_dom: IntervalVector,
    pub dt: f64,
    pub x0: Vec<f64>,
    pub f_true: Arc<VecFn>,
    /// True control fields: returns d rows of length n at the state.
    pub g_true: Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>,
    /// True Jacobians of (f, g_p) for oracle use only: returns the
    /// state Jacobian of the full field at (x, u), row-major n x n.
    pub jac_true: Option<Arc<dyn Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync>>,
    pub cost: CostModel,
    side_base: SideInfo,
    known_terms: Option<KnownTerms>,
    factor_truth: Option<FactorTruth>,
    constraints: Vec<ConstraintSpec>,
}

impl Environment {
    pub fn state_dim(&self) -> usize {
        self.x_dom.dim()
    }

    pub fn control_dim(&self) -> usize {
        self.u_dom.dim()
    }

    pub fn term_count(&self) -> usize {
        self.exponents.len()
    }

    /// True state derivative under the polynomial-control structure.
    pub fn deriv(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = (self.f_true)(x);
        let g = (self.g_true)(x);
        for (p, alpha) in self.exponents.iter().enumerate() {
            let mono = monomial_point(u, alpha);
            for k in 0..out.len() {
                out[k] += g[p][k] * mono;
            }
        }
        out
    }

    /// Side information at the requested tier (tiers are cumulative).
    pub fn side_info(&self, tier: SideInfoTier) -> SideInfo {
        let mut side = self.side_base.clone();
        if tier != SideInfoTier::LipschitzOnly {
            side.known_terms = self.known_terms.clone();
        }
        if tier == SideInfoTier::Constraints {
            side.constraints = self.constraints.clone();
        }
        side
    }

    /// Uniform random state strictly inside the domain, shrunk by `margin`
    /// of each half-width (keeps short flows inside the domain).
    pub fn sample_state(&self, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
        self.x_dom
            .iter()
            .map(|iv| {
                let mid = iv.mid();
                let half = 0.5 * iv.width() * (1.0 - margin);
                rng.random_range(mid - half..=mid + half)
            })
            .collect()
    }

    pub fn sample_control(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.u_dom
            .iter()
            .map(|iv| rng.random_range(iv.lo()..=iv.hi()))
            .collect()
    }
}

impl Plant for Environment {
    fn state_dim(&self) -> usize {
        self.x_dom.dim()
    }

    fn control_dim(&self) -> usize {
        self.u_dom.dim()
    }

    fn derivative(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.deriv(x, u)
    }

    fn step(&self, x: &[f64], u: &[f64], dt: f64) -> Vec<f64> {
        let rhs = |_t: f64, s: &[f64]| self.deriv(s, u);
        super::oracle::rk45(&rhs, 0.0, x, dt, 1e-10, 1e-12)
            .expect("ground-truth integration failed")
    }
}

fn quad_next_state_cost(qx: Vec<f64>, ru: f64, lc: f64) -> CostModel {
    CostModel::new(
        Arc::new(move |_x: &[f64], u: &[f64], xn: &[f64]| {
            let state: f64 = xn.iter().zip(&qx).map(|(v, q)| q * v * v).sum();
            let ctrl: f64 = u.iter().map(|v| ru * v * v).sum();
            state + ctrl
        }),
        None,
        lc,
    )
}

fn zero_expr_row(n: usize) -> Vec<Expr> {
    (0..n).map(|_| Expr::constant(0.0)).collect()
}

/// fval(k) = State-slot expression helpers for constraint construction.
fn fvar(k: usize) -> Expr {
    Expr::var(k)
}

fn pendulum() -> Environment {
    const GRAV: f64 = 9.81;
    const DAMP: f64 = 0.15;
    let f_true: Arc<VecFn> = Arc::new(|x: &[f64]| {
        vec![x[1], -GRAV * x[0].sin() - DAMP * x[1]]
    });
    let g_true = Arc::new(|_x: &[f64]| vec![vec![0.0, 1.0]]);
    let jac_true = Arc::new(|x: &[f64], _u: &[f64]| {
        vec![vec![0.0, 1.0], vec![-GRAV * x[0].cos(), -DAMP]]
    });

    // factored knowledge: f = (x2, sin x1) . (1, -grav) + (0, x2) . (_, -damp)
    let ff1 = KnownFn::new(
        vec![Expr::var(1), Expr::var(0).sin()],
        vec![
            vec![Expr::constant(0.0), Expr::constant(1.0)],
            vec![Expr::var(0).cos(), Expr::constant(0.0)],
        ],
    );
    let ff2 = KnownFn::new(
        vec![Expr::constant(0.0), Expr::var(1)],
        vec![zero_expr_row(2), vec![Expr::constant(0.0), Expr::constant(1.0)]],
    );
    let gf1 = KnownFn::constant(&[0.0, 1.0]);
    let gf2 = KnownFn::constant(&[0.0, 0.0]);
    let tiny = 1e-9;
    let known_terms = KnownTerms {
        f_factors: vec![ff1, ff2],
        g_factors: vec![vec![gf1, gf2]],
        lip_f: vec![vec![tiny; 2]; 2],
        lip_g: vec![vec![vec![tiny; 2]; 2]],
    };
    let factor_truth = FactorTruth {
        f: vec![
            Arc::new(|_x: &[f64]| vec![1.0, -GRAV]),
            Arc::new(|_x: &[f64]| vec![0.0, -DAMP]),
        ],
        g: vec![vec![
            Arc::new(|_x: &[f64]| vec![0.0, 1.0]),
            Arc::new(|_x: &[f64]| vec![0.0, 0.0]),
        ]],
    };

    // constraints: kinematic identity, dissipativity at zero control, and
    // the known sparsity of both Jacobian rows
    let mut constraints = vec![
        ConstraintSpec::new(
            fvar(0).sub(Expr::var(1)),
            vec![CellRef::FVal(0), CellRef::State(1)],
            Relation::Zero,
        ),
        // -(x2 * F2 + grav * sin(x1) * x2) = damp * x2^2 >= 0
        ConstraintSpec::new(
            Expr::var(0)
                .mul(Expr::var(1))
                .add(Expr::constant(GRAV).mul(Expr::var(2).sin()).mul(Expr::var(1)))
                .neg(),
            vec![CellRef::FVal(1), CellRef::State(1), CellRef::State(0)],
            Relation::NonNeg,
        ),
        ConstraintSpec::new(fvar(0), vec![CellRef::JacF(0, 0)], Relation::Zero),
        ConstraintSpec::new(
            fvar(0).sub(Expr::constant(1.0)),
            vec![CellRef::JacF(0, 1)],
            Relation::Zero,
        ),
    ];
    for k in 0..2 {
        for l in 0..2 {
            constraints.push(ConstraintSpec::new(
                fvar(0),
                vec![CellRef::JacG(0, k, l)],
                Relation::Zero,
            ));
        }
    }

    let side_base = SideInfo {
        weights: vec![1.0, 1.0],
        exponents: vec![vec![1]],
        bound: 15.0,
        lip_f: vec![1.0, 9.82],
        lip_g: vec![vec![tiny, tiny]],
        known_terms: None,
        constraints: Vec::new(),
        jac_weight_mode: Default::default(),
        observation_pad: 1e-10,
    };

    Environment {
        name: "pendulum",
        exponents: vec![vec![1]],
        x_dom: IntervalVector::new(vec![
            Interval::new(-4.0, 4.0),
            Interval::new(-9.0, 9.0),
        ]),
        u_dom: IntervalVector::new(vec![Interval::new(-2.0, 2.0)]),
        dt: 0.05,
        x0: vec![1.2, 0.0],
        f_true,
        g_true,
        jac_true: Some(jac_true),
        cost: quad_next_state_cost(vec![1.0, 0.2], 0.01, 8.0),
        side_base,
        known_terms: Some(known_terms),
        factor_truth: Some(factor_truth),
        constraints,
    }
}

fn duffing() -> Environment {
    const DAMP: f64 = 0.3;
    let f_true: Arc<VecFn> = Arc::new(|x: &[f64]| {
        vec![x[1], x[0] - x[0].powi(3) - DAMP * x[1]]
    });
    let g_true = Arc::new(|x: &[f64]| {
        vec![
            vec![0.0, 1.0 + 0.3 * x[0].cos()],
            vec![0.0, 0.15],
        ]
    });
    let jac_true = Arc::new(|x: &[f64], u: &[f64]| {
        // d/dx of f + g1 u + g2 u^2
        vec![
            vec![0.0, 1.0],
            vec![
                1.0 - 3.0 * x[0] * x[0] - 0.3 * x[0].sin() * u[0],
                -DAMP,
            ],
        ]
    });

    let ff1 = KnownFn::new(
        vec![Expr::var(1), Expr::var(0).sub(Expr::var(0).pow(3))],
        vec![
            vec![Expr::constant(0.0), Expr::constant(1.0)],
            vec![
                Expr::constant(1.0).sub(Expr::constant(3.0).mul(Expr::var(0).pow(2))),
                Expr::constant(0.0),
            ],
        ],
    );
    let ff2 = KnownFn::new(
        vec![Expr::constant(0.0), Expr::var(1)],
        vec![zero_expr_row(2), vec![Expr::constant(0.0), Expr::constant(1.0)]],
    );
    // g1's state dependence is known; the gain is the unknown cofactor
    let gf11 = KnownFn::new(
        vec![
            Expr::constant(0.0),
            Expr::constant(1.0).add(Expr::constant(0.3).mul(Expr::var(0).cos())),
        ],
        vec![
            zero_expr_row(2),
            vec![
                Expr::constant(0.3).mul(Expr::var(0).sin()).neg(),
                Expr::constant(0.0),
            ],
        ],
    );
    let gf12 = KnownFn::constant(&[0.0, 0.0]);
    let gf21 = KnownFn::constant(&[0.0, 1.0]);
    let gf22 = KnownFn::constant(&[0.0, 0.0]);
    let tiny = 1e-9;
    let known_terms = KnownTerms {
        f_factors: vec![ff1, ff2],
        g_factors: vec![vec![gf11, gf12], vec![gf21, gf22]],
        lip_f: vec![vec![tiny; 2]; 2],
        lip_g: vec![vec![vec![tiny; 2]; 2]; 2],
    };
    let factor_truth = FactorTruth {
        f: vec![
            Arc::new(|_x: &[f64]| vec![1.0, 1.0]),
            Arc::new(|_x: &[f64]| vec![0.0, -DAMP]),
        ],
        g: vec![
            vec![
                Arc::new(|_x: &[f64]| vec![0.0, 1.0]),
                Arc::new(|_x: &[f64]| vec![0.0, 0.0]),
            ],
            vec![
                Arc::new(|_x: &[f64]| vec![0.0, 0.15]),
                Arc::new(|_x: &[f64]| vec![0.0, 0.0]),
            ],
        ],
    };

    let mut constraints = vec![
        ConstraintSpec::new(
            fvar(0).sub(Expr::var(1)),
            vec![CellRef::FVal(0), CellRef::State(1)],
            Relation::Zero,
        ),
        // quadratic-control coefficient acts upward on velocity
        ConstraintSpec::new(fvar(0), vec![CellRef::GVal(1, 1)], Relation::NonNeg),
        ConstraintSpec::new(fvar(0), vec![CellRef::JacF(0, 0)], Relation::Zero),
        ConstraintSpec::new(
            fvar(0).sub(Expr::constant(1.0)),
            vec![CellRef::JacF(0, 1)],
            Relation::Zero,
        ),
    ];
    for p in 0..2 {
        for l in 0..2 {
            constraints.push(ConstraintSpec::new(
                fvar(0),
                vec![CellRef::JacG(p, 0, l)],
                Relation::Zero,
            ));
        }
    }
    // g2 is constant: its velocity-row Jacobian vanishes too
    for l in 0..2 {
        constraints.push(ConstraintSpec::new(
            fvar(0),
            vec![CellRef::JacG(1, 1, l)],
            Relation::Zero,
        ));
    }

    let side_base = SideInfo {
        weights: vec![1.0, 1.0],
        exponents: vec![vec![1], vec![2]],
        bound: 22.0,
        lip_f: vec![1.0, 17.8],
        lip_g: vec![vec![tiny, 0.31], vec![tiny, tiny]],
        known_terms: None,
        constraints: Vec::new(),
        jac_weight_mode: Default::default(),
        observation_pad: 1e-10,
    };

    Environment {
        name: "duffing",
        exponents: vec![vec![1], vec![2]],
        x_dom: IntervalVector::new(vec![
            Interval::new(-2.5, 2.5),
            Interval::new(-4.0, 4.0),
        ]),
        u_dom: IntervalVector::new(vec![Interval::new(-2.0, 2.0)]),
        dt: 0.05,
        x0: vec![1.5, 0.0],
        f_true,
        g_true,
        jac_true: Some(jac_true),
        cost: quad_next_state_cost(vec![1.0, 0.2], 0.01, 5.5),
        side_base,
        known_terms: Some(known_terms),
        factor_truth: Some(factor_truth),
        constraints,
    }
}

fn unicycle() -> Environment {
    let f_true: Arc<VecFn> = Arc::new(|_x: &[f64]| vec![0.0, 0.0, 0.0]);
    let g_true = Arc::new(|x: &[f64]| {
        vec![
            vec![x[2].cos(), x[2].sin(), 0.0],
            vec![0.0, 0.0, 1.0],
        ]
    });
    let jac_true = Arc::new(|x: &[f64], u: &[f64]| {
        vec![
            vec![0.0, 0.0, -x[2].sin() * u[0]],
            vec![0.0, 0.0, x[2].cos() * u[0]],
            vec![0.0, 0.0, 0.0],
        ]
    });

    let ff1 = KnownFn::constant(&[0.0, 0.0, 0.0]);
    let gf11 = KnownFn::new(
        vec![Expr::var(2).cos(), Expr::var(2).sin(), Expr::constant(0.0)],
        vec![
            vec![Expr::constant(0.0), Expr::constant(0.0), Expr::var(2).sin().neg()],
            vec![Expr::constant(0.0), Expr::constant(0.0), Expr::var(2).cos()],
            zero_expr_row(3),
        ],
    );
    let gf21 = KnownFn::constant(&[0.0, 0.0, 1.0]);
    let tiny = 1e-9;
    let known_terms = KnownTerms {
        f_factors: vec![ff1],
        g_factors: vec![vec![gf11], vec![gf21]],
        lip_f: vec![vec![tiny; 3]],
        lip_g: vec![vec![vec![tiny; 3]], vec![vec![tiny; 3]]],
    };
    let factor_truth = FactorTruth {
        f: vec![Arc::new(|_x: &[f64]| vec![0.0, 0.0, 0.0])],
        g: vec![
            vec![Arc::new(|_x: &[f64]| vec![1.0, 1.0, 0.0])],
            vec![Arc::new(|_x: &[f64]| vec![0.0, 0.0, 1.0])],
        ],
    };

    let mut constraints: Vec<ConstraintSpec> = (0..3)
        .map(|k| ConstraintSpec::new(fvar(0), vec![CellRef::FVal(k)], Relation::Zero))
        .collect();
    // direction vector lies on the unit circle
    constraints.push(ConstraintSpec::new(
        Expr::var(0)
            .pow(2)
            .add(Expr::var(1).pow(2))
            .sub(Expr::constant(1.0)),
        vec![CellRef::GVal(0, 0), CellRef::GVal(0, 1)],
        Relation::Zero,
    ));
    for k in 0..3 {
        for l in 0..3 {
            constraints.push(ConstraintSpec::new(
                fvar(0),
                vec![CellRef::JacF(k, l)],
                Relation::Zero,
            ));
        }
    }

    let side_base = SideInfo {
        weights: vec![1.0, 1.0, 1.0],
        exponents: vec![vec![1, 0], vec![0, 1]],
        bound: 3.0,
        lip_f: vec![tiny; 3],
        lip_g: vec![vec![1.0, 1.0, tiny], vec![tiny, tiny, tiny]],
        known_terms: None,
        constraints: Vec::new(),
        jac_weight_mode: Default::default(),
        observation_pad: 1e-10,
    };

    Environment {
        name: "unicycle",
        exponents: vec![vec![1, 0], vec![0, 1]],
        x_dom: IntervalVector::new(vec![
            Interval::new(-3.0, 3.0),
            Interval::new(-3.0, 3.0),
            Interval::new(-4.0, 4.0),
        ]),
        u_dom: IntervalVector::new(vec![
            Interval::new(-1.0, 1.0),
            Interval::new(-1.5, 1.5),
        ]),
        dt: 0.05,
        x0: vec![1.5, 1.0, 0.5],
        f_true,
        g_true,
        jac_true: Some(jac_true),
        cost: quad_next_state_cost(vec![1.0, 1.0, 0.1], 0.01, 9.0),
        side_base,
        known_terms: Some(known_terms),
        factor_truth: Some(factor_truth),
        constraints,
    }
}

fn double_integrator() -> Environment {
    let f_true: Arc<VecFn> = Arc::new(|x: &[f64]| vec![x[1], 0.0]);
    let g_true = Arc::new(|_x: &[f64]| vec![vec![0.0, 1.0]]);
    let jac_true =
        Arc::new(|_x: &[f64], _u: &[f64]| vec![vec![0.0, 1.0], vec![0.0, 0.0]]);

    let ff1 = KnownFn::new(
        vec![Expr::var(1), Expr::constant(0.0)],
        vec![vec![Expr::constant(0.0), Expr::constant(1.0)], zero_expr_row(2)],
    );
    let gf1 = KnownFn::constant(&[0.0, 1.0]);
    let tiny = 1e-9;
    let known_terms = KnownTerms {
        f_factors: vec![ff1],
        g_factors: vec![vec![gf1]],
        lip_f: vec![vec![tiny; 2]],
        lip_g: vec![vec![vec![tiny; 2]]],
    };
    let factor_truth = FactorTruth {
        f: vec![Arc::new(|_x: &[f64]| vec![1.0, 0.0])],
        g: vec![vec![Arc::new(|_x: &[f64]| vec![0.0, 1.0])]],
    };

    let mut constraints = vec![
        ConstraintSpec::new(
            fvar(0).sub(Expr::var(1)),
            vec![CellRef::FVal(0), CellRef::State(1)],
            Relation::Zero,
        ),
        ConstraintSpec::new(fvar(0), vec![CellRef::FVal(1)], Relation::Zero),
        ConstraintSpec::new(fvar(0), vec![CellRef::JacF(0, 0)], Relation::Zero),
        ConstraintSpec::new(
            fvar(0).sub(Expr::constant(1.0)),
            vec![CellRef::JacF(0, 1)],
            Relation::Zero,
        ),
        ConstraintSpec::new(fvar(0), vec![CellRef::JacF(1, 0)], Relation::Zero),
        ConstraintSpec::new(fvar(0), vec![CellRef::JacF(1, 1)], Relation::Zero),
    ];
    for k in 0..2 {
        for l in 0..2 {
            constraints.push(ConstraintSpec::new(
                fvar(0),
                vec![CellRef::JacG(0, k, l)],
                Relation::Zero,
            ));
        }
    }

    let side_base = SideInfo {
        weights: vec![1.0, 1.0],
        exponents: vec![vec![1]],
        bound: 6.0,
        lip_f: vec![1.0, tiny],
        lip_g: vec![vec![tiny, tiny]],
        known_terms: None,
        constraints: Vec::new(),
        jac_weight_mode: Default::default(),
        observation_pad: 1e-10,
    };

    Environment {
        name: "double_integrator",
        exponents: vec![vec![1]],
        x_dom: IntervalVector::new(vec![
            Interval::new(-5.0, 5.0),
            Interval::new(-5.0, 5.0),
        ]),
        u_dom: IntervalVector::new(vec![Interval::new(-3.0, 3.0)]),
        dt: 0.1,
        x0: vec![1.0, 0.0],
        f_true,
        g_true,
        jac_true: Some(jac_true),
        cost: quad_next_state_cost(vec![1.0, 1.0], 0.5, 15.0),
        side_base,
        known_terms: Some(known_terms),
        factor_truth: Some(factor_truth),
        constraints,
    }
}

/// All builtin environments.
pub fn builtin_environments() -> Vec<Environment> {
    vec![pendulum(), unicycle(), duffing(), double_integrator()]
}

pub fn environment_by_name(name: &str) -> Option<Environment> {
    builtin_environments().into_iter().find(|e| e.name == name)
}

/// Dense-sampling audit of every declared bound at a tier: Lipschitz
/// quotients, magnitude bounds, factored-form consistency and cofactor
/// bounds, and constraint validity on the truth. Returns a description of
/// the first violation.
pub fn audit_side_info(
    env: &Environment,
    tier: SideInfoTier,
    samples: usize,
    seed: u64,
) -> Result<(), String> {
    let side = env.side_info(tier);
    side.validate().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = env.state_dim();
    let d = env.term_count();
    let slack = 1e-7;

    let xs: Vec<Vec<f64>> = (0..samples).map(|_| env.sample_state(&mut rng, 0.0)).collect();
    let wnorm = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&side.weights)
            .map(|((ai, bi), w)| (w * (ai - bi)).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    for (i, xa) in xs.iter().enumerate() {
        let fa = (env.f_true)(xa);
        let ga = (env.g_true)(xa);
        for k in 0..n {
            if fa[k].abs() > side.bound + slack {
                return Err(format!("|f_{k}| exceeds the global bound at sample {i}"));
            }
            for p in 0..d {
                if ga[p][k].abs() > side.bound + slack {
                    return Err(format!("|g_{p}{k}| exceeds the global bound"));
                }
            }
        }
        for xb in xs.iter().skip(i + 1) {
            let dist = wnorm(xa, xb);
            if dist < 1e-9 {
                continue;
            }
            let fb = (env.f_true)(xb);
            let gb = (env.g_true)(xb);
            for k in 0..n {
                if (fa[k] - fb[k]).abs() > side.lip_f[k] * dist + slack {
                    return Err(format!("f_{k} violates its declared Lipschitz bound"));
                }
                for p in 0..d {
                    if (ga[p][k] - gb[p][k]).abs() > side.lip_g[p][k] * dist + slack {
                        return Err(format!("g_{p}{k} violates its declared Lipschitz bound"));
                    }
                }
            }
        }
    }

    if let (Some(kt), Some(ft)) = (&side.known_terms, &env.factor_truth) {
        let s_count = kt.factor_count();
        for (i, x) in xs.iter().enumerate() {
            // decomposition must reproduce the truth
            let f_ref = (env.f_true)(x);
            let mut f_acc = vec![0.0; n];
            for s in 0..s_count {
                let known = kt.f_factors[s].eval_point(x);
                let cof = (ft.f[s])(x);
                for k in 0..n {
                    f_acc[k] += known[k] * cof[k];
                    if cof[k].abs() > side.bound + slack {
                        return Err(format!("cofactor f^{s}_{k} exceeds the global bound"));
                    }
                }
            }
            for k in 0..n {
                if (f_acc[k] - f_ref[k]).abs() > 1e-8 {
                    return Err(format!(
                        "factored form disagrees with f_{k} at sample {i}"
                    ));
                }
            }
            let g_ref = (env.g_true)(x);
            for p in 0..d {
                let mut g_acc = vec![0.0; n];
                for s in 0..s_count {
                    let known = kt.g_factors[p][s].eval_point(x);
                    let cof = (ft.g[p][s])(x);
                    for k in 0..n {
                        g_acc[k] += known[k] * cof[k];
                    }
                }
                for k in 0..n {
                    if (g_acc[k] - g_ref[p][k]).abs() > 1e-8 {
                        return Err(format!("factored form disagrees with g_{p}{k}"));
                    }
                }
            }
        }
        // cofactor Lipschitz bounds
        for (i, xa) in xs.iter().enumerate() {
            for xb in xs.iter().skip(i + 1) {
                let dist = wnorm(xa, xb);
                if dist < 1e-9 {
                    continue;
                }
                for s in 0..s_count {
                    let ca = (ft.f[s])(xa);
                    let cb = (ft.f[s])(xb);
                    for k in 0..n {
                        if (ca[k] - cb[k]).abs() > kt.lip_f[s][k] * dist + slack {
                            return Err(format!("cofactor f^{s}_{k} violates its bound"));
                        }
                    }
                    for p in 0..d {
                        let ca = (ft.g[p][s])(xa);
                        let cb = (ft.g[p][s])(xb);
                        for k in 0..n {
                            if (ca[k] - cb[k]).abs() > kt.lip_g[p][s][k] * dist + slack {
                                return Err(format!("cofactor g^{s}_{p}{k} violates its bound"));
                            }
                        }
                    }
                }
            }
        }
    }

    if tier == SideInfoTier::Constraints {
        // the truth must satisfy every declared constraint at sampled
        // states, controls and the induced derivatives / Jacobians
        for x in xs.iter().take(samples.min(200)) {
            let u = env.sample_control(&mut rng);
            let f = (env.f_true)(x);
            let g = (env.g_true)(x);
            let jac = env.jac_true.as_ref().map(|j| j(x, &u));
            for (ci, spec) in side.constraints.iter().enumerate() {
                let mut slots = Vec::with_capacity(spec.bindings.len());
                let mut available = true;
                for b in &spec.bindings {
                    let v = match *b {
                        CellRef::FVal(k) => Some(f[k]),
                        CellRef::GVal(p, k) => Some(g[p][k]),
                        CellRef::State(i) => Some(x[i]),
                        CellRef::Control(i) => Some(u[i]),
                        CellRef::Deriv(i) => Some(env.deriv(x, &u)[i]),
                        // full-field Jacobian equals the f-Jacobian plus
                        // control terms; only audit pure f rows when the
                        // control terms vanish there (our declarations do)
                        CellRef::JacF(k, l) => jac.as_ref().map(|j| {
                            let mut v = j[k][l];
                            let gx = (env.g_true)(x);
                            let _ = &gx;
                            // remove control contribution via finite diff of g
                            let h = 1e-6;
                            let mut xp = x.clone();
                            xp[l] += h;
                            let gp = (env.g_true)(&xp);
                            let mut xm = x.clone();
                            xm[l] -= h;
                            let gm = (env.g_true)(&xm);
                            for (p, alpha) in env.exponents.iter().enumerate() {
                                let mono = monomial_point(&u, alpha);
                                v -= (gp[p][k] - gm[p][k]) / (2.0 * h) * mono;
                            }
                            v
                        }),
                        CellRef::JacG(p, k, l) => {
                            let h = 1e-6;
                            let mut xp = x.clone();
                            xp[l] += h;
                            let mut xm = x.clone();
                            xm[l] -= h;
                            let gp = (env.g_true)(&xp);
                            let gm = (env.g_true)(&xm);
                            Some((gp[p][k] - gm[p][k]) / (2.0 * h))
                        }
                    };
                    match v {
                        Some(v) => slots.push(v),
                        None => {
                            available = false;
                            break;
                        }
                    }
                }
                if !available {
                    continue;
                }
                let val = spec.expr.eval_point(&slots);
                let ok = match spec.relation {
                    Relation::NonNeg => val >= -1e-6,
                    Relation::Zero => val.abs() <= 1e-6,
                };
                if !ok {
                    return Err(format!(
                        "constraint {ci} violated by the truth (value {val:.3e})"
                    ));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pendulum_equilibrium_at_pi() {
        let env = environment_by_name("pendulum").unwrap();
        let xd = env.deriv(&[std::f64::consts::PI, 0.0], &[0.0]);
        assert!(xd[0].abs() < 1e-12);
        assert!(xd[1].abs() < 1e-9);
    }

    #[test]
    fn double_integrator_exact_step() {
        let env = environment_by_name("double_integrator").unwrap();
        let next = env.step(&[0.0, 0.0], &[1.0], 0.1);
        assert!((next[0] - 0.005).abs() < 1e-9);
        assert!((next[1] - 0.1).abs() < 1e-9);
    }

    #[test]
    fn duffing_reduces_to_autonomous_without_control() {
        let env = environment_by_name("duffing").unwrap();
        let x = [0.7, -0.3];
        let xd = env.deriv(&x, &[0.0]);
        let f = (env.f_true)(&x);
        assert_eq!(xd, f);
    }

    #[test]
    fn all_side_info_tiers_audit_clean() {
        for env in builtin_environments() {
            for tier in SideInfoTier::ALL {
                audit_side_info(&env, tier, 60, 42)
                    .unwrap_or_else(|e| panic!("{} {:?}: {e}", env.name, tier));
            }
        }
    }
}
