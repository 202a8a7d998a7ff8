use anyhow::{bail, Context, Result};
use hessdamp::analysis::InitBox;
use hessdamp::problems::{
    deblur_objective, double_well, phantom, pgm_read, rosenbrock, synthesize_observation,
    DeblurProblem, Image, Kernel, Quadratic,
};
use hessdamp::{estimate_lipschitz, Objective, Point, WithLipschitz};

use crate::config::{ProblemKind, RunConfig};

const LIPSCHITZ_PAIRS: usize = 2000;

/// Where the Lipschitz constant in use came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzSource {
    Config,
    Problem,
    /// Sampled over the init box; a lower estimate, not a bound.
    Estimated,
}

impl LipschitzSource {
    pub fn name(self) -> &'static str {
        match self {
            LipschitzSource::Config => "config",
            LipschitzSource::Problem => "problem",
            LipschitzSource::Estimated => "estimated",
        }
    }
}

pub struct DeblurImages {
    pub truth: Image,
    pub observation: Image,
}

pub struct Built {
    pub objective: Box<dyn Objective>,
    pub lipschitz: f64,
    pub lipschitz_source: LipschitzSource,
    pub x0: Point,
    pub x1: Point,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub images: Option<DeblurImages>,
}

impl Built {
    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn init_box(&self) -> Result<InitBox> {
        Ok(InitBox::new(self.lower.clone(), self.upper.clone())?)
    }
}

/// Gradient scaled by 1.05: a negative control for the gradient check.
pub struct Corrupted(pub Box<dyn Objective>);

impl Objective for Corrupted {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, x: &Point) -> f64 {
        self.0.eval(x)
    }

    fn grad(&self, x: &Point) -> Point {
        self.0.grad(x) * 1.05
    }
}

fn vector(name: &str, v: &[f64], d: usize) -> Result<Point> {
    if v.len() != d {
        bail!("`{name}` has {} entries but the problem has dimension {d}", v.len());
    }
    Ok(Point::from_column_slice(v))
}

fn deblur(cfg: &RunConfig) -> Result<(Box<dyn Objective>, DeblurImages)> {
    let spec = &cfg.deblur;
    let kernel = Kernel::gaussian(spec.kernel_size, spec.kernel_sigma)?;
    let truth = match &spec.image {
        Some(path) => pgm_read(path).with_context(|| format!("cannot load {}", path.display()))?,
        None => {
            if spec.size == 0 {
                bail!("`deblur.size` must be positive");
            }
            phantom(spec.size)
        }
    };
    let observation = synthesize_observation(&truth, &kernel, spec.noise, spec.noise_seed);
    let problem = DeblurProblem::new(kernel, observation.clone(), spec.mu, spec.rho)?;
    Ok((
        Box::new(deblur_objective(problem)),
        DeblurImages { truth, observation },
    ))
}

pub fn build(cfg: &RunConfig) -> Result<Built> {
    let (objective, images): (Box<dyn Objective>, Option<DeblurImages>) = match cfg.problem {
        ProblemKind::Rosenbrock => (Box::new(rosenbrock()), None),
        ProblemKind::DoubleWell => (Box::new(double_well()), None),
        ProblemKind::Quadratic => {
            let q = &cfg.quadratic;
            (
                Box::new(Quadratic::random_spd(q.dim, q.lambda_min, q.lambda_max, q.seed)?),
                None,
            )
        }
        ProblemKind::Deblur => {
            let (f, images) = deblur(cfg)?;
            (f, Some(images))
        }
    };
    let d = objective.dim();

    let (lo, hi) = if cfg.problem == ProblemKind::Deblur {
        (0.0, 1.0)
    } else {
        (-2.0, 2.0)
    };
    let lower = cfg.box_lower.clone().unwrap_or_else(|| vec![lo; d]);
    let upper = cfg.box_upper.clone().unwrap_or_else(|| vec![hi; d]);
    if lower.len() != d || upper.len() != d {
        bail!("init box has dimension {}/{} but the problem has dimension {d}", lower.len(), upper.len());
    }
    let init = InitBox::new(lower.clone(), upper.clone())?;

    let x0 = match (&cfg.x0, cfg.problem, &images) {
        (Some(v), _, _) => vector("init.x0", v, d)?,
        (None, ProblemKind::Rosenbrock, _) => Point::from_vec(vec![-1.5, 0.0]),
        (None, _, Some(img)) => img.observation.to_point(),
        (None, _, None) => init.sample(cfg.seed, 0),
    };
    let x1 = match &cfg.x1 {
        Some(v) => vector("init.x1", v, d)?,
        None => x0.clone(),
    };

    let (lipschitz, lipschitz_source) = match (cfg.lipschitz, objective.lipschitz()) {
        (Some(l), _) => (l, LipschitzSource::Config),
        (None, Some(l)) => (l, LipschitzSource::Problem),
        (None, None) => (
            estimate_lipschitz(&objective, &lower, &upper, LIPSCHITZ_PAIRS, cfg.seed)?,
            LipschitzSource::Estimated,
        ),
    };
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        bail!("Lipschitz constant must be positive, got {lipschitz}");
    }
    let objective: Box<dyn Objective> = if lipschitz_source == LipschitzSource::Problem {
        objective
    } else {
        Box::new(WithLipschitz::new(objective, lipschitz))
    };

    Ok(Built {
        objective,
        lipschitz,
        lipschitz_source,
        x0,
        x1,
        lower,
        upper,
        images,
    })
}
