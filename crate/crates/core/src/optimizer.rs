//! Rotation optimizers: the closed-form seed, particle swarm optimisation for
//! a point or an area, and exhaustive lattice search.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{clamp_angle, feasible, Rotation, Scenario, Vec3};
use crate::objective::{fitness_area, fitness_single, AreaGrid, FitnessParams};
use crate::{Error, Result};

/// Default threshold on the closed-form validity ratio.
pub const CLOSED_FORM_RATIO_THRESHOLD: f64 = 10.0;

/// Closed-form rotation that puts the BS on the surface normal, with the
/// ratio deciding whether the reflected azimuth is close to ±π/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub rotation: Rotation,
    pub ratio: f64,
    pub valid: bool,
}

impl ClosedForm {
    pub fn holds(&self, threshold: f64) -> bool {
        self.ratio.abs() > threshold
    }
}

/// `θ = arctan(−(y_B − y_c)/(x_B − x_c))`, `φ = arctan(−h / √((x_B−x_c)² + (y_B−y_c)²))`
/// with `h` the IRS height above the BS plane.
pub fn closed_form_rotation(scn: &Scenario, user: &Vec3) -> Result<ClosedForm> {
    let dx = scn.bs_center.x - scn.irs_center.x;
    let dy = scn.bs_center.y - scn.irs_center.y;
    let h = scn.irs_center.z - scn.bs_center.z;
    if dx == 0.0 {
        return Err(Error::domain("closed form needs the BS off the IRS x coordinate"));
    }
    let rho = dx.hypot(dy);
    let theta = (-dy / dx).atan();
    let phi = (-h / rho).atan();
    let ux = user.x - scn.irs_center.x;
    let uy = user.y - scn.irs_center.y;
    let num = (dx * uy - ux * dy) * (rho * rho + h * h).sqrt();
    let den = h * (rho * rho - dx * ux - uy * dy);
    let ratio = if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(num)
        }
    } else {
        num / den
    };
    let out = ClosedForm {
        rotation: Rotation::projected(theta, phi),
        ratio,
        valid: false,
    };
    Ok(ClosedForm {
        valid: out.holds(CLOSED_FORM_RATIO_THRESHOLD),
        ..out
    })
}

/// Swarm settings. Angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub c1: f64,
    pub c2: f64,
    pub w_ini: f64,
    pub w_end: f64,
    pub v_clamp: f64,
    pub seed: u64,
    /// Share of particles started near the closed-form rotation.
    pub seed_fraction: f64,
    pub seed_radius: f64,
    /// Run the inertia schedule from `w_end` to `w_ini` instead.
    pub swap_inertia: bool,
    /// Draw the random factors per component rather than once per particle.
    pub per_component_rand: bool,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 100,
            max_iters: 30,
            c1: 2.0,
            c2: 2.0,
            w_ini: 0.4,
            w_end: 0.9,
            v_clamp: 5f64.to_radians(),
            seed: 0,
            seed_fraction: 0.5,
            seed_radius: 5f64.to_radians(),
            swap_inertia: false,
            per_component_rand: false,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::validation("optimizer.swarm_size", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::validation("optimizer.max_iters", "must be at least 1"));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(Error::validation("optimizer.c1", "coefficients must be non-negative"));
        }
        if !(self.v_clamp > 0.0 && self.v_clamp.is_finite()) {
            return Err(Error::validation("optimizer.v_clamp_deg", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.seed_fraction) {
            return Err(Error::validation("optimizer.seed_fraction", "must lie in [0, 1]"));
        }
        if !(self.seed_radius >= 0.0) {
            return Err(Error::validation("optimizer.seed_radius_deg", "must be non-negative"));
        }
        Ok(())
    }

    /// `ω(t) = (ω_ini − ω_end)(T_max − t)/T_max + ω_end`.
    pub fn inertia(&self, t: usize) -> f64 {
        let (w0, w1) = if self.swap_inertia {
            (self.w_end, self.w_ini)
        } else {
            (self.w_ini, self.w_end)
        };
        let tm = self.max_iters as f64;
        (w0 - w1) * (tm - t as f64) / tm + w1
    }
}

/// Optimisation target: a single user position or an area lattice.
#[derive(Debug, Clone)]
pub enum Target {
    Point(Vec3),
    Area(AreaGrid),
}

impl Target {
    pub fn fitness(&self, scn: &Scenario, rot: Rotation, fp: &FitnessParams) -> Result<f64> {
        match self {
            Target::Point(p) => fitness_single(scn, rot, p, fp),
            Target::Area(g) => fitness_area(scn, rot, g, fp).map(|a| a.value),
        }
    }

    /// Location used for the closed-form seed.
    pub fn anchor(&self, scn: &Scenario) -> Vec3 {
        match self {
            Target::Point(p) => *p,
            Target::Area(_) => scn.area_center,
        }
    }

    pub fn is_feasible(&self, scn: &Scenario, rot: Rotation) -> bool {
        match self {
            Target::Point(p) => feasible(scn, rot, p).feasible,
            Target::Area(g) => g.points.iter().all(|p| feasible(scn, rot, p).feasible),
        }
    }

    fn worst_point(&self, scn: &Scenario, rot: Rotation, fp: &FitnessParams) -> Result<Option<Vec3>> {
        match self {
            Target::Point(_) => Ok(None),
            Target::Area(g) => Ok(Some(fitness_area(scn, rot, g, fp)?.worst_point)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Free,
    Fixed(f64),
}

/// Which rotation components the optimiser may move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    pub theta: Axis,
    pub phi: Axis,
}

impl SearchSpace {
    pub const FULL: SearchSpace = SearchSpace {
        theta: Axis::Free,
        phi: Axis::Free,
    };

    fn axes(&self) -> [Axis; 2] {
        [self.theta, self.phi]
    }

    /// Replace pinned components of `pos` by their fixed values and project.
    fn pin(&self, pos: [f64; 2]) -> [f64; 2] {
        let mut out = pos;
        for (d, axis) in self.axes().iter().enumerate() {
            out[d] = match axis {
                Axis::Free => clamp_angle(pos[d]),
                Axis::Fixed(v) => clamp_angle(*v),
            };
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub best_rotation: Rotation,
    pub best_fitness: f64,
    /// Global best fitness after each iteration (or lattice row).
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub feasible: bool,
    pub worst_point: Option<Vec3>,
}

struct Particle {
    pos: [f64; 2],
    vel: [f64; 2],
    best_pos: [f64; 2],
    best_fit: f64,
    rng: ChaCha8Rng,
}

fn to_rotation(p: [f64; 2]) -> Rotation {
    Rotation::projected(p[0], p[1])
}

/// Particle swarm over the free components of `space`.
///
/// Iteration 0 evaluates the initial swarm; every later iteration moves each
/// particle with `Ω ← G(Ω + ν)` and `ν ← ω ν + c₁ r₁ (Ω_lbest − Ω) + c₂ r₂ (Ω_gbest − Ω)`
/// before evaluating it, so exactly `B · T_max` fitness calls are made.
/// Each particle owns a ChaCha stream keyed by its index; evaluations within
/// an iteration run in parallel and the bests are reduced in index order.
pub fn pso<F>(space: &SearchSpace, seed: Option<Rotation>, params: &PsoParams, fitness: F) -> Result<OptimizationReport>
where
    F: Fn(Rotation) -> Result<f64> + Sync,
{
    params.validate()?;
    let axes = space.axes();
    let b = params.swarm_size;
    let n_seeded = match seed {
        Some(_) if params.seed_fraction > 0.0 => ((params.seed_fraction * b as f64).round() as usize).clamp(1, b),
        _ => 0,
    };
    let seed_pos = seed.map(|r| space.pin([r.theta(), r.phi()]));

    let mut swarm: Vec<Particle> = (0..b)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let mut pos = [0.0; 2];
            let mut vel = [0.0; 2];
            for d in 0..2 {
                if axes[d] != Axis::Free {
                    continue;
                }
                pos[d] = match seed_pos {
                    Some(s) if i == 0 && n_seeded > 0 => s[d],
                    Some(s) if i < n_seeded => s[d] + params.seed_radius * (2.0 * rng.gen::<f64>() - 1.0),
                    _ => -FRAC_PI_2 + PI * rng.gen::<f64>(),
                };
                vel[d] = params.v_clamp * (2.0 * rng.gen::<f64>() - 1.0);
            }
            Particle {
                pos: space.pin(pos),
                vel,
                best_pos: [0.0; 2],
                best_fit: f64::NEG_INFINITY,
                rng,
            }
        })
        .collect();

    let mut gbest = swarm[0].pos;
    let mut gbest_fit = f64::NEG_INFINITY;
    let mut trace = Vec::with_capacity(params.max_iters);
    let mut evaluations = 0;

    for t in 0..params.max_iters {
        if t > 0 {
            let w = params.inertia(t);
            for p in swarm.iter_mut() {
                let old = p.pos;
                let mut moved = [0.0; 2];
                for d in 0..2 {
                    moved[d] = old[d] + p.vel[d];
                }
                p.pos = space.pin(moved);
                let (r1, r2) = (p.rng.gen::<f64>(), p.rng.gen::<f64>());
                for d in 0..2 {
                    if axes[d] != Axis::Free {
                        p.vel[d] = 0.0;
                        continue;
                    }
                    let (r1, r2) = if params.per_component_rand && d == 1 {
                        (p.rng.gen::<f64>(), p.rng.gen::<f64>())
                    } else {
                        (r1, r2)
                    };
                    let v =
                        w * p.vel[d] + params.c1 * r1 * (p.best_pos[d] - old[d]) + params.c2 * r2 * (gbest[d] - old[d]);
                    p.vel[d] = v.clamp(-params.v_clamp, params.v_clamp);
                }
            }
        }
        let fits: Vec<Result<f64>> = swarm.par_iter().map(|p| fitness(to_rotation(p.pos))).collect();
        evaluations += fits.len();
        for (p, f) in swarm.iter_mut().zip(fits) {
            let f = f?;
            if f > p.best_fit {
                p.best_fit = f;
                p.best_pos = p.pos;
            }
            if p.best_fit > gbest_fit {
                gbest_fit = p.best_fit;
                gbest = p.best_pos;
            }
        }
        trace.push(gbest_fit);
    }

    Ok(OptimizationReport {
        best_rotation: to_rotation(gbest),
        best_fitness: gbest_fit,
        trace,
        evaluations,
        feasible: false,
        worst_point: None,
    })
}

/// Swarm search over `space` for `target`, seeded from the closed form.
pub fn pso_target(
    scn: &Scenario,
    target: &Target,
    space: &SearchSpace,
    params: &PsoParams,
    fp: &FitnessParams,
) -> Result<OptimizationReport> {
    let seed = closed_form_rotation(scn, &target.anchor(scn)).ok().map(|c| c.rotation);
    let mut report = pso(space, seed, params, |rot| target.fitness(scn, rot, fp))?;
    report.feasible = target.is_feasible(scn, report.best_rotation);
    report.worst_point = target.worst_point(scn, report.best_rotation, fp)?;
    Ok(report)
}

pub fn pso_single(scn: &Scenario, user: &Vec3, params: &PsoParams, fp: &FitnessParams) -> Result<OptimizationReport> {
    pso_target(scn, &Target::Point(*user), &SearchSpace::FULL, params, fp)
}

/// Two-loop search: the swarm moves rotations, each fitness call scans the grid.
pub fn pso_area(scn: &Scenario, grid: &AreaGrid, params: &PsoParams, fp: &FitnessParams) -> Result<OptimizationReport> {
    if grid.is_empty() {
        return Err(Error::domain("area grid has no points"));
    }
    pso_target(scn, &Target::Area(grid.clone()), &SearchSpace::FULL, params, fp)
}

/// `−π/2, −π/2 + step, …` up to and including `π/2`.
pub fn angle_lattice(step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::validation("es_step", "lattice step must be positive"));
    }
    let k = (PI / step + 1e-9).floor() as usize;
    let mut v: Vec<f64> = (0..=k).map(|i| clamp_angle(-FRAC_PI_2 + i as f64 * step)).collect();
    if FRAC_PI_2 - v[k] > 1e-12 {
        v.push(FRAC_PI_2);
    }
    Ok(v)
}

/// First maximiser in iteration order; `values` must be non-empty.
fn first_max(values: impl IntoIterator<Item = (usize, f64)>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, f) in values {
        if f > best.1 {
            best = (i, f);
        }
    }
    best
}

/// Exhaustive search on the `(θ, φ)` lattice, θ-major, ties to the first found.
pub fn exhaustive_search(scn: &Scenario, target: &Target, step: f64, fp: &FitnessParams) -> Result<OptimizationReport> {
    let lattice = angle_lattice(step)?;
    let rows: Vec<Result<(usize, f64)>> = lattice
        .par_iter()
        .map(|&theta| {
            let mut fits = Vec::with_capacity(lattice.len());
            for &phi in &lattice {
                fits.push(target.fitness(scn, Rotation::projected(theta, phi), fp)?);
            }
            Ok(first_max(fits.into_iter().enumerate()))
        })
        .collect();
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    let mut trace = Vec::with_capacity(lattice.len());
    for (i, row) in rows.into_iter().enumerate() {
        let (j, f) = row?;
        if f > best.2 {
            best = (i, j, f);
        }
        trace.push(best.2);
    }
    let rot = Rotation::projected(lattice[best.0], lattice[best.1]);
    Ok(OptimizationReport {
        best_rotation: rot,
        best_fitness: best.2,
        trace,
        evaluations: lattice.len() * lattice.len(),
        feasible: target.is_feasible(scn, rot),
        worst_point: target.worst_point(scn, rot, fp)?,
    })
}

/// Outcome of a one-dimensional placement search.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementReport {
    pub best_value: f64,
    pub best_fitness: f64,
    pub trace: Vec<f64>,
}

/// Exhaustive search over candidate values of a scalar placement parameter,
/// ties to the first found.
pub fn placement_search<F>(values: &[f64], fitness: F) -> Result<PlacementReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if values.is_empty() {
        return Err(Error::domain("placement search needs at least one candidate"));
    }
    let fits: Vec<Result<f64>> = values.par_iter().map(|&v| fitness(v)).collect();
    let fits: Vec<f64> = fits.into_iter().collect::<Result<_>>()?;
    let mut trace = Vec::with_capacity(fits.len());
    let mut run = f64::NEG_INFINITY;
    for &f in &fits {
        run = run.max(f);
        trace.push(run);
    }
    let (i, f) = first_max(fits.into_iter().enumerate());
    Ok(PlacementReport {
        best_value: values[i],
        best_fitness: f,
        trace,
    })
}
