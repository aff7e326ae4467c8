//! Convolution kernels concentrated on one or two concentric circles that
//! realize a prescribed surface tension / mobility pair, and their
//! dt-scaled discrete stencils.
//!
//! A kernel K(r, theta) = sum_i omega_i(theta) delta(r - R_i) has surface
//! tension and mobility given by the moment system
//!   sum_i R_i^2 omega_i(theta) = (sigma + sigma'')(theta - pi/2) / 4
//!   sum_i       omega_i(theta) = 1 / m(theta - pi/2)
//! which for two distinct radii inverts to an explicit weight formula.

use crate::anisotropy::{convexity_margin, AnisotropyFn, MobilityFn};
use crate::error::{Error, Result};
use crate::geom::Vec2;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Which interface of the vapor-liquid-substrate system a stencil encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceLabel {
    VL,
    LS,
    VS,
}

/// One circle of a kernel: radius and weight samples at q uniform angles.
#[derive(Debug, Clone)]
pub struct KernelCircle {
    pub radius: f64,
    /// omega(theta_j) at theta_j = 2 pi j / q
    pub weights: Vec<f64>,
}

/// A kernel concentrated on concentric circles.
#[derive(Debug, Clone)]
pub struct CircleKernel {
    pub circles: Vec<KernelCircle>,
    /// minimum sampled weight (negative means the construction left the
    /// admissible radius range)
    pub min_weight: f64,
}

impl CircleKernel {
    pub fn samples_per_circle(&self) -> usize {
        self.circles[0].weights.len()
    }
}

/// Bounds on sqrt(m (sigma + sigma'') / 4) over `q` sample angles: the two
/// circle radii admit a positive kernel iff r2 < lo and r1 > hi.
pub fn radius_bounds(sigma: &AnisotropyFn, m: &MobilityFn, q: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..q {
        let th = TWO_PI * j as f64 / q as f64;
        let v = (0.25 * m.eval(th, 0) * sigma.stiffness(th)).sqrt();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Positive kernel on two concentric circles for the pair (sigma, m).
pub fn build_two_circle_kernel(
    sigma: &AnisotropyFn,
    m: &MobilityFn,
    r1: f64,
    r2: f64,
    q: usize,
) -> Result<CircleKernel> {
    if r1 <= 0.0 || r2 <= 0.0 || r1 == r2 {
        return Err(Error::Config(
            "two-circle kernel needs two distinct positive radii".into(),
        ));
    }
    if convexity_margin(sigma, 4096) <= 0.0 {
        return Err(Error::Config(
            "surface tension is not convex: no positive kernel exists".into(),
        ));
    }
    let det = r1 * r1 - r2 * r2;
    let mut w1 = Vec::with_capacity(q);
    let mut w2 = Vec::with_capacity(q);
    let mut min_weight = f64::INFINITY;
    let mut bad_angle = None;
    for j in 0..q {
        let th = TWO_PI * j as f64 / q as f64;
        let g = 0.25 * sigma.stiffness(th - HALF_PI);
        let h = 1.0 / m.eval(th - HALF_PI, 0);
        let o1 = (g - r2 * r2 * h) / det;
        let o2 = (-g + r1 * r1 * h) / det;
        if (o1 < 0.0 || o2 < 0.0) && bad_angle.is_none() {
            bad_angle = Some(th);
        }
        min_weight = min_weight.min(o1).min(o2);
        w1.push(o1);
        w2.push(o2);
    }
    if let Some(angle) = bad_angle {
        let (lo, hi) = radius_bounds(sigma, m, 4096.max(q));
        return Err(Error::PositivityViolation {
            angle,
            upper_bound: hi,
            lower_bound: lo,
        });
    }
    Ok(CircleKernel {
        circles: vec![
            KernelCircle { radius: r1, weights: w1 },
            KernelCircle { radius: r2, weights: w2 },
        ],
        min_weight,
    })
}

/// Kernel on a single circle of radius `r`; the mobility is then forced to
/// m = 4 r^2 / (sigma + sigma''), returned alongside for reporting.
pub fn build_single_circle_kernel(
    sigma: &AnisotropyFn,
    r: f64,
    q: usize,
) -> Result<(CircleKernel, MobilityFn)> {
    if r <= 0.0 {
        return Err(Error::Config("kernel radius must be positive".into()));
    }
    if convexity_margin(sigma, 4096) <= 0.0 {
        return Err(Error::Config(
            "surface tension is not convex: no positive kernel exists".into(),
        ));
    }
    let mut w = Vec::with_capacity(q);
    let mut min_weight = f64::INFINITY;
    for j in 0..q {
        let th = TWO_PI * j as f64 / q as f64;
        let o = sigma.stiffness(th - HALF_PI) / (4.0 * r * r);
        min_weight = min_weight.min(o);
        w.push(o);
    }
    let induced = MobilityFn::induced(sigma, r)?;
    Ok((
        CircleKernel {
            circles: vec![KernelCircle { radius: r, weights: w }],
            min_weight,
        },
        induced,
    ))
}

/// Reconstruct the moment data of a kernel and compare with the pair
/// (sigma, m) it should encode. Returns the max absolute deviations of
/// (sum R_i^2 omega_i) vs (sigma+sigma'')/4 and (sum omega_i) vs 1/m.
pub fn check_moments(k: &CircleKernel, sigma: &AnisotropyFn, m: &MobilityFn) -> (f64, f64) {
    let q = k.samples_per_circle();
    let mut dev_sigma = 0.0_f64;
    let mut dev_mob = 0.0_f64;
    for j in 0..q {
        let th = TWO_PI * j as f64 / q as f64;
        let mut second_moment = 0.0;
        let mut zeroth_moment = 0.0;
        for c in &k.circles {
            second_moment += c.radius * c.radius * c.weights[j];
            zeroth_moment += c.weights[j];
        }
        dev_sigma = dev_sigma.max((second_moment - 0.25 * sigma.stiffness(th - HALF_PI)).abs());
        dev_mob = dev_mob.max((zeroth_moment - 1.0 / m.eval(th - HALF_PI, 0)).abs());
    }
    (dev_sigma, dev_mob)
}

/// A dt-scaled discrete kernel: sample offsets in domain units with
/// quadrature weights. The common delta^{-d} prefactor is dropped; it is
/// shared by all three interface kernels and the Lagrange multiplier absorbs
/// any common scale.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub label: InterfaceLabel,
    pub dt: f64,
    pub offsets: Vec<Vec2>,
    pub weights: Vec<f64>,
    /// sum of weights = quadrature of the kernel mass
    pub mass: f64,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.offsets.iter().map(|o| o.norm()).fold(0.0, f64::max)
    }
}

/// Sample the circles of `k` at radius R_i sqrt(dt) with trapezoidal
/// quadrature weights R_i omega_i(theta_j) (2 pi / q).
pub fn discretize(k: &CircleKernel, dt: f64, label: InterfaceLabel) -> Stencil {
    assert!(dt > 0.0, "time step must be positive");
    let q = k.samples_per_circle();
    let dtheta = TWO_PI / q as f64;
    let scale = dt.sqrt();
    let mut offsets = Vec::with_capacity(q * k.circles.len());
    let mut weights = Vec::with_capacity(q * k.circles.len());
    let mut mass = 0.0;
    for c in &k.circles {
        for j in 0..q {
            let th = TWO_PI * j as f64 / q as f64;
            let (s, co) = th.sin_cos();
            offsets.push(Vec2::new(c.radius * scale * co, c.radius * scale * s));
            let w = c.radius * c.weights[j] * dtheta;
            weights.push(w);
            mass += w;
        }
    }
    Stencil {
        label,
        dt,
        offsets,
        weights,
        mass,
    }
}

/// Time-scale calibration applied when a stencil is meant to drive physical
/// dynamics (normal speed m (sigma + sigma'') kappa per unit time) rather
/// than to serve as a raw quadrature of the kernel.
///
/// For a thresholding scheme whose samples lie on circles of radius rho_i
/// with weights w_i, the interface displacement per step is, to leading
/// order in curvature, (kappa / 2) * (sum_i rho_i^2 w_i) / (sum_i w_i): the
/// second moment of the sample cloud restricted to the tangent line through
/// the node, divided by its mass. With the moment normalization used by
/// `build_two_circle_kernel` / `build_single_circle_kernel`
/// (sum R_i^2 omega_i = (sigma + sigma'')/4, sum omega_i = 1/m) and offsets
/// rho_i = R_i sqrt(dt), the displacement per step is
/// m (sigma + sigma'') kappa dt / 8. Scaling the offsets by sqrt(8) -- i.e.
/// sampling at R_i sqrt(8 dt) -- multiplies the second moment by 8 and
/// restores a displacement of m (sigma + sigma'') kappa dt per step. Weights
/// are left untouched, so stationary shapes, contact angles, and the
/// relative anisotropy of the three interfaces are unchanged; only the time
/// scale of the motion is calibrated.
pub const TIME_CALIBRATION: f64 = 8.0;

/// `discretize` with the offsets scaled for physical dynamics: samples at
/// radius R_i sqrt(TIME_CALIBRATION * dt), weights as in `discretize`. The
/// recorded `dt` is the physical step the stencil realizes.
pub fn discretize_calibrated(k: &CircleKernel, dt: f64, label: InterfaceLabel) -> Stencil {
    let mut s = discretize(k, TIME_CALIBRATION * dt, label);
    s.dt = dt;
    s
}

/// The three interface stencils of a run, aligned on identical offsets.
#[derive(Debug, Clone)]
pub struct StencilSet {
    pub vl: Stencil,
    pub ls: Stencil,
    pub vs: Stencil,
}

impl StencilSet {
    pub fn new(vl: Stencil, ls: Stencil, vs: Stencil) -> Result<Self> {
        if vl.len() != ls.len() || vl.len() != vs.len() {
            return Err(Error::Config("stencils have mismatched sample counts".into()));
        }
        for i in 0..vl.len() {
            let a = vl.offsets[i];
            if a.sub(ls.offsets[i]).norm() > 1e-14 || a.sub(vs.offsets[i]).norm() > 1e-14 {
                return Err(Error::Config("stencils have mismatched offsets".into()));
            }
        }
        Ok(StencilSet { vl, ls, vs })
    }

    pub fn len(&self) -> usize {
        self.vl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vl.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.vl
            .max_radius()
            .max(self.ls.max_radius())
            .max(self.vs.max_radius())
    }
}

/// Pointwise kernel triangle inequality: K^LS + K^VL - K^VS >= 0 and
/// K^VS + K^VL - K^LS >= 0 at every sample. When false, the level-set
/// functions of a median-filter run may develop level crossings; experiments
/// may still proceed.
pub fn triangle_check(set: &StencilSet) -> bool {
    for i in 0..set.len() {
        let (vl, ls, vs) = (set.vl.weights[i], set.ls.weights[i], set.vs.weights[i]);
        if ls + vl - vs < -1e-14 || vs + vl - ls < -1e-14 {
            return false;
        }
    }
    true
}
