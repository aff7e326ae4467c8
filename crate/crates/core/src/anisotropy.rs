//! Orientation-dependent surface tensions and mobilities with exact
//! derivatives, plus Wulff / Winterbottom reference shape construction.
//!
//! Surface tensions are represented by closed-form function families so that
//! first and second derivatives (needed by the kernel construction and the
//! reference shapes) are exact rather than finite-differenced.

use crate::error::{Error, Result};
use crate::geom::{clip_polygon_above, signed_area, Polyline, Vec2};

/// Which squared trig function a [`Profile::TrigSquared`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

/// One `A * cos(k*theta - phase)` term of a harmonic series; `k` must be even
/// so the profile is pi-periodic.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicTerm {
    pub amplitude: f64,
    pub frequency: u32,
    pub phase: f64,
}

/// Closed-form, pi-periodic profile on inclination angles.
///
/// Every admitted kind is structurally centrally symmetric: squared trig
/// functions and even-frequency harmonics satisfy f(theta + pi) = f(theta)
/// identically.
#[derive(Debug, Clone)]
pub enum Profile {
    /// f(theta) = c
    Constant(f64),
    /// f(theta) = scale * (1 + a * trig^2(theta - phase))^power
    TrigSquared {
        a: f64,
        phase: f64,
        trig: Trig,
        power: f64,
        scale: f64,
    },
    /// f(theta) = c0 + sum_k A_k cos(k theta - phase_k)
    Harmonics { c0: f64, terms: Vec<HarmonicTerm> },
    /// f(theta) = scale / (sigma(theta) + sigma''(theta)); the mobility a
    /// single-circle kernel of radius R induces has scale = 4 R^2.
    InducedInverseStiffness { sigma: Box<Profile>, scale: f64 },
}

impl Profile {
    /// n-th derivative, exact. Orders above 2 are needed internally when a
    /// profile is nested inside `InducedInverseStiffness`.
    pub(crate) fn deriv(&self, theta: f64, order: usize) -> f64 {
        match self {
            Profile::Constant(c) => {
                if order == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Profile::TrigSquared {
                a,
                phase,
                trig,
                power,
                scale,
            } => {
                // 1 + a*sin^2(psi) = b + e*cos(2 psi) with b = 1 + a/2, e = -a/2
                // (e flips sign for cos^2).
                let psi = theta - phase;
                let b = 1.0 + 0.5 * a;
                let e = match trig {
                    Trig::Sin => -0.5 * a,
                    Trig::Cos => 0.5 * a,
                };
                let (c2, s2) = ((2.0 * psi).cos(), (2.0 * psi).sin());
                let u = b + e * c2;
                let u1 = -2.0 * e * s2;
                let u2 = -4.0 * e * c2;
                let u3 = 8.0 * e * s2;
                let u4 = 16.0 * e * c2;
                let p = *power;
                let s = *scale;
                match order {
                    0 => s * u.powf(p),
                    1 => s * p * u.powf(p - 1.0) * u1,
                    2 => s * (p * (p - 1.0) * u.powf(p - 2.0) * u1 * u1 + p * u.powf(p - 1.0) * u2),
                    3 => {
                        s * (p * (p - 1.0) * (p - 2.0) * u.powf(p - 3.0) * u1 * u1 * u1
                            + 3.0 * p * (p - 1.0) * u.powf(p - 2.0) * u1 * u2
                            + p * u.powf(p - 1.0) * u3)
                    }
                    4 => {
                        s * (p * (p - 1.0) * (p - 2.0) * (p - 3.0) * u.powf(p - 4.0) * u1.powi(4)
                            + 6.0 * p * (p - 1.0) * (p - 2.0) * u.powf(p - 3.0) * u1 * u1 * u2
                            + 3.0 * p * (p - 1.0) * u.powf(p - 2.0) * u2 * u2
                            + 4.0 * p * (p - 1.0) * u.powf(p - 2.0) * u1 * u3
                            + p * u.powf(p - 1.0) * u4)
                    }
                    _ => unreachable!("derivative order {order} not supported"),
                }
            }
            Profile::Harmonics { c0, terms } => {
                let mut v = if order == 0 { *c0 } else { 0.0 };
                for t in terms {
                    let k = t.frequency as f64;
                    let arg = k * theta - t.phase + order as f64 * std::f64::consts::FRAC_PI_2;
                    v += t.amplitude * k.powi(order as i32) * arg.cos();
                }
                v
            }
            Profile::InducedInverseStiffness { sigma, scale } => {
                let g = sigma.deriv(theta, 0) + sigma.deriv(theta, 2);
                match order {
                    0 => scale / g,
                    1 => {
                        let g1 = sigma.deriv(theta, 1) + sigma.deriv(theta, 3);
                        -scale * g1 / (g * g)
                    }
                    2 => {
                        let g1 = sigma.deriv(theta, 1) + sigma.deriv(theta, 3);
                        let g2 = sigma.deriv(theta, 2) + sigma.deriv(theta, 4);
                        scale * (2.0 * g1 * g1 / (g * g * g) - g2 / (g * g))
                    }
                    _ => unreachable!("derivative order {order} not supported for induced mobility"),
                }
            }
        }
    }

    fn check_positive(&self, what: &str) -> Result<()> {
        const SAMPLES: usize = 1024;
        for j in 0..SAMPLES {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / SAMPLES as f64;
            let v = self.deriv(theta, 0);
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{what} must be positive and finite; found {v} at theta={theta}"
                )));
            }
        }
        Ok(())
    }

    fn check_even_harmonics(&self) -> Result<()> {
        if let Profile::Harmonics { terms, .. } = self {
            for t in terms {
                if t.frequency == 0 || t.frequency % 2 != 0 {
                    return Err(Error::Config(format!(
                        "harmonic frequency {} must be even and nonzero",
                        t.frequency
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A surface tension sigma(theta): positive, pi-periodic, with exact
/// derivatives.
#[derive(Debug, Clone)]
pub struct AnisotropyFn {
    profile: Profile,
}

impl AnisotropyFn {
    pub fn new(profile: Profile) -> Result<Self> {
        profile.check_even_harmonics()?;
        profile.check_positive("surface tension")?;
        Ok(AnisotropyFn { profile })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Profile::Constant(c))
    }

    /// sqrt(1 + a sin^2(theta - phase))
    pub fn sqrt_sin2(a: f64, phase: f64) -> Result<Self> {
        Self::new(Profile::TrigSquared {
            a,
            phase,
            trig: Trig::Sin,
            power: 0.5,
            scale: 1.0,
        })
    }

    /// sqrt(1 + a cos^2(theta - phase))
    pub fn sqrt_cos2(a: f64, phase: f64) -> Result<Self> {
        Self::new(Profile::TrigSquared {
            a,
            phase,
            trig: Trig::Cos,
            power: 0.5,
            scale: 1.0,
        })
    }

    pub fn harmonics(c0: f64, terms: Vec<HarmonicTerm>) -> Result<Self> {
        Self::new(Profile::Harmonics { c0, terms })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// sigma, sigma' or sigma'' (order 0, 1, 2), closed form.
    pub fn eval(&self, theta: f64, order: usize) -> f64 {
        assert!(order <= 2, "eval supports derivative orders 0..=2");
        self.profile.deriv(theta, order)
    }

    /// sigma(theta) + sigma''(theta): the interfacial stiffness.
    pub fn stiffness(&self, theta: f64) -> f64 {
        self.profile.deriv(theta, 0) + self.profile.deriv(theta, 2)
    }
}

/// A mobility m(theta): positive, pi-periodic.
#[derive(Debug, Clone)]
pub struct MobilityFn {
    profile: Profile,
}

impl MobilityFn {
    pub fn new(profile: Profile) -> Result<Self> {
        profile.check_even_harmonics()?;
        profile.check_positive("mobility")?;
        Ok(MobilityFn { profile })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(Profile::Constant(c))
    }

    pub fn harmonics(c0: f64, terms: Vec<HarmonicTerm>) -> Result<Self> {
        Self::new(Profile::Harmonics { c0, terms })
    }

    /// The mobility induced by a single-circle kernel of radius `r` built for
    /// `sigma`: m = 4 r^2 / (sigma + sigma'').
    pub fn induced(sigma: &AnisotropyFn, r: f64) -> Result<Self> {
        Self::new(Profile::InducedInverseStiffness {
            sigma: Box::new(sigma.profile.clone()),
            scale: 4.0 * r * r,
        })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn eval(&self, theta: f64, order: usize) -> f64 {
        assert!(order <= 2, "eval supports derivative orders 0..=2");
        self.profile.deriv(theta, order)
    }
}

/// Surface tensions and mobilities for the three interfaces of the
/// vapor-liquid-substrate system.
#[derive(Debug, Clone)]
pub struct SurfaceTensionTriple {
    pub sigma_vl: AnisotropyFn,
    pub sigma_ls: AnisotropyFn,
    pub sigma_vs: AnisotropyFn,
    pub m_vl: MobilityFn,
    pub m_ls: MobilityFn,
    pub m_vs: MobilityFn,
    /// Whether the strong (stiffness) triangle inequality holds at all
    /// sampled angles. Informational: runs may proceed when false.
    pub strong_triangle: bool,
}

impl SurfaceTensionTriple {
    pub fn new(
        sigma_vl: AnisotropyFn,
        sigma_ls: AnisotropyFn,
        sigma_vs: AnisotropyFn,
        m_vl: MobilityFn,
        m_ls: MobilityFn,
        m_vs: MobilityFn,
    ) -> Result<Self> {
        const SAMPLES: usize = 4096;
        let mut strong = true;
        for j in 0..SAMPLES {
            let th = 2.0 * std::f64::consts::PI * j as f64 / SAMPLES as f64;
            let (vl, ls, vs) = (
                sigma_vl.eval(th, 0),
                sigma_ls.eval(th, 0),
                sigma_vs.eval(th, 0),
            );
            let tol = 1e-12 * (vl + ls + vs);
            if vl + ls < vs - tol || vl + vs < ls - tol || ls + vs < vl - tol {
                return Err(Error::Config(format!(
                    "surface tensions violate the triangle inequality at theta={th}"
                )));
            }
            let (svl, sls, svs) = (
                sigma_vl.stiffness(th),
                sigma_ls.stiffness(th),
                sigma_vs.stiffness(th),
            );
            if svl + sls < svs - tol || svl + svs < sls - tol || sls + svs < svl - tol {
                strong = false;
            }
        }
        Ok(SurfaceTensionTriple {
            sigma_vl,
            sigma_ls,
            sigma_vs,
            m_vl,
            m_ls,
            m_vs,
            strong_triangle: strong,
        })
    }
}

/// Minimum of sigma + sigma'' over `samples` uniform angles. Kernels must be
/// rejected when this is <= 0.
pub fn convexity_margin(f: &AnisotropyFn, samples: usize) -> f64 {
    assert!(samples >= 360);
    let mut min = f64::INFINITY;
    for j in 0..samples {
        let th = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
        min = min.min(f.stiffness(th));
    }
    min
}

/// Wulff boundary point at parameter theta:
/// x = -sigma(theta - pi/2) sin(theta) - sigma'(theta - pi/2) cos(theta),
/// y =  sigma(theta - pi/2) cos(theta) - sigma'(theta - pi/2) sin(theta).
pub fn wulff_point(sigma: &AnisotropyFn, theta: f64) -> Vec2 {
    let psi = theta - std::f64::consts::FRAC_PI_2;
    let s = sigma.eval(psi, 0);
    let s1 = sigma.eval(psi, 1);
    let (sin_t, cos_t) = theta.sin_cos();
    Vec2::new(-s * sin_t - s1 * cos_t, s * cos_t - s1 * sin_t)
}

/// Closed, positively oriented boundary polyline of the Wulff shape.
pub fn wulff_boundary(sigma: &AnisotropyFn, n: usize) -> Result<Polyline> {
    if convexity_margin(sigma, 4096.max(n)) <= 0.0 {
        return Err(Error::Config(
            "surface tension is not convex (sigma + sigma'' <= 0 somewhere)".into(),
        ));
    }
    let pts = (0..n)
        .map(|i| wulff_point(sigma, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect();
    Ok(Polyline::closed(pts))
}

/// Winterbottom (truncated Wulff) equilibrium droplet on a flat substrate.
///
/// Returns the boundary polyline of `lambda * W_sigma` intersected with
/// `y >= lambda * (sigma_vs - sigma_ls)`, translated vertically so the flat
/// face lies on `y = substrate_height`, together with the scale `lambda`
/// solved so the region has area `area`.
pub fn winterbottom_shape(
    sigma_vl: &AnisotropyFn,
    sigma_ls: f64,
    sigma_vs: f64,
    area: f64,
    substrate_height: f64,
) -> Result<(Polyline, f64)> {
    const N: usize = 4096;
    if area <= 0.0 {
        return Err(Error::Config("requested area must be positive".into()));
    }
    let wulff = wulff_boundary(sigma_vl, N)?;
    let delta = sigma_vs - sigma_ls;
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &wulff.points {
        y_min = y_min.min(p.y);
        y_max = y_max.max(p.y);
    }
    if delta <= y_min || delta >= y_max {
        return Err(Error::Config(
            "truncation line lies outside the Wulff shape: no equilibrium droplet".into(),
        ));
    }

    let truncated_area = |lambda: f64| -> f64 {
        // the clipped region is lambda * (W intersect {y >= delta}), but the
        // bisection is carried out on the scaled polygon directly
        let scaled: Vec<Vec2> = wulff.points.iter().map(|p| p.scale(lambda)).collect();
        signed_area(&clip_polygon_above(&scaled, lambda * delta))
    };

    // bracket then bisect to relative tolerance 1e-10 in lambda
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut expand = 0;
    while truncated_area(hi) < area {
        hi *= 2.0;
        expand += 1;
        if expand > 60 {
            return Err(Error::Config("Winterbottom scale not bracketed".into()));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if truncated_area(mid) < area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    let scaled: Vec<Vec2> = wulff.points.iter().map(|p| p.scale(lambda)).collect();
    let clipped = clip_polygon_above(&scaled, lambda * delta);
    let shift = substrate_height - lambda * delta;
    let pts = clipped
        .into_iter()
        .map(|p| Vec2::new(p.x, p.y + shift))
        .collect();
    Ok((Polyline::closed(pts), lambda))
}

/// Left-hand side of the anisotropic contact (Young) condition at a contact
/// point with one-sided inclination `theta_star`. The surface tension takes
/// the outward normal angle theta_star + pi/2 as its argument, so the
/// residual vanishes exactly at the contact inclinations of the truncated
/// Wulff droplet. A diagnostic, not an imposed condition.
pub fn contact_condition_residual(
    sigma_vl: &AnisotropyFn,
    theta_star: f64,
    sigma_ls: f64,
    sigma_vs: f64,
) -> f64 {
    let u = theta_star + std::f64::consts::FRAC_PI_2;
    sigma_vl.eval(u, 0) * theta_star.cos() - sigma_vl.eval(u, 1) * theta_star.sin() + sigma_ls
        - sigma_vs
}
