//! Explicit marker-point reference integrator for a single droplet on a flat
//! substrate: forward Euler in time, centered differences on arclength, with
//! an area-conserving multiplier and relaxed contact-point dynamics.
//!
//! The curve runs from the left contact point to the right contact point over
//! the top of the droplet; with the liquid below, this orientation is
//! clockwise and the outward normal is the tangent rotated by +90 degrees.
//!
//! Contact points move horizontally with velocity proportional to the
//! residual of the anisotropic contact (Young) condition, with relaxation
//! constant eta = 100 * max(m). This relaxed law converges to the same
//! stationary contact condition; the transient junction motion is a modeling
//! choice of this reference integrator, documented here on purpose.

use crate::anisotropy::{contact_condition_residual, AnisotropyFn, MobilityFn};
use crate::error::{Error, Result};
use crate::geom::{segments_intersect, Polyline, Vec2};

/// Marker points p_0 ... p_M with p_0 (left) and p_M (right) on the
/// substrate line y = substrate_height and interior points strictly above.
#[derive(Debug, Clone)]
pub struct MarkerCurve {
    pub points: Vec<Vec2>,
    pub substrate_height: f64,
}

impl MarkerCurve {
    pub fn new(points: Vec<Vec2>, substrate_height: f64) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Config("marker curve needs at least 3 points".into()));
        }
        let c = substrate_height;
        let (first, last) = (points[0], points[points.len() - 1]);
        if first.y != c || last.y != c {
            return Err(Error::Config(
                "marker curve endpoints must lie exactly on the substrate".into(),
            ));
        }
        if first.x >= last.x {
            return Err(Error::Config(
                "marker curve must run left to right over the droplet".into(),
            ));
        }
        if points[1..points.len() - 1].iter().any(|p| p.y <= c) {
            return Err(Error::Config(
                "interior marker points must lie strictly above the substrate".into(),
            ));
        }
        Ok(MarkerCurve { points, substrate_height })
    }

    /// Circular cap with contact angle `theta` (0 < theta < pi), radius `r`,
    /// centered horizontally at `cx`, sampled with m+1 markers.
    pub fn circular_cap(cx: f64, substrate_height: f64, r: f64, theta: f64, m: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) || r <= 0.0 || m < 2 {
            return Err(Error::Config("invalid circular cap parameters".into()));
        }
        // circle center sits at height c - r cos(theta); arc spans the
        // inclination range [pi/2 - theta, pi/2 + theta] left to right
        let cy = substrate_height - r * theta.cos();
        let pts = (0..=m)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + theta
                    - 2.0 * theta * k as f64 / m as f64;
                let (s, co) = a.sin_cos();
                let y = if k == 0 || k == m {
                    substrate_height
                } else {
                    cy + r * s
                };
                Vec2::new(cx + r * co, y)
            })
            .collect();
        Self::new(pts, substrate_height)
    }

    /// Semicircle of radius `r` (contact angle pi/2).
    pub fn semicircle(cx: f64, substrate_height: f64, r: f64, m: usize) -> Result<Self> {
        Self::circular_cap(cx, substrate_height, r, std::f64::consts::FRAC_PI_2, m)
    }

    /// Resample an arbitrary left-to-right marker polyline (endpoints on the
    /// substrate) to m+1 markers at uniform arclength.
    pub fn resampled(points: &[Vec2], substrate_height: f64, m: usize) -> Result<Self> {
        let pts = resample_uniform(points, m);
        Self::new(pts, substrate_height)
    }

    pub fn resolution(&self) -> usize {
        self.points.len() - 1
    }

    pub fn arclength(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].sub(w[0]).norm())
            .sum()
    }

    pub fn to_polyline(&self) -> Polyline {
        Polyline::open(self.points.clone())
    }
}

/// Shoelace area enclosed between the curve and the substrate segment.
pub fn curve_area(c: &MarkerCurve) -> f64 {
    // the closed polygon (markers + returning substrate segment) is
    // clockwise for a droplet above the substrate, so negate the shoelace sum
    -crate::geom::signed_area(&c.points)
}

/// One-sided contact angles (left, right), measured inside the liquid
/// between the substrate and the interface, from second-order one-sided
/// tangents at the endpoints.
pub fn contact_angles(c: &MarkerCurve) -> (f64, f64) {
    let pts = &c.points;
    let m = pts.len() - 1;
    // tangent into the curve at an endpoint from three points at arclengths
    // 0, h1, h1+h2
    let one_sided = |p0: Vec2, p1: Vec2, p2: Vec2| -> Vec2 {
        let h1 = p1.sub(p0).norm();
        let h2 = p2.sub(p1).norm();
        let c0 = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
        let c1 = (h1 + h2) / (h1 * h2);
        let c2 = -h1 / (h2 * (h1 + h2));
        Vec2::new(
            c0 * p0.x + c1 * p1.x + c2 * p2.x,
            c0 * p0.y + c1 * p1.y + c2 * p2.y,
        )
    };
    let dl = one_sided(pts[0], pts[1], pts[2]);
    let dr = one_sided(pts[m], pts[m - 1], pts[m - 2]);
    // angle between the interior substrate direction (+x left, -x right) and
    // the direction climbing into the droplet
    let theta_l = dl.y.atan2(dl.x);
    let theta_r = dr.y.atan2(-dr.x);
    (theta_l, theta_r)
}

/// Largest stable forward-Euler step for the current curve:
/// 0.4 * (min spacing)^2 / max(m * (sigma + sigma'')).
pub fn stable_dt(c: &MarkerCurve, sigma_vl: &AnisotropyFn, m_vl: &MobilityFn) -> f64 {
    let min_ds = c
        .points
        .windows(2)
        .map(|w| w[1].sub(w[0]).norm())
        .fold(f64::INFINITY, f64::min);
    let mut max_stiff = 0.0_f64;
    for j in 0..256 {
        let th = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
        max_stiff = max_stiff.max(m_vl.eval(th, 0) * sigma_vl.stiffness(th));
    }
    0.4 * min_ds * min_ds / max_stiff
}

fn resample_uniform(points: &[Vec2], m: usize) -> Vec<Vec2> {
    let mut s = vec![0.0_f64];
    for w in points.windows(2) {
        s.push(s.last().unwrap() + w[1].sub(w[0]).norm());
    }
    let total = *s.last().unwrap();
    let mut out = Vec::with_capacity(m + 1);
    out.push(points[0]);
    let mut seg = 0;
    for k in 1..m {
        let target = total * k as f64 / m as f64;
        while seg + 2 < points.len() && s[seg + 1] < target {
            seg += 1;
        }
        let t = (target - s[seg]) / (s[seg + 1] - s[seg]);
        out.push(points[seg].add(points[seg + 1].sub(points[seg]).scale(t)));
    }
    out.push(points[points.len() - 1]);
    out
}

/// True when any two non-adjacent segments of the curve intersect.
pub fn self_intersects(c: &MarkerCurve) -> bool {
    let pts = &c.points;
    let m = pts.len() - 1;
    for i in 0..m {
        for j in (i + 2)..m {
            if i == 0 && j == m - 1 {
                // the first and last segments are non-adjacent on the open
                // curve but share the substrate corridor; still check them
            }
            if segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                return true;
            }
        }
    }
    false
}

struct NodeGeometry {
    normal: Vec2,
    /// m(theta) * (sigma + sigma'')(theta)
    stiff: f64,
    mobility: f64,
    curvature: f64,
    /// arclength weight (half the two adjacent spacings)
    ds: f64,
}

fn interior_geometry(
    pts: &[Vec2],
    sigma_vl: &AnisotropyFn,
    m_vl: &MobilityFn,
) -> Vec<NodeGeometry> {
    let m = pts.len() - 1;
    let mut out = Vec::with_capacity(m - 1);
    for i in 1..m {
        let (pm, p0, pp) = (pts[i - 1], pts[i], pts[i + 1]);
        let hm = p0.sub(pm).norm();
        let hp = pp.sub(p0).norm();
        // centered differences on (non-uniform) arclength
        let d1 = pp.sub(pm).scale(1.0 / (hm + hp));
        let d2 = pp
            .sub(p0)
            .scale(1.0 / hp)
            .sub(p0.sub(pm).scale(1.0 / hm))
            .scale(2.0 / (hm + hp));
        let speed = d1.norm();
        let curvature = d1.cross(d2) / (speed * speed * speed);
        let normal = Vec2::new(-d1.y, d1.x).scale(1.0 / speed);
        // the anisotropy argument is the outward normal angle
        let theta = normal.y.atan2(normal.x);
        let mobility = m_vl.eval(theta, 0);
        out.push(NodeGeometry {
            normal,
            stiff: mobility * sigma_vl.stiffness(theta),
            mobility,
            curvature,
            ds: 0.5 * (hm + hp),
        });
    }
    out
}

/// Move interior nodes by `d` along their normals and the endpoints
/// horizontally by d / sin(theta*) outward, so the whole curve shifts by `d`
/// in the normal direction.
fn displaced(
    pts: &[Vec2],
    normals: &[Vec2],
    sin_l: f64,
    sin_r: f64,
    substrate_height: f64,
    d: f64,
) -> Vec<Vec2> {
    let m = pts.len() - 1;
    let mut out = Vec::with_capacity(m + 1);
    out.push(Vec2::new(pts[0].x - d / sin_l, pts[0].y));
    for i in 1..m {
        let q = pts[i].add(normals[i - 1].scale(d));
        out.push(Vec2::new(q.x, q.y.max(substrate_height + 1e-15)));
    }
    out.push(Vec2::new(pts[m].x + d / sin_r, pts[m].y));
    out
}

/// One forward-Euler step of the normal-speed law
/// V = m(theta) ((sigma + sigma'') kappa + mu) with mu chosen so the discrete
/// normal flux vanishes, relaxed contact-point motion, uniform-arclength
/// redistribution, and an exact area restoration.
pub fn ft_step(
    c: &MarkerCurve,
    sigma_vl: &AnisotropyFn,
    m_vl: &MobilityFn,
    sigma_ls: f64,
    sigma_vs: f64,
    dt: f64,
) -> Result<MarkerCurve> {
    if c.points.len() < 8 {
        return Err(Error::OracleBreakdown(
            "marker curve has fewer than 8 nodes".into(),
        ));
    }
    let bound = stable_dt(c, sigma_vl, m_vl);
    if dt > bound * (1.0 + 1e-9) {
        return Err(Error::Config(format!(
            "time step {dt} exceeds the stability bound {bound}"
        )));
    }
    let target_area = curve_area(c);
    let pts = &c.points;
    let m = pts.len() - 1;
    let geo = interior_geometry(pts, sigma_vl, m_vl);

    // multiplier zeroing the discrete normal flux
    let mut num = 0.0;
    let mut den = 0.0;
    for g in &geo {
        num += g.stiff * g.curvature * g.ds;
        den += g.mobility * g.ds;
    }
    let mu = -num / den;

    // interior motion
    let mut new_pts = Vec::with_capacity(m + 1);
    new_pts.push(pts[0]);
    for (i, g) in geo.iter().enumerate() {
        let v = g.stiff * g.curvature + g.mobility * mu;
        let q = pts[i + 1].add(g.normal.scale(v * dt));
        new_pts.push(Vec2::new(
            q.x,
            q.y.max(c.substrate_height + 1e-15),
        ));
    }
    new_pts.push(pts[m]);

    // relaxed contact-point motion: horizontal velocity proportional to the
    // contact-condition residual, sign chosen so a too-steep contact angle
    // spreads the droplet and a too-shallow one retracts it
    let mut eta = 0.0_f64;
    for j in 0..256 {
        let th = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
        eta = eta.max(100.0 * m_vl.eval(th, 0));
    }
    let (theta_l, theta_r) = contact_angles(c);
    let res_l = contact_condition_residual(sigma_vl, theta_l, sigma_ls, sigma_vs);
    // the tangent climbing out of the right contact has inclination -theta_r,
    // the mirror image of the left contact's +theta_l
    let res_r = contact_condition_residual(sigma_vl, -theta_r, sigma_ls, sigma_vs);
    new_pts[0].x += eta * res_l * dt;
    new_pts[m].x -= eta * res_r * dt;

    // uniform-arclength redistribution
    let mut new_pts = resample_uniform(&new_pts, m);

    // exact area restoration by a uniform normal displacement: the area is
    // continuous and monotone in the displacement, so solve it by Newton
    // iteration on d (a(d) ~ a + L d)
    let (tl, tr) = {
        let tmp = MarkerCurve {
            points: new_pts.clone(),
            substrate_height: c.substrate_height,
        };
        contact_angles(&tmp)
    };
    let sin_l = tl.sin().max(0.05);
    let sin_r = tr.sin().max(0.05);
    let normals: Vec<Vec2> = interior_geometry(&new_pts, sigma_vl, m_vl)
        .into_iter()
        .map(|g| g.normal)
        .collect();
    let base = new_pts.clone();
    let mut d = 0.0_f64;
    for _ in 0..24 {
        let area = -crate::geom::signed_area(&new_pts);
        let err = target_area - area;
        if err.abs() <= 1e-15 * target_area.max(1e-30) {
            break;
        }
        let length: f64 = new_pts.windows(2).map(|w| w[1].sub(w[0]).norm()).sum();
        d += err / length;
        new_pts = displaced(&base, &normals, sin_l, sin_r, c.substrate_height, d);
    }

    MarkerCurve::new(new_pts, c.substrate_height)
}

/// Evolve to final time `T`, choosing steps at half the stability bound and
/// checking for self-intersection every 256 steps.
pub fn ft_run(
    mut c: MarkerCurve,
    sigma_vl: &AnisotropyFn,
    m_vl: &MobilityFn,
    sigma_ls: f64,
    sigma_vs: f64,
    final_time: f64,
    max_dt: Option<f64>,
) -> Result<MarkerCurve> {
    let mut t = 0.0;
    let mut steps = 0usize;
    while t < final_time {
        let mut dt = 0.5 * stable_dt(&c, sigma_vl, m_vl);
        if let Some(cap) = max_dt {
            dt = dt.min(cap);
        }
        dt = dt.min(final_time - t);
        c = ft_step(&c, sigma_vl, m_vl, sigma_ls, sigma_vs, dt)?;
        t += dt;
        steps += 1;
        if steps.is_multiple_of(256) && self_intersects(&c) {
            return Err(Error::OracleBreakdown(
                "marker curve self-intersected".into(),
            ));
        }
    }
    Ok(c)
}
