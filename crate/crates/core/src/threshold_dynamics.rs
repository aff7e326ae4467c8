//! Binary threshold dynamics on indicator masks: the baseline scheme the
//! median filter refines. Deliberately naive — off-grid stencil samples are
//! classified by the nearest node and areas are counted by nodes — so that
//! its resolution limitations (interface pinning) stay observable.

use crate::error::{Error, Result};
use crate::fields::{Grid2D, LevelSetState};
use crate::geom::Vec2;
use crate::kernels::StencilSet;

/// Node masks of the liquid and solid phases; vapor is the complement.
#[derive(Debug, Clone)]
pub struct BinaryPartition {
    pub grid: Grid2D,
    pub l: Vec<bool>,
    pub s: Vec<bool>,
}

impl BinaryPartition {
    pub fn new(grid: Grid2D, l: Vec<bool>, s: Vec<bool>) -> Result<Self> {
        if l.len() != grid.num_nodes() || s.len() != grid.num_nodes() {
            return Err(Error::Config("mask length mismatch".into()));
        }
        if l.iter().zip(&s).any(|(&a, &b)| a && b) {
            return Err(Error::Config("liquid and solid masks overlap".into()));
        }
        Ok(BinaryPartition { grid, l, s })
    }

    /// Threshold a level-set state at level 0.
    pub fn from_state(state: &LevelSetState) -> Self {
        let s: Vec<bool> = state.phi_s.values.iter().map(|&v| v >= 0.0).collect();
        let l: Vec<bool> = state
            .phi_l
            .values
            .iter()
            .zip(&s)
            .map(|(&v, &solid)| v >= 0.0 && !solid)
            .collect();
        BinaryPartition { grid: state.grid(), l, s }
    }

    pub fn liquid_nodes(&self) -> usize {
        self.l.iter().filter(|&&b| b).count()
    }

    /// Node-counted liquid area.
    pub fn liquid_area(&self) -> f64 {
        let dx = self.grid.dx();
        self.liquid_nodes() as f64 * dx * dx
    }

    fn nearest_node(&self, p: Vec2) -> usize {
        let n = self.grid.n as f64;
        let ix = (p.x * n).round() as isize;
        let iy = (p.y * n).round() as isize;
        self.grid.idx(ix, iy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    L,
    V,
    S,
}

/// The thresholding sum at a non-solid node with the nearest-node sample
/// classification; mu here follows the binary scheme's own sign convention
/// (larger mu shrinks the droplet).
fn psi(node: (usize, usize), part: &BinaryPartition, stencils: &StencilSet, mu: f64) -> f64 {
    let pos = part.grid.node_pos(node.0, node.1);
    let mut acc = mu;
    for j in 0..stencils.len() {
        let q = pos.add(stencils.vl.offsets[j]);
        let i = part.nearest_node(q);
        let phase = if part.s[i] {
            Phase::S
        } else if part.l[i] {
            Phase::L
        } else {
            Phase::V
        };
        acc += match phase {
            Phase::V => stencils.vl.weights[j],
            Phase::L => -stencils.vl.weights[j],
            Phase::S => stencils.ls.weights[j] - stencils.vs.weights[j],
        };
    }
    acc
}

/// Decide whether a non-solid node belongs to the next liquid set.
pub fn decide(
    node: (usize, usize),
    part: &BinaryPartition,
    stencils: &StencilSet,
    mu: f64,
) -> Result<bool> {
    let i = part.grid.idx(node.0 as isize, node.1 as isize);
    if part.s[i] {
        return Err(Error::Config("decide called on a solid node".into()));
    }
    Ok(psi(node, part, stencils, mu) <= 0.0)
}

/// Same decision as `decide` but with the shared bilinear classification on
/// the level-set fields, for exact cross-checks against the median filter.
/// mu uses this module's sign convention (mapped to the median filter's as
/// mu_median = -mu).
pub fn decide_shared(
    node: (usize, usize),
    state: &LevelSetState,
    params: &crate::vls_stepper::StepParams,
    mu: f64,
) -> bool {
    crate::vls_stepper::level_decision_oracle(
        node,
        state,
        params,
        -mu,
        0.0,
        crate::vls_stepper::Viewpoint::L,
    )
}

/// One unconstrained update with a fixed multiplier.
pub fn td_step_fixed_mu(part: &BinaryPartition, stencils: &StencilSet, mu: f64) -> BinaryPartition {
    let n = part.grid.n;
    let mut l = vec![false; part.grid.num_nodes()];
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            if !part.s[i] {
                l[i] = psi((ix, iy), part, stencils, mu) <= 0.0;
            }
        }
    }
    BinaryPartition { grid: part.grid, l, s: part.s.clone() }
}

/// One area-constrained update: bisect mu until the node-counted liquid
/// area is within mu_tol of A.
pub fn td_step(
    part: &BinaryPartition,
    stencils: &StencilSet,
    target_area: f64,
    mu_tol: f64,
) -> Result<(BinaryPartition, f64)> {
    let mass = stencils.vl.mass;
    // area is non-increasing in this module's mu
    let (mut lo, mut hi) = (-2.0 * mass, 2.0 * mass);
    let area_at = |mu: f64| td_step_fixed_mu(part, stencils, mu).liquid_area();
    let mut a_lo = area_at(lo);
    let mut a_hi = area_at(hi);
    let mut width = hi - lo;
    let mut doublings = 0;
    while a_lo < target_area || a_hi > target_area {
        if doublings >= 40 {
            return Err(Error::MultiplierNotBracketed);
        }
        if a_lo < target_area {
            lo -= width;
            a_lo = area_at(lo);
        }
        if a_hi > target_area {
            hi += width;
            a_hi = area_at(hi);
        }
        width *= 2.0;
        doublings += 1;
    }
    let (mut best_mu, mut best_err) = (lo, (a_lo - target_area).abs());
    if (a_hi - target_area).abs() < best_err {
        best_mu = hi;
        best_err = (a_hi - target_area).abs();
    }
    for _ in 0..64 {
        if best_err <= mu_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let a_mid = area_at(mid);
        if (a_mid - target_area).abs() < best_err {
            best_mu = mid;
            best_err = (a_mid - target_area).abs();
        }
        if a_mid > target_area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((td_step_fixed_mu(part, stencils, best_mu), best_mu))
}

/// Nonlocal interfacial energy of a partition under the kernel triple,
/// prefactor 1/sqrt(dt) included. Diagnostic only: single-circle kernels may
/// violate monotone decay.
pub fn nonlocal_energy(part: &BinaryPartition, stencils: &StencilSet, dt: f64) -> f64 {
    let n = part.grid.n;
    let dx2 = part.grid.dx() * part.grid.dx();
    let mut total = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            if !part.l[i] {
                continue;
            }
            let pos = part.grid.node_pos(ix, iy);
            let mut acc = 0.0;
            for j in 0..stencils.len() {
                let k = part.nearest_node(pos.add(stencils.vl.offsets[j]));
                if part.s[k] {
                    acc += stencils.ls.weights[j]
                        - stencils.vs.weights[j]
                        - stencils.vl.weights[j];
                } else if part.l[k] {
                    acc -= stencils.vl.weights[j];
                }
            }
            total += acc;
        }
    }
    total * dx2 / dt.sqrt()
}
