//! Assembly of the discrete Dirichlet form as a resistor network.
//!
//! Radial edges carry the exact resistance integral between neighbouring
//! ring circles, angular edges a finite-volume conductance through the
//! shared face (harmonic mean of the one-sided weights where the face lies
//! on a cone boundary), and each innermost node may hop straight to the
//! origin with the exact conductance of its whole radial run down to 0.
//! That hop is the discrete shadow of the capacity dichotomy: it is
//! positive on degenerate cones and exactly zero on regular ones.
//!
//! The unit control weight gets a special origin rule.  Its exact
//! resistance to the origin diverges, which would disconnect the origin
//! from a network meant to model a *regular* point; instead it hops over
//! the inner half-cell [r_min/2, r_min], the standard finite-volume
//! treatment, so the control stays comparable ring for ring.

use crate::error::{Error, Result};
use crate::mesh::{PolarMesh, Topology, TopologyMode};
use crate::solve::{dot, mat_vec, SpdSolver, SymTriplets};
use crate::weights::{cell_mass, radial_resistance, WeightFamily, WeightSpec};
use sprs::CsMat;
use std::f64::consts::PI;

/// The assembled network: form matrix, lumped masses, and the origin hops.
pub struct FormMatrices {
    pub mesh: PolarMesh,
    pub topology: Topology,
    pub weight: WeightSpec,
    /// Form matrix S: graph Laplacian of the network.  In killed mode the
    /// origin conductances sit on the diagonal of the innermost ring (the
    /// origin is grounded); otherwise they are edges to the origin
    /// unknowns, which are numbered after the mesh nodes.
    pub s: CsMat<f64>,
    /// Lumped cell masses `int_cell rho dx`; origin nodes carry none.
    pub mass: Vec<f64>,
    /// Origin hop conductance per sector (zero when the hop is absent).
    pub origin_conductance: Vec<f64>,
}

/// Conductance of the hop from the innermost node of a sector to the
/// origin.  Exact radial resistance over [0, r_min]; infinite resistance
/// (a regular cone) gives zero.  The unit control uses the half-cell rule.
pub fn origin_hop_conductance(
    w: &WeightSpec,
    cone: usize,
    r_min: f64,
    dtheta: f64,
) -> Result<f64> {
    let resistance = if matches!(w.family, WeightFamily::UnitControl) {
        radial_resistance(w, cone, 0.5 * r_min, r_min, dtheta)?
    } else {
        radial_resistance(w, cone, 0.0, r_min, dtheta)?
    };
    if resistance.is_finite() {
        Ok(1.0 / resistance)
    } else {
        Ok(0.0)
    }
}

pub fn assemble(mesh: &PolarMesh, topology: &Topology, weight: &WeightSpec) -> Result<FormMatrices> {
    let m = mesh.sectors;
    let k_rings = mesh.rings();
    let n_mesh = mesh.num_nodes();
    let n = n_mesh + topology.origin_nodes;
    let dtheta = mesh.dtheta;
    let mut tri = SymTriplets::new(n);

    // Radial edges between consecutive rings of the same sector.
    for j in 0..m {
        let cone = topology.sector_cone[j];
        for k in 0..k_rings - 1 {
            let r = radial_resistance(weight, cone, mesh.ring_radii[k], mesh.ring_radii[k + 1], dtheta)?;
            tri.add_edge(mesh.node_index(k, j), mesh.node_index(k + 1, j), 1.0 / r);
        }
    }

    // Angular edges through the face between sectors j and j+1, evaluated
    // at the face-center radius of each ring cell.  On a cone boundary the
    // two one-sided weights combine by harmonic mean (half-faces in
    // series).
    for j in 0..m {
        let j_next = (j + 1) % m;
        let cone_l = topology.sector_cone[j];
        let cone_r = topology.sector_cone[j_next];
        for k in 0..k_rings {
            let (lo, hi) = mesh.cell_span(k);
            let r_mid = 0.5 * (lo + hi);
            let rho_l = weight.rho_radial(cone_l, r_mid)?;
            let rho_r = weight.rho_radial(cone_r, r_mid)?;
            let rho_face = 2.0 / (1.0 / rho_l + 1.0 / rho_r);
            let c = rho_face * (hi - lo) / (r_mid * dtheta);
            tri.add_edge(mesh.node_index(k, j), mesh.node_index(k, j_next), c);
        }
    }

    // Origin hops.
    let mut origin_conductance = vec![0.0; m];
    for j in 0..m {
        let c = origin_hop_conductance(weight, topology.sector_cone[j], mesh.r_min(), dtheta)?;
        origin_conductance[j] = c;
        match topology.mode {
            TopologyMode::Killed => tri.add_ground(mesh.node_index(0, j), c),
            _ => {
                if let Some(o) = topology.sector_origin[j] {
                    tri.add_edge(mesh.node_index(0, j), topology.origin_index(mesh, o), c);
                }
            }
        }
    }

    let s = tri.into_csr();

    // Every unknown must be wired in, or S + alpha M is singular.
    check_connected(&s, n_mesh, topology)?;

    let mut mass = vec![0.0; n];
    for j in 0..m {
        let cone = topology.sector_cone[j];
        for k in 0..k_rings {
            let (lo, hi) = mesh.cell_span(k);
            mass[mesh.node_index(k, j)] = cell_mass(weight, cone, lo, hi, dtheta)?;
        }
    }

    Ok(FormMatrices {
        mesh: mesh.clone(),
        topology: topology.clone(),
        weight: *weight,
        s,
        mass,
        origin_conductance,
    })
}

/// Breadth-first check that the conductance graph reaches every unknown.
fn check_connected(s: &CsMat<f64>, n_mesh: usize, topology: &Topology) -> Result<()> {
    let n = s.rows();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        if let Some(row) = s.outer_view(i) {
            for (j, &v) in row.iter() {
                if j != i && v != 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    if let Some(i) = seen.iter().position(|&b| !b) {
        let what = if i >= n_mesh {
            format!(
                "origin node {} (mode {:?}) has no conducting attachment",
                i - n_mesh,
                topology.mode
            )
        } else {
            format!("mesh node {i} is unreachable")
        };
        return Err(Error::config(format!("network is disconnected: {what}")));
    }
    Ok(())
}

impl FormMatrices {
    pub fn num_unknowns(&self) -> usize {
        self.s.rows()
    }

    pub fn n_mesh(&self) -> usize {
        self.mesh.num_nodes()
    }

    /// Dirichlet energy `u^T S u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        dot(u, &mat_vec(&self.s, u))
    }

    /// Weighted L2 inner product with the lumped masses.
    pub fn mass_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    /// The form `E_alpha(u, v) = u^T S v + alpha <u, v>_rho`.
    pub fn form_inner(&self, alpha: f64, u: &[f64], v: &[f64]) -> f64 {
        dot(u, &mat_vec(&self.s, v)) + alpha * self.mass_inner(u, v)
    }

    /// `S + alpha diag(mass)`, the system matrix of the alpha-resolvent.
    pub fn s_alpha(&self, alpha: f64) -> Result<CsMat<f64>> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be positive, got {alpha}")));
        }
        let mut s = self.s.clone();
        for (i, m) in self.mass.iter().enumerate() {
            if *m != 0.0 {
                match s.get_mut(i, i) {
                    Some(d) => *d += alpha * m,
                    None => {
                        return Err(Error::numerical(format!(
                            "missing diagonal entry at node {i}"
                        )))
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn solver(&self, alpha: f64) -> Result<SpdSolver> {
        SpdSolver::new(self.s_alpha(alpha)?)
    }

    /// The killed form matrix: the mesh-node principal block of S.  The
    /// diagonal keeps the origin hop conductances, which is exactly the
    /// grounded-origin (killed) network.
    pub fn killed_block(&self) -> CsMat<f64> {
        principal_block(&self.s, self.n_mesh())
    }

    /// Mean of `u` over the innermost ring arc of the i-th degenerate cone
    /// (1-based), the discrete boundary trace at the origin.
    pub fn trace_cone(&self, u: &[f64], i: usize) -> Result<f64> {
        // Cone layout from the topology, so traces also work on control
        // networks pairing a cone topology with the unit weight.
        let max_cone = *self.topology.sector_cone.iter().max().unwrap_or(&0);
        let n = max_cone / 2;
        if n < 1 {
            return Err(Error::domain("cone traces need a cone topology".to_string()));
        }
        if i < 1 || i > n {
            return Err(Error::domain(format!("degenerate cone index {i} out of 1..={n}")));
        }
        let cone = 2 * i - 1;
        let opening = PI / n as f64;
        let mut acc = 0.0;
        for j in 0..self.mesh.sectors {
            if self.topology.sector_cone[j] == cone {
                acc += u[self.mesh.node_index(0, j)] * self.mesh.dtheta;
            }
        }
        Ok(acc / opening)
    }

    /// Trace over the first quadrant cone (two-quadrant layout).
    pub fn trace_plus(&self, u: &[f64]) -> Result<f64> {
        self.trace_cone(u, 1)
    }

    /// Trace over the third quadrant cone (two-quadrant layout).
    pub fn trace_minus(&self, u: &[f64]) -> Result<f64> {
        self.trace_cone(u, 2)
    }
}

/// Top-left `k x k` principal block.
pub fn principal_block(s: &CsMat<f64>, k: usize) -> CsMat<f64> {
    let mut tri = sprs::TriMat::new((k, k));
    for (v, (i, j)) in s.iter() {
        if i < k && j < k {
            tri.add_triplet(i, j, *v);
        }
    }
    tri.to_csr()
}

/// Node values of the split test function `psi_i` on the mesh, one cone
/// family member per degenerate cone: `(1 - r^2)_+ h_i(theta)` where `h_i`
/// is 1 on the i-th degenerate cone, falls off as `cos(N beta / 2)` across
/// the two neighbouring regular cones (`beta` the angular distance past
/// the cone), and vanishes beyond.  For the two-quadrant layout and i = 1
/// this is the classical example: 1 on Q1, `sin theta` on Q2, 0 on Q3,
/// `cos theta` on Q4.
///
/// The returned vector covers all unknowns; in split mode the origin entry
/// of cone i is 1 and the others 0, which are the cone-wise limits at the
/// origin.
pub fn psi_grid(forms: &FormMatrices, i: usize) -> Result<Vec<f64>> {
    // The cone layout lives in the topology, so the test function is also
    // available on control networks that pair a cone topology with the
    // unit weight.
    let max_cone = *forms.topology.sector_cone.iter().max().unwrap_or(&0);
    let n_cones = max_cone / 2;
    if n_cones < 1 {
        return Err(Error::domain(
            "the split test functions need a cone topology".to_string(),
        ));
    }
    if i < 1 || i > n_cones {
        return Err(Error::domain(format!(
            "degenerate cone index {i} out of 1..={n_cones}"
        )));
    }
    let n = n_cones as f64;
    let mesh = &forms.mesh;
    // Center angle of the i-th degenerate cone C_{2i-1}.
    let center = (2.0 * i as f64 - 1.5) * PI / n;
    let half_open = PI / (2.0 * n);
    let h = |theta: f64| -> f64 {
        let mut d = (theta - center).rem_euclid(2.0 * PI);
        if d > PI {
            d -= 2.0 * PI;
        }
        let d = d.abs();
        if d <= half_open {
            1.0
        } else if d < 3.0 * half_open {
            (n * (d - half_open) / 2.0).cos()
        } else {
            0.0
        }
    };
    let mut u = vec![0.0; forms.num_unknowns()];
    for node in 0..mesh.num_nodes() {
        let r = mesh.ring_radii[mesh.node_ring(node)];
        let hump = (1.0 - r * r).max(0.0);
        u[node] = hump * h(mesh.sector_angle(mesh.node_sector(node)));
    }
    if forms.topology.mode == TopologyMode::Split {
        u[forms.topology.origin_index(mesh, i - 1)] = 1.0;
    }
    Ok(u)
}

/// The two-quadrant split test function (psi over the first quadrant).
pub fn psi0_grid(forms: &FormMatrices) -> Result<Vec<f64>> {
    psi_grid(forms, 1)
}

/// Split a vector into a zero-trace-gap part and a multiple of `psi0`:
/// `u = v + lambda * psi0` with
///
///   lambda = (trace+(u) - trace-(u)) / (trace+(psi0) - trace-(psi0)).
///
/// Normalizing by the discrete trace gap of `psi0` (which is 1 - r_min^2,
/// not 1) makes the decomposition idempotent: `v` has exactly equal traces
/// at quadrature level, the discrete membership test for the glued form
/// domain.
pub fn decompose(forms: &FormMatrices, u: &[f64]) -> Result<(Vec<f64>, f64)> {
    if forms.topology.mode == TopologyMode::Killed {
        return Err(Error::domain(
            "decomposition needs an origin-carrying topology".to_string(),
        ));
    }
    let psi = psi0_grid(forms)?;
    let psi_gap = forms.trace_plus(&psi)? - forms.trace_minus(&psi)?;
    if psi_gap.abs() < 1e-12 {
        return Err(Error::numerical(format!(
            "trace gap {psi_gap:.3e} of the jump function is degenerate"
        )));
    }
    let lambda = (forms.trace_plus(u)? - forms.trace_minus(u)?) / psi_gap;
    let v: Vec<f64> = u.iter().zip(&psi).map(|(a, p)| a - lambda * p).collect();
    Ok((v, lambda))
}

/// Squared `E_1` distance from `u` (on a split network) to the glued
/// subspace, the vectors taking a single value at the origin.  The
/// subspace has codimension one, so the projection reduces to a single
/// linear solve: with `b = e(o+) - e(o-)` and `z` solving `S_1 z = b`,
///
///   dist^2 = (u(o+) - u(o-))^2 / (z(o+) - z(o-)),
///
/// the squared gap of `u` over the effective `E_1` resistance between the
/// two origins.
pub fn glued_distance_sq(split: &FormMatrices, u: &[f64]) -> Result<f64> {
    if split.topology.mode != TopologyMode::Split || split.topology.origin_nodes != 2 {
        return Err(Error::domain(
            "distance to glued needs a split network with two origins".to_string(),
        ));
    }
    let o_plus = split.topology.origin_index(&split.mesh, 0);
    let o_minus = split.topology.origin_index(&split.mesh, 1);
    let gap = u[o_plus] - u[o_minus];
    if gap == 0.0 {
        return Ok(0.0);
    }
    let mut b = vec![0.0; split.num_unknowns()];
    b[o_plus] = 1.0;
    b[o_minus] = -1.0;
    let z = split.solver(1.0)?.solve(&b)?;
    let resistance = z[o_plus] - z[o_minus];
    if !(resistance > 0.0) {
        return Err(Error::numerical(format!(
            "non-positive effective resistance {resistance:.3e} between the origins"
        )));
    }
    Ok(gap * gap / resistance)
}
