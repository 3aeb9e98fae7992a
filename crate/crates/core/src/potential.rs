//! Potential theory on the assembled networks: capacities, hitting
//! probabilities, resolvents, and the rank-one / rank-two identities that
//! relate the killed, glued and split networks.
//!
//! The identities are exact graph algebra, not asymptotics, so the checks
//! here compare quantities computed along independent routes (boundary
//! flux vs quadratic form, mass pairing vs flux pairing, direct resolvent
//! vs corrected killed resolvent) and report residuals that should sit at
//! solver precision.

use crate::error::{Error, Result};
use crate::forms::FormMatrices;
use crate::mesh::TopologyMode;
use crate::solve::{mat_vec, SpdSolver};
use sprs::{CsMat, TriMat};

/// Solve `A x = extra_rhs` with the listed entries pinned, returning the
/// full-length vector.  Rows and columns of pinned nodes are eliminated;
/// their values load the right-hand side.
fn pinned_solve(
    a: &CsMat<f64>,
    pinned: &[(usize, f64)],
    extra_rhs: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = a.rows();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &(i, v) in pinned {
        if i >= n {
            return Err(Error::domain(format!("pinned node {i} out of range 0..{n}")));
        }
        if let Some(old) = fixed[i] {
            if old != v {
                return Err(Error::domain(format!(
                    "node {i} pinned to both {old} and {v}"
                )));
            }
        }
        fixed[i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut index_of: Vec<Option<usize>> = vec![None; n];
    for (fi, &i) in free.iter().enumerate() {
        index_of[i] = Some(fi);
    }
    let mut out = vec![0.0; n];
    for (i, f) in fixed.iter().enumerate() {
        if let Some(v) = f {
            out[i] = *v;
        }
    }
    if free.is_empty() {
        return Ok(out);
    }

    let mut tri = TriMat::new((free.len(), free.len()));
    let mut rhs = vec![0.0; free.len()];
    if let Some(er) = extra_rhs {
        for (fi, &i) in free.iter().enumerate() {
            rhs[fi] = er[i];
        }
    }
    for (v, (i, j)) in a.iter() {
        match (index_of[i], index_of[j]) {
            (Some(fi), Some(fj)) => tri.add_triplet(fi, fj, *v),
            (Some(fi), None) => rhs[fi] -= v * fixed[j].unwrap(),
            _ => {}
        }
    }
    let x = SpdSolver::new(tri.to_csr())?.solve(&rhs)?;
    for (fi, &i) in free.iter().enumerate() {
        out[i] = x[fi];
    }
    Ok(out)
}

/// Equilibrium potential and capacity of a node set.
pub struct CapacityResult {
    /// `E_alpha(u, u)` of the equilibrium potential, the variational route.
    pub capacity: f64,
    /// Total flux out of the target, `sum_{i in target} (A u)_i`, the
    /// boundary route.  Equals `capacity` up to solver error.
    pub flux: f64,
    /// The equilibrium potential itself: 1 on the target, alpha-harmonic
    /// elsewhere.
    pub potential: Vec<f64>,
}

/// `cap_alpha(target) = min { E_alpha(u) : u = 1 on the target }`.
pub fn capacity(forms: &FormMatrices, alpha: f64, target: &[usize]) -> Result<CapacityResult> {
    if target.is_empty() {
        return Err(Error::config("capacity of the empty set requested".to_string()));
    }
    let a = forms.s_alpha(alpha)?;
    let pins: Vec<(usize, f64)> = target.iter().map(|&i| (i, 1.0)).collect();
    let u = pinned_solve(&a, &pins, None)?;
    let au = mat_vec(&a, &u);
    let flux: f64 = target.iter().map(|&i| au[i]).sum();
    let capacity = forms.form_inner(alpha, &u, &u);
    Ok(CapacityResult { capacity, flux, potential: u })
}

/// Capacity of the origin: all origin unknowns pinned at 1.
pub fn origin_capacity(forms: &FormMatrices, alpha: f64) -> Result<CapacityResult> {
    if forms.topology.origin_nodes == 0 {
        return Err(Error::domain(
            "the killed network has no origin unknowns to charge".to_string(),
        ));
    }
    let targets: Vec<usize> = (0..forms.topology.origin_nodes)
        .map(|i| forms.topology.origin_index(&forms.mesh, i))
        .collect();
    capacity(forms, alpha, &targets)
}

/// Harmonic hitting probabilities of the two origin nodes of a split
/// network: `phi_plus(i)` is the probability the walk from node i reaches
/// the first-cone origin before the other one.  Both are computed by
/// independent solves; recurrence makes them sum to one.
pub fn hitting_probs_split(forms: &FormMatrices) -> Result<(Vec<f64>, Vec<f64>)> {
    let (o_plus, o_minus) = split_origins(forms)?;
    let phi_plus = pinned_solve(&forms.s, &[(o_plus, 1.0), (o_minus, 0.0)], None)?;
    let phi_minus = pinned_solve(&forms.s, &[(o_plus, 0.0), (o_minus, 1.0)], None)?;
    Ok((phi_plus, phi_minus))
}

/// The alpha-order analogues: `u_alpha^+` is 1 at the first origin, 0 at
/// the other, alpha-harmonic in between (the expected alpha-discount of
/// the hitting time, split by approach side).
pub fn alpha_potentials_split(
    forms: &FormMatrices,
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (o_plus, o_minus) = split_origins(forms)?;
    let a = forms.s_alpha(alpha)?;
    let u_plus = pinned_solve(&a, &[(o_plus, 1.0), (o_minus, 0.0)], None)?;
    let u_minus = pinned_solve(&a, &[(o_plus, 0.0), (o_minus, 1.0)], None)?;
    Ok((u_plus, u_minus))
}

/// The single-origin alpha-potential of the glued network.
pub fn glued_alpha_potential(forms: &FormMatrices, alpha: f64) -> Result<Vec<f64>> {
    if forms.topology.mode != TopologyMode::Glued {
        return Err(Error::domain("glued potential needs a glued network".to_string()));
    }
    let o = forms.topology.origin_index(&forms.mesh, 0);
    pinned_solve(&forms.s_alpha(alpha)?, &[(o, 1.0)], None)
}

fn split_origins(forms: &FormMatrices) -> Result<(usize, usize)> {
    if forms.topology.mode != TopologyMode::Split || forms.topology.origin_nodes != 2 {
        return Err(Error::domain(
            "this computation needs a split network with two origin nodes".to_string(),
        ));
    }
    Ok((
        forms.topology.origin_index(&forms.mesh, 0),
        forms.topology.origin_index(&forms.mesh, 1),
    ))
}

/// Resolvent on the full network: `(S + alpha M) u = M f`.  `f` is given on
/// mesh nodes (origin nodes carry no mass, so they contribute nothing).
pub fn resolvent(forms: &FormMatrices, alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
    let n = forms.num_unknowns();
    if f.len() < forms.n_mesh() {
        return Err(Error::domain(format!(
            "source term has {} entries, need at least {}",
            f.len(),
            forms.n_mesh()
        )));
    }
    let mut rhs = vec![0.0; n];
    for i in 0..forms.n_mesh() {
        rhs[i] = forms.mass[i] * f[i];
    }
    forms.solver(alpha)?.solve(&rhs)
}

/// Resolvent of the killed network (origin grounded), on mesh nodes only.
pub fn killed_resolvent(forms: &FormMatrices, alpha: f64, f: &[f64]) -> Result<Vec<f64>> {
    let n_mesh = forms.n_mesh();
    if f.len() < n_mesh {
        return Err(Error::domain(format!(
            "source term has {} entries, need at least {n_mesh}",
            f.len()
        )));
    }
    let mut a0 = forms.killed_block();
    for i in 0..n_mesh {
        let m = forms.mass[i];
        if m != 0.0 {
            match a0.get_mut(i, i) {
                Some(d) => *d += alpha * m,
                None => {
                    return Err(Error::numerical(format!("missing diagonal at node {i}")))
                }
            }
        }
    }
    let rhs: Vec<f64> = (0..n_mesh).map(|i| forms.mass[i] * f[i]).collect();
    SpdSolver::new(a0)?.solve(&rhs)
}

/// Flux pairing against the hops of one origin node:
/// `sum_j c_j v(innermost node of sector j)` over the sectors attached to
/// that origin.
pub fn origin_flux(forms: &FormMatrices, origin_local: usize, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..forms.mesh.sectors {
        if forms.topology.sector_origin[j] == Some(origin_local) {
            acc += forms.origin_conductance[j] * v[forms.mesh.node_index(0, j)];
        }
    }
    acc
}

/// Mass pairing over the mesh nodes.
fn mesh_mass_inner(forms: &FormMatrices, u: &[f64], v: &[f64]) -> f64 {
    (0..forms.n_mesh()).map(|i| forms.mass[i] * u[i] * v[i]).sum()
}

/// The boundary coefficients of the split extension, each along two
/// independent routes (mass pairing and origin flux).
pub struct GammaCoefficients {
    /// `(c+)^T phi-`: cross flux at order zero.
    pub cross_flux_plus: f64,
    /// `(c-)^T phi+`: the same coefficient from the other side.
    pub cross_flux_minus: f64,
    pub pp_alpha_mass: f64,
    pub pp_alpha_flux: f64,
    pub pm_alpha_mass: f64,
    pub pm_alpha_flux: f64,
    pub mm_alpha_mass: f64,
    pub mm_alpha_flux: f64,
    pub mp_alpha_mass: f64,
    pub mp_alpha_flux: f64,
    /// `gamma_pp + gamma_pm - alpha <u+, 1>`: the mass balance, zero in
    /// exact arithmetic because `phi+ + phi- = 1`.
    pub sum_rule_plus: f64,
    pub sum_rule_minus: f64,
}

pub fn gamma_coefficients(forms: &FormMatrices, alpha: f64) -> Result<GammaCoefficients> {
    let (phi_plus, phi_minus) = hitting_probs_split(forms)?;
    let (u_plus, u_minus) = alpha_potentials_split(forms, alpha)?;
    gamma_from_potentials(forms, alpha, &phi_plus, &phi_minus, &u_plus, &u_minus)
}

fn gamma_from_potentials(
    forms: &FormMatrices,
    alpha: f64,
    phi_plus: &[f64],
    phi_minus: &[f64],
    u_plus: &[f64],
    u_minus: &[f64],
) -> Result<GammaCoefficients> {
    let ones = vec![1.0; forms.num_unknowns()];
    let cross_flux_plus = origin_flux(forms, 0, phi_minus);
    let cross_flux_minus = origin_flux(forms, 1, phi_plus);
    let pp_alpha_mass = alpha * mesh_mass_inner(forms, u_plus, phi_plus);
    let pm_alpha_mass = alpha * mesh_mass_inner(forms, u_plus, phi_minus);
    let mm_alpha_mass = alpha * mesh_mass_inner(forms, u_minus, phi_minus);
    let mp_alpha_mass = alpha * mesh_mass_inner(forms, u_minus, phi_plus);
    let pp_alpha_flux = origin_flux(forms, 0, phi_plus) - origin_flux(forms, 0, u_plus);
    let pm_alpha_flux = origin_flux(forms, 0, phi_minus) - origin_flux(forms, 1, u_plus);
    let mm_alpha_flux = origin_flux(forms, 1, phi_minus) - origin_flux(forms, 1, u_minus);
    let mp_alpha_flux = origin_flux(forms, 1, phi_plus) - origin_flux(forms, 0, u_minus);
    let sum_rule_plus =
        pp_alpha_mass + pm_alpha_mass - alpha * mesh_mass_inner(forms, u_plus, &ones);
    let sum_rule_minus =
        mm_alpha_mass + mp_alpha_mass - alpha * mesh_mass_inner(forms, u_minus, &ones);
    Ok(GammaCoefficients {
        cross_flux_plus,
        cross_flux_minus,
        pp_alpha_mass,
        pp_alpha_flux,
        pm_alpha_mass,
        pm_alpha_flux,
        mm_alpha_mass,
        mm_alpha_flux,
        mp_alpha_mass,
        mp_alpha_flux,
        sum_rule_plus,
        sum_rule_minus,
    })
}

/// One-point extension check on a glued network: the full resolvent must
/// equal the killed resolvent plus a rank-one correction along the
/// alpha-potential of the origin,
///
///   G f = G0 f + (<u_a, f> / (alpha <u_a, 1>)) u_a.
pub struct OnePointReport {
    /// `G f` at the origin node.
    pub origin_value: f64,
    /// `<u_a, f> / (alpha <u_a, 1>)`, the predicted origin value.
    pub predicted_origin_value: f64,
    /// `alpha <u_a, 1>`, the normalizing mass of the correction.
    pub denominator: f64,
    /// Max node-wise defect of the identity, relative to `max |G f|`.
    pub max_residual: f64,
}

pub fn verify_one_point(forms: &FormMatrices, alpha: f64, f: &[f64]) -> Result<OnePointReport> {
    if forms.topology.mode != TopologyMode::Glued {
        return Err(Error::domain("one-point extension needs a glued network".to_string()));
    }
    let n_mesh = forms.n_mesh();
    let o = forms.topology.origin_index(&forms.mesh, 0);
    let u_a = glued_alpha_potential(forms, alpha)?;
    let g = resolvent(forms, alpha, f)?;
    let g0 = killed_resolvent(forms, alpha, f)?;

    let ones = vec![1.0; forms.num_unknowns()];
    let denominator = alpha * mesh_mass_inner(forms, &u_a, &ones);
    if denominator.abs() < 1e-300 {
        return Err(Error::numerical(
            "degenerate one-point correction: the origin potential carries no mass"
                .to_string(),
        ));
    }
    let predicted = mesh_mass_inner(forms, &u_a, f) / denominator;

    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut max_residual = 0.0f64;
    for i in 0..n_mesh {
        let defect = g[i] - (g0[i] + predicted * u_a[i]);
        max_residual = max_residual.max(defect.abs());
    }
    let defect_origin = g[o] - predicted * u_a[o];
    max_residual = max_residual.max(defect_origin.abs());

    Ok(OnePointReport {
        origin_value: g[o],
        predicted_origin_value: predicted,
        denominator,
        max_residual: max_residual / scale,
    })
}

/// Two-point extension check on a split network: the resolvent is the
/// killed resolvent plus a rank-two correction whose coefficients solve a
/// 2x2 boundary system built from the gamma coefficients.
pub struct TwoPointReport {
    /// Origin values from the 2x2 boundary system.
    pub origin_plus: f64,
    pub origin_minus: f64,
    /// Origin values read directly off the split resolvent.
    pub origin_plus_direct: f64,
    pub origin_minus_direct: f64,
    /// Determinant of the boundary system.
    pub determinant: f64,
    /// Its factored form `(g_pp + g_pm)(g_pp - g_pm + 2 cross)`, exact on
    /// centrally symmetric networks.
    pub determinant_factored: f64,
    pub gammas: GammaCoefficients,
    /// Max node-wise defect of the rank-two identity, relative.
    pub max_residual: f64,
}

pub fn verify_two_point(forms: &FormMatrices, alpha: f64, g_src: &[f64]) -> Result<TwoPointReport> {
    let (o_plus, o_minus) = split_origins(forms)?;
    let n_mesh = forms.n_mesh();

    let (phi_plus, phi_minus) = hitting_probs_split(forms)?;
    let (u_plus, u_minus) = alpha_potentials_split(forms, alpha)?;
    let gammas =
        gamma_from_potentials(forms, alpha, &phi_plus, &phi_minus, &u_plus, &u_minus)?;

    let g = resolvent(forms, alpha, g_src)?;
    let g0 = killed_resolvent(forms, alpha, g_src)?;

    // Boundary system for the origin values (x_p, x_m).  The origin rows
    // of the resolvent equation reduce, exactly, to
    //   x_p (C+ - (c+)^T u+) - x_m (c+)^T u-  = <u+, g>
    //   x_m (C- - (c-)^T u-) - x_p (c-)^T u+  = <u-, g>
    // where C+/- are the total hop conductances.  In gamma language the
    // diagonal is `g_pp_alpha + cross` and the off-diagonal
    // `cross - g_mp_alpha`; the flux form below avoids compounding the
    // hitting-probability solves into the system.
    let ones = vec![1.0; forms.num_unknowns()];
    let b_plus = mesh_mass_inner(forms, &u_plus, g_src);
    let b_minus = mesh_mass_inner(forms, &u_minus, g_src);
    let a11 = origin_flux(forms, 0, &ones) - origin_flux(forms, 0, &u_plus);
    let a12 = -origin_flux(forms, 0, &u_minus);
    let a21 = -origin_flux(forms, 1, &u_plus);
    let a22 = origin_flux(forms, 1, &ones) - origin_flux(forms, 1, &u_minus);
    let determinant = a11 * a22 - a12 * a21;
    let determinant_factored = (gammas.pp_alpha_mass + gammas.pm_alpha_mass)
        * (gammas.pp_alpha_mass - gammas.pm_alpha_mass + 2.0 * gammas.cross_flux_plus);
    let scale_det = a11.abs().max(a22.abs()).max(1.0);
    if determinant.abs() < 1e-14 * scale_det {
        return Err(Error::numerical(format!(
            "two-point boundary system is singular (determinant {determinant:e})"
        )));
    }
    let x_p = (b_plus * a22 - a12 * b_minus) / determinant;
    let x_m = (a11 * b_minus - b_plus * a21) / determinant;

    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut max_residual = 0.0f64;
    for i in 0..n_mesh {
        let defect = g[i] - (g0[i] + x_p * u_plus[i] + x_m * u_minus[i]);
        max_residual = max_residual.max(defect.abs());
    }
    max_residual = max_residual.max((g[o_plus] - x_p).abs());
    max_residual = max_residual.max((g[o_minus] - x_m).abs());

    Ok(TwoPointReport {
        origin_plus: x_p,
        origin_minus: x_m,
        origin_plus_direct: g[o_plus],
        origin_minus_direct: g[o_minus],
        determinant,
        determinant_factored,
        gammas,
        max_residual: max_residual / scale,
    })
}

/// Narrow-cone capacity sample.  The two targets are the node sets inside
///
///   A+ = (0, eps) x (pi/2 + delta, pi - delta),
///   A- = its rotation by pi,
///
/// thin wedges inset `delta` into the interiors of the second and fourth
/// quadrants.  `bound` is the comparison quantity of the capacity
/// estimate; the capacities stay below a fixed multiple of it as eps
/// shrinks, which is the quantitative form of "the origin is approached
/// only through the degenerate cones".
pub struct ConeCapacitySample {
    pub epsilon: f64,
    pub cap_plus: f64,
    pub cap_minus: f64,
    /// `(1/delta) int_0^{2 eps} a(r)/r dr`; infinite for the unit control,
    /// whose cone capacities do not decay.
    pub bound: f64,
    pub nodes_plus: usize,
    pub nodes_minus: usize,
}

pub fn cone_capacity_report(
    forms: &FormMatrices,
    alpha: f64,
    epsilons: &[f64],
    delta: f64,
) -> Result<Vec<ConeCapacitySample>> {
    use std::f64::consts::PI;
    let mesh = &forms.mesh;
    if !(delta >= 2.0 * mesh.dtheta && delta < PI / 4.0) {
        return Err(Error::config(format!(
            "wedge inset delta must lie in [2 dtheta, pi/4) = [{}, {}), got {delta}",
            2.0 * mesh.dtheta,
            PI / 4.0
        )));
    }
    // Sector centers inside the open angular windows of A+ and A-.
    let in_window = |theta: f64, lo: f64, hi: f64| theta > lo && theta < hi;
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps >= 2.0 * mesh.r_min() && eps <= 1.0) {
            return Err(Error::config(format!(
                "epsilon must lie in [2 r_min, 1], got {eps}"
            )));
        }
        let mut target_plus = Vec::new();
        let mut target_minus = Vec::new();
        for node in 0..mesh.num_nodes() {
            let r = mesh.ring_radii[mesh.node_ring(node)];
            if r >= eps {
                continue;
            }
            let theta = mesh.sector_angle(mesh.node_sector(node));
            if in_window(theta, PI / 2.0 + delta, PI - delta) {
                target_plus.push(node);
            } else if in_window(theta, 3.0 * PI / 2.0 + delta, 2.0 * PI - delta) {
                target_minus.push(node);
            }
        }
        if target_plus.is_empty() || target_minus.is_empty() {
            return Err(Error::config(format!(
                "the wedges at epsilon = {eps}, delta = {delta} contain no mesh nodes"
            )));
        }
        let nodes_plus = target_plus.len();
        let nodes_minus = target_minus.len();
        let cap_plus = capacity(forms, alpha, &target_plus)?.capacity;
        let cap_minus = capacity(forms, alpha, &target_minus)?.capacity;
        out.push(ConeCapacitySample {
            epsilon: eps,
            cap_plus,
            cap_minus,
            bound: narrow_cone_bound(forms, eps, delta),
            nodes_plus,
            nodes_minus,
        });
    }
    Ok(out)
}

/// `(1/delta) int_0^{2 eps} a(r)/r dr`, the weight mass controlling how
/// strongly a thin wedge inset `delta` into a regular cone can charge its
/// surroundings.  Infinite when the profile integral diverges.
fn narrow_cone_bound(forms: &FormMatrices, eps: f64, delta: f64) -> f64 {
    use crate::weights::RadialProfile;
    let hi = (2.0 * eps).min(1.0);
    let v = match forms.weight.profile {
        RadialProfile::Power { alpha } => hi.powf(alpha) / alpha,
        RadialProfile::Log { alpha } => (2.0 / hi).ln().powf(1.0 - alpha) / (alpha - 1.0),
        RadialProfile::Unit => f64::INFINITY,
    };
    v / delta
}

/// Absorption profile of the killed walk from `start`: for each sector,
/// the probability that absorption at the origin happens through that
/// sector's hop.  Sums to one exactly when the network is recurrent (the
/// outer rim reflects), because `c^T (S0)^{-1} e_start = 1` is the row-sum
/// identity of the killed matrix.
pub fn origin_harmonic_measure(forms: &FormMatrices, start: usize) -> Result<Vec<f64>> {
    let n_mesh = forms.n_mesh();
    if start >= n_mesh {
        return Err(Error::domain(format!(
            "start node {start} must be a mesh node (< {n_mesh})"
        )));
    }
    let s0 = forms.killed_block();
    let mut e = vec![0.0; n_mesh];
    e[start] = 1.0;
    let green = SpdSolver::new(s0)?.solve(&e)?;
    Ok((0..forms.mesh.sectors)
        .map(|j| forms.origin_conductance[j] * green[forms.mesh.node_index(0, j)])
        .collect())
}
