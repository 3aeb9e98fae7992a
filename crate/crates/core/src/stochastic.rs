//! Monte Carlo routes to the same quantities the linear algebra computes:
//! jump-chain walks on the assembled networks, and an Euler scheme for the
//! radial comparison diffusion.
//!
//! Determinism contract: every estimate depends only on (config, seed),
//! never on thread count or work partitioning.  Each path owns an RNG
//! seeded from the path index, and all reductions accumulate integers.

use crate::error::{Error, Result};
use crate::forms::FormMatrices;
use crate::mesh::TopologyMode;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Virtual target of the killed network's grounded hop.
pub const ABSORBED: usize = usize::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ path.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// The jump chain of a network: from node i, jump across an incident edge
/// with probability proportional to its conductance.  On the killed
/// network the grounded origin hop appears as a jump to `ABSORBED`.
pub struct JumpChain {
    /// Per node: (target, cumulative probability), last entry cumulates
    /// to 1.
    table: Vec<Vec<(usize, f64)>>,
}

impl JumpChain {
    pub fn new(forms: &FormMatrices) -> Result<JumpChain> {
        let n = forms.num_unknowns();
        let mut table = Vec::with_capacity(n);
        for i in 0..n {
            let row = forms
                .s
                .outer_view(i)
                .ok_or_else(|| Error::numerical(format!("matrix row {i} missing")))?;
            let mut targets: Vec<(usize, f64)> = Vec::new();
            let mut diag = 0.0;
            let mut off_total = 0.0;
            for (j, &v) in row.iter() {
                if j == i {
                    diag = v;
                } else if v < 0.0 {
                    targets.push((j, -v));
                    off_total += -v;
                }
            }
            // Grounded surplus (killed origin hop) becomes an absorption
            // branch; tiny negative surpluses are assembly round-off.
            let ground = diag - off_total;
            if ground > 1e-12 * diag {
                targets.push((ABSORBED, ground));
            }
            let total: f64 = targets.iter().map(|t| t.1).sum();
            if !(total > 0.0) {
                return Err(Error::numerical(format!("node {i} has no outgoing edges")));
            }
            let mut acc = 0.0;
            let mut cum: Vec<(usize, f64)> = targets
                .iter()
                .map(|&(t, w)| {
                    acc += w / total;
                    (t, acc)
                })
                .collect();
            cum.last_mut().unwrap().1 = 1.0;
            table.push(cum);
        }
        Ok(JumpChain { table })
    }

    pub fn step<R: Rng>(&self, node: usize, rng: &mut R) -> usize {
        let row = &self.table[node];
        let u: f64 = rng.gen();
        for &(t, c) in row {
            if u < c {
                return t;
            }
        }
        row.last().unwrap().0
    }
}

/// Outcome counters of repeated excursions from an origin node.
pub struct OriginVisitStats {
    /// Cone index (1-based) of the first mesh node of each excursion,
    /// counted per cone; index 0 of the vector is cone 1.
    pub departures_per_cone: Vec<u64>,
    /// Which origin node terminated each excursion.
    pub arrivals_per_origin: Vec<u64>,
    /// Sector of the mesh node from which the terminating hop was taken.
    pub arrivals_per_sector: Vec<u64>,
    pub visits: u64,
    pub total_steps: u64,
    /// Excursions that exceeded the step cap (excluded from the counts).
    pub aborted: u64,
}

/// Run `visits` independent excursions of the jump chain, each started at
/// the given origin node, walking until any origin node is reached again.
/// Tracks the departure cone (the discrete exit angle) and the arrival
/// side, the stochastic content of the glued-versus-split distinction: a
/// split origin can only release the walker into its own cone, a glued
/// origin forgets the side.
pub fn origin_excursions(
    forms: &FormMatrices,
    start_origin: usize,
    visits: u64,
    seed: u64,
    max_steps: u64,
) -> Result<OriginVisitStats> {
    if forms.topology.origin_nodes == 0 {
        return Err(Error::domain(
            "origin excursions need a network with origin nodes".to_string(),
        ));
    }
    if start_origin >= forms.topology.origin_nodes {
        return Err(Error::domain(format!(
            "origin {start_origin} out of range 0..{}",
            forms.topology.origin_nodes
        )));
    }
    if max_steps == 0 {
        return Err(Error::config("need a positive step cap".to_string()));
    }
    let chain = JumpChain::new(forms)?;
    let n_mesh = forms.n_mesh();
    let n_cones = forms.weight.cone_pairs().map(|n| 2 * n as usize).unwrap_or(1);
    let n_origins = forms.topology.origin_nodes;
    let m = forms.mesh.sectors;
    let start = forms.topology.origin_index(&forms.mesh, start_origin);

    struct Acc {
        dep: Vec<u64>,
        arr: Vec<u64>,
        arr_sector: Vec<u64>,
        steps: u64,
        aborted: u64,
    }
    let zero = || Acc {
        dep: vec![0; n_cones],
        arr: vec![0; n_origins],
        arr_sector: vec![0; m],
        steps: 0,
        aborted: 0,
    };

    let acc = (0..visits)
        .into_par_iter()
        .map(|v| {
            let mut rng = path_rng(seed, v);
            let mut a = zero();
            let mut node = chain.step(start, &mut rng);
            // First step leaves the origin into a mesh node by
            // construction: origins only border mesh nodes.
            debug_assert!(node < n_mesh);
            let dep_cone = forms.topology.sector_cone[forms.mesh.node_sector(node)];
            let mut steps: u64 = 1;
            let mut last_mesh = node;
            loop {
                if node >= n_mesh {
                    a.dep[dep_cone - 1] += 1;
                    a.arr[node - n_mesh] += 1;
                    a.arr_sector[forms.mesh.node_sector(last_mesh)] += 1;
                    a.steps += steps;
                    break;
                }
                if steps >= max_steps {
                    a.aborted += 1;
                    break;
                }
                last_mesh = node;
                node = chain.step(node, &mut rng);
                steps += 1;
            }
            a
        })
        .reduce(zero, |mut x, y| {
            for (a, b) in x.dep.iter_mut().zip(&y.dep) {
                *a += b;
            }
            for (a, b) in x.arr.iter_mut().zip(&y.arr) {
                *a += b;
            }
            for (a, b) in x.arr_sector.iter_mut().zip(&y.arr_sector) {
                *a += b;
            }
            x.steps += y.steps;
            x.aborted += y.aborted;
            x
        });

    Ok(OriginVisitStats {
        departures_per_cone: acc.dep,
        arrivals_per_origin: acc.arr,
        arrivals_per_sector: acc.arr_sector,
        visits,
        total_steps: acc.steps,
        aborted: acc.aborted,
    })
}

/// Monte Carlo estimate with binomial standard error.
pub struct HitEstimate {
    pub probability: f64,
    pub standard_error: f64,
    pub paths: u64,
    pub mean_steps: f64,
    pub aborted: u64,
}

/// Probability that the walk from `start` reaches the first split origin
/// before the second, by simulation; the exact answer is the harmonic
/// hitting probability.
pub fn split_hit_probability_mc(
    forms: &FormMatrices,
    start: usize,
    paths: u64,
    seed: u64,
    max_steps: u64,
) -> Result<HitEstimate> {
    if forms.topology.mode != TopologyMode::Split || forms.topology.origin_nodes != 2 {
        return Err(Error::domain(
            "the hitting experiment needs a split network with two origins".to_string(),
        ));
    }
    if start >= forms.n_mesh() {
        return Err(Error::domain(format!("start node {start} must be a mesh node")));
    }
    if max_steps == 0 {
        return Err(Error::config("need a positive step cap".to_string()));
    }
    let chain = JumpChain::new(forms)?;
    let o_plus = forms.topology.origin_index(&forms.mesh, 0);
    let n_mesh = forms.n_mesh();

    let (hits, steps, aborted) = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut node = start;
            let mut steps: u64 = 0;
            loop {
                if node >= n_mesh {
                    return ((node == o_plus) as u64, steps, 0u64);
                }
                if steps >= max_steps {
                    return (0u64, steps, 1u64);
                }
                node = chain.step(node, &mut rng);
                steps += 1;
            }
        })
        .reduce(
            || (0u64, 0u64, 0u64),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );

    let effective = paths - aborted;
    if effective == 0 {
        return Err(Error::insufficient("every path hit the step cap".to_string()));
    }
    let p = hits as f64 / effective as f64;
    Ok(HitEstimate {
        probability: p,
        standard_error: (p * (1.0 - p) / effective as f64).sqrt(),
        paths: effective,
        mean_steps: steps as f64 / effective as f64,
        aborted,
    })
}

/// Per-sector absorption frequencies of the killed walk from `start`; the
/// exact counterpart is the origin harmonic measure.
pub fn absorption_measure_mc(
    forms: &FormMatrices,
    start: usize,
    paths: u64,
    seed: u64,
    max_steps: u64,
) -> Result<Vec<f64>> {
    if forms.topology.mode != TopologyMode::Killed {
        return Err(Error::domain(
            "the absorption experiment needs a killed network".to_string(),
        ));
    }
    if start >= forms.n_mesh() {
        return Err(Error::domain(format!("start node {start} must be a mesh node")));
    }
    if max_steps == 0 {
        return Err(Error::config("need a positive step cap".to_string()));
    }
    let chain = JumpChain::new(forms)?;
    let m = forms.mesh.sectors;

    let counts = (0..paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(seed, p);
            let mut node = start;
            let mut counts = vec![0u64; m];
            let mut steps: u64 = 0;
            loop {
                let next = chain.step(node, &mut rng);
                if next == ABSORBED {
                    counts[forms.mesh.node_sector(node)] += 1;
                    break;
                }
                node = next;
                steps += 1;
                if steps >= max_steps {
                    break;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; m],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    Ok(counts.iter().map(|&c| c as f64 / paths as f64).collect())
}

/// Box-Muller standard normals with the spare cached.
struct Normals<R: Rng> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> Normals<R> {
    fn new(rng: R) -> Self {
        Normals { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        let u1: f64 = loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        let u2: f64 = self.rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }
}

/// Euler scheme for the radial comparison diffusion
/// `dr = ((delta - 1)/r) dt + sqrt(2 dt) Z`, the radial part of the
/// weighted process inside a cone (`delta = 2 -/+ alpha` on degenerate
/// and regular cones).
pub struct BesselConfig {
    /// Effective dimension of the radial generator.
    pub delta: f64,
    pub r0: f64,
    /// Inner absorbing radius (the "origin is hit" event).
    pub inner: f64,
    /// Outer absorbing radius.
    pub outer: f64,
    pub dt: f64,
    pub paths: u64,
    pub seed: u64,
    /// Per-path step cap; capped paths count as aborted.
    pub max_steps: u64,
}

pub struct BesselEstimate {
    /// Monte Carlo probability of reaching `inner` before `outer`.
    pub hit_probability: f64,
    /// Scale-function value `(r0^k - outer^k) / (inner^k - outer^k)`,
    /// `k = 2 - delta` (logarithmic at delta = 2).
    pub analytic: f64,
    pub standard_error: f64,
    pub paths: u64,
    pub mean_steps: f64,
    pub aborted: u64,
}

pub fn bessel_hit_probability(cfg: &BesselConfig) -> f64 {
    let k = 2.0 - cfg.delta;
    if k.abs() < 1e-12 {
        (cfg.outer.ln() - cfg.r0.ln()) / (cfg.outer.ln() - cfg.inner.ln())
    } else {
        (cfg.r0.powf(k) - cfg.outer.powf(k)) / (cfg.inner.powf(k) - cfg.outer.powf(k))
    }
}

pub fn bessel_hit_estimate(cfg: &BesselConfig) -> Result<BesselEstimate> {
    if !(cfg.inner > 0.0 && cfg.inner < cfg.r0 && cfg.r0 < cfg.outer) {
        return Err(Error::config(format!(
            "need 0 < inner < r0 < outer, got {} / {} / {}",
            cfg.inner, cfg.r0, cfg.outer
        )));
    }
    if !(cfg.dt > 0.0) || cfg.paths == 0 {
        return Err(Error::config("need dt > 0 and at least one path".to_string()));
    }
    if cfg.max_steps == 0 {
        return Err(Error::config("need a positive step cap".to_string()));
    }
    let drift_coeff = cfg.delta - 1.0;
    let dt_min = cfg.dt * 2f64.powi(-20);
    let max_steps = cfg.max_steps;

    let (hits, steps_total, aborted) = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let mut normals = Normals::new(path_rng(cfg.seed, p));
            let mut r = cfg.r0;
            let mut steps: u64 = 0;
            loop {
                // Refine the step near the boundaries (to tame the
                // overshoot bias) and where the drift would overshoot.
                let gap = (r - cfg.inner).min(cfg.outer - r);
                let mut dt = cfg.dt;
                loop {
                    let drift = drift_coeff / r * dt;
                    let sigma = (2.0 * dt).sqrt();
                    if (drift.abs() <= 0.25 * r && sigma <= 0.5 * gap) || dt <= dt_min {
                        break;
                    }
                    dt *= 0.5;
                }
                if (drift_coeff / r * dt).abs() > 0.25 * r {
                    return (0u64, steps, 1u64);
                }
                r += drift_coeff / r * dt + (2.0 * dt).sqrt() * normals.next();
                steps += 1;
                if r <= cfg.inner {
                    return (1u64, steps, 0u64);
                }
                if r >= cfg.outer {
                    return (0u64, steps, 0u64);
                }
                if steps >= max_steps {
                    return (0u64, steps, 1u64);
                }
            }
        })
        .reduce(
            || (0u64, 0u64, 0u64),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );

    let effective = cfg.paths - aborted;
    if effective == 0 {
        return Err(Error::insufficient("every path aborted".to_string()));
    }
    let p = hits as f64 / effective as f64;
    Ok(BesselEstimate {
        hit_probability: p,
        analytic: bessel_hit_probability(cfg),
        standard_error: (p * (1.0 - p) / effective as f64).sqrt(),
        paths: effective,
        mean_steps: steps_total as f64 / effective as f64,
        aborted,
    })
}
