//! Polar mesh on the annulus [r_min, R] and the three origin topologies.
//!
//! Nodes sit at ring radius x sector center; the dual cell of a node spans
//! the geometric means to its radial neighbours, so the cells tile the
//! annulus exactly.  The punched disk of radius `r_min` is not meshed: it
//! is bridged by single "origin hop" edges whose conductance is the exact
//! radial resistance integral from 0, which is what lets degenerate cones
//! stay connected to the origin while regular ones decouple.

use crate::error::{Error, Result};
use crate::weights::{WeightFamily, WeightSpec};
use std::f64::consts::PI;

/// Tensor polar mesh: `rings x sectors` nodes on the annulus.
#[derive(Debug, Clone)]
pub struct PolarMesh {
    /// Ring radii, strictly increasing, `ring_radii[0] = r_min`,
    /// `ring_radii[rings-1] = outer_radius`.
    pub ring_radii: Vec<f64>,
    /// Radial cell faces, `rings + 1` of them; face k and k+1 bound the
    /// cell of ring k.  `face_radii[0] = r_min`, `face_radii[rings] = R`.
    pub face_radii: Vec<f64>,
    pub sectors: usize,
    pub dtheta: f64,
}

impl PolarMesh {
    /// Build the radial ladder: geometric refinement with `ratio` starting
    /// at `r_min` while it stays inside the unit disk (where the weight is
    /// singular), then uniform spacing out to `outer_radius`.  `ratio = 1`
    /// gives a fully uniform ladder.
    pub fn build(
        rings: usize,
        sectors: usize,
        r_min: f64,
        outer_radius: f64,
        ratio: f64,
    ) -> Result<PolarMesh> {
        if rings < 2 {
            return Err(Error::config(format!("need at least 2 rings, got {rings}")));
        }
        if sectors < 4 || sectors % 2 != 0 {
            return Err(Error::config(format!(
                "need an even sector count >= 4, got {sectors}"
            )));
        }
        if !(r_min > 0.0 && r_min < outer_radius) || !outer_radius.is_finite() {
            return Err(Error::config(format!(
                "need 0 < r_min < outer radius, got r_min = {r_min}, R = {outer_radius}"
            )));
        }
        if !(ratio >= 1.0) || !ratio.is_finite() {
            return Err(Error::config(format!("grading ratio must be >= 1, got {ratio}")));
        }

        let mut radii = vec![r_min];
        if ratio > 1.0 {
            // Tolerate one ulp-scale overshoot so a ladder designed to land
            // exactly on the unit circle is not cut short by rounding.
            let lim = outer_radius.min(1.0) * (1.0 + 1e-9);
            while radii.len() < rings {
                let next = radii.last().unwrap() * ratio;
                if next > lim {
                    break;
                }
                radii.push(next);
            }
        }
        if radii.len() == rings {
            let last = *radii.last().unwrap();
            if (last - outer_radius).abs() > 1e-9 * outer_radius {
                return Err(Error::config(format!(
                    "geometric ladder fills all {rings} rings but stops at {last}, \
                     not at the outer radius {outer_radius}; add rings or lower the ratio"
                )));
            }
            *radii.last_mut().unwrap() = outer_radius;
        } else {
            let last = *radii.last().unwrap();
            let remaining = rings - radii.len();
            let step = (outer_radius - last) / remaining as f64;
            if !(step > 0.0) {
                return Err(Error::config(format!(
                    "no room for {remaining} uniform rings between {last} and {outer_radius}"
                )));
            }
            for i in 1..=remaining {
                radii.push(last + step * i as f64);
            }
            *radii.last_mut().unwrap() = outer_radius;
        }
        // Snap a ring that lands next to the unit circle onto it, so the
        // weight cutoff falls on a ring rather than across a cell.
        for r in radii.iter_mut() {
            if (*r - 1.0).abs() < 1e-9 {
                *r = 1.0;
            }
        }
        for w in radii.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::numerical(format!(
                    "ring ladder is not strictly increasing near {}",
                    w[0]
                )));
            }
        }

        let mut faces = Vec::with_capacity(rings + 1);
        faces.push(r_min);
        for w in radii.windows(2) {
            faces.push((w[0] * w[1]).sqrt());
        }
        faces.push(outer_radius);

        Ok(PolarMesh {
            ring_radii: radii,
            face_radii: faces,
            sectors,
            dtheta: 2.0 * PI / sectors as f64,
        })
    }

    /// Ladder whose geometric part lands exactly on the unit circle after
    /// `inner_rings` rings, then continues uniformly to `outer_radius`.
    pub fn build_graded(
        rings: usize,
        sectors: usize,
        r_min: f64,
        outer_radius: f64,
        inner_rings: usize,
    ) -> Result<PolarMesh> {
        if inner_rings < 2 || inner_rings > rings {
            return Err(Error::config(format!(
                "inner ring count must lie in 2..=rings, got {inner_rings} of {rings}"
            )));
        }
        if !(r_min > 0.0 && r_min < 1.0) {
            return Err(Error::config(format!(
                "graded ladder needs r_min in (0, 1), got {r_min}"
            )));
        }
        let ratio = (1.0 / r_min).powf(1.0 / (inner_rings as f64 - 1.0));
        PolarMesh::build(rings, sectors, r_min, outer_radius, ratio)
    }

    pub fn rings(&self) -> usize {
        self.ring_radii.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.rings() * self.sectors
    }

    pub fn r_min(&self) -> f64 {
        self.ring_radii[0]
    }

    pub fn outer_radius(&self) -> f64 {
        *self.ring_radii.last().unwrap()
    }

    /// Ring-major node numbering: ring k, sector j -> k * sectors + j.
    pub fn node_index(&self, ring: usize, sector: usize) -> usize {
        debug_assert!(ring < self.rings() && sector < self.sectors);
        ring * self.sectors + sector
    }

    pub fn node_ring(&self, node: usize) -> usize {
        node / self.sectors
    }

    pub fn node_sector(&self, node: usize) -> usize {
        node % self.sectors
    }

    /// Angle of the center of sector j.
    pub fn sector_angle(&self, sector: usize) -> f64 {
        (sector as f64 + 0.5) * self.dtheta
    }

    pub fn node_position(&self, node: usize) -> [f64; 2] {
        let r = self.ring_radii[self.node_ring(node)];
        let t = self.sector_angle(self.node_sector(node));
        [r * t.cos(), r * t.sin()]
    }

    /// Node across the origin: same ring, sector shifted by half a turn.
    pub fn antipode(&self, node: usize) -> usize {
        let k = self.node_ring(node);
        let j = (self.node_sector(node) + self.sectors / 2) % self.sectors;
        self.node_index(k, j)
    }

    /// Radial span [lo, hi] of the dual cell of ring k.
    pub fn cell_span(&self, ring: usize) -> (f64, f64) {
        (self.face_radii[ring], self.face_radii[ring + 1])
    }

    /// Area of the dual cell of node (ring k, any sector).
    pub fn cell_area(&self, ring: usize) -> f64 {
        let (lo, hi) = self.cell_span(ring);
        0.5 * (hi * hi - lo * lo) * self.dtheta
    }
}

/// How the origin is wired into the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyMode {
    /// The origin is an absorbing boundary; it contributes conductance to
    /// the diagonal of the innermost ring but is not an unknown.
    Killed,
    /// One origin node; every sector that conducts to 0 attaches to it.
    Glued,
    /// One origin node per degenerate cone; a sector attaches to the node
    /// of the cone containing its center.
    Split,
}

/// Origin wiring for a given mesh + weight: which origin node (if any) each
/// sector hops to, and which cone each sector center lies in.
#[derive(Debug, Clone)]
pub struct Topology {
    pub mode: TopologyMode,
    /// Number of origin unknowns appended after the mesh nodes.
    pub origin_nodes: usize,
    /// Per sector: local index of the origin node it attaches to.
    pub sector_origin: Vec<Option<usize>>,
    /// Per sector: 1-based cone index of its center (1 for the unit
    /// control, whose weight does not distinguish cones).
    pub sector_cone: Vec<usize>,
}

impl Topology {
    pub fn build(mesh: &PolarMesh, weight: &WeightSpec, mode: TopologyMode) -> Result<Topology> {
        let m = mesh.sectors;
        if let Some(n) = weight.cone_pairs() {
            let n = n as usize;
            if m % (2 * n) != 0 {
                return Err(Error::config(format!(
                    "sector count {m} must be a multiple of 2N = {} so cone \
                     boundaries fall on sector boundaries",
                    2 * n
                )));
            }
        }
        let sector_cone: Vec<usize> = (0..m)
            .map(|j| weight.cone_of_angle(mesh.sector_angle(j)).unwrap_or(1))
            .collect();

        let (origin_nodes, sector_origin) = match mode {
            TopologyMode::Killed => (0, vec![None; m]),
            TopologyMode::Glued => (1, vec![Some(0); m]),
            TopologyMode::Split => {
                let n = match weight.family {
                    WeightFamily::UnitControl => {
                        return Err(Error::config(
                            "the split origin needs degenerate cones; the unit control \
                             weight has none"
                                .to_string(),
                        ))
                    }
                    _ => weight.cone_pairs().unwrap() as usize,
                };
                // Degenerate cone 2i+1 owns origin node i.
                let assign: Vec<Option<usize>> = sector_cone
                    .iter()
                    .map(|&c| if c % 2 == 1 { Some((c - 1) / 2) } else { None })
                    .collect();
                (n, assign)
            }
        };
        Ok(Topology { mode, origin_nodes, sector_origin, sector_cone })
    }

    /// Global index of local origin node i: origin nodes follow the mesh.
    pub fn origin_index(&self, mesh: &PolarMesh, i: usize) -> usize {
        debug_assert!(i < self.origin_nodes);
        mesh.num_nodes() + i
    }

    pub fn num_unknowns(&self, mesh: &PolarMesh) -> usize {
        mesh.num_nodes() + self.origin_nodes
    }
}
