//! Flat `key = value` experiment configuration with `#` comments, dotted
//! keys, defaults for every field, and `--set` overrides.  Unknown keys
//! are rejected by name so typos cannot silently fall back to defaults.

use sdl_core::error::{Error, Result};
use sdl_core::mesh::{PolarMesh, Topology, TopologyMode};
use sdl_core::weights::{RadialProfile, WeightFamily, WeightSpec};
use std::collections::BTreeMap;
use std::path::Path;

const KNOWN_KEYS: &[(&str, &str)] = &[
    ("profile.kind", "power"),
    ("profile.alpha", "1.0"),
    ("weight.family", "two-quadrant"),
    ("weight.cones", "2"),
    ("mesh.rings", "32"),
    ("mesh.sectors", "32"),
    ("mesh.r_min", "1e-3"),
    ("mesh.R", "2.0"),
    ("mesh.grading", "auto"),
    ("topology.mode", "auto"),
    ("solver.tol", "1e-12"),
    ("solver.max_iter", "50000"),
    ("mc.paths", "10000"),
    ("mc.seed", "42"),
    ("mc.max_steps", "50000000"),
    ("mc.dt", "1e-5"),
    ("alpha", "1.0"),
    ("output.dir", "out"),
];

/// Fully resolved configuration: raw string map (for the report) plus the
/// typed views the experiments consume.
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn defaults() -> Self {
        Config {
            values: KNOWN_KEYS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Config::defaults();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Error::config(format!("cannot read config {}: {e}", p.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::config(format!(
                        "{}:{}: expected `key = value`, got `{line}`",
                        p.display(),
                        lineno + 1
                    ))
                })?;
                cfg.set(key.trim(), value.trim())?;
            }
        }
        for item in overrides {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::config(format!("--set expects key=value, got `{item}`"))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::config(format!(
                "unknown configuration key `{key}` (known keys: {})",
                KNOWN_KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
            )));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.profile()?;
        self.weight()?;
        self.topology_mode()?;
        for key in ["mesh.r_min", "mesh.R", "solver.tol", "mc.dt", "alpha", "profile.alpha"] {
            let v = self.f64(key)?;
            if !(v > 0.0) {
                return Err(Error::config(format!("{key} must be positive, got {v}")));
            }
        }
        for key in ["mesh.rings", "mesh.sectors", "weight.cones"] {
            let v = self.u64(key)?;
            if v == 0 {
                return Err(Error::config(format!("{key} must be positive")));
            }
        }
        for key in ["solver.max_iter", "mc.paths", "mc.max_steps"] {
            if self.u64(key)? == 0 {
                return Err(Error::config(format!("{key} must be positive")));
            }
        }
        self.u64("mc.seed")?;
        if self.str("mesh.grading") != "auto" {
            let r = self.f64("mesh.grading")?;
            if !(r >= 1.0) {
                return Err(Error::config(format!(
                    "mesh.grading must be `auto` or a ratio >= 1, got {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.str(key)
            .parse()
            .map_err(|_| Error::config(format!("{key} is not a number: `{}`", self.str(key))))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.str(key)
            .parse()
            .map_err(|_| Error::config(format!("{key} is not an integer: `{}`", self.str(key))))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    /// Resolved key map for embedding into reports.
    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn profile(&self) -> Result<RadialProfile> {
        match self.str("profile.kind") {
            "power" => RadialProfile::power(self.f64("profile.alpha")?),
            "log" => RadialProfile::log(self.f64("profile.alpha")?),
            "unit" => Ok(RadialProfile::Unit),
            other => Err(Error::config(format!(
                "profile.kind must be power, log or unit, got `{other}`"
            ))),
        }
    }

    pub fn weight(&self) -> Result<WeightSpec> {
        let family = match self.str("weight.family") {
            "two-quadrant" => WeightFamily::TwoQuadrant,
            "multi-cone" => WeightFamily::MultiCone(self.u64("weight.cones")? as u32),
            "unit" => WeightFamily::UnitControl,
            other => Err(Error::config(format!(
                "weight.family must be two-quadrant, multi-cone or unit, got `{other}`"
            )))?,
        };
        let profile = if family == WeightFamily::UnitControl {
            RadialProfile::Unit
        } else {
            self.profile()?
        };
        WeightSpec::new(family, profile, 1.0)
    }

    /// Configured topology mode; None means `auto` (the experiment picks
    /// its natural one).
    pub fn topology_mode(&self) -> Result<Option<TopologyMode>> {
        match self.str("topology.mode") {
            "auto" => Ok(None),
            "killed" => Ok(Some(TopologyMode::Killed)),
            "glued" => Ok(Some(TopologyMode::Glued)),
            "split" => Ok(Some(TopologyMode::Split)),
            other => Err(Error::config(format!(
                "topology.mode must be auto, killed, glued or split, got `{other}`"
            ))),
        }
    }

    /// The experiment's required mode against the configured one.
    pub fn resolve_mode(&self, required: TopologyMode, experiment: &str) -> Result<TopologyMode> {
        match self.topology_mode()? {
            None => Ok(required),
            Some(m) if m == required => Ok(m),
            Some(m) => Err(Error::config(format!(
                "{experiment} runs on a {required:?} topology, but topology.mode = {m:?}"
            ))),
        }
    }

    /// Build the configured mesh at the configured inner radius.
    pub fn mesh(&self) -> Result<PolarMesh> {
        self.mesh_at(self.f64("mesh.r_min")?)
    }

    /// Build the configured mesh at an overridden inner radius (refinement
    /// ladders reuse all other settings).
    pub fn mesh_at(&self, r_min: f64) -> Result<PolarMesh> {
        let rings = self.usize("mesh.rings")?;
        let sectors = self.usize("mesh.sectors")?;
        let outer = self.f64("mesh.R")?;
        if self.str("mesh.grading") == "auto" {
            // Three quarters of the rings resolve the unit disk
            // geometrically, the rest continue uniformly to the rim.
            let inner = ((3 * rings + 3) / 4).max(2);
            PolarMesh::build_graded(rings, sectors, r_min, outer, inner)
        } else {
            PolarMesh::build(rings, sectors, r_min, outer, self.f64("mesh.grading")?)
        }
    }

    pub fn network(
        &self,
        mesh: &PolarMesh,
        weight: &WeightSpec,
        mode: TopologyMode,
    ) -> Result<sdl_core::forms::FormMatrices> {
        let topo = Topology::build(mesh, weight, mode)?;
        sdl_core::forms::assemble(mesh, &topo, weight)
    }
}
