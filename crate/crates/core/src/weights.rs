//! Radial weight profiles and the cone-alternating planar weights built
//! from them.
//!
//! A profile `a(r)` on (0, 1] is turned into a weight on the plane by
//! splitting the unit disk into `2N` equal cones, indexed 1..=2N
//! anticlockwise from the positive x-axis.  Odd cones carry `rho = 1/a`,
//! even cones carry `rho = a`, and outside the cutoff disk `rho = 1`.
//! For `N = 2` the odd cones are the open quadrants Q1 and Q3.
//!
//! Everything that the network assembly needs from the weight is exposed
//! here as one-dimensional radial integrals: the resistance of a radial
//! run inside one cone and the mass of an annular cell.  Both are done in
//! closed form whenever the antiderivative is elementary and by adaptive
//! quadrature otherwise, so the divergence or convergence of a segment
//! touching the origin is decided exactly, never by a quadrature rule.

use crate::error::{Error, Result};
use crate::quad;

/// Absolute tolerance used for every adaptive quadrature in this module.
const QUAD_TOL: f64 = 1e-10;

/// Radial profile `a(r)` on (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `a(r) = r^alpha`, admissible for `0 < alpha < 2`.
    Power { alpha: f64 },
    /// `a(r) = log(2/r)^(-alpha)`, admissible for `alpha > 1`.
    Log { alpha: f64 },
    /// `a(r) = 1`, the regular control.
    Unit,
}

impl RadialProfile {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::config(format!(
                "power profile needs 0 < alpha < 2, got {alpha}"
            )));
        }
        Ok(RadialProfile::Power { alpha })
    }

    pub fn log(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::config(format!(
                "log profile needs alpha > 1, got {alpha}"
            )));
        }
        Ok(RadialProfile::Log { alpha })
    }

    /// Evaluate `a(r)` for `0 < r <= 1` (the unit profile accepts any r > 0).
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("profile argument must be positive, got {r}")));
        }
        match *self {
            RadialProfile::Unit => Ok(1.0),
            _ if r > 1.0 => Err(Error::domain(format!(
                "profile is only defined on (0, 1], got r = {r}"
            ))),
            RadialProfile::Power { alpha } => Ok(r.powf(alpha)),
            RadialProfile::Log { alpha } => Ok((2.0 / r).ln().powf(-alpha)),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            RadialProfile::Power { alpha } | RadialProfile::Log { alpha } => Some(alpha),
            RadialProfile::Unit => None,
        }
    }
}

/// How the cones are laid out in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    /// Two degenerate quadrants (Q1, Q3), two reciprocal ones (Q2, Q4).
    TwoQuadrant,
    /// `2N` alternating cones of opening pi/N.
    MultiCone(u32),
    /// `rho = 1` everywhere; the regular control weight.
    UnitControl,
}

/// A planar weight: family layout + radial profile + cutoff disk radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub family: WeightFamily,
    pub profile: RadialProfile,
    pub cutoff_radius: f64,
}

impl WeightSpec {
    pub fn new(family: WeightFamily, profile: RadialProfile, cutoff_radius: f64) -> Result<Self> {
        // The profile lives on (0, 1], so the cutoff disk cannot exceed the
        // unit disk.
        if !(cutoff_radius > 0.0 && cutoff_radius <= 1.0) {
            return Err(Error::config(format!(
                "cutoff radius must lie in (0, 1], got {cutoff_radius}"
            )));
        }
        if let WeightFamily::MultiCone(n) = family {
            if n < 2 {
                return Err(Error::config(format!("multi-cone family needs N >= 2, got {n}")));
            }
        }
        Ok(WeightSpec { family, profile, cutoff_radius })
    }

    /// Number of degenerate cones (N), or None for the unit control.
    pub fn cone_pairs(&self) -> Option<u32> {
        match self.family {
            WeightFamily::TwoQuadrant => Some(2),
            WeightFamily::MultiCone(n) => Some(n),
            WeightFamily::UnitControl => None,
        }
    }

    /// 1-based cone index of the angle `theta`; cone i covers
    /// [pi (i-1)/N, pi i/N).  Returns None for the unit control.
    pub fn cone_of_angle(&self, theta: f64) -> Option<usize> {
        let n = self.cone_pairs()? as f64;
        let two_pi = 2.0 * std::f64::consts::PI;
        let t = theta.rem_euclid(two_pi);
        let i = (t * n / std::f64::consts::PI).floor() as usize;
        Some(i.min(2 * self.cone_pairs().unwrap() as usize - 1) + 1)
    }

    /// Odd cones carry `rho = 1/a` (the degenerate side).
    pub fn cone_is_degenerate(cone_index: usize) -> bool {
        cone_index % 2 == 1
    }

    /// `rho` at radius `r` inside cone `cone_index` (1-based).  Piecewise in
    /// r: the profile acts inside the cutoff disk, `rho = 1` outside.
    pub fn rho_radial(&self, cone_index: usize, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain("weight is undefined at the origin".to_string()));
        }
        if r >= self.cutoff_radius || matches!(self.family, WeightFamily::UnitControl) {
            return Ok(1.0);
        }
        let a = self.profile.value(r)?;
        if Self::cone_is_degenerate(cone_index) {
            Ok(1.0 / a)
        } else {
            Ok(a)
        }
    }

    /// Weight value at a cartesian point.
    pub fn value(&self, x: [f64; 2]) -> Result<f64> {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        if r == 0.0 {
            return Err(Error::domain("weight is undefined at the origin".to_string()));
        }
        if r >= self.cutoff_radius || matches!(self.family, WeightFamily::UnitControl) {
            return Ok(1.0);
        }
        let theta = x[1].atan2(x[0]);
        let cone = self.cone_of_angle(theta).expect("cone families only");
        self.rho_radial(cone, r)
    }

    /// Logarithmic gradient `grad(rho)/rho` of the power weight; this is the
    /// drift of the associated diffusion.  Defined for points strictly
    /// inside a cone and inside the cutoff disk; identically zero outside
    /// the disk where the weight is constant.
    pub fn drift(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let r = r2.sqrt();
        if r == 0.0 {
            return Err(Error::domain("drift is undefined at the origin".to_string()));
        }
        if r >= self.cutoff_radius {
            return Ok([0.0, 0.0]);
        }
        let alpha = match self.profile {
            RadialProfile::Power { alpha } => alpha,
            _ => {
                return Err(Error::domain(
                    "drift is only available for the power profile".to_string(),
                ))
            }
        };
        let n = match self.cone_pairs() {
            Some(n) => n as f64,
            None => return Ok([0.0, 0.0]),
        };
        let theta = x[1].atan2(x[0]).rem_euclid(2.0 * std::f64::consts::PI);
        let t = theta * n / std::f64::consts::PI;
        if (t - t.round()).abs() < 1e-12 {
            return Err(Error::domain(
                "drift is discontinuous on cone boundaries".to_string(),
            ));
        }
        let cone = self.cone_of_angle(theta).expect("cone families only");
        let sign = if Self::cone_is_degenerate(cone) { -1.0 } else { 1.0 };
        Ok([sign * alpha * x[0] / r2, sign * alpha * x[1] / r2])
    }
}

/// Antiderivative of `1/(rho(r) r)` on the profile region, per cone parity.
/// Returns the integral over [lo, hi] (0 <= lo < hi <= cutoff), which is
/// `+inf` exactly when the segment touches 0 and the integrand is not
/// integrable there.
fn inv_rho_r_integral(profile: &RadialProfile, degenerate: bool, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo >= 0.0 && lo < hi);
    match (profile, degenerate) {
        (RadialProfile::Unit, _) => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                (hi / lo).ln()
            }
        }
        (RadialProfile::Power { alpha }, true) => (hi.powf(*alpha) - lo.powf(*alpha)) / alpha,
        (RadialProfile::Power { alpha }, false) => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                (lo.powf(-alpha) - hi.powf(-alpha)) / alpha
            }
        }
        (RadialProfile::Log { alpha }, true) => {
            // d/dr log(2/r)^(1-alpha) = (alpha-1) log(2/r)^(-alpha) / r
            let at = |r: f64| (2.0 / r).ln().powf(1.0 - alpha);
            let lo_term = if lo == 0.0 { 0.0 } else { at(lo) };
            (at(hi) - lo_term) / (alpha - 1.0)
        }
        (RadialProfile::Log { alpha }, false) => {
            if lo == 0.0 {
                f64::INFINITY
            } else {
                let at = |r: f64| (2.0 / r).ln().powf(1.0 + alpha);
                (at(lo) - at(hi)) / (1.0 + alpha)
            }
        }
    }
}

/// Integral of `rho(r) r` over [lo, hi] inside the profile region.
fn rho_r_integral(profile: &RadialProfile, degenerate: bool, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo >= 0.0 && lo < hi);
    match (profile, degenerate) {
        (RadialProfile::Unit, _) => 0.5 * (hi * hi - lo * lo),
        (RadialProfile::Power { alpha }, true) => {
            let p = 2.0 - alpha;
            (hi.powf(p) - lo.powf(p)) / p
        }
        (RadialProfile::Power { alpha }, false) => {
            let p = 2.0 + alpha;
            (hi.powf(p) - lo.powf(p)) / p
        }
        (RadialProfile::Log { alpha }, deg) => {
            let s = if deg { *alpha } else { -*alpha };
            quad::integrate(&|r: f64| (2.0 / r).ln().powf(s) * r, lo, hi, QUAD_TOL, 8)
        }
    }
}

/// Resistance of the radial run [r_lo, r_hi] of a single sector of angular
/// width `dtheta` inside cone `cone_index`:
///
///   R = int_{r_lo}^{r_hi} dr / (rho(r) r dtheta)
///
/// Exact antiderivatives are used throughout; the result is `+inf` exactly
/// when the integral diverges, which signals a conductance of zero.
pub fn radial_resistance(
    w: &WeightSpec,
    cone_index: usize,
    r_lo: f64,
    r_hi: f64,
    dtheta: f64,
) -> Result<f64> {
    if !(r_lo >= 0.0 && r_lo < r_hi) || !r_hi.is_finite() {
        return Err(Error::domain(format!(
            "radial segment needs 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    if !(dtheta > 0.0 && dtheta <= 2.0 * std::f64::consts::PI) {
        return Err(Error::domain(format!("sector width out of range: {dtheta}")));
    }
    if let Some(n) = w.cone_pairs() {
        if cone_index < 1 || cone_index > 2 * n as usize {
            return Err(Error::domain(format!(
                "cone index {cone_index} out of range 1..={}",
                2 * n
            )));
        }
    }
    let cut = w.cutoff_radius;
    let unit_weight = matches!(w.family, WeightFamily::UnitControl);
    let deg = WeightSpec::cone_is_degenerate(cone_index);
    let mut total = 0.0;
    // Inside the cutoff disk the profile acts (unless the weight is the
    // unit control), outside rho = 1.
    let inner_hi = r_hi.min(cut);
    if r_lo < inner_hi {
        total += if unit_weight {
            inv_rho_r_integral(&RadialProfile::Unit, deg, r_lo, inner_hi)
        } else {
            inv_rho_r_integral(&w.profile, deg, r_lo, inner_hi)
        };
    }
    let outer_lo = r_lo.max(cut);
    if outer_lo < r_hi {
        total += inv_rho_r_integral(&RadialProfile::Unit, deg, outer_lo, r_hi);
    }
    Ok(total / dtheta)
}

/// Mass `int rho dx` of the annular cell [r_lo, r_hi] x (sector of width
/// `dtheta`) lying inside cone `cone_index`.
pub fn cell_mass(
    w: &WeightSpec,
    cone_index: usize,
    r_lo: f64,
    r_hi: f64,
    dtheta: f64,
) -> Result<f64> {
    if !(r_lo >= 0.0 && r_lo < r_hi) || !r_hi.is_finite() {
        return Err(Error::domain(format!(
            "radial segment needs 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    let cut = w.cutoff_radius;
    let unit_weight = matches!(w.family, WeightFamily::UnitControl);
    let deg = WeightSpec::cone_is_degenerate(cone_index);
    let mut total = 0.0;
    let inner_hi = r_hi.min(cut);
    if r_lo < inner_hi {
        total += if unit_weight {
            rho_r_integral(&RadialProfile::Unit, deg, r_lo, inner_hi)
        } else {
            rho_r_integral(&w.profile, deg, r_lo, inner_hi)
        };
    }
    let outer_lo = r_lo.max(cut);
    if outer_lo < r_hi {
        total += rho_r_integral(&RadialProfile::Unit, deg, outer_lo, r_hi);
    }
    Ok(total * dtheta)
}

/// Ladder of scales at which the uniform-integrability expression is
/// sampled when no explicit list is given.
pub const DEFAULT_EPSILONS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Default admissibility bound for the sampled supremum.
pub const DEFAULT_ONERANK_BOUND: f64 = 100.0;

/// The three admissibility quantities of a profile.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// `int_0^1 a(r)/r dr`; finite iff the degenerate cones conduct to 0.
    pub integral_a_over_r: f64,
    /// `int_0^1 r/a(r) dr`; finite iff the weight is locally integrable.
    pub integral_r_over_a: f64,
    /// Sampled supremum of
    /// `(1/eps^2) int_0^eps a^{-1}(r) r (int_0^r a(s)/s ds) dr`.
    pub onerank_sup: f64,
    /// The sampled (epsilon, value) pairs behind `onerank_sup`.
    pub onerank_samples: Vec<(f64, f64)>,
    /// All three quantities finite and the supremum below the bound.
    pub passed: bool,
}

/// Evaluate the admissibility integrals of a profile.  Exact antiderivatives
/// are used where elementary; only `int r/a` for the log profile falls back
/// to quadrature.  Divergent integrals are reported as `+inf`, never as an
/// error.
pub fn check_assumptions(
    profile: &RadialProfile,
    quadrature_points: usize,
    epsilons: &[f64],
    onerank_bound: f64,
) -> Result<AssumptionReport> {
    if quadrature_points < 16 {
        return Err(Error::config(format!(
            "need at least 16 quadrature points, got {quadrature_points}"
        )));
    }
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::config("epsilon ladder must lie in (0, 1)".to_string()));
    }
    let panels = quadrature_points / 2;

    let integral_a_over_r = match profile {
        RadialProfile::Power { alpha } => 1.0 / alpha,
        RadialProfile::Log { alpha } => 2.0_f64.ln().powf(1.0 - alpha) / (alpha - 1.0),
        RadialProfile::Unit => f64::INFINITY,
    };
    let integral_r_over_a = match profile {
        RadialProfile::Power { alpha } => 1.0 / (2.0 - alpha),
        RadialProfile::Log { alpha } => {
            let al = *alpha;
            quad::integrate(&|r: f64| r * (2.0 / r).ln().powf(al), 0.0, 1.0, QUAD_TOL, panels)
        }
        RadialProfile::Unit => 0.5,
    };

    let onerank_at = |eps: f64| -> f64 {
        match profile {
            // inner integral r^alpha/alpha; the full expression collapses to
            // a constant in eps.
            RadialProfile::Power { alpha } => 1.0 / (2.0 * alpha),
            // inner integral log(2/r)^(1-alpha)/(alpha-1); the outer
            // integrand is r log(2/r)/(alpha-1) with an elementary
            // antiderivative.
            RadialProfile::Log { alpha } => ((2.0 / eps).ln() / 2.0 + 0.25) / (alpha - 1.0),
            // inner integral already diverges for every r > 0.
            RadialProfile::Unit => f64::INFINITY,
        }
    };
    let onerank_samples: Vec<(f64, f64)> =
        epsilons.iter().map(|&e| (e, onerank_at(e))).collect();
    let onerank_sup = onerank_samples.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);

    let passed = integral_a_over_r.is_finite()
        && integral_r_over_a.is_finite()
        && onerank_sup.is_finite()
        && onerank_sup < onerank_bound;
    Ok(AssumptionReport {
        integral_a_over_r,
        integral_r_over_a,
        onerank_sup,
        onerank_samples,
        passed,
    })
}
