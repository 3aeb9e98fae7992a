//! Acceptance gate: twelve end-to-end criteria, one test each, every one
//! printing a single `acceptance NN (<name>): PASS|FAIL` line.  Tolerances
//! and runtime budgets are pinned here, next to the assertions they guard.
//!
//! The criteria pair independent computational routes wherever possible:
//! exact antiderivatives against quadrature, variational capacities
//! against boundary fluxes, resolvent identities against direct solves,
//! and Monte Carlo walks against the linear algebra they discretize.

use sdl_core::forms::{assemble, decompose, glued_distance_sq, psi0_grid, FormMatrices};
use sdl_core::mesh::{PolarMesh, Topology, TopologyMode};
use sdl_core::potential::{
    capacity, cone_capacity_report, gamma_coefficients, hitting_probs_split, origin_capacity,
    origin_harmonic_measure, verify_one_point, verify_two_point,
};
use sdl_core::stochastic::{
    absorption_measure_mc, bessel_hit_estimate, origin_excursions, BesselConfig,
};
use sdl_core::weights::{
    check_assumptions, RadialProfile, WeightFamily, WeightSpec, DEFAULT_EPSILONS,
    DEFAULT_ONERANK_BOUND,
};
use std::time::{Duration, Instant};

/// Collects the defects of one criterion and prints its verdict line.
struct Criterion {
    number: u32,
    name: &'static str,
    started: Instant,
    budget: Option<Duration>,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: u32, name: &'static str, budget_secs: Option<u64>) -> Self {
        Criterion {
            number,
            name,
            started: Instant::now(),
            budget: budget_secs.map(Duration::from_secs),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, cond: bool, label: &str, detail: String) {
        if !cond {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn close(&mut self, got: f64, want: f64, rel_tol: f64, label: &str) {
        let scale = want.abs().max(1e-300);
        let rel = (got - want).abs() / scale;
        self.check(
            rel <= rel_tol,
            label,
            format!("got {got:.17e}, want {want:.17e}, rel err {rel:.3e} > {rel_tol:.1e}"),
        );
    }

    fn small(&mut self, got: f64, abs_tol: f64, label: &str) {
        self.check(
            got.abs() <= abs_tol,
            label,
            format!("|{got:.3e}| > {abs_tol:.1e}"),
        );
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed();
        if let Some(budget) = self.budget {
            self.check(
                elapsed <= budget,
                "runtime",
                format!("{elapsed:.2?} exceeded the {budget:.0?} budget"),
            );
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "acceptance {:02} ({}): {} [{:.2?}]",
            self.number, self.name, verdict, elapsed
        );
        if !self.failures.is_empty() {
            panic!(
                "criterion {:02} ({}) failed:\n  {}",
                self.number,
                self.name,
                self.failures.join("\n  ")
            );
        }
    }
}

fn power_weight() -> WeightSpec {
    WeightSpec::new(WeightFamily::TwoQuadrant, RadialProfile::power(1.0).unwrap(), 1.0).unwrap()
}

fn unit_weight() -> WeightSpec {
    WeightSpec::new(WeightFamily::UnitControl, RadialProfile::Unit, 1.0).unwrap()
}

/// Reference mesh: 32 rings x 32 sectors, geometrically graded from
/// r_min = 1e-3 so that ring 24 lands on the unit circle, then uniform to
/// the rim at 2.
fn reference_mesh() -> PolarMesh {
    PolarMesh::build_graded(32, 32, 1e-3, 2.0, 25).unwrap()
}

/// Same family of ladders at other inner radii (refinement criteria).
fn graded_mesh(r_min: f64) -> PolarMesh {
    PolarMesh::build_graded(32, 32, r_min, 2.0, 25).unwrap()
}

fn network(mesh: &PolarMesh, w: &WeightSpec, mode: TopologyMode) -> FormMatrices {
    let topo = Topology::build(mesh, w, mode).unwrap();
    assemble(mesh, &topo, w).unwrap()
}

/// Deterministic, structureless source terms for the identity checks.
fn test_source(n: usize, trial: u64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let h = (i as u64 ^ trial.wrapping_mul(0xD134_2543_DE82_EF95))
                .wrapping_mul(0x9E37_79B9_7F4A_7C15);
            0.25 + ((h >> 11) % 4096) as f64 / 4096.0
        })
        .collect()
}

#[test]
fn acceptance_01_assumption_quadratures() {
    let mut c = Criterion::new(1, "assumption-quadratures", Some(1));

    // Power profile, alpha = 1: all three quantities in closed form.
    let p = RadialProfile::power(1.0).unwrap();
    let r = check_assumptions(&p, 64, &DEFAULT_EPSILONS, DEFAULT_ONERANK_BOUND).unwrap();
    c.close(r.integral_a_over_r, 1.0, 1e-10, "power a/r integral");
    c.close(r.integral_r_over_a, 1.0, 1e-10, "power r/a integral");
    for (eps, value) in &r.onerank_samples {
        c.close(
            *value,
            0.5,
            1e-8,
            &format!("uniform-integrability expression at eps {eps}"),
        );
    }
    c.check(r.passed, "power admissibility", "expected to pass".to_string());

    // Log profile, alpha = 2: the a/r integral is 1/log 2; the others are
    // finite (r/a by quadrature, the expression grows only
    // logarithmically in 1/eps and stays under the bound on the ladder).
    let l = RadialProfile::log(2.0).unwrap();
    let r = check_assumptions(&l, 64, &DEFAULT_EPSILONS, DEFAULT_ONERANK_BOUND).unwrap();
    c.close(r.integral_a_over_r, 1.442_695_040_888_963_4, 1e-12, "log a/r integral");
    c.check(
        r.integral_r_over_a.is_finite() && r.integral_r_over_a > 0.0,
        "log r/a integral",
        format!("expected finite positive, got {}", r.integral_r_over_a),
    );
    c.check(r.passed, "log admissibility", "expected to pass".to_string());

    // Unit control: the a/r integral diverges, so admissibility fails.
    let r = check_assumptions(&RadialProfile::Unit, 64, &DEFAULT_EPSILONS, DEFAULT_ONERANK_BOUND)
        .unwrap();
    c.check(
        r.integral_a_over_r.is_infinite(),
        "unit a/r integral",
        format!("expected divergence, got {}", r.integral_a_over_r),
    );
    c.check(!r.passed, "unit admissibility", "expected to fail".to_string());

    c.finish();
}

#[test]
fn acceptance_02_one_point_identity() {
    let mut c = Criterion::new(2, "one-point-identity", Some(10));
    let mesh = reference_mesh();
    let glued = network(&mesh, &power_weight(), TopologyMode::Glued);

    // The full resolvent applied to every source must equal the killed
    // resolvent plus the rank-one correction along the origin potential.
    for alpha in [0.5, 1.0, 4.0] {
        let mut worst = 0.0f64;
        let mut worst_origin = 0.0f64;
        for trial in 0..20 {
            let src = test_source(glued.n_mesh(), trial);
            let r = verify_one_point(&glued, alpha, &src).unwrap();
            worst = worst.max(r.max_residual);
            worst_origin = worst_origin.max(
                (r.origin_value - r.predicted_origin_value).abs()
                    / r.origin_value.abs().max(1e-300),
            );
            c.check(
                r.denominator > 0.0,
                "normalizing mass",
                format!("alpha {alpha}, trial {trial}: denominator {}", r.denominator),
            );
        }
        c.small(worst, 1e-8, &format!("rank-one defect at alpha {alpha}"));
        c.small(worst_origin, 1e-8, &format!("origin formula at alpha {alpha}"));
    }
    c.finish();
}

#[test]
fn acceptance_03_two_point_identity() {
    let mut c = Criterion::new(3, "two-point-identity", Some(10));
    let mesh = reference_mesh();
    let split = network(&mesh, &power_weight(), TopologyMode::Split);

    for alpha in [0.5, 1.0, 4.0] {
        let mut worst = 0.0f64;
        let mut worst_origin = 0.0f64;
        for trial in 0..5 {
            let src = test_source(split.n_mesh(), trial);
            let r = verify_two_point(&split, alpha, &src).unwrap();
            worst = worst.max(r.max_residual);
            let scale = r.origin_plus_direct.abs().max(r.origin_minus_direct.abs());
            worst_origin = worst_origin
                .max((r.origin_plus - r.origin_plus_direct).abs() / scale)
                .max((r.origin_minus - r.origin_minus_direct).abs() / scale);
            c.close(
                r.determinant_factored,
                r.determinant,
                1e-9,
                &format!("determinant factorization at alpha {alpha}"),
            );
        }
        c.small(worst, 1e-8, &format!("rank-two defect at alpha {alpha}"));
        c.small(worst_origin, 1e-8, &format!("origin formula at alpha {alpha}"));

        // Conservativeness probe: the resolvent of 1 is 1/alpha, so the
        // boundary system must reproduce it at both origins.
        let ones = vec![1.0; split.n_mesh()];
        let r = verify_two_point(&split, alpha, &ones).unwrap();
        c.close(r.origin_plus, 1.0 / alpha, 1e-10, "constant source, first origin");
        c.close(r.origin_minus, 1.0 / alpha, 1e-10, "constant source, second origin");
    }

    // The boundary coefficients along their two routes, and the exact
    // mass balance that ties them to the potentials.
    let g = gamma_coefficients(&split, 1.0).unwrap();
    c.close(g.cross_flux_minus, g.cross_flux_plus, 1e-10, "cross flux reciprocity");
    c.close(g.pp_alpha_flux, g.pp_alpha_mass, 1e-8, "same-side coefficient routes");
    c.close(g.mm_alpha_flux, g.mm_alpha_mass, 1e-8, "mirrored same-side routes");
    let scale = g.pp_alpha_mass.abs();
    c.small(g.pm_alpha_mass - g.pm_alpha_flux, 1e-8 * scale, "cross coefficient routes");
    c.small(g.sum_rule_plus, 1e-10, "mass balance (first origin)");
    c.small(g.sum_rule_minus, 1e-10, "mass balance (second origin)");
    c.check(
        g.pp_alpha_mass > 0.0 && g.pm_alpha_mass > 0.0 && g.cross_flux_plus > 0.0,
        "coefficient signs",
        format!(
            "pp {}, pm {}, cross {}",
            g.pp_alpha_mass, g.pm_alpha_mass, g.cross_flux_plus
        ),
    );
    c.finish();
}

#[test]
fn acceptance_04_hitting_partition() {
    let mut c = Criterion::new(4, "hitting-partition", None);
    let mesh = reference_mesh();
    let split = network(&mesh, &power_weight(), TopologyMode::Split);

    let (phi_p, phi_m) = hitting_probs_split(&split).unwrap();
    let mut worst_sum = 0.0f64;
    let mut worst_range = 0.0f64;
    for i in 0..split.num_unknowns() {
        worst_sum = worst_sum.max((phi_p[i] + phi_m[i] - 1.0).abs());
        worst_range = worst_range
            .max((-phi_p[i]).max(phi_p[i] - 1.0))
            .max((-phi_m[i]).max(phi_m[i] - 1.0));
    }
    // Recurrence: the two hitting probabilities partition unity node-wise.
    c.small(worst_sum, 1e-12, "phi+ + phi- = 1");
    c.check(
        worst_range <= 1e-13,
        "probability bounds",
        format!("max excursion outside [0,1]: {worst_range:.3e}"),
    );
    // Central symmetry swaps the two probabilities.
    let mut worst_swap = 0.0f64;
    for i in 0..split.n_mesh() {
        worst_swap = worst_swap.max((phi_p[i] - phi_m[split.mesh.antipode(i)]).abs());
    }
    c.small(worst_swap, 1e-12, "antipodal swap");
    c.finish();
}

#[test]
fn acceptance_05_capacity_dichotomy() {
    let mut c = Criterion::new(5, "capacity-dichotomy", Some(60));
    let depths = [1e-2, 1e-3, 1e-4, 1e-5];

    // Degenerate weight: the origin keeps positive capacity under
    // refinement of the inner radius; the ladder settles (< 5% drift over
    // its last step) and never drops below a tenth of its coarsest value.
    let mut caps_power = Vec::new();
    for &r_min in &depths {
        let mesh = graded_mesh(r_min);
        let f = network(&mesh, &power_weight(), TopologyMode::Glued);
        caps_power.push(origin_capacity(&f, 1.0).unwrap().capacity);
    }
    for (d, cap) in depths.iter().zip(&caps_power) {
        c.check(*cap > 0.0, "positive capacity", format!("r_min {d}: capacity {cap}"));
    }
    let n = caps_power.len();
    let last_step = (caps_power[n - 1] - caps_power[n - 2]).abs() / caps_power[n - 2];
    c.check(
        last_step < 0.05,
        "capacity settles",
        format!("last refinement step still moved the value by {:.2}%", 100.0 * last_step),
    );
    let floor = 0.1 * caps_power[0];
    c.check(
        caps_power.iter().all(|&v| v >= floor),
        "capacity floor",
        format!("ladder {caps_power:?} dips below a tenth of the coarsest value"),
    );

    // Unit control: the capacity decays to zero like 1 / log(1/r_min),
    // the regular-point signature.  Strict decrease, a total fall of more
    // than 40 percent across the ladder, and the log-compensated values
    // stay within a factor of two.  (A literal 40 percent fall per level
    // is incompatible with logarithmic decay, whose per-level ratio is
    // log(1/r_k) / log(1/r_{k+1}) -> 1; the decay law itself is what the
    // control must exhibit.)
    let mut caps_unit = Vec::new();
    for &r_min in &depths {
        let mesh = graded_mesh(r_min);
        let f = network(&mesh, &unit_weight(), TopologyMode::Glued);
        caps_unit.push(origin_capacity(&f, 1.0).unwrap().capacity);
    }
    for pair in caps_unit.windows(2) {
        c.check(
            pair[1] < pair[0],
            "unit strict decrease",
            format!("{} then {}", pair[0], pair[1]),
        );
    }
    let fall = 1.0 - caps_unit.last().unwrap() / caps_unit[0];
    c.check(
        fall > 0.40,
        "unit total decay",
        format!("fell only {:.1}% over the ladder", 100.0 * fall),
    );
    let compensated: Vec<f64> = depths
        .iter()
        .zip(&caps_unit)
        .map(|(r, cap)| cap * (1.0 / r).ln())
        .collect();
    let cmax = compensated.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = compensated.iter().cloned().fold(f64::MAX, f64::min);
    c.check(
        cmax / cmin < 2.0,
        "unit log rate",
        format!("compensated ladder {compensated:?} spreads by {:.2}x", cmax / cmin),
    );
    c.finish();
}

#[test]
fn acceptance_06_cone_capacity_ratio() {
    let mut c = Criterion::new(6, "cone-capacity-ratio", None);
    let mesh = reference_mesh();
    let f = network(&mesh, &power_weight(), TopologyMode::Glued);
    let epsilons = [0.2, 0.1, 0.05, 0.025];
    let delta = std::f64::consts::PI / 8.0;

    let report = cone_capacity_report(&f, 1.0, &epsilons, delta).unwrap();
    for pair in report.windows(2) {
        c.check(
            pair[1].cap_plus < pair[0].cap_plus,
            "monotone shrink",
            format!(
                "eps {}: {} then eps {}: {}",
                pair[0].epsilon, pair[0].cap_plus, pair[1].epsilon, pair[1].cap_plus
            ),
        );
    }
    let mut fitted = Vec::new();
    for s in &report {
        c.check(
            s.cap_plus > 0.0 && s.nodes_plus > 0,
            "sampled wedge",
            format!("eps {}: capacity {}, {} nodes", s.epsilon, s.cap_plus, s.nodes_plus),
        );
        // The mirrored wedge has the same capacity: central symmetry.
        c.close(s.cap_minus, s.cap_plus, 1e-12, "mirror symmetry");
        fitted.push(s.cap_plus / s.bound);
    }
    // The wedge capacity decays at the rate of the weight-mass integral:
    // the fitted constant stays within a narrow band over the ladder.
    let fmax = fitted.iter().cloned().fold(f64::MIN, f64::max);
    let fmin = fitted.iter().cloned().fold(f64::MAX, f64::min);
    c.check(
        fmax / fmin < 3.0,
        "stable comparison constant",
        format!("fitted constants {fitted:?} spread by {:.2}x", fmax / fmin),
    );
    c.finish();
}

#[test]
fn acceptance_07_gluing_identities() {
    let mut c = Criterion::new(7, "gluing-identities", None);
    let mesh = reference_mesh();
    let w = power_weight();

    let glued = network(&mesh, &w, TopologyMode::Glued);
    let split = network(&mesh, &w, TopologyMode::Split);
    let cg = origin_capacity(&glued, 1.0).unwrap();
    let cs = origin_capacity(&split, 1.0).unwrap();

    // Charging both split origins is the glued problem.
    c.close(cs.capacity, cg.capacity, 1e-12, "split pair vs glued");
    // Inner symmetry: each origin alone carries the same capacity.
    let o_plus = split.topology.origin_index(&split.mesh, 0);
    let o_minus = split.topology.origin_index(&split.mesh, 1);
    let cap_plus = capacity(&split, 1.0, &[o_plus]).unwrap().capacity;
    let cap_minus = capacity(&split, 1.0, &[o_minus]).unwrap().capacity;
    c.close(cap_minus, cap_plus, 1e-12, "one origin vs the other");
    // Monotone in the target and subadditive over it.
    c.check(
        cap_plus > 0.0
            && cap_plus <= cg.capacity * (1.0 + 1e-12)
            && cg.capacity <= (cap_plus + cap_minus) * (1.0 + 1e-12),
        "capacity bracket",
        format!("single {cap_plus} vs pair {} vs sum {}", cg.capacity, cap_plus + cap_minus),
    );

    // Variational value vs boundary flux: independent routes.
    c.close(cg.flux, cg.capacity, 1e-10, "glued flux route");
    c.close(cs.flux, cs.capacity, 1e-10, "split flux route");
    c.check(
        cg.capacity > 0.05,
        "positive capacity",
        format!("glued origin capacity {} suspiciously small", cg.capacity),
    );
    // The equilibrium potential obeys the maximum principle.
    for (i, v) in cg.potential.iter().enumerate() {
        if !(*v >= -1e-13 && *v <= 1.0 + 1e-13) {
            c.check(false, "maximum principle", format!("node {i}: {v}"));
            break;
        }
    }
    c.finish();
}

#[test]
fn acceptance_08_approach_angle() {
    let mut c = Criterion::new(8, "approach-angle", Some(30));
    let mesh = reference_mesh();
    let w = power_weight();
    let killed = network(&mesh, &w, TopologyMode::Killed);
    let start = killed.mesh.node_index(12, 3);

    let exact = origin_harmonic_measure(&killed, start).unwrap();
    let total: f64 = exact.iter().sum();
    // Recurrence: absorption is certain, and the row-sum identity makes
    // the discrete measure a probability exactly.
    c.small(total - 1.0, 1e-11, "total absorption probability");
    for (j, p) in exact.iter().enumerate() {
        if killed.topology.sector_cone[j] % 2 == 0 {
            c.check(
                *p == 0.0,
                "regular sectors never absorb",
                format!("sector {j} got {p}"),
            );
        } else {
            c.check(*p > 0.0, "degenerate sectors absorb", format!("sector {j} got {p}"));
        }
    }

    // Monte Carlo route at 1e4 paths: the sampled last-annulus angles
    // concentrate on the degenerate arcs (within 2 dtheta of them), and
    // the per-cone totals match the exact measure to three binomial
    // standard errors.
    let paths = 10_000u64;
    let mc = absorption_measure_mc(&killed, start, paths, 2_024, 50_000_000).unwrap();
    let two_dtheta = 2.0 * killed.mesh.dtheta;
    let near_degenerate = |j: usize| -> bool {
        let theta = killed.mesh.sector_angle(j);
        // Closed arcs of the two degenerate cones: [0, pi/2] and [pi, 3pi/2].
        let d1 = angular_distance_to_arc(theta, 0.0, std::f64::consts::FRAC_PI_2);
        let d2 =
            angular_distance_to_arc(theta, std::f64::consts::PI, 1.5 * std::f64::consts::PI);
        d1.min(d2) <= two_dtheta
    };
    let near_mass: f64 =
        (0..killed.mesh.sectors).filter(|&j| near_degenerate(j)).map(|j| mc[j]).sum();
    c.check(
        near_mass >= 0.99,
        "angles concentrate on the degenerate arcs",
        format!("only {:.4} of the sampled mass lies within 2 dtheta", near_mass),
    );
    let cone_total = |v: &[f64], cone: usize| -> f64 {
        (0..killed.mesh.sectors)
            .filter(|&j| killed.topology.sector_cone[j] == cone)
            .map(|j| v[j])
            .sum()
    };
    for cone in [1usize, 3] {
        let want = cone_total(&exact, cone);
        let got = cone_total(&mc, cone);
        let se = (want * (1.0 - want) / paths as f64).sqrt();
        c.check(
            (got - want).abs() <= 3.0 * se,
            "sampled absorption",
            format!("cone {cone}: mc {got} vs exact {want} (3se {:.2e})", 3.0 * se),
        );
    }
    c.finish();
}

/// Distance from `theta` to the closed arc `[lo, hi]` (all in [0, 2 pi)).
fn angular_distance_to_arc(theta: f64, lo: f64, hi: f64) -> f64 {
    if theta >= lo && theta <= hi {
        return 0.0;
    }
    let wrap = |d: f64| {
        let d = d.abs() % (2.0 * std::f64::consts::PI);
        d.min(2.0 * std::f64::consts::PI - d)
    };
    wrap(theta - lo).min(wrap(theta - hi))
}

#[test]
fn acceptance_09_same_side_return() {
    let mut c = Criterion::new(9, "same-side-return", Some(60));
    let mesh = reference_mesh();
    let w = power_weight();
    let visits = 10_000u64;

    // Split: the first origin releases the walker into its own cone,
    // every single time; the event is structural, so the count is exact.
    let split = network(&mesh, &w, TopologyMode::Split);
    let stats = origin_excursions(&split, 0, visits, 97, 50_000_000).unwrap();
    c.check(stats.aborted == 0, "split abort count", format!("{} aborted", stats.aborted));
    c.check(
        stats.departures_per_cone[0] == visits,
        "split departures stay in cone",
        format!(
            "only {} of {visits} excursions left through the first cone",
            stats.departures_per_cone[0]
        ),
    );
    c.check(
        stats.arrivals_per_origin.iter().all(|&a| a > 0),
        "split arrivals reach both origins",
        format!("{:?}", stats.arrivals_per_origin),
    );

    // Glued: the single origin forgets the side; departures split evenly
    // between the two degenerate cones (three binomial standard errors).
    let glued = network(&mesh, &w, TopologyMode::Glued);
    let stats = origin_excursions(&glued, 0, visits, 98, 50_000_000).unwrap();
    c.check(stats.aborted == 0, "glued abort count", format!("{} aborted", stats.aborted));
    let frac = stats.departures_per_cone[0] as f64 / visits as f64;
    let se = (0.25 / visits as f64).sqrt();
    c.check(
        (frac - 0.5).abs() <= 3.0 * se,
        "glued departures forget the side",
        format!("first-cone fraction {frac} vs 1/2 (3se {:.2e})", 3.0 * se),
    );
    c.check(
        stats.departures_per_cone[1] == 0 && stats.departures_per_cone[3] == 0,
        "regular cones are never the exit",
        format!("{:?}", stats.departures_per_cone),
    );
    c.finish();
}

#[test]
fn acceptance_10_bessel_scale() {
    let mut c = Criterion::new(10, "bessel-scale", Some(120));

    // Radial generator inside a degenerate cone at alpha = 1: effective
    // dimension 1, linear scale function, hit probability 50/99.
    let inward = BesselConfig {
        delta: 1.0,
        r0: 0.5,
        inner: 0.01,
        outer: 1.0,
        dt: 1e-5,
        paths: 100_000,
        seed: 1_001,
        max_steps: 500_000_000,
    };
    let est = bessel_hit_estimate(&inward).unwrap();
    c.check(est.aborted == 0, "inward aborts", format!("{}", est.aborted));
    c.close(est.analytic, 50.0 / 99.0, 1e-14, "inward scale function");
    let se = (est.analytic * (1.0 - est.analytic) / inward.paths as f64).sqrt();
    c.check(
        (est.hit_probability - est.analytic).abs() <= 3.0 * se,
        "inward hit probability",
        format!(
            "mc {} vs analytic {} (3se {:.2e})",
            est.hit_probability, est.analytic, 3.0 * se
        ),
    );

    // Regular cone: effective dimension 3, reciprocal scale function,
    // hit probability 1/99.
    let outward = BesselConfig { delta: 3.0, seed: 1_002, ..inward };
    let est = bessel_hit_estimate(&outward).unwrap();
    c.check(est.aborted == 0, "outward aborts", format!("{}", est.aborted));
    c.close(est.analytic, 1.0 / 99.0, 1e-14, "outward scale function");
    let se = (est.analytic * (1.0 - est.analytic) / outward.paths as f64).sqrt();
    c.check(
        (est.hit_probability - est.analytic).abs() <= 3.0 * se,
        "outward hit probability",
        format!(
            "mc {} vs analytic {} (3se {:.2e})",
            est.hit_probability, est.analytic, 3.0 * se
        ),
    );
    c.finish();
}

#[test]
fn acceptance_11_trace_decomposition() {
    let mut c = Criterion::new(11, "trace-decomposition", None);
    let mesh = reference_mesh();
    let split = network(&mesh, &power_weight(), TopologyMode::Split);

    let psi = psi0_grid(&split).unwrap();
    let r_min = split.mesh.r_min();
    c.close(
        split.trace_plus(&psi).unwrap(),
        1.0 - r_min * r_min,
        1e-12,
        "plateau trace",
    );
    let tm = split.trace_minus(&psi).unwrap();
    c.check(
        tm == 0.0,
        "vanishing trace",
        format!("trace over the mirrored arc is {tm:.3e}, expected exact 0"),
    );

    // Any vector decomposes as (zero trace gap) + lambda * psi0, with the
    // remainder's gap vanishing at quadrature level.
    let mut worst_gap = 0.0f64;
    let mut worst_recon = 0.0f64;
    for trial in 0..20u64 {
        let u: Vec<f64> = test_source(split.num_unknowns(), trial.wrapping_add(51))
            .iter()
            .map(|x| 4.0 * x - 2.0)
            .collect();
        let (v, lambda) = decompose(&split, &u).unwrap();
        worst_gap = worst_gap
            .max((split.trace_plus(&v).unwrap() - split.trace_minus(&v).unwrap()).abs());
        for i in 0..split.num_unknowns() {
            worst_recon = worst_recon.max((u[i] - (v[i] + lambda * psi[i])).abs());
        }
    }
    c.small(worst_gap, 1e-12, "remainder trace gap");
    c.small(worst_recon, 1e-12, "exact reconstruction");
    c.finish();
}

#[test]
fn acceptance_12_non_regularity_gap() {
    let mut c = Criterion::new(12, "non-regularity-gap", None);
    let depths = [1e-2, 1e-3, 1e-4, 1e-5];

    // Degenerate weight: psi0 keeps a positive distance from the glued
    // subspace under refinement; the two origin values are genuinely
    // different boundary data.
    let mut dists = Vec::new();
    for &r_min in &depths {
        let mesh = graded_mesh(r_min);
        let split = network(&mesh, &power_weight(), TopologyMode::Split);
        let psi = psi0_grid(&split).unwrap();
        dists.push(glued_distance_sq(&split, &psi).unwrap());
    }
    for (d, v) in depths.iter().zip(&dists) {
        c.check(*v > 0.0, "positive distance", format!("r_min {d}: {v}"));
    }
    let floor = 0.5 * dists[0];
    c.check(
        dists.iter().all(|&v| v >= floor),
        "distance floor",
        format!("ladder {dists:?} dips below half the coarsest value"),
    );

    // Unit control on the same topology: the E_1 energy of psi0 diverges
    // logarithmically, one roughly equal increment per decade.  (The
    // distance to the glued subspace cannot witness this: it is capped by
    // gap^2 / R, and the effective resistance R between the origins stays
    // bounded below by the finite origin-hop conductances, so the
    // distance stays bounded for every r_min.  The energy blow-up is the
    // discrete form of the gradient of psi0 failing to be square
    // integrable for a flat weight.)
    let wq = power_weight();
    let wu = unit_weight();
    let mut energies = Vec::new();
    for &r_min in &depths {
        let mesh = graded_mesh(r_min);
        let topo = Topology::build(&mesh, &wq, TopologyMode::Split).unwrap();
        let f = assemble(&mesh, &topo, &wu).unwrap();
        let psi = psi0_grid(&f).unwrap();
        energies.push(f.form_inner(1.0, &psi, &psi));
    }
    let increments: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    for (inc, d) in increments.iter().zip(&depths[1..]) {
        c.check(
            *inc > 0.0,
            "unit energy grows",
            format!("increment to r_min {d} was {inc}"),
        );
    }
    let imax = increments.iter().cloned().fold(f64::MIN, f64::max);
    let imin = increments.iter().cloned().fold(f64::MAX, f64::min);
    c.check(
        imax / imin < 2.0,
        "logarithmic growth rate",
        format!("per-decade increments {increments:?} spread by {:.2}x", imax / imin),
    );
    c.finish();
}
