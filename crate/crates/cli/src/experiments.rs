//! The named experiments behind the subcommands.  Each one wires the core
//! modules for a single question, records results and residuals, and
//! gates `passed` on the same thresholds the acceptance suite pins.

use crate::config::Config;
use crate::report::{num, num_list, CsvCell, Report};
use sdl_core::error::{Error, Result};
use sdl_core::forms::{decompose, glued_distance_sq, psi0_grid};
use sdl_core::mesh::{Topology, TopologyMode};
use sdl_core::potential::{
    capacity, cone_capacity_report, hitting_probs_split, origin_capacity,
    origin_harmonic_measure, verify_one_point, verify_two_point,
};
use sdl_core::stochastic::{
    absorption_measure_mc, bessel_hit_estimate, split_hit_probability_mc, BesselConfig,
};
use sdl_core::weights::{
    check_assumptions, RadialProfile, WeightFamily, WeightSpec, DEFAULT_EPSILONS,
    DEFAULT_ONERANK_BOUND,
};

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

/// The four-level refinement ladder descending from the configured inner
/// radius by factors of ten.
fn ladder(cfg: &Config) -> Result<Vec<f64>> {
    let top = cfg.f64("mesh.r_min")?;
    Ok((0..4).map(|k| top * 10f64.powi(-k)).collect())
}

fn unit_weight() -> WeightSpec {
    WeightSpec::new(WeightFamily::UnitControl, RadialProfile::Unit, 1.0).expect("static weight")
}

pub fn check_assumptions_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("check-assumptions", cfg.as_map());
    let profile = cfg.profile()?;
    let r = check_assumptions(&profile, 64, &DEFAULT_EPSILONS, DEFAULT_ONERANK_BOUND)?;

    rep.result("integral_a_over_r", num(r.integral_a_over_r));
    rep.result("integral_r_over_a", num(r.integral_r_over_a));
    rep.result("onerank_sup", num(r.onerank_sup));
    rep.result("onerank_bound", num(DEFAULT_ONERANK_BOUND));
    rep.gate("admissible", r.passed);

    rep.csv_header = "epsilon,onerank_value".to_string();
    for (eps, v) in &r.onerank_samples {
        rep.csv_row(&[CsvCell::Num(*eps), CsvCell::Num(*v)]);
    }
    Ok(rep)
}

pub fn capacity_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("capacity", cfg.as_map());
    let w = cfg.weight()?;
    let wu = unit_weight();
    cfg.resolve_mode(TopologyMode::Glued, "capacity")?;
    let alpha = cfg.f64("alpha")?;

    let mut caps_glued = Vec::new();
    let mut caps_unit = Vec::new();
    let mut worst_pair = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut worst_flux = 0.0f64;
    rep.csv_header =
        "r_min,cap_glued,flux_glued,cap_split_pair,cap_single_plus,cap_single_minus,cap_unit_glued"
            .to_string();
    for (level, r_min) in ladder(cfg)?.into_iter().enumerate() {
        let mesh = cfg.mesh_at(r_min)?;
        let glued = cfg.network(&mesh, &w, TopologyMode::Glued)?;
        let split = cfg.network(&mesh, &w, TopologyMode::Split)?;
        let unit = cfg.network(&mesh, &wu, TopologyMode::Glued)?;

        let cg = origin_capacity(&glued, alpha)?;
        let cs = origin_capacity(&split, alpha)?;
        let cu = origin_capacity(&unit, alpha)?;
        let o_plus = split.topology.origin_index(&split.mesh, 0);
        let o_minus = split.topology.origin_index(&split.mesh, 1);
        let cap_plus = capacity(&split, alpha, &[o_plus])?.capacity;
        let cap_minus = capacity(&split, alpha, &[o_minus])?.capacity;

        // The exact identities are gated at the configured level only;
        // the deeper rungs exist to show the decay shape and their
        // conditioning grows like 1/r_min.
        if level == 0 {
            worst_pair = (cs.capacity - cg.capacity).abs() / cg.capacity;
            worst_sym = (cap_plus - cap_minus).abs() / cap_plus;
            worst_flux = (cg.flux - cg.capacity).abs() / cg.capacity;
        }
        caps_glued.push(cg.capacity);
        caps_unit.push(cu.capacity);
        rep.csv_row(&[
            CsvCell::Num(r_min),
            CsvCell::Num(cg.capacity),
            CsvCell::Num(cg.flux),
            CsvCell::Num(cs.capacity),
            CsvCell::Num(cap_plus),
            CsvCell::Num(cap_minus),
            CsvCell::Num(cu.capacity),
        ]);
    }

    let n = caps_glued.len();
    let settle = (caps_glued[n - 1] - caps_glued[n - 2]).abs() / caps_glued[n - 2];
    let floor = caps_glued.iter().cloned().fold(f64::MAX, f64::min) / caps_glued[0];
    let unit_fall = 1.0 - caps_unit[n - 1] / caps_unit[0];

    rep.result("cap_ladder", num_list(&caps_glued));
    rep.result("unit_ladder", num_list(&caps_unit));
    rep.residual("pair_vs_glued_rel", worst_pair);
    rep.residual("origin_symmetry_rel", worst_sym);
    rep.residual("flux_vs_variational_rel", worst_flux);
    rep.residual("last_step_rel_change", settle);
    rep.result("unit_total_fall", num(unit_fall));

    rep.gate("pair_matches_glued", worst_pair <= 1e-12);
    rep.gate("origins_symmetric", worst_sym <= 1e-12);
    rep.gate("flux_matches", worst_flux <= 1e-10);
    rep.gate("capacity_settles", settle < 0.05);
    rep.gate("capacity_floor", floor >= 0.1);
    rep.gate(
        "unit_control_decays",
        caps_unit.windows(2).all(|p| p[1] < p[0]) && unit_fall > 0.40,
    );
    Ok(rep)
}

pub fn cones_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("cones", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Glued, "cones")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let alpha = cfg.f64("alpha")?;
    let epsilons = [0.2, 0.1, 0.05, 0.025];
    let delta = std::f64::consts::PI / 8.0;

    let report = cone_capacity_report(&forms, alpha, &epsilons, delta)?;
    rep.csv_header = "epsilon,cap_plus,cap_minus,bound,fitted".to_string();
    let mut fitted = Vec::new();
    let mut worst_mirror = 0.0f64;
    for s in &report {
        let c = s.cap_plus / s.bound;
        fitted.push(c);
        worst_mirror = worst_mirror.max((s.cap_minus - s.cap_plus).abs() / s.cap_plus);
        rep.csv_row(&[
            CsvCell::Num(s.epsilon),
            CsvCell::Num(s.cap_plus),
            CsvCell::Num(s.cap_minus),
            CsvCell::Num(s.bound),
            CsvCell::Num(c),
        ]);
    }
    let caps: Vec<f64> = report.iter().map(|s| s.cap_plus).collect();
    let monotone = caps.windows(2).all(|p| p[1] < p[0]);
    rep.result("cap_plus", num_list(&caps));
    rep.result("fitted_constant", num_list(&fitted));
    rep.residual("mirror_symmetry_rel", worst_mirror);
    rep.gate("mirror_symmetric", worst_mirror <= 1e-12);

    if report.iter().all(|s| s.bound.is_finite()) {
        let fmax = fitted.iter().cloned().fold(f64::MIN, f64::max);
        let fmin = fitted.iter().cloned().fold(f64::MAX, f64::min);
        rep.result("fitted_spread", num(fmax / fmin));
        rep.gate("monotone_decrease", monotone);
        rep.gate("stable_constant", fmax / fmin < 3.0);
    } else {
        // Unit-style weight: the comparison integral diverges and the
        // wedge capacities keep a positive limit instead of decaying.
        let cmin = caps.iter().cloned().fold(f64::MAX, f64::min);
        rep.gate("bounded_below", cmin > 0.25 * caps[0]);
    }
    Ok(rep)
}

pub fn one_point_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("one-point", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Glued, "one-point")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let alpha = cfg.f64("alpha")?;
    let seed = cfg.u64("mc.seed")?;

    rep.csv_header =
        "trial,residual_linf,origin_value,predicted_origin_value,denominator".to_string();
    let mut worst = 0.0f64;
    let mut worst_origin = 0.0f64;
    for trial in 0..20u64 {
        let src = test_source(forms.n_mesh(), seed.wrapping_add(trial));
        let r = verify_one_point(&forms, alpha, &src)?;
        worst = worst.max(r.max_residual);
        worst_origin = worst_origin.max(
            (r.origin_value - r.predicted_origin_value).abs() / r.origin_value.abs().max(1e-300),
        );
        rep.csv_row(&[
            CsvCell::Int(trial),
            CsvCell::Num(r.max_residual),
            CsvCell::Num(r.origin_value),
            CsvCell::Num(r.predicted_origin_value),
            CsvCell::Num(r.denominator),
        ]);
    }
    rep.residual("residual_linf", worst);
    rep.residual("origin_formula_rel", worst_origin);
    rep.gate("identity_holds", worst <= 1e-8);
    rep.gate("origin_formula", worst_origin <= 1e-8);
    Ok(rep)
}

pub fn two_point_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("two-point", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Split, "two-point")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let alpha = cfg.f64("alpha")?;
    let seed = cfg.u64("mc.seed")?;

    rep.csv_header = "trial,residual_linf,origin_plus,origin_plus_direct,origin_minus,\
                      origin_minus_direct,determinant,determinant_factored"
        .to_string();
    let mut worst = 0.0f64;
    let mut worst_origin = 0.0f64;
    let mut worst_det = 0.0f64;
    for trial in 0..5u64 {
        let src = test_source(forms.n_mesh(), seed.wrapping_add(trial));
        let r = verify_two_point(&forms, alpha, &src)?;
        worst = worst.max(r.max_residual);
        let scale = r.origin_plus_direct.abs().max(r.origin_minus_direct.abs());
        worst_origin = worst_origin
            .max((r.origin_plus - r.origin_plus_direct).abs() / scale)
            .max((r.origin_minus - r.origin_minus_direct).abs() / scale);
        worst_det = worst_det
            .max((r.determinant_factored - r.determinant).abs() / r.determinant.abs());
        rep.csv_row(&[
            CsvCell::Int(trial),
            CsvCell::Num(r.max_residual),
            CsvCell::Num(r.origin_plus),
            CsvCell::Num(r.origin_plus_direct),
            CsvCell::Num(r.origin_minus),
            CsvCell::Num(r.origin_minus_direct),
            CsvCell::Num(r.determinant),
            CsvCell::Num(r.determinant_factored),
        ]);
    }

    // Conservativeness probe: a constant source has resolvent 1/alpha.
    let ones = vec![1.0; forms.n_mesh()];
    let r = verify_two_point(&forms, alpha, &ones)?;
    let constant_dev = (r.origin_plus * alpha - 1.0)
        .abs()
        .max((r.origin_minus * alpha - 1.0).abs());

    rep.residual("residual_linf", worst);
    rep.residual("origin_formula_rel", worst_origin);
    rep.residual("determinant_factored_rel", worst_det);
    rep.residual("constant_source_dev", constant_dev);
    rep.gate("identity_holds", worst <= 1e-8);
    rep.gate("origin_formula", worst_origin <= 1e-8);
    rep.gate("determinant_factorization", worst_det <= 1e-9);
    rep.gate("constant_source", constant_dev <= 1e-10);
    Ok(rep)
}

pub fn hitting_mc_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("hitting-mc", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Split, "hitting-mc")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let paths = cfg.u64("mc.paths")?;
    let seed = cfg.u64("mc.seed")?;
    let max_steps = cfg.u64("mc.max_steps")?;

    let start_ring = mesh.rings() / 2;
    let start_sector = mesh.sectors / 8;
    let start = forms.mesh.node_index(start_ring, start_sector);

    let (phi_p, phi_m) = hitting_probs_split(&forms)?;
    let partition = (0..forms.num_unknowns())
        .map(|i| (phi_p[i] + phi_m[i] - 1.0).abs())
        .fold(0.0f64, f64::max);
    let exact = phi_p[start];
    let est = split_hit_probability_mc(&forms, start, paths, seed, max_steps)?;
    let dev = (est.probability - exact).abs();
    let three_se = 3.0 * (exact * (1.0 - exact) / paths as f64).sqrt();

    rep.csv_header =
        "start_ring,start_sector,exact,estimate,standard_error,deviation,aborted".to_string();
    rep.csv_row(&[
        CsvCell::Int(start_ring as u64),
        CsvCell::Int(start_sector as u64),
        CsvCell::Num(exact),
        CsvCell::Num(est.probability),
        CsvCell::Num(est.standard_error),
        CsvCell::Num(dev),
        CsvCell::Int(est.aborted),
    ]);
    rep.result("exact_phi_plus", num(exact));
    rep.result("estimate", num(est.probability));
    rep.result("mean_steps", num(est.mean_steps));
    rep.residual("partition_defect", partition);
    rep.residual("deviation", dev);
    rep.gate("partition_of_unity", partition <= 1e-12);
    rep.gate("within_three_se", dev <= three_se);
    rep.gate("no_aborts", est.aborted == 0);
    Ok(rep)
}

pub fn approach_angle_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("approach-angle", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Killed, "approach-angle")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let paths = cfg.u64("mc.paths")?;
    let seed = cfg.u64("mc.seed")?;
    let max_steps = cfg.u64("mc.max_steps")?;
    let start = forms.mesh.node_index(mesh.rings() / 2, mesh.sectors / 8);

    let exact = origin_harmonic_measure(&forms, start)?;
    let mc = absorption_measure_mc(&forms, start, paths, seed, max_steps)?;
    let total: f64 = exact.iter().sum();
    let even_mass: f64 = (0..mesh.sectors)
        .filter(|&j| forms.topology.sector_cone[j] % 2 == 0)
        .map(|j| exact[j])
        .sum();

    // Sampled mass within 2 dtheta of the closed degenerate arcs.  Each
    // cone pair spans an angle 2w with the degenerate arc [0, w] first.
    let n_cones = *forms.topology.sector_cone.iter().max().unwrap_or(&1);
    let has_cones = n_cones >= 2;
    let cone_width = std::f64::consts::PI / (n_cones / 2).max(1) as f64;
    let two_dtheta = 2.0 * mesh.dtheta;
    let near_mass: f64 = (0..mesh.sectors)
        .filter(|&j| {
            let position = mesh.sector_angle(j).rem_euclid(2.0 * cone_width);
            let dist = if position <= cone_width {
                0.0
            } else {
                (position - cone_width).min(2.0 * cone_width - position)
            };
            dist <= two_dtheta
        })
        .map(|j| mc[j])
        .sum();
    let mut worst_cone_dev = 0.0f64;
    rep.csv_header = "sector,angle,cone,exact,sampled".to_string();
    for j in 0..mesh.sectors {
        rep.csv_row(&[
            CsvCell::Int(j as u64),
            CsvCell::Num(mesh.sector_angle(j)),
            CsvCell::Int(forms.topology.sector_cone[j] as u64),
            CsvCell::Num(exact[j]),
            CsvCell::Num(mc[j]),
        ]);
    }
    for cone in 1..=n_cones {
        let want: f64 = (0..mesh.sectors)
            .filter(|&j| forms.topology.sector_cone[j] == cone)
            .map(|j| exact[j])
            .sum();
        let got: f64 = (0..mesh.sectors)
            .filter(|&j| forms.topology.sector_cone[j] == cone)
            .map(|j| mc[j])
            .sum();
        let se = (want * (1.0 - want) / paths as f64).sqrt();
        if se > 0.0 {
            worst_cone_dev = worst_cone_dev.max((got - want).abs() / (3.0 * se));
        } else if got != want {
            worst_cone_dev = f64::INFINITY;
        }
    }

    rep.result("even_cone_mass", num(even_mass));
    rep.result("near_arc_sampled_mass", num(near_mass));
    rep.residual("total_minus_one", total - 1.0);
    rep.residual("worst_cone_dev_over_3se", worst_cone_dev);
    rep.gate("total_is_one", (total - 1.0).abs() <= 1e-11);
    rep.gate("sampled_within_3se", worst_cone_dev <= 1.0);
    if has_cones {
        rep.gate("angles_concentrate", near_mass >= 0.99);
        // Exact vanishing holds for power profiles, whose regular-cone
        // resistance to the origin diverges; log profiles keep a small
        // positive mass there.
        if matches!(w.profile, RadialProfile::Power { .. }) {
            rep.gate("even_cones_exactly_zero", even_mass == 0.0);
        }
    }
    Ok(rep)
}

pub fn bessel_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("bessel", cfg.as_map());
    let alpha = match cfg.profile()? {
        RadialProfile::Power { alpha } => alpha,
        _ => {
            return Err(Error::config(
                "the radial comparison walk needs profile.kind = power".to_string(),
            ))
        }
    };
    if alpha >= 2.0 {
        return Err(Error::config(format!(
            "the radial walk needs profile.alpha < 2, got {alpha}"
        )));
    }
    let paths = cfg.u64("mc.paths")?;
    let seed = cfg.u64("mc.seed")?;
    let dt = cfg.f64("mc.dt")?;
    let max_steps = cfg.u64("mc.max_steps")?;

    rep.csv_header =
        "case,delta,analytic,estimate,standard_error,mean_steps,aborted".to_string();
    let mut all_ok = true;
    let mut no_aborts = true;
    for (name, delta, seed) in [
        ("degenerate", 2.0 - alpha, seed),
        ("regular", 2.0 + alpha, seed.wrapping_add(1)),
    ] {
        let bc = BesselConfig {
            delta,
            r0: 0.5,
            inner: 0.01,
            outer: 1.0,
            dt,
            paths,
            seed,
            max_steps,
        };
        let est = bessel_hit_estimate(&bc)?;
        let three_se = 3.0 * (est.analytic * (1.0 - est.analytic) / paths as f64).sqrt();
        all_ok &= (est.hit_probability - est.analytic).abs() <= three_se;
        no_aborts &= est.aborted == 0;
        rep.csv_row(&[
            CsvCell::Text(name),
            CsvCell::Num(delta),
            CsvCell::Num(est.analytic),
            CsvCell::Num(est.hit_probability),
            CsvCell::Num(est.standard_error),
            CsvCell::Num(est.mean_steps),
            CsvCell::Int(est.aborted),
        ]);
        rep.result(
            &format!("{name}_deviation"),
            num((est.hit_probability - est.analytic).abs()),
        );
    }
    rep.gate("within_three_se", all_ok);
    rep.gate("no_aborts", no_aborts);
    Ok(rep)
}

pub fn trace_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("trace", cfg.as_map());
    let w = cfg.weight()?;
    let mode = cfg.resolve_mode(TopologyMode::Split, "trace")?;
    let mesh = cfg.mesh()?;
    let forms = cfg.network(&mesh, &w, mode)?;
    let seed = cfg.u64("mc.seed")?;

    let psi = psi0_grid(&forms)?;
    let r_min = mesh.r_min();
    let tp = forms.trace_plus(&psi)?;
    let tm = forms.trace_minus(&psi)?;

    rep.csv_header = "trial,lambda,remainder_trace_gap".to_string();
    let mut worst_gap = 0.0f64;
    let mut worst_recon = 0.0f64;
    for trial in 0..20u64 {
        let u: Vec<f64> = test_source(forms.num_unknowns(), seed.wrapping_add(trial))
            .iter()
            .map(|x| 4.0 * x - 2.0)
            .collect();
        let (v, lambda) = decompose(&forms, &u)?;
        let gap = (forms.trace_plus(&v)? - forms.trace_minus(&v)?).abs();
        worst_gap = worst_gap.max(gap);
        for i in 0..forms.num_unknowns() {
            worst_recon = worst_recon.max((u[i] - (v[i] + lambda * psi[i])).abs());
        }
        rep.csv_row(&[CsvCell::Int(trial), CsvCell::Num(lambda), CsvCell::Num(gap)]);
    }

    rep.result("trace_plus_psi0", num(tp));
    rep.result("trace_minus_psi0", num(tm));
    rep.residual("trace_plus_dev", tp - (1.0 - r_min * r_min));
    rep.residual("remainder_trace_gap", worst_gap);
    rep.residual("reconstruction_linf", worst_recon);
    rep.gate("plateau_trace", (tp - (1.0 - r_min * r_min)).abs() <= 1e-12);
    rep.gate("vanishing_trace", tm == 0.0);
    rep.gate("remainder_in_glued_domain", worst_gap <= 1e-12);
    rep.gate("exact_reconstruction", worst_recon <= 1e-12);
    Ok(rep)
}

pub fn dist_exp(cfg: &Config) -> Result<Report> {
    let mut rep = Report::new("dist", cfg.as_map());
    let w = cfg.weight()?;
    let wu = unit_weight();
    cfg.resolve_mode(TopologyMode::Split, "dist")?;

    rep.csv_header = "r_min,dist2,energy_e1,ctrl_dist2,ctrl_energy_e1".to_string();
    let mut dists = Vec::new();
    let mut ctrl_energies = Vec::new();
    for r_min in ladder(cfg)? {
        let mesh = cfg.mesh_at(r_min)?;
        let split = cfg.network(&mesh, &w, TopologyMode::Split)?;
        let psi = psi0_grid(&split)?;
        let d2 = glued_distance_sq(&split, &psi)?;
        let e1 = split.form_inner(1.0, &psi, &psi);

        // Control: same topology, flat conductances.
        let topo = Topology::build(&mesh, &w, TopologyMode::Split)?;
        let ctrl = sdl_core::forms::assemble(&mesh, &topo, &wu)?;
        let psi_c = psi0_grid(&ctrl)?;
        let cd2 = glued_distance_sq(&ctrl, &psi_c)?;
        let ce1 = ctrl.form_inner(1.0, &psi_c, &psi_c);

        dists.push(d2);
        ctrl_energies.push(ce1);
        rep.csv_row(&[
            CsvCell::Num(r_min),
            CsvCell::Num(d2),
            CsvCell::Num(e1),
            CsvCell::Num(cd2),
            CsvCell::Num(ce1),
        ]);
    }

    let floor = dists.iter().cloned().fold(f64::MAX, f64::min) / dists[0];
    let increments: Vec<f64> = ctrl_energies.windows(2).map(|p| p[1] - p[0]).collect();
    let imax = increments.iter().cloned().fold(f64::MIN, f64::max);
    let imin = increments.iter().cloned().fold(f64::MAX, f64::min);

    rep.result("dist2_ladder", num_list(&dists));
    rep.result("ctrl_energy_ladder", num_list(&ctrl_energies));
    rep.result("ctrl_energy_increments", num_list(&increments));
    rep.residual("dist2_floor_ratio", floor);
    rep.gate("positive_distance", dists.iter().all(|&v| v > 0.0));
    rep.gate("distance_floor", floor >= 0.5);
    rep.gate("ctrl_energy_grows", increments.iter().all(|&v| v > 0.0));
    rep.gate("ctrl_log_rate", imax / imin < 2.0);
    Ok(rep)
}
