use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use num_complex::Complex64 as C64;
use serde_json::json;
use swapsim::analysis::{correlator_exact, SettingPair, TSIRELSON};
use swapsim::measurement::born_probabilities;
use swapsim::protocol::{
    bell_outcome_counts, chance_select, chsh_samples, unconditioned_marginal, DOutcome,
};
use swapsim::records::write_records;
use swapsim::{
    bell_basis, bell_state, chsh_estimate, chsh_exact, conditional_mixture, density_from_pure,
    joint_state, nonsignaling_check, post_select, ppt_check, relative_state, run_ensemble, singlet,
    BellOutcome, ChshEstimate, DensityMatrix, Direction, ExperimentConfig, StateVector,
    StationDAction, Subsystem,
};

use crate::config::ResolvedConfig;
use crate::report::{Check, Relation, Report};

const EXACT_TOL: f64 = 1e-12;
/// Standard errors allowed between a sampled statistic and its target.
const SIGMAS: f64 = 4.0;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags; exit status 2.
    Usage(String),
    /// Failure while running; exit status 1.
    Runtime(String),
}

impl From<swapsim::Error> for CliError {
    fn from(e: swapsim::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub struct Output {
    pub report: Report,
    pub text: String,
}

fn sub(labels: &[usize]) -> Subsystem {
    Subsystem::new(labels.to_vec()).expect("distinct labels")
}

fn config_value(cfg: &ResolvedConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn finish(
    cfg: &ResolvedConfig,
    results: serde_json::Value,
    checks: Vec<Check>,
    mut text: String,
) -> Output {
    writeln!(text).unwrap();
    for c in &checks {
        writeln!(text, "{}", c.line()).unwrap();
    }
    let report = Report {
        config: config_value(cfg),
        results,
        checks,
    };
    writeln!(
        text,
        "{}",
        if report.passed() {
            "all checks passed"
        } else {
            "SOME CHECKS FAILED"
        }
    )
    .unwrap();
    Output { report, text }
}

/// The state the exact checks run against; the fault hook perturbs one
/// amplitude and renormalizes.
fn subject_state(cfg: &ResolvedConfig) -> Result<StateVector, CliError> {
    let j = joint_state();
    let Some(index) = cfg.corrupt_amplitude else {
        return Ok(j);
    };
    if index >= j.dim() {
        return Err(CliError::Usage(format!(
            "--corrupt-amplitude {index} is out of range 0..16"
        )));
    }
    let mut amps = j.into_amplitudes();
    amps[index] += C64::new(0.1, 0.0);
    Ok(StateVector::normalized(amps)?)
}

pub fn verify(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    let subject = subject_state(cfg)?;
    let mixed = DensityMatrix::maximally_mixed(2);
    let mut checks = Vec::new();

    // joint state coefficients
    let terms = [(0b0101, 0.5), (0b0110, -0.5), (0b1001, -0.5), (0b1010, 0.5)];
    let r1 = (0..16)
        .map(|i| {
            let want = terms.iter().find(|(k, _)| *k == i).map_or(0.0, |(_, c)| *c);
            (subject.amplitude(i) - C64::new(want, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    checks.push(Check::residual(
        "joint_state_coefficients",
        "Eq. (1)",
        r1,
        EXACT_TOL,
    ));

    // regrouping over (1,4)(2,3) in the computational basis
    let comp = [
        ("01", "10", 0.5),
        ("00", "11", -0.5),
        ("11", "00", -0.5),
        ("10", "01", 0.5),
    ];
    let mut grouped = vec![C64::new(0.0, 0.0); 16];
    for (p14, p23, c) in comp {
        let i = usize::from_str_radix(&format!("{p14}{p23}"), 2).unwrap();
        grouped[i] += c;
    }
    let permuted = subject.permute(&sub(&[1, 4, 2, 3]))?;
    let r2 = permuted.max_abs_diff(&StateVector::new(grouped)?);
    checks.push(Check::residual(
        "computational_regrouping_14_23",
        "Eq. (2)",
        r2,
        EXACT_TOL,
    ));

    // regrouping in the Bell basis
    let signs = [
        (BellOutcome::PsiPlus, 0.5),
        (BellOutcome::PsiMinus, -0.5),
        (BellOutcome::PhiPlus, -0.5),
        (BellOutcome::PhiMinus, 0.5),
    ];
    let mut bell_grouped = vec![C64::new(0.0, 0.0); 16];
    for (label, c) in signs {
        let b = bell_state(label);
        for (i, a) in b.tensor(&b).amplitudes().iter().enumerate() {
            bell_grouped[i] += a * c;
        }
    }
    let r3 = permuted.max_abs_diff(&StateVector::new(bell_grouped)?);
    checks.push(Check::residual(
        "bell_regrouping_14_23",
        "Eq. (3)",
        r3,
        EXACT_TOL,
    ));

    // reduced (1,4) state
    let reduced = density_from_pure(&subject).partial_trace(&sub(&[1, 4]))?;
    let r4 = reduced.max_abs_diff(&mixed);
    checks.push(Check::residual(
        "reduced_14_is_maximally_mixed",
        "Eq. (4)",
        r4,
        EXACT_TOL,
    ));
    let ppt_reduced = ppt_check(&reduced)?;
    checks.push(Check::residual(
        "reduced_14_is_separable",
        "Eq. (4)",
        (-ppt_reduced.min_eigenvalue).max(0.0),
        1e-10,
    ));

    let bell_mix = conditional_mixture(&bell_basis())?;
    let zz_mix = conditional_mixture(&StateVector::computational_basis(2))?;
    checks.push(Check::residual(
        "bell_conditioned_mixture",
        "Eq. (4)",
        bell_mix.max_abs_diff(&mixed),
        EXACT_TOL,
    ));
    checks.push(Check::residual(
        "zz_conditioned_mixture",
        "Eq. (4)",
        zz_mix.max_abs_diff(&mixed),
        EXACT_TOL,
    ));

    // each Bell outcome on (2,3) leaves the same Bell state on (1,4)
    let joint = joint_state();
    let d = sub(&[2, 3]);
    let mut worst_partner: f64 = 0.0;
    for b in BellOutcome::ALL {
        let rel = relative_state(&joint, &d, &bell_state(b))?;
        worst_partner = worst_partner.max(1.0 - swapsim::fidelity_pure(&rel, &bell_state(b))?);
    }
    checks.push(Check::residual(
        "bell_partner_fidelity",
        "Eq. (3)",
        worst_partner,
        EXACT_TOL,
    ));

    let rel11 = relative_state(&joint, &d, &StateVector::from_bits("00")?)?;
    let infid = 1.0 - swapsim::fidelity_pure(&rel11, &StateVector::from_bits("11")?)?;
    checks.push(Check::residual(
        "zz_00_gives_11_on_14",
        "Sec. 4",
        infid,
        EXACT_TOL,
    ));

    let rest = relative_state(&joint, &sub(&[1]), &StateVector::from_bits("0")?)?;
    let probs = born_probabilities(
        &rest,
        &Subsystem::all(3),
        &StateVector::computational_basis(3),
    )?;
    let support = probs
        .iter()
        .enumerate()
        .map(|(i, p)| (p - if i == 0b101 || i == 0b110 { 0.5 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    checks.push(Check::residual(
        "qubit1_zero_support_101_110",
        "Sec. 4",
        support,
        EXACT_TOL,
    ));

    let bell_probs = born_probabilities(&joint, &d, &bell_basis())?;
    let quarter = bell_probs
        .iter()
        .map(|p| (p - 0.25).abs())
        .fold(0.0, f64::max);
    checks.push(Check::residual(
        "bell_outcome_probabilities",
        "Sec. 5",
        quarter,
        EXACT_TOL,
    ));

    let singlet_rho = density_from_pure(&singlet());
    let ppt_singlet = ppt_check(&singlet_rho)?;
    checks.push(Check::residual(
        "singlet_is_entangled",
        "Sec. 4",
        (ppt_singlet.min_eigenvalue + 0.5).abs(),
        EXACT_TOL,
    ));

    let mut corr: f64 = 0.0;
    for theta in [
        0.0,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2,
    ] {
        let e = correlator_exact(&singlet_rho, Direction::z(), Direction::in_xz_plane(theta))?;
        corr = corr.max((e + theta.cos()).abs());
    }
    checks.push(Check::residual(
        "singlet_correlator_closed_form",
        "Sec. 4",
        corr,
        EXACT_TOL,
    ));

    let s = chsh_exact(&singlet_rho, &swapsim::ChshSettings::default())?;
    checks.push(Check::residual(
        "singlet_reaches_tsirelson",
        "Sec. 4",
        (s.abs() - TSIRELSON).abs(),
        EXACT_TOL,
    ));

    let max_residual = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let results = json!({
        "max_residual": max_residual,
        "reduced_14_min_pt_eigenvalue": ppt_reduced.min_eigenvalue,
        "singlet_min_pt_eigenvalue": ppt_singlet.min_eigenvalue,
        "bell_probabilities": bell_probs,
        "singlet_chsh": s,
    });
    let mut text = String::from("exact identity checks\n");
    writeln!(text, "max residual {max_residual:.3e}").unwrap();
    Ok(finish(cfg, results, checks, text))
}

fn estimate_json(e: &ChshEstimate) -> serde_json::Value {
    json!({
        "correlators": e.correlators,
        "counts": e.counts,
        "std_errors": e.std_errors,
        "s_value": e.s_value,
        "s_std_error": e.s_std_error,
        "sigmas_above_2": e.sigmas_above(2.0),
    })
}

fn estimate_text(label: &str, e: &ChshEstimate) -> String {
    let sig = e.sigmas_above(2.0);
    let verdict = if sig > 0.0 {
        format!("violates |S|<=2 by {sig:.1}σ")
    } else {
        format!("satisfies |S|<=2 ({:.1}σ below)", -sig)
    };
    format!(
        "{label}: S = {:+.4} ± {:.4}  E = [{:+.4}, {:+.4}, {:+.4}, {:+.4}]  n = {:?}  {verdict}\n",
        e.s_value,
        e.s_std_error,
        e.correlators[0],
        e.correlators[1],
        e.correlators[2],
        e.correlators[3],
        e.counts
    )
}

pub fn swap(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    let action = cfg.d_action();
    let experiment = ExperimentConfig {
        num_trials: cfg.trials,
        master_seed: cfg.seed,
        d_action: action,
        broadcast_enabled: cfg.broadcast,
        chsh_settings: cfg.settings,
        selection_target: cfg.select,
    };
    experiment
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let records = run_ensemble(&experiment)?;

    if let Some(path) = &cfg.out {
        let file = File::create(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        write_records(&records, cfg.format, BufWriter::new(file))?;
    }

    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    let mut text = format!(
        "{} trials, seed {}, station D action {action}\n",
        cfg.trials, cfg.seed
    );
    let n = records.len() as u64;

    match action {
        StationDAction::BellMeasurement => {
            let counts = bell_outcome_counts(&records);
            let half_width = SIGMAS * (0.25 * 0.75 / n as f64).sqrt();
            writeln!(
                text,
                "\nBell outcome frequencies (expected 0.25 ± {half_width:.4})"
            )
            .unwrap();
            let mut freqs = serde_json::Map::new();
            for b in BellOutcome::ALL {
                let f = counts[b.index()] as f64 / n as f64;
                writeln!(text, "  {b:<5} {:>8}  {f:.4}", counts[b.index()]).unwrap();
                freqs.insert(
                    b.to_string(),
                    json!({ "count": counts[b.index()], "frequency": f }),
                );
                checks.push(Check::new(
                    format!("bell_frequency_{b}"),
                    "Sec. 5",
                    (f - 0.25).abs(),
                    Relation::AtMost,
                    half_width,
                ));
            }
            results.insert("bell_frequencies".into(), freqs.into());

            let control_size = if let Some(target) = cfg.select {
                let selected = post_select(&records, target)?;
                let est = chsh_estimate(&chsh_samples(&selected))?;
                let conditioned =
                    relative_state(&joint_state(), &sub(&[2, 3]), &bell_state(target))?;
                let oracle = chsh_exact(&density_from_pure(&conditioned), &cfg.settings)?;
                text.push('\n');
                text.push_str(&estimate_text(
                    &format!("selected {target} ({} pairs)", selected.len()),
                    &est,
                ));
                writeln!(
                    text,
                    "  exact S for the {target}-conditioned pair: {oracle:+.6}"
                )
                .unwrap();
                let distance = (est.s_value.abs() - oracle.abs()).abs()
                    / est.s_std_error.max(f64::MIN_POSITIVE);
                checks.push(Check::new(
                    "selected_matches_exact_s",
                    "Sec. 4",
                    distance,
                    Relation::AtMost,
                    SIGMAS,
                ));
                if oracle.abs() > 2.0 {
                    checks.push(Check::new(
                        "selected_violates_chsh",
                        "Sec. 4",
                        est.sigmas_above(2.0),
                        Relation::Above,
                        SIGMAS,
                    ));
                }
                results.insert(
                    "selected".into(),
                    json!({ "target": target, "size": selected.len(), "estimate": estimate_json(&est), "exact_s": oracle }),
                );
                selected.len()
            } else {
                records.len()
            };

            let chance = chance_select(&records, control_size, cfg.seed);
            let est = chsh_estimate(&chsh_samples(&chance))?;
            text.push_str(&estimate_text(
                &format!("chance subset ({} pairs)", chance.len()),
                &est,
            ));
            checks.push(Check::new(
                "chance_subset_satisfies_chsh",
                "Sec. 4",
                est.sigmas_above(2.0),
                Relation::AtMost,
                SIGMAS,
            ));
            results.insert(
                "chance_subset".into(),
                json!({ "size": chance.len(), "estimate": estimate_json(&est) }),
            );
        }
        StationDAction::ZZMeasurement => {
            // announced 2,3 bits fix particles 1 and 4 to the flipped values
            let mut announced = 0u64;
            let mut mismatches = 0u64;
            let mut table = [[0u64; 4]; 4];
            for r in &records {
                let Some(DOutcome::Bits(bits)) = r.d_outcome else {
                    continue;
                };
                if r.setting_pair.is_some() {
                    continue;
                }
                announced += 1;
                let spin = |bit: u8| if bit == 0 { 1i8 } else { -1 };
                let want = (spin(1 - (bits >> 1)), spin(1 - (bits & 1)));
                let c14 = swapsim::protocol::joint_outcome_index(r.c_outcome_1, r.c_outcome_4);
                table[bits as usize][c14] += 1;
                if (r.c_outcome_1, r.c_outcome_4) != want {
                    mismatches += 1;
                }
            }
            writeln!(
                text,
                "\nD outcome (2,3) vs C outcome (1,4) along z,z [++ +- -+ --]"
            )
            .unwrap();
            for (bits, row) in table.iter().enumerate() {
                writeln!(text, "  {bits:02b}  {row:?}").unwrap();
            }
            writeln!(
                text,
                "announced trials {announced}, mismatches {mismatches}"
            )
            .unwrap();
            checks.push(Check::new(
                "zz_relative_state_prediction",
                "Sec. 4",
                mismatches as f64,
                Relation::AtMost,
                0.0,
            ));
            results.insert(
                "zz".into(),
                json!({ "announced": announced, "mismatches": mismatches, "table": table }),
            );
        }
        StationDAction::NoMeasurement => {
            let est = chsh_estimate(&chsh_samples(&records))?;
            text.push('\n');
            text.push_str(&estimate_text("unmeasured (2,3), all pairs", &est));
            checks.push(Check::new(
                "unselected_satisfies_chsh",
                "Sec. 4",
                est.sigmas_above(2.0),
                Relation::AtMost,
                SIGMAS,
            ));
            results.insert("all_pairs".into(), estimate_json(&est));
        }
    }
    if let Some(path) = &cfg.out {
        writeln!(text, "\nrecords written to {}", path.display()).unwrap();
    }
    Ok(finish(cfg, results.into(), checks, text))
}

pub fn chsh(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    let joint = joint_state();
    let d = sub(&[2, 3]);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut text = String::from("exact CHSH values at the configured settings\n");
    writeln!(
        text,
        "{:<16} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "state", "E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')", "S"
    )
    .unwrap();

    let mut states: Vec<(String, DensityMatrix)> = BellOutcome::ALL
        .iter()
        .map(|&b| {
            let rel = relative_state(&joint, &d, &bell_state(b))?;
            Ok((format!("{b}-conditioned"), density_from_pure(&rel)))
        })
        .collect::<Result<_, CliError>>()?;
    states.push((
        "unselected I/4".into(),
        unconditioned_marginal(StationDAction::BellMeasurement)?,
    ));

    for (i, (label, rho)) in states.iter().enumerate() {
        let correlators = SettingPair::ALL
            .iter()
            .map(|&p| {
                let (d1, d2) = cfg.settings.directions(p);
                correlator_exact(rho, d1, d2)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let s = chsh_exact(rho, &cfg.settings)?;
        writeln!(
            text,
            "{label:<16} {:>+10.6} {:>+10.6} {:>+10.6} {:>+10.6} {s:>+10.6}",
            correlators[0], correlators[1], correlators[2], correlators[3]
        )
        .unwrap();
        let unselected = i == BellOutcome::ALL.len();
        let (bound, name) = if unselected {
            (2.0, "unselected_within_classical_bound".to_string())
        } else {
            (TSIRELSON, format!("{label}_within_tsirelson_bound"))
        };
        checks.push(Check::new(
            name,
            "Sec. 4",
            s.abs(),
            Relation::AtMost,
            bound + 1e-9,
        ));
        rows.push(json!({ "state": label, "correlators": correlators, "s": s }));
    }
    Ok(finish(cfg, json!({ "states": rows }), checks, text))
}

pub fn marginals(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    let report = nonsignaling_check(cfg.trials, cfg.seed, cfg.settings, &cfg.d_actions)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut checks = Vec::new();
    let mut text = format!(
        "C's joint outcome statistics across D actions ({} trials each, no broadcast)\n",
        cfg.trials
    );
    writeln!(
        text,
        "{:<6} {:<6} {:<8} {:>10} {:>10}",
        "D", "D'", "pair", "TV", "4/sqrt(n)"
    )
    .unwrap();
    for c in &report.sampled {
        writeln!(
            text,
            "{:<6} {:<6} {:<8} {:>10.5} {:>10.5}",
            c.first.as_str(),
            c.second.as_str(),
            c.pair.to_string(),
            c.distance,
            c.threshold
        )
        .unwrap();
        checks.push(Check::new(
            format!("tv_{}_{}_pair{}", c.first, c.second, c.pair.id()),
            "Sec. 4",
            c.distance,
            Relation::Below,
            c.threshold,
        ));
    }
    writeln!(text, "\nexact (1,4) marginals").unwrap();
    for c in &report.exact {
        writeln!(
            text,
            "  trace distance {} vs {}: {:.3e}",
            c.first, c.second, c.trace_distance
        )
        .unwrap();
        checks.push(Check::residual(
            format!("exact_{}_{}", c.first, c.second),
            "Eq. (4)",
            c.trace_distance,
            EXACT_TOL,
        ));
    }
    for (a, dist) in &report.exact_to_maximally_mixed {
        writeln!(text, "  trace distance {a} vs I/4: {dist:.3e}").unwrap();
        checks.push(Check::residual(
            format!("exact_{a}_maximally_mixed"),
            "Eq. (4)",
            *dist,
            EXACT_TOL,
        ));
    }
    let results = serde_json::to_value(&report).expect("report serializes");
    Ok(finish(cfg, results, checks, text))
}

pub fn run(cfg: &ResolvedConfig) -> Result<Output, CliError> {
    use crate::config::Command;
    match cfg.command {
        Command::Verify => verify(cfg),
        Command::Swap => swap(cfg),
        Command::Chsh => chsh(cfg),
        Command::Marginals => marginals(cfg),
    }
}
