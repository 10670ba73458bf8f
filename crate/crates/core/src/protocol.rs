//! The swapping experiment as a sequence of independent trials.
//!
//! Each trial prepares two singlets on (1,2) and (3,4). Station D acts on
//! particles 2 and 3 and, when broadcasting is enabled, sends its outcome to
//! station C. Station C picks one of the four CHSH setting pairs and measures
//! particles 1 and 4. Post-selection happens afterwards, on the logged
//! records.
//!
//! Trial `k` draws D's randomness from stream `2k` and C's from `2k + 1` of
//! the master seed, so a record depends only on `(master_seed, k)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{total_variation, trace_distance, ChshSample, ChshSettings, SettingPair};
use crate::error::{Error, Result};
use crate::measurement::{
    measure, measure_bell, measure_spin, outcome_probability, relative_state, ZERO_PROB_TOL,
};
use crate::operator::{density_from_pure, DensityMatrix, Direction};
use crate::rng::RngStream;
use crate::state::{bell_basis, joint_state, BellOutcome, StateVector};
use crate::subsystem::Subsystem;

/// Stream id used for chance selection of a control subset.
pub const CHANCE_SELECTION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StationDAction {
    #[serde(rename = "bell")]
    BellMeasurement,
    #[serde(rename = "zz")]
    ZZMeasurement,
    #[serde(rename = "none")]
    NoMeasurement,
}

impl StationDAction {
    pub const ALL: [StationDAction; 3] = [
        StationDAction::BellMeasurement,
        StationDAction::ZZMeasurement,
        StationDAction::NoMeasurement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StationDAction::BellMeasurement => "bell",
            StationDAction::ZZMeasurement => "zz",
            StationDAction::NoMeasurement => "none",
        }
    }
}

impl fmt::Display for StationDAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StationDAction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bell" => Ok(StationDAction::BellMeasurement),
            "zz" => Ok(StationDAction::ZZMeasurement),
            "none" => Ok(StationDAction::NoMeasurement),
            other => Err(format!(
                "unknown station D action `{other}` (expected bell, zz, none)"
            )),
        }
    }
}

/// What station D found: a Bell label, or the two z bits of particles 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DOutcome {
    Bell(BellOutcome),
    /// Bit 1 is particle 2, bit 0 is particle 3.
    Bits(u8),
}

impl fmt::Display for DOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DOutcome::Bell(b) => write!(f, "{b}"),
            DOutcome::Bits(bits) => write!(f, "{bits:02b}"),
        }
    }
}

impl FromStr for DOutcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "00" => Ok(DOutcome::Bits(0)),
            "01" => Ok(DOutcome::Bits(1)),
            "10" => Ok(DOutcome::Bits(2)),
            "11" => Ok(DOutcome::Bits(3)),
            other => other.parse().map(DOutcome::Bell),
        }
    }
}

impl Serialize for DOutcome {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Broadcast from D to C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub trial_id: u64,
    pub action: StationDAction,
    pub outcome: Option<DOutcome>,
}

impl ClassicalMessage {
    pub fn new(trial_id: u64, action: StationDAction, outcome: Option<DOutcome>) -> Result<Self> {
        if outcome.is_some() == (action == StationDAction::NoMeasurement) {
            return Err(Error::InvalidConfig(format!(
                "message outcome {outcome:?} inconsistent with action {action}"
            )));
        }
        Ok(Self {
            trial_id,
            action,
            outcome,
        })
    }
}

/// Full log of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub master_seed: u64,
    pub d_action: StationDAction,
    /// D's local result; selection may only read it when the message was
    /// delivered.
    pub d_outcome: Option<DOutcome>,
    pub message_delivered: bool,
    /// `None` when C measured along the z axes announced for a zz run.
    pub setting_pair: Option<SettingPair>,
    pub directions: (Direction, Direction),
    pub c_outcome_1: i8,
    pub c_outcome_4: i8,
}

impl TrialRecord {
    pub fn chsh_sample(&self) -> Option<ChshSample> {
        self.setting_pair.map(|pair| ChshSample {
            pair,
            outcome1: self.c_outcome_1,
            outcome4: self.c_outcome_4,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub num_trials: u64,
    pub master_seed: u64,
    pub d_action: StationDAction,
    pub broadcast_enabled: bool,
    pub chsh_settings: ChshSettings,
    pub selection_target: Option<BellOutcome>,
}

impl ExperimentConfig {
    pub fn new(num_trials: u64, master_seed: u64, d_action: StationDAction) -> Self {
        Self {
            num_trials,
            master_seed,
            d_action,
            broadcast_enabled: true,
            chsh_settings: ChshSettings::default(),
            selection_target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.selection_target.is_some()
            && (self.d_action != StationDAction::BellMeasurement || !self.broadcast_enabled)
        {
            return Err(Error::InvalidConfig(
                "post-selection needs Bell measurements at D and an enabled broadcast".into(),
            ));
        }
        Ok(())
    }
}

fn pair(a: usize, b: usize) -> Subsystem {
    Subsystem::new(vec![a, b]).expect("distinct labels")
}

/// Station D: acts on particles 2 and 3.
fn station_d(
    state: StateVector,
    action: StationDAction,
    rng: &mut RngStream,
) -> Result<(StateVector, Option<DOutcome>)> {
    match action {
        StationDAction::NoMeasurement => Ok((state, None)),
        StationDAction::BellMeasurement => {
            let r = measure_bell(&state, &pair(2, 3), rng)?;
            Ok((r.post_state, Some(DOutcome::Bell(r.outcome))))
        }
        StationDAction::ZZMeasurement => {
            let r = measure(
                &state,
                &pair(2, 3),
                &StateVector::computational_basis(2),
                rng,
            )?;
            Ok((r.post_state, Some(DOutcome::Bits(r.index as u8))))
        }
    }
}

/// Runs trial `trial_id` of `config`.
pub fn run_trial(config: &ExperimentConfig, trial_id: u64) -> Result<TrialRecord> {
    config.validate()?;
    let mut d_rng = RngStream::new(config.master_seed, trial_id.wrapping_mul(2));
    let mut c_rng = RngStream::new(config.master_seed, trial_id.wrapping_mul(2).wrapping_add(1));

    let (state, d_outcome) = station_d(joint_state(), config.d_action, &mut d_rng)?;
    let message = if config.broadcast_enabled {
        Some(ClassicalMessage::new(trial_id, config.d_action, d_outcome)?)
    } else {
        None
    };

    let drawn = SettingPair::ALL[c_rng.next_below(4) as usize];
    // An announced zz result tells C to read both spins along z.
    let (setting_pair, directions) = match message {
        Some(ClassicalMessage {
            action: StationDAction::ZZMeasurement,
            ..
        }) => (None, (Direction::z(), Direction::z())),
        _ => (Some(drawn), config.chsh_settings.directions(drawn)),
    };

    let first = measure_spin(&state, 1, directions.0, &mut c_rng)?;
    let second = measure_spin(&first.post_state, 4, directions.1, &mut c_rng)?;

    Ok(TrialRecord {
        trial_id,
        master_seed: config.master_seed,
        d_action: config.d_action,
        d_outcome,
        message_delivered: message.is_some(),
        setting_pair,
        directions,
        c_outcome_1: first.outcome,
        c_outcome_4: second.outcome,
    })
}

/// Runs trials `0..num_trials`, in parallel, returned in trial order.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    (0..config.num_trials)
        .into_par_iter()
        .map(|k| run_trial(config, k))
        .collect()
}

/// Records whose delivered message reports `target`, in input order.
pub fn post_select(records: &[TrialRecord], target: BellOutcome) -> Result<Vec<TrialRecord>> {
    for r in records {
        if r.d_action != StationDAction::BellMeasurement {
            return Err(Error::NotBellRun {
                trial_id: r.trial_id,
            });
        }
        if !r.message_delivered {
            return Err(Error::SelectionWithoutBroadcast {
                trial_id: r.trial_id,
            });
        }
    }
    Ok(records
        .iter()
        .filter(|r| r.d_outcome == Some(DOutcome::Bell(target)))
        .cloned()
        .collect())
}

/// `size` records chosen uniformly without looking at any outcome; order
/// preserved.
pub fn chance_select(records: &[TrialRecord], size: usize, seed: u64) -> Vec<TrialRecord> {
    let mut rng = RngStream::new(seed, CHANCE_SELECTION_STREAM);
    let indices: Vec<usize> = (0..records.len()).collect();
    let mut picked: Vec<usize> = indices
        .choose_multiple(&mut rng, size.min(records.len()))
        .copied()
        .collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| records[i].clone()).collect()
}

/// CHSH samples of the records that used a setting pair.
pub fn chsh_samples(records: &[TrialRecord]) -> Vec<ChshSample> {
    records
        .iter()
        .filter_map(TrialRecord::chsh_sample)
        .collect()
}

/// Counts of each Bell outcome at D, in [`BellOutcome::ALL`] order.
pub fn bell_outcome_counts(records: &[TrialRecord]) -> [u64; 4] {
    let mut counts = [0; 4];
    for r in records {
        if let Some(DOutcome::Bell(b)) = r.d_outcome {
            counts[b.index()] += 1;
        }
    }
    counts
}

/// Mixture over D's outcomes of the conditional (1,4) states, each weighted
/// by its probability, for a measurement of particles 2 and 3 in `d_basis`.
pub fn conditional_mixture(d_basis: &[StateVector]) -> Result<DensityMatrix> {
    let joint = joint_state();
    let measured = pair(2, 3);
    crate::measurement::check_basis(d_basis, 2)?;
    let mut terms = Vec::with_capacity(d_basis.len());
    for b in d_basis {
        let p = outcome_probability(&joint, &measured, b)?;
        if p <= ZERO_PROB_TOL {
            continue;
        }
        let rel = relative_state(&joint, &measured, b)?;
        terms.push((p, density_from_pure(&rel)));
    }
    let total: f64 = terms.iter().map(|(p, _)| p).sum();
    terms.iter_mut().for_each(|(p, _)| *p /= total);
    DensityMatrix::mixture(&terms)
}

/// Exact state of particles (1,4) after D's action, unconditioned on its
/// outcome.
pub fn unconditioned_marginal(action: StationDAction) -> Result<DensityMatrix> {
    match action {
        StationDAction::BellMeasurement => conditional_mixture(&bell_basis()),
        StationDAction::ZZMeasurement => conditional_mixture(&StateVector::computational_basis(2)),
        StationDAction::NoMeasurement => {
            density_from_pure(&joint_state()).partial_trace(&pair(1, 4))
        }
    }
}

/// Index of a joint C outcome: `++, +−, −+, −−`.
pub fn joint_outcome_index(outcome1: i8, outcome4: i8) -> usize {
    (usize::from(outcome1 < 0) << 1) | usize::from(outcome4 < 0)
}

/// C's joint outcome frequencies per setting pair for one D action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    pub action: StationDAction,
    /// `counts[pair.id() - 1][joint_outcome_index]`.
    pub counts: [[u64; 4]; 4],
}

impl OutcomeTable {
    pub fn from_records(action: StationDAction, records: &[TrialRecord]) -> Self {
        let mut counts = [[0; 4]; 4];
        for r in records {
            if let Some(p) = r.setting_pair {
                counts[p.id() as usize - 1][joint_outcome_index(r.c_outcome_1, r.c_outcome_4)] += 1;
            }
        }
        Self { action, counts }
    }

    pub fn bucket_size(&self, pair: SettingPair) -> u64 {
        self.counts[pair.id() as usize - 1].iter().sum()
    }

    pub fn frequencies(&self, pair: SettingPair) -> [f64; 4] {
        let row = self.counts[pair.id() as usize - 1];
        let n = self.bucket_size(pair).max(1) as f64;
        row.map(|c| c as f64 / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvComparison {
    pub first: StationDAction,
    pub second: StationDAction,
    pub pair: SettingPair,
    pub distance: f64,
    /// `4 / sqrt(n)` with `n` the smaller of the two bucket sizes.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactComparison {
    pub first: StationDAction,
    pub second: StationDAction,
    pub trace_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonsignalingReport {
    pub n_trials: u64,
    pub seed: u64,
    pub tables: Vec<OutcomeTable>,
    pub sampled: Vec<TvComparison>,
    pub exact: Vec<ExactComparison>,
    /// Trace distance of each action's exact (1,4) marginal from `I/4`.
    pub exact_to_maximally_mixed: Vec<(StationDAction, f64)>,
}

impl NonsignalingReport {
    pub fn max_sampled_distance(&self) -> f64 {
        self.sampled.iter().map(|c| c.distance).fold(0.0, f64::max)
    }

    pub fn max_exact_distance(&self) -> f64 {
        self.exact
            .iter()
            .map(|c| c.trace_distance)
            .chain(self.exact_to_maximally_mixed.iter().map(|(_, d)| *d))
            .fold(0.0, f64::max)
    }

    pub fn pass(&self, exact_tol: f64) -> bool {
        self.sampled.iter().all(|c| c.pass) && self.max_exact_distance() < exact_tol
    }
}

/// Compares C's unconditioned statistics across D actions, broadcast off.
///
/// With a single action the comparison is against itself.
pub fn nonsignaling_check(
    n_trials: u64,
    seed: u64,
    settings: ChshSettings,
    actions: &[StationDAction],
) -> Result<NonsignalingReport> {
    if n_trials < 10_000 {
        return Err(Error::InvalidConfig(format!(
            "non-signaling check needs at least 10000 trials, got {n_trials}"
        )));
    }
    if actions.is_empty() {
        return Err(Error::InvalidConfig(
            "no station D actions to compare".into(),
        ));
    }
    let tables = actions
        .iter()
        .map(|&action| {
            let config = ExperimentConfig {
                num_trials: n_trials,
                master_seed: seed,
                d_action: action,
                broadcast_enabled: false,
                chsh_settings: settings,
                selection_target: None,
            };
            Ok(OutcomeTable::from_records(action, &run_ensemble(&config)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = if tables.len() == 1 {
        vec![(0, 0)]
    } else {
        (0..tables.len())
            .flat_map(|i| (i + 1..tables.len()).map(move |j| (i, j)))
            .collect()
    };

    let mut sampled = Vec::new();
    for &(i, j) in &pairs {
        for p in SettingPair::ALL {
            let n = tables[i].bucket_size(p).min(tables[j].bucket_size(p));
            let threshold = 4.0 / (n.max(1) as f64).sqrt();
            let distance = total_variation(&tables[i].frequencies(p), &tables[j].frequencies(p));
            sampled.push(TvComparison {
                first: tables[i].action,
                second: tables[j].action,
                pair: p,
                distance,
                threshold,
                pass: distance < threshold,
            });
        }
    }

    let marginals = actions
        .iter()
        .map(|&a| unconditioned_marginal(a))
        .collect::<Result<Vec<_>>>()?;
    let exact = pairs
        .iter()
        .map(|&(i, j)| {
            Ok(ExactComparison {
                first: actions[i],
                second: actions[j],
                trace_distance: trace_distance(&marginals[i], &marginals[j])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mixed = DensityMatrix::maximally_mixed(2);
    let exact_to_maximally_mixed = actions
        .iter()
        .zip(&marginals)
        .map(|(&a, m)| Ok((a, trace_distance(m, &mixed)?)))
        .collect::<Result<Vec<_>>>()?;

    Ok(NonsignalingReport {
        n_trials,
        seed,
        tables,
        sampled,
        exact,
        exact_to_maximally_mixed,
    })
}
