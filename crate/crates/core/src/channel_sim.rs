//! Monte-Carlo simulation of the 2N-lane link.
//!
//! Every main-lane codeword is `ceil(k·s/R_F)` bits: the `k·s` payload bits
//! first, parity after. Each bit flips independently with the lane's
//! expected BER. If at most `t_k` bits flipped the FEC repairs all of them;
//! otherwise it repairs `t_k` of them (chosen by [`CorrectionRule`]) and
//! every payload symbol still holding a flipped bit is erased. Auxiliary
//! lanes are error-free unless an aux BER is configured, in which case they
//! go through the same rule with their own `(r·s, R_F)` code.
//!
//! Trials draw from ChaCha8 generators keyed by the master seed with the
//! trial number as stream id, so sequential and parallel runs agree.

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::error::ModelError;
use crate::fec_model::{correctable_bits, hamming_distance, FecSpec};
use crate::gf::{Field, FieldElement, GfError};
use crate::pipeline::{parallelize, serialize, PipelineError};
use crate::planner::LinkPlan;
use crate::scalar::Scalar;
use crate::srlnc::{
    decode, encode, rank, CodecError, CodedSymbol, CoefficientSeed, EncodedGeneration, Generation,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("generation {0} decoded to wrong symbols")]
    Corruption(u64),
}

/// Which flipped bits the FEC repairs when it cannot repair all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionRule {
    /// A uniformly random subset of `t_k` flipped bits.
    #[default]
    Uniform,
    /// The `t_k` flipped bits at the lowest positions.
    Earliest,
}

impl std::str::FromStr for CorrectionRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "random" => Ok(Self::Uniform),
            "earliest" => Ok(Self::Earliest),
            other => Err(format!("unknown correction rule {other:?}")),
        }
    }
}

/// Wire bits for `payload_bits` protected at rate `fec_rate`, rounded up.
pub fn coded_bits(payload_bits: u64, fec_rate: f64) -> u64 {
    if payload_bits == 0 {
        return 0;
    }
    let raw = payload_bits as f64 / fec_rate;
    // 400 / 0.8 lands a hair above 500 in binary floating point
    let rounded = raw.round();
    if (raw - rounded).abs() <= 1e-9 * raw {
        rounded as u64
    } else {
        raw.ceil() as u64
    }
}

/// Outcome of pushing one encoded generation through its lane pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaneTransmission {
    pub generation_index: u64,
    pub main_bits: u64,
    pub aux_bits: u64,
    pub main_error_positions: Vec<u64>,
    pub aux_error_positions: Vec<u64>,
    pub erased_native: Vec<bool>,
    pub erased_redundant: Vec<bool>,
}

impl LaneTransmission {
    pub fn native_erasures(&self) -> usize {
        self.erased_native.iter().filter(|&&e| e).count()
    }
}

/// Per-lane error behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneErrorModel {
    pub main_ber: f64,
    pub aux_ber: f64,
    pub rule: CorrectionRule,
}

fn flip_positions<R: Rng + ?Sized>(bits: u64, ber: f64, rng: &mut R) -> Vec<u64> {
    if ber <= 0.0 {
        return Vec::new();
    }
    if ber >= 1.0 {
        return (0..bits).collect();
    }
    (0..bits).filter(|_| rng.gen::<f64>() < ber).collect()
}

/// Positions left flipped after the FEC has repaired `correctable` of them.
fn uncorrected<R: Rng + ?Sized>(
    flips: &[u64],
    correctable: u64,
    rule: CorrectionRule,
    rng: &mut R,
) -> Vec<u64> {
    if flips.len() as u64 <= correctable {
        return Vec::new();
    }
    let correctable = correctable as usize;
    match rule {
        CorrectionRule::Earliest => flips[correctable..].to_vec(),
        CorrectionRule::Uniform => {
            let mut repaired = vec![false; flips.len()];
            for i in sample(rng, flips.len(), correctable) {
                repaired[i] = true;
            }
            flips
                .iter()
                .zip(repaired)
                .filter_map(|(&p, fixed)| (!fixed).then_some(p))
                .collect()
        }
    }
}

fn erased_symbols(residual: &[u64], symbols: usize, s: u32) -> Vec<bool> {
    let mut erased = vec![false; symbols];
    let payload_bits = symbols as u64 * u64::from(s);
    for &p in residual.iter().filter(|&&p| p < payload_bits) {
        erased[(p / u64::from(s)) as usize] = true;
    }
    erased
}

/// Sends `encoded` over one main/aux lane pair and returns the symbols that
/// survive FEC together with a record of what happened.
pub fn transmit_generation<T: Scalar, R: Rng + ?Sized>(
    encoded: &EncodedGeneration,
    s: u32,
    fec: &FecSpec<T>,
    lane: &LaneErrorModel,
    rng: &mut R,
) -> (Vec<CodedSymbol>, LaneTransmission) {
    let fec_rate = fec.code_rate.as_f64();
    let k = encoded.k();
    let r = encoded.r();

    let main_bits = coded_bits(k as u64 * u64::from(s), fec_rate);
    let main_flips = flip_positions(main_bits, lane.main_ber, rng);
    let main_left = uncorrected(&main_flips, fec.correctable_bits, lane.rule, rng);
    let erased_native = erased_symbols(&main_left, k, s);

    let aux_payload = r as u64 * u64::from(s);
    let aux_bits = coded_bits(aux_payload, fec_rate);
    let aux_flips = flip_positions(aux_bits, lane.aux_ber, rng);
    let aux_correctable = hamming_distance(aux_payload, fec.code_rate)
        .map(correctable_bits)
        .unwrap_or(0);
    let aux_left = uncorrected(&aux_flips, aux_correctable, lane.rule, rng);
    let erased_redundant = erased_symbols(&aux_left, r, s);

    let survivors = encoded
        .native
        .iter()
        .zip(&erased_native)
        .chain(encoded.redundant.iter().zip(&erased_redundant))
        .filter(|&(_sym, &gone)| !gone)
        .map(|(sym, &_gone)| sym.clone())
        .collect();

    (
        survivors,
        LaneTransmission {
            generation_index: encoded.generation_index,
            main_bits,
            aux_bits,
            main_error_positions: main_flips,
            aux_error_positions: aux_flips,
            erased_native,
            erased_redundant,
        },
    )
}

/// Arrival of one generation and its redundancy at the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationArrival<T> {
    /// Generations sharing a round are dispatched together.
    pub round: u64,
    pub channel: usize,
    pub native_symbols: u64,
    pub redundant_symbols: u64,
    /// Seconds after dispatch.
    pub main_arrival: T,
    pub aux_arrival: T,
    pub main_rate: T,
    pub aux_rate: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrivalTrace<T> {
    pub arrivals: Vec<GenerationArrival<T>>,
}

impl<T: Scalar> ArrivalTrace<T> {
    /// `rounds` dispatch rounds with the planned delays on every channel.
    pub fn from_plan(plan: &LinkPlan<T>, rounds: u64) -> Self {
        let arrivals = (0..rounds)
            .flat_map(|round| {
                plan.channels.iter().map(move |c| GenerationArrival {
                    round,
                    channel: c.index,
                    native_symbols: plan.k,
                    redundant_symbols: c.redundancy,
                    main_arrival: c.main_delay,
                    aux_arrival: c.aux_delay,
                    main_rate: c.main_rate,
                    aux_rate: c.aux_rate,
                })
            })
            .collect();
        Self { arrivals }
    }
}

/// Peak receive-buffer occupancy in bits.
///
/// A generation is held until both its native and redundant symbols are in:
/// `(k + r)·s` bits, plus whatever the earlier lane keeps delivering at its
/// line rate while the later one is still outstanding. Generations of one
/// round are buffered together; rounds are released before the next starts.
pub fn buffer_occupancy<T: Scalar>(plan: &LinkPlan<T>, trace: &ArrivalTrace<T>) -> T {
    let s = T::of(f64::from(plan.s));
    let mut per_round: std::collections::BTreeMap<u64, T> = std::collections::BTreeMap::new();
    for a in &trace.arrivals {
        let held = if a.redundant_symbols == 0 {
            T::of_u64(a.native_symbols) * s
        } else {
            let base = T::of_u64(a.native_symbols + a.redundant_symbols) * s;
            let aux_late = (a.aux_arrival - a.main_arrival).max(T::zero());
            let main_late = (a.main_arrival - a.aux_arrival).max(T::zero());
            base + a.main_rate * aux_late + a.aux_rate * main_late
        };
        let slot = per_round.entry(a.round).or_insert_with(T::zero);
        *slot = *slot + held;
    }
    per_round.into_values().fold(T::zero(), T::max)
}

/// One lane pair as seen by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLane {
    pub expected_ber: f64,
    pub redundancy: usize,
}

#[derive(Debug, Clone)]
pub struct SessionConfig<T> {
    pub field: Field,
    pub k: usize,
    pub fec: FecSpec<T>,
    pub lanes: Vec<SimLane>,
    pub rule: CorrectionRule,
    pub aux_ber: f64,
    /// Dispatch rounds per trial; each round carries one generation per lane.
    pub rounds: usize,
    pub parallel: bool,
}

impl<T: Scalar> SessionConfig<T> {
    /// Lanes take their expected BER from `expected_ber` and redundancy from the plan.
    pub fn from_plan(plan: &LinkPlan<T>, expected_ber: &[T]) -> Result<Self, SimError> {
        if expected_ber.len() != plan.channels.len() {
            return Err(SimError::ConfigInvalid(format!(
                "{} BER values for {} channels",
                expected_ber.len(),
                plan.channels.len()
            )));
        }
        let field = Field::with_bits(plan.s)?;
        let fec = plan
            .channels
            .first()
            .map(|c| c.fec)
            .ok_or(ModelError::NoChannels)?;
        let lanes = plan
            .channels
            .iter()
            .zip(expected_ber)
            .map(|(c, &p)| SimLane {
                expected_ber: p.as_f64(),
                redundancy: c.redundancy as usize,
            })
            .collect();
        Ok(Self {
            field,
            k: plan.k as usize,
            fec,
            lanes,
            rule: CorrectionRule::default(),
            aux_ber: 0.0,
            rounds: 1,
            parallel: true,
        })
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.k == 0 {
            return Err(SimError::ConfigInvalid(
                "generation size must be positive".into(),
            ));
        }
        if self.lanes.is_empty() {
            return Err(SimError::ConfigInvalid(
                "at least one lane pair is required".into(),
            ));
        }
        if self.rounds == 0 {
            return Err(SimError::ConfigInvalid("rounds must be positive".into()));
        }
        for (i, lane) in self.lanes.iter().enumerate() {
            if !(0.0..=1.0).contains(&lane.expected_ber) {
                return Err(SimError::ConfigInvalid(format!(
                    "lane {i}: BER {} is not a probability",
                    lane.expected_ber
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.aux_ber) {
            return Err(SimError::ConfigInvalid(format!(
                "aux BER {} is not a probability",
                self.aux_ber
            )));
        }
        Ok(())
    }
}

/// Counts gathered in one trial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrialRecord {
    pub trial: u64,
    pub generations: u64,
    pub decoded: u64,
    /// Erased and total native symbols, per lane.
    pub erased_native: Vec<u64>,
    pub native_symbols: Vec<u64>,
    /// Sum over failed generations of `k − rank`.
    pub rank_deficiency: u64,
    pub delivered_bits: u64,
    pub stream_ok: bool,
}

/// Aggregate over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub trials: u64,
    pub generations: u64,
    pub generation_success_rate: f64,
    pub empirical_symbol_erasure_rate: f64,
    pub lane_erasure_rate: Vec<f64>,
    /// Mean of `(k − rank)/k` over all generations (0 for decoded ones).
    pub mean_decode_rank_deficiency: f64,
    pub stream_success_rate: f64,
    pub delivered_bits: u64,
    /// Seconds; filled in from a plan by [`run_planned_session`].
    pub delay_skew: f64,
    /// Bits; filled in from a plan by [`run_planned_session`].
    pub buffer_peak: f64,
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub report: SimReport,
    pub records: Vec<TrialRecord>,
}

/// Generator for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Child seed for sub-run `index` (e.g. a sweep point) of a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.set_word_pos(1 << 20);
    rng.next_u64()
}

fn recover<T: Scalar>(
    config: &SessionConfig<T>,
    generation: &Generation,
    survivors: &[CodedSymbol],
    transmission: &LaneTransmission,
) -> Result<Option<Vec<FieldElement>>, SimError> {
    // every native arrived: nothing to solve
    if transmission.native_erasures() == 0 {
        return Ok(Some(generation.symbols.clone()));
    }
    match decode(&config.field, survivors, config.k) {
        Ok(symbols) => {
            if symbols != generation.symbols {
                return Err(SimError::Corruption(generation.index));
            }
            Ok(Some(symbols))
        }
        Err(CodecError::InsufficientRank { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn run_trial<T: Scalar>(
    config: &SessionConfig<T>,
    seed: u64,
    trial: u64,
) -> Result<TrialRecord, SimError> {
    let mut rng = trial_rng(seed, trial);
    let s = config.field.bits();
    let n = config.lanes.len();
    let k = config.k;
    let stream_bits = (config.rounds * n * k) as u64 * u64::from(s);
    let mut source = vec![0u8; (stream_bits / 8) as usize];
    rng.fill_bytes(&mut source);

    let generations = parallelize(&source, n, k, s)?;
    let mut record = TrialRecord {
        trial,
        erased_native: vec![0; n],
        native_symbols: vec![0; n],
        ..TrialRecord::default()
    };
    let mut decoded = Vec::with_capacity(generations.len());
    for generation in &generations {
        let lane_idx = (generation.index % n as u64) as usize;
        let lane = &config.lanes[lane_idx];
        let coefficient_seed = CoefficientSeed(rng.next_u64());
        let encoded = encode(&config.field, generation, lane.redundancy, coefficient_seed)?;
        let model = LaneErrorModel {
            main_ber: lane.expected_ber,
            aux_ber: config.aux_ber,
            rule: config.rule,
        };
        let (survivors, tx) = transmit_generation(&encoded, s, &config.fec, &model, &mut rng);

        record.generations += 1;
        record.native_symbols[lane_idx] += k as u64;
        record.erased_native[lane_idx] += tx.native_erasures() as u64;
        match recover(config, generation, &survivors, &tx)? {
            Some(symbols) => {
                record.decoded += 1;
                decoded.push(Generation {
                    symbols,
                    ..generation.clone()
                });
            }
            None => {
                record.rank_deficiency += (k - rank(&config.field, &survivors, k)) as u64;
            }
        }
    }

    if decoded.len() == generations.len() {
        let out = serialize(&decoded, n, s)?;
        record.stream_ok = out == source;
        if !record.stream_ok {
            return Err(SimError::Corruption(0));
        }
        record.delivered_bits = out.len() as u64 * 8;
    }
    Ok(record)
}

fn aggregate(records: &[TrialRecord], k: usize, lanes: usize) -> SimReport {
    let trials = records.len() as u64;
    let generations: u64 = records.iter().map(|r| r.generations).sum();
    let decoded: u64 = records.iter().map(|r| r.decoded).sum();
    let mut erased = vec![0u64; lanes];
    let mut natives = vec![0u64; lanes];
    for r in records {
        for i in 0..lanes {
            erased[i] += r.erased_native[i];
            natives[i] += r.native_symbols[i];
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let deficiency: u64 = records.iter().map(|r| r.rank_deficiency).sum();
    SimReport {
        trials,
        generations,
        generation_success_rate: ratio(decoded, generations),
        empirical_symbol_erasure_rate: ratio(erased.iter().sum(), natives.iter().sum()),
        lane_erasure_rate: erased
            .iter()
            .zip(&natives)
            .map(|(&e, &n)| ratio(e, n))
            .collect(),
        mean_decode_rank_deficiency: ratio(deficiency, generations * k as u64),
        stream_success_rate: ratio(
            records.iter().filter(|r| r.stream_ok).count() as u64,
            trials,
        ),
        delivered_bits: records.iter().map(|r| r.delivered_bits).sum(),
        delay_skew: 0.0,
        buffer_peak: 0.0,
    }
}

/// Runs `trials` independent trials of the session.
pub fn run_session<T: Scalar>(
    config: &SessionConfig<T>,
    trials: u64,
    seed: u64,
) -> Result<SessionOutcome, SimError> {
    config.validate()?;
    if trials == 0 {
        return Err(SimError::ConfigInvalid("trials must be positive".into()));
    }
    let records: Vec<TrialRecord> = if config.parallel {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(config, seed, t))
            .collect::<Result<_, _>>()?
    } else {
        (0..trials)
            .map(|t| run_trial(config, seed, t))
            .collect::<Result<_, _>>()?
    };
    let report = aggregate(&records, config.k, config.lanes.len());
    Ok(SessionOutcome { report, records })
}

/// [`run_session`] for a planned link, with delay skew and buffer peak
/// taken from the plan.
pub fn run_planned_session<T: Scalar>(
    plan: &LinkPlan<T>,
    config: &SessionConfig<T>,
    trials: u64,
    seed: u64,
) -> Result<SessionOutcome, SimError> {
    let mut outcome = run_session(config, trials, seed)?;
    outcome.report.delay_skew = plan.delay_skew().as_f64();
    let trace = ArrivalTrace::from_plan(plan, config.rounds as u64);
    outcome.report.buffer_peak = buffer_occupancy(plan, &trace).as_f64();
    Ok(outcome)
}
