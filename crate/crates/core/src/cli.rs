//! Command-line driver.
//!
//! ```text
//! thz-srlnc plan     [--config PATH] [--ber-table PATH] [--sweep-from CM --sweep-to CM --sweep-step CM] [--out PATH]
//! thz-srlnc simulate [same flags] [--trials N] [--seed U64] [--jobs N] [--trial-records PATH]
//! thz-srlnc codec encode --input FILE --out FILE [--k N --r N --s BITS --lanes N --seed U64 --session ID]
//! thz-srlnc codec decode --input FILE --out FILE [--s BITS --lanes N --erase COUNT]
//! ```
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.
//!
//! # Configuration file
//!
//! Plain `key = value` lines; `#` starts a comment. Flags override file
//! values. Relative `ber_table` paths are resolved against the file's
//! directory.
//!
//! | key               | meaning                                               | default            |
//! |-------------------|-------------------------------------------------------|--------------------|
//! | `channels`        | comma list of `band:modulation[:rate_bps]`            | `B:16PSK, C:16PSK` |
//! | `k`               | symbols per generation                                | 50                 |
//! | `s`               | bits per symbol                                       | 8                  |
//! | `fec_rate`        | FEC code rate R_F                                     | 0.73               |
//! | `baud`            | symbol rate; main rate becomes `baud · L`             | unset              |
//! | `aux_distance_cm` | auxiliary distance, or `main` to track d_main         | 500                |
//! | `ber_table`       | BER table CSV                                         | required           |
//! | `sweep_from_cm`   | first main distance                                   | 200                |
//! | `sweep_to_cm`     | last main distance (inclusive)                        | 2000               |
//! | `sweep_step_cm`   | distance step                                         | 50                 |
//! | `trials`          | Monte-Carlo trials per sweep point                    | 1000               |
//! | `seed`            | master seed                                           | 1                  |
//! | `rounds`          | dispatch rounds (N generations each) per trial        | 1                  |
//! | `correction_rule` | `uniform` or `earliest`                               | `uniform`          |
//! | `aux_ber`         | BER on auxiliary lanes                                | 0                  |
//!
//! Without `baud` or an explicit rate, a channel's main rate is `2e11 · L`.
//!
//! # CSV output
//!
//! `plan`: `d_main_cm`, then per channel `i` (1-based) `pe_i,pb_i,ps_i,r_i`,
//! then `R,R_L`, per channel `c_aux_i`, and `c_aux_total` (bits/s).
//!
//! `simulate`: `d_main_cm`, per channel `ps_i,erasure_i,r_i` (analytic P_s,
//! empirical native-symbol erasure rate, redundancy), then
//! `generation_success_rate,stream_success_rate,mean_rank_deficiency,delay_skew_s,buffer_peak_bits`.
//!
//! `--trial-records`: `d_main_cm,trial,generations,decoded,erased,natives,rank_deficiency,stream_ok`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::ber_table::{BerTable, BerTableError};
use crate::channel_sim::{
    derive_seed, run_planned_session, CorrectionRule, SessionConfig, SimError, TrialRecord,
};
use crate::error::ModelError;
use crate::gf::{Field, GfError};
use crate::pipeline::{read_frames, serialize, GenerationFrame, Lane, PipelineError, Sequencer};
use crate::planner::{
    main_rate_from_baud, nominal_main_rate, plan_link, ChannelSpec, LinkPlan, Modulation,
};
use crate::srlnc::{decode, encode, CodecError, CodedSymbol, CoefficientSeed, Generation};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Table(#[from] BerTableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Table(_) | Self::Model(_) | Self::Field(_) => 1,
            Self::Sim(SimError::ConfigInvalid(_)) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Main lane of a scenario; distances come from the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioChannel {
    pub band: String,
    pub modulation: Modulation,
    /// Explicit C_main in bits/s.
    pub main_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channels: Vec<ScenarioChannel>,
    pub k: u64,
    pub s: u32,
    pub fec_rate: f64,
    pub baud: Option<f64>,
    /// `None` keeps the auxiliary distance equal to the main distance.
    pub aux_distance_cm: Option<f64>,
    pub ber_table: Option<PathBuf>,
    pub sweep_from_cm: f64,
    pub sweep_to_cm: f64,
    pub sweep_step_cm: f64,
    pub trials: u64,
    pub seed: u64,
    pub rounds: usize,
    pub correction_rule: CorrectionRule,
    pub aux_ber: f64,
    /// Worker threads for Monte-Carlo trials; 0 means one per core.
    pub jobs: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            channels: vec![
                ScenarioChannel {
                    band: "B".into(),
                    modulation: Modulation::Psk16,
                    main_rate: None,
                },
                ScenarioChannel {
                    band: "C".into(),
                    modulation: Modulation::Psk16,
                    main_rate: None,
                },
            ],
            k: 50,
            s: 8,
            fec_rate: 0.73,
            baud: None,
            aux_distance_cm: Some(500.0),
            ber_table: None,
            sweep_from_cm: 200.0,
            sweep_to_cm: 2000.0,
            sweep_step_cm: 50.0,
            trials: 1000,
            seed: 1,
            rounds: 1,
            correction_rule: CorrectionRule::Uniform,
            aux_ber: 0.0,
            jobs: 0,
        }
    }
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_channels(value: &str) -> Result<Vec<ScenarioChannel>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            if !(2..=3).contains(&parts.len()) || parts[0].is_empty() {
                return Err(CliError::Config(format!(
                    "channel {item:?} is not band:modulation[:rate_bps]"
                )));
            }
            let modulation = parts[1]
                .parse()
                .map_err(|e| CliError::Config(format!("channel {item:?}: {e}")))?;
            let main_rate = parts
                .get(2)
                .map(|r| parse_value("channel rate", r))
                .transpose()?;
            Ok(ScenarioChannel {
                band: parts[0].to_string(),
                modulation,
                main_rate,
            })
        })
        .collect()
}

impl Scenario {
    /// Applies `key = value` text on top of `self`.
    pub fn apply_config_text(
        &mut self,
        text: &str,
        base_dir: Option<&Path>,
    ) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "channels" => self.channels = parse_channels(value)?,
                "k" => self.k = parse_value(key, value)?,
                "s" => self.s = parse_value(key, value)?,
                "fec_rate" => self.fec_rate = parse_value(key, value)?,
                "baud" => self.baud = Some(parse_value(key, value)?),
                "aux_distance_cm" => {
                    self.aux_distance_cm = if value.eq_ignore_ascii_case("main") {
                        None
                    } else {
                        Some(parse_value(key, value)?)
                    }
                }
                "ber_table" => {
                    let p = PathBuf::from(value);
                    self.ber_table = Some(match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    });
                }
                "sweep_from_cm" => self.sweep_from_cm = parse_value(key, value)?,
                "sweep_to_cm" => self.sweep_to_cm = parse_value(key, value)?,
                "sweep_step_cm" => self.sweep_step_cm = parse_value(key, value)?,
                "trials" => self.trials = parse_value(key, value)?,
                "seed" => self.seed = parse_value(key, value)?,
                "rounds" => self.rounds = parse_value(key, value)?,
                "correction_rule" => {
                    self.correction_rule = value.parse().map_err(CliError::Config)?
                }
                "aux_ber" => self.aux_ber = parse_value(key, value)?,
                "jobs" => self.jobs = parse_value(key, value)?,
                other => {
                    return Err(CliError::Config(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn from_config_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut scenario = Self::default();
        scenario.apply_config_text(&text, path.parent())?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.channels.is_empty() {
            return bad("at least one channel is required");
        }
        if self.k == 0 || self.k > u64::from(u16::MAX) {
            return bad("k must be in [1, 65535]");
        }
        if !(1..=16).contains(&self.s) {
            return bad("s must be in [1, 16]");
        }
        if !(self.fec_rate > 0.0 && self.fec_rate <= 1.0) {
            return bad("fec_rate must be in (0, 1]");
        }
        if !(self.sweep_step_cm > 0.0) {
            return bad("sweep step must be positive");
        }
        if !(self.sweep_from_cm > 0.0) || self.sweep_to_cm < self.sweep_from_cm {
            return bad("sweep range must be positive and non-empty");
        }
        if matches!(self.aux_distance_cm, Some(d) if !(d > 0.0)) {
            return bad("aux distance must be positive");
        }
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if !(0.0..=1.0).contains(&self.aux_ber) {
            return bad("aux_ber must be a probability");
        }
        Ok(())
    }

    /// Main distances of the sweep in cm, inclusive of both ends.
    pub fn sweep_points(&self) -> Vec<f64> {
        let span = (self.sweep_to_cm - self.sweep_from_cm) / self.sweep_step_cm;
        let count = (span + 1e-9).floor() as u64 + 1;
        (0..count)
            .map(|i| self.sweep_from_cm + i as f64 * self.sweep_step_cm)
            .collect()
    }

    fn main_rate(&self, channel: &ScenarioChannel) -> f64 {
        channel.main_rate.unwrap_or_else(|| match self.baud {
            Some(baud) => main_rate_from_baud(baud, channel.modulation),
            None => nominal_main_rate(channel.modulation),
        })
    }

    /// Channel specs at main distance `d_main_cm`, BER looked up in `table`.
    pub fn channel_specs(
        &self,
        table: &BerTable<f64>,
        d_main_cm: f64,
    ) -> Result<Vec<ChannelSpec<f64>>, CliError> {
        let d_main = d_main_cm / 100.0;
        let d_aux = self.aux_distance_cm.map_or(d_main, |cm| cm / 100.0);
        self.channels
            .iter()
            .enumerate()
            .map(|(index, c)| {
                Ok(ChannelSpec {
                    index,
                    band: c.band.clone(),
                    modulation: c.modulation,
                    main_rate: self.main_rate(c),
                    main_distance: d_main,
                    aux_distance: d_aux,
                    expected_ber: table.lookup(&c.band, c.modulation, d_main)?,
                })
            })
            .collect()
    }

    pub fn load_table(&self) -> Result<BerTable<f64>, CliError> {
        let path = self.ber_table.as_ref().ok_or_else(|| {
            CliError::Config("no BER table given (--ber-table or ber_table =)".into())
        })?;
        BerTable::from_path(path).map_err(|e| match e {
            BerTableError::Io(source) => CliError::Config(format!("{}: {source}", path.display())),
            other => CliError::Table(other),
        })
    }
}

/// One row of the analytic sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRow {
    pub d_main_cm: f64,
    pub expected_ber: Vec<f64>,
    pub plan: LinkPlan<f64>,
}

pub fn run_plan_sweep(
    scenario: &Scenario,
    table: &BerTable<f64>,
) -> Result<Vec<PlanRow>, CliError> {
    scenario.validate()?;
    scenario
        .sweep_points()
        .into_iter()
        .map(|d| {
            let specs = scenario.channel_specs(table, d)?;
            let plan = plan_link(&specs, scenario.k, scenario.s, scenario.fec_rate)?;
            Ok(PlanRow {
                d_main_cm: d,
                expected_ber: specs.iter().map(|c| c.expected_ber).collect(),
                plan,
            })
        })
        .collect()
}

pub fn write_plan_csv<W: Write>(
    rows: &[PlanRow],
    channels: usize,
    sink: W,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["d_main_cm".to_string()];
    for i in 1..=channels {
        header.extend([
            format!("pe_{i}"),
            format!("pb_{i}"),
            format!("ps_{i}"),
            format!("r_{i}"),
        ]);
    }
    header.extend(["R".to_string(), "R_L".to_string()]);
    header.extend((1..=channels).map(|i| format!("c_aux_{i}")));
    header.push("c_aux_total".into());
    w.write_record(&header)?;

    for row in rows {
        let mut rec = vec![row.d_main_cm.to_string()];
        for (c, pe) in row.plan.channels.iter().zip(&row.expected_ber) {
            rec.extend([
                pe.to_string(),
                c.residual.ber.to_string(),
                c.residual.ser.to_string(),
                c.redundancy.to_string(),
            ]);
        }
        rec.push(row.plan.redundant_total.to_string());
        rec.push(row.plan.code_rate.to_string());
        rec.extend(row.plan.channels.iter().map(|c| c.aux_rate.to_string()));
        rec.push(row.plan.aux_rate_total.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<output>".into(),
        source: e,
    })?;
    Ok(())
}

/// One row of the Monte-Carlo sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub d_main_cm: f64,
    pub plan: LinkPlan<f64>,
    pub report: crate::channel_sim::SimReport,
    pub records: Vec<TrialRecord>,
}

fn with_pool<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run_sim_sweep(scenario: &Scenario, table: &BerTable<f64>) -> Result<Vec<SimRow>, CliError> {
    scenario.validate()?;
    if scenario.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let points = scenario.sweep_points();
    with_pool(scenario.jobs, || {
        points
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let specs = scenario.channel_specs(table, d)?;
                let plan = plan_link(&specs, scenario.k, scenario.s, scenario.fec_rate)?;
                let ber: Vec<f64> = specs.iter().map(|c| c.expected_ber).collect();
                let mut config = SessionConfig::from_plan(&plan, &ber)?;
                config.rule = scenario.correction_rule;
                config.aux_ber = scenario.aux_ber;
                config.rounds = scenario.rounds;
                config.parallel = scenario.jobs != 1;
                let outcome = run_planned_session(
                    &plan,
                    &config,
                    scenario.trials,
                    derive_seed(scenario.seed, i as u64),
                )?;
                Ok(SimRow {
                    d_main_cm: d,
                    plan,
                    report: outcome.report,
                    records: outcome.records,
                })
            })
            .collect()
    })?
}

pub fn write_sim_csv<W: Write>(rows: &[SimRow], channels: usize, sink: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["d_main_cm".to_string()];
    for i in 1..=channels {
        header.extend([format!("ps_{i}"), format!("erasure_{i}"), format!("r_{i}")]);
    }
    header.extend(
        [
            "generation_success_rate",
            "stream_success_rate",
            "mean_rank_deficiency",
            "delay_skew_s",
            "buffer_peak_bits",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.d_main_cm.to_string()];
        for (c, e) in row.plan.channels.iter().zip(&row.report.lane_erasure_rate) {
            rec.extend([
                c.residual.ser.to_string(),
                e.to_string(),
                c.redundancy.to_string(),
            ]);
        }
        let r = &row.report;
        rec.extend([
            r.generation_success_rate.to_string(),
            r.stream_success_rate.to_string(),
            r.mean_decode_rank_deficiency.to_string(),
            r.delay_skew.to_string(),
            r.buffer_peak.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<output>".into(),
        source: e,
    })?;
    Ok(())
}

pub fn write_trial_records<W: Write>(rows: &[SimRow], sink: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "d_main_cm",
        "trial",
        "generations",
        "decoded",
        "erased",
        "natives",
        "rank_deficiency",
        "stream_ok",
    ])?;
    for row in rows {
        for t in &row.records {
            w.write_record([
                row.d_main_cm.to_string(),
                t.trial.to_string(),
                t.generations.to_string(),
                t.decoded.to_string(),
                t.erased_native.iter().sum::<u64>().to_string(),
                t.native_symbols.iter().sum::<u64>().to_string(),
                t.rank_deficiency.to_string(),
                u8::from(t.stream_ok).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::Io {
        path: "<output>".into(),
        source: e,
    })?;
    Ok(())
}

/// Writes `frames` for every generation of `data`: main frame then aux frame.
pub fn codec_encode(data: &[u8], opts: &EncodeOptions) -> Result<Vec<u8>, CliError> {
    let field = Field::with_bits(opts.s)?;
    let mut sequencer = Sequencer::new(opts.session, opts.lanes, opts.k, opts.s)?;
    let seed = CoefficientSeed(opts.seed);
    let mut out = Vec::new();
    for g in sequencer.parallelize(data)? {
        let encoded = encode(&field, &g, opts.r, seed)?;
        let (main, aux) = GenerationFrame::pair(opts.session, &encoded, opts.s, seed, g.pad_bits)?;
        out.extend(main.to_bytes());
        out.extend(aux.to_bytes());
    }
    Ok(out)
}

/// Rebuilds the stream from frames, dropping the first `erase` native
/// symbols of every generation before decoding.
pub fn codec_decode(frames: &[u8], lanes: usize, erase: usize) -> Result<Vec<u8>, CliError> {
    let frames = read_frames(frames)?;
    let mut by_generation: BTreeMap<u64, Vec<GenerationFrame>> = BTreeMap::new();
    for f in frames {
        by_generation
            .entry(f.header.generation_index)
            .or_default()
            .push(f);
    }
    let Some(first) = by_generation.values().next().and_then(|v| v.first()) else {
        return Ok(Vec::new());
    };
    let s = u32::from(first.header.s);
    let field = Field::with_bits(s)?;

    let mut generations = Vec::with_capacity(by_generation.len());
    for (index, frames) in by_generation {
        let k = usize::from(frames[0].header.k);
        let pad_bits = frames[0].header.pad_bits;
        let mut received: Vec<CodedSymbol> = Vec::new();
        for f in &frames {
            let symbols = f.coded_symbols(&field);
            match f.header.lane {
                Lane::Main => received.extend(symbols.into_iter().skip(erase)),
                Lane::Aux => received.extend(symbols),
            }
        }
        let symbols = decode(&field, &received, k)?;
        generations.push(Generation {
            index,
            symbols,
            pad_bits,
        });
    }
    Ok(serialize(&generations, lanes, s)?)
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// BER table CSV (band,modulation,distance_cm,ber).
    #[arg(long)]
    pub ber_table: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "CM")]
    pub sweep_from: Option<f64>,
    #[arg(long, value_name = "CM")]
    pub sweep_to: Option<f64>,
    #[arg(long, value_name = "CM")]
    pub sweep_step: Option<f64>,
    /// Channel list, e.g. "B:16PSK,C:16PSK".
    #[arg(long)]
    pub channels: Option<String>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Auxiliary distance in cm, or "main".
    #[arg(long, value_name = "CM")]
    pub aux_distance: Option<String>,
    /// Trial worker threads (1 = sequential, 0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl ScenarioArgs {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => Scenario::from_config_file(path)?,
            None => Scenario::default(),
        };
        if let Some(p) = &self.ber_table {
            s.ber_table = Some(p.clone());
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.trials {
            s.trials = v;
        }
        if let Some(v) = self.sweep_from {
            s.sweep_from_cm = v;
        }
        if let Some(v) = self.sweep_to {
            s.sweep_to_cm = v;
        }
        if let Some(v) = self.sweep_step {
            s.sweep_step_cm = v;
        }
        if let Some(v) = &self.channels {
            s.channels = parse_channels(v)?;
        }
        if let Some(v) = self.k {
            s.k = v;
        }
        if let Some(v) = &self.aux_distance {
            s.apply_config_text(&format!("aux_distance_cm = {v}"), None)?;
        }
        if let Some(v) = self.jobs {
            s.jobs = v;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EncodeOptions {
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, default_value_t = 8)]
    pub s: u32,
    #[arg(long, default_value_t = 1)]
    pub lanes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub session: u32,
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    /// Frame and encode a file.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: EncodeOptions,
    },
    /// Decode a frame file back into the original bytes.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        lanes: usize,
        /// Native symbols to drop from every generation before decoding.
        #[arg(long, default_value_t = 0)]
        erase: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic sweep over the main-lane distance.
    Plan {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Monte-Carlo sweep over the main-lane distance.
    Simulate {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Also write per-trial records as CSV.
        #[arg(long)]
        trial_records: Option<PathBuf>,
    },
    /// Encode or decode files with the frame format.
    Codec {
        #[command(subcommand)]
        command: CodecCommand,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "thz-srlnc",
    version,
    about = "sRLNC planner and simulator for parallel main/auxiliary links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(io_err(path)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan { args } => {
            let scenario = args.scenario()?;
            let table = scenario.load_table()?;
            let rows = run_plan_sweep(&scenario, &table)?;
            let mut buf = Vec::new();
            write_plan_csv(&rows, scenario.channels.len(), &mut buf)?;
            emit(args.out.as_deref(), &buf)
        }
        Command::Simulate {
            args,
            trial_records,
        } => {
            let scenario = args.scenario()?;
            let table = scenario.load_table()?;
            let rows = run_sim_sweep(&scenario, &table)?;
            let mut buf = Vec::new();
            write_sim_csv(&rows, scenario.channels.len(), &mut buf)?;
            if let Some(path) = trial_records {
                let mut rec = Vec::new();
                write_trial_records(&rows, &mut rec)?;
                fs::write(&path, rec).map_err(io_err(&path))?;
            }
            emit(args.out.as_deref(), &buf)
        }
        Command::Codec { command } => match command {
            CodecCommand::Encode { input, out, opts } => {
                let data = fs::read(&input).map_err(io_err(&input))?;
                let frames = codec_encode(&data, &opts).map_err(|e| match e {
                    CliError::Pipeline(PipelineError::InvalidParameters(m)) => {
                        CliError::Config(m.into())
                    }
                    other => other,
                })?;
                fs::write(&out, frames).map_err(io_err(&out))
            }
            CodecCommand::Decode {
                input,
                out,
                lanes,
                erase,
            } => {
                let frames = fs::read(&input).map_err(io_err(&input))?;
                let data = codec_decode(&frames, lanes, erase)?;
                fs::write(&out, data).map_err(io_err(&out))
            }
        },
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
