//! Analytic link planner for `N` main lanes paired with `N` auxiliary lanes.
//!
//! For each main lane the planner turns the expected BER into a residual
//! symbol error rate, sizes the redundancy that must travel on the paired
//! auxiliary lane, and picks the auxiliary rate at which the redundancy
//! arrives exactly when the native symbols do.

use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;
use crate::fec_model::{
    check_code_rate, check_probability, derive_fec, residual_error, FecSpec, ResidualError,
};
use crate::scalar::{relative_difference, Scalar};

/// Propagation speed c_p in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Nominal main-lane rate per bit of modulation, bits/s.
///
/// A 25 GBd lane would carry 2.5e10 bits/s per modulation bit; the
/// evaluation setup this crate reproduces uses 2e11 per bit instead, so that
/// is what [`nominal_main_rate`] returns. Use [`main_rate_from_baud`] for an
/// explicit symbol rate.
pub const NOMINAL_RATE_PER_MODULATION_BIT: f64 = 2.0e11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Psk8,
    Psk16,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Self::Bpsk, Self::Qpsk, Self::Psk8, Self::Psk16];

    /// Bits per modulation symbol, L.
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Self::Bpsk => 1,
            Self::Qpsk => 2,
            Self::Psk8 => 3,
            Self::Psk16 => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Bpsk => "BPSK",
            Self::Qpsk => "QPSK",
            Self::Psk8 => "8PSK",
            Self::Psk16 => "16PSK",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownModulation(pub String);

impl fmt::Display for UnknownModulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown modulation {:?} (expected BPSK, QPSK, 8PSK or 16PSK)",
            self.0
        )
    }
}

impl std::error::Error for UnknownModulation {}

impl FromStr for Modulation {
    type Err = UnknownModulation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BPSK" => Ok(Self::Bpsk),
            "QPSK" | "4PSK" => Ok(Self::Qpsk),
            "8PSK" => Ok(Self::Psk8),
            "16PSK" => Ok(Self::Psk16),
            _ => Err(UnknownModulation(s.to_string())),
        }
    }
}

/// Main-lane rate from a symbol rate: `baud · L`.
pub fn main_rate_from_baud<T: Scalar>(baud: T, modulation: Modulation) -> T {
    baud * T::of(f64::from(modulation.bits_per_symbol()))
}

/// `2e11 · L` bits/s.
pub fn nominal_main_rate<T: Scalar>(modulation: Modulation) -> T {
    T::of(NOMINAL_RATE_PER_MODULATION_BIT * f64::from(modulation.bits_per_symbol()))
}

/// One main lane and its paired auxiliary lane. Distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec<T> {
    pub index: usize,
    /// Band label, e.g. "B" (660-695 GHz) or "C" (855-890 GHz).
    pub band: String,
    pub modulation: Modulation,
    /// C_main in bits/s.
    pub main_rate: T,
    pub main_distance: T,
    pub aux_distance: T,
    /// Expected BER p_e on the main lane.
    pub expected_ber: T,
}

impl<T: Scalar> ChannelSpec<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.main_rate > T::zero()) {
            return Err(ModelError::ZeroRate);
        }
        for (what, d) in [
            ("main distance", self.main_distance),
            ("aux distance", self.aux_distance),
        ] {
            if !(d > T::zero()) || !d.is_finite() {
                return Err(ModelError::InvalidDistance {
                    what,
                    value: d.as_f64(),
                });
            }
        }
        check_probability("expected BER", self.expected_ber)
    }
}

/// Per-channel planner output.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan<T> {
    pub index: usize,
    pub fec: FecSpec<T>,
    pub residual: ResidualError<T>,
    /// r_i, redundant symbols per generation.
    pub redundancy: u64,
    /// C_aux^i in bits/s; 0 when no redundancy is needed.
    pub aux_rate: T,
    /// T_main^i in seconds.
    pub main_delay: T,
    /// T_aux^i in seconds; pure propagation delay when `redundancy == 0`.
    pub aux_delay: T,
    /// Exclusive upper bound on the auxiliary distance, meters.
    pub aux_distance_limit: T,
    pub main_rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPlan<T> {
    pub k: u64,
    pub s: u32,
    pub fec_rate: T,
    pub channels: Vec<ChannelPlan<T>>,
    /// K, native symbols over all main lanes.
    pub native_total: u64,
    /// R, redundant symbols over all auxiliary lanes.
    pub redundant_total: u64,
    /// M = K + R.
    pub coded_total: u64,
    /// R_L = K / M.
    pub code_rate: T,
    pub aux_rate_total: T,
    /// max_i |T_main^i − T_aux^i| · C_main^i over channels with redundancy, bits.
    pub buffer_bound: T,
}

impl<T: Scalar> LinkPlan<T> {
    pub fn redundancy(&self) -> Vec<u64> {
        self.channels.iter().map(|c| c.redundancy).collect()
    }

    pub fn delay_skew(&self) -> T {
        self.channels
            .iter()
            .filter(|c| c.redundancy > 0)
            .map(|c| (c.main_delay - c.aux_delay).abs())
            .fold(T::zero(), T::max)
    }
}

/// Least integer r with r ≥ P_s · k.
pub fn size_redundancy<T: Scalar>(residual_ser: T, k: u64) -> u64 {
    let p = residual_ser.max(T::zero()).min(T::one());
    let r = (p * T::of_u64(k)).ceil();
    r.to_u64().unwrap_or(0).min(k)
}

/// R_L = Σk_i / Σ(k_i + r_i).
pub fn code_rate<T: Scalar>(natives: &[u64], redundant: &[u64]) -> Result<T, ModelError> {
    if natives.is_empty() {
        return Err(ModelError::NoChannels);
    }
    if natives.len() != redundant.len() {
        return Err(ModelError::LengthMismatch {
            expected: natives.len(),
            got: redundant.len(),
        });
    }
    if natives.contains(&0) {
        return Err(ModelError::EmptyGeneration);
    }
    let k: u64 = natives.iter().sum();
    let r: u64 = redundant.iter().sum();
    Ok(T::of_u64(k) / T::of_u64(k + r))
}

/// Transmission plus propagation delay `n·s/(R_F·C) + d/c_p`.
///
/// An empty payload needs no rate and costs only propagation.
pub fn channel_delay<T: Scalar>(
    payload_symbols: u64,
    s: u32,
    fec_rate: T,
    rate: T,
    distance: T,
) -> Result<T, ModelError> {
    check_code_rate(fec_rate)?;
    let propagation = distance / T::of(SPEED_OF_LIGHT);
    if payload_symbols == 0 {
        return Ok(propagation);
    }
    if !(rate > T::zero()) {
        return Err(ModelError::ZeroRate);
    }
    let bits = T::of_u64(payload_symbols * u64::from(s));
    Ok(bits / (fec_rate * rate) + propagation)
}

/// `R_F·C_main·(d_main − d_aux) + c_p·k·s`; must be positive.
fn balance_denominator<T: Scalar>(
    k: u64,
    s: u32,
    fec_rate: T,
    main_rate: T,
    main_distance: T,
    aux_distance: T,
) -> T {
    fec_rate * main_rate * (main_distance - aux_distance)
        + T::of(SPEED_OF_LIGHT) * T::of_u64(k * u64::from(s))
}

/// Auxiliary rate that makes `r` redundant symbols arrive together with `k`
/// native ones: `r·s·c_p·C_main / (R_F·C_main·(d_main − d_aux) + c_p·k·s)`.
#[allow(clippy::too_many_arguments)]
pub fn aux_rate<T: Scalar>(
    r: u64,
    k: u64,
    s: u32,
    fec_rate: T,
    main_rate: T,
    main_distance: T,
    aux_distance: T,
) -> Result<T, ModelError> {
    check_code_rate(fec_rate)?;
    if r == 0 {
        return Ok(T::zero());
    }
    if !(main_rate > T::zero()) {
        return Err(ModelError::ZeroRate);
    }
    let denominator = balance_denominator(k, s, fec_rate, main_rate, main_distance, aux_distance);
    if !(denominator > T::zero()) {
        return Err(ModelError::DistanceLimitViolated {
            channel: 0,
            aux_distance: aux_distance.as_f64(),
            limit: aux_distance_limit(k, s, fec_rate, main_rate, main_distance)?.as_f64(),
        });
    }
    let numerator = T::of_u64(r * u64::from(s)) * T::of(SPEED_OF_LIGHT) * main_rate;
    Ok(numerator / denominator)
}

/// Exclusive bound `k·s·c_p/(R_F·C_main) + d_main` on the auxiliary distance.
pub fn aux_distance_limit<T: Scalar>(
    k: u64,
    s: u32,
    fec_rate: T,
    main_rate: T,
    main_distance: T,
) -> Result<T, ModelError> {
    check_code_rate(fec_rate)?;
    if !(main_rate > T::zero()) {
        return Err(ModelError::ZeroRate);
    }
    let bits = T::of_u64(k * u64::from(s));
    Ok(bits * T::of(SPEED_OF_LIGHT) / (fec_rate * main_rate) + main_distance)
}

/// Total auxiliary rate for a homogeneous configuration, computed in one
/// step from Σr_i.
#[allow(clippy::too_many_arguments)]
pub fn total_aux_rate_homogeneous<T: Scalar>(
    redundancy: &[u64],
    k: u64,
    s: u32,
    fec_rate: T,
    main_rate: T,
    main_distance: T,
    aux_distance: T,
) -> Result<T, ModelError> {
    check_code_rate(fec_rate)?;
    let total: u64 = redundancy.iter().sum();
    if total == 0 {
        return Ok(T::zero());
    }
    if !(main_rate > T::zero()) {
        return Err(ModelError::ZeroRate);
    }
    let denominator = balance_denominator(k, s, fec_rate, main_rate, main_distance, aux_distance);
    if !(denominator > T::zero()) {
        return Err(ModelError::DistanceLimitViolated {
            channel: 0,
            aux_distance: aux_distance.as_f64(),
            limit: aux_distance_limit(k, s, fec_rate, main_rate, main_distance)?.as_f64(),
        });
    }
    let numerator = T::of(f64::from(s)) * T::of(SPEED_OF_LIGHT) * main_rate * T::of_u64(total);
    Ok(numerator / denominator)
}

/// Total auxiliary rate over `channels`, which must share C_main, d_main and d_aux.
pub fn total_aux_rate<T: Scalar>(
    channels: &[ChannelSpec<T>],
    redundancy: &[u64],
    k: u64,
    s: u32,
    fec_rate: T,
) -> Result<T, ModelError> {
    let first = channels.first().ok_or(ModelError::NoChannels)?;
    if redundancy.len() != channels.len() {
        return Err(ModelError::LengthMismatch {
            expected: channels.len(),
            got: redundancy.len(),
        });
    }
    for c in &channels[1..] {
        if c.main_rate != first.main_rate {
            return Err(ModelError::HeterogeneousConfig("main rate"));
        }
        if c.main_distance != first.main_distance {
            return Err(ModelError::HeterogeneousConfig("main distance"));
        }
        if c.aux_distance != first.aux_distance {
            return Err(ModelError::HeterogeneousConfig("aux distance"));
        }
    }
    total_aux_rate_homogeneous(
        redundancy,
        k,
        s,
        fec_rate,
        first.main_rate,
        first.main_distance,
        first.aux_distance,
    )
}

fn plan_channel<T: Scalar>(
    channel: &ChannelSpec<T>,
    fec: &FecSpec<T>,
    k: u64,
    s: u32,
) -> Result<ChannelPlan<T>, ModelError> {
    channel.validate()?;
    let residual = residual_error(fec, k, s, channel.expected_ber)?;
    let redundancy = size_redundancy(residual.ser, k);
    let limit = aux_distance_limit(
        k,
        s,
        fec.code_rate,
        channel.main_rate,
        channel.main_distance,
    )?;
    let aux = aux_rate(
        redundancy,
        k,
        s,
        fec.code_rate,
        channel.main_rate,
        channel.main_distance,
        channel.aux_distance,
    )
    .map_err(|e| match e {
        ModelError::DistanceLimitViolated {
            aux_distance,
            limit,
            ..
        } => ModelError::DistanceLimitViolated {
            channel: channel.index,
            aux_distance,
            limit,
        },
        other => other,
    })?;
    let main_delay = channel_delay(
        k,
        s,
        fec.code_rate,
        channel.main_rate,
        channel.main_distance,
    )?;
    let aux_delay = channel_delay(redundancy, s, fec.code_rate, aux, channel.aux_distance)?;

    if redundancy > 0 {
        let relative = relative_difference(main_delay, aux_delay);
        if relative > T::balance_tolerance() {
            return Err(ModelError::BalanceViolated {
                channel: channel.index,
                relative: relative.as_f64(),
            });
        }
    }

    Ok(ChannelPlan {
        index: channel.index,
        fec: *fec,
        residual,
        redundancy,
        aux_rate: aux,
        main_delay,
        aux_delay,
        aux_distance_limit: limit,
        main_rate: channel.main_rate,
    })
}

/// Plans every channel and aggregates the totals.
pub fn plan_link<T: Scalar>(
    channels: &[ChannelSpec<T>],
    k: u64,
    s: u32,
    fec_rate: T,
) -> Result<LinkPlan<T>, ModelError> {
    if channels.is_empty() {
        return Err(ModelError::NoChannels);
    }
    let fec = derive_fec(k, s, fec_rate)?;
    let planned = channels
        .iter()
        .map(|c| plan_channel(c, &fec, k, s))
        .collect::<Result<Vec<_>, _>>()?;

    let native_total = k * planned.len() as u64;
    let redundant_total: u64 = planned.iter().map(|c| c.redundancy).sum();
    let natives = vec![k; planned.len()];
    let redundancy: Vec<u64> = planned.iter().map(|c| c.redundancy).collect();
    let code_rate = code_rate(&natives, &redundancy)?;
    let aux_rate_total = planned.iter().fold(T::zero(), |acc, c| acc + c.aux_rate);
    let buffer_bound = planned
        .iter()
        .filter(|c| c.redundancy > 0)
        .map(|c| (c.main_delay - c.aux_delay).abs() * c.main_rate)
        .fold(T::zero(), T::max);

    Ok(LinkPlan {
        k,
        s,
        fec_rate,
        channels: planned,
        native_total,
        redundant_total,
        coded_total: native_total + redundant_total,
        code_rate,
        aux_rate_total,
        buffer_bound,
    })
}
