//! Framing and lane parallelization.
//!
//! A byte stream is cut into generations of `k` symbols of `s` bits
//! (bits taken most-significant first). Generations are filled in order, so
//! generation `g` holds stream bits `[g·k·s, (g+1)·k·s)`, and consecutive
//! groups of `N` generations form one round, generation `g` travelling on
//! lane pair `g mod N`. The tail is zero-padded and the number of padding
//! bits is kept per generation.
//!
//! # Frame layout
//!
//! All header fields are big-endian, 30 bytes in total:
//!
//! | offset | size | field              |
//! |-------:|-----:|--------------------|
//! | 0      | 4    | session_id         |
//! | 4      | 8    | generation_index   |
//! | 12     | 2    | k                  |
//! | 14     | 2    | r                  |
//! | 16     | 1    | s                  |
//! | 17     | 8    | coefficient_seed   |
//! | 25     | 4    | pad_bits           |
//! | 29     | 1    | lane (0 main, 1 aux) |
//!
//! The payload follows: `k` symbols on a main frame, `r` on an aux frame,
//! packed MSB-first into `ceil(count·s/8)` bytes with zero fill.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::gf::{Field, FieldElement};
use crate::srlnc::{
    coefficient_vector, CodedSymbol, CoefficientSeed, EncodedGeneration, Generation,
};

pub const FRAME_HEADER_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("generation set is incomplete: missing index {missing}")]
    IncompleteSet { missing: u64 },
    #[error("generations disagree on size ({expected} vs {got} symbols)")]
    MixedGenerationSize { expected: usize, got: usize },
    #[error("padding of {pad_bits} bits exceeds the generation size of {bits} bits")]
    BadPadding { pad_bits: u32, bits: u64 },
    #[error("unpadded payload is {0} bits, not a whole number of bytes")]
    Misaligned(u64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
    #[error("frame truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("unknown lane tag {0}")]
    BadLane(u8),
    #[error("symbol size {0} is outside [1, 16]")]
    BadSymbolSize(u8),
    #[error("frame payload has nonzero fill bits")]
    NonzeroFill,
    #[error("value does not fit the frame header field {0}")]
    HeaderOverflow(&'static str),
}

/// Packs fixed-width symbols MSB-first.
struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    fn with_capacity(bytes: usize) -> Self {
        Self {
            out: Vec::with_capacity(bytes),
            acc: 0,
            filled: 0,
        }
    }

    fn push(&mut self, value: u32, bits: u32) {
        debug_assert!(bits <= 32);
        self.acc = (self.acc << bits) | u64::from(value) & ((1u64 << bits) - 1);
        self.filled += bits;
        while self.filled >= 8 {
            self.filled -= 8;
            self.out.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    /// Flushes a partial byte, zero-filled.
    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.out.push((self.acc << (8 - self.filled)) as u8);
        }
        self.out
    }

    fn bit_len(&self) -> u64 {
        self.out.len() as u64 * 8 + u64::from(self.filled)
    }
}

/// Reads fixed-width symbols MSB-first; reads past the end yield zeros.
struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn read(&mut self, bits: u32) -> u32 {
        let mut v = 0u32;
        let mut left = bits;
        while left > 0 {
            let byte_idx = (self.pos / 8) as usize;
            let bit_off = (self.pos % 8) as u32;
            let avail = 8 - bit_off;
            let take = avail.min(left);
            let byte = self.data.get(byte_idx).copied().unwrap_or(0) as u32;
            let chunk = (byte >> (avail - take)) & ((1 << take) - 1);
            v = (v << take) | chunk;
            left -= take;
            self.pos += u64::from(take);
        }
        v
    }
}

fn check_params(lanes: usize, k: usize, s: u32) -> Result<(), PipelineError> {
    if lanes == 0 {
        return Err(PipelineError::InvalidParameters(
            "lane count must be positive",
        ));
    }
    if k == 0 {
        return Err(PipelineError::InvalidParameters(
            "generation size must be positive",
        ));
    }
    if !(1..=16).contains(&s) {
        return Err(PipelineError::InvalidParameters(
            "symbol size must be in [1, 16]",
        ));
    }
    Ok(())
}

/// Splits `stream` into whole rounds of `lanes` generations, numbering them
/// from `first_index`.
pub fn parallelize_from(
    stream: &[u8],
    lanes: usize,
    k: usize,
    s: u32,
    first_index: u64,
) -> Result<Vec<Generation>, PipelineError> {
    check_params(lanes, k, s)?;
    let gen_bits = k as u64 * u64::from(s);
    let total_bits = stream.len() as u64 * 8;
    let round_bits = gen_bits * lanes as u64;
    let rounds = total_bits.div_ceil(round_bits).max(1);

    let mut reader = BitReader::new(stream);
    let generations = (0..rounds * lanes as u64)
        .map(|g| {
            let start = g * gen_bits;
            let data_bits = total_bits.saturating_sub(start).min(gen_bits);
            let symbols = (0..k)
                .map(|_| FieldElement::from_raw(reader.read(s) as u16))
                .collect();
            Generation {
                index: first_index + g,
                symbols,
                pad_bits: (gen_bits - data_bits) as u32,
            }
        })
        .collect();
    Ok(generations)
}

/// [`parallelize_from`] starting at generation index 0.
pub fn parallelize(
    stream: &[u8],
    lanes: usize,
    k: usize,
    s: u32,
) -> Result<Vec<Generation>, PipelineError> {
    parallelize_from(stream, lanes, k, s, 0)
}

/// True when a generation carries no stream data at all.
pub fn is_padding_only(generation: &Generation, s: u32) -> bool {
    u64::from(generation.pad_bits) == generation.k() as u64 * u64::from(s)
}

/// Reassembles the byte stream from decoded generations in index order.
///
/// Indices must be contiguous and cover whole rounds of `lanes`.
pub fn serialize(
    generations: &[Generation],
    lanes: usize,
    s: u32,
) -> Result<Vec<u8>, PipelineError> {
    let Some(first) = generations.first() else {
        return Err(PipelineError::IncompleteSet { missing: 0 });
    };
    check_params(lanes, first.k(), s)?;

    let mut ordered: Vec<&Generation> = generations.iter().collect();
    ordered.sort_by_key(|g| g.index);
    let base = ordered[0].index;
    for (offset, g) in ordered.iter().enumerate() {
        let expected = base + offset as u64;
        if g.index != expected {
            return Err(PipelineError::IncompleteSet { missing: expected });
        }
    }
    if !ordered.len().is_multiple_of(lanes) {
        let missing = base + ordered.len() as u64;
        return Err(PipelineError::IncompleteSet { missing });
    }

    let k = ordered[0].k();
    let gen_bits = k as u64 * u64::from(s);
    let mut writer = BitWriter::with_capacity((gen_bits as usize * ordered.len()).div_ceil(8));
    for g in ordered {
        if g.k() != k {
            return Err(PipelineError::MixedGenerationSize {
                expected: k,
                got: g.k(),
            });
        }
        if u64::from(g.pad_bits) > gen_bits {
            return Err(PipelineError::BadPadding {
                pad_bits: g.pad_bits,
                bits: gen_bits,
            });
        }
        let mut keep = gen_bits - u64::from(g.pad_bits);
        for sym in &g.symbols {
            if keep == 0 {
                break;
            }
            let take = keep.min(u64::from(s)) as u32;
            writer.push(u32::from(sym.value()) >> (s - take), take);
            keep -= u64::from(take);
        }
    }
    let bits = writer.bit_len();
    if !bits.is_multiple_of(8) {
        return Err(PipelineError::Misaligned(bits));
    }
    Ok(writer.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lane {
    Main = 0,
    Aux = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub session_id: u32,
    pub generation_index: u64,
    pub k: u16,
    pub r: u16,
    pub s: u8,
    pub coefficient_seed: u64,
    pub pad_bits: u32,
    pub lane: Lane,
}

impl FrameHeader {
    pub fn payload_symbols(&self) -> usize {
        match self.lane {
            Lane::Main => usize::from(self.k),
            Lane::Aux => usize::from(self.r),
        }
    }

    pub fn payload_len(&self) -> usize {
        (self.payload_symbols() * usize::from(self.s)).div_ceil(8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationFrame {
    pub header: FrameHeader,
    pub payload: Vec<FieldElement>,
}

impl GenerationFrame {
    /// The main-lane and aux-lane frames of one encoded generation.
    pub fn pair(
        session_id: u32,
        encoded: &EncodedGeneration,
        s: u32,
        seed: CoefficientSeed,
        pad_bits: u32,
    ) -> Result<(Self, Self), PipelineError> {
        let k = u16::try_from(encoded.k()).map_err(|_| PipelineError::HeaderOverflow("k"))?;
        let r = u16::try_from(encoded.r()).map_err(|_| PipelineError::HeaderOverflow("r"))?;
        let s = u8::try_from(s).map_err(|_| PipelineError::HeaderOverflow("s"))?;
        let header = FrameHeader {
            session_id,
            generation_index: encoded.generation_index,
            k,
            r,
            s,
            coefficient_seed: seed.0,
            pad_bits,
            lane: Lane::Main,
        };
        let main = Self {
            header,
            payload: encoded.native.iter().map(|c| c.payload).collect(),
        };
        let aux = Self {
            header: FrameHeader {
                lane: Lane::Aux,
                ..header
            },
            payload: encoded.redundant.iter().map(|c| c.payload).collect(),
        };
        Ok((main, aux))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + h.payload_len());
        out.extend_from_slice(&h.session_id.to_be_bytes());
        out.extend_from_slice(&h.generation_index.to_be_bytes());
        out.extend_from_slice(&h.k.to_be_bytes());
        out.extend_from_slice(&h.r.to_be_bytes());
        out.push(h.s);
        out.extend_from_slice(&h.coefficient_seed.to_be_bytes());
        out.extend_from_slice(&h.pad_bits.to_be_bytes());
        out.push(h.lane as u8);
        let mut writer = BitWriter::with_capacity(h.payload_len());
        for sym in &self.payload {
            writer.push(u32::from(sym.value()), u32::from(h.s));
        }
        out.extend(writer.finish());
        out
    }

    /// Parses one frame from the front of `bytes`; returns it and the bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize), PipelineError> {
        if bytes.len() < FRAME_HEADER_LEN {
            return Err(PipelineError::Truncated {
                need: FRAME_HEADER_LEN,
                have: bytes.len(),
            });
        }
        let be = |range: std::ops::Range<usize>| &bytes[range];
        let lane = match bytes[29] {
            0 => Lane::Main,
            1 => Lane::Aux,
            other => return Err(PipelineError::BadLane(other)),
        };
        let s = bytes[16];
        if !(1..=16).contains(&s) {
            return Err(PipelineError::BadSymbolSize(s));
        }
        let header = FrameHeader {
            session_id: u32::from_be_bytes(be(0..4).try_into().expect("4 bytes")),
            generation_index: u64::from_be_bytes(be(4..12).try_into().expect("8 bytes")),
            k: u16::from_be_bytes(be(12..14).try_into().expect("2 bytes")),
            r: u16::from_be_bytes(be(14..16).try_into().expect("2 bytes")),
            s,
            coefficient_seed: u64::from_be_bytes(be(17..25).try_into().expect("8 bytes")),
            pad_bits: u32::from_be_bytes(be(25..29).try_into().expect("4 bytes")),
            lane,
        };
        let total = FRAME_HEADER_LEN + header.payload_len();
        if bytes.len() < total {
            return Err(PipelineError::Truncated {
                need: total,
                have: bytes.len(),
            });
        }
        let body = &bytes[FRAME_HEADER_LEN..total];
        let mut reader = BitReader::new(body);
        let count = header.payload_symbols();
        let payload: Vec<FieldElement> = (0..count)
            .map(|_| FieldElement::from_raw(reader.read(u32::from(s)) as u16))
            .collect();
        let used_bits = count as u64 * u64::from(s);
        let fill = (body.len() as u64 * 8 - used_bits) as u32;
        if fill > 0 && reader.read(fill) != 0 {
            return Err(PipelineError::NonzeroFill);
        }
        Ok((Self { header, payload }, total))
    }

    /// Coded symbols carried by this frame, with coefficient vectors
    /// rebuilt from the header seed.
    pub fn coded_symbols(&self, field: &Field) -> Vec<CodedSymbol> {
        let k = usize::from(self.header.k);
        match self.header.lane {
            Lane::Main => self
                .payload
                .iter()
                .enumerate()
                .map(|(m, &p)| CodedSymbol::native(p, m, k))
                .collect(),
            Lane::Aux => self
                .payload
                .iter()
                .enumerate()
                .map(|(j, &p)| CodedSymbol {
                    payload: p,
                    coefficients: coefficient_vector(
                        field,
                        CoefficientSeed(self.header.coefficient_seed),
                        self.header.generation_index,
                        j as u64,
                        k,
                    ),
                })
                .collect(),
        }
    }
}

/// Splits a concatenation of frames.
pub fn read_frames(mut bytes: &[u8]) -> Result<Vec<GenerationFrame>, PipelineError> {
    let mut frames = Vec::new();
    while !bytes.is_empty() {
        let (frame, used) = GenerationFrame::from_bytes(bytes)?;
        frames.push(frame);
        bytes = &bytes[used..];
    }
    Ok(frames)
}

/// Hands out monotonically increasing generation indices for one session.
#[derive(Debug, Clone)]
pub struct Sequencer {
    pub session_id: u32,
    next_index: u64,
    lanes: usize,
    k: usize,
    s: u32,
}

impl Sequencer {
    pub fn new(session_id: u32, lanes: usize, k: usize, s: u32) -> Result<Self, PipelineError> {
        check_params(lanes, k, s)?;
        Ok(Self {
            session_id,
            next_index: 0,
            lanes,
            k,
            s,
        })
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    /// Parallelizes one chunk of the stream into the next rounds.
    pub fn parallelize(&mut self, chunk: &[u8]) -> Result<Vec<Generation>, PipelineError> {
        let gens = parallelize_from(chunk, self.lanes, self.k, self.s, self.next_index)?;
        self.next_index += gens.len() as u64;
        Ok(gens)
    }

    /// Indices handed out so far that are absent from `generations`.
    pub fn missing(&self, generations: &[Generation]) -> Vec<u64> {
        let seen: BTreeSet<u64> = generations.iter().map(|g| g.index).collect();
        (0..self.next_index).filter(|i| !seen.contains(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fill_has_no_padding() {
        let data: Vec<u8> = (0..16).collect();
        let gens = parallelize(&data, 2, 8, 8).unwrap();
        assert_eq!(gens.len(), 2);
        assert!(gens.iter().all(|g| g.pad_bits == 0));
        assert_eq!(gens[1].symbols[0].value(), 8);
        assert_eq!(serialize(&gens, 2, 8).unwrap(), data);
    }

    #[test]
    fn empty_stream_gives_padding_only_round() {
        let gens = parallelize(&[], 2, 4, 8).unwrap();
        assert_eq!(gens.len(), 2);
        assert!(gens.iter().all(|g| is_padding_only(g, 8)));
        assert_eq!(serialize(&gens, 2, 8).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn one_byte_short_pads_last_symbol() {
        let data: Vec<u8> = (1..=7).collect();
        let gens = parallelize(&data, 2, 4, 8).unwrap();
        assert_eq!(gens[0].pad_bits, 0);
        assert_eq!(gens[1].pad_bits, 8);
        assert_eq!(gens[1].symbols[3], FieldElement::ZERO);
        assert_eq!(serialize(&gens, 2, 8).unwrap(), data);
    }

    #[test]
    fn odd_symbol_width() {
        let data = b"network coding".to_vec();
        let gens = parallelize(&data, 3, 5, 5).unwrap();
        assert_eq!(gens.len() % 3, 0);
        assert_eq!(serialize(&gens, 3, 5).unwrap(), data);
    }

    #[test]
    fn missing_generation_is_reported() {
        let gens = parallelize(&[1, 2, 3, 4], 2, 1, 8).unwrap();
        assert_eq!(gens.len(), 4);
        assert_eq!(
            serialize(&gens[..1], 2, 8),
            Err(PipelineError::IncompleteSet { missing: 1 })
        );
        let gapped = vec![gens[0].clone(), gens[2].clone()];
        assert_eq!(
            serialize(&gapped, 2, 8),
            Err(PipelineError::IncompleteSet { missing: 1 })
        );
        assert_eq!(
            serialize(&[], 2, 8),
            Err(PipelineError::IncompleteSet { missing: 0 })
        );
    }

    #[test]
    fn order_of_input_does_not_matter() {
        let data: Vec<u8> = (0..40).collect();
        let mut gens = parallelize(&data, 4, 3, 8).unwrap();
        gens.reverse();
        assert_eq!(serialize(&gens, 4, 8).unwrap(), data);
    }

    #[test]
    fn frame_layout_is_fixed() {
        let frame = GenerationFrame {
            header: FrameHeader {
                session_id: 0x0102_0304,
                generation_index: 5,
                k: 2,
                r: 1,
                s: 8,
                coefficient_seed: 0xAABB,
                pad_bits: 3,
                lane: Lane::Main,
            },
            payload: vec![FieldElement::from_raw(0xDE), FieldElement::from_raw(0xAD)],
        };
        let bytes = frame.to_bytes();
        let expected: Vec<u8> = [
            &[1, 2, 3, 4][..],
            &[0, 0, 0, 0, 0, 0, 0, 5],
            &[0, 2],
            &[0, 1],
            &[8],
            &[0, 0, 0, 0, 0, 0, 0xAA, 0xBB],
            &[0, 0, 0, 3],
            &[0],
            &[0xDE, 0xAD],
        ]
        .concat();
        assert_eq!(bytes, expected);
        let (back, used) = GenerationFrame::from_bytes(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, frame);
    }

    #[test]
    fn frame_errors() {
        assert!(matches!(
            GenerationFrame::from_bytes(&[0; 10]),
            Err(PipelineError::Truncated { .. })
        ));
        let mut bad = vec![0u8; 30];
        bad[16] = 8;
        bad[29] = 7;
        assert_eq!(
            GenerationFrame::from_bytes(&bad),
            Err(PipelineError::BadLane(7))
        );
        bad[29] = 0;
        bad[16] = 0;
        assert_eq!(
            GenerationFrame::from_bytes(&bad),
            Err(PipelineError::BadSymbolSize(0))
        );
        // one 4-bit symbol with nonzero fill
        let mut nib = vec![0u8; 30];
        nib[13] = 1;
        nib[16] = 4;
        nib.push(0xAF);
        assert_eq!(
            GenerationFrame::from_bytes(&nib),
            Err(PipelineError::NonzeroFill)
        );
    }

    #[test]
    fn sequencer_is_monotonic() {
        let mut seq = Sequencer::new(7, 2, 2, 8).unwrap();
        let a = seq.parallelize(&[1, 2, 3, 4]).unwrap();
        let b = seq.parallelize(&[5]).unwrap();
        assert_eq!(a.iter().map(|g| g.index).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(b.iter().map(|g| g.index).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(seq.missing(&a), vec![2, 3]);
        let mut all = a;
        all.extend(b);
        assert_eq!(serialize(&all, 2, 8).unwrap(), vec![1, 2, 3, 4, 5]);
    }
}
