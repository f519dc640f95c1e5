//! Systematic random linear network coding over GF(2^s).
//!
//! A generation of `k` native symbols is sent unchanged, followed by `r`
//! redundant symbols, each a random linear combination of the natives.
//! Coefficients are never shipped: both ends derive them from
//! `(coefficient_seed, generation_index, redundant_index)` with ChaCha8.
//! The generator is keyed with the little-endian seed and generation index
//! (remaining key bytes zero), the stream id is the redundant-symbol index,
//! and each coefficient is one `gen_range(0..2^s)` draw, so zero
//! coefficients are possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{Field, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("coefficient matrix has rank {rank}, need {k}")]
    InsufficientRank { rank: usize, k: usize },
    #[error("coded symbol carries {got} coefficients, generation size is {k}")]
    CoefficientLength { got: usize, k: usize },
    #[error("generation size must be positive")]
    EmptyGeneration,
    #[error("symbol {value:#x} does not fit in {bits} bits")]
    SymbolOutOfField { value: u16, bits: u32 },
}

/// Seed from which every coefficient vector of a session is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CoefficientSeed(pub u64);

/// A block of `k` native symbols coded together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub index: u64,
    pub symbols: Vec<FieldElement>,
    /// Trailing zero bits added by framing; 0 for full generations.
    pub pad_bits: u32,
}

impl Generation {
    pub fn new(index: u64, symbols: Vec<FieldElement>) -> Self {
        Self {
            index,
            symbols,
            pad_bits: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.symbols.len()
    }
}

/// A symbol on the wire together with the coefficients that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSymbol {
    pub payload: FieldElement,
    pub coefficients: Vec<FieldElement>,
}

impl CodedSymbol {
    /// Native symbol `position` of a `k`-symbol generation (unit coefficient vector).
    pub fn native(payload: FieldElement, position: usize, k: usize) -> Self {
        let mut coefficients = vec![FieldElement::ZERO; k];
        coefficients[position] = FieldElement::ONE;
        Self {
            payload,
            coefficients,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedGeneration {
    pub generation_index: u64,
    pub native: Vec<CodedSymbol>,
    pub redundant: Vec<CodedSymbol>,
}

impl EncodedGeneration {
    pub fn k(&self) -> usize {
        self.native.len()
    }

    pub fn r(&self) -> usize {
        self.redundant.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &CodedSymbol> {
        self.native.iter().chain(&self.redundant)
    }
}

/// Coefficients of redundant symbol `redundant_index` in generation `generation_index`.
pub fn coefficient_vector(
    field: &Field,
    seed: CoefficientSeed,
    generation_index: u64,
    redundant_index: u64,
    k: usize,
) -> Vec<FieldElement> {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.0.to_le_bytes());
    key[8..16].copy_from_slice(&generation_index.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(redundant_index);
    let size = field.size();
    (0..k)
        .map(|_| field.element_truncating(rng.gen_range(0..size)))
        .collect()
}

/// Linear combination `sum_m coefficients[m] * symbols[m]`.
pub fn combine(
    field: &Field,
    coefficients: &[FieldElement],
    symbols: &[FieldElement],
) -> FieldElement {
    coefficients
        .iter()
        .zip(symbols)
        .fold(FieldElement::ZERO, |acc, (&c, &x)| {
            field.add(acc, field.mul(c, x))
        })
}

pub fn encode(
    field: &Field,
    generation: &Generation,
    r: usize,
    seed: CoefficientSeed,
) -> Result<EncodedGeneration, CodecError> {
    let k = generation.k();
    if k == 0 {
        return Err(CodecError::EmptyGeneration);
    }
    if let Some(bad) = generation.symbols.iter().find(|&&x| !field.contains(x)) {
        return Err(CodecError::SymbolOutOfField {
            value: bad.value(),
            bits: field.bits(),
        });
    }

    let native = generation
        .symbols
        .iter()
        .enumerate()
        .map(|(m, &x)| CodedSymbol::native(x, m, k))
        .collect();
    let redundant = (0..r as u64)
        .map(|j| {
            let coefficients = coefficient_vector(field, seed, generation.index, j, k);
            let payload = combine(field, &coefficients, &generation.symbols);
            CodedSymbol {
                payload,
                coefficients,
            }
        })
        .collect();

    Ok(EncodedGeneration {
        generation_index: generation.index,
        native,
        redundant,
    })
}

/// Row-reduces `[coefficients | payload]` in place and returns the rank.
///
/// Pivots are taken column by column from the first remaining row with a
/// nonzero entry. After the call the first `rank` rows are in reduced row
/// echelon form.
fn gauss_jordan(field: &Field, rows: &mut [Vec<FieldElement>], k: usize) -> usize {
    let mut rank = 0;
    for col in 0..k {
        let Some(pivot) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field
            .inv(rows[rank][col])
            .expect("pivot is nonzero by construction");
        field.scale_assign(&mut rows[rank], inv);

        let (head, tail) = rows.split_at_mut(rank);
        let (pivot_row, tail) = tail.split_first_mut().expect("rank < rows.len()");
        for row in head.iter_mut().chain(tail.iter_mut()) {
            let c = row[col];
            field.mul_add_assign(row, c, pivot_row);
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of the coefficient matrix formed by `received`.
pub fn rank(field: &Field, received: &[CodedSymbol], k: usize) -> usize {
    let mut rows: Vec<Vec<FieldElement>> = received
        .iter()
        .map(|s| s.coefficients.iter().take(k).copied().collect())
        .collect();
    gauss_jordan(field, &mut rows, k)
}

/// Recovers the `k` native symbols by Gauss-Jordan elimination.
///
/// Succeeds exactly when the received coefficient matrix has rank `k`; the
/// result then does not depend on the order of `received`.
pub fn decode(
    field: &Field,
    received: &[CodedSymbol],
    k: usize,
) -> Result<Vec<FieldElement>, CodecError> {
    if k == 0 {
        return Err(CodecError::EmptyGeneration);
    }
    let mut rows = Vec::with_capacity(received.len());
    for sym in received {
        if sym.coefficients.len() != k {
            return Err(CodecError::CoefficientLength {
                got: sym.coefficients.len(),
                k,
            });
        }
        let mut row = Vec::with_capacity(k + 1);
        row.extend_from_slice(&sym.coefficients);
        row.push(sym.payload);
        rows.push(row);
    }
    let rank = gauss_jordan(field, &mut rows, k);
    if rank < k {
        return Err(CodecError::InsufficientRank { rank, k });
    }
    Ok(rows[..k].iter().map(|row| row[k]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(field: &Field, index: u64, values: &[u16]) -> Generation {
        Generation::new(
            index,
            values
                .iter()
                .map(|&v| field.element(v as u32).unwrap())
                .collect(),
        )
    }

    #[test]
    fn systematic_pass_through() {
        let f = Field::default();
        let g = gen(&f, 0, &[1, 2, 3, 4]);
        let enc = encode(&f, &g, 0, CoefficientSeed(9)).unwrap();
        assert_eq!(enc.r(), 0);
        for (m, sym) in enc.native.iter().enumerate() {
            assert_eq!(sym.payload, g.symbols[m]);
            assert_eq!(
                sym.coefficients,
                CodedSymbol::native(sym.payload, m, 4).coefficients
            );
        }
        assert_eq!(decode(&f, &enc.native, 4).unwrap(), g.symbols);
    }

    #[test]
    fn single_symbol_redundancy_is_scalar_multiple() {
        let f = Field::default();
        let g = gen(&f, 3, &[0xAB]);
        let enc = encode(&f, &g, 2, CoefficientSeed(77)).unwrap();
        for red in &enc.redundant {
            assert_eq!(red.coefficients.len(), 1);
            assert_eq!(red.payload, f.mul(red.coefficients[0], g.symbols[0]));
        }
    }

    #[test]
    fn coefficients_reproducible_from_seed() {
        let f = Field::default();
        let g = gen(&f, 5, &[9, 8, 7, 6, 5]);
        let enc = encode(&f, &g, 3, CoefficientSeed(1234)).unwrap();
        for (j, red) in enc.redundant.iter().enumerate() {
            assert_eq!(
                red.coefficients,
                coefficient_vector(&f, CoefficientSeed(1234), 5, j as u64, 5)
            );
        }
        assert_ne!(
            coefficient_vector(&f, CoefficientSeed(1234), 5, 0, 5),
            coefficient_vector(&f, CoefficientSeed(1234), 6, 0, 5)
        );
    }

    #[test]
    fn too_few_symbols_is_rank_error() {
        let f = Field::default();
        let g = gen(&f, 0, &[1, 2, 3, 4]);
        let enc = encode(&f, &g, 2, CoefficientSeed(1)).unwrap();
        let got = decode(&f, &enc.native[..3], 4);
        assert_eq!(got, Err(CodecError::InsufficientRank { rank: 3, k: 4 }));
    }

    #[test]
    fn dependent_symbols_are_rank_error() {
        let f = Field::default();
        let dup = CodedSymbol::native(FieldElement::ONE, 0, 2);
        let got = decode(&f, &[dup.clone(), dup], 2);
        assert_eq!(got, Err(CodecError::InsufficientRank { rank: 1, k: 2 }));
    }

    #[test]
    fn coefficient_length_checked() {
        let f = Field::default();
        let sym = CodedSymbol::native(FieldElement::ONE, 0, 3);
        assert_eq!(
            decode(&f, &[sym], 2),
            Err(CodecError::CoefficientLength { got: 3, k: 2 })
        );
    }

    #[test]
    fn empty_generation_rejected() {
        let f = Field::default();
        assert_eq!(
            encode(&f, &Generation::new(0, vec![]), 1, CoefficientSeed(0)),
            Err(CodecError::EmptyGeneration)
        );
    }

    #[test]
    fn non_byte_symbol_width() {
        let f = Field::with_bits(5).unwrap();
        let g = gen(&f, 2, &[31, 0, 17, 4, 9, 30]);
        let enc = encode(&f, &g, 6, CoefficientSeed(5)).unwrap();
        let survivors: Vec<_> = enc.redundant.clone();
        match decode(&f, &survivors, 6) {
            Ok(out) => assert_eq!(out, g.symbols),
            Err(CodecError::InsufficientRank { rank, .. }) => {
                assert_eq!(rank, super::rank(&f, &survivors, 6))
            }
            Err(e) => panic!("{e}"),
        }
    }
}
