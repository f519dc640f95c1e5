//! Arithmetic in GF(2^s) for 1 <= s <= 16.
//!
//! The field is built at runtime from a symbol width and a reduction
//! polynomial, so a single binary can sweep symbol sizes. Multiplication and
//! inversion go through log/antilog tables indexed by a primitive element
//! found at construction time; the reduction polynomial only has to be
//! irreducible, not primitive (the AES polynomial 0x11B is the default for
//! s = 8 and is not primitive over x).

use std::fmt;

use thiserror::Error;

/// Smallest supported symbol width in bits.
pub const MIN_SYMBOL_BITS: u32 = 1;
/// Largest supported symbol width in bits.
pub const MAX_SYMBOL_BITS: u32 = 16;

/// x^8 + x^4 + x^3 + x + 1.
pub const AES_POLYNOMIAL: u32 = 0x11B;

/// Irreducible reduction polynomials used when only `s` is given, indexed by
/// `s - 1`. Bit `s` is the leading term.
const DEFAULT_POLYNOMIALS: [u32; 16] = [
    0x3,  // x + 1
    0x7,  // x^2 + x + 1
    0xB,  // x^3 + x + 1
    0x13, // x^4 + x + 1
    0x25, // x^5 + x^2 + 1
    0x43, // x^6 + x + 1
    0x89, // x^7 + x^3 + 1
    AES_POLYNOMIAL,
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("symbol size {0} bits is outside [{MIN_SYMBOL_BITS}, {MAX_SYMBOL_BITS}]")]
    UnsupportedSymbolSize(u32),
    #[error("reduction polynomial {poly:#x} does not have degree {bits}")]
    WrongDegree { poly: u32, bits: u32 },
    #[error("reduction polynomial {0:#x} is reducible over GF(2)")]
    Reducible(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value:#x} does not fit in a {bits}-bit symbol")]
    OutOfField { value: u32, bits: u32 },
}

/// One s-bit symbol, interpreted as an element of GF(2^s).
///
/// The value is only meaningful together with the [`Field`] that produced
/// it; elements are plain integers and carry no reference to their field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u16);

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    /// Wraps a raw symbol without range checking; [`Field::contains`]
    /// tells whether it belongs to a given field.
    #[inline]
    pub const fn from_raw(value: u16) -> Self {
        Self(value)
    }

    #[inline]
    pub const fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// Parameters that identify a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    pub bits: u32,
    pub polynomial: u32,
}

impl FieldSpec {
    /// GF(2^bits) with the built-in reduction polynomial for that width.
    pub fn with_bits(bits: u32) -> Result<Self, GfError> {
        if !(MIN_SYMBOL_BITS..=MAX_SYMBOL_BITS).contains(&bits) {
            return Err(GfError::UnsupportedSymbolSize(bits));
        }
        Ok(Self {
            bits,
            polynomial: DEFAULT_POLYNOMIALS[bits as usize - 1],
        })
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            bits: 8,
            polynomial: AES_POLYNOMIAL,
        }
    }
}

/// GF(2^s) with precomputed log/antilog tables. Immutable once built.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    /// Size of the multiplicative group, 2^s - 1.
    group_order: u32,
    /// exp[i] = g^i for i in [0, 2 * group_order).
    exp: Vec<u16>,
    /// log[x] = i with g^i = x; log[0] is unused.
    log: Vec<u16>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("bits", &self.spec.bits)
            .field("polynomial", &format_args!("{:#x}", self.spec.polynomial))
            .finish()
    }
}

impl Default for Field {
    fn default() -> Self {
        Self::new(FieldSpec::default()).expect("AES polynomial is irreducible")
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self, GfError> {
        let FieldSpec { bits, polynomial } = spec;
        if !(MIN_SYMBOL_BITS..=MAX_SYMBOL_BITS).contains(&bits) {
            return Err(GfError::UnsupportedSymbolSize(bits));
        }
        if degree(polynomial) != Some(bits) {
            return Err(GfError::WrongDegree {
                poly: polynomial,
                bits,
            });
        }
        if !is_irreducible(polynomial) {
            return Err(GfError::Reducible(polynomial));
        }

        let group_order = (1u32 << bits) - 1;
        let generator = (1..=group_order)
            .find(|&g| multiplicative_order(g, polynomial, bits) == group_order)
            .expect("the multiplicative group of a finite field is cyclic");

        let mut exp = vec![0u16; 2 * group_order as usize];
        let mut log = vec![0u16; 1usize << bits];
        let mut x = 1u32;
        for i in 0..group_order {
            exp[i as usize] = x as u16;
            exp[(i + group_order) as usize] = x as u16;
            log[x as usize] = i as u16;
            x = mul_reduce(x, generator, polynomial, bits);
        }

        Ok(Self {
            spec,
            group_order,
            exp,
            log,
        })
    }

    /// GF(2^bits) with the built-in polynomial for that width.
    pub fn with_bits(bits: u32) -> Result<Self, GfError> {
        Self::new(FieldSpec::with_bits(bits)?)
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    /// Symbol width s.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.spec.bits
    }

    /// Number of field elements, 2^s.
    #[inline]
    pub fn size(&self) -> u32 {
        self.group_order + 1
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, GfError> {
        if value > self.group_order {
            return Err(GfError::OutOfField {
                value,
                bits: self.spec.bits,
            });
        }
        Ok(FieldElement(value as u16))
    }

    /// Keeps the low `s` bits of `value`.
    #[inline]
    pub fn element_truncating(&self, value: u32) -> FieldElement {
        FieldElement((value & self.group_order) as u16)
    }

    #[inline]
    pub fn contains(&self, a: FieldElement) -> bool {
        u32::from(a.0) <= self.group_order
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    /// Same as [`Field::add`]; kept for readability at call sites.
    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let idx = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[idx])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        let idx = self.group_order as usize - self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[idx]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `acc[i] += c * src[i]` over the whole slice.
    pub fn mul_add_assign(&self, acc: &mut [FieldElement], c: FieldElement, src: &[FieldElement]) {
        debug_assert_eq!(acc.len(), src.len());
        if c.is_zero() {
            return;
        }
        if c == FieldElement::ONE {
            for (a, &s) in acc.iter_mut().zip(src) {
                a.0 ^= s.0;
            }
            return;
        }
        let log_c = self.log[c.0 as usize] as usize;
        for (a, &s) in acc.iter_mut().zip(src) {
            if s.0 != 0 {
                a.0 ^= self.exp[log_c + self.log[s.0 as usize] as usize];
            }
        }
    }

    /// `row[i] *= c` over the whole slice.
    pub fn scale_assign(&self, row: &mut [FieldElement], c: FieldElement) {
        for a in row.iter_mut() {
            *a = self.mul(*a, c);
        }
    }
}

fn degree(poly: u32) -> Option<u32> {
    (poly != 0).then(|| 31 - poly.leading_zeros())
}

/// Remainder of polynomial division over GF(2).
fn poly_rem(mut num: u32, den: u32) -> u32 {
    let dd = degree(den).expect("nonzero divisor");
    while let Some(dn) = degree(num) {
        if dn < dd {
            break;
        }
        num ^= den << (dn - dd);
    }
    num
}

/// Trial division by every polynomial of degree 1..=deg/2.
fn is_irreducible(poly: u32) -> bool {
    let Some(deg) = degree(poly) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| ((1u32 << d)..(1u32 << (d + 1))).all(|q| poly_rem(poly, q) != 0))
}

/// Shift-and-add multiply followed by reduction; only used to build tables.
fn mul_reduce(a: u32, b: u32, poly: u32, bits: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << bits) != 0 {
            a ^= poly;
        }
    }
    acc
}

fn multiplicative_order(g: u32, poly: u32, bits: u32) -> u32 {
    let mut x = g;
    let mut n = 1;
    while x != 1 {
        x = mul_reduce(x, g, poly, bits);
        n += 1;
        if x == 0 || n > (1 << bits) {
            return 0;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf256() -> Field {
        Field::default()
    }

    fn e(v: u16) -> FieldElement {
        FieldElement(v)
    }

    #[test]
    fn add_examples() {
        let f = gf256();
        assert_eq!(f.add(e(0x00), e(0x57)), e(0x57));
        assert_eq!(f.add(e(0x57), e(0x57)), e(0x00));
        assert_eq!(f.add(e(0x53), e(0xCA)), e(0x99));
    }

    #[test]
    fn aes_known_products() {
        // FIPS-197 worked examples for {57} * {83} and {57} * {13}.
        let f = gf256();
        assert_eq!(f.mul(e(0x57), e(0x83)), e(0xC1));
        assert_eq!(f.mul(e(0x57), e(0x13)), e(0xFE));
        assert_eq!(f.inv(e(0x53)).unwrap(), e(0xCA));
    }

    #[test]
    fn identity_and_zero() {
        let f = gf256();
        for x in 0..=255u16 {
            assert_eq!(f.mul(e(1), e(x)), e(x));
            assert_eq!(f.mul(e(0), e(x)), e(0));
        }
    }

    #[test]
    fn inverse_table_exhaustive() {
        let f = gf256();
        assert_eq!(f.inv(e(1)).unwrap(), e(1));
        assert_eq!(f.inv(e(0)), Err(GfError::ZeroInverse));
        for a in 1..=255u16 {
            let ia = f.inv(e(a)).unwrap();
            assert_eq!(f.mul(e(a), ia), FieldElement::ONE);
            assert_eq!(f.inv(ia).unwrap(), e(a));
        }
    }

    #[test]
    fn default_polynomials_are_irreducible() {
        for bits in MIN_SYMBOL_BITS..=MAX_SYMBOL_BITS {
            let f = Field::with_bits(bits).unwrap();
            assert_eq!(f.size(), 1 << bits);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            Field::with_bits(0).unwrap_err(),
            GfError::UnsupportedSymbolSize(0)
        );
        assert_eq!(
            Field::with_bits(17).unwrap_err(),
            GfError::UnsupportedSymbolSize(17)
        );
        // x^8 + 1 = (x + 1)^8
        assert_eq!(
            Field::new(FieldSpec {
                bits: 8,
                polynomial: 0x101
            })
            .unwrap_err(),
            GfError::Reducible(0x101)
        );
        assert!(matches!(
            Field::new(FieldSpec {
                bits: 8,
                polynomial: 0x13
            }),
            Err(GfError::WrongDegree { .. })
        ));
    }

    #[test]
    fn element_range_checked() {
        let f = Field::with_bits(4).unwrap();
        assert!(f.element(15).is_ok());
        assert_eq!(
            f.element(16),
            Err(GfError::OutOfField { value: 16, bits: 4 })
        );
        assert_eq!(f.element_truncating(0x1F), e(0xF));
    }
}
