//! Signatures and basis blades of the real Clifford algebra Cl(p,q).
//!
//! Generators e^1 … e^n (n = p + q) obey e^a e^b + e^b e^a = 2 eta^{ab} e
//! with eta = diag(+1 x p, -1 x q). A basis blade e^A is an ascending
//! product of distinct generators and is encoded as a bitmask: bit `a` set
//! means generator `a` (0-based) participates. The product of two blades
//! is then sign(A,B) * e^(A xor B), where the sign counts the
//! transpositions needed to interleave the two ascending index lists and
//! one metric factor per repeated generator.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on generator count; products use a precomputed sign table.
pub const DEFAULT_DIM_CAP: u32 = 8;
/// Hard cap; beyond the table range signs are computed on the fly.
pub const HARD_DIM_CAP: u32 = 12;

/// Signature (p, q) of Cl(p,q): p generators square to +e, q to -e.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Signature {
    p: u8,
    q: u8,
}

impl Signature {
    pub fn new(p: u8, q: u8) -> Result<Self> {
        Self::with_cap(p, q, DEFAULT_DIM_CAP)
    }

    /// `cap` may be raised up to [`HARD_DIM_CAP`]; n > 8 forgoes the table.
    pub fn with_cap(p: u8, q: u8, cap: u32) -> Result<Self> {
        let n = p as u32 + q as u32;
        let cap = cap.min(HARD_DIM_CAP);
        if n == 0 || n > cap {
            return Err(Error::DimensionCap(n, cap));
        }
        Ok(Signature { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p as u32
    }

    pub fn q(&self) -> u32 {
        self.q as u32
    }

    pub fn n(&self) -> u32 {
        self.p as u32 + self.q as u32
    }

    /// Number of coefficients of a dense multivector, 2^n.
    pub fn dim(&self) -> usize {
        1usize << self.n()
    }

    /// eta^{aa} for the 0-based generator `a`: +1 for a < p, else -1.
    pub fn eta(&self, a: usize) -> i8 {
        debug_assert!(a < self.n() as usize);
        if a < self.p as usize {
            1
        } else {
            -1
        }
    }

    pub fn is_odd(&self) -> bool {
        self.n() % 2 == 1
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl({},{})", self.p, self.q)
    }
}

/// Basis blade as a generator bitmask (bit a = generator a, 0-based).
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Blade(u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    pub fn from_mask(mask: u32) -> Self {
        Blade(mask)
    }

    /// Blade from 0-based generator indices; duplicates are rejected.
    pub fn from_gens(gens: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &g in gens {
            let bit = 1u32 << g;
            if mask & bit != 0 {
                return Err(Error::InvalidArgument(format!(
                    "repeated generator {} in blade",
                    g + 1
                )));
            }
            mask |= bit;
        }
        Ok(Blade(mask))
    }

    pub fn pseudoscalar(n: u32) -> Self {
        Blade((1u32 << n) - 1)
    }

    pub fn mask(&self) -> u32 {
        self.0
    }

    pub fn grade(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(&self, gen: usize) -> bool {
        self.0 & (1 << gen) != 0
    }

    pub fn gens(&self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32u32).filter_map(move |b| (mask & (1 << b) != 0).then_some(b as usize))
    }

    /// Sign of reversing the factor order: (-1)^(k(k-1)/2).
    pub fn reversal_sign(&self) -> i8 {
        let k = self.grade();
        if (k * k.wrapping_sub(1) / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "e");
        }
        write!(f, "e")?;
        if self.gens().all(|g| g < 9) {
            for g in self.gens() {
                write!(f, "{}", g + 1)?;
            }
            Ok(())
        } else {
            let labels: Vec<String> = self.gens().map(|g| (g + 1).to_string()).collect();
            write!(f, "{{{}}}", labels.join(","))
        }
    }
}

/// Transpositions needed to merge two ascending generator lists: the number
/// of pairs (i in a, j in b) with i > j.
#[inline]
fn merge_swaps(a: u32, b: u32) -> u32 {
    let mut swaps = 0;
    let mut a = a >> 1;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    swaps
}

/// Sign and resulting mask of e^A * e^B.
#[inline]
pub fn blade_mul(sig: Signature, a: u32, b: u32) -> (i8, u32) {
    let mut sign: i8 = if merge_swaps(a, b) % 2 == 0 { 1 } else { -1 };
    let mut common = a & b;
    while common != 0 {
        let g = common.trailing_zeros() as usize;
        sign *= sig.eta(g);
        common &= common - 1;
    }
    (sign, a ^ b)
}

/// Sign s such that (e^A)^(-1) = s * e^A: reversal sign times one metric
/// factor per generator of A.
pub fn blade_inverse_sign(sig: Signature, blade: Blade) -> i8 {
    let mut sign = blade.reversal_sign();
    for g in blade.gens() {
        sign *= sig.eta(g);
    }
    sign
}

/// Dense 2^n x 2^n table of product signs, the throughput path for n <= 8.
pub struct ProductTable {
    dim: usize,
    signs: Vec<i8>,
}

impl ProductTable {
    fn build(sig: Signature) -> Self {
        let dim = sig.dim();
        let mut signs = vec![0i8; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let (s, _) = blade_mul(sig, a as u32, b as u32);
                signs[a * dim + b] = s;
            }
        }
        ProductTable { dim, signs }
    }

    #[inline]
    pub fn sign(&self, a: usize, b: usize) -> i8 {
        self.signs[a * self.dim + b]
    }
}

static TABLES: OnceLock<Mutex<HashMap<Signature, Arc<ProductTable>>>> = OnceLock::new();

/// Shared sign table for `sig`; built once per signature per process.
pub fn product_table(sig: Signature) -> Arc<ProductTable> {
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("sign table lock poisoned");
    guard
        .entry(sig)
        .or_insert_with(|| Arc::new(ProductTable::build(sig)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: concatenate the two ascending index lists,
    /// bubble-sort with a sign flip per adjacent transposition, then
    /// contract adjacent equal generators with a metric factor each.
    fn oracle_blade_mul(sig: Signature, a: u32, b: u32) -> (i8, u32) {
        let bits = |m: u32| (0..32).filter(move |i| m & (1 << i) != 0);
        let mut gens: Vec<u32> = bits(a).chain(bits(b)).collect();
        let mut sign = 1i8;
        loop {
            let mut swapped = false;
            for i in 0..gens.len().saturating_sub(1) {
                if gens[i] > gens[i + 1] {
                    gens.swap(i, i + 1);
                    sign = -sign;
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        let mut mask = 0u32;
        let mut i = 0;
        while i < gens.len() {
            if i + 1 < gens.len() && gens[i] == gens[i + 1] {
                sign *= sig.eta(gens[i] as usize);
                i += 2;
            } else {
                mask |= 1 << gens[i];
                i += 1;
            }
        }
        (sign, mask)
    }

    fn all_signatures(max_n: u8) -> Vec<Signature> {
        let mut out = Vec::new();
        for n in 1..=max_n {
            for p in 0..=n {
                out.push(Signature::new(p, n - p).unwrap());
            }
        }
        out
    }

    #[test]
    fn blade_mul_matches_transposition_oracle_exhaustively() {
        for sig in all_signatures(6) {
            for a in 0..sig.dim() as u32 {
                for b in 0..sig.dim() as u32 {
                    assert_eq!(
                        blade_mul(sig, a, b),
                        oracle_blade_mul(sig, a, b),
                        "{} a={:#b} b={:#b}",
                        sig,
                        a,
                        b
                    );
                }
            }
        }
    }

    #[test]
    fn product_table_agrees_with_on_the_fly_signs() {
        for sig in [
            Signature::new(3, 1).unwrap(),
            Signature::new(0, 4).unwrap(),
            Signature::new(2, 3).unwrap(),
        ] {
            let table = product_table(sig);
            for a in 0..sig.dim() {
                for b in 0..sig.dim() {
                    assert_eq!(table.sign(a, b), blade_mul(sig, a as u32, b as u32).0);
                }
            }
        }
    }

    #[test]
    fn known_product_signs() {
        // Cl(1,3): e12 * e12 = -eta11 * eta22 * e = +e.
        let st = Signature::new(1, 3).unwrap();
        assert_eq!(blade_mul(st, 0b0011, 0b0011), (1, 0));
        // Cl(2,0): e12 * e12 = -e.
        let pl = Signature::new(2, 0).unwrap();
        assert_eq!(blade_mul(pl, 0b11, 0b11), (-1, 0));
        // Cl(3,0): e12 * e23 = e13.
        let three = Signature::new(3, 0).unwrap();
        assert_eq!(blade_mul(three, 0b011, 0b110), (1, 0b101));
        // Anticommutation of distinct generators.
        assert_eq!(blade_mul(three, 0b001, 0b010), (1, 0b011));
        assert_eq!(blade_mul(three, 0b010, 0b001), (-1, 0b011));
    }

    #[test]
    fn blade_inverse_sign_squares_to_identity_metric() {
        // e^A * (s * e^A) must give +e: check s * (e^A e^A sign) = 1.
        for sig in all_signatures(6) {
            for mask in 0..sig.dim() as u32 {
                let blade = Blade::from_mask(mask);
                let s = blade_inverse_sign(sig, blade);
                let (square_sign, rest) = blade_mul(sig, mask, mask);
                assert_eq!(rest, 0);
                assert_eq!(s * square_sign, 1, "{} {}", sig, blade);
            }
        }
    }

    #[test]
    fn signature_caps_and_accessors() {
        assert!(Signature::new(9, 0).is_err());
        assert!(Signature::new(0, 0).is_err());
        assert!(Signature::with_cap(9, 0, 12).is_ok());
        assert!(Signature::with_cap(9, 4, 20).is_err());
        let sig = Signature::new(1, 3).unwrap();
        assert_eq!(sig.n(), 4);
        assert_eq!(sig.dim(), 16);
        assert_eq!(
            (0..4).map(|a| sig.eta(a)).collect::<Vec<_>>(),
            vec![1, -1, -1, -1]
        );
        assert!(sig.to_string() == "Cl(1,3)");
    }

    #[test]
    fn blade_display_and_from_gens() {
        assert_eq!(Blade::SCALAR.to_string(), "e");
        assert_eq!(Blade::from_gens(&[0, 2]).unwrap().to_string(), "e13");
        assert_eq!(Blade::pseudoscalar(3).to_string(), "e123");
        assert!(Blade::from_gens(&[1, 1]).is_err());
        assert_eq!(Blade::from_mask(0b1100_0000_0000).to_string(), "e{11,12}");
    }

    #[test]
    fn reversal_signs_follow_grade_pattern() {
        let expect = [1, 1, -1, -1, 1, 1, -1, -1];
        for k in 0..8u32 {
            let blade = Blade::from_mask((1 << k) - 1);
            assert_eq!(blade.reversal_sign(), expect[k as usize], "grade {}", k);
        }
    }
}
