//! Stabilizer tableau with destabilizers, bit-packed per qubit.
//!
//! Row `i < n` starts as `X_i` (destabilizer) and row `n + i` as `Z_i`
//! (stabilizer of `|0…0⟩`). Applying a Clifford `U` conjugates every row,
//! so after a program the rows hold `U X_i U†` and `U Z_i U†`. Bits for one
//! qubit across all `2n` rows live in a contiguous run of words, which makes
//! every gate a handful of word operations.

use std::fmt;

use crate::error::{MirrorError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `±` times a tensor product of Paulis, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub negative: bool,
    /// Non-identity factors in increasing site order.
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn single(site: usize, p: Pauli) -> Self {
        PauliString { negative: false, ops: vec![(site, p)] }
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    /// The site and factor when the string acts on exactly one qubit.
    pub fn single_site(&self) -> Option<(usize, Pauli)> {
        match self.ops.as_slice() {
            [one] => Some(*one),
            _ => None,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (i, (s, p)) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{}{}", p.symbol(), s)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<u64>,
}

impl Tableau {
    /// Identity tableau: rows are `X_0…X_{n-1}, Z_0…Z_{n-1}`.
    pub fn new(n: usize) -> Self {
        let words = (2 * n).div_ceil(64).max(1);
        let mut t = Tableau {
            n,
            words,
            x: vec![0; n * words],
            z: vec![0; n * words],
            r: vec![0; words],
        };
        for q in 0..n {
            t.x[q * words + q / 64] |= 1 << (q % 64);
            let row = n + q;
            t.z[q * words + row / 64] |= 1 << (row % 64);
        }
        t
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(MirrorError::SiteOutOfRange { site: q, n: self.n });
        }
        Ok(())
    }

    fn cols(&mut self, q: usize) -> (&mut [u64], &mut [u64], &mut [u64]) {
        let w = self.words;
        (&mut self.x[q * w..(q + 1) * w], &mut self.z[q * w..(q + 1) * w], &mut self.r)
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (x, z, r) = self.cols(q);
        for w in 0..x.len() {
            r[w] ^= x[w] & z[w];
            std::mem::swap(&mut x[w], &mut z[w]);
        }
        Ok(())
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (x, z, r) = self.cols(q);
        for w in 0..x.len() {
            r[w] ^= x[w] & z[w];
            z[w] ^= x[w];
        }
        Ok(())
    }

    pub fn sdg(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (x, z, r) = self.cols(q);
        for w in 0..x.len() {
            r[w] ^= x[w] & !z[w];
            z[w] ^= x[w];
        }
        Ok(())
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (_, z, r) = self.cols(q);
        r.iter_mut().zip(z.iter()).for_each(|(r, z)| *r ^= z);
        Ok(())
    }

    pub fn z(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (x, _, r) = self.cols(q);
        r.iter_mut().zip(x.iter()).for_each(|(r, x)| *r ^= x);
        Ok(())
    }

    pub fn y(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        let (x, z, r) = self.cols(q);
        for w in 0..x.len() {
            r[w] ^= x[w] ^ z[w];
        }
        Ok(())
    }

    /// `√X = H S H`.
    pub fn sqrt_x(&mut self, q: usize) -> Result<()> {
        self.h(q)?;
        self.s(q)?;
        self.h(q)
    }

    pub fn sqrt_x_dg(&mut self, q: usize) -> Result<()> {
        self.h(q)?;
        self.sdg(q)?;
        self.h(q)
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(MirrorError::InvalidGate(format!("CZ on a single site {a}")));
        }
        let w = self.words;
        for k in 0..w {
            let (xa, xb) = (self.x[a * w + k], self.x[b * w + k]);
            let (za, zb) = (self.z[a * w + k], self.z[b * w + k]);
            self.r[k] ^= xa & xb & (za ^ zb);
            self.z[a * w + k] = za ^ xb;
            self.z[b * w + k] = zb ^ xa;
        }
        Ok(())
    }

    fn bit(v: &[u64], row: usize) -> bool {
        v[row / 64] >> (row % 64) & 1 == 1
    }

    /// Row `i` as a Pauli string (`i < n`: image of `X_i`, else of `Z_{i-n}`).
    pub fn row(&self, i: usize) -> PauliString {
        let w = self.words;
        let ops = (0..self.n)
            .filter_map(|q| {
                let p = Pauli::from_bits(
                    Self::bit(&self.x[q * w..(q + 1) * w], i),
                    Self::bit(&self.z[q * w..(q + 1) * w], i),
                );
                (p != Pauli::I).then_some((q, p))
            })
            .collect();
        PauliString {
            negative: Self::bit(&self.r, i),
            ops,
        }
    }

    pub fn image_x(&self, q: usize) -> PauliString {
        self.row(q)
    }

    pub fn image_z(&self, q: usize) -> PauliString {
        self.row(self.n + q)
    }

    /// Image of the Pauli `p` on site `q`.
    pub fn image(&self, q: usize, p: Pauli) -> PauliString {
        match p {
            Pauli::I => PauliString { negative: false, ops: vec![] },
            Pauli::X => self.image_x(q),
            Pauli::Z => self.image_z(q),
            Pauli::Y => {
                // Y = i X Z
                let (a, b) = (self.image_x(q), self.image_z(q));
                multiply(&a, &b, 1)
            }
        }
    }

    /// Checks the symplectic structure: destabilizer `i` anticommutes with
    /// stabilizer `i` only, and all stabilizers (and destabilizers) commute.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        let w = self.words;
        let anti = |i: usize, j: usize| {
            (0..n).fold(false, |acc, q| {
                let xs = &self.x[q * w..(q + 1) * w];
                let zs = &self.z[q * w..(q + 1) * w];
                acc ^ ((Self::bit(xs, i) & Self::bit(zs, j)) ^ (Self::bit(zs, i) & Self::bit(xs, j)))
            })
        };
        (0..2 * n).all(|i| (i + 1..2 * n).all(|j| anti(i, j) == (j == i + n)))
    }
}

/// `i^phase · a · b` for Hermitian results; panics if the product is not
/// Hermitian (only used for products of anticommuting pairs with phase 1).
fn multiply(a: &PauliString, b: &PauliString, phase: u8) -> PauliString {
    // accumulate the power of i from single-site products
    let mut power = phase as i32 + if a.negative { 2 } else { 0 } + if b.negative { 2 } else { 0 };
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.ops.len() || j < b.ops.len() {
        let sa = a.ops.get(i).map_or(usize::MAX, |o| o.0);
        let sb = b.ops.get(j).map_or(usize::MAX, |o| o.0);
        if sa < sb {
            ops.push(a.ops[i]);
            i += 1;
        } else if sb < sa {
            ops.push(b.ops[j]);
            j += 1;
        } else {
            let (p, k) = single_product(a.ops[i].1, b.ops[j].1);
            power += k;
            if p != Pauli::I {
                ops.push((sa, p));
            }
            i += 1;
            j += 1;
        }
    }
    let power = power.rem_euclid(4);
    assert!(power % 2 == 0, "product is not Hermitian");
    PauliString { negative: power == 2, ops }
}

/// `p q = i^k r`.
fn single_product(p: Pauli, q: Pauli) -> (Pauli, i32) {
    use Pauli::*;
    match (p, q) {
        (I, o) | (o, I) => (o, 0),
        (X, X) | (Y, Y) | (Z, Z) => (I, 0),
        (X, Y) => (Z, 1),
        (Y, X) => (Z, 3),
        (Y, Z) => (X, 1),
        (Z, Y) => (X, 3),
        (Z, X) => (Y, 1),
        (X, Z) => (Y, 3),
    }
}
