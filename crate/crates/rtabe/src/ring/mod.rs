//! Arithmetic in `R_q = Z_q[x]/(x^n + 1)` plus coefficient sampling.
//!
//! Elements are polynomials of degree < n with coefficients stored in
//! [0, q). The degree n is a power of two and q is a prime with
//! q ≡ 1 (mod 2n), so x^n + 1 splits completely over Z_q and products can
//! be taken through the negacyclic NTT in O(n log n). A schoolbook
//! multiplication is kept alongside as the correctness oracle.

mod modular;
mod ntt;
mod sample;

use std::fmt;

use thiserror::Error;

pub use modular::{add_mod, inv_mod, is_prime_u64, mul_mod, pow_mod, sub_mod};
pub use ntt::{find_primitive_2n_root, NttTable};
pub use sample::GaussianSampler;

/// Largest supported modulus; keeps the schoolbook accumulator within u128.
const MAX_MODULUS: u64 = 1 << 55;

/// Largest supported ring degree.
const MAX_DEGREE: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("ring parameter mismatch: {0}")]
    ParamsMismatch(String),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("no 2n-th root of unity exists for n={n}, q={q}")]
    NoNttSupport { n: usize, q: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("coefficient {value} out of range for modulus {q}")]
    CoefficientOutOfRange { value: u64, q: u64 },
}

/// Which inverse the key generator applies to the attribute elements a_i.
///
/// `PaperLiteral` inverts modulo (x^n + 1, p) and lifts the result to R_q;
/// the product a_i · a_i^{-1} then equals 1 only up to a multiple of p, and
/// that multiple wraps modulo q during decryption. `ExactInverse` uses the
/// full R_q inverse, which makes the zero-noise pipeline exactly correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InverseConvention {
    PaperLiteral,
    ExactInverse,
}

/// Whether error terms are drawn from the discrete Gaussian or fixed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseMode {
    NoiseOn,
    NoiseOff,
}

/// Scheme variant selector: one inverse convention, one noise mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeMode {
    pub inverse_convention: InverseConvention,
    pub noise: NoiseMode,
}

impl SchemeMode {
    pub const fn new(inverse_convention: InverseConvention, noise: NoiseMode) -> Self {
        SchemeMode {
            inverse_convention,
            noise,
        }
    }

    /// The provably correct variant: exact R_q inverses, zero noise.
    pub const fn exact_noiseless() -> Self {
        SchemeMode::new(InverseConvention::ExactInverse, NoiseMode::NoiseOff)
    }

    pub fn noise_on(&self) -> bool {
        self.noise == NoiseMode::NoiseOn
    }

    /// Wire encoding: inverse convention in bit 1, noise flag in bit 0.
    pub fn to_byte(self) -> u8 {
        let conv = match self.inverse_convention {
            InverseConvention::PaperLiteral => 0,
            InverseConvention::ExactInverse => 1,
        };
        let noise = match self.noise {
            NoiseMode::NoiseOff => 0,
            NoiseMode::NoiseOn => 1,
        };
        conv * 2 + noise
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        if b > 3 {
            return None;
        }
        let inverse_convention = if b & 2 == 0 {
            InverseConvention::PaperLiteral
        } else {
            InverseConvention::ExactInverse
        };
        let noise = if b & 1 == 0 {
            NoiseMode::NoiseOff
        } else {
            NoiseMode::NoiseOn
        };
        Some(SchemeMode::new(inverse_convention, noise))
    }

    /// All four variants, in wire-byte order.
    pub fn all() -> [SchemeMode; 4] {
        [0u8, 1, 2, 3].map(|b| SchemeMode::from_byte(b).unwrap())
    }
}

impl fmt::Display for SchemeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conv = match self.inverse_convention {
            InverseConvention::PaperLiteral => "paper-literal",
            InverseConvention::ExactInverse => "exact-inverse",
        };
        let noise = match self.noise {
            NoiseMode::NoiseOn => "noise-on",
            NoiseMode::NoiseOff => "noise-off",
        };
        write!(f, "{conv}+{noise}")
    }
}

/// Ring and scheme parameters: degree n, ciphertext modulus q, plaintext
/// modulus p, Gaussian width sigma, and the scheme variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    n: usize,
    q: u64,
    p: u64,
    sigma: f64,
    pub mode: SchemeMode,
}

impl Params {
    pub fn new(n: usize, q: u64, p: u64, sigma: f64, mode: SchemeMode) -> Result<Self, RingError> {
        if n < 4 || !n.is_power_of_two() || n > MAX_DEGREE {
            return Err(RingError::InvalidParams(format!(
                "n must be a power of two in [4, {MAX_DEGREE}], got {n}"
            )));
        }
        if q >= MAX_MODULUS {
            return Err(RingError::InvalidParams(format!(
                "q must be below 2^55, got {q}"
            )));
        }
        if !is_prime_u64(q) {
            return Err(RingError::InvalidParams(format!("q={q} is not prime")));
        }
        if !(q - 1).is_multiple_of(2 * n as u64) {
            return Err(RingError::InvalidParams(format!(
                "q={q} is not 1 mod 2n={}",
                2 * n
            )));
        }
        if !is_prime_u64(p) {
            return Err(RingError::InvalidParams(format!("p={p} is not prime")));
        }
        if p <= 2 || 2 * p > q {
            return Err(RingError::InvalidParams(format!(
                "p must satisfy 2 < p and 2p <= q, got p={p}, q={q}"
            )));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(RingError::InvalidParams(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        // Warm the twiddle cache; q ≡ 1 (mod 2n) with q prime guarantees a root.
        NttTable::get(n, q).ok_or(RingError::NoNttSupport { n, q })?;
        Ok(Params {
            n,
            q,
            p,
            sigma,
            mode,
        })
    }

    /// Smallest test set: n=16, q=7681, p=3, sigma=3.2.
    pub fn toy(mode: SchemeMode) -> Self {
        Params::new(16, 7681, 3, 3.2, mode).expect("toy parameters are valid")
    }

    /// Desk-scale set: n=256, q=7681, p=3, sigma=3.2.
    pub fn desk(mode: SchemeMode) -> Self {
        Params::new(256, 7681, 3, 3.2, mode).expect("desk parameters are valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Gaussian tail cut ⌈10·sigma⌉; samples beyond it are rejected.
    pub fn tail_bound(&self) -> i64 {
        (10.0 * self.sigma).ceil() as i64
    }

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.n, self.q)
    }

    pub fn one(&self) -> RingElement {
        RingElement::one(self.n, self.q)
    }

    pub fn constant(&self, c: u64) -> RingElement {
        RingElement::constant(c, self.n, self.q)
    }

    /// Uniform element of R_q: every coefficient independent uniform in [0, q).
    pub fn sample_uniform<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        let coeffs = (0..self.n).map(|_| rng.gen_range(0..self.q)).collect();
        RingElement { q: self.q, coeffs }
    }

    pub fn gaussian_sampler(&self) -> GaussianSampler {
        GaussianSampler::new(self.sigma, self.q)
    }

    /// Element with coefficients from the centered discrete Gaussian,
    /// regardless of the noise mode.
    pub fn sample_gaussian<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        self.gaussian_sampler().sample_element(self.n, rng)
    }

    /// Error draw as the scheme sees it: Gaussian in `NoiseOn`, zero in `NoiseOff`.
    pub fn sample_error<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> RingElement {
        match self.mode.noise {
            NoiseMode::NoiseOn => self.sample_gaussian(rng),
            NoiseMode::NoiseOff => self.zero(),
        }
    }

    /// True when `elem` belongs to this ring (same degree and modulus).
    pub fn owns(&self, elem: &RingElement) -> bool {
        elem.q == self.q && elem.coeffs.len() == self.n
    }
}

/// A polynomial Σ `coeffs[j]·x^j` in R_q, coefficients in [0, q).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    q: u64,
    coeffs: Vec<u64>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement(q={}, {:?})", self.q, self.coeffs)
    }
}

impl RingElement {
    pub fn from_coeffs(coeffs: Vec<u64>, q: u64) -> Result<Self, RingError> {
        for &c in &coeffs {
            if c >= q {
                return Err(RingError::CoefficientOutOfRange { value: c, q });
            }
        }
        Ok(RingElement { q, coeffs })
    }

    /// Builds an element from signed values, reducing into [0, q).
    pub fn from_signed(values: &[i64], q: u64) -> Self {
        let coeffs = values
            .iter()
            .map(|&v| v.rem_euclid(q as i64) as u64)
            .collect();
        RingElement { q, coeffs }
    }

    pub fn zero(n: usize, q: u64) -> Self {
        RingElement {
            q,
            coeffs: vec![0; n],
        }
    }

    pub fn one(n: usize, q: u64) -> Self {
        Self::constant(1, n, q)
    }

    pub fn constant(c: u64, n: usize, q: u64) -> Self {
        let mut coeffs = vec![0; n];
        coeffs[0] = c % q;
        RingElement { q, coeffs }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Ring degree n (the coefficient count).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), RingError> {
        if self.q != other.q {
            return Err(RingError::ParamsMismatch(format!(
                "moduli differ: {} vs {}",
                self.q, other.q
            )));
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(RingError::ParamsMismatch(format!(
                "degrees differ: {} vs {}",
                self.coeffs.len(),
                other.coeffs.len()
            )));
        }
        Ok(())
    }

    /// Coefficient-wise (a + b) mod q.
    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| add_mod(a, b, self.q))
            .collect();
        Ok(RingElement { q: self.q, coeffs })
    }

    /// Coefficient-wise (a - b) mod q.
    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| sub_mod(a, b, self.q))
            .collect();
        Ok(RingElement { q: self.q, coeffs })
    }

    /// Multiplication by a scalar c mod q, coefficient-wise.
    pub fn scalar_mul(&self, c: u64) -> Self {
        let c = c % self.q;
        let coeffs = self.coeffs.iter().map(|&a| mul_mod(a, c, self.q)).collect();
        RingElement { q: self.q, coeffs }
    }

    /// Full n²-term negacyclic convolution; the correctness oracle for `mul`.
    pub fn mul_schoolbook(&self, other: &Self) -> Result<Self, RingError> {
        self.check_compatible(other)?;
        let n = self.coeffs.len();
        let q = self.q;
        // Raw products stay below 2^110 and n <= 2^16 terms keep the
        // accumulator below 2^126.
        let mut acc = vec![0u128; 2 * n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] += a as u128 * b as u128;
            }
        }
        let coeffs = (0..n)
            .map(|k| {
                let diff = acc[k] as i128 - acc[k + n] as i128;
                diff.rem_euclid(q as i128) as u64
            })
            .collect();
        Ok(RingElement { q, coeffs })
    }

    fn table(&self) -> Result<std::sync::Arc<NttTable>, RingError> {
        NttTable::get(self.coeffs.len(), self.q).ok_or(RingError::NoNttSupport {
            n: self.coeffs.len(),
            q: self.q,
        })
    }

    /// Ring product via the negacyclic NTT; agrees with `mul_schoolbook`
    /// on all inputs.
    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check_compatible(other)?;
        let table = self.table()?;
        let mut a = self.coeffs.clone();
        let mut b = other.coeffs.clone();
        table.forward(&mut a);
        table.forward(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x = mul_mod(*x, *y, self.q);
        }
        table.inverse(&mut a);
        Ok(RingElement {
            q: self.q,
            coeffs: a,
        })
    }

    /// Forward negacyclic NTT of this element.
    pub fn ntt_forward(&self) -> Result<Self, RingError> {
        let table = self.table()?;
        let mut a = self.coeffs.clone();
        table.forward(&mut a);
        Ok(RingElement {
            q: self.q,
            coeffs: a,
        })
    }

    /// Inverse negacyclic NTT; `a.ntt_forward()?.ntt_inverse()? == a`.
    pub fn ntt_inverse(&self) -> Result<Self, RingError> {
        let table = self.table()?;
        let mut a = self.coeffs.clone();
        table.inverse(&mut a);
        Ok(RingElement {
            q: self.q,
            coeffs: a,
        })
    }

    /// Coefficient-wise product; on NTT-domain operands this is the ring product.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| mul_mod(a, b, self.q))
            .collect();
        Ok(RingElement { q: self.q, coeffs })
    }

    /// Exact inverse in R_q. Fails with `NotInvertible` when any NTT-domain
    /// evaluation is zero; callers resample instead of retrying here.
    pub fn inv_q(&self) -> Result<Self, RingError> {
        let table = self.table()?;
        let mut a = self.coeffs.clone();
        table.forward(&mut a);
        for x in a.iter_mut() {
            *x = inv_mod(*x, self.q).ok_or(RingError::NotInvertible)?;
        }
        table.inverse(&mut a);
        Ok(RingElement {
            q: self.q,
            coeffs: a,
        })
    }

    /// Inverse of this element modulo (x^n + 1, p), lifted back to R_q:
    /// the returned z has coefficients in [0, p) and the mod-p negacyclic
    /// convolution of (a mod p) with z is the constant 1.
    pub fn inv_mod_p(&self, p: u64) -> Result<Self, RingError> {
        let n = self.coeffs.len();
        let reduced: Vec<u64> = self.coeffs.iter().map(|&c| c % p).collect();
        let inv = poly_inverse_mod_p(&reduced, n, p).ok_or(RingError::NotInvertible)?;
        Ok(RingElement {
            q: self.q,
            coeffs: inv,
        })
    }

    /// Centered representatives in (-q/2, q/2], coefficient-wise.
    pub fn center(&self) -> Vec<i64> {
        let q = self.q;
        self.coeffs
            .iter()
            .map(|&c| {
                if c <= q / 2 {
                    c as i64
                } else {
                    c as i64 - q as i64
                }
            })
            .collect()
    }
}

/// Inverse of `a` (coefficients already in [0, p)) in Z_p[x]/(x^n + 1), via
/// the extended Euclidean algorithm over Z_p[x]. Returns n coefficients in
/// [0, p), or `None` when gcd(a, x^n + 1) is not constant.
fn poly_inverse_mod_p(a: &[u64], n: usize, p: u64) -> Option<Vec<u64>> {
    // Polynomials as trimmed little-endian coefficient vectors over Z_p.
    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
            }
        }
        trim(out)
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = sub_mod(x, y, p);
        }
        trim(out)
    }

    // Long division: returns (quotient, remainder).
    fn divmod(num: &[u64], den: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut rem = num.to_vec();
        let dd = den.len() - 1;
        let lead_inv = inv_mod(*den.last().unwrap(), p).unwrap();
        if rem.len() < den.len() {
            return (Vec::new(), trim(rem));
        }
        let mut quot = vec![0u64; rem.len() - dd];
        while rem.len() >= den.len() {
            let shift = rem.len() - den.len();
            let factor = mul_mod(*rem.last().unwrap(), lead_inv, p);
            quot[shift] = factor;
            for (i, &d) in den.iter().enumerate() {
                rem[shift + i] = sub_mod(rem[shift + i], mul_mod(factor, d, p), p);
            }
            rem = trim(rem);
            if rem.is_empty() {
                break;
            }
        }
        (trim(quot), rem)
    }

    // modpoly = x^n + 1
    let mut modpoly = vec![0u64; n + 1];
    modpoly[0] = 1;
    modpoly[n] = 1;

    let mut r0 = modpoly;
    let mut r1 = trim(a.to_vec());
    if r1.is_empty() {
        return None;
    }
    // Bezout coefficients for `a`: r_i ≡ t_i · a (mod x^n + 1, p).
    let mut t0: Vec<u64> = Vec::new();
    let mut t1: Vec<u64> = vec![1];

    while !r1.is_empty() {
        let (quot, rem) = divmod(&r0, &r1, p);
        let t2 = sub(&t0, &mul(&quot, &t1, p), p);
        r0 = std::mem::replace(&mut r1, rem);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.len() != 1 {
        // Non-constant gcd: a shares a factor with x^n + 1 mod p.
        return None;
    }
    let scale = inv_mod(r0[0], p)?;
    let mut out = vec![0u64; n];
    // t0 has degree < n; fold defensively in case of degree-n edge terms.
    for (i, &c) in t0.iter().enumerate() {
        let v = mul_mod(c, scale, p);
        if i < n {
            out[i] = add_mod(out[i], v, p);
        } else {
            out[i - n] = sub_mod(out[i - n], v, p);
        }
    }
    Some(out)
}
