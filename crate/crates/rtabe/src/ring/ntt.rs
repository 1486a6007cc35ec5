//! Negacyclic number-theoretic transform over Z_q[x]/(x^n + 1).
//!
//! For a power-of-two degree n and a prime q ≡ 1 (mod 2n), the polynomial
//! x^n + 1 splits completely over Z_q and the ring is isomorphic to n copies
//! of Z_q. The forward transform evaluates a polynomial at odd powers of a
//! primitive 2n-th root of unity ψ (in bit-reversed order), so a negacyclic
//! product becomes a pointwise product. Twiddle factors carry the ψ powers,
//! which avoids the separate pre/post twist passes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use once_cell::sync::Lazy;

use super::modular::{add_mod, bit_reverse, inv_mod, mul_mod, pow_mod, sub_mod};

/// Precomputed twiddle tables for one (n, q) pair. Read-only once built.
#[derive(Debug)]
pub struct NttTable {
    pub n: usize,
    pub q: u64,
    /// ψ^bitrev(i) for i in 0..n.
    psi_rev: Vec<u64>,
    /// ψ^{-bitrev(i)} for i in 0..n.
    psi_inv_rev: Vec<u64>,
    /// n^{-1} mod q.
    n_inv: u64,
}

type TableCache = HashMap<(usize, u64), Arc<NttTable>>;

static TABLE_CACHE: Lazy<RwLock<TableCache>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// Finds a primitive 2n-th root of unity mod q, or `None` when q ≢ 1 (mod 2n).
///
/// Since n is a power of two, x = c^((q-1)/2n) with x^n ≡ -1 has order
/// exactly 2n; candidates are scanned until one passes.
pub fn find_primitive_2n_root(n: usize, q: u64) -> Option<u64> {
    let two_n = 2 * n as u64;
    if n == 0 || !n.is_power_of_two() || !(q - 1).is_multiple_of(two_n) {
        return None;
    }
    let exp = (q - 1) / two_n;
    for c in 2..q {
        let x = pow_mod(c, exp, q);
        if pow_mod(x, n as u64, q) == q - 1 {
            return Some(x);
        }
    }
    None
}

impl NttTable {
    fn build(n: usize, q: u64) -> Option<NttTable> {
        let psi = find_primitive_2n_root(n, q)?;
        let psi_inv = inv_mod(psi, q)?;
        let bits = n.trailing_zeros();
        let mut psi_rev = vec![0u64; n];
        let mut psi_inv_rev = vec![0u64; n];
        let mut fwd = 1u64;
        let mut inv = 1u64;
        let mut psi_pows = vec![0u64; n];
        let mut psi_inv_pows = vec![0u64; n];
        for i in 0..n {
            psi_pows[i] = fwd;
            psi_inv_pows[i] = inv;
            fwd = mul_mod(fwd, psi, q);
            inv = mul_mod(inv, psi_inv, q);
        }
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[i] = psi_pows[r];
            psi_inv_rev[i] = psi_inv_pows[r];
        }
        Some(NttTable {
            n,
            q,
            psi_rev,
            psi_inv_rev,
            n_inv: inv_mod(n as u64, q)?,
        })
    }

    /// Fetches (building on first use) the shared table for (n, q).
    pub fn get(n: usize, q: u64) -> Option<Arc<NttTable>> {
        if let Some(t) = TABLE_CACHE.read().unwrap().get(&(n, q)) {
            return Some(Arc::clone(t));
        }
        let built = Arc::new(NttTable::build(n, q)?);
        let mut cache = TABLE_CACHE.write().unwrap();
        Some(Arc::clone(
            cache.entry((n, q)).or_insert_with(|| Arc::clone(&built)),
        ))
    }

    /// In-place forward transform (Cooley-Tukey butterflies).
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t /= 2;
            for i in 0..m {
                let j1 = 2 * i * t;
                let s = self.psi_rev[m + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_mod(a[j + t], s, q);
                    a[j] = add_mod(u, v, q);
                    a[j + t] = sub_mod(u, v, q);
                }
            }
            m *= 2;
        }
    }

    /// In-place inverse transform (Gentleman-Sande butterflies).
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m / 2;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, q);
                    a[j + t] = mul_mod(sub_mod(u, v, q), s, q);
                }
                j1 += 2 * t;
            }
            t *= 2;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_mod(*x, self.n_inv, q);
        }
    }
}
