//! Multi-modular solution of square rational systems.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::Rational;

/// Primes skipped for dividing the determinant before giving up.
const UNLUCKY_LIMIT: usize = 64;

const CACHED_PRIMES: usize = 256;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for 64-bit integers.
fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for b in BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn primes_below(limit: u64) -> impl Iterator<Item = u64> {
    let start = (limit - 2) | 1;
    (0..).map(move |i| start - 2 * i).take_while(|&n| n > 2).filter(|&n| is_prime(n))
}

/// Primes below 2^62, largest first.
fn primes() -> impl Iterator<Item = u64> {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| primes_below(1 << 62).take(CACHED_PRIMES).collect());
    let last = *cache.last().expect("prime cache is non-empty");
    cache.iter().copied().chain(primes_below(last))
}

fn residue(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in a word")
}

/// Determinant and solution of `a x = b` modulo `p`, or `None` if `a` is
/// singular modulo `p`.
fn solve_mod(a: &[Vec<u64>], b: &[u64], p: u64) -> Option<(u64, Vec<u64>)> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let mut det = 1u64;
    for k in 0..n {
        let pivot = (k..n).find(|&i| m[i][k] != 0)?;
        if pivot != k {
            m.swap(k, pivot);
            rhs.swap(k, pivot);
            det = (p - det) % p;
        }
        det = mul_mod(det, m[k][k], p);
        let inv = inverse_mod(m[k][k], p);
        let (upper, lower) = m.split_at_mut(k + 1);
        let row_k = &upper[k];
        for (offset, row) in lower.iter_mut().enumerate() {
            if row[k] == 0 {
                continue;
            }
            let f = mul_mod(row[k], inv, p);
            for j in k..n {
                if row_k[j] != 0 {
                    row[j] = (row[j] + p - mul_mod(f, row_k[j], p)) % p;
                }
            }
            let i = k + 1 + offset;
            rhs[i] = (rhs[i] + p - mul_mod(f, rhs[k], p)) % p;
        }
    }
    let mut x = vec![0u64; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            if m[k][j] != 0 {
                acc = (acc + p - mul_mod(m[k][j], x[j], p)) % p;
            }
        }
        x[k] = mul_mod(acc, inverse_mod(m[k][k], p), p);
    }
    Some((det, x))
}

/// Incremental Chinese remaindering of a vector of integers.
struct Crt {
    modulus: BigInt,
    values: Vec<BigInt>,
}

impl Crt {
    fn new(len: usize) -> Self {
        Crt { modulus: BigInt::one(), values: vec![BigInt::zero(); len] }
    }

    fn absorb(&mut self, residues: &[u64], p: u64) {
        let inv = inverse_mod(residue(&self.modulus, p), p);
        for (v, &r) in self.values.iter_mut().zip(residues) {
            let t = mul_mod((r + p - residue(v, p)) % p, inv, p);
            *v += &self.modulus * t;
        }
        self.modulus *= p;
    }

    /// Values in the symmetric range around zero.
    fn finish(self) -> Vec<BigInt> {
        let half = &self.modulus >> 1u32;
        self.values.into_iter().map(|v| if v > half { v - &self.modulus } else { v }).collect()
    }
}

/// Solves the square system `a x = b` exactly. `None` when the system is
/// singular (or too many primes divide its determinant).
pub(super) fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = b.len();
    if n == 0 {
        return Some(Vec::new());
    }
    // Clear denominators row by row.
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let mut bound_bits = 0u64;
    for (row, value) in a.iter().zip(b) {
        let scale = row.iter().chain([value]).fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let ints: Vec<BigInt> = row.iter().map(|r| r.numer() * (&scale / r.denom())).collect();
        let target = value.numer() * (&scale / value.denom());
        let norm_sq: BigInt = ints.iter().chain([&target]).map(|v| v * v).sum();
        bound_bits += norm_sq.bits().div_ceil(2);
        rows.push(ints);
        rhs.push(target);
    }

    // Determinant and numerators are bounded by 2^bound_bits in magnitude.
    let mut crt = Crt::new(n + 1);
    let mut unlucky = 0;
    for p in primes() {
        if crt.modulus.bits() >= bound_bits + 2 {
            break;
        }
        let a_p: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| residue(v, p)).collect()).collect();
        let b_p: Vec<u64> = rhs.iter().map(|v| residue(v, p)).collect();
        let Some((det, x)) = solve_mod(&a_p, &b_p, p) else {
            unlucky += 1;
            if unlucky > UNLUCKY_LIMIT {
                return None;
            }
            continue;
        };
        let mut residues: Vec<u64> = x.iter().map(|&xi| mul_mod(det, xi, p)).collect();
        residues.push(det);
        crt.absorb(&residues, p);
    }
    let mut values = crt.finish();
    let det = values.pop().expect("determinant slot");
    if det.is_zero() {
        return None;
    }
    Some(values.into_iter().map(|numer| Rational::new(numer, det.clone())).collect())
}
