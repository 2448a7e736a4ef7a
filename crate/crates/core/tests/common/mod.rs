#![allow(dead_code)]

use qsective::qfree::{validate_instance, ProblemInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SMALL_PRIMES: [i128; 4] = [2, 3, 5, 7];

/// `2^e2 3^e3 5^e5 7^e7` for exponents below 3, without 1.
pub fn cube_free_pool() -> Vec<i128> {
    let mut out = Vec::new();
    for code in 1..81u32 {
        let mut c = code;
        let mut v = 1i128;
        for p in SMALL_PRIMES {
            v *= p.pow(c % 3);
            c /= 3;
        }
        out.push(v);
    }
    out.sort_unstable();
    out
}

fn subsets(
    items: &[i128],
    size: usize,
    start: usize,
    cur: &mut Vec<i128>,
    out: &mut Vec<Vec<i128>>,
) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i]);
        subsets(items, size, i + 1, cur, out);
        cur.pop();
    }
}

pub fn all_subsets(items: &[i128], size: usize) -> Vec<Vec<i128>> {
    let mut out = Vec::new();
    subsets(items, size, 0, &mut Vec::new(), &mut out);
    out
}

/// q = 3 instances with entries from [`cube_free_pool`] and `l <= 5`:
/// every 4- and 5-subset over each two-prime support, plus a fixed
/// pseudo-random sample over the whole pool.
pub fn agreement_corpus() -> Vec<ProblemInstance> {
    let pool = cube_free_pool();
    let mut entries: Vec<Vec<i128>> = Vec::new();
    for (i, &p) in SMALL_PRIMES.iter().enumerate() {
        for &r in &SMALL_PRIMES[i + 1..] {
            let local: Vec<i128> = pool
                .iter()
                .copied()
                .filter(|&v| {
                    let mut w = v;
                    for d in [p, r] {
                        while w % d == 0 {
                            w /= d;
                        }
                    }
                    w == 1
                })
                .collect();
            for l in [4, 5] {
                entries.extend(all_subsets(&local, l));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for _ in 0..300 {
        let l = rng.gen_range(1..=5);
        let mut pick: Vec<i128> = pool.choose_multiple(&mut rng, l).copied().collect();
        pick.sort_unstable();
        entries.push(pick);
    }
    entries.sort();
    entries.dedup();
    entries
        .iter()
        .map(|e| validate_instance(3, e).expect("pool entries are cube-free"))
        .collect()
}

/// Smallest `x` in `[0, m)` with `x^q ≡ a (mod m)`, using plain `u128`
/// products; `m` must stay below `2^63`.
pub fn naive_root(a: i128, q: u64, m: u128) -> Option<u128> {
    let target = a.rem_euclid(m as i128) as u128;
    (0..m).find(|&x| naive_pow(x, q, m) == target)
}

pub fn naive_pow(x: u128, e: u64, m: u128) -> u128 {
    let mut acc = 1 % m;
    for _ in 0..e {
        acc = acc * (x % m) % m;
    }
    acc
}

/// `∏ (x^q - a_j) mod m` with plain `u128` products.
pub fn naive_product(entries: &[i128], q: u64, x: u128, m: u128) -> u128 {
    let xq = naive_pow(x, q, m);
    entries.iter().fold(1 % m, |acc, &a| {
        let ar = a.rem_euclid(m as i128) as u128;
        acc * ((xq + m - ar) % m) % m
    })
}

pub fn naive_is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}
