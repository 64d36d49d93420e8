//! Smallest-prime-factor sieve used for bulk factorization in the census loop.

use crate::arith::factor_trial;

/// Anything that can factor a positive integer into ascending prime powers.
pub trait Factorizer: Sync {
    fn factor(&self, n: u64) -> Vec<(u64, u32)>;
}

/// Plain trial division; fine for one-off queries.
#[derive(Debug, Default, Clone, Copy)]
pub struct TrialDivision;

impl Factorizer for TrialDivision {
    fn factor(&self, n: u64) -> Vec<(u64, u32)> {
        factor_trial(n)
    }
}

/// `spf[n]` is the least prime dividing `n` for `2 <= n <= limit`.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Self {
        assert!(limit < u32::MAX as u64, "sieve limit must fit in u32");
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || i * p as usize > n {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        FactorSieve { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Least prime factor of `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf(n) == n
    }

    /// Number of distinct prime factors.
    pub fn omega(&self, n: u64) -> u32 {
        self.factor(n).len() as u32
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&n| self.spf(n) == n)
    }
}

impl Factorizer for FactorSieve {
    fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        if n > self.limit {
            return factor_trial(n);
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}
