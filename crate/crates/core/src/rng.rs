//! Deterministic random number generation.
//!
//! Everything downstream of a 64-bit master seed is a pure function of that
//! seed, so runs reproduce bit-for-bit across platforms and worker counts.
//! Streams are derived by a fixed mixing function: fold each word into a
//! SplitMix64 state and take the final output (see [`mix`]). The generator
//! itself is xoshiro256++.

/// One SplitMix64 step: advances `state` and returns the next output.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed seed-mixing function: start from a constant SplitMix64 state,
/// XOR in each word and step. `mix(&[master, n, trial])` is the per-trial
/// seed used throughout; `mix(&[master, label])` derives purpose streams.
pub fn mix(words: &[u64]) -> u64 {
    let mut state = 0xD6E8_FEB8_6659_FD93;
    let mut out = splitmix64(&mut state);
    for &w in words {
        state ^= w;
        out = splitmix64(&mut state);
    }
    out
}

/// xoshiro256++ generator seeded through SplitMix64.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut st = seed;
        let mut s = [0u64; 4];
        for w in s.iter_mut() {
            *w = splitmix64(&mut st);
        }
        if s == [0, 0, 0, 0] {
            s[0] = 0x9E37_79B9_7F4A_7C15;
        }
        Rng { s }
    }

    /// Stream derived from (seed, label) via [`mix`].
    pub fn from_seed_label(seed: u64, label: u64) -> Self {
        Rng::from_seed(mix(&[seed, label]))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform f64 in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) by masked rejection.
    pub fn below_u128(&mut self, bound: u128) -> u128 {
        debug_assert!(bound > 0);
        if bound == 1 {
            return 0;
        }
        let bits = 128 - (bound - 1).leading_zeros();
        let mask: u128 = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
        loop {
            let raw = if bits <= 64 {
                self.next_u64() as u128
            } else {
                ((self.next_u64() as u128) << 64) | self.next_u64() as u128
            };
            let cand = raw & mask;
            if cand < bound {
                return cand;
            }
        }
    }

    /// Uniform integer in [0, bound), one word per candidate.
    pub fn below_u64(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        if bound == 1 {
            return 0;
        }
        let bits = 64 - (bound - 1).leading_zeros();
        let mask: u64 = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        loop {
            let cand = self.next_u64() & mask;
            if cand < bound {
                return cand;
            }
        }
    }

    /// Uniform f64 in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Partial means stay below this cap so the inversion start value
/// q^chunk never underflows (e^-256 is comfortably normal).
const INVERSION_MEAN_CAP: f64 = 256.0;

/// Exact Binomial(trials, p) sample.
///
/// The trial count is split into chunks whose individual means stay small,
/// and each chunk is drawn by CDF inversion; the sum over a partition of the
/// trials is exactly Binomial(trials, p). No Poisson approximation anywhere.
pub fn binomial(rng: &mut Rng, trials: u128, p: f64) -> u128 {
    assert!((0.0..=1.0).contains(&p), "binomial: p out of [0,1]");
    if trials == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return trials;
    }
    if p > 0.5 {
        return trials - binomial(rng, trials, 1.0 - p);
    }
    let chunk_cap = {
        let c = (INVERSION_MEAN_CAP / p).floor();
        if c >= u128::MAX as f64 { u128::MAX } else { (c as u128).max(1) }
    };
    let mut remaining = trials;
    let mut total: u128 = 0;
    while remaining > 0 {
        let chunk = remaining.min(chunk_cap);
        total += binomial_inversion(rng, chunk, p);
        remaining -= chunk;
    }
    total
}

/// CDF inversion for a chunk with mean at most ~INVERSION_MEAN_CAP.
fn binomial_inversion(rng: &mut Rng, n: u128, p: f64) -> u128 {
    let nf = n as f64;
    let q = 1.0 - p;
    let s = p / q;
    // q^n = exp(n ln(1-p)); ln_1p keeps tiny p accurate.
    let mut r = (nf * (-p).ln_1p()).exp();
    let mut u = rng.next_f64();
    let mut x: u128 = 0;
    while u > r {
        u -= r;
        x += 1;
        if x > n {
            return n;
        }
        r *= s * (nf - (x as f64 - 1.0)) / x as f64;
        if r <= 0.0 || !r.is_finite() {
            // Tail truncated below 2^-1074; probability-negligible.
            return x - 1;
        }
    }
    x.min(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_is_stable_and_sensitive() {
        let a = mix(&[7, 100, 0]);
        let b = mix(&[7, 100, 0]);
        let c = mix(&[7, 100, 1]);
        let d = mix(&[7, 101, 0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn streams_reproduce() {
        let mut r1 = Rng::from_seed_label(42, 3);
        let mut r2 = Rng::from_seed_label(42, 3);
        for _ in 0..1000 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }

    #[test]
    fn below_bounds_respected() {
        let mut rng = Rng::from_seed(1);
        for bound in [1u128, 2, 3, 10, 1 << 40, u64::MAX as u128 + 5] {
            for _ in 0..200 {
                assert!(rng.below_u128(bound) < bound);
            }
        }
    }

    #[test]
    fn binomial_degenerate_cases() {
        let mut rng = Rng::from_seed(9);
        assert_eq!(binomial(&mut rng, 100, 0.0), 0);
        assert_eq!(binomial(&mut rng, 100, 1.0), 100);
        assert_eq!(binomial(&mut rng, 0, 0.3), 0);
    }

    // Exact pmf check on Binomial(4, 0.5): frequencies within 5 standard
    // errors of [1,4,6,4,1]/16 over 200k draws.
    #[test]
    fn binomial_small_matches_exact_pmf() {
        let mut rng = Rng::from_seed(1234);
        let trials = 200_000usize;
        let mut counts = [0u64; 5];
        for _ in 0..trials {
            counts[binomial(&mut rng, 4, 0.5) as usize] += 1;
        }
        let pmf = [1.0, 4.0, 6.0, 4.0, 1.0].map(|x| x / 16.0);
        for j in 0..5 {
            let freq = counts[j] as f64 / trials as f64;
            let se = (pmf[j] * (1.0 - pmf[j]) / trials as f64).sqrt();
            assert!(
                (freq - pmf[j]).abs() <= 5.0 * se,
                "j={j}: freq {freq} vs pmf {}",
                pmf[j]
            );
        }
    }

    // Large trial count with tiny p: mean and variance within 5 SE.
    #[test]
    fn binomial_large_mean_moments() {
        let mut rng = Rng::from_seed(77);
        let n: u128 = 1_666_616_670_000; // ~C(100000, 3) / 100
        let p = 2.3e-9;
        let mean = n as f64 * p;
        let reps = 2000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let x = binomial(&mut rng, n, p) as f64;
            sum += x;
            sumsq += x * x;
        }
        let emp_mean = sum / reps as f64;
        let emp_var = sumsq / reps as f64 - emp_mean * emp_mean;
        let se_mean = (mean / reps as f64).sqrt();
        assert!(
            (emp_mean - mean).abs() <= 5.0 * se_mean,
            "mean {emp_mean} vs {mean}"
        );
        // Var = np(1-p) ~ mean here; generous 10% band.
        assert!((emp_var / mean - 1.0).abs() <= 0.1, "var {emp_var} vs {mean}");
    }

    #[test]
    fn binomial_complement_route() {
        let mut rng = Rng::from_seed(5);
        let reps = 100_000;
        let mut sum = 0u128;
        for _ in 0..reps {
            sum += binomial(&mut rng, 10, 0.9);
        }
        let emp = sum as f64 / reps as f64;
        let se = (10.0 * 0.9 * 0.1 / reps as f64).sqrt();
        assert!((emp - 9.0).abs() <= 5.0 * se);
    }
}
