//! Link description, index-bit accounting and channel sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::PowerAllocation;
use crate::error::{Error, Result};
use crate::scalar::{from_db, Scalar};

/// Static link statistics and hardware limits. Powers in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<F> {
    /// Active subcarriers per block.
    pub t: usize,
    /// Total subcarriers per block.
    pub n: usize,
    /// APM (M-PSK) order.
    pub m: u32,
    /// Average noise power at the relay (hop 1).
    pub eta1: F,
    /// Average noise power at the destination (hop 2).
    pub eta2: F,
    /// Average channel power gain of hop 1.
    pub mu1: F,
    /// Average channel power gain of hop 2.
    pub mu2: F,
    pub pt_max: F,
    pub pr_max: F,
}

impl<F: Scalar> SystemParams<F> {
    /// Reference link: `η = (1.3, 1.1)`, `μ = (1.3, 1.5)`, 100 dBW power caps,
    /// QPSK, `N = 2T`.
    pub fn reference(t: usize) -> Self {
        SystemParams {
            t,
            n: 2 * t,
            m: 4,
            eta1: F::lit(1.3),
            eta2: F::lit(1.1),
            mu1: F::lit(1.3),
            mu2: F::lit(1.5),
            pt_max: from_db(F::lit(100.0)),
            pr_max: from_db(F::lit(100.0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 || self.t > self.n {
            return Err(Error::param("T", format!("need 1 <= T <= N, got T={} N={}", self.t, self.n)));
        }
        if self.m < 2 || !self.m.is_power_of_two() {
            return Err(Error::param("M", format!("must be a power of two >= 2, got {}", self.m)));
        }
        let positive = [
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("pt_max", self.pt_max),
            ("pr_max", self.pr_max),
        ];
        for (field, v) in positive {
            if !(v > F::zero() && v.is_finite()) {
                return Err(Error::param(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn t_f(&self) -> F {
        F::from_count(self.t)
    }
}

/// End-to-end SNR of one active subcarrier for channel power gains `g1`, `g2`:
///
/// `γ = Pt·Pr·g1·g2 / (T·Pr·g2·η1 + T²·η2)`.
pub fn snr_end_to_end<F: Scalar>(params: &SystemParams<F>, alloc: &PowerAllocation<F>, g1: F, g2: F) -> F {
    let t = params.t_f();
    let num = alloc.pt * alloc.pr * g1 * g2;
    if num == F::zero() {
        return F::zero();
    }
    num / (t * alloc.pr * g2 * params.eta1 + t * t * params.eta2)
}

/// Per-subcarrier channel power gains of both hops for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw<F> {
    pub g1: Vec<F>,
    pub g2: Vec<F>,
}

/// Seeded Rayleigh-fading gain generator. Gains are exponential with the
/// per-hop means, drawn by inverse CDF.
///
/// `(seed, stream)` pairs give independent, reproducible substreams.
#[derive(Debug, Clone)]
pub struct ChannelSampler<F> {
    rng: ChaCha8Rng,
    mu1: F,
    mu2: F,
    n: usize,
}

impl<F: Scalar> ChannelSampler<F> {
    pub fn new(params: &SystemParams<F>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ChannelSampler {
            rng,
            mu1: params.mu1,
            mu2: params.mu2,
            n: params.n,
        }
    }

    /// One unit-mean exponential variate, `−ln(1 − U)`.
    #[inline]
    pub fn unit_exponential(&mut self) -> F {
        let u: f64 = self.rng.gen();
        F::lit(-(-u).ln_1p())
    }

    #[inline]
    pub fn gain_hop1(&mut self) -> F {
        self.mu1 * self.unit_exponential()
    }

    #[inline]
    pub fn gain_hop2(&mut self) -> F {
        self.mu2 * self.unit_exponential()
    }

    /// Refills `draw` with a fresh block of `N` gains per hop.
    pub fn fill(&mut self, draw: &mut ChannelDraw<F>) {
        draw.g1.clear();
        draw.g2.clear();
        for _ in 0..self.n {
            let g = self.gain_hop1();
            draw.g1.push(g);
        }
        for _ in 0..self.n {
            let g = self.gain_hop2();
            draw.g2.push(g);
        }
    }

    pub fn draw(&mut self) -> ChannelDraw<F> {
        let mut d = ChannelDraw {
            g1: Vec::with_capacity(self.n),
            g2: Vec::with_capacity(self.n),
        };
        self.fill(&mut d);
        d
    }

    /// Uniform integer in `0..bound`.
    pub fn uniform_index(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }
}

/// `count` independent blocks from stream 0 of `seed`.
pub fn sample_channels<F: Scalar>(params: &SystemParams<F>, rng_seed: u64, count: usize) -> Vec<ChannelDraw<F>> {
    let mut sampler = ChannelSampler::new(params, rng_seed, 0);
    (0..count).map(|_| sampler.draw()).collect()
}

/// Maps index bits to subcarrier activation patterns (SAPs).
///
/// Patterns are the first `2^b_s` `t`-subsets of `{1, …, n}` in lexicographic
/// order; the index of a pattern is its lexicographic rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SapCodec {
    pub n: usize,
    pub t: usize,
    /// Index bits per block, `floor(log2 C(n, t))`.
    pub b_s: u32,
    /// APM bits per block, `t·log2 M`.
    pub b_m: u32,
    /// `b_s + b_m`.
    pub b: u32,
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc·(n−i) is divisible by (i+1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

impl SapCodec {
    /// Largest block size accepted; keeps every pattern index inside `u64`.
    pub const MAX_N: usize = 64;

    pub fn new(n: usize, t: usize, m: u32) -> Result<Self> {
        if n == 0 || n > Self::MAX_N {
            return Err(Error::param("N", format!("must lie in 1..={}, got {n}", Self::MAX_N)));
        }
        if t < 1 || t > n {
            return Err(Error::param("T", format!("need 1 <= T <= N, got T={t} N={n}")));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::param("M", format!("must be a power of two >= 2, got {m}")));
        }
        let combos = binomial(n, t);
        let b_s = 127 - combos.leading_zeros();
        let b_m = t as u32 * m.trailing_zeros();
        Ok(SapCodec {
            n,
            t,
            b_s,
            b_m,
            b: b_s + b_m,
        })
    }

    pub fn for_params<F: Scalar>(params: &SystemParams<F>) -> Result<Self> {
        Self::new(params.n, params.t, params.m)
    }

    /// Number of patterns in use, `2^b_s`.
    pub fn capacity(&self) -> u64 {
        1u64 << self.b_s
    }

    /// Active subcarrier positions (1-based, ascending) for `index`.
    pub fn encode(&self, index: u64) -> Result<Vec<usize>> {
        if index >= self.capacity() {
            return Err(Error::SapIndexOutOfRange {
                index,
                capacity: self.capacity(),
            });
        }
        let mut rest = index as u128;
        let mut positions = Vec::with_capacity(self.t);
        let mut next = 1;
        for slot in 0..self.t {
            let remaining = self.t - slot - 1;
            let mut c = next;
            loop {
                let block = binomial(self.n - c, remaining);
                if rest < block {
                    break;
                }
                rest -= block;
                c += 1;
            }
            positions.push(c);
            next = c + 1;
        }
        Ok(positions)
    }

    /// Lexicographic rank of a pattern; the inverse of [`SapCodec::encode`].
    pub fn decode(&self, positions: &[usize]) -> Result<u64> {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        let valid = sorted.len() == self.t
            && sorted.windows(2).all(|w| w[0] < w[1])
            && sorted.first().is_some_and(|&p| p >= 1)
            && sorted.last().is_some_and(|&p| p <= self.n);
        if !valid {
            return Err(Error::SapNotInImage(positions.to_vec()));
        }
        let mut rank: u128 = 0;
        let mut next = 1;
        for (slot, &p) in sorted.iter().enumerate() {
            let remaining = self.t - slot - 1;
            for c in next..p {
                rank += binomial(self.n - c, remaining);
            }
            next = p + 1;
        }
        if rank >= self.capacity() as u128 {
            return Err(Error::SapNotInImage(positions.to_vec()));
        }
        Ok(rank as u64)
    }
}
