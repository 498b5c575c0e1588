use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::BigRational;

/// Bail-out thresholds for the constants recursion.
#[derive(Clone, Copy, Debug)]
pub struct ConstantLimits {
    /// Largest bit length allowed for any intermediate integer.
    pub max_bits: u64,
    /// Largest `m(m−1)` for which the inner sequence is unrolled.
    pub max_steps: u64,
}

impl Default for ConstantLimits {
    fn default() -> Self {
        ConstantLimits { max_bits: 1 << 20, max_steps: 1 << 16 }
    }
}

/// `M`, `η = (ε/2)^{eta_exponent}` and `δ` for one level.
#[derive(Clone, Debug, PartialEq)]
pub struct Constants {
    pub big_m: BigUint,
    pub eta_exponent: BigUint,
    pub log2_eta: f64,
    pub log2_delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstantsOutcome {
    Computed(Constants),
    /// Some intermediate value exceeded the limits.
    Astronomical(String),
}

/// The constants for `(r, ε, k, m)` with the sequences `M_h` and the
/// exponents of `η_h = (ε/2)^{e_h}`, `h = 0..=m(m−1)`; entries not reached
/// before a bail-out are `None`. Both sequences are empty for `k = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsTable {
    pub r: usize,
    pub k: usize,
    pub m: u64,
    pub eps: BigRational,
    pub m_seq: Vec<Option<BigUint>>,
    pub eta_seq: Vec<Option<BigUint>>,
    pub outcome: ConstantsOutcome,
}

impl ConstantsTable {
    pub fn constants(&self) -> Option<&Constants> {
        match &self.outcome {
            ConstantsOutcome::Computed(c) => Some(c),
            ConstantsOutcome::Astronomical(_) => None,
        }
    }

    /// `log₂ η_h`.
    pub fn log2_eta_h(&self, h: usize) -> Option<f64> {
        self.eta_seq.get(h)?.as_ref().map(|e| big_to_f64(e) * self.log2_half_eps())
    }

    fn log2_half_eps(&self) -> f64 {
        log2_ratio(&self.eps) - 1.0
    }
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `log₂ x` from the leading 64 bits.
fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().map_or(f64::NEG_INFINITY, |v| (v as f64).log2());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).log2() + shift as f64
}

fn log2_ratio(r: &BigRational) -> f64 {
    log2_big(&r.numer().magnitude().clone()) - log2_big(&r.denom().magnitude().clone())
}

struct Recursion {
    eps: BigRational,
    log2_half_eps: f64,
    limits: ConstantLimits,
    memo: HashMap<(usize, BigUint), std::result::Result<Constants, String>>,
}

struct Level {
    m_seq: Vec<Option<BigUint>>,
    eta_seq: Vec<Option<BigUint>>,
    result: std::result::Result<Constants, String>,
}

impl Recursion {
    fn memoised(&mut self, k: usize, m: &BigUint) -> std::result::Result<Constants, String> {
        if let Some(c) = self.memo.get(&(k, m.clone())) {
            return c.clone();
        }
        let c = self.level(k, m).result;
        self.memo.insert((k, m.clone()), c.clone());
        c
    }

    fn check_size(&self, x: &BigUint, what: &str) -> std::result::Result<(), String> {
        if x.bits() > self.limits.max_bits {
            return Err(format!("{what} has {} bits, above the limit of {}", x.bits(), self.limits.max_bits));
        }
        Ok(())
    }

    /// `⌈c · (2/ε)^e⌉`.
    fn scaled_ceil(&self, c: &BigUint, e: &BigUint) -> std::result::Result<BigUint, String> {
        let est = big_to_f64(e) * -self.log2_half_eps + log2_big(c);
        if !(est <= self.limits.max_bits as f64) {
            return Err(format!("(2/eps)^{e} needs about 2^{:.3e} bits", est.log2()));
        }
        let e = e.to_usize().expect("bounded by the estimate");
        let p = self.eps.numer().magnitude().clone();
        let q = self.eps.denom().magnitude().clone();
        let num = c * num_traits::pow(q * 2u32, e);
        let den = num_traits::pow(p, e);
        Ok(num.div_ceil(&den))
    }

    fn level(&mut self, k: usize, m: &BigUint) -> Level {
        let log2_half_eps = self.log2_half_eps;
        if k == 1 {
            let e = m * (m - 1u32) / 2u32;
            let log2_eta = big_to_f64(&e) * log2_half_eps;
            let c = Constants { big_m: m.clone(), eta_exponent: e, log2_eta, log2_delta: 0.0 };
            return Level { m_seq: Vec::new(), eta_seq: Vec::new(), result: Ok(c) };
        }
        let steps = m * (m - 1u32);
        let Some(steps) = steps.to_u64().filter(|&s| s <= self.limits.max_steps) else {
            return Level {
                m_seq: Vec::new(),
                eta_seq: Vec::new(),
                result: Err(format!("m(m-1) = {steps} steps exceed the limit of {}", self.limits.max_steps)),
            };
        };
        let steps = steps as usize;
        let mut m_seq: Vec<Option<BigUint>> = vec![None; steps + 1];
        let mut eta_seq: Vec<Option<BigUint>> = vec![None; steps + 1];
        let mut inner: Vec<Option<Constants>> = vec![None; steps + 1];
        m_seq[steps] = Some(m.clone());
        for h in (1..=steps).rev() {
            let m_h = m_seq[h].clone().expect("filled backwards");
            let step = self.memoised(k - 1, &m_h).and_then(|c| {
                let ceil = self.scaled_ceil(&(BigUint::from(k as u64 - 1) * &m_h), &c.eta_exponent)?;
                let next = &c.big_m + ceil;
                self.check_size(&next, &format!("M_{}", h - 1))?;
                Ok((next, c))
            });
            match step {
                Ok((next, c)) => {
                    m_seq[h - 1] = Some(next);
                    inner[h] = Some(c);
                }
                Err(why) => return Level { m_seq, eta_seq, result: Err(why) },
            }
        }
        let big_m = m_seq[0].clone().expect("complete");
        let km1 = (k - 1) as u32;
        let e0 = m * m * num_traits::pow(big_m.clone(), 2 * km1 as usize);
        if let Err(why) = self.check_size(&e0, "eta_0 exponent") {
            return Level { m_seq, eta_seq, result: Err(why) };
        }
        eta_seq[0] = Some(e0.clone());
        let mut log2_delta = -2.0 * log2_big(m) - 3.0 * km1 as f64 * log2_big(&big_m) + big_to_f64(&e0) * log2_half_eps;
        for h in 1..=steps {
            let c = inner[h].as_ref().expect("complete");
            let prev = eta_seq[h - 1].clone().expect("filled forwards");
            eta_seq[h] = Some(prev + &c.eta_exponent);
            log2_delta = log2_delta.min(c.log2_delta);
        }
        let eta_exponent = eta_seq[steps].clone().expect("complete");
        let log2_eta = big_to_f64(&eta_exponent) * log2_half_eps;
        if !log2_eta.is_finite() || !log2_delta.is_finite() {
            return Level { m_seq, eta_seq, result: Err("log2 of eta or delta is outside f64 range".into()) };
        }
        Level { m_seq, eta_seq, result: Ok(Constants { big_m, eta_exponent, log2_eta, log2_delta }) }
    }
}

/// Evaluates the constants of the fortress proposition for `(r, ε, k, m)`.
///
/// `M` is exact; `η` is kept as an exponent of `ε/2`, `δ` as `log₂ δ`.
pub fn compute_constants<S: Scalar>(r: usize, eps: &S, k: usize, m: u64, limits: ConstantLimits) -> Result<ConstantsTable> {
    if r < 2 || m < 2 || k < 1 || k > r {
        return Err(Error::arg(format!("need r >= 2, m >= 2 and 1 <= k <= r, got r = {r}, k = {k}, m = {m}")));
    }
    let exact = eps.to_exact().ok_or_else(|| Error::arg(format!("epsilon {eps} has no exact value")))?;
    if !exact.is_positive() || exact >= BigRational::one() {
        return Err(Error::arg(format!("epsilon {eps} outside (0,1)")));
    }
    debug_assert!(!exact.denom().is_zero() && exact.numer() > &BigInt::zero());
    let mut rec = Recursion { log2_half_eps: log2_ratio(&exact) - 1.0, eps: exact.clone(), limits, memo: HashMap::new() };
    let level = rec.level(k, &BigUint::from(m));
    let outcome = match level.result {
        Ok(c) => ConstantsOutcome::Computed(c),
        Err(why) => ConstantsOutcome::Astronomical(why),
    };
    Ok(ConstantsTable { r, k, m, eps: exact, m_seq: level.m_seq, eta_seq: level.eta_seq, outcome })
}
