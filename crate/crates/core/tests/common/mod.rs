//! Independent oracles and instance builders shared by the integration
//! tests. Nothing here calls the library's evaluation code.

#![allow(dead_code)]

use kselect::{DiscreteDistribution, RationalDistribution, SeededRng};
use num_bigint::BigInt;
use num_rational::BigRational;

/// A variable with integer values and integer weights (probability of atom
/// `j` is `weights[j] / sum(weights)`). Atoms may repeat values.
#[derive(Clone, Debug)]
pub struct IntVar {
    pub values: Vec<u64>,
    pub weights: Vec<u64>,
}

impl IntVar {
    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn to_rational(&self) -> RationalDistribution {
        let t = self.total();
        RationalDistribution::new(self.values.iter().zip(&self.weights).map(|(&v, &w)| {
            (
                BigRational::from_integer(BigInt::from(v)),
                BigRational::new(BigInt::from(w), BigInt::from(t)),
            )
        }))
        .unwrap()
    }

    pub fn to_float(&self) -> DiscreteDistribution {
        let t = self.total() as f64;
        DiscreteDistribution::new(self.values.iter().zip(&self.weights).map(|(&v, &w)| (v as f64, w as f64 / t))).unwrap()
    }
}

pub fn random_int_var(rng: &mut SeededRng, max_support: usize, max_value: u64) -> IntVar {
    let m = rng.int_in(1, max_support as u64) as usize;
    IntVar {
        values: (0..m).map(|_| rng.int_in(0, max_value)).collect(),
        weights: (0..m).map(|_| rng.int_in(1, 9)).collect(),
    }
}

/// Exact `(E[max], E[smax])` by walking every joint outcome with integer
/// arithmetic; the result is `sum / prod(total weights)`.
pub fn enumerate_order_stats(vars: &[IntVar]) -> (BigRational, BigRational) {
    let n = vars.len();
    let mut idx = vec![0usize; n];
    let (mut s_max, mut s_smax) = (0u128, 0u128);
    let mut vals = vec![0u64; n];
    loop {
        let mut weight: u128 = 1;
        for (i, x) in vars.iter().enumerate() {
            weight *= x.weights[idx[i]] as u128;
            vals[i] = x.values[idx[i]];
        }
        let (mut top, mut second) = (0u64, 0u64);
        for &v in &vals {
            if v > top {
                second = top;
                top = v;
            } else if v > second {
                second = v;
            }
        }
        s_max += weight * top as u128;
        if n >= 2 {
            s_smax += weight * second as u128;
        }
        let mut c = 0;
        loop {
            if c == n {
                let denom: BigInt = vars.iter().map(|x| BigInt::from(x.total())).product();
                return (
                    BigRational::new(BigInt::from(s_max), denom.clone()),
                    BigRational::new(BigInt::from(s_smax), denom),
                );
            }
            idx[c] += 1;
            if idx[c] < vars[c].values.len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// `E[max]` of `r` risky variables (10 w.p. 1/10) plus `s` constants 11/10,
/// from `E[max] = 10 Pr[some risky hits] + 1.1 Pr[none hits and s > 0]`.
pub fn team_value(r: u32, s: u32) -> BigRational {
    let miss = BigRational::new(9.into(), 10.into()).pow(r as i32);
    let ten = BigRational::from_integer(10.into());
    let hit = BigRational::from_integer(1.into()) - &miss;
    let safe = if s > 0 {
        BigRational::new(11.into(), 10.into())
    } else {
        BigRational::from_integer(0.into())
    };
    ten * hit + safe * miss
}

pub fn ratio_f64(r: &BigRational) -> f64 {
    kselect::scalar::ratio_to_f64(r)
}
