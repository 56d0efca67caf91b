use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::distributions::Discrete;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `E[max]` and `E[second max]` of the same set of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderStats<T> {
    pub max: T,
    pub smax: T,
}

/// Segment tree over per-variable CDF values at the current sweep point.
///
/// Each node stores `A = prod F_i` and `B = sum_i (1 - F_i) prod_{j != i} F_j`
/// over its leaves, so the root gives `Pr[max <= v] = A` and
/// `Pr[smax <= v] = A + B`.
struct PairTree<T> {
    size: usize,
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> PairTree<T> {
    fn new(n: usize) -> Self {
        let size = n.next_power_of_two().max(1);
        // Empty leaves are the identity (1, 0); real leaves start at F = 0.
        let mut a = vec![T::one(); 2 * size];
        let mut b = vec![T::zero(); 2 * size];
        for i in 0..n {
            a[size + i] = T::zero();
            b[size + i] = T::one();
        }
        let mut tree = Self { size, a, b };
        for node in (1..size).rev() {
            tree.pull(node);
        }
        tree
    }

    fn pull(&mut self, node: usize) {
        let (l, r) = (2 * node, 2 * node + 1);
        self.a[node] = self.a[l].clone() * self.a[r].clone();
        self.b[node] = self.b[l].clone() * self.a[r].clone() + self.a[l].clone() * self.b[r].clone();
    }

    fn set(&mut self, i: usize, f: &T) {
        let mut node = self.size + i;
        self.a[node] = f.clone();
        self.b[node] = T::one() - f.clone();
        while node > 1 {
            node /= 2;
            self.pull(node);
        }
    }

    fn root(&self) -> (T, T) {
        let a = self.a[1].clone();
        (a.clone(), a + self.b[1].clone())
    }
}

/// `E[max]` and `E[smax]` of independent variables in one sweep; the
/// second maximum of a single variable is 0.
pub fn expected_order_stats<T: Scalar>(vars: &[&Discrete<T>]) -> OrderStats<T> {
    T::order_stats(vars)
}

/// Sweeps the union of atoms in increasing order, accumulating
/// `v * (Pr[stat <= v] - Pr[stat <= v-])` for both order statistics.
pub(crate) fn sweep_generic<T: Scalar>(vars: &[&Discrete<T>]) -> OrderStats<T> {
    if vars.is_empty() {
        return OrderStats {
            max: T::zero(),
            smax: T::zero(),
        };
    }
    let mut events: Vec<(usize, usize)> = vars
        .iter()
        .enumerate()
        .flat_map(|(i, x)| (0..x.len()).map(move |j| (i, j)))
        .collect();
    let value = |&(i, j): &(usize, usize)| &vars[i].values()[j];
    events.sort_by(|x, y| value(x).partial_cmp(value(y)).expect("ordered values"));

    let mut tree = PairTree::new(vars.len());
    // Before the first atom every F_i is 0; with a single variable the
    // "second maximum" then already has all its mass, which makes it 0.
    let (mut prev_max, mut prev_smax) = tree.root();
    let mut e_max = T::zero();
    let mut e_smax = T::zero();
    let mut pos = 0;
    while pos < events.len() {
        let v = value(&events[pos]).clone();
        while pos < events.len() && *value(&events[pos]) == v {
            let (i, j) = events[pos];
            tree.set(i, &vars[i].cdf_at_atoms()[j]);
            pos += 1;
        }
        let (p_max, p_smax) = tree.root();
        e_max = e_max + v.clone() * (p_max.clone() - prev_max);
        e_smax = e_smax + v * (p_smax.clone() - prev_smax);
        prev_max = p_max;
        prev_smax = p_smax;
    }
    OrderStats { max: e_max, smax: e_smax }
}

/// The same sweep for rationals, carried out on integers: each variable's
/// CDF is scaled by the common denominator of its probabilities and values
/// by the common denominator of all values, so the tree multiplies integers
/// only and a single reduction happens at the end.
pub(crate) fn sweep_rational(vars: &[&Discrete<BigRational>]) -> OrderStats<BigRational> {
    if vars.is_empty() {
        return OrderStats {
            max: BigRational::zero(),
            smax: BigRational::zero(),
        };
    }
    let lcm_of = |it: &mut dyn Iterator<Item = &BigRational>| it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let value_den = lcm_of(&mut vars.iter().flat_map(|x| x.values().iter()));
    let mut dens = Vec::with_capacity(vars.len());
    let mut cdfs: Vec<Vec<BigInt>> = Vec::with_capacity(vars.len());
    for x in vars {
        let d = lcm_of(&mut x.probs().iter());
        cdfs.push(x.cdf_at_atoms().iter().map(|c| c.numer() * (&d / c.denom())).collect());
        dens.push(d);
    }
    let mut events: Vec<(BigInt, usize, usize)> = vars
        .iter()
        .enumerate()
        .flat_map(|(i, x)| {
            let vd = &value_den;
            x.values().iter().enumerate().map(move |(j, v)| (v.numer() * (vd / v.denom()), i, j))
        })
        .collect();
    events.sort_by(|a, b| a.0.cmp(&b.0));

    let size = vars.len().next_power_of_two();
    let mut a = vec![BigInt::one(); 2 * size];
    let mut b = vec![BigInt::zero(); 2 * size];
    for (i, d) in dens.iter().enumerate() {
        a[size + i] = BigInt::zero();
        b[size + i] = d.clone();
    }
    let pull = |a: &mut [BigInt], b: &mut [BigInt], node: usize| {
        let (l, r) = (2 * node, 2 * node + 1);
        b[node] = &b[l] * &a[r] + &a[l] * &b[r];
        a[node] = &a[l] * &a[r];
    };
    for node in (1..size).rev() {
        pull(&mut a, &mut b, node);
    }
    let (mut prev_max, mut prev_smax) = (a[1].clone(), &a[1] + &b[1]);
    let (mut e_max, mut e_smax) = (BigInt::zero(), BigInt::zero());
    let mut pos = 0;
    while pos < events.len() {
        let w = events[pos].0.clone();
        while pos < events.len() && events[pos].0 == w {
            let (_, i, j) = events[pos];
            let mut node = size + i;
            b[node] = &dens[i] - &cdfs[i][j];
            a[node] = cdfs[i][j].clone();
            while node > 1 {
                node /= 2;
                pull(&mut a, &mut b, node);
            }
            pos += 1;
        }
        let p_max = a[1].clone();
        let p_smax = &a[1] + &b[1];
        e_max += &w * (&p_max - &prev_max);
        e_smax += &w * (&p_smax - &prev_smax);
        prev_max = p_max;
        prev_smax = p_smax;
    }
    let scale = dens.iter().fold(value_den, |acc, d| acc * d);
    OrderStats {
        max: BigRational::new(e_max, scale.clone()),
        smax: BigRational::new(e_smax, scale),
    }
}

/// `E[max_i X_i]`; the maximum of no variables is 0.
pub fn expected_max<T: Scalar>(vars: &[&Discrete<T>]) -> T {
    expected_order_stats(vars).max
}

/// `E[second largest X_i]`; requires at least two variables.
pub fn expected_smax<T: Scalar>(vars: &[&Discrete<T>]) -> Result<T> {
    if vars.len() < 2 {
        return Err(Error::InvalidParameter("second maximum needs at least two variables".into()));
    }
    Ok(expected_order_stats(vars).smax)
}

/// `Pr[max_i X_i >= v] = 1 - prod_i Pr[X_i < v]`.
pub fn tail_prob_max<T: Scalar>(vars: &[&Discrete<T>], v: &T) -> T {
    let below = vars.iter().fold(T::one(), |acc, x| acc * x.prob_lt(v));
    T::one() - below
}

/// `Pr[second max >= v]`: one minus the probability that at most one
/// variable reaches `v`.
pub fn tail_prob_smax<T: Scalar>(vars: &[&Discrete<T>], v: &T) -> T {
    let below: Vec<T> = vars.iter().map(|x| x.prob_lt(v)).collect();
    let mut none = T::one();
    let mut exactly_one = T::zero();
    for q in &below {
        exactly_one = exactly_one * q.clone() + none.clone() * (T::one() - q.clone());
        none = none * q.clone();
    }
    T::one() - none - exactly_one
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{DiscreteDistribution, RationalDistribution};
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    // Enumerates the product space directly.
    fn enumerate(vars: &[&RationalDistribution]) -> (BigRational, BigRational) {
        let mut e_max = r(0, 1);
        let mut e_smax = r(0, 1);
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut prob = r(1, 1);
            let mut vals: Vec<BigRational> = Vec::new();
            for (x, &j) in vars.iter().zip(&idx) {
                prob *= &x.probs()[j];
                vals.push(x.values()[j].clone());
            }
            vals.sort();
            e_max += &prob * vals.last().unwrap();
            if vals.len() >= 2 {
                e_smax += &prob * &vals[vals.len() - 2];
            }
            let mut c = 0;
            loop {
                if c == vars.len() {
                    return (e_max, e_smax);
                }
                idx[c] += 1;
                if idx[c] < vars[c].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
        }
    }

    #[test]
    fn two_point_examples() {
        let x = RationalDistribution::new([(r(0, 1), r(1, 2)), (r(10, 1), r(1, 2))]).unwrap();
        let y = RationalDistribution::new([(r(4, 1), r(1, 1))]).unwrap();
        assert_eq!(expected_max(&[&x, &y]), r(7, 1));
        assert_eq!(expected_smax(&[&x, &y]).unwrap(), r(2, 1));
        let u = RationalDistribution::new([(r(1, 1), r(1, 2)), (r(2, 1), r(1, 2))]).unwrap();
        assert_eq!(expected_smax(&[&u, &u, &u]).unwrap(), r(3, 2));
        assert_eq!(enumerate(&[&u, &u, &u]).1, r(3, 2));
    }

    #[test]
    fn matches_enumeration() {
        let a = RationalDistribution::new([(r(0, 1), r(1, 3)), (r(5, 2), r(1, 6)), (r(7, 1), r(1, 2))]).unwrap();
        let b = RationalDistribution::new([(r(1, 1), r(3, 4)), (r(7, 1), r(1, 4))]).unwrap();
        let c = RationalDistribution::new([(r(2, 1), r(2, 5)), (r(3, 1), r(2, 5)), (r(9, 1), r(1, 5))]).unwrap();
        let d = RationalDistribution::new([(r(0, 1), r(1, 1))]).unwrap();
        for set in [vec![&a], vec![&a, &b], vec![&a, &b, &c], vec![&c, &d, &a, &b], vec![&d, &d]] {
            let (m, s) = enumerate(&set);
            let stats = expected_order_stats(&set);
            assert_eq!(stats.max, m);
            if set.len() >= 2 {
                assert_eq!(stats.smax, s);
            }
        }
    }

    #[test]
    fn float_agrees_with_exact() {
        let a = DiscreteDistribution::new([(0.0, 0.3), (1.7, 0.2), (4.1, 0.5)]).unwrap();
        let b = DiscreteDistribution::new([(1.0, 0.9), (6.0, 0.1)]).unwrap();
        let f = expected_order_stats(&[&a, &b]);
        let q = expected_order_stats(&[&a.to_rational(), &b.to_rational()]);
        assert!((f.max - q.max.to_float()).abs() <= 1e-12 * q.max.to_float());
        assert!((f.smax - q.smax.to_float()).abs() <= 1e-12 * q.smax.to_float());
    }

    #[test]
    fn tail_probability_of_second_max() {
        let x = RationalDistribution::new([(r(0, 1), r(1, 2)), (r(1, 1), r(1, 2))]).unwrap();
        // At least two of three fair coins: 1/2.
        assert_eq!(tail_prob_smax(&[&x, &x, &x], &r(1, 1)), r(1, 2));
        assert_eq!(tail_prob_smax(&[&x], &r(0, 1)), r(0, 1));
        assert_eq!(tail_prob_smax(&[&x, &x], &r(0, 1)), r(1, 1));
    }

    #[test]
    fn degenerate_sets() {
        let a = DiscreteDistribution::new([(3.0, 1.0)]).unwrap();
        assert_eq!(expected_max::<f64>(&[]), 0.0);
        assert_eq!(expected_max(&[&a]), 3.0);
        assert!(expected_smax(&[&a]).is_err());
        assert_eq!(expected_order_stats(&[&a]).smax, 0.0);
    }

    #[test]
    fn tail_probability_of_max() {
        let x = DiscreteDistribution::new([(0.0, 0.5), (10.0, 0.5)]).unwrap();
        let y = DiscreteDistribution::new([(0.0, 0.5), (10.0, 0.5)]).unwrap();
        assert_eq!(tail_prob_max(&[&x, &y], &10.0), 0.75);
        assert_eq!(tail_prob_max(&[&x, &y], &0.0), 1.0);
        assert_eq!(tail_prob_max(&[&x, &y], &10.5), 0.0);
    }

    #[test]
    fn integer_sweep_matches_rational_sweep() {
        let mut rng = crate::rng::SeededRng::new(11);
        for _ in 0..300 {
            let n = rng.int_in(1, 6) as usize;
            let vars: Vec<RationalDistribution> = (0..n)
                .map(|_| {
                    let m = rng.int_in(1, 4) as i64;
                    let weights: Vec<i64> = (0..m).map(|_| rng.int_in(1, 9) as i64).collect();
                    let total: i64 = weights.iter().sum();
                    RationalDistribution::new(
                        weights
                            .iter()
                            .map(|&w| (r(rng.int_in(0, 12) as i64, rng.int_in(1, 3) as i64), r(w, total))),
                    )
                    .unwrap()
                })
                .collect();
            let refs: Vec<_> = vars.iter().collect();
            assert_eq!(sweep_rational(&refs), sweep_generic(&refs));
        }
    }
}
