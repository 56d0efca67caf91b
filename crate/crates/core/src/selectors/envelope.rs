use crate::distributions::DiscreteDistribution;

/// Distribution functions of the max and second max of the currently
/// selected variables, kept as step functions with prefix integrals.
///
/// On `[xs[t], xs[t+1])`, `a[t] = Pr[max <= v]` and
/// `b[t] = Pr[smax <= v] - Pr[max <= v]`. Adding a variable `X` changes
/// `E[max]` by `int a(v) Pr[X > v] dv` and `E[smax]` by
/// `int b(v) Pr[X > v] dv`.
#[derive(Clone, Debug)]
pub(crate) struct Envelope {
    xs: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    ia: Vec<f64>,
    ib: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Stat {
    Max,
    SecondMax,
}

impl Envelope {
    /// The empty selection: max is 0 and no second max exists yet.
    pub(crate) fn empty() -> Self {
        Self {
            xs: vec![0.0],
            a: vec![1.0],
            b: vec![0.0],
            ia: vec![0.0],
            ib: vec![0.0],
        }
    }

    fn integral(&self, stat: Stat, x: f64) -> f64 {
        let t = self.xs.partition_point(|z| *z <= x).saturating_sub(1);
        let (level, prefix) = match stat {
            Stat::Max => (&self.a, &self.ia),
            Stat::SecondMax => (&self.b, &self.ib),
        };
        prefix[t] + level[t] * (x - self.xs[t])
    }

    /// Marginal change of the statistic when `x` joins the selection.
    pub(crate) fn gain(&self, x: &DiscreteDistribution, stat: Stat) -> f64 {
        let values = x.values();
        let tail = x.tail_at_atoms();
        let mut acc = 0.0;
        let mut lo = 0.0;
        let mut i_lo = 0.0;
        for j in 0..values.len() {
            let hi = values[j];
            let surv = if j == 0 { 1.0 } else { tail[j] };
            if hi > lo {
                let i_hi = self.integral(stat, hi);
                acc += surv * (i_hi - i_lo);
                i_lo = i_hi;
                lo = hi;
            }
        }
        acc
    }

    /// Adds `x` to the selection.
    pub(crate) fn absorb(&mut self, x: &DiscreteDistribution) {
        let vals = x.values();
        let cdf = x.cdf_at_atoms();
        let cap = self.xs.len() + vals.len();
        let mut xs = Vec::with_capacity(cap);
        let mut a = Vec::with_capacity(cap);
        let mut b = Vec::with_capacity(cap);
        let (mut p, mut q) = (0usize, 0usize);
        // Pointers to the last breakpoint / atom at or below z.
        let mut cur: Option<usize> = None;
        let mut fcur = 0.0;
        loop {
            let next_env = self.xs.get(p).copied();
            let next_atom = vals.get(q).copied();
            let z = match (next_env, next_atom) {
                (None, None) => break,
                (Some(e), None) => e,
                (None, Some(v)) => v,
                (Some(e), Some(v)) => e.min(v),
            };
            while p < self.xs.len() && self.xs[p] <= z {
                cur = Some(p);
                p += 1;
            }
            while q < vals.len() && vals[q] <= z {
                fcur = cdf[q];
                q += 1;
            }
            let t = cur.expect("envelope starts at 0 and atoms are >= 0");
            let (ga, gb) = (self.a[t], self.b[t]);
            xs.push(z);
            a.push(ga * fcur);
            b.push(gb * fcur + ga * (1.0 - fcur));
        }
        let mut ia = Vec::with_capacity(xs.len());
        let mut ib = Vec::with_capacity(xs.len());
        let (mut sa, mut sb) = (0.0, 0.0);
        for t in 0..xs.len() {
            if t > 0 {
                let w = xs[t] - xs[t - 1];
                sa += a[t - 1] * w;
                sb += b[t - 1] * w;
            }
            ia.push(sa);
            ib.push(sb);
        }
        *self = Self { xs, a, b, ia, ib };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::expected_order_stats;

    fn d(atoms: &[(f64, f64)]) -> DiscreteDistribution {
        DiscreteDistribution::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn gains_telescope_to_exact_values() {
        let vars = [
            d(&[(0.0, 0.3), (2.0, 0.5), (5.0, 0.2)]),
            d(&[(1.0, 0.6), (4.0, 0.4)]),
            d(&[(0.5, 0.1), (2.0, 0.2), (3.0, 0.3), (7.0, 0.4)]),
            DiscreteDistribution::point_mass(2.5),
        ];
        let mut env = Envelope::empty();
        let (mut m, mut s) = (0.0, 0.0);
        for (i, x) in vars.iter().enumerate() {
            m += env.gain(x, Stat::Max);
            s += env.gain(x, Stat::SecondMax);
            env.absorb(x);
            let refs: Vec<_> = vars[..=i].iter().collect();
            let exact = expected_order_stats(&refs);
            assert!((m - exact.max).abs() < 1e-12, "max after {i}: {m} vs {}", exact.max);
            assert!((s - exact.smax).abs() < 1e-12, "smax after {i}: {s} vs {}", exact.smax);
        }
    }
}
