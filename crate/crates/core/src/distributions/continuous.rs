use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};
use statrs::function::erf::erfc;

use super::{DiscreteDistribution, Sample};
use crate::error::{param, Result};
use crate::rng::SeededRng;

/// Upper bound on the number of grid cells `discretize` will produce.
pub const MAX_CELLS: usize = 50_000_000;

/// Continuous families with closed-form tails. All three have a monotone
/// hazard rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ContinuousFamily {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `1 - Phi(z)`, accurate in the upper tail.
fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `z` with `1 - Phi(z) = t`, polished with one Newton step.
fn std_normal_upper_quantile(t: f64) -> f64 {
    let z = -StdNormal::standard().inverse_cdf(t);
    let density = std_normal_pdf(z);
    if density > 0.0 {
        z + (std_normal_sf(z) - t) / density
    } else {
        z
    }
}

impl ContinuousFamily {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return param(format!("uniform needs finite a < b, got [{a}, {b}]"));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return param(format!("exponential rate must be positive, got {rate}"));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return param(format!("normal needs finite mean and sd > 0, got ({mean}, {sd})"));
        }
        Ok(Self::Normal { mean, sd })
    }

    /// Re-checks parameters, for values obtained through deserialization.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Uniform { a, b } => Self::uniform(a, b),
            Self::Exponential { rate } => Self::exponential(rate),
            Self::Normal { mean, sd } => Self::normal(mean, sd),
        }
    }

    /// `Pr[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// `Pr[X > x]`.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Normal { mean, sd } => std_normal_sf((x - mean) / sd),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::Normal { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
        }
    }

    /// `alpha_p = F^{-1}(1 - 1/p)`; for the normal family `alpha_1` is
    /// negative infinity.
    pub fn quantile_alpha(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return param(format!("quantile parameter must be >= 1, got {p}"));
        }
        Ok(match *self {
            Self::Uniform { a, b } => a + (b - a) * (1.0 - 1.0 / p),
            Self::Exponential { rate } => p.ln() / rate,
            Self::Normal { mean, sd } => {
                if p == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    mean + sd * std_normal_upper_quantile(1.0 / p)
                }
            }
        })
    }

    /// `E[X * 1{X >= x}]` in closed form.
    pub fn tail_contribution(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                let lo = x.max(a);
                if lo >= b {
                    0.0
                } else {
                    (b * b - lo * lo) / (2.0 * (b - a))
                }
            }
            Self::Exponential { rate } => {
                let lo = x.max(0.0);
                (lo + 1.0 / rate) * (-rate * lo).exp()
            }
            Self::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                mean * std_normal_sf(z) + sd * std_normal_pdf(z)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Exponential { rate } => 1.0 / rate,
            Self::Normal { mean, .. } => mean,
        }
    }

    /// Rounds down onto the grid `{0, g, 2g, ...}` below `clip`, with all
    /// mass at or above `clip` on an atom at `clip` and all mass below `g`
    /// (including any negative part) on the atom at zero.
    pub fn discretize(&self, grid: f64, clip: f64) -> Result<DiscreteDistribution> {
        if !(grid.is_finite() && grid > 0.0) {
            return param(format!("grid must be positive, got {grid}"));
        }
        if !(clip.is_finite() && clip >= 0.0) {
            return param(format!("clip must be finite and >= 0, got {clip}"));
        }
        if clip == 0.0 {
            return DiscreteDistribution::new([(0.0, 1.0)]);
        }
        let ratio = clip / grid;
        if ratio > MAX_CELLS as f64 {
            return param(format!("grid {grid} too fine for clip {clip}"));
        }
        let cells = ((ratio - 1e-9).ceil() as usize).max(1);
        let mut atoms = Vec::with_capacity(cells + 1);
        let mut upper_sf = 1.0;
        for j in 0..cells {
            let lo_sf = upper_sf;
            let hi = ((j + 1) as f64 * grid).min(clip);
            upper_sf = self.survival(hi);
            let mass = if j == 0 { 1.0 - upper_sf } else { lo_sf - upper_sf };
            atoms.push((j as f64 * grid, mass.max(0.0)));
        }
        atoms.push((clip, self.survival(clip)));
        DiscreteDistribution::new(atoms)
    }
}

impl Sample for ContinuousFamily {
    fn sample(&self, rng: &mut SeededRng) -> f64 {
        match *self {
            Self::Uniform { a, b } => rng.uniform(a, b),
            Self::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Self::Normal { mean, sd } => Normal::new(mean, sd).expect("validated sd").sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Adaptive Simpson quadrature, used only as an independent oracle.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    fn families() -> Vec<ContinuousFamily> {
        vec![
            ContinuousFamily::exponential(1.0).unwrap(),
            ContinuousFamily::exponential(3.0).unwrap(),
            ContinuousFamily::uniform(0.0, 1.0).unwrap(),
            ContinuousFamily::uniform(2.0, 5.0).unwrap(),
            ContinuousFamily::normal(1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn exponential_examples() {
        let x = ContinuousFamily::exponential(1.0).unwrap();
        assert!((x.tail_contribution(1.0) - 2.0 / std::f64::consts::E).abs() < 1e-12);
        assert!((x.tail_contribution(1.0) - 0.7357588823428847).abs() < 1e-12);
        assert!((x.quantile_alpha(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-12);
        assert!(x.quantile_alpha(0.9).is_err());
    }

    #[test]
    fn normal_quantile_at_one_is_minus_infinity() {
        let x = ContinuousFamily::normal(0.0, 1.0).unwrap();
        assert_eq!(x.quantile_alpha(1.0).unwrap(), f64::NEG_INFINITY);
        // 1 - 1/p = 0.975 gives the familiar 1.959964.
        assert!((x.quantile_alpha(40.0).unwrap() - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn tail_contribution_matches_quadrature() {
        for f in families() {
            let hi = match f {
                ContinuousFamily::Normal { mean, sd } => mean + 12.0 * sd,
                ContinuousFamily::Exponential { rate } => 40.0 / rate,
                ContinuousFamily::Uniform { b, .. } => b,
            };
            for x in [0.0f64, 0.3, 1.0, 2.5, 4.0] {
                let lo = match f {
                    ContinuousFamily::Uniform { a, .. } => x.max(a),
                    ContinuousFamily::Exponential { .. } => x.max(0.0),
                    _ => x,
                };
                let quad = if lo >= hi { 0.0 } else { simpson(&|t| t * f.pdf(t), lo, hi, 1e-13) };
                assert!((quad - f.tail_contribution(x)).abs() < 1e-9, "{f:?} at {x}: {quad} vs {}", f.tail_contribution(x));
            }
        }
    }

    #[test]
    fn quantile_inverts_survival() {
        for f in families() {
            for p in [1.5, 2.0, 10.0, 1e4] {
                let a = f.quantile_alpha(p).unwrap();
                assert!((f.survival(a) - 1.0 / p).abs() < 1e-12, "{f:?} p={p}: {}", f.survival(a) - 1.0 / p);
            }
        }
    }

    #[test]
    fn log_survival_is_concave() {
        for f in families() {
            let (lo, hi) = match f {
                ContinuousFamily::Uniform { a, b } => (a, b - 1e-3),
                ContinuousFamily::Exponential { .. } => (0.0, 20.0),
                ContinuousFamily::Normal { mean, sd } => (mean - 5.0 * sd, mean + 8.0 * sd),
            };
            let h = (hi - lo) / 400.0;
            let ls = |x: f64| f.survival(x).ln();
            for i in 1..400 {
                let x = lo + i as f64 * h;
                let second = ls(x + h) - 2.0 * ls(x) + ls(x - h);
                assert!(second <= 1e-9, "{f:?} at {x}: {second}");
            }
        }
    }

    #[test]
    fn discretize_exponential_example() {
        let x = ContinuousFamily::exponential(1.0).unwrap().discretize(10.0, 10.0).unwrap();
        assert_eq!(x.values(), &[0.0, 10.0]);
        assert!((x.probs()[0] - (1.0 - (-10f64).exp())).abs() < 1e-15);
        assert!((x.probs()[1] - (-10f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn discretize_normal_example() {
        let x = ContinuousFamily::normal(0.0, 1.0).unwrap().discretize(0.01, 5.0).unwrap();
        // Phi(1) by quadrature of the density.
        let phi1 = 0.5 + simpson(&|t| std_normal_pdf(t), 0.0, 1.0, 1e-14);
        assert!((phi1 - 0.8413447460685429).abs() < 1e-12);
        assert!((x.cdf(&1.0) - phi1).abs() < 1e-2);
        assert_eq!(*x.max_value(), 5.0);
        assert!(x.values().iter().all(|v| (0.0..=5.0).contains(v)));
    }

    #[test]
    fn discretize_uniform_truncation() {
        let x = ContinuousFamily::uniform(0.0, 1.0).unwrap().discretize(1e-4, 1.0).unwrap();
        let t = x.truncate_at_quantile(&2.0).unwrap();
        assert!((t.max_value() - 0.5).abs() < 1e-9);
        assert!((t.probs().last().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn discretized_mass_is_rounded_down() {
        let f = ContinuousFamily::exponential(0.5).unwrap();
        let x = f.discretize(0.25, 6.0).unwrap();
        for v in [0.1, 0.25, 1.3, 5.9] {
            // Rounding down can only add mass at or below each point.
            assert!(x.cdf(&v) >= f.cdf(v) - 1e-12);
        }
        assert!(x.mean() <= f.mean());
    }

    #[test]
    fn sampling_matches_mean() {
        let mut rng = SeededRng::new(3);
        for f in families() {
            let n = 40_000;
            let xs: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((m - f.mean()).abs() < 4.0 * (var / n as f64).sqrt(), "{f:?}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ContinuousFamily::uniform(1.0, 1.0).is_err());
        assert!(ContinuousFamily::exponential(0.0).is_err());
        assert!(ContinuousFamily::normal(0.0, -1.0).is_err());
        let f = ContinuousFamily::exponential(1.0).unwrap();
        assert!(f.discretize(0.0, 1.0).is_err());
        assert!(f.discretize(1e-12, 1e6).is_err());
    }
}
