//! Scalar information measures: entropy and Hamming rate-distortion.

use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::model::Distribution;
use crate::rational::{to_f64, Rat};

/// Shannon entropy in bits of a real probability vector, with `0 log 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    h.max(0.0)
}

pub fn entropy(p: &Distribution) -> f64 {
    entropy_of(&p.to_f64())
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// Hamming rate-distortion function of a binary source with `P(0) = p <= 1/2`.
pub fn rd_binary(p: &Rat, d: &Rat) -> Result<f64> {
    if p.is_negative() || *p > Rat::new(1.into(), 2.into()) {
        return invalid("rd_binary needs 0 <= p <= 1/2");
    }
    if d.is_negative() {
        return invalid("distortion must be non-negative");
    }
    if d >= p {
        return Ok(0.0);
    }
    Ok((binary_entropy(to_f64(p)) - binary_entropy(to_f64(d))).max(0.0))
}

/// Settings for [`rd_blahut_arimoto`].
#[derive(Clone, Debug)]
pub struct BlahutArimoto {
    pub max_iterations: usize,
    pub slope_max: f64,
    pub bisection_steps: usize,
}

impl Default for BlahutArimoto {
    fn default() -> Self {
        Self { max_iterations: 100_000, slope_max: 64.0, bisection_steps: 80 }
    }
}

struct Point {
    rate: f64,
    distortion: f64,
    converged: bool,
}

impl BlahutArimoto {
    /// Alternating minimisation at a fixed slope, warm-started from `output`.
    fn solve_at(&self, px: &[f64], slope: f64, output: &mut Vec<f64>, tol: f64) -> Point {
        let q = px.len();
        let off = (-slope * std::f64::consts::LN_2).exp();
        let mut cond = vec![0.0; q * q];
        let mut converged = false;
        for _ in 0..self.max_iterations {
            // c(y) = sum_x p(x) w(x, y) / Z(x); the fixed point has max_y c(y) = 1 on the support.
            let c: Vec<f64> = (0..q)
                .map(|y| {
                    (0..q)
                        .filter(|&x| px[x] > 0.0)
                        .map(|x| {
                            let z: f64 = (0..q).map(|k| output[k] * if x == k { 1.0 } else { off }).sum();
                            px[x] * if x == y { 1.0 } else { off } / z
                        })
                        .sum()
                })
                .collect();
            let top = c.iter().cloned().fold(0.0, f64::max).ln();
            let mean: f64 = (0..q).filter(|&y| output[y] > 0.0).map(|y| output[y] * c[y].ln()).sum();
            if top - mean < tol {
                converged = true;
                break;
            }
            output.iter_mut().zip(&c).for_each(|(o, cy)| *o *= cy);
        }
        update_conditional(px, output, off, &mut cond);
        let mut rate = 0.0;
        let mut distortion = 0.0;
        for x in 0..q {
            for y in 0..q {
                let c = cond[x * q + y];
                if c > 0.0 && px[x] > 0.0 && output[y] > 0.0 {
                    rate += px[x] * c * (c / output[y]).log2();
                    if x != y {
                        distortion += px[x] * c;
                    }
                }
            }
        }
        Point { rate: rate.max(0.0), distortion, converged }
    }

    pub fn rate(&self, p: &Distribution, d: &Rat, tol: f64) -> Result<f64> {
        if d.is_negative() || *d > Rat::from_integer(1.into()) {
            return invalid("distortion must lie in [0, 1]");
        }
        if !(tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        let px = p.to_f64();
        let target = to_f64(d);
        let dmax = 1.0 - px.iter().cloned().fold(0.0, f64::max);
        if target >= dmax {
            return Ok(0.0);
        }
        if d.is_zero() {
            return Ok(entropy_of(&px));
        }
        let q = px.len();
        let mut output = vec![1.0 / q as f64; q];
        let top = self.solve_at(&px, self.slope_max, &mut output, tol);
        if top.distortion >= target {
            return finish(top, self.max_iterations);
        }
        let (mut lo, mut hi) = (0.0, self.slope_max);
        let mut best = top;
        for _ in 0..self.bisection_steps {
            let mid = 0.5 * (lo + hi);
            let pt = self.solve_at(&px, mid, &mut output, tol);
            if !pt.converged {
                // Near the critical slope the iteration crawls; use the probe only for direction.
                output.iter_mut().for_each(|v| *v = 1.0 / q as f64);
            }
            if pt.distortion > target {
                lo = mid;
            } else {
                hi = mid;
                best = pt;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        finish(best, self.max_iterations)
    }
}

fn finish(pt: Point, iterations: usize) -> Result<f64> {
    if pt.converged {
        Ok(pt.rate)
    } else {
        Err(Error::NoConvergence { iterations })
    }
}

fn update_conditional(px: &[f64], output: &[f64], off: f64, cond: &mut [f64]) {
    let q = px.len();
    for x in 0..q {
        let z: f64 = (0..q).map(|y| output[y] * if x == y { 1.0 } else { off }).sum();
        for y in 0..q {
            cond[x * q + y] = output[y] * if x == y { 1.0 } else { off } / z;
        }
    }
}

/// `R(d)` under Hamming distortion, by Blahut-Arimoto with slope bisection.
pub fn rd_blahut_arimoto(p: &Distribution, d: &Rat, tol: f64) -> Result<f64> {
    BlahutArimoto::default().rate(p, d, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert!((entropy(&Distribution::uniform(2).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(entropy(&Distribution::binary(rat(1, 1)).unwrap()), 0.0);
        let h = -(0.3f64 * 0.3f64.log2() + 0.7 * 0.7f64.log2());
        assert!((entropy(&Distribution::binary(rat(3, 10)).unwrap()) - h).abs() < 1e-15);
        assert!((h - 0.881291).abs() < 1e-6);
    }

    #[test]
    fn binary_rate_distortion() {
        assert!((rd_binary(&rat(3, 10), &rat(0, 1)).unwrap() - 0.881291).abs() < 1e-6);
        assert_eq!(rd_binary(&rat(3, 10), &rat(3, 10)).unwrap(), 0.0);
        let expected = binary_entropy(0.3) - binary_entropy(0.1);
        assert!((rd_binary(&rat(3, 10), &rat(1, 10)).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.4122953).abs() < 1e-7);
        assert!(rd_binary(&rat(3, 5), &rat(1, 10)).is_err());
    }

    #[test]
    fn blahut_arimoto_matches_closed_forms() {
        let p = Distribution::binary(rat(3, 10)).unwrap();
        assert!((rd_blahut_arimoto(&p, &rat(0, 1), 1e-9).unwrap() - binary_entropy(0.3)).abs() < 1e-9);
        let ba = rd_blahut_arimoto(&p, &rat(1, 10), 1e-9).unwrap();
        assert!((ba - rd_binary(&rat(3, 10), &rat(1, 10)).unwrap()).abs() < 1e-6, "{ba}");

        let u = Distribution::uniform(4).unwrap();
        let expected = 2.0 - binary_entropy(0.25) - 0.25 * 3f64.log2();
        let ba = rd_blahut_arimoto(&u, &rat(1, 4), 1e-9).unwrap();
        assert!((ba - expected).abs() < 1e-6, "{ba} vs {expected}");
        assert!((expected - 0.79248).abs() < 1e-5);
        assert_eq!(rd_blahut_arimoto(&u, &rat(3, 4), 1e-9).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn blahut_arimoto_non_increasing(a in 1u32..50, b in 0u32..40, gap in 1u32..10) {
            let p = Distribution::binary(rat(a as i64, 100)).unwrap();
            let d1 = rat(b as i64, 100);
            let d2 = rat((b + gap) as i64, 100);
            let r1 = rd_blahut_arimoto(&p, &d1, 1e-9).unwrap();
            let r2 = rd_blahut_arimoto(&p, &d2, 1e-9).unwrap();
            prop_assert!(r2 <= r1 + 1e-9);
            prop_assert!((r1 - rd_binary(&rat(a as i64, 100), &d1).unwrap()).abs() < 1e-6);
        }
    }
}
