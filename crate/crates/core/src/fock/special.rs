//! Log-space factorials and generalized Laguerre polynomials.

/// `ln k!` for `k = 0..=n_max`.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// A real number stored as `sign · exp(ln_abs)`; zero has `sign == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogValue {
    fn new(value: f64, ln_scale: f64) -> Self {
        if value == 0.0 {
            LogValue {
                sign: 0.0,
                ln_abs: f64::NEG_INFINITY,
            }
        } else {
            LogValue {
                sign: value.signum(),
                ln_abs: value.abs().ln() + ln_scale,
            }
        }
    }

    #[cfg(test)]
    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

const RESCALE_AT: f64 = 1e150;

/// `L_j^{(alpha)}(x)` for `j = 0..count`, from the three-term recurrence
/// with running rescaling so large orders never overflow.
pub(crate) fn laguerre_series(alpha: f64, x: f64, count: usize) -> Vec<LogValue> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let mut ln_scale = 0.0;
    let mut prev = 1.0;
    out.push(LogValue::new(prev, ln_scale));
    if count == 1 {
        return out;
    }
    let mut cur = 1.0 + alpha - x;
    out.push(LogValue::new(cur, ln_scale));
    for j in 1..count - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
        out.push(LogValue::new(cur, ln_scale));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Explicit sum L_j^a(x) = Σ_i (−1)^i C(j+a, j−i) x^i / i!.
    fn laguerre_direct(j: usize, a: usize, x: f64) -> f64 {
        let binom = |n: usize, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        let mut fact = 1.0;
        let mut total = 0.0;
        for i in 0..=j {
            if i > 0 {
                fact *= i as f64;
            }
            total += (-1f64).powi(i as i32) * binom(j + a, j - i) * x.powi(i as i32) / fact;
        }
        total
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for &a in &[0usize, 1, 3, 7] {
            for &x in &[0.0, 0.5, 1.0, 4.0] {
                let series = laguerre_series(a as f64, x, 12);
                for (j, v) in series.iter().enumerate() {
                    let want = laguerre_direct(j, a, x);
                    assert!(
                        (v.value() - want).abs() <= 1e-10 * want.abs().max(1.0),
                        "L_{j}^{a}({x}): {} vs {want}",
                        v.value()
                    );
                }
            }
        }
    }

    #[test]
    fn huge_orders_stay_finite() {
        let series = laguerre_series(400.0, 2.0, 600);
        assert!(series.iter().all(|v| v.ln_abs.is_finite() || v.sign == 0.0));
        assert!(series.last().unwrap().ln_abs > 300.0);
    }

    #[test]
    fn ln_factorial_values() {
        let lf = ln_factorials(200);
        assert_eq!(lf[0], 0.0);
        assert!((lf[5] - 120f64.ln()).abs() < 1e-14);
        assert!(lf[200].is_finite() && lf[200] > 800.0);
    }
}
