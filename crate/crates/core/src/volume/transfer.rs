//! Transfer-operator values of `log Z` for cycles and paths.

use rayon::prelude::*;

use super::{Method, VolumeEstimate};
use crate::error::{Error, Result};
use crate::measure::SpinMeasure;

pub const DEFAULT_BINS: usize = 2048;

/// Discretized kernel `A_ij = h v_i v_j 1{x_i + x_j <= 1}` on midpoint bins,
/// with half weight on the anti-diagonal `i + j = B - 1` that the constraint
/// line crosses. `v_i^2` is the bin-averaged density.
struct Kernel {
    h: f64,
    v: Vec<f64>,
}

impl Kernel {
    fn new(m: &SpinMeasure, bins: usize) -> Result<Self> {
        if m.has_atoms() {
            return Err(Error::AtomsNotSupported("the transfer oracle"));
        }
        if bins < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 bins, got {bins}")));
        }
        let h = 1.0 / bins as f64;
        let v = (0..bins)
            .map(|i| (m.mass(i as f64 * h, (i + 1) as f64 * h, true, true) / h).sqrt())
            .collect();
        Ok(Self { h, v })
    }

    /// `y <- A y` in O(B) with prefix sums.
    fn apply(&self, y: &[f64], out: &mut [f64], prefix: &mut [f64]) {
        let b = self.v.len();
        prefix[0] = 0.0;
        for j in 0..b {
            prefix[j + 1] = prefix[j] + self.v[j] * y[j];
        }
        for i in 0..b {
            let k = b - 1 - i;
            out[i] = self.h * self.v[i] * (prefix[k] + 0.5 * self.v[k] * y[k]);
        }
    }

    /// `log(e_end^T A^steps y0)`-style power with running normalization;
    /// returns the final vector and the accumulated log scale.
    fn power(&self, mut y: Vec<f64>, steps: usize) -> (Vec<f64>, f64) {
        let b = self.v.len();
        let mut out = vec![0.0; b];
        let mut prefix = vec![0.0; b + 1];
        let mut log_scale = 0.0;
        for _ in 0..steps {
            self.apply(&y, &mut out, &mut prefix);
            let norm = out.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if norm == 0.0 {
                return (out, f64::NEG_INFINITY);
            }
            for x in &mut out {
                *x /= norm;
            }
            log_scale += norm.ln();
            std::mem::swap(&mut y, &mut out);
        }
        (y, log_scale)
    }

    fn cycle(&self, n: usize) -> f64 {
        let b = self.v.len();
        let terms: Vec<f64> = (0..b)
            .into_par_iter()
            .map(|i| {
                let mut e = vec![0.0; b];
                e[i] = 1.0;
                let (y, ls) = self.power(e, n);
                if y[i] > 0.0 {
                    ls + y[i].ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        log_sum_exp(&terms)
    }

    fn path(&self, n: usize) -> f64 {
        let u: Vec<f64> = self.v.iter().map(|v| self.h.sqrt() * v).collect();
        let (y, ls) = self.power(u.clone(), n - 1);
        let dot: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
        ls + dot.ln()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln((4 e^fine - e^coarse) / 3)`, computed relative to `fine`.
fn richardson(coarse: f64, fine: f64) -> Option<f64> {
    let arg = (4.0 - (coarse - fine).exp()) / 3.0;
    (arg > 0.0).then(|| fine + arg.ln())
}

fn estimate(label: String, n: usize, m: &SpinMeasure, bins: usize, log_z: f64, fine: f64) -> VolumeEstimate {
    VolumeEstimate {
        graph: label,
        n_nodes: n,
        lambda: m.lambda(),
        measure: m.kind().to_string(),
        method: Method::Transfer,
        log_z,
        std_err: 0.0,
        samples: bins as u64,
        seed: None,
        richardson: richardson(log_z, fine),
    }
}

/// `log Z` of the `n`-cycle as `log trace(A^n)`; the `2 * bins` value feeds
/// the Richardson field.
pub fn transfer_cycle_log_z(n: usize, m: &SpinMeasure, bins: usize) -> Result<VolumeEstimate> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("a cycle needs n >= 3, got {n}")));
    }
    let coarse = Kernel::new(m, bins)?.cycle(n);
    let fine = Kernel::new(m, 2 * bins)?.cycle(n);
    Ok(estimate(format!("cycle:{n}"), n, m, bins, coarse, fine))
}

/// `log Z` of the path on `n` nodes as `log(u^T A^(n-1) u)`.
pub fn transfer_path_log_z(n: usize, m: &SpinMeasure, bins: usize) -> Result<VolumeEstimate> {
    if n < 1 {
        return Err(Error::InvalidParameter("a path needs n >= 1".into()));
    }
    let coarse = Kernel::new(m, bins)?.path(n);
    let fine = Kernel::new(m, 2 * bins)?.path(n);
    Ok(estimate(format!("path:{n}"), n, m, bins, coarse, fine))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let m = SpinMeasure::continuous(1.0).unwrap();
        let t = transfer_cycle_log_z(3, &m, 256).unwrap();
        assert!((t.log_z - 0.25f64.ln()).abs() < 1e-3);
        assert!((t.richardson.unwrap() - 0.25f64.ln()).abs() < 1e-5);
        let p = transfer_path_log_z(2, &m, 256).unwrap();
        assert!((p.richardson.unwrap() - 0.5f64.ln()).abs() < 1e-6);
        let p1 = transfer_path_log_z(1, &m, 64).unwrap();
        assert!(p1.log_z.abs() < 1e-14);
        let p3 = transfer_path_log_z(3, &m, 256).unwrap();
        assert!((p3.richardson.unwrap() - (1.0f64 / 3.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn rejects_atoms() {
        assert!(transfer_cycle_log_z(4, &SpinMeasure::two_state(1.0).unwrap(), 16).is_err());
    }
}
