//! Dense LU with partial pivoting for the small systems Markov-chain
//! analysis produces.

/// Estimated 1-norm condition number above which a warning is attached.
pub const CONDITION_WARNING: f64 = 1e12;
/// Beyond this the system is treated as numerically singular.
pub const CONDITION_SINGULAR: f64 = 1e16;

#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    norm1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub condition: f64,
}

impl Lu {
    /// Factors the row-major `n × n` matrix `a`.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Lu, Singular> {
        assert_eq!(a.len(), n * n);
        let norm1 = (0..n).map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu: a, perm, norm1 })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Exact 1-norm condition number via the explicit inverse; affordable at
    /// the sizes used here.
    pub fn condition(&self) -> f64 {
        let n = self.n;
        let mut inv_norm: f64 = 0.0;
        let mut col_sums = vec![0.0; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e);
            col_sums[j] = col.iter().map(|v| v.abs()).sum();
        }
        for s in col_sums {
            inv_norm = inv_norm.max(s);
        }
        self.norm1 * inv_norm
    }
}

/// Factors and checks conditioning: errors when numerically singular and
/// appends a warning when merely ill-conditioned.
pub fn factor_checked(a: Vec<f64>, n: usize, warnings: &mut Vec<String>) -> Result<Lu, Singular> {
    let lu = Lu::factor(a, n)?;
    let cond = lu.condition();
    if !cond.is_finite() || cond > CONDITION_SINGULAR {
        return Err(Singular { condition: cond });
    }
    if cond > CONDITION_WARNING {
        warnings.push(format!("linear system is ill-conditioned (condition number ≈ {cond:.3e})"));
    }
    Ok(lu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // First pivot is zero without row exchange.
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0, 3.0];
        let lu = Lu::factor(a.clone(), 3).unwrap();
        let x = lu.solve(&[3.0, 2.0, 5.0]);
        for (i, row) in a.chunks(3).enumerate() {
            let lhs: f64 = row.iter().zip(&x).map(|(r, v)| r * v).sum();
            assert!((lhs - [3.0, 2.0, 5.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(Lu::factor(a, 2).is_err() || factor_checked(vec![1.0, 2.0, 2.0, 4.0], 2, &mut Vec::new()).is_err());
    }

    #[test]
    fn identity_has_unit_condition() {
        let lu = Lu::factor(vec![1.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert_eq!(lu.condition(), 1.0);
    }

    #[test]
    fn ill_conditioned_system_warns() {
        let mut w = Vec::new();
        factor_checked(vec![1.0, 0.0, 0.0, 1e-13], 2, &mut w).unwrap();
        assert_eq!(w.len(), 1);
    }
}
