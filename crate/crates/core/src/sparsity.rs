//! Top-(K,1) norm machinery and the elementwise operators shared by the solvers.

use crate::error::{Error, Result};

fn check_k(len: usize, k: usize) -> Result<()> {
    if k == 0 || k > len {
        return Err(Error::input(format!(
            "sparsity bound k = {k} must lie in 1..={len}"
        )));
    }
    Ok(())
}

/// Indices of the `k` largest magnitudes, ties resolved toward the lower
/// index, returned in ascending index order.
///
/// Uses a partial selection, so the cost is linear on average.
pub fn top_k_indices(x: &[f64], k: usize) -> Result<Vec<usize>> {
    check_k(x.len(), k)?;
    let mut idx: Vec<usize> = (0..x.len()).collect();
    if k < x.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| {
            x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b))
        });
        idx.truncate(k);
    }
    idx.sort_unstable();
    Ok(idx)
}

/// Sum of the `k` largest absolute entries.
pub fn top_k1_norm(x: &[f64], k: usize) -> Result<f64> {
    Ok(top_k_indices(x, k)?.iter().map(|&i| x[i].abs()).sum())
}

/// `‖x‖₁ − ‖x‖_{K,1}`, computed as the sum of the magnitudes outside the top
/// `k`, so it is exactly zero whenever `x` has at most `k` nonzeros.
pub fn sparsity_gap(x: &[f64], k: usize) -> Result<f64> {
    let top = top_k_indices(x, k)?;
    let mut selected = top.into_iter().peekable();
    let mut tail = 0.0;
    for (i, v) in x.iter().enumerate() {
        if selected.peek() == Some(&i) {
            selected.next();
        } else {
            tail += v.abs();
        }
    }
    Ok(tail)
}

/// A subgradient of the top-(K,1) norm: entries in {−1, 0, +1} with at most
/// `k` nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientVector {
    pub w: Vec<f64>,
    pub k: usize,
}

impl SubgradientVector {
    /// Positive and negative parts `((w)₊, (−w)₊)` stacked into one vector of
    /// length `2N`, the subgradient used in the split variables.
    pub fn split_stacked(&self) -> Vec<f64> {
        let n = self.w.len();
        let mut out = vec![0.0; 2 * n];
        for (i, &w) in self.w.iter().enumerate() {
            if w > 0.0 {
                out[i] = w;
            } else if w < 0.0 {
                out[n + i] = -w;
            }
        }
        out
    }
}

/// Signs of the `k` largest-magnitude entries, zero elsewhere.
///
/// A selected entry that is exactly zero keeps sign 0, so `x = 0` yields
/// `w = 0` and the first DC step from the origin is a plain ℓ1 solve. The
/// result still satisfies `⟨x, w⟩ = ‖x‖_{K,1}` with `‖w‖∞ ≤ 1` and
/// `‖w‖₁ ≤ k`, i.e. it lies in the subdifferential.
pub fn top_k1_subgradient(x: &[f64], k: usize) -> Result<SubgradientVector> {
    let mut w = vec![0.0; x.len()];
    for i in top_k_indices(x, k)? {
        w[i] = if x[i] < 0.0 {
            -1.0
        } else if x[i] > 0.0 {
            1.0
        } else {
            0.0
        };
    }
    Ok(SubgradientVector { w, k })
}

/// Nonnegative parts with `x = u − v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVector {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn split_pos_neg(x: &[f64]) -> SplitVector {
    SplitVector {
        u: x.iter().map(|&a| a.max(0.0)).collect(),
        v: x.iter().map(|&a| (-a).max(0.0)).collect(),
    }
}

/// `u − v`; the parts need not be complementary.
pub fn merge_split(s: &SplitVector) -> Result<Vec<f64>> {
    if s.u.len() != s.v.len() {
        return Err(Error::dim(format!(
            "positive part has length {} but negative part has length {}",
            s.u.len(),
            s.v.len()
        )));
    }
    Ok(s.u.iter().zip(&s.v).map(|(a, b)| a - b).collect())
}

/// Orthogonal projection onto the nonnegative orthant.
pub fn project_nonneg(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&a| a.max(0.0)).collect()
}

/// `sign(a)·max(|a| − lam, 0)`.
pub fn soft_threshold(a: f64, lam: f64) -> Result<f64> {
    if !(lam >= 0.0) {
        return Err(Error::input(format!("threshold must be >= 0, got {lam}")));
    }
    Ok(shrink(a, lam))
}

/// Unchecked soft threshold for hot loops; `lam` must be nonnegative.
#[inline]
pub(crate) fn shrink(a: f64, lam: f64) -> f64 {
    let m = a.abs() - lam;
    if m > 0.0 {
        m.copysign(a)
    } else {
        0.0
    }
}
