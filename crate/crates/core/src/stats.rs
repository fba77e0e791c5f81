//! PAR2 scoring and the paired comparison statistics used on benchmark results.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

/// Unit in which a trial's cost and timeout are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Currency {
    Flips,
    Seconds,
}

/// Outcome of one (instance, solver, seed) trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(rename = "instanceId")]
    pub instance_id: String,
    #[serde(rename = "solverId")]
    pub solver_id: String,
    pub seed: u64,
    pub solved: bool,
    pub flips: u64,
    pub seconds: f64,
}

impl TrialRecord {
    pub fn cost(&self, currency: Currency) -> f64 {
        match currency {
            Currency::Flips => self.flips as f64,
            Currency::Seconds => self.seconds,
        }
    }
}

/// Measured cost if solved, twice the timeout otherwise.
pub fn par2(record: &TrialRecord, timeout: f64, currency: Currency) -> f64 {
    if record.solved {
        record.cost(currency)
    } else {
        2.0 * timeout
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no default flip timeout for {0}-SAT")]
    UnsupportedWidth(usize),
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("all differences are zero")]
    AllZero,
}

/// Training-time flip timeout by clause width.
pub fn default_flip_timeout(k: usize) -> Result<u64, StatsError> {
    match k {
        3 => Ok(1_000_000_000),
        5 => Ok(500_000_000),
        7 => Ok(250_000_000),
        _ => Err(StatsError::UnsupportedWidth(k)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with `n - 1` in the denominator.
fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

/// Student's paired t-test on `a - b`.
///
/// Identical samples give `t = 0, p = 1`; a constant non-zero difference has
/// no variance and is an error.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: a.len() });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = d.len() as f64 - 1.0;
    if d.iter().all(|&v| v == 0.0) {
        return Ok(TTest { t: 0.0, p: 1.0, df });
    }
    let var = variance(&d);
    if var == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = mean(&d) / (var / d.len() as f64).sqrt();
    Ok(TTest { t, p: two_sided_t(t, df), df })
}

/// Welch's unequal-variance t-test.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    for x in [a, b] {
        if x.len() < 2 {
            return Err(StatsError::TooFewSamples { needed: 2, got: x.len() });
        }
    }
    let (va, vb) = (variance(a) / a.len() as f64, variance(b) / b.len() as f64);
    if va + vb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2)
        / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    Ok(TTest { t, p: two_sided_t(t, df), df })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignedRank {
    /// Sum of the ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Two-sided.
    pub p: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub exact: bool,
}

/// Non-zero differences at or above this count use the normal approximation.
pub const WILCOXON_EXACT_BELOW: usize = 20;

/// Average ranks (1-based) of `values`, plus the sizes of tie groups.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Wilcoxon signed-rank test. Zero differences are dropped and ties get
/// average ranks. Fewer than [`WILCOXON_EXACT_BELOW`] non-zero differences
/// use the exact null distribution; otherwise the normal approximation with
/// tie and continuity corrections.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<SignedRank, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&v| v != 0.0).collect();
    if d.is_empty() {
        return Err(StatsError::AllZero);
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, &v)| v > 0.0).map(|(r, _)| r).sum();
    let n = d.len();

    if n < WILCOXON_EXACT_BELOW {
        let p = exact_signed_rank_p(&ranks, w_plus);
        return Ok(SignedRank { w_plus, p, n, exact: true });
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term).sqrt();
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / sd;
    let p = (2.0 * Normal::standard().cdf(-z)).min(1.0);
    Ok(SignedRank { w_plus, p, n, exact: false })
}

/// Two-sided exact p-value of `W+ = w_plus` under the sign-flip null.
///
/// Average ranks are multiples of 1/2, so the distribution of twice the rank
/// sum is computed by subset-sum counting over integers.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let target = (2.0 * w_plus).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: f64 = counts[..=target].iter().sum::<f64>() / all;
    let upper: f64 = counts[target..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

/// `(mean(a) - mean(b))` over the pooled standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    for x in [a, b] {
        if x.len() < 2 {
            return Err(StatsError::TooFewSamples { needed: 2, got: x.len() });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0);
    if pooled == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, got: x.len() });
    }
    let (rx, _) = average_ranks(x);
    let (ry, _) = average_ranks(y);
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum::<f64>().sqrt();
    if sx == 0.0 || sy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(cov / (sx * sy))
}
