use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparameter {
    WindowSize,
    Overlap,
    K,
    Distance,
}

impl Hyperparameter {
    pub const ALL: [Hyperparameter; 4] = [
        Hyperparameter::WindowSize,
        Hyperparameter::Overlap,
        Hyperparameter::K,
        Hyperparameter::Distance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Hyperparameter::WindowSize => "window_size",
            Hyperparameter::Overlap => "overlap",
            Hyperparameter::K => "k",
            Hyperparameter::Distance => "distance",
        }
    }

    /// Comparable key of this hyperparameter's value in `c`.
    fn key(self, c: &Configuration) -> u64 {
        match self {
            Hyperparameter::WindowSize => c.window_size as u64,
            Hyperparameter::Overlap => c.overlap_pct as u64,
            Hyperparameter::K => c.k as u64,
            Hyperparameter::Distance => c.distance as u64,
        }
    }
}

impl fmt::Display for Hyperparameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Variance shares of a full factorial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaShares {
    pub grand_mean: f64,
    pub total_variance: f64,
    /// One share per factor.
    pub main: Vec<f64>,
    /// `((i, j), share)` for every factor pair `i < j`.
    pub pairwise: Vec<((usize, usize), f64)>,
    /// Interactions of order three and above.
    pub residual: f64,
}

fn strides(levels: &[usize]) -> Vec<usize> {
    let mut s = vec![1; levels.len()];
    for i in (0..levels.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * levels[i + 1];
    }
    s
}

/// Exact functional ANOVA of `values`, laid out row-major over a full grid
/// with `levels[i]` values on factor `i` (last factor fastest).
pub fn grid_anova(levels: &[usize], values: &[f64]) -> Result<AnovaShares> {
    let cells: usize = levels.iter().product();
    if levels.is_empty() || cells == 0 {
        return Err(Error::Empty("ANOVA grid"));
    }
    if cells != values.len() {
        return Err(Error::DimensionMismatch {
            expected: cells,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let total = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    // relative floor so rounding noise on a constant metric is not decomposed
    if total <= 1e-24 * mean.abs().max(1.0).powi(2) {
        return Err(Error::ConstantMetric);
    }
    let stride = strides(levels);
    let level_of = |cell: usize, f: usize| (cell / stride[f]) % levels[f];

    // centred one-way marginal means
    let mut mains: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
    for (f, &l) in levels.iter().enumerate() {
        let mut sums = vec![0.0; l];
        for (cell, v) in values.iter().enumerate() {
            sums[level_of(cell, f)] += v;
        }
        let per = (cells / l) as f64;
        mains.push(sums.into_iter().map(|s| s / per - mean).collect());
    }
    let main: Vec<f64> = mains
        .iter()
        .map(|m| m.iter().map(|e| e * e).sum::<f64>() / m.len() as f64 / total)
        .collect();

    let mut pairwise = Vec::new();
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            let mut sums = vec![0.0; levels[i] * levels[j]];
            for (cell, v) in values.iter().enumerate() {
                sums[level_of(cell, i) * levels[j] + level_of(cell, j)] += v;
            }
            let per = (cells / (levels[i] * levels[j])) as f64;
            let mut var = 0.0;
            for a in 0..levels[i] {
                for b in 0..levels[j] {
                    let e = sums[a * levels[j] + b] / per - mean - mains[i][a] - mains[j][b];
                    var += e * e;
                }
            }
            pairwise.push(((i, j), var / sums.len() as f64 / total));
        }
    }
    let residual = 1.0 - main.iter().sum::<f64>() - pairwise.iter().map(|p| p.1).sum::<f64>();
    Ok(AnovaShares {
        grand_mean: mean,
        total_variance: total,
        main,
        pairwise,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub metric: String,
    /// Distinct values seen per hyperparameter, in `Hyperparameter::ALL` order.
    pub levels: Vec<usize>,
    pub main: Vec<(Hyperparameter, f64)>,
    pub pairwise: Vec<(Hyperparameter, Hyperparameter, f64)>,
    pub residual: f64,
}

impl ImportanceReport {
    /// Hyperparameters by decreasing main-effect share.
    pub fn ranking(&self) -> Vec<Hyperparameter> {
        let mut m = self.main.clone();
        m.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        m.into_iter().map(|(h, _)| h).collect()
    }

    pub fn share(&self, h: Hyperparameter) -> f64 {
        self.main.iter().find(|(x, _)| *x == h).map_or(0.0, |m| m.1)
    }
}

/// Grid ANOVA of `metric` over results covering a full Cartesian sub-grid.
/// Several values for one cell (several users, say) are averaged.
pub fn hyperparameter_importance(results: &[(Configuration, f64)], metric: &str) -> Result<ImportanceReport> {
    if results.is_empty() {
        return Err(Error::Empty("importance input"));
    }
    let axes: Vec<Vec<u64>> = Hyperparameter::ALL
        .iter()
        .map(|h| {
            let mut v: Vec<u64> = results.iter().map(|(c, _)| h.key(c)).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let levels: Vec<usize> = axes.iter().map(Vec::len).collect();
    let cells: usize = levels.iter().product();
    let stride = strides(&levels);
    let mut sums = vec![0.0; cells];
    let mut counts = vec![0usize; cells];
    for (c, v) in results {
        if !v.is_finite() {
            return Err(Error::InvalidConfig(format!("{metric} is not finite for {c}")));
        }
        let cell: usize = Hyperparameter::ALL
            .iter()
            .enumerate()
            .map(|(f, h)| axes[f].binary_search(&h.key(c)).expect("value collected above") * stride[f])
            .sum();
        sums[cell] += v;
        counts[cell] += 1;
    }
    let missing = counts.iter().filter(|&&n| n == 0).count();
    if missing > 0 {
        return Err(Error::IncompleteGrid(format!(
            "{missing} of {cells} cells of the {} grid have no result",
            levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("x")
        )));
    }
    let values: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();
    let shares = grid_anova(&levels, &values)?;
    Ok(ImportanceReport {
        metric: metric.to_string(),
        levels,
        main: Hyperparameter::ALL.iter().copied().zip(shares.main).collect(),
        pairwise: shares
            .pairwise
            .into_iter()
            .map(|((i, j), s)| (Hyperparameter::ALL[i], Hyperparameter::ALL[j], s))
            .collect(),
        residual: shares.residual,
    })
}
