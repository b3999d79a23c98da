//! Prediction-accuracy criteria: rank-based Gini index, ordered Lorentz
//! curve Gini index, mean absolute deviation splits, and minimax model
//! selection.

use crate::error::{Error, Result};
use crate::num::pairwise_sum;

/// Ascending ranks in 1..=n with LAST tie-breaking: among equal values the
/// earlier index receives the higher rank.
pub fn rank_last(values: &[f64]) -> Vec<usize> {
    assert!(!values.is_empty(), "rank_last needs a nonempty input");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then_with(|| b.cmp(&a)) // equal values: later index sorts first
    });
    let mut ranks = vec![0usize; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Normalized rank-based Gini index.
///
/// Depends on the predictions only through their ranks, so any strictly
/// increasing transform of `yhat` leaves the value unchanged. Errors when
/// the denominator degenerates (all losses zero, or losses whose self-rank
/// term equals the constant offset).
pub fn gini_a(y: &[f64], yhat: &[f64]) -> Result<f64> {
    assert_eq!(y.len(), yhat.len(), "losses and predictions must align");
    if y.is_empty() {
        return Err(Error::Data("gini_a needs at least one observation".into()));
    }
    let n = y.len() as f64;
    let y_sum = pairwise_sum(y);
    if y_sum <= 0.0 {
        return Err(Error::Data("gini_a undefined when all losses are zero".into()));
    }
    let offset = (n + 1.0) / 2.0; // sum_i (n - i + 1)/n
    let weighted = |ranks: &[usize]| -> f64 {
        let terms: Vec<f64> = y
            .iter()
            .zip(ranks)
            .map(|(&yi, &r)| yi * r as f64)
            .collect();
        pairwise_sum(&terms) / y_sum - offset
    };
    let num = weighted(&rank_last(yhat));
    let den = weighted(&rank_last(y));
    if den == 0.0 {
        return Err(Error::Data(
            "gini_a undefined: denominator degenerates for these losses".into(),
        ));
    }
    Ok(num / den)
}

/// Points of the ordered Lorentz curve `(D_P, D_L)`, starting at (0, 0) and
/// ending at (1, 1).
///
/// Policies are sorted by relative premium `competing/base`; the step
/// functions jump at distinct relative-premium values, so tied policies
/// move together (tie order is pinned by the LAST rule for determinism but
/// cannot affect the curve).
pub fn lorentz_curve(y: &[f64], base: &[f64], competing: &[f64]) -> Result<Vec<(f64, f64)>> {
    assert_eq!(y.len(), base.len(), "losses and base premiums must align");
    assert_eq!(y.len(), competing.len(), "losses and competing premiums must align");
    if y.is_empty() {
        return Err(Error::Data("lorentz_curve needs at least one observation".into()));
    }
    if let Some(bad) = base.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Data(format!(
            "base premiums must be positive, got {bad}"
        )));
    }
    let y_sum = pairwise_sum(y);
    let b_sum = pairwise_sum(base);
    if y_sum <= 0.0 {
        return Err(Error::Data("lorentz_curve undefined when all losses are zero".into()));
    }

    let relative: Vec<f64> = base
        .iter()
        .zip(competing)
        .map(|(&b, &p)| p / b)
        .collect();
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_unstable_by(|&a, &b| relative[a].total_cmp(&relative[b]).then_with(|| b.cmp(&a)));

    // group boundaries: position of the last index sharing each value
    let mut group_end = vec![0usize; order.len()];
    let mut k = 0;
    while k < order.len() {
        let mut e = k;
        while e + 1 < order.len() && relative[order[e + 1]] == relative[order[k]] {
            e += 1;
        }
        for slot in k..=e {
            group_end[slot] = e;
        }
        k = e + 1;
    }

    let mut cum_b = vec![0.0; order.len()];
    let mut cum_y = vec![0.0; order.len()];
    let mut acc_b = 0.0;
    let mut acc_y = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        acc_b += base[i];
        acc_y += y[i];
        cum_b[pos] = acc_b;
        cum_y[pos] = acc_y;
    }

    let mut points = Vec::with_capacity(order.len() + 1);
    points.push((0.0, 0.0));
    for pos in 0..order.len() {
        let e = group_end[pos];
        points.push((cum_b[e] / b_sum, cum_y[e] / y_sum));
    }
    if let Some(last) = points.last_mut() {
        *last = (1.0, 1.0);
    }
    Ok(points)
}

/// Ordered Lorentz curve Gini index: twice the trapezoidal area between the
/// curve and the line of equality, reported x100. Zero when the competing
/// premium is proportional to the base premium; positive when sorting by
/// the relative premium concentrates losses above the premium share.
pub fn gini_b(y: &[f64], base: &[f64], competing: &[f64]) -> Result<f64> {
    let points = lorentz_curve(y, base, competing)?;
    let mut area = 0.0;
    for w in points.windows(2) {
        let (x0, l0) = w[0];
        let (x1, l1) = w[1];
        area += (x1 - x0) * ((x0 - l0) + (x1 - l1)) / 2.0;
    }
    Ok(2.0 * area * 100.0)
}

/// Accuracy summary: Gini index, MAD, and its zero-/positive-loss splits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub gini_a: f64,
    pub mad: f64,
    pub mad_zero: f64,
    pub mad_pos: f64,
    /// Gini index restricted to the positive-loss records.
    pub gini_a_pos: f64,
    pub n: usize,
    pub n_zero: usize,
    pub n_pos: usize,
}

/// MAD against `reference` when given (simulation mode: deviations from the
/// expected true loss), else against the observed losses. Splits are by
/// observed `y == 0` versus `y > 0`. Gini values that are undefined for the
/// data at hand are reported as NaN rather than failing the whole report.
pub fn mad_suite(y: &[f64], yhat: &[f64], reference: Option<&[f64]>) -> EvalReport {
    assert_eq!(y.len(), yhat.len(), "losses and predictions must align");
    if let Some(r) = reference {
        assert_eq!(y.len(), r.len(), "losses and reference must align");
    }
    let target = reference.unwrap_or(y);
    let n = y.len();
    let mut dev_zero = Vec::new();
    let mut dev_pos = Vec::new();
    let mut pos_y = Vec::new();
    let mut pos_yhat = Vec::new();
    for i in 0..n {
        let d = (target[i] - yhat[i]).abs();
        if y[i] == 0.0 {
            dev_zero.push(d);
        } else {
            dev_pos.push(d);
            pos_y.push(y[i]);
            pos_yhat.push(yhat[i]);
        }
    }
    let mad_zero = mean_or_zero(&dev_zero);
    let mad_pos = mean_or_zero(&dev_pos);
    let mad = (pairwise_sum(&dev_zero) + pairwise_sum(&dev_pos)) / n.max(1) as f64;
    EvalReport {
        gini_a: gini_a(y, yhat).unwrap_or(f64::NAN),
        mad,
        mad_zero,
        mad_pos,
        gini_a_pos: if pos_y.is_empty() {
            f64::NAN
        } else {
            gini_a(&pos_y, &pos_yhat).unwrap_or(f64::NAN)
        },
        n,
        n_zero: dev_zero.len(),
        n_pos: dev_pos.len(),
    }
}

fn mean_or_zero(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

/// Square matrix of Gini-b indices: entry `(i, j)` scores base premium `i`
/// against competing premium `j`; the diagonal is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GiniBMatrix {
    values: Vec<Vec<f64>>,
}

impl GiniBMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let k = values.len();
        for (i, row) in values.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries in a {k}x{k} matrix",
                    row.len()
                )));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry ({i}, {i}) must be exactly 0, got {}",
                    row[i]
                )));
            }
        }
        Ok(Self { values })
    }

    /// Pairwise matrix from one prediction set per model.
    pub fn from_predictions(y: &[f64], premiums: &[Vec<f64>]) -> Result<Self> {
        let k = premiums.len();
        let mut values = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    values[i][j] = gini_b(y, &premiums[i], &premiums[j])?;
                }
            }
        }
        Self::new(values)
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Largest off-diagonal entry of each row: the base model's
    /// vulnerability to its strongest competitor.
    pub fn row_maxima(&self) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| *v)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

/// Minimax selection: the base model whose worst-case Gini-b against the
/// competitors is smallest. Ties go to the lowest index.
pub fn minimax_select(matrix: &GiniBMatrix) -> usize {
    let maxima = matrix.row_maxima();
    let mut best = 0;
    for (i, &m) in maxima.iter().enumerate() {
        if m < maxima[best] {
            best = i;
        }
    }
    best
}
