use crate::{Error, Result};

/// Column-wise z-scores with the sample standard deviation.
pub fn standardize(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (mean, sd) = column_stats(rows)?;
    Ok(apply_standardization(rows, &mean, &sd))
}

/// Column means and sample standard deviations; fails on constant columns.
pub fn column_stats(rows: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("standardization needs at least 2 rows, got {n}")));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Validation("ragged feature matrix".into()));
    }
    let mut mean = vec![0.0; d];
    let mut sd = vec![0.0; d];
    for j in 0..d {
        mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        sd[j] = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        if !(sd[j] > 0.0) {
            return Err(Error::Degenerate(format!("column {j} is constant")));
        }
    }
    Ok((mean, sd))
}

pub fn apply_standardization(rows: &[Vec<f64>], mean: &[f64], sd: &[f64]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.iter().zip(mean).zip(sd).map(|((x, m), s)| (x - m) / s).collect()).collect()
}

/// Mean absolute deviation of a group's standardized vectors from the
/// baseline vector, over members and features.
pub fn baseline_offset(group: &[Vec<f64>], baseline: &[f64]) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::Degenerate("baseline offset of an empty group".into()));
    }
    if group.iter().any(|g| g.len() != baseline.len()) || baseline.is_empty() {
        return Err(Error::Validation(format!("group vectors must have {} features", baseline.len())));
    }
    let total: f64 = group.iter().flat_map(|g| g.iter().zip(baseline).map(|(x, b)| (x - b).abs())).sum();
    Ok(total / (group.len() * baseline.len()) as f64)
}

/// Element-wise mean of equally long vectors.
pub fn mean_vector(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows.first().map_or(0, Vec::len);
    (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect()
}
