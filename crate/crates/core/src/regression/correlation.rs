use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, INTERCEPT_LABEL};
use super::ols::fit_ols;
use crate::error::{Error, Result};
use crate::sampling::sample_indices;
use crate::store::{Column, Dataset};

/// Pearson correlations. Entries involving a constant column are `None`
/// and the column is listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub undefined: Vec<String>,
}

fn expand(dataset: &Dataset, name: &str) -> Result<Vec<(String, Vec<f64>)>> {
    match dataset.column(name) {
        Some(Column::Integer(v)) => Ok(vec![(name.to_string(), v.iter().map(|&x| x as f64).collect())]),
        Some(Column::Categorical(cat)) => Ok(cat
            .levels()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, level)| {
                let col = cat.codes().iter().map(|&c| if c as usize == i { 1.0 } else { 0.0 }).collect();
                (format!("{name}={level}"), col)
            })
            .collect()),
        None => Err(Error::Validation(format!("unknown column {name}"))),
    }
}

/// Correlations between variables; categoricals expand to their
/// treatment-coded indicator columns.
pub fn correlation_matrix(dataset: &Dataset, variables: &[String]) -> Result<CorrelationMatrix> {
    if dataset.row_count() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 rows".into()));
    }
    let mut cols = Vec::new();
    for v in variables {
        let name = dataset.resolve(v).ok_or_else(|| Error::Validation(format!("unknown column {v}")))?;
        cols.extend(expand(dataset, name)?);
    }
    let n = dataset.row_count() as f64;
    let centered: Vec<(Vec<f64>, f64)> = cols
        .iter()
        .map(|(_, c)| {
            let mean = c.iter().sum::<f64>() / n;
            let d: Vec<f64> = c.iter().map(|x| x - mean).collect();
            let ss = d.iter().map(|x| x * x).sum::<f64>();
            (d, ss)
        })
        .collect();
    let k = cols.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let (di, si) = &centered[i];
            let (dj, sj) = &centered[j];
            if *si == 0.0 || *sj == 0.0 {
                continue;
            }
            let r = if i == j {
                1.0
            } else {
                let sxy: f64 = di.iter().zip(dj).map(|(a, b)| a * b).sum();
                (sxy / (si.sqrt() * sj.sqrt())).clamp(-1.0, 1.0)
            };
            values[i][j] = Some(r);
            values[j][i] = Some(r);
        }
    }
    let undefined = cols.iter().zip(&centered).filter(|(_, (_, ss))| *ss == 0.0).map(|((l, _), _)| l.clone()).collect();
    Ok(CorrelationMatrix { labels: cols.into_iter().map(|(l, _)| l).collect(), values, undefined })
}

/// Points for a 3-D scatter and the least-squares plane `z = b0 + b1 x + b2 y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter3d {
    pub axes: [String; 3],
    pub points: Vec<[f64; 3]>,
    /// True when `points` is a seeded subsample of the rows.
    pub subsampled: bool,
    /// `[intercept, x, y]`; a `None` entry is an aliased plane term.
    pub plane: [Option<f64>; 3],
    pub r_squared: Option<f64>,
}

fn axis_values(dataset: &Dataset, name: &str) -> Result<Vec<f64>> {
    match dataset.column(name) {
        Some(Column::Integer(v)) => Ok(v.iter().map(|&x| x as f64).collect()),
        Some(Column::Categorical(cat)) => Ok(cat.codes().iter().map(|&c| f64::from(c)).collect()),
        None => Err(Error::Validation(format!("unknown column {name}"))),
    }
}

/// Scatter data with categoricals mapped to level indices. At most
/// `max_points` rows are returned; the plane is fitted on all rows.
pub fn scatter3d_data(dataset: &Dataset, axes: [&str; 3], max_points: usize, seed: u64) -> Result<Scatter3d> {
    let names: Vec<String> = axes
        .iter()
        .map(|a| dataset.resolve(a).map(str::to_string).ok_or_else(|| Error::Validation(format!("unknown column {a}"))))
        .collect::<Result<_>>()?;
    if names[0] == names[1] || names[0] == names[2] || names[1] == names[2] {
        return Err(Error::Validation("scatter axes must be three distinct columns".into()));
    }
    if max_points == 0 {
        return Err(Error::Validation("max_points must be at least 1".into()));
    }
    let x = axis_values(dataset, &names[0])?;
    let y = axis_values(dataset, &names[1])?;
    let z = axis_values(dataset, &names[2])?;

    let design = DesignMatrix::from_numeric(&[&names[0], &names[1]], vec![x.clone(), y.clone()], true)?;
    let fit = fit_ols(&design, &z)?;
    let coef = |label: &str| fit.coefficient(label).and_then(|c| c.estimate);

    let n = dataset.row_count();
    let (rows, subsampled) =
        if n > max_points { (sample_indices(n, max_points, seed)?, true) } else { ((0..n).collect(), false) };
    let points = rows.iter().map(|&r| [x[r], y[r], z[r]]).collect();
    Ok(Scatter3d {
        axes: [names[0].clone(), names[1].clone(), names[2].clone()],
        points,
        subsampled,
        plane: [coef(INTERCEPT_LABEL), coef(&names[0]), coef(&names[1])],
        r_squared: fit.r_squared,
    })
}
