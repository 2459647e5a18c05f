//! Grey relational analysis over a candidates x criteria decision matrix.
//!
//! The pipeline is min-max normalization (directions folded in, so the
//! reference sequence is the all-ones ideal), Deng's relational coefficient
//! with distinguishing coefficient `rho`, and a weighted grade. Candidates are
//! ranked by grade, descending, ties going to the lower id.

use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreyError {
    #[error("decision matrix has no candidates or no criteria")]
    Empty,
    #[error("matrix shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("distinguishing coefficient must lie in (0, 1], got {0}")]
    InvalidRho(f64),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weights must be finite, non-negative and not all zero")]
    InvalidWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Larger is better.
    Benefit,
    /// Smaller is better.
    Cost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSpec {
    pub name: String,
    pub direction: Direction,
    pub weight: f64,
}

impl CriterionSpec {
    pub fn new(name: impl Into<String>, direction: Direction, weight: f64) -> Self {
        Self {
            name: name.into(),
            direction,
            weight,
        }
    }
}

/// Dense row-major table of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Table {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GreyError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(GreyError::Shape {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let cols = self.cols;
        Self {
            rows: self.rows,
            cols,
            data: self.data.iter().enumerate().map(|(i, &v)| f(i % cols, v)).collect(),
        }
    }
}

pub const DEFAULT_RHO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    candidates: Vec<NodeId>,
    criteria: Vec<CriterionSpec>,
    values: Table,
    rho: f64,
}

impl DecisionMatrix {
    /// Builds a matrix with `rho` at its default. Criterion weights are
    /// normalized to sum to one.
    pub fn new(
        candidates: Vec<NodeId>,
        mut criteria: Vec<CriterionSpec>,
        rows: &[Vec<f64>],
    ) -> Result<Self, GreyError> {
        if candidates.is_empty() || criteria.is_empty() {
            return Err(GreyError::Empty);
        }
        if rows.len() != candidates.len() {
            return Err(GreyError::Shape {
                expected: candidates.len(),
                got: rows.len(),
            });
        }
        let values = Table::from_rows(rows)?;
        if values.cols() != criteria.len() {
            return Err(GreyError::Shape {
                expected: criteria.len(),
                got: values.cols(),
            });
        }
        for r in 0..values.rows() {
            for c in 0..values.cols() {
                if !values.get(r, c).is_finite() {
                    return Err(GreyError::NonFinite { row: r, col: c });
                }
            }
        }
        let weights = normalize_weights(criteria.iter().map(|c| c.weight))?;
        for (c, w) in criteria.iter_mut().zip(weights) {
            c.weight = w;
        }
        Ok(Self {
            candidates,
            criteria,
            values,
            rho: DEFAULT_RHO,
        })
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self, GreyError> {
        check_rho(rho)?;
        self.rho = rho;
        Ok(self)
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn criteria(&self) -> &[CriterionSpec] {
        &self.criteria
    }

    pub fn values(&self) -> &Table {
        &self.values
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn weights(&self) -> Vec<f64> {
        self.criteria.iter().map(|c| c.weight).collect()
    }
}

pub fn normalize_weights(weights: impl IntoIterator<Item = f64>) -> Result<Vec<f64>, GreyError> {
    let w: Vec<f64> = weights.into_iter().collect();
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(GreyError::InvalidWeights);
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(GreyError::InvalidWeights);
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

fn check_rho(rho: f64) -> Result<(), GreyError> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(GreyError::InvalidRho(rho))
    }
}

/// Min-max normalizes every column into `[0, 1]`, orienting Cost columns so
/// that 1 is always the ideal. A constant column maps to all ones.
pub fn normalize(matrix: &DecisionMatrix) -> Result<Table, GreyError> {
    let v = &matrix.values;
    if v.rows() == 0 || v.cols() == 0 {
        return Err(GreyError::Empty);
    }
    let bounds: Vec<(f64, f64)> = (0..v.cols())
        .map(|c| {
            (0..v.rows()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                let x = v.get(r, c);
                (lo.min(x), hi.max(x))
            })
        })
        .collect();
    let dirs: Vec<Direction> = matrix.criteria.iter().map(|c| c.direction).collect();
    Ok(v.map(|c, x| {
        let (lo, hi) = bounds[c];
        let span = hi - lo;
        if span == 0.0 {
            return 1.0;
        }
        let n = match dirs[c] {
            Direction::Benefit => (x - lo) / span,
            Direction::Cost => (hi - x) / span,
        };
        n.clamp(0.0, 1.0)
    }))
}

/// Grey relational coefficients against the all-ones reference sequence.
pub fn grey_coefficients(normalized: &Table, rho: f64) -> Result<Table, GreyError> {
    check_rho(rho)?;
    if normalized.rows() == 0 || normalized.cols() == 0 {
        return Err(GreyError::Empty);
    }
    let deltas = normalized.map(|_, x| (1.0 - x).abs());
    let (d_min, d_max) = deltas
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    if d_max == 0.0 {
        return Ok(deltas.map(|_, _| 1.0));
    }
    Ok(deltas.map(|_, d| (d_min + rho * d_max) / (d + rho * d_max)))
}

/// Weighted relational grade per candidate row.
pub fn grey_grade(coefficients: &Table, weights: &[f64]) -> Result<Vec<f64>, GreyError> {
    if weights.len() != coefficients.cols() {
        return Err(GreyError::WeightCount {
            expected: coefficients.cols(),
            got: weights.len(),
        });
    }
    Ok((0..coefficients.rows())
        .map(|r| {
            coefficients
                .row(r)
                .iter()
                .zip(weights)
                .fold(0.0, |acc, (xi, w)| acc + w * xi)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranked {
    pub id: NodeId,
    pub grade: f64,
}

pub fn rank_candidates(matrix: &DecisionMatrix) -> Result<Vec<Ranked>, GreyError> {
    let normalized = normalize(matrix)?;
    let coefficients = grey_coefficients(&normalized, matrix.rho)?;
    let grades = grey_grade(&coefficients, &matrix.weights())?;
    let mut ranked: Vec<Ranked> = matrix
        .candidates
        .iter()
        .zip(grades)
        .map(|(&id, grade)| Ranked { id, grade })
        .collect();
    ranked.sort_by(|a, b| b.grade.total_cmp(&a.grade).then(a.id.cmp(&b.id)));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: u32) -> Vec<NodeId> {
        (0..n).map(NodeId).collect()
    }

    fn single_column(direction: Direction, col: &[f64]) -> DecisionMatrix {
        let rows: Vec<Vec<f64>> = col.iter().map(|&v| vec![v]).collect();
        DecisionMatrix::new(
            ids(col.len() as u32),
            vec![CriterionSpec::new("c", direction, 1.0)],
            &rows,
        )
        .unwrap()
    }

    fn column(t: &Table, c: usize) -> Vec<f64> {
        (0..t.rows()).map(|r| t.get(r, c)).collect()
    }

    #[test]
    fn normalize_examples() {
        let b = normalize(&single_column(Direction::Benefit, &[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(column(&b, 0), vec![0.0, 0.5, 1.0]);
        let c = normalize(&single_column(Direction::Cost, &[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(column(&c, 0), vec![1.0, 0.5, 0.0]);
        let k = normalize(&single_column(Direction::Benefit, &[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(column(&k, 0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn coefficient_examples() {
        let ideal = Table::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(grey_coefficients(&ideal, 0.5).unwrap().row(0), &[1.0, 1.0]);

        let t = Table::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let xi = grey_coefficients(&t, 0.5).unwrap();
        assert_eq!(xi.row(0), &[1.0, 1.0 / 3.0]);
        assert_eq!(xi.row(1), &[1.0 / 3.0, 1.0]);

        let single = Table::from_rows(&[vec![0.5]]).unwrap();
        assert_eq!(grey_coefficients(&single, 0.5).unwrap().row(0), &[1.0]);
    }

    #[test]
    fn rho_out_of_range_is_rejected() {
        let t = Table::from_rows(&[vec![0.5]]).unwrap();
        assert_eq!(grey_coefficients(&t, 0.0), Err(GreyError::InvalidRho(0.0)));
        assert_eq!(grey_coefficients(&t, 1.5), Err(GreyError::InvalidRho(1.5)));
        assert!(grey_coefficients(&t, 1.0).is_ok());
    }

    #[test]
    fn grade_examples() {
        let xi = Table::from_rows(&[vec![1.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
        let g = grey_grade(&xi, &[0.5, 0.5]).unwrap();
        assert!((g[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g[0], g[1]);

        let ideal = Table::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let g = grey_grade(&ideal, &[0.2, 0.3, 0.5]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);

        assert_eq!(
            grey_grade(&ideal, &[1.0]),
            Err(GreyError::WeightCount { expected: 3, got: 1 })
        );
    }

    #[test]
    fn rank_singleton_and_dominance() {
        let m = single_column(Direction::Benefit, &[7.0]);
        let r = rank_candidates(&m).unwrap();
        assert_eq!(
            r,
            vec![Ranked {
                id: NodeId(0),
                grade: 1.0
            }]
        );

        let crit = vec![
            CriterionSpec::new("energy", Direction::Benefit, 1.0),
            CriterionSpec::new("distance", Direction::Cost, 1.0),
        ];
        let rows = vec![vec![1.0, 50.0], vec![3.0, 10.0], vec![2.0, 30.0]];
        let m = DecisionMatrix::new(vec![NodeId(4), NodeId(9), NodeId(2)], crit, &rows).unwrap();
        assert_eq!(rank_candidates(&m).unwrap()[0].id, NodeId(9));
    }

    #[test]
    fn ties_break_by_ascending_id() {
        let crit = vec![
            CriterionSpec::new("a", Direction::Benefit, 1.0),
            CriterionSpec::new("b", Direction::Benefit, 1.0),
        ];
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let m = DecisionMatrix::new(vec![NodeId(8), NodeId(3)], crit, &rows).unwrap();
        let r = rank_candidates(&m).unwrap();
        assert_eq!(r[0].grade, r[1].grade);
        assert_eq!(r[0].id, NodeId(3));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            DecisionMatrix::new(vec![], vec![CriterionSpec::new("a", Direction::Cost, 1.0)], &[]),
            Err(GreyError::Empty)
        );
        let crit = vec![CriterionSpec::new("a", Direction::Cost, 1.0)];
        assert_eq!(
            DecisionMatrix::new(ids(1), crit.clone(), &[vec![f64::NAN]]),
            Err(GreyError::NonFinite { row: 0, col: 0 })
        );
        assert_eq!(
            DecisionMatrix::new(
                ids(1),
                vec![CriterionSpec::new("a", Direction::Cost, 0.0)],
                &[vec![1.0]]
            ),
            Err(GreyError::InvalidWeights)
        );
        assert!(matches!(
            DecisionMatrix::new(ids(2), crit, &[vec![1.0]]),
            Err(GreyError::Shape { .. })
        ));
    }

    #[test]
    fn weights_are_normalized() {
        let crit = vec![
            CriterionSpec::new("a", Direction::Benefit, 2.0),
            CriterionSpec::new("b", Direction::Benefit, 6.0),
        ];
        let m = DecisionMatrix::new(ids(1), crit, &[vec![1.0, 2.0]]).unwrap();
        assert_eq!(m.weights(), vec![0.25, 0.75]);
    }
}
