use super::{w1, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// One measure per node of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFlow {
    grid: TimeGrid,
    measures: Vec<EmpiricalMeasure>,
}

impl MeasureFlow {
    pub fn new(grid: TimeGrid, measures: Vec<EmpiricalMeasure>) -> Result<Self> {
        if measures.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} measures for {} grid nodes",
                measures.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, measures })
    }

    /// The same measure at every node.
    pub fn constant(grid: TimeGrid, m: EmpiricalMeasure) -> Self {
        let measures = vec![m; grid.len()];
        Self { grid, measures }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn measures(&self) -> &[EmpiricalMeasure] {
        &self.measures
    }

    pub fn at(&self, node: usize) -> &EmpiricalMeasure {
        &self.measures[node]
    }

    pub fn terminal(&self) -> &EmpiricalMeasure {
        self.measures.last().expect("flow has at least two nodes")
    }

    pub fn into_measures(self) -> Vec<EmpiricalMeasure> {
        self.measures
    }
}

/// `max_t W1(f1_t, f2_t)` over the common grid.
pub fn flow_sup_w1(f1: &MeasureFlow, f2: &MeasureFlow) -> Result<f64> {
    if !f1.grid.same_as(&f2.grid) {
        return Err(Error::GridMismatch("flows are defined on different grids".into()));
    }
    Ok(f1
        .measures
        .iter()
        .zip(&f2.measures)
        .map(|(a, b)| w1(a, b))
        .fold(0.0, f64::max))
}
