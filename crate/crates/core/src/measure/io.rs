//! CSV encodings: `position,weight` for a measure and `t,position,weight`
//! (long format) for a flow.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EmpiricalMeasure, MeasureFlow};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

#[derive(Serialize, Deserialize)]
struct AtomRow {
    position: f64,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct FlowRow {
    t: f64,
    position: f64,
    weight: f64,
}

pub fn write_measure<W: Write>(out: W, m: &EmpiricalMeasure) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (position, weight) in m.atoms() {
        w.serialize(AtomRow { position, weight })?;
    }
    w.flush().map_err(|e| Error::io("<measure csv>", e))?;
    Ok(())
}

pub fn read_measure<R: Read>(input: R) -> Result<EmpiricalMeasure> {
    let mut r = csv::Reader::from_reader(input);
    let mut atoms = Vec::new();
    for row in r.deserialize() {
        let row: AtomRow = row?;
        atoms.push((row.position, row.weight));
    }
    EmpiricalMeasure::new(atoms)
}

pub fn write_flow<W: Write>(out: W, flow: &MeasureFlow) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&t, m) in flow.grid().points().iter().zip(flow.measures()) {
        for (position, weight) in m.atoms() {
            w.serialize(FlowRow { t, position, weight })?;
        }
    }
    w.flush().map_err(|e| Error::io("<flow csv>", e))?;
    Ok(())
}

pub fn read_flow<R: Read>(input: R) -> Result<MeasureFlow> {
    let mut r = csv::Reader::from_reader(input);
    let mut points: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in r.deserialize() {
        let row: FlowRow = row?;
        if points.last() != Some(&row.t) {
            points.push(row.t);
            groups.push(Vec::new());
        }
        groups.last_mut().expect("pushed above").push((row.position, row.weight));
    }
    let grid = TimeGrid::from_points(points)?;
    let measures = groups
        .into_iter()
        .map(EmpiricalMeasure::new)
        .collect::<Result<Vec<_>>>()?;
    MeasureFlow::new(grid, measures)
}
