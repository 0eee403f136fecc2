use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use latent_consensus::{Matrix, Vector, WeightedDigraph};
use serde::Serialize;

pub fn read_graph(path: &Path) -> Result<WeightedDigraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    WeightedDigraph::from_json_str(&text)
        .with_context(|| format!("parsing graph {}", path.display()))
}

/// A JSON array of numbers.
pub fn read_vector(path: &Path) -> Result<Vector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let values: Vec<f64> = serde_json::from_str(&text)
        .with_context(|| format!("parsing {} as a JSON array of numbers", path.display()))?;
    if values.iter().any(|x| !x.is_finite()) {
        bail!("{} contains non-finite values", path.display());
    }
    Ok(Vector::from_vec(values))
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector_values(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}
