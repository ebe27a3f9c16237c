//! Matrix input: shell literals and JSON files.

use std::path::Path;

use bockstein_core::{MatrixModP, MatrixModP2, Prime};

use crate::CliError;

/// Which residue range a parsed matrix must land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulus {
    P,
    PSquared,
}

impl Modulus {
    fn bound(self, p: Prime) -> u64 {
        match self {
            Modulus::P => p.get(),
            Modulus::PSquared => p.squared(),
        }
    }
}

/// Parses a matrix literal: rows separated by `;`, entries by `,`, e.g.
/// `"2,1;0,3"`. Out-of-range entries are errors unless `reduce` is set, in
/// which case they wrap into the declared modulus (negatives included).
pub fn parse_entries(
    literal: &str,
    p: Prime,
    rows: usize,
    cols: usize,
    modulus: Modulus,
    reduce: bool,
) -> Result<Vec<u64>, CliError> {
    let bound = modulus.bound(p);
    let trimmed = literal.trim();
    if rows == 0 || cols == 0 {
        if trimmed.is_empty() {
            return Ok(Vec::new());
        }
        return Err(CliError::Usage(format!(
            "a {rows}x{cols} matrix takes an empty literal, got {trimmed:?}"
        )));
    }
    let row_strs: Vec<&str> = trimmed.split(';').collect();
    if row_strs.len() != rows {
        return Err(CliError::Usage(format!(
            "expected {rows} rows separated by ';', got {}",
            row_strs.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (r, row) in row_strs.iter().enumerate() {
        let tokens: Vec<&str> = row.split(',').collect();
        if tokens.len() != cols {
            return Err(CliError::Usage(format!(
                "row {r} has {} entries, expected {cols}",
                tokens.len()
            )));
        }
        for token in tokens {
            let value: i128 = token.trim().parse().map_err(|_| {
                CliError::Usage(format!("non-integer matrix entry {:?}", token.trim()))
            })?;
            entries.push(normalize(value, bound, reduce)?);
        }
    }
    Ok(entries)
}

fn normalize(value: i128, bound: u64, reduce: bool) -> Result<u64, CliError> {
    if reduce {
        return Ok(value.rem_euclid(bound as i128) as u64);
    }
    if value < 0 || value as u128 >= bound as u128 {
        return Err(CliError::Usage(format!(
            "entry {value} out of range [0, {bound}); pass --reduce to wrap"
        )));
    }
    Ok(value as u64)
}

/// Loads a matrix from a JSON file holding nested arrays of integers,
/// e.g. `[[2, 1], [0, 3]]`.
pub fn load_entries_file(
    path: &Path,
    p: Prime,
    rows: usize,
    cols: usize,
    modulus: Modulus,
    reduce: bool,
) -> Result<Vec<u64>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let nested: Vec<Vec<i128>> = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{}: expected nested integer arrays: {e}",
            path.display()
        ))
    })?;
    if nested.len() != rows || nested.iter().any(|row| row.len() != cols) {
        return Err(CliError::Usage(format!(
            "{}: expected a {rows}x{cols} nested array",
            path.display()
        )));
    }
    let bound = modulus.bound(p);
    nested
        .into_iter()
        .flatten()
        .map(|v| normalize(v, bound, reduce))
        .collect()
}

pub struct MatrixSource<'a> {
    pub literal: Option<&'a str>,
    pub file: Option<&'a Path>,
}

impl MatrixSource<'_> {
    fn entries(
        &self,
        what: &str,
        p: Prime,
        rows: usize,
        cols: usize,
        modulus: Modulus,
        reduce: bool,
    ) -> Result<Vec<u64>, CliError> {
        match (self.literal, self.file) {
            (Some(lit), None) => parse_entries(lit, p, rows, cols, modulus, reduce),
            (None, Some(path)) => load_entries_file(path, p, rows, cols, modulus, reduce),
            (Some(_), Some(_)) => Err(CliError::Usage(format!(
                "pass either --{what} or --{what}-file, not both"
            ))),
            (None, None) => Err(CliError::Usage(format!(
                "a matrix is required: pass --{what} or --{what}-file"
            ))),
        }
    }

    pub fn matrix_mod_p(
        &self,
        what: &str,
        p: Prime,
        rows: usize,
        cols: usize,
        reduce: bool,
    ) -> Result<MatrixModP, CliError> {
        let entries = self.entries(what, p, rows, cols, Modulus::P, reduce)?;
        Ok(MatrixModP::new(p, rows, cols, entries)?)
    }

    pub fn matrix_mod_p2(
        &self,
        what: &str,
        p: Prime,
        rows: usize,
        cols: usize,
        reduce: bool,
    ) -> Result<MatrixModP2, CliError> {
        let entries = self.entries(what, p, rows, cols, Modulus::PSquared, reduce)?;
        Ok(MatrixModP2::new(p, rows, cols, entries)?)
    }
}
