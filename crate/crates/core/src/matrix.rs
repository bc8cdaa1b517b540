//! Representation matrices over a finite integer alphabet.
//!
//! A [`Matrix`] is an `N x n` array whose entries are symbols `0..q`. Columns
//! are the members of a family, rows are the hash functions. Everything else in
//! the crate reads matrices through this type.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

/// A single alphabet symbol.
pub type Symbol = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: malformed entry {token:?}")]
    Entry { line: usize, token: String },
    #[error("line {line}: entry out of range: {value} is not in [0, {q})")]
    OutOfRange { line: usize, value: u64, q: u32 },
    #[error("line {line}: row length mismatch: expected {expected} entries, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("expected {expected} rows, found {found}")]
    MissingRows { expected: usize, found: usize },
    #[error("line {line}: unexpected content after the last row")]
    TrailingContent { line: usize },
    #[error("invalid dimensions: {0}")]
    Dimensions(String),
    #[error("entry out of range: {value} is not in [0, {q})")]
    SymbolRange { value: Symbol, q: u32 },
    #[error("group size {group} does not divide the row count {rows}")]
    Indivisible { group: usize, rows: usize },
    #[error("alphabet size {q}^{group} overflows the symbol representation")]
    AlphabetOverflow { q: u32, group: usize },
    #[error("matrix has no columns")]
    Empty,
}

/// An `N x n` matrix over the alphabet `{0, .., q-1}`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    q: u32,
    data: Vec<Symbol>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, checking every symbol.
    pub fn new(rows: usize, cols: usize, q: u32, data: Vec<Symbol>) -> Result<Self, MatrixError> {
        if rows == 0 {
            return Err(MatrixError::Dimensions("row count must be at least 1".into()));
        }
        if q == 0 {
            return Err(MatrixError::Dimensions("alphabet size must be at least 1".into()));
        }
        if data.len() != rows * cols {
            return Err(MatrixError::Dimensions(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&value) = data.iter().find(|&&v| v >= q) {
            return Err(MatrixError::SymbolRange { value, q });
        }
        Ok(Matrix { rows, cols, q, data })
    }

    pub fn from_rows(q: u32, rows: &[Vec<Symbol>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Dimensions("rows have different lengths".into()));
        }
        Self::new(rows.len(), cols, q, rows.concat())
    }

    /// Builds a matrix from column vectors; `rows` fixes the height when there are no columns.
    pub fn from_columns(rows: usize, q: u32, columns: &[Vec<Symbol>]) -> Result<Self, MatrixError> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(MatrixError::Dimensions("columns have different lengths".into()));
        }
        let cols = columns.len();
        let mut data = vec![0; rows * cols];
        for (j, column) in columns.iter().enumerate() {
            for (i, &s) in column.iter().enumerate() {
                data[i * cols + j] = s;
            }
        }
        Self::new(rows, cols, q, data)
    }

    /// The `n x n` binary identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Matrix {
            rows: n.max(1),
            cols: n,
            q: 2,
            data: if n == 0 { Vec::new() } else { data },
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Symbol {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Symbol] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<Symbol> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Symbol>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * keep.len());
        for i in 0..self.rows {
            data.extend(keep.iter().map(|&j| self.get(i, j)));
        }
        Matrix {
            rows: self.rows,
            cols: keep.len(),
            q: self.q,
            data,
        }
    }

    /// Keeps the listed rows, in the listed order. At least one row must remain.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Matrix, MatrixError> {
        let mut data = Vec::with_capacity(self.cols * keep.len());
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Self::new(keep.len(), self.cols, self.q, data)
    }

    /// Returns a copy with one extra row appended at the bottom.
    pub fn with_row(&self, row: &[Symbol]) -> Result<Matrix, MatrixError> {
        if row.len() != self.cols {
            return Err(MatrixError::Dimensions(format!(
                "appended row has {} entries, expected {}",
                row.len(),
                self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(row);
        Self::new(self.rows + 1, self.cols, self.q, data)
    }

    /// Stacks each block of `group` consecutive rows into one row over `q^group` symbols.
    ///
    /// The topmost row of a block is the most significant base-`q` digit.
    pub fn group_rows(&self, group: usize) -> Result<Matrix, MatrixError> {
        if group == 0 || !self.rows.is_multiple_of(group) {
            return Err(MatrixError::Indivisible { group, rows: self.rows });
        }
        let new_q = u32::try_from(group)
            .ok()
            .and_then(|g| self.q.checked_pow(g))
            .ok_or(MatrixError::AlphabetOverflow { q: self.q, group })?;
        let new_rows = self.rows / group;
        let mut data = Vec::with_capacity(new_rows * self.cols);
        for block in 0..new_rows {
            for j in 0..self.cols {
                let code = (0..group).fold(0u32, |acc, k| acc * self.q + self.get(block * group + k, j));
                data.push(code);
            }
        }
        Ok(Matrix {
            rows: new_rows,
            cols: self.cols,
            q: new_q,
            data,
        })
    }

    /// Fraction of each symbol over all `N n` entries.
    pub fn symbol_frequencies(&self) -> Result<FrequencyVector, MatrixError> {
        if self.cols == 0 {
            return Err(MatrixError::Empty);
        }
        let mut counts = vec![0u64; self.q as usize];
        for &s in &self.data {
            counts[s as usize] += 1;
        }
        let total = self.data.len() as u64;
        Ok(FrequencyVector(
            counts.into_iter().map(|c| Ratio::new(c, total)).collect(),
        ))
    }

    /// Serializes in the matrix file format: header line, then one line per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.q);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Matrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_matrix(s)
    }
}

/// Parses the matrix file format.
///
/// Lines starting with `#` are comments. The first non-comment line is `N n q`,
/// followed by exactly `N` rows of `n` symbols. A blank line is a row with no
/// entries, so `n = 0` files round-trip. After the last row only blank and
/// comment lines may follow.
pub fn parse_matrix(text: &str) -> Result<Matrix, MatrixError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('#'));

    let (header_line, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or(MatrixError::Header {
        line: 1,
        reason: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(MatrixError::Header {
            line: header_line,
            reason: format!("expected \"N n q\", found {} fields", fields.len()),
        });
    }
    let number = |s: &str| {
        s.parse::<u64>().map_err(|_| MatrixError::Header {
            line: header_line,
            reason: format!("{s:?} is not a non-negative integer"),
        })
    };
    let (rows, cols, q) = (number(fields[0])?, number(fields[1])?, number(fields[2])?);
    if rows == 0 || q == 0 {
        return Err(MatrixError::Header {
            line: header_line,
            reason: "N and q must be at least 1".into(),
        });
    }
    let q = u32::try_from(q).map_err(|_| MatrixError::Header {
        line: header_line,
        reason: "alphabet size too large".into(),
    })?;
    let (rows, cols) = (rows as usize, cols as usize);

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line, content) in lines.by_ref() {
        let mut found = 0;
        for token in content.split_whitespace() {
            let value: u64 = token.parse().map_err(|_| MatrixError::Entry {
                line,
                token: token.to_string(),
            })?;
            if value >= u64::from(q) {
                return Err(MatrixError::OutOfRange { line, value, q });
            }
            data.push(value as Symbol);
            found += 1;
        }
        if found != cols {
            return Err(MatrixError::RowLength {
                line,
                expected: cols,
                found,
            });
        }
        seen += 1;
        if seen == rows {
            break;
        }
    }
    if seen < rows {
        return Err(MatrixError::MissingRows {
            expected: rows,
            found: seen,
        });
    }
    if let Some((line, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(MatrixError::TrailingContent { line });
    }
    Matrix::new(rows, cols, q, data)
}

/// Per-symbol fractions `p_i` of a matrix, as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyVector(pub Vec<Ratio<u64>>);

impl FrequencyVector {
    pub fn as_slice(&self) -> &[Ratio<u64>] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }
}
