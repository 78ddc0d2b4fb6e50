//! Strictly proper state-space model, zero classification and the checker
//! for the structural assumptions the squaring-up procedure relies on.

mod assumptions;
mod zeros;

pub use assumptions::{check_assumptions, Assumption, AssumptionCheck, AssumptionReport};
pub use zeros::{
    input_decoupling_zeros, invariant_zeros, match_zeros, output_decoupling_zeros, sort_zeros,
    transmission_zeros, InvariantZeros, ZeroMatching, ZeroSet,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::CMatrix;

/// A continuous-time plant `ẋ = Ax + Bu, y = Cx` (no feedthrough).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A must be square, got {:?}", a.shape())));
        }
        if n == 0 {
            return Err(Error::Dimension("system needs at least one state".into()));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!(
                "B must have {n} rows, got {:?}",
                b.shape()
            )));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!(
                "C must have {n} columns, got {:?}",
                c.shape()
            )));
        }
        if b.ncols() == 0 || c.nrows() == 0 {
            return Err(Error::Dimension("system needs at least one input and one output".into()));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Self { a, b, c })
    }

    /// Accepts an explicit feedthrough only when it is identically zero.
    pub fn with_feedthrough(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: &DMatrix<f64>,
    ) -> Result<Self> {
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::Dimension(format!(
                "D must be {}x{}, got {:?}",
                c.nrows(),
                b.ncols(),
                d.shape()
            )));
        }
        if d.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidArgument(
                "only strictly proper systems (D = 0) are supported".into(),
            ));
        }
        Self::new(a, b, c)
    }

    /// Convenience constructor from row-major slices.
    pub fn from_rows(n: usize, m: usize, p: usize, a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        if a.len() != n * n || b.len() != n * m || c.len() != p * n {
            return Err(Error::Dimension(format!(
                "row-major data does not match n={n}, m={m}, p={p}"
            )));
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
            DMatrix::from_row_slice(p, n, c),
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_fat(&self) -> bool {
        self.m() > self.p()
    }

    pub fn is_square(&self) -> bool {
        self.m() == self.p()
    }

    /// `{A, B, [C; rows]}`.
    pub fn with_extra_outputs(&self, rows: &DMatrix<f64>) -> Result<Self> {
        if rows.ncols() != self.n() {
            return Err(Error::Dimension(format!(
                "extra output rows must have {} columns, got {:?}",
                self.n(),
                rows.shape()
            )));
        }
        let mut c = DMatrix::zeros(self.p() + rows.nrows(), self.n());
        c.view_mut((0, 0), (self.p(), self.n())).copy_from(&self.c);
        c.view_mut((self.p(), 0), rows.shape()).copy_from(rows);
        Self::new(self.a.clone(), self.b.clone(), c)
    }

    /// `{A, [B, cols], C}`.
    pub fn with_extra_inputs(&self, cols: &DMatrix<f64>) -> Result<Self> {
        if cols.nrows() != self.n() {
            return Err(Error::Dimension(format!(
                "extra input columns must have {} rows, got {:?}",
                self.n(),
                cols.shape()
            )));
        }
        let mut b = DMatrix::zeros(self.n(), self.m() + cols.ncols());
        b.view_mut((0, 0), (self.n(), self.m())).copy_from(&self.b);
        b.view_mut((0, self.m()), cols.shape()).copy_from(cols);
        Self::new(self.a.clone(), b, self.c.clone())
    }
}

/// The Rosenbrock system matrix `[[sI − A, −B], [C, 0]]` evaluated at `s`.
pub fn rosenbrock(sys: &StateSpace, s: Complex64) -> CMatrix {
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let mut r = CMatrix::zeros(n + p, n + m);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = Complex64::new(-sys.a[(i, j)], 0.0);
        }
        r[(i, i)] += s;
        for j in 0..m {
            r[(i, n + j)] = Complex64::new(-sys.b[(i, j)], 0.0);
        }
    }
    for i in 0..p {
        for j in 0..n {
            r[(n + i, j)] = Complex64::new(sys.c[(i, j)], 0.0);
        }
    }
    r
}

/// The dual system `{Aᵀ, Cᵀ, Bᵀ}`: inputs and outputs trade places while the
/// invariant zeros stay put. Turns a tall plant into a fat one.
pub fn transpose_system(sys: &StateSpace) -> StateSpace {
    StateSpace {
        a: sys.a.transpose(),
        b: sys.c.transpose(),
        c: sys.b.transpose(),
    }
}
