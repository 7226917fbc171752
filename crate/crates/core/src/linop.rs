//! Complex matrices between weighted `L^p` spaces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::space::{LpSpace, LpVector};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: C64 = Complex64::new(0.0, 0.0);
pub const ONE: C64 = Complex64::new(1.0, 0.0);

/// Default tolerance for identities whose entries are 0/1 or algebra products.
pub const EXACT_TOL: f64 = 1e-12;

/// Entrywise comparison `|a - b| <= tol * (1 + max entry magnitude)`.
pub fn matrices_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol * (1.0 + max_abs(a).max(max_abs(b)))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A bounded operator `L^p(source) -> L^p(target)` stored as a dense
/// `target.dim() x source.dim()` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinOp")]
pub struct LinOp {
    source: LpSpace,
    target: LpSpace,
    #[serde(with = "matrix_json")]
    matrix: CMatrix,
}

#[derive(Deserialize)]
struct RawLinOp {
    source: LpSpace,
    target: LpSpace,
    #[serde(with = "matrix_json")]
    matrix: CMatrix,
}

impl TryFrom<RawLinOp> for LinOp {
    type Error = Error;

    fn try_from(raw: RawLinOp) -> Result<Self> {
        LinOp::new(raw.source, raw.target, raw.matrix)
    }
}

impl LinOp {
    pub fn new(source: LpSpace, target: LpSpace, matrix: CMatrix) -> Result<Self> {
        if source.exponent != target.exponent {
            return Err(Error::ExponentMismatch {
                left: source.exponent.p(),
                right: target.exponent.p(),
            });
        }
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} between spaces of dimension {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                source.dim(),
                target.dim()
            )));
        }
        Ok(Self {
            source,
            target,
            matrix,
        })
    }

    /// Operator between counting-measure spaces of the matrix's shape.
    pub fn counting(matrix: CMatrix, exponent: PExponent) -> Self {
        let source = LpSpace::counting(matrix.ncols(), exponent);
        let target = LpSpace::counting(matrix.nrows(), exponent);
        Self {
            source,
            target,
            matrix,
        }
    }

    /// Counting-measure operator from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]], exponent: PExponent) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let matrix = CMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j], 0.0));
        Self::counting(matrix, exponent)
    }

    pub fn identity(space: LpSpace) -> Self {
        let n = space.dim();
        Self {
            source: space.clone(),
            target: space,
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(source: LpSpace, target: LpSpace) -> Self {
        let matrix = CMatrix::zeros(target.dim(), source.dim());
        Self {
            source,
            target,
            matrix,
        }
    }

    pub fn source(&self) -> &LpSpace {
        &self.source
    }

    pub fn target(&self) -> &LpSpace {
        &self.target
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn exponent(&self) -> PExponent {
        self.source.exponent
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    pub fn is_square(&self) -> bool {
        self.source == self.target
    }

    /// Same spaces, new matrix.
    pub fn with_matrix(&self, matrix: CMatrix) -> Result<Self> {
        LinOp::new(self.source.clone(), self.target.clone(), matrix)
    }

    /// `self ∘ inner`; defined only when `inner.target == self.source`.
    pub fn compose(&self, inner: &LinOp) -> Result<LinOp> {
        if inner.target != self.source {
            return Err(Error::DimensionMismatch(
                "composition requires matching inner spaces".into(),
            ));
        }
        Ok(LinOp {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: &self.matrix * &inner.matrix,
        })
    }

    fn check_same_spaces(&self, other: &LinOp) -> Result<()> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::DimensionMismatch(
                "operators act between different spaces".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        self.check_same_spaces(other)?;
        self.with_matrix(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &LinOp) -> Result<LinOp> {
        self.check_same_spaces(other)?;
        self.with_matrix(&self.matrix - &other.matrix)
    }

    pub fn scale(&self, z: C64) -> LinOp {
        LinOp {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: &self.matrix * z,
        }
    }

    pub fn apply(&self, v: &LpVector) -> Result<LpVector> {
        if *v.space != *self.source.space {
            return Err(Error::DimensionMismatch(
                "vector lives on a different space".into(),
            ));
        }
        let x = nalgebra::DVector::from_column_slice(&v.entries);
        let y = &self.matrix * x;
        LpVector::new(self.target.space.clone(), y.iter().copied().collect())
    }

    /// Matrix of the same operator between counting-measure spaces:
    /// `D_ν^{1/p} M D_μ^{-1/p}`, which has the same `p → p` norm.
    pub fn counting_matrix(&self) -> CMatrix {
        let p = self.exponent().p();
        if self.source.space.is_counting() && self.target.space.is_counting() {
            return self.matrix.clone();
        }
        let tw = self.target.weights();
        let sw = self.source.weights();
        CMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
            self.matrix[(i, j)] * (tw[i] / sw[j]).powf(1.0 / p)
        })
    }

    pub fn approx_eq(&self, other: &LinOp, tol: f64) -> bool {
        self.source == other.source
            && self.target == other.target
            && matrices_close(&self.matrix, &other.matrix, tol)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }
}

/// Spatial tensor product `S ⊗ T` on the product measure spaces.
pub fn kron(s: &LinOp, t: &LinOp) -> Result<LinOp> {
    if s.exponent() != t.exponent() {
        return Err(Error::ExponentMismatch {
            left: s.exponent().p(),
            right: t.exponent().p(),
        });
    }
    Ok(LinOp {
        source: s.source.product(&t.source)?,
        target: s.target.product(&t.target)?,
        matrix: s.matrix.kronecker(&t.matrix),
    })
}

/// `{rows, cols, entries: [[re, im], ...]}` with row-major entries.
pub mod matrix_json {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{CMatrix, C64};

    #[derive(Serialize, Deserialize)]
    pub struct MatrixJson {
        pub rows: usize,
        pub cols: usize,
        pub entries: Vec<[f64; 2]>,
    }

    impl From<&CMatrix> for MatrixJson {
        fn from(m: &CMatrix) -> Self {
            let mut entries = Vec::with_capacity(m.len());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    entries.push([z.re, z.im]);
                }
            }
            MatrixJson {
                rows: m.nrows(),
                cols: m.ncols(),
                entries,
            }
        }
    }

    impl TryFrom<MatrixJson> for CMatrix {
        type Error = String;

        fn try_from(j: MatrixJson) -> Result<Self, String> {
            if j.entries.len() != j.rows * j.cols {
                return Err(format!(
                    "expected {} entries for a {}x{} matrix, found {}",
                    j.rows * j.cols,
                    j.rows,
                    j.cols,
                    j.entries.len()
                ));
            }
            Ok(CMatrix::from_fn(j.rows, j.cols, |i, k| {
                let [re, im] = j.entries[i * j.cols + k];
                C64::new(re, im)
            }))
        }
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        CMatrix::try_from(j).map_err(D::Error::custom)
    }

    pub fn to_string(m: &CMatrix) -> String {
        serde_json::to_string(&MatrixJson::from(m)).expect("matrix serializes")
    }

    pub fn from_str(s: &str) -> Result<CMatrix, String> {
        let j: MatrixJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
        CMatrix::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteMeasureSpace;

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    #[test]
    fn composition_requires_matching_spaces() {
        let a = LinOp::counting(CMatrix::identity(2, 3), p(2.0));
        let b = LinOp::counting(CMatrix::identity(3, 2), p(2.0));
        assert!(a.compose(&b).is_ok());
        assert!(a.compose(&a).is_err());
        let c = LinOp::counting(CMatrix::identity(3, 2), p(3.0));
        assert!(a.compose(&c).is_err());
    }

    #[test]
    fn kron_identities_and_shift() {
        let e = p(1.5);
        let id2 = LinOp::identity(LpSpace::counting(2, e));
        let id3 = LinOp::identity(LpSpace::counting(3, e));
        let k = kron(&id2, &id3).unwrap();
        assert_eq!(k.matrix(), &CMatrix::identity(6, 6));

        // shift δ1 -> δ2 on ℓ_2, tensored with id_2: a 4x4 block shift
        let shift = LinOp::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]], e);
        let k = kron(&shift, &id2).unwrap();
        let expected = LinOp::from_real_rows(
            &[
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
            ],
            e,
        );
        assert_eq!(k.matrix(), expected.matrix());
    }

    #[test]
    fn kron_rank_one_stays_rank_one() {
        let e = p(2.0);
        let u = LinOp::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]], e);
        let v = LinOp::from_real_rows(&[&[3.0, 0.0, 1.0], &[6.0, 0.0, 2.0]], e);
        let k = kron(&u, &v).unwrap();
        let svd = k.matrix().clone().svd(false, false);
        let nonzero = svd.singular_values.iter().filter(|s| **s > 1e-10).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn kron_rejects_mixed_exponents() {
        let a = LinOp::identity(LpSpace::counting(2, p(2.0)));
        let b = LinOp::identity(LpSpace::counting(2, p(3.0)));
        assert!(matches!(kron(&a, &b), Err(Error::ExponentMismatch { .. })));
    }

    #[test]
    fn json_layout() {
        let m = CMatrix::from_row_slice(1, 2, &[C64::new(1.0, -0.5), C64::new(0.1, 0.0)]);
        let s = matrix_json::to_string(&m);
        assert_eq!(s, r#"{"rows":1,"cols":2,"entries":[[1.0,-0.5],[0.1,0.0]]}"#);
        assert_eq!(matrix_json::from_str(&s).unwrap(), m);
        assert!(matrix_json::from_str(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn linop_json_rejects_shape_mismatch() {
        let op = LinOp::counting(CMatrix::identity(2, 2), p(2.0));
        let json = serde_json::to_string(&op).unwrap();
        let back: LinOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
        let bad = json.replace(r#""rows":2"#, r#""rows":1"#);
        assert!(serde_json::from_str::<LinOp>(&bad).is_err());
    }

    #[test]
    fn counting_matrix_rescales() {
        let e = p(2.0);
        let src = LpSpace::new(FiniteMeasureSpace::weighted(vec![4.0]).unwrap(), e);
        let tgt = LpSpace::new(FiniteMeasureSpace::weighted(vec![1.0]).unwrap(), e);
        let op = LinOp::new(src, tgt, CMatrix::from_element(1, 1, ONE)).unwrap();
        assert!((op.counting_matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }
}
