//! Model reduction and the OSIC / BSIC decoding recursions.
//!
//! A model `y = A x̂ + v` with `A ∈ R^{m×n}`, `m ≥ n`, is reduced through the
//! thin QR factorization `A = QR` to `ȳ = R x̂ + v̄` with `ȳ = Qᵀy`; the noise
//! statistics survive because `Q` has orthonormal columns. Decoding is then
//! back-substitution with rounding (OSIC) or with rounding clamped to a box
//! (BSIC).
//!
//! The factorization fixes the sign convention `r_ii > 0`. QR is unique only
//! up to column signs, the decoders divide by `r_ii`, and the distributional
//! facts the WER analysis rests on (`r_ii² ~ χ²_{m−i+1}` for Gaussian `A`)
//! presume the positive-diagonal representative.

use crate::error::{Error, Result};
use rand::Rng;

/// Relative pivot threshold below which a factorization is declared
/// rank deficient. Gaussian inputs are almost surely full rank; the point is
/// to fail loudly instead of dividing by a vanishing pivot.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Dense row-major matrix of `f64`, sized for desk-scale models.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from a row-major slice; `data.len()` must equal `rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Fills an `rows × cols` matrix with i.i.d. standard Gaussian entries,
    /// drawn row by row.
    pub fn standard_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        crate::sim::fill_standard_normal(rng, &mut m.data);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self * x` for a vector `x` of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect())
    }
}

/// The instance `y = A x̂ + v`, `v ~ N(0, σ²I)`: a channel matrix and the
/// noise standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLinearModel {
    a: Matrix,
    sigma: f64,
}

impl GaussianLinearModel {
    pub fn new(a: Matrix, sigma: f64) -> Result<Self> {
        if a.cols() < 1 || a.rows() < a.cols() {
            return Err(Error::Dimension(format!(
                "model requires m >= n >= 1, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { a, sigma })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// The reduced model `ȳ = R x̂ + v̄` with upper-triangular `R`.
///
/// Instances produced by [`reduce`] carry `r_ii > 0`; hand-built instances
/// only need `R` upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub r: Matrix,
    pub y_bar: Vec<f64>,
    pub sigma: f64,
}

impl ReducedModel {
    pub fn new(r: Matrix, y_bar: Vec<f64>, sigma: f64) -> Result<Self> {
        if r.rows() != r.cols() || r.rows() == 0 {
            return Err(Error::Dimension(format!(
                "R must be square and non-empty, got {}x{}",
                r.rows(),
                r.cols()
            )));
        }
        if y_bar.len() != r.rows() {
            return Err(Error::Dimension(format!(
                "y_bar length {} does not match R dimension {}",
                y_bar.len(),
                r.rows()
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        for i in 1..r.rows() {
            for j in 0..i {
                if r.at(i, j) != 0.0 {
                    return Err(Error::Dimension(format!(
                        "R must be upper triangular, r[{i}][{j}] = {}",
                        r.at(i, j)
                    )));
                }
            }
        }
        Ok(Self { r, y_bar, sigma })
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }
}

/// Per-coordinate integer bounds `ℓ ≤ x ≤ u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxConstraint {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

impl BoxConstraint {
    pub fn new(lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Dimension(format!(
                "bound vectors must be non-empty and of equal length, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if l > u {
                return Err(Error::Domain(format!(
                    "lower[{i}] = {l} exceeds upper[{i}] = {u}"
                )));
            }
            if u.checked_sub(l).is_none() {
                return Err(Error::Domain(format!(
                    "box width at coordinate {i} overflows i64"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[0, d]^n`.
    pub fn cube(n: usize, d: u64) -> Result<Self> {
        let edge = i64::try_from(d)
            .map_err(|_| Error::Domain(format!("cube edge {d} exceeds i64 range")))?;
        Self::new(vec![0; n], vec![edge; n])
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    /// Width `u_i − ℓ_i` of coordinate `i`.
    pub fn width(&self, i: usize) -> u64 {
        (self.upper[i] - self.lower[i]) as u64
    }

    pub fn widths(&self) -> Vec<u64> {
        (0..self.len()).map(|i| self.width(i)).collect()
    }

    pub fn contains(&self, point: &IntegerPoint) -> bool {
        point.coords.len() == self.len()
            && point
                .coords
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u)
    }
}

/// An integer candidate or truth vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPoint {
    pub coords: Vec<i64>,
}

impl IntegerPoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Packed Householder factorization with the positive-diagonal convention
/// already applied to `R`. Reflectors are kept so `Qᵀ` can be applied to
/// vectors without forming `Q`.
pub(crate) struct HouseholderQr {
    r: Matrix, // n×n upper triangular, positive diagonal
    reflectors: Vec<Vec<f64>>,
    sign_flips: Vec<bool>,
    m: usize,
}

impl HouseholderQr {
    pub(crate) fn factor(a: &Matrix) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if n < 1 || m < n {
            return Err(Error::Dimension(format!(
                "thin QR requires m >= n >= 1, got {m}x{n}"
            )));
        }
        let norm = a.max_abs();
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(n);

        for j in 0..n {
            // Householder vector for column j, acting on rows j..m.
            let mut v: Vec<f64> = (j..m).map(|i| work.at(i, j)).collect();
            let col_norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if col_norm > 0.0 {
                let alpha = if v[0] >= 0.0 { -col_norm } else { col_norm };
                v[0] -= alpha;
                let vtv = v.iter().map(|x| x * x).sum::<f64>();
                if vtv > 0.0 {
                    for col in j..n {
                        let dot: f64 = (j..m).map(|i| v[i - j] * work.at(i, col)).sum();
                        let scale = 2.0 * dot / vtv;
                        for i in j..m {
                            work.set(i, col, work.at(i, col) - scale * v[i - j]);
                        }
                    }
                } else {
                    v.iter_mut().for_each(|x| *x = 0.0);
                }
            }
            reflectors.push(v);
        }

        // Degeneracy gate before any caller divides by a pivot.
        for j in 0..n {
            if work.at(j, j).abs() <= RANK_TOLERANCE * norm {
                return Err(Error::Degenerate(format!(
                    "pivot r[{j}][{j}] = {} below {RANK_TOLERANCE} * max|a_ij| = {}",
                    work.at(j, j),
                    RANK_TOLERANCE * norm
                )));
            }
        }

        // Extract n×n R, flipping rows to make the diagonal positive.
        let mut r = Matrix::zeros(n, n);
        let mut sign_flips = vec![false; n];
        for i in 0..n {
            sign_flips[i] = work.at(i, i) < 0.0;
            let s = if sign_flips[i] { -1.0 } else { 1.0 };
            for j in i..n {
                r.set(i, j, s * work.at(i, j));
            }
        }

        Ok(Self {
            r,
            reflectors,
            sign_flips,
            m,
        })
    }

    pub(crate) fn r_matrix(&self) -> &Matrix {
        &self.r
    }

    pub(crate) fn into_r(self) -> Matrix {
        self.r
    }

    /// First `n` entries of `Qᵀy`, with the same sign convention as `R`.
    pub(crate) fn apply_qt(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m {
            return Err(Error::Dimension(format!(
                "observation length {} does not match m = {}",
                y.len(),
                self.m
            )));
        }
        let n = self.r.rows();
        let mut w = y.to_vec();
        for (j, v) in self.reflectors.iter().enumerate() {
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            let dot: f64 = v.iter().zip(&w[j..]).map(|(a, b)| a * b).sum();
            let scale = 2.0 * dot / vtv;
            for (offset, vi) in v.iter().enumerate() {
                w[j + offset] -= scale * vi;
            }
        }
        let mut out: Vec<f64> = w[..n].to_vec();
        for i in 0..n {
            if self.sign_flips[i] {
                out[i] = -out[i];
            }
        }
        Ok(out)
    }

    /// The thin `m×n` factor `Q`: reflectors applied in reverse to the
    /// leading columns of the identity, then the sign convention.
    pub(crate) fn thin_q(&self) -> Matrix {
        let n = self.r.rows();
        let mut q = Matrix::zeros(self.m, n);
        for j in 0..n {
            q.set(j, j, 1.0);
        }
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                continue;
            }
            for col in 0..n {
                let dot: f64 = (j..self.m).map(|i| v[i - j] * q.at(i, col)).sum();
                let scale = 2.0 * dot / vtv;
                for i in j..self.m {
                    q.set(i, col, q.at(i, col) - scale * v[i - j]);
                }
            }
        }
        for i in 0..n {
            if self.sign_flips[i] {
                for row in 0..self.m {
                    let v = q.at(row, i);
                    q.set(row, i, -v);
                }
            }
        }
        q
    }
}

/// Thin QR factorization `A = QR` with orthonormal `Q ∈ R^{m×n}`,
/// upper-triangular `R ∈ R^{n×n}` and `r_ii > 0`.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let qr = HouseholderQr::factor(a)?;
    let q = qr.thin_q();
    Ok((q, qr.into_r()))
}

/// Transforms `(A, y, σ)` into the reduced model `(R, ȳ = Qᵀy, σ)`.
pub fn reduce(model: &GaussianLinearModel, y: &[f64]) -> Result<ReducedModel> {
    let qr = HouseholderQr::factor(model.matrix())?;
    let y_bar = qr.apply_qt(y)?;
    Ok(ReducedModel {
        r: qr.into_r(),
        y_bar,
        sigma: model.sigma(),
    })
}

/// Nearest integer with half-way ties rounded toward the smaller integer,
/// so 0.5 → 0 and −1.5 → −2. Independent of the platform rounding mode.
pub fn round_half_down(c: f64) -> Result<i64> {
    if !c.is_finite() {
        return Err(Error::Domain(format!("cannot round non-finite value {c}")));
    }
    let rounded = (c - 0.5).ceil();
    if rounded < i64::MIN as f64 || rounded > i64::MAX as f64 {
        return Err(Error::Domain(format!("rounded value {rounded} exceeds i64")));
    }
    Ok(rounded as i64)
}

fn backward_recursion(
    reduced: &ReducedModel,
    mut slice: impl FnMut(i64, usize) -> i64,
) -> Result<IntegerPoint> {
    let n = reduced.n();
    let mut x = vec![0i64; n];
    for i in (0..n).rev() {
        let r_ii = reduced.r.at(i, i);
        if r_ii == 0.0 {
            return Err(Error::Degenerate(format!("zero diagonal entry r[{i}][{i}]")));
        }
        let mut acc = 0.0;
        for j in (i + 1)..n {
            acc += reduced.r.at(i, j) * x[j] as f64;
        }
        let c = (reduced.y_bar[i] - acc) / r_ii;
        x[i] = slice(round_half_down(c)?, i);
    }
    Ok(IntegerPoint::new(x))
}

/// OSIC decoding: for `i = n..1`,
/// `c_i = (ȳ_i − Σ_{j>i} r_ij x_j)/r_ii` and `x_i = ⌊c_i⌉`.
///
/// The output is the Babai point — the first leaf a Schnorr–Euchner
/// depth-first search would visit.
pub fn osic_decode(reduced: &ReducedModel) -> Result<IntegerPoint> {
    backward_recursion(reduced, |rounded, _| rounded)
}

/// BSIC decoding: the OSIC recursion with each `⌊c_i⌉` clamped to
/// `[ℓ_i, u_i]`, so the output always lies in the box.
pub fn bsic_decode(reduced: &ReducedModel, bounds: &BoxConstraint) -> Result<IntegerPoint> {
    if bounds.len() != reduced.n() {
        return Err(Error::Dimension(format!(
            "box length {} does not match model dimension {}",
            bounds.len(),
            reduced.n()
        )));
    }
    backward_recursion(reduced, |rounded, i| {
        rounded.clamp(bounds.lower()[i], bounds.upper()[i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::standard_gaussian(rows, cols, &mut rng)
    }

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
        let mut worst = 0.0f64;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                worst = worst.max((a.at(i, j) - b.at(i, j)).abs());
            }
        }
        worst
    }

    fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
        assert_eq!(a.cols(), b.rows());
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.at(i, k) * b.at(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn transpose(a: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out.set(j, i, a.at(i, j));
            }
        }
        out
    }

    fn check_qr_invariants(a: &Matrix) {
        let (q, r) = thin_qr(a).unwrap();
        let n = a.cols();
        // Orthonormal columns.
        let qtq = mat_mul(&transpose(&q), &q);
        assert!(max_abs_diff(&qtq, &Matrix::identity(n)) <= 1e-10);
        // Reconstruction.
        let rebuilt = mat_mul(&q, &r);
        assert!(max_abs_diff(&rebuilt, a) <= 1e-10 * a.max_abs().max(1.0));
        // Positive diagonal, upper triangular.
        for i in 0..n {
            assert!(r.at(i, i) > 0.0, "r[{i}][{i}] = {}", r.at(i, i));
            for j in 0..i {
                assert_eq!(r.at(i, j), 0.0);
            }
        }
    }

    #[test]
    fn qr_identity() {
        let a = Matrix::identity(3);
        let (q, r) = thin_qr(&a).unwrap();
        assert!(max_abs_diff(&q, &Matrix::identity(3)) <= 1e-14);
        assert!(max_abs_diff(&r, &Matrix::identity(3)) <= 1e-14);
    }

    #[test]
    fn qr_permutation_columns() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let (q, r) = thin_qr(&a).unwrap();
        assert!((r.at(0, 0) - 1.0).abs() <= 1e-14);
        assert!((r.at(1, 1) - 1.0).abs() <= 1e-14);
        assert!(r.at(0, 1).abs() <= 1e-14);
        // Q is the same signed permutation that reproduces A.
        let rebuilt = mat_mul(&q, &r);
        assert!(max_abs_diff(&rebuilt, &a) <= 1e-14);
    }

    #[test]
    fn qr_random_rectangular() {
        check_qr_invariants(&gaussian(8, 5, 7));
        check_qr_invariants(&gaussian(6, 4, 11));
        check_qr_invariants(&gaussian(64, 64, 13));
    }

    #[test]
    fn qr_rejects_rank_deficiency() {
        // Two identical columns.
        let a = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]).unwrap();
        assert!(matches!(thin_qr(&a), Err(Error::Degenerate(_))));
        let zero = Matrix::zeros(3, 2);
        assert!(matches!(thin_qr(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn qr_rejects_bad_shape() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(thin_qr(&a), Err(Error::Dimension(_))));
    }

    #[test]
    fn reduce_identity_channel() {
        let model = GaussianLinearModel::new(Matrix::identity(2), 0.1).unwrap();
        let reduced = reduce(&model, &[3.2, -0.7]).unwrap();
        assert!(max_abs_diff(&reduced.r, &Matrix::identity(2)) <= 1e-14);
        assert!((reduced.y_bar[0] - 3.2).abs() <= 1e-14);
        assert!((reduced.y_bar[1] + 0.7).abs() <= 1e-14);
    }

    #[test]
    fn reduce_matches_explicit_q_transpose() {
        let a = gaussian(6, 4, 21);
        let model = GaussianLinearModel::new(a.clone(), 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let y: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let reduced = reduce(&model, &y).unwrap();

        let (q, r) = thin_qr(&a).unwrap();
        assert!(max_abs_diff(&reduced.r, &r) <= 1e-12);
        let qt_y = mat_mul(&transpose(&q), &Matrix::from_row_slice(6, 1, &y).unwrap());
        for i in 0..4 {
            assert!((reduced.y_bar[i] - qt_y.at(i, 0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn reduce_preserves_residual_norm() {
        // ‖ȳ − R x̂‖ = ‖Qᵀv‖ ≤ ‖v‖ because Q has orthonormal columns.
        let a = gaussian(6, 4, 33);
        let model = GaussianLinearModel::new(a.clone(), 0.3).unwrap();
        let truth = [2i64, -1, 0, 4];
        let truth_f: Vec<f64> = truth.iter().map(|&v| v as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mut noise = vec![0.0; 6];
        crate::sim::fill_standard_normal(&mut rng, &mut noise);
        let ax = a.mul_vec(&truth_f).unwrap();
        let y: Vec<f64> = ax.iter().zip(&noise).map(|(s, v)| s + 0.3 * v).collect();

        let reduced = reduce(&model, &y).unwrap();
        let rx = reduced.r.mul_vec(&truth_f).unwrap();
        let residual: f64 = reduced
            .y_bar
            .iter()
            .zip(&rx)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let noise_norm: f64 = noise.iter().map(|v| (0.3 * v) * (0.3 * v)).sum::<f64>().sqrt();
        assert!(residual <= noise_norm + 1e-12);
    }

    #[test]
    fn rounding_ties_go_down() {
        assert_eq!(round_half_down(2.4).unwrap(), 2);
        assert_eq!(round_half_down(0.5).unwrap(), 0);
        assert_eq!(round_half_down(-1.5).unwrap(), -2);
        assert_eq!(round_half_down(-0.5).unwrap(), -1);
        assert_eq!(round_half_down(2.5).unwrap(), 2);
        assert_eq!(round_half_down(2.6).unwrap(), 3);
        assert!(round_half_down(f64::NAN).is_err());
        assert!(round_half_down(f64::INFINITY).is_err());
    }

    #[test]
    fn osic_independent_rounding() {
        let reduced =
            ReducedModel::new(Matrix::identity(2), vec![2.4, -1.6], 0.5).unwrap();
        assert_eq!(osic_decode(&reduced).unwrap().coords, vec![2, -2]);
    }

    #[test]
    fn osic_hand_worked_recursion() {
        // x₂ = ⌊3.4⌉ = 3, c₁ = 2.6 − 0.5·3 = 1.1, x₁ = 1.
        let r = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]).unwrap();
        let reduced = ReducedModel::new(r, vec![2.6, 3.4], 0.5).unwrap();
        assert_eq!(osic_decode(&reduced).unwrap().coords, vec![1, 3]);
    }

    #[test]
    fn osic_zero_diagonal_is_degenerate() {
        let r = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.0]).unwrap();
        let reduced = ReducedModel {
            r,
            y_bar: vec![1.0, 1.0],
            sigma: 0.5,
        };
        assert!(matches!(osic_decode(&reduced), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bsic_clamps_each_case() {
        let reduced = ReducedModel::new(Matrix::identity(1), vec![5.2], 0.5).unwrap();
        let bounds = BoxConstraint::new(vec![0], vec![3]).unwrap();
        assert_eq!(bsic_decode(&reduced, &bounds).unwrap().coords, vec![3]);

        let reduced =
            ReducedModel::new(Matrix::identity(2), vec![2.4, -1.6], 0.5).unwrap();
        let bounds = BoxConstraint::cube(2, 3).unwrap();
        assert_eq!(bsic_decode(&reduced, &bounds).unwrap().coords, vec![2, 0]);
    }

    #[test]
    fn bsic_rejects_mismatched_box() {
        let reduced = ReducedModel::new(Matrix::identity(2), vec![0.2, 0.3], 0.5).unwrap();
        let bounds = BoxConstraint::cube(3, 1).unwrap();
        assert!(matches!(
            bsic_decode(&reduced, &bounds),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn bsic_interior_matches_osic() {
        let a = gaussian(5, 3, 41);
        let model = GaussianLinearModel::new(a.clone(), 0.05).unwrap();
        let truth_f = [1.0, 2.0, 1.0];
        let y = a.mul_vec(&truth_f).unwrap();
        let reduced = reduce(&model, &y).unwrap();
        let unclamped = osic_decode(&reduced).unwrap();
        let bounds = BoxConstraint::cube(3, 3).unwrap();
        // With every rounded coordinate strictly inside [0,3], the decoders agree.
        assert!(bounds.contains(&unclamped));
        assert_eq!(bsic_decode(&reduced, &bounds).unwrap(), unclamped);
    }

    #[test]
    fn box_constraint_validation() {
        assert!(BoxConstraint::new(vec![0, 2], vec![1, 1]).is_err());
        assert!(BoxConstraint::new(vec![], vec![]).is_err());
        assert!(BoxConstraint::new(vec![0], vec![1, 2]).is_err());
        assert!(BoxConstraint::new(vec![i64::MIN], vec![i64::MAX]).is_err());
        let b = BoxConstraint::new(vec![-2, 0], vec![3, 0]).unwrap();
        assert_eq!(b.widths(), vec![5, 0]);
    }

    #[test]
    fn model_validation() {
        assert!(GaussianLinearModel::new(Matrix::zeros(2, 3), 0.5).is_err());
        assert!(GaussianLinearModel::new(Matrix::identity(2), 0.0).is_err());
        assert!(GaussianLinearModel::new(Matrix::identity(2), f64::NAN).is_err());
    }

    #[test]
    fn reduced_model_validation() {
        let lower = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0]).unwrap();
        assert!(ReducedModel::new(lower, vec![0.0, 0.0], 0.5).is_err());
        assert!(ReducedModel::new(Matrix::identity(2), vec![0.0], 0.5).is_err());
        assert!(ReducedModel::new(Matrix::identity(2), vec![0.0, 0.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn positive_diagonal_on_random_inputs(seed in 0u64..500, m in 1usize..12, extra in 0usize..4) {
            let n = m;
            let a = gaussian(m + extra, n, seed);
            let (_, r) = thin_qr(&a).unwrap();
            for i in 0..n {
                prop_assert!(r.at(i, i) > 0.0);
            }
        }

        // With zero noise both decoders recover the truth exactly.
        #[test]
        fn zero_noise_exactness(seed in 0u64..200, n in 1usize..8, extra in 0usize..3) {
            let m = n + extra;
            let a = gaussian(m, n, seed.wrapping_add(1000));
            let model = GaussianLinearModel::new(a.clone(), 1e-6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let truth: Vec<i64> = (0..n).map(|_| rng.gen_range(-5i64..=5)).collect();
            let truth_f: Vec<f64> = truth.iter().map(|&v| v as f64).collect();
            let y = a.mul_vec(&truth_f).unwrap();
            let reduced = reduce(&model, &y).unwrap();

            prop_assert_eq!(&osic_decode(&reduced).unwrap().coords, &truth);
            let bounds = BoxConstraint::new(vec![-5; n], vec![5; n]).unwrap();
            prop_assert_eq!(&bsic_decode(&reduced, &bounds).unwrap().coords, &truth);
        }

        // Shifting ȳ by R·t shifts the OSIC output by t.
        #[test]
        fn osic_translation_equivariance(seed in 0u64..200, n in 1usize..8) {
            let a = gaussian(n + 1, n, seed.wrapping_add(5000));
            let model = GaussianLinearModel::new(a, 0.4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6000));
            let mut y = vec![0.0; n + 1];
            crate::sim::fill_standard_normal(&mut rng, &mut y);
            let reduced = reduce(&model, &y).unwrap();
            let base = osic_decode(&reduced).unwrap();

            let shift: Vec<i64> = (0..n).map(|_| rng.gen_range(-3i64..=3)).collect();
            let shift_f: Vec<f64> = shift.iter().map(|&v| v as f64).collect();
            let rt = reduced.r.mul_vec(&shift_f).unwrap();
            let shifted = ReducedModel {
                r: reduced.r.clone(),
                y_bar: reduced.y_bar.iter().zip(&rt).map(|(a, b)| a + b).collect(),
                sigma: reduced.sigma,
            };
            let moved = osic_decode(&shifted).unwrap();
            let expected: Vec<i64> = base.coords.iter().zip(&shift).map(|(a, b)| a + b).collect();
            prop_assert_eq!(moved.coords, expected);
        }

        #[test]
        fn bsic_output_always_in_box(seed in 0u64..200, n in 1usize..8) {
            let a = gaussian(n, n, seed.wrapping_add(9000));
            let model = GaussianLinearModel::new(a, 2.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(9500));
            let mut y = vec![0.0; n];
            crate::sim::fill_standard_normal(&mut rng, &mut y);
            for v in &mut y {
                *v *= 10.0;
            }
            let reduced = reduce(&model, &y).unwrap();
            let bounds = BoxConstraint::cube(n, 3).unwrap();
            let point = bsic_decode(&reduced, &bounds).unwrap();
            prop_assert!(bounds.contains(&point));
        }
    }
}
