//! Truncated Fourier-mode representation of operators on the circle.
//!
//! Operators act on `span{e_k : |k| ≤ N}` with `e_k(x) = exp(ikx)`, orthonormal
//! for `(1/2π)∫ f ḡ dx`. Row/column index `k + N` carries mode `k`. Products
//! are computed in the truncated algebra (compression); contamination from the
//! cut is observable through [`FourierOperator::boundary_mass`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Fraction of the mode window treated as the boundary band.
pub const BOUNDARY_BAND: f64 = 0.1;

/// Mode cutoff `N`; modes are the integers `k` with `|k| ≤ N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeBasis {
    cutoff: usize,
}

impl ModeBasis {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("mode cutoff must be positive".into()));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn contains(&self, mode: i64) -> bool {
        mode.unsigned_abs() as usize <= self.cutoff
    }

    pub fn index(&self, mode: i64) -> Option<usize> {
        self.contains(mode)
            .then(|| (mode + self.cutoff as i64) as usize)
    }

    pub fn mode(&self, index: usize) -> i64 {
        index as i64 - self.cutoff as i64
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.cutoff as i64;
        -n..=n
    }

    /// Modes in the outer band `|k| > (1 - BOUNDARY_BAND) N`.
    pub fn is_boundary(&self, mode: i64) -> bool {
        (mode.unsigned_abs() as f64) > (1.0 - BOUNDARY_BAND) * self.cutoff as f64
    }

    fn check(&self, other: &ModeBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        Ok(())
    }
}

/// Eigenvalue of the weight `Δ + π` on mode `k`: `k²`, and `1` on the kernel.
pub fn weight_eigenvalue(k: i64) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k * k) as f64
    }
}

/// Trigonometric polynomial `a(x) = Σ a_n exp(inx)` with finite support.
///
/// Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, C64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(n: i64, c: C64) -> Self {
        Self::from_pairs([(n, c)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (i64, C64)>>(pairs: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, c) in pairs {
            *coeffs.entry(n).or_insert(C64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn coeff(&self, n: i64) -> C64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&n| n == 0)
    }

    /// Zeroth Fourier coefficient, i.e. `(1/2π)∫ a dx`.
    pub fn mean(&self) -> C64 {
        self.coeff(0)
    }

    /// `conj(a)`, with coefficients `conj(a_{-n})`.
    pub fn conj(&self) -> Self {
        Self::from_pairs(self.iter().map(|(n, c)| (-n, c.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_pairs(self.iter().map(|(n, c)| (n, c * s)))
    }

    /// `D_x^μ a` with `D_x = -i ∂_x`; acts on `exp(inx)` as multiplication by `n^μ`.
    pub fn dx_power(&self, mu: u32) -> Self {
        Self::from_pairs(self.iter().map(|(n, c)| (n, c * (n as f64).powi(mu as i32))))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|n|` in the support, 0 for the zero polynomial.
    pub fn support_radius(&self) -> u64 {
        self.coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.iter()
            .map(|(n, c)| c * C64::from_polar(1.0, n as f64 * x))
            .sum()
    }

    /// Maximal coefficient difference, used for tolerance comparisons.
    pub fn distance(&self, other: &TrigPoly) -> f64 {
        (self - other).max_abs()
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_pairs(self.iter().chain(rhs.iter()))
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_pairs(self.iter().chain(rhs.iter().map(|(n, c)| (n, -c))))
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_pairs(
            self.iter()
                .flat_map(|(n, a)| rhs.iter().map(move |(m, b)| (n + m, a * b))),
        )
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, c)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}:{}", format_complex(c))?;
        }
        write!(f, "}}")
    }
}

/// Formats `re+imi` with round-trip precision.
pub fn format_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses `re`, `imi`, `re+imi` or `re-imi` (also `i`, `-i`).
pub fn parse_complex(text: &str) -> Option<C64> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not a leading sign or an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        });
        let parse_im = |s: &str| -> Option<f64> {
            match s {
                "" | "+" => Some(1.0),
                "-" => Some(-1.0),
                _ => s.parse().ok(),
            }
        };
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().ok()?;
                let im = parse_im(&body[i..])?;
                Some(C64::new(re, im))
            }
            None => Some(C64::new(0.0, parse_im(body)?)),
        }
    } else {
        t.parse::<f64>().ok().map(|re| C64::new(re, 0.0))
    }
}

/// Parses `{n:c, m:d, ...}` into a trigonometric polynomial.
pub fn parse_trig_poly(text: &str) -> Option<TrigPoly> {
    let inner = text.trim().strip_prefix('{')?.strip_suffix('}')?;
    let mut pairs = Vec::new();
    for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (n, c) = item.split_once(':')?;
        pairs.push((n.trim().parse::<i64>().ok()?, parse_complex(c)?));
    }
    Some(TrigPoly::from_pairs(pairs))
}

/// Dense matrix of an operator on the truncated mode window.
///
/// `entries[[j + N, k + N]]` maps the `e_k` component to the `e_j` component.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOperator {
    basis: ModeBasis,
    entries: Array2<C64>,
}

impl FourierOperator {
    pub fn zeros(basis: ModeBasis) -> Self {
        let n = basis.dim();
        Self {
            basis,
            entries: Array2::zeros((n, n)),
        }
    }

    pub fn identity(basis: ModeBasis) -> Self {
        Self::from_diagonal(basis, |_| C64::new(1.0, 0.0))
    }

    pub fn from_diagonal(basis: ModeBasis, f: impl Fn(i64) -> C64) -> Self {
        let mut op = Self::zeros(basis);
        for (i, k) in basis.modes().enumerate() {
            op.entries[[i, i]] = f(k);
        }
        op
    }

    /// Builds entries from `f(row_mode, col_mode)`.
    pub fn from_fn(basis: ModeBasis, f: impl Fn(i64, i64) -> C64) -> Self {
        let n = basis.dim();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| f(basis.mode(i), basis.mode(j)));
        Self { basis, entries }
    }

    pub fn from_entries(basis: ModeBasis, entries: Array2<C64>) -> Result<Self> {
        let n = basis.dim();
        if entries.dim() != (n, n) {
            return Err(Error::InvalidArgument(format!(
                "expected a {n}x{n} matrix, got {:?}",
                entries.dim()
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    /// Matrix element `<e_row, A e_col>`; zero outside the window.
    pub fn entry(&self, row: i64, col: i64) -> C64 {
        match (self.basis.index(row), self.basis.index(col)) {
            (Some(i), Some(j)) => self.entries[[i, j]],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.entries.diag().to_vec()
    }

    /// Plain trace over the window.
    pub fn trace(&self) -> C64 {
        linalg::pairwise_sum(&self.diagonal())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            entries: self.entries.t().mapv(|c| c.conj()),
        }
    }

    pub fn product(&self, rhs: &Self) -> Result<Self> {
        self.basis.check(&rhs.basis)?;
        Ok(Self {
            basis: self.basis,
            entries: linalg::matmul(&self.entries, &rhs.entries),
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.product(rhs)? - &rhs.product(self)?)
    }

    /// `Σ c_i A_i` over operators sharing one basis.
    pub fn linear_combination(terms: &[(C64, &FourierOperator)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut acc = Self::zeros(first.basis);
        for (c, op) in terms {
            acc.basis.check(&op.basis)?;
            acc.entries.scaled_add(*c, &op.entries);
        }
        Ok(acc)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            basis: self.basis,
            entries: self.entries.mapv(|x| x * c),
        }
    }

    /// Multiplies entry `(j, k)` by `f(j, k)` (modes, not indices).
    pub fn scale_entries(&self, mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let b = self.basis;
        let mut out = self.entries.clone();
        Zip::indexed(&mut out).for_each(|(i, j), x| *x *= f(b.mode(i), b.mode(j)));
        Self {
            basis: b,
            entries: out,
        }
    }

    /// Left multiplication by a diagonal `diag(d(k))`.
    pub fn left_diagonal(&self, d: impl Fn(i64) -> C64) -> Self {
        self.scale_entries(|j, _| d(j))
    }

    /// Right multiplication by a diagonal `diag(d(k))`.
    pub fn right_diagonal(&self, d: impl Fn(i64) -> C64) -> Self {
        self.scale_entries(|_, k| d(k))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        linalg::singular_values(&self.entries)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Frobenius mass carried by rows or columns in the outer 10% band,
    /// relative to the total Frobenius norm (0 for the zero operator).
    pub fn boundary_mass(&self) -> f64 {
        let total = self.frobenius_norm();
        if total == 0.0 {
            return 0.0;
        }
        let b = self.basis;
        let mut outer = 0.0;
        for ((i, j), c) in self.entries.indexed_iter() {
            if b.is_boundary(b.mode(i)) || b.is_boundary(b.mode(j)) {
                outer += c.norm_sqr();
            }
        }
        outer.sqrt() / total
    }

    /// Action on a vector of mode coefficients.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.basis.dim() {
            return Err(Error::InvalidArgument("vector length does not match basis".into()));
        }
        let v = ndarray::ArrayView1::from(v);
        Ok(self.entries.dot(&v).to_vec())
    }
}

impl Add for &FourierOperator {
    type Output = FourierOperator;
    /// Panics on basis mismatch; use [`FourierOperator::linear_combination`] for a checked sum.
    fn add(self, rhs: &FourierOperator) -> FourierOperator {
        assert_eq!(self.basis, rhs.basis, "basis mismatch");
        FourierOperator {
            basis: self.basis,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &FourierOperator {
    type Output = FourierOperator;
    fn sub(self, rhs: &FourierOperator) -> FourierOperator {
        assert_eq!(self.basis, rhs.basis, "basis mismatch");
        FourierOperator {
            basis: self.basis,
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Mul for &FourierOperator {
    type Output = FourierOperator;
    /// Panics on basis mismatch; use [`FourierOperator::product`] for a checked product.
    fn mul(self, rhs: &FourierOperator) -> FourierOperator {
        assert_eq!(self.basis, rhs.basis, "basis mismatch");
        FourierOperator {
            basis: self.basis,
            entries: linalg::matmul(&self.entries, &rhs.entries),
        }
    }
}

/// Canonical diagonal operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Canonical {
    Identity,
    /// `Δ = -d²/dx²`, eigenvalue `k²`.
    Laplacian,
    /// `π`, the orthogonal projection onto the kernel of `Δ` (constants).
    KernelProjection,
    /// `(Δ + π)^p`.
    WeightPower(i32),
    /// `exp(-sΔ)`, `s > 0`.
    Heat(f64),
}

pub fn build_canonical(kind: Canonical, basis: ModeBasis) -> Result<FourierOperator> {
    let real = |f: fn(i64) -> f64| FourierOperator::from_diagonal(basis, move |k| C64::new(f(k), 0.0));
    Ok(match kind {
        Canonical::Identity => FourierOperator::identity(basis),
        Canonical::Laplacian => real(|k| (k * k) as f64),
        Canonical::KernelProjection => real(|k| if k == 0 { 1.0 } else { 0.0 }),
        Canonical::WeightPower(p) => {
            FourierOperator::from_diagonal(basis, |k| C64::new(weight_eigenvalue(k).powi(p), 0.0))
        }
        Canonical::Heat(s) => {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!("heat parameter must be positive, got {s}")));
            }
            FourierOperator::from_diagonal(basis, |k| C64::new((-s * (k * k) as f64).exp(), 0.0))
        }
    })
}

/// A multiplication operator together with its truncation diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicationOperator {
    pub operator: FourierOperator,
    /// Set when the band of `a` reaches past the inner 90% of the window,
    /// i.e. when the action on interior modes is clipped by the cut.
    pub band_spill: bool,
}

/// `M_a`, with entries `A[j,k] = a_{j-k}`; images outside the window are dropped.
pub fn multiplication_operator(a: &TrigPoly, basis: ModeBasis) -> MultiplicationOperator {
    let operator = FourierOperator::from_fn(basis, |j, k| a.coeff(j - k));
    let band_spill = a.support_radius() as f64 > BOUNDARY_BAND * basis.cutoff() as f64;
    MultiplicationOperator {
        operator,
        band_spill,
    }
}
