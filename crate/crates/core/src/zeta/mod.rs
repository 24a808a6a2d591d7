//! Renormalized traces `tr^Q` for the class "spectral polynomial in `Δ+π`
//! plus a trace-class kernel", where they are exact up to mode truncation.

pub mod oracle;

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::spectral::{weight_eigenvalue, FourierOperator, ModeBasis};

/// `ζ(2n)` for `n = 1..=8`.
const ZETA_EVEN: [f64; 8] = [
    1.644_934_066_848_226_4,
    1.082_323_233_711_138_2,
    1.017_343_061_984_449,
    1.004_077_356_197_944_3,
    1.000_994_575_127_818_1,
    1.000_246_086_553_308,
    1.000_061_248_135_058_7,
    1.000_015_282_259_408_6,
];

/// Euler–Mascheroni constant; finite part of `ζ` at its pole.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Riemann `ζ` at even integers `2n`, any sign of `n`.
pub fn zeta_even(n: i32) -> f64 {
    match n {
        0 => -0.5,
        n if n < 0 => 0.0,
        n if (n as usize) <= ZETA_EVEN.len() => ZETA_EVEN[n as usize - 1],
        n => {
            // terms fall below 1e-17 long before k = 10
            (1..=64u32).rev().map(|k| (k as f64).powi(-2 * n)).sum()
        }
    }
}

/// The weight `Q` of a zeta-regularized trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum WeightSpec {
    /// `Δ + π`: eigenvalue `k²`, and 1 on constants. Order 2.
    #[default]
    ShiftedLaplacian,
    /// Bare `Δ`; not a weight since it has a kernel.
    Laplacian,
}


impl WeightSpec {
    pub fn order(&self) -> u32 {
        2
    }

    pub fn eigenvalue(&self, k: i64) -> f64 {
        match self {
            WeightSpec::ShiftedLaplacian => weight_eigenvalue(k),
            WeightSpec::Laplacian => (k * k) as f64,
        }
    }

    fn require_supported(&self) -> Result<()> {
        match self {
            WeightSpec::ShiftedLaplacian => Ok(()),
            WeightSpec::Laplacian => Err(Error::UnsupportedWeight(
                "Δ is not injective; use Δ + π".into(),
            )),
        }
    }
}

/// `Σ c_m (Δ+π)^m` over finitely many integer powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralPolynomial {
    coeffs: BTreeMap<i32, C64>,
}

impl SpectralPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::power(0)
    }

    /// `(Δ+π)^m`.
    pub fn power(m: i32) -> Self {
        Self::from_pairs([(m, C64::new(1.0, 0.0))])
    }

    pub fn from_pairs<I: IntoIterator<Item = (i32, C64)>>(pairs: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (m, c) in pairs {
            *coeffs.entry(m).or_insert(C64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, m: i32) -> C64 {
        self.coeffs.get(&m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_pairs(self.iter().map(|(m, c)| (m, c * s)))
    }

    /// Adjoint; the weight is self-adjoint so only coefficients conjugate.
    pub fn adjoint(&self) -> Self {
        Self::from_pairs(self.iter().map(|(m, c)| (m, c.conj())))
    }

    /// Eigenvalue on mode `k`.
    pub fn eigenvalue(&self, k: i64) -> C64 {
        let q = weight_eigenvalue(k);
        self.iter().map(|(m, c)| c * q.powi(m)).sum()
    }

    pub fn to_operator(&self, basis: ModeBasis) -> FourierOperator {
        FourierOperator::from_diagonal(basis, |k| self.eigenvalue(k))
    }

    /// True when every power is `≤ -1`, i.e. the operator is trace class.
    pub fn is_trace_class(&self) -> bool {
        self.coeffs.keys().all(|&m| m <= -1)
    }
}

impl Add for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn add(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        SpectralPolynomial::from_pairs(self.iter().chain(rhs.iter()))
    }
}

impl Sub for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn sub(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        SpectralPolynomial::from_pairs(self.iter().chain(rhs.iter().map(|(m, c)| (m, -c))))
    }
}

impl Mul for &SpectralPolynomial {
    type Output = SpectralPolynomial;
    fn mul(self, rhs: &SpectralPolynomial) -> SpectralPolynomial {
        SpectralPolynomial::from_pairs(
            self.iter()
                .flat_map(|(m, a)| rhs.iter().map(move |(n, b)| (m + n, a * b))),
        )
    }
}

/// Measured decay of kernel diagonals over the outer half of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub certified: bool,
    /// Per-mode geometric ratio fitted to the last two blocks (0 if the tail vanishes).
    pub rate: f64,
    /// Largest diagonal magnitude at the window edge.
    pub edge_magnitude: f64,
    /// Extrapolated mass of the diagonal beyond the window.
    pub truncation_estimate: f64,
}

/// Relative floor below which diagonal entries count as converged.
const DECAY_FLOOR: f64 = 1e-13;
/// Required block-to-block contraction.
const DECAY_RATIO: f64 = 0.9;

/// Certifies geometric decay of `|K[k,k]|` over `|k| > N/2`.
pub fn certify_decay(kernel: &FourierOperator) -> DecayReport {
    certify_diagonal(kernel.basis(), &kernel.diagonal())
}

/// Decay certification from a kernel diagonal indexed like the basis.
pub fn certify_diagonal(basis: ModeBasis, diag: &[C64]) -> DecayReport {
    let n = basis.cutoff() as i64;
    let mag = |k: i64| diag[basis.index(k).expect("mode in window")].norm();
    let scale = diag.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = DECAY_FLOOR * scale.max(1.0);

    let outer: Vec<f64> = ((n / 2 + 1)..=n).map(|r| mag(r).max(mag(-r))).collect();
    let edge = outer.last().copied().unwrap_or(0.0);
    if outer.iter().all(|&m| m <= floor) {
        return DecayReport {
            certified: true,
            rate: 0.0,
            edge_magnitude: edge,
            truncation_estimate: 2.0 * edge,
        };
    }

    let monotone = outer.windows(2).all(|w| w[1] <= 10.0 * w[0] || w[1] <= floor);
    let block = (outer.len() / 2).clamp(1, 10);
    let maxima: Vec<f64> = outer
        .chunks(block)
        .filter(|c| c.len() == block)
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect();
    let contracting = maxima
        .windows(2)
        .all(|w| w[1] <= DECAY_RATIO * w[0] || w[1] <= floor);
    let certified = monotone && contracting && maxima.len() >= 2;

    let rate = match maxima.as_slice() {
        [.., prev, last] if *prev > 0.0 && *last > 0.0 => (last / prev).powf(1.0 / block as f64),
        [.., _, last] if *last == 0.0 => 0.0,
        _ => 1.0,
    };
    let truncation_estimate = if rate < 1.0 {
        2.0 * edge * rate / (1.0 - rate)
    } else {
        // no usable decay: bound the tail by the edge times the window size
        2.0 * edge * n as f64
    };
    DecayReport {
        certified,
        rate,
        edge_magnitude: edge,
        truncation_estimate,
    }
}

/// Spectral polynomial plus a dense trace-class correction.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedOperator {
    symbolic: SpectralPolynomial,
    kernel: FourierOperator,
    decay: DecayReport,
}

impl RegularizedOperator {
    pub fn new(symbolic: SpectralPolynomial, kernel: FourierOperator) -> Self {
        let decay = certify_decay(&kernel);
        Self {
            symbolic,
            kernel,
            decay,
        }
    }

    pub fn from_symbolic(symbolic: SpectralPolynomial, basis: ModeBasis) -> Self {
        Self::new(symbolic, FourierOperator::zeros(basis))
    }

    pub fn from_kernel(kernel: FourierOperator) -> Self {
        Self::new(SpectralPolynomial::zero(), kernel)
    }

    /// `Id + K`.
    pub fn identity_plus(kernel: FourierOperator) -> Self {
        Self::new(SpectralPolynomial::identity(), kernel)
    }

    pub fn zero(basis: ModeBasis) -> Self {
        Self::from_kernel(FourierOperator::zeros(basis))
    }

    pub fn basis(&self) -> ModeBasis {
        self.kernel.basis()
    }

    pub fn symbolic(&self) -> &SpectralPolynomial {
        &self.symbolic
    }

    pub fn kernel(&self) -> &FourierOperator {
        &self.kernel
    }

    pub fn decay_report(&self) -> DecayReport {
        self.decay
    }

    /// Full truncated matrix.
    pub fn dense(&self) -> FourierOperator {
        &self.symbolic.to_operator(self.basis()) + &self.kernel
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.symbolic.adjoint(), self.kernel.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.symbolic.scale(c), self.kernel.scale(c))
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        Ok(Self::new(
            &self.symbolic + &rhs.symbolic,
            FourierOperator::linear_combination(&[(one, &self.kernel), (one, &rhs.kernel)])?,
        ))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    /// `(S_A + K_A)(S_B + K_B) = S_A S_B + (S_A K_B + K_A S_B + K_A K_B)`.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        let prod = self.kernel.product(&rhs.kernel)?;
        let left = rhs.kernel.left_diagonal(|k| self.symbolic.eigenvalue(k));
        let right = self.kernel.right_diagonal(|k| rhs.symbolic.eigenvalue(k));
        Ok(Self::new(&self.symbolic * &rhs.symbolic, &(&prod + &left) + &right))
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.product(rhs)?.checked_sub(&rhs.product(self)?)
    }
}

/// Outcome of a regularized trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub finite_part: C64,
    /// Coefficient of the removed pole at `s = 0`.
    pub residue_term: C64,
    pub certified: bool,
    pub truncation_estimate: f64,
}

/// `tr^Q(Σ c_m (Δ+π)^m) = Σ c_m (1 + 2ζ(-2m))`.
pub fn zeta_trace_spectral(p: &SpectralPolynomial, q: WeightSpec) -> Result<TraceResult> {
    q.require_supported()?;
    let finite_part = p
        .iter()
        .map(|(m, c)| c * (1.0 + 2.0 * zeta_even(-m)))
        .sum();
    Ok(TraceResult {
        finite_part,
        residue_term: C64::new(0.0, 0.0),
        certified: true,
        truncation_estimate: 0.0,
    })
}

/// `tr^Q` of a regularized operator; fails when the kernel decay is not certified.
pub fn renormalized_trace(a: &RegularizedOperator, q: WeightSpec) -> Result<TraceResult> {
    let t = renormalized_trace_unchecked(a, q)?;
    if !t.certified {
        return Err(Error::NotCertified(format!(
            "kernel diagonal decay rate {:.3} at edge magnitude {:.3e}",
            a.decay.rate, a.decay.edge_magnitude
        )));
    }
    Ok(t)
}

/// `tr^Q` without the certification gate; `certified` reports the decay check.
pub fn renormalized_trace_unchecked(a: &RegularizedOperator, q: WeightSpec) -> Result<TraceResult> {
    let symbolic = zeta_trace_spectral(&a.symbolic, q)?;
    let kernel_trace = pairwise_sum(&a.kernel.diagonal());
    Ok(TraceResult {
        finite_part: symbolic.finite_part + kernel_trace,
        residue_term: symbolic.residue_term,
        certified: a.decay.certified,
        truncation_estimate: a.decay.truncation_estimate,
    })
}

/// `tr^Q(AB)` without forming the product; only the diagonal of the kernel
/// part is computed.
pub fn product_trace(
    a: &RegularizedOperator,
    b: &RegularizedOperator,
    q: WeightSpec,
    allow_uncertified: bool,
) -> Result<TraceResult> {
    let basis = a.basis();
    if basis != b.basis() {
        return Err(Error::BasisMismatch {
            left: basis.cutoff(),
            right: b.basis().cutoff(),
        });
    }
    let ka = a.kernel.entries();
    let kb = b.kernel.entries();
    let diag: Vec<C64> = basis
        .modes()
        .enumerate()
        .map(|(i, k)| {
            let cross = ka.row(i).dot(&kb.column(i));
            cross + a.symbolic.eigenvalue(k) * kb[[i, i]] + ka[[i, i]] * b.symbolic.eigenvalue(k)
        })
        .collect();
    let decay = certify_diagonal(basis, &diag);
    if !decay.certified && !allow_uncertified {
        return Err(Error::NotCertified(format!(
            "product kernel diagonal decay rate {:.3} at edge magnitude {:.3e}",
            decay.rate, decay.edge_magnitude
        )));
    }
    let symbolic = zeta_trace_spectral(&(&a.symbolic * &b.symbolic), q)?;
    Ok(TraceResult {
        finite_part: symbolic.finite_part + pairwise_sum(&diag),
        residue_term: symbolic.residue_term,
        certified: decay.certified,
        truncation_estimate: decay.truncation_estimate,
    })
}

/// `tr^Q(AB - BA)`.
pub fn trace_defect(a: &RegularizedOperator, b: &RegularizedOperator, q: WeightSpec) -> Result<C64> {
    Ok(renormalized_trace(&a.commutator(b)?, q)?.finite_part)
}

/// `|tr^Q(A) - conj(tr^Q(A*))|`.
pub fn star_identity_check(a: &RegularizedOperator, q: WeightSpec) -> Result<f64> {
    let t = renormalized_trace_unchecked(a, q)?.finite_part;
    let s = renormalized_trace_unchecked(&a.adjoint(), q)?.finite_part;
    Ok((t - s.conj()).norm())
}
