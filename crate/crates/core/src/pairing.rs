//! Hermitian pairings `⟨A, B⟩ = tr^Q(A Q₀ B*)`, inertia twists and the
//! twisted adjoint `ad_𝔸`.
//!
//! Sign convention: with `ad_X Y = -[X, Y]`, the twisted adjoint is fixed by
//! `⟨[X, Y], Z⟩_𝔸 = -⟨Y, ad_𝔸(X) Z⟩_𝔸`, which gives
//! `ad_𝔸(X) Z = 𝔸⁻¹([𝔸(Z) Q₀, X*] Q₀⁻¹)`. In the truncated algebra `tr^Q` is
//! cyclic, so the identity holds for the full complex pairing, not only its
//! real part.
//!
//! The inertia operator acts by right multiplication with a real Fourier
//! multiplier, `𝔸(X) = X·diag(𝔸(k))`; it commutes with every diagonal `Q₀`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::spectral::{multiplication_operator, weight_eigenvalue, FourierOperator, ModeBasis, TrigPoly};
use crate::zeta::{product_trace, RegularizedOperator, SpectralPolynomial, WeightSpec};

/// Largest exponent allowed in a materialized `exp` factor.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// The twist `Q₀`; always diagonal, injective and self-adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "parameter")]
pub enum Q0Kind {
    Identity,
    /// `(Δ+π)^p`.
    LaplacianPower(i32),
    /// `exp(-sΔ)`, `s > 0`.
    Heat(f64),
}

impl Q0Kind {
    pub fn eigenvalue(&self, k: i64) -> f64 {
        match *self {
            Q0Kind::Identity => 1.0,
            Q0Kind::LaplacianPower(p) => weight_eigenvalue(k).powi(p),
            Q0Kind::Heat(s) => (-s * (k * k) as f64).exp(),
        }
    }

    /// `Q₀` in the regularized class.
    pub fn operator(&self, basis: ModeBasis) -> RegularizedOperator {
        match *self {
            Q0Kind::Identity => RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), basis),
            Q0Kind::LaplacianPower(p) => RegularizedOperator::from_symbolic(SpectralPolynomial::power(p), basis),
            Q0Kind::Heat(_) => RegularizedOperator::from_kernel(FourierOperator::from_diagonal(basis, |k| {
                C64::new(self.eigenvalue(k), 0.0)
            })),
        }
    }

    /// Entry factor of `Q₀ A Q₀⁻¹` at `(row, col)`, i.e. `q₀(row)/q₀(col)`.
    ///
    /// For the heat twist this is `exp(s(col² - row²))`, evaluated in closed
    /// form so that `exp(sΔ)` is never materialized.
    fn conjugation_factor(&self, row: i64, col: i64) -> std::result::Result<f64, f64> {
        match *self {
            Q0Kind::Identity => Ok(1.0),
            Q0Kind::LaplacianPower(p) => Ok((weight_eigenvalue(row) / weight_eigenvalue(col)).powi(p)),
            Q0Kind::Heat(s) => {
                let exponent = s * ((col * col) as f64 - (row * row) as f64);
                if exponent > OVERFLOW_GUARD {
                    Err(exponent)
                } else {
                    Ok(exponent.exp())
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Q0Kind::Heat(s) if !(s > 0.0 && s.is_finite()) => Err(Error::InvalidArgument(format!(
                "heat twist needs s > 0, got {s}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Real inertia multiplier `𝔸(k) = base + bump·exp(-k²/width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaSpec {
    pub base: f64,
    pub bump: f64,
    pub width: f64,
}

impl Default for InertiaSpec {
    fn default() -> Self {
        Self::identity()
    }
}

impl InertiaSpec {
    pub fn identity() -> Self {
        Self {
            base: 1.0,
            bump: 0.0,
            width: 1.0,
        }
    }

    /// Validated multiplier; it must not vanish on any mode.
    pub fn new(base: f64, bump: f64, width: f64) -> Result<Self> {
        let spec = Self { base, bump, width };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.base.is_finite() || !self.bump.is_finite() {
            return Err(Error::InvalidArgument("inertia width must be positive and values finite".into()));
        }
        // the multiplier moves monotonically from base + bump (k = 0) to base
        let ends = [self.base, self.base + self.bump];
        if ends.contains(&0.0) || ends[0].signum() != ends[1].signum() {
            return Err(Error::InvalidArgument(format!(
                "inertia multiplier vanishes: base {} bump {}",
                self.base, self.bump
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.base == 1.0 && self.bump == 0.0
    }

    pub fn value(&self, k: i64) -> f64 {
        self.base + self.bump * (-((k * k) as f64) / self.width).exp()
    }

    fn right_multiply(z: &RegularizedOperator, base: f64, decaying: impl Fn(i64) -> f64) -> RegularizedOperator {
        let b = C64::new(base, 0.0);
        let scaled = z.kernel().scale(b);
        let from_kernel = z.kernel().right_diagonal(|k| C64::new(decaying(k), 0.0));
        let from_symbolic =
            FourierOperator::from_diagonal(z.basis(), |k| z.symbolic().eigenvalue(k) * decaying(k));
        RegularizedOperator::new(z.symbolic().scale(b), &(&scaled + &from_kernel) + &from_symbolic)
    }

    /// `𝔸(Z) = Z·diag(𝔸)`.
    pub fn apply(&self, z: &RegularizedOperator) -> RegularizedOperator {
        if self.is_identity() {
            return z.clone();
        }
        Self::right_multiply(z, self.base, |k| self.value(k) - self.base)
    }

    /// `𝔸⁻¹(Z) = Z·diag(1/𝔸)`.
    pub fn apply_inverse(&self, z: &RegularizedOperator) -> RegularizedOperator {
        if self.is_identity() {
            return z.clone();
        }
        let inv = 1.0 / self.base;
        Self::right_multiply(z, inv, |k| 1.0 / self.value(k) - inv)
    }
}

/// A twist `Q₀` together with an inertia multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub q0: Q0Kind,
    pub inertia: InertiaSpec,
}

impl TwistSpec {
    pub fn new(q0: Q0Kind, inertia: InertiaSpec) -> Result<Self> {
        q0.validate()?;
        inertia.validate()?;
        Ok(Self { q0, inertia })
    }

    pub fn identity() -> Self {
        Self {
            q0: Q0Kind::Identity,
            inertia: InertiaSpec::identity(),
        }
    }

    pub fn laplacian_power(p: i32) -> Self {
        Self {
            q0: Q0Kind::LaplacianPower(p),
            inertia: InertiaSpec::identity(),
        }
    }

    pub fn heat(s: f64) -> Result<Self> {
        Self::new(Q0Kind::Heat(s), InertiaSpec::identity())
    }

    /// `A·Q₀`, applied as a diagonal on the right.
    pub fn right_q0(&self, a: &RegularizedOperator) -> RegularizedOperator {
        match self.q0 {
            Q0Kind::Identity => a.clone(),
            Q0Kind::LaplacianPower(p) => RegularizedOperator::new(
                a.symbolic() * &SpectralPolynomial::power(p),
                a.kernel().right_diagonal(|k| C64::new(weight_eigenvalue(k).powi(p), 0.0)),
            ),
            Q0Kind::Heat(_) => {
                let q = |k| self.q0.eigenvalue(k);
                let kernel = &a.kernel().right_diagonal(|k| C64::new(q(k), 0.0))
                    + &FourierOperator::from_diagonal(a.basis(), |k| a.symbolic().eigenvalue(k) * q(k));
                RegularizedOperator::from_kernel(kernel)
            }
        }
    }

    /// `A·Q₀⁻¹`. For the heat twist the kernel must be band-limited enough
    /// to stay below the overflow guard, and the symbolic part must vanish.
    pub fn right_q0_inverse(&self, a: &RegularizedOperator) -> Result<RegularizedOperator> {
        match self.q0 {
            Q0Kind::Identity => Ok(a.clone()),
            Q0Kind::LaplacianPower(p) => Ok(self_with_power(a, -p)),
            Q0Kind::Heat(s) => {
                let basis = a.basis();
                let n = basis.cutoff() as f64;
                if !a.symbolic().is_zero() && s * n * n > OVERFLOW_GUARD {
                    return Err(Error::Overflow {
                        exponent: s * n * n,
                        guard: OVERFLOW_GUARD,
                    });
                }
                let dense = a.dense();
                let mut worst = f64::NEG_INFINITY;
                let out = dense.scale_entries(|row, col| {
                    let exponent = s * (col * col) as f64;
                    if dense.entry(row, col) != C64::new(0.0, 0.0) && exponent > OVERFLOW_GUARD {
                        worst = worst.max(exponent);
                    }
                    C64::new(exponent.min(OVERFLOW_GUARD).exp(), 0.0)
                });
                if worst > OVERFLOW_GUARD {
                    return Err(Error::Overflow {
                        exponent: worst,
                        guard: OVERFLOW_GUARD,
                    });
                }
                Ok(RegularizedOperator::from_kernel(out))
            }
        }
    }

    /// `Q₀ A Q₀⁻¹`, entrywise.
    pub fn conjugate_by_q0(&self, a: &RegularizedOperator) -> Result<RegularizedOperator> {
        if self.q0 == Q0Kind::Identity {
            return Ok(a.clone());
        }
        let kernel = a.kernel();
        let mut overflow = None;
        let scaled = kernel.scale_entries(|row, col| {
            match self.q0.conjugation_factor(row, col) {
                Ok(f) => C64::new(f, 0.0),
                Err(exponent) => {
                    if kernel.entry(row, col) != C64::new(0.0, 0.0) {
                        overflow = Some(overflow.map_or(exponent, |e: f64| e.max(exponent)));
                    }
                    C64::new(0.0, 0.0)
                }
            }
        });
        if let Some(exponent) = overflow {
            return Err(Error::Overflow {
                exponent,
                guard: OVERFLOW_GUARD,
            });
        }
        // diagonal symbolic parts commute with Q₀
        Ok(RegularizedOperator::new(a.symbolic().clone(), scaled))
    }
}

fn self_with_power(a: &RegularizedOperator, p: i32) -> RegularizedOperator {
    RegularizedOperator::new(
        a.symbolic() * &SpectralPolynomial::power(p),
        a.kernel().right_diagonal(|k| C64::new(weight_eigenvalue(k).powi(p), 0.0)),
    )
}

/// A pairing value with its real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingValue {
    pub full: C64,
    pub real_part: f64,
}

/// `⟨A, B⟩_𝔸 = tr^Q(A Q₀ 𝔸(B)*)`.
pub fn pairing(
    a: &RegularizedOperator,
    b: &RegularizedOperator,
    twist: &TwistSpec,
    q: WeightSpec,
) -> Result<PairingValue> {
    let left = twist.right_q0(a);
    let right = twist.inertia.apply(b).adjoint();
    let full = product_trace(&left, &right, q, false)?.finite_part;
    Ok(PairingValue {
        full,
        real_part: full.re,
    })
}

/// `⟨A | B⟩ = Re⟨A, B⟩_𝔸`.
pub fn real_pairing(a: &RegularizedOperator, b: &RegularizedOperator, twist: &TwistSpec, q: WeightSpec) -> Result<f64> {
    Ok(pairing(a, b, twist, q)?.real_part)
}

/// Smallest singular value of the real Gram matrix `Re⟨E_i, E_j⟩_𝔸`.
pub fn gram_nondegeneracy(ops: &[RegularizedOperator], twist: &TwistSpec, q: WeightSpec) -> Result<f64> {
    if ops.len() < 2 {
        return Err(Error::InvalidArgument("need at least two operators".into()));
    }
    let n = ops.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = real_pairing(&ops[i], &ops[j], twist, q)?;
        }
    }
    Ok(linalg::real_singular_values(&g).last().copied().unwrap_or(0.0))
}

/// `ad_𝔸(X) Z = 𝔸⁻¹(𝔸(Z)·Q₀X*Q₀⁻¹ - X*·𝔸(Z))`.
pub fn ad_twisted(x: &RegularizedOperator, z: &RegularizedOperator, twist: &TwistSpec) -> Result<RegularizedOperator> {
    let xs = x.adjoint();
    let conj = twist.conjugate_by_q0(&xs)?;
    let az = twist.inertia.apply(z);
    let v = az.product(&conj)?.checked_sub(&xs.product(&az)?)?;
    Ok(twist.inertia.apply_inverse(&v))
}

/// `ad_X Y = -[X, Y]`.
pub fn ad(x: &RegularizedOperator, y: &RegularizedOperator) -> Result<RegularizedOperator> {
    y.commutator(x)
}

/// Result of an indefiniteness search.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub operator: RegularizedOperator,
    pub value: f64,
    pub attempt: usize,
}

/// Random search for `X` with `Re⟨X, X⟩_𝔸 < 0`.
///
/// Candidates are `c·Id + K` with `K` either a rank-one `-c·t·uu*` on the
/// modes `|k| ≤ 3` or a short trigonometric multiplication cut to low modes. A value counts
/// only when it is below `-1e-8` and beyond the trace's truncation estimate.
pub fn indefiniteness_witness(
    twist: &TwistSpec,
    q: WeightSpec,
    basis: ModeBasis,
    budget: usize,
    seed: u64,
) -> Result<Option<Witness>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = 3.min(basis.cutoff() as i64);
    for attempt in 0..budget {
        let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let kernel = if attempt % 2 == 0 {
            // c·(Id - t·uu*) with u supported on low modes
            let u: Vec<(i64, C64)> = (-low..=low)
                .map(|r| (r, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let norm_sq: f64 = u.iter().map(|(_, z)| z.norm_sqr()).sum();
            let t = rng.gen_range(0.0..2.0) / norm_sq.max(f64::MIN_POSITIVE);
            let mut entries = FourierOperator::zeros(basis).into_entries();
            for &(r, ur) in &u {
                for &(s, us) in &u {
                    entries[[basis.index(r).unwrap(), basis.index(s).unwrap()]] = -c * t * ur * us.conj();
                }
            }
            FourierOperator::from_entries(basis, entries)?
        } else {
            let a = TrigPoly::from_pairs(
                (-2..=2).map(|n| (n, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
            );
            // restrict to low modes so the product stays finite rank
            let m = multiplication_operator(&a, basis).operator;
            m.scale_entries(|r, s| {
                if r.abs() <= low + 2 && s.abs() <= low {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        };
        let x = RegularizedOperator::new(SpectralPolynomial::identity().scale(c), kernel);
        if x.dense().is_zero() {
            continue;
        }
        let left = twist.right_q0(&x);
        let right = twist.inertia.apply(&x).adjoint();
        let t = match product_trace(&left, &right, q, false) {
            Ok(t) => t,
            Err(Error::NotCertified(_)) => continue,
            Err(e) => return Err(e),
        };
        let value = t.finite_part.re;
        if value < -1e-8 && -value > t.truncation_estimate {
            return Ok(Some(Witness {
                operator: x,
                value,
                attempt,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::spectral::{build_canonical, Canonical};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn basis(n: usize) -> ModeBasis {
        ModeBasis::new(n).unwrap()
    }

    fn shift(n: i64, b: ModeBasis) -> RegularizedOperator {
        RegularizedOperator::from_kernel(multiplication_operator(&TrigPoly::monomial(n, c(1.0, 0.0)), b).operator)
    }

    const Q: WeightSpec = WeightSpec::ShiftedLaplacian;

    #[test]
    fn identity_pairing_under_laplacian_twist() {
        let b = basis(16);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        let v = pairing(&id, &id, &TwistSpec::laplacian_power(1), Q).unwrap();
        assert_eq!(v.full, c(1.0, 0.0));
        let zero = RegularizedOperator::zero(b);
        assert_eq!(pairing(&id, &zero, &TwistSpec::laplacian_power(1), Q).unwrap().full, c(0.0, 0.0));
    }

    #[test]
    fn shift_pairing_under_heat() {
        let b = basis(32);
        let twist = TwistSpec::heat(1.0).unwrap();
        for n in [0, 2, -3] {
            let v = pairing(&shift(n, b), &shift(n, b), &twist, Q).unwrap();
            assert!((v.full.re - 1.772_637_204_826_652).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_examples() {
        let b = basis(24);
        let heat = TwistSpec::heat(1.0).unwrap();
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        let twocos = RegularizedOperator::from_kernel(
            multiplication_operator(&TrigPoly::from_pairs([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]), b).operator,
        );
        assert!(gram_nondegeneracy(&[id, twocos.clone()], &heat, Q).unwrap() > 1e-3);
        assert!(gram_nondegeneracy(&[twocos.clone(), twocos], &heat, Q).unwrap() < 1e-12);
        let heat1 = build_canonical(Canonical::Heat(1.0), b).unwrap();
        let gaussians: Vec<_> = (-2..=2)
            .map(|n| {
                let s = shift(n, b).kernel().clone();
                RegularizedOperator::from_kernel(&(&s * &heat1) * &s.adjoint())
            })
            .collect();
        assert!(gram_nondegeneracy(&gaussians, &TwistSpec::identity(), Q).unwrap() > 1e-6);
    }

    #[test]
    fn heat_closed_form() {
        let b = basis(24);
        for &(s, l, m) in &[(0.1, 1, 2), (0.5, -2, 1), (1.0, 1, -1)] {
            let twist = TwistSpec::heat(s).unwrap();
            let out = ad_twisted(&shift(l, b), &shift(m, b), &twist).unwrap().dense();
            for p in -10i64..=10 {
                let expected = (s * (2 * p * l - l * l) as f64).exp() - 1.0;
                let got = out.entry(-l + m + p, p);
                assert!((got - c(expected, 0.0)).norm() < 1e-12 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn heat_guard() {
        let b = basis(64);
        let twist = TwistSpec::heat(1.0).unwrap();
        let wide = RegularizedOperator::from_kernel(FourierOperator::from_fn(b, |_, _| c(1.0, 0.0)));
        assert!(matches!(ad_twisted(&wide, &wide, &twist), Err(Error::Overflow { .. })));
    }

    #[test]
    fn identity_is_central() {
        let b = basis(12);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        let mut corpus = Corpus::new(b, 3);
        let z = corpus.smoothing(1.0);
        for twist in [TwistSpec::laplacian_power(1), TwistSpec::heat(0.5).unwrap(), TwistSpec::identity()] {
            assert!(ad_twisted(&id, &z, &twist).unwrap().dense().max_abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_ad_on_identity() {
        let b = basis(16);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        let n = 2;
        let out = ad_twisted(&shift(n, b), &id, &TwistSpec::laplacian_power(1)).unwrap().dense();
        for p in -12i64..=12 {
            let expected = weight_eigenvalue(p - n) / weight_eigenvalue(p) - 1.0;
            assert!((out.entry(p - n, p) - c(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn witness_search() {
        let b = basis(12);
        let w = indefiniteness_witness(&TwistSpec::laplacian_power(1), Q, b, 200, 7).unwrap();
        let w = w.expect("laplacian twist is indefinite");
        assert!(w.value < 0.0);
        let again = real_pairing(&w.operator, &w.operator, &TwistSpec::laplacian_power(1), Q).unwrap();
        assert!((again - w.value).abs() < 1e-12);
        let heat = TwistSpec::heat(0.5).unwrap();
        // finite-rank X under a heat twist gives tr(X e^{-sΔ} X*) ≥ 0
        let none = indefiniteness_witness(&heat, Q, b, 200, 7).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn explicit_negative_direction() {
        let b = basis(8);
        let p2 = FourierOperator::from_diagonal(b, |k| c(if k == 2 { 1.0 } else { 0.0 }, 0.0));
        let x = RegularizedOperator::identity_plus(p2.scale(c(-1.0, 0.0)));
        let v = real_pairing(&x, &x, &TwistSpec::laplacian_power(1), Q).unwrap();
        assert!((v + 3.0).abs() < 1e-14);
    }

    #[test]
    fn invariants_on_random_triples() {
        let b = basis(16);
        let mut corpus = Corpus::new(b, 11);
        let twists = [
            TwistSpec::laplacian_power(1),
            TwistSpec::new(Q0Kind::LaplacianPower(1), InertiaSpec::new(1.0, 0.5, 4.0).unwrap()).unwrap(),
            TwistSpec::new(Q0Kind::LaplacianPower(2), InertiaSpec::new(2.0, -1.0, 9.0).unwrap()).unwrap(),
        ];
        for twist in &twists {
            for _ in 0..10 {
                let (x, y, z) = (corpus.element(), corpus.element(), corpus.element());
                // adjoint defining identity
                let lhs = real_pairing(&x.commutator(&y).unwrap(), &z, twist, Q).unwrap();
                let rhs = real_pairing(&y, &ad_twisted(&x, &z, twist).unwrap(), twist, Q).unwrap();
                assert!((lhs + rhs).abs() < 1e-7 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
                // Hermitian symmetry
                let ab = pairing(&x, &y, twist, Q).unwrap().full;
                let ba = pairing(&y, &x, twist, Q).unwrap().full;
                assert!((ba - ab.conj()).norm() < 1e-9 * (1.0 + ab.norm()));
                // sesquilinearity
                let alpha = c(0.3, -0.7);
                let combo = x.scale(alpha).checked_add(&z).unwrap();
                let l = pairing(&combo, &y, twist, Q).unwrap().full;
                let r = alpha * ab + pairing(&z, &y, twist, Q).unwrap().full;
                assert!((l - r).norm() < 1e-10 * (1.0 + l.norm()));
                let l = pairing(&y, &combo, twist, Q).unwrap().full;
                let r = alpha.conj() * ba + pairing(&y, &z, twist, Q).unwrap().full;
                assert!((l - r).norm() < 1e-10 * (1.0 + l.norm()));
            }
        }
    }

    #[test]
    fn inertia_round_trip() {
        let b = basis(10);
        let inertia = InertiaSpec::new(1.5, -0.7, 3.0).unwrap();
        let mut corpus = Corpus::new(b, 5);
        let z = corpus.element();
        let back = inertia.apply_inverse(&inertia.apply(&z));
        assert!((&back.dense() - &z.dense()).max_abs() < 1e-13);
        assert!(InertiaSpec::new(1.0, -1.0, 1.0).is_err());
        assert!(InertiaSpec::new(1.0, -2.0, 1.0).is_err());
    }
}
