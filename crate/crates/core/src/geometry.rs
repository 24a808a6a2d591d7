//! Levi-Civita connection of the twisted pairing, curvature, sectional
//! curvature and the spray of the Euler flow.
//!
//! All metric quantities use the real part `⟨A|B⟩ = Re⟨A, B⟩_𝔸`, with
//! `ad_X Y = [Y, X]` and `ad_𝔸(X)` its adjoint, `⟨ad_X Y|Z⟩ = ⟨Y|ad_𝔸(X) Z⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{euler_rhs, FlowConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::{ad, ad_twisted, real_pairing, TwistSpec};
use crate::zeta::{RegularizedOperator, WeightSpec};

/// Relative threshold below which a biplane counts as degenerate.
pub const BIPLANE_DEGENERACY: f64 = 1e-10;

/// `θ_X Y = ½(ad_X Y - ad_𝔸(X) Y - ad_𝔸(Y) X)`.
pub fn connection(x: &RegularizedOperator, y: &RegularizedOperator, twist: &TwistSpec) -> Result<RegularizedOperator> {
    let a = ad(x, y)?;
    let b = ad_twisted(x, y, twist)?;
    let c = ad_twisted(y, x, twist)?;
    Ok(a.checked_sub(&b)?.checked_sub(&c)?.scale(C64::new(0.5, 0.0)))
}

/// Which bracket enters the correction term of the curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureConvention {
    /// `[θ_X, θ_Y] - θ_{ad_X Y}`: the bracket of the fields generated by `X`, `Y`.
    #[default]
    BracketOfFields,
    /// `[θ_X, θ_Y] - θ_{XY - YX}`.
    LiteralCommutator,
}

/// `R(X,Y)Z = θ_X(θ_Y Z) - θ_Y(θ_X Z) - θ_B Z` with `B` chosen by `convention`.
pub fn curvature(
    x: &RegularizedOperator,
    y: &RegularizedOperator,
    z: &RegularizedOperator,
    twist: &TwistSpec,
    convention: CurvatureConvention,
) -> Result<RegularizedOperator> {
    let xy_z = connection(x, &connection(y, z, twist)?, twist)?;
    let yx_z = connection(y, &connection(x, z, twist)?, twist)?;
    let bracket = match convention {
        CurvatureConvention::BracketOfFields => ad(x, y)?,
        CurvatureConvention::LiteralCommutator => x.commutator(y)?,
    };
    xy_z.checked_sub(&yx_z)?.checked_sub(&connection(&bracket, z, twist)?)
}

/// A pair of tangent vectors with their real Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BiplaneDatum {
    pub x: RegularizedOperator,
    pub y: RegularizedOperator,
    pub gram: [[f64; 2]; 2],
    /// `⟨X|X⟩⟨Y|Y⟩ - ⟨X|Y⟩²`; may be negative.
    pub area_sq: f64,
}

impl BiplaneDatum {
    pub fn new(x: &RegularizedOperator, y: &RegularizedOperator, twist: &TwistSpec, q: WeightSpec) -> Result<Self> {
        let xx = real_pairing(x, x, twist, q)?;
        let xy = real_pairing(x, y, twist, q)?;
        let yy = real_pairing(y, y, twist, q)?;
        Ok(Self {
            x: x.clone(),
            y: y.clone(),
            gram: [[xx, xy], [xy, yy]],
            area_sq: xx * yy - xy * xy,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = self.gram.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        self.area_sq.abs() <= BIPLANE_DEGENERACY * scale * scale
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegenerateBiplane(self.area_sq))
        } else {
            Ok(())
        }
    }
}

/// `K(X,Y) = -⟨R(X,Y)X|Y⟩ / |X∧Y|²`.
pub fn sectional_curvature(
    x: &RegularizedOperator,
    y: &RegularizedOperator,
    twist: &TwistSpec,
    q: WeightSpec,
    convention: CurvatureConvention,
) -> Result<f64> {
    let datum = BiplaneDatum::new(x, y, twist, q)?;
    datum.require_nondegenerate()?;
    let r = curvature(x, y, x, twist, convention)?;
    Ok(-real_pairing(&r, y, twist, q)? / datum.area_sq)
}

/// Both sides of the closed-form expression for `|X∧Y|² K(X,Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArnoldComparison {
    /// `|X∧Y|² K` from the curvature operator.
    pub lhs: f64,
    /// `-¾|C|² + ½⟨C|ad_𝔸(X)Y - ad_𝔸(Y)X⟩ + |N(X,Y)|² - ⟨N(X,X)|N(Y,Y)⟩`
    /// with `C = XY - YX` and `N(U,V) = ½(ad_𝔸(U)V + ad_𝔸(V)U)`.
    pub rhs: f64,
    pub gap: f64,
}

pub fn arnold_comparison(
    x: &RegularizedOperator,
    y: &RegularizedOperator,
    twist: &TwistSpec,
    q: WeightSpec,
    convention: CurvatureConvention,
) -> Result<ArnoldComparison> {
    let datum = BiplaneDatum::new(x, y, twist, q)?;
    datum.require_nondegenerate()?;
    let r = curvature(x, y, x, twist, convention)?;
    let lhs = -real_pairing(&r, y, twist, q)?;

    let half = C64::new(0.5, 0.0);
    let c = x.commutator(y)?;
    let axy = ad_twisted(x, y, twist)?;
    let ayx = ad_twisted(y, x, twist)?;
    let axx = ad_twisted(x, x, twist)?;
    let ayy = ad_twisted(y, y, twist)?;
    let n_xy = axy.checked_add(&ayx)?.scale(half);
    let rhs = -0.75 * real_pairing(&c, &c, twist, q)?
        + 0.5 * real_pairing(&c, &axy.checked_sub(&ayx)?, twist, q)?
        + real_pairing(&n_xy, &n_xy, twist, q)?
        - real_pairing(&axx, &ayy, twist, q)?;
    let gap = (lhs - rhs).abs();
    Ok(ArnoldComparison { lhs, rhs, gap })
}

/// `|lhs - rhs|` of the closed-form sectional curvature identity.
pub fn arnold_identity_gap(
    x: &RegularizedOperator,
    y: &RegularizedOperator,
    twist: &TwistSpec,
    q: WeightSpec,
    convention: CurvatureConvention,
) -> Result<f64> {
    Ok(arnold_comparison(x, y, twist, q, convention)?.gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpraySign {
    Plus,
    Minus,
    Both,
    Neither,
}

/// Agreement of the geodesic spray with the Euler right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprayReport {
    /// `‖euler_rhs(X) - ad_𝔸(X)X‖`, zero by construction.
    pub rhs_gap: f64,
    /// `‖θ_X X + ad_𝔸(X)X‖`.
    pub plus_gap: f64,
    /// `‖θ_X X - ad_𝔸(X)X‖`.
    pub minus_gap: f64,
    /// Scale `‖ad_𝔸(X)X‖` used to decide which gap vanishes.
    pub scale: f64,
    pub annihilating: SpraySign,
}

/// Norms are entrywise maxima over the window.
pub fn spray_consistency(x: &RegularizedOperator, cfg: &FlowConfig) -> Result<SprayReport> {
    let rhs = euler_rhs(x, cfg)?;
    let spray = ad_twisted(x, x, &cfg.twist)?;
    let theta = connection(x, x, &cfg.twist)?;
    let rhs_gap = rhs.checked_sub(&spray)?.dense().max_abs();
    let plus_gap = theta.checked_add(&spray)?.dense().max_abs();
    let minus_gap = theta.checked_sub(&spray)?.dense().max_abs();
    let scale = spray.dense().max_abs();
    let threshold = 1e-12 * scale.max(x.dense().max_abs()).max(1.0);
    let annihilating = match (plus_gap <= threshold, minus_gap <= threshold) {
        (true, true) => SpraySign::Both,
        (true, false) => SpraySign::Plus,
        (false, true) => SpraySign::Minus,
        (false, false) => SpraySign::Neither,
    };
    Ok(SprayReport {
        rhs_gap,
        plus_gap,
        minus_gap,
        scale,
        annihilating,
    })
}

/// Relative torsion residual `‖θ_X Y - θ_Y X - ad_X Y‖ / max(‖X‖, ‖Y‖)`.
pub fn torsion_residual(x: &RegularizedOperator, y: &RegularizedOperator, twist: &TwistSpec) -> Result<f64> {
    let t = connection(x, y, twist)?.checked_sub(&connection(y, x, twist)?)?.checked_sub(&ad(x, y)?)?;
    let scale = x.dense().max_abs().max(y.dense().max_abs()).max(1.0);
    Ok(t.dense().max_abs() / scale)
}

/// Relative residual of `⟨θ_X Y|Z⟩ + ⟨Y|θ_X Z⟩ = 0`.
pub fn metric_compatibility_residual(
    x: &RegularizedOperator,
    y: &RegularizedOperator,
    z: &RegularizedOperator,
    twist: &TwistSpec,
    q: WeightSpec,
) -> Result<f64> {
    let a = real_pairing(&connection(x, y, twist)?, z, twist, q)?;
    let b = real_pairing(y, &connection(x, z, twist)?, twist, q)?;
    Ok((a + b).abs() / a.abs().max(b.abs()).max(1.0))
}

/// Outcome of reconstructing a connection from torsion-freeness and metric
/// compatibility alone on a probe basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Smallest singular value of the constraint system; positive means unique.
    pub min_singular: f64,
    /// Largest `|t_abc - ⟨θ_{E_a} E_b|E_c⟩|`, relative.
    pub residual: f64,
}

/// Solves for `t_abc = ⟨T(E_a, E_b)|E_c⟩` from
/// `t_abc - t_bac = ⟨ad_{E_a} E_b|E_c⟩` and `t_abc + t_acb = 0`,
/// and compares with the connection.
pub fn uniqueness_probe(probes: &[RegularizedOperator], twist: &TwistSpec, q: WeightSpec) -> Result<UniquenessReport> {
    let m = probes.len();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two probes".into()));
    }
    let idx = |a: usize, b: usize, c: usize| (a * m + b) * m + c;
    let unknowns = m * m * m;
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut expected = vec![0.0; unknowns];
    for a in 0..m {
        for b in 0..m {
            let ab = ad(&probes[a], &probes[b])?;
            let theta = connection(&probes[a], &probes[b], twist)?;
            for c in 0..m {
                let rhs = real_pairing(&ab, &probes[c], twist, q)?;
                rows.push((vec![(idx(a, b, c), 1.0), (idx(b, a, c), -1.0)], rhs));
                rows.push((vec![(idx(a, b, c), 1.0), (idx(a, c, b), 1.0)], 0.0));
                expected[idx(a, b, c)] = real_pairing(&theta, &probes[c], twist, q)?;
            }
        }
    }
    let mut mat = DMatrix::<f64>::zeros(rows.len(), unknowns);
    let mut rhs = DVector::<f64>::zeros(rows.len());
    for (r, (coeffs, v)) in rows.iter().enumerate() {
        for &(col, w) in coeffs {
            mat[(r, col)] += w;
        }
        rhs[r] = *v;
    }
    let (sol, min_singular) = linalg::real_least_squares(&mat, &rhs)?;
    let scale = expected.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let residual = sol.iter().zip(&expected).map(|(s, e)| (s - e).abs()).fold(0.0, f64::max) / scale;
    Ok(UniquenessReport { min_singular, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::pairing::{InertiaSpec, Q0Kind};
    use crate::spectral::{FourierOperator, ModeBasis};
    use crate::zeta::SpectralPolynomial;

    const Q: WeightSpec = WeightSpec::ShiftedLaplacian;

    fn setup(seed: u64) -> (ModeBasis, Corpus, TwistSpec) {
        let b = ModeBasis::new(12).unwrap();
        (b, Corpus::new(b, seed), TwistSpec::laplacian_power(1))
    }

    fn diag(b: ModeBasis, f: impl Fn(i64) -> f64) -> RegularizedOperator {
        RegularizedOperator::from_kernel(FourierOperator::from_diagonal(b, |k| C64::new(f(k), 0.0)))
    }

    #[test]
    fn torsion_free() {
        let (_, mut corpus, twist) = setup(1);
        for _ in 0..5 {
            let (x, y) = (corpus.smoothing(1.0), corpus.smoothing(1.0));
            assert!(torsion_residual(&x, &y, &twist).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn identity_connection_vanishes() {
        let (b, _, twist) = setup(0);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        assert!(connection(&id, &id, &twist).unwrap().dense().is_zero());
    }

    #[test]
    fn metric_compatible() {
        let (_, mut corpus, twist) = setup(2);
        let inertial = TwistSpec::new(Q0Kind::LaplacianPower(1), InertiaSpec::new(1.0, 0.5, 4.0).unwrap()).unwrap();
        for t in [twist, inertial] {
            for _ in 0..4 {
                let (x, y, z) = (corpus.smoothing(1.0), corpus.smoothing(1.0), corpus.smoothing(1.0));
                assert!(metric_compatibility_residual(&x, &y, &z, &t, Q).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn bilinear() {
        let (_, mut corpus, twist) = setup(3);
        let (x, y, z) = (corpus.smoothing(1.0), corpus.smoothing(1.0), corpus.smoothing(1.0));
        let a = C64::new(0.7, 0.0);
        let lhs = connection(&x.scale(a).checked_add(&z).unwrap(), &y, &twist).unwrap();
        let rhs = connection(&x, &y, &twist).unwrap().scale(a).checked_add(&connection(&z, &y, &twist).unwrap()).unwrap();
        assert!(lhs.checked_sub(&rhs).unwrap().dense().max_abs() <= 1e-10);
        let lhs = connection(&y, &x.scale(a).checked_add(&z).unwrap(), &twist).unwrap();
        let rhs = connection(&y, &x, &twist).unwrap().scale(a).checked_add(&connection(&y, &z, &twist).unwrap()).unwrap();
        assert!(lhs.checked_sub(&rhs).unwrap().dense().max_abs() <= 1e-10);
    }

    #[test]
    fn unique_on_probes() {
        let (_, mut corpus, twist) = setup(4);
        let probes: Vec<_> = (0..3).map(|_| corpus.smoothing(1.0)).collect();
        let rep = uniqueness_probe(&probes, &twist, Q).unwrap();
        assert!(rep.min_singular > 1e-6);
        assert!(rep.residual <= 1e-8, "{}", rep.residual);
    }

    #[test]
    fn curvature_antisymmetric() {
        let (_, mut corpus, twist) = setup(5);
        let (x, z) = (corpus.smoothing(1.0), corpus.smoothing(1.0));
        for conv in [CurvatureConvention::BracketOfFields, CurvatureConvention::LiteralCommutator] {
            assert!(curvature(&x, &x, &z, &twist, conv).unwrap().dense().max_abs() <= 1e-13);
        }
    }

    #[test]
    fn commuting_diagonals_are_flat() {
        let (b, _, twist) = setup(0);
        let x = diag(b, |k| (-(k * k) as f64 / 8.0).exp());
        let y = diag(b, |k| 1.0 / (1.0 + (k * k) as f64));
        let z = diag(b, |k| (k as f64 * 0.3).cos() / (1.0 + (k * k * k * k) as f64));
        let r = curvature(&x, &y, &z, &twist, CurvatureConvention::default()).unwrap();
        assert!(r.dense().max_abs() <= 1e-14);
        assert!(sectional_curvature(&x, &y, &twist, Q, CurvatureConvention::default()).unwrap().abs() <= 1e-14);
        let cmp = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::default()).unwrap();
        assert!(cmp.lhs.abs() <= 1e-14 && cmp.rhs.abs() <= 1e-14);
    }

    #[test]
    fn degenerate_biplane() {
        let (_, mut corpus, twist) = setup(6);
        let x = corpus.smoothing(1.0);
        let err = sectional_curvature(&x, &x, &twist, Q, CurvatureConvention::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateBiplane(_)));
        assert!(arnold_identity_gap(&x, &x.scale(C64::new(2.0, 0.0)), &twist, Q, CurvatureConvention::default()).is_err());
    }

    #[test]
    fn arnold_identity_selects_convention() {
        let (_, mut corpus, twist) = setup(7);
        for _ in 0..5 {
            let (x, y) = (corpus.smoothing(1.0), corpus.smoothing(1.0));
            let good = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::BracketOfFields).unwrap();
            assert!(good.gap <= 1e-8 * good.rhs.abs().max(1.0), "{good:?}");
            let k = sectional_curvature(&x, &y, &twist, Q, CurvatureConvention::BracketOfFields).unwrap();
            let area = BiplaneDatum::new(&x, &y, &twist, Q).unwrap().area_sq;
            assert!((k * area - good.rhs).abs() <= 1e-8 * good.rhs.abs().max(1.0));
            let bad = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::LiteralCommutator).unwrap();
            assert!(bad.gap > 1e-3 * bad.rhs.abs());
        }
    }

    #[test]
    fn arnold_identity_with_inertia() {
        let (_, mut corpus, _) = setup(17);
        let twist = TwistSpec::new(Q0Kind::LaplacianPower(1), InertiaSpec::new(2.0, -0.5, 3.0).unwrap()).unwrap();
        let (x, y) = (corpus.smoothing(1.0), corpus.smoothing(1.0));
        let cmp = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::default()).unwrap();
        assert!(cmp.gap <= 1e-8 * cmp.rhs.abs().max(1.0));
    }

    #[test]
    fn spray_sign() {
        let (b, mut corpus, twist) = setup(8);
        let cfg = FlowConfig::new(twist, b);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b);
        assert_eq!(spray_consistency(&id, &cfg).unwrap().annihilating, SpraySign::Both);
        let d = diag(b, |k| (-(k * k) as f64 / 8.0).exp());
        assert_eq!(spray_consistency(&d, &cfg).unwrap().annihilating, SpraySign::Both);
        for _ in 0..100 {
            let rep = spray_consistency(&corpus.smoothing(1.0), &cfg).unwrap();
            assert_eq!(rep.rhs_gap, 0.0);
            assert_eq!(rep.annihilating, SpraySign::Plus);
        }
    }
}
