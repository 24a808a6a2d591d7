//! Invariant batteries behind `rigid-psido verify`.
//!
//! Each check reports its measured value against a threshold. Checks marked
//! non-gating are informational and never fail a suite.

use std::str::FromStr;

use num_complex::Complex64 as C64;
use rigid_psido::corpus::Corpus;
use rigid_psido::dynamics::{
    euler_rhs, functional_derivative_hk, hamiltonian, hamiltonian_form_gap, heat_dressed_identity, independence_probe,
    integrate, lax_residual, solve_weak_euler, weak_form_residual, FlowConfig, LAX_XI_SAMPLES,
};
use rigid_psido::geometry::{
    arnold_comparison, metric_compatibility_residual, spray_consistency, torsion_residual, uniqueness_probe,
    CurvatureConvention, SpraySign,
};
use rigid_psido::pairing::{ad_twisted, indefiniteness_witness, pairing};
use rigid_psido::symbol::{compose_symbols, DEFAULT_DEPTH};
use rigid_psido::zeta::oracle::{power_sum, weight_power_trace};
use rigid_psido::zeta::{renormalized_trace, zeta_even};
use rigid_psido::{
    classify_parity, invert_elliptic_symbol, multiplication_operator, parity_of_product, star_identity_check,
    trace_defect, wodzicki_residue, zeta_trace_spectral, ClassicalSymbol, InertiaSpec, ModeBasis, Q0Kind,
    RegularizedOperator, SpectralPolynomial, TrigPoly, TwistSpec, WeightSpec,
};
use serde::Serialize;

use crate::LabError;

const Q: WeightSpec = WeightSpec::ShiftedLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Symbols,
    Traces,
    Pairings,
    Dynamics,
    Geometry,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "symbols" => Self::Symbols,
            "traces" => Self::Traces,
            "pairings" => Self::Pairings,
            "dynamics" => Self::Dynamics,
            "geometry" => Self::Geometry,
            "all" => Self::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    /// `measured <= threshold`, or `measured > threshold` for lower bounds.
    pub lower_bound: bool,
    pub gating: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(suite: &'static str) -> Self {
        Self { suite, checks: Vec::new() }
    }

    fn push(&mut self, name: &'static str, measured: f64, threshold: f64, lower_bound: bool, gating: bool) {
        let passed = if lower_bound { measured > threshold } else { measured <= threshold };
        self.checks.push(Check {
            suite: self.suite,
            name,
            measured,
            threshold,
            lower_bound,
            gating,
            passed,
        });
    }

    fn at_most(&mut self, name: &'static str, measured: f64, threshold: f64) {
        self.push(name, measured, threshold, false, true);
    }

    fn above(&mut self, name: &'static str, measured: f64, threshold: f64) {
        self.push(name, measured, threshold, true, true);
    }

    fn info(&mut self, name: &'static str, measured: f64) {
        self.push(name, measured, f64::INFINITY, false, false);
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `1 + d/dx`, i.e. `1 + iD` with `D = -i d/dx`.
pub fn one_plus_derivative() -> ClassicalSymbol {
    ClassicalSymbol::differential(&[TrigPoly::constant(c(1.0, 0.0)), TrigPoly::constant(c(0.0, 1.0))])
        .expect("nonempty coefficients")
}

/// Mismatches between the parity of composed random odd/even pairs and the
/// composition table.
pub fn parity_table_mismatches(pairs: usize, seed: u64) -> Result<usize, LabError> {
    let mut corpus = Corpus::new(ModeBasis::new(8)?, seed);
    let mut bad = 0;
    for _ in 0..pairs {
        let sa = if corpus.coin() { 1.0 } else { -1.0 };
        let sb = if corpus.coin() { 1.0 } else { -1.0 };
        let a = corpus.parity_symbol(sa, 3);
        let b = corpus.parity_symbol(sb, 3);
        let expected = parity_of_product(classify_parity(&a), classify_parity(&b))?;
        if classify_parity(&compose_symbols(&a, &b, 3)?) != expected {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Largest `|res[A, B]|` over random symbol pairs.
pub fn residue_commutator_max(pairs: usize, seed: u64) -> Result<f64, LabError> {
    let mut corpus = Corpus::new(ModeBasis::new(8)?, seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let a = corpus.generic_symbol(4);
        let b = corpus.generic_symbol(4);
        let ab = compose_symbols(&a, &b, 4)?;
        let ba = compose_symbols(&b, &a, 4)?;
        worst = worst.max(wodzicki_residue(&ab.difference(&ba)?).norm());
    }
    Ok(worst)
}

fn symbols(seed: u64, rec: &mut Recorder) -> Result<(), LabError> {
    rec.at_most("parity_closure_mismatches", parity_table_mismatches(500, seed)? as f64, 0.0);
    rec.at_most("residue_of_commutators", residue_commutator_max(200, seed)?, 1e-12);
    let inv = invert_elliptic_symbol(&one_plus_derivative(), DEFAULT_DEPTH)?;
    rec.at_most("parametrix_residue", wodzicki_residue(&inv).norm(), 1e-12);
    let check = compose_symbols(&one_plus_derivative(), &inv, DEFAULT_DEPTH)?;
    let id = ClassicalSymbol::identity().with_depth(DEFAULT_DEPTH)?;
    let mut worst: f64 = 0.0;
    for j in 0..=DEFAULT_DEPTH {
        let got = check.degree_component(-(j as i64));
        let want = id.degree_component(-(j as i64));
        let diff = match (got, want) {
            (Some(g), Some(w)) => g.plus.distance(&w.plus).max(g.minus.distance(&w.minus)),
            (Some(g), None) => g.plus.max_abs().max(g.minus.max_abs()),
            (None, Some(w)) => w.plus.max_abs().max(w.minus.max_abs()),
            (None, None) => 0.0,
        };
        worst = worst.max(diff);
    }
    rec.at_most("parametrix_inverts", worst, 1e-12);
    let mut corpus = Corpus::new(ModeBasis::new(8)?, seed ^ 0x5eed);
    let mut odd: f64 = 0.0;
    let mut assoc: f64 = 0.0;
    for _ in 0..100 {
        odd = odd.max(wodzicki_residue(&corpus.parity_symbol(1.0, 4)).norm());
        let (a, b, d) = (corpus.generic_symbol(3), corpus.generic_symbol(3), corpus.generic_symbol(3));
        let left = compose_symbols(&compose_symbols(&a, &b, 3)?, &d, 3)?;
        let right = compose_symbols(&a, &compose_symbols(&b, &d, 3)?, 3)?;
        let scale = left.max_abs().max(1.0);
        assoc = assoc.max(left.difference(&right)?.max_abs() / scale);
    }
    rec.at_most("odd_class_residue", odd, 1e-12);
    rec.at_most("composition_associativity", assoc, 1e-10);
    Ok(())
}

/// Worst deviation of the golden spectral traces from the oracle.
pub fn golden_trace_gap() -> Result<f64, LabError> {
    let cases: [(i32, f64); 5] = [
        (0, 0.0),
        (1, 1.0),
        (2, 1.0),
        (3, 1.0),
        (-1, 1.0 + std::f64::consts::PI.powi(2) / 3.0),
    ];
    let mut worst: f64 = 0.0;
    for (m, golden) in cases {
        let t = zeta_trace_spectral(&SpectralPolynomial::power(m), Q)?.finite_part;
        let oracle = weight_power_trace(m);
        worst = worst.max((t.re - oracle).abs()).max(t.im.abs()).max((golden - oracle).abs());
    }
    Ok(worst)
}

fn traces(seed: u64, rec: &mut Recorder) -> Result<(), LabError> {
    let mut lit: f64 = 0.0;
    for n in 1..=8 {
        lit = lit.max((zeta_even(n) - power_sum(2.0 * n as f64)).abs());
    }
    rec.at_most("zeta_closed_form_vs_oracle", lit, 1e-12);
    rec.at_most("golden_traces", golden_trace_gap()?, 1e-8);

    let basis = ModeBasis::new(24)?;
    let mut corpus = Corpus::new(basis, seed);
    let (mut star, mut cyc, mut defect, mut smooth): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..20 {
        let (a, b, d) = (corpus.element(), corpus.element(), corpus.smoothing(1.0));
        star = star.max(star_identity_check(&a, Q)?);
        let abc = renormalized_trace(&a.product(&b)?.product(&d)?, Q)?.finite_part;
        let cab = renormalized_trace(&d.product(&a)?.product(&b)?, Q)?.finite_part;
        cyc = cyc.max((abc - cab).norm() / abc.norm().max(1.0));
        defect = defect.max(trace_defect(&a, &b, Q)?.norm());
        let plain: C64 = d.kernel().trace();
        smooth = smooth.max((renormalized_trace(&d, Q)?.finite_part - plain).norm());
    }
    rec.at_most("star_identity", star, 1e-12);
    rec.at_most("cyclicity", cyc, 1e-10);
    rec.at_most("commutator_trace", defect, 1e-10);
    rec.at_most("trace_class_agreement", smooth, 1e-12);
    Ok(())
}

/// Worst relative error of the heat-twist closed form for `ad_twisted(M_{z^l}, M_{z^m})`
/// over a grid of `(s, l, m)`.
pub fn heat_closed_form_gap(basis: ModeBasis) -> Result<f64, LabError> {
    let mut worst: f64 = 0.0;
    let n = basis.cutoff() as i64;
    for s in [0.01, 0.05, 0.1] {
        let twist = TwistSpec::heat(s)?;
        for l in [1i64, 2, 3] {
            for m in [-2i64, 1, 4] {
                let x = RegularizedOperator::from_kernel(multiplication_operator(&TrigPoly::monomial(l, c(1.0, 0.0)), basis).operator);
                let z = RegularizedOperator::from_kernel(multiplication_operator(&TrigPoly::monomial(m, c(1.0, 0.0)), basis).operator);
                let out = ad_twisted(&x, &z, &twist)?.dense();
                let band = l.abs() + m.abs();
                for p in (-n + band)..=(n - band) {
                    let expected = (s * (2 * p * l - l * l) as f64).exp() - 1.0;
                    let got = out.entry(p - l + m, p);
                    worst = worst.max((got - c(expected, 0.0)).norm() / expected.abs().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

fn twists() -> Result<Vec<TwistSpec>, LabError> {
    Ok(vec![
        TwistSpec::laplacian_power(1),
        TwistSpec::heat(0.05)?,
        TwistSpec::new(Q0Kind::LaplacianPower(1), InertiaSpec::new(1.0, 0.5, 4.0)?)?,
    ])
}

/// Worst relative residuals of the adjoint identity and Hermitian symmetry over
/// random triples.
pub fn pairing_identities(basis: ModeBasis, triples: usize, seed: u64) -> Result<(f64, f64), LabError> {
    let mut corpus = Corpus::new(basis, seed);
    let (mut adj, mut herm): (f64, f64) = (0.0, 0.0);
    for twist in twists()? {
        for _ in 0..triples {
            let (x, y, z) = (corpus.smoothing(1.0), corpus.smoothing(1.0), corpus.smoothing(1.0));
            let lhs = pairing(&y.commutator(&x)?, &z, &twist, Q)?.full;
            let rhs = pairing(&y, &ad_twisted(&x, &z, &twist)?, &twist, Q)?.full;
            adj = adj.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0));
            let a = pairing(&x, &y, &twist, Q)?.full;
            let b = pairing(&y, &x, &twist, Q)?.full;
            herm = herm.max((a - b.conj()).norm() / a.norm().max(1.0));
        }
    }
    Ok((adj, herm))
}

fn pairings(seed: u64, rec: &mut Recorder) -> Result<(), LabError> {
    let basis = ModeBasis::new(16)?;
    rec.at_most("heat_closed_form", heat_closed_form_gap(basis)?, 1e-12);
    let (adj, herm) = pairing_identities(basis, 10, seed)?;
    rec.at_most("adjoint_identity", adj, 1e-7);
    rec.at_most("hermitian_symmetry", herm, 1e-12);
    let mut corpus = Corpus::new(basis, seed);
    let ops: Vec<_> = (0..6).map(|_| corpus.element()).collect();
    rec.above(
        "gram_nondegeneracy",
        rigid_psido::gram_nondegeneracy(&ops, &TwistSpec::laplacian_power(1), Q)?,
        1e-10,
    );
    let witness = indefiniteness_witness(&TwistSpec::laplacian_power(1), Q, basis, 64, seed)?;
    rec.push(
        "indefiniteness_witness",
        witness.map(|w| w.value).unwrap_or(f64::INFINITY),
        0.0,
        false,
        false,
    );
    Ok(())
}

/// Relative finite-difference error of the functional derivative for `k = 1, 2, 3`.
pub fn functional_derivative_error(basis: ModeBasis, seed: u64) -> Result<f64, LabError> {
    let twist = TwistSpec::laplacian_power(1);
    let mut corpus = Corpus::new(basis, seed);
    let p = RegularizedOperator::identity_plus(corpus.smoothing(0.5).kernel().clone());
    let nu = corpus.smoothing(1.0);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let hp = hamiltonian(&p.checked_add(&nu.scale(c(eps, 0.0)))?, k, Q)?;
        let hm = hamiltonian(&p.checked_sub(&nu.scale(c(eps, 0.0)))?, k, Q)?;
        let fd = (hp - hm) / (2.0 * eps);
        let an = pairing(&nu, &functional_derivative_hk(&p, k, &twist)?, &twist, Q)?.full;
        worst = worst.max((fd - an).norm() / an.norm());
    }
    Ok(worst)
}

fn dynamics(seed: u64, rec: &mut Recorder) -> Result<(), LabError> {
    let basis = ModeBasis::new(16)?;
    let mut worst: f64 = 0.0;
    for twist in twists()? {
        let cfg = FlowConfig::new(twist, basis);
        let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), basis);
        worst = worst.max(euler_rhs(&id, &cfg)?.dense().max_abs());
    }
    rec.at_most("identity_equilibrium", worst, 0.0);

    let twist = TwistSpec::laplacian_power(1);
    let mut corpus = Corpus::new(basis, seed);
    let mut cfg = FlowConfig::new(twist, basis);
    let mut lax: f64 = 0.0;
    for _ in 0..5 {
        let x = RegularizedOperator::identity_plus(corpus.smoothing(0.3).kernel().clone());
        let xdot = euler_rhs(&x, &cfg)?;
        for xi in LAX_XI_SAMPLES {
            lax = lax.max(lax_residual(&x, &xdot, xi, &cfg)?);
        }
    }
    rec.at_most("lax_residual", lax, 1e-8);

    cfg.step = 0.01;
    cfg.horizon = 0.2;
    cfg.stride = 5;
    let x0 = heat_dressed_identity(&TrigPoly::from_pairs([(3, c(1.0, 0.0)), (1, c(0.1, 0.0))]), basis);
    let record = integrate(&x0, &cfg)?;
    rec.at_most("integral_drift", record.max_integral_drift(), 1e-6);
    rec.at_most("spectrum_drift", record.max_spectrum_drift().unwrap_or(f64::INFINITY), 1e-6);

    rec.at_most("functional_derivative", functional_derivative_error(ModeBasis::new(12)?, seed)?, 1e-6);

    let probes: Vec<_> = (0..12).map(|_| corpus.element()).collect();
    let p = RegularizedOperator::identity_plus(corpus.smoothing(0.3).kernel().clone());
    rec.at_most("weak_euler_solve", solve_weak_euler(&p, 2, &probes, &twist, Q)?.residual, 1e-8);

    // self-adjoint state
    let k = corpus.smoothing(0.3);
    let ps = RegularizedOperator::identity_plus(k.kernel() + &k.kernel().adjoint());
    let xdot = euler_rhs(&ps, &cfg)?;
    rec.at_most("lagrangian_weak_form", weak_form_residual(&ps, &xdot, &probes, &twist, Q)?, 1e-7);
    rec.info("hamiltonian_form_gap", hamiltonian_form_gap(&ps, &xdot, 2, &probes, &twist, Q)?);

    let dirs: Vec<_> = (0..8).map(|_| corpus.smoothing(0.5)).collect();
    let sv = independence_probe(&x0, &dirs, 4, 1e-5, &cfg)?;
    rec.above("independence_min_singular", sv.last().copied().unwrap_or(0.0), 0.0);
    Ok(())
}

fn geometry(seed: u64, rec: &mut Recorder) -> Result<(), LabError> {
    let basis = ModeBasis::new(12)?;
    let twist = TwistSpec::laplacian_power(1);
    let mut corpus = Corpus::new(basis, seed);
    let (mut torsion, mut metric, mut arnold, mut literal): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..10 {
        let (x, y, z) = (corpus.smoothing(1.0), corpus.smoothing(1.0), corpus.smoothing(1.0));
        torsion = torsion.max(torsion_residual(&x, &y, &twist)?);
        metric = metric.max(metric_compatibility_residual(&x, &y, &z, &twist, Q)?);
        let a = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::BracketOfFields)?;
        arnold = arnold.max(a.gap / a.rhs.abs().max(1.0));
        let l = arnold_comparison(&x, &y, &twist, Q, CurvatureConvention::LiteralCommutator)?;
        literal = literal.max(l.gap / l.rhs.abs().max(1.0));
    }
    rec.at_most("torsion", torsion, 1e-13);
    rec.at_most("metric_compatibility", metric, 1e-7);
    rec.at_most("arnold_identity", arnold, 1e-7);
    rec.info("arnold_identity_literal_commutator", literal);
    let probes: Vec<_> = (0..3).map(|_| corpus.smoothing(1.0)).collect();
    rec.at_most("connection_uniqueness", uniqueness_probe(&probes, &twist, Q)?.residual, 1e-8);
    let cfg = FlowConfig::new(twist, basis);
    let mut off = 0.0;
    for _ in 0..100 {
        if spray_consistency(&corpus.smoothing(1.0), &cfg)?.annihilating != SpraySign::Plus {
            off += 1.0;
        }
    }
    rec.at_most("spray_sign_plus", off, 0.0);
    let (x, y) = (corpus.smoothing(1.0), corpus.smoothing(1.0));
    rec.info("sample_sectional_area", rigid_psido::geometry::BiplaneDatum::new(&x, &y, &twist, Q)?.area_sq);
    Ok(())
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Report, LabError> {
    let mut checks = Vec::new();
    let parts: &[(Suite, &'static str, fn(u64, &mut Recorder) -> Result<(), LabError>)] = &[
        (Suite::Symbols, "symbols", symbols),
        (Suite::Traces, "traces", traces),
        (Suite::Pairings, "pairings", pairings),
        (Suite::Dynamics, "dynamics", dynamics),
        (Suite::Geometry, "geometry", geometry),
    ];
    for (s, name, f) in parts {
        if suite == Suite::All || suite == *s {
            let mut rec = Recorder::new(name);
            f(seed, &mut rec)?;
            checks.extend(rec.checks);
        }
    }
    let passed = checks.iter().all(|c| c.passed || !c.gating);
    Ok(Report {
        suite,
        seed,
        passed,
        checks,
    })
}
