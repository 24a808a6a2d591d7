//! The Euler equation `dX/dt = ad_𝔸(X) X`, its Lax pair, integrals of
//! motion, the Hamiltonian weak form and fixed-step time integration.
//!
//! For `X` and `Q₀` diagonal-compatible the right-hand side is computed as
//! `𝔸⁻¹(𝔸(X)·Q₀X*Q₀⁻¹ - X*·𝔸(X))`, which is the commutator form
//! `𝔸⁻¹([𝔸(X)Q₀, X*]Q₀⁻¹)` with `Q₀X*Q₀⁻¹` evaluated entrywise. In the
//! truncated algebra `d/dt(𝔸(X)Q₀) = [𝔸(X)Q₀, X*]` then holds exactly, so the
//! discrete flow is isospectral up to integrator error.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pairing::{ad_twisted, pairing, real_pairing, InertiaSpec, TwistSpec};
use crate::spectral::{build_canonical, multiplication_operator, Canonical, ModeBasis, TrigPoly};
use crate::zeta::{product_trace, renormalized_trace_unchecked, RegularizedOperator, SpectralPolynomial, WeightSpec};

/// `ξ` values at which the Lax identity is checked; the identity is affine
/// in `ξ`, so four points over-determine it.
pub const LAX_XI_SAMPLES: [C64; 4] = [
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(2.0, -1.0),
];

/// Tolerance on the relative commutation residuals required of `J`.
pub const LAX_HYPOTHESIS_TOLERANCE: f64 = 1e-10;

/// Convergence threshold of the implicit-midpoint fixed-point iteration.
const IMPLICIT_TOLERANCE: f64 = 1e-12;
const IMPLICIT_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    ImplicitMidpoint,
}

/// Everything needed to integrate and diagnose one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub twist: TwistSpec,
    pub weight: WeightSpec,
    pub basis: ModeBasis,
    pub integrator: Integrator,
    pub step: f64,
    pub horizon: f64,
    /// `J` of the Lax pair; must commute with `𝔸(X)Q₀`, and `J²` with `X*`.
    pub lax_j: RegularizedOperator,
    /// Diagnostics every `stride` steps (the final time is always sampled).
    pub stride: usize,
    pub ks: Vec<u32>,
    pub xis: Vec<C64>,
    pub track_spectrum: bool,
    /// Reject the run when the step-doubling estimate at a sample exceeds this.
    pub step_tolerance: Option<f64>,
    /// Accept kernels whose decay is not certified (values are flagged).
    pub allow_uncertified: bool,
}

impl FlowConfig {
    pub fn new(twist: TwistSpec, basis: ModeBasis) -> Self {
        Self {
            twist,
            weight: WeightSpec::ShiftedLaplacian,
            basis,
            integrator: Integrator::Rk4,
            step: 1e-3,
            horizon: 1.0,
            lax_j: RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), basis),
            stride: 50,
            ks: vec![1, 2, 3, 4],
            xis: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            track_spectrum: true,
            step_tolerance: None,
            allow_uncertified: false,
        }
    }

    fn steps(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.horizon > 0.0) {
            return Err(Error::InvalidArgument("step and horizon must be positive".into()));
        }
        if self.step > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "step {} exceeds horizon {}",
                self.step, self.horizon
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        Ok((self.horizon / self.step - 1e-9).ceil() as usize)
    }
}

/// `Id + M_a e^{-Δ} M_{conj a}`.
pub fn heat_dressed_identity(a: &TrigPoly, basis: ModeBasis) -> RegularizedOperator {
    let m = multiplication_operator(a, basis).operator;
    let mbar = multiplication_operator(&a.conj(), basis).operator;
    let heat = build_canonical(Canonical::Heat(1.0), basis).expect("positive heat parameter");
    RegularizedOperator::identity_plus(&(&m * &heat) * &mbar)
}

/// `dX/dt = ad_𝔸(X) X`.
pub fn euler_rhs(x: &RegularizedOperator, cfg: &FlowConfig) -> Result<RegularizedOperator> {
    ad_twisted(x, x, &cfg.twist)
}

/// `𝔸(X)Q₀ + ξJ²`.
pub fn lax_matrix(x: &RegularizedOperator, xi: C64, cfg: &FlowConfig) -> Result<RegularizedOperator> {
    let l = cfg.twist.right_q0(&cfg.twist.inertia.apply(x));
    let j2 = cfg.lax_j.product(&cfg.lax_j)?;
    l.checked_add(&j2.scale(xi))
}

/// Operator norm of `d/dt(𝔸(X)Q₀ + ξJ²) - [𝔸(X)Q₀ + ξJ², X* + ξJ]` with
/// `d/dt X = xdot`.
pub fn lax_residual(x: &RegularizedOperator, xdot: &RegularizedOperator, xi: C64, cfg: &FlowConfig) -> Result<f64> {
    let lhs = cfg.twist.right_q0(&cfg.twist.inertia.apply(xdot));
    let l = lax_matrix(x, xi, cfg)?;
    let m = x.adjoint().checked_add(&cfg.lax_j.scale(xi))?;
    let diff = lhs.checked_sub(&l.commutator(&m)?)?;
    Ok(diff.dense().operator_norm())
}

/// Relative residuals of `[𝔸(X)Q₀, J]` and `[X*, J²]` (Frobenius norms).
pub fn lax_hypothesis_residuals(x: &RegularizedOperator, cfg: &FlowConfig) -> Result<(f64, f64)> {
    let rel = |c: &RegularizedOperator, a: &RegularizedOperator, b: &RegularizedOperator| {
        let scale = a.dense().frobenius_norm() * b.dense().frobenius_norm();
        if scale == 0.0 {
            0.0
        } else {
            c.dense().frobenius_norm() / scale
        }
    };
    let l = lax_matrix(x, C64::new(0.0, 0.0), cfg)?;
    let j = &cfg.lax_j;
    let j2 = j.product(j)?;
    let xs = x.adjoint();
    Ok((rel(&l.commutator(j)?, &l, j), rel(&xs.commutator(&j2)?, &xs, &j2)))
}

fn check_lax_hypotheses(x: &RegularizedOperator, cfg: &FlowConfig) -> Result<(f64, f64)> {
    let (a, b) = lax_hypothesis_residuals(x, cfg)?;
    if a > LAX_HYPOTHESIS_TOLERANCE || b > LAX_HYPOTHESIS_TOLERANCE {
        return Err(Error::LaxHypothesis(format!(
            "[𝔸(X)Q₀, J] residual {a:.3e}, [X*, J²] residual {b:.3e}"
        )));
    }
    Ok((a, b))
}

/// Integrals `I_k(ξ) = Σ_j C(k,j) c_{k,j} ξ^j` with `c_{k,j} = tr^Q(L^{k-j} J^{2j})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionIntegrals {
    pub ks: Vec<u32>,
    pub xis: Vec<C64>,
    /// `values[a][b] = I_{ks[a]}(xis[b])`.
    pub values: Vec<Vec<C64>>,
    /// `table[a][j] = c_{ks[a], j}` for `j = 0..=ks[a]`.
    pub table: Vec<Vec<C64>>,
    pub certified: bool,
    pub truncation_estimate: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn motion_integrals(x: &RegularizedOperator, ks: &[u32], xis: &[C64], cfg: &FlowConfig) -> Result<MotionIntegrals> {
    if ks.contains(&0) {
        return Err(Error::InvalidArgument("integral orders start at 1".into()));
    }
    let kmax = ks.iter().copied().max().unwrap_or(0) as usize;
    let basis = x.basis();
    let id = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), basis);
    let l = lax_matrix(x, C64::new(0.0, 0.0), cfg)?;
    let j2 = cfg.lax_j.product(&cfg.lax_j)?;
    let mut lpow = vec![id.clone()];
    let mut jpow = vec![id];
    for m in 1..=kmax {
        lpow.push(lpow[m - 1].product(&l)?);
        jpow.push(jpow[m - 1].product(&j2)?);
    }
    let mut certified = true;
    let mut truncation_estimate: f64 = 0.0;
    let mut table = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut row = Vec::with_capacity(k as usize + 1);
        for j in 0..=k as usize {
            let t = product_trace(&lpow[k as usize - j], &jpow[j], cfg.weight, true)?;
            if !t.certified && !cfg.allow_uncertified {
                return Err(Error::NotCertified(format!(
                    "kernel of L^{} J^{} has uncertified decay",
                    k as usize - j,
                    2 * j
                )));
            }
            certified &= t.certified;
            truncation_estimate = truncation_estimate.max(t.truncation_estimate);
            row.push(t.finite_part);
        }
        table.push(row);
    }
    let values = ks
        .iter()
        .zip(&table)
        .map(|(&k, row)| {
            xis.iter()
                .map(|&xi| {
                    (0..=k)
                        .map(|j| row[j as usize] * binomial(k, j) * xi.powu(j))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(MotionIntegrals {
        ks: ks.to_vec(),
        xis: xis.to_vec(),
        values,
        table,
        certified,
        truncation_estimate,
    })
}

/// `H_k(P) = tr^Q(P^k)`.
pub fn hamiltonian(p: &RegularizedOperator, k: u32, q: WeightSpec) -> Result<C64> {
    let mut acc = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), p.basis());
    for _ in 0..k {
        acc = acc.product(p)?;
    }
    Ok(renormalized_trace_unchecked(&acc, q)?.finite_part)
}

/// `δH_k/δμ = k (P*)^{k-1} Q₀⁻¹`, the gradient of `H_k` for `⟨N, D⟩ = tr^Q(N Q₀ D*)`.
///
/// The factor `Q₀⁻¹` sits to the right of `(P*)^{k-1}`: then
/// `⟨N, δH_k/δμ⟩ = k tr^Q(N P^{k-1})`, the derivative of `tr^Q(P^k)` along `N`,
/// also when `P` does not commute with `Q₀`.
pub fn functional_derivative_hk(p: &RegularizedOperator, k: u32, twist: &TwistSpec) -> Result<RegularizedOperator> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let ps = p.adjoint();
    let mut acc = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), p.basis());
    for _ in 1..k {
        acc = acc.product(&ps)?;
    }
    Ok(twist.right_q0_inverse(&acc)?.scale(C64::new(k as f64, 0.0)))
}

/// The gradient with `Q₀⁻¹` on the left, `k Q₀⁻¹ (P*)^{k-1}`. Agrees with
/// [`functional_derivative_hk`] only when `P` commutes with `Q₀`.
pub fn functional_derivative_hk_left(p: &RegularizedOperator, k: u32, twist: &TwistSpec) -> Result<RegularizedOperator> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut acc = RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), p.basis());
    for _ in 1..k {
        acc = acc.product(p)?;
    }
    // Q₀⁻¹ B* = (B Q₀⁻¹)*
    Ok(twist.right_q0_inverse(&acc)?.adjoint().scale(C64::new(k as f64, 0.0)))
}

/// Same `Q₀`, no inertia.
fn plain_twist(twist: &TwistSpec) -> TwistSpec {
    TwistSpec {
        q0: twist.q0,
        inertia: InertiaSpec::identity(),
    }
}

/// Solution of the weak Euler equation on a probe span.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakSolution {
    pub dpdt: RegularizedOperator,
    pub coefficients: Vec<C64>,
    /// Largest `|⟨dP/dt, E_j⟩ - k⟨P, [δH_k, E_j]⟩|` over probes.
    pub residual: f64,
    /// Smallest singular value of the complex probe Gram matrix.
    pub gram_min_singular: f64,
}

/// Right-hand sides `⟨P, [δH_k, E_j]⟩` of the weak Euler equation.
fn weak_rhs(p: &RegularizedOperator, k: u32, probes: &[RegularizedOperator], twist: &TwistSpec, q: WeightSpec) -> Result<Vec<C64>> {
    let plain = plain_twist(twist);
    let grad = functional_derivative_hk(p, k, twist)?;
    probes
        .iter()
        .map(|e| Ok(pairing(p, &grad.commutator(e)?, &plain, q)?.full))
        .collect()
}

/// Solves `⟨dP/dt, E_j⟩ = ⟨P, [δH_k/δμ, E_j]⟩` for `dP/dt` in the span of the probes.
pub fn solve_weak_euler(
    p: &RegularizedOperator,
    k: u32,
    probes: &[RegularizedOperator],
    twist: &TwistSpec,
    q: WeightSpec,
) -> Result<WeakSolution> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("empty probe basis".into()));
    }
    let plain = plain_twist(twist);
    let n = probes.len();
    let mut g = nalgebra::DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            g[(j, i)] = pairing(&probes[i], &probes[j], &plain, q)?.full;
        }
    }
    let gram_min_singular = linalg::min_singular_value(&g);
    if !(gram_min_singular > 1e-10) {
        return Err(Error::DegenerateGram(gram_min_singular));
    }
    let rhs = weak_rhs(p, k, probes, twist, q)?;
    let coefficients = linalg::solve(&g, &rhs)?;
    let mut dpdt = RegularizedOperator::zero(p.basis());
    for (a, e) in coefficients.iter().zip(probes) {
        dpdt = dpdt.checked_add(&e.scale(*a))?;
    }
    let mut residual: f64 = 0.0;
    for (e, r) in probes.iter().zip(&rhs) {
        residual = residual.max((pairing(&dpdt, e, &plain, q)?.full - r).norm());
    }
    Ok(WeakSolution {
        dpdt,
        coefficients,
        residual,
        gram_min_singular,
    })
}

/// Gap between the Hamiltonian weak form and a given velocity:
/// `max_j |⟨V, E_j⟩ - k⟨P, [δH_k, E_j]⟩|`, relative to the largest right-hand side.
pub fn hamiltonian_form_gap(
    p: &RegularizedOperator,
    v: &RegularizedOperator,
    k: u32,
    probes: &[RegularizedOperator],
    twist: &TwistSpec,
    q: WeightSpec,
) -> Result<f64> {
    let plain = plain_twist(twist);
    let rhs = weak_rhs(p, k, probes, twist, q)?;
    let scale = rhs.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let mut gap: f64 = 0.0;
    for (e, r) in probes.iter().zip(&rhs) {
        gap = gap.max((pairing(v, e, &plain, q)?.full - r).norm());
    }
    Ok(gap / scale)
}

/// Residual of the Lagrangian weak form `⟨[W, X] | X⟩ = ⟨W | Ẋ⟩` over probes `W`,
/// relative to the largest term.
pub fn weak_form_residual(
    x: &RegularizedOperator,
    xdot: &RegularizedOperator,
    probes: &[RegularizedOperator],
    twist: &TwistSpec,
    q: WeightSpec,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    for w in probes {
        let lhs = real_pairing(&w.commutator(x)?, x, twist, q)?;
        let rhs = real_pairing(w, xdot, twist, q)?;
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    Ok(worst / scale.max(1.0))
}

/// Per-sample diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub time: f64,
    pub integrals: MotionIntegrals,
    /// Largest Lax residual over [`LAX_XI_SAMPLES`].
    pub lax_residual: f64,
    /// `max |λ_i(t) - λ_i(0)| / max |λ(0)|` for the sorted spectrum of `𝔸(X)Q₀`.
    pub spectrum_drift: Option<f64>,
    /// Relative residual of the Lagrangian weak form along the flow.
    pub weak_residual: f64,
    /// Extrapolated truncation error of traces and of the state kernel.
    pub truncation_estimate: f64,
    /// Largest entry of `X` in the outer 10% of modes, relative.
    pub boundary_mass: f64,
    /// Step-doubling estimate of the local error at this sample.
    pub local_error: f64,
}

/// A sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<RegularizedOperator>,
    pub samples: Vec<SampleDiagnostics>,
    pub step: f64,
    pub steps: usize,
    /// Smallest singular value of `X₀` on the window.
    pub initial_min_singular: f64,
    /// Relative `J` commutation residuals at `t = 0`.
    pub hypothesis_residuals: (f64, f64),
    pub certified: bool,
}

impl TrajectoryRecord {
    /// Largest relative drift `|I(t) - I(0)| / max(1, |I(0)|)` per `(k, ξ)`.
    pub fn integral_drift(&self) -> Vec<Vec<f64>> {
        let first = &self.samples[0].integrals.values;
        first
            .iter()
            .enumerate()
            .map(|(a, row)| {
                row.iter()
                    .enumerate()
                    .map(|(b, &v0)| {
                        self.samples
                            .iter()
                            .map(|s| (s.integrals.values[a][b] - v0).norm() / v0.norm().max(1.0))
                            .fold(0.0, f64::max)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn max_integral_drift(&self) -> f64 {
        self.integral_drift().into_iter().flatten().fold(0.0, f64::max)
    }

    pub fn max_lax_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.lax_residual).fold(0.0, f64::max)
    }

    pub fn max_spectrum_drift(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.spectrum_drift).try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
    }
}

fn step_once(x: &RegularizedOperator, h: f64, cfg: &FlowConfig) -> Result<RegularizedOperator> {
    let hc = |c: f64| C64::new(c * h, 0.0);
    match cfg.integrator {
        Integrator::Rk4 => {
            let k1 = euler_rhs(x, cfg)?;
            let k2 = euler_rhs(&x.checked_add(&k1.scale(hc(0.5)))?, cfg)?;
            let k3 = euler_rhs(&x.checked_add(&k2.scale(hc(0.5)))?, cfg)?;
            let k4 = euler_rhs(&x.checked_add(&k3.scale(hc(1.0)))?, cfg)?;
            let incr = k1
                .checked_add(&k2.scale(C64::new(2.0, 0.0)))?
                .checked_add(&k3.scale(C64::new(2.0, 0.0)))?
                .checked_add(&k4)?;
            x.checked_add(&incr.scale(hc(1.0 / 6.0)))
        }
        Integrator::ImplicitMidpoint => {
            let mut next = x.checked_add(&euler_rhs(x, cfg)?.scale(hc(1.0)))?;
            let scale = x.dense().max_abs().max(1.0);
            let mut update = f64::INFINITY;
            for _ in 0..IMPLICIT_MAX_ITERATIONS {
                let mid = x.checked_add(&next)?.scale(C64::new(0.5, 0.0));
                let candidate = x.checked_add(&euler_rhs(&mid, cfg)?.scale(hc(1.0)))?;
                update = candidate.checked_sub(&next)?.dense().max_abs() / scale;
                next = candidate;
                if update <= IMPLICIT_TOLERANCE {
                    return Ok(next);
                }
            }
            Err(Error::ImplicitStage {
                iterations: IMPLICIT_MAX_ITERATIONS,
                update,
            })
        }
    }
}

/// Sorted spectrum of `𝔸(X)Q₀`.
pub fn lax_spectrum(x: &RegularizedOperator, cfg: &FlowConfig) -> Result<Vec<C64>> {
    linalg::eigenvalues(lax_matrix(x, C64::new(0.0, 0.0), cfg)?.dense().entries())
}

fn sample(
    x: &RegularizedOperator,
    time: f64,
    h: f64,
    reference_spectrum: Option<&[C64]>,
    cfg: &FlowConfig,
) -> Result<(SampleDiagnostics, Option<Vec<C64>>)> {
    let xdot = euler_rhs(x, cfg)?;
    let integrals = motion_integrals(x, &cfg.ks, &cfg.xis, cfg)?;
    let mut lax: f64 = 0.0;
    for xi in LAX_XI_SAMPLES {
        lax = lax.max(lax_residual(x, &xdot, xi, cfg)?);
    }
    let (spectrum_drift, spectrum) = if cfg.track_spectrum {
        let spec = lax_spectrum(x, cfg)?;
        let drift = reference_spectrum.map(|r| {
            let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            r.iter().zip(&spec).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
        });
        (Some(drift.unwrap_or(0.0)), Some(spec))
    } else {
        (None, None)
    };
    let probes = [x.adjoint(), xdot.clone(), x.product(x)?];
    // the pairing needs certified traces; an allowed uncertified run reports NaN
    let weak_residual = match weak_form_residual(x, &xdot, &probes, &cfg.twist, cfg.weight) {
        Err(Error::NotCertified(_)) if cfg.allow_uncertified => f64::NAN,
        other => other?,
    };
    let full = step_once(x, h, cfg)?;
    let half = step_once(&step_once(x, 0.5 * h, cfg)?, 0.5 * h, cfg)?;
    let local_error = full.checked_sub(&half)?.dense().max_abs();
    if let Some(tol) = cfg.step_tolerance {
        if local_error > tol {
            return Err(Error::StepRejected {
                time,
                estimate: local_error,
                tolerance: tol,
            });
        }
    }
    let truncation_estimate = integrals.truncation_estimate.max(x.decay_report().truncation_estimate);
    Ok((
        SampleDiagnostics {
            time,
            integrals,
            lax_residual: lax,
            spectrum_drift,
            weak_residual,
            truncation_estimate,
            boundary_mass: x.kernel().boundary_mass(),
            local_error,
        },
        spectrum,
    ))
}

/// Fixed-step integration from `x0` over `[0, T]`.
///
/// The number of steps is `ceil(T/h)` and the step is adjusted to land on `T`.
pub fn integrate(x0: &RegularizedOperator, cfg: &FlowConfig) -> Result<TrajectoryRecord> {
    let steps = cfg.steps()?;
    if x0.basis() != cfg.basis {
        return Err(Error::BasisMismatch {
            left: x0.basis().cutoff(),
            right: cfg.basis.cutoff(),
        });
    }
    let h = cfg.horizon / steps as f64;
    if !x0.decay_report().certified && !cfg.allow_uncertified {
        return Err(Error::NotCertified("initial state kernel decay".into()));
    }
    let initial_min_singular = linalg::singular_values(x0.dense().entries()).last().copied().unwrap_or(0.0);
    if !(initial_min_singular > 0.0) {
        return Err(Error::InvalidArgument("initial state is singular on the window".into()));
    }
    let hypothesis_residuals = check_lax_hypotheses(x0, cfg)?;

    let mut x = x0.clone();
    let (first, reference) = sample(&x, 0.0, h, None, cfg)?;
    let mut record = TrajectoryRecord {
        times: vec![0.0],
        states: vec![x.clone()],
        samples: vec![first],
        step: h,
        steps,
        initial_min_singular,
        hypothesis_residuals,
        certified: x0.decay_report().certified,
    };
    for n in 1..=steps {
        x = step_once(&x, h, cfg)?;
        if !x.decay_report().certified && !cfg.allow_uncertified {
            return Err(Error::NotCertified(format!("state kernel decay lost at step {n}")));
        }
        record.certified &= x.decay_report().certified;
        if n % cfg.stride == 0 || n == steps {
            let t = n as f64 * h;
            let (s, _) = sample(&x, t, h, reference.as_deref(), cfg)?;
            record.certified &= s.integrals.certified;
            record.times.push(t);
            record.states.push(x.clone());
            record.samples.push(s);
        }
    }
    record.certified &= record.samples[0].integrals.certified;
    Ok(record)
}

/// Singular values of the Jacobian of `(c_{1,0}, …, c_{K,0})` along the given
/// perturbation directions, by central differences.
pub fn independence_probe(
    x0: &RegularizedOperator,
    directions: &[RegularizedOperator],
    max_k: u32,
    eps: f64,
    cfg: &FlowConfig,
) -> Result<Vec<f64>> {
    let ks: Vec<u32> = (1..=max_k).collect();
    let c0 = |x: &RegularizedOperator| -> Result<Vec<C64>> {
        let mi = motion_integrals(x, &ks, &[], cfg)?;
        Ok(mi.table.iter().map(|row| row[0]).collect())
    };
    let mut jac = ndarray::Array2::<C64>::zeros((ks.len(), directions.len()));
    for (col, d) in directions.iter().enumerate() {
        let plus = c0(&x0.checked_add(&d.scale(C64::new(eps, 0.0)))?)?;
        let minus = c0(&x0.checked_sub(&d.scale(C64::new(eps, 0.0)))?)?;
        for row in 0..ks.len() {
            jac[[row, col]] = (plus[row] - minus[row]) / (2.0 * eps);
        }
    }
    Ok(linalg::singular_values(&jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::pairing::Q0Kind;
    use crate::spectral::{weight_eigenvalue, FourierOperator};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn basis(n: usize) -> ModeBasis {
        ModeBasis::new(n).unwrap()
    }

    fn identity(b: ModeBasis) -> RegularizedOperator {
        RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), b)
    }

    #[test]
    fn identity_is_an_equilibrium() {
        let b = basis(12);
        for twist in [TwistSpec::laplacian_power(1), TwistSpec::heat(0.3).unwrap(), TwistSpec::identity()] {
            let cfg = FlowConfig::new(twist, b);
            let rhs = euler_rhs(&identity(b), &cfg).unwrap();
            assert!(rhs.dense().is_zero());
        }
    }

    #[test]
    fn shift_rhs_under_laplacian_twist() {
        let b = basis(16);
        let n = 2;
        let x = RegularizedOperator::from_kernel(multiplication_operator(&TrigPoly::monomial(n, c(1.0, 0.0)), b).operator);
        let rhs = euler_rhs(&x, &FlowConfig::new(TwistSpec::laplacian_power(1), b)).unwrap().dense();
        for p in -12i64..=12 {
            let expected = weight_eigenvalue(p - n) / weight_eigenvalue(p) - 1.0;
            assert!((rhs.entry(p, p) - c(expected, 0.0)).norm() < 1e-14, "mode {p}");
        }
    }

    #[test]
    fn shift_rhs_under_heat_twist() {
        let b = basis(16);
        let (l, s) = (1, 0.2);
        let x = RegularizedOperator::from_kernel(multiplication_operator(&TrigPoly::monomial(l, c(1.0, 0.0)), b).operator);
        let rhs = euler_rhs(&x, &FlowConfig::new(TwistSpec::heat(s).unwrap(), b)).unwrap().dense();
        for p in -12i64..=12 {
            let expected = (s * (2 * p * l - l * l) as f64).exp() - 1.0;
            assert!((rhs.entry(p, p) - c(expected, 0.0)).norm() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn heat_dressed_identity_is_diagonal() {
        let b = basis(24);
        let x = heat_dressed_identity(&TrigPoly::monomial(3, c(1.0, 0.0)), b);
        let k = x.kernel();
        assert!((k.entry(3, 3) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((k.entry(4, 4).re - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.entry(3, 4), c(0.0, 0.0));
    }

    #[test]
    fn lax_identity_on_random_states() {
        let b = basis(16);
        let mut corpus = Corpus::new(b, 2);
        let twist = TwistSpec::new(Q0Kind::LaplacianPower(1), InertiaSpec::new(1.0, 0.4, 5.0).unwrap()).unwrap();
        let cfg = FlowConfig::new(twist, b);
        for _ in 0..5 {
            let x = RegularizedOperator::identity_plus(corpus.smoothing(0.3).kernel().clone());
            let xdot = euler_rhs(&x, &cfg).unwrap();
            for xi in LAX_XI_SAMPLES {
                assert!(lax_residual(&x, &xdot, xi, &cfg).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn lax_hypothesis_violation() {
        let b = basis(8);
        let mut cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        let mut corpus = Corpus::new(b, 9);
        cfg.lax_j = corpus.element();
        let x = RegularizedOperator::identity_plus(corpus.smoothing(0.3).kernel().clone());
        assert!(matches!(check_lax_hypotheses(&x, &cfg), Err(Error::LaxHypothesis(_))));
    }

    #[test]
    fn integrals_at_identity() {
        let b = basis(16);
        let cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        let mi = motion_integrals(&identity(b), &[1, 2, 3, 4], &[c(0.0, 0.0), c(1.0, 0.0)], &cfg).unwrap();
        for (a, row) in mi.table.iter().enumerate() {
            let k = a + 1;
            for (j, v) in row.iter().enumerate() {
                let expected = if j == k { 0.0 } else { 1.0 };
                assert!((v - c(expected, 0.0)).norm() < 1e-14);
            }
        }
        // I_1(0) = tr^Q(Q₀)
        assert!((mi.values[0][0] - c(1.0, 0.0)).norm() < 1e-14);
        // I_2(1) = c_{2,0} + 2 c_{2,1} + c_{2,2} = 3
        assert!((mi.values[1][1] - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn integrals_of_dressed_state_exceed_one() {
        let b = basis(24);
        let cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        let x = heat_dressed_identity(&TrigPoly::monomial(3, c(1.0, 0.0)), b);
        let mi = motion_integrals(&x, &[1, 2, 3], &[], &cfg).unwrap();
        for row in &mi.table {
            for v in &row[..row.len() - 1] {
                assert!(v.re > 1.0 && v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn step_precondition() {
        let b = basis(8);
        let mut cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        cfg.step = 2.0;
        assert!(matches!(integrate(&identity(b), &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn identity_trajectory_is_constant() {
        let b = basis(8);
        let mut cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        cfg.step = 0.1;
        cfg.stride = 2;
        let rec = integrate(&identity(b), &cfg).unwrap();
        assert_eq!(rec.samples.len(), 6);
        assert_eq!(rec.max_integral_drift(), 0.0);
        assert_eq!(rec.max_spectrum_drift(), Some(0.0));
        assert!(rec.states.iter().all(|s| s == &identity(b)));
    }

    #[test]
    fn short_trajectory_conserves() {
        let b = basis(16);
        let mut corpus = Corpus::new(b, 4);
        for (integrator, tol) in [(Integrator::Rk4, 1e-6), (Integrator::ImplicitMidpoint, 1e-5)] {
            let mut cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
            cfg.integrator = integrator;
            cfg.step = 0.01;
            cfg.horizon = 0.2;
            cfg.stride = 5;
            let x0 = RegularizedOperator::identity_plus(corpus.smoothing(0.2).kernel().clone());
            let rec = integrate(&x0, &cfg).unwrap();
            assert!(rec.max_integral_drift() < tol, "{integrator:?}: {}", rec.max_integral_drift());
            assert!(rec.max_lax_residual() < 1e-9);
            assert!(rec.samples.iter().all(|s| s.weak_residual < 1e-10));
        }
    }

    #[test]
    fn step_rejection() {
        let b = basis(12);
        let mut corpus = Corpus::new(b, 4);
        let mut cfg = FlowConfig::new(TwistSpec::laplacian_power(1), b);
        cfg.step = 0.1;
        cfg.horizon = 0.2;
        cfg.step_tolerance = Some(1e-16);
        let x0 = RegularizedOperator::identity_plus(corpus.smoothing(0.5).kernel().clone());
        assert!(matches!(integrate(&x0, &cfg), Err(Error::StepRejected { .. })));
    }

    #[test]
    fn gradient_first_order() {
        let b = basis(10);
        let twist = TwistSpec::laplacian_power(1);
        let mut corpus = Corpus::new(b, 8);
        let p = corpus.element();
        let d1 = functional_derivative_hk(&p, 1, &twist).unwrap();
        assert_eq!(d1.symbolic(), &SpectralPolynomial::power(-1));
        assert!(d1.kernel().is_zero());
        let d2 = functional_derivative_hk(&identity(b), 2, &twist).unwrap();
        assert_eq!(d2.symbolic(), &SpectralPolynomial::power(-1).scale(c(2.0, 0.0)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = basis(12);
        let twist = TwistSpec::laplacian_power(1);
        let plain = twist;
        let q = WeightSpec::ShiftedLaplacian;
        let mut corpus = Corpus::new(b, 21);
        let p = RegularizedOperator::identity_plus(corpus.smoothing(0.5).kernel().clone());
        let nu = corpus.smoothing(1.0);
        let eps = 1e-5;
        for k in 1..=3 {
            let hp = hamiltonian(&p.checked_add(&nu.scale(c(eps, 0.0))).unwrap(), k, q).unwrap();
            let hm = hamiltonian(&p.checked_sub(&nu.scale(c(eps, 0.0))).unwrap(), k, q).unwrap();
            let fd = (hp - hm) / (2.0 * eps);
            let grad = functional_derivative_hk(&p, k, &twist).unwrap();
            let an = pairing(&nu, &grad, &plain, q).unwrap().full;
            assert!((fd - an).norm() <= 1e-6 * an.norm().max(1e-12), "k={k}: {fd} vs {an}");
        }
    }

    #[test]
    fn left_ordered_gradient_fails_off_diagonal() {
        let b = basis(12);
        let twist = TwistSpec::laplacian_power(1);
        let q = WeightSpec::ShiftedLaplacian;
        let mut corpus = Corpus::new(b, 21);
        let p = RegularizedOperator::identity_plus(corpus.smoothing(0.5).kernel().clone());
        let nu = corpus.smoothing(1.0);
        let eps = 1e-5;
        let hp = hamiltonian(&p.checked_add(&nu.scale(c(eps, 0.0))).unwrap(), 2, q).unwrap();
        let hm = hamiltonian(&p.checked_sub(&nu.scale(c(eps, 0.0))).unwrap(), 2, q).unwrap();
        let fd = (hp - hm) / (2.0 * eps);
        let left = functional_derivative_hk_left(&p, 2, &twist).unwrap();
        let an = pairing(&nu, &left, &twist, q).unwrap().full;
        assert!((fd - an).norm() > 1e-3 * fd.norm());
        let diag = RegularizedOperator::from_kernel(FourierOperator::from_diagonal(b, |k| c(0.3 / (1.0 + (k * k) as f64), 0.0)));
        let p = RegularizedOperator::identity_plus(diag.kernel().clone());
        let l = functional_derivative_hk_left(&p, 3, &twist).unwrap();
        let r = functional_derivative_hk(&p, 3, &twist).unwrap();
        assert!(l.checked_sub(&r).unwrap().dense().max_abs() < 1e-14);
    }

    #[test]
    fn weak_euler_trivial_cases() {
        let b = basis(10);
        let twist = TwistSpec::laplacian_power(1);
        let q = WeightSpec::ShiftedLaplacian;
        let mut corpus = Corpus::new(b, 3);
        let probes: Vec<_> = (0..6).map(|_| corpus.element()).collect();
        let sol = solve_weak_euler(&identity(b), 2, &probes, &twist, q).unwrap();
        assert!(sol.dpdt.dense().max_abs() < 1e-12);
        let diag: Vec<_> = (1..=4)
            .map(|m| RegularizedOperator::from_kernel(FourierOperator::from_diagonal(b, move |k| c((-((k - m) * (k - m)) as f64).exp(), 0.0))))
            .collect();
        let p = corpus.element();
        let sol = solve_weak_euler(&p, 1, &diag, &twist, q).unwrap();
        assert!(sol.dpdt.dense().max_abs() < 1e-12);
        let twice = vec![probes[0].clone(), probes[0].clone()];
        assert!(matches!(solve_weak_euler(&p, 2, &twice, &twist, q), Err(Error::DegenerateGram(_))));
    }

    #[test]
    fn weak_euler_solution_is_consistent() {
        let b = basis(12);
        let twist = TwistSpec::laplacian_power(1);
        let q = WeightSpec::ShiftedLaplacian;
        let mut corpus = Corpus::new(b, 13);
        let p = RegularizedOperator::identity_plus(corpus.smoothing(0.3).kernel().clone());
        let probes: Vec<_> = (0..12).map(|_| corpus.element()).collect();
        let sol = solve_weak_euler(&p, 2, &probes, &twist, q).unwrap();
        assert!(sol.residual <= 1e-8, "{}", sol.residual);
    }
}
