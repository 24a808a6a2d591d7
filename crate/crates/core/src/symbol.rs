//! Formal classical symbols on the circle.
//!
//! A symbol of order `d` is a list of homogeneous components
//! `σ_{d-j}(x, ξ) = b±_j(x) ξ^{d-j}`, with `b⁺` used for `ξ > 0` and `b⁻` for
//! `ξ < 0`. Writing the branches against `ξ^e` rather than `|ξ|^e` makes
//! `∂_ξ` identical on both branches, and the odd class becomes `b⁻ = b⁺`.
//!
//! # Literal format
//!
//! ```text
//! # comment
//! order = 1
//! complete = true          # optional, default false
//! 0: plus={0:1i} minus={0:1i}
//! 1: plus={0:1} minus={0:1}
//! ```
//!
//! Component lines are `j: plus={n:c,...} minus={n:c,...}` with `j` the
//! depth index (degree `order - j`). Omitted indices below the largest given
//! one are zero. Coefficients are `re`, `imi`, `re+imi` or `re-imi`.
//! `complete = true` declares every component past the listed ones to be
//! exactly zero, as for differential and multiplication operators.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spectral::{parse_trig_poly, FourierOperator, ModeBasis, TrigPoly};

/// Default number of lower-order components kept beyond the principal one.
pub const DEFAULT_DEPTH: usize = 8;

/// One homogeneous component, split by the sign of `ξ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Branches {
    pub plus: TrigPoly,
    pub minus: TrigPoly,
}

impl Branches {
    pub fn new(plus: TrigPoly, minus: TrigPoly) -> Self {
        Self { plus, minus }
    }

    /// Same polynomial on both branches.
    pub fn even_in_xi(a: TrigPoly) -> Self {
        Self {
            minus: a.clone(),
            plus: a,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.plus.is_zero() && self.minus.is_zero()
    }

    fn max_abs(&self) -> f64 {
        self.plus.max_abs().max(self.minus.max_abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSymbol {
    order: i64,
    components: Vec<Branches>,
    complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityClass {
    Odd,
    Even,
    Neither,
}

impl fmt::Display for ParityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityClass::Odd => "odd",
            ParityClass::Even => "even",
            ParityClass::Neither => "neither",
        })
    }
}

fn falling_factorial(e: i64, mu: u32) -> f64 {
    (0..mu as i64).map(|i| (e - i) as f64).product()
}

fn factorial(mu: u32) -> f64 {
    (1..=mu as u64).map(|i| i as f64).product()
}

impl ClassicalSymbol {
    /// A symbol with the given components; at least one component is required.
    pub fn new(order: i64, components: Vec<Branches>, complete: bool) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("a symbol needs at least one component".into()));
        }
        Ok(Self {
            order,
            components,
            complete,
        })
    }

    pub fn zero(order: i64, depth: usize) -> Self {
        Self {
            order,
            components: vec![Branches::default(); depth + 1],
            complete: true,
        }
    }

    pub fn identity() -> Self {
        Self::multiplication(TrigPoly::constant(C64::new(1.0, 0.0)))
    }

    /// Symbol of the multiplication operator `M_a`.
    pub fn multiplication(a: TrigPoly) -> Self {
        Self {
            order: 0,
            components: vec![Branches::even_in_xi(a)],
            complete: true,
        }
    }

    /// Symbol of `Σ_r a_r(x) D^r` with `D = -i d/dx`; `coeffs[r]` multiplies `D^r`.
    pub fn differential(coeffs: &[TrigPoly]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("no coefficients".into()));
        }
        let order = coeffs.len() as i64 - 1;
        let components = coeffs.iter().rev().cloned().map(Branches::even_in_xi).collect();
        Ok(Self {
            order,
            components,
            complete: true,
        })
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// Largest stored depth index `J`.
    pub fn depth(&self) -> usize {
        self.components.len() - 1
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn components(&self) -> &[Branches] {
        &self.components
    }

    /// Component `j`; zero past the stored depth when the symbol is complete.
    pub fn component(&self, j: usize) -> Result<Branches> {
        match self.components.get(j) {
            Some(c) => Ok(c.clone()),
            None if self.complete => Ok(Branches::default()),
            None => Err(Error::DepthExceeded {
                requested: j,
                available: self.depth(),
            }),
        }
    }

    /// Component of homogeneity degree `deg`, if stored.
    pub fn degree_component(&self, deg: i64) -> Option<&Branches> {
        let j = self.order - deg;
        (j >= 0).then(|| self.components.get(j as usize)).flatten()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Branches::is_zero)
    }

    /// True when every stored component has nonnegative degree, so that
    /// composition series terminate.
    fn is_polynomial(&self) -> bool {
        self.complete && self.order >= self.depth() as i64
    }

    /// Pads with zeros (complete symbols) or truncates to exactly `depth + 1` components.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        let components = (0..=depth).map(|j| self.component(j)).collect::<Result<Vec<_>>>()?;
        let complete = self.complete && self.components.iter().skip(depth + 1).all(Branches::is_zero);
        Ok(Self {
            order: self.order,
            components,
            complete,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            order: self.order,
            components: self
                .components
                .iter()
                .map(|b| Branches::new(b.plus.scale(c), b.minus.scale(c)))
                .collect(),
            complete: self.complete,
        }
    }

    /// Difference of two symbols of equal order over their common depth.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::InvalidArgument(format!(
                "orders differ: {} vs {}",
                self.order, other.order
            )));
        }
        let depth = match (self.complete, other.complete) {
            (true, true) => self.depth().max(other.depth()),
            (true, false) => other.depth(),
            (false, true) => self.depth(),
            (false, false) => self.depth().min(other.depth()),
        };
        let components = (0..=depth)
            .map(|j| {
                let a = self.component(j)?;
                let b = other.component(j)?;
                Ok(Branches::new(&a.plus - &b.plus, &a.minus - &b.minus))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            order: self.order,
            components,
            complete: self.complete && other.complete,
        })
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(Branches::max_abs).fold(0.0, f64::max)
    }

    /// Left quantization `Σ_j b_j(x) D^{d-j}` on the mode window.
    ///
    /// Only defined for complete symbols with nonnegative degrees; the `ξ > 0`
    /// branch acts on mode 0.
    pub fn quantize(&self, basis: ModeBasis) -> Result<FourierOperator> {
        if !self.is_polynomial() {
            return Err(Error::InvalidArgument(
                "quantization needs a complete symbol with nonnegative degrees".into(),
            ));
        }
        Ok(FourierOperator::from_fn(basis, |row, col| {
            self.components
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let e = (self.order - j as i64) as i32;
                    let branch = if col >= 0 { &b.plus } else { &b.minus };
                    branch.coeff(row - col) * (col as f64).powi(e)
                })
                .sum()
        }))
    }

    /// Parses the literal format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut order = None;
        let mut complete = false;
        let mut comps: Vec<(usize, Branches)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| Error::Parse {
                line: lineno + 1,
                message: message.to_string(),
            };
            if let Some((key, value)) = line.split_once('=').filter(|(k, _)| !k.contains(':')) {
                match key.trim() {
                    "order" => order = Some(value.trim().parse::<i64>().map_err(|_| err("bad order"))?),
                    "complete" => {
                        complete = value.trim().parse::<bool>().map_err(|_| err("expected true or false"))?
                    }
                    other => return Err(err(&format!("unknown key `{other}`"))),
                }
                continue;
            }
            let (idx, rest) = line.split_once(':').ok_or_else(|| err("expected `j: plus=... minus=...`"))?;
            let j = idx.trim().parse::<usize>().map_err(|_| err("bad component index"))?;
            let rest = rest.trim();
            let plus_start = rest.find("plus=").ok_or_else(|| err("missing plus="))?;
            let minus_start = rest.find("minus=").ok_or_else(|| err("missing minus="))?;
            let (plus_text, minus_text) = if plus_start < minus_start {
                (&rest[plus_start + 5..minus_start], &rest[minus_start + 6..])
            } else {
                (&rest[plus_start + 5..], &rest[minus_start + 6..plus_start])
            };
            let plus = parse_trig_poly(plus_text).ok_or_else(|| err("bad plus polynomial"))?;
            let minus = parse_trig_poly(minus_text).ok_or_else(|| err("bad minus polynomial"))?;
            if comps.iter().any(|(k, _)| *k == j) {
                return Err(err(&format!("component {j} given twice")));
            }
            comps.push((j, Branches::new(plus, minus)));
        }
        let order = order.ok_or(Error::Parse {
            line: 0,
            message: "missing `order`".into(),
        })?;
        let len = comps.iter().map(|(j, _)| j + 1).max().unwrap_or(1);
        let mut components = vec![Branches::default(); len];
        for (j, b) in comps {
            components[j] = b;
        }
        Self::new(order, components, complete)
    }
}

impl fmt::Display for ClassicalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order = {}", self.order)?;
        writeln!(f, "complete = {}", self.complete)?;
        for (j, b) in self.components.iter().enumerate() {
            writeln!(f, "{j}: plus={} minus={}", b.plus, b.minus)?;
        }
        Ok(())
    }
}

/// Composition `A∘B` with components `0..=depth`.
///
/// `σ_{a+b-j}(AB) = Σ_{μ+k+l=j} (1/μ!) ∂_ξ^μ σ_{a-k}(A) · D_x^μ σ_{b-l}(B)`,
/// evaluated branchwise.
pub fn compose_symbols(a: &ClassicalSymbol, b: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    let ca = (0..=depth).map(|j| a.component(j)).collect::<Result<Vec<_>>>()?;
    let cb = (0..=depth).map(|j| b.component(j)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        let mut plus = TrigPoly::zero();
        let mut minus = TrigPoly::zero();
        for mu in 0..=j {
            let inv_fact = 1.0 / factorial(mu as u32);
            for k in 0..=(j - mu) {
                let l = j - mu - k;
                let weight = falling_factorial(a.order - k as i64, mu as u32) * inv_fact;
                if weight == 0.0 || ca[k].is_zero() || cb[l].is_zero() {
                    continue;
                }
                let w = C64::new(weight, 0.0);
                plus = &plus + &(&ca[k].plus * &cb[l].plus.dx_power(mu as u32)).scale(w);
                minus = &minus + &(&ca[k].minus * &cb[l].minus.dx_power(mu as u32)).scale(w);
            }
        }
        out.push(Branches::new(plus, minus));
    }
    let complete = a.is_polynomial() && b.is_polynomial() && depth as i64 >= a.order + b.order;
    Ok(ClassicalSymbol {
        order: a.order + b.order,
        components: out,
        complete,
    })
}

/// Parity class of a symbol; zero components constrain nothing.
pub fn classify_parity(a: &ClassicalSymbol) -> ParityClass {
    let nonzero: Vec<&Branches> = a.components.iter().filter(|b| !b.is_zero()).collect();
    if nonzero.iter().all(|b| b.minus == b.plus) {
        ParityClass::Odd
    } else if nonzero.iter().all(|b| b.minus == -&b.plus) {
        ParityClass::Even
    } else {
        ParityClass::Neither
    }
}

/// Parity of a composition from the parities of its factors.
pub fn parity_of_product(p: ParityClass, q: ParityClass) -> Result<ParityClass> {
    use ParityClass::*;
    match (p, q) {
        (Neither, _) | (_, Neither) => Err(Error::NeitherClass),
        (Odd, Odd) | (Even, Even) => Ok(Odd),
        _ => Ok(Even),
    }
}

/// Wodzicki residue on the circle: `(1/2π)∫ (σ_{-1}(x,1) + σ_{-1}(x,-1)) dx`.
///
/// In the branch representation `σ_{-1}(x,-1) = -b⁻(x)`, so this is the
/// difference of the zeroth coefficients.
pub fn wodzicki_residue(a: &ClassicalSymbol) -> C64 {
    a.degree_component(-1)
        .map(|b| b.plus.mean() - b.minus.mean())
        .unwrap_or_default()
}

fn min_modulus_on_grid(a: &TrigPoly, points: usize) -> f64 {
    (0..points)
        .map(|i| a.eval(2.0 * std::f64::consts::PI * i as f64 / points as f64).norm())
        .fold(f64::INFINITY, f64::min)
}

fn check_elliptic(b: &TrigPoly) -> Result<C64> {
    let scale = b.max_abs();
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if scale == 0.0 {
        return Err(Error::NonElliptic("principal symbol vanishes identically".into()));
    }
    let mut points = 64;
    // refine until the grid resolves the highest frequency a few times over
    while points < 8 * (b.support_radius() as usize + 1) {
        points *= 2;
    }
    for _ in 0..3 {
        if min_modulus_on_grid(b, points) <= tol {
            return Err(Error::NonElliptic(format!(
                "principal coefficient vanishes on a {points}-point grid"
            )));
        }
        points *= 2;
    }
    if !b.is_constant() {
        return Err(Error::NonConstantPrincipal);
    }
    Ok(b.mean())
}

/// Parametrix of an elliptic symbol with x-independent principal coefficients.
///
/// The result `B` has order `-d` and satisfies `A∘B = 1` through component `depth`.
pub fn invert_elliptic_symbol(a: &ClassicalSymbol, depth: usize) -> Result<ClassicalSymbol> {
    let lead = a.component(0)?;
    let inv_plus = C64::new(1.0, 0.0) / check_elliptic(&lead.plus)?;
    let inv_minus = C64::new(1.0, 0.0) / check_elliptic(&lead.minus)?;
    let ca = (0..=depth).map(|j| a.component(j)).collect::<Result<Vec<_>>>()?;
    let mut inv: Vec<Branches> = vec![Branches::new(
        TrigPoly::constant(inv_plus),
        TrigPoly::constant(inv_minus),
    )];
    for j in 1..=depth {
        // component j of A∘B without the a_0 b_j term
        let mut plus = TrigPoly::zero();
        let mut minus = TrigPoly::zero();
        for mu in 0..=j {
            let inv_fact = 1.0 / factorial(mu as u32);
            for k in 0..=(j - mu) {
                let l = j - mu - k;
                if l == j {
                    continue;
                }
                let weight = falling_factorial(a.order - k as i64, mu as u32) * inv_fact;
                if weight == 0.0 {
                    continue;
                }
                let w = C64::new(weight, 0.0);
                plus = &plus + &(&ca[k].plus * &inv[l].plus.dx_power(mu as u32)).scale(w);
                minus = &minus + &(&ca[k].minus * &inv[l].minus.dx_power(mu as u32)).scale(w);
            }
        }
        inv.push(Branches::new(plus.scale(-inv_plus), minus.scale(-inv_minus)));
    }
    Ok(ClassicalSymbol {
        order: -a.order,
        components: inv,
        complete: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn k(v: C64) -> TrigPoly {
        TrigPoly::constant(v)
    }

    fn d_dx() -> ClassicalSymbol {
        // d/dx = i D
        ClassicalSymbol::differential(&[TrigPoly::zero(), k(c(0.0, 1.0))]).unwrap()
    }

    fn one_plus_d_dx() -> ClassicalSymbol {
        ClassicalSymbol::differential(&[k(c(1.0, 0.0)), k(c(0.0, 1.0))]).unwrap()
    }

    #[test]
    fn derivative_squared() {
        let s = compose_symbols(&d_dx(), &d_dx(), 2).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.components()[0], Branches::even_in_xi(k(c(-1.0, 0.0))));
        assert!(s.components()[1].is_zero() && s.components()[2].is_zero());
        assert!(s.is_complete());
    }

    #[test]
    fn d_times_shift() {
        let d = ClassicalSymbol::differential(&[TrigPoly::zero(), k(c(1.0, 0.0))]).unwrap();
        let e = TrigPoly::monomial(1, c(1.0, 0.0));
        let s = compose_symbols(&d, &ClassicalSymbol::multiplication(e.clone()), 1).unwrap();
        assert_eq!(s.components()[0], Branches::even_in_xi(e.clone()));
        assert_eq!(s.components()[1], Branches::even_in_xi(e));
    }

    #[test]
    fn compose_with_zero() {
        let s = compose_symbols(&one_plus_d_dx(), &ClassicalSymbol::zero(-2, 3), 3).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn depth_exceeded() {
        let inv = invert_elliptic_symbol(&one_plus_d_dx(), 2).unwrap();
        assert!(matches!(
            compose_symbols(&inv, &inv, 3),
            Err(Error::DepthExceeded { .. })
        ));
    }

    #[test]
    fn parity_examples() {
        assert_eq!(classify_parity(&one_plus_d_dx()), ParityClass::Odd);
        let even = ClassicalSymbol::new(0, vec![Branches::new(k(c(1.0, 0.0)), k(c(-1.0, 0.0)))], false).unwrap();
        assert_eq!(classify_parity(&even), ParityClass::Even);
        let neither = ClassicalSymbol::new(0, vec![Branches::new(k(c(1.0, 0.0)), TrigPoly::zero())], false).unwrap();
        assert_eq!(classify_parity(&neither), ParityClass::Neither);
    }

    #[test]
    fn parity_table() {
        use ParityClass::*;
        assert_eq!(parity_of_product(Odd, Odd).unwrap(), Odd);
        assert_eq!(parity_of_product(Even, Even).unwrap(), Odd);
        assert_eq!(parity_of_product(Odd, Even).unwrap(), Even);
        assert_eq!(parity_of_product(Even, Odd).unwrap(), Even);
        assert_eq!(parity_of_product(Neither, Odd), Err(Error::NeitherClass));
    }

    #[test]
    fn parametrix_of_one_plus_derivative() {
        let a = one_plus_d_dx();
        let inv = invert_elliptic_symbol(&a, 8).unwrap();
        assert_eq!(inv.order(), -1);
        assert_eq!(inv.components()[0], Branches::even_in_xi(k(c(0.0, -1.0))));
        let prod = compose_symbols(&a, &inv, 8).unwrap();
        let id = ClassicalSymbol::identity().with_depth(8).unwrap();
        assert!(prod.difference(&id).unwrap().max_abs() < 1e-14);
        assert_eq!(wodzicki_residue(&inv), c(0.0, 0.0));
    }

    #[test]
    fn parametrix_of_identity_and_square() {
        let inv = invert_elliptic_symbol(&ClassicalSymbol::identity(), 4).unwrap();
        assert_eq!(inv.components()[0], Branches::even_in_xi(k(c(1.0, 0.0))));
        assert!(inv.components()[1..].iter().all(Branches::is_zero));
        let xi2 = ClassicalSymbol::differential(&[TrigPoly::zero(), TrigPoly::zero(), k(c(1.0, 0.0))]).unwrap();
        let inv = invert_elliptic_symbol(&xi2, 2).unwrap();
        assert_eq!(inv.order(), -2);
        assert_eq!(inv.components()[0], Branches::even_in_xi(k(c(1.0, 0.0))));
    }

    #[test]
    fn parametrix_rejects_bad_principal() {
        let vanishing = ClassicalSymbol::multiplication(TrigPoly::from_pairs([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]));
        assert!(matches!(invert_elliptic_symbol(&vanishing, 2), Err(Error::NonElliptic(_))));
        let varying = ClassicalSymbol::multiplication(TrigPoly::from_pairs([(0, c(3.0, 0.0)), (1, c(1.0, 0.0))]));
        assert_eq!(invert_elliptic_symbol(&varying, 2), Err(Error::NonConstantPrincipal));
        let one_sided = ClassicalSymbol::new(0, vec![Branches::new(k(c(1.0, 0.0)), TrigPoly::zero())], false).unwrap();
        assert!(matches!(invert_elliptic_symbol(&one_sided, 2), Err(Error::NonElliptic(_))));
    }

    #[test]
    fn residue_by_hand() {
        let s = ClassicalSymbol::new(-1, vec![Branches::new(k(c(1.0, 0.0)), TrigPoly::zero())], false).unwrap();
        assert_eq!(wodzicki_residue(&s), c(1.0, 0.0));
        assert_eq!(wodzicki_residue(&one_plus_d_dx()), c(0.0, 0.0));
    }

    #[test]
    fn literal_round_trip() {
        let text = "# (1 + d/dx)\norder = 1\ncomplete = true\n0: plus={0:1i} minus={0:1i}\n1: plus={0:1} minus={0:1}\n";
        let s = ClassicalSymbol::parse(text).unwrap();
        assert_eq!(s, one_plus_d_dx());
        assert_eq!(ClassicalSymbol::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn literal_errors() {
        assert!(matches!(ClassicalSymbol::parse("0: plus={} minus={}"), Err(Error::Parse { .. })));
        let e = ClassicalSymbol::parse("order = 0\n0: plus={0:1}\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 2, message: "missing minus=".into() });
    }

    #[test]
    fn quantization_matches_operator_product() {
        let basis = ModeBasis::new(16).unwrap();
        let a = ClassicalSymbol::differential(&[
            TrigPoly::monomial(1, c(0.5, 0.0)),
            TrigPoly::from_pairs([(0, c(1.0, 0.0)), (-2, c(0.0, 0.3))]),
        ])
        .unwrap();
        let b = ClassicalSymbol::differential(&[
            TrigPoly::monomial(-1, c(0.2, 0.1)),
            TrigPoly::zero(),
            TrigPoly::monomial(1, c(1.0, 0.0)),
        ])
        .unwrap();
        let ab = compose_symbols(&a, &b, 3).unwrap();
        assert!(ab.is_complete());
        let lhs = ab.quantize(basis).unwrap();
        let rhs = &a.quantize(basis).unwrap() * &b.quantize(basis).unwrap();
        // interior block away from the cut; band width 3
        for row in -12..=12 {
            for col in -12..=12 {
                assert!((lhs.entry(row, col) - rhs.entry(row, col)).norm() < 1e-9, "({row},{col})");
            }
        }
    }

    fn arb_poly() -> impl Strategy<Value = TrigPoly> {
        prop::collection::vec((-2i64..=2, -1.0f64..1.0, -1.0f64..1.0), 0..4)
            .prop_map(|v| TrigPoly::from_pairs(v.into_iter().map(|(n, re, im)| (n, C64::new(re, im)))))
    }

    fn arb_symbol(sign: f64) -> impl Strategy<Value = ClassicalSymbol> {
        (-2i64..=2, prop::collection::vec(arb_poly(), 4)).prop_map(move |(order, polys)| {
            let comps = polys
                .into_iter()
                .map(|p| Branches::new(p.clone(), p.scale(C64::new(sign, 0.0))))
                .collect();
            ClassicalSymbol::new(order, comps, false).unwrap()
        })
    }

    proptest! {
        #[test]
        fn residue_vanishes_on_commutators(a in arb_symbol(1.0), b in arb_symbol(-1.0)) {
            let ab = compose_symbols(&a, &b, 3).unwrap();
            let ba = compose_symbols(&b, &a, 3).unwrap();
            let r = wodzicki_residue(&ab) - wodzicki_residue(&ba);
            prop_assert!(r.norm() < 1e-12);
        }

        #[test]
        fn odd_symbols_have_no_residue(a in arb_symbol(1.0)) {
            prop_assert_eq!(wodzicki_residue(&a), C64::new(0.0, 0.0));
        }

        #[test]
        fn parity_closure(a in arb_symbol(1.0), b in arb_symbol(-1.0), c in arb_symbol(-1.0)) {
            for (x, y) in [(&a, &b), (&b, &a), (&b, &c), (&a, &a)] {
                let expected = parity_of_product(classify_parity(x), classify_parity(y)).unwrap();
                let got = classify_parity(&compose_symbols(x, y, 3).unwrap());
                // an all-zero product is compatible with both classes
                let prod = compose_symbols(x, y, 3).unwrap();
                prop_assert!(got == expected || prod.is_zero());
            }
        }

        #[test]
        fn associativity(a in arb_symbol(1.0), b in arb_symbol(-1.0), c in arb_symbol(1.0)) {
            let left = compose_symbols(&compose_symbols(&a, &b, 3).unwrap(), &c, 3).unwrap();
            let right = compose_symbols(&a, &compose_symbols(&b, &c, 3).unwrap(), 3).unwrap();
            let scale = 1.0 + left.max_abs();
            prop_assert!(left.difference(&right).unwrap().max_abs() < 1e-10 * scale);
        }
    }
}
